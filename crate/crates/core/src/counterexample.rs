//! The half-mass family `u_φ` and the counting-function diagnostics showing
//! that `R² log ψ(R)` cannot be replaced by `o(R² log ψ(R))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{Atom, Measure};
use crate::metrics::{Discrepancy, ErrorReport, GapReport, QuadratureParams};
use crate::potential::{LogPotential, Provenance, Zero, ZeroSet};
use crate::slowly_varying::SlowlyVarying;

pub use crate::slowly_varying::{build_slowly_varying_from_sigma, Sigma, SigmaPsi};

/// Mass carried by each radius of `u_φ`.
pub const U_PHI_MASS: f64 = 0.5;

/// `u_φ(z) = ½ Σ log|1 − z/r_k|` with `r_{k+1} = r_k φ(r_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UPhiSpec {
    pub phi: SlowlyVarying,
    pub r0: f64,
    pub count: usize,
}

impl UPhiSpec {
    pub fn new(phi: SlowlyVarying, count: usize) -> Self {
        Self { phi, r0: 2.0, count }
    }

    /// All radii up to `r_max`, starting at `r0 = 2`.
    pub fn up_to(phi: SlowlyVarying, r_max: f64) -> Result<Self> {
        let mut spec = Self::new(phi, 0);
        let mut r = spec.r0;
        while r <= r_max {
            spec.count += 1;
            let next = spec.phi.psi1(r);
            if !(next > r) {
                return Err(Error::Domain(format!("phi({r}) does not exceed 1")));
            }
            r = next;
        }
        Ok(spec)
    }

    pub fn radii(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count);
        let mut r = self.r0;
        for _ in 0..self.count {
            out.push(r);
            r = self.phi.psi1(r);
        }
        out
    }
}

pub fn build_u_phi(spec: &UPhiSpec) -> Result<Measure> {
    if spec.count == 0 {
        return Err(Error::Validation("u_phi needs at least one radius".into()));
    }
    if !(spec.r0 > 0.0 && spec.r0.is_finite()) {
        return Err(Error::Validation(format!("r0 = {}", spec.r0)));
    }
    let radii = spec.radii();
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !r.is_finite()) {
        return Err(Error::Domain("phi must keep the radii finite and increasing".into()));
    }
    Measure::new(radii.into_iter().map(|r| Atom::real(r, U_PHI_MASS)).collect())
}

/// Simple zeros at every second radius, `ρ_k = r_{2k}` counting the radii
/// from 1: the rounding that keeps `n(r, u) − n(r, f)` in `{0, ½}`.
pub fn best_rounding_zeros(radii: &[f64]) -> Result<ZeroSet> {
    ZeroSet::new(
        radii
            .iter()
            .skip(1)
            .step_by(2)
            .map(|&r| Zero::new(Complex64::new(r, 0.0), 1, Provenance::External))
            .collect(),
    )
}

/// For `α ≥ ½`, moves half a unit of mass from the innermost atom into the
/// `α log|z|` term: `½ log|1 − z/r₁| − ½ log|z|` is bounded at infinity, so
/// `(u, α)` and `(u − ½δ_{r₁}, α − ½)` have the same asymptotics.
pub fn reduce_alpha(u: &Measure, alpha: f64) -> Result<(Measure, f64)> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if alpha < 0.5 {
        return Ok((u.clone(), alpha));
    }
    let mut atoms = u.canonicalize().into_atoms();
    let first = atoms
        .first_mut()
        .filter(|a| a.mass >= U_PHI_MASS - 1e-12)
        .ok_or_else(|| Error::Domain("innermost atom carries less than 1/2".into()))?;
    first.mass -= U_PHI_MASS;
    atoms.retain(|a| a.mass > 1e-12);
    Ok((Measure::new(atoms)?, alpha - 0.5))
}

/// Shape of `n(r, u) − n(r, f)` beyond the first source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapPattern {
    /// Values in `{0, ½}`.
    ZeroHalf,
    /// Values in `{−½, ½}`.
    PlusMinusHalf,
    Other,
}

/// Counting functions on the grid and at every jump inside its range.
pub fn counting_gap_scan(u: &dyn LogPotential, f: &ZeroSet, alpha: f64, r_grid: &[f64]) -> Result<GapReport> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if r_grid.is_empty() || r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Validation("r grid must be nonempty and positive".into()));
    }
    let (lo, hi) = r_grid
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(l, h), &r| (l.min(r), h.max(r)));
    let mut rs: Vec<f64> = r_grid.to_vec();
    rs.extend(
        u.sources()
            .iter()
            .chain(f.sources().iter())
            .map(|s| s.0.norm())
            .filter(|&m| m >= lo && m <= hi),
    );
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let mut rep = GapReport { alpha, ..Default::default() };
    for r in rs {
        let (nu, nf) = (u.counting(r), f.counting(r));
        rep.big_n_u.push(u.integrated_counting(r)?);
        rep.big_n_f.push(f.integrated_counting(r)?);
        rep.n_u.push(nu);
        rep.n_f.push(nf);
        if (nu - nf - alpha).abs() > 0.5 + 1e-12 {
            rep.violations.push(r);
        }
        rep.r.push(r);
    }
    Ok(rep)
}

/// Classifies `n_u − n_f` at the report points from `r_from` on.
pub fn classify_gap(rep: &GapReport, r_from: f64) -> GapPattern {
    let vals: Vec<f64> = rep
        .r
        .iter()
        .zip(rep.n_u.iter().zip(&rep.n_f))
        .filter(|(r, _)| **r >= r_from)
        .map(|(_, (u, f))| u - f)
        .collect();
    let within = |set: &[f64]| vals.iter().all(|v| set.iter().any(|s| (v - s).abs() < 1e-9));
    if vals.is_empty() {
        GapPattern::Other
    } else if within(&[0.0, 0.5]) {
        GapPattern::ZeroHalf
    } else if within(&[-0.5, 0.5]) {
        GapPattern::PlusMinusHalf
    } else {
        GapPattern::Other
    }
}

/// One probe pair `t* < T*` of the integrated-counting argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthProbe {
    pub t_star: f64,
    pub big_t_star: f64,
    /// `|N(t*, u) − N(t*, f) − α log t*|`.
    pub gap_t: f64,
    /// Same at `T*`.
    pub gap_big_t: f64,
    /// `(½ − α − ε) log ψ(t*)`.
    pub lower_bound: f64,
    /// `ε log ψ(T*)`.
    pub threshold: f64,
    /// The gap at `T*` exceeds `ε log ψ(T*)`, so no `f` can be ε-close there.
    pub activates: bool,
}

/// Default probe tolerance.
pub const DEFAULT_EPSILON: f64 = 0.1;

fn n_gap(u: &dyn LogPotential, f: &ZeroSet, alpha: f64, r: f64) -> Result<f64> {
    Ok((u.integrated_counting(r)? - f.integrated_counting(r)? - alpha * r.ln()).abs())
}

pub fn n_gap_growth(
    u: &dyn LogPotential,
    f: &ZeroSet,
    alpha: f64,
    psi: &SlowlyVarying,
    probes: &[(f64, f64)],
    eps: f64,
) -> Result<Vec<GrowthProbe>> {
    probes
        .iter()
        .map(|&(t, big_t)| {
            if !(t > 0.0 && big_t >= t) {
                return Err(Error::Validation(format!("probe ({t}, {big_t}) must satisfy 0 < t <= T")));
            }
            let gap_big_t = n_gap(u, f, alpha, big_t)?;
            let threshold = eps * psi.log_eval(big_t);
            Ok(GrowthProbe {
                t_star: t,
                big_t_star: big_t,
                gap_t: n_gap(u, f, alpha, t)?,
                gap_big_t,
                lower_bound: (0.5 - alpha - eps) * psi.log_eval(t),
                threshold,
                activates: gap_big_t > threshold,
            })
        })
        .collect()
}

/// Probe pairs `(√2 r_i, r_{i+1}/√2)` inside each gap between consecutive
/// radii wider than a factor 2.
pub fn dyadic_probes(radii: &[f64]) -> Vec<(f64, f64)> {
    let s = std::f64::consts::SQRT_2;
    radii
        .windows(2)
        .filter(|w| w[1] > 2.0 * w[0])
        .map(|w| (w[0] * s, w[1] / s))
        .collect()
}

/// `∫_{|z|<R} |u − log|f| − α log|z|| dm` against `R² log ψ(R)`.
pub fn sharpness_ratio(
    u: &dyn LogPotential,
    f: &ZeroSet,
    alpha: f64,
    psi: &SlowlyVarying,
    r_grid: &[f64],
    quad: &QuadratureParams,
) -> Result<ErrorReport> {
    ErrorReport::build(&Discrepancy::new(u, f, alpha)?, psi, r_grid, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::check_annulus_condition;

    fn doubling(count: usize) -> UPhiSpec {
        UPhiSpec::new(SlowlyVarying::constant(2.0).unwrap(), count)
    }

    #[test]
    fn u_phi_examples() {
        let m = build_u_phi(&doubling(4)).unwrap();
        let radii: Vec<f64> = m.iter().map(|a| a.pos.re).collect();
        assert_eq!(radii, vec![2.0, 4.0, 8.0, 16.0]);
        assert!(m.iter().all(|a| a.mass == 0.5));
        assert_eq!(build_u_phi(&doubling(1)).unwrap().atoms(), [Atom::real(2.0, 0.5)]);
        assert!(build_u_phi(&doubling(0)).is_err());
    }

    fn annulus_condition(phi: SlowlyVarying, psi: &SlowlyVarying) -> crate::decomposition::AnnulusCondition {
        let spec = UPhiSpec::up_to(phi, 65_536.0).unwrap();
        let m = build_u_phi(&spec).unwrap();
        let last = *spec.radii().last().unwrap();
        let mut r_to = 2.0;
        while psi.psi1(r_to * 1.01) <= last {
            r_to *= 1.01;
        }
        check_annulus_condition(&m, psi, 2.0, r_to)
    }

    #[test]
    fn u_phi_annulus_condition_with_phi_squared() {
        let exact = annulus_condition(SlowlyVarying::constant(2.0).unwrap(), &SlowlyVarying::constant(4.0).unwrap());
        assert!(exact.checked > 0 && exact.holds());
        // increasing φ: (r_k, r_k φ(r_k)²] misses r_{k+2} = r_{k+1} φ(r_{k+1}) by a slowly varying factor
        let phi = || SlowlyVarying::exp_sqrt_log(1.0).unwrap();
        let tight = annulus_condition(phi(), &SlowlyVarying::exp_sqrt_log(2.0).unwrap());
        assert!(!tight.holds());
        assert!(tight.failures.iter().all(|&(_, m)| m == 0.5));
        let loose = annulus_condition(phi(), &SlowlyVarying::exp_sqrt_log(3.0).unwrap());
        assert!(loose.holds(), "{:?}", loose.failures);
    }

    #[test]
    fn up_to_counts_radii() {
        let spec = UPhiSpec::up_to(SlowlyVarying::constant(2.0).unwrap(), 16.0).unwrap();
        assert_eq!(spec.count, 4);
        let spec = UPhiSpec::up_to(SlowlyVarying::LogE, 1e4).unwrap();
        let radii = spec.radii();
        for w in radii.windows(2) {
            assert!((w[1] - w[0] * (1.0 + w[0].ln())).abs() <= 1e-12 * w[1]);
        }
    }

    #[test]
    fn best_rounding_gap_is_zero_half() {
        let spec = doubling(12);
        let radii = spec.radii();
        let u = build_u_phi(&spec).unwrap();
        let f = best_rounding_zeros(&radii).unwrap();
        assert_eq!(f.len(), 6);
        let rep = counting_gap_scan(&u, &f, 0.0, &[1.0, 10.0, 100.0, 5000.0]).unwrap();
        assert!(rep.violations.is_empty());
        assert_eq!(classify_gap(&rep, 2.0), GapPattern::ZeroHalf);
        // every point is a grid point or a jump
        assert!(rep.r.contains(&4.0) && rep.r.contains(&2048.0));
    }

    #[test]
    fn empty_f_violates_everywhere_beyond_second_radius() {
        let spec = doubling(8);
        let u = build_u_phi(&spec).unwrap();
        let rep = counting_gap_scan(&u, &ZeroSet::empty(), 0.0, &[1.0, 300.0]).unwrap();
        assert_eq!(rep.violations.first(), Some(&4.0));
        assert!(rep.violations.iter().all(|&r| r >= 4.0));
        assert_eq!(classify_gap(&rep, 2.0), GapPattern::Other);
    }

    #[test]
    fn exact_doubling_drifts_by_half_per_radius() {
        let spec = doubling(8);
        let radii = spec.radii();
        let u = build_u_phi(&spec).unwrap();
        let f = ZeroSet::new(radii.iter().map(|&r| Zero::new(Complex64::new(r, 0.0), 1, Provenance::External)).collect())
            .unwrap();
        let rep = counting_gap_scan(&u, &f, 0.0, &[1.0, 300.0]).unwrap();
        for (k, &r) in radii.iter().enumerate() {
            let j = rep.r.iter().position(|&x| x == r).unwrap();
            assert_eq!(rep.gap(j), -0.5 * (k + 1) as f64);
        }
        assert_eq!(rep.violations.first(), Some(&4.0));
    }

    #[test]
    fn gap_jumps_are_half_integers() {
        let spec = UPhiSpec::up_to(SlowlyVarying::LogE, 1e6).unwrap();
        let u = build_u_phi(&spec).unwrap();
        let f = best_rounding_zeros(&spec.radii()).unwrap();
        let rep = counting_gap_scan(&u, &f, 0.3, &[1.0, 1e6]).unwrap();
        for j in 0..rep.r.len() {
            let twice = 2.0 * (rep.gap(j) + 0.3);
            assert_eq!(twice, twice.round());
        }
    }

    #[test]
    fn n_gap_vanishes_for_exact_match_and_grows_for_rounding() {
        let spec = UPhiSpec::up_to(SlowlyVarying::LogE, 1e9).unwrap();
        let radii = spec.radii();
        let u = build_u_phi(&spec).unwrap();
        let doubled = Measure::new(u.iter().map(|a| Atom::new(a.pos, 1.0)).collect()).unwrap();
        let exact = ZeroSet::new(radii.iter().map(|&r| Zero::new(Complex64::new(r, 0.0), 1, Provenance::External)).collect())
            .unwrap();
        let probes = dyadic_probes(&radii);
        assert!(!probes.is_empty());
        let g = n_gap_growth(&doubled, &exact, 0.0, &SlowlyVarying::LogE, &probes, DEFAULT_EPSILON).unwrap();
        assert!(g.iter().all(|p| p.gap_t == 0.0 && p.gap_big_t == 0.0 && !p.activates));
        let f = best_rounding_zeros(&radii).unwrap();
        let g = n_gap_growth(&u, &f, 0.0, &SlowlyVarying::LogE, &probes, DEFAULT_EPSILON).unwrap();
        assert!(g.iter().any(|p| p.activates));
    }

    #[test]
    fn reduce_alpha_moves_half_mass() {
        let u = build_u_phi(&doubling(3)).unwrap();
        let (same, a) = reduce_alpha(&u, 0.3).unwrap();
        assert_eq!((same, a), (u.clone(), 0.3));
        let (v, a) = reduce_alpha(&u, 0.7).unwrap();
        assert!((a - 0.2).abs() < 1e-15);
        assert_eq!(v.len(), 2);
        assert_eq!(v.atoms()[0], Atom::real(4.0, 0.5));
        assert!(reduce_alpha(&u, 1.0).is_err());
    }

    #[test]
    fn sharpness_is_zero_for_own_zeros() {
        let spec = doubling(5);
        let u = build_u_phi(&spec).unwrap();
        let doubled = Measure::new(u.iter().map(|a| Atom::new(a.pos, 1.0)).collect()).unwrap();
        let f = ZeroSet::new(spec.radii().iter().map(|&r| Zero::new(Complex64::new(r, 0.0), 1, Provenance::External)).collect())
            .unwrap();
        let rep = sharpness_ratio(&doubled, &f, 0.0, &SlowlyVarying::LogE, &[4.0, 16.0], &QuadratureParams::default()).unwrap();
        assert!(rep.ratio.iter().all(|&r| r == 0.0));
    }
}
