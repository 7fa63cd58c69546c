//! Annular decomposition of a measure into an even-mass part living on thin
//! annuli `Q_k = {R_k ≤ |ζ| ≤ Ψ₁(R_k)}` and a sparse tail, plus the schedule
//! that replaces the tail by quintuple zeros.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{arg_2pi, mass_eps, Atom, Measure, Region};
use crate::potential::{Provenance, Zero, ZeroSet};
use crate::slowly_varying::SlowlyVarying;
use crate::sum::pairwise_sum_by;

/// Slack for deciding integer and threshold masses.
const MASS_TOL: f64 = 1e-9;

/// Integer mass removed near the origin so the rest vanishes on a disk of
/// radius greater than 1.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginCorrection {
    pub nu: Measure,
    pub count: u32,
    /// Largest modulus in the support of `nu`.
    pub radius: f64,
}

impl OriginCorrection {
    /// `count` zeros at the point whose modulus is the mass-geometric mean of
    /// `nu` and whose argument is that of the centroid of `nu`.
    pub fn zeros(&self) -> Result<ZeroSet> {
        let total = self.nu.total_mass();
        let log_mod = pairwise_sum_by(self.nu.atoms(), |a| a.mass * a.pos.norm().ln()) / total;
        if !log_mod.is_finite() {
            return Err(Error::Domain("origin correction has an atom at the origin".into()));
        }
        let centroid: Complex64 = self.nu.iter().map(|a| a.pos * a.mass).sum();
        let theta = if centroid.norm() > 0.0 { arg_2pi(centroid) } else { 0.0 };
        ZeroSet::new(vec![Zero::new(
            Complex64::from_polar(log_mod.exp(), theta),
            self.count,
            Provenance::Origin,
        )])
    }
}

/// Removes the smallest integer mass `N ≥ n(1)` from around the origin,
/// consuming atoms by increasing modulus and splitting the boundary atom.
///
/// When the total mass cannot reach `⌈n(1)⌉`, the largest reachable integer is
/// used instead; with total mass below 1 nothing is removed.
pub fn normalize_origin(m: &Measure) -> (Measure, Option<OriginCorrection>) {
    let canon = m.canonicalize();
    let inner = canon.mass_within(1.0);
    if inner == 0.0 {
        return (canon, None);
    }
    let total = canon.total_mass();
    let mut n = (inner - MASS_TOL).ceil();
    if n > total + MASS_TOL {
        n = (total + MASS_TOL).floor();
    }
    if n < 1.0 {
        return (canon, None);
    }
    let (taken, rest) = take_mass(canon.atoms(), n);
    let radius = taken.iter().map(|a| a.pos.norm()).fold(0.0, f64::max);
    (
        Measure::from_atoms_unchecked(rest),
        Some(OriginCorrection {
            nu: Measure::from_atoms_unchecked(taken),
            count: n as u32,
            radius,
        }),
    )
}

/// Takes mass `amount` from the front of `atoms`, splitting the last atom.
fn take_mass(atoms: &[Atom], amount: f64) -> (Vec<Atom>, Vec<Atom>) {
    let eps = mass_eps(amount);
    let mut taken = Vec::new();
    let mut rest = Vec::new();
    let mut need = amount;
    for a in atoms {
        if need <= eps {
            rest.push(*a);
        } else if a.mass <= need + eps {
            need -= a.mass;
            taken.push(*a);
        } else {
            taken.push(Atom::new(a.pos, need));
            rest.push(Atom::new(a.pos, a.mass - need));
            need = 0.0;
        }
    }
    (taken, rest)
}

/// One step of the annular induction.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnularStep {
    /// 1-based step index.
    pub k: usize,
    pub r_k: f64,
    /// Ψ₁(R_k), outer radius of Q_k.
    pub r_outer: f64,
    pub r_next: f64,
    /// Even-mass part inside Q_k.
    pub mu1: Measure,
    /// Leftover of Q_k, mass below 2.
    pub mu2: Measure,
    /// Mass borrowed from beyond Q_k to bring the leftover to at least 1.
    pub mu3: Measure,
    /// The measure ran out before the leftover reached mass 1.
    pub terminal: bool,
}

impl AnnularStep {
    pub fn q(&self) -> Region {
        Region::Annulus {
            center: Complex64::new(0.0, 0.0),
            inner: self.r_k,
            outer: self.r_outer,
        }
    }

    /// Mass of μ_k^(2) + μ_k^(3).
    pub fn tail_mass(&self) -> f64 {
        self.mu2.total_mass() + self.mu3.total_mass()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnnularDecomposition {
    pub steps: Vec<AnnularStep>,
    pub origin_correction: Option<OriginCorrection>,
    /// Outermost modulus of the decomposed measure.
    pub truncation_radius: f64,
}

impl AnnularDecomposition {
    pub fn radii(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.r_k).collect()
    }

    pub fn annuli(&self) -> Vec<Region> {
        self.steps.iter().map(AnnularStep::q).collect()
    }

    pub fn mu1(&self) -> Vec<&Measure> {
        self.steps.iter().map(|s| &s.mu1).collect()
    }

    /// Σ (μ_k^(2) + μ_k^(3)).
    pub fn mu2(&self) -> Measure {
        let mut atoms = Vec::new();
        for s in &self.steps {
            atoms.extend_from_slice(s.mu2.atoms());
            atoms.extend_from_slice(s.mu3.atoms());
        }
        Measure::from_atoms_unchecked(atoms)
    }

    pub fn mu1_total_mass(&self) -> f64 {
        self.steps.iter().map(|s| s.mu1.total_mass()).sum()
    }
}

/// Runs the annular induction on a measure supported outside the unit disk.
/// `r1` defaults to the smallest modulus in the support.
pub fn annular_split(m: &Measure, psi: &SlowlyVarying, r1: Option<f64>) -> Result<AnnularDecomposition> {
    let mut rest = m.canonicalize().into_atoms();
    if rest.is_empty() {
        return Ok(AnnularDecomposition::default());
    }
    let first = rest[0].pos.norm();
    let mut r_k = r1.unwrap_or(first);
    if !(r_k > 0.0 && r_k.is_finite()) {
        return Err(Error::Validation(format!("R1 = {r_k} must be positive")));
    }
    if first < r_k {
        return Err(Error::Domain(format!(
            "atom at modulus {first} lies inside the first annulus radius {r_k}"
        )));
    }
    let truncation_radius = rest[rest.len() - 1].pos.norm();
    let mut head = 0;
    let mut steps = Vec::new();
    while head < rest.len() {
        let r_outer = psi.psi1(r_k);
        let mut end = head;
        while end < rest.len() && rest[end].pos.norm() <= r_outer {
            end += 1;
        }
        let minus = &rest[head..end];
        let m_minus = pairwise_sum_by(minus, |a| a.mass);
        let even = 2.0 * ((m_minus + MASS_TOL) / 2.0).floor();
        let (mu1, mu2) = if even > 0.0 {
            take_mass(minus, even)
        } else {
            (Vec::new(), minus.to_vec())
        };
        head = end;
        let leftover = (m_minus - even).max(0.0);
        let mut mu3 = Vec::new();
        let mut r_next = r_outer;
        let mut terminal = false;
        if leftover < 1.0 - MASS_TOL {
            let mut need = 1.0 - leftover;
            while head < rest.len() && need > MASS_TOL {
                let a = rest[head];
                r_next = a.pos.norm();
                if a.mass <= need + MASS_TOL {
                    mu3.push(a);
                    need -= a.mass;
                    head += 1;
                } else {
                    mu3.push(Atom::new(a.pos, need));
                    rest[head].mass -= need;
                    need = 0.0;
                }
            }
            terminal = need > MASS_TOL;
        }
        steps.push(AnnularStep {
            k: steps.len() + 1,
            r_k,
            r_outer,
            r_next,
            mu1: Measure::from_atoms_unchecked(mu1),
            mu2: Measure::from_atoms_unchecked(mu2),
            mu3: Measure::from_atoms_unchecked(mu3),
            terminal,
        });
        r_k = r_next;
    }
    Ok(AnnularDecomposition {
        steps,
        origin_correction: None,
        truncation_radius,
    })
}

/// Result of checking `μ(R < |ζ| ≤ Rψ(R)) ≥ 1` on a radius range.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnnulusCondition {
    pub checked: usize,
    pub min_mass: f64,
    /// Radii where the window mass drops below 1.
    pub failures: Vec<(f64, f64)>,
}

impl AnnulusCondition {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exact check of the growth condition on `[r_from, r_to]`. The window mass
/// is piecewise constant in R and can only drop when R passes an atom
/// modulus, so it suffices to test `r_from` and every modulus in the range.
pub fn check_annulus_condition(m: &Measure, psi: &SlowlyVarying, r_from: f64, r_to: f64) -> AnnulusCondition {
    let mut moduli: Vec<(f64, f64)> = m.iter().map(|a| (a.pos.norm(), a.mass)).collect();
    moduli.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut probes = vec![r_from];
    probes.extend(moduli.iter().map(|p| p.0).filter(|&r| r > r_from && r <= r_to));
    probes.dedup();
    let mut report = AnnulusCondition { min_mass: f64::INFINITY, ..Default::default() };
    for r in probes {
        let hi = psi.psi1(r);
        let mass: f64 = moduli
            .iter()
            .filter(|p| p.0 > r && p.0 <= hi)
            .map(|p| p.1)
            .sum();
        report.checked += 1;
        report.min_mass = report.min_mass.min(mass);
        if mass < 1.0 - MASS_TOL {
            report.failures.push((r, mass));
        }
    }
    report
}

/// Per-property outcome of [`verify_decomposition`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecompositionReport {
    pub even_mu1: bool,
    pub radii_bounds: bool,
    pub supports: bool,
    pub tail_mass: bool,
    pub conservation: bool,
    pub failures: Vec<String>,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.even_mu1 && self.radii_bounds && self.supports && self.tail_mass && self.conservation
    }
}

/// Checks the four structural properties of the induction against the
/// measure `m` that was split.
///
/// The bound `R_{k+1} ≤ Ψ₂(R_k)` needs the growth condition at `Ψ₁(R_k)`, so
/// it is enforced only where `Ψ₂(R_k)` stays within the support. The final
/// terminal step is exempt from the lower tail-mass bound.
pub fn verify_decomposition(dec: &AnnularDecomposition, m: &Measure, psi: &SlowlyVarying) -> DecompositionReport {
    let mut fails = Vec::new();
    let rel = |r: f64| 1e-12 * r.max(1.0);
    for s in &dec.steps {
        let mass1 = s.mu1.total_mass();
        let half = (mass1 / 2.0).round();
        if (mass1 - 2.0 * half).abs() > MASS_TOL {
            fails.push(format!("step {}: mu1 mass {mass1} is not even", s.k));
        }
        if s.mu1.iter().chain(s.mu2.iter()).any(|a| {
            let r = a.pos.norm();
            r < s.r_k - rel(s.r_k) || r > s.r_outer + rel(s.r_outer)
        }) {
            fails.push(format!("step {}: mu1/mu2 support leaves Q_k", s.k));
        }
        if s.mu2.iter().chain(s.mu3.iter()).any(|a| {
            let r = a.pos.norm();
            r < s.r_k - rel(s.r_k) || r > s.r_next + rel(s.r_next)
        }) {
            fails.push(format!("step {}: tail support leaves [R_k, R_k+1]", s.k));
        }
        if s.r_next < s.r_outer - rel(s.r_outer) {
            fails.push(format!("step {}: R_k+1 = {} < Psi1(R_k) = {}", s.k, s.r_next, s.r_outer));
        }
        let psi2 = psi.psi1(s.r_outer);
        if psi2 <= dec.truncation_radius && s.r_next > psi2 + rel(psi2) {
            fails.push(format!("step {}: R_k+1 = {} > Psi2(R_k) = {psi2}", s.k, s.r_next));
        }
        let tail = s.tail_mass();
        if tail > 2.0 + MASS_TOL || (!s.terminal && tail < 1.0 - MASS_TOL) {
            fails.push(format!("step {}: tail mass {tail} outside [1, 2]", s.k));
        }
        if s.terminal && !std::ptr::eq(s, dec.steps.last().unwrap()) {
            fails.push(format!("step {}: terminal step before the end", s.k));
        }
    }
    let total = dec.mu1_total_mass()
        + dec.mu2().total_mass()
        + dec.origin_correction.as_ref().map_or(0.0, |c| c.nu.total_mass());
    let want = m.total_mass();
    let conservation = (total - want).abs() <= MASS_TOL * want.max(1.0);
    if !conservation {
        fails.push(format!("mass {total} after split, {want} before"));
    }
    let has = |key: &str| fails.iter().any(|f| f.contains(key));
    DecompositionReport {
        even_mu1: !has("not even"),
        radii_bounds: !has("Psi1") && !has("Psi2"),
        supports: !has("support"),
        tail_mass: !has("tail mass") && !has("terminal"),
        conservation,
        failures: fails,
    }
}

/// Leftover of the heavy tail that does not fill a mass-5 block.
#[derive(Clone, Debug, PartialEq)]
pub struct TailRemainder {
    pub measure: Measure,
    /// Mass-geometric-mean radius.
    pub radius: f64,
    /// Rounded mass, the multiplicity of the replacing zero (possibly 0).
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeavyTailSchedule {
    /// T_0 < T_1 < …; T_0 is the innermost modulus, T_n may be infinite.
    pub t: Vec<f64>,
    /// Blocks μ_n of mass 5, μ_n living on [T_n, T_{n+1}].
    pub blocks: Vec<Measure>,
    /// Mass-geometric-mean radii r_n of the blocks.
    pub r: Vec<f64>,
    /// ψ(T_n) for each block start.
    pub psi_t: Vec<f64>,
    pub remainder: Option<TailRemainder>,
}

impl HeavyTailSchedule {
    pub fn annuli(&self) -> Vec<Region> {
        self.t
            .windows(2)
            .map(|w| Region::Annulus {
                center: Complex64::new(0.0, 0.0),
                inner: w[0],
                outer: w[1],
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        5.0 * self.blocks.len() as f64 + self.remainder.as_ref().map_or(0.0, |r| r.measure.total_mass())
    }

    /// Quintuple zeros at r_n plus the rounded remainder zero.
    pub fn zeros(&self) -> Result<ZeroSet> {
        let mut z = build_f2(self)?.zeros;
        if let Some(rem) = &self.remainder {
            if rem.multiplicity > 0 {
                z.push(Zero::new(Complex64::new(rem.radius, 0.0), rem.multiplicity, Provenance::Remainder))?;
            }
        }
        Ok(z)
    }

    /// Indices n ≥ 1 where `Ψ₁(T_n) ≤ T_{n+1} ≤ Ψ₆(T_n)` fails (finite T_{n+1} only).
    pub fn spacing_violations(&self, psi: &SlowlyVarying) -> Vec<usize> {
        let mut bad = Vec::new();
        for n in 1..self.t.len().saturating_sub(1) {
            let (tn, tn1) = (self.t[n], self.t[n + 1]);
            if !tn1.is_finite() {
                continue;
            }
            let lo = psi.psi1(tn);
            let hi = psi.iterate(6, tn);
            if tn1 < lo * (1.0 - 1e-12) || tn1 > hi * (1.0 + 1e-12) {
                bad.push(n);
            }
        }
        bad
    }
}

fn log_mean_radius(atoms: &[Atom]) -> f64 {
    let mass = pairwise_sum_by(atoms, |a| a.mass);
    (pairwise_sum_by(atoms, |a| a.mass * a.pos.norm().ln()) / mass).exp()
}

/// Slices the tail into radial blocks of mass 5. `T_n` follows the sup
/// convention `T_n = sup{R: μ(D̄(R)) ≤ 5n}`.
pub fn heavy_tail_schedule(mu2: &Measure, psi: &SlowlyVarying) -> Result<HeavyTailSchedule> {
    let atoms = mu2.canonicalize().into_atoms();
    if atoms.is_empty() {
        return Ok(HeavyTailSchedule::default());
    }
    let total = pairwise_sum_by(&atoms, |a| a.mass);
    let n_blocks = ((total + MASS_TOL) / 5.0).floor() as usize;
    let mut sched = HeavyTailSchedule::default();

    // T_n from cumulative mass over distinct moduli
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for a in &atoms {
        let r = a.pos.norm();
        match groups.last_mut() {
            Some(g) if g.0 == r => g.1 += a.mass,
            _ => groups.push((r, a.mass)),
        }
    }
    for n in 0..=n_blocks {
        let level = 5.0 * n as f64;
        let mut acc = 0.0;
        let mut tn = f64::INFINITY;
        for &(r, w) in &groups {
            acc += w;
            if acc > level + MASS_TOL {
                tn = r;
                break;
            }
        }
        sched.t.push(tn);
    }

    let mut rest = atoms;
    for n in 0..n_blocks {
        let (block, tail) = take_mass(&rest, 5.0);
        rest = tail;
        sched.r.push(log_mean_radius(&block));
        sched.psi_t.push(psi.eval(sched.t[n]));
        sched.blocks.push(Measure::from_atoms_unchecked(block));
    }
    rest.retain(|a| a.mass > MASS_TOL);
    if !rest.is_empty() {
        let mass = pairwise_sum_by(&rest, |a| a.mass);
        sched.remainder = Some(TailRemainder {
            radius: log_mean_radius(&rest),
            multiplicity: mass.round() as u32,
            measure: Measure::from_atoms_unchecked(rest),
        });
    }
    Ok(sched)
}

/// Convergence certificate `r_{n+1}/r_{n−1} ≥ ψ(T_n)` for an interior block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F2Certificate {
    pub n: usize,
    pub ratio: f64,
    pub psi_t: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct F2 {
    pub zeros: ZeroSet,
    /// Consecutive ratios r_{n+1}/r_n.
    pub ratios: Vec<f64>,
    pub certificates: Vec<F2Certificate>,
}

/// Zeros of `f₂(z) = ∏(1 − z/r_n)⁵`.
pub fn build_f2(sched: &HeavyTailSchedule) -> Result<F2> {
    if sched.r.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("heavy-tail radii must be strictly increasing".into()));
    }
    let zeros = ZeroSet::new(
        sched
            .r
            .iter()
            .map(|&r| Zero::new(Complex64::new(r, 0.0), 5, Provenance::HeavyTail))
            .collect(),
    )?;
    let ratios = sched.r.windows(2).map(|w| w[1] / w[0]).collect();
    let certificates = (1..sched.r.len().saturating_sub(1))
        .map(|n| {
            let ratio = sched.r[n + 1] / sched.r[n - 1];
            let psi_t = sched.psi_t[n];
            F2Certificate { n, ratio, psi_t, holds: ratio >= psi_t }
        })
        .collect();
    Ok(F2 { zeros, ratios, certificates })
}

/// Replaces every atom of mass ≥ 2 by a zero of multiplicity 2⌊m/2⌋.
pub fn extract_integer_atoms(mu1_k: &Measure) -> (ZeroSet, Measure) {
    let mut zeros = Vec::new();
    let mut rest = Vec::new();
    for a in mu1_k.canonicalize().iter() {
        let pairs = ((a.mass + MASS_TOL) / 2.0).floor();
        if pairs >= 1.0 {
            zeros.push(Zero::new(a.pos, 2 * pairs as u32, Provenance::IntegerAtom));
            let left = a.mass - 2.0 * pairs;
            if left > MASS_TOL {
                rest.push(Atom::new(a.pos, left));
            }
        } else {
            rest.push(*a);
        }
    }
    (ZeroSet::from_zeros_unchecked(zeros), Measure::from_atoms_unchecked(rest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_identity_outside_unit_disk() {
        let m = Measure::new(vec![Atom::real(2.0, 1.0), Atom::new(c(0.0, 3.0), 0.5)]).unwrap();
        let (out, corr) = normalize_origin(&m);
        assert!(corr.is_none());
        assert_eq!(out, m.canonicalize());
    }

    #[test]
    fn normalize_single_unit_atom() {
        let m = Measure::new(vec![Atom::real(0.5, 1.0), Atom::real(3.0, 1.0)]).unwrap();
        let (out, corr) = normalize_origin(&m);
        let corr = corr.unwrap();
        assert_eq!(corr.count, 1);
        assert_eq!(corr.nu.atoms(), &[Atom::real(0.5, 1.0)]);
        assert_eq!(out.atoms(), &[Atom::real(3.0, 1.0)]);
    }

    #[test]
    fn normalize_splits_boundary_atom() {
        let m = Measure::new(vec![Atom::real(0.3, 0.7), Atom::real(0.6, 0.5)]).unwrap();
        let (out, corr) = normalize_origin(&m);
        let corr = corr.unwrap();
        assert_eq!(corr.count, 1);
        assert!((corr.nu.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(corr.radius, 0.6);
        assert_eq!(out.len(), 1);
        assert!((out.atoms()[0].mass - 0.2).abs() < 1e-15);
    }

    #[test]
    fn annular_split_constant_psi() {
        let psi = SlowlyVarying::constant(4.0).unwrap();
        let m = Measure::new(vec![Atom::real(2.0, 3.0)]).unwrap();
        let dec = annular_split(&m, &psi, Some(1.0)).unwrap();
        assert_eq!(dec.steps.len(), 1);
        let s = &dec.steps[0];
        assert_eq!((s.r_k, s.r_outer, s.r_next), (1.0, 4.0, 4.0));
        assert_eq!(s.mu1.atoms(), &[Atom::real(2.0, 2.0)]);
        assert_eq!(s.mu2.atoms(), &[Atom::real(2.0, 1.0)]);
        assert!(s.mu3.is_empty());
        assert!(verify_decomposition(&dec, &m, &psi).passed());
    }

    #[test]
    fn annular_split_light_measure_goes_to_tail() {
        let psi = SlowlyVarying::constant(2.0).unwrap();
        let m = Measure::new((1..=6).map(|k| Atom::real(3f64.powi(k), 0.5)).collect()).unwrap();
        let dec = annular_split(&m, &psi, None).unwrap();
        assert!(dec.steps.iter().all(|s| s.mu1.is_empty()));
        assert!((dec.mu2().total_mass() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn annular_split_borrows_from_the_next_circle() {
        let psi = SlowlyVarying::constant(2.0).unwrap();
        // Q_1 = [1, 2] holds mass 0.5; mu3 takes 0.5 of the two atoms at |z| = 3
        let m = Measure::new(vec![
            Atom::real(1.0, 0.5),
            Atom::real(3.0, 0.3),
            Atom::new(c(0.0, 3.0), 0.4),
            Atom::real(10.0, 1.0),
        ])
        .unwrap();
        let dec = annular_split(&m, &psi, None).unwrap();
        let s = &dec.steps[0];
        assert_eq!(s.r_next, 3.0);
        assert!((s.mu3.total_mass() - 0.5).abs() < 1e-15);
        assert_eq!(s.mu3.atoms()[0], Atom::real(3.0, 0.3));
        assert!((s.mu3.atoms()[1].mass - 0.2).abs() < 1e-15);
        let s2 = &dec.steps[1];
        assert_eq!(s2.r_k, 3.0);
        assert!((s2.mu2.total_mass() - 0.2).abs() < 1e-12);
        let report = verify_decomposition(&dec, &m, &psi);
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn annular_split_rejects_atoms_inside_r1() {
        let psi = SlowlyVarying::constant(2.0).unwrap();
        let m = Measure::new(vec![Atom::real(1.5, 1.0)]).unwrap();
        assert!(annular_split(&m, &psi, Some(2.0)).is_err());
        assert!(annular_split(&Measure::empty(), &psi, None).unwrap().steps.is_empty());
    }

    #[test]
    fn annulus_condition_is_non_strict() {
        let psi = SlowlyVarying::constant(4.0).unwrap();
        let m = Measure::new((1..=8).map(|k| Atom::real(2f64.powi(k), 0.5)).collect()).unwrap();
        assert!(check_annulus_condition(&m, &psi, 2.0, 64.0).holds());
        let sparse = Measure::new((1..=8).map(|k| Atom::real(3f64.powi(k), 0.5)).collect()).unwrap();
        assert!(!check_annulus_condition(&sparse, &psi, 3.0, 729.0).holds());
    }

    #[test]
    fn schedule_sup_convention() {
        let psi = SlowlyVarying::LogE;
        let m = Measure::new((1..=12).map(|k| Atom::real(2f64.powi(k), 1.0)).collect()).unwrap();
        let s = heavy_tail_schedule(&m, &psi).unwrap();
        assert_eq!(s.t[0], 2.0);
        assert_eq!(s.t[1], 64.0);
        assert_eq!(s.t[2], 2048.0);
        assert_eq!(s.blocks.len(), 2);
        assert!((s.r[0] - 8.0).abs() < 1e-12);
        let rem = s.remainder.as_ref().unwrap();
        assert_eq!(rem.multiplicity, 2);
        assert!((rem.radius - 2f64.powf(11.5)).abs() < 1e-9);
    }

    #[test]
    fn schedule_geometric_mean_radius() {
        let psi = SlowlyVarying::LogE;
        let five = Measure::new((0..5).map(|k| Atom::new(Complex64::from_polar(10.0, k as f64), 1.0)).collect()).unwrap();
        let s = heavy_tail_schedule(&five, &psi).unwrap();
        assert!((s.r[0] - 10.0).abs() < 1e-12);
        assert!(s.remainder.is_none());
        let mixed = Measure::new(vec![
            Atom::real(2.0, 1.0),
            Atom::new(c(0.0, 2.0), 1.0),
            Atom::new(c(-2.0, 0.0), 1.0),
            Atom::real(8.0, 1.0),
            Atom::new(c(0.0, 8.0), 1.0),
        ])
        .unwrap();
        let s = heavy_tail_schedule(&mixed, &psi).unwrap();
        assert!((s.r[0].ln() - (3.0 * 2f64.ln() + 2.0 * 8f64.ln()) / 5.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_small_mass_is_remainder_only() {
        let m = Measure::new(vec![Atom::real(3.0, 1.2), Atom::real(5.0, 1.0)]).unwrap();
        let s = heavy_tail_schedule(&m, &SlowlyVarying::LogE).unwrap();
        assert!(s.blocks.is_empty());
        assert_eq!(s.remainder.unwrap().multiplicity, 2);
    }

    #[test]
    fn f2_zeros_and_certificates() {
        let mut s = HeavyTailSchedule { r: vec![10.0], psi_t: vec![2.0], ..Default::default() };
        let f = build_f2(&s).unwrap();
        assert_eq!(f.zeros.zeros(), &[Zero::new(c(10.0, 0.0), 5, Provenance::HeavyTail)]);
        assert!(build_f2(&HeavyTailSchedule::default()).unwrap().zeros.is_empty());
        s.r = vec![10.0, 100.0];
        s.psi_t = vec![2.0, 2.0];
        let f = build_f2(&s).unwrap();
        assert_eq!(f.zeros.total_multiplicity(), 10);
        assert_eq!(f.ratios, vec![10.0]);
        s.r = vec![10.0, 10.0];
        assert!(build_f2(&s).is_err());
    }

    #[test]
    fn integer_atoms() {
        let p = c(3.0, 1.0);
        let (z, rest) = extract_integer_atoms(&Measure::new(vec![Atom::new(p, 5.0)]).unwrap());
        assert_eq!(z.zeros(), &[Zero::new(p, 4, Provenance::IntegerAtom)]);
        assert_eq!(rest.atoms(), &[Atom::new(p, 1.0)]);
        let (z, rest) = extract_integer_atoms(&Measure::new(vec![Atom::new(p, 2.0)]).unwrap());
        assert_eq!(z.total_multiplicity(), 2);
        assert!(rest.is_empty());
        let light = Measure::canonical(vec![Atom::new(p, 1.5), Atom::real(4.0, 0.5)]).unwrap();
        let (z, rest) = extract_integer_atoms(&light);
        assert!(z.is_empty());
        assert_eq!(rest, light);
    }
}
