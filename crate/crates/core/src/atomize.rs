//! Logarithmic coordinates and the two-atom moment matching of mass-2 pieces.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{arg_2pi, Atom, Measure};
use crate::partition::PartitionPiece;
use crate::potential::SINGULAR_GUARD;
use crate::sum::pairwise_sum;

/// ζ ↦ ω = log|ζ| + i·arg ζ with arg ∈ [0, 2π).
pub fn to_log_coords(m: &Measure) -> Result<Measure> {
    let mut atoms = Vec::with_capacity(m.len());
    for a in m {
        let r = a.pos.norm();
        if r == 0.0 {
            return Err(Error::Domain("atom at the origin has no log coordinate".into()));
        }
        atoms.push(Atom::new(Complex64::new(r.ln(), arg_2pi(a.pos)), a.mass));
    }
    Ok(Measure::from_atoms_unchecked(atoms))
}

/// ω ↦ e^ω.
pub fn from_log_coords(m: &Measure) -> Measure {
    Measure::from_atoms_unchecked(m.iter().map(|a| Atom::new(a.pos.exp(), a.mass)).collect())
}

/// Two unit atoms sharing the first two complex moments of a mass-2 piece.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomPair {
    pub omega1: Complex64,
    pub omega2: Complex64,
    /// Center of mass ½∫ω dν of the piece.
    pub omega_center: Complex64,
    /// Diameter of the piece rectangle.
    pub d: f64,
    pub zeta1: Complex64,
    pub zeta2: Complex64,
    pub source: PartitionPiece,
}

impl AtomPair {
    /// Largest distance from the support of the piece to either atom.
    pub fn spread(&self) -> f64 {
        self.source
            .nu
            .iter()
            .map(|a| (a.pos - self.omega1).norm().max((a.pos - self.omega2).norm()))
            .fold(0.0, f64::max)
    }
}

fn lex(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Solves `ω₁ + ω₂ = ∫ω dν`, `ω₁² + ω₂² = ∫ω² dν` for a piece of mass 2.
///
/// Moments are taken about the mean `c`, so the pair is `c ± √(∫(ω−c)² dν / 2)`
/// (principal root), which avoids cancellation when the piece is far from 0.
pub fn atomize_pair(piece: &PartitionPiece) -> Result<AtomPair> {
    let nu = &piece.nu;
    let mass = nu.total_mass();
    if (mass - 2.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("piece mass {mass} is not 2")));
    }
    let sum = |f: &dyn Fn(&Atom) -> f64| pairwise_sum(&nu.iter().map(f).collect::<Vec<_>>());
    let c = Complex64::new(sum(&|a| a.mass * a.pos.re), sum(&|a| a.mass * a.pos.im)) / mass;
    let second = |a: &Atom| {
        let w = a.pos - c;
        w * w * a.mass
    };
    let m2 = Complex64::new(sum(&|a| second(a).re), sum(&|a| second(a).im));
    // ν has mass 2 up to 1e-9; normalizing keeps the first moment exact
    let h = (m2 / mass).sqrt();
    let (mut w1, mut w2) = (c - h, c + h);
    if lex(w1, w2).is_gt() {
        std::mem::swap(&mut w1, &mut w2);
    }
    Ok(AtomPair {
        omega1: w1,
        omega2: w2,
        omega_center: c,
        d: piece.rect.diameter(),
        zeta1: w1.exp(),
        zeta2: w2.exp(),
        source: piece.clone(),
    })
}

fn log_factor(z: Complex64, omega: Complex64) -> Result<f64> {
    let zeta = omega.exp();
    let q = zeta - z;
    if q.norm() <= SINGULAR_GUARD * zeta.norm() {
        return Err(Error::Singular { z, at: zeta });
    }
    Ok((q.norm() / zeta.norm()).ln())
}

/// Δ(z) = ∫ (log|1 − z e^{−ω}| − ½ log|1 − z e^{−ω₁}| − ½ log|1 − z e^{−ω₂}|) dν(ω).
pub fn delta_term(pair: &AtomPair, z: Complex64) -> Result<f64> {
    let nu = &pair.source.nu;
    let mut terms = Vec::with_capacity(nu.len() + 2);
    for a in nu {
        terms.push(a.mass * log_factor(z, a.pos)?);
    }
    let half = 0.5 * nu.total_mass();
    terms.push(-half * log_factor(z, pair.omega1)?);
    terms.push(-half * log_factor(z, pair.omega2)?);
    Ok(pairwise_sum(&terms))
}

/// V(z) = Σ Δ_l(z), summed in the given pair order.
pub fn correction_series(pairs: &[AtomPair], z: Complex64) -> Result<f64> {
    let terms = pairs
        .iter()
        .map(|p| delta_term(p, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Bound on |Δ(z)| from the second-order Taylor remainder about the center of
/// mass `c`.
///
/// With `G(ω) = log(1 − z e^{−ω})`, the constant and linear terms cancel, the
/// support and both atoms lie within `d` of `c`, and segments from `c` stay in
/// the rectangle inflated by `d`, where `|G''| ≤ |z| e^{σ_max + d} / dist²`.
/// Summing the remainders gives `|Δ| ≤ 2 d² |z| e^{σ_max + d} / dist²`, with
/// `dist` the distance from `z` to the exponential image of the inflated
/// rectangle. Infinite when `z` lies in that image.
pub fn delta_bound(pair: &AtomPair, z: Complex64) -> f64 {
    let r = &pair.source.rect;
    let d = pair.d;
    let (s_lo, s_hi) = (r.sigma_min - d, r.sigma_max + d);
    let (t_lo, t_hi) = (r.t_min - d, r.t_max + d);
    let dist = distance_to_polar_sector(z, s_lo.exp(), s_hi.exp(), t_lo, t_hi);
    if dist <= 0.0 {
        return f64::INFINITY;
    }
    2.0 * d * d * z.norm() * s_hi.exp() / (dist * dist)
}

/// Distance from `z` to the polar sector
/// `{ρe^{iθ}: ρ ∈ [r_lo, r_hi], θ ∈ [t_lo, t_hi]}`.
fn distance_to_polar_sector(z: Complex64, r_lo: f64, r_hi: f64, t_lo: f64, t_hi: f64) -> f64 {
    let rz = z.norm();
    let radial = (r_lo - rz).max(rz - r_hi).max(0.0);
    let span = t_hi - t_lo;
    if span >= std::f64::consts::TAU {
        return radial;
    }
    let off = (arg_2pi(z) - t_lo).rem_euclid(std::f64::consts::TAU);
    if off <= span {
        return radial;
    }
    // nearest point lies on one of the two boundary rays
    let ray = |cos_g: f64| {
        let rho = (rz * cos_g).clamp(r_lo, r_hi);
        (rz * rz + rho * rho - 2.0 * rz * rho * cos_g).max(0.0).sqrt()
    };
    ray(off.cos()).min(ray((off - span).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::LogRectangle;
    use std::f64::consts::{E, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn piece(atoms: Vec<Atom>) -> PartitionPiece {
        PartitionPiece {
            rect: LogRectangle::new(-1.0, 2.0, 0.0, 3.0).unwrap(),
            nu: Measure::new(atoms).unwrap(),
            depth: 0,
            middle_third_ok: true,
        }
    }

    #[test]
    fn log_coords_examples() {
        let m = Measure::new(vec![Atom::real(E, 2.0), Atom::new(c(0.0, 1.0), 1.0)]).unwrap();
        let w = to_log_coords(&m).unwrap();
        assert!((w.atoms()[0].pos - c(1.0, 0.0)).norm() < 1e-15);
        assert!((w.atoms()[1].pos - c(0.0, FRAC_PI_2)).norm() < 1e-15);
        assert_eq!(w.atoms()[0].mass, 2.0);
        assert!(to_log_coords(&Measure::new(vec![Atom::real(0.0, 1.0)]).unwrap()).is_err());
    }

    #[test]
    fn single_heavy_atom_gives_double_atom() {
        let p = piece(vec![Atom::new(c(0.5, 1.0), 2.0)]);
        let pair = atomize_pair(&p).unwrap();
        assert_eq!(pair.omega1, c(0.5, 1.0));
        assert_eq!(pair.omega2, c(0.5, 1.0));
        assert_eq!(delta_term(&pair, c(3.0, -2.0)).unwrap(), 0.0);
    }

    #[test]
    fn two_atoms_are_fixed_points() {
        let p = piece(vec![Atom::new(c(0.0, 0.0), 1.0), Atom::new(c(1.0, 0.0), 1.0)]);
        let pair = atomize_pair(&p).unwrap();
        assert!((pair.omega1 - c(0.0, 0.0)).norm() < 1e-15);
        assert!((pair.omega2 - c(1.0, 0.0)).norm() < 1e-15);
        assert!(delta_term(&pair, c(5.0, 5.0)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn square_of_quarter_masses() {
        let p = piece(vec![
            Atom::new(c(0.0, 0.0), 0.5),
            Atom::new(c(0.0, 1.0), 0.5),
            Atom::new(c(1.0, 0.0), 0.5),
            Atom::new(c(1.0, 1.0), 0.5),
        ]);
        let pair = atomize_pair(&p).unwrap();
        assert!((pair.omega1 - c(0.5, 0.5)).norm() < 1e-15);
        assert!((pair.omega2 - c(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn delta_vanishes_at_origin() {
        let p = piece(vec![Atom::new(c(0.1, 0.2), 0.7), Atom::new(c(1.3, 2.0), 1.3)]);
        let pair = atomize_pair(&p).unwrap();
        assert_eq!(delta_term(&pair, c(0.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(delta_term(&pair, pair.zeta1), Err(Error::Singular { .. })));
    }

    #[test]
    fn rejects_wrong_mass() {
        assert!(atomize_pair(&piece(vec![Atom::real(0.0, 1.5)])).is_err());
    }

    #[test]
    fn bound_dominates_far_field() {
        let p = piece(vec![
            Atom::new(c(0.1, 0.2), 0.6),
            Atom::new(c(0.4, 2.5), 0.5),
            Atom::new(c(1.5, 1.1), 0.9),
        ]);
        let pair = atomize_pair(&p).unwrap();
        for k in 4..12 {
            let z = Complex64::from_polar(2f64.powi(k), 4.0);
            let v = delta_term(&pair, z).unwrap().abs();
            assert!(v <= delta_bound(&pair, z), "k={k}: {v} > {}", delta_bound(&pair, z));
        }
    }
}
