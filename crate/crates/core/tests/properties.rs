use proptest::prelude::*;
use subharm_core::atomize::{atomize_pair, from_log_coords, to_log_coords};
use subharm_core::counterexample::{best_rounding_zeros, build_u_phi, counting_gap_scan, UPhiSpec};
use subharm_core::measure::split_at_quantile;
use subharm_core::partition::verify_partition;
use subharm_core::pipeline::{approximate, ApproxConfig};
use subharm_core::potential::{log_modulus, log_potential};
use subharm_core::{
    Atom, Axis, BoundaryRule, Complex64, LogRectangle, Measure, PartitionPiece, Provenance, Region, SlowlyVarying,
    Zero, ZeroSet,
};

fn atom_in(re: std::ops::Range<f64>, im: std::ops::Range<f64>) -> impl Strategy<Value = Atom> {
    (re, im, 0.05..2.0f64).prop_map(|(x, y, m)| Atom::new(Complex64::new(x, y), m))
}

fn measure(n: std::ops::Range<usize>) -> impl Strategy<Value = Measure> {
    prop::collection::vec(atom_in(-10.0..10.0, -10.0..10.0), n).prop_map(|a| Measure::new(a).unwrap())
}

/// Atoms inside the unit square whose masses are rescaled to an even total.
fn even_measure() -> impl Strategy<Value = (Measure, f64)> {
    (2usize..=8, prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.1..1.0f64), 4..40)).prop_map(|(half, pts)| {
        let mass = 2.0 * half as f64;
        let s: f64 = pts.iter().map(|p| p.2).sum();
        let atoms = pts.iter().map(|p| Atom::new(Complex64::new(p.0, p.1), p.2 * mass / s)).collect();
        (Measure::new(atoms).unwrap(), mass)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restriction_and_complement_reassemble(m in measure(0..30), inner in 0.5..5.0f64, width in 0.1..8.0f64) {
        let region = Region::centered_annulus(inner, inner + width).unwrap();
        for rule in [BoundaryRule::Closed, BoundaryRule::OpenInner] {
            let a = m.restrict(&region, rule);
            let b = m.restrict_complement(&region, rule);
            prop_assert_eq!(a.len() + b.len(), m.len());
            prop_assert_eq!(a.concat(&b).canonicalize(), m.canonicalize());
        }
    }

    #[test]
    fn quantile_split_has_exact_left_mass(m in measure(1..30), frac in 0.01..1.0f64, vertical in any::<bool>()) {
        let axis = if vertical { Axis::Vertical } else { Axis::Horizontal };
        let target = frac * m.total_mass();
        let s = split_at_quantile(&m, axis, target).unwrap();
        prop_assert!((s.left.total_mass() - target).abs() <= 1e-12 * m.total_mass().max(1.0));
        prop_assert!(s.left.iter().all(|a| axis.coord(a.pos) <= s.cut));
        prop_assert!(s.right.iter().all(|a| axis.coord(a.pos) >= s.cut));
    }

    #[test]
    fn log_coordinates_round_trip(m in measure(1..30)) {
        prop_assume!(m.iter().all(|a| a.pos.norm() > 1e-3));
        let back = from_log_coords(&to_log_coords(&m).unwrap());
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert!((a.pos - b.pos).norm() <= 1e-14 * a.pos.norm().max(1.0));
            prop_assert_eq!(a.mass, b.mass);
        }
    }

    #[test]
    fn atom_pairs_match_two_moments(pts in prop::collection::vec((0.0..3.0f64, 0.0..6.0f64, 0.1..1.0f64), 1..12)) {
        let s: f64 = pts.iter().map(|p| p.2).sum();
        let nu = Measure::new(pts.iter().map(|p| Atom::new(Complex64::new(p.0, p.1), 2.0 * p.2 / s)).collect()).unwrap();
        let rect = LogRectangle::new(0.0, 3.0, 0.0, 6.0).unwrap();
        let pair = atomize_pair(&PartitionPiece { rect, nu: nu.clone(), depth: 0, middle_third_ok: true }).unwrap();
        let s1: Complex64 = nu.iter().map(|a| a.pos * a.mass).sum();
        let s2: Complex64 = nu.iter().map(|a| a.pos * a.pos * a.mass).sum();
        prop_assert!((pair.omega1 + pair.omega2 - s1).norm() <= 1e-10 * s1.norm().max(1.0));
        prop_assert!((pair.omega1 * pair.omega1 + pair.omega2 * pair.omega2 - s2).norm() <= 1e-10 * s2.norm().max(1.0));
        prop_assert!((pair.omega1 - pair.omega_center).norm() <= pair.d * (1.0 + 1e-12));
        prop_assert!(pair.spread() <= 2.0 * pair.d * (1.0 + 1e-12));
    }

    #[test]
    fn partition_satisfies_all_properties((nu, mass) in even_measure()) {
        let rect = LogRectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let pieces = subharm_core::partition::partition_mass_two(&rect, &nu).unwrap();
        prop_assert_eq!(pieces.len() as f64, mass / 2.0);
        let rep = verify_partition(&pieces, &rect, &nu);
        prop_assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn log_modulus_is_potential_of_integer_measure(
        zs in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, 1u32..4), 1..10),
        x in -8.0..8.0f64,
        y in -8.0..8.0f64,
    ) {
        prop_assume!(zs.iter().all(|z| z.0.abs() + z.1.abs() > 1e-3));
        let f = ZeroSet::new(zs.iter().map(|z| Zero::new(Complex64::new(z.0, z.1), z.2, Provenance::External)).collect()).unwrap();
        let p = Complex64::new(x, y);
        prop_assume!(f.iter().all(|z| (z.pos - p).norm() > 1e-6));
        let a = log_modulus(&f, p).unwrap();
        let b = log_potential(&f.to_measure(), p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn pipeline_zero_count_is_rounded_mass(
        pts in prop::collection::vec((0.0..6.0f64, 0.0..std::f64::consts::TAU, 0.1..2.0f64), 1..40),
        seed in 0u64..1000,
    ) {
        let m = Measure::new(pts.iter().map(|p| Atom::new(Complex64::from_polar(1.5 * p.0.exp(), p.1), p.2)).collect()).unwrap();
        let cfg = ApproxConfig { seed, ..ApproxConfig::new(SlowlyVarying::LogE) };
        let a = approximate(&m, &cfg).unwrap();
        prop_assert_eq!(a.zeros.total_multiplicity() as f64, m.total_mass().round());
        prop_assert!(a.pieces().all(|p| (p.nu.total_mass() - 2.0).abs() <= 1e-9));
    }

    #[test]
    fn u_phi_gap_lies_on_half_integers(count in 2usize..30, c in 1.5..5.0f64, alpha in 0.0..1.0f64) {
        let spec = UPhiSpec::new(SlowlyVarying::constant(c).unwrap(), count);
        let radii = spec.radii();
        let u = build_u_phi(&spec).unwrap();
        let f = best_rounding_zeros(&radii).unwrap();
        let rep = counting_gap_scan(&u, &f, alpha, &[1.0, 2.0 * radii[count - 1]]).unwrap();
        for j in 0..rep.r.len() {
            let twice = 2.0 * (rep.gap(j) + alpha);
            prop_assert_eq!(twice, twice.round());
        }
    }
}
