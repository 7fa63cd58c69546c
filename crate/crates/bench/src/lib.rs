//! Seeded measures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subharm_core::{Atom, Complex64, Measure};

/// `n` atoms in the unit square, masses rescaled to total `mass`.
pub fn square_measure(n: usize, mass: f64, seed: u64) -> Measure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(f64, f64, f64)> =
        (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0.1..1.0))).collect();
    let total: f64 = raw.iter().map(|p| p.2).sum();
    let atoms = raw.iter().map(|&(x, y, m)| Atom::new(Complex64::new(x, y), m * mass / total)).collect();
    Measure::new(atoms).expect("valid atoms")
}

/// `n` atoms with log-uniform modulus in `[1, r_max]` and uniform argument.
pub fn plane_measure(n: usize, r_max: f64, seed: u64) -> Measure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..n)
        .map(|_| {
            let r = r_max.powf(rng.random::<f64>());
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            Atom::new(Complex64::from_polar(r, t), rng.random_range(0.2..1.5))
        })
        .collect();
    Measure::new(atoms).expect("valid atoms")
}
