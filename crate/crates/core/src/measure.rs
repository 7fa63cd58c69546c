//! Finite atomic measures in the plane.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sum::pairwise_sum_by;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub pos: Complex64,
    pub mass: f64,
}

impl Atom {
    pub fn new(pos: Complex64, mass: f64) -> Self {
        Self { pos, mass }
    }

    pub fn real(x: f64, mass: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), mass)
    }
}

/// Argument of `z` in `[0, 2π)`.
pub fn arg_2pi(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        let b = a + TAU;
        if b >= TAU {
            0.0
        } else {
            b
        }
    } else {
        a
    }
}

fn canonical_order(a: &Atom, b: &Atom) -> Ordering {
    a.pos
        .norm()
        .total_cmp(&b.pos.norm())
        .then(arg_2pi(a.pos).total_cmp(&arg_2pi(b.pos)))
        .then(a.pos.re.total_cmp(&b.pos.re))
        .then(a.pos.im.total_cmp(&b.pos.im))
}

/// Finite measure made of point masses. Masses are always positive and finite.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Measure {
    atoms: Vec<Atom>,
}

impl Measure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates the atoms and keeps them in the given order.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !a.pos.re.is_finite() || !a.pos.im.is_finite() {
                return Err(Error::Validation(format!("atom {i} has a non-finite position")));
            }
            if !(a.mass.is_finite() && a.mass > 0.0) {
                return Err(Error::Validation(format!(
                    "atom {i} has mass {}, expected a positive finite number",
                    a.mass
                )));
            }
        }
        Ok(Self::from_atoms_unchecked(atoms))
    }

    /// Validates, merges coincident atoms and sorts.
    pub fn canonical(atoms: Vec<Atom>) -> Result<Self> {
        Ok(Self::new(atoms)?.canonicalize())
    }

    pub(crate) fn from_atoms_unchecked(mut atoms: Vec<Atom>) -> Self {
        for a in &mut atoms {
            // turn -0.0 into 0.0 so equal positions compare and sort alike
            a.pos = Complex64::new(a.pos.re + 0.0, a.pos.im + 0.0);
        }
        Self { atoms }
    }

    /// Merges atoms at identical positions and sorts by modulus, angle, re, im.
    pub fn canonicalize(&self) -> Measure {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(canonical_order);
        let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match out.last_mut() {
                Some(last) if last.pos == a.pos => last.mass += a.mass,
                _ => out.push(a),
            }
        }
        Measure { atoms: out }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<Atom> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Atom> {
        self.atoms.iter()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum_by(&self.atoms, |a| a.mass)
    }

    /// Largest modulus in the support, 0 for the empty measure.
    pub fn max_modulus(&self) -> f64 {
        self.atoms.iter().map(|a| a.pos.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> Option<f64> {
        self.atoms.iter().map(|a| a.pos.norm()).reduce(f64::min)
    }

    pub fn translate(&self, by: Complex64) -> Measure {
        Measure::from_atoms_unchecked(
            self.atoms.iter().map(|a| Atom::new(a.pos + by, a.mass)).collect(),
        )
    }

    pub fn scale(&self, by: f64) -> Measure {
        Measure::from_atoms_unchecked(
            self.atoms.iter().map(|a| Atom::new(a.pos * by, a.mass)).collect(),
        )
    }

    /// Concatenation of two atom lists (not canonicalized).
    pub fn concat(&self, other: &Measure) -> Measure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Measure { atoms }
    }

    /// Mass in the closed disk `|ζ| ≤ r`.
    pub fn mass_within(&self, r: f64) -> f64 {
        pairwise_sum_by(&self.atoms, |a| if a.pos.norm() <= r { a.mass } else { 0.0 })
    }

    pub fn restrict(&self, region: &Region, rule: BoundaryRule) -> Measure {
        self.filter(|z| region.contains(z, rule))
    }

    pub fn restrict_complement(&self, region: &Region, rule: BoundaryRule) -> Measure {
        self.filter(|z| !region.contains(z, rule))
    }

    fn filter(&self, keep: impl Fn(Complex64) -> bool) -> Measure {
        Measure {
            atoms: self.atoms.iter().copied().filter(|a| keep(a.pos)).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Measure {
    type Item = &'a Atom;
    type IntoIter = std::slice::Iter<'a, Atom>;

    fn into_iter(self) -> Self::IntoIter {
        self.atoms.iter()
    }
}

/// Which boundary pieces a region owns.
///
/// `Closed` keeps every boundary point. `OpenInner` drops the inner circle of
/// an annulus and the low edges of a rectangle; disks and the plane have no
/// inner boundary and behave as closed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundaryRule {
    #[default]
    Closed,
    OpenInner,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Plane,
    Disk {
        center: Complex64,
        radius: f64,
    },
    Annulus {
        center: Complex64,
        inner: f64,
        outer: f64,
    },
    Rect {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::Validation(format!("disk radius {radius} is invalid")));
        }
        Ok(Region::Disk { center, radius })
    }

    pub fn annulus(center: Complex64, inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && inner < outer) || outer.is_nan() {
            return Err(Error::Validation(format!(
                "annulus radii must satisfy 0 <= inner < outer, got {inner}, {outer}"
            )));
        }
        Ok(Region::Annulus { center, inner, outer })
    }

    pub fn centered_annulus(inner: f64, outer: f64) -> Result<Self> {
        Self::annulus(Complex64::new(0.0, 0.0), inner, outer)
    }

    pub fn rect(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::Validation("rectangle sides must be positive".into()));
        }
        Ok(Region::Rect { x_min, x_max, y_min, y_max })
    }

    pub fn contains(&self, z: Complex64, rule: BoundaryRule) -> bool {
        match *self {
            Region::Plane => true,
            Region::Disk { center, radius } => (z - center).norm() <= radius,
            Region::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                let above_inner = match rule {
                    BoundaryRule::Closed => r >= inner,
                    BoundaryRule::OpenInner => r > inner,
                };
                above_inner && r <= outer
            }
            Region::Rect { x_min, x_max, y_min, y_max } => {
                let low = match rule {
                    BoundaryRule::Closed => z.re >= x_min && z.im >= y_min,
                    BoundaryRule::OpenInner => z.re > x_min && z.im > y_min,
                };
                low && z.re <= x_max && z.im <= y_max
            }
        }
    }
}

/// Coordinate used by quantile cuts: `Horizontal` is the real part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn coord(self, z: Complex64) -> f64 {
        match self {
            Axis::Horizontal => z.re,
            Axis::Vertical => z.im,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }
}

/// Absolute mass slack used when comparing cumulative masses.
pub(crate) fn mass_eps(total: f64) -> f64 {
    1e-12 * total.max(1.0)
}

/// Sorts atoms by the cut coordinate, then by the other coordinate.
pub(crate) fn sort_along(atoms: &mut [Atom], axis: Axis) {
    let other = axis.other();
    atoms.sort_by(|a, b| {
        axis.coord(a.pos)
            .total_cmp(&axis.coord(b.pos))
            .then(other.coord(a.pos).total_cmp(&other.coord(b.pos)))
    });
}

/// Splits atoms (already ordered along `axis`) so that the left part holds
/// `left_mass`: atoms strictly below `cut` go left, atoms strictly above go
/// right, atoms on the cut fill the left part in order and the last one is
/// split fractionally.
pub(crate) fn split_sorted_at(
    atoms: &[Atom],
    axis: Axis,
    cut: f64,
    left_mass: f64,
) -> (Vec<Atom>, Vec<Atom>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let below: f64 = atoms
        .iter()
        .filter(|a| axis.coord(a.pos) < cut)
        .map(|a| a.mass)
        .sum();
    let mut need = left_mass - below;
    let eps = mass_eps(left_mass);
    for a in atoms {
        let c = axis.coord(a.pos);
        if c < cut {
            left.push(*a);
        } else if c > cut || need <= eps {
            right.push(*a);
        } else if a.mass <= need + eps {
            need -= a.mass;
            left.push(*a);
        } else {
            left.push(Atom::new(a.pos, need));
            right.push(Atom::new(a.pos, a.mass - need));
            need = 0.0;
        }
    }
    (left, right)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantileSplit {
    pub left: Measure,
    pub right: Measure,
    pub cut: f64,
}

/// Cuts `m` along `axis` at the smallest coordinate `c` with
/// `m{coord ≤ c} ≥ target`; the left part has mass exactly `target`.
pub fn split_at_quantile(m: &Measure, axis: Axis, target: f64) -> Result<QuantileSplit> {
    let total = m.total_mass();
    let eps = mass_eps(total);
    if !(target > 0.0) || target > total + eps {
        return Err(Error::Domain(format!(
            "quantile target {target} outside (0, {total}]"
        )));
    }
    let mut atoms = m.atoms.clone();
    sort_along(&mut atoms, axis);
    let mut acc = 0.0;
    let mut cut = axis.coord(atoms[atoms.len() - 1].pos);
    let mut i = 0;
    while i < atoms.len() {
        let c = axis.coord(atoms[i].pos);
        let mut j = i;
        while j < atoms.len() && axis.coord(atoms[j].pos) == c {
            acc += atoms[j].mass;
            j += 1;
        }
        if acc >= target - eps {
            cut = c;
            break;
        }
        i = j;
    }
    let (left, right) = split_sorted_at(&atoms, axis, cut, target);
    Ok(QuantileSplit {
        left: Measure::from_atoms_unchecked(left),
        right: Measure::from_atoms_unchecked(right),
        cut,
    })
}

/// Places `atoms_per_ring` equal atoms evenly on each circle `(radius, mass)`
/// centered at the origin, starting at angle 0. Rings with zero mass are skipped.
pub fn discretize_rings(rings: &[(f64, f64)], atoms_per_ring: usize) -> Result<Measure> {
    if atoms_per_ring == 0 {
        return Err(Error::Validation("atoms_per_ring must be positive".into()));
    }
    let mut atoms = Vec::with_capacity(rings.len() * atoms_per_ring);
    for &(radius, mass) in rings {
        if !(radius.is_finite() && radius >= 0.0 && mass.is_finite() && mass >= 0.0) {
            return Err(Error::Validation(format!(
                "ring (radius {radius}, mass {mass}) is invalid"
            )));
        }
        if mass == 0.0 {
            continue;
        }
        if radius == 0.0 {
            atoms.push(Atom::new(Complex64::new(0.0, 0.0), mass));
            continue;
        }
        let w = mass / atoms_per_ring as f64;
        for j in 0..atoms_per_ring {
            let theta = TAU * j as f64 / atoms_per_ring as f64;
            atoms.push(Atom::new(Complex64::from_polar(radius, theta), w));
        }
    }
    Measure::new(atoms)
}

/// Discretizes a radial counting function `n(t)` (mass of the closed disk of
/// radius `t`) on an increasing grid: the mass `n(g_i) − n(g_{i−1})` is put on
/// the circle of radius `g_i`, with `g_{−1} = 0`.
pub fn discretize_radial_density(
    n_of_t: impl Fn(f64) -> f64,
    grid: &[f64],
    atoms_per_ring: usize,
) -> Result<Measure> {
    let mut rings = Vec::with_capacity(grid.len());
    let mut prev_t = 0.0;
    let mut prev_n = n_of_t(0.0);
    for &t in grid {
        if !(t > prev_t) {
            return Err(Error::Validation("radial grid must be positive and increasing".into()));
        }
        let n = n_of_t(t);
        if !n.is_finite() || n < prev_n {
            return Err(Error::Validation(format!(
                "counting function must be finite and nondecreasing (at t = {t})"
            )));
        }
        rings.push((t, n - prev_n));
        prev_t = t;
        prev_n = n;
    }
    discretize_rings(&rings, atoms_per_ring)
}

/// Pairs of atom indices violating the genericity conditions at a point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenericityReport {
    /// Atoms lying on a common line through the point.
    pub shared_lines: Vec<(usize, usize)>,
    /// Atoms lying on a common circle centered at the point.
    pub shared_circles: Vec<(usize, usize)>,
    /// Atoms coinciding with the point.
    pub coincident: Vec<usize>,
}

impl GenericityReport {
    pub fn passed(&self) -> bool {
        self.shared_lines.is_empty() && self.shared_circles.is_empty() && self.coincident.is_empty()
    }
}

const VERIFY_TOL: f64 = 1e-10;

/// Exhaustive pairwise check that every line through `z` and every circle
/// centered at `z` carries at most one atom of `m`.
pub fn verify_generic_origin(m: &Measure, z: Complex64) -> GenericityReport {
    let atoms = m.canonicalize().atoms;
    let mut report = GenericityReport::default();
    let scale = atoms.iter().map(|a| a.pos.norm()).fold(z.norm(), f64::max).max(1.0);
    for (i, a) in atoms.iter().enumerate() {
        if (a.pos - z).norm() <= VERIFY_TOL * scale {
            report.coincident.push(i);
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        let p = a.pos - z;
        for (j, b) in atoms.iter().enumerate().skip(i + 1) {
            let q = b.pos - z;
            let (np, nq) = (p.norm(), q.norm());
            if np == 0.0 || nq == 0.0 {
                continue;
            }
            // sine of the angle between z→p and z→q: zero iff z, p, q collinear
            let cross = p.re * q.im - p.im * q.re;
            if cross.abs() <= VERIFY_TOL * np * nq {
                report.shared_lines.push((i, j));
            }
            // z on the perpendicular bisector of p, q
            if (np - nq).abs() <= VERIFY_TOL * np.max(nq) {
                report.shared_circles.push((i, j));
            }
        }
    }
    report
}

/// Sort-based genericity test used by the sampler; stricter than the verifier.
fn is_generic(positions: &[Complex64], z: Complex64, tol: f64) -> bool {
    let n = positions.len();
    if n == 0 {
        return true;
    }
    let mut angles = Vec::with_capacity(n);
    let mut dists = Vec::with_capacity(n);
    let mut scale: f64 = 0.0;
    for &p in positions {
        let w = p - z;
        let r = w.norm();
        scale = scale.max(r);
        dists.push(r);
        let mut a = w.im.atan2(w.re);
        if a < 0.0 {
            a += PI;
        }
        if a >= PI {
            a -= PI;
        }
        angles.push(a);
    }
    if dists.iter().any(|&r| r <= tol * scale.max(1.0)) {
        return false;
    }
    angles.sort_by(f64::total_cmp);
    dists.sort_by(f64::total_cmp);
    if n > 1 {
        if angles[0] + PI - angles[n - 1] <= tol {
            return false;
        }
        for k in 1..n {
            if angles[k] - angles[k - 1] <= tol {
                return false;
            }
            if dists[k] - dists[k - 1] <= tol * dists[k] {
                return false;
            }
        }
    }
    true
}

/// Picks a point `z'` with `|z'| < neighborhood_radius` such that every line
/// through `z'` and every circle centered at `z'` carries at most one atom.
///
/// Rejection sampling from a seeded ChaCha stream; the set of bad points is a
/// finite union of lines, so a draw fails with probability zero in exact
/// arithmetic. The angular tolerance shrinks with the atom count so that the
/// excluded strips stay a small fraction of the disk.
pub fn generic_origin_shift(m: &Measure, neighborhood_radius: f64, seed: u64) -> Result<Complex64> {
    if !(neighborhood_radius > 0.0 && neighborhood_radius.is_finite()) {
        return Err(Error::Validation("neighborhood radius must be positive".into()));
    }
    let canon = m.canonicalize();
    let positions: Vec<Complex64> = canon.atoms.iter().map(|a| a.pos).collect();
    let n = positions.len().max(2) as f64;
    let tol = (1e-8_f64).min(1e-2 / (n * n)).max(100.0 * VERIFY_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100_000 {
        let r = neighborhood_radius * rng.random::<f64>().sqrt() * (1.0 - 1e-9);
        let theta = TAU * rng.random::<f64>();
        let z = Complex64::from_polar(r, theta);
        if is_generic(&positions, z, tol) {
            return Ok(z);
        }
    }
    Err(Error::Invariant(
        "no generic origin found after 100000 draws".into(),
    ))
}
