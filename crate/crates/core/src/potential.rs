//! Logarithmic potentials of atomic measures and `log|f|` for genus-0 zero sets.

use num_complex::Complex64;

use crate::atomize::AtomPair;
use crate::decomposition::{AnnularDecomposition, HeavyTailSchedule};
use crate::error::{Error, Result};
use crate::measure::{Atom, Measure};
use crate::sum::pairwise_sum;

/// Points closer than this fraction of `|a|` to a singular point `a` are singular.
pub const SINGULAR_GUARD: f64 = 1e-12;

/// Which construction step produced a zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    /// Quintuple zeros of the heavy-tail product f₂.
    HeavyTail,
    /// Rounded mass left after the last full heavy-tail block.
    Remainder,
    /// Even-multiplicity zeros at heavy atoms.
    IntegerAtom,
    /// Simple zeros from a moment-matched pair.
    Pair,
    /// Zeros replacing the integer mass removed near the origin.
    Origin,
    /// Zeros supplied from outside the pipeline.
    External,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::HeavyTail => "f2",
            Provenance::Remainder => "remainder",
            Provenance::IntegerAtom => "integer_atom",
            Provenance::Pair => "pair",
            Provenance::Origin => "origin",
            Provenance::External => "external",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub pos: Complex64,
    pub multiplicity: u32,
    pub tag: Provenance,
}

impl Zero {
    pub fn new(pos: Complex64, multiplicity: u32, tag: Provenance) -> Self {
        Self { pos, multiplicity, tag }
    }
}

/// Zeros of a genus-0 product `f(z) = ∏(1 − z/a)^m`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroSet {
    zeros: Vec<Zero>,
}

impl ZeroSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(zeros: Vec<Zero>) -> Result<Self> {
        for z in &zeros {
            validate_zero(z)?;
        }
        Ok(Self { zeros })
    }

    pub(crate) fn from_zeros_unchecked(zeros: Vec<Zero>) -> Self {
        Self { zeros }
    }

    pub fn push(&mut self, zero: Zero) -> Result<()> {
        validate_zero(&zero)?;
        self.zeros.push(zero);
        Ok(())
    }

    pub fn extend(&mut self, other: &ZeroSet) {
        self.zeros.extend_from_slice(&other.zeros);
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Zero> {
        self.zeros.iter()
    }

    /// Number of zeros counted with multiplicity.
    pub fn total_multiplicity(&self) -> u64 {
        self.zeros.iter().map(|z| u64::from(z.multiplicity)).sum()
    }

    pub fn count_with_tag(&self, tag: Provenance) -> u64 {
        self.zeros
            .iter()
            .filter(|z| z.tag == tag)
            .map(|z| u64::from(z.multiplicity))
            .sum()
    }

    pub fn translate(&self, by: Complex64) -> Result<ZeroSet> {
        ZeroSet::new(
            self.zeros
                .iter()
                .map(|z| Zero::new(z.pos + by, z.multiplicity, z.tag))
                .collect(),
        )
    }

    /// The zero set as an integer-mass measure.
    pub fn to_measure(&self) -> Measure {
        Measure::from_atoms_unchecked(
            self.zeros
                .iter()
                .map(|z| Atom::new(z.pos, f64::from(z.multiplicity)))
                .collect(),
        )
    }
}

fn validate_zero(z: &Zero) -> Result<()> {
    if z.multiplicity == 0 {
        return Err(Error::Validation("zero multiplicity must be at least 1".into()));
    }
    if !(z.pos.re.is_finite() && z.pos.im.is_finite()) || z.pos == Complex64::new(0.0, 0.0) {
        return Err(Error::Validation(format!(
            "zero position {} must be finite and nonzero",
            z.pos
        )));
    }
    Ok(())
}

/// Anything of the form `Σ w log|1 − z/a|` over finitely many points `a ≠ 0`.
pub trait LogPotential: Sync {
    /// Singular points with their weights.
    fn sources(&self) -> Vec<(Complex64, f64)>;

    fn log_value(&self, z: Complex64) -> Result<f64> {
        log_sum(&self.sources(), z)
    }

    /// Weight in the closed disk of radius `r`.
    fn counting(&self, r: f64) -> f64 {
        pairwise_sum(
            &self
                .sources()
                .iter()
                .map(|&(a, w)| if a.norm() <= r { w } else { 0.0 })
                .collect::<Vec<_>>(),
        )
    }

    /// `N(r) = ∫₀^r n(t)/t dt = Σ w log(r/|a|)` over `|a| ≤ r`.
    fn integrated_counting(&self, r: f64) -> Result<f64> {
        let src = self.sources();
        if src.iter().any(|&(a, _)| a.norm() == 0.0) {
            return Err(Error::Domain("mass at the origin".into()));
        }
        Ok(pairwise_sum(
            &src.iter()
                .map(|&(a, w)| {
                    let m = a.norm();
                    if m <= r {
                        w * (r / m).ln()
                    } else {
                        0.0
                    }
                })
                .collect::<Vec<_>>(),
        ))
    }
}

/// Potential with precomputed sources, cheap to evaluate many times.
#[derive(Clone, Debug, Default)]
pub struct Sources(pub Vec<(Complex64, f64)>);

impl Sources {
    pub fn of(p: &dyn LogPotential) -> Self {
        Sources(p.sources())
    }

    pub fn combined(parts: &[&dyn LogPotential]) -> Self {
        Sources(parts.iter().flat_map(|p| p.sources()).collect())
    }

    pub fn negated(mut self) -> Self {
        for s in &mut self.0 {
            s.1 = -s.1;
        }
        self
    }

    pub fn with(mut self, other: Sources) -> Self {
        self.0.extend(other.0);
        self
    }

    /// First and second θ-derivatives of the value at `z = r e^{iθ}`.
    pub fn angular_derivatives(&self, z: Complex64) -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &(a, w) in &self.0 {
            let q = a - z;
            d1 += w * (-Complex64::i() * z / q).re;
            d2 += w * (z * a / (q * q)).re;
        }
        (d1, d2)
    }
}

impl LogPotential for Sources {
    fn sources(&self) -> Vec<(Complex64, f64)> {
        self.0.clone()
    }

    fn log_value(&self, z: Complex64) -> Result<f64> {
        log_sum(&self.0, z)
    }
}

fn log_sum(src: &[(Complex64, f64)], z: Complex64) -> Result<f64> {
    let mut terms = Vec::with_capacity(src.len());
    for &(a, w) in src {
        if a == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("potential source at the origin".into()));
        }
        let q = a - z;
        if q.norm() <= SINGULAR_GUARD * a.norm() {
            return Err(Error::Singular { z, at: a });
        }
        terms.push(0.5 * w * (q.norm_sqr() / a.norm_sqr()).ln());
    }
    Ok(pairwise_sum(&terms))
}

impl LogPotential for Measure {
    fn sources(&self) -> Vec<(Complex64, f64)> {
        self.iter().map(|a| (a.pos, a.mass)).collect()
    }
}

impl LogPotential for ZeroSet {
    fn sources(&self) -> Vec<(Complex64, f64)> {
        self.iter().map(|z| (z.pos, f64::from(z.multiplicity))).collect()
    }
}

/// u(z) = Σ m log|1 − z/ζ|.
pub fn log_potential(m: &Measure, z: Complex64) -> Result<f64> {
    m.log_value(z)
}

/// log|f(z)| = Σ mult·log|1 − z/a|.
pub fn log_modulus(f: &ZeroSet, z: Complex64) -> Result<f64> {
    f.log_value(z)
}

/// Collects all zeros produced by one pipeline run and checks that their
/// count matches the rounded mass they replace.
pub fn assemble_approximant(
    dec: &AnnularDecomposition,
    sched: &HeavyTailSchedule,
    pairs: &[AtomPair],
    tilde_zeros: &ZeroSet,
) -> Result<ZeroSet> {
    let mut out = ZeroSet::empty();
    out.extend(&sched.zeros()?);
    out.extend(tilde_zeros);
    for p in pairs {
        out.push(Zero::new(p.zeta1, 1, Provenance::Pair))?;
        out.push(Zero::new(p.zeta2, 1, Provenance::Pair))?;
    }
    if let Some(c) = &dec.origin_correction {
        out.extend(&c.zeros()?);
    }
    let consumed = dec.mu1_total_mass()
        + sched.total_mass()
        + dec.origin_correction.as_ref().map_or(0.0, |c| f64::from(c.count));
    let count = out.total_multiplicity() as f64;
    if (count - consumed.round()).abs() > 1e-6 {
        return Err(Error::Invariant(format!(
            "assembled {count} zeros for consumed mass {consumed}"
        )));
    }
    Ok(out)
}
