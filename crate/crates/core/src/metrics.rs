//! Error functionals: the L¹ disk error, circle means, Jensen residuals,
//! circle maxima and the exceptional-set density.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{LogPotential, Sources, ZeroSet};
use crate::slowly_varying::SlowlyVarying;
use crate::sum::{pairwise_sum, pairwise_sum_by};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureParams {
    /// Target relative error of each annulus integral.
    pub rel_tol: f64,
    /// Absolute error allowed per unit area.
    pub abs_tol: f64,
    /// Cell budget per annulus; exceeding it flags the result.
    pub max_cells: usize,
    /// Cells refined per parallel batch.
    pub batch: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self { rel_tol: 1e-3, abs_tol: 1e-12, max_cells: 400_000, batch: 64 }
    }
}

/// An integral with its estimated error.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    /// Tolerance was not reached within the cell budget.
    pub flagged: bool,
    pub cells: usize,
}

/// `u − log|f| − α log|z|` with coincident sources merged.
#[derive(Clone, Debug)]
pub struct Discrepancy {
    sources: Vec<(Complex64, f64)>,
    alpha: f64,
}

impl Discrepancy {
    pub fn new(u: &dyn LogPotential, f: &ZeroSet, alpha: f64) -> Result<Self> {
        Self::from_sources(Sources::of(u).with(Sources::of(f).negated()), alpha)
    }

    pub fn from_sources(src: Sources, alpha: f64) -> Result<Self> {
        let mut v = src.0;
        if v.iter().any(|&(a, _)| a.norm() == 0.0 || !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain("sources must be finite and away from the origin".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::Validation(format!("alpha = {alpha}")));
        }
        v.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        let mut merged: Vec<(Complex64, f64)> = Vec::with_capacity(v.len());
        for (a, w) in v {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += w,
                _ => merged.push((a, w)),
            }
        }
        merged.retain(|s| s.1.abs() > 1e-14);
        Ok(Self { sources: merged, alpha })
    }

    pub fn sources(&self) -> &[(Complex64, f64)] {
        &self.sources
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Value at `z`; exact hits on a source give ±∞.
    pub fn value(&self, z: Complex64) -> f64 {
        let mut acc = 0.0;
        for &(a, w) in &self.sources {
            acc += 0.5 * w * ((a - z).norm_sqr() / a.norm_sqr()).ln();
        }
        if self.alpha != 0.0 {
            acc -= self.alpha * z.norm().ln();
        }
        acc
    }

    /// `∫_{|z|<r} |D| dm`.
    pub fn l1_disk(&self, r: f64, quad: &QuadratureParams) -> Result<QuadResult> {
        Ok(*self.l1_profile(&[r], quad)?.last().expect("one radius"))
    }

    /// `∫_{|z|<R} |D| dm` at every radius of an increasing grid, accumulated
    /// over annuli so the values are nondecreasing.
    pub fn l1_profile(&self, radii: &[f64], quad: &QuadratureParams) -> Result<Vec<QuadResult>> {
        validate_grid(radii)?;
        let mut out = Vec::with_capacity(radii.len());
        let mut acc = QuadResult::default();
        let mut inner = 0.0;
        for &r in radii {
            let part = self.integrate_annulus(inner, r, quad);
            acc = QuadResult {
                value: acc.value + part.value,
                error_bound: acc.error_bound + part.error_bound,
                flagged: acc.flagged || part.flagged,
                cells: acc.cells + part.cells,
            };
            out.push(acc);
            inner = r;
        }
        Ok(out)
    }

    fn integrate_annulus(&self, a: f64, b: f64, quad: &QuadratureParams) -> QuadResult {
        let n_r = if a == 0.0 { 4 } else { ((b / a).log2() * 2.0).ceil().max(2.0) as usize };
        let n_t = 16;
        let mut cells = Vec::with_capacity(n_r * n_t);
        for i in 0..n_r {
            let (r0, r1) = if a == 0.0 {
                (b * i as f64 / n_r as f64, b * (i + 1) as f64 / n_r as f64)
            } else {
                (a * (b / a).powf(i as f64 / n_r as f64), a * (b / a).powf((i + 1) as f64 / n_r as f64))
            };
            for j in 0..n_t {
                cells.push((r0, r1, TAU * j as f64 / n_t as f64, TAU * (j + 1) as f64 / n_t as f64));
            }
        }
        let mut store: Vec<Cell> = cells.into_par_iter().map(|c| self.cell(c)).collect();
        let mut heap: BinaryHeap<Pending> =
            store.iter().enumerate().map(|(id, c)| Pending { err: c.err, id }).collect();
        let mut value = pairwise_sum_by(&store, |c| c.value);
        let mut err = pairwise_sum_by(&store, |c| c.err);
        let area_tol = quad.abs_tol * PI * (b * b - a * a);
        let mut flagged = false;
        while err > (quad.rel_tol * value).max(area_tol) {
            if store.len() + 4 * quad.batch > quad.max_cells {
                flagged = true;
                break;
            }
            let mut children = Vec::with_capacity(4 * quad.batch);
            for _ in 0..quad.batch {
                let Some(p) = heap.pop() else { break };
                let c = &mut store[p.id];
                c.active = false;
                value -= c.value;
                err -= c.err;
                let (r0, r1, t0, t1) = c.bounds;
                let (rm, tm) = (0.5 * (r0 + r1), 0.5 * (t0 + t1));
                children.extend([(r0, rm, t0, tm), (r0, rm, tm, t1), (rm, r1, t0, tm), (rm, r1, tm, t1)]);
                if heap.peek().is_some_and(|q| q.err <= 0.0) {
                    break;
                }
            }
            if children.is_empty() {
                break;
            }
            let evaluated: Vec<Cell> = children.into_par_iter().map(|c| self.cell(c)).collect();
            for c in evaluated {
                value += c.value;
                err += c.err;
                heap.push(Pending { err: c.err, id: store.len() });
                store.push(c);
            }
        }
        let active: Vec<&Cell> = store.iter().filter(|c| c.active).collect();
        QuadResult {
            value: pairwise_sum_by(&active, |c| c.value),
            error_bound: pairwise_sum_by(&active, |c| c.err),
            flagged,
            cells: active.len(),
        }
    }

    /// Gauss–Legendre 5×5 value with a 3×3 comparison, plus a floor for
    /// sources in or near the cell.
    fn cell(&self, bounds: (f64, f64, f64, f64)) -> Cell {
        let (r0, r1, t0, t1) = bounds;
        let g5 = self.tensor(bounds, &GL5);
        let g3 = self.tensor(bounds, &GL3);
        let diam = (r1 - r0).hypot(r1 * (t1 - t0));
        let mid = Complex64::from_polar(0.5 * (r0 + r1), 0.5 * (t0 + t1));
        let floor: f64 = self
            .sources
            .iter()
            .filter(|&&(a, _)| (a - mid).norm() <= diam)
            .map(|&(_, w)| w.abs() * 0.5 * PI * diam * diam)
            .sum();
        let (value, err) = if g5.is_finite() && g3.is_finite() {
            (g5, (g5 - g3).abs() + floor)
        } else {
            (0.0, f64::MAX / 1e6)
        };
        Cell { bounds, value, err, active: true }
    }

    fn tensor(&self, (r0, r1, t0, t1): (f64, f64, f64, f64), rule: &[(f64, f64)]) -> f64 {
        let (hr, ht) = (0.5 * (r1 - r0), 0.5 * (t1 - t0));
        let (cr, ct) = (0.5 * (r0 + r1), 0.5 * (t0 + t1));
        let mut acc = 0.0;
        for &(xr, wr) in rule {
            let rho = cr + hr * xr;
            for &(xt, wt) in rule {
                let z = Complex64::from_polar(rho, ct + ht * xt);
                acc += wr * wt * self.value(z).abs() * rho;
            }
        }
        acc * hr * ht
    }
}

struct Cell {
    bounds: (f64, f64, f64, f64),
    value: f64,
    err: f64,
    active: bool,
}

/// Heap entry: largest error first, older cell first on ties.
struct Pending {
    err: f64,
    id: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.id.cmp(&self.id))
    }
}

const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
];

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn validate_grid(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Validation("radius grid is empty".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("radii must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// `∫_{|z|<r} |u − log|f|| dm`.
pub fn l1_disk_error(u: &dyn LogPotential, f: &ZeroSet, r: f64, quad: &QuadratureParams) -> Result<QuadResult> {
    Discrepancy::new(u, f, 0.0)?.l1_disk(r, quad)
}

/// Mass (or multiplicity) in the closed disk of radius `r`.
pub fn counting_function(p: &dyn LogPotential, r: f64) -> f64 {
    p.counting(r)
}

/// `N(r) = Σ w log(r/|a|)` over `|a| ≤ r`.
pub fn integrated_counting(p: &dyn LogPotential, r: f64) -> Result<f64> {
    p.integrated_counting(r)
}

/// Circle mean with the node count used and the aliasing error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleMean {
    pub value: f64,
    pub nodes: usize,
    pub error_bound: f64,
}

/// Most node doublings tried before accepting a loose bound.
const MAX_DOUBLINGS: u32 = 10;

/// Target aliasing error per unit of total weight.
const CIRCLE_TOL: f64 = 1e-12;

/// Trapezoid error bound on `n` nodes: the Fourier modes of
/// `log|1 − z/a|` on `|z| = r` decay like `q^k / k` with `q = min(r/|a|, |a|/r)`,
/// and only multiples of `n` alias onto the mean.
fn aliasing_bound(src: &Sources, r: f64, n: usize) -> f64 {
    src.0
        .iter()
        .map(|&(a, w)| {
            let ratio = a.norm() / r;
            let q = ratio.min(1.0 / ratio);
            let qn = q.powf(n as f64);
            if qn >= 1.0 {
                f64::INFINITY
            } else {
                w.abs() * qn / (n as f64 * (1.0 - qn))
            }
        })
        .sum()
}

/// Mean of the potential over `|z| = r` by the trapezoid rule on half-offset
/// angles, doubling `nodes` until the aliasing bound is negligible.
pub fn circle_mean(p: &dyn LogPotential, r: f64, nodes: usize) -> Result<f64> {
    Ok(circle_mean_report(p, r, nodes)?.value)
}

pub fn circle_mean_report(p: &dyn LogPotential, r: f64, nodes: usize) -> Result<CircleMean> {
    if !(r > 0.0) || nodes == 0 {
        return Err(Error::Validation(format!("circle mean needs r > 0 and nodes > 0, got {r}, {nodes}")));
    }
    let src = Sources::of(p);
    let tol = CIRCLE_TOL * src.0.iter().map(|s| s.1.abs()).sum::<f64>().max(1.0);
    let mut n = nodes;
    let mut bound = aliasing_bound(&src, r, n);
    for _ in 0..MAX_DOUBLINGS {
        if bound <= tol {
            break;
        }
        n *= 2;
        bound = aliasing_bound(&src, r, n);
    }
    let vals = (0..n)
        .into_par_iter()
        .map(|j| src.log_value(Complex64::from_polar(r, TAU * (j as f64 + 0.5) / n as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CircleMean { value: pairwise_sum(&vals) / n as f64, nodes: n, error_bound: bound })
}

/// `circle_mean(u, r) − N(r) − u(0)`, which vanishes by Jensen's formula.
/// Every potential here is normalized by `u(0) = 0`.
pub fn jensen_residual(p: &dyn LogPotential, r: f64, nodes: usize) -> Result<f64> {
    Ok(circle_mean(p, r, nodes)? - p.integrated_counting(r)?)
}

/// `max_{|z|=r} u(z)` from a dense grid with one Newton step at each local
/// maximum.
pub fn sup_on_circle(p: &dyn LogPotential, r: f64, nodes: usize) -> Result<f64> {
    if !(r > 0.0) || nodes < 3 {
        return Err(Error::Validation(format!("sup needs r > 0 and at least 3 nodes, got {r}, {nodes}")));
    }
    let src = Sources::of(p);
    if src.0.is_empty() {
        return Ok(0.0);
    }
    let theta = |j: usize| TAU * j as f64 / nodes as f64;
    let vals = (0..nodes)
        .into_par_iter()
        .map(|j| src.log_value(Complex64::from_polar(r, theta(j))))
        .collect::<Result<Vec<_>>>()?;
    let mut best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for j in 0..nodes {
        let (prev, next) = (vals[(j + nodes - 1) % nodes], vals[(j + 1) % nodes]);
        if vals[j] < prev || vals[j] < next {
            continue;
        }
        let (d1, d2) = src.angular_derivatives(Complex64::from_polar(r, theta(j)));
        if d2 < 0.0 {
            let step = (-d1 / d2).clamp(-TAU / nodes as f64, TAU / nodes as f64);
            if let Ok(v) = src.log_value(Complex64::from_polar(r, theta(j) + step)) {
                best = best.max(v);
            }
        }
    }
    Ok(best)
}

/// Estimated area fraction with a 95% binomial half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityEstimate {
    pub fraction: f64,
    pub half_width: f64,
    pub samples: usize,
}

/// Number of equal-area annular strata used for sampling.
pub const DENSITY_STRATA: usize = 16;

/// Area fraction of `{|z| < r : |u − log|f|| > K log ψ(|z|)}`, sampled with
/// equal counts in equal-area annuli.
pub fn exceptional_set_density(
    d: &Discrepancy,
    k: f64,
    psi: &SlowlyVarying,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<DensityEstimate> {
    if !(r > 1.0) || samples == 0 {
        return Err(Error::Validation(format!("density needs R > 1 and samples > 0, got {r}, {samples}")));
    }
    let per = samples.div_ceil(DENSITY_STRATA);
    let hits: usize = (0..DENSITY_STRATA)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            (0..per)
                .filter(|_| {
                    let u: f64 = rng.random();
                    let rho = r * ((s as f64 + u) / DENSITY_STRATA as f64).sqrt();
                    let z = Complex64::from_polar(rho, TAU * rng.random::<f64>());
                    d.value(z).abs() > k * psi.log_eval(rho)
                })
                .count()
        })
        .sum();
    let n = per * DENSITY_STRATA;
    let p = hits as f64 / n as f64;
    Ok(DensityEstimate {
        fraction: p,
        half_width: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
    })
}

/// `I(R)` against the normalization `R² log ψ(R)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub radii: Vec<f64>,
    pub i: Vec<f64>,
    pub norm: Vec<f64>,
    pub ratio: Vec<f64>,
    pub quad_error: Vec<f64>,
    pub flagged: bool,
}

impl ErrorReport {
    pub fn build(d: &Discrepancy, psi: &SlowlyVarying, radii: &[f64], quad: &QuadratureParams) -> Result<Self> {
        let prof = d.l1_profile(radii, quad)?;
        let norm: Vec<f64> = radii.iter().map(|&r| r * r * psi.log_eval(r)).collect();
        Ok(Self {
            radii: radii.to_vec(),
            i: prof.iter().map(|q| q.value).collect(),
            ratio: prof.iter().zip(&norm).map(|(q, n)| q.value / n).collect(),
            quad_error: prof.iter().map(|q| q.error_bound).collect(),
            norm,
            flagged: prof.iter().any(|q| q.flagged),
        })
    }

    /// Largest over smallest ratio.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .ratio
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        hi / lo
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["R", "I", "norm", "ratio", "quad_error"])?;
        for j in 0..self.radii.len() {
            wr.write_record([
                fmt(self.radii[j]),
                fmt(self.i[j]),
                fmt(self.norm[j]),
                fmt(self.ratio[j]),
                fmt(self.quad_error[j]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Counting functions of a potential and a zero set side by side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GapReport {
    pub r: Vec<f64>,
    pub n_u: Vec<f64>,
    pub n_f: Vec<f64>,
    pub big_n_u: Vec<f64>,
    pub big_n_f: Vec<f64>,
    pub alpha: f64,
    /// Radii where `|n_u − n_f − α| > ½`.
    pub violations: Vec<f64>,
}

impl GapReport {
    pub fn gap(&self, j: usize) -> f64 {
        self.n_u[j] - self.n_f[j] - self.alpha
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["r", "n_u", "n_f", "N_u", "N_f", "gap"])?;
        for j in 0..self.r.len() {
            wr.write_record([
                fmt(self.r[j]),
                fmt(self.n_u[j]),
                fmt(self.n_f[j]),
                fmt(self.big_n_u[j]),
                fmt(self.big_n_f[j]),
                fmt(self.gap(j)),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same value.
/// Shortest round-trip decimal; negative zero prints as `0.0`.
pub(crate) fn fmt(v: f64) -> String {
    format!("{:?}", v + 0.0)
}
