//! Partition of an even-mass measure in a rectangle into mass-2 pieces.
//!
//! Each step cuts the current rectangle across its long side at a position in
//! the middle third of that side, at a quantile where the left part has even
//! mass. When no such position exists the rectangle is shrunk towards the
//! mass, or cut across the short side, and only as a last resort cut outside
//! the middle third (the resulting pieces are flagged).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{sort_along, split_sorted_at, Atom, Axis, Measure, Region};
use crate::sum::pairwise_sum_by;

const MASS_TOL: f64 = 1e-9;

/// Axis-parallel rectangle in log coordinates: σ = log|ζ| horizontally,
/// t = arg ζ vertically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRectangle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl LogRectangle {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let finite = [sigma_min, sigma_max, t_min, t_max].iter().all(|v| v.is_finite());
        if !finite || !(sigma_min < sigma_max) || !(t_min < t_max) {
            return Err(Error::Validation(format!(
                "degenerate rectangle [{sigma_min}, {sigma_max}] x [{t_min}, {t_max}]"
            )));
        }
        if t_max - t_min > std::f64::consts::TAU * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "angular side {} exceeds 2π",
                t_max - t_min
            )));
        }
        Ok(Self { sigma_min, sigma_max, t_min, t_max })
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn short_side(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn long_side(&self) -> f64 {
        self.width().max(self.height())
    }

    /// Long side over short side, at least 1.
    pub fn aspect(&self) -> f64 {
        self.long_side() / self.short_side()
    }

    /// Axis along the long side; the σ axis wins ties.
    pub fn long_axis(&self) -> Axis {
        if self.height() > self.width() {
            Axis::Vertical
        } else {
            Axis::Horizontal
        }
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.sigma_min + self.sigma_max),
            0.5 * (self.t_min + self.t_max),
        )
    }

    pub fn region(&self) -> Region {
        Region::Rect {
            x_min: self.sigma_min,
            x_max: self.sigma_max,
            y_min: self.t_min,
            y_max: self.t_max,
        }
    }

    fn tol(&self) -> f64 {
        1e-12 * [self.sigma_min, self.sigma_max, self.t_min, self.t_max]
            .iter()
            .fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    /// Closed containment with a relative slack of 1e-12.
    pub fn contains(&self, w: Complex64) -> bool {
        let e = self.tol();
        w.re >= self.sigma_min - e
            && w.re <= self.sigma_max + e
            && w.im >= self.t_min - e
            && w.im <= self.t_max + e
    }

    pub fn contains_rect(&self, other: &LogRectangle) -> bool {
        let e = self.tol();
        other.sigma_min >= self.sigma_min - e
            && other.sigma_max <= self.sigma_max + e
            && other.t_min >= self.t_min - e
            && other.t_max <= self.t_max + e
    }

    fn range(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::Horizontal => (self.sigma_min, self.sigma_max),
            Axis::Vertical => (self.t_min, self.t_max),
        }
    }

    fn with_range(&self, axis: Axis, lo: f64, hi: f64) -> Self {
        let mut r = *self;
        match axis {
            Axis::Horizontal => {
                r.sigma_min = lo;
                r.sigma_max = hi;
            }
            Axis::Vertical => {
                r.t_min = lo;
                r.t_max = hi;
            }
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionPiece {
    pub rect: LogRectangle,
    /// Sub-measure of mass 2, in log coordinates.
    pub nu: Measure,
    pub depth: usize,
    /// Every cut on the path from the root kept to the middle third.
    pub middle_third_ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionConfig {
    pub max_depth: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { max_depth: 10_000 }
    }
}

/// Counts over the internal nodes of the partition tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PartitionStats {
    pub cuts: usize,
    pub flagged_cuts: usize,
    pub shrinks: usize,
}

impl PartitionStats {
    /// Fraction of internal nodes (cuts and shrinks) that kept the
    /// middle-third rule; 1 when there are none.
    pub fn node_ok_fraction(&self) -> f64 {
        let nodes = self.cuts + self.shrinks;
        if nodes == 0 {
            1.0
        } else {
            1.0 - self.flagged_cuts as f64 / nodes as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    /// Pieces in left-to-right depth-first order.
    pub pieces: Vec<PartitionPiece>,
    pub stats: PartitionStats,
}

pub fn partition_mass_two(rect: &LogRectangle, nu: &Measure) -> Result<Vec<PartitionPiece>> {
    Ok(partition_mass_two_with(rect, nu, &PartitionConfig::default())?.pieces)
}

struct Node {
    rect: LogRectangle,
    atoms: Vec<Atom>,
    depth: usize,
    ok: bool,
}

#[derive(Clone, Copy)]
enum Step {
    Emit,
    Replicate,
    Shrink(LogRectangle),
    Cut {
        axis: Axis,
        pos: f64,
        left_mass: f64,
        left: LogRectangle,
        right: LogRectangle,
        ok: bool,
    },
}

pub fn partition_mass_two_with(
    rect: &LogRectangle,
    nu: &Measure,
    cfg: &PartitionConfig,
) -> Result<Partition> {
    let total = nu.total_mass();
    let pairs = (total / 2.0).round();
    if pairs < 1.0 || (total - 2.0 * pairs).abs() > MASS_TOL {
        return Err(Error::Domain(format!(
            "partition needs an even positive mass, got {total}"
        )));
    }
    if let Some(a) = nu.iter().find(|a| !rect.contains(a.pos)) {
        return Err(Error::Domain(format!("atom {} lies outside the rectangle", a.pos)));
    }
    let mut out = Partition {
        pieces: Vec::with_capacity(pairs as usize),
        stats: PartitionStats::default(),
    };
    let mut stack = vec![Node {
        rect: *rect,
        atoms: nu.atoms().to_vec(),
        depth: 0,
        ok: true,
    }];
    // heavy nodes are cut greedily; light subtrees are searched
    while let Some(node) = stack.pop() {
        check_depth(node.depth, cfg)?;
        let mass = pairwise_sum_by(&node.atoms, |a| a.mass);
        if mass <= SEARCH_MASS + MASS_TOL {
            let mut budget = SEARCH_BUDGET;
            out.append(solve(node, cfg, &mut budget)?);
            continue;
        }
        match candidates(&node.rect, &node.atoms, false)[0] {
            Step::Shrink(rect) => {
                out.stats.shrinks += 1;
                stack.push(Node { rect, depth: node.depth + 1, ..node });
            }
            Step::Cut { axis, pos, left_mass, left, right, ok } => {
                out.stats.cuts += 1;
                out.stats.flagged_cuts += usize::from(!ok);
                let (l, r) = split(node.atoms, axis, pos, left_mass);
                let ok = node.ok && ok;
                let depth = node.depth + 1;
                stack.push(Node { rect: right, atoms: r, depth, ok });
                stack.push(Node { rect: left, atoms: l, depth, ok });
            }
            Step::Emit | Step::Replicate => unreachable!("heavy nodes are split"),
        }
    }
    Ok(out)
}

impl Partition {
    fn append(&mut self, other: Partition) {
        self.pieces.extend(other.pieces);
        self.stats.cuts += other.stats.cuts;
        self.stats.flagged_cuts += other.stats.flagged_cuts;
        self.stats.shrinks += other.stats.shrinks;
    }
}

fn check_depth(depth: usize, cfg: &PartitionConfig) -> Result<()> {
    if depth > cfg.max_depth {
        return Err(Error::Invariant(format!(
            "partition depth exceeded the cap {}",
            cfg.max_depth
        )));
    }
    Ok(())
}

/// Subtrees up to this mass are built by searching over candidate cuts for
/// the fewest flagged cuts.
const SEARCH_MASS: f64 = 40.0;

/// Subtree evaluations allowed per searched root; past it the first
/// candidate is taken.
const SEARCH_BUDGET: usize = 4_000;

/// Cut positions tried inside an admissible interval at light nodes.
const POSITION_FRACTIONS: [f64; 3] = [0.5, 0.1, 0.9];
const FRACTION_MASS: f64 = 8.0;

fn solve(node: Node, cfg: &PartitionConfig, budget: &mut usize) -> Result<Partition> {
    check_depth(node.depth, cfg)?;
    let mass = pairwise_sum_by(&node.atoms, |a| a.mass);
    let mut out = Partition { pieces: Vec::new(), stats: PartitionStats::default() };
    let options = candidates(&node.rect, &node.atoms, mass <= FRACTION_MASS + MASS_TOL);
    let mut best: Option<Partition> = None;
    for step in options {
        let trial = match step {
            Step::Emit => {
                out.pieces.push(PartitionPiece {
                    rect: node.rect,
                    nu: Measure::from_atoms_unchecked(node.atoms),
                    depth: node.depth,
                    middle_third_ok: node.ok,
                });
                return Ok(out);
            }
            Step::Replicate => {
                let k = (mass / 2.0).round() as usize;
                let pos = node.atoms[0].pos;
                out.pieces.extend((0..k).map(|_| PartitionPiece {
                    rect: node.rect,
                    nu: Measure::from_atoms_unchecked(vec![Atom::new(pos, 2.0)]),
                    depth: node.depth,
                    middle_third_ok: node.ok,
                }));
                return Ok(out);
            }
            Step::Shrink(rect) => {
                let mut t = solve(
                    Node { rect, atoms: node.atoms.clone(), depth: node.depth + 1, ok: node.ok },
                    cfg,
                    budget,
                )?;
                t.stats.shrinks += 1;
                t
            }
            Step::Cut { axis, pos, left_mass, left, right, ok } => {
                let (l, r) = split(node.atoms.clone(), axis, pos, left_mass);
                let (depth, ok_below) = (node.depth + 1, node.ok && ok);
                let mut t = solve(Node { rect: left, atoms: l, depth, ok: ok_below }, cfg, budget)?;
                t.append(solve(Node { rect: right, atoms: r, depth, ok: ok_below }, cfg, budget)?);
                t.stats.cuts += 1;
                t.stats.flagged_cuts += usize::from(!ok);
                t
            }
        };
        *budget = budget.saturating_sub(1);
        let better = best
            .as_ref()
            .is_none_or(|b| trial.stats.flagged_cuts < b.stats.flagged_cuts);
        if better {
            best = Some(trial);
        }
        if best.as_ref().is_some_and(|b| b.stats.flagged_cuts == 0) || *budget == 0 {
            break;
        }
    }
    Ok(best.expect("every node has a candidate"))
}

/// Cumulative mass over distinct coordinates along an axis.
struct Profile {
    coords: Vec<f64>,
    cum: Vec<f64>,
}

impl Profile {
    fn new(atoms: &[Atom], axis: Axis) -> Self {
        let mut v: Vec<(f64, f64)> = atoms.iter().map(|a| (axis.coord(a.pos), a.mass)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut coords = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (c, m) in v {
            acc += m;
            if coords.last() == Some(&c) {
                *cum.last_mut().unwrap() = acc;
            } else {
                coords.push(c);
                cum.push(acc);
            }
        }
        Self { coords, cum }
    }

    fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// Cut positions leaving mass exactly `m` on the left: an open gap
    /// between two coordinates, or a single coordinate whose atoms get split.
    fn feasible(&self, m: f64) -> Option<(f64, f64)> {
        let g = self.cum.iter().position(|&c| c >= m - MASS_TOL)?;
        if (self.cum[g] - m).abs() <= MASS_TOL {
            let next = self.coords.get(g + 1)?;
            Some((self.coords[g], *next))
        } else {
            Some((self.coords[g], self.coords[g]))
        }
    }

    /// Even left masses ordered by closeness to half the total, smaller first on ties.
    fn even_targets(&self) -> Vec<f64> {
        let k = (self.total() / 2.0).round() as i64;
        let mut ms: Vec<i64> = (1..k).map(|j| 2 * j).collect();
        ms.sort_by_key(|&m| ((2 * m - 2 * k).abs(), m));
        ms.into_iter().map(|m| m as f64).collect()
    }

    /// Even cuts with an admissible interval meeting `[w_lo, w_hi]`, as
    /// `(left mass, interval start, interval end)` in preference order.
    fn cuts_within(&self, w_lo: f64, w_hi: f64) -> Vec<(f64, f64, f64)> {
        if w_lo > w_hi {
            return Vec::new();
        }
        self.even_targets()
            .into_iter()
            .filter_map(|m| {
                let (a, b) = self.feasible(m)?;
                let (lo, hi) = (a.max(w_lo), b.min(w_hi));
                (lo <= hi).then_some((m, lo, hi))
            })
            .collect()
    }
}

/// Candidate steps in order of preference: terminal steps, admissible cuts
/// and shrinks, else flagged cuts.
fn candidates(rect: &LogRectangle, atoms: &[Atom], all_positions: bool) -> Vec<Step> {
    let mass = pairwise_sum_by(atoms, |a| a.mass);
    if mass < 4.0 - MASS_TOL {
        return vec![Step::Emit];
    }
    let first = atoms[0].pos;
    if atoms.iter().all(|a| a.pos == first) {
        return vec![Step::Replicate];
    }
    let options = admissible(rect, atoms, all_positions);
    if options.is_empty() {
        violating(rect, atoms, all_positions)
    } else {
        options
    }
}

fn split(mut atoms: Vec<Atom>, axis: Axis, pos: f64, left_mass: f64) -> (Vec<Atom>, Vec<Atom>) {
    sort_along(&mut atoms, axis);
    split_sorted_at(&atoms, axis, pos, left_mass)
}

/// Cuts and shrinks that respect the middle-third rule, in order of
/// preference: long-side cuts, then shrinks. Squares may be cut either way.
fn admissible(rect: &LogRectangle, atoms: &[Atom], all_positions: bool) -> Vec<Step> {
    let long = rect.long_axis();
    let mut out = Vec::new();
    push_cuts(&mut out, rect, atoms, long, middle_third(rect, long), all_positions, true);
    let square = (rect.width() - rect.height()).abs() <= 1e-12 * rect.long_side();
    if square {
        let other = long.other();
        push_cuts(&mut out, rect, atoms, other, middle_third(rect, other), all_positions, true);
    }
    out.extend(shrink(rect, atoms).into_iter().map(Step::Shrink));
    out
}

/// Flagged alternatives when nothing is admissible: a short-side cut that
/// keeps the aspect ratio at most 3, then an overlapping long-side cut.
fn violating(rect: &LogRectangle, atoms: &[Atom], all_positions: bool) -> Vec<Step> {
    let long = rect.long_axis();
    let short = long.other();
    let (s_lo, s_hi) = rect.range(short);
    let margin = ((s_hi - s_lo) / 3.0).max(rect.long_side() / 3.0);
    let mut out = Vec::new();
    push_cuts(&mut out, rect, atoms, short, (s_lo + margin, s_hi - margin), all_positions, false);
    out.push(fallback(rect, atoms));
    out
}

fn middle_third(rect: &LogRectangle, axis: Axis) -> (f64, f64) {
    let (lo, hi) = rect.range(axis);
    let len = hi - lo;
    (lo + len / 3.0, lo + 2.0 * len / 3.0)
}

fn push_cuts(
    out: &mut Vec<Step>,
    rect: &LogRectangle,
    atoms: &[Atom],
    axis: Axis,
    (w_lo, w_hi): (f64, f64),
    all_positions: bool,
    ok: bool,
) {
    let (lo, hi) = rect.range(axis);
    for (m, a, b) in Profile::new(atoms, axis).cuts_within(w_lo, w_hi) {
        let fractions: &[f64] = if all_positions && a < b { &POSITION_FRACTIONS } else { &[0.5] };
        for &f in fractions {
            let pos = a + f * (b - a);
            out.push(Step::Cut {
                axis,
                pos,
                left_mass: m,
                left: rect.with_range(axis, lo, pos),
                right: rect.with_range(axis, pos, hi),
                ok,
            });
        }
    }
}

/// Shrinks of the long side to a third or two thirds of its length that keep
/// the support: empty outer thirds first, then windows around the support.
fn shrink(rect: &LogRectangle, atoms: &[Atom]) -> Vec<LogRectangle> {
    let long = rect.long_axis();
    let (lo, hi) = rect.range(long);
    let len = hi - lo;
    let (c_min, c_max) = atoms
        .iter()
        .map(|a| long.coord(a.pos))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for (fits, a, b) in [
        (c_max <= lo + len / 3.0, lo, lo + len / 3.0),
        (c_max <= lo + 2.0 * len / 3.0, lo, lo + 2.0 * len / 3.0),
        (c_min >= hi - len / 3.0, hi - len / 3.0, hi),
        (c_min >= hi - 2.0 * len / 3.0, hi - 2.0 * len / 3.0, hi),
    ] {
        if fits {
            windows.push((a, b));
        }
    }
    if windows.is_empty() {
        let span = c_max - c_min;
        for w in [(len / 3.0).max(span), 2.0 * len / 3.0] {
            if span <= w && w <= 2.0 * len / 3.0 {
                let a = (0.5 * (c_min + c_max) - 0.5 * w).clamp(lo, hi - w).min(c_min);
                windows.push((a, (a + w).max(c_max)));
            }
        }
    }
    windows.dedup();
    windows.into_iter().map(|(a, b)| rect.with_range(long, a, b)).collect()
}

/// Even cut nearest the middle third of the long side (of the short side if
/// all atoms share one long coordinate), with the thin side widened to a third.
fn fallback(rect: &LogRectangle, atoms: &[Atom]) -> Step {
    let long = rect.long_axis();
    let profile = Profile::new(atoms, long);
    let (axis, prof) = if profile.coords.len() > 1 {
        (long, profile)
    } else {
        (long.other(), Profile::new(atoms, long.other()))
    };
    let (lo, hi) = rect.range(axis);
    let len = hi - lo;
    let (w_lo, w_hi) = (lo + len / 3.0, lo + 2.0 * len / 3.0);
    let mut best: Option<(f64, f64, f64)> = None;
    for m in prof.even_targets() {
        if let Some((a, b)) = prof.feasible(m) {
            let (dist, pos) = if b < w_lo { (w_lo - b, b) } else { (a - w_hi, a) };
            if best.is_none_or(|(d, _, _)| dist < d) {
                best = Some((dist, pos, m));
            }
        }
    }
    let (_, pos, m) = best.expect("mass 4 or more has an even cut");
    let (left, right) = if pos < w_lo {
        (rect.with_range(axis, lo, w_lo), rect.with_range(axis, pos, hi))
    } else {
        (rect.with_range(axis, lo, pos), rect.with_range(axis, w_hi, hi))
    };
    Step::Cut { axis, pos, left_mass: m, left, right, ok: false }
}

/// Outcome of checking the five partition properties.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropertyReport {
    /// 1) each piece's support lies in its rectangle, which lies in the root.
    pub containment: bool,
    /// 2) masses equal 2 and the pieces add up to the input measure.
    pub masses: bool,
    /// 3) convex hulls of the supports have disjoint interiors.
    pub hulls_disjoint: bool,
    /// 4) aspect ratios within [1, max(3, l₀)], root short side kept above 3.
    pub aspect: bool,
    /// 5) no point lies in more than 4 open rectangles.
    pub cover: bool,
    pub max_cover: usize,
    pub max_cover_sampled: usize,
    pub middle_third_ok_fraction: f64,
    pub failures: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.containment && self.masses && self.hulls_disjoint && self.aspect && self.cover
    }
}

/// Number of random points used by the sampled cover check.
pub const COVER_SAMPLES: usize = 10_000;

pub fn verify_partition(pieces: &[PartitionPiece], rect: &LogRectangle, nu: &Measure) -> PropertyReport {
    let mut r = PropertyReport {
        containment: true,
        masses: true,
        hulls_disjoint: true,
        aspect: true,
        cover: true,
        ..Default::default()
    };
    for (i, p) in pieces.iter().enumerate() {
        if !rect.contains_rect(&p.rect) || p.nu.iter().any(|a| !p.rect.contains(a.pos)) {
            r.containment = false;
            r.failures.push(format!("piece {i}: support or rectangle escapes"));
        }
        let m = p.nu.total_mass();
        if (m - 2.0).abs() > MASS_TOL {
            r.masses = false;
            r.failures.push(format!("piece {i}: mass {m}"));
        }
    }
    let mut all = Vec::new();
    for p in pieces {
        all.extend_from_slice(p.nu.atoms());
    }
    let joined = Measure::from_atoms_unchecked(all).canonicalize();
    let want = nu.canonicalize();
    let same = joined.len() == want.len()
        && joined.iter().zip(want.iter()).all(|(a, b)| {
            a.pos == b.pos && (a.mass - b.mass).abs() <= 1e-12 * b.mass.max(1.0)
        });
    if !same {
        r.masses = false;
        r.failures.push("pieces do not reassemble the input measure".into());
    }

    let hulls: Vec<Vec<Complex64>> = pieces
        .iter()
        .map(|p| convex_hull(p.nu.iter().map(|a| a.pos).collect()))
        .collect();
    let scale = rect.diameter().max(1.0);
    for i in 0..hulls.len() {
        for j in i + 1..hulls.len() {
            if interiors_overlap(&hulls[i], &hulls[j], 1e-12 * scale) {
                r.hulls_disjoint = false;
                r.failures.push(format!("pieces {i} and {j}: hull interiors overlap"));
            }
        }
    }

    let a0 = rect.short_side();
    let l_max = rect.aspect().max(3.0) * (1.0 + 1e-9);
    for (i, p) in pieces.iter().enumerate() {
        let l = p.rect.aspect();
        let keeps_short = (p.rect.short_side() - a0).abs() <= 1e-9 * a0;
        if l > l_max || (l > 3.0 * (1.0 + 1e-9) && !keeps_short) {
            r.aspect = false;
            r.failures.push(format!("piece {i}: aspect {l}"));
        }
    }

    let rects: Vec<LogRectangle> = pieces.iter().map(|p| p.rect).collect();
    r.max_cover = max_cover_exact(&rects);
    r.max_cover_sampled = max_cover_sampled(&rects, rect, COVER_SAMPLES, 0x5eed);
    if r.max_cover > 4 || r.max_cover_sampled > 4 {
        r.cover = false;
        r.failures.push(format!("cover multiplicity {}", r.max_cover.max(r.max_cover_sampled)));
    }
    r.middle_third_ok_fraction = if pieces.is_empty() {
        1.0
    } else {
        pieces.iter().filter(|p| p.middle_third_ok).count() as f64 / pieces.len() as f64
    };
    r
}

/// Largest number of open rectangles sharing a point, by a sweep over the
/// cells cut out by all rectangle edges.
pub fn max_cover_exact(rects: &[LogRectangle]) -> usize {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.sigma_min, r.sigma_max]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.t_min, r.t_max]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut best = 0;
    let mut diff = vec![0i64; ys.len() + 1];
    for w in xs.windows(2) {
        let xm = 0.5 * (w[0] + w[1]);
        diff.iter_mut().for_each(|d| *d = 0);
        for r in rects.iter().filter(|r| r.sigma_min < xm && xm < r.sigma_max) {
            let a = ys.partition_point(|&y| y < r.t_min);
            let b = ys.partition_point(|&y| y < r.t_max);
            diff[a] += 1;
            diff[b] -= 1;
        }
        let mut acc = 0i64;
        for d in &diff[..ys.len().saturating_sub(1)] {
            acc += d;
            best = best.max(acc as usize);
        }
    }
    best
}

/// Largest number of open rectangles containing one of `n` seeded random
/// points of `within`.
pub fn max_cover_sampled(rects: &[LogRectangle], within: &LogRectangle, n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = within.sigma_min + within.width() * rng.random::<f64>();
            let y = within.t_min + within.height() * rng.random::<f64>();
            rects
                .iter()
                .filter(|r| r.sigma_min < x && x < r.sigma_max && r.t_min < y && y < r.t_max)
                .count()
        })
        .max()
        .unwrap_or(0)
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Counter-clockwise convex hull without collinear points.
pub fn convex_hull(mut pts: Vec<Complex64>) -> Vec<Complex64> {
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Whether two convex polygons (CCW) have intersecting interiors. Polygons
/// with fewer than three vertices have empty interior.
pub fn interiors_overlap(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() < 3 || b.len() < 3 {
        return false;
    }
    for poly in [a, b] {
        for i in 0..poly.len() {
            let p = poly[i];
            let q = poly[(i + 1) % poly.len()];
            let e = q - p;
            let n = Complex64::new(-e.im, e.re) / e.norm();
            let proj = |v: &Complex64| v.re * n.re + v.im * n.im;
            let (a_lo, a_hi) = a.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            let (b_lo, b_hi) = b.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            if a_hi <= b_lo + tol || b_hi <= a_lo + tol {
                return false;
            }
        }
    }
    true
}
