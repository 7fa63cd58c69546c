//! Subcommand implementations. Each writes its files into the output
//! directory followed by `manifest.json`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use subharm_core::atomize::{atomize_pair, to_log_coords};
use subharm_core::counterexample::{best_rounding_zeros, counting_gap_scan, reduce_alpha, sharpness_ratio};
use subharm_core::decomposition::{extract_integer_atoms, verify_decomposition};
use subharm_core::io::{read_zero_set, write_decomposition_csv, write_pieces_csv, write_zero_set};
use subharm_core::measure::verify_generic_origin;
use subharm_core::metrics::{circle_mean_report, counting_function, Discrepancy, ErrorReport};
use subharm_core::partition::{partition_mass_two_with, verify_partition, PartitionConfig, PropertyReport};
use subharm_core::pipeline::{approximate, ApproxConfig, Approximation};
use subharm_core::{Complex64, LogPotential, LogRectangle, Measure, QuadratureParams, ZeroSet};

use crate::config::{user_error, RunConfig};

/// Quadrature did not reach the requested tolerance; mapped to exit code 1.
#[derive(Debug)]
pub struct ToleranceFailure(pub String);

impl std::fmt::Display for ToleranceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ToleranceFailure {}

/// Collects the files of one run and writes the manifest last.
struct Run<'a> {
    command: &'static str,
    cfg: &'a RunConfig,
    outputs: Vec<String>,
    summary: BTreeMap<String, Value>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a RunConfig,
    outputs: &'a [String],
    summary: &'a BTreeMap<String, Value>,
}

impl<'a> Run<'a> {
    fn new(command: &'static str, cfg: &'a RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        Ok(Self { command, cfg, outputs: Vec::new(), summary: BTreeMap::new() })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.cfg.out.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut w)?;
        w.flush()?;
        self.outputs.push(name.to_owned());
        Ok(())
    }

    fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_owned(), serde_json::to_value(value).expect("summary values serialize"));
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.outputs.push("manifest.json".into());
        let manifest = Manifest {
            tool: "subharm",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.cfg.seed,
            config: self.cfg,
            outputs: &self.outputs,
            summary: &self.summary,
        };
        let path = self.cfg.out.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(self.cfg.out.clone())
    }
}

fn quad(cfg: &RunConfig) -> QuadratureParams {
    QuadratureParams { rel_tol: cfg.tol, ..QuadratureParams::default() }
}

fn approx_config(cfg: &RunConfig) -> Result<ApproxConfig> {
    Ok(ApproxConfig {
        r1: cfg.r1,
        shift_radius: (cfg.shift_radius > 0.0).then_some(cfg.shift_radius),
        seed: cfg.seed,
        ..ApproxConfig::new(cfg.psi()?)
    })
}

fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn check_tolerance(rep: &ErrorReport) -> Result<()> {
    if rep.flagged {
        return Err(ToleranceFailure("disk quadrature did not reach the requested tolerance".into()).into());
    }
    Ok(())
}

pub fn approximate_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let (m, _) = cfg.measure()?;
    let psi = cfg.psi()?;
    let a = approximate(&m, &approx_config(cfg)?)?;
    let rep = ErrorReport::build(&Discrepancy::new(&m, &a.zeros, 0.0)?, &psi, &cfg.r_grid, &quad(cfg))?;
    let pieces: Vec<_> = a.pieces().cloned().collect();

    let mut run = Run::new("approximate", cfg)?;
    run.write("zeros.txt", |w| Ok(write_zero_set(&a.zeros, w)?))?;
    run.write("decomposition.csv", |w| Ok(write_decomposition_csv(&a.decomposition, &psi, w)?))?;
    run.write("pieces.csv", |w| Ok(write_pieces_csv(&pieces, w)?))?;
    run.write("error_report.csv", |w| Ok(rep.write_csv(w)?))?;
    summarize_approximation(&mut run, &m, &a);
    run.note("ratio_spread", if rep.radii.is_empty() { None } else { Some(rep.spread()) });
    run.note("quadrature_flagged", rep.flagged);
    run.finish()?;
    check_tolerance(&rep)?;
    Ok(cfg.out.clone())
}

fn summarize_approximation(run: &mut Run, m: &Measure, a: &Approximation) {
    let stats = a.partition_stats();
    run.note("atoms", m.len());
    run.note("total_mass", m.total_mass());
    run.note("zero_count", a.zeros.total_multiplicity());
    run.note("shift", complex(a.shift));
    run.note("annuli", a.decomposition.steps.len());
    run.note("heavy_tail_blocks", a.schedule.blocks.len());
    run.note("pieces", a.pairs.len());
    run.note("partition_nodes", stats.cuts + stats.shrinks);
    run.note("partition_flagged_cuts", stats.flagged_cuts);
    run.note("truncation_radius", a.decomposition.truncation_radius);
}

/// The input measure as points of the partition plane.
fn plane_measure(cfg: &RunConfig) -> Result<Measure> {
    let (m, _) = cfg.measure()?;
    Ok(if cfg.log_coords { to_log_coords(&m)? } else { m })
}

fn root_rect(cfg: &RunConfig, nu: &Measure) -> Result<LogRectangle> {
    if let Some([a, b, c, d]) = cfg.rect {
        return LogRectangle::new(a, b, c, d).map_err(|e| user_error(format!("--rect: {e}")));
    }
    if nu.is_empty() {
        bail!(user_error("cannot partition an empty measure"));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for a in nu {
        (x0, x1) = (x0.min(a.pos.re), x1.max(a.pos.re));
        (y0, y1) = (y0.min(a.pos.im), y1.max(a.pos.im));
    }
    let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let ((x0, x1), (y0, y1)) = (pad(x0, x1), pad(y0, y1));
    Ok(LogRectangle::new(x0, x1, y0, y1)?)
}

fn property_summary(run: &mut Run, rep: &PropertyReport) {
    run.note(
        "properties",
        json!({
            "containment": rep.containment,
            "masses": rep.masses,
            "hulls_disjoint": rep.hulls_disjoint,
            "aspect": rep.aspect,
            "cover": rep.cover,
            "max_cover": rep.max_cover,
            "max_cover_sampled": rep.max_cover_sampled,
            "middle_third_ok_fraction": rep.middle_third_ok_fraction,
        }),
    );
}

pub fn partition_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let nu = plane_measure(cfg)?;
    let rect = root_rect(cfg, &nu)?;
    let part = partition_mass_two_with(&rect, &nu, &PartitionConfig::default())?;
    let rep = verify_partition(&part.pieces, &rect, &nu);
    let mut run = Run::new("partition", cfg)?;
    run.write("pieces.csv", |w| Ok(write_pieces_csv(&part.pieces, w)?))?;
    run.note("root", [rect.sigma_min, rect.sigma_max, rect.t_min, rect.t_max]);
    run.note("pieces", part.pieces.len());
    run.note("node_ok_fraction", part.stats.node_ok_fraction());
    property_summary(&mut run, &rep);
    run.finish()?;
    if !rep.passed() {
        bail!(subharm_core::Error::Invariant(format!("partition properties failed: {:?}", rep.failures)));
    }
    Ok(cfg.out.clone())
}

pub fn atomize_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let nu = plane_measure(cfg)?;
    let rect = root_rect(cfg, &nu)?;
    let part = partition_mass_two_with(&rect, &nu, &PartitionConfig::default())?;
    let pairs = part.pieces.iter().map(atomize_pair).collect::<subharm_core::Result<Vec<_>>>()?;
    let mut run = Run::new("atomize", cfg)?;
    run.write("pieces.csv", |w| Ok(write_pieces_csv(&part.pieces, w)?))?;
    run.write("pairs.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "piece", "omega1_re", "omega1_im", "omega2_re", "omega2_im", "center_re", "center_im", "d", "zeta1_re",
            "zeta1_im", "zeta2_re", "zeta2_im",
        ])?;
        for (i, p) in pairs.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            for v in [
                p.omega1.re, p.omega1.im, p.omega2.re, p.omega2.im, p.omega_center.re, p.omega_center.im, p.d,
                p.zeta1.re, p.zeta1.im, p.zeta2.re, p.zeta2.im,
            ] {
                rec.push(format!("{v:?}"));
            }
            out.write_record(rec)?;
        }
        out.flush()?;
        Ok(())
    })?;
    run.note("pairs", pairs.len());
    run.finish()?;
    Ok(cfg.out.clone())
}

fn read_zero_file(path: &Path) -> Result<ZeroSet> {
    let f = File::open(path).map_err(|e| user_error(format!("cannot open {}: {e}", path.display())))?;
    read_zero_set(BufReader::new(f)).with_context(|| format!("reading zero set {}", path.display()))
}

/// Distinct moduli of the measure in increasing order.
fn moduli(m: &Measure) -> Vec<f64> {
    let mut r: Vec<f64> = m.iter().map(|a| a.pos.norm()).collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

pub fn sharpness_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let (m, spec) = cfg.measure()?;
    let psi = cfg.psi()?;
    let default = if spec.is_some() { "best-rounding" } else { "pipeline" };
    let source = cfg.zeros.as_deref().unwrap_or(default);
    let f = match source {
        "best-rounding" => best_rounding_zeros(&moduli(&m))?,
        "pipeline" => approximate(&m, &approx_config(cfg)?)?.zeros,
        path => read_zero_file(Path::new(path))?,
    };
    let (u, alpha) = if cfg.reduce_alpha { reduce_alpha(&m, cfg.alpha)? } else { (m.clone(), cfg.alpha) };
    let rep = sharpness_ratio(&u, &f, alpha, &psi, &cfg.r_grid, &quad(cfg))?;
    let gaps = counting_gap_scan(&u, &f, alpha, &cfg.r_grid)?;
    let mut run = Run::new("sharpness", cfg)?;
    run.write("error_report.csv", |w| Ok(rep.write_csv(w)?))?;
    run.write("gap_report.csv", |w| Ok(gaps.write_csv(w)?))?;
    run.note("zeros", source);
    run.note("alpha_used", alpha);
    run.note("ratio_min", rep.ratio.iter().copied().fold(f64::INFINITY, f64::min));
    run.note("ratio_spread", rep.spread());
    run.note("gap_violations", gaps.violations.len());
    run.note("quadrature_flagged", rep.flagged);
    run.finish()?;
    check_tolerance(&rep)?;
    Ok(cfg.out.clone())
}

pub fn jensen_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let (m, _) = cfg.measure()?;
    let rows = cfg
        .r_grid
        .iter()
        .map(|&r| {
            let c = circle_mean_report(&m, r, cfg.nodes)?;
            let n = m.integrated_counting(r)?;
            Ok((r, c, n))
        })
        .collect::<subharm_core::Result<Vec<_>>>()?;
    let mut run = Run::new("jensen", cfg)?;
    run.write("jensen.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "circle_mean", "N", "residual", "nodes", "aliasing_bound"])?;
        for (r, c, n) in &rows {
            out.write_record([
                format!("{r:?}"),
                format!("{:?}", c.value),
                format!("{n:?}"),
                format!("{:?}", c.value - n),
                c.nodes.to_string(),
                format!("{:?}", c.error_bound),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;
    let worst = rows.iter().map(|(_, c, n)| (c.value - n).abs()).fold(0.0, f64::max);
    run.note("max_abs_residual", worst);
    run.finish()?;
    Ok(cfg.out.clone())
}

/// Runs the pipeline and every built-in verifier on its intermediate objects.
pub fn verify_cmd(cfg: &RunConfig) -> Result<PathBuf> {
    let (m, _) = cfg.measure()?;
    let psi = cfg.psi()?;
    let a = approximate(&m, &approx_config(cfg)?)?;
    let canon = m.canonicalize();
    let shifted = canon.translate(-a.shift);
    let mut failures: Vec<String> = Vec::new();

    let generic = verify_generic_origin(&canon, a.shift);
    if cfg.shift_radius > 0.0 && !generic.passed() {
        failures.push(format!("origin {} is not generic", a.shift));
    }
    let dec = verify_decomposition(&a.decomposition, &shifted, &psi);
    failures.extend(dec.failures.iter().cloned());
    let spacing = a.schedule.spacing_violations(&psi);
    failures.extend(spacing.iter().map(|n| format!("heavy-tail spacing fails at T_{n}")));

    let mut flagged_fraction = Vec::new();
    for (step, ann) in a.decomposition.steps.iter().zip(&a.annuli) {
        let (_, rest) = extract_integer_atoms(&step.mu1);
        if rest.is_empty() {
            continue;
        }
        let rep = verify_partition(&ann.pieces, &ann.rect, &to_log_coords(&rest)?);
        if !rep.passed() {
            failures.extend(rep.failures.iter().map(|f| format!("annulus {}: {f}", step.k)));
        }
        flagged_fraction.push(rep.middle_third_ok_fraction);
    }

    // counting consistency in the shifted frame
    let f_shifted = a.zeros.translate(-a.shift)?;
    let mut worst_boundary: f64 = 0.0;
    for s in a.decomposition.steps.iter().skip(1) {
        worst_boundary = worst_boundary.max((counting_function(&f_shifted, s.r_k) - shifted.counting(s.r_k)).abs());
    }
    let mut worst_global: f64 = 0.0;
    let first = a.decomposition.steps.first().map_or(f64::INFINITY, |s| s.r_outer);
    for r in moduli(&shifted).into_iter().chain(moduli(&f_shifted.to_measure())) {
        if r >= first {
            worst_global = worst_global.max((counting_function(&f_shifted, r) - shifted.counting(r)).abs());
        }
    }
    if worst_global > 7.0 + 1e-9 {
        failures.push(format!("counting functions differ by {worst_global} > 7"));
    }

    let mut run = Run::new("verify", cfg)?;
    summarize_approximation(&mut run, &m, &a);
    run.note("generic_origin", generic.passed());
    run.note("decomposition", dec.passed());
    run.note("heavy_tail_spacing_violations", spacing);
    run.note("partition_ok_fractions", flagged_fraction);
    run.note("counting_gap_at_boundaries", worst_boundary);
    run.note("counting_gap_global", worst_global);
    run.note("failures", &failures);
    run.write("verify.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &json!({ "passed": failures.is_empty(), "failures": failures }))?;
        writeln!(w)?;
        Ok(())
    })?;
    run.finish()?;
    if !failures.is_empty() {
        bail!(subharm_core::Error::Invariant(failures.join("; ")));
    }
    Ok(cfg.out.clone())
}
