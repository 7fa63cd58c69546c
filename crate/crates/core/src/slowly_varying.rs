//! Slowly varying functions ψ: [1, ∞) → (1, ∞) and their iterates
//! `Ψ₁(R) = R ψ(R)`, `Ψₙ = Ψ₁ ∘ Ψₙ₋₁`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Nodes per octave of the cached σ-integral grid.
pub const SIGMA_NODES_PER_OCTAVE: usize = 64;

const DEFAULT_SIGMA_RADIUS: f64 = 1.8446744073709552e19; // 2^64

#[derive(Clone, Debug, PartialEq)]
pub enum SlowlyVarying {
    /// ψ ≡ c with c > 1.
    Constant(f64),
    /// ψ(R) = log(eR).
    LogE,
    /// ψ(R) = exp(coef·√log R).
    ExpSqrtLog { coef: f64 },
    /// ψ(R) = exp(∫₁^R σ(t)/t dt), integrated numerically.
    Sigma(SigmaPsi),
}

impl SlowlyVarying {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::Validation(format!("constant psi must exceed 1, got {c}")));
        }
        Ok(SlowlyVarying::Constant(c))
    }

    pub fn exp_sqrt_log(coef: f64) -> Result<Self> {
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(Error::Validation(format!("coefficient must be positive, got {coef}")));
        }
        Ok(SlowlyVarying::ExpSqrtLog { coef })
    }

    /// log ψ(R); arguments below 1 are clamped to 1.
    pub fn log_eval(&self, r: f64) -> f64 {
        let r = r.max(1.0);
        match self {
            SlowlyVarying::Constant(c) => c.ln(),
            SlowlyVarying::LogE => (1.0 + r.ln()).ln(),
            SlowlyVarying::ExpSqrtLog { coef } => coef * r.ln().sqrt(),
            SlowlyVarying::Sigma(s) => s.log_psi(r),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            SlowlyVarying::LogE => 1.0 + r.max(1.0).ln(),
            _ => self.log_eval(r).exp(),
        }
    }

    /// Ψ₁(R) = R ψ(R).
    pub fn psi1(&self, r: f64) -> f64 {
        r * self.eval(r)
    }

    /// Ψₙ(R); Ψ₀ is the identity.
    pub fn iterate(&self, n: usize, r: f64) -> f64 {
        (0..n).fold(r, |acc, _| self.psi1(acc))
    }

    /// max |ψ(2R)/ψ(R) − 1| over the grid.
    pub fn doubling_deviation(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&r| (self.log_eval(2.0 * r) - self.log_eval(r)).exp_m1().abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for SlowlyVarying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowlyVarying::Constant(c) => write!(f, "const:{c}"),
            SlowlyVarying::LogE => write!(f, "loge"),
            SlowlyVarying::ExpSqrtLog { coef } => write!(f, "expsqrtlog:{coef}"),
            SlowlyVarying::Sigma(s) => write!(f, "sigma:{}", s.sigma),
        }
    }
}

fn parse_num(s: Option<&str>, what: &str) -> Result<f64> {
    let s = s.ok_or_else(|| Error::Validation(format!("missing {what}")))?;
    s.parse::<f64>()
        .map_err(|_| Error::Validation(format!("cannot parse {what} from {s:?}")))
}

impl FromStr for SlowlyVarying {
    type Err = Error;

    /// Accepted forms: `const:C`, `loge`, `expsqrtlog[:COEF]`, `sigma:SPEC`
    /// where SPEC is one of `invloge`, `invlogpow:P`, `const:C:T`, `powdecay:C:P`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        match head {
            "const" => SlowlyVarying::constant(parse_num(rest, "psi constant")?),
            "loge" if rest.is_none() => Ok(SlowlyVarying::LogE),
            "expsqrtlog" => match rest {
                None => SlowlyVarying::exp_sqrt_log(1.0),
                Some(c) => SlowlyVarying::exp_sqrt_log(parse_num(Some(c), "coefficient")?),
            },
            "sigma" => {
                let spec: Sigma = rest.unwrap_or_default().parse()?;
                Ok(SlowlyVarying::Sigma(build_slowly_varying_from_sigma(
                    spec,
                    DEFAULT_SIGMA_RADIUS,
                )?))
            }
            _ => Err(Error::Validation(format!("unknown psi specification {s:?}"))),
        }
    }
}

/// Shipped σ profiles for ψ(R) = exp(∫₁^R σ(t)/t dt).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sigma {
    /// σ(t) = 1/log(et).
    InvLogE,
    /// σ(t) = 1/log(et)^p.
    InvLogPow(f64),
    /// σ(t) = c for t ≤ cap, 0 beyond.
    ConstantUntil { c: f64, cap: f64 },
    /// σ(t) = c·t^(−p); ψ stays bounded.
    PowerDecay { c: f64, p: f64 },
}

impl Sigma {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Sigma::InvLogE => 1.0 / (1.0 + t.ln()),
            Sigma::InvLogPow(p) => (1.0 + t.ln()).powf(-p),
            Sigma::ConstantUntil { c, cap } => {
                if t <= cap {
                    c
                } else {
                    0.0
                }
            }
            Sigma::PowerDecay { c, p } => c * t.powf(-p),
        }
    }

    /// Points in log t where σ may jump.
    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Sigma::ConstantUntil { cap, .. } if cap > 1.0 => vec![cap.ln()],
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Sigma::InvLogE => true,
            Sigma::InvLogPow(p) => p.is_finite(),
            Sigma::ConstantUntil { c, cap } => c.is_finite() && c >= 0.0 && cap.is_finite(),
            Sigma::PowerDecay { c, p } => c.is_finite() && c >= 0.0 && p.is_finite() && p > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("sigma profile {self} has invalid parameters")))
        }
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma::InvLogE => write!(f, "invloge"),
            Sigma::InvLogPow(p) => write!(f, "invlogpow:{p}"),
            Sigma::ConstantUntil { c, cap } => write!(f, "const:{c}:{cap}"),
            Sigma::PowerDecay { c, p } => write!(f, "powdecay:{c}:{p}"),
        }
    }
}

impl FromStr for Sigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let sigma = match parts.as_slice() {
            ["invloge"] => Sigma::InvLogE,
            ["invlogpow", p] => Sigma::InvLogPow(parse_num(Some(p), "exponent")?),
            ["const", c, cap] => Sigma::ConstantUntil {
                c: parse_num(Some(c), "sigma constant")?,
                cap: parse_num(Some(cap), "cap radius")?,
            },
            ["powdecay", c, p] => Sigma::PowerDecay {
                c: parse_num(Some(c), "sigma constant")?,
                p: parse_num(Some(p), "exponent")?,
            },
            _ => return Err(Error::Validation(format!("unknown sigma specification {s:?}"))),
        };
        sigma.validate()?;
        Ok(sigma)
    }
}

/// Grid diagnostics gathered while building a σ-integral ψ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaDiagnostics {
    pub peak: f64,
    pub tail: f64,
    /// σ vanishes somewhere on the grid.
    pub has_zero: bool,
    /// σ at the end of the grid is below half its peak and not above its
    /// mid-grid value.
    pub decays: bool,
}

/// ψ(R) = exp(∫₁^R σ(t)/t dt) with the integral cached on a log grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaPsi {
    sigma: Sigma,
    step: f64,
    cumulative: Vec<f64>,
    diagnostics: SigmaDiagnostics,
}

impl SigmaPsi {
    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    pub fn diagnostics(&self) -> SigmaDiagnostics {
        self.diagnostics
    }

    /// log ψ(R) = ∫₀^{log R} σ(eˢ) ds.
    pub fn log_psi(&self, r: f64) -> f64 {
        let s = r.max(1.0).ln();
        let last = self.cumulative.len() - 1;
        let j = ((s / self.step).floor() as usize).min(last);
        let mut acc = self.cumulative[j];
        let mut a = j as f64 * self.step;
        while s - a > self.step {
            acc += integrate_cell(&self.sigma, a, a + self.step);
            a += self.step;
        }
        acc + integrate_cell(&self.sigma, a, s)
    }
}

/// Simpson's rule in s = log t on [a, b], split at σ breakpoints.
fn integrate_cell(sigma: &Sigma, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut edges = vec![a];
    edges.extend(sigma.breakpoints().into_iter().filter(|&p| p > a && p < b));
    edges.push(b);
    edges
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            // one-sided samples so jumps at breakpoints are taken from inside
            let nudge = (1e-13 * (hi - lo))
                .max(8.0 * f64::EPSILON * hi.abs().max(1.0))
                .min(0.25 * (hi - lo));
            let fa = sigma.eval((lo + nudge).exp());
            let fm = sigma.eval((0.5 * (lo + hi)).exp());
            let fb = sigma.eval((hi - nudge).exp());
            (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
        })
        .sum()
}

/// Builds ψ from σ with a cached grid reaching `max_radius`; evaluation
/// beyond the grid keeps integrating cell by cell.
pub fn build_slowly_varying_from_sigma(sigma: Sigma, max_radius: f64) -> Result<SigmaPsi> {
    sigma.validate()?;
    if !(max_radius > 1.0) {
        return Err(Error::Validation("sigma grid radius must exceed 1".into()));
    }
    let step = std::f64::consts::LN_2 / SIGMA_NODES_PER_OCTAVE as f64;
    let cells = (max_radius.ln() / step).ceil() as usize;
    let mut cumulative = Vec::with_capacity(cells + 1);
    cumulative.push(0.0);
    let mut peak: f64 = 0.0;
    let mut has_zero = false;
    for j in 0..=cells {
        let s = j as f64 * step;
        let v = sigma.eval(s.exp());
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain(format!(
                "sigma({}) = {v}; sigma must be finite and nonnegative",
                s.exp()
            )));
        }
        has_zero |= v == 0.0;
        peak = peak.max(v);
        if j < cells {
            let prev = cumulative[j];
            cumulative.push(prev + integrate_cell(&sigma, s, s + step));
        }
    }
    let tail = sigma.eval((cells as f64 * step).exp());
    let mid = sigma.eval((cells as f64 * step / 2.0).exp());
    let diagnostics = SigmaDiagnostics {
        peak,
        tail,
        has_zero,
        decays: tail <= mid && tail < 0.5 * peak || tail == 0.0,
    };
    Ok(SigmaPsi { sigma, step, cumulative, diagnostics })
}
