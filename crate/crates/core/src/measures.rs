//! Finite distributions and divergence functionals.
//!
//! Probabilities are stored as natural logs; a zero mass is the exact marker
//! `f64::NEG_INFINITY`, never a small epsilon.

pub mod exact;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural log of a nonnegative quantity. `+inf` and `-inf` are both legal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogValue(pub f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);
    pub const INFINITY: LogValue = LogValue(f64::INFINITY);

    pub fn from_value(x: f64) -> Self {
        LogValue(x.ln())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn log2(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    /// Raise the underlying quantity to a real power.
    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return LogValue::ONE;
        }
        LogValue(self.0 * p)
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue(log_add(self.0, rhs.0))
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue(self.0 + rhs.0)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln sum exp(x_i)`, `-inf` for an empty or all-zero input.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogAcc {
    max: f64,
    sum: f64,
}

impl Default for LogAcc {
    fn default() -> Self {
        LogAcc { max: f64::NEG_INFINITY, sum: 0.0 }
    }
}

impl LogAcc {
    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: LogAcc) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Finite distribution over integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    states: Vec<i64>,
    logp: Vec<f64>,
}

const NORM_TOL: f64 = 1e-12;

impl Dist {
    /// Build from log-probabilities; states must be strictly increasing and
    /// the masses must sum to one within `1e-12`.
    pub fn from_logp(states: Vec<i64>, logp: Vec<f64>) -> Result<Self> {
        if states.len() != logp.len() {
            return Err(Error::InvalidDist("states and probabilities differ in length".into()));
        }
        if states.is_empty() {
            return Err(Error::InvalidDist("empty support".into()));
        }
        if states.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDist("states must be strictly increasing".into()));
        }
        if logp.iter().any(|l| l.is_nan() || *l > 0.0) {
            return Err(Error::InvalidDist("log-probabilities must lie in [-inf, 0]".into()));
        }
        let z = logsumexp(&logp);
        if !(z.abs() <= NORM_TOL) {
            return Err(Error::InvalidDist(format!("total mass exp({z}) is not 1")));
        }
        Ok(Dist { states, logp })
    }

    /// Build from nonnegative weights, normalizing in log space. Used for
    /// distributions produced by computation rather than supplied by a user.
    pub fn from_log_weights(states: Vec<i64>, logw: Vec<f64>) -> Result<Self> {
        let z = logsumexp(&logw);
        if !z.is_finite() {
            return Err(Error::InvalidDist("weights have no finite positive mass".into()));
        }
        let logp: Vec<f64> = logw.iter().map(|w| if *w == f64::NEG_INFINITY { *w } else { w - z }).collect();
        let mut pairs: Vec<(i64, f64)> = states.into_iter().zip(logp).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDist("duplicate state".into()));
        }
        let (states, logp) = pairs.into_iter().unzip();
        Ok(Dist { states, logp })
    }

    /// Build from plain probabilities. A probability of exactly zero becomes the `-inf` marker.
    pub fn from_probs(states: Vec<i64>, probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDist("probabilities must be finite and nonnegative".into()));
        }
        Dist::from_logp(states, probs.iter().map(|p| p.ln()).collect())
    }

    /// Probabilities on states `0..k`.
    pub fn on_range(probs: &[f64]) -> Result<Self> {
        Dist::from_probs((0..probs.len() as i64).collect(), probs)
    }

    pub fn uniform(states: Vec<i64>) -> Result<Self> {
        let k = states.len() as f64;
        let lp = vec![-k.ln(); states.len()];
        Dist::from_logp(states, lp)
    }

    pub fn point(state: i64) -> Self {
        Dist { states: vec![state], logp: vec![0.0] }
    }

    /// Point mass at `state` embedded in a larger state set.
    pub fn point_on(states: &[i64], state: i64) -> Result<Self> {
        if !states.contains(&state) {
            return Err(Error::InvalidDist(format!("state {state} not in the state set")));
        }
        let logp = states.iter().map(|&s| if s == state { 0.0 } else { f64::NEG_INFINITY }).collect();
        Dist::from_logp(states.to_vec(), logp)
    }

    pub fn states(&self) -> &[i64] {
        &self.states
    }

    pub fn logp(&self) -> &[f64] {
        &self.logp
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.logp.iter().map(|l| l.exp()).collect()
    }

    fn index(&self, state: i64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }

    /// Log-probability of a state; `-inf` outside the listed states.
    pub fn log_prob(&self, state: i64) -> f64 {
        self.index(state).map_or(f64::NEG_INFINITY, |i| self.logp[i])
    }

    pub fn prob(&self, state: i64) -> f64 {
        self.log_prob(state).exp()
    }

    /// States carrying positive mass.
    pub fn support(&self) -> Vec<i64> {
        self.iter().filter(|(_, l)| *l > f64::NEG_INFINITY).map(|(s, _)| s).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.states.iter().copied().zip(self.logp.iter().copied())
    }

    /// Smallest log-probability over the support.
    pub fn min_log_prob(&self) -> f64 {
        self.logp.iter().copied().filter(|l| *l > f64::NEG_INFINITY).fold(0.0, f64::min)
    }

    /// Expectation of `g` under the distribution.
    pub fn expect(&self, g: impl Fn(i64) -> f64) -> f64 {
        self.iter().filter(|(_, l)| *l > f64::NEG_INFINITY).map(|(s, l)| l.exp() * g(s)).sum()
    }

    /// Largest absolute difference of probabilities over the union of states.
    pub fn max_abs_diff(&self, other: &Dist) -> f64 {
        aligned(self, other).map(|(_, a, b)| (a.exp() - b.exp()).abs()).fold(0.0, f64::max)
    }
}

/// Walk the union of two state lists, yielding `(state, logp_a, logp_b)`.
pub(crate) fn aligned<'a>(a: &'a Dist, b: &'a Dist) -> impl Iterator<Item = (i64, f64, f64)> + 'a {
    let mut i = 0;
    let mut j = 0;
    std::iter::from_fn(move || {
        let sa = a.states.get(i).copied();
        let sb = b.states.get(j).copied();
        match (sa, sb) {
            (None, None) => None,
            (Some(s), None) => {
                i += 1;
                Some((s, a.logp[i - 1], f64::NEG_INFINITY))
            }
            (None, Some(s)) => {
                j += 1;
                Some((s, f64::NEG_INFINITY, b.logp[j - 1]))
            }
            (Some(x), Some(y)) => match x.cmp(&y) {
                Ordering::Less => {
                    i += 1;
                    Some((x, a.logp[i - 1], f64::NEG_INFINITY))
                }
                Ordering::Greater => {
                    j += 1;
                    Some((y, f64::NEG_INFINITY, b.logp[j - 1]))
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    Some((x, a.logp[i - 1], b.logp[j - 1]))
                }
            },
        }
    })
}

fn check_ac(nu: &Dist, mu: &Dist) -> Result<()> {
    for (s, ln, lm) in aligned(nu, mu) {
        if ln > f64::NEG_INFINITY && lm == f64::NEG_INFINITY {
            return Err(Error::AbsoluteContinuityViolation { state: s });
        }
    }
    Ok(())
}

/// `ln sum nu^a mu^(1-a)` for any finite order `a > 0`, over the common support.
/// For `a > 1` the caller must have checked absolute continuity.
pub(crate) fn log_power_sum(nu: &Dist, mu: &Dist, a: f64) -> f64 {
    let mut acc = LogAcc::default();
    for (_, ln, lm) in aligned(nu, mu) {
        if ln == f64::NEG_INFINITY || lm == f64::NEG_INFINITY {
            continue;
        }
        acc.push(a * ln + (1.0 - a) * lm);
    }
    acc.value()
}

/// Log of the largest likelihood ratio `nu(x)/mu(x)` over `supp(nu)`.
pub fn log_max_ratio(nu: &Dist, mu: &Dist) -> Result<f64> {
    check_ac(nu, mu)?;
    Ok(aligned(nu, mu)
        .filter(|(_, ln, _)| *ln > f64::NEG_INFINITY)
        .map(|(_, ln, lm)| ln - lm)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Log of the Hellinger integral `H_alpha(nu || mu) = sum nu^alpha mu^(1-alpha)`.
///
/// At `alpha = inf` the returned value is the log of the largest likelihood
/// ratio, which is the limit of `(1/alpha) ln H_alpha`; callers that take the
/// `1/alpha` root must use it as-is in that case.
pub fn hellinger_integral(nu: &Dist, mu: &Dist, alpha: f64) -> Result<LogValue> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParam(format!("Hellinger order must exceed 1, got {alpha}")));
    }
    check_ac(nu, mu)?;
    if alpha.is_infinite() {
        return Ok(LogValue(log_max_ratio(nu, mu)?));
    }
    // Summing over the support of nu: for alpha > 1 terms with nu = 0 vanish.
    Ok(LogValue(log_power_sum(nu, mu, alpha).max(0.0)))
}

/// `(1/alpha) ln H_alpha`, the log of the `L^alpha(mu)` norm of `dnu/dmu`.
/// Finite for `alpha = inf` as the log ess-sup ratio.
pub fn log_hellinger_root(nu: &Dist, mu: &Dist, alpha: f64) -> Result<f64> {
    let h = hellinger_integral(nu, mu, alpha)?;
    Ok(if alpha.is_infinite() { h.0 } else { h.0 / alpha })
}

/// Kullback-Leibler divergence in nats; `+inf` on an absolute-continuity violation.
pub fn kl_divergence(nu: &Dist, mu: &Dist) -> f64 {
    let mut s = 0.0;
    for (_, ln, lm) in aligned(nu, mu) {
        if ln == f64::NEG_INFINITY {
            continue;
        }
        if lm == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        s += ln.exp() * (ln - lm);
    }
    s.max(0.0)
}

/// Total variation distance.
pub fn total_variation(nu: &Dist, mu: &Dist) -> f64 {
    0.5 * aligned(nu, mu).map(|(_, a, b)| (a.exp() - b.exp()).abs()).sum::<f64>()
}

/// Renyi divergence of order `alpha` in nats.
///
/// `alpha = 1` is the Kullback-Leibler divergence and `alpha = inf` the log
/// of the largest likelihood ratio. A support violation yields `+inf` for
/// `alpha >= 1`.
pub fn renyi_divergence(nu: &Dist, mu: &Dist, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParam(format!("Renyi order must be positive, got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(kl_divergence(nu, mu));
    }
    if alpha > 1.0 && check_ac(nu, mu).is_err() {
        return Ok(f64::INFINITY);
    }
    if alpha.is_infinite() {
        return Ok(log_max_ratio(nu, mu)?.max(0.0));
    }
    let s = log_power_sum(nu, mu, alpha);
    if s == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok((s / (alpha - 1.0)).max(0.0))
}

/// Convex function given by a table of points, linearly interpolated and
/// linearly extrapolated from the end segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiTable {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
}

impl PhiTable {
    pub fn new(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if t.len() != phi.len() || t.len() < 3 {
            return Err(Error::InvalidParam("phi table needs at least 3 matching points".into()));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) || t[0] < 0.0 {
            return Err(Error::InvalidParam("phi table abscissae must be increasing and nonnegative".into()));
        }
        let table = PhiTable { t, phi };
        table.spot_check_convexity()?;
        Ok(table)
    }

    /// Midpoint check at three spans: whole range, left half, right half.
    fn spot_check_convexity(&self) -> Result<()> {
        let lo = self.t[0];
        let hi = *self.t.last().unwrap();
        let mid = 0.5 * (lo + hi);
        for (a, b) in [(lo, hi), (lo, mid), (mid, hi)] {
            let m = self.eval(0.5 * (a + b));
            if m > 0.5 * (self.eval(a) + self.eval(b)) + 1e-12 {
                return Err(Error::InvalidParam("phi table fails the midpoint convexity check".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let k = match self.t.iter().position(|&ti| ti >= x) {
            Some(0) => 1,
            Some(k) => k,
            None => n - 1,
        };
        let (x0, x1) = (self.t[k - 1], self.t[k]);
        let (y0, y1) = (self.phi[k - 1], self.phi[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Which divergence functional to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceKind {
    Kl,
    Tv,
    Chi2,
    /// The Hellinger integral itself (not its log).
    HellingerIntegral(f64),
    Renyi(f64),
    Phi(PhiTable),
}

/// Evaluate a divergence. KL, chi-square and tabulated phi require absolute
/// continuity; TV does not.
pub fn phi_divergence(kind: &DivergenceKind, nu: &Dist, mu: &Dist) -> Result<f64> {
    match kind {
        DivergenceKind::Kl => {
            check_ac(nu, mu)?;
            Ok(kl_divergence(nu, mu))
        }
        DivergenceKind::Tv => Ok(total_variation(nu, mu)),
        DivergenceKind::Chi2 => {
            let h = hellinger_integral(nu, mu, 2.0)?;
            Ok(h.0.exp_m1().max(0.0))
        }
        DivergenceKind::HellingerIntegral(a) => Ok(hellinger_integral(nu, mu, *a)?.exp()),
        DivergenceKind::Renyi(a) => renyi_divergence(nu, mu, *a),
        DivergenceKind::Phi(table) => {
            check_ac(nu, mu)?;
            let mut s = 0.0;
            for (_, ln, lm) in aligned(nu, mu) {
                if lm == f64::NEG_INFINITY {
                    continue;
                }
                s += lm.exp() * table.eval((ln - lm).exp());
            }
            Ok(s)
        }
    }
}
