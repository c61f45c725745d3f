//! Tensorisation bounds for the Hellinger integral between the joint law of a
//! process and the product of its marginals, plus the brute-force oracle.
//!
//! Every function here returns `ln H_alpha` for finite `alpha`. For
//! `alpha = inf` it returns the log of the largest joint-to-product likelihood
//! ratio, which is the limit of `(1/alpha) ln H_alpha`.

use std::collections::HashMap;

use serde::Serialize;

use crate::conjugate;
use crate::error::{Error, Result};
use crate::measures::{self, Dist, LogAcc, LogValue};
use crate::scenarios::{self, ProcessSpec};

/// Largest number of paths (or prefixes) any enumeration will visit.
pub const PATH_LIMIT: u64 = 1 << 22;

/// One Hoelder exponent `alpha_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum HolderExp {
    /// The limit `alpha_i -> 1` (from above for upper bounds, from below for lower bounds).
    Limit,
    Finite(f64),
}

/// Exponents `alpha_1, ..., alpha_{n-1}`; `alpha_n = 1` and `beta_0 = 1` are implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderSchedule {
    pub exps: Vec<HolderExp>,
}

impl HolderSchedule {
    pub fn limit(n: usize) -> Self {
        HolderSchedule { exps: vec![HolderExp::Limit; n.saturating_sub(1)] }
    }

    /// `alpha_i = 1 + 2^-i`, for upper bounds.
    pub fn geometric(n: usize) -> Self {
        HolderSchedule { exps: (1..n).map(|i| HolderExp::Finite(1.0 + 0.5f64.powi(i as i32))).collect() }
    }

    /// `alpha_i = 1 - 2^-(i+1)`, for lower bounds.
    pub fn geometric_lower(n: usize) -> Self {
        HolderSchedule { exps: (1..n).map(|i| HolderExp::Finite(1.0 - 0.5f64.powi(i as i32 + 1))).collect() }
    }

    pub fn custom(alphas: Vec<f64>) -> Self {
        HolderSchedule { exps: alphas.into_iter().map(HolderExp::Finite).collect() }
    }

    fn check(&self, n: usize, alpha: f64, upper: bool) -> Result<()> {
        if self.exps.len() != n.saturating_sub(1) {
            return Err(Error::ScheduleInvalid(format!(
                "need {} exponents for n = {n}, got {}",
                n.saturating_sub(1),
                self.exps.len()
            )));
        }
        for (i, e) in self.exps.iter().enumerate() {
            if let HolderExp::Finite(a) = e {
                if alpha.is_infinite() {
                    return Err(Error::ScheduleInvalid("finite exponents need a finite alpha".into()));
                }
                let ok = if upper { *a > 1.0 && a.is_finite() } else { *a > 0.0 && *a < 1.0 };
                if !ok {
                    return Err(Error::ScheduleInvalid(format!(
                        "alpha_{} = {a} outside {}",
                        i + 1,
                        if upper { "(1, inf)" } else { "(0, 1)" }
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParam(format!("alpha must exceed 1, got {alpha}")));
    }
    Ok(())
}

/// Number of positive-probability paths of length `n`.
pub fn path_count(proc: &ProcessSpec, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    match proc {
        ProcessSpec::Ssrw | ProcessSpec::NonMarkovBinary { .. } => Ok(2f64.powi(n as i32)),
        ProcessSpec::IndependentProduct { .. } => {
            Ok(proc.marginals(n)?.iter().map(|m| m.support().len() as f64).product())
        }
        ProcessSpec::HomogeneousChain { .. } | ProcessSpec::InhomogeneousChain { .. } => {
            // Paths ending in each state, pushed forward through the positive transitions.
            let mut counts: HashMap<i64, f64> = proc.first()?.support().into_iter().map(|s| (s, 1.0)).collect();
            for i in 1..n {
                let mut next: HashMap<i64, f64> = HashMap::new();
                for (&x, &c) in &counts {
                    for y in proc.transition(i, x)?.support() {
                        *next.entry(y).or_insert(0.0) += c;
                    }
                }
                counts = next;
            }
            Ok(counts.values().sum())
        }
    }
}

fn guard(count: f64) -> Result<()> {
    if count > PATH_LIMIT as f64 {
        return Err(Error::TooLarge { count, limit: PATH_LIMIT });
    }
    Ok(())
}

/// Visit every positive-probability path `x_1..x_n` with its log joint probability.
pub fn for_each_path(proc: &ProcessSpec, n: usize, mut visit: impl FnMut(&[i64], f64)) -> Result<()> {
    guard(path_count(proc, n)?)?;
    let mut cache: HashMap<(usize, i64), Dist> = HashMap::new();
    let mut prefix = Vec::with_capacity(n);
    walk(proc, n, &mut prefix, 0.0, &mut cache, &mut visit)
}

fn next_law(proc: &ProcessSpec, prefix: &[i64], cache: &mut HashMap<(usize, i64), Dist>) -> Result<Dist> {
    if prefix.is_empty() || !proc.is_markov() {
        return proc.conditional(prefix);
    }
    let key = (prefix.len(), *prefix.last().unwrap());
    if let Some(d) = cache.get(&key) {
        return Ok(d.clone());
    }
    let d = proc.conditional(prefix)?;
    cache.insert(key, d.clone());
    Ok(d)
}

fn walk(
    proc: &ProcessSpec,
    n: usize,
    prefix: &mut Vec<i64>,
    lq: f64,
    cache: &mut HashMap<(usize, i64), Dist>,
    visit: &mut impl FnMut(&[i64], f64),
) -> Result<()> {
    if prefix.len() == n {
        visit(prefix, lq);
        return Ok(());
    }
    let law = next_law(proc, prefix, cache)?;
    for (s, l) in law.iter() {
        if l == f64::NEG_INFINITY {
            continue;
        }
        prefix.push(s);
        walk(proc, n, prefix, lq + l, cache, visit)?;
        prefix.pop();
    }
    Ok(())
}

/// Exact `ln H_alpha(P_{X^n} || P_{X_1} x ... x P_{X_n})` by path enumeration.
pub fn exact_joint_hellinger(proc: &ProcessSpec, n: usize, alpha: f64) -> Result<LogValue> {
    check_alpha(alpha)?;
    let margs = proc.marginals(n)?;
    let mut acc = LogAcc::default();
    let mut best = f64::NEG_INFINITY;
    for_each_path(proc, n, |path, lq| {
        let lp: f64 = path.iter().zip(&margs).map(|(x, m)| m.log_prob(*x)).sum();
        if alpha.is_infinite() {
            best = best.max(lq - lp);
        } else {
            acc.push(alpha * lq + (1.0 - alpha) * lp);
        }
    })?;
    Ok(LogValue(if alpha.is_infinite() { best.max(0.0) } else { acc.value().max(0.0) }))
}

/// `ln H_a(q || p)` for any order `a > 0`; the log of the largest ratio at `a = inf`.
fn log_h_any(q: &Dist, p: &Dist, a: f64) -> Result<f64> {
    if a.is_infinite() {
        return measures::log_max_ratio(q, p);
    }
    if a == 1.0 {
        return Ok(0.0);
    }
    if a > 1.0 {
        return Ok(measures::hellinger_integral(q, p, a)?.0);
    }
    Ok(measures::log_power_sum(q, p, a))
}

/// Per-step values `ln H` of the conditional law from each conditioning state.
struct StepTable {
    /// `(state, log P_{i-1}(state), value)` for states in `supp(P_{i-1})`.
    rows: Vec<(i64, f64, f64)>,
}

fn markov_step(proc: &ProcessSpec, margs: &[Dist], i: usize, order: f64) -> Result<StepTable> {
    // Step i >= 2 conditions on X_{i-1}; margs is 0-based.
    let prev = &margs[i - 2];
    let cur = &margs[i - 1];
    let mut rows = Vec::new();
    for (x, lp) in prev.iter() {
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let q = proc.transition(i - 1, x)?;
        rows.push((x, lp, log_h_any(&q, cur, order)?));
    }
    Ok(StepTable { rows })
}

/// `ln || g ||_{L^b(P)}` with `ln g` given per state; `b = +inf` is the max and
/// `b = -inf` the min, ties to the smallest label.
fn log_norm(rows: &[(i64, f64, f64)], scale: f64, b: f64) -> (f64, i64) {
    if b == f64::INFINITY || b == f64::NEG_INFINITY {
        let mut best = (rows[0].2 * scale, rows[0].0);
        for &(x, _, v) in &rows[1..] {
            let v = v * scale;
            if (b > 0.0 && v > best.0) || (b < 0.0 && v < best.0) {
                best = (v, x);
            }
        }
        return best;
    }
    let terms: Vec<f64> = rows.iter().map(|&(_, lp, v)| lp + b * v * scale).collect();
    (measures::logsumexp(&terms) / b, rows[0].0)
}

/// Upper and lower bound results with the extremal conditioning states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorBound {
    pub value: LogValue,
    /// Extremal conditioning state per step `i = 2..n` (limit exponents only).
    pub states: Vec<i64>,
}

fn tensor_markov(
    proc: &ProcessSpec,
    n: usize,
    alpha: f64,
    schedule: &HolderSchedule,
    upper: bool,
) -> Result<TensorBound> {
    check_alpha(alpha)?;
    if !proc.is_markov() {
        return Err(Error::UnsupportedProcess("Markov tensorisation needs a Markov process".into()));
    }
    schedule.check(n, alpha, upper)?;
    let margs = proc.marginals(n)?;
    let mut total = 0.0;
    let mut states = Vec::new();
    let exp_at = |i: usize| -> HolderExp {
        // alpha_i for 1 <= i <= n-1; alpha_n = 1.
        if i >= n {
            HolderExp::Finite(1.0)
        } else {
            schedule.exps[i - 1]
        }
    };
    for i in 2..=n {
        let (order, scale) = match exp_at(i) {
            HolderExp::Limit => (alpha, 1.0),
            HolderExp::Finite(a) => (alpha * a, 1.0 / a),
        };
        let b = match exp_at(i - 1) {
            HolderExp::Limit => {
                if upper {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            HolderExp::Finite(a) => conjugate(a),
        };
        let (v, x) = if matches!(proc, ProcessSpec::Ssrw) && b.is_infinite() && scale == 1.0 {
            // Walk steps have a closed form; skips building the O(i^2) table.
            let (v, x) = if upper { scenarios::ssrw_step_max(i as u64, order)? } else { scenarios::ssrw_step_min(i as u64, order)? };
            (v.0, x)
        } else {
            let table = markov_step(proc, &margs, i, order)?;
            log_norm(&table.rows, scale, b)
        };
        total += v;
        states.push(x);
    }
    Ok(TensorBound { value: LogValue(total), states })
}

/// Markov tensorisation upper bound on `ln H_alpha` under a Hoelder schedule.
/// With the limit schedule it is the sum of per-step maxima over the conditioning state.
pub fn tensor_upper_markov(proc: &ProcessSpec, n: usize, alpha: f64, schedule: &HolderSchedule) -> Result<LogValue> {
    Ok(tensor_markov(proc, n, alpha, schedule, true)?.value)
}

pub fn tensor_upper_markov_detailed(
    proc: &ProcessSpec,
    n: usize,
    alpha: f64,
    schedule: &HolderSchedule,
) -> Result<TensorBound> {
    tensor_markov(proc, n, alpha, schedule, true)
}

/// Reverse-Hoelder lower bound; exponents must lie in `(0, 1)`. With the limit
/// schedule it is the sum of per-step minima over the conditioning state.
pub fn tensor_lower_markov(proc: &ProcessSpec, n: usize, alpha: f64, schedule: &HolderSchedule) -> Result<LogValue> {
    Ok(tensor_markov(proc, n, alpha, schedule, false)?.value)
}

pub fn tensor_lower_markov_detailed(
    proc: &ProcessSpec,
    n: usize,
    alpha: f64,
    schedule: &HolderSchedule,
) -> Result<TensorBound> {
    tensor_markov(proc, n, alpha, schedule, false)
}

/// Visit every positive-probability prefix of length `len` with the conditional law that follows it.
fn for_each_prefix(
    proc: &ProcessSpec,
    len: usize,
    mut visit: impl FnMut(&[i64], &Dist) -> Result<()>,
) -> Result<()> {
    guard(path_count(proc, len)?)?;
    let mut err = None;
    let mut prefixes = Vec::new();
    if len == 0 {
        prefixes.push(Vec::new());
    } else {
        for_each_path(proc, len, |p, _| prefixes.push(p.to_vec()))?;
    }
    for p in prefixes {
        let law = proc.conditional(&p)?;
        if let Err(e) = visit(&p, &law) {
            err = Some(e);
            break;
        }
    }
    err.map_or(Ok(()), Err)
}

fn tensor_general(proc: &ProcessSpec, n: usize, alpha: f64, upper: bool) -> Result<TensorBound> {
    check_alpha(alpha)?;
    // The longest prefixes dominate the work; refuse before enumerating the shorter ones.
    guard(path_count(proc, n.saturating_sub(1))?)?;
    let margs = proc.marginals(n)?;
    let mut total = 0.0;
    let mut states = Vec::new();
    for i in 2..=n {
        let cur = &margs[i - 1];
        let mut best: Option<(f64, i64)> = None;
        for_each_prefix(proc, i - 1, |p, law| {
            let v = log_h_any(law, cur, alpha)?;
            let better = match best {
                None => true,
                Some((b, _)) => (upper && v > b) || (!upper && v < b),
            };
            if better {
                best = Some((v, *p.last().unwrap()));
            }
            Ok(())
        })?;
        let (v, x) = best.ok_or_else(|| Error::InvalidParam("no reachable prefix".into()))?;
        total += v;
        states.push(x);
    }
    Ok(TensorBound { value: LogValue(total), states })
}

/// Upper bound valid for any process: per-step maxima over whole history prefixes.
pub fn tensor_upper_general(proc: &ProcessSpec, n: usize, alpha: f64) -> Result<LogValue> {
    Ok(tensor_general(proc, n, alpha, true)?.value)
}

/// Lower bound valid for any process: per-step minima over whole history prefixes.
pub fn tensor_lower_general(proc: &ProcessSpec, n: usize, alpha: f64) -> Result<LogValue> {
    Ok(tensor_general(proc, n, alpha, false)?.value)
}

/// Renyi-form tensorisation sum. Computed from Renyi divergences rather than
/// Hellinger integrals; equals `ln(upper) / (alpha - 1)` for finite `alpha`.
pub fn renyi_tensor_sum(proc: &ProcessSpec, n: usize, alpha: f64, schedule: &HolderSchedule) -> Result<f64> {
    check_alpha(alpha)?;
    schedule.check(n, alpha, true)?;
    let margs = proc.marginals(n)?;
    let exp_at = |i: usize| if i >= n { HolderExp::Finite(1.0) } else { schedule.exps[i - 1] };
    let mut total = 0.0;
    for i in 2..=n {
        let a_i = match exp_at(i) {
            HolderExp::Limit => 1.0,
            HolderExp::Finite(a) => a,
        };
        let order = alpha * a_i;
        let prev = &margs[i - 2];
        let cur = &margs[i - 1];
        // ln g(x) = ((order - 1)/a_i) D_order(Q_i(.|x) || P_i)
        let mut rows = Vec::new();
        for (x, lp) in prev.iter() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let d = measures::renyi_divergence(&proc.transition(i - 1, x)?, cur, order)?;
            let lg = if alpha.is_infinite() { d } else { (order - 1.0) / a_i * d };
            rows.push((lp, lg));
        }
        let term = match exp_at(i - 1) {
            HolderExp::Limit => rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
            HolderExp::Finite(a) => {
                let b = conjugate(a);
                let terms: Vec<f64> = rows.iter().map(|&(lp, lg)| lp + b * lg).collect();
                measures::logsumexp(&terms) / b
            }
        };
        total += if alpha.is_infinite() { term } else { term / (alpha - 1.0) };
    }
    Ok(total)
}

/// Exact value and limit-schedule bounds side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    #[serde(serialize_with = "crate::report::num")]
    pub alpha: f64,
    /// `ln H_alpha` of the joint law against the product of marginals.
    #[serde(serialize_with = "crate::report::num")]
    pub exact: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub lower: f64,
    #[serde(serialize_with = "crate::report::num")]
    pub upper: f64,
    pub argmax_states: Vec<i64>,
    pub argmin_states: Vec<i64>,
}

pub fn oracle_report(proc: &ProcessSpec, n: usize, alpha: f64) -> Result<OracleReport> {
    let exact = exact_joint_hellinger(proc, n, alpha)?.0;
    let (up, lo) = if proc.is_markov() {
        let s = HolderSchedule::limit(n);
        (tensor_markov(proc, n, alpha, &s, true)?, tensor_markov(proc, n, alpha, &s, false)?)
    } else {
        (tensor_general(proc, n, alpha, true)?, tensor_general(proc, n, alpha, false)?)
    };
    Ok(OracleReport {
        n,
        alpha,
        exact,
        lower: lo.value.0,
        upper: up.value.0,
        argmax_states: up.states,
        argmin_states: lo.states,
    })
}
