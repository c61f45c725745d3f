//! Process specifications and the closed-form quantities of the worked settings:
//! binary symmetric chains, the simple symmetric random walk, a binary process
//! that depends on its whole past, and MCMC burn-in.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::engine::{BoundParams, BoundReport, Centering};
use crate::error::{Error, Result};
use crate::kernels::{self, Kernel};
use crate::measures::{self, Dist, LogValue};
use crate::{conjugate, inv};

const LN2: f64 = std::f64::consts::LN_2;

/// Weights of the past-dependent binary process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PRule {
    /// `p_k = 2^(-k-1)`.
    Geometric,
    /// Explicit weights `p_0, p_1, ...`; missing entries are zero.
    Custom(Vec<f64>),
}

impl PRule {
    pub fn p(&self, k: usize) -> f64 {
        match self {
            PRule::Geometric => 0.5f64.powi(k as i32 + 1),
            PRule::Custom(v) => v.get(k).copied().unwrap_or(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PRule::Custom(v) = self {
            if v.is_empty() || v.iter().any(|p| !(*p >= 0.0)) {
                return Err(Error::InvalidParam("weights must be nonnegative and non-empty".into()));
            }
            let s: f64 = v.iter().sum();
            if !(s < 1.0) {
                return Err(Error::InvalidParam(format!("weights sum to {s}, need < 1")));
            }
        }
        Ok(())
    }
}

/// Joint law of `(X_1, ..., X_n)`.
///
/// Sequences shorter than `n` (independent marginals, inhomogeneous kernels)
/// repeat their last entry.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    IndependentProduct { dists: Vec<Dist> },
    HomogeneousChain { init: Dist, kernel: Kernel },
    InhomogeneousChain { init: Dist, kernels: Vec<Kernel> },
    /// `S_i = S_{i-1} + X_i` with Rademacher steps and `S_0 = 0`.
    Ssrw,
    /// `P(X_i = 1 | past) = sum_{k<i} p_k x_k` with `x_0 = 1`, values in `{-1, +1}`.
    NonMarkovBinary { rule: PRule },
}

impl ProcessSpec {
    /// Binary chain on `{0,1}` started uniformly, flipping with probability `lambda`.
    pub fn binary_chain(lambda: f64) -> Result<Self> {
        Ok(ProcessSpec::HomogeneousChain { init: Dist::uniform(vec![0, 1])?, kernel: Kernel::binary_flip(lambda)? })
    }

    /// Independent fair `{0,1}` coins.
    pub fn fair_coins() -> Self {
        ProcessSpec::IndependentProduct { dists: vec![Dist::uniform(vec![0, 1]).unwrap()] }
    }

    pub fn nonmarkov() -> Self {
        ProcessSpec::NonMarkovBinary { rule: PRule::Geometric }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::IndependentProduct { .. } => "independent",
            ProcessSpec::HomogeneousChain { .. } => "homogeneous-chain",
            ProcessSpec::InhomogeneousChain { .. } => "inhomogeneous-chain",
            ProcessSpec::Ssrw => "ssrw",
            ProcessSpec::NonMarkovBinary { .. } => "nonmarkov",
        }
    }

    pub fn is_markov(&self) -> bool {
        !matches!(self, ProcessSpec::NonMarkovBinary { .. })
    }

    /// Law of `X_1`.
    pub fn first(&self) -> Result<Dist> {
        match self {
            ProcessSpec::IndependentProduct { dists } => {
                dists.first().cloned().ok_or_else(|| Error::InvalidParam("no marginals".into()))
            }
            ProcessSpec::HomogeneousChain { init, .. } | ProcessSpec::InhomogeneousChain { init, .. } => {
                Ok(init.clone())
            }
            ProcessSpec::Ssrw => Dist::from_probs(vec![-1, 1], &[0.5, 0.5]),
            ProcessSpec::NonMarkovBinary { rule } => nonmarkov_conditional_rule(rule, &[1]),
        }
    }

    /// Kernel taking `X_i` to `X_{i+1}` (1-based `i`) for chain-like processes.
    pub fn step_kernel(&self, i: usize) -> Result<Kernel> {
        match self {
            ProcessSpec::HomogeneousChain { kernel, .. } => Ok(kernel.clone()),
            ProcessSpec::InhomogeneousChain { kernels, .. } => kernels
                .get((i - 1).min(kernels.len().saturating_sub(1)))
                .cloned()
                .ok_or_else(|| Error::InvalidParam("no kernels".into())),
            ProcessSpec::Ssrw => Ok(Kernel::ssrw()),
            ProcessSpec::IndependentProduct { .. } | ProcessSpec::NonMarkovBinary { .. } => {
                Err(Error::UnsupportedProcess(format!("{} has no one-step kernel", self.name())))
            }
        }
    }

    /// Law of `X_{i+1}` given `X_i = x` for Markov processes (1-based `i`).
    pub fn transition(&self, i: usize, x: i64) -> Result<Dist> {
        match self {
            ProcessSpec::IndependentProduct { dists } => Ok(dists[i.min(dists.len() - 1)].clone()),
            ProcessSpec::NonMarkovBinary { .. } => {
                Err(Error::UnsupportedProcess("the past-dependent process is not Markov".into()))
            }
            _ => self.step_kernel(i)?.row(x),
        }
    }

    /// Law of `X_{k+1}` given `X_1..X_k = prefix` (`k >= 1`).
    pub fn conditional(&self, prefix: &[i64]) -> Result<Dist> {
        let k = prefix.len();
        if k == 0 {
            return self.first();
        }
        match self {
            ProcessSpec::NonMarkovBinary { rule } => {
                let mut full = Vec::with_capacity(k + 1);
                full.push(1);
                full.extend_from_slice(prefix);
                nonmarkov_conditional_rule(rule, &full)
            }
            _ => self.transition(k, prefix[k - 1]),
        }
    }

    /// Exact marginal laws of `X_1..X_n`.
    pub fn marginals(&self, n: usize) -> Result<Vec<Dist>> {
        match self {
            ProcessSpec::IndependentProduct { dists } => {
                if dists.is_empty() {
                    return Err(Error::InvalidParam("no marginals".into()));
                }
                Ok((0..n).map(|i| dists[i.min(dists.len() - 1)].clone()).collect())
            }
            ProcessSpec::HomogeneousChain { .. } | ProcessSpec::InhomogeneousChain { .. } => {
                let mut out = Vec::with_capacity(n);
                let mut cur = self.first()?;
                for i in 1..=n {
                    if i > 1 {
                        cur = kernels::apply_kernel(&cur, &self.step_kernel(i - 1)?)?;
                    }
                    out.push(cur.clone());
                }
                Ok(out)
            }
            ProcessSpec::Ssrw => (1..=n).map(|i| ssrw_marginal(i as u64)).collect(),
            ProcessSpec::NonMarkovBinary { rule } => {
                rule.validate()?;
                // E[X_i] = 2 (p_0 + sum_{1<=k<i} p_k E[X_k]) - 1
                let mut means: Vec<f64> = Vec::with_capacity(n);
                let mut acc = rule.p(0);
                for i in 1..=n {
                    let m = 2.0 * acc - 1.0;
                    means.push(m);
                    acc += rule.p(i) * m;
                }
                means.iter().map(|m| Dist::from_probs(vec![-1, 1], &[(1.0 - m) / 2.0, (1.0 + m) / 2.0])).collect()
            }
        }
    }
}

/// `P(X = 1 | x_0..x_m) = sum p_k x_k` for a prefix that starts with `x_0 = 1`.
pub fn nonmarkov_conditional_rule(rule: &PRule, prefix: &[i64]) -> Result<Dist> {
    if prefix.first() != Some(&1) {
        return Err(Error::InvalidPrefix("prefix must start with x_0 = 1".into()));
    }
    if let Some(v) = prefix.iter().find(|v| **v != 1 && **v != -1) {
        return Err(Error::InvalidPrefix(format!("value {v} is not +1 or -1")));
    }
    let s: f64 = prefix.iter().enumerate().map(|(k, &x)| rule.p(k) * x as f64).sum();
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidPrefix(format!("conditional probability {s} outside (0,1)")));
    }
    Dist::from_probs(vec![-1, 1], &[1.0 - s, s])
}

/// Conditional law of the next value of the past-dependent process with
/// geometric weights; `prefix` includes `x_0 = 1`.
pub fn nonmarkov_conditional(prefix: &[i64]) -> Result<Dist> {
    nonmarkov_conditional_rule(&PRule::Geometric, prefix)
}

/// `log P(S_i = y)`, `-inf` off the support `{i - 2j}`.
pub fn ssrw_log_pmf(i: u64, y: i64) -> f64 {
    let i_s = i as i64;
    if y.abs() > i_s || (i_s - y).rem_euclid(2) != 0 {
        return f64::NEG_INFINITY;
    }
    let j = ((i_s - y) / 2) as u64;
    ln_binomial(i, j) - i as f64 * LN2
}

/// Law of `S_i` on `{-i, -i+2, ..., i}`.
pub fn ssrw_marginal(i: u64) -> Result<Dist> {
    let states: Vec<i64> = (0..=i).map(|j| i as i64 - 2 * j as i64).rev().collect();
    let logw = states.iter().map(|&y| ssrw_log_pmf(i, y)).collect();
    Dist::from_log_weights(states, logw)
}

/// Exact `H_alpha(P_{S_i | S_{i-1} = x} || P_{S_i})`, `i >= 2`.
///
/// Equal to `2^-alpha (P_{S_i}(x+1)^(1-alpha) + P_{S_i}(x-1)^(1-alpha))`. At
/// `alpha = inf` the log of the largest likelihood ratio is returned.
pub fn ssrw_step_hellinger(i: u64, x: i64, alpha: f64) -> Result<LogValue> {
    if i < 2 {
        return Err(Error::InvalidParam("step index must be at least 2".into()));
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidParam(format!("alpha must exceed 1, got {alpha}")));
    }
    if ssrw_log_pmf(i - 1, x) == f64::NEG_INFINITY {
        return Err(Error::OutOfSupport { step: (i - 1) as usize, state: x });
    }
    let lp = ssrw_log_pmf(i, x + 1);
    let lm = ssrw_log_pmf(i, x - 1);
    if alpha.is_infinite() {
        return Ok(LogValue(-LN2 - lp.min(lm)));
    }
    let v = measures::log_add((1.0 - alpha) * lp, (1.0 - alpha) * lm) - alpha * LN2;
    Ok(LogValue(v.max(0.0)))
}

/// Largest per-step value over `x in supp(S_{i-1})`, with the maximizing state.
///
/// The boundary and central states are always evaluated; for `i <= 64` every
/// support point is scanned as well. Ties go to the smallest label.
pub fn ssrw_step_max(i: u64, alpha: f64) -> Result<(LogValue, i64)> {
    let m = (i - 1) as i64;
    let mut cands: Vec<i64> = if i <= 64 {
        (0..=m).map(|j| -m + 2 * j).collect()
    } else {
        vec![-m, if m % 2 == 0 { 0 } else { -1 }, m]
    };
    cands.sort_unstable();
    cands.dedup();
    let mut best = (LogValue(f64::NEG_INFINITY), cands[0]);
    for x in cands {
        let v = ssrw_step_hellinger(i, x, alpha)?;
        if v.0 > best.0 .0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// Smallest per-step value over `x in supp(S_{i-1})`, exhaustive.
pub fn ssrw_step_min(i: u64, alpha: f64) -> Result<(LogValue, i64)> {
    let m = (i - 1) as i64;
    let mut best = (LogValue(f64::INFINITY), -m);
    for j in 0..=m {
        let x = -m + 2 * j;
        let v = ssrw_step_hellinger(i, x, alpha)?;
        if v.0 < best.0 .0 {
            best = (v, x);
        }
    }
    Ok(best)
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Per-step sandwich for `log2 H^(1/alpha)` of the walk at step `i >= 2`:
/// the binary-entropy lower bound and the `i/beta - 1 + 1/alpha` upper bound.
pub fn ssrw_lemma_step_bounds(i: u64, alpha: f64) -> (f64, f64) {
    let beta = conjugate(alpha);
    let fi = i as f64;
    let lower = (-1.0
        + fi * (1.0 - binary_entropy((fi + 1.0) / (2.0 * fi)))
        + 0.5 * (std::f64::consts::FRAC_PI_2 * (fi * fi - 1.0) / fi).log2())
        / beta;
    let upper = fi / beta - 1.0 + inv(alpha);
    (lower, upper)
}

/// Aggregate sandwich `[(n-2)/(4 beta), n(n-1)/(2 beta)]` for `log2 H^(1/alpha)` of the walk.
pub fn ssrw_lemma_bounds(n: usize, alpha: f64) -> (f64, f64) {
    let beta = conjugate(alpha);
    let nf = n as f64;
    ((nf - 2.0) / (4.0 * beta), nf * (nf - 1.0) / (2.0 * beta))
}

/// `ln(2 kappa_alpha)` with `kappa_alpha = ((1-l)^a + l^a)^(1/(a-1))`; `ln(2(1-l))` at infinity.
pub fn log_two_kappa(lambda: f64, alpha: f64) -> f64 {
    let hi = lambda.max(1.0 - lambda);
    if alpha.is_infinite() {
        return (2.0 * hi).ln();
    }
    let lo = 1.0 - hi;
    // ln((1-l)^a + l^a) computed around the larger term.
    let s = alpha * hi.ln() + (lo / hi).powf(alpha).ln_1p();
    LN2 + s / (alpha - 1.0)
}

/// Closed-form bound for the uniform-start binary symmetric chain:
/// `(1/beta) ln 2 - 2 n t^2 / beta + ((n-1)/beta) ln(2 kappa_alpha)`.
pub fn binary_chain_bound(lambda: f64, n: usize, t: f64, alpha: f64) -> Result<BoundReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParam(format!("flip probability {lambda} outside (0,1)")));
    }
    let params = BoundParams::new(n, t, alpha)?;
    let beta = params.beta();
    let root = (n as f64 - 1.0) / beta * log_two_kappa(lambda, alpha);
    let mut r = crate::engine::mcdiarmid_dep_bound_root(&params, root, "binary-closed-form");
    r.aux.insert("log_two_kappa".into(), log_two_kappa(lambda, alpha));
    Ok(r)
}

/// Walk bound around the product-of-marginals mean, with the per-step upper
/// bound `log2 H^(1/alpha) <= n(n-1)/(2 beta)`.
///
/// With `Centering::JointMean` the deviation is first reduced by the mean-gap
/// bound evaluated at the same upper estimate of `H`.
pub fn ssrw_bound(n: usize, t: f64, alpha: f64, centering: Centering) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::InvalidParam("the walk bound needs n >= 2".into()));
    }
    let params = BoundParams::new(n, t, alpha)?;
    let beta = params.beta();
    let nf = n as f64;
    let root = nf * (nf - 1.0) * LN2 / (2.0 * beta);
    match centering {
        Centering::ProductMean => Ok(crate::engine::mcdiarmid_dep_bound_root(&params, root, "ssrw-closed-form")),
        Centering::JointMean => {
            let gap = crate::engine::mean_gap_from_root(&params, root);
            let shifted = BoundParams { t: (t - gap).max(0.0), ..params.clone() };
            let mut r = crate::engine::mcdiarmid_dep_bound_root(&shifted, root, "ssrw-closed-form");
            r.params = params.record();
            r.threshold_t += gap;
            r.centering = Centering::JointMean;
            r.aux.insert("mean_gap".into(), gap);
            r.notes.push("deviation reduced by the joint-vs-product mean gap bound".into());
            Ok(r)
        }
        other => Err(Error::Unsupported(format!("walk bound has no {other:?} centering"))),
    }
}

/// Bound for the past-dependent process: `(1/beta) ln 2 - 2 n t^2 / beta + (n-1) ln 2`.
/// Without a fixed `beta` the bound is minimized over the alpha grid.
pub fn nonmarkov_bound(n: usize, t: f64, beta: Option<f64>) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::InvalidParam("the bound needs n >= 2".into()));
    }
    let eval = |alpha: f64| -> Result<BoundReport> {
        let params = BoundParams::new(n, t, alpha)?;
        let root = (n as f64 - 1.0) * LN2;
        Ok(crate::engine::mcdiarmid_dep_bound_root(&params, root, "nonmarkov-closed-form"))
    };
    match beta {
        Some(b) => {
            if !(b >= 1.0) {
                return Err(Error::InvalidParam(format!("beta must be at least 1, got {b}")));
            }
            let alpha = if b == 1.0 { f64::INFINITY } else { b / (b - 1.0) };
            eval(alpha)
        }
        None => {
            let mut best: Option<BoundReport> = None;
            for a in crate::engine::alpha_grid() {
                let r = eval(a)?;
                if best.as_ref().is_none_or(|b| r.log_bound < b.log_bound) {
                    best = Some(r);
                }
            }
            let mut r = best.unwrap();
            r.notes.push("minimized over the alpha grid".into());
            Ok(r)
        }
    }
}

/// MCMC comparison: this method's bound and the spectral-gap baseline, both
/// for the one-sided deviation of the empirical mean of `f: X -> [a, b]`.
#[derive(Debug, Clone, Serialize)]
pub struct McmcReport {
    pub ours: BoundReport,
    pub fan: BoundReport,
    /// `(1/alpha) ln H_alpha(nu K^n0 || pi)`.
    pub log_c: f64,
    /// `max_x (1/alpha) ln H_alpha(K(.|x) || pi)`.
    pub step_term: f64,
    pub lambda_r: f64,
    /// Squared deviation above which this method's exponent is better, using `step_term`.
    pub threshold_t2: f64,
    /// Same threshold with `ln(1/min pi)` in place of `step_term`.
    pub threshold_t2_min_pi: f64,
}

fn mcmc_parts(nu: &Dist, k: &Kernel, n0: u32, alpha: f64) -> Result<(Dist, f64, f64)> {
    let pi = kernels::stationary_dist(k)?;
    let start = kernels::apply_kernel(nu, &kernels::k_step(k, n0)?)?;
    let log_c = measures::log_hellinger_root(&start, &pi, alpha)?;
    let m = k.as_matrix()?;
    let mut step = f64::NEG_INFINITY;
    for &x in &m.states {
        if pi.log_prob(x) == f64::NEG_INFINITY {
            continue;
        }
        step = step.max(measures::log_hellinger_root(&k.row(x)?, &pi, alpha)?);
    }
    Ok((pi, log_c, step))
}

pub fn mcmc_bound(
    nu: &Dist,
    k: &Kernel,
    n0: u32,
    n: usize,
    t: f64,
    alpha: f64,
    range: (f64, f64),
) -> Result<McmcReport> {
    let (a, b) = range;
    if !(b > a) {
        return Err(Error::InvalidParam("range must satisfy a < b".into()));
    }
    let params = BoundParams::new(n, t, alpha)?;
    let beta = params.beta();
    let d2 = (b - a) * (b - a);
    let (pi, log_c, step) = mcmc_parts(nu, k, n0, alpha)?;
    let spec = kernels::spectral(k)?;
    let lr = spec.second_eigenvalue;
    let lp = lr.max(0.0);
    let nf = n as f64;
    let exponent = 2.0 * nf * t * t / d2;

    let ours_log = -exponent / beta + log_c + (nf - 1.0) * step;
    let rho = (1.0 - lp) / (1.0 + lp);
    let fan_log = log_c - rho * exponent / beta;
    let thr = |s: f64| {
        if lr > 0.0 {
            (1.0 - 1.0 / nf) * (d2 / 2.0) * ((1.0 + lr) / (2.0 * lr)) * beta * s
        } else {
            f64::INFINITY
        }
    };
    let threshold_t2 = thr(step);
    let threshold_t2_min_pi = thr(-pi.min_log_prob());
    let mut ours = BoundReport::new("mcmc-ours", ours_log, &params, threshold_t2.sqrt(), Centering::StationaryMean);
    ours.aux.insert("n0".into(), n0 as f64);
    ours.aux.insert("log_c".into(), log_c);
    ours.aux.insert("step_term".into(), step);
    let mut fan = BoundReport::new("mcmc-fan", fan_log, &params, threshold_t2.sqrt(), Centering::StationaryMean);
    fan.aux.insert("lambda_r".into(), lr);
    fan.notes.push("constant C taken as the exact L^alpha(pi) norm of the burn-in density".into());
    if !spec.reversible {
        fan.notes.push("kernel is not reversible; lambda_r is a singular-value surrogate".into());
    }
    Ok(McmcReport { ours, fan, log_c, step_term: step, lambda_r: lr, threshold_t2, threshold_t2_min_pi })
}

/// Smallest burn-in `n0` such that the bound's log value is at most `target`.
///
/// The bound is nonincreasing in `n0` because `nu K^n0` approaches `pi`; the
/// search doubles until the target is met and then bisects.
pub fn min_burnin(nu: &Dist, k: &Kernel, n: usize, t: f64, alpha: f64, target: f64) -> Result<u32> {
    let eval = |n0: u32| -> Result<f64> { Ok(mcmc_bound(nu, k, n0, n, t, alpha, (0.0, 1.0))?.ours.log_bound) };
    let spec = kernels::spectral(k)?;
    if !(spec.absolute_gap > 0.0) {
        return Err(Error::InvalidParam("burn-in search needs a positive spectral gap".into()));
    }
    let (_, _, step) = mcmc_parts(nu, k, 0, alpha)?;
    let params = BoundParams::new(n, t, alpha)?;
    let floor = -2.0 * n as f64 * t * t / params.beta() + (n as f64 - 1.0) * step;
    if eval(0)? <= target {
        return Ok(0);
    }
    if floor >= target {
        return Err(Error::Unreachable { target, floor });
    }
    let mut hi: u32 = 1;
    while eval(hi)? > target {
        if hi >= 1 << 30 {
            return Err(Error::Unreachable { target, floor });
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_step_value() {
        assert!((ssrw_step_hellinger(2, 1, 2.0).unwrap().exp() - 1.5).abs() < 1e-14);
        assert!(matches!(ssrw_step_hellinger(3, 1, 2.0), Err(Error::OutOfSupport { .. })));
        let near_one = ssrw_step_hellinger(5, 0, 1.0 + 1e-9).unwrap();
        assert!(near_one.0.abs() < 1e-6);
    }

    #[test]
    fn walk_pmf_matches_path_count() {
        let mut counts = vec![1u64];
        for i in 1..=30u64 {
            let mut next = vec![0u64; counts.len() + 1];
            for (j, c) in counts.iter().enumerate() {
                next[j] += c;
                next[j + 1] += c;
            }
            counts = next;
            for (j, c) in counts.iter().enumerate() {
                let y = i as i64 - 2 * j as i64;
                let p = *c as f64 / 2f64.powi(i as i32);
                assert!((ssrw_log_pmf(i, y).exp() - p).abs() <= 1e-13 * p.max(1e-300), "i {i} y {y}");
            }
        }
    }

    #[test]
    fn walk_step_max_sits_on_boundary() {
        for i in 2..=40 {
            let (v, x) = ssrw_step_max(i, 2.0).unwrap();
            let b = ssrw_step_hellinger(i, -(i as i64 - 1), 2.0).unwrap();
            assert!((v.0 - b.0).abs() < 1e-12, "i {i}, argmax {x}");
        }
    }

    #[test]
    fn nonmarkov_conditionals() {
        let d = nonmarkov_conditional(&[1]).unwrap();
        assert!((d.prob(1) - 0.5).abs() < 1e-15);
        let d = nonmarkov_conditional(&[1, 1, 1]).unwrap();
        assert!((d.prob(1) - 0.875).abs() < 1e-15);
        assert!(nonmarkov_conditional(&[-1]).is_err());
        assert!(nonmarkov_conditional(&[1, 0]).is_err());
    }

    #[test]
    fn nonmarkov_marginals_are_uniform() {
        for m in ProcessSpec::nonmarkov().marginals(12).unwrap() {
            assert!((m.prob(1) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn kappa_at_half_is_neutral() {
        for a in [1.5, 2.0, 5.0, f64::INFINITY] {
            assert!(log_two_kappa(0.5, a).abs() < 1e-14);
        }
        assert!((log_two_kappa(0.25, f64::INFINITY) - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn walk_bound_at_sqrt_n() {
        let n = 100usize;
        let r = ssrw_bound(n, (n as f64).sqrt(), f64::INFINITY, Centering::ProductMean).unwrap();
        let nf = n as f64;
        let want = -(nf * nf) * (2.0 - LN2 / 2.0 + LN2 / (2.0 * nf)) + LN2;
        assert!((r.log_bound - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn walk_threshold_is_zero_exponent() {
        let n = 50;
        let t = ((n as f64 - 1.0) * LN2).sqrt() / 2.0;
        let r = ssrw_bound(n, t, 2.0, Centering::ProductMean).unwrap();
        assert!((r.threshold_t - t).abs() < 1e-12);
        assert!(r.trivial);
    }

    #[test]
    fn nonmarkov_bound_at_threshold_is_trivial() {
        let (n, beta) = (40usize, 1.5);
        let t = (beta * LN2 / 2.0 * (n as f64 - 1.0) / n as f64).sqrt();
        let r = nonmarkov_bound(n, t, Some(beta)).unwrap();
        assert!((r.log_bound - LN2 / beta).abs() < 1e-10);
        assert!(r.trivial);
    }

    #[test]
    fn mcmc_at_stationarity_has_unit_constant() {
        let k = Kernel::binary_flip(0.3).unwrap();
        let pi = Dist::uniform(vec![0, 1]).unwrap();
        let r = mcmc_bound(&pi, &k, 3, 100, 0.2, 2.0, (0.0, 1.0)).unwrap();
        assert!(r.log_c.abs() < 1e-14);
        assert_eq!(min_burnin(&pi, &k, 100, 0.5, 2.0, 0.0).unwrap(), 0);
    }
}
