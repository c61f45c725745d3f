//! McDiarmid-type bounds for dependent processes.
//!
//! For `f` with bounded differences `c_i` and `E = {|f - E_prod f| >= t}`:
//!
//! `ln P(E) <= (1/beta) ln 2 - 2 t^2 / (beta sum c_i^2) + (1/alpha) ln H_alpha`
//!
//! where `H_alpha` compares the joint law with the product of its marginals.
//! The last term is called the root below; at `alpha = inf` it is the log of
//! the largest likelihood ratio and `beta = 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, Kernel};
use crate::measures::{Dist, LogValue};
use crate::scenarios::ProcessSpec;
use crate::tensorize::{self, HolderSchedule};
use crate::{conjugate, report};

const LN2: f64 = std::f64::consts::LN_2;

/// Deviation `t`, bounded-difference constants `c` and Renyi order `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub t: f64,
    pub c: Vec<f64>,
    pub alpha: f64,
}

impl BoundParams {
    /// Parameters with the empirical-mean constants `c_i = 1/n`.
    pub fn new(n: usize, t: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("n must be positive".into()));
        }
        let p = BoundParams { n, t, c: vec![1.0 / n as f64; n], alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn with_c(mut self, c: Vec<f64>) -> Result<Self> {
        self.c = c;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParam(format!("t must be finite and nonnegative, got {}", self.t)));
        }
        if !(self.alpha > 1.0) {
            return Err(Error::InvalidParam(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if self.c.len() != self.n {
            return Err(Error::InvalidParam(format!("need {} constants c_i, got {}", self.n, self.c.len())));
        }
        if self.c.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) || !(self.sum_c2() > 0.0) {
            return Err(Error::InvalidParam("constants c_i must be nonnegative with a positive sum of squares".into()));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        conjugate(self.alpha)
    }

    pub fn sum_c2(&self) -> f64 {
        self.c.iter().map(|c| c * c).sum()
    }

    pub fn record(&self) -> ParamsRecord {
        ParamsRecord { n: self.n, t: self.t, alpha: self.alpha, beta: self.beta(), sum_c2: self.sum_c2() }
    }
}

/// Serialized summary of [`BoundParams`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsRecord {
    pub n: usize,
    #[serde(serialize_with = "report::num")]
    pub t: f64,
    #[serde(serialize_with = "report::num")]
    pub alpha: f64,
    #[serde(serialize_with = "report::num")]
    pub beta: f64,
    #[serde(serialize_with = "report::num")]
    pub sum_c2: f64,
}

/// What the deviation is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    ProductMean,
    JointMean,
    StationaryMean,
    Median,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub method: String,
    /// Natural log of the probability bound.
    #[serde(serialize_with = "report::num")]
    pub log_bound: f64,
    #[serde(serialize_with = "report::num")]
    pub log2_bound: f64,
    pub params: ParamsRecord,
    /// Deviation above which the exponent is negative.
    #[serde(serialize_with = "report::num")]
    pub threshold_t: f64,
    /// Set when the bound is at least one.
    pub trivial: bool,
    pub centering: Centering,
    #[serde(serialize_with = "report::num_map")]
    pub aux: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(method: &str, log_bound: f64, params: &BoundParams, threshold_t: f64, centering: Centering) -> Self {
        BoundReport {
            method: method.to_string(),
            log_bound,
            log2_bound: log_bound / LN2,
            params: params.record(),
            threshold_t,
            trivial: !(log_bound < 0.0),
            centering,
            aux: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn set_log_bound(&mut self, log_bound: f64) {
        self.log_bound = log_bound;
        self.log2_bound = log_bound / LN2;
        self.trivial = !(log_bound < 0.0);
    }
}

/// `(1/alpha) ln H`, or `ln H` itself at `alpha = inf` where the oracles
/// already return the log of the largest likelihood ratio.
pub fn root_of(log_h: LogValue, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        log_h.0
    } else {
        log_h.0 / alpha
    }
}

/// Change-of-measure bound for any event: `(1/beta) ln p + (1/alpha) ln H`.
pub fn general_event_bound(log_p_indep: LogValue, log_h: LogValue, alpha: f64) -> LogValue {
    let root = root_of(log_h, alpha);
    if root == f64::INFINITY {
        return LogValue::INFINITY;
    }
    LogValue(log_p_indep.0 / conjugate(alpha) + root)
}

/// Deviation where `-2 t^2/(beta sum c^2) + root` changes sign.
pub fn threshold_from_root(params: &BoundParams, root: f64) -> f64 {
    if root <= 0.0 {
        return 0.0;
    }
    (params.beta() * params.sum_c2() * root / 2.0).sqrt()
}

pub fn threshold_t(params: &BoundParams, log_h: LogValue) -> f64 {
    threshold_from_root(params, root_of(log_h, params.alpha))
}

/// Exponent without the `(1/beta) ln 2` prefactor.
pub fn exponent(params: &BoundParams, root: f64) -> f64 {
    -2.0 * params.t * params.t / (params.beta() * params.sum_c2()) + root
}

pub fn mcdiarmid_dep_bound_root(params: &BoundParams, root: f64, method: &str) -> BoundReport {
    let beta = params.beta();
    let log = LN2 / beta + exponent(params, root);
    let mut r = BoundReport::new(method, log, params, threshold_from_root(params, root), Centering::ProductMean);
    r.aux.insert("root".into(), root);
    r
}

pub fn mcdiarmid_dep_bound(params: &BoundParams, log_h: LogValue) -> BoundReport {
    let mut r = mcdiarmid_dep_bound_root(params, root_of(log_h, params.alpha), "dependent-mcdiarmid");
    r.aux.insert("log_h".into(), log_h.0);
    r
}

/// How the hypercontractive exponent is chosen per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaChoice {
    /// `gamma = alpha`: plain contraction.
    Contractive,
    /// Closed form for binary symmetric kernels, bisection otherwise.
    Star,
    /// Always bisect on `gamma`.
    Bisection,
    Fixed(f64),
}

/// How the Renyi contraction coefficient is chosen per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaChoice {
    /// Largest point-mass ratio, computed per step.
    DeltaRatio,
    /// Closed-form upper bound for binary symmetric kernels.
    DsbsClosedForm,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Exact enumerated `H`.
    Exact,
    /// Per-step maxima of conditional Hellinger integrals.
    Tensor,
    /// Backward-channel norms and minimal marginal masses.
    Hyper(GammaChoice),
    /// Renyi contraction of point masses.
    Sdpi(EtaChoice),
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::Tensor => "tensor",
            Route::Hyper(_) => "hyper",
            Route::Sdpi(_) => "sdpi",
        }
    }
}

fn matrix_step(proc: &ProcessSpec, i: usize) -> Result<Kernel> {
    let k = proc.step_kernel(i)?;
    if k.as_matrix().is_err() {
        return Err(Error::UnsupportedProcess(format!("{} has no finite kernel", proc.name())));
    }
    Ok(k)
}

fn zero_marginal(step: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::ZeroMassState { state } => Error::ZeroMarginal { step, state },
        other => other,
    }
}

/// Kernel-state mass check: a zero-mass state makes `min log P` infinite.
fn check_full_support(m: &Dist, k: &Kernel, step: usize) -> Result<()> {
    for &s in &k.as_matrix()?.states {
        if m.log_prob(s) == f64::NEG_INFINITY {
            return Err(Error::ZeroMarginal { step, state: s });
        }
    }
    Ok(())
}

fn gamma_for(k: &Kernel, back: &Kernel, p: &Dist, out: &Dist, alpha: f64, choice: GammaChoice) -> Result<f64> {
    if alpha.is_infinite() {
        return Ok(f64::INFINITY);
    }
    match choice {
        GammaChoice::Contractive => Ok(alpha),
        GammaChoice::Fixed(g) => {
            if !(g >= 1.0) || g > alpha {
                return Err(Error::InvalidParam(format!("gamma {g} outside [1, alpha]")));
            }
            Ok(g)
        }
        // The closed form holds for the binary symmetric kernel under the uniform law only.
        GammaChoice::Star => match kernels::spectral(k)?.gamma_star(alpha) {
            Some(g) if p.probs().iter().all(|q| (q - 0.5).abs() < 1e-12) => Ok(g),
            _ => kernels::hypercontractive_gamma(back, out, alpha, 1e-4),
        },
        GammaChoice::Bisection => kernels::hypercontractive_gamma(back, out, alpha, 1e-4),
    }
}

fn hyper_root(proc: &ProcessSpec, n: usize, alpha: f64, choice: GammaChoice, r: &mut BTreeMap<String, f64>) -> Result<f64> {
    let margs = proc.marginals(n)?;
    let mut root = 0.0;
    let mut cache: Option<(Kernel, Dist, f64, f64)> = None;
    let mut sum_norm = 0.0;
    for i in 1..n {
        let k = matrix_step(proc, i)?;
        let p_i = &margs[i - 1];
        check_full_support(p_i, &k, i)?;
        let reuse = match &cache {
            Some((ck, cp, _, _)) => *ck == k && cp.max_abs_diff(p_i) == 0.0,
            None => false,
        };
        let (log_norm, gamma) = if reuse {
            let c = cache.as_ref().unwrap();
            (c.2, c.3)
        } else {
            let out = kernels::apply_kernel(p_i, &k)?;
            let back = kernels::backward_channel(&k, p_i).map_err(zero_marginal(i + 1))?;
            let gamma = gamma_for(&k, &back, p_i, &out, alpha, choice)?;
            let norm = kernels::operator_norm(&back, &out, alpha, gamma)?;
            let v = (norm.value.ln(), gamma);
            cache = Some((k.clone(), p_i.clone(), v.0, v.1));
            v
        };
        sum_norm += log_norm;
        root += log_norm - p_i.min_log_prob() / conjugate(gamma);
        if i == 1 {
            r.insert("gamma".into(), gamma);
        }
    }
    r.insert("sum_log_norm".into(), sum_norm);
    Ok(root)
}

fn sdpi_root(proc: &ProcessSpec, n: usize, alpha: f64, choice: EtaChoice, r: &mut BTreeMap<String, f64>) -> Result<f64> {
    let margs = proc.marginals(n)?;
    let beta = conjugate(alpha);
    let mut total = 0.0;
    let mut max_eta: f64 = 0.0;
    for i in 2..=n {
        let k = matrix_step(proc, i - 1)?;
        let prev = &margs[i - 2];
        check_full_support(prev, &k, i - 1)?;
        let eta = match choice {
            EtaChoice::DeltaRatio => kernels::renyi_sdpi_delta_ratio(&k, prev, alpha)?.0,
            EtaChoice::Fixed(e) => e,
            EtaChoice::DsbsClosedForm => {
                let l = kernels::spectral(&k)?.dsbs_lambda.ok_or_else(|| {
                    Error::UnsupportedProcess("closed-form coefficient needs a binary symmetric kernel".into())
                })?;
                kernels::dsbs_renyi_sdpi_rhs(l.min(1.0 - l), alpha)
            }
        };
        max_eta = max_eta.max(eta);
        total += eta * prev.min_log_prob();
    }
    r.insert("max_eta".into(), max_eta);
    Ok(-total / beta)
}

/// Bound on `P(|f - E_prod f| >= t)` for a process along the chosen route.
pub fn markov_chain_bound(proc: &ProcessSpec, params: &BoundParams, route: Route) -> Result<BoundReport> {
    params.validate()?;
    let n = params.n;
    let alpha = params.alpha;
    let mut aux = BTreeMap::new();
    let mut notes = Vec::new();
    let root = match route {
        Route::Exact => {
            let h = tensorize::exact_joint_hellinger(proc, n, alpha)?;
            aux.insert("log_h".into(), h.0);
            root_of(h, alpha)
        }
        Route::Tensor => {
            let h = if proc.is_markov() {
                tensorize::tensor_upper_markov(proc, n, alpha, &HolderSchedule::limit(n))?
            } else {
                notes.push("maxima taken over whole history prefixes".into());
                tensorize::tensor_upper_general(proc, n, alpha)?
            };
            aux.insert("log_h_upper".into(), h.0);
            root_of(h, alpha)
        }
        Route::Hyper(choice) => {
            if !proc.is_markov() {
                return Err(Error::UnsupportedProcess("the hypercontractive route needs a Markov process".into()));
            }
            hyper_root(proc, n, alpha, choice, &mut aux)?
        }
        Route::Sdpi(choice) => {
            if !proc.is_markov() {
                return Err(Error::UnsupportedProcess("the contraction route needs a Markov process".into()));
            }
            sdpi_root(proc, n, alpha, choice, &mut aux)?
        }
    };
    let mut r = mcdiarmid_dep_bound_root(params, root, route.name());
    r.aux.extend(aux);
    r.notes.extend(notes);
    Ok(r)
}

/// `{1 + 10^(k/4) : k = -12..24}` followed by infinity.
pub fn alpha_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (-12..=24).map(|k| 1.0 + 10f64.powf(k as f64 / 4.0)).collect();
    g.push(f64::INFINITY);
    g
}

/// Smallest log bound over the alpha grid. Grid points where the bound cannot
/// be evaluated are skipped; the last error is returned if none succeed.
pub fn optimize_alpha(bound_fn: impl Fn(f64) -> Result<BoundReport>) -> Result<(f64, BoundReport)> {
    optimize_alpha_on(&alpha_grid(), bound_fn)
}

pub fn optimize_alpha_on(grid: &[f64], bound_fn: impl Fn(f64) -> Result<BoundReport>) -> Result<(f64, BoundReport)> {
    let mut best: Option<(f64, BoundReport)> = None;
    let mut last_err = None;
    for &a in grid {
        match bound_fn(a) {
            Ok(r) => {
                if r.log_bound.is_nan() {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, b)| r.log_bound < b.log_bound) {
                    best = Some((a, r));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((a, mut r)) => {
            r.notes.push(format!("alpha minimized over a {}-point grid", grid.len()));
            Ok((a, r))
        }
        None => Err(last_err.unwrap_or_else(|| Error::InvalidParam("empty alpha grid".into()))),
    }
}

/// Bound on `|E_joint f - E_prod f|`: integrate the tail bound, using 1 below
/// `t_alpha` and a Gaussian tail estimate above it:
/// `t_alpha + 2^(1/beta) beta sum c^2 / (4 t_alpha)`.
pub fn mean_gap_from_root(params: &BoundParams, root: f64) -> f64 {
    if root <= 0.0 {
        return 0.0;
    }
    let beta = params.beta();
    let s = params.sum_c2();
    let ta = threshold_from_root(params, root);
    ta + 2f64.powf(1.0 / beta) * beta * s / (4.0 * ta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanGap {
    #[serde(serialize_with = "report::num")]
    pub value: f64,
    #[serde(serialize_with = "report::num")]
    pub t_alpha: f64,
    /// `H = 1`: the joint law is the product and the gap is exactly zero.
    pub degenerate: bool,
}

pub fn mean_gap_bound(params: &BoundParams, log_h: LogValue) -> MeanGap {
    let root = root_of(log_h, params.alpha);
    if !(root > 0.0) {
        return MeanGap { value: 0.0, t_alpha: 0.0, degenerate: true };
    }
    MeanGap { value: mean_gap_from_root(params, root), t_alpha: threshold_from_root(params, root), degenerate: false }
}

/// Tail of the form `h(r) <= C exp(-c r^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailShape {
    pub log_c: f64,
    pub c: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianShift {
    /// Smallest `r` with `h(r) <= 1/2`; any larger value has `h < 1/2`.
    pub r0: f64,
    /// `int_0^inf h`.
    pub mean_shift: f64,
    /// With a shape: `h` around the median or mean is at most `C' exp(-kappa c r^p)`.
    pub c_prime_median: Option<f64>,
    pub c_prime_mean: Option<f64>,
    pub kappa_p: Option<f64>,
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Tail-shift constants for moving a deviation bound `P(|f - a| >= r) <= h(r)`
/// to the median or mean. `log_h` must be nonincreasing with `h(r) -> 0`.
pub fn median_shift(log_h: impl Fn(f64) -> f64, shape: Option<TailShape>) -> Result<MedianShift> {
    let half = -LN2;
    if log_h(0.0) < half {
        return Err(Error::NoHalfPoint);
    }
    let mut hi = 1.0;
    while log_h(hi) > half {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::InvalidParam("tail never drops below 1/2".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_h(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r0 = hi;
    // Integrate up to where h is negligible, in pieces of growing width.
    let mut end = r0.max(1e-12);
    while log_h(end) > -60.0 {
        end *= 2.0;
        if end > 1e300 {
            return Err(Error::InvalidParam("tail does not decay".into()));
        }
    }
    let h = |r: f64| log_h(r).exp();
    let pieces = 64;
    let mut mean_shift = 0.0;
    for j in 0..pieces {
        let a = end * j as f64 / pieces as f64;
        let b = end * (j + 1) as f64 / pieces as f64;
        mean_shift += simpson(&h, a, b, 64);
    }
    let (mut cpm, mut cpa, mut kp) = (None, None, None);
    if let Some(s) = shape {
        let kappa = 0.5f64.powf(s.p);
        let cp = |shift: f64| s.log_c.exp().max((s.c * shift.powf(s.p)).exp());
        cpm = Some(cp(r0));
        cpa = Some(cp(mean_shift));
        kp = Some(kappa);
    }
    Ok(MedianShift { r0, mean_shift, c_prime_median: cpm, c_prime_mean: cpa, kappa_p: kp })
}

/// `C_n = sum_{i<n} -min_j ln P_i(j)`, the root of the contractive route at
/// `alpha = inf` where every backward-channel norm is one.
pub fn median_cn(proc: &ProcessSpec, n: usize) -> Result<f64> {
    let margs = proc.marginals(n)?;
    Ok(margs.iter().take(n - 1).map(|m| -m.min_log_prob()).sum())
}

/// Bound around the median: `ln 2 - 2 (t - r0)^2 / sum c^2 + C_n` with
/// `r0 = sqrt(sum c^2 (ln 4 + C_n) / 2)`; requires `t > r0`.
pub fn median_bound(params: &BoundParams, c_n: f64) -> Result<BoundReport> {
    let s = params.sum_c2();
    let r0 = (s * (2.0 * LN2 + c_n) / 2.0).sqrt();
    if !(params.t > r0) {
        return Err(Error::PreconditionT { t: params.t, floor: r0 });
    }
    let d = params.t - r0;
    let log = LN2 - 2.0 * d * d / s + c_n;
    let thr = r0 + (s * c_n / 2.0).max(0.0).sqrt();
    let inf_params = BoundParams { alpha: f64::INFINITY, ..params.clone() };
    let mut r = BoundReport::new("median", log, &inf_params, thr, Centering::Median);
    r.aux.insert("c_n".into(), c_n);
    r.aux.insert("r0".into(), r0);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn event_bound_arithmetic() {
        let v = general_event_bound(LogValue(-5.0), LogValue(1.0), 2.0);
        assert!(close(v.0, -2.0, 1e-15));
        assert_eq!(general_event_bound(LogValue(-3.0), LogValue::ONE, f64::INFINITY).0, -3.0);
        assert_eq!(general_event_bound(LogValue(-3.0), LogValue::INFINITY, 2.0).0, f64::INFINITY);
    }

    #[test]
    fn independent_is_mcdiarmid() {
        let p = BoundParams::new(10, 0.3, f64::INFINITY).unwrap();
        let r = mcdiarmid_dep_bound(&p, LogValue::ONE);
        let want = (2.0f64).ln() - 2.0 * 10.0 * 0.09;
        assert!(close(r.log_bound, want, 1e-14));
        assert_eq!(r.threshold_t, 0.0);
    }

    #[test]
    fn plug_in_with_exact_h() {
        let p = BoundParams::new(2, 0.6, 2.0).unwrap();
        let r = mcdiarmid_dep_bound(&p, LogValue(1.25f64.ln()));
        let want = 0.5 * LN2 - 2.0 * 2.0 * 0.36 / 2.0 + 0.5 * 1.25f64.ln();
        assert!(close(r.log_bound, want, 1e-14));
    }

    #[test]
    fn threshold_sign_change() {
        let p = BoundParams::new(30, 0.0, 3.0).unwrap();
        let root = 2.7;
        let t = threshold_from_root(&p, root);
        let above = BoundParams { t: t * (1.0 + 1e-6), ..p.clone() };
        let below = BoundParams { t: t * (1.0 - 1e-6), ..p.clone() };
        assert!(exponent(&above, root) < 0.0);
        assert!(exponent(&below, root) >= 0.0);
    }

    #[test]
    fn grid_shape() {
        let g = alpha_grid();
        assert_eq!(g.len(), 38);
        assert!(close(g[0], 1.001, 1e-12));
        assert_eq!(*g.last().unwrap(), f64::INFINITY);
    }

    #[test]
    fn degenerate_mean_gap() {
        let p = BoundParams::new(5, 0.1, 2.0).unwrap();
        let g = mean_gap_bound(&p, LogValue::ONE);
        assert!(g.degenerate && g.value == 0.0);
    }

    #[test]
    fn gaussian_median_shift() {
        let n = 20.0;
        let s = median_shift(|r| LN2 - 2.0 * n * r * r, Some(TailShape { log_c: LN2, c: 2.0 * n, p: 2.0 })).unwrap();
        assert!(close(s.r0, ((4.0f64).ln() / (2.0 * n)).sqrt(), 1e-12));
        assert!(close(s.mean_shift, (std::f64::consts::PI / (2.0 * n)).sqrt(), 1e-9));
        assert!(matches!(median_shift(|_| -1.0, None), Err(Error::NoHalfPoint)));
    }

    #[test]
    fn binary_hyper_route_is_finite() {
        let proc = ProcessSpec::binary_chain(0.25).unwrap();
        let p = BoundParams::new(50, 0.5, 4.0).unwrap();
        let r = markov_chain_bound(&proc, &p, Route::Hyper(GammaChoice::Star)).unwrap();
        assert!(r.log_bound.is_finite());
        assert!(close(r.aux["gamma"], 1.75, 1e-12));
    }

    #[test]
    fn dsbs_route_factors_at_infinity() {
        let lambda = 0.2;
        let proc = ProcessSpec::binary_chain(lambda).unwrap();
        let n = 20;
        let p = BoundParams::new(n, 0.5, f64::INFINITY).unwrap();
        let hyper = markov_chain_bound(&proc, &p, Route::Hyper(GammaChoice::Star)).unwrap();
        assert!(close(hyper.aux["root"], (n as f64 - 1.0) * LN2, 1e-12));
        let sdpi = markov_chain_bound(&proc, &p, Route::Sdpi(EtaChoice::DsbsClosedForm)).unwrap();
        let want = (1.0 - 2.0 * lambda) / (1.0 - lambda) * (n as f64 - 1.0) * LN2;
        assert!(close(sdpi.aux["root"], want, 1e-12));
        let half = ProcessSpec::binary_chain(0.5).unwrap();
        let r = markov_chain_bound(&half, &p, Route::Sdpi(EtaChoice::DeltaRatio)).unwrap();
        assert!(r.aux["root"].abs() < 1e-12);
    }

    #[test]
    fn walk_has_no_finite_kernel() {
        let p = BoundParams::new(5, 0.5, 2.0).unwrap();
        assert!(matches!(
            markov_chain_bound(&ProcessSpec::Ssrw, &p, Route::Hyper(GammaChoice::Contractive)),
            Err(Error::UnsupportedProcess(_))
        ));
    }
}
