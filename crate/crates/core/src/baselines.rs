//! Competing concentration bounds for Markov chains and the thresholds in `t`
//! beyond which the dependent McDiarmid bound decays faster.
//!
//! Baselines are centred differently (joint mean, stationary mean, median);
//! every report carries its centering and comparisons are between exponents.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::engine::{self, BoundParams, BoundReport, Centering, GammaChoice, Route};
use crate::error::{Error, Result};
use crate::kernels::{self, Kernel};
use crate::measures::Dist;
use crate::report;
use crate::scenarios::{self, ProcessSpec};

const LN2: f64 = std::f64::consts::LN_2;

/// Parameters of the competing bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Per-step contraction coefficients `eta_TV(K_k)`, `k = 1..n-1`.
    pub etas: Vec<f64>,
    /// Largest modulus among the non-unit eigenvalues.
    pub lambda_abs: f64,
    /// `1 - max TV` between conditional laws.
    pub a: f64,
    pub range: (f64, f64),
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if self.etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::InvalidParam("contraction coefficients must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda_abs) || !(0.0..=1.0).contains(&self.a) {
            return Err(Error::InvalidParam("lambda_abs and a must lie in [0, 1]".into()));
        }
        if !(self.range.1 > self.range.0) {
            return Err(Error::InvalidParam("range must satisfy a < b".into()));
        }
        Ok(())
    }
}

/// `M_n = max_i (1 + sum_{j >= i} prod_{k=i..j} eta_k)`.
pub fn kontorovich_m(etas: &[f64]) -> f64 {
    let mut best: f64 = 1.0;
    // Suffix recursion: S_i = eta_i (1 + S_{i+1}).
    let mut s = 0.0;
    for e in etas.iter().rev() {
        s = e * (1.0 + s);
        best = best.max(1.0 + s);
    }
    best
}

/// Time-homogeneous `M_n = (1 - eta^n) / (1 - eta)`.
pub fn kontorovich_m_homogeneous(eta: f64, n: usize) -> f64 {
    if eta >= 1.0 {
        return n as f64;
    }
    -(n as f64 * eta.ln()).exp_m1() / (1.0 - eta)
}

fn base_params(n: usize, t: f64) -> Result<BoundParams> {
    BoundParams::new(n, t, f64::INFINITY)
}

/// Martingale bound `2 exp(-n t^2 / (2 M_n^2))` around the joint mean.
pub fn kontorovich_bound(n: usize, t: f64, etas: &[f64]) -> Result<BoundReport> {
    if etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::InvalidParam("contraction coefficients must lie in [0, 1]".into()));
    }
    let m = kontorovich_m(etas);
    let nf = n as f64;
    let log = LN2 - nf * t * t / (2.0 * m * m);
    let mut r = BoundReport::new("kontorovich", log, &base_params(n, t)?, 0.0, Centering::JointMean);
    r.aux.insert("m_n".into(), m);
    Ok(r)
}

/// Spectral-gap bound `2 exp(-((1 - l)/(1 + l)) 2 n t^2 / (b - a)^2)` around the stationary mean.
pub fn fan_bound(n: usize, t: f64, lambda_abs: f64, range: (f64, f64)) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&lambda_abs) {
        return Err(Error::InvalidParam(format!("lambda_abs {lambda_abs} outside [0, 1]")));
    }
    let d2 = (range.1 - range.0).powi(2);
    if !(d2 > 0.0) {
        return Err(Error::InvalidParam("range must satisfy a < b".into()));
    }
    let rho = (1.0 - lambda_abs) / (1.0 + lambda_abs);
    let log = LN2 - rho * 2.0 * n as f64 * t * t / d2;
    let mut r = BoundReport::new("fan", log, &base_params(n, t)?, 0.0, Centering::StationaryMean);
    r.aux.insert("rate".into(), rho);
    r.notes.push("assumes the chain starts from its stationary law".into());
    Ok(r)
}

/// Blow-up bound `exp(-2 n (a t - sqrt(ln(1/P(E)) / (2n)))^2)` for a set of
/// probability `P(E)`. The expanded form is stored in `aux`.
pub fn marton_blowup_bound(n: usize, t: f64, a: f64, log_pe: f64) -> Result<BoundReport> {
    if !(a > 0.0) {
        return Err(Error::NotContracting);
    }
    if a > 1.0 || !(log_pe <= 0.0) {
        return Err(Error::InvalidParam("need a in (0, 1] and ln P(E) <= 0".into()));
    }
    let nf = n as f64;
    let floor = (-log_pe / nf).sqrt() / a;
    if !(t > floor) {
        return Err(Error::PreconditionT { t, floor });
    }
    let s = (-log_pe / (2.0 * nf)).sqrt();
    let d = a * t - s;
    let log = -2.0 * nf * d * d;
    let mut r = BoundReport::new("marton", log, &base_params(n, t)?, s / a, Centering::Median);
    r.aux.insert("expanded".into(), -2.0 * nf * t * t * a * a + 2.0 * t * a * (2.0 * nf * -log_pe).sqrt());
    r.aux.insert("a".into(), a);
    Ok(r)
}

/// The coupling quantity for general dependent processes is not computed.
pub fn marton_dependent(_proc: &ProcessSpec, _n: usize) -> Result<f64> {
    Err(Error::Unsupported(
        "the infimum over the set of all the couplings of the conditional laws is not computed".into(),
    ))
}

/// Median-centred form of the dependent bound at `alpha = inf`:
/// `ln 2 - 2 n (t - r0)^2 + C_n` with `r0 = sqrt((ln 4 + C_n)/(2n))`.
pub fn ours_median(n: usize, t: f64, c_n: f64) -> Result<BoundReport> {
    engine::median_bound(&BoundParams::new(n, t, f64::INFINITY)?, c_n)
}

/// Pairs of bounds with a crossover threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pair {
    OursVsKontorovich,
    OursVsFan,
    OursVsMarton,
    OursVsFanGeneral,
    OursVsKontorovichGeneral,
}

impl Pair {
    pub const ALL: [Pair; 5] = [
        Pair::OursVsKontorovich,
        Pair::OursVsFan,
        Pair::OursVsMarton,
        Pair::OursVsFanGeneral,
        Pair::OursVsKontorovichGeneral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Pair::OursVsKontorovich => "ours-vs-kontorovich",
            Pair::OursVsFan => "ours-vs-fan",
            Pair::OursVsMarton => "ours-vs-marton",
            Pair::OursVsFanGeneral => "ours-vs-fan-general",
            Pair::OursVsKontorovichGeneral => "ours-vs-kontorovich-general",
        }
    }

    pub fn parse(s: &str) -> Result<Pair> {
        Pair::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown pair {s:?}")))
    }
}

/// Setting in which a crossover is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossoverScenario {
    /// Uniform-start binary symmetric chain with flip probability `lambda`.
    Binary { lambda: f64 },
    /// Finite time-homogeneous chain.
    Chain { init: Dist, kernel: Kernel },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossover {
    pub pair: Pair,
    pub n: usize,
    #[serde(serialize_with = "report::num")]
    pub alpha: f64,
    /// Finite-`n` threshold.
    #[serde(serialize_with = "report::num")]
    pub t_bar: f64,
    /// Leading-order threshold as `n -> inf`.
    #[serde(serialize_with = "report::num")]
    pub t_bar_asymptotic: f64,
    /// Both log bounds at `1.01 t_bar`.
    #[serde(serialize_with = "report::num")]
    pub ours_at_check: f64,
    #[serde(serialize_with = "report::num")]
    pub theirs_at_check: f64,
    pub verified: bool,
}

/// Quantities of a general chain entering the comparisons with this bound.
struct ChainSummary {
    /// `ln ||K^<-||_{alpha -> alpha}`.
    log_norm: f64,
    /// `min_{i < n} min_j ln P_i(j)`.
    min_log_p: f64,
    eta: f64,
    lambda_abs: f64,
}

fn chain_summary(init: &Dist, kernel: &Kernel, n: usize, alpha: f64) -> Result<ChainSummary> {
    let proc = ProcessSpec::HomogeneousChain { init: init.clone(), kernel: kernel.clone() };
    let margs = proc.marginals(n)?;
    let min_log_p = margs.iter().take(n - 1).map(|m| m.min_log_prob()).fold(f64::INFINITY, f64::min);
    let log_norm = if alpha.is_infinite() {
        0.0
    } else {
        // Homogeneous chains: the norm is taken at the first step's marginal.
        let out = kernels::apply_kernel(init, kernel)?;
        let back = kernels::backward_channel(kernel, init)?;
        kernels::operator_norm(&back, &out, alpha, alpha)?.value.ln()
    };
    let spec = kernels::spectral(kernel)?;
    let lambda_abs = 1.0 - spec.absolute_gap;
    Ok(ChainSummary { log_norm, min_log_p, eta: kernels::dobrushin_tv(kernel), lambda_abs })
}

/// Threshold `t_bar` beyond which this method's log bound is the smaller one,
/// checked by evaluating both bounds at `1.01 t_bar`.
pub fn crossover_threshold(pair: Pair, scen: &CrossoverScenario, n: usize, alpha: f64) -> Result<Crossover> {
    if n < 2 {
        return Err(Error::InvalidParam("crossovers need n >= 2".into()));
    }
    if !(alpha > 1.0) {
        return Err(Error::InvalidParam(format!("alpha must exceed 1, got {alpha}")));
    }
    let (t_bar, t_asym) = threshold_values(pair, scen, n, alpha)?;
    let t = 1.01 * t_bar;
    let (ours, theirs) = pair_logs(pair, scen, n, t, alpha)?;
    Ok(Crossover {
        pair,
        n,
        alpha,
        t_bar,
        t_bar_asymptotic: t_asym,
        ours_at_check: ours,
        theirs_at_check: theirs,
        verified: ours < theirs,
    })
}

fn binary_lambda(scen: &CrossoverScenario) -> Result<f64> {
    match scen {
        CrossoverScenario::Binary { lambda } => {
            if !(*lambda > 0.0 && *lambda < 0.5) {
                return Err(Error::InvalidParam(format!("flip probability {lambda} outside (0, 1/2)")));
            }
            Ok(*lambda)
        }
        CrossoverScenario::Chain { .. } => Err(Error::InvalidParam("pair needs the binary scenario".into())),
    }
}

fn general_chain(scen: &CrossoverScenario) -> Result<(Dist, Kernel)> {
    match scen {
        CrossoverScenario::Binary { lambda } => Ok((Dist::uniform(vec![0, 1])?, Kernel::binary_flip(*lambda)?)),
        CrossoverScenario::Chain { init, kernel } => Ok((init.clone(), kernel.clone())),
    }
}

/// `(C_n, r0^2)` pieces of the median form for the binary chain.
fn marton_binary_parts(lambda: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let c_n = (nf - 1.0) * scenarios::log_two_kappa(lambda, f64::INFINITY);
    (c_n, (2.0 * LN2 + c_n) / (2.0 * nf))
}

fn threshold_values(pair: Pair, scen: &CrossoverScenario, n: usize, alpha: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let beta = crate::conjugate(alpha);
    let shrink = 1.0 - 1.0 / nf;
    match pair {
        Pair::OursVsKontorovich => {
            let l = binary_lambda(scen)?;
            let lk = scenarios::log_two_kappa(l, alpha);
            let d2 = (1.0 - 2.0 * l).powi(n as i32) - 1.0;
            let d2 = d2 * d2;
            let den = 2.0 * (d2 - beta * l * l);
            if !(den > 0.0) {
                return Err(Error::NoCrossover(format!("denominator {den} is not positive")));
            }
            let asym_den = 2.0 * (1.0 - beta * l * l);
            Ok(((d2 * shrink * lk / den).sqrt(), (lk / asym_den).sqrt()))
        }
        Pair::OursVsFan => {
            let l = binary_lambda(scen)?;
            let lk = scenarios::log_two_kappa(l, alpha);
            let den = 2.0 - 2.0 * beta * l / (1.0 - l);
            if !(den > 0.0) {
                return Err(Error::NoCrossover(format!("denominator {den} is not positive")));
            }
            Ok(((shrink * lk / den).sqrt(), (lk / den).sqrt()))
        }
        Pair::OursVsMarton => {
            let l = binary_lambda(scen)?;
            let a = 2.0 * l;
            let (c_n, r0sq) = marton_binary_parts(l, n);
            let r0 = r0sq.sqrt();
            let s = (LN2 / (2.0 * nf)).sqrt();
            // ours - theirs < 0  <=>  (1-a^2) t^2 - 2 (r0 - a s) t + r0^2 - s^2 - (ln 2 + C_n)/(2n) > 0
            let qa = 1.0 - a * a;
            let qb = -2.0 * (r0 - a * s);
            let qc = r0 * r0 - s * s - (LN2 + c_n) / (2.0 * nf);
            let disc = qb * qb - 4.0 * qa * qc;
            if !(qa > 0.0) || disc < 0.0 {
                return Err(Error::NoCrossover("quadratic has no real root".into()));
            }
            let root = (-qb + disc.sqrt()) / (2.0 * qa);
            let asym = (2.0 * scenarios::log_two_kappa(l, f64::INFINITY)).sqrt() / (1.0 - 4.0 * l * l);
            Ok((root.max(r0), asym))
        }
        Pair::OursVsKontorovichGeneral => {
            let (init, k) = general_chain(scen)?;
            let cs = chain_summary(&init, &k, n, alpha)?;
            let g = beta * cs.log_norm - cs.min_log_p;
            let m = kontorovich_m_homogeneous(cs.eta, n);
            let den = 4.0 * m * m - beta;
            if !(den > 0.0) {
                return Err(Error::NoCrossover(format!("4 M_n^2 - beta = {den} is not positive")));
            }
            let asym_den = 4.0 - beta * (1.0 - cs.eta).powi(2);
            if !(asym_den > 0.0) {
                return Err(Error::NoCrossover("asymptotic denominator is not positive".into()));
            }
            Ok(((shrink * 2.0 * m * m * g / den).sqrt(), (2.0 * g / asym_den).sqrt()))
        }
        Pair::OursVsFanGeneral => {
            let (init, k) = general_chain(scen)?;
            let cs = chain_summary(&init, &k, n, alpha)?;
            let g = beta * cs.log_norm - cs.min_log_p;
            let rho = (1.0 - cs.lambda_abs) / (1.0 + cs.lambda_abs);
            let den = 2.0 * (1.0 - beta * rho);
            if !(den > 0.0) {
                return Err(Error::NoCrossover(format!("1 - beta rho = {} is not positive", den / 2.0)));
            }
            Ok(((shrink * g / den).sqrt(), (g / den).sqrt()))
        }
    }
}

/// Log bounds `(ours, theirs)` of a pair at deviation `t`.
pub fn pair_logs(pair: Pair, scen: &CrossoverScenario, n: usize, t: f64, alpha: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let beta = crate::conjugate(alpha);
    match pair {
        Pair::OursVsKontorovich => {
            let l = binary_lambda(scen)?;
            let ours = scenarios::binary_chain_bound(l, n, t, alpha)?.log_bound;
            let theirs = kontorovich_bound(n, t, &vec![1.0 - 2.0 * l; n - 1])?.log_bound;
            Ok((ours, theirs))
        }
        Pair::OursVsFan => {
            let l = binary_lambda(scen)?;
            let ours = scenarios::binary_chain_bound(l, n, t, alpha)?.log_bound;
            let theirs = fan_bound(n, t, 1.0 - 2.0 * l, (0.0, 1.0))?.log_bound;
            Ok((ours, theirs))
        }
        Pair::OursVsMarton => {
            let l = binary_lambda(scen)?;
            let (c_n, _) = marton_binary_parts(l, n);
            let ours = ours_median(n, t, c_n)?.log_bound;
            let theirs = marton_blowup_bound(n, t, 2.0 * l, -LN2)?.log_bound;
            Ok((ours, theirs))
        }
        Pair::OursVsKontorovichGeneral | Pair::OursVsFanGeneral => {
            let (init, k) = general_chain(scen)?;
            let cs = chain_summary(&init, &k, n, alpha)?;
            let g = beta * cs.log_norm - cs.min_log_p;
            let ours = LN2 / beta - (2.0 * nf * t * t - (nf - 1.0) * g) / beta;
            let theirs = if pair == Pair::OursVsFanGeneral {
                fan_bound(n, t, cs.lambda_abs, (0.0, 1.0))?.log_bound
            } else {
                let m = kontorovich_m_homogeneous(cs.eta, n);
                LN2 - nf * t * t / (2.0 * m * m)
            };
            Ok((ours, theirs))
        }
    }
}

/// Our bound in the general comparisons, as a report for tables.
pub fn ours_general(init: &Dist, kernel: &Kernel, n: usize, t: f64, alpha: f64) -> Result<BoundReport> {
    let proc = ProcessSpec::HomogeneousChain { init: init.clone(), kernel: kernel.clone() };
    engine::markov_chain_bound(&proc, &BoundParams::new(n, t, alpha)?, Route::Hyper(GammaChoice::Contractive))
}

/// Dependence coefficients `theta_ij`, `i < j`: the largest total variation
/// between the laws of `X_j..X_n` given `X^i = (x^{i-1}, w)` and `(x^{i-1}, w')`,
/// found by enumerating every prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamsonReport {
    pub n: usize,
    /// Row-major `n x n` upper-triangular matrix with unit diagonal.
    pub theta: Vec<Vec<f64>>,
    /// Largest row sum.
    pub row_sum_norm: f64,
    /// Largest singular value.
    pub spectral_norm: f64,
}

/// Law of the continuation `x_{k+1..n}` after the given prefix, as `(path, prob)`.
fn continuations(proc: &ProcessSpec, prefix: &mut Vec<i64>, n: usize, p: f64, out: &mut Vec<(Vec<i64>, f64)>, start: usize) -> Result<()> {
    if prefix.len() == n {
        out.push((prefix[start..].to_vec(), p));
        return Ok(());
    }
    let law = proc.conditional(prefix)?;
    for (s, l) in law.iter() {
        if l == f64::NEG_INFINITY {
            continue;
        }
        prefix.push(s);
        continuations(proc, prefix, n, p * l.exp(), out, start)?;
        prefix.pop();
    }
    Ok(())
}

fn tail_law(proc: &ProcessSpec, prefix: &[i64], n: usize, j: usize) -> Result<BTreeMap<Vec<i64>, f64>> {
    let mut all = Vec::new();
    let mut pre = prefix.to_vec();
    continuations(proc, &mut pre, n, 1.0, &mut all, prefix.len())?;
    let skip = j - 1 - prefix.len();
    let mut law = BTreeMap::new();
    for (path, p) in all {
        *law.entry(path[skip..].to_vec()).or_insert(0.0) += p;
    }
    Ok(law)
}

fn tv_maps(a: &BTreeMap<Vec<i64>, f64>, b: &BTreeMap<Vec<i64>, f64>) -> f64 {
    let mut s = 0.0;
    for (k, v) in a {
        s += (v - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, v) in b {
        if !a.contains_key(k) {
            s += v;
        }
    }
    0.5 * s
}

pub fn samson_theta(proc: &ProcessSpec, n: usize) -> Result<SamsonReport> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidParam("brute-force dependence matrix supports 1 <= n <= 10".into()));
    }
    let mut theta = vec![vec![0.0; n]; n];
    for (i, row) in theta.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for i in 1..n {
        // Prefixes x^{i-1} of positive probability.
        let mut prefixes: Vec<Vec<i64>> = Vec::new();
        if i == 1 {
            prefixes.push(Vec::new());
        } else {
            crate::tensorize::for_each_path(proc, i - 1, |p, _| prefixes.push(p.to_vec()))?;
        }
        for pre in &prefixes {
            let ws: Vec<i64> =
                proc.conditional(pre)?.iter().filter(|(_, l)| *l > f64::NEG_INFINITY).map(|(s, _)| s).collect();
            for j in (i + 1)..=n {
                let laws: Vec<BTreeMap<Vec<i64>, f64>> = ws
                    .iter()
                    .map(|&w| {
                        let mut p = pre.clone();
                        p.push(w);
                        tail_law(proc, &p, n, j)
                    })
                    .collect::<Result<_>>()?;
                for a in 0..laws.len() {
                    for b in (a + 1)..laws.len() {
                        let v = tv_maps(&laws[a], &laws[b]);
                        if v > theta[i - 1][j - 1] {
                            theta[i - 1][j - 1] = v;
                        }
                    }
                }
            }
        }
    }
    let row_sum_norm = theta.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let m = DMatrix::from_fn(n, n, |r, c| theta[r][c]);
    let spectral_norm = m.singular_values().max();
    Ok(SamsonReport { n, theta, row_sum_norm, spectral_norm })
}

/// Comparison table: `method,n,t,log_bound,centering`, rows sorted by `t` then method.
pub fn write_comparison_csv<W: Write>(reports: &[BoundReport], w: W) -> Result<()> {
    let mut rows: Vec<&BoundReport> = reports.iter().collect();
    rows.sort_by(|a, b| a.params.t.total_cmp(&b.params.t).then_with(|| a.method.cmp(&b.method)));
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["method", "n", "t", "log_bound", "centering"])?;
    for r in rows {
        let centering = serde_json::to_value(r.centering)?;
        wr.write_record([
            r.method.clone(),
            r.params.n.to_string(),
            format!("{:.16e}", r.params.t),
            format!("{:.16e}", r.log_bound),
            centering.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
