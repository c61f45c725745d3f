//! Ground truth for the bounds: exact tails by path enumeration and Monte
//! Carlo tails with exact binomial confidence intervals.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::engine::{self, BoundParams, BoundReport, Centering, EtaChoice, GammaChoice, Route};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::measures::Dist;
use crate::report;
use crate::scenarios::{self, PRule, ProcessSpec};
use crate::tensorize;

/// Name of the generator behind every Monte Carlo estimate.
pub const RNG_ALGORITHM: &str = "ChaCha8, stream = block index";

/// Paths per independent RNG stream.
pub const BLOCK: u64 = 1 << 16;

/// Path functionals with values in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// `(1/n) #{i : x_i > 0}`: fraction of ones for `{0,1}` chains, of `+1`
    /// for `+-1` processes, time spent positive for the walk.
    FractionPositive,
    /// `x_n / (2n) + 1/2`, the walk's endpoint rescaled to `[0, 1]`.
    NormalizedEndpoint,
    /// `(1/(n-1)) #{i : x_i = x_{i+1}}`; not a sum of per-coordinate terms.
    FractionAgree,
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::FractionPositive => "fraction-positive",
            Functional::NormalizedEndpoint => "normalized-endpoint",
            Functional::FractionAgree => "fraction-agree",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Functional::FractionPositive, Functional::NormalizedEndpoint, Functional::FractionAgree]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown functional {s:?}")))
    }

    pub fn eval(&self, path: &[i64]) -> f64 {
        let n = path.len();
        match self {
            Functional::FractionPositive => path.iter().filter(|x| **x > 0).count() as f64 / n as f64,
            Functional::NormalizedEndpoint => {
                let v = path[n - 1] as f64 / (2.0 * n as f64) + 0.5;
                v.clamp(0.0, 1.0)
            }
            Functional::FractionAgree => {
                if n < 2 {
                    return 1.0;
                }
                path.windows(2).filter(|w| w[0] == w[1]).count() as f64 / (n - 1) as f64
            }
        }
    }

    /// Bounded-difference constants, found by enumerating every value each
    /// coordinate can take under its marginal together with its neighbours.
    pub fn certificate(&self, margs: &[Dist]) -> Vec<f64> {
        let n = margs.len();
        let supp: Vec<Vec<i64>> = margs.iter().map(|m| m.support()).collect();
        let spread = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if hi >= lo {
                hi - lo
            } else {
                0.0
            }
        };
        match self {
            Functional::FractionPositive => (0..n)
                .map(|i| spread(&mut supp[i].iter().map(|&x| f64::from(u8::from(x > 0)) / n as f64)))
                .collect(),
            Functional::NormalizedEndpoint => (0..n)
                .map(|i| {
                    if i + 1 < n {
                        0.0
                    } else {
                        spread(&mut supp[i].iter().map(|&x| (x as f64 / (2.0 * n as f64) + 0.5).clamp(0.0, 1.0)))
                    }
                })
                .collect(),
            Functional::FractionAgree => {
                if n < 2 {
                    return vec![0.0; n];
                }
                let w = 1.0 / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        // Terms touching coordinate i: pairs (i-1, i) and (i, i+1).
                        let left: Vec<i64> = if i > 0 { supp[i - 1].clone() } else { vec![i64::MIN] };
                        let right: Vec<i64> = if i + 1 < n { supp[i + 1].clone() } else { vec![i64::MIN] };
                        let mut best: f64 = 0.0;
                        for &l in &left {
                            for &r in &right {
                                let vals = supp[i].iter().map(|&x| {
                                    let a = if i > 0 && l == x { w } else { 0.0 };
                                    let b = if i + 1 < n && r == x { w } else { 0.0 };
                                    a + b
                                });
                                best = best.max(spread(&mut vals.into_iter()));
                            }
                        }
                        best
                    })
                    .collect()
            }
        }
    }

    /// Mean of `f` under the product of the marginals.
    pub fn product_mean(&self, margs: &[Dist]) -> f64 {
        let n = margs.len();
        match self {
            Functional::FractionPositive => {
                margs.iter().map(|m| m.expect(|x| f64::from(u8::from(x > 0)))).sum::<f64>() / n as f64
            }
            Functional::NormalizedEndpoint => {
                margs[n - 1].expect(|x| (x as f64 / (2.0 * n as f64) + 0.5).clamp(0.0, 1.0))
            }
            Functional::FractionAgree => {
                if n < 2 {
                    return 1.0;
                }
                let s: f64 = margs.windows(2).map(|w| w[0].expect(|x| w[1].prob(x))).sum();
                s / (n - 1) as f64
            }
        }
    }
}

/// Reference point of the deviation event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Center {
    ProductMean,
    JointMean,
    Median,
    Constant(f64),
}

/// Event `{|f - center| >= t}` under the law of `proc` over `n` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TailQuery {
    pub proc: ProcessSpec,
    pub n: usize,
    pub f: Functional,
    pub center: Center,
    pub t: f64,
}

impl TailQuery {
    /// Bounded-difference constants of `f`; for `n <= 10` they are also
    /// checked against the declared `c_i = 1/n` when `f` claims it.
    pub fn certificate(&self) -> Result<Vec<f64>> {
        Ok(self.f.certificate(&self.proc.marginals(self.n)?))
    }
}

/// Slack absorbing rounding in `|f - c| >= t`; it enlarges the event.
const EVENT_TOL: f64 = 1e-12;

fn in_event(v: f64, center: f64, t: f64) -> bool {
    (v - center).abs() >= t - EVENT_TOL * t.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactTail {
    #[serde(serialize_with = "report::num")]
    pub prob: f64,
    #[serde(serialize_with = "report::num")]
    pub center: f64,
    #[serde(serialize_with = "report::num")]
    pub joint_mean: f64,
    #[serde(serialize_with = "report::num")]
    pub product_mean: f64,
    #[serde(serialize_with = "report::num")]
    pub median: f64,
}

/// Distribution of `f` under the joint law: sorted values with their masses.
pub fn exact_law(proc: &ProcessSpec, n: usize, f: Functional) -> Result<Vec<(f64, f64)>> {
    let mut vals: Vec<(f64, f64)> = Vec::new();
    tensorize::for_each_path(proc, n, |path, lq| vals.push((f.eval(path), lq.exp())))?;
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, p) in vals {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    Ok(out)
}

/// Tails for several deviations at once, with the law of `f` enumerated once.
pub fn exact_tails(proc: &ProcessSpec, n: usize, f: Functional, center: Center, ts: &[f64]) -> Result<Vec<ExactTail>> {
    let law = exact_law(proc, n, f)?;
    let margs = proc.marginals(n)?;
    let joint_mean: f64 = law.iter().map(|(v, p)| v * p).sum();
    let product_mean = f.product_mean(&margs);
    let mut acc = 0.0;
    let mut median = law.last().map_or(0.0, |l| l.0);
    for &(v, p) in &law {
        acc += p;
        if acc >= 0.5 {
            median = v;
            break;
        }
    }
    let c = match center {
        Center::ProductMean => product_mean,
        Center::JointMean => joint_mean,
        Center::Median => median,
        Center::Constant(c) => c,
    };
    Ok(ts
        .iter()
        .map(|&t| {
            let prob: f64 = law.iter().filter(|(v, _)| in_event(*v, c, t)).map(|(_, p)| p).sum();
            ExactTail { prob: prob.min(1.0), center: c, joint_mean, product_mean, median }
        })
        .collect())
}

pub fn exact_tail(q: &TailQuery) -> Result<ExactTail> {
    Ok(exact_tails(&q.proc, q.n, q.f, q.center, &[q.t])?.remove(0))
}

/// Precomputed sampler for one process and horizon.
pub struct PathSampler {
    n: usize,
    kind: SamplerKind,
}

enum SamplerKind {
    /// Per step: states and cumulative probabilities of the initial law or of each row.
    Chain { init: Table, steps: Vec<StepTables> },
    Independent { tables: Vec<Table> },
    Walk,
    Past { p: Vec<f64> },
}

#[derive(Clone)]
struct Table {
    states: Vec<i64>,
    cum: Vec<f64>,
}

impl Table {
    fn new(d: &Dist) -> Self {
        let mut states = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (s, l) in d.iter() {
            if l == f64::NEG_INFINITY {
                continue;
            }
            acc += l.exp();
            states.push(s);
            cum.push(acc);
        }
        let last = cum.len() - 1;
        cum[last] = f64::INFINITY;
        Table { states, cum }
    }

    fn draw(&self, u: f64) -> i64 {
        let k = self.cum.partition_point(|c| *c <= u);
        self.states[k.min(self.states.len() - 1)]
    }
}

#[derive(Clone)]
struct StepTables {
    states: Vec<i64>,
    rows: Vec<Table>,
}

impl StepTables {
    fn new(k: &Kernel) -> Result<Self> {
        let m = k.as_matrix()?;
        let rows = m.states.iter().map(|&x| Ok(Table::new(&k.row(x)?))).collect::<Result<Vec<_>>>()?;
        Ok(StepTables { states: m.states.clone(), rows })
    }

    fn draw(&self, x: i64, u: f64) -> i64 {
        let i = self.states.binary_search(&x).expect("state reached by the chain is in the kernel");
        self.rows[i].draw(u)
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits in [0, 1).
    (rng.random::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl PathSampler {
    pub fn new(proc: &ProcessSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("n must be positive".into()));
        }
        let kind = match proc {
            ProcessSpec::Ssrw => SamplerKind::Walk,
            ProcessSpec::NonMarkovBinary { rule } => {
                rule.validate()?;
                SamplerKind::Past { p: (0..=n).map(|k| rule.p(k)).collect() }
            }
            ProcessSpec::IndependentProduct { .. } => {
                SamplerKind::Independent { tables: proc.marginals(n)?.iter().map(Table::new).collect() }
            }
            ProcessSpec::HomogeneousChain { init, kernel } => {
                SamplerKind::Chain { init: Table::new(init), steps: vec![StepTables::new(kernel)?] }
            }
            ProcessSpec::InhomogeneousChain { init, kernels } => SamplerKind::Chain {
                init: Table::new(init),
                steps: kernels.iter().map(StepTables::new).collect::<Result<Vec<_>>>()?,
            },
        };
        Ok(PathSampler { n, kind })
    }

    /// Fill `out` with one path `x_1..x_n`.
    pub fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut Vec<i64>) {
        out.clear();
        match &self.kind {
            SamplerKind::Walk => {
                let mut s = 0i64;
                let mut bits = 0u64;
                for i in 0..self.n {
                    if i % 64 == 0 {
                        bits = rng.random::<u64>();
                    }
                    s += if (bits >> (i % 64)) & 1 == 1 { 1 } else { -1 };
                    out.push(s);
                }
            }
            SamplerKind::Past { p } => {
                // Running value of sum_k p_k x_k with x_0 = 1.
                let mut s = p[0];
                for i in 1..=self.n {
                    let x = if unit(rng) < s { 1 } else { -1 };
                    out.push(x);
                    s += p[i] * x as f64;
                }
            }
            SamplerKind::Independent { tables } => {
                for t in tables {
                    out.push(t.draw(unit(rng)));
                }
            }
            SamplerKind::Chain { init, steps } => {
                let mut x = init.draw(unit(rng));
                out.push(x);
                for i in 1..self.n {
                    let st = &steps[(i - 1).min(steps.len() - 1)];
                    x = st.draw(x, unit(rng));
                    out.push(x);
                }
            }
        }
    }
}

/// RNG for block `block` of a run seeded with `seed`.
pub fn stream(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// One path drawn from the stream.
pub fn sample_path(proc: &ProcessSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<i64>> {
    let s = PathSampler::new(proc, n)?;
    let mut out = Vec::with_capacity(n);
    s.sample_into(rng, &mut out);
    Ok(out)
}

/// Monte Carlo tail estimate with an exact two-sided 99% binomial interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    #[serde(serialize_with = "report::num")]
    pub point: f64,
    #[serde(serialize_with = "report::num")]
    pub ci_low: f64,
    #[serde(serialize_with = "report::num")]
    pub ci_high: f64,
    pub hits: u64,
    pub samples: u64,
    pub seed: u64,
    pub rng: String,
}

fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clopper-Pearson interval at level `1 - alpha`.
pub fn clopper_pearson(hits: u64, samples: u64, alpha: f64) -> (f64, f64) {
    let (k, n) = (hits as f64, samples as f64);
    let low = if hits == 0 { 0.0 } else { beta_quantile(alpha / 2.0, k, n - k + 1.0) };
    let high = if hits == samples { 1.0 } else { beta_quantile(1.0 - alpha / 2.0, k + 1.0, n - k) };
    (low, high)
}

/// Samples `f` along `samples` paths; block `b` of `BLOCK` paths uses stream `b`.
pub fn sample_functional(proc: &ProcessSpec, n: usize, f: Functional, samples: u64, seed: u64) -> Result<Vec<f64>> {
    let sampler = PathSampler::new(proc, n)?;
    let mut out = Vec::with_capacity(samples as usize);
    let mut path = Vec::with_capacity(n);
    let blocks = samples.div_ceil(BLOCK);
    for b in 0..blocks {
        let mut rng = stream(seed, b);
        let count = BLOCK.min(samples - b * BLOCK);
        for _ in 0..count {
            sampler.sample_into(&mut rng, &mut path);
            out.push(f.eval(&path));
        }
    }
    Ok(out)
}

/// Estimates of `P(|f - center| >= t)` for each `t`, sharing one set of paths.
pub fn empirical_tails(values: &[f64], center: f64, ts: &[f64], seed: u64) -> Vec<MCEstimate> {
    let samples = values.len() as u64;
    ts.iter()
        .map(|&t| {
            let hits = values.iter().filter(|v| in_event(**v, center, t)).count() as u64;
            let (ci_low, ci_high) = clopper_pearson(hits, samples, 0.01);
            MCEstimate {
                point: hits as f64 / samples as f64,
                ci_low,
                ci_high,
                hits,
                samples,
                seed,
                rng: RNG_ALGORITHM.to_string(),
            }
        })
        .collect()
}

/// Center value usable without enumerating paths.
pub fn sampling_center(q: &TailQuery) -> Result<f64> {
    let margs = q.proc.marginals(q.n)?;
    match q.center {
        Center::ProductMean => Ok(q.f.product_mean(&margs)),
        // Functionals that are sums of per-coordinate terms have equal joint and product means.
        Center::JointMean if q.f != Functional::FractionAgree => Ok(q.f.product_mean(&margs)),
        Center::Constant(c) => Ok(c),
        _ => Err(Error::Unsupported("this center needs the enumerated law".into())),
    }
}

pub fn empirical_tail(q: &TailQuery, samples: u64, seed: u64) -> Result<MCEstimate> {
    if samples < 1000 {
        return Err(Error::InvalidParam("need at least 1000 samples".into()));
    }
    let center = sampling_center(q)?;
    let values = sample_functional(&q.proc, q.n, q.f, samples, seed)?;
    Ok(empirical_tails(&values, center, &[q.t], seed).remove(0))
}

/// One row of the bound-dominance table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRow {
    pub scenario: String,
    pub n: usize,
    pub t: f64,
    pub method: String,
    pub log_bound: f64,
    pub empirical: f64,
    pub ci_high: f64,
    pub dominated: bool,
}

pub fn write_dominance_csv<W: Write>(rows: &[DominanceRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["scenario", "n", "t", "method", "log_bound", "empirical", "ci_high", "dominated"])?;
    for r in rows {
        wr.write_record([
            r.scenario.clone(),
            r.n.to_string(),
            format!("{:.16e}", r.t),
            r.method.clone(),
            format!("{:.16e}", r.log_bound),
            format!("{:.16e}", r.empirical),
            format!("{:.16e}", r.ci_high),
            r.dominated.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// A bound whose `H`-dependent part does not depend on `t` or `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    BinaryClosedForm { lambda: f64 },
    SsrwClosedForm,
    NonmarkovClosedForm,
    Route(Route),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::BinaryClosedForm { .. } => "binary-closed-form",
            Method::SsrwClosedForm => "ssrw-closed-form",
            Method::NonmarkovClosedForm => "nonmarkov-closed-form",
            Method::Route(r) => r.name(),
        }
    }

    /// `(1/alpha) ln H` or the method's upper estimate of it.
    pub fn root(&self, proc: &ProcessSpec, n: usize, alpha: f64) -> Result<f64> {
        let r = match self {
            Method::BinaryClosedForm { lambda } => scenarios::binary_chain_bound(*lambda, n, 1.0, alpha)?,
            Method::SsrwClosedForm => scenarios::ssrw_bound(n, 1.0, alpha, Centering::ProductMean)?,
            Method::NonmarkovClosedForm => {
                let params = BoundParams::new(n, 1.0, alpha)?;
                let root = (n as f64 - 1.0) * std::f64::consts::LN_2;
                engine::mcdiarmid_dep_bound_root(&params, root, self.name())
            }
            Method::Route(route) => engine::markov_chain_bound(proc, &BoundParams::new(n, 1.0, alpha)?, *route)?,
        };
        r.aux.get("root").copied().ok_or_else(|| Error::Unsupported("report carries no root".into()))
    }
}

/// Methods that apply to `proc`; `lambda` marks the uniform-start binary chain.
pub fn default_methods(proc: &ProcessSpec, lambda: Option<f64>) -> Vec<Method> {
    let mut m = Vec::new();
    match proc {
        ProcessSpec::Ssrw => m.push(Method::SsrwClosedForm),
        ProcessSpec::NonMarkovBinary { rule: PRule::Geometric } => m.push(Method::NonmarkovClosedForm),
        _ => {}
    }
    if let Some(l) = lambda {
        m.push(Method::BinaryClosedForm { lambda: l });
    }
    m.push(Method::Route(Route::Tensor));
    if proc.is_markov() && !matches!(proc, ProcessSpec::Ssrw) {
        m.push(Method::Route(Route::Hyper(GammaChoice::Star)));
        m.push(Method::Route(Route::Sdpi(EtaChoice::DeltaRatio)));
    }
    m
}

/// Roots on a grid of orders; orders where the method fails are dropped.
pub fn method_roots(method: Method, proc: &ProcessSpec, n: usize, grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter().filter_map(|&a| method.root(proc, n, a).ok().filter(|r| !r.is_nan()).map(|r| (a, r))).collect()
}

/// Smallest bound over precomputed `(alpha, root)` pairs, for deviation `t` and constants `c`.
pub fn best_bound(method: Method, roots: &[(f64, f64)], n: usize, t: f64, c: &[f64]) -> Result<BoundReport> {
    let mut best: Option<BoundReport> = None;
    for &(a, root) in roots {
        let params = BoundParams::new(n, t, a)?.with_c(c.to_vec())?;
        let r = engine::mcdiarmid_dep_bound_root(&params, root, method.name());
        if best.as_ref().is_none_or(|b| r.log_bound < b.log_bound) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Unsupported(format!("{} has no valid order", method.name())))
}

/// Monte Carlo tails against every applicable bound, one row per `(t, method)`.
///
/// Bounds refer to deviations from the product-marginal mean; for the
/// functionals that are sums of per-coordinate terms this is also the joint mean.
#[allow(clippy::too_many_arguments)]
pub fn dominance_table(
    scenario: &str,
    proc: &ProcessSpec,
    n: usize,
    f: Functional,
    ts: &[f64],
    methods: &[Method],
    samples: u64,
    seed: u64,
) -> Result<(Vec<DominanceRow>, Vec<MCEstimate>)> {
    let margs = proc.marginals(n)?;
    let c = f.certificate(&margs);
    let center = f.product_mean(&margs);
    let values = sample_functional(proc, n, f, samples, seed)?;
    let est = empirical_tails(&values, center, ts, seed);
    let grid = engine::alpha_grid();
    let mut rows = Vec::new();
    let roots: Vec<(Method, Vec<(f64, f64)>)> = methods.iter().map(|m| (*m, method_roots(*m, proc, n, &grid))).collect();
    for (t, e) in ts.iter().zip(&est) {
        for (m, r) in &roots {
            let Ok(b) = best_bound(*m, r, n, *t, &c) else { continue };
            rows.push(DominanceRow {
                scenario: scenario.to_string(),
                n,
                t: *t,
                method: m.name().to_string(),
                log_bound: b.log_bound,
                empirical: e.point,
                ci_high: e.ci_high,
                dominated: b.trivial || e.ci_high <= b.log_bound.exp(),
            });
        }
    }
    Ok((rows, est))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_tail_is_binomial() {
        let q = TailQuery {
            proc: ProcessSpec::IndependentProduct { dists: vec![Dist::uniform(vec![-1, 1]).unwrap()] },
            n: 10,
            f: Functional::FractionPositive,
            center: Center::Constant(0.5),
            t: 0.3,
        };
        let e = exact_tail(&q).unwrap();
        assert!((e.prob - 112.0 / 1024.0).abs() < 1e-15);
        assert_eq!(exact_tail(&TailQuery { t: 0.0, ..q.clone() }).unwrap().prob, 1.0);
    }

    #[test]
    fn walk_endpoint_beyond_range() {
        let q = TailQuery {
            proc: ProcessSpec::Ssrw,
            n: 10,
            f: Functional::NormalizedEndpoint,
            center: Center::ProductMean,
            t: 0.6,
        };
        assert_eq!(exact_tail(&q).unwrap().prob, 0.0);
    }

    #[test]
    fn walk_parity() {
        let mut rng = stream(7, 0);
        for n in [1usize, 2, 7, 10, 65] {
            for _ in 0..50 {
                let p = sample_path(&ProcessSpec::Ssrw, n, &mut rng).unwrap();
                assert_eq!((p[n - 1] - n as i64).rem_euclid(2), 0);
            }
        }
    }

    #[test]
    fn clopper_pearson_edges() {
        let (lo, hi) = clopper_pearson(0, 1000, 0.01);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.005f64.powf(1.0 / 1000.0))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(1000, 1000, 0.01);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0 && lo > 0.99);
    }

    #[test]
    fn certificates() {
        let margs = ProcessSpec::Ssrw.marginals(6).unwrap();
        assert_eq!(Functional::FractionPositive.certificate(&margs), vec![1.0 / 6.0; 6]);
        let c = Functional::NormalizedEndpoint.certificate(&margs);
        assert_eq!(c[5], 1.0);
        let m2 = ProcessSpec::fair_coins().marginals(5).unwrap();
        let c = Functional::FractionAgree.certificate(&m2);
        assert_eq!(c, vec![0.25, 0.5, 0.5, 0.5, 0.25]);
    }

    #[test]
    fn reproducible() {
        let a = sample_functional(&ProcessSpec::nonmarkov(), 20, Functional::FractionPositive, 3000, 11).unwrap();
        let b = sample_functional(&ProcessSpec::nonmarkov(), 20, Functional::FractionPositive, 3000, 11).unwrap();
        assert_eq!(a, b);
    }
}
