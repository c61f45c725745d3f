//! Markov kernels on finite or integer state spaces.
//!
//! A kernel acts on measures from the right (`mu K`) and on functions from the
//! left (`(K f)(x) = sum_y K(y|x) f(y)`).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, Dist, LogAcc};

const ROW_TOL: f64 = 1e-12;

/// Finite row-stochastic matrix; `p[x][y] = K(states[y] | states[x])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixKernel {
    pub states: Vec<i64>,
    pub p: Vec<Vec<f64>>,
}

/// Rule-defined kernels on a countable state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    /// `x -> x + 1` or `x - 1` with probability one half each.
    SymmetricWalk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Matrix(MatrixKernel),
    Rule(RuleKind),
}

impl Kernel {
    pub fn from_rows(states: Vec<i64>, p: Vec<Vec<f64>>) -> Result<Self> {
        let k = states.len();
        if k == 0 {
            return Err(Error::InvalidKernel("empty state set".into()));
        }
        if states.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKernel("states must be strictly increasing".into()));
        }
        if p.len() != k || p.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidKernel(format!("matrix must be {k}x{k}")));
        }
        for (i, row) in p.iter().enumerate() {
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidKernel(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidKernel(format!("row {i} sums to {s}")));
            }
        }
        Ok(Kernel::Matrix(MatrixKernel { states, p }))
    }

    /// Binary kernel on `{0,1}` that keeps the current state with probability `stay`.
    pub fn binary_stay(stay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&stay) {
            return Err(Error::InvalidParam(format!("stay probability {stay} outside [0,1]")));
        }
        Kernel::from_rows(vec![0, 1], vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]])
    }

    /// Binary symmetric kernel on `{0,1}` that flips the state with probability `lambda`.
    pub fn binary_flip(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParam(format!("flip probability {lambda} outside [0,1]")));
        }
        Kernel::binary_stay(1.0 - lambda)
    }

    pub fn identity(states: Vec<i64>) -> Result<Self> {
        let k = states.len();
        let p = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Kernel::from_rows(states, p)
    }

    pub fn ssrw() -> Self {
        Kernel::Rule(RuleKind::SymmetricWalk)
    }

    pub fn as_matrix(&self) -> Result<&MatrixKernel> {
        match self {
            Kernel::Matrix(m) => Ok(m),
            Kernel::Rule(_) => Err(Error::DomainMismatch("operation needs a finite matrix kernel".into())),
        }
    }

    /// Transition law out of state `x`.
    pub fn row(&self, x: i64) -> Result<Dist> {
        match self {
            Kernel::Matrix(m) => {
                let i = m.index(x)?;
                Dist::from_probs(m.states.clone(), &m.p[i])
            }
            Kernel::Rule(RuleKind::SymmetricWalk) => {
                Dist::from_probs(vec![x - 1, x + 1], &[0.5, 0.5])
            }
        }
    }
}

impl MatrixKernel {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index(&self, x: i64) -> Result<usize> {
        self.states
            .binary_search(&x)
            .map_err(|_| Error::DomainMismatch(format!("state {x} not in the kernel's state set")))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let k = self.len();
        DMatrix::from_fn(k, k, |i, j| self.p[i][j])
    }

    fn from_dmatrix(states: Vec<i64>, m: &DMatrix<f64>) -> Self {
        let k = states.len();
        let p = (0..k)
            .map(|i| {
                let row: Vec<f64> = (0..k).map(|j| m[(i, j)].max(0.0)).collect();
                let s: f64 = row.iter().sum();
                row.into_iter().map(|v| v / s).collect()
            })
            .collect();
        MatrixKernel { states, p }
    }

    /// Measure `mu` as a dense vector over this kernel's states.
    fn dense(&self, mu: &Dist) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.len()];
        for (s, l) in mu.iter() {
            if l == f64::NEG_INFINITY {
                if self.states.binary_search(&s).is_err() {
                    continue;
                }
            }
            v[self.index(s)?] = l.exp();
        }
        Ok(v)
    }
}

/// `mu K`, computed in log space.
pub fn apply_kernel(mu: &Dist, k: &Kernel) -> Result<Dist> {
    match k {
        Kernel::Matrix(m) => {
            let mut accs = vec![LogAcc::default(); m.len()];
            for (s, l) in mu.iter() {
                if l == f64::NEG_INFINITY && m.states.binary_search(&s).is_err() {
                    continue;
                }
                let i = m.index(s)?;
                if l == f64::NEG_INFINITY {
                    continue;
                }
                for (j, acc) in accs.iter_mut().enumerate() {
                    if m.p[i][j] > 0.0 {
                        acc.push(l + m.p[i][j].ln());
                    }
                }
            }
            let logw = accs.iter().map(|a| a.value()).collect();
            Dist::from_log_weights(m.states.clone(), logw)
        }
        Kernel::Rule(RuleKind::SymmetricWalk) => {
            let support = mu.support();
            let lo = support.first().copied().unwrap_or(0) - 1;
            let hi = support.last().copied().unwrap_or(0) + 1;
            let half = 0.5f64.ln();
            let mut states = Vec::new();
            let mut logw = Vec::new();
            for y in lo..=hi {
                let w = measures::log_add(mu.log_prob(y - 1), mu.log_prob(y + 1)) + half;
                if w > f64::NEG_INFINITY {
                    states.push(y);
                    logw.push(w);
                }
            }
            Dist::from_log_weights(states, logw)
        }
    }
}

/// `K^kappa` by repeated squaring.
pub fn k_step(k: &Kernel, kappa: u32) -> Result<Kernel> {
    let m = k.as_matrix()?;
    if kappa == 0 {
        return Kernel::identity(m.states.clone());
    }
    let mut base = m.to_dmatrix();
    let mut acc: Option<DMatrix<f64>> = None;
    let mut e = kappa;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => &a * &base,
            });
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    Ok(Kernel::Matrix(MatrixKernel::from_dmatrix(m.states.clone(), &acc.unwrap())))
}

/// Backward channel `K^<-(x | y) = K(y|x) mu(x) / (mu K)(y)`, as a kernel from `y` to `x`.
pub fn backward_channel(k: &Kernel, mu: &Dist) -> Result<Kernel> {
    let m = k.as_matrix()?;
    let w = m.dense(mu)?;
    let n = m.len();
    let out: Vec<f64> = (0..n).map(|y| (0..n).map(|x| w[x] * m.p[x][y]).sum()).collect();
    let mut p = vec![vec![0.0; n]; n];
    for y in 0..n {
        if out[y] <= 0.0 {
            return Err(Error::ZeroMassState { state: m.states[y] });
        }
        for x in 0..n {
            p[y][x] = m.p[x][y] * w[x] / out[y];
        }
        let s: f64 = p[y].iter().sum();
        p[y].iter_mut().for_each(|v| *v /= s);
    }
    Ok(Kernel::Matrix(MatrixKernel { states: m.states.clone(), p }))
}

/// Dobrushin coefficient: the largest total-variation distance between two rows.
pub fn dobrushin_tv(k: &Kernel) -> f64 {
    match k {
        Kernel::Matrix(m) => {
            let mut best: f64 = 0.0;
            for a in &m.p {
                for b in &m.p {
                    let tv = 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
                    best = best.max(tv);
                }
            }
            best.min(1.0)
        }
        // Rows from states four apart have disjoint supports.
        Kernel::Rule(RuleKind::SymmetricWalk) => 1.0,
    }
}

/// Result of the operator-norm search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Maximizing function over the kernel's states, scaled to unit input norm.
    pub maximizer: Vec<f64>,
    pub starts: usize,
    pub agreeing: usize,
}

/// Settings for the multi-start projected ascent.
#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub random_starts: usize,
    pub step_tol: f64,
    pub max_iter: usize,
    pub agree_tol: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions { random_starts: 32, step_tol: 1e-8, max_iter: 20_000, agree_tol: 1e-6, seed: 0x6b65726e }
    }
}

struct NormProblem {
    k: Vec<Vec<f64>>,
    rho: Vec<f64>,
    sigma: Vec<f64>,
    alpha: f64,
    gamma: f64,
}

impl NormProblem {
    fn kf(&self, f: &[f64]) -> Vec<f64> {
        self.k.iter().map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum()).collect()
    }

    fn log_in(&self, f: &[f64]) -> f64 {
        let s: f64 = self.sigma.iter().zip(f).map(|(s, v)| s * v.powf(self.gamma)).sum();
        s.ln() / self.gamma
    }

    fn log_out(&self, g: &[f64]) -> f64 {
        let s: f64 = self.rho.iter().zip(g).map(|(r, v)| r * v.powf(self.alpha)).sum();
        s.ln() / self.alpha
    }

    fn log_ratio(&self, f: &[f64]) -> f64 {
        self.log_out(&self.kf(f)) - self.log_in(f)
    }

    fn grad(&self, f: &[f64]) -> Vec<f64> {
        let g = self.kf(f);
        let so: f64 = self.rho.iter().zip(&g).map(|(r, v)| r * v.powf(self.alpha)).sum();
        let si: f64 = self.sigma.iter().zip(f).map(|(s, v)| s * v.powf(self.gamma)).sum();
        let n = f.len();
        (0..n)
            .map(|y| {
                let a: f64 = (0..self.rho.len())
                    .map(|x| self.rho[x] * g[x].powf(self.alpha - 1.0) * self.k[x][y])
                    .sum::<f64>()
                    / so;
                let b = self.sigma[y] * f[y].powf(self.gamma - 1.0) / si;
                a - b
            })
            .collect()
    }

    fn normalize(&self, f: &mut [f64]) -> bool {
        let l = self.log_in(f);
        if !l.is_finite() {
            return false;
        }
        let s = (-l).exp();
        f.iter_mut().for_each(|v| *v *= s);
        true
    }

    fn ascend(&self, mut f: Vec<f64>, opts: &AscentOptions) -> (f64, Vec<f64>) {
        if !self.normalize(&mut f) {
            return (f64::NEG_INFINITY, f);
        }
        let mut val = self.log_ratio(&f);
        let mut step = 1.0;
        for _ in 0..opts.max_iter {
            let g = self.grad(&f);
            let mut accepted = false;
            while step > 1e-16 {
                let mut cand: Vec<f64> = f.iter().zip(&g).map(|(a, b)| (a + step * b).max(0.0)).collect();
                if !self.normalize(&mut cand) {
                    step *= 0.5;
                    continue;
                }
                let cv = self.log_ratio(&cand);
                if cv.is_finite() && cv >= val {
                    let moved = cand.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    f = cand;
                    let gain = cv - val;
                    val = cv;
                    accepted = true;
                    step *= 2.0;
                    if moved < opts.step_tol || gain < 1e-16 {
                        return (val, f);
                    }
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (val, f)
    }
}

/// `||K||_{alpha -> gamma}`: the largest ratio `||K f||_{L^alpha(mu)} / ||f||_{L^gamma(mu K)}`.
///
/// At a stationary `mu` both norms use the same measure. The search runs
/// projected gradient ascent over nonnegative `f` (a positive operator attains
/// its norm there) from seeded random starts plus every subset indicator when
/// there are at most four states. `gamma = 1`, `gamma = inf` and `alpha = inf`
/// are solved in closed form.
pub fn operator_norm(k: &Kernel, mu: &Dist, alpha: f64, gamma: f64) -> Result<NormEstimate> {
    operator_norm_with(k, mu, alpha, gamma, &AscentOptions::default())
}

pub fn operator_norm_with(
    k: &Kernel,
    mu: &Dist,
    alpha: f64,
    gamma: f64,
    opts: &AscentOptions,
) -> Result<NormEstimate> {
    if !(alpha >= 1.0) || !(gamma >= 1.0) {
        return Err(Error::InvalidParam("norm exponents must be at least 1".into()));
    }
    let m = k.as_matrix()?;
    let w = m.dense(mu)?;
    let n = m.len();
    for (i, &wi) in w.iter().enumerate() {
        if wi <= 0.0 {
            return Err(Error::ZeroMassState { state: m.states[i] });
        }
    }
    let sigma: Vec<f64> = (0..n).map(|y| (0..n).map(|x| w[x] * m.p[x][y]).sum()).collect();
    // Outputs with no mass under mu K do not affect K f on supp(mu).
    let cols: Vec<usize> = (0..n).filter(|&y| sigma[y] > 0.0).collect();
    let prob = NormProblem {
        k: m.p.iter().map(|row| cols.iter().map(|&y| row[y]).collect()).collect(),
        rho: w.clone(),
        sigma: cols.iter().map(|&y| sigma[y]).collect(),
        alpha,
        gamma,
    };
    let embed = |f: &[f64]| {
        let mut full = vec![0.0; n];
        for (v, &y) in f.iter().zip(&cols) {
            full[y] = *v;
        }
        full
    };
    let c = cols.len();

    if gamma.is_infinite() {
        return Ok(NormEstimate { value: 1.0, maximizer: vec![1.0; n], starts: 1, agreeing: 1 });
    }
    if alpha.is_infinite() {
        // Dual form: max_x || K(.|x) / sigma ||_{L^{gamma'}(sigma)}.
        let gbar = crate::conjugate(gamma);
        let mut best = (f64::NEG_INFINITY, 0usize);
        for x in 0..n {
            let ratios: Vec<f64> = (0..c).map(|j| prob.k[x][j] / prob.sigma[j]).collect();
            let v = if gbar.is_infinite() {
                ratios.iter().copied().fold(0.0, f64::max).ln()
            } else {
                let s: f64 = (0..c).map(|j| prob.sigma[j] * ratios[j].powf(gbar)).sum();
                s.ln() / gbar
            };
            if v > best.0 {
                best = (v, x);
            }
        }
        let x = best.1;
        let f: Vec<f64> = if gbar.is_infinite() {
            let j = (0..c).max_by(|&a, &b| prob.k[x][a].total_cmp(&prob.k[x][b])).unwrap();
            let mut f = vec![0.0; c];
            f[j] = 1.0;
            f
        } else {
            (0..c).map(|j| (prob.k[x][j] / prob.sigma[j]).powf(gbar - 1.0)).collect()
        };
        let mut f = f;
        prob.normalize(&mut f);
        return Ok(NormEstimate { value: best.0.exp().max(1.0), maximizer: embed(&f), starts: 1, agreeing: 1 });
    }
    if gamma == 1.0 {
        // A convex ratio over the L^1 simplex peaks at a vertex.
        let mut best = (0.0f64, 0usize);
        for j in 0..c {
            let mut f = vec![0.0; c];
            f[j] = 1.0 / prob.sigma[j];
            let v = prob.log_ratio(&f).exp();
            if v > best.0 {
                best = (v, j);
            }
        }
        let mut f = vec![0.0; c];
        f[best.1] = 1.0 / prob.sigma[best.1];
        return Ok(NormEstimate { value: best.0.max(1.0), maximizer: embed(&f), starts: c, agreeing: 1 });
    }

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if c <= 4 {
        for mask in 1u32..(1 << c) {
            starts.push((0..c).map(|j| if mask >> j & 1 == 1 { 1.0 } else { 0.0 }).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push((0..c).map(|_| rng.random::<f64>().powi(2) + 1e-3).collect());
    }
    let mut results: Vec<(f64, Vec<f64>)> = starts.into_iter().map(|s| prob.ascend(s, opts)).collect();
    // The constant function always gives ratio exactly 1.
    results.push((0.0, vec![1.0; c]));
    results.sort_by(|a, b| b.0.total_cmp(&a.0));
    let best = results[0].0;
    let agreeing = results.iter().filter(|r| (r.0.exp() - best.exp()).abs() <= opts.agree_tol).count();
    let total = results.len();
    if agreeing < 2 {
        return Err(Error::ConvergenceFailure { best: best.exp(), runner_up: results[1].0.exp() });
    }
    let mut f = results.swap_remove(0).1;
    prob.normalize(&mut f);
    Ok(NormEstimate { value: best.exp().max(1.0), maximizer: embed(&f), starts: total, agreeing })
}

/// Smallest `gamma` in `[1, alpha]` with `||K||_{alpha -> gamma} <= 1`, by bisection on `gamma`.
pub fn hypercontractive_gamma(k: &Kernel, mu: &Dist, alpha: f64, tol: f64) -> Result<f64> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(Error::InvalidParam("bisection needs a finite alpha > 1".into()));
    }
    let within = |g: f64| -> Result<bool> { Ok(operator_norm(k, mu, alpha, g)?.value <= 1.0 + 1e-9) };
    if within(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, alpha);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if within(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hypercontractivity exponent of the binary symmetric kernel with flip
/// probability `lambda` under the uniform law: `1 + (1 - 2 lambda)^2 (alpha - 1)`.
pub fn dsbs_gamma_star(lambda: f64, alpha: f64) -> f64 {
    1.0 + (1.0 - 2.0 * lambda).powi(2) * (alpha - 1.0)
}

/// Closed-form upper bound on the Renyi point-mass contraction ratio of the
/// binary symmetric kernel: `(1-2l)^(1+1/a) / (1-l)^((a-1)/a)`.
pub fn dsbs_renyi_sdpi_rhs(lambda: f64, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return (1.0 - 2.0 * lambda) / (1.0 - lambda);
    }
    (1.0 - 2.0 * lambda).powf(1.0 + 1.0 / alpha) / (1.0 - lambda).powf((alpha - 1.0) / alpha)
}

/// Spectral summary of a finite kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelAnalysis {
    pub eta_tv: f64,
    /// Second-largest eigenvalue (second singular value when not reversible).
    pub second_eigenvalue: f64,
    pub absolute_gap: f64,
    pub eigenvalues: Vec<f64>,
    pub stationary: Vec<f64>,
    pub reversible: bool,
    /// Set when the kernel is not reversible and singular values replaced eigenvalues.
    pub singular_value_fallback: bool,
    /// Flip probability when the kernel is binary symmetric; enables the closed-form exponent.
    pub dsbs_lambda: Option<f64>,
}

impl KernelAnalysis {
    /// Hypercontractivity exponent, available in closed form for binary symmetric kernels.
    pub fn gamma_star(&self, alpha: f64) -> Option<f64> {
        self.dsbs_lambda.map(|l| dsbs_gamma_star(l.min(1.0 - l), alpha))
    }
}

/// Stationary law of a finite kernel.
pub fn stationary(k: &Kernel) -> Result<Vec<f64>> {
    let m = k.as_matrix()?;
    let n = m.len();
    let mut a = m.to_dmatrix().transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.lu();
    if lu.determinant().abs() < 1e-12 {
        let doubly = (0..n).all(|y| ((0..n).map(|x| m.p[x][y]).sum::<f64>() - 1.0).abs() < 1e-10);
        if doubly {
            return Ok(vec![1.0 / n as f64; n]);
        }
        return Err(Error::NoStationary);
    }
    let pi = lu.solve(&b).ok_or(Error::NoStationary)?;
    if pi.iter().any(|v| *v < -1e-12) {
        return Err(Error::NoStationary);
    }
    let s: f64 = pi.iter().map(|v| v.max(0.0)).sum();
    Ok(pi.iter().map(|v| v.max(0.0) / s).collect())
}

pub fn stationary_dist(k: &Kernel) -> Result<Dist> {
    let m = k.as_matrix()?;
    let pi = stationary(k)?;
    let logw = pi.iter().map(|p| p.ln()).collect();
    Dist::from_log_weights(m.states.clone(), logw)
}

fn is_reversible(m: &MatrixKernel, pi: &[f64]) -> bool {
    let n = m.len();
    (0..n).all(|x| (0..n).all(|y| (pi[x] * m.p[x][y] - pi[y] * m.p[y][x]).abs() <= 1e-10))
}

/// Eigen-analysis through the symmetrization `D^{1/2} K D^{-1/2}`.
pub fn spectral(k: &Kernel) -> Result<KernelAnalysis> {
    let m = k.as_matrix()?;
    let n = m.len();
    let pi = stationary(k)?;
    let reversible = pi.iter().all(|p| *p > 0.0) && is_reversible(m, &pi);
    let s = if pi.iter().all(|p| *p > 0.0) {
        DMatrix::from_fn(n, n, |x, y| (pi[x] / pi[y]).sqrt() * m.p[x][y])
    } else {
        m.to_dmatrix()
    };
    let (mut vals, fallback) = if reversible {
        let sym = (&s + s.transpose()) * 0.5;
        (sym.symmetric_eigen().eigenvalues.iter().copied().collect::<Vec<f64>>(), false)
    } else {
        (s.svd(false, false).singular_values.iter().copied().collect::<Vec<f64>>(), true)
    };
    vals.sort_by(|a, b| b.total_cmp(a));
    let second = if n > 1 { vals[1] } else { 0.0 };
    let max_abs = vals.iter().skip(1).map(|v| v.abs()).fold(0.0, f64::max);
    let dsbs_lambda = (n == 2
        && (m.p[0][1] - m.p[1][0]).abs() < 1e-15
        && (m.p[0][0] - m.p[1][1]).abs() < 1e-15)
        .then_some(m.p[0][1]);
    Ok(KernelAnalysis {
        eta_tv: dobrushin_tv(k),
        second_eigenvalue: second,
        absolute_gap: (1.0 - max_abs).clamp(0.0, 1.0),
        eigenvalues: vals,
        stationary: pi,
        reversible,
        singular_value_fallback: fallback,
        dsbs_lambda,
    })
}

/// Largest ratio `D_alpha(delta_x K || mu K) / D_alpha(delta_x || mu)` over
/// states with `0 < mu(x) < 1`, with the maximizing state (ties to the smallest label).
pub fn renyi_sdpi_delta_ratio(k: &Kernel, mu: &Dist, alpha: f64) -> Result<(f64, i64)> {
    let m = k.as_matrix()?;
    let out = apply_kernel(mu, k)?;
    let mut best = (0.0, m.states[0]);
    let mut seen = false;
    for (x, lp) in mu.iter() {
        if lp == f64::NEG_INFINITY || lp >= 0.0 {
            continue;
        }
        let d = measures::renyi_divergence(&k.row(x)?, &out, alpha)?;
        let r = d / -lp;
        if !seen || r > best.0 {
            best = (r, x);
            seen = true;
        }
    }
    Ok(best)
}

/// Grid estimate of the KL contraction coefficient `sup D(nu K||mu K)/D(nu||mu)`,
/// scanning `nu = (1-s) mu + s delta_x` for each state and each `s` on the grid.
pub fn kl_sdpi_grid(k: &Kernel, mu: &Dist, grid: &[f64]) -> Result<f64> {
    let m = k.as_matrix()?;
    let w = m.dense(mu)?;
    let out = apply_kernel(mu, k)?;
    let mut best: f64 = 0.0;
    for x in 0..m.len() {
        for &s in grid {
            if !(s > 0.0 && s <= 1.0) {
                continue;
            }
            let probs: Vec<f64> = w.iter().enumerate().map(|(i, p)| (1.0 - s) * p + if i == x { s } else { 0.0 }).collect();
            let nu = Dist::from_log_weights(m.states.clone(), probs.iter().map(|p| p.ln()).collect())?;
            let den = measures::kl_divergence(&nu, mu);
            if den <= 1e-300 {
                continue;
            }
            let num = measures::kl_divergence(&apply_kernel(&nu, k)?, &out);
            best = best.max(num / den);
        }
    }
    Ok(best)
}

fn parse_prob(s: &str) -> Result<f64> {
    use num_traits::ToPrimitive;
    let r = measures::exact::parse_rational(s)?;
    r.to_f64().ok_or_else(|| Error::Parse(format!("cannot convert {s:?}")))
}

/// Read a square kernel from CSV: a header of state labels, then one row per state.
pub fn kernel_from_csv(text: &str) -> Result<Kernel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let states = headers
        .iter()
        .map(|h| h.parse::<i64>().map_err(|_| Error::Parse(format!("state label {h:?} is not an integer"))))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec.iter().map(parse_prob).collect::<Result<Vec<_>>>()?);
    }
    sorted_kernel(states, rows)
}

fn sorted_kernel(states: Vec<i64>, rows: Vec<Vec<f64>>) -> Result<Kernel> {
    let k = states.len();
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidKernel(format!("expected a {k}x{k} matrix")));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| states[i]);
    let s: Vec<i64> = order.iter().map(|&i| states[i]).collect();
    let p = order.iter().map(|&i| order.iter().map(|&j| rows[i][j]).collect()).collect();
    Kernel::from_rows(s, p)
}

pub fn kernel_to_csv(k: &Kernel) -> Result<String> {
    let m = k.as_matrix()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(m.states.iter().map(|s| s.to_string()))?;
    for row in &m.p {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
        .map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelJson {
    states: Vec<i64>,
    rows: Vec<Vec<serde_json::Value>>,
}

/// Read a kernel from JSON `{"states": [...], "rows": [[...], ...]}`; entries
/// may be numbers or rational strings.
pub fn kernel_from_json(text: &str) -> Result<Kernel> {
    let kj: KernelJson = serde_json::from_str(text)?;
    let rows = kj
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| match v {
                    serde_json::Value::Number(x) => x.as_f64().ok_or_else(|| Error::Parse("bad number".into())),
                    serde_json::Value::String(s) => parse_prob(s),
                    _ => Err(Error::Parse("kernel entries must be numbers or strings".into())),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    sorted_kernel(kj.states, rows)
}
