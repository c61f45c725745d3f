//! One function per subcommand. Each returns a report object and the
//! manifest entries specific to the run.

use clap::Args;
use depbound::baselines::{self, CrossoverScenario, Pair};
use depbound::engine::{
    self, BoundParams, BoundReport, Centering, EtaChoice, GammaChoice, Route,
};
use depbound::harness::{self, Center, Functional, Method};
use depbound::kernels;
use depbound::measures::exact::{self, RatDist};
use depbound::measures::{self, DivergenceKind};
use depbound::scenarios::{self, PRule, ProcessSpec};
use depbound::tensorize::{self, HolderSchedule};
use depbound::{conjugate, Dist, Error};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::parse::{self, AlphaSpec, ScenarioArgs};
use crate::{emit, CliError, Format, Outcome, Report};

type Res = std::result::Result<Outcome, CliError>;

pub const DIVERGENCE_HELP: &str = "\
Formulas:
  Hellinger integral      H_a(nu||mu) = sum mu (nu/mu)^a; at a = inf the largest ratio nu/mu
  Renyi divergence        D_a = ln H_a / (a - 1)
  Kullback-Leibler        sum nu ln(nu/mu)
  total variation         (1/2) sum |nu - mu|
  chi-square              H_2 - 1
Rational inputs (\"1/3,2/3\") give exact values for integer orders, chi-square and TV.";

pub const KERNEL_HELP: &str = "\
Formulas:
  Dobrushin coefficient        max over row pairs of their total variation distance
  spectral summary             stationary law, second eigenvalue, absolute spectral gap
  backward channel             K<-(x|y) = K(y|x) mu(x) / (mu K)(y)
  backward-channel norm        ||K<-||_{alpha -> gamma} from L^gamma(mu K) to L^alpha(mu), multi-start ascent
  hypercontractive exponent    smallest gamma with norm <= 1: closed form for binary symmetric kernels,
                               bisection on the norm otherwise
  Renyi SDPI point-mass ratio  max over x of D_a(delta_x K || mu K) / D_a(delta_x || mu)";

pub const TENSOR_HELP: &str = "\
Formulas:
  exact joint Hellinger integral    ln H_a(P_{X^n} || P_{X_1} x ... x P_{X_n}) by path enumeration (n small)
  Hoelder tensorisation, upper      product of per-step maxima of conditional Hellinger integrals
  Hoelder tensorisation, lower      same with minima and exponents below one
  geometric schedule                alpha_i = 1 + 2^-i (upper), 1 - 2^-(i+1) (lower)
  Renyi chain-rule sum              per-step Renyi divergences of conditionals from marginals";

pub const BOUND_HELP: &str = "\
Formulas:
  dependent McDiarmid bound     ln P(|f - E_prod f| >= t) <= (1/beta) ln 2 - 2 t^2 / (beta sum c_i^2) + (1/alpha) ln H_alpha
  binary-chain closed form      (1/alpha) ln H <= ((n-1)/beta) ln(2 kappa_alpha(lambda))
  walk closed form              log2 H^(1/alpha) <= n(n-1)/(2 beta)
  past-dependent closed form    (1/alpha) ln H <= (n-1) ln 2
  hypercontractive route        sum of ln ||K_i<-||_{alpha -> gamma} - min ln P_i / gamma'
  SDPI route                    -(1/beta) sum eta_i min ln P_(i-1)
  mean-gap recentring           |E f - E_prod f| <= t_alpha + 2^(1/beta) beta sum c_i^2 / (4 t_alpha)
  median recentring             ln 2 - 2 (t - r_0)^2 / sum c_i^2 + C_n
Routes: auto | closed-form | exact | tensor | hyper | sdpi. --alpha accepts a number, inf, or opt.
--t accepts a number, sqrt_n, or <k>*sqrt_n.";

pub const COMPARE_HELP: &str = "\
Formulas:
  Kontorovich-Ramanan bound     ln 2 - n t^2 / (2 M_n^2), M_n from the Dobrushin coefficients
  Fan-Jiang-Sun Hoeffding bound  Hoeffding exponent scaled by (1 - lambda)/(1 + lambda), lambda = 1 - spectral gap
  Marton blow-up bound          median-centred, t - sqrt(ln(1/P(E)) / n) / a in the exponent
  crossover threshold           t_bar beyond which this method's log bound is smaller
Pairs: ours-vs-kontorovich, ours-vs-fan, ours-vs-marton (binary scenario);
ours-vs-fan-general, ours-vs-kontorovich-general (any finite chain); all.
CSV columns: pair,n,alpha,t,t_bar,ours_log_bound,theirs_log_bound,ours_smaller.";

pub const SIMULATE_HELP: &str = "\
Formulas:
  empirical tail            hits / samples for |f - E_prod f| >= t
  Clopper-Pearson interval  exact two-sided 99% binomial interval via the regularized incomplete beta
  bound dominance           ci_high <= exp(log bound) for every non-trivial bound
Functionals: fraction-positive, normalized-endpoint, fraction-agree.
CSV columns: scenario,n,t,method,log_bound,empirical,ci_high,dominated.";

pub const ORACLE_HELP: &str = "\
Formulas:
  exact joint Hellinger integral   by path enumeration (at most 2^22 paths)
  tensorisation sandwich           lower <= exact <= upper, with the maximizing and minimizing states
  exact tail                       P(|f - center| >= t) under the joint law, with joint mean, product mean, median";

pub const MCMC_HELP: &str = "\
Formulas:
  burn-in bound            -2 n t^2 / (beta (b-a)^2) + (1/alpha) ln H_alpha(nu K^n0 || pi)
                           + (n-1) max_x (1/alpha) ln H_alpha(K(.|x) || pi)
  spectral-gap bound       (1/alpha) ln H_alpha(nu K^n0 || pi) - rho 2 n t^2 / (beta (b-a)^2),
                           rho = (1 - lambda)/(1 + lambda)
  minimal burn-in          smallest n0 with burn-in bound <= --target";

fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn object<T: Serialize>(v: &T) -> Map<String, Value> {
    match emit::to_value(v).expect("report types serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    }
}

fn json_only(obj: Map<String, Value>) -> Res {
    Ok(Outcome { report: Report::Json(obj), extra: Map::new() })
}

// ---------------------------------------------------------------- divergence

#[derive(Args, Debug, Serialize)]
pub struct DivergenceArgs {
    /// hellinger | renyi | kl | tv | chi2
    #[arg(long, default_value = "hellinger")]
    pub kind: String,
    /// Order for hellinger and renyi: a number or inf.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    /// First law: masses on states 0..k-1, as "a/b" or decimals.
    #[arg(long)]
    pub nu: String,
    /// Reference law on the same states.
    #[arg(long)]
    pub mu: String,
}

fn shown(r: &impl std::fmt::Display, v: f64) -> String {
    format!("{r} \u{2248} {v:.4}")
}

pub fn divergence(a: &DivergenceArgs) -> Res {
    let nu_s = parse::list(&a.nu);
    let mu_s = parse::list(&a.mu);
    let exact_pair = RatDist::parse_on_range(&nu_s).ok().zip(RatDist::parse_on_range(&mu_s).ok());
    let (nu, mu) = match &exact_pair {
        Some((x, y)) => (x.to_dist(), y.to_dist()),
        None => (Dist::on_range(&parse::f64_list(&a.nu)?)?, Dist::on_range(&parse::f64_list(&a.mu)?)?),
    };
    let mut out = Map::new();
    out.insert("kind".into(), json!(a.kind));
    match a.kind.as_str() {
        "hellinger" => {
            let al = parse::alpha(&a.alpha)?;
            let h = measures::hellinger_integral(&nu, &mu, al)?;
            out.insert("alpha".into(), jnum(al));
            out.insert("log_value".into(), jnum(h.0));
            out.insert("value".into(), jnum(h.exp()));
            let key = if al.is_infinite() { "max_ratio" } else { "H_alpha" };
            let exact_val = match &exact_pair {
                Some((x, y)) if al.fract() == 0.0 && (1.0..=64.0).contains(&al) => {
                    Some(exact::hellinger_integer_order(x, y, al as u32)?)
                }
                _ => None,
            };
            match exact_val {
                Some(r) if exact::is_displayable(&r) => {
                    out.insert("exact".into(), json!(r.to_string()));
                    out.insert(key.into(), json!(shown(&r, h.exp())));
                }
                _ => {
                    out.insert(key.into(), jnum(h.exp()));
                }
            }
        }
        "renyi" => {
            let al = parse::alpha(&a.alpha)?;
            let d = measures::phi_divergence(&DivergenceKind::Renyi(al), &nu, &mu)?;
            out.insert("alpha".into(), jnum(al));
            out.insert("D_alpha".into(), jnum(d));
            out.insert("value".into(), jnum(d));
        }
        "kl" => {
            let d = measures::phi_divergence(&DivergenceKind::Kl, &nu, &mu)?;
            out.insert("KL".into(), jnum(d));
            out.insert("value".into(), jnum(d));
        }
        "tv" => {
            let d = measures::phi_divergence(&DivergenceKind::Tv, &nu, &mu)?;
            out.insert("value".into(), jnum(d));
            match &exact_pair {
                Some((x, y)) => {
                    let r = exact::tv_exact(x, y);
                    out.insert("exact".into(), json!(r.to_string()));
                    out.insert("TV".into(), json!(shown(&r, d)));
                }
                None => {
                    out.insert("TV".into(), jnum(d));
                }
            }
        }
        "chi2" => {
            let d = measures::phi_divergence(&DivergenceKind::Chi2, &nu, &mu)?;
            out.insert("value".into(), jnum(d));
            match &exact_pair {
                Some((x, y)) => {
                    let r = exact::chi2_exact(x, y)?;
                    out.insert("exact".into(), json!(r.to_string()));
                    out.insert("chi2".into(), json!(shown(&r, d)));
                }
                None => {
                    out.insert("chi2".into(), jnum(d));
                }
            }
        }
        other => return Err(CliError::validation(format!("unknown divergence kind {other:?}"))),
    }
    json_only(out)
}

// ---------------------------------------------------------------- kernel

#[derive(Args, Debug, Serialize)]
pub struct KernelArgs {
    /// flip:<p>, stay:<p>, rows:<r0>;<r1>;... on states 0..k-1, or a CSV/JSON file.
    #[arg(long)]
    pub kernel: String,
    /// Input law on the kernel's states (default: stationary).
    #[arg(long)]
    pub mu: Option<String>,
    /// Order alpha: a number or inf.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    /// Input exponent gamma of the backward-channel norm (default: alpha).
    #[arg(long)]
    pub gamma: Option<String>,
    /// Analyse the power K^power.
    #[arg(long, default_value_t = 1)]
    pub power: u32,
}

pub fn kernel(a: &KernelArgs) -> Res {
    if a.power == 0 {
        return Err(CliError::validation("--power must be at least 1"));
    }
    let k1 = parse::kernel(&a.kernel)?;
    let k = if a.power > 1 { kernels::k_step(&k1, a.power)? } else { k1 };
    let mu = parse::law_on(&k, a.mu.as_deref())?;
    let al = parse::alpha(&a.alpha)?;
    let m = k.as_matrix()?;
    let spec = kernels::spectral(&k)?;
    let out_law = kernels::apply_kernel(&mu, &k)?;
    let back = kernels::backward_channel(&k, &mu)?;
    let mut out = Map::new();
    out.insert("states".into(), json!(m.states));
    out.insert("rows".into(), json!(m.p));
    out.insert("eta_tv".into(), jnum(kernels::dobrushin_tv(&k)));
    out.insert("spectral".into(), emit::to_value(&spec).expect("serializes"));
    out.insert("input_law".into(), json!(mu.probs()));
    out.insert("output_law".into(), json!(out_law.probs()));
    out.insert("backward_channel".into(), json!(back.as_matrix()?.p));
    out.insert("alpha".into(), jnum(al));
    if al.is_finite() {
        let gamma = match &a.gamma {
            Some(g) => parse::alpha(g)?,
            None => al,
        };
        let norm = kernels::operator_norm(&back, &out_law, al, gamma)?;
        out.insert("gamma".into(), jnum(gamma));
        out.insert("norm".into(), emit::to_value(&norm).expect("serializes"));
        out.insert("gamma_bisection".into(), jnum(kernels::hypercontractive_gamma(&back, &out_law, al, 1e-6)?));
        if let Some(g) = spec.gamma_star(al) {
            out.insert("gamma_closed_form".into(), jnum(g));
        }
    }
    let (eta, arg) = kernels::renyi_sdpi_delta_ratio(&k, &mu, al)?;
    out.insert("sdpi_delta_ratio".into(), json!({ "eta": jnum(eta), "argmax_state": arg }));
    json_only(out)
}

// ---------------------------------------------------------------- tensor

#[derive(Args, Debug, Serialize)]
pub struct TensorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Order alpha: a number or inf.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    /// limit | geometric | comma list alpha_1..alpha_(n-1) for the upper bound.
    #[arg(long, default_value = "limit")]
    pub schedule: String,
}

fn log2_root(log_h: f64, alpha: f64) -> f64 {
    engine::root_of(depbound::LogValue(log_h), alpha) / std::f64::consts::LN_2
}

pub fn tensor(a: &TensorArgs) -> Res {
    let sc = a.scenario.build()?;
    let al = parse::alpha(&a.alpha)?;
    let n = a.n;
    if n < 2 {
        return Err(CliError::validation("--n must be at least 2"));
    }
    let (up_s, lo_s) = match a.schedule.as_str() {
        "limit" => (HolderSchedule::limit(n), HolderSchedule::limit(n)),
        "geometric" => (HolderSchedule::geometric(n), HolderSchedule::geometric_lower(n)),
        list => (HolderSchedule::custom(parse::f64_list(list)?), HolderSchedule::limit(n)),
    };
    let mut out = Map::new();
    out.insert("scenario".into(), json!(sc.name));
    out.insert("n".into(), json!(n));
    out.insert("alpha".into(), jnum(al));
    match tensorize::exact_joint_hellinger(&sc.proc, n, al) {
        Ok(h) => {
            out.insert("exact_log_h".into(), jnum(h.0));
            out.insert("exact_log2_root".into(), jnum(log2_root(h.0, al)));
        }
        Err(Error::TooLarge { count, .. }) => {
            out.insert("exact_log_h".into(), Value::Null);
            out.insert("exact_skipped".into(), json!(format!("{count} paths exceed the enumeration cap")));
        }
        Err(e) => return Err(e.into()),
    }
    let (up, lo) = if sc.proc.is_markov() {
        (
            tensorize::tensor_upper_markov(&sc.proc, n, al, &up_s)?.0,
            tensorize::tensor_lower_markov(&sc.proc, n, al, &lo_s)?.0,
        )
    } else {
        out.insert("note".into(), json!("past-dependent process: maxima over whole prefixes, limit schedule"));
        (tensorize::tensor_upper_general(&sc.proc, n, al)?.0, tensorize::tensor_lower_general(&sc.proc, n, al)?.0)
    };
    out.insert("upper_log_h".into(), jnum(up));
    out.insert("lower_log_h".into(), jnum(lo));
    out.insert("upper_log2_root".into(), jnum(log2_root(up, al)));
    out.insert("lower_log2_root".into(), jnum(log2_root(lo, al)));
    if sc.proc.is_markov() {
        out.insert("renyi_sum".into(), jnum(tensorize::renyi_tensor_sum(&sc.proc, n, al, &up_s)?));
    }
    json_only(out)
}

// ---------------------------------------------------------------- bound

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Deviation t: a number, sqrt_n, or <k>*sqrt_n.
    #[arg(long, default_value = "sqrt_n")]
    pub t: String,
    /// Order alpha: a number, inf, or opt.
    #[arg(long, default_value = "inf")]
    pub alpha: String,
    /// auto | closed-form | exact | tensor | hyper | sdpi
    #[arg(long, default_value = "auto")]
    pub route: String,
    /// Hyper route exponent: contractive | star | bisection | <number>.
    #[arg(long, default_value = "star")]
    pub gamma: String,
    /// SDPI route coefficient: delta-ratio | dsbs | <number>.
    #[arg(long, default_value = "delta-ratio")]
    pub eta: String,
    /// product-mean | joint-mean | median
    #[arg(long, default_value = "product-mean")]
    pub centering: String,
    /// Bounded-difference constants c_1..c_n (default 1/n each).
    #[arg(long)]
    pub c: Option<String>,
}

fn route_of(a: &BoundArgs, sc: &parse::Scenario) -> Result<(String, Option<Route>), CliError> {
    let name = match a.route.as_str() {
        "auto" => match sc.proc {
            ProcessSpec::HomogeneousChain { .. } if sc.lambda.is_some() => "closed-form",
            ProcessSpec::Ssrw | ProcessSpec::NonMarkovBinary { rule: PRule::Geometric } => "closed-form",
            ProcessSpec::HomogeneousChain { .. } | ProcessSpec::InhomogeneousChain { .. } => "hyper",
            _ => "tensor",
        },
        other => other,
    };
    let route = match name {
        "closed-form" => None,
        "exact" => Some(Route::Exact),
        "tensor" => Some(Route::Tensor),
        "hyper" => Some(Route::Hyper(match a.gamma.as_str() {
            "contractive" => GammaChoice::Contractive,
            "star" => GammaChoice::Star,
            "bisection" => GammaChoice::Bisection,
            g => GammaChoice::Fixed(parse::alpha(g)?),
        })),
        "sdpi" => Some(Route::Sdpi(match a.eta.as_str() {
            "delta-ratio" => EtaChoice::DeltaRatio,
            "dsbs" => EtaChoice::DsbsClosedForm,
            e => EtaChoice::Fixed(depbound::measures::exact::parse_f64(e)?),
        })),
        other => return Err(CliError::validation(format!("unknown route {other:?}"))),
    };
    Ok((name.to_string(), route))
}

fn closed_form(sc: &parse::Scenario, params: &BoundParams) -> depbound::Result<BoundReport> {
    let (n, t, al) = (params.n, params.t, params.alpha);
    match (&sc.proc, sc.lambda) {
        (_, Some(l)) => scenarios::binary_chain_bound(l, n, t, al),
        (ProcessSpec::Ssrw, _) => scenarios::ssrw_bound(n, t, al, Centering::ProductMean),
        (ProcessSpec::NonMarkovBinary { rule: PRule::Geometric }, _) => {
            scenarios::nonmarkov_bound(n, t, Some(conjugate(al)))
        }
        _ => Err(Error::Unsupported(format!("no closed form for the {} scenario", sc.name))),
    }
}

pub fn bound(a: &BoundArgs, format: Format) -> Res {
    let sc = a.scenario.build()?;
    let n = a.n;
    let t = parse::deviation(&a.t, n)?;
    let c = a.c.as_deref().map(parse::f64_list).transpose()?;
    let (route_name, route) = route_of(a, &sc)?;
    if route.is_none() && c.is_some() {
        return Err(CliError::validation("closed forms use c_i = 1/n; pick a route to pass --c"));
    }
    let params_at = |al: f64, t: f64| -> depbound::Result<BoundParams> {
        let p = BoundParams::new(n, t, al)?;
        match &c {
            Some(c) => p.with_c(c.clone()),
            None => Ok(p),
        }
    };
    let product = |al: f64| -> depbound::Result<BoundReport> {
        let params = params_at(al, t)?;
        match route {
            None => closed_form(&sc, &params),
            Some(r) => engine::markov_chain_bound(&sc.proc, &params, r),
        }
    };
    let report = match a.centering.as_str() {
        "product-mean" => run_alpha(&a.alpha, &product)?,
        "joint-mean" => {
            let shifted = |al: f64| -> depbound::Result<BoundReport> {
                if route.is_none() && matches!(sc.proc, ProcessSpec::Ssrw) {
                    return scenarios::ssrw_bound(n, t, al, Centering::JointMean);
                }
                let r = product(al)?;
                let root = r.aux["root"];
                let params = params_at(al, t)?;
                let gap = engine::mean_gap_from_root(&params, root);
                let mut s = engine::mcdiarmid_dep_bound_root(&params_at(al, (t - gap).max(0.0))?, root, &r.method);
                s.params = params.record();
                s.threshold_t += gap;
                s.centering = Centering::JointMean;
                s.aux.extend(r.aux);
                s.aux.insert("mean_gap".into(), gap);
                s.notes.push("deviation reduced by the joint-vs-product mean gap bound".into());
                Ok(s)
            };
            run_alpha(&a.alpha, &shifted)?
        }
        "median" => {
            if c.is_some() {
                return Err(CliError::validation("the median bound uses c_i = 1/n"));
            }
            let mut r = engine::median_bound(&BoundParams::new(n, t, f64::INFINITY)?, engine::median_cn(&sc.proc, n)?)?;
            r.notes.push("median centring is evaluated at alpha = inf".into());
            r
        }
        other => return Err(CliError::validation(format!("unknown centering {other:?}"))),
    };
    let mut extra = Map::new();
    extra.insert("route".into(), json!(route_name));
    let report_out = match format {
        Format::Json => {
            let mut obj = object(&report);
            obj.insert("scenario".into(), json!(sc.name));
            obj.insert("route".into(), json!(route_name));
            Report::Json(obj)
        }
        Format::Csv => {
            let mut buf = Vec::new();
            baselines::write_comparison_csv(std::slice::from_ref(&report), &mut buf)?;
            Report::Csv(String::from_utf8(buf).expect("csv is UTF-8"))
        }
    };
    Ok(Outcome { report: report_out, extra })
}

fn run_alpha(spec: &str, f: &dyn Fn(f64) -> depbound::Result<BoundReport>) -> Result<BoundReport, CliError> {
    Ok(match parse::alpha_spec(spec)? {
        AlphaSpec::Fixed(al) => f(al)?,
        AlphaSpec::Opt => {
            let (_, mut r) = engine::optimize_alpha(f)?;
            r.notes.push("alpha minimized over the built-in grid".into());
            r
        }
    })
}

// ---------------------------------------------------------------- compare

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    /// Pair name, or `all`.
    #[arg(long, default_value = "ours-vs-fan")]
    pub pair: String,
    /// Order alpha: a number or inf.
    #[arg(long, default_value = "inf")]
    pub alpha: String,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Number of t values in the sweep.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Sweep start, as a multiple of t_bar.
    #[arg(long, default_value = "0.5")]
    pub from: String,
    /// Sweep end, as a multiple of t_bar.
    #[arg(long, default_value = "1.5")]
    pub to: String,
}

pub fn compare(a: &CompareArgs, format: Format) -> Res {
    let sc = a.scenario.build()?;
    let scen = match (&sc.proc, sc.lambda) {
        (_, Some(lambda)) => CrossoverScenario::Binary { lambda },
        (ProcessSpec::HomogeneousChain { init, kernel }, None) => {
            CrossoverScenario::Chain { init: init.clone(), kernel: kernel.clone() }
        }
        _ => return Err(CliError::validation("compare needs the binary or chain scenario")),
    };
    let al = parse::alpha(&a.alpha)?;
    let (from, to) = (exact::parse_f64(&a.from)?, exact::parse_f64(&a.to)?);
    if a.points == 0 || !(from > 0.0 && to >= from) {
        return Err(CliError::validation("need --points >= 1 and 0 < --from <= --to"));
    }
    let pairs: Vec<Pair> = if a.pair == "all" {
        match scen {
            CrossoverScenario::Binary { .. } => Pair::ALL.to_vec(),
            CrossoverScenario::Chain { .. } => vec![Pair::OursVsFanGeneral, Pair::OursVsKontorovichGeneral],
        }
    } else {
        vec![Pair::parse(&a.pair)?]
    };
    let mut crossovers = Vec::new();
    let mut skipped = Map::new();
    let mut rows: Vec<(Pair, f64, f64, f64, f64)> = Vec::new();
    for p in &pairs {
        let x = match baselines::crossover_threshold(*p, &scen, a.n, al) {
            Ok(x) => x,
            Err(e) if pairs.len() > 1 => {
                skipped.insert(p.name().into(), json!(e.to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for i in 0..a.points {
            let frac = if a.points == 1 { from } else { from + (to - from) * i as f64 / (a.points - 1) as f64 };
            let t = frac * x.t_bar;
            let (ours, theirs) = baselines::pair_logs(*p, &scen, a.n, t, al).unwrap_or((f64::NAN, f64::NAN));
            rows.push((*p, t, x.t_bar, ours, theirs));
        }
        crossovers.push(x);
    }
    let report = match format {
        Format::Csv => {
            let recs: Vec<Vec<String>> = rows
                .iter()
                .map(|(p, t, tb, o, th)| {
                    vec![
                        p.name().to_string(),
                        a.n.to_string(),
                        emit::num(al),
                        emit::num(*t),
                        emit::num(*tb),
                        emit::num(*o),
                        emit::num(*th),
                        (o < th).to_string(),
                    ]
                })
                .collect();
            let header =
                ["pair", "n", "alpha", "t", "t_bar", "ours_log_bound", "theirs_log_bound", "ours_smaller"];
            Report::Csv(emit::csv_string(&header, &recs))
        }
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("crossovers".into(), emit::to_value(&crossovers).expect("serializes"));
            let rv: Vec<Value> = rows
                .iter()
                .map(|(p, t, tb, o, th)| {
                    json!({ "pair": p.name(), "t": jnum(*t), "t_bar": jnum(*tb),
                            "ours_log_bound": jnum(*o), "theirs_log_bound": jnum(*th), "ours_smaller": o < th })
                })
                .collect();
            obj.insert("rows".into(), Value::Array(rv));
            if !skipped.is_empty() {
                obj.insert("skipped".into(), Value::Object(skipped.clone()));
            }
            Report::Json(obj)
        }
    };
    let mut extra = Map::new();
    if !skipped.is_empty() {
        extra.insert("skipped".into(), Value::Object(skipped));
    }
    Ok(Outcome { report, extra })
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// fraction-positive | normalized-endpoint | fraction-agree
    #[arg(long, default_value = "fraction-positive")]
    pub functional: String,
    /// Deviations t, comma-separated.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5")]
    pub t: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Seed; DEPBOUND_SEED takes precedence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn resolved_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var("DEPBOUND_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::validation(format!("DEPBOUND_SEED={s:?} is not a u64"))),
        Err(_) => Ok(flag),
    }
}

pub fn simulate(a: &SimulateArgs, format: Format) -> Res {
    let sc = a.scenario.build()?;
    let f = Functional::parse(&a.functional)?;
    let ts = parse::f64_list(&a.t)?;
    let seed = resolved_seed(a.seed)?;
    if a.samples < 1000 {
        return Err(CliError::validation("--samples must be at least 1000"));
    }
    let methods = harness::default_methods(&sc.proc, sc.lambda);
    let (rows, est) = harness::dominance_table(&sc.name, &sc.proc, a.n, f, &ts, &methods, a.samples, seed)?;
    let margs = sc.proc.marginals(a.n)?;
    let mut extra = Map::new();
    extra.insert("seed".into(), json!(seed));
    extra.insert("rng".into(), json!(harness::RNG_ALGORITHM));
    extra.insert("block".into(), json!(harness::BLOCK));
    let report = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            harness::write_dominance_csv(&rows, &mut buf)?;
            Report::Csv(String::from_utf8(buf).expect("csv is UTF-8"))
        }
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("rows".into(), emit::to_value(&rows).expect("serializes"));
            obj.insert("estimates".into(), emit::to_value(&est).expect("serializes"));
            obj.insert("t".into(), json!(ts));
            obj.insert("center".into(), jnum(f.product_mean(&margs)));
            obj.insert("certificate".into(), json!(f.certificate(&margs)));
            obj.insert("methods".into(), json!(methods.iter().map(Method::name).collect::<Vec<_>>()));
            Report::Json(obj)
        }
    };
    Ok(Outcome { report, extra })
}

// ---------------------------------------------------------------- oracle

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Order alpha: a number or inf.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    /// Also compute exact tails of this functional.
    #[arg(long)]
    pub functional: Option<String>,
    /// Deviations for the exact tails, comma-separated.
    #[arg(long, default_value = "0.1,0.2,0.3")]
    pub t: String,
    /// product-mean | joint-mean | median | <number>
    #[arg(long, default_value = "product-mean")]
    pub center: String,
}

pub fn oracle(a: &OracleArgs) -> Res {
    let sc = a.scenario.build()?;
    let al = parse::alpha(&a.alpha)?;
    let rep = tensorize::oracle_report(&sc.proc, a.n, al)?;
    let mut out = object(&rep);
    out.insert("scenario".into(), json!(sc.name));
    if let Some(fname) = &a.functional {
        let f = Functional::parse(fname)?;
        let center = match a.center.as_str() {
            "product-mean" => Center::ProductMean,
            "joint-mean" => Center::JointMean,
            "median" => Center::Median,
            v => Center::Constant(exact::parse_f64(v)?),
        };
        let ts = parse::f64_list(&a.t)?;
        let tails = harness::exact_tails(&sc.proc, a.n, f, center, &ts)?;
        let tv: Vec<Value> = ts
            .iter()
            .zip(&tails)
            .map(|(t, e)| {
                let mut m = object(e);
                m.insert("t".into(), jnum(*t));
                Value::Object(m)
            })
            .collect();
        out.insert("tails".into(), Value::Array(tv));
        out.insert("certificate".into(), json!(f.certificate(&sc.proc.marginals(a.n)?)));
    }
    json_only(out)
}

// ---------------------------------------------------------------- mcmc

#[derive(Args, Debug, Serialize)]
pub struct McmcArgs {
    /// flip:<p>, stay:<p>, rows:<r0>;<r1>;..., or a CSV/JSON file.
    #[arg(long)]
    pub kernel: String,
    /// Initial law on the kernel's states.
    #[arg(long)]
    pub nu: String,
    /// Burn-in steps.
    #[arg(long, default_value_t = 0)]
    pub n0: u32,
    /// Samples after burn-in.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value = "0.1")]
    pub t: String,
    /// Order alpha: a number or inf.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    /// Range a,b of the function.
    #[arg(long, default_value = "0,1")]
    pub range: String,
    /// Log-probability target; when given, report the minimal burn-in instead of using --n0.
    #[arg(long, allow_negative_numbers = true)]
    pub target: Option<String>,
}

pub fn mcmc(a: &McmcArgs) -> Res {
    let k = parse::kernel(&a.kernel)?;
    let nu = parse::law_on(&k, Some(&a.nu))?;
    let al = parse::alpha(&a.alpha)?;
    let t = parse::deviation(&a.t, a.n)?;
    let r = parse::f64_list(&a.range)?;
    if r.len() != 2 {
        return Err(CliError::validation("--range takes two numbers a,b"));
    }
    let mut out = Map::new();
    let n0 = match &a.target {
        Some(s) => {
            let target = exact::parse_f64(s)?;
            if r != [0.0, 1.0] {
                return Err(CliError::validation("the burn-in search uses the range 0,1"));
            }
            let n0 = scenarios::min_burnin(&nu, &k, a.n, t, al, target)?;
            out.insert("min_burnin".into(), json!(n0));
            out.insert("target".into(), jnum(target));
            n0
        }
        None => a.n0,
    };
    let rep = scenarios::mcmc_bound(&nu, &k, n0, a.n, t, al, (r[0], r[1]))?;
    out.extend(object(&rep));
    out.insert("n0".into(), json!(n0));
    json_only(out)
}
