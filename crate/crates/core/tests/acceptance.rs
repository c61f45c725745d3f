//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use depbound::baselines::{self, CrossoverScenario, Pair};
use depbound::engine::{self, BoundParams, Centering, EtaChoice, GammaChoice, Route};
use depbound::harness::{self, Center, Functional, Method};
use depbound::kernels::{self, Kernel};
use depbound::measures::exact::{self, parse_rational, RatDist, RatKernel};
use depbound::measures::{self, Dist, LogValue};
use depbound::scenarios::{self, ProcessSpec};
use depbound::tensorize::{self, HolderSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn e<T: std::fmt::Debug>(x: T) -> String {
    format!("{x:?}")
}

fn golden_values() -> Outcome {
    let rat = |s: &str| parse_rational(s).unwrap();
    let nu = RatDist::parse_on_range(&["1/3", "2/3"]).map_err(e)?;
    let pi = RatDist::parse_on_range(&["1/2", "1/2"]).map_err(e)?;
    let k1 = RatKernel::binary_stay(rat("1/3")).map_err(e)?;
    let nu_k = exact::apply_kernel_exact(&nu, &k1).map_err(e)?;
    let pi_k = exact::apply_kernel_exact(&pi, &k1).map_err(e)?;
    check(nu_k.probs == vec![rat("5/9"), rat("4/9")], || format!("nu K1 = {:?}", nu_k.probs))?;
    let h_out = exact::hellinger_integer_order(&nu_k, &pi_k, 2).map_err(e)?;
    let h_in = exact::hellinger_integer_order(&nu, &pi, 2).map_err(e)?;
    check(h_out == rat("82/81"), || format!("H2 after K1 = {h_out}"))?;
    check(h_in == rat("10/9"), || format!("H2 before = {h_in}"))?;
    check(&h_out / &h_in == rat("41/45"), || "ratio != 41/45".into())?;
    let chi = exact::chi2_exact(&nu_k, &pi_k).map_err(e)? / exact::chi2_exact(&nu, &pi).map_err(e)?;
    check(chi == rat("1/9"), || format!("chi2 ratio = {chi}"))?;

    // Floating-point path through the log-domain code.
    let f = |d: &RatDist| d.to_dist();
    let hf_out = measures::hellinger_integral(&f(&nu_k), &f(&pi_k), 2.0).map_err(e)?.exp();
    let hf_in = measures::hellinger_integral(&f(&nu), &f(&pi), 2.0).map_err(e)?.exp();
    check(rel(hf_out, 82.0 / 81.0) < 1e-12, || format!("float H2 after = {hf_out}"))?;
    check(rel(hf_in, 10.0 / 9.0) < 1e-12, || format!("float H2 before = {hf_in}"))?;
    check(rel(hf_out / hf_in, 41.0 / 45.0) < 1e-12, || "float ratio".into())?;
    let chi_f = measures::phi_divergence(&measures::DivergenceKind::Chi2, &f(&nu_k), &f(&pi_k)).map_err(e)?
        / measures::phi_divergence(&measures::DivergenceKind::Chi2, &f(&nu), &f(&pi)).map_err(e)?;
    check(rel(chi_f, 1.0 / 9.0) < 1e-12, || format!("float chi2 ratio = {chi_f}"))?;

    let eta1 = kernels::dobrushin_tv(&Kernel::binary_stay(1.0 / 3.0).map_err(e)?);
    let eta2 = kernels::dobrushin_tv(&Kernel::binary_stay(1.0 / 5.0).map_err(e)?);
    check(rel(eta1, 1.0 / 3.0) < 1e-12, || format!("eta_TV(K1) = {eta1}"))?;
    check(rel(eta2, 3.0 / 5.0) < 1e-12, || format!("eta_TV(K2) = {eta2}"))?;
    check(exact::dobrushin_exact(&RatKernel::binary_stay(rat("1/5")).map_err(e)?) == rat("3/5"), || {
        "exact eta_TV(K2)".into()
    })?;

    let k2 = Kernel::binary_flip(0.2).map_err(e)?;
    let u = Dist::uniform(vec![0, 1]).map_err(e)?;
    let num = measures::renyi_divergence(&k2.row(0).map_err(e)?, &u, 6.0).map_err(e)?;
    let den = measures::renyi_divergence(&Dist::point_on(&[0, 1], 0).map_err(e)?, &u, 6.0).map_err(e)?;
    let d6 = num / den;
    check((d6 - 0.6138).abs() < 1e-3, || format!("D6 ratio = {d6}"))?;
    Ok(format!("exact 5/9,4/9; 82/81; 10/9; 41/45; 1/9; eta 1/3, 3/5; D6 ratio {d6:.4}"))
}

fn mcdiarmid_recovery() -> Outcome {
    let mut worst: f64 = 0.0;
    for &n in &[1usize, 2, 3, 5, 8, 13, 21, 34, 55, 100] {
        for k in 1..=10 {
            let t = 0.1 * k as f64;
            let p = BoundParams::new(n, t, f64::INFINITY).map_err(e)?;
            let r = engine::mcdiarmid_dep_bound(&p, LogValue(0.0));
            let reference = LN_2 - 2.0 * n as f64 * t * t;
            // |ln a - ln b| bounds the relative error of the bound values.
            worst = worst.max((r.log_bound - reference).abs());
        }
    }
    check(worst <= 1e-12, || format!("largest log deviation {worst:e}"))?;
    Ok(format!("100 grid points, largest log deviation {worst:.1e}"))
}

fn sandwich_processes() -> Vec<(String, ProcessSpec)> {
    let mut v: Vec<(String, ProcessSpec)> = [0.1, 0.25, 0.4]
        .iter()
        .map(|&l| (format!("binary({l})"), ProcessSpec::binary_chain(l).unwrap()))
        .collect();
    v.push(("ssrw".into(), ProcessSpec::Ssrw));
    v.push(("nonmarkov".into(), ProcessSpec::nonmarkov()));
    v
}

fn sandwich() -> Outcome {
    let mut checked = 0;
    let mut min_slack = f64::INFINITY;
    for (name, proc) in sandwich_processes() {
        for n in 2..=12 {
            for &a in &[1.5, 2.0, 4.0] {
                let exact = tensorize::exact_joint_hellinger(&proc, n, a).map_err(e)?.0;
                let mut pairs = Vec::new();
                if proc.is_markov() {
                    for (up, lo) in [
                        (HolderSchedule::limit(n), HolderSchedule::limit(n)),
                        (HolderSchedule::geometric(n), HolderSchedule::geometric_lower(n)),
                    ] {
                        pairs.push((
                            tensorize::tensor_lower_markov(&proc, n, a, &lo).map_err(e)?.0,
                            tensorize::tensor_upper_markov(&proc, n, a, &up).map_err(e)?.0,
                        ));
                    }
                } else {
                    pairs.push((
                        tensorize::tensor_lower_general(&proc, n, a).map_err(e)?.0,
                        tensorize::tensor_upper_general(&proc, n, a).map_err(e)?.0,
                    ));
                }
                for (lo, up) in pairs {
                    let s = (exact - lo).min(up - exact);
                    min_slack = min_slack.min(s);
                    check(s >= -1e-10, || format!("{name} n={n} alpha={a}: {lo} <= {exact} <= {up} fails"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} sandwiches, smallest slack {min_slack:.3e}"))
}

fn lemma_bounds() -> Outcome {
    let alphas = [1.5, 2.0, 4.0, f64::INFINITY];
    for &a in &alphas {
        for n in 2..=12usize {
            let h = tensorize::exact_joint_hellinger(&ProcessSpec::Ssrw, n, a).map_err(e)?;
            let v = engine::root_of(h, a) / LN_2;
            let (lo, hi) = scenarios::ssrw_lemma_bounds(n, a);
            check(lo <= v && v <= hi * (1.0 + 1e-12), || format!("n={n} alpha={a}: {v} outside [{lo}, {hi}]"))?;
        }
        // Per-step product: partial sums of the per-step maxima.
        let mut acc = 0.0;
        for i in 2..=200u64 {
            let (step, _) = scenarios::ssrw_step_max(i, a).map_err(e)?;
            acc += step.0;
            let v = engine::root_of(LogValue(acc), a) / LN_2;
            let (_, hi) = scenarios::ssrw_lemma_bounds(i as usize, a);
            check(v <= hi * (1.0 + 1e-12), || format!("per-step product n={i} alpha={a}: {v} > {hi}"))?;
        }
    }
    Ok("exact n<=12 inside [(n-2)/(4b), n(n-1)/(2b)]; per-step product below n(n-1)/(2b) for n<=200".into())
}

fn methods_for(name: &str, proc: &ProcessSpec) -> Vec<Method> {
    let mut m = vec![Method::Route(Route::Exact), Method::Route(Route::Tensor)];
    if let Some(l) = name.strip_prefix("binary(").and_then(|s| s.strip_suffix(')')) {
        m.push(Method::BinaryClosedForm { lambda: l.parse().unwrap() });
        m.push(Method::Route(Route::Hyper(GammaChoice::Star)));
        m.push(Method::Route(Route::Sdpi(EtaChoice::DeltaRatio)));
        m.push(Method::Route(Route::Sdpi(EtaChoice::DsbsClosedForm)));
    } else if matches!(proc, ProcessSpec::Ssrw) {
        m.push(Method::SsrwClosedForm);
    } else if matches!(proc, ProcessSpec::NonMarkovBinary { .. }) {
        m.push(Method::NonmarkovClosedForm);
    } else {
        m.push(Method::Route(Route::Hyper(GammaChoice::Contractive)));
        m.push(Method::Route(Route::Sdpi(EtaChoice::DeltaRatio)));
    }
    m
}

fn three_state() -> (Dist, Kernel) {
    let k = Kernel::from_rows(vec![0, 1, 2], vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.6, 0.2], vec![0.1, 0.3, 0.6]])
        .unwrap();
    (Dist::from_probs(vec![0, 1, 2], &[0.6, 0.3, 0.1]).unwrap(), k)
}

fn dominance_exact() -> Outcome {
    let mut procs = sandwich_processes();
    let (init, kernel) = three_state();
    procs.push(("chain3".into(), ProcessSpec::HomogeneousChain { init, kernel }));
    let alphas = [1.5, 2.0, 4.0, 16.0, f64::INFINITY];
    let ts: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let (mut checked, mut nontrivial) = (0usize, 0usize);
    for (name, proc) in &procs {
        let methods = methods_for(name, proc);
        for n in [2usize, 4, 6, 8, 10, 12] {
            let margs = proc.marginals(n).map_err(e)?;
            for f in [Functional::FractionPositive, Functional::FractionAgree] {
                let c = f.certificate(&margs);
                let tails = harness::exact_tails(proc, n, f, Center::ProductMean, &ts).map_err(e)?;
                if c.iter().all(|&x| x == 0.0) {
                    // Constant functional (agreement of consecutive walk positions): no deviation at all.
                    check(tails.iter().all(|t| t.prob == 0.0), || format!("{name} n={n}: constant functional deviates"))?;
                    continue;
                }
                for m in &methods {
                    let roots = harness::method_roots(*m, proc, n, &alphas);
                    check(!roots.is_empty(), || format!("{name}: {} gave no bound", m.name()))?;
                    for &(a, root) in &roots {
                        for (t, tail) in ts.iter().zip(&tails) {
                            let p = BoundParams::new(n, *t, a).map_err(e)?.with_c(c.clone()).map_err(e)?;
                            let b = engine::mcdiarmid_dep_bound_root(&p, root, m.name());
                            checked += 1;
                            if b.trivial {
                                continue;
                            }
                            nontrivial += 1;
                            check(tail.prob.ln() <= b.log_bound, || {
                                format!(
                                    "{name} n={n} {} {} alpha={a} t={t}: tail {} > bound {}",
                                    f.name(),
                                    m.name(),
                                    tail.prob,
                                    b.log_bound.exp()
                                )
                            })?;
                        }
                    }
                }
            }
        }
    }
    check(nontrivial > 0, || "no non-trivial bound was exercised".into())?;
    Ok(format!("{checked} (instance, method, alpha, t) cases, {nontrivial} non-trivial, 0 violations"))
}

fn ssrw_headline() -> Outcome {
    let n = 1000usize;
    let t = (n as f64).sqrt();
    let ours = scenarios::ssrw_bound(n, t, f64::INFINITY, Centering::ProductMean).map_err(e)?.log_bound;
    let theirs = baselines::kontorovich_bound(n, t, &vec![1.0; n - 1]).map_err(e)?.log_bound;
    let nf = n as f64;
    let closed = LN_2 - (2.0 - LN_2 / 2.0) * nf * nf - LN_2 / 2.0 * nf;
    check(rel(ours, closed) < 1e-12, || format!("ours {ours} vs closed form {closed}"))?;
    check(ours <= -1e5 * (2.0 - LN_2 / 2.0) + nf, || format!("ours {ours} above the headline rate"))?;
    check((theirs - (LN_2 - 0.5)).abs() < 1e-12, || format!("kontorovich {theirs} != ln2 - 1/2"))?;
    check(ours < theirs - 1e5, || format!("gap {} below 1e5 nats", theirs - ours))?;
    Ok(format!("ours {ours:.6e}, kontorovich {theirs:.6}, gap {:.3e} nats", theirs - ours))
}

fn crossovers() -> Outcome {
    let n = 10_000;
    let (mut checked, mut undefined) = (0, 0);
    for &lambda in &[0.1, 0.2, 0.3, 0.4] {
        let scen = CrossoverScenario::Binary { lambda };
        for pair in [Pair::OursVsKontorovich, Pair::OursVsFan, Pair::OursVsMarton] {
            let x = baselines::crossover_threshold(pair, &scen, n, f64::INFINITY).map_err(e)?;
            let (o, th) = baselines::pair_logs(pair, &scen, n, 1.01 * x.t_bar, f64::INFINITY).map_err(e)?;
            check(o < th, || format!("{} lambda={lambda}: ours {o} >= theirs {th} at 1.01 t_bar", pair.name()))?;
            match baselines::pair_logs(pair, &scen, n, 0.5 * x.t_bar, f64::INFINITY) {
                Ok((o, th)) => {
                    check(th < o, || format!("{} lambda={lambda}: baseline loses at 0.5 t_bar", pair.name()))?
                }
                Err(_) => undefined += 1,
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs, ours wins at 1.01 t_bar, baseline wins at 0.5 t_bar ({undefined} undefined there)"))
}

fn monte_carlo() -> Outcome {
    let (init3, k3) = three_state();
    let pi3 = kernels::stationary_dist(&k3).map_err(e)?;
    let scen: Vec<(&str, ProcessSpec, Option<f64>)> = vec![
        ("binary", ProcessSpec::binary_chain(0.25).map_err(e)?, Some(0.25)),
        ("ssrw", ProcessSpec::Ssrw, None),
        ("nonmarkov", ProcessSpec::nonmarkov(), None),
        ("chain3", ProcessSpec::HomogeneousChain { init: pi3, kernel: k3.clone() }, None),
        ("coins", ProcessSpec::fair_coins(), None),
    ];
    let grid = engine::alpha_grid();
    let (mut rows_checked, mut nontrivial) = (0, 0);
    for (name, proc, lambda) in &scen {
        for n in [100usize, 1000] {
            let margs = proc.marginals(n).map_err(e)?;
            let f = Functional::FractionPositive;
            let c = f.certificate(&margs);
            let s2: f64 = c.iter().map(|x| x * x).sum();
            let center = f.product_mean(&margs);
            let values = harness::sample_functional(proc, n, f, 1_000_000, 7).map_err(e)?;
            for m in harness::default_methods(proc, *lambda) {
                let roots = harness::method_roots(m, proc, n, &grid);
                if roots.is_empty() {
                    continue;
                }
                // Deviations k/(4 sqrt n), k = 1..10, plus the points where this
                // method's best bound reaches 1e-2 and 1e-3.
                let mut ts: Vec<f64> = (1..=10).map(|k| k as f64 / (4.0 * (n as f64).sqrt())).collect();
                for level in [1e-2f64, 1e-3] {
                    let t_at = roots
                        .iter()
                        .map(|&(a, root)| {
                            let b = depbound::conjugate(a);
                            ((LN_2 / b + root - level.ln()).max(0.0) * b * s2 / 2.0).sqrt()
                        })
                        .fold(f64::INFINITY, f64::min);
                    ts.push(t_at);
                }
                let est = harness::empirical_tails(&values, center, &ts, 7);
                for (t, est) in ts.iter().zip(&est) {
                    let b = harness::best_bound(m, &roots, n, *t, &c).map_err(e)?;
                    rows_checked += 1;
                    if b.trivial {
                        continue;
                    }
                    nontrivial += 1;
                    check(est.ci_high <= b.log_bound.exp(), || {
                        format!("{name} n={n} {} t={t}: ci_high {} > bound {}", m.name(), est.ci_high, b.log_bound.exp())
                    })?;
                }
            }
        }
    }

    // Randomized enumerable queries: the empirical interval should cover the exact tail.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut contained = 0;
    let total = 50;
    for q in 0..total {
        let proc = match rng.random_range(0..5) {
            0 => ProcessSpec::binary_chain(rng.random_range(0.05..0.95)).map_err(e)?,
            1 => ProcessSpec::Ssrw,
            2 => ProcessSpec::nonmarkov(),
            3 => ProcessSpec::HomogeneousChain { init: init3.clone(), kernel: k3.clone() },
            _ => ProcessSpec::fair_coins(),
        };
        let n = rng.random_range(2..=10usize);
        let f = [Functional::FractionPositive, Functional::NormalizedEndpoint, Functional::FractionAgree]
            [rng.random_range(0..3)];
        let t = rng.random_range(0.0..0.6);
        let exact = harness::exact_tails(&proc, n, f, Center::ProductMean, &[t]).map_err(e)?.remove(0);
        let values = harness::sample_functional(&proc, n, f, 200_000, 1000 + q).map_err(e)?;
        let est = harness::empirical_tails(&values, exact.product_mean, &[t], 1000 + q).remove(0);
        if est.ci_low <= exact.prob && exact.prob <= est.ci_high {
            contained += 1;
        }
    }
    check(contained >= 49, || format!("only {contained}/{total} intervals cover the exact tail"))?;
    Ok(format!("{rows_checked} dominance rows ({nontrivial} non-trivial) clean; {contained}/{total} intervals cover the exact tail"))
}

fn burn_in() -> Outcome {
    let k = Kernel::binary_flip(0.25).map_err(e)?;
    let nu = Dist::point_on(&[0, 1], 0).map_err(e)?;
    let alpha = 2.0;
    let mut pts = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let thr = scenarios::mcmc_bound(&nu, &k, 0, n, 1.0, alpha, (0.0, 1.0)).map_err(e)?.threshold_t2.sqrt();
        let t = 1.1 * thr;
        let base = scenarios::mcmc_bound(&nu, &k, 0, n, t, alpha, (0.0, 1.0)).map_err(e)?;
        let beta = depbound::conjugate(alpha);
        let floor = -2.0 * n as f64 * t * t / beta + (n as f64 - 1.0) * base.step_term;
        let n0 = scenarios::min_burnin(&nu, &k, n, t, alpha, floor + (1.0 / n as f64).ln_1p()).map_err(e)?;
        pts.push(((n as f64).ln(), n0 as f64));
    }
    // Least-squares fit n0 = a ln n + b.
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let worst = pts.iter().map(|p| ((a * p.0 + b - p.1) / p.1).abs()).fold(0.0, f64::max);
    check(a > 0.0, || format!("burn-in does not grow: slope {a}"))?;
    check(worst < 0.25, || format!("relative residual {worst:.3} with fit {a:.3} ln n + {b:.3}"))?;
    let n0s: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Ok(format!("n0 = {n0s:?}, fit {a:.3} ln n + {b:.3}, largest relative residual {worst:.3}"))
}

fn hypercontractivity() -> Outcome {
    let mut worst: f64 = 0.0;
    for &l in &[0.1, 0.25, 0.4] {
        let k = Kernel::binary_flip(l).map_err(e)?;
        let u = Dist::uniform(vec![0, 1]).map_err(e)?;
        let back = kernels::backward_channel(&k, &u).map_err(e)?;
        let out = kernels::apply_kernel(&u, &k).map_err(e)?;
        for &a in &[2.0, 3.0, 6.0] {
            let closed = kernels::dsbs_gamma_star(l, a);
            let bis = kernels::hypercontractive_gamma(&back, &out, a, 1e-5).map_err(e)?;
            worst = worst.max((closed - bis).abs());
            check((closed - bis).abs() < 1e-3, || format!("lambda={l} alpha={a}: closed {closed} vs bisection {bis}"))?;
        }
    }
    Ok(format!("9 cases, largest gap {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("golden values of the worked example", golden_values, Some(Duration::from_secs(1))),
        ("McDiarmid recovery", mcdiarmid_recovery, Some(Duration::from_secs(1))),
        ("tensorisation sandwich", sandwich, Some(Duration::from_secs(60))),
        ("walk Hellinger sandwich", lemma_bounds, Some(Duration::from_secs(30))),
        ("bound dominance over exact tails", dominance_exact, Some(Duration::from_secs(120))),
        ("walk headline comparison", ssrw_headline, Some(Duration::from_secs(1))),
        ("crossover certification", crossovers, Some(Duration::from_secs(5))),
        ("Monte Carlo consistency", monte_carlo, Some(Duration::from_secs(600))),
        ("burn-in scaling", burn_in, None),
        ("hypercontractivity cross-check", hypercontractivity, Some(Duration::from_secs(60))),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let res = match (res, budget) {
            (Ok(msg), Some(b)) if took > *b => Err(format!("{msg}; took {took:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match res {
            Ok(msg) => println!("criterion {:>2} PASS  {name} ({took:.2?}): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
