//! Property tests for the invariants of each module.

use depbound::engine::{self, BoundParams, EtaChoice, GammaChoice, Route};
use depbound::harness::{self, Center, Functional, Method};
use depbound::kernels::{self, Kernel};
use depbound::measures::{self, DivergenceKind, Dist, LogValue};
use depbound::scenarios::{self, ProcessSpec};
use depbound::tensorize::{self, HolderSchedule};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k)
}

fn dist_on(w: &[f64]) -> Dist {
    let s: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / s).collect();
    Dist::on_range(&p).unwrap()
}

fn pair(k: usize) -> impl Strategy<Value = (Dist, Dist)> {
    (weights(k), weights(k)).prop_map(|(a, b)| (dist_on(&a), dist_on(&b)))
}

fn kernel(k: usize) -> impl Strategy<Value = Kernel> {
    prop::collection::vec(weights(k), k).prop_map(move |rows| {
        let p: Vec<Vec<f64>> = rows.iter().map(|r| dist_on(r).probs()).collect();
        Kernel::from_rows((0..k as i64).collect(), p).unwrap()
    })
}

fn kl(nu: &Dist, mu: &Dist) -> f64 {
    measures::phi_divergence(&DivergenceKind::Kl, nu, mu).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // ------------------------------------------------------------ measures

    #[test]
    fn renyi_matches_hellinger((nu, mu) in pair(4), a in 1.05f64..12.0) {
        let d = measures::renyi_divergence(&nu, &mu, a).unwrap();
        let h = measures::hellinger_integral(&nu, &mu, a).unwrap().0;
        let lhs = ((a - 1.0) * d).exp();
        prop_assert!((lhs - h.exp()).abs() <= 1e-10 * h.exp());
    }

    #[test]
    fn hellinger_at_least_one((nu, mu) in pair(5), a in 1.05f64..12.0) {
        let h = measures::hellinger_integral(&nu, &mu, a).unwrap().0;
        prop_assert!(h >= -1e-15);
        prop_assert!(measures::hellinger_integral(&nu, &nu, a).unwrap().0.abs() < 1e-14);
        if nu.max_abs_diff(&mu) > 1e-3 {
            prop_assert!(h > 0.0);
        }
    }

    #[test]
    fn chi_square_is_h2_minus_one((nu, mu) in pair(4)) {
        let chi = measures::phi_divergence(&DivergenceKind::Chi2, &nu, &mu).unwrap();
        let h2 = measures::hellinger_integral(&nu, &mu, 2.0).unwrap().exp();
        prop_assert!((chi - (h2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn renyi_nondecreasing_in_order((nu, mu) in pair(4)) {
        let orders = [1.0, 1.1, 2.0, 4.0, 8.0, 16.0, INF];
        let d: Vec<f64> = orders.iter().map(|&a| measures::renyi_divergence(&nu, &mu, a).unwrap()).collect();
        for w in d.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12, "{:?}", d);
        }
    }

    #[test]
    fn data_processing((nu, mu) in pair(3), k in kernel(3)) {
        let (nk, mk) = (kernels::apply_kernel(&nu, &k).unwrap(), kernels::apply_kernel(&mu, &k).unwrap());
        for kind in [DivergenceKind::Kl, DivergenceKind::Tv, DivergenceKind::Chi2] {
            let before = measures::phi_divergence(&kind, &nu, &mu).unwrap();
            let after = measures::phi_divergence(&kind, &nk, &mk).unwrap();
            prop_assert!(after <= before + 1e-12, "{kind:?}: {after} > {before}");
        }
    }

    // ------------------------------------------------------------- kernels

    #[test]
    fn backward_channel_is_an_involution(k in kernel(3), w in weights(3)) {
        let mu = dist_on(&w);
        let back = kernels::backward_channel(&k, &mu).unwrap();
        let mu_k = kernels::apply_kernel(&mu, &k).unwrap();
        let again = kernels::backward_channel(&back, &mu_k).unwrap();
        for x in 0..3 {
            prop_assert!(again.row(x).unwrap().max_abs_diff(&k.row(x).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn tv_contracts_by_dobrushin((nu, mu) in pair(3), k in kernel(3)) {
        let eta = kernels::dobrushin_tv(&k);
        let before = measures::total_variation(&nu, &mu);
        let after = measures::total_variation(&kernels::apply_kernel(&nu, &k).unwrap(), &kernels::apply_kernel(&mu, &k).unwrap());
        prop_assert!(after <= eta * before + 1e-12);
    }

    #[test]
    fn kernels_are_contractive_at_stationarity(k in kernel(3), a in 1.2f64..6.0) {
        let pi = kernels::stationary_dist(&k).unwrap();
        let norm = kernels::operator_norm(&k, &pi, a, a).unwrap();
        prop_assert!((norm.value - 1.0).abs() < 1e-6, "{}", norm.value);
    }

    // ----------------------------------------------------------- tensorize

    #[test]
    fn sandwich_on_random_binary_chains(l in 0.02f64..0.98, n in 2usize..=10, a in prop::sample::select(vec![1.5, 2.0, 4.0])) {
        let proc = ProcessSpec::binary_chain(l).unwrap();
        let exact = tensorize::exact_joint_hellinger(&proc, n, a).unwrap().0;
        let up = tensorize::tensor_upper_markov(&proc, n, a, &HolderSchedule::limit(n)).unwrap().0;
        let lo = tensorize::tensor_lower_markov(&proc, n, a, &HolderSchedule::limit(n)).unwrap().0;
        prop_assert!(lo <= exact + 1e-10 && exact <= up + 1e-10, "{lo} {exact} {up}");
        let up = tensorize::tensor_upper_markov(&proc, n, a, &HolderSchedule::geometric(n)).unwrap().0;
        let lo = tensorize::tensor_lower_markov(&proc, n, a, &HolderSchedule::geometric_lower(n)).unwrap().0;
        prop_assert!(lo <= exact + 1e-10 && exact <= up + 1e-10, "{lo} {exact} {up}");
    }

    #[test]
    fn renyi_form_matches_hellinger_form(k in kernel(3), w in weights(3), n in 2usize..=8, a in 1.2f64..6.0, geometric in any::<bool>()) {
        let proc = ProcessSpec::HomogeneousChain { init: dist_on(&w), kernel: k };
        let sched = if geometric { HolderSchedule::geometric(n) } else { HolderSchedule::limit(n) };
        let up = tensorize::tensor_upper_markov(&proc, n, a, &sched).unwrap().0;
        let renyi = tensorize::renyi_tensor_sum(&proc, n, a, &sched).unwrap();
        prop_assert!((up / (a - 1.0) - renyi).abs() <= 1e-10 * (1.0 + renyi.abs()));
    }

    #[test]
    fn general_bound_reduces_to_markov_bound(k in kernel(3), w in weights(3), n in 2usize..=7, a in 1.2f64..6.0) {
        let proc = ProcessSpec::HomogeneousChain { init: dist_on(&w), kernel: k };
        let general = tensorize::tensor_upper_general(&proc, n, a).unwrap().0;
        let markov = tensorize::tensor_upper_markov(&proc, n, a, &HolderSchedule::limit(n)).unwrap().0;
        prop_assert!((general - markov).abs() <= 1e-12 * (1.0 + markov.abs()));
    }

    // -------------------------------------------------------------- engine

    #[test]
    fn threshold_marks_the_sign_change(n in 1usize..500, a in prop::sample::select(vec![1.3, 2.0, 5.0, INF]), lh in 0.01f64..200.0) {
        let p = BoundParams::new(n, 1.0, a).unwrap();
        let root = engine::root_of(LogValue(lh), a);
        let t = engine::threshold_t(&p, LogValue(lh));
        let above = BoundParams { t: t * (1.0 + 1e-6), ..p.clone() };
        let below = BoundParams { t: t * (1.0 - 1e-6), ..p };
        prop_assert!(engine::exponent(&above, root) < 0.0);
        prop_assert!(engine::exponent(&below, root) >= 0.0);
    }

    #[test]
    fn routes_dominate_the_exact_evaluation(l in 0.05f64..0.45, n in 2usize..=9, a in prop::sample::select(vec![1.5, 2.0, 4.0, INF])) {
        let proc = ProcessSpec::binary_chain(l).unwrap();
        let exact = engine::root_of(tensorize::exact_joint_hellinger(&proc, n, a).unwrap(), a);
        for route in [Route::Hyper(GammaChoice::Star), Route::Sdpi(EtaChoice::DeltaRatio), Route::Sdpi(EtaChoice::DsbsClosedForm)] {
            let r = Method::Route(route).root(&proc, n, a).unwrap();
            prop_assert!(exact <= r + 1e-10, "{route:?}: {exact} > {r}");
        }
    }

    #[test]
    fn mean_gap_dominates_true_gap(l in 0.05f64..0.95, n in 2usize..=10, a in prop::sample::select(vec![1.5, 2.0, 4.0, INF])) {
        let proc = ProcessSpec::binary_chain(l).unwrap();
        let tail = harness::exact_tails(&proc, n, Functional::FractionAgree, Center::ProductMean, &[0.1]).unwrap().remove(0);
        let c = Functional::FractionAgree.certificate(&proc.marginals(n).unwrap());
        let p = BoundParams::new(n, 0.1, a).unwrap().with_c(c).unwrap();
        let h = tensorize::exact_joint_hellinger(&proc, n, a).unwrap();
        let gap = engine::mean_gap_bound(&p, h);
        prop_assert!((tail.joint_mean - tail.product_mean).abs() <= gap.value + 1e-12);
    }

    // ----------------------------------------------------------- scenarios

    #[test]
    fn nonmarkov_conditionals_stay_inside(bits in any::<u32>(), len in 0usize..20) {
        let mut pre = vec![1i64];
        pre.extend((0..len).map(|i| if (bits >> i) & 1 == 1 { 1 } else { -1 }));
        let m = pre.len() as i32;
        let p = scenarios::nonmarkov_conditional(&pre).unwrap().prob(1);
        let eps = 2f64.powi(-m);
        prop_assert!(p >= eps - 1e-15 && p <= 1.0 - eps + 1e-15, "{p}");
    }

    #[test]
    fn binary_closed_form_equals_tensor_route(l in 0.01f64..0.99, n in 2usize..200, t in 0.0f64..1.0, a in prop::sample::select(vec![1.5, 2.0, 4.0, 30.0, INF])) {
        let closed = scenarios::binary_chain_bound(l, n, t, a).unwrap().log_bound;
        let p = BoundParams::new(n, t, a).unwrap();
        let route = engine::markov_chain_bound(&ProcessSpec::binary_chain(l).unwrap(), &p, Route::Tensor).unwrap().log_bound;
        prop_assert!((closed - route).abs() <= 1e-10 * (1.0 + closed.abs()));
    }

    // ------------------------------------------------------------- harness

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), n in 1usize..40) {
        let proc = ProcessSpec::nonmarkov();
        let a = harness::sample_functional(&proc, n, Functional::FractionPositive, 2000, seed).unwrap();
        let b = harness::sample_functional(&proc, n, Functional::FractionPositive, 2000, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn hellinger_ratio_can_exceed_dobrushin() {
    let nu = Dist::on_range(&[1.0 / 3.0, 2.0 / 3.0]).unwrap();
    let pi = Dist::on_range(&[0.5, 0.5]).unwrap();
    let k1 = Kernel::binary_stay(1.0 / 3.0).unwrap();
    let ratio = (measures::hellinger_integral(&kernels::apply_kernel(&nu, &k1).unwrap(), &kernels::apply_kernel(&pi, &k1).unwrap(), 2.0)
        .unwrap()
        .0
        - measures::hellinger_integral(&nu, &pi, 2.0).unwrap().0)
        .exp();
    assert!((ratio - 41.0 / 45.0).abs() < 1e-14);
    assert!(ratio > kernels::dobrushin_tv(&k1));
}

#[test]
fn renyi_ratio_can_exceed_dobrushin() {
    let k2 = Kernel::binary_stay(0.2).unwrap();
    let pi = Dist::on_range(&[0.5, 0.5]).unwrap();
    let d0 = Dist::point_on(&[0, 1], 0).unwrap();
    let ratio = measures::renyi_divergence(&kernels::apply_kernel(&d0, &k2).unwrap(), &pi, 6.0).unwrap()
        / measures::renyi_divergence(&d0, &pi, 6.0).unwrap();
    assert!(ratio > kernels::dobrushin_tv(&k2));
}

#[test]
fn kl_sdpi_constant_of_the_symmetric_channel() {
    let grid: Vec<f64> = (1..2000).map(|i| i as f64 / 2000.0).collect();
    let u = Dist::on_range(&[0.5, 0.5]).unwrap();
    for l in [0.1, 0.25, 0.4] {
        let k = Kernel::binary_flip(l).unwrap();
        let c = kernels::kl_sdpi_grid(&k, &u, &grid).unwrap();
        assert!((c - (1.0 - 2.0 * l).powi(2)).abs() < 2e-3, "lambda={l}: {c}");
        // Sanity of the estimator itself: a direct ratio at a grid point never exceeds it.
        let nu = Dist::on_range(&[0.3, 0.7]).unwrap();
        let r = kl(&kernels::apply_kernel(&nu, &k).unwrap(), &u) / kl(&nu, &u);
        assert!(r <= c + 1e-12);
    }
}

#[test]
fn walk_pmf_matches_path_counting() {
    // Dynamic programme over positions; independent of the binomial formula.
    let mut counts = vec![1.0f64];
    for n in 1..=30u64 {
        let mut next = vec![0.0; counts.len() + 1];
        for (j, c) in counts.iter().enumerate() {
            next[j] += c / 2.0;
            next[j + 1] += c / 2.0;
        }
        counts = next;
        // counts[j] = P(S_n = n - 2j)
        for (j, p) in counts.iter().enumerate() {
            let y = n as i64 - 2 * j as i64;
            let got = scenarios::ssrw_log_pmf(n, y).exp();
            assert!((got - p).abs() <= 1e-13 * p.max(1e-300), "n={n} y={y}");
        }
        assert_eq!(scenarios::ssrw_log_pmf(n, n as i64 + 1), f64::NEG_INFINITY);
    }
}

#[test]
fn walk_routes_dominate_exact() {
    for n in 2..=12 {
        for a in [1.5, 2.0, 4.0, INF] {
            let exact = engine::root_of(tensorize::exact_joint_hellinger(&ProcessSpec::Ssrw, n, a).unwrap(), a);
            let tensor = Method::Route(Route::Tensor).root(&ProcessSpec::Ssrw, n, a).unwrap();
            let closed = Method::SsrwClosedForm.root(&ProcessSpec::Ssrw, n, a).unwrap();
            assert!(exact <= tensor + 1e-10 && tensor <= closed * (1.0 + 1e-12) + 1e-12);
        }
    }
}
