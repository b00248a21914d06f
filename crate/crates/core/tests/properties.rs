use kinex::kernels::{self, ParamDist};
use kinex::operators::{compose, make_interpolated, make_tminus, make_tminus2, make_tplus, make_tplus2, ExchangeOperator, WealthPair};
use kinex::stats;
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn wealth() -> impl Strategy<Value = f64> {
    0.0..100.0f64
}

fn assert_column_stochastic(op: &ExchangeOperator) -> Result<(), TestCaseError> {
    let [[a, b], [c, d]] = op.entries();
    prop_assert_eq!(a + c, 1.0);
    prop_assert_eq!(b + d, 1.0);
    for v in [a, b, c, d] {
        prop_assert!((0.0..=1.0).contains(&v));
    }
    Ok(())
}

fn entries_close(a: &ExchangeOperator, b: &ExchangeOperator, tol: f64) -> bool {
    let (x, y) = (a.entries(), b.entries());
    (0..2).all(|r| (0..2).all(|c| (x[r][c] - y[r][c]).abs() <= tol))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn constructors_are_column_stochastic(e in unit(), r in unit(), xi in unit()) {
        assert_column_stochastic(&make_tplus(e).unwrap())?;
        assert_column_stochastic(&make_tminus(e).unwrap())?;
        assert_column_stochastic(&make_tplus2(e, r).unwrap())?;
        assert_column_stochastic(&make_tminus2(e, r).unwrap())?;
        assert_column_stochastic(&make_interpolated(xi, e, r).unwrap())?;
        assert_column_stochastic(&compose(&make_tminus2(e, r).unwrap(), &make_interpolated(xi, r, e).unwrap()))?;
    }

    #[test]
    fn apply_conserves_the_pair(e in unit(), r in unit(), xi in unit(), wi in wealth(), wj in wealth()) {
        let p = WealthPair { wi, wj };
        for op in [make_tplus2(e, r).unwrap(), make_tminus2(e, r).unwrap(), make_interpolated(xi, e, r).unwrap()] {
            let q = op.apply(p);
            prop_assert!(q.wi >= 0.0 && q.wj >= 0.0);
            prop_assert!((q.total() - p.total()).abs() <= 1e-12 * p.total().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn tplus_is_memoryless(e in unit(), e2 in unit()) {
        prop_assume!(e != e2);
        let c = compose(&make_tplus(e).unwrap(), &make_tplus(e2).unwrap());
        prop_assert!(entries_close(&c, &make_tplus(e).unwrap(), 1e-15));
    }

    #[test]
    fn tminus_products_close(e in unit(), e2 in unit()) {
        let e3 = e * e2 + (1.0 - e) * (1.0 - e2);
        let mm = compose(&make_tminus(e).unwrap(), &make_tminus(e2).unwrap());
        prop_assert!(entries_close(&mm, &make_tminus(e3).unwrap(), 1e-15));
        let mp = compose(&make_tminus(e).unwrap(), &make_tplus(e2).unwrap());
        prop_assert!(entries_close(&mp, &make_tplus(e3).unwrap(), 1e-15));
    }

    #[test]
    fn tminus_contracts_sum_of_squares(e in unit(), wi in wealth(), wj in wealth()) {
        let q = make_tminus(e).unwrap().apply(WealthPair { wi, wj });
        let change = q.wi * q.wi + q.wj * q.wj - (wi * wi + wj * wj);
        let expected = -2.0 * e * (1.0 - e) * (wi - wj) * (wi - wj);
        prop_assert!(change <= 1e-9 * (wi * wi + wj * wj).max(1.0));
        prop_assert!((change - expected).abs() <= 1e-9 * (wi * wi + wj * wj).max(1.0));
    }

    #[test]
    fn singularity_pattern(e in unit(), r in unit()) {
        prop_assert_eq!(make_tplus(e).unwrap().determinant(), 0.0);
        let det = make_tplus2(e, r).unwrap().determinant();
        // det T+(ε, ρ) = ε - ρ
        prop_assert!((det - (e - r)).abs() < 1e-15);
    }

    #[test]
    fn savings_kernel_is_a_tplus2_operator(eta in unit(), li in unit(), lj in unit(), wi in wealth(), wj in wealth()) {
        let p = WealthPair { wi, wj };
        let direct = kernels::hetero_savings_exchange(p, li, lj, eta).unwrap();
        let (e, r) = kernels::savings_to_operator_params(eta, li, lj).unwrap();
        let via_op = make_tplus2(e, r).unwrap().apply(p);
        let scale = p.total().max(1.0);
        prop_assert!((direct.wi - via_op.wi).abs() <= 1e-12 * scale);
        prop_assert!((direct.wj - via_op.wj).abs() <= 1e-12 * scale);
    }

    #[test]
    fn kernels_conserve_and_stay_non_negative(eta in unit(), l in unit(), l2 in unit(), f in 0.0..0.999f64, wi in wealth(), wj in wealth()) {
        let p = WealthPair { wi, wj };
        let tol = 1e-12 * p.total().max(1.0);
        for q in [
            kernels::basic_exchange(p, eta).unwrap(),
            kernels::savings_exchange(p, l, eta).unwrap(),
            kernels::hetero_savings_exchange(p, l, l2, eta).unwrap(),
            kernels::risk_aversion_exchange(p, l, l2).unwrap(),
        ] {
            prop_assert!(q.wi >= 0.0 && q.wj >= 0.0);
            prop_assert!((q.total() - p.total()).abs() <= tol);
        }
        let (q, tau) = kernels::taxed_exchange(p, f, eta).unwrap();
        prop_assert!(q.wi >= 0.0 && q.wj >= 0.0 && tau >= 0.0);
        prop_assert!((q.total() + tau - p.total()).abs() <= tol);
    }

    #[test]
    fn sampled_params_stay_in_unit_interval(u in unit()) {
        for d in ParamDist::ALL {
            let v = kernels::sample_param(d, u);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gini_invariances(w in prop::collection::vec(0.0..10.0f64, 2..60), c in 0.01..100.0f64, shift in 0.01..5.0f64) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let g = stats::gini(&w).unwrap();
        let n = w.len() as f64;
        prop_assert!(g >= 0.0 && g <= (n - 1.0) / n + 1e-12);

        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        prop_assert!((stats::gini(&scaled).unwrap() - g).abs() < 1e-12);

        let mut reversed = w.clone();
        reversed.reverse();
        prop_assert!((stats::gini(&reversed).unwrap() - g).abs() < 1e-12);

        let shifted: Vec<f64> = w.iter().map(|x| x + shift).collect();
        let gs = stats::gini(&shifted).unwrap();
        if g > 1e-9 {
            prop_assert!(gs < g);
        }
    }

    #[test]
    fn ccdf_is_non_increasing(w in prop::collection::vec(0.0..10.0f64, 1..200)) {
        let c = stats::ccdf(&w).unwrap();
        prop_assert_eq!(c.exceedance[0], 1.0);
        prop_assert!(c.exceedance.windows(2).all(|p| p[1] < p[0]));
        prop_assert!(c.values.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn histogram_counts_every_sample(w in prop::collection::vec(0.0..10.0f64, 0..300), bins in 1usize..50, w_max in 0.5..20.0f64) {
        let h = stats::histogram(&w, bins, w_max).unwrap();
        prop_assert_eq!(h.n_samples(), w.len() as u64);
    }
}

#[test]
fn gini_extremes() {
    for n in [2usize, 5, 100] {
        let mut w = vec![0.0; n];
        w[n - 1] = 3.0;
        let g = stats::gini(&w).unwrap();
        assert!((g - (n as f64 - 1.0) / n as f64).abs() < 1e-12);
        assert_eq!(stats::gini(&vec![2.5; n]).unwrap(), 0.0);
    }
}
