//! End-to-end acceptance checks at desk scale: N = 1000 agents, 10⁶
//! transactions per replica, 100 replicas. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.
//!
//! Run with `cargo test -p kinex --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use kinex::kernels::{self, ParamDist};
use kinex::operators::{compose, make_interpolated, make_tminus, make_tminus2, make_tplus, make_tplus2, ExchangeOperator, WealthPair};
use kinex::stats::{self, ks_distance, ks_two_sample};
use kinex::{run_ensemble, EnsembleSummary, KernelSpec, SimulationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AGENTS: usize = 1000;
const STEPS: u64 = 1_000_000;
const REPLICAS: usize = 100;
const SEED: u64 = 42;
const CASES: usize = 100_000;

struct Check {
    ok: bool,
    lines: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, lines: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: String) {
        self.ok &= ok;
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "MISS" }));
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.expect((value - target).abs() <= tol, format!("{label} = {value:.4} (target {target} ± {tol})"));
    }

    fn below(&mut self, label: &str, value: f64, bound: f64) {
        self.expect(value < bound, format!("{label} = {value:.4} (< {bound})"));
    }
}

fn ensemble(kernel: KernelSpec) -> EnsembleSummary {
    let cfg = SimulationConfig::new(AGENTS, STEPS, kernel).with_ensemble(REPLICAS).with_seed(SEED);
    run_ensemble(&cfg).expect("ensemble run")
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = stats::mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

fn tail(summary: &EnsembleSummary) -> (f64, f64) {
    match &summary.distribution.tail_fit {
        Ok(fit) => (fit.regression.nu, fit.hill.nu),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

fn boltzmann_gibbs_endpoint(kernel: KernelSpec, c: &mut Check) {
    let s = ensemble(kernel);
    c.within("gini", s.gini_mean, 0.5, 0.02);
    c.below("KS vs exponential", ks_distance(&s.pooled, stats::exponential_cdf).unwrap(), 0.02);
}

fn c1(c: &mut Check) {
    boltzmann_gibbs_endpoint(KernelSpec::Basic, c);
}

fn c2(c: &mut Check) {
    let s = ensemble(KernelSpec::Interpolated { xi: 1.0 });
    c.below("gini", s.gini_mean, 0.01);
    c.below("std dev", std_dev(&s.pooled), 0.02);
    c.within("mean", stats::mean(&s.pooled), 1.0, 1e-9);
}

fn c3(c: &mut Check) {
    let table = [(0.0, 0.500, 0.000), (0.25, 0.365, 0.454), (0.5, 0.246, 0.776), (0.75, 0.129, 0.922), (1.0, 0.000, 1.000)];
    for (xi, g, mu) in table {
        let s = ensemble(KernelSpec::Interpolated { xi });
        c.within(&format!("xi={xi} gini"), s.gini_mean, g, 0.02);
        c.within(&format!("xi={xi} mode"), s.mode(), mu, 0.05);
    }
}

fn c4(c: &mut Check) {
    let plus = ensemble(KernelSpec::TwoParamPlus);
    let minus = ensemble(KernelSpec::TwoParamMinus);
    c.within("gini T+(e,r)", plus.gini_mean, 0.375, 0.01);
    c.within("gini T-(e,r)", minus.gini_mean, 0.375, 0.01);
    let ks = ks_distance(&plus.pooled, |w| stats::gamma_cdf(w, 2.0, 0.5).unwrap()).unwrap();
    c.below("KS vs Gamma(2, 1/2)", ks, 0.02);
    c.below("KS T+ vs T-", ks_two_sample(&plus.pooled, &minus.pooled).unwrap(), 0.02);
}

fn c5(c: &mut Check) {
    let s = ensemble(KernelSpec::RiskAversion { param_dist: ParamDist::Uniform01 });
    let (reg, hill) = tail(&s);
    c.within("nu (regression)", reg, 2.0, 0.2);
    c.below("|nu regression - nu Hill|", (reg - hill).abs(), 0.1);
    c.within("gini", s.gini_mean, 0.447, 0.03);
}

fn c6(c: &mut Check) {
    let s = ensemble(KernelSpec::HeterogeneousSavings { param_dist: ParamDist::Uniform01 });
    let (reg, hill) = tail(&s);
    c.within("nu (regression)", reg, 1.0, 0.15);
    c.lines.push(format!("     nu (Hill) = {hill:.4}"));
    c.within("gini", s.gini_mean, 0.759, 0.03);
}

fn c7(c: &mut Check) {
    let uniform = tail(&ensemble(KernelSpec::RiskAversion { param_dist: ParamDist::Uniform01 })).0;
    let sq = ensemble(KernelSpec::RiskAversion { param_dist: ParamDist::OneMinusXiSquared });
    let fourth = ensemble(KernelSpec::RiskAversion { param_dist: ParamDist::OneMinusXiFourth });
    let (nu_sq, nu_fourth) = (tail(&sq).0, tail(&fourth).0);
    c.within("1-xi^2 nu", nu_sq, 1.75, 0.2);
    c.within("1-xi^2 gini", sq.gini_mean, 0.596, 0.03);
    c.within("1-xi^4 nu", nu_fourth, 1.6, 0.2);
    c.expect(
        uniform > nu_sq && nu_sq > nu_fourth,
        format!("ordering {uniform:.4} > {nu_sq:.4} > {nu_fourth:.4}"),
    );
}

fn close(a: &ExchangeOperator, b: &ExchangeOperator, tol: f64) -> bool {
    let (x, y) = (a.entries(), b.entries());
    (0..2).all(|r| (0..2).all(|k| (x[r][k] - y[r][k]).abs() <= tol))
}

fn stochastic(op: &ExchangeOperator) -> bool {
    let [[a, b], [c, d]] = op.entries();
    a + c == 1.0 && b + d == 1.0 && [a, b, c, d].iter().all(|v| (0.0..=1.0).contains(v))
}

fn c8(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = [0usize; 6];
    for _ in 0..CASES {
        let (e, e2, r, xi, eta, li, lj): (f64, f64, f64, f64, f64, f64, f64) =
            (rng.random(), rng.random(), rng.random(), rng.random(), rng.random(), rng.random(), rng.random());
        let p = WealthPair { wi: 10.0 * rng.random::<f64>(), wj: 10.0 * rng.random::<f64>() };

        let tp = make_tplus(e).unwrap();
        let tm = make_tminus(e).unwrap();
        let e3 = e * e2 + (1.0 - e) * (1.0 - e2);

        if !close(&compose(&tp, &make_tplus(e2).unwrap()), &tp, 1e-15) {
            failures[0] += 1;
        }
        if !close(&compose(&tm, &make_tminus(e2).unwrap()), &make_tminus(e3).unwrap(), 1e-15)
            || !close(&compose(&tm, &make_tplus(e2).unwrap()), &make_tplus(e3).unwrap(), 1e-15)
        {
            failures[1] += 1;
        }

        let direct = kernels::hetero_savings_exchange(p, li, lj, eta).unwrap();
        let (ep, rp) = kernels::savings_to_operator_params(eta, li, lj).unwrap();
        let via = make_tplus2(ep, rp).unwrap().apply(p);
        if (direct.wi - via.wi).abs() > 1e-12 || (direct.wj - via.wj).abs() > 1e-12 {
            failures[2] += 1;
        }

        let ops = [tp, tm, make_tplus2(e, r).unwrap(), make_tminus2(e, r).unwrap(), make_interpolated(xi, e, e2).unwrap()];
        if !ops.iter().all(stochastic) {
            failures[3] += 1;
        }
        if !ops.iter().all(|op| (op.apply(p).total() - p.total()).abs() <= 1e-12 * p.total()) {
            failures[4] += 1;
        }

        let q = tm.apply(p);
        let sq = p.wi * p.wi + p.wj * p.wj;
        let change = q.wi * q.wi + q.wj * q.wj - sq;
        let expected = -2.0 * e * (1.0 - e) * (p.wi - p.wj).powi(2);
        if (change - expected).abs() > 1e-9 * sq || change > 1e-9 * sq {
            failures[5] += 1;
        }
    }
    let names = ["memorylessness", "closure (both lines)", "kernel-operator equivalence", "column-stochastic", "pair conservation", "T- contraction identity"];
    for (name, n) in names.iter().zip(failures) {
        c.expect(n == 0, format!("{name}: {n} failures / {CASES}"));
    }
}

fn c9(c: &mut Check) {
    boltzmann_gibbs_endpoint(KernelSpec::Taxation { f: 0.0 }, c);
    let s = ensemble(KernelSpec::Taxation { f: 0.3 });
    c.expect(s.mode() > 0.0, format!("f=0.3 mode = {:.4} (> 0)", s.mode()));
    c.below("f=0.3 gini", s.gini_mean, 0.5);
}

fn c10(c: &mut Check) {
    for (stream, nu) in [1.0, 1.6, 1.75, 2.0].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(stream as u64);
        let xs: Vec<f64> = (0..100_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / nu)).collect();
        let fit = stats::fit_pareto_tail(&xs, stats::DEFAULT_TAIL_FRACTION).unwrap();
        c.within(&format!("nu={nu} recovered"), fit.nu(), nu, 0.05);
        c.lines.push(format!("     nu={nu} Hill = {:.4}", fit.hill.nu));
    }
}

type Criterion = (&'static str, fn(&mut Check));

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("C1  Boltzmann-Gibbs endpoint", c1),
        ("C2  Dirac endpoint", c2),
        ("C3  interpolation table", c3),
        ("C4  Gamma equilibrium", c4),
        ("C5  risk-aversion Pareto tail", c5),
        ("C6  heterogeneous savings", c6),
        ("C7  parameter-law dependence", c7),
        ("C8  operator algebra", c8),
        ("C9  taxation", c9),
        ("C10 tail-fitter oracle", c10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let mut c = Check::new();
        run(&mut c);
        for line in &c.lines {
            println!("    {line}");
        }
        println!("{} {name} ({:.1}s)", if c.ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        failed += usize::from(!c.ok);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
