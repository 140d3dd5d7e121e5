//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line.

use std::time::Instant;

use rand::Rng;

use thinshell::bodies::BodySpec;
use thinshell::cli::suites::{self, SLOPE_RANGE};
use thinshell::cli::{self, Assertion, ConfigPresence, ExperimentConfig, Suite, SuiteOutput};
use thinshell::clt::smoothed_sum_report;
use thinshell::estimators::{scaling_fit, weighted_square_variance, WeightVector, CI_SIGMAS};
use thinshell::rng::{substream, Domain};
use thinshell::sampler::sample_exact;

const SEED: u64 = 20_090_409;

fn verdict(k: u32, passed: bool, detail: &str) {
    println!("{} criterion {k}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {k}: {detail}");
}

fn config(suite: Suite, bodies: Vec<BodySpec>, n_grid: Vec<usize>, samples: usize) -> ExperimentConfig {
    ExperimentConfig { bodies, n_grid, samples, seed: SEED, ..ExperimentConfig::defaults(suite) }
}

fn matching<'a>(out: &'a SuiteOutput, prefix: &str) -> Vec<&'a Assertion> {
    let found: Vec<_> = out.assertions.iter().filter(|a| a.id.starts_with(prefix)).collect();
    assert!(!found.is_empty(), "no assertion with prefix {prefix}");
    found
}

fn summarize(found: &[&Assertion]) -> (bool, String) {
    let failed: Vec<String> =
        found.iter().filter(|a| !a.passed).map(|a| format!("{} = {} vs {}", a.id, a.measured, a.bound)).collect();
    let detail = if failed.is_empty() {
        format!("{} checks", found.len())
    } else {
        format!("{} of {} failed: {}", failed.len(), found.len(), failed.join("; "))
    };
    (failed.is_empty(), detail)
}

fn three_bodies() -> Vec<BodySpec> {
    vec![BodySpec::cube(1, 1.0), BodySpec::euclidean_ball(1, 1.0), BodySpec::lp_ball(1, 1.0, 1.0)]
}

#[test]
fn criterion_01_cube_thin_shell_scaling() {
    let start = Instant::now();
    let cfg = config(Suite::ThinShell, vec![BodySpec::cube(1, 1.0)], vec![4, 8, 16, 32, 64, 128, 256], 100_000);
    let out = suites::thinshell(&cfg, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut found = matching(&out, "thin_shell.var_ratio");
    found.extend(matching(&out, "thin_shell.slope"));
    let (ok, detail) = summarize(&found);
    let slope = out.rows.iter().find(|r| r.estimator_id == "thin_shell.slope").map(|r| r.value).unwrap();
    verdict(1, ok && secs <= 120.0, &format!("slope {slope:.4}, {secs:.1}s, {detail}"));
}

#[test]
fn criterion_02_shell_deviation() {
    let cfg = config(Suite::ThinShell, three_bodies(), vec![16, 64], 100_000);
    let out = suites::thinshell(&cfg, None).unwrap();
    let (ok, detail) = summarize(&matching(&out, "thin_shell.shell_dev"));
    verdict(2, ok, &detail);
}

#[test]
fn criterion_03_weighted_square_variance() {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for (bi, body) in three_bodies().into_iter().enumerate() {
        for n in [16usize, 64] {
            let iso = body.with_dim(n).unwrap().isotropic().unwrap();
            let samples = sample_exact(&iso, 100_000, SEED).unwrap();
            let mut r = substream(SEED, Domain::Experiment, (bi * 1000 + n) as u64);
            for _ in 0..20 {
                let a = WeightVector::coefficients((0..n).map(|_| r.random::<f64>()).collect()).unwrap();
                let w = weighted_square_variance(&samples, &a).unwrap();
                ok &= w.within(CI_SIGMAS);
                worst = worst.max((w.estimate.value - w.bound) / w.estimate.sigma());
            }
        }
    }
    verdict(3, ok, &format!("120 weight vectors, max (Var - 16Σa²)/σ = {worst:.3}"));
}

#[test]
fn criterion_04_power_identities() {
    let out = suites::identities(&ExperimentConfig::defaults(Suite::Identities)).unwrap();
    let found = matching(&out, "identities");
    let worst = found.iter().map(|a| a.measured).fold(0.0, f64::max);
    let (ok, detail) = summarize(&found);
    verdict(4, ok && found.len() == 36, &format!("max gap {worst:e}, {detail}"));
}

#[test]
fn criterion_05_smoothed_sum_error() {
    let out = suites::clt(&config(Suite::Clt, vec![], vec![8, 16, 32, 64], 100_000)).unwrap();
    let fourier = matching(&out, "fourier_vs_bruteforce")[0];
    let slope = matching(&out, "smoothed_sum.slope")[0];
    let large: Vec<(f64, f64)> = [256usize, 512, 1024, 2048]
        .iter()
        .map(|&n| {
            let r = smoothed_sum_report(&vec![1.0 / (n as f64).sqrt(); n], 2.0 / (n as f64).sqrt()).unwrap();
            (n as f64, r.sup_error)
        })
        .collect();
    let large_slope = scaling_fit(&large).unwrap().slope;
    println!(
        "     criterion 5: slope over n in {{256, 512, 1024, 2048}} = {large_slope:.4} (range [{}, {}])",
        SLOPE_RANGE.0, SLOPE_RANGE.1
    );
    verdict(
        5,
        fourier.passed && slope.passed,
        &format!(
            "fourier vs brute force max |diff| {:e} (tol 1e-6); slope over n in {{8, 16, 32, 64}} = {:.4}",
            fourier.measured, slope.measured
        ),
    );
}

#[test]
fn criterion_06_kernel_contract() {
    let out = suites::clt(&config(Suite::Clt, vec![], vec![8], 100_000)).unwrap();
    let (ok, detail) = summarize(&matching(&out, "kernel."));
    verdict(6, ok, &detail);
}

#[test]
fn criterion_07_counterexample_distance() {
    let cfg = config(Suite::BerryEsseen, vec![BodySpec::counterexample_cross(1)], vec![16, 256], 1_000_000);
    let out = suites::berry_esseen(&cfg).unwrap();
    let found = matching(&out, "kolmogorov_distance");
    let values: Vec<String> = found.iter().map(|a| format!("{:.5}", a.measured)).collect();
    let (ok, detail) = summarize(&found);
    verdict(7, ok, &format!("distances {}; {detail}", values.join(", ")));
}

#[test]
fn criterion_08_cube_kolmogorov() {
    let cfg = config(Suite::BerryEsseen, vec![BodySpec::cube(1, 1.0)], vec![16, 64, 256], 1_000_000);
    let out = suites::berry_esseen(&cfg).unwrap();
    let found = matching(&out, "kolmogorov_distance");
    let values: Vec<String> = found.iter().map(|a| format!("{:.5} <= {:.5}", a.measured, a.bound)).collect();
    let (ok, detail) = summarize(&found);
    verdict(8, ok, &format!("{}; {detail}", values.join(", ")));
}

#[test]
fn criterion_09_interval_duality() {
    let out = suites::transport(&ExperimentConfig::defaults(Suite::Transport)).unwrap();
    let norm = matching(&out, "hminus1_norm[interval]")[0];
    let gap = matching(&out, "transport_duality[interval,eps=0.01]")[0];
    verdict(
        9,
        norm.passed && gap.passed,
        &format!("norm {:.6} (target {:.4}), relative W2/ε gap {:.4}", norm.measured, norm.bound, gap.measured),
    );
}

#[test]
fn criterion_10_variance_bound() {
    let cfg = config(Suite::Transport, vec![BodySpec::cube(2, 1.0), BodySpec::euclidean_ball(2, 1.0)], vec![2], 100_000);
    let out = suites::transport(&cfg).unwrap();
    let found = matching(&out, "variance_bound");
    let (ok, detail) = summarize(&found);
    verdict(10, ok && found.len() == 14, &detail);
}

#[test]
fn criterion_11_spectral() {
    let cfg = config(
        Suite::Spectral,
        vec![BodySpec::cube(2, 1.0), BodySpec::euclidean_ball(2, 1.0), BodySpec::lp_ball(2, 1.0, 1.0)],
        vec![2],
        100_000,
    );
    let out = suites::spectral(&cfg).unwrap();
    let mut found = matching(&out, "lambda1");
    for prefix in ["multiplicity", "gradient_bias_rank", "antisymmetric_member", "cube_comparison"] {
        found.extend(matching(&out, prefix));
    }
    let lambdas: Vec<String> =
        matching(&out, "lambda1").iter().map(|a| format!("{} = {:.4}", a.id, a.measured)).collect();
    let (ok, detail) = summarize(&found);
    verdict(11, ok, &format!("{}; {detail}", lambdas.join(", ")));
}

#[test]
fn criterion_12_reproducible_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let cfg = ExperimentConfig {
            samples: 5_000,
            output_dir: dir.path().join(format!("run{k}")),
            ..ExperimentConfig::defaults(Suite::All)
        };
        cli::run(&cfg, ConfigPresence::default(), None).unwrap();
        reports.push(std::fs::read(cfg.output_dir.join("report.csv")).unwrap());
    }
    verdict(12, reports[0] == reports[1], &format!("{} bytes compared", reports[0].len()));
}
