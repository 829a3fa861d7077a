//! Randomized invariant suites behind the `prop-check` CLI command.
//! Each check samples fresh random instances (seeded, so reruns are
//! reproducible) and reports an observed-extremum summary.

use super::{run_scenario, BaseConfig, Protocol, RunOptions, Scenario, Sweep};
use crate::baselines::{solve_crs_sca, theta_grid, Strategy};
use crate::channel::{generate_channels, SystemConfig};
use crate::rates::PrecoderSet;
use crate::relay::{select_centralized, select_decentralized};
use crate::sca::{dc_linearized_lhs, dc_original_lhs, phi_lower_bound, Stream};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Result of one invariant suite.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name,
            passed,
            detail,
        }
    }
}

/// Runs every suite; `samples` scales the random-sampling checks.
pub fn run_all(samples: usize) -> Vec<CheckOutcome> {
    vec![
        surrogate_lower_bound(samples),
        dc_restriction(samples / 10 + 1),
        paired_draws_and_bookkeeping(),
        report_determinism(),
        selection_agreement(),
        monotone_trace(),
        grid_size(),
    ]
}

/// True when every suite passed.
pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}

/// The bilinear surrogate never exceeds the product it replaces and is
/// exact at its expansion point.
fn surrogate_lower_bound(samples: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51C);
    let mut worst_over = f64::NEG_INFINITY;
    let mut worst_expansion = 0.0_f64;
    for _ in 0..samples.max(1) {
        let theta = rng.random_range(1e-6..=1.0);
        let alpha = rng.random_range(0.0..=40.0);
        let theta_n = rng.random_range(1e-6..=1.0);
        let alpha_n = rng.random_range(0.0..=40.0);
        let over = phi_lower_bound(theta, alpha, theta_n, alpha_n) - theta * alpha;
        worst_over = worst_over.max(over);
        let gap = (phi_lower_bound(theta, alpha, theta, alpha) - theta * alpha).abs();
        worst_expansion = worst_expansion.max(gap);
    }
    CheckOutcome::new(
        "surrogate-lower-bound",
        worst_over <= 1e-12 && worst_expansion <= 1e-12,
        format!(
            "max overshoot {worst_over:.3e}, max expansion gap {worst_expansion:.3e} \
             over {samples} samples"
        ),
    )
}

/// The linearized interference constraint is a restriction of the
/// original one: never smaller, and exact at the expansion point.
fn dc_restriction(instances: usize) -> CheckOutcome {
    let config = SystemConfig::new(2, 2, 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0xDC);
    let mut worst_under = f64::NEG_INFINITY;
    let mut worst_expansion = 0.0_f64;
    for i in 0..instances.max(1) {
        let channels = generate_channels(&config, 9_000 + i as u64);
        let precoders = random_precoders(&mut rng, 2, 2);
        let expansion = random_precoders(&mut rng, 2, 2);
        let rho = rng.random_range(0.05..5.0);
        let expansion_rho = rng.random_range(0.05..5.0);
        for k in 0..2 {
            for stream in [Stream::Common, Stream::Private] {
                let original = dc_original_lhs(&channels, &precoders, rho, k, stream);
                let linearized = dc_linearized_lhs(
                    &channels,
                    &precoders,
                    rho,
                    &expansion,
                    expansion_rho,
                    k,
                    stream,
                );
                worst_under = worst_under.max(original - linearized);
                let at_expansion = dc_linearized_lhs(
                    &channels,
                    &precoders,
                    rho,
                    &precoders,
                    rho,
                    k,
                    stream,
                );
                worst_expansion = worst_expansion.max((at_expansion - original).abs());
            }
        }
    }
    CheckOutcome::new(
        "dc-restriction",
        worst_under <= 1e-10 && worst_expansion <= 1e-10,
        format!(
            "max undercut {worst_under:.3e}, max expansion gap {worst_expansion:.3e} \
             over {instances} instances"
        ),
    )
}

fn random_precoders(rng: &mut ChaCha8Rng, num_tx: usize, num_users: usize) -> PrecoderSet {
    let mut draw = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect()
    };
    PrecoderSet {
        common: draw(num_tx),
        private: (0..num_users).map(|_| draw(num_tx)).collect(),
    }
}

fn check_scenario() -> Scenario {
    Scenario {
        name: Some("prop-check".into()),
        trials: 3,
        base_seed: 101,
        strategies: vec![Strategy::Nrs, Strategy::Sdma],
        protocols: vec![Protocol::OneBest],
        base: BaseConfig {
            num_users: 2,
            num_tx_antennas: 2,
            snr_db: 10.0,
            bs_variances: None,
            user_variance: 1.0,
            // tight tolerance so the per-draw ordering margin reflects
            // the model, not early stopping of the iterative solver
            sca_tolerance: Some(1e-5),
            grid_step: None,
            timer_constant: None,
        },
        sweep: Sweep::SnrDb(vec![5.0, 15.0]),
    }
}

/// Every cell of a (sweep, trial) slice sees the same channel, the row
/// count matches the grid size, aggregates are plain means, and the
/// rate-splitting scheme never loses to private-only precoding on the
/// shared draw.
fn paired_draws_and_bookkeeping() -> CheckOutcome {
    let scenario = check_scenario();
    let report = match run_scenario(&scenario, &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            return CheckOutcome::new("paired-draws", false, format!("run failed: {e}"));
        }
    };
    let expected = 2 * 2 * 3;
    let mut problems = Vec::new();
    if report.rows.len() + report.failures != expected {
        problems.push(format!(
            "row count {} + failures {} != {expected}",
            report.rows.len(),
            report.failures
        ));
    }
    for row in &report.rows {
        for other in &report.rows {
            if row.sweep == other.sweep
                && row.trial == other.trial
                && row.channel_hash != other.channel_hash
            {
                problems.push("channel hash mismatch in a paired cell".into());
            }
        }
        if row.strategy == Strategy::Nrs {
            if let Some(partner) = report.rows.iter().find(|r| {
                r.sweep == row.sweep && r.trial == row.trial && r.strategy == Strategy::Sdma
            }) {
                if row.rate < partner.rate - 1e-3 {
                    problems.push(format!(
                        "nrs {} below sdma {} on a shared draw",
                        row.rate, partner.rate
                    ));
                }
            }
        }
    }
    for aggregate in &report.aggregates {
        let rates: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| {
                r.sweep == aggregate.sweep
                    && r.strategy == aggregate.strategy
                    && r.protocol == aggregate.protocol
            })
            .map(|r| r.rate)
            .collect();
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        if mean != aggregate.mean_rate {
            problems.push("aggregate mean is not the arithmetic row mean".into());
        }
    }
    CheckOutcome::new(
        "paired-draws",
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} rows, {} failures, pairing and means verified", report.rows.len(), report.failures)
        } else {
            problems.join("; ")
        },
    )
}

/// The same scenario run twice emits identical CSV bytes.
fn report_determinism() -> CheckOutcome {
    let scenario = check_scenario();
    let a = run_scenario(&scenario, &RunOptions::default());
    let b = run_scenario(&scenario, &RunOptions::default());
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let same = a.csv_string() == b.csv_string();
            CheckOutcome::new(
                "report-determinism",
                same,
                if same {
                    format!("{} identical rows across two runs", a.rows.len())
                } else {
                    "CSV bytes differ between runs".into()
                },
            )
        }
        (Err(e), _) | (_, Err(e)) => {
            CheckOutcome::new("report-determinism", false, format!("run failed: {e}"))
        }
    }
}

/// The timer-based decentralized protocol reproduces the centralized
/// ranking exactly on random draws.
fn selection_agreement() -> CheckOutcome {
    let config = SystemConfig::new(4, 2, 10.0);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for seed in 0..40u64 {
        let channels = generate_channels(&config, 5_000 + seed);
        for k1 in 1..=3usize {
            checked += 1;
            let central = select_centralized(&channels, k1);
            let decentralized = select_decentralized(&channels, k1, config.timer_constant);
            match (central, decentralized) {
                (Ok(a), Ok(b)) if a.group1 == b.group1 && a.group2 == b.group2 => {}
                _ => mismatches += 1,
            }
        }
    }
    CheckOutcome::new(
        "selection-agreement",
        mismatches == 0,
        format!("{mismatches} mismatches over {checked} draws"),
    )
}

/// The iterative solver's objective trace never decreases and every
/// reported iterate respects the original constraints.
fn monotone_trace() -> CheckOutcome {
    let config = SystemConfig::new(3, 2, 100.0).with_bs_variances(&[1.0, 0.3, 0.1]);
    let channels = generate_channels(&config, 3);
    let grouping = match select_centralized(&channels, 1) {
        Ok(g) => g,
        Err(e) => return CheckOutcome::new("monotone-trace", false, format!("selection: {e}")),
    };
    match solve_crs_sca(&channels, &grouping, &config) {
        Ok(solution) => {
            let mut monotone = true;
            for pair in solution.trace.windows(2) {
                if pair[1].objective < pair[0].objective - 1e-8 {
                    monotone = false;
                }
            }
            let max_violation = solution
                .trace
                .iter()
                .map(|r| r.max_violation)
                .fold(0.0_f64, f64::max);
            let passed = monotone && solution.converged && max_violation <= 1e-6;
            CheckOutcome::new(
                "monotone-trace",
                passed,
                format!(
                    "{} iterations, converged {}, max violation {max_violation:.3e}",
                    solution.iterations, solution.converged
                ),
            )
        }
        Err(e) => CheckOutcome::new("monotone-trace", false, format!("solve failed: {e}")),
    }
}

/// The default grid step produces exactly ten candidate time splits.
fn grid_size() -> CheckOutcome {
    let grid = theta_grid(0.1);
    CheckOutcome::new(
        "grid-size",
        grid.len() == 10 && *grid.last().unwrap() == 1.0,
        format!("{} points, last {}", grid.len(), grid.last().unwrap()),
    )
}
