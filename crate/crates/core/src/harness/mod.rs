//! Monte Carlo experiment driver: scenario files describe a sweep
//! (SNR, user count, or relay power), a set of strategies and relay
//! selection protocols, and a trial count; the driver runs every
//! combination on shared per-trial channel draws and assembles a
//! deterministic report.
//!
//! Pairing discipline: trial `i` always uses seed `base_seed + i`, and
//! every strategy/protocol cell at a given (sweep point, trial) sees the
//! identical channel realization, so differences between cells are
//! attributable to the strategies alone. Trials run in parallel; rows
//! are merged by (sweep, strategy, protocol, trial) ordering so the
//! output is independent of scheduling.

pub mod checks;
pub mod plot;
pub mod report;

pub use report::{Aggregate, ExperimentReport, ReportRow};

use crate::baselines::{solve_strategy, Strategy};
use crate::channel::{generate_channels, snr_db_to_power, ChannelRealization, ConfigError, SystemConfig};
use crate::relay::{
    select_centralized, select_optimal, select_random, RelayGrouping, SelectionError,
};
use crate::sca::SolveError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Errors surfaced by scenario handling and experiment runs.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("relay selection failed: {0}")]
    Selection(#[from] SelectionError),
    #[error("solver failed: {0}")]
    Solve(#[from] SolveError),
    #[error("report has no rows")]
    EmptyReport,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
}

/// How the relaying group is chosen each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Exhaustive search over all candidate groups, solving each one.
    Optimal,
    /// The single strongest user relays.
    OneBest,
    /// The strongest half of the users relay (at least one user is
    /// always left to assist).
    HalfBest,
    /// One uniformly random user relays.
    OneRandom,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::Optimal,
        Protocol::OneBest,
        Protocol::HalfBest,
        Protocol::OneRandom,
    ];

    /// Relay count used by the rank-based variants.
    pub fn relay_count(self, num_users: usize) -> usize {
        match self {
            Protocol::HalfBest => (num_users.div_ceil(2)).min(num_users - 1).max(1),
            _ => 1,
        }
    }

    /// Picks the relay grouping for one trial. `strategy` matters only
    /// for [`Protocol::Optimal`], which scores candidates by actually
    /// solving them.
    pub fn select_grouping(
        self,
        channels: &ChannelRealization,
        config: &SystemConfig,
        strategy: Strategy,
        seed: u64,
    ) -> Result<RelayGrouping, HarnessError> {
        match self {
            Protocol::OneBest => Ok(select_centralized(channels, 1)?),
            Protocol::HalfBest => Ok(select_centralized(
                channels,
                self.relay_count(channels.num_users()),
            )?),
            Protocol::OneRandom => Ok(select_random(
                channels.num_users(),
                seed ^ 0xA5A5_5A5A_5555_AAAA,
            )?),
            Protocol::Optimal => {
                let (grouping, _) = select_optimal(channels, |candidate| {
                    solve_strategy(strategy, channels, Some(candidate), config)
                        .ok()
                        .map(|s| s.maxmin_rate)
                })?;
                Ok(grouping)
            }
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Protocol::Optimal => "optimal",
            Protocol::OneBest => "one_best",
            Protocol::HalfBest => "half_best",
            Protocol::OneRandom => "one_random",
        };
        f.write_str(name)
    }
}

/// Swept quantity and its values. SNR and relay power are in dB over
/// unit noise power and converted to linear watts once, here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    /// BS transmit SNR sweep; relay powers track the BS power.
    SnrDb(Vec<f64>),
    /// User-count sweep; BS channel variances decrease uniformly from 1
    /// with step 1/K.
    NumUsers(Vec<usize>),
    /// Relay transmit power sweep at fixed BS SNR.
    RelayPowerDb(Vec<f64>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::SnrDb(v) => v.len(),
            Sweep::NumUsers(v) => v.len(),
            Sweep::RelayPowerDb(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn default_user_variance() -> f64 {
    1.0
}

/// Swept-independent part of the system model. Omitted optional fields
/// fall back to the library defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    pub num_users: usize,
    pub num_tx_antennas: usize,
    /// BS transmit SNR in dB over unit noise power.
    pub snr_db: f64,
    /// Per-user BS channel variances; defaults to all ones. Ignored by
    /// the user-count sweep, which derives its own profile.
    #[serde(default)]
    pub bs_variances: Option<Vec<f64>>,
    /// Uniform user-to-user channel variance.
    #[serde(default = "default_user_variance")]
    pub user_variance: f64,
    #[serde(default)]
    pub sca_tolerance: Option<f64>,
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default)]
    pub timer_constant: Option<f64>,
}

/// A fully described experiment: model, sweep, strategy/protocol grid,
/// and trial plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub trials: u64,
    pub base_seed: u64,
    pub strategies: Vec<Strategy>,
    pub protocols: Vec<Protocol>,
    pub base: BaseConfig,
    pub sweep: Sweep,
}

/// One sweep point resolved into a concrete configuration.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Numeric sweep coordinate recorded in the report.
    pub value: f64,
    pub config: SystemConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Scenario("trials must be positive".into()));
        }
        if self.strategies.is_empty() {
            return Err(HarnessError::Scenario("strategies list is empty".into()));
        }
        if self.protocols.is_empty() {
            return Err(HarnessError::Scenario("protocols list is empty".into()));
        }
        if self.sweep.is_empty() {
            return Err(HarnessError::Scenario("sweep has no values".into()));
        }
        self.points().map(|_| ())
    }

    /// Resolves every sweep value into a validated configuration.
    pub fn points(&self) -> Result<Vec<SweepPoint>, HarnessError> {
        let base_power = snr_db_to_power(self.base.snr_db);
        let mut points = Vec::with_capacity(self.sweep.len());
        match &self.sweep {
            Sweep::SnrDb(values) => {
                for &snr in values {
                    let config = self.build_config(self.base.num_users, snr_db_to_power(snr))?;
                    points.push(SweepPoint { value: snr, config });
                }
            }
            Sweep::NumUsers(values) => {
                if self.base.bs_variances.is_some() {
                    log::warn!(
                        "user-count sweep derives its own variance profile; \
                         ignoring the explicit bs_variances"
                    );
                }
                for &users in values {
                    let mut config = self.build_config(users, base_power)?;
                    let profile: Vec<f64> =
                        (0..users).map(|i| 1.0 - i as f64 / users as f64).collect();
                    config = config.with_bs_variances(&profile);
                    config.validate()?;
                    points.push(SweepPoint {
                        value: users as f64,
                        config,
                    });
                }
            }
            Sweep::RelayPowerDb(values) => {
                for &relay_db in values {
                    let mut config = self.build_config(self.base.num_users, base_power)?;
                    config = config.with_relay_power(snr_db_to_power(relay_db));
                    config.validate()?;
                    points.push(SweepPoint {
                        value: relay_db,
                        config,
                    });
                }
            }
        }
        Ok(points)
    }

    fn build_config(&self, users: usize, power: f64) -> Result<SystemConfig, HarnessError> {
        let mut config = SystemConfig::new(users, self.base.num_tx_antennas, power);
        if let Some(variances) = &self.base.bs_variances {
            if !matches!(self.sweep, Sweep::NumUsers(_)) {
                if variances.len() != users {
                    return Err(HarnessError::Scenario(format!(
                        "bs_variances has {} entries for {} users",
                        variances.len(),
                        users
                    )));
                }
                config = config.with_bs_variances(variances);
            }
        }
        config = config.with_user_variance(self.base.user_variance);
        if let Some(tol) = self.base.sca_tolerance {
            config.sca_tolerance = tol;
        }
        if let Some(step) = self.base.grid_step {
            config.grid_step = step;
        }
        if let Some(lambda) = self.base.timer_constant {
            config.timer_constant = lambda;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Loads a scenario from a TOML file and validates it.
pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let scenario: Scenario = toml::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Run-time switches that do not belong in the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record wall-clock solve times. Off by default so that repeated
    /// runs of the same scenario produce byte-identical reports.
    pub timing: bool,
}

/// Executes the full sweep × strategy × protocol × trial grid.
///
/// Failed solves are logged, counted in [`ExperimentReport::failures`],
/// and excluded from the rows, so a long sweep survives isolated
/// numerical failures.
pub fn run_scenario(
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<ExperimentReport, HarnessError> {
    scenario.validate()?;
    let points = scenario.points()?;

    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..scenario.trials).map(move |t| (p, t)))
        .collect();

    let outputs: Vec<(Vec<OrderedRow>, usize)> = tasks
        .par_iter()
        .map(|&(point_idx, trial)| run_trial(scenario, point_idx, &points[point_idx], trial, options))
        .collect();

    let mut rows: Vec<OrderedRow> = Vec::new();
    let mut failures = 0usize;
    for (trial_rows, trial_failures) in outputs {
        rows.extend(trial_rows);
        failures += trial_failures;
    }
    rows.sort_by_key(|r| (r.point_idx, r.strategy_idx, r.protocol_idx, r.row.trial));
    let rows = rows.into_iter().map(|r| r.row).collect();
    Ok(ExperimentReport::from_rows(rows, failures))
}

/// Row plus its position in the scenario's declared ordering, used for
/// the deterministic merge.
struct OrderedRow {
    point_idx: usize,
    strategy_idx: usize,
    protocol_idx: usize,
    row: ReportRow,
}

fn run_trial(
    scenario: &Scenario,
    point_idx: usize,
    point: &SweepPoint,
    trial: u64,
    options: &RunOptions,
) -> (Vec<OrderedRow>, usize) {
    let seed = scenario.base_seed.wrapping_add(trial);
    let channels = generate_channels(&point.config, seed);
    let channel_hash = channels.content_hash();
    let mut rows = Vec::new();
    let mut failures = 0usize;

    for (strategy_idx, &strategy) in scenario.strategies.iter().enumerate() {
        if strategy.cooperative() {
            for (protocol_idx, &protocol) in scenario.protocols.iter().enumerate() {
                let started = Instant::now();
                let outcome = protocol
                    .select_grouping(&channels, &point.config, strategy, seed)
                    .and_then(|grouping| {
                        solve_strategy(strategy, &channels, Some(&grouping), &point.config)
                            .map_err(HarnessError::from)
                    });
                match outcome {
                    Ok(solution) => rows.push(OrderedRow {
                        point_idx,
                        strategy_idx,
                        protocol_idx,
                        row: ReportRow {
                            sweep: point.value,
                            strategy,
                            protocol,
                            trial,
                            rate: solution.maxmin_rate,
                            theta: solution.theta,
                            iterations: solution.iterations,
                            wall_ms: elapsed_ms(started, options),
                            channel_hash,
                        },
                    }),
                    Err(e) => {
                        log::warn!(
                            "trial {trial} sweep {} {strategy}/{protocol} failed: {e}",
                            point.value
                        );
                        failures += 1;
                    }
                }
            }
        } else {
            // the relaying protocol cannot affect a non-cooperative
            // strategy, so solve once and report the same result in
            // every protocol cell to keep the grid rectangular
            let started = Instant::now();
            match solve_strategy(strategy, &channels, None, &point.config) {
                Ok(solution) => {
                    let wall_ms = elapsed_ms(started, options);
                    for (protocol_idx, &protocol) in scenario.protocols.iter().enumerate() {
                        rows.push(OrderedRow {
                            point_idx,
                            strategy_idx,
                            protocol_idx,
                            row: ReportRow {
                                sweep: point.value,
                                strategy,
                                protocol,
                                trial,
                                rate: solution.maxmin_rate,
                                theta: solution.theta,
                                iterations: solution.iterations,
                                wall_ms,
                                channel_hash,
                            },
                        });
                    }
                }
                Err(e) => {
                    log::warn!(
                        "trial {trial} sweep {} {strategy} failed: {e}",
                        point.value
                    );
                    failures += scenario.protocols.len();
                }
            }
        }
    }
    (rows, failures)
}

fn elapsed_ms(started: Instant, options: &RunOptions) -> u64 {
    if options.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_scenario() -> Scenario {
        Scenario {
            name: Some("tiny".into()),
            trials: 2,
            base_seed: 11,
            strategies: vec![Strategy::Nrs, Strategy::Sdma],
            protocols: vec![Protocol::OneBest],
            base: BaseConfig {
                num_users: 2,
                num_tx_antennas: 2,
                snr_db: 10.0,
                bs_variances: None,
                user_variance: 1.0,
                sca_tolerance: Some(1e-5),
                grid_step: None,
                timer_constant: None,
            },
            sweep: Sweep::SnrDb(vec![5.0, 10.0]),
        }
    }

    #[test]
    fn scenario_toml_round_trip() {
        let text = r#"
            name = "demo"
            trials = 3
            base_seed = 7
            strategies = ["crs_sca", "nrs"]
            protocols = ["one_best", "optimal"]

            [base]
            num_users = 3
            num_tx_antennas = 2
            snr_db = 20.0
            bs_variances = [1.0, 0.3, 0.1]

            [sweep]
            kind = "snr_db"
            values = [0.0, 10.0, 20.0]
        "#;
        let scenario: Scenario = toml::from_str(text).unwrap();
        scenario.validate().unwrap();
        assert_eq!(scenario.strategies, vec![Strategy::CrsSca, Strategy::Nrs]);
        assert_eq!(
            scenario.protocols,
            vec![Protocol::OneBest, Protocol::Optimal]
        );
        let points = scenario.points().unwrap();
        assert_eq!(points.len(), 3);
        assert!((points[2].config.bs_power - 100.0).abs() < 1e-9);
        assert_eq!(points[2].config.bs_variances, vec![1.0, 0.3, 0.1]);

        let back = toml::to_string(&scenario).unwrap();
        let again: Scenario = toml::from_str(&back).unwrap();
        assert_eq!(again.strategies, scenario.strategies);
        assert_eq!(again.trials, scenario.trials);
    }

    #[test]
    fn user_count_sweep_derives_the_variance_profile() {
        let mut scenario = tiny_scenario();
        scenario.sweep = Sweep::NumUsers(vec![2, 4]);
        let points = scenario.points().unwrap();
        assert_eq!(points[0].config.bs_variances, vec![1.0, 0.5]);
        assert_eq!(points[1].config.bs_variances, vec![1.0, 0.75, 0.5, 0.25]);
        assert_eq!(points[1].value, 4.0);
    }

    #[test]
    fn relay_power_sweep_only_touches_relay_powers() {
        let mut scenario = tiny_scenario();
        scenario.sweep = Sweep::RelayPowerDb(vec![0.0, 20.0]);
        let points = scenario.points().unwrap();
        let base_power = snr_db_to_power(10.0);
        for point in &points {
            assert!((point.config.bs_power - base_power).abs() < 1e-12);
        }
        assert_eq!(points[0].config.relay_powers, vec![1.0, 1.0]);
        assert_eq!(points[1].config.relay_powers, vec![100.0, 100.0]);
    }

    #[test]
    fn rejects_degenerate_scenarios() {
        let mut s = tiny_scenario();
        s.trials = 0;
        assert!(matches!(s.validate(), Err(HarnessError::Scenario(_))));
        let mut s = tiny_scenario();
        s.strategies.clear();
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.sweep = Sweep::SnrDb(vec![]);
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.base.bs_variances = Some(vec![1.0]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn run_produces_a_rectangular_paired_grid() {
        let scenario = tiny_scenario();
        let report = run_scenario(&scenario, &RunOptions::default()).unwrap();
        // 2 sweep points x 2 strategies x 1 protocol x 2 trials
        assert_eq!(report.rows.len() + report.failures, 8);

        // paired draws: identical channel hash across strategies at a
        // fixed (sweep, trial)
        for row in &report.rows {
            let partner = report
                .rows
                .iter()
                .find(|r| {
                    r.sweep == row.sweep && r.trial == row.trial && r.strategy != row.strategy
                })
                .unwrap();
            assert_eq!(row.channel_hash, partner.channel_hash);
            // rate-splitting cannot lose to private-only precoding on
            // the same channel (it contains it as a special case)
            if row.strategy == Strategy::Nrs && partner.strategy == Strategy::Sdma {
                assert!(row.rate >= partner.rate - 1e-3);
            }
        }

        // deterministic merge order
        let mut sorted = report.rows.clone();
        sorted.sort_by(|a, b| {
            a.sweep
                .partial_cmp(&b.sweep)
                .unwrap()
                .then_with(|| format!("{}", a.strategy).cmp(&format!("{}", b.strategy)))
                .then_with(|| a.trial.cmp(&b.trial))
        });
        let keys: Vec<_> = report
            .rows
            .iter()
            .map(|r| (r.sweep.to_bits(), format!("{}", r.strategy), r.trial))
            .collect();
        let sorted_keys: Vec<_> = sorted
            .iter()
            .map(|r| (r.sweep.to_bits(), format!("{}", r.strategy), r.trial))
            .collect();
        assert_eq!(keys, sorted_keys);

        // wall times are zeroed unless timing was requested
        assert!(report.rows.iter().all(|r| r.wall_ms == 0));
    }

    #[test]
    fn repeated_runs_are_identical() {
        let scenario = tiny_scenario();
        let a = run_scenario(&scenario, &RunOptions::default()).unwrap();
        let b = run_scenario(&scenario, &RunOptions::default()).unwrap();
        assert_eq!(a.csv_string(), b.csv_string());
    }
}
