//! Reference transmit strategies, all expressed as restrictions of the
//! cooperative rate-splitting optimizer so comparisons share one model
//! and one solver:
//!
//! * NRS — non-cooperative rate-splitting: theta frozen at 1, no
//!   relaying phase;
//! * ERS — equal-slot cooperative rate-splitting: theta frozen at 0.5;
//! * SDMA — linear precoding without a common stream: theta 1, p_c = 0;
//! * CRS-grid — cooperative scheme with theta found by exhaustive search
//!   over a fixed grid, one frozen-theta solve per point. This stands in
//!   for alternating-optimization baselines that cannot optimize theta
//!   jointly; it shares the SCA inner solver rather than reproducing
//!   their update rules, preserving what is being compared (joint vs.
//!   exhaustive theta) without importing a different model.

use crate::channel::{ChannelRealization, SystemConfig};
use crate::relay::RelayGrouping;
use crate::sca::{sca_solve, Solution, SolveError, SolveOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Strategy selector used by the experiment harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Cooperative rate-splitting, theta optimized jointly.
    CrsSca,
    /// Cooperative rate-splitting, theta from the grid search
    /// (step `grid_step` from the config).
    CrsGrid,
    /// Equal-slot cooperative rate-splitting (theta = 0.5).
    Ers,
    /// Non-cooperative rate-splitting (theta = 1).
    Nrs,
    /// Private streams only (theta = 1, no common stream).
    Sdma,
}

impl Strategy {
    /// Whether the strategy uses the relaying phase (needs a grouping).
    pub fn cooperative(self) -> bool {
        matches!(self, Strategy::CrsSca | Strategy::CrsGrid | Strategy::Ers)
    }

    pub const ALL: [Strategy; 5] = [
        Strategy::CrsSca,
        Strategy::CrsGrid,
        Strategy::Ers,
        Strategy::Nrs,
        Strategy::Sdma,
    ];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Strategy::CrsSca => "crs_sca",
            Strategy::CrsGrid => "crs_grid",
            Strategy::Ers => "ers",
            Strategy::Nrs => "nrs",
            Strategy::Sdma => "sdma",
        };
        f.write_str(name)
    }
}

/// Non-cooperative rate-splitting: the full frame is the direct phase.
pub fn solve_nrs(
    channels: &ChannelRealization,
    config: &SystemConfig,
) -> Result<Solution, SolveError> {
    sca_solve(channels, None, config, &SolveOptions::nrs())
}

/// Cooperative rate-splitting with the frame split equally.
pub fn solve_ers(
    channels: &ChannelRealization,
    grouping: &RelayGrouping,
    config: &SystemConfig,
) -> Result<Solution, SolveError> {
    sca_solve(channels, Some(grouping), config, &SolveOptions::ers())
}

/// Multi-user linear precoding without rate-splitting or cooperation.
pub fn solve_sdma(
    channels: &ChannelRealization,
    config: &SystemConfig,
) -> Result<Solution, SolveError> {
    sca_solve(channels, None, config, &SolveOptions::sdma())
}

/// Cooperative rate-splitting with jointly optimized theta.
pub fn solve_crs_sca(
    channels: &ChannelRealization,
    grouping: &RelayGrouping,
    config: &SystemConfig,
) -> Result<Solution, SolveError> {
    sca_solve(channels, Some(grouping), config, &SolveOptions::crs())
}

/// The theta search grid: positive multiples of `step` below 1, plus 1
/// itself. `step = 0.1` gives the ten points 0.1, 0.2, ..., 1.0.
pub fn theta_grid(step: f64) -> Vec<f64> {
    assert!(step > 0.0 && step < 1.0, "grid step must lie in (0, 1)");
    let mut grid = Vec::new();
    let mut i = 1usize;
    loop {
        let theta = step * i as f64;
        if theta >= 1.0 - 1e-12 {
            break;
        }
        grid.push(theta);
        i += 1;
    }
    grid.push(1.0);
    grid
}

/// Exhaustive theta search: one frozen-theta cooperative solve per grid
/// point (each from the standard initial point, run in parallel), best
/// rate wins; ties keep the smaller theta. Points whose solve fails are
/// skipped; the last error is returned only if every point fails.
pub fn solve_crs_grid(
    channels: &ChannelRealization,
    grouping: &RelayGrouping,
    config: &SystemConfig,
    step: f64,
) -> Result<Solution, SolveError> {
    let results: Vec<Result<Solution, SolveError>> = theta_grid(step)
        .par_iter()
        .map(|&theta| {
            sca_solve(
                channels,
                Some(grouping),
                config,
                &SolveOptions::crs_fixed_theta(theta),
            )
        })
        .collect();

    let mut best: Option<Solution> = None;
    let mut last_error = None;
    for result in results {
        match result {
            Ok(solution) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| solution.maxmin_rate > b.maxmin_rate);
                if better {
                    best = Some(solution);
                }
            }
            Err(e) => {
                log::debug!("grid point failed: {e}");
                last_error = Some(e);
            }
        }
    }
    best.ok_or_else(|| last_error.expect("empty grid is impossible"))
}

/// Runs one strategy. Cooperative strategies require `grouping`.
pub fn solve_strategy(
    strategy: Strategy,
    channels: &ChannelRealization,
    grouping: Option<&RelayGrouping>,
    config: &SystemConfig,
) -> Result<Solution, SolveError> {
    match strategy {
        Strategy::CrsSca => {
            solve_crs_sca(channels, grouping.ok_or(SolveError::MissingGrouping)?, config)
        }
        Strategy::CrsGrid => solve_crs_grid(
            channels,
            grouping.ok_or(SolveError::MissingGrouping)?,
            config,
            config.grid_step,
        ),
        Strategy::Ers => solve_ers(channels, grouping.ok_or(SolveError::MissingGrouping)?, config),
        Strategy::Nrs => solve_nrs(channels, config),
        Strategy::Sdma => solve_sdma(channels, config),
    }
}
