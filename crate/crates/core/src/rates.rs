//! Achievable-rate expressions for two-phase cooperative rate-splitting.
//!
//! Phase 1 (fraction `theta` of the frame): the BS sends a common stream
//! plus one private stream per user. Every user decodes the common stream
//! first, cancels it, then decodes its private stream. Phase 2 (fraction
//! `1 - theta`): the relaying users in group 1 re-encode the common
//! message (non-regenerative decode-and-forward) and transmit it to the
//! destination users in group 2, whose two-phase common rates add.
//!
//! All rates are in bits/s/Hz (log base 2). Everything here is a pure
//! function of explicit inputs — precoders, split vector, theta — so the
//! module doubles as an independent check on the optimizer's model.

use crate::channel::ChannelRealization;
use crate::relay::RelayGrouping;
use num_complex::Complex64;
use thiserror::Error;

/// Relative slack absorbed on power / rate-split feasibility checks;
/// interior-point solutions meet constraints only to solver tolerance.
pub const FEASIBILITY_SLACK: f64 = 1e-6;

/// Beamformers of one transmit strategy: a common precoder and one
/// private precoder per user, each of length N_t.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub common: Vec<Complex64>,
    pub private: Vec<Vec<Complex64>>,
}

impl PrecoderSet {
    /// All-zero precoders for K users and N_t antennas.
    pub fn zeros(num_users: usize, num_tx_antennas: usize) -> Self {
        Self {
            common: vec![Complex64::ZERO; num_tx_antennas],
            private: vec![vec![Complex64::ZERO; num_tx_antennas]; num_users],
        }
    }

    /// Total transmit power `||p_c||^2 + sum_k ||p_k||^2`.
    pub fn total_power(&self) -> f64 {
        let common: f64 = self.common.iter().map(Complex64::norm_sqr).sum();
        let private: f64 = self
            .private
            .iter()
            .flat_map(|p| p.iter())
            .map(Complex64::norm_sqr)
            .sum();
        common + private
    }
}

/// Per-user and per-group rates of one evaluated solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBreakdown {
    /// Private rates `R_k^[1]` earned in phase 1.
    pub private_direct: Vec<f64>,
    /// Common-stream rates `R_{c,k}^[1]` earned in phase 1.
    pub common_direct: Vec<f64>,
    /// Common-stream rates `R_{c,k}^[2]` earned in phase 2
    /// (zero for relaying users, who only transmit then).
    pub common_coop: Vec<f64>,
    /// `R_{c,1}`: worst phase-1 common rate over the relaying group.
    pub group1_common: f64,
    /// `R_{c,2}`: worst two-phase common rate over the destination group.
    pub group2_common: f64,
    /// Decodable common rate `R_c = min(R_{c,1}, R_{c,2})`.
    pub achievable_common: f64,
    /// Common-rate shares `C_k` the solution allocated.
    pub common_split: Vec<f64>,
    /// Totals `R_{k,tot} = R_k^[1] + C_k`.
    pub totals: Vec<f64>,
}

impl RateBreakdown {
    /// The max-min objective: worst total rate over all users.
    pub fn min_total(&self) -> f64 {
        self.totals.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Infeasible inputs detected while assembling a [`RateBreakdown`].
#[derive(Debug, Error)]
pub enum RateError {
    #[error("total transmit power {got:.6} exceeds budget {budget:.6} beyond slack")]
    PowerExceeded { got: f64, budget: f64 },
    #[error("common split sum {sum:.6} exceeds achievable common rate {rate:.6} by {violation:.3e}")]
    SplitExceedsCommon { sum: f64, rate: f64, violation: f64 },
    #[error("common split C_{index} = {value:.6} is negative")]
    NegativeSplit { index: usize, value: f64 },
    #[error("theta = {0} outside [0, 1]")]
    BadTheta(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Group-rate crossover failures.
#[derive(Debug, Error)]
pub enum CrossoverError {
    #[error(
        "no interior crossover: worst group-1 per-unit-time rate {f1_relay:.6} \
         does not exceed group-2's {f1_dest:.6} minus coop slope {f2_dest:.6}"
    )]
    NoCrossover {
        f1_relay: f64,
        f1_dest: f64,
        f2_dest: f64,
    },
}

// --- phase-1 SINRs ---------------------------------------------------------

/// `h^H p` for equal-length complex vectors.
pub fn inner_product(h: &[Complex64], p: &[Complex64]) -> Complex64 {
    debug_assert_eq!(h.len(), p.len());
    h.iter().zip(p).map(|(a, b)| a.conj() * b).sum()
}

/// `|h^H p|^2`.
pub fn gain(h: &[Complex64], p: &[Complex64]) -> f64 {
    inner_product(h, p).norm_sqr()
}

/// SINR of the common stream at user `k`: every private stream interferes.
pub fn common_sinr(channels: &ChannelRealization, precoders: &PrecoderSet, k: usize) -> f64 {
    let h = &channels.bs_channels[k];
    let interference: f64 = precoders.private.iter().map(|p| gain(h, p)).sum();
    gain(h, &precoders.common) / (interference + 1.0)
}

/// SINR of user `k`'s private stream after the common stream is removed:
/// only the other users' private streams interfere.
pub fn private_sinr(channels: &ChannelRealization, precoders: &PrecoderSet, k: usize) -> f64 {
    let h = &channels.bs_channels[k];
    let interference: f64 = precoders
        .private
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, p)| gain(h, p))
        .sum();
    gain(h, &precoders.private[k]) / (interference + 1.0)
}

// --- per-phase rates -------------------------------------------------------

/// Phase-1 private rate `theta * log2(1 + private SINR)` of user `k`.
pub fn private_rate_direct(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    k: usize,
    theta: f64,
) -> f64 {
    theta * (1.0 + private_sinr(channels, precoders, k)).log2()
}

/// Phase-1 common rate `theta * log2(1 + common SINR)` of user `k`.
pub fn common_rate_direct(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    k: usize,
    theta: f64,
) -> f64 {
    theta * (1.0 + common_sinr(channels, precoders, k)).log2()
}

/// Phase-2 common rate of destination user `k`: the relays' powers
/// combine additively, `(1-theta) * log2(1 + sum_j P_j |h_{k,j}|^2)`.
///
/// Calling this for a relaying user is a contract violation (they
/// transmit in phase 2 and receive nothing).
pub fn common_rate_coop(
    channels: &ChannelRealization,
    grouping: &RelayGrouping,
    relay_powers: &[f64],
    k: usize,
    theta: f64,
) -> f64 {
    assert!(
        !grouping.group1.contains(&k),
        "common_rate_coop called for relaying user {k}"
    );
    (1.0 - theta) * (1.0 + coop_receive_power(channels, grouping, relay_powers, k)).log2()
}

/// Combined relay power seen by destination `k`: `sum_{j in K1} P_j |h_{k,j}|^2`.
pub fn coop_receive_power(
    channels: &ChannelRealization,
    grouping: &RelayGrouping,
    relay_powers: &[f64],
    k: usize,
) -> f64 {
    grouping
        .group1
        .iter()
        .map(|&j| relay_powers[j] * channels.user_channels[k][j].norm_sqr())
        .sum()
}

/// Collapses per-user common rates into the group minima and the
/// decodable common rate `R_c = min(R_{c,1}, R_{c,2})`. Every user must
/// decode the common message, so it is capped by the worst relay in
/// phase 1 and the worst destination across both phases.
pub fn achievable_common_rate(
    grouping: &RelayGrouping,
    common_direct: &[f64],
    common_coop: &[f64],
) -> (f64, f64, f64) {
    assert!(
        !grouping.group1.is_empty() && !grouping.group2.is_empty(),
        "both groups must be nonempty"
    );
    let r_c1 = grouping
        .group1
        .iter()
        .map(|&k| common_direct[k])
        .fold(f64::INFINITY, f64::min);
    let r_c2 = grouping
        .group2
        .iter()
        .map(|&k| common_direct[k] + common_coop[k])
        .fold(f64::INFINITY, f64::min);
    (r_c1, r_c2, r_c1.min(r_c2))
}

// --- full-solution evaluation ---------------------------------------------

/// Evaluates a complete transmit strategy and verifies its feasibility.
///
/// `grouping = None` means no relaying phase (`theta` is forced to 1 by
/// the caller's construction): the common rate is the worst direct common
/// rate over all users. `bs_power` and `relay_powers` come from the
/// system config; the split vector `c` carries each user's share of the
/// common rate.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_solution(
    channels: &ChannelRealization,
    grouping: Option<&RelayGrouping>,
    precoders: &PrecoderSet,
    common_split: &[f64],
    theta: f64,
    bs_power: f64,
    relay_powers: &[f64],
) -> Result<RateBreakdown, RateError> {
    let k_total = channels.num_users();
    if precoders.private.len() != k_total {
        return Err(RateError::Dimension(format!(
            "{} private precoders for {k_total} users",
            precoders.private.len()
        )));
    }
    if common_split.len() != k_total {
        return Err(RateError::Dimension(format!(
            "split length {} for {k_total} users",
            common_split.len()
        )));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(RateError::BadTheta(theta));
    }
    let power = precoders.total_power();
    if power > bs_power * (1.0 + FEASIBILITY_SLACK) + FEASIBILITY_SLACK {
        return Err(RateError::PowerExceeded {
            got: power,
            budget: bs_power,
        });
    }
    for (index, &value) in common_split.iter().enumerate() {
        if value < -FEASIBILITY_SLACK {
            return Err(RateError::NegativeSplit { index, value });
        }
    }

    let private_direct: Vec<f64> = (0..k_total)
        .map(|k| private_rate_direct(channels, precoders, k, theta))
        .collect();
    let common_direct: Vec<f64> = (0..k_total)
        .map(|k| common_rate_direct(channels, precoders, k, theta))
        .collect();
    let common_coop: Vec<f64> = match grouping {
        Some(g) => (0..k_total)
            .map(|k| {
                if g.group1.contains(&k) {
                    0.0
                } else {
                    common_rate_coop(channels, g, relay_powers, k, theta)
                }
            })
            .collect(),
        None => vec![0.0; k_total],
    };

    let (group1_common, group2_common, achievable_common) = match grouping {
        Some(g) => achievable_common_rate(g, &common_direct, &common_coop),
        None => {
            // single-phase scheme: everyone must decode in phase 1
            let worst = common_direct.iter().copied().fold(f64::INFINITY, f64::min);
            (worst, worst, worst)
        }
    };

    let sum: f64 = common_split.iter().sum();
    if sum > achievable_common + FEASIBILITY_SLACK * (1.0 + achievable_common) {
        return Err(RateError::SplitExceedsCommon {
            sum,
            rate: achievable_common,
            violation: sum - achievable_common,
        });
    }

    let totals: Vec<f64> = private_direct
        .iter()
        .zip(common_split)
        .map(|(r, c)| r + c)
        .collect();

    Ok(RateBreakdown {
        private_direct,
        common_direct,
        common_coop,
        group1_common,
        group2_common,
        achievable_common,
        common_split: common_split.to_vec(),
        totals,
    })
}

// --- group-rate crossover diagnostic ---------------------------------------

/// Per-unit-time log terms of the two phases: `f1[k] = log2(1 + common
/// SINR of k)` and, for destinations, `f2[k] = log2(1 + combined relay
/// power at k)`. The group common rates are then `R_{c,1} = theta *
/// min_{K1} f1` and `R_{c,2} = min_{K2} (theta*f1 + (1-theta)*f2)`.
fn unit_time_terms(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    grouping: &RelayGrouping,
    relay_powers: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let k_total = channels.num_users();
    let f1: Vec<f64> = (0..k_total)
        .map(|k| (1.0 + common_sinr(channels, precoders, k)).log2())
        .collect();
    let f2: Vec<f64> = (0..k_total)
        .map(|k| {
            if grouping.group1.contains(&k) {
                0.0
            } else {
                (1.0 + coop_receive_power(channels, grouping, relay_powers, k)).log2()
            }
        })
        .collect();
    (f1, f2)
}

/// The time-slot fraction at which the two group common rates cross.
///
/// With worst-case users `k1 = argmin_{K1} f1` and `k2 = argmin_{K2}
/// (f1 + f2)`, the crossover solves `theta*f1[k1] = theta*f1[k2] +
/// (1-theta)*f2[k2]`, giving `f2[k2] / (f1[k1] - f1[k2] + f2[k2])`.
/// A nonpositive denominator means the worst relay decodes no faster
/// than the worst destination and no interior crossover exists.
pub fn theta_crossover(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    grouping: &RelayGrouping,
    relay_powers: &[f64],
) -> Result<f64, CrossoverError> {
    let (f1, f2) = unit_time_terms(channels, precoders, grouping, relay_powers);
    let k1 = grouping
        .group1
        .iter()
        .copied()
        .min_by(|&a, &b| f1[a].total_cmp(&f1[b]))
        .expect("group1 nonempty");
    let k2 = grouping
        .group2
        .iter()
        .copied()
        .min_by(|&a, &b| (f1[a] + f2[a]).total_cmp(&(f1[b] + f2[b])))
        .expect("group2 nonempty");
    let denominator = f1[k1] - f1[k2] + f2[k2];
    if denominator <= 0.0 {
        return Err(CrossoverError::NoCrossover {
            f1_relay: f1[k1],
            f1_dest: f1[k2],
            f2_dest: f2[k2],
        });
    }
    Ok(f2[k2] / denominator)
}

/// Grouping-rule diagnostic: the worst relaying user's phase-1 common
/// rate must exceed the worst destination user's. Holds at interior-theta
/// optima; a violation means swapping groups would raise the common rate.
pub fn grouping_rule_holds(breakdown: &RateBreakdown, grouping: &RelayGrouping) -> bool {
    let worst_relay = grouping
        .group1
        .iter()
        .map(|&k| breakdown.common_direct[k])
        .fold(f64::INFINITY, f64::min);
    let worst_dest = grouping
        .group2
        .iter()
        .map(|&k| breakdown.common_direct[k])
        .fold(f64::INFINITY, f64::min);
    worst_relay > worst_dest
}
