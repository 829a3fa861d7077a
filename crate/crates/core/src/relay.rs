//! Stage 1 of the two-stage design: choosing which users relay.
//!
//! Four protocols produce a [`RelayGrouping`]:
//! * centralized — the BS ranks users by channel strength and picks the
//!   strongest `K1_count`;
//! * decentralized — users run countdown timers `T_k = lambda / ||h_k||^2`
//!   and self-select round by round (simulated logically, no wall clock);
//!   under perfect channel knowledge the result equals the centralized one;
//! * optimal — enumerate every nonempty proper subset as the relay group,
//!   solve stage 2 for each, keep the best;
//! * random — a uniformly drawn single relay, as a baseline.
//!
//! [`overhead`] accounts the signaling and time cost of each protocol
//! (RTS/CTS handshake plus flag packets, plus timer time when
//! decentralized).

use crate::channel::ChannelRealization;
use std::fmt;
use thiserror::Error;

/// How a user ended up selected, for the selection log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionMetric {
    /// Position in the BS's strength ranking (0 = strongest).
    Rank(usize),
    /// Timer value at which the user fired, in time units.
    Timer(f64),
    /// Drawn uniformly at random.
    Random,
    /// Chosen by exhaustive enumeration.
    Enumerated,
}

/// One selection event: in `round`, `user` joined the relay group.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEvent {
    pub round: usize,
    pub user: usize,
    pub metric: SelectionMetric,
}

impl fmt::Display for SelectionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.metric {
            SelectionMetric::Rank(r) => {
                write!(f, "round {} user {} rank {}", self.round, self.user, r)
            }
            SelectionMetric::Timer(t) => {
                write!(f, "round {} user {} timer {:.6}", self.round, self.user, t)
            }
            SelectionMetric::Random => write!(f, "round {} user {} random", self.round, self.user),
            SelectionMetric::Enumerated => {
                write!(f, "round {} user {} enumerated", self.round, self.user)
            }
        }
    }
}

/// A partition of the users into relays (group 1) and destinations
/// (group 2), with the events that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayGrouping {
    /// Relaying users, in selection order.
    pub group1: Vec<usize>,
    /// Destination users, ascending.
    pub group2: Vec<usize>,
    /// How each relay was chosen.
    pub selection_log: Vec<SelectionEvent>,
}

impl RelayGrouping {
    /// Builds a grouping directly from the two index sets (no log);
    /// panics unless they partition `{0..K}` with both sides nonempty.
    pub fn from_groups(group1: Vec<usize>, group2: Vec<usize>) -> Self {
        let g = Self {
            group1,
            group2,
            selection_log: Vec::new(),
        };
        g.assert_partition();
        g
    }

    pub fn num_users(&self) -> usize {
        self.group1.len() + self.group2.len()
    }

    /// Panics unless group1 and group2 partition `{0..K}` and neither is
    /// empty. Every selection routine runs this before returning.
    pub fn assert_partition(&self) {
        let k = self.num_users();
        assert!(
            !self.group1.is_empty() && !self.group2.is_empty(),
            "both groups must be nonempty"
        );
        let mut seen = vec![false; k];
        for &u in self.group1.iter().chain(&self.group2) {
            assert!(u < k, "user index {u} out of range for K = {k}");
            assert!(!seen[u], "user {u} appears twice");
            seen[u] = true;
        }
    }

    /// The selection log in a line-per-event text form.
    pub fn log_text(&self) -> String {
        self.selection_log
            .iter()
            .map(|e| e.to_string() + "\n")
            .collect()
    }
}

/// Relay-selection failures.
#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("relay count {count} out of range for K = {num_users} (need 1 <= count < K)")]
    CountOutOfRange { count: usize, num_users: usize },
    #[error("timer lambda must be positive, got {0}")]
    BadLambda(f64),
    #[error("selection stalled in round {round}: remaining users all have zero channel strength")]
    Stalled { round: usize },
    #[error("enumeration over K = {num_users} users exceeds the guard of {guard}; use select_optimal_unguarded")]
    TooManyUsers { num_users: usize, guard: usize },
    #[error("no candidate grouping produced a solution")]
    NoSolution,
}

/// Largest K for which exhaustive grouping enumeration is allowed by
/// default: 2^6 - 2 = 62 stage-2 solves per trial.
pub const ENUMERATION_GUARD: usize = 6;

// --- protocols -------------------------------------------------------------

/// BS-side selection: the `k1_count` users with the largest `||h_k||^2`
/// relay. Equal strengths break toward the lower index.
pub fn select_centralized(
    channels: &ChannelRealization,
    k1_count: usize,
) -> Result<RelayGrouping, SelectionError> {
    let k = channels.num_users();
    if k1_count == 0 || k1_count >= k {
        return Err(SelectionError::CountOutOfRange {
            count: k1_count,
            num_users: k,
        });
    }
    let strengths = channels.strengths();
    let mut order: Vec<usize> = (0..k).collect();
    // sort by descending strength, index ascending on ties
    order.sort_by(|&a, &b| strengths[b].total_cmp(&strengths[a]).then(a.cmp(&b)));

    let group1: Vec<usize> = order[..k1_count].to_vec();
    let mut group2: Vec<usize> = order[k1_count..].to_vec();
    group2.sort_unstable();
    let selection_log = group1
        .iter()
        .enumerate()
        .map(|(rank, &user)| SelectionEvent {
            round: rank,
            user,
            metric: SelectionMetric::Rank(rank),
        })
        .collect();

    let g = RelayGrouping {
        group1,
        group2,
        selection_log,
    };
    g.assert_partition();
    Ok(g)
}

/// User-side selection: every unselected user arms a timer
/// `lambda / ||h_k||^2`; the first to reach zero announces itself and the
/// round repeats until `k1_count` relays exist. Exact timer ties resolve
/// to the lower index with a logged warning (collisions are out of
/// scope). A round where every remaining timer is infinite (zero
/// strength) stalls.
pub fn select_decentralized(
    channels: &ChannelRealization,
    k1_count: usize,
    lambda: f64,
) -> Result<RelayGrouping, SelectionError> {
    let k = channels.num_users();
    if k1_count == 0 || k1_count >= k {
        return Err(SelectionError::CountOutOfRange {
            count: k1_count,
            num_users: k,
        });
    }
    if !(lambda > 0.0) {
        return Err(SelectionError::BadLambda(lambda));
    }
    let strengths = channels.strengths();
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut group1 = Vec::with_capacity(k1_count);
    let mut selection_log = Vec::with_capacity(k1_count);

    for round in 0..k1_count {
        let mut best: Option<(usize, f64)> = None;
        let mut tie = false;
        for &user in &remaining {
            if strengths[user] <= 0.0 {
                continue; // timer never fires
            }
            let timer = lambda / strengths[user];
            match best {
                None => best = Some((user, timer)),
                Some((_, t)) if timer < t => {
                    best = Some((user, timer));
                    tie = false;
                }
                Some((_, t)) if timer == t => tie = true,
                _ => {}
            }
        }
        let (user, timer) = best.ok_or(SelectionError::Stalled { round })?;
        if tie {
            log::warn!(
                "round {round}: simultaneous timer fire at {timer:.6}; \
                 resolving to user {user} by index"
            );
        }
        remaining.retain(|&u| u != user);
        group1.push(user);
        selection_log.push(SelectionEvent {
            round,
            user,
            metric: SelectionMetric::Timer(timer),
        });
    }

    remaining.sort_unstable();
    let g = RelayGrouping {
        group1,
        group2: remaining,
        selection_log,
    };
    g.assert_partition();
    Ok(g)
}

/// Uniformly random single relay; deterministic in `seed`.
pub fn select_random(num_users: usize, seed: u64) -> Result<RelayGrouping, SelectionError> {
    use rand::{Rng, SeedableRng};
    if num_users < 2 {
        return Err(SelectionError::CountOutOfRange {
            count: 1,
            num_users,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let user = rng.random_range(0..num_users);
    let group2 = (0..num_users).filter(|&u| u != user).collect();
    let g = RelayGrouping {
        group1: vec![user],
        group2,
        selection_log: vec![SelectionEvent {
            round: 0,
            user,
            metric: SelectionMetric::Random,
        }],
    };
    g.assert_partition();
    Ok(g)
}

/// All candidate relay groups for K users: every nonempty proper subset,
/// ordered by size then lexicographically.
pub fn enumerate_groupings(num_users: usize) -> Vec<RelayGrouping> {
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << num_users) - 1)
        .map(|mask| {
            (0..num_users)
                .filter(|&u| mask & (1 << u) != 0)
                .collect::<Vec<_>>()
        })
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
        .into_iter()
        .map(|group1| {
            let group2 = (0..num_users).filter(|u| !group1.contains(u)).collect();
            let selection_log = group1
                .iter()
                .enumerate()
                .map(|(round, &user)| SelectionEvent {
                    round,
                    user,
                    metric: SelectionMetric::Enumerated,
                })
                .collect();
            RelayGrouping {
                group1,
                group2,
                selection_log,
            }
        })
        .collect()
}

/// Exhaustive grouping search: runs `solve` (the stage-2 optimizer) on
/// every candidate and keeps the highest rate. `solve` returning `None`
/// (solver failure) skips that candidate. Ties keep the earlier
/// candidate, i.e. smaller relay group, then lexicographically first.
/// Guarded to `K <= 6`; use [`select_optimal_unguarded`] beyond that.
pub fn select_optimal(
    channels: &ChannelRealization,
    mut solve: impl FnMut(&RelayGrouping) -> Option<f64>,
) -> Result<(RelayGrouping, f64), SelectionError> {
    let k = channels.num_users();
    if k > ENUMERATION_GUARD {
        return Err(SelectionError::TooManyUsers {
            num_users: k,
            guard: ENUMERATION_GUARD,
        });
    }
    select_optimal_unguarded(channels, &mut solve)
}

/// [`select_optimal`] without the K guard, for callers that accept the
/// exponential cost explicitly.
pub fn select_optimal_unguarded(
    channels: &ChannelRealization,
    solve: &mut impl FnMut(&RelayGrouping) -> Option<f64>,
) -> Result<(RelayGrouping, f64), SelectionError> {
    let mut best: Option<(RelayGrouping, f64)> = None;
    for candidate in enumerate_groupings(channels.num_users()) {
        if let Some(rate) = solve(&candidate) {
            let better = match &best {
                None => true,
                Some((_, best_rate)) => rate > *best_rate,
            };
            if better {
                best = Some((candidate, rate));
            }
        }
    }
    best.ok_or(SelectionError::NoSolution)
}

// --- overhead accounting ---------------------------------------------------

/// Which selection machinery the overhead is charged for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverheadScheme {
    Centralized,
    Decentralized,
    /// Strategies without user relaying (handshake only).
    NoRelaying,
}

/// Packet sizes in symbols, plus the symbol duration in time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSizes {
    pub n_rts: u64,
    pub n_cts: u64,
    /// Flag packet of the centralized protocol (selection of all users).
    pub n_flag_c: u64,
    /// Flag packet of the decentralized protocol (one user's selection).
    pub n_flag_d: u64,
    pub symbol_duration: f64,
}

/// Signaling and time cost of one selection scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadReport {
    pub scheme: OverheadScheme,
    pub packet_sizes: PacketSizes,
    /// Total symbols exchanged.
    pub signaling_symbols: u64,
    /// Total time: signaling symbols times the symbol duration, plus the
    /// summed fired-timer values when decentralized.
    pub time_units: f64,
}

/// Accounts the selection overhead. `fired_timers` are the timer values
/// from a decentralized run's selection log (ignored otherwise).
pub fn overhead(
    scheme: OverheadScheme,
    num_users: usize,
    k1_count: usize,
    packet_sizes: PacketSizes,
    fired_timers: &[f64],
) -> OverheadReport {
    let k = num_users as u64;
    let handshake = packet_sizes.n_rts + packet_sizes.n_cts * k;
    let signaling_symbols = match scheme {
        OverheadScheme::Centralized => handshake + packet_sizes.n_flag_c,
        OverheadScheme::Decentralized => handshake + packet_sizes.n_flag_d * k1_count as u64,
        OverheadScheme::NoRelaying => handshake,
    };
    let mut time_units = signaling_symbols as f64 * packet_sizes.symbol_duration;
    if scheme == OverheadScheme::Decentralized {
        time_units += fired_timers.iter().sum::<f64>();
    }
    OverheadReport {
        scheme,
        packet_sizes,
        signaling_symbols,
        time_units,
    }
}

/// Timer values recorded in a grouping's selection log.
pub fn fired_timers(grouping: &RelayGrouping) -> Vec<f64> {
    grouping
        .selection_log
        .iter()
        .filter_map(|e| match e.metric {
            SelectionMetric::Timer(t) => Some(t),
            _ => None,
        })
        .collect()
}
