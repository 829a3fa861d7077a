//! Stage 2: joint precoder / rate-split / time-slot optimization by
//! successive convex approximation (SCA).
//!
//! The max-min problem is nonconvex in three places: the bilinear
//! products `theta * alpha` coupling the time-slot fraction with the
//! per-stream rates, and the two SINR definitions. Each SCA iteration
//! replaces the bilinear terms with the concave lower bound
//! [`phi_lower_bound`] and the SINR constraints with their linearized
//! difference-of-convex (DC) restrictions, both expanded around the
//! previous iterate, and solves the resulting convex subproblem with the
//! [`crate::conic`] solver. The objective is nondecreasing across
//! iterations because the previous iterate stays feasible for the next
//! subproblem; the loop stops when it changes by less than the
//! configured tolerance.
//!
//! Setting [`ThetaMode::Fixed`] removes the bilinear terms entirely
//! (they become linear), which is how the fixed-split reference schemes
//! reuse this machinery; [`CommonMode`] selects whether the common
//! stream exists and whether a relaying phase follows.

use crate::channel::{ChannelRealization, SystemConfig};
use crate::conic::{
    im_inner, re_inner, ConicProblem, ConicSolution, Constraint, LinExpr, SolveStatus,
};
use crate::rates::{self, PrecoderSet, RateBreakdown, RateError};
use crate::relay::RelayGrouping;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Smallest admissible time-slot fraction; the exact domain is the open
/// interval (0, 1], which a solver cannot represent.
pub const THETA_MIN: f64 = 1e-3;

/// Floor applied to expansion-point SINR slacks: the DC linearization
/// divides by them, and near-orthogonal precoders can collapse them.
pub const RHO_FLOOR: f64 = 1e-8;

/// Outer-iteration cap beyond the tolerance criterion.
pub const MAX_SCA_ITERATIONS: usize = 100;

/// How the time-slot fraction is treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaMode {
    /// Jointly optimized within [THETA_MIN, 1].
    Free,
    /// Pinned to the given value; bilinear terms become exactly linear.
    Fixed(f64),
}

/// Role of the common stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonMode {
    /// Two-phase scheme: relays forward the common message; the common
    /// rate is capped per group.
    Grouped,
    /// Single-phase scheme: every user must decode the common stream in
    /// phase 1 (no relaying).
    Direct,
    /// No common stream at all: private streams only.
    Disabled,
}

/// Scheme selector for one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub theta: ThetaMode,
    pub common: CommonMode,
}

impl SolveOptions {
    /// Full cooperative rate-splitting: free theta, grouped common stream.
    pub fn crs() -> Self {
        Self {
            theta: ThetaMode::Free,
            common: CommonMode::Grouped,
        }
    }

    /// Cooperative scheme with theta pinned (used by the grid search).
    pub fn crs_fixed_theta(theta: f64) -> Self {
        Self {
            theta: ThetaMode::Fixed(theta),
            common: CommonMode::Grouped,
        }
    }

    /// Non-cooperative rate-splitting: the whole frame is the direct
    /// phase and everyone decodes the common stream there.
    pub fn nrs() -> Self {
        Self {
            theta: ThetaMode::Fixed(1.0),
            common: CommonMode::Direct,
        }
    }

    /// Cooperative scheme with the frame split equally between phases.
    pub fn ers() -> Self {
        Self {
            theta: ThetaMode::Fixed(0.5),
            common: CommonMode::Grouped,
        }
    }

    /// Private streams only, full frame.
    pub fn sdma() -> Self {
        Self {
            theta: ThetaMode::Fixed(1.0),
            common: CommonMode::Disabled,
        }
    }

    fn has_common(&self) -> bool {
        self.common != CommonMode::Disabled
    }

    fn fixed_theta(&self) -> Option<f64> {
        match self.theta {
            ThetaMode::Fixed(v) => Some(v),
            ThetaMode::Free => None,
        }
    }
}

/// Expansion point and bookkeeping of one SCA run.
#[derive(Debug, Clone)]
pub struct SCAState {
    /// Completed outer iterations.
    pub iterate: usize,
    /// Current precoders (unscaled, physical units).
    pub precoders: PrecoderSet,
    /// Current time-slot fraction.
    pub theta: f64,
    /// Private-rate slacks (bits), one per user.
    pub alpha: Vec<f64>,
    /// Common-rate slacks (bits); zeros when the common stream is off.
    pub alpha_c: Vec<f64>,
    /// Private-SINR slacks (linear), floored at [`RHO_FLOOR`].
    pub rho: Vec<f64>,
    /// Common-SINR slacks (linear), floored at [`RHO_FLOOR`].
    pub rho_c: Vec<f64>,
    /// Common-rate shares from the last subproblem.
    pub common_split: Vec<f64>,
    /// Last subproblem objective t (0 before the first solve).
    pub objective: f64,
    /// All t values so far.
    pub history: Vec<f64>,
}

/// One row of the per-solve trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Subproblem objective t after this iteration.
    pub objective: f64,
    pub theta: f64,
    /// Transmit power in use (unscaled).
    pub power: f64,
    /// Worst normalized violation of the ORIGINAL (nonconvex)
    /// constraints at this iterate — the inner-approximation audit.
    pub max_violation: f64,
}

/// Final outcome of one stage-2 solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub precoders: PrecoderSet,
    /// Common-rate shares; zeros when the common stream is off.
    pub common_split: Vec<f64>,
    pub theta: f64,
    /// Exact achieved max-min total rate, re-evaluated from the final
    /// precoders by the independent rate expressions (not the solver's
    /// internal objective, which is kept in `solver_objective`).
    pub maxmin_rate: f64,
    /// Final subproblem objective t.
    pub solver_objective: f64,
    pub iterations: usize,
    /// Whether the tolerance criterion was met before the iteration cap.
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
}

/// Stage-2 failures.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("subproblem unsolvable at iteration {iteration} ({status:?}), retry included")]
    Subproblem {
        iteration: usize,
        status: SolveStatus,
    },
    #[error("final point failed independent feasibility audit: {0}")]
    Audit(#[from] RateError),
    #[error("cooperative mode requires a relay grouping")]
    MissingGrouping,
}

// --- surrogate building blocks --------------------------------------------

/// Concave lower bound on the product `theta * alpha`, expanded at
/// `(theta_n, alpha_n)`:
///
/// `Phi = (theta_n + alpha_n)(theta + alpha)/2 - (theta_n + alpha_n)^2/4
///        - (theta - alpha)^2/4`.
///
/// It is tight at the expansion point and never exceeds `theta * alpha`
/// (the gap is `[(theta + alpha) - (theta_n + alpha_n)]^2 / 4`).
pub fn phi_lower_bound(theta: f64, alpha: f64, theta_n: f64, alpha_n: f64) -> f64 {
    let s_n = theta_n + alpha_n;
    0.5 * s_n * (theta + alpha) - 0.25 * s_n * s_n - 0.25 * (theta - alpha).powi(2)
}

/// Which SINR constraint family a DC evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// User k's own private stream; interference from other privates.
    Private,
    /// The common stream; interference from ALL private streams.
    Common,
}

fn stream_gain_and_interference(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    k: usize,
    stream: Stream,
) -> (Complex64, f64) {
    let h = &channels.bs_channels[k];
    let target = match stream {
        Stream::Private => &precoders.private[k],
        Stream::Common => &precoders.common,
    };
    let g = rates::inner_product(h, target);
    let interference: f64 = precoders
        .private
        .iter()
        .enumerate()
        .filter(|(j, _)| stream == Stream::Common || *j != k)
        .map(|(_, p)| rates::gain(h, p))
        .sum();
    (g, interference)
}

/// Left-hand side of the original DC form of the SINR constraint:
/// `interference + 1 - |h_k^H p|^2 / rho` (feasible when <= 0).
pub fn dc_original_lhs(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    rho: f64,
    k: usize,
    stream: Stream,
) -> f64 {
    assert!(rho > 0.0, "dc_original_lhs requires rho > 0");
    let (g, interference) = stream_gain_and_interference(channels, precoders, k, stream);
    interference + 1.0 - g.norm_sqr() / rho
}

/// Left-hand side of the linearized DC constraint, expanded at
/// `(expansion, expansion_rho)`:
///
/// `interference + 1 - 2 Re{(p^n)^H h h^H p} / rho^n
///  + |h^H p^n|^2 rho / (rho^n)^2`   (feasible when <= 0).
///
/// At the expansion point it equals [`dc_original_lhs`] exactly, and it
/// is never below it elsewhere (the restriction property), because
/// `|h^H p|^2 / rho` is jointly convex in `(p, rho)`.
pub fn dc_linearized_lhs(
    channels: &ChannelRealization,
    precoders: &PrecoderSet,
    rho: f64,
    expansion: &PrecoderSet,
    expansion_rho: f64,
    k: usize,
    stream: Stream,
) -> f64 {
    assert!(
        expansion_rho > 0.0,
        "dc_linearized_lhs requires a positive expansion rho"
    );
    let (g, interference) = stream_gain_and_interference(channels, precoders, k, stream);
    let (g_n, _) = stream_gain_and_interference(channels, expansion, k, stream);
    interference + 1.0 - 2.0 * (g_n.conj() * g).re / expansion_rho
        + g_n.norm_sqr() * rho / (expansion_rho * expansion_rho)
}

// --- initialization --------------------------------------------------------

fn unit_vector(h: &[Complex64]) -> Option<Vec<Complex64>> {
    let norm = crate::channel::channel_strength(h).sqrt();
    if norm > 0.0 {
        Some(h.iter().map(|z| z / norm).collect())
    } else {
        None
    }
}

/// Deterministic random unit vector for users whose channel is zero and
/// therefore have no matched-filter direction.
fn fallback_direction(num_tx: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<Complex64> = (0..num_tx)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        if let Some(u) = unit_vector(&v) {
            return u;
        }
    }
}

/// Leading left singular vector of `H = [h_1 ... h_K]` (N_t x K).
fn leading_left_singular_vector(channels: &ChannelRealization) -> Option<Vec<Complex64>> {
    use nalgebra::DMatrix;
    let nt = channels.num_tx_antennas();
    let k = channels.num_users();
    let h = DMatrix::from_fn(nt, k, |i, j| channels.bs_channels[j][i]);
    if h.iter().all(|z| z.norm_sqr() == 0.0) {
        return None;
    }
    let svd = h.svd(true, false);
    let u = svd.u.as_ref()?;
    Some(u.column(0).iter().copied().collect())
}

/// Builds the starting point: matched-filter private precoders
/// `sqrt(beta P_t / K) h_k / ||h_k||` (the per-user budget keeps the
/// total at P_t for every K; for K = 2 it coincides with beta P_t / 2),
/// a common precoder `sqrt((1-beta) P_t) u_c` along the channel matrix's
/// leading left singular vector, slacks set to the exact SINRs and rates
/// of that point, and the configured initial theta. Without a common
/// stream the full budget goes to the private precoders. Users with a
/// zero channel get a seeded random direction (logged).
pub fn initialize(
    channels: &ChannelRealization,
    config: &SystemConfig,
    options: &SolveOptions,
) -> SCAState {
    let k_total = config.num_users;
    let nt = config.num_tx_antennas;
    let pt = config.bs_power;
    let beta = config.init_power_split;

    let (private_power, common_power) = if options.has_common() {
        (beta * pt / k_total as f64, (1.0 - beta) * pt)
    } else {
        (pt / k_total as f64, 0.0)
    };

    let mut precoders = PrecoderSet::zeros(k_total, nt);
    for k in 0..k_total {
        let direction = unit_vector(&channels.bs_channels[k]).unwrap_or_else(|| {
            log::warn!("user {k} has a zero channel; using a random initial direction");
            fallback_direction(nt, channels.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)))
        });
        precoders.private[k] = direction
            .iter()
            .map(|z| z * private_power.sqrt())
            .collect();
    }
    if options.has_common() {
        let u_c = leading_left_singular_vector(channels).unwrap_or_else(|| {
            log::warn!("all channels are zero; using a random common direction");
            fallback_direction(nt, channels.seed ^ 0x5bf0_3635)
        });
        precoders.common = u_c.iter().map(|z| z * common_power.sqrt()).collect();
    }

    let theta = options.fixed_theta().unwrap_or(config.init_theta);
    let mut rho = Vec::with_capacity(k_total);
    let mut rho_c = Vec::with_capacity(k_total);
    for k in 0..k_total {
        rho.push(rates::private_sinr(channels, &precoders, k).max(RHO_FLOOR));
        if options.has_common() {
            rho_c.push(rates::common_sinr(channels, &precoders, k).max(RHO_FLOOR));
        } else {
            rho_c.push(0.0);
        }
    }
    let alpha: Vec<f64> = rho.iter().map(|r| (1.0 + r).log2()).collect();
    let alpha_c: Vec<f64> = if options.has_common() {
        rho_c.iter().map(|r| (1.0 + r).log2()).collect()
    } else {
        vec![0.0; k_total]
    };

    SCAState {
        iterate: 0,
        precoders,
        theta,
        alpha,
        alpha_c,
        rho,
        rho_c,
        common_split: vec![0.0; k_total],
        objective: 0.0,
        history: Vec::new(),
    }
}

// --- subproblem assembly ---------------------------------------------------

fn private_block_name(k: usize) -> String {
    format!("p_{k}")
}

/// Builds the convex subproblem around the state's expansion point.
/// Variables and precoder coefficients are internally normalized by
/// `sqrt(P_t)` so the power budget becomes a unit ball (SINR-type
/// products are invariant under this rescaling); [`extract_state`]
/// undoes it.
pub fn assemble_subproblem(
    state: &SCAState,
    channels: &ChannelRealization,
    grouping: Option<&RelayGrouping>,
    config: &SystemConfig,
    options: &SolveOptions,
) -> ConicProblem {
    let k_total = config.num_users;
    let nt = config.num_tx_antennas;
    let sqrt_pt = config.bs_power.sqrt();
    // scaled channels: gains against scaled precoders match physical ones
    let scaled_channels: Vec<Vec<Complex64>> = channels
        .bs_channels
        .iter()
        .map(|h| h.iter().map(|z| z * sqrt_pt).collect())
        .collect();
    let scale = |p: &[Complex64]| -> Vec<Complex64> { p.iter().map(|z| z / sqrt_pt).collect() };

    let mut prob = ConicProblem::new();
    let t = prob.add_scalar("t");
    let theta_var = match options.theta {
        ThetaMode::Free => Some(prob.add_scalar("theta")),
        ThetaMode::Fixed(_) => None,
    };
    let p_c = options.has_common().then(|| prob.add_complexes("p_c", nt));
    let p: Vec<_> = (0..k_total)
        .map(|k| prob.add_complexes(&private_block_name(k), nt))
        .collect();
    let c = options.has_common().then(|| prob.add_reals("c", k_total));
    let alpha = prob.add_reals("alpha", k_total);
    let alpha_c = options
        .has_common()
        .then(|| prob.add_reals("alpha_c", k_total));
    let rho = prob.add_reals("rho", k_total);
    let rho_c = options.has_common().then(|| prob.add_reals("rho_c", k_total));
    prob.maximize(t);

    if options.theta == ThetaMode::Free && options.common == CommonMode::Grouped {
        debug_assert_eq!(prob.num_variables(), 2 * nt * (k_total + 1) + 5 * k_total + 2);
    }

    // rate-coupling family: lhs_extra + theta*alpha_x >= rhs, linearized
    // through Phi when theta is free
    let add_product_ge = |prob: &mut ConicProblem,
                          alpha_idx: usize,
                          alpha_n: f64,
                          extra: LinExpr,
                          rhs: LinExpr| {
        match options.theta {
            ThetaMode::Fixed(value) => {
                // rhs - value*alpha - extra <= 0
                prob.add(Constraint::LinearLe {
                    expr: rhs.sub(&LinExpr::term(alpha_idx, value)).sub(&extra),
                    rhs: 0.0,
                });
            }
            ThetaMode::Free => {
                let th = theta_var.expect("free theta variable");
                let s_n = state.theta + alpha_n;
                // (theta - alpha)^2 / 4 <= s_n(theta + alpha)/2 - s_n^2/4
                //                          + extra - rhs
                let bound = LinExpr::term(th, 0.5 * s_n)
                    .plus(alpha_idx, 0.5 * s_n)
                    .plus_constant(-0.25 * s_n * s_n)
                    .add(&extra)
                    .sub(&rhs);
                prob.add(Constraint::SumSquaresLe {
                    squares: vec![LinExpr::term(th, 0.5).plus(alpha_idx, -0.5)],
                    bound,
                });
            }
        }
    };

    let sum_c = || {
        let c = c.expect("common split block");
        let mut e = LinExpr::default();
        for k in 0..k_total {
            e.terms.push((c.at(k), 1.0));
        }
        e
    };

    // worst-user totals: t <= theta*alpha_k (+ C_k)
    for k in 0..k_total {
        let extra = match c {
            Some(c) => LinExpr::variable(c.at(k)),
            None => LinExpr::default(),
        };
        add_product_ge(&mut prob, alpha.at(k), state.alpha[k], extra, LinExpr::variable(t));
    }

    // common-rate budget: sum_j C_j <= theta*alpha_{c,k} (+ relayed rate)
    if options.has_common() {
        let ac = alpha_c.expect("common rate block");
        let in_group1 = |k: usize| match (options.common, grouping) {
            (CommonMode::Grouped, Some(g)) => g.group1.contains(&k),
            _ => true, // Direct: every user decodes in phase 1
        };
        for k in 0..k_total {
            let mut extra = LinExpr::default();
            if !in_group1(k) {
                let g = grouping.expect("grouped mode");
                let f2 = (1.0
                    + rates::coop_receive_power(channels, g, &config.relay_powers, k))
                .log2();
                // relayed common rate (1 - theta) * f2 is linear in theta
                match options.theta {
                    ThetaMode::Free => {
                        let th = theta_var.expect("free theta variable");
                        extra = LinExpr::term(th, -f2).plus_constant(f2);
                    }
                    ThetaMode::Fixed(value) => {
                        extra = LinExpr::constant((1.0 - value) * f2);
                    }
                }
            }
            add_product_ge(&mut prob, ac.at(k), state.alpha_c[k], extra, sum_c());
        }
    }

    // rate-to-SINR links: 2^alpha <= 1 + rho
    for k in 0..k_total {
        prob.add(Constraint::Exp2Le {
            exponent: LinExpr::variable(alpha.at(k)),
            upper: LinExpr::variable(rho.at(k)).plus_constant(1.0),
        });
    }
    if let (Some(ac), Some(rc)) = (alpha_c, rho_c) {
        for k in 0..k_total {
            prob.add(Constraint::Exp2Le {
                exponent: LinExpr::variable(ac.at(k)),
                upper: LinExpr::variable(rc.at(k)).plus_constant(1.0),
            });
        }
    }

    // Linearized DC restrictions of the SINR definitions, multiplied
    // through by the (positive) expansion slack before encoding:
    // `rho_n I + rho_n - 2 Re{(g^n)* g} + (|g^n|^2 / rho_n) rho <= 0`.
    // The feasible set is identical to the 1/rho_n form, but every
    // coefficient stays bounded as a stream's expansion SINR collapses
    // (|g^n|^2 / rho_n tends to 1 + I^n), which keeps the subproblem
    // well conditioned when the optimizer shuts a private stream off.
    let dc = |prob: &mut ConicProblem,
              k: usize,
              target: crate::conic::BlockRef,
              target_n: &[Complex64],
              rho_idx: usize,
              rho_n: f64,
              include_self: bool| {
        let h = &scaled_channels[k];
        let sqrt_rho_n = rho_n.sqrt();
        let mut squares = Vec::with_capacity(2 * k_total);
        for (j, pj) in p.iter().enumerate() {
            if include_self || j != k {
                squares.push(re_inner(h, *pj).scaled(sqrt_rho_n));
                squares.push(im_inner(h, *pj).scaled(sqrt_rho_n));
            }
        }
        let g_n = rates::inner_product(h, target_n);
        let bound = re_inner(h, target)
            .scaled(2.0 * g_n.re)
            .add(&im_inner(h, target).scaled(2.0 * g_n.im))
            .plus(rho_idx, -g_n.norm_sqr() / rho_n)
            .plus_constant(-rho_n);
        prob.add(Constraint::SumSquaresLe { squares, bound });
    };
    // An expansion SINR at the floor means the stream had (essentially)
    // zero gain there; the DC row degenerates into an infeasible
    // constant, so the honest restriction pins the slack at the floor
    // instead — that stream certifies no rate this iteration.
    let pinned = |rho_n: f64| rho_n <= RHO_FLOOR;
    let pin = |prob: &mut ConicProblem, rho_idx: usize| {
        prob.add(Constraint::LinearLe {
            expr: LinExpr::variable(rho_idx),
            rhs: RHO_FLOOR,
        });
    };
    let private_n: Vec<Vec<Complex64>> = state.precoders.private.iter().map(|v| scale(v)).collect();
    for k in 0..k_total {
        if pinned(state.rho[k]) {
            pin(&mut prob, rho.at(k));
        } else {
            dc(&mut prob, k, p[k], &private_n[k], rho.at(k), state.rho[k], false);
        }
    }
    if let (Some(pc), Some(rc)) = (p_c, rho_c) {
        let common_n = scale(&state.precoders.common);
        for k in 0..k_total {
            if pinned(state.rho_c[k]) {
                pin(&mut prob, rc.at(k));
            } else {
                dc(&mut prob, k, pc, &common_n, rc.at(k), state.rho_c[k], true);
            }
        }
    }

    // unit power ball over all scaled precoder coefficients
    let mut power_squares = Vec::with_capacity(2 * nt * (k_total + 1));
    for block in p_c.iter().chain(p.iter()) {
        for i in 0..nt {
            power_squares.push(LinExpr::variable(block.re(i)));
            power_squares.push(LinExpr::variable(block.im(i)));
        }
    }
    prob.add(Constraint::SumSquaresLe {
        squares: power_squares,
        bound: LinExpr::constant(1.0),
    });

    // sign and box constraints
    for k in 0..k_total {
        prob.add(Constraint::LinearLe {
            expr: LinExpr::term(alpha.at(k), -1.0),
            rhs: 0.0,
        });
        prob.add(Constraint::LinearLe {
            expr: LinExpr::term(rho.at(k), -1.0),
            rhs: 0.0,
        });
        if let (Some(c), Some(ac), Some(rc)) = (c, alpha_c, rho_c) {
            prob.add(Constraint::LinearLe {
                expr: LinExpr::term(c.at(k), -1.0),
                rhs: 0.0,
            });
            prob.add(Constraint::LinearLe {
                expr: LinExpr::term(ac.at(k), -1.0),
                rhs: 0.0,
            });
            prob.add(Constraint::LinearLe {
                expr: LinExpr::term(rc.at(k), -1.0),
                rhs: 0.0,
            });
        }
    }
    if let Some(th) = theta_var {
        prob.add(Constraint::LinearLe {
            expr: LinExpr::variable(th),
            rhs: 1.0,
        });
        prob.add(Constraint::LinearLe {
            expr: LinExpr::term(th, -1.0),
            rhs: -THETA_MIN,
        });
    }

    prob
}

/// Flat assignment representing `state` in the layout of
/// [`assemble_subproblem`]'s variables — the previous iterate expressed
/// as a candidate point of the next subproblem (diagnostic: it should
/// always be feasible there).
pub fn state_vector(state: &SCAState, config: &SystemConfig, options: &SolveOptions) -> Vec<f64> {
    let k_total = config.num_users;
    let nt = config.num_tx_antennas;
    let sqrt_pt = config.bs_power.sqrt();
    let mut x = Vec::new();
    x.push(state.objective);
    if options.fixed_theta().is_none() {
        x.push(state.theta);
    }
    let push_precoder = |p: &[Complex64], x: &mut Vec<f64>| {
        for z in p {
            x.push(z.re / sqrt_pt);
            x.push(z.im / sqrt_pt);
        }
    };
    if options.has_common() {
        push_precoder(&state.precoders.common, &mut x);
    }
    for k in 0..k_total {
        push_precoder(&state.precoders.private[k], &mut x);
    }
    if options.has_common() {
        x.extend_from_slice(&state.common_split);
    }
    x.extend_from_slice(&state.alpha);
    if options.has_common() {
        x.extend_from_slice(&state.alpha_c);
    }
    x.extend_from_slice(&state.rho);
    if options.has_common() {
        x.extend_from_slice(&state.rho_c);
    }
    debug_assert_eq!(
        x.len(),
        {
            let common_blocks = if options.has_common() { 1 } else { 0 };
            let common_reals = if options.has_common() { 3 * k_total } else { 0 };
            let theta = if options.fixed_theta().is_none() { 1 } else { 0 };
            1 + theta + 2 * nt * (k_total + common_blocks) + 2 * k_total + common_reals
        },
        "state vector layout out of sync with assemble_subproblem"
    );
    x
}

/// Advances the iterate: copies the subproblem solution back into the
/// state, undoing the power normalization and flooring slacks away from
/// zero so the next linearization is well defined.
pub fn extract_state(
    state: &mut SCAState,
    solution: &ConicSolution,
    config: &SystemConfig,
    options: &SolveOptions,
) {
    let sqrt_pt = config.bs_power.sqrt();
    let k_total = config.num_users;
    state.objective = solution.scalar("t");
    state.theta = options
        .fixed_theta()
        .unwrap_or_else(|| solution.scalar("theta").clamp(THETA_MIN, 1.0));
    for k in 0..k_total {
        state.precoders.private[k] = solution
            .complexes(&private_block_name(k))
            .iter()
            .map(|z| z * sqrt_pt)
            .collect();
    }
    state.alpha = solution.reals("alpha");
    state.rho = solution
        .reals("rho")
        .iter()
        .map(|&r| r.max(RHO_FLOOR))
        .collect();
    if options.has_common() {
        state.precoders.common = solution
            .complexes("p_c")
            .iter()
            .map(|z| z * sqrt_pt)
            .collect();
        state.common_split = solution.reals("c").iter().map(|&v| v.max(0.0)).collect();
        state.alpha_c = solution.reals("alpha_c");
        state.rho_c = solution
            .reals("rho_c")
            .iter()
            .map(|&r| r.max(RHO_FLOOR))
            .collect();
    }
}

/// Worst normalized violation of the ORIGINAL nonconvex constraint set
/// at the state's point: power budget, bilinear rate couplings, exact
/// SINR definitions (in multiplied form, no division), and the
/// exponential links. Every subproblem is an inner approximation, so its
/// solutions should satisfy these up to solver tolerance.
pub fn original_violation(
    state: &SCAState,
    channels: &ChannelRealization,
    grouping: Option<&RelayGrouping>,
    config: &SystemConfig,
    options: &SolveOptions,
) -> f64 {
    let k_total = config.num_users;
    let mut worst: f64 = 0.0;
    let mut check = |violation: f64| worst = worst.max(violation);

    let power = state.precoders.total_power();
    check((power - config.bs_power).max(0.0) / config.bs_power);

    let sum_c: f64 = state.common_split.iter().sum();
    for k in 0..k_total {
        // t <= theta*alpha_k + C_k
        let c_k = state.common_split[k];
        check(
            (state.objective - state.theta * state.alpha[k] - c_k).max(0.0)
                / state.objective.abs().max(1.0),
        );
        // 2^alpha <= 1 + rho
        check((state.alpha[k].exp2() - 1.0 - state.rho[k]).max(0.0) / (1.0 + state.rho[k]));
        // rho * (interference + 1) <= |h^H p_k|^2
        let (g, interference) =
            stream_gain_and_interference(channels, &state.precoders, k, Stream::Private);
        check(
            (state.rho[k] * (interference + 1.0) - g.norm_sqr()).max(0.0)
                / g.norm_sqr().max(1.0),
        );
        check((-state.common_split[k]).max(0.0));

        if options.has_common() {
            check(
                (state.alpha_c[k].exp2() - 1.0 - state.rho_c[k]).max(0.0)
                    / (1.0 + state.rho_c[k]),
            );
            let (gc, interference_c) =
                stream_gain_and_interference(channels, &state.precoders, k, Stream::Common);
            check(
                (state.rho_c[k] * (interference_c + 1.0) - gc.norm_sqr()).max(0.0)
                    / gc.norm_sqr().max(1.0),
            );
            // sum_j C_j <= theta*alpha_{c,k} (+ relayed rate)
            let relayed = match (options.common, grouping) {
                (CommonMode::Grouped, Some(g)) if !g.group1.contains(&k) => {
                    (1.0 - state.theta)
                        * (1.0 + rates::coop_receive_power(channels, g, &config.relay_powers, k))
                            .log2()
                }
                _ => 0.0,
            };
            check(
                (sum_c - state.theta * state.alpha_c[k] - relayed).max(0.0)
                    / sum_c.abs().max(1.0),
            );
        }
    }
    check((state.theta - 1.0).max(0.0));
    check((THETA_MIN - state.theta).max(0.0));
    worst
}

fn perturb_state(state: &SCAState, channels: &ChannelRealization, options: &SolveOptions, salt: u64) -> SCAState {
    let mut rng = ChaCha8Rng::seed_from_u64(channels.seed ^ salt.wrapping_mul(0x2545_f491_4f6c_dd1d));
    let mut perturbed = state.clone();
    let mut jitter = |p: &mut Vec<Complex64>| {
        let norm = crate::channel::channel_strength(p).sqrt();
        let scale = 1e-4 * (norm + 1e-3) / (p.len() as f64).sqrt();
        for z in p.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += Complex64::new(scale * re, scale * im);
        }
    };
    for k in 0..perturbed.precoders.private.len() {
        jitter(&mut perturbed.precoders.private[k]);
    }
    if options.has_common() {
        jitter(&mut perturbed.precoders.common);
    }
    // slacks must stay consistent with the perturbed expansion point
    for k in 0..perturbed.rho.len() {
        perturbed.rho[k] = rates::private_sinr(channels, &perturbed.precoders, k).max(RHO_FLOOR);
        perturbed.alpha[k] = (1.0 + perturbed.rho[k]).log2();
        if options.has_common() {
            perturbed.rho_c[k] =
                rates::common_sinr(channels, &perturbed.precoders, k).max(RHO_FLOOR);
            perturbed.alpha_c[k] = (1.0 + perturbed.rho_c[k]).log2();
        }
    }
    perturbed
}

// --- the outer loop --------------------------------------------------------

/// Runs the full stage-2 optimization for one channel realization and
/// grouping. Iterates subproblem solves from the standard initial point
/// until the objective changes by less than `config.sca_tolerance` or
/// [`MAX_SCA_ITERATIONS`] is hit; a failed subproblem is retried once
/// from a slightly perturbed expansion point before giving up. The
/// returned rate is re-evaluated from the final precoders by the
/// independent rate expressions.
pub fn sca_solve(
    channels: &ChannelRealization,
    grouping: Option<&RelayGrouping>,
    config: &SystemConfig,
    options: &SolveOptions,
) -> Result<Solution, SolveError> {
    if options.common == CommonMode::Grouped && grouping.is_none() {
        return Err(SolveError::MissingGrouping);
    }
    let grouping = match options.common {
        CommonMode::Grouped => grouping,
        _ => None,
    };

    let mut state = initialize(channels, config, options);
    let mut trace = Vec::new();
    let mut converged = false;

    for n in 1..=MAX_SCA_ITERATIONS {
        let problem = assemble_subproblem(&state, channels, grouping, config, options);
        let mut solution = problem.solve();
        if !solution.status.is_usable() {
            log::debug!(
                "iteration {n}: subproblem {:?}; retrying from perturbed point",
                solution.status
            );
            let perturbed = perturb_state(&state, channels, options, n as u64);
            let retry = assemble_subproblem(&perturbed, channels, grouping, config, options);
            solution = retry.solve();
            if !solution.status.is_usable() {
                return Err(SolveError::Subproblem {
                    iteration: n,
                    status: solution.status,
                });
            }
            state = perturbed;
        }

        let previous = state.objective;
        extract_state(&mut state, &solution, config, options);
        state.iterate = n;
        state.history.push(state.objective);
        trace.push(IterationRecord {
            iteration: n,
            objective: state.objective,
            theta: state.theta,
            power: state.precoders.total_power(),
            max_violation: original_violation(&state, channels, grouping, config, options),
        });
        if (state.objective - previous).abs() < config.sca_tolerance {
            converged = true;
            break;
        }
    }

    let breakdown = evaluate_state(&state, channels, grouping, config)?;
    Ok(Solution {
        precoders: state.precoders,
        common_split: state.common_split,
        theta: state.theta,
        maxmin_rate: breakdown.min_total(),
        solver_objective: state.objective,
        iterations: state.iterate,
        converged,
        trace,
    })
}

fn evaluate_state(
    state: &SCAState,
    channels: &ChannelRealization,
    grouping: Option<&RelayGrouping>,
    config: &SystemConfig,
) -> Result<RateBreakdown, RateError> {
    rates::evaluate_solution(
        channels,
        grouping,
        &state.precoders,
        &state.common_split,
        state.theta,
        config.bs_power,
        &config.relay_powers,
    )
}

// --- group-rate equality diagnostic ----------------------------------------

/// Outcome of the group-rate equality check at a converged solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Prop1Check {
    /// Theta sits at (or outside) the interval (0.01, 0.99): the
    /// equality argument only applies at interior splits.
    NotApplicable { theta: f64 },
    /// Both the equality and the grouping rule hold within tolerance.
    Holds { gap: f64 },
    /// The check failed; `gap` is |R_c1 - R_c2| and `grouping_holds`
    /// whether the weakest relay still out-decodes the weakest
    /// destination.
    Violated { gap: f64, grouping_holds: bool },
}

/// At an interior-theta optimum the two group common rates must be equal
/// (otherwise shifting theta would raise the smaller one) and the
/// weakest relaying user must decode the common stream faster than the
/// weakest destination. Checks both within `tol` bits.
pub fn proposition1_check(
    solution: &Solution,
    channels: &ChannelRealization,
    grouping: &RelayGrouping,
    config: &SystemConfig,
    tol: f64,
) -> Prop1Check {
    if solution.theta <= 0.01 || solution.theta >= 0.99 {
        return Prop1Check::NotApplicable {
            theta: solution.theta,
        };
    }
    let breakdown = match rates::evaluate_solution(
        channels,
        Some(grouping),
        &solution.precoders,
        &solution.common_split,
        solution.theta,
        config.bs_power,
        &config.relay_powers,
    ) {
        Ok(b) => b,
        Err(e) => {
            log::warn!("group-rate check on infeasible solution: {e}");
            return Prop1Check::Violated {
                gap: f64::INFINITY,
                grouping_holds: false,
            };
        }
    };
    let gap = (breakdown.group1_common - breakdown.group2_common).abs();
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
    let grouping_holds = worst_relay > worst_dest - tol;
    if gap <= tol && grouping_holds {
        Prop1Check::Holds { gap }
    } else {
        Prop1Check::Violated { gap, grouping_holds }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channels;
    use rand::RngCore;

    fn orthogonal_two_user(pt: f64) -> (ChannelRealization, SystemConfig) {
        let config = SystemConfig::new(2, 2, pt);
        let ch = ChannelRealization {
            bs_channels: vec![
                vec![Complex64::new(1.0, 0.0), Complex64::ZERO],
                vec![Complex64::ZERO, Complex64::new(1.0, 0.0)],
            ],
            user_channels: vec![vec![Complex64::ZERO; 2]; 2],
            bs_variances: vec![1.0; 2],
            user_variances: vec![vec![1.0; 2]; 2],
            seed: 1,
        };
        (ch, config)
    }

    #[test]
    fn phi_matches_hand_values() {
        // tight at the expansion point
        assert!((phi_lower_bound(0.5, 2.0, 0.5, 2.0) - 1.0).abs() < 1e-15);
        // displaced point: 2.5 * 2 / 2 - 6.25/4 - 0 = 0.9375
        assert!((phi_lower_bound(1.0, 1.0, 0.5, 2.0) - 0.9375).abs() < 1e-15);
    }

    #[test]
    fn phi_is_a_lower_bound_with_quadratic_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5000 {
            let theta = (rng.next_u32() as f64 / u32::MAX as f64).max(1e-6);
            let alpha = 40.0 * rng.next_u32() as f64 / u32::MAX as f64;
            let theta_n = (rng.next_u32() as f64 / u32::MAX as f64).max(1e-6);
            let alpha_n = 40.0 * rng.next_u32() as f64 / u32::MAX as f64;
            let phi = phi_lower_bound(theta, alpha, theta_n, alpha_n);
            let gap = theta * alpha - phi;
            let want = 0.25 * ((theta + alpha) - (theta_n + alpha_n)).powi(2);
            assert!(gap >= -1e-12, "phi exceeded the product: gap {gap}");
            assert!((gap - want).abs() < 1e-9, "gap identity broken: {gap} vs {want}");
        }
    }

    #[test]
    fn dc_linearization_scalar_hand_case() {
        // user 0 alone: h = [1], p^n = [1], rho^n = 1, p = [2], rho = 1
        let ch = ChannelRealization {
            bs_channels: vec![vec![Complex64::new(1.0, 0.0)], vec![Complex64::ZERO]],
            user_channels: vec![vec![Complex64::ZERO; 2]; 2],
            bs_variances: vec![1.0; 2],
            user_variances: vec![vec![1.0; 2]; 2],
            seed: 0,
        };
        let mut expansion = PrecoderSet::zeros(2, 1);
        expansion.private[0][0] = Complex64::new(1.0, 0.0);
        let mut point = PrecoderSet::zeros(2, 1);
        point.private[0][0] = Complex64::new(2.0, 0.0);
        let original = dc_original_lhs(&ch, &point, 1.0, 0, Stream::Private);
        let linearized =
            dc_linearized_lhs(&ch, &point, 1.0, &expansion, 1.0, 0, Stream::Private);
        assert!((original - (-3.0)).abs() < 1e-12);
        assert!((linearized - (-2.0)).abs() < 1e-12);
        assert!(linearized >= original);
    }

    #[test]
    fn dc_linearization_tight_at_expansion_and_restrictive_elsewhere() {
        let config = SystemConfig::new(3, 2, 10.0);
        let ch = generate_channels(&config, 77);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        fn random_precoders(rng: &mut ChaCha8Rng) -> PrecoderSet {
            let mut p = PrecoderSet::zeros(3, 2);
            let mut fill = |v: &mut Vec<Complex64>| {
                for z in v.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = Complex64::new(re, im);
                }
            };
            fill(&mut p.common);
            for k in 0..3 {
                fill(&mut p.private[k]);
            }
            p
        }
        for _ in 0..200 {
            let expansion = random_precoders(&mut rng);
            let point = random_precoders(&mut rng);
            for k in 0..3 {
                for stream in [Stream::Private, Stream::Common] {
                    let rho_n = 0.5 + rng.next_u32() as f64 / u32::MAX as f64;
                    let rho = 0.5 + rng.next_u32() as f64 / u32::MAX as f64;
                    let tight_gap = dc_linearized_lhs(&ch, &expansion, rho_n, &expansion, rho_n, k, stream)
                        - dc_original_lhs(&ch, &expansion, rho_n, k, stream);
                    assert!(tight_gap.abs() < 1e-9, "not tight at expansion: {tight_gap}");
                    let gap = dc_linearized_lhs(&ch, &point, rho, &expansion, rho_n, k, stream)
                        - dc_original_lhs(&ch, &point, rho, k, stream);
                    assert!(gap >= -1e-9, "restriction broken: {gap}");
                }
            }
        }
    }

    #[test]
    fn initialize_orthogonal_two_user_bookkeeping() {
        let (ch, config) = orthogonal_two_user(2.0);
        let state = initialize(&ch, &config, &SolveOptions::crs());
        // beta = 0.5, P_t = 2: each private gets 0.5, common gets 1.0
        let common_power: f64 = state.precoders.common.iter().map(|z| z.norm_sqr()).sum();
        assert!((common_power - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let pk: f64 = state.precoders.private[k].iter().map(|z| z.norm_sqr()).sum();
            assert!((pk - 0.5).abs() < 1e-12);
        }
        assert!((state.precoders.total_power() - 2.0).abs() < 1e-12);
        assert_eq!(state.theta, 0.8);
        // slacks equal the exact SINRs of the initial point (up to the
        // positivity floor for streams with zero gain)
        for k in 0..2 {
            let want = rates::private_sinr(&ch, &state.precoders, k).max(RHO_FLOOR);
            assert!((state.rho[k] - want).abs() < 1e-12);
            assert!((state.alpha[k] - (1.0 + want).log2()).abs() < 1e-12);
            let want_c = rates::common_sinr(&ch, &state.precoders, k).max(RHO_FLOOR);
            assert!((state.rho_c[k] - want_c).abs() < 1e-12);
        }
    }

    #[test]
    fn initialize_caps_power_for_larger_k() {
        let config = SystemConfig::new(4, 3, 8.0);
        let ch = generate_channels(&config, 5);
        let state = initialize(&ch, &config, &SolveOptions::crs());
        assert!(state.precoders.total_power() <= 8.0 * (1.0 + 1e-12));
        // private budget beta*P_t split evenly
        for k in 0..4 {
            let pk: f64 = state.precoders.private[k].iter().map(|z| z.norm_sqr()).sum();
            assert!((pk - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn initialize_zero_channel_falls_back_to_random_direction() {
        let config = SystemConfig::new(2, 2, 4.0).with_bs_variances(&[0.0, 1.0]);
        let ch = generate_channels(&config, 9);
        let a = initialize(&ch, &config, &SolveOptions::crs());
        let b = initialize(&ch, &config, &SolveOptions::crs());
        let p0: f64 = a.precoders.private[0].iter().map(|z| z.norm_sqr()).sum();
        assert!((p0 - 0.5 * 4.0 / 2.0).abs() < 1e-12, "power still per recipe");
        assert_eq!(a.precoders.private[0], b.precoders.private[0], "deterministic");
    }

    #[test]
    fn subproblem_dimensions_match_the_model() {
        let config = SystemConfig::new(3, 2, 10.0);
        let ch = generate_channels(&config, 4);
        let grouping = RelayGrouping::from_groups(vec![0], vec![1, 2]);
        let options = SolveOptions::crs();
        let state = initialize(&ch, &config, &options);
        let prob = assemble_subproblem(&state, &ch, Some(&grouping), &config, &options);
        let k = 3;
        let nt = 2;
        assert_eq!(prob.num_variables(), 2 * nt * (k + 1) + 5 * k + 2);
        // families: K totals + K common budgets + 2K exponential + 2K DC
        // + 1 power + 5K sign + 2 theta bounds
        assert_eq!(prob.num_constraints(), k + k + 2 * k + 2 * k + 1 + 5 * k + 2);
    }

    #[test]
    fn previous_iterate_stays_feasible_for_next_subproblem() {
        let config = SystemConfig::new(3, 2, 10.0).with_bs_variances(&[1.0, 0.3, 0.1]);
        let ch = generate_channels(&config, 12);
        let grouping = RelayGrouping::from_groups(vec![0], vec![1, 2]);
        for options in [SolveOptions::crs(), SolveOptions::ers(), SolveOptions::nrs(), SolveOptions::sdma()] {
            let grouping_arg = match options.common {
                CommonMode::Grouped => Some(&grouping),
                _ => None,
            };
            let mut state = initialize(&ch, &config, &options);
            for _ in 0..3 {
                let prob = assemble_subproblem(&state, &ch, grouping_arg, &config, &options);
                let x = state_vector(&state, &config, &options);
                let violation = prob.max_violation(&x);
                assert!(
                    violation <= 1e-8,
                    "previous iterate infeasible ({violation:.3e}) for {options:?}"
                );
                let solution = prob.solve();
                assert!(solution.status.is_usable(), "{:?}", solution.status);
                extract_state(&mut state, &solution, &config, &options);
            }
        }
    }

    #[test]
    fn nrs_on_orthogonal_channels_reaches_the_closed_form() {
        // two orthogonal unit channels, P_t = 2: each user gets an
        // interference-free unit-power stream -> log2(2) = 1 each
        let (ch, config) = orthogonal_two_user(2.0);
        let solution = sca_solve(&ch, None, &config, &SolveOptions::nrs()).unwrap();
        assert!(solution.converged);
        assert!(
            (solution.maxmin_rate - 1.0).abs() < 1e-3,
            "rate {}",
            solution.maxmin_rate
        );
        assert!((solution.solver_objective - solution.maxmin_rate).abs() < 1e-4);
    }

    #[test]
    fn sca_objective_is_monotone_and_audited() {
        let config = SystemConfig::new(3, 2, 31.6).with_bs_variances(&[1.0, 0.3, 0.1]);
        let ch = generate_channels(&config, 42);
        let grouping = RelayGrouping::from_groups(vec![0], vec![1, 2]);
        let solution = sca_solve(&ch, Some(&grouping), &config, &SolveOptions::crs()).unwrap();
        assert!(solution.converged, "no convergence in {} iters", solution.iterations);
        let mut previous = 0.0;
        for record in &solution.trace {
            assert!(
                record.objective >= previous - 1e-8,
                "objective decreased: {} -> {}",
                previous,
                record.objective
            );
            assert!(
                record.max_violation <= 1e-6,
                "inner approximation violated: {:.3e}",
                record.max_violation
            );
            previous = record.objective;
        }
        assert!((solution.solver_objective - solution.maxmin_rate).abs() <= 1e-4);
        assert!(solution.theta > 0.0 && solution.theta <= 1.0);
    }

    #[test]
    fn crs_dominates_the_fixed_theta_restrictions() {
        let config = SystemConfig::new(3, 2, 100.0).with_bs_variances(&[1.0, 0.3, 0.1]);
        let ch = generate_channels(&config, 3);
        let grouping = crate::relay::select_centralized(&ch, 1).unwrap();
        let crs = sca_solve(&ch, Some(&grouping), &config, &SolveOptions::crs()).unwrap();
        let ers = sca_solve(&ch, Some(&grouping), &config, &SolveOptions::ers()).unwrap();
        let nrs = sca_solve(&ch, None, &config, &SolveOptions::nrs()).unwrap();
        assert!(crs.maxmin_rate >= ers.maxmin_rate - 1e-3);
        assert!(crs.maxmin_rate >= nrs.maxmin_rate - 1e-3);
    }

    #[test]
    fn prop1_diagnostic_classifies_cases() {
        let (ch, config) = orthogonal_two_user(2.0);
        let grouping = RelayGrouping::from_groups(vec![0], vec![1]);
        // theta at the upper bound -> not applicable
        let boundary = Solution {
            precoders: PrecoderSet::zeros(2, 2),
            common_split: vec![0.0; 2],
            theta: 1.0,
            maxmin_rate: 0.0,
            solver_objective: 0.0,
            iterations: 1,
            converged: true,
            trace: vec![],
        };
        assert!(matches!(
            proposition1_check(&boundary, &ch, &grouping, &config, 5e-2),
            Prop1Check::NotApplicable { .. }
        ));

        // hand-built interior solution with unequal group rates
        let mut precoders = PrecoderSet::zeros(2, 2);
        precoders.common[0] = Complex64::new(1.0, 0.0); // only user 0 hears it
        let interior = Solution {
            precoders,
            common_split: vec![0.0; 2],
            theta: 0.5,
            maxmin_rate: 0.0,
            solver_objective: 0.0,
            iterations: 1,
            converged: true,
            trace: vec![],
        };
        match proposition1_check(&interior, &ch, &grouping, &config, 5e-2) {
            Prop1Check::Violated { gap, .. } => assert!((gap - 0.5).abs() < 1e-9),
            other => panic!("expected violation, got {other:?}"),
        }
    }
}
