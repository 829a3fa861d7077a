//! Random channel generation for the K-user downlink with user relaying.
//!
//! One [`ChannelRealization`] holds the BS-to-user vector channels `h_k`
//! (length `N_t`) and the user-to-user scalar channels `h_{k,j}`, all drawn
//! i.i.d. circularly-symmetric complex Gaussian: an entry with variance
//! `sigma^2` has independent real and imaginary parts of variance
//! `sigma^2 / 2` each.
//!
//! Generation is deterministic in `(config, seed)`. The generator is
//! ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded via `seed_from_u64`, with
//! Gaussian samples from `rand_distr::StandardNormal`; the draw order is
//! fixed (BS channels user by user, real part before imaginary part, then
//! the user-to-user matrix row-major with the diagonal skipped), so a seed
//! reproduces bit-identical channels on any platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Invalid [`SystemConfig`] contents.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("num_users must be at least 2, got {0}")]
    TooFewUsers(usize),
    #[error("num_tx_antennas must be positive")]
    NoAntennas,
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} has length {got}, expected {expected}")]
    BadLength {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("grid_step must lie in (0, 1), got {0}")]
    BadGridStep(f64),
    #[error("init_power_split must lie in [0, 1], got {0}")]
    BadPowerSplit(f64),
    #[error("init_theta must lie in (0, 1], got {0}")]
    BadInitTheta(f64),
    #[error("num_relays must lie in [1, K-1], got {got} for K = {num_users}")]
    BadRelayCount { got: usize, num_users: usize },
}

/// System parameters shared by every module: dimensions, power budgets,
/// channel variances, and solver/protocol knobs.
///
/// Noise variance is 1 everywhere, so the BS transmit SNR equals
/// `bs_power` in linear watts (`P_t = 10^(SNR_dB / 10)`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of single-antenna users K.
    pub num_users: usize,
    /// Number of BS transmit antennas N_t.
    pub num_tx_antennas: usize,
    /// BS power budget P_t in linear watts.
    pub bs_power: f64,
    /// Per-user relay transmit powers P_j (linear watts), length K.
    pub relay_powers: Vec<f64>,
    /// BS-to-user channel variances sigma_k^2, length K.
    pub bs_variances: Vec<f64>,
    /// User-to-user channel variances sigma_{k,j}^2, K x K row-major
    /// (receiver k, transmitter j); the diagonal is never read.
    pub user_variances: Vec<Vec<f64>>,
    /// Convergence tolerance of the iterative solvers.
    pub sca_tolerance: f64,
    /// Grid increment for the fixed-theta search baseline.
    pub grid_step: f64,
    /// Timer constant lambda of the decentralized selection protocol.
    pub timer_constant: f64,
    /// Fraction beta of the BS power initially given to private streams.
    pub init_power_split: f64,
    /// Initial time-slot fraction theta for the direct phase.
    pub init_theta: f64,
    /// Number of relaying users K_1 requested by selection protocols.
    pub num_relays: usize,
}

impl SystemConfig {
    /// Default parameter set for `num_users` users, `num_tx_antennas`
    /// antennas and a BS budget of `bs_power` linear watts: relay powers
    /// equal to the BS power, unit variances, tolerance `1e-3`, grid step
    /// `0.1`, timer constant `100`, beta `0.5`, initial theta `0.8` and a
    /// single relaying user.
    pub fn new(num_users: usize, num_tx_antennas: usize, bs_power: f64) -> Self {
        Self {
            num_users,
            num_tx_antennas,
            bs_power,
            relay_powers: vec![bs_power; num_users],
            bs_variances: vec![1.0; num_users],
            user_variances: vec![vec![1.0; num_users]; num_users],
            sca_tolerance: 1e-3,
            grid_step: 0.1,
            timer_constant: 100.0,
            init_power_split: 0.5,
            init_theta: 0.8,
            num_relays: 1,
        }
    }

    /// Replaces the per-user BS channel variances.
    pub fn with_bs_variances(mut self, variances: &[f64]) -> Self {
        self.bs_variances = variances.to_vec();
        self
    }

    /// Sets every relay power to `power` linear watts.
    pub fn with_relay_power(mut self, power: f64) -> Self {
        self.relay_powers = vec![power; self.num_users];
        self
    }

    /// Sets every user-to-user variance to `variance`.
    pub fn with_user_variance(mut self, variance: f64) -> Self {
        self.user_variances = vec![vec![variance; self.num_users]; self.num_users];
        self
    }

    /// Checks every invariant; all entry points that build configs call
    /// this before handing the config to the numerical modules.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_users < 2 {
            return Err(ConfigError::TooFewUsers(self.num_users));
        }
        if self.num_tx_antennas == 0 {
            return Err(ConfigError::NoAntennas);
        }
        for (name, value) in [
            ("bs_power", self.bs_power),
            ("sca_tolerance", self.sca_tolerance),
            ("timer_constant", self.timer_constant),
        ] {
            if !(value > 0.0) {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(ConfigError::BadGridStep(self.grid_step));
        }
        if !(0.0..=1.0).contains(&self.init_power_split) {
            return Err(ConfigError::BadPowerSplit(self.init_power_split));
        }
        if !(self.init_theta > 0.0 && self.init_theta <= 1.0) {
            return Err(ConfigError::BadInitTheta(self.init_theta));
        }
        let k = self.num_users;
        for (name, list) in [
            ("relay_powers", &self.relay_powers),
            ("bs_variances", &self.bs_variances),
        ] {
            if list.len() != k {
                return Err(ConfigError::BadLength {
                    name,
                    got: list.len(),
                    expected: k,
                });
            }
        }
        for &p in &self.relay_powers {
            if !(p > 0.0) {
                return Err(ConfigError::NonPositive {
                    name: "relay_powers",
                    value: p,
                });
            }
        }
        for &v in &self.bs_variances {
            if !(v >= 0.0) {
                return Err(ConfigError::Negative {
                    name: "bs_variances",
                    value: v,
                });
            }
        }
        if self.user_variances.len() != k {
            return Err(ConfigError::BadLength {
                name: "user_variances",
                got: self.user_variances.len(),
                expected: k,
            });
        }
        for row in &self.user_variances {
            if row.len() != k {
                return Err(ConfigError::BadLength {
                    name: "user_variances row",
                    got: row.len(),
                    expected: k,
                });
            }
            for &v in row {
                if !(v >= 0.0) {
                    return Err(ConfigError::Negative {
                        name: "user_variances",
                        value: v,
                    });
                }
            }
        }
        if self.num_relays == 0 || self.num_relays >= k {
            return Err(ConfigError::BadRelayCount {
                got: self.num_relays,
                num_users: k,
            });
        }
        Ok(())
    }
}

/// Converts a transmit SNR in dB to a linear power (unit noise variance).
pub fn snr_db_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// One Monte Carlo channel draw: immutable after creation and safe to
/// share across parallel workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// BS-to-user channels `h_k`, K vectors of length N_t.
    pub bs_channels: Vec<Vec<Complex64>>,
    /// User-to-user channels indexed `[receiver k][transmitter j]`;
    /// the diagonal is zero and never read.
    pub user_channels: Vec<Vec<Complex64>>,
    /// Variances the BS channels were drawn with.
    pub bs_variances: Vec<f64>,
    /// Variances the user-to-user channels were drawn with.
    pub user_variances: Vec<Vec<f64>>,
    /// Seed the realization was generated from.
    pub seed: u64,
}

impl ChannelRealization {
    pub fn num_users(&self) -> usize {
        self.bs_channels.len()
    }

    pub fn num_tx_antennas(&self) -> usize {
        self.bs_channels.first().map_or(0, Vec::len)
    }

    /// Channel strengths `||h_k||^2` for all users.
    pub fn strengths(&self) -> Vec<f64> {
        self.bs_channels.iter().map(|h| channel_strength(h)).collect()
    }

    /// FNV-1a hash of the raw channel bits; used by the experiment harness
    /// to assert that paired strategies saw identical draws.
    pub fn content_hash(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for byte in x.to_bits().to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for h in &self.bs_channels {
            for z in h {
                eat(z.re);
                eat(z.im);
            }
        }
        for row in &self.user_channels {
            for z in row {
                eat(z.re);
                eat(z.im);
            }
        }
        hash
    }
}

/// Draws one channel realization. Deterministic in `(config, seed)`.
///
/// The config is assumed valid (`SystemConfig::validate`); passing an
/// inconsistent one is a programmer error and panics.
pub fn generate_channels(config: &SystemConfig, seed: u64) -> ChannelRealization {
    config
        .validate()
        .expect("generate_channels requires a validated SystemConfig");

    let k = config.num_users;
    let nt = config.num_tx_antennas;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // sigma^2 total => sigma^2/2 per real dimension
    let draw = |rng: &mut ChaCha8Rng, variance: f64| -> Complex64 {
        let scale = (variance / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(scale * re, scale * im)
    };

    let bs_channels: Vec<Vec<Complex64>> = (0..k)
        .map(|user| {
            (0..nt)
                .map(|_| draw(&mut rng, config.bs_variances[user]))
                .collect()
        })
        .collect();

    let mut user_channels = vec![vec![Complex64::ZERO; k]; k];
    for rx in 0..k {
        for tx in 0..k {
            if rx != tx {
                user_channels[rx][tx] = draw(&mut rng, config.user_variances[rx][tx]);
            }
        }
    }

    ChannelRealization {
        bs_channels,
        user_channels,
        bs_variances: config.bs_variances.clone(),
        user_variances: config.user_variances.clone(),
        seed,
    }
}

/// Squared Euclidean norm `||h||^2`.
pub fn channel_strength(h: &[Complex64]) -> f64 {
    h.iter().map(Complex64::norm_sqr).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config3() -> SystemConfig {
        SystemConfig::new(3, 2, 100.0).with_bs_variances(&[1.0, 0.3, 0.1])
    }

    #[test]
    fn same_seed_same_channels() {
        let cfg = config3();
        let a = generate_channels(&cfg, 42);
        let b = generate_channels(&cfg, 42);
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
        let c = generate_channels(&cfg, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn dimensions_follow_config() {
        let ch = generate_channels(&config3(), 7);
        assert_eq!(ch.num_users(), 3);
        assert_eq!(ch.num_tx_antennas(), 2);
        assert_eq!(ch.user_channels.len(), 3);
        for row in &ch.user_channels {
            assert_eq!(row.len(), 3);
        }
        for k in 0..3 {
            assert_eq!(ch.user_channels[k][k], Complex64::ZERO);
        }
    }

    #[test]
    fn zero_variance_gives_zero_vector() {
        let cfg = SystemConfig::new(3, 2, 1.0).with_bs_variances(&[1.0, 0.0, 1.0]);
        let ch = generate_channels(&cfg, 5);
        assert!(ch.bs_channels[1].iter().all(|z| *z == Complex64::ZERO));
        assert!(ch.bs_channels[0].iter().any(|z| *z != Complex64::ZERO));
    }

    #[test]
    fn strength_hand_values() {
        assert_eq!(channel_strength(&[Complex64::new(3.0, 4.0)]), 25.0);
        assert_eq!(channel_strength(&[Complex64::ZERO; 4]), 0.0);
        assert_eq!(
            channel_strength(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]),
            2.0
        );
    }

    #[test]
    fn sample_second_moment_matches_variance() {
        // mean of ||h_k||^2 / N_t over many draws approaches sigma_k^2
        let cfg = config3();
        let trials = 10_000;
        let mut sums = [0.0f64; 3];
        for seed in 0..trials {
            let ch = generate_channels(&cfg, seed);
            for (k, h) in ch.bs_channels.iter().enumerate() {
                sums[k] += channel_strength(h) / cfg.num_tx_antennas as f64;
            }
        }
        for (k, &sigma2) in cfg.bs_variances.iter().enumerate() {
            let mean = sums[k] / trials as f64;
            assert!(
                (mean - sigma2).abs() <= 0.05 * sigma2,
                "user {k}: mean {mean} vs sigma^2 {sigma2}"
            );
        }
    }

    #[test]
    fn real_part_variance_matches_half_sigma() {
        let cfg = SystemConfig::new(2, 4, 1.0).with_bs_variances(&[0.6, 1.0]);
        let trials = 10_000;
        let mut sum_sq = 0.0f64;
        let mut count = 0usize;
        for seed in 0..trials {
            let ch = generate_channels(&cfg, seed);
            for z in &ch.bs_channels[0] {
                sum_sq += z.re * z.re;
                count += 1;
            }
        }
        let var = sum_sq / count as f64;
        let want = 0.6 / 2.0;
        assert!(
            (var - want).abs() <= 0.05 * want,
            "Re variance {var} vs {want}"
        );
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        assert!(SystemConfig::new(1, 2, 1.0).validate().is_err());
        assert!(SystemConfig::new(3, 0, 1.0).validate().is_err());
        assert!(SystemConfig::new(3, 2, 0.0).validate().is_err());

        let mut cfg = SystemConfig::new(3, 2, 1.0);
        cfg.num_relays = 3;
        assert_eq!(
            cfg.validate(),
            Err(ConfigError::BadRelayCount {
                got: 3,
                num_users: 3
            })
        );

        let mut cfg = SystemConfig::new(3, 2, 1.0);
        cfg.grid_step = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = SystemConfig::new(3, 2, 1.0);
        cfg.bs_variances = vec![1.0, -0.1, 1.0];
        assert!(cfg.validate().is_err());

        assert!(config3().validate().is_ok());
    }

    #[test]
    fn snr_conversion() {
        assert!((snr_db_to_power(20.0) - 100.0).abs() < 1e-12);
        assert!((snr_db_to_power(0.0) - 1.0).abs() < 1e-15);
    }
}
