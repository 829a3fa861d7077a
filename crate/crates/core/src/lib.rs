//! Max-min fair cooperative rate-splitting for the K-user MISO downlink.
//!
//! The toolkit covers the full two-stage design: [`relay`] picks which
//! users forward the common stream (stage 1), [`sca`] jointly optimizes
//! precoders, rate split, and the time-slot fraction for a fixed grouping
//! (stage 2), and [`baselines`] provides the non-cooperative and
//! fixed-split reference schemes. [`channel`] draws reproducible random
//! channels, [`rates`] evaluates any candidate solution independently of
//! the optimizer, [`conic`] solves the per-iteration convex subproblems,
//! and [`harness`] runs seeded Monte Carlo sweeps and writes CSV/SVG
//! reports.

pub mod baselines;
pub mod channel;
pub mod conic;
pub mod harness;
pub mod rates;
pub mod relay;
pub mod sca;
