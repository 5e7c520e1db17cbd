//! Numerical model of a two-photon "which-plane" signaling experiment.
//!
//! A polarization-entangled photon pair is split: Alice measures at or away
//! from the focal plane of a lens, Bob looks for double-slit fringes. The
//! crate computes Bob's screen statistics two ways (second-order field
//! correlation and explicit measurement on the two-photon state), compares
//! three reduction rules for Alice's degenerate focal outcome, and samples
//! detection events so a decoder can try to read Alice's choice.
//!
//! * [`hilbert`]: states, operators, density matrices, partial trace.
//! * [`experiment`]: geometry, SPDC state, field operators, patterns.
//! * [`measurement`]: von Neumann, Lüders and coherent reduction.
//! * [`mc`]: seeded event streams, visibility, the one-bit decoder.
//! * [`cli`]: the `eprsim` command line.

pub mod hilbert;
pub mod experiment;
pub mod measurement;
pub mod mc;
pub mod cli;

/// Crate version, written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
