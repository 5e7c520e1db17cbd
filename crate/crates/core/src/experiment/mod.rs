//! Geometry, field state, field operators and the coincidence-rate engine.
//!
//! Two routes to Bob's screen statistics live here. The field route
//! ([`coincidence_rate`], [`sweep_pattern`]) evaluates the second-order
//! correlation of the truncated SPDC state. The state route
//! ([`phase_evolved_state`]) writes the path phases into the two-photon
//! state over `{H,V} ⊗ {screen bins}` so that measurement rules can act on
//! it; see `crate::measurement`.

mod geometry;
mod spdc;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::hilbert::{StateVector, C64};

pub use geometry::{
    load_config, parse_config, ConfigError, Envelope, ExperimentConfig, Geometry, PathModel, KEYS,
};
pub use spdc::{
    coincidence_rate, correlation_amplitude, field_alice_focal, field_alice_offfocal, field_bob,
    path_lengths, FieldOperator, FockTerm, Mode, OffFocalPoint, SlitPaths, SpdcState,
    DEFAULT_EPSILON, MAX_EPSILON,
};

/// Tolerance on the unit-integral normalization of a pattern.
pub const UNIT_INTEGRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("screen position {z:e} m lies outside ±{halfwidth:e} m")]
    OffScreen { z: f64, halfwidth: f64 },
    #[error("epsilon must lie in (0, {MAX_EPSILON}), got {0}")]
    Epsilon(f64),
    #[error("field operator needs at least one non-zero coefficient")]
    NullField,
    #[error("a pattern needs at least {min} screen points, got {got}")]
    TooFewBins { min: usize, got: usize },
    #[error("pattern positions and values differ in length ({positions} vs {values})")]
    LengthMismatch { positions: usize, values: usize },
    #[error("pattern value {0} is negative or not finite")]
    BadValue(f64),
    #[error("pattern integrates to zero and cannot be normalized")]
    ZeroIntegral,
}

/// Where Alice puts her detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    Focal,
    OffFocal,
}

impl Plane {
    /// Alice's path constant `r_A` for this plane.
    pub fn alice_path(self, geo: &Geometry) -> f64 {
        match self {
            Plane::Focal => geo.path_r_k,
            Plane::OffFocal => geo.path_r_l,
        }
    }
}

/// Alice configuration for a screen sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AliceSetting {
    Focal,
    OffFocalL,
    OffFocalM,
    /// Both off-focal outcomes added: Bob's singles when Alice is off-focal.
    OffFocalSum,
}

impl AliceSetting {
    pub const ALL: [AliceSetting; 4] = [
        AliceSetting::Focal,
        AliceSetting::OffFocalL,
        AliceSetting::OffFocalM,
        AliceSetting::OffFocalSum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AliceSetting::Focal => "focal",
            AliceSetting::OffFocalL => "offfocal_l",
            AliceSetting::OffFocalM => "offfocal_m",
            AliceSetting::OffFocalSum => "offfocal_sum",
        }
    }
}

impl fmt::Display for AliceSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AliceSetting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        AliceSetting::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                format!("unknown Alice setting {s:?}; expected focal, offfocal_l, offfocal_m or offfocal_sum")
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    Raw,
    UnitIntegral,
}

/// Non-negative intensity profile over screen positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    positions: Vec<f64>,
    values: Vec<f64>,
    normalization: Normalization,
    /// Number of detection events behind the values, for count histograms.
    sample_size: Option<u64>,
}

impl Pattern {
    pub fn new(positions: Vec<f64>, values: Vec<f64>, normalization: Normalization) -> Result<Self, ExperimentError> {
        if positions.len() != values.len() {
            return Err(ExperimentError::LengthMismatch {
                positions: positions.len(),
                values: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(ExperimentError::BadValue(bad));
        }
        Ok(Self {
            positions,
            values,
            normalization,
            sample_size: None,
        })
    }

    /// Raw pattern of event counts.
    pub fn from_counts(positions: Vec<f64>, counts: &[u64]) -> Result<Self, ExperimentError> {
        let total = counts.iter().sum();
        let mut p = Self::new(positions, counts.iter().map(|&c| c as f64).collect(), Normalization::Raw)?;
        p.sample_size = Some(total);
        Ok(p)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn sample_size(&self) -> Option<u64> {
        self.sample_size
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Trapezoidal integral over the positions.
    pub fn integral(&self) -> f64 {
        self.positions
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Rescaled so the trapezoidal integral is one.
    pub fn unit_integral(&self) -> Result<Pattern, ExperimentError> {
        let total = self.integral();
        if !(total > 0.0) {
            return Err(ExperimentError::ZeroIntegral);
        }
        Ok(Pattern {
            positions: self.positions.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
            normalization: Normalization::UnitIntegral,
            sample_size: self.sample_size,
        })
    }

    /// Values divided by their arithmetic mean.
    pub fn unit_mean(&self) -> Result<Vec<f64>, ExperimentError> {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        if !(mean > 0.0) {
            return Err(ExperimentError::ZeroIntegral);
        }
        Ok(self.values.iter().map(|v| v / mean).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Coincidence (or, for [`AliceSetting::OffFocalSum`], singles) rate at one
/// screen point.
pub fn rate_at(state: &SpdcState, geo: &Geometry, alice: AliceSetting, z: f64) -> Result<f64, ExperimentError> {
    let bob = field_bob(geo, z)?;
    let rate = match alice {
        AliceSetting::Focal => coincidence_rate(state, &field_alice_focal(geo), &bob),
        AliceSetting::OffFocalL => coincidence_rate(state, &field_alice_offfocal(geo, OffFocalPoint::L), &bob),
        AliceSetting::OffFocalM => coincidence_rate(state, &field_alice_offfocal(geo, OffFocalPoint::M), &bob),
        AliceSetting::OffFocalSum => {
            coincidence_rate(state, &field_alice_offfocal(geo, OffFocalPoint::L), &bob)
                + coincidence_rate(state, &field_alice_offfocal(geo, OffFocalPoint::M), &bob)
        }
    };
    Ok(rate * spdc::envelope_factor(geo, z))
}

/// Rates on the geometry's screen grid.
pub fn sweep_pattern(state: &SpdcState, geo: &Geometry, alice: AliceSetting) -> Result<Pattern, ExperimentError> {
    sweep_pattern_on(state, geo, alice, &geo.screen_grid())
}

/// Rates on an arbitrary list of screen points. Bins are evaluated in
/// parallel; each is a pure function of its position, so the result is
/// identical to a sequential sweep.
pub fn sweep_pattern_on(
    state: &SpdcState,
    geo: &Geometry,
    alice: AliceSetting,
    grid: &[f64],
) -> Result<Pattern, ExperimentError> {
    if grid.len() < 2 {
        return Err(ExperimentError::TooFewBins {
            min: 2,
            got: grid.len(),
        });
    }
    let values = grid
        .par_iter()
        .map(|&z| rate_at(state, geo, alice, z))
        .collect::<Result<Vec<_>, _>>()?;
    Pattern::new(grid.to_vec(), values, Normalization::Raw)
}

/// Two-photon state `Σ_z (|H z⟩ e^{ik[r_A + r_D + r_2(z)]} − |V z⟩ e^{ik[r_A + r_D + r_1(z)]})`,
/// normalized, over `{H,V} ⊗ {grid points}` (A-major). `r_A` is `r_K` for
/// the focal plane and `r_L = r_M` off focus.
///
/// With the optional envelope enabled, each bin is weighted by the square
/// root of the envelope intensity so both routes carry the same factor.
pub fn phase_evolved_state(geo: &Geometry, plane: Plane, grid: &[f64]) -> Result<StateVector, ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::TooFewBins { min: 1, got: 0 });
    }
    let n = grid.len();
    let alice = geo.phase(plane.alice_path(geo));
    let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * n];
    for (i, &z) in grid.iter().enumerate() {
        let paths = path_lengths(geo, z)?;
        let weight = spdc::envelope_factor(geo, z).sqrt();
        amplitudes[i] = alice * spdc::bob_arm_phase(geo, &paths, false) * weight;
        amplitudes[n + i] = -(alice * spdc::bob_arm_phase(geo, &paths, true)) * weight;
    }
    let labels = ["H", "V"]
        .iter()
        .flat_map(|a| (0..n).map(move |i| format!("{a}z{i}")))
        .collect();
    let psi = StateVector::new(amplitudes, labels).expect("2n amplitudes and labels");
    Ok(psi.normalize().expect("unit phases give a non-zero norm"))
}

/// The polarization-entangled pair `(|HV⟩ − |VH⟩)/√2` with the arm phases
/// of the chosen plane applied. Basis `HH, HV, VH, VV`, Alice first.
pub fn entangled_pair(geo: &Geometry, plane: Plane) -> StateVector {
    let (alice_h, alice_v) = match plane {
        Plane::Focal => (geo.path_r_k, geo.path_r_k),
        // the H arm ends at m, the V arm at l
        Plane::OffFocal => (geo.path_r_m, geo.path_r_l),
    };
    let bob = geo.phase(geo.path_r_d);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let zero = C64::new(0.0, 0.0);
    StateVector::new(
        vec![
            zero,
            s * geo.phase(alice_h) * bob,
            -s * geo.phase(alice_v) * bob,
            zero,
        ],
        ["HH", "HV", "VH", "VV"].iter().map(|l| l.to_string()).collect(),
    )
    .expect("four labels")
}
