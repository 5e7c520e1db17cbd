//! Experiment geometry and its flat `key = value` configuration format.
//!
//! ```text
//! # lengths in meters, angles in radians
//! wavelength = 790e-9
//! slit_separation = 200e-6
//! path_model = exact
//! ```
//!
//! Keys not listed in [`KEYS`] are rejected. Omitted keys keep their
//! defaults. Besides the geometry proper, the file may set `epsilon` (the
//! SPDC pair amplitude) and `envelope` (`none` or `sinc2`).

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::spdc::{DEFAULT_EPSILON, MAX_EPSILON};
use crate::hilbert::C64;

/// Tolerance on the `r_L = r_M` constraint, meters.
const EQUAL_PATH_TOL: f64 = 1e-12;

pub const KEYS: &[&str] = &[
    "wavelength",
    "focal_length",
    "focal_offset",
    "source_to_slits",
    "slit_separation",
    "slit_width",
    "slits_to_screen",
    "beam_divergence",
    "path_r_D",
    "path_r_K",
    "path_r_L",
    "path_r_M",
    "screen_halfwidth",
    "n_bins",
    "path_model",
    "envelope",
    "epsilon",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("invalid geometry: {0}")]
    Invalid(String),
}

impl ConfigError {
    /// Semantic validation failures, as opposed to unreadable or malformed input.
    pub fn is_invalid_parameter(&self) -> bool {
        matches!(self, ConfigError::Invalid(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathModel {
    /// `r_i = sqrt(L² + (z ∓ a/2)²)`
    Exact,
    /// `r_1 − r_2 = −z a / L`, `r_1 + r_2 = 2L`
    Paraxial,
}

impl PathModel {
    pub fn as_str(self) -> &'static str {
        match self {
            PathModel::Exact => "exact",
            PathModel::Paraxial => "paraxial",
        }
    }
}

impl FromStr for PathModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(PathModel::Exact),
            "paraxial" => Ok(PathModel::Paraxial),
            other => Err(format!("expected `exact` or `paraxial`, found {other:?}")),
        }
    }
}

/// Optional intensity envelope multiplying the two-slit rates. Off by
/// default; the bare rate formulas carry no single-slit factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Envelope {
    None,
    /// Fraunhofer single-slit factor `sinc²(π s sinϑ / λ)`.
    SingleSlitSinc2,
}

impl Envelope {
    pub fn as_str(self) -> &'static str {
        match self {
            Envelope::None => "none",
            Envelope::SingleSlitSinc2 => "sinc2",
        }
    }
}

impl FromStr for Envelope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Envelope::None),
            "sinc2" => Ok(Envelope::SingleSlitSinc2),
            other => Err(format!("expected `none` or `sinc2`, found {other:?}")),
        }
    }
}

/// All lengths in meters, angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub wavelength: f64,
    pub focal_length: f64,
    /// Alice's off-focal detector plane sits at `focal_length − focal_offset`.
    pub focal_offset: f64,
    pub source_to_slits: f64,
    pub slit_separation: f64,
    pub slit_width: f64,
    pub slits_to_screen: f64,
    pub beam_divergence: f64,
    /// Source to either slit of Bob's diaphragm.
    pub path_r_d: f64,
    /// Source to Alice's focal point, identical along both arms.
    pub path_r_k: f64,
    pub path_r_l: f64,
    pub path_r_m: f64,
    pub screen_halfwidth: f64,
    pub n_bins: usize,
    pub path_model: PathModel,
    pub envelope: Envelope,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            wavelength: 790e-9,
            focal_length: 0.1,
            focal_offset: 0.02,
            source_to_slits: 1.0,
            slit_separation: 200e-6,
            slit_width: 20e-6,
            slits_to_screen: 1.0,
            beam_divergence: 1e-3,
            path_r_d: 0.0,
            path_r_k: 0.0,
            path_r_l: 0.0,
            path_r_m: 0.0,
            screen_halfwidth: 5e-3,
            n_bins: 201,
            path_model: PathModel::Exact,
            envelope: Envelope::None,
        }
    }
}

impl Geometry {
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// `e^{ik·length}`. The length is reduced modulo λ first (exact in
    /// floating point) so long paths keep full phase precision.
    pub fn phase(&self, length: f64) -> C64 {
        let reduced = length % self.wavelength;
        C64::from_polar(1.0, 2.0 * PI * (reduced / self.wavelength))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("wavelength", self.wavelength),
            ("focal_length", self.focal_length),
            ("focal_offset", self.focal_offset),
            ("source_to_slits", self.source_to_slits),
            ("slit_separation", self.slit_separation),
            ("slit_width", self.slit_width),
            ("slits_to_screen", self.slits_to_screen),
            ("screen_halfwidth", self.screen_halfwidth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let offsets = [
            ("beam_divergence", self.beam_divergence),
            ("path_r_D", self.path_r_d),
            ("path_r_K", self.path_r_k),
            ("path_r_L", self.path_r_l),
            ("path_r_M", self.path_r_m),
        ];
        for (name, v) in offsets {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.focal_offset >= self.focal_length {
            return Err(ConfigError::Invalid(format!(
                "focal_offset ({}) must be smaller than focal_length ({})",
                self.focal_offset, self.focal_length
            )));
        }
        if (self.path_r_l - self.path_r_m).abs() > EQUAL_PATH_TOL {
            return Err(ConfigError::Invalid(format!(
                "path_r_L ({}) and path_r_M ({}) must be equal",
                self.path_r_l, self.path_r_m
            )));
        }
        if self.n_bins == 0 {
            return Err(ConfigError::Invalid("n_bins must be at least 1".into()));
        }
        Ok(())
    }

    /// Non-fatal findings, e.g. a beam too divergent for clean fringes.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.slit_width * self.beam_divergence >= self.wavelength {
            out.push(format!(
                "slit_width * beam_divergence = {:e} m is not small against the wavelength {:e} m; fringes will wash out",
                self.slit_width * self.beam_divergence,
                self.wavelength
            ));
        }
        out
    }

    /// Uniform grid over `[-screen_halfwidth, screen_halfwidth]`, endpoints
    /// included. With an odd bin count the middle point is exactly zero.
    pub fn screen_grid(&self) -> Vec<f64> {
        let n = self.n_bins;
        if n == 1 {
            return vec![0.0];
        }
        let h = self.screen_halfwidth;
        (0..n)
            .map(|i| h * ((2 * i) as f64 / (n - 1) as f64 - 1.0))
            .collect()
    }

    /// Sets one configuration key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn real(v: &str) -> Result<f64, String> {
            let x: f64 = v.parse().map_err(|_| format!("not a number: {v:?}"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("not finite: {v:?}"))
            }
        }
        match key {
            "wavelength" => self.wavelength = real(value)?,
            "focal_length" => self.focal_length = real(value)?,
            "focal_offset" => self.focal_offset = real(value)?,
            "source_to_slits" => self.source_to_slits = real(value)?,
            "slit_separation" => self.slit_separation = real(value)?,
            "slit_width" => self.slit_width = real(value)?,
            "slits_to_screen" => self.slits_to_screen = real(value)?,
            "beam_divergence" => self.beam_divergence = real(value)?,
            "path_r_D" => self.path_r_d = real(value)?,
            "path_r_K" => self.path_r_k = real(value)?,
            "path_r_L" => self.path_r_l = real(value)?,
            "path_r_M" => self.path_r_m = real(value)?,
            "screen_halfwidth" => self.screen_halfwidth = real(value)?,
            "n_bins" => {
                self.n_bins = value
                    .parse()
                    .map_err(|_| format!("not a non-negative integer: {value:?}"))?
            }
            "path_model" => self.path_model = value.parse()?,
            "envelope" => self.envelope = value.parse()?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// `(key, value)` pairs in [`KEYS`] order, floats with 17 significant
    /// digits so the text parses back to identical bits.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:.16e}");
        vec![
            ("wavelength", f(self.wavelength)),
            ("focal_length", f(self.focal_length)),
            ("focal_offset", f(self.focal_offset)),
            ("source_to_slits", f(self.source_to_slits)),
            ("slit_separation", f(self.slit_separation)),
            ("slit_width", f(self.slit_width)),
            ("slits_to_screen", f(self.slits_to_screen)),
            ("beam_divergence", f(self.beam_divergence)),
            ("path_r_D", f(self.path_r_d)),
            ("path_r_K", f(self.path_r_k)),
            ("path_r_L", f(self.path_r_l)),
            ("path_r_M", f(self.path_r_m)),
            ("screen_halfwidth", f(self.screen_halfwidth)),
            ("n_bins", self.n_bins.to_string()),
            ("path_model", self.path_model.as_str().to_string()),
            ("envelope", self.envelope.as_str().to_string()),
        ]
    }

    /// First 16 hex digits of SHA-256 over the canonical `key = value` text.
    pub fn hash(&self) -> String {
        digest_entries(&self.entries())
    }
}

fn digest_entries(entries: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    hex::encode(&Sha256::digest(s.as_bytes())[..8])
}

/// Everything a config file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub epsilon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        if !(self.epsilon > 0.0 && self.epsilon < MAX_EPSILON) {
            return Err(ConfigError::Invalid(format!(
                "epsilon must lie in (0, {MAX_EPSILON}), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Canonical config text; parsing it reproduces `self` exactly.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = self.geometry.entries();
        e.push(("epsilon", format!("{:.16e}", self.epsilon)));
        e
    }

    /// First 16 hex digits of SHA-256 over the canonical text.
    pub fn hash(&self) -> String {
        digest_entries(&self.entries())
    }
}

/// Parses config text. Syntax is checked here; call
/// [`ExperimentConfig::validate`] for the physical constraints.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        let result = if key == "epsilon" {
            value
                .parse::<f64>()
                .map_err(|_| format!("not a number: {value:?}"))
                .map(|e| cfg.epsilon = e)
        } else {
            cfg.geometry.set(key, value)
        };
        result.map_err(|reason| ConfigError::BadValue {
            line,
            key: key.to_string(),
            reason,
        })?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_quiet() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert!(cfg.geometry.warnings().is_empty());
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.geometry.wavelength = 0.1 + 0.2;
        cfg.geometry.path_model = PathModel::Paraxial;
        cfg.epsilon = 1.0 / 3.0;
        let back = parse_config(&cfg.to_config_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config("# header\n\nn_bins = 11 # trailing\n  wavelength=633e-9\n").unwrap();
        assert_eq!(cfg.geometry.n_bins, 11);
        assert_eq!(cfg.geometry.wavelength, 633e-9);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("wavenumber = 3").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 1, .. }));
        assert!(!err.is_invalid_parameter());
    }

    #[test]
    fn duplicate_and_malformed_lines_rejected() {
        assert!(matches!(
            parse_config("n_bins = 3\nn_bins = 4").unwrap_err(),
            ConfigError::DuplicateKey { line: 2, .. }
        ));
        assert!(matches!(parse_config("n_bins 3").unwrap_err(), ConfigError::Syntax { .. }));
        assert!(matches!(
            parse_config("wavelength = blue").unwrap_err(),
            ConfigError::BadValue { .. }
        ));
        assert!(matches!(
            parse_config("path_model = fresnel").unwrap_err(),
            ConfigError::BadValue { .. }
        ));
    }

    #[test]
    fn semantic_constraints() {
        let bad = |text: &str| parse_config(text).unwrap().validate().unwrap_err();
        assert!(bad("focal_offset = 0.2").is_invalid_parameter());
        assert!(bad("slit_width = -1e-6").is_invalid_parameter());
        assert!(bad("path_r_L = 0.5").is_invalid_parameter());
        assert!(bad("n_bins = 0").is_invalid_parameter());
        assert!(bad("epsilon = 0.3").is_invalid_parameter());
    }

    #[test]
    fn divergence_warning() {
        let mut g = Geometry::default();
        g.beam_divergence = 0.05;
        assert_eq!(g.warnings().len(), 1);
    }

    #[test]
    fn grid_is_symmetric_with_exact_zero() {
        let g = Geometry::default().screen_grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], -5e-3);
        assert_eq!(g[200], 5e-3);
        assert_eq!(g[100], 0.0);
    }

    #[test]
    fn phase_reduction_keeps_precision() {
        let g = Geometry::default();
        let p = g.phase(1.0 + g.wavelength / 4.0);
        let q = g.phase(1.0);
        // quarter wave apart
        assert!((p / q - C64::new(0.0, 1.0)).norm() < 1e-8);
        assert!((g.phase(0.0) - C64::new(1.0, 0.0)).norm() == 0.0);
    }
}
