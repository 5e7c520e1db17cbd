//! Truncated SPDC field state, positive-frequency field operators and the
//! second-order correlation amplitude.

use std::fmt;

use crate::hilbert::{StateVector, C64};

use super::geometry::{Geometry, PathModel};
use super::ExperimentError;

pub const DEFAULT_EPSILON: f64 = 0.1;
/// Upper bound keeping the one-pair truncation perturbative.
pub const MAX_EPSILON: f64 = 0.3;

/// Polarization-labeled spatial mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    H,
    V,
}

/// Occupation of one basis element of the truncated four-mode space:
/// either vacuum or exactly one photon on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockTerm {
    Vacuum,
    Pair { alice: Mode, bob: Mode },
}

impl FockTerm {
    fn from_label(label: &str) -> Option<Self> {
        let m = |c| match c {
            'h' => Some(Mode::H),
            'v' => Some(Mode::V),
            _ => None,
        };
        if label == "vac" {
            return Some(FockTerm::Vacuum);
        }
        let mut chars = label.chars();
        let (a, b) = (chars.next()?, chars.next()?);
        if chars.next().is_some() {
            return None;
        }
        Some(FockTerm::Pair {
            alice: m(a)?,
            bob: m(b)?,
        })
    }
}

/// `|vac⟩ + ε(|hv⟩ − |vh⟩)`, deliberately unnormalized. In `|xy⟩` the first
/// letter is Alice's mode and the second Bob's.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcState {
    epsilon: f64,
    state: StateVector,
}

impl SpdcState {
    pub const LABELS: [&'static str; 3] = ["vac", "hv", "vh"];

    pub fn new(epsilon: f64) -> Result<Self, ExperimentError> {
        if !(epsilon > 0.0 && epsilon < MAX_EPSILON) {
            return Err(ExperimentError::Epsilon(epsilon));
        }
        let state = StateVector::new(
            vec![
                C64::new(1.0, 0.0),
                C64::new(epsilon, 0.0),
                C64::new(-epsilon, 0.0),
            ],
            Self::LABELS.iter().map(|s| s.to_string()).collect(),
        )
        .expect("three labels, three amplitudes");
        Ok(Self { epsilon, state })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

impl Default for SpdcState {
    fn default() -> Self {
        Self::new(DEFAULT_EPSILON).expect("default epsilon is valid")
    }
}

/// `E⁽⁺⁾ = coeff_h ĥ + coeff_v v̂` on one side of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperator {
    pub coeff_h: C64,
    pub coeff_v: C64,
    pub description: String,
}

impl FieldOperator {
    pub fn new(coeff_h: C64, coeff_v: C64, description: impl Into<String>) -> Result<Self, ExperimentError> {
        if coeff_h.norm_sqr() == 0.0 && coeff_v.norm_sqr() == 0.0 {
            return Err(ExperimentError::NullField);
        }
        Ok(Self {
            coeff_h,
            coeff_v,
            description: description.into(),
        })
    }

    pub fn coeff(&self, mode: Mode) -> C64 {
        match mode {
            Mode::H => self.coeff_h,
            Mode::V => self.coeff_v,
        }
    }
}

impl fmt::Display for FieldOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ({})h + ({})v", self.description, self.coeff_h, self.coeff_v)
    }
}

/// Which off-focal detector point Alice uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffFocalPoint {
    /// Reached by the V arm.
    L,
    /// Reached by the H arm.
    M,
}

/// Slit-to-screen distances, split as `base + excess` so the difference
/// `r_1 − r_2` keeps full precision even though both are close to `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitPaths {
    pub base: f64,
    pub excess_upper: f64,
    pub excess_lower: f64,
}

impl SlitPaths {
    /// Upper slit to `z`.
    pub fn r1(&self) -> f64 {
        self.base + self.excess_upper
    }

    /// Lower slit to `z`.
    pub fn r2(&self) -> f64 {
        self.base + self.excess_lower
    }

    /// `r_1 − r_2`.
    pub fn difference(&self) -> f64 {
        self.excess_upper - self.excess_lower
    }
}

/// Distances from the upper (`+a/2`) and lower (`−a/2`) slits to screen
/// point `z`.
pub fn path_lengths(geo: &Geometry, z: f64) -> Result<SlitPaths, ExperimentError> {
    if !(z.abs() <= geo.screen_halfwidth) {
        return Err(ExperimentError::OffScreen {
            z,
            halfwidth: geo.screen_halfwidth,
        });
    }
    let l = geo.slits_to_screen;
    let half = 0.5 * geo.slit_separation;
    let (excess_upper, excess_lower) = match geo.path_model {
        PathModel::Exact => {
            // sqrt(L² + u²) − L = u² / (sqrt(L² + u²) + L), no cancellation
            let excess = |u: f64| u * u / (l.hypot(u) + l);
            (excess(z - half), excess(z + half))
        }
        PathModel::Paraxial => {
            let shift = z * geo.slit_separation / (2.0 * l);
            (-shift, shift)
        }
    };
    Ok(SlitPaths {
        base: l,
        excess_upper,
        excess_lower,
    })
}

/// Phase accumulated from the source via either slit to the screen,
/// `e^{ik(r_D + r_i)}`.
pub(crate) fn bob_arm_phase(geo: &Geometry, paths: &SlitPaths, upper: bool) -> C64 {
    let excess = if upper {
        paths.excess_upper
    } else {
        paths.excess_lower
    };
    geo.phase(geo.path_r_d) * geo.phase(paths.base) * geo.phase(excess)
}

/// Optional single-slit intensity factor at `z`; 1 when disabled.
pub(crate) fn envelope_factor(geo: &Geometry, z: f64) -> f64 {
    use super::geometry::Envelope;
    match geo.envelope {
        Envelope::None => 1.0,
        Envelope::SingleSlitSinc2 => {
            let sin_theta = z / geo.slits_to_screen.hypot(z);
            let x = std::f64::consts::PI * geo.slit_width * sin_theta / geo.wavelength;
            if x == 0.0 {
                1.0
            } else {
                (x.sin() / x).powi(2)
            }
        }
    }
}

/// Bob's screen field: `ĥ` arrives through the upper slit, `v̂` through the
/// lower one.
pub fn field_bob(geo: &Geometry, z: f64) -> Result<FieldOperator, ExperimentError> {
    let paths = path_lengths(geo, z)?;
    FieldOperator::new(
        bob_arm_phase(geo, &paths, true),
        bob_arm_phase(geo, &paths, false),
        format!("E_z(z={z:e})"),
    )
}

pub fn field_alice_offfocal(geo: &Geometry, which: OffFocalPoint) -> FieldOperator {
    let zero = C64::new(0.0, 0.0);
    let op = match which {
        OffFocalPoint::L => FieldOperator::new(zero, geo.phase(geo.path_r_l), "E_l"),
        OffFocalPoint::M => FieldOperator::new(geo.phase(geo.path_r_m), zero, "E_m"),
    };
    op.expect("one coefficient is a unit phase")
}

pub fn field_alice_focal(geo: &Geometry) -> FieldOperator {
    let p = geo.phase(geo.path_r_k);
    FieldOperator::new(p, p, "E_k").expect("unit phases")
}

/// Second-order correlation amplitude `⟨Ψ|E_a E_b|Ψ⟩`.
///
/// Both annihilators act on the one-pair terms and map them onto vacuum;
/// the vacuum term itself is annihilated. What survives is projected on
/// `⟨Ψ|vac⟩`.
pub fn correlation_amplitude(state: &SpdcState, fa: &FieldOperator, fb: &FieldOperator) -> C64 {
    let psi = state.state();
    let mut to_vacuum = C64::new(0.0, 0.0);
    let mut vacuum_overlap = C64::new(0.0, 0.0);
    for (amp, label) in psi.amplitudes().iter().zip(psi.labels()) {
        match FockTerm::from_label(label).expect("SpdcState labels are fixed") {
            FockTerm::Vacuum => vacuum_overlap += amp.conj(),
            FockTerm::Pair { alice, bob } => to_vacuum += amp * fb.coeff(bob) * fa.coeff(alice),
        }
    }
    vacuum_overlap * to_vacuum
}

/// Coincidence rate `|⟨Ψ|E_a E_b|Ψ⟩|²` (unit proportionality constant).
pub fn coincidence_rate(state: &SpdcState, fa: &FieldOperator, fb: &FieldOperator) -> f64 {
    correlation_amplitude(state, fa, fb).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spdc_literal_amplitudes() {
        let s = SpdcState::new(0.1).unwrap();
        assert_eq!(s.state().amplitude_of("vac"), Some(C64::new(1.0, 0.0)));
        assert_eq!(s.state().amplitude_of("hv"), Some(C64::new(0.1, 0.0)));
        assert_eq!(s.state().amplitude_of("vh"), Some(C64::new(-0.1, 0.0)));
        assert!(SpdcState::new(0.3).is_err());
        assert!(SpdcState::new(0.0).is_err());
    }

    #[test]
    fn symmetric_point_has_equal_paths() {
        let geo = Geometry::default();
        let p = path_lengths(&geo, 0.0).unwrap();
        assert_eq!(p.r1(), p.r2());
        assert_eq!(p.difference(), 0.0);
    }

    #[test]
    fn off_screen_rejected() {
        let geo = Geometry::default();
        assert!(path_lengths(&geo, 5.1e-3).is_err());
        assert!(path_lengths(&geo, f64::NAN).is_err());
    }

    #[test]
    fn exact_difference_against_direct_sqrt() {
        let mut geo = Geometry::default();
        geo.slits_to_screen = 1.0;
        geo.slit_separation = 200e-6;
        let z = 1e-3;
        let p = path_lengths(&geo, z).unwrap();
        // direct evaluation, 1e-16 m rounding on each root
        let r1 = (1.0f64 + (z - 100e-6).powi(2)).sqrt();
        let r2 = (1.0f64 + (z + 100e-6).powi(2)).sqrt();
        assert!((p.difference() - (r1 - r2)).abs() < 1e-15);
        assert!((p.difference() - (-2.0e-7)).abs() < 1e-11);

        geo.path_model = PathModel::Paraxial;
        let q = path_lengths(&geo, z).unwrap();
        assert!((q.difference() - (-2.0e-7)).abs() < 1e-20);
        assert!((q.r1() + q.r2() - 2.0).abs() < 1e-15);
        assert!((p.difference() - q.difference()).abs() < 1e-11);
    }

    #[test]
    fn paraxial_half_wave_point() {
        let mut geo = Geometry::default();
        geo.path_model = PathModel::Paraxial;
        let z = geo.wavelength * geo.slits_to_screen / (2.0 * geo.slit_separation);
        let p = path_lengths(&geo, z).unwrap();
        assert!((geo.wavenumber() * p.difference().abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn bob_field_is_pure_phase() {
        let geo = Geometry::default();
        for z in [-4e-3, -1e-4, 0.0, 2.5e-3] {
            let f = field_bob(&geo, z).unwrap();
            assert!((f.coeff_h.norm() - 1.0).abs() < 1e-15);
            assert!((f.coeff_v.norm() - 1.0).abs() < 1e-15);
        }
        let f0 = field_bob(&geo, 0.0).unwrap();
        assert_eq!(f0.coeff_h, f0.coeff_v);
    }

    #[test]
    fn bob_field_opposite_at_half_wave() {
        let mut geo = Geometry::default();
        geo.path_model = PathModel::Paraxial;
        let z = geo.wavelength * geo.slits_to_screen / (2.0 * geo.slit_separation);
        let f = field_bob(&geo, z).unwrap();
        assert!((f.coeff_h + f.coeff_v).norm() < 1e-12);
    }

    #[test]
    fn alice_fields() {
        let geo = Geometry::default();
        let l = field_alice_offfocal(&geo, OffFocalPoint::L);
        assert_eq!(l.coeff_h, C64::new(0.0, 0.0));
        assert_eq!(l.coeff_v.norm(), 1.0);
        let m = field_alice_offfocal(&geo, OffFocalPoint::M);
        assert_eq!(m.coeff_v, C64::new(0.0, 0.0));
        assert_eq!(m.coeff_h, l.coeff_v);
        let k = field_alice_focal(&geo);
        assert_eq!(k.coeff_h, C64::new(1.0, 0.0));
        assert_eq!(k.coeff_v, C64::new(1.0, 0.0));

        let mut shifted = geo.clone();
        shifted.path_r_k = 0.123456;
        let k2 = field_alice_focal(&shifted);
        assert_eq!(k2.coeff_h / k2.coeff_v, C64::new(1.0, 0.0));
    }

    #[test]
    fn null_field_rejected() {
        let z = C64::new(0.0, 0.0);
        assert!(FieldOperator::new(z, z, "nothing").is_err());
    }
}
