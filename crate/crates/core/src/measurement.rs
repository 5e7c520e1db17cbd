//! Alice-side measurement rules and what they leave on Bob's side.
//!
//! Three rules are modeled:
//!
//! * [`MeasurementRule::VonNeumannOffFocal`]: the non-degenerate off-focal
//!   observable with projectors `P_l = |V⟩⟨V|`, `P_m = |H⟩⟨H|`.
//! * [`MeasurementRule::LuedersFocal`]: the focal outcome as the degenerate
//!   subspace projector `P_l + P_m`, which on Alice's two-level space is the
//!   identity.
//! * [`MeasurementRule::CoherentFocal`]: the focal outcome as the operator
//!   `(|H⟩ + |V⟩)(⟨H| + ⟨V|)`, in which the degenerate amplitudes add.
//!
//! The coherent operator is not a projector: it squares to twice itself and
//! does not resolve the identity. [`ProjectorFamily`] computes and exposes
//! those facts rather than assuming them. Its "probability" is therefore a
//! choice: each outcome reports the raw weight `⟨ψ|P ⊗ I|ψ⟩` and a
//! probability obtained by renormalizing raw weights across the family.
//!
//! Post-measurement Bob states are always normalized. The literal
//! superposition `(α|H⟩ + β|V⟩)/√2` with `|α|² + |β|² = 1` has norm `1/√2`;
//! after normalization it is `α|H⟩ + β|V⟩`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::experiment::Plane;
use crate::hilbert::{
    real_part_checked, reduced_b_of_pure, trace_distance, BipartiteLayout, CMatrix, DensityMatrix,
    HermitianOperator, HilbertError, StateVector, ALGEBRA_TOL, C64,
};

/// Allowed deviation of `‖ψ‖²` from one at the input of [`measure`].
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasurementError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("measurement needs a normalized state (‖ψ‖² = {0})")]
    NotNormalized(f64),
    #[error("Alice's space has dimension {found}, the family acts on {expected}")]
    AliceDimension { expected: usize, found: usize },
    #[error("every outcome has zero weight; no conditional state exists")]
    NoOutcome,
    #[error("unknown measurement rule {0:?}")]
    UnknownRule(String),
}

pub type Result<T> = std::result::Result<T, MeasurementError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementRule {
    VonNeumannOffFocal,
    LuedersFocal,
    CoherentFocal,
}

impl MeasurementRule {
    pub const ALL: [MeasurementRule; 3] = [
        MeasurementRule::VonNeumannOffFocal,
        MeasurementRule::LuedersFocal,
        MeasurementRule::CoherentFocal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasurementRule::VonNeumannOffFocal => "VonNeumannOffFocal",
            MeasurementRule::LuedersFocal => "LuedersFocal",
            MeasurementRule::CoherentFocal => "CoherentFocal",
        }
    }

    /// Where Alice's detector sits under this rule.
    pub fn plane(self) -> Plane {
        match self {
            MeasurementRule::VonNeumannOffFocal => Plane::OffFocal,
            MeasurementRule::LuedersFocal | MeasurementRule::CoherentFocal => Plane::Focal,
        }
    }

    /// The bit Alice means to send: 1 for a focal-plane measurement.
    pub fn intended_bit(self) -> u8 {
        match self.plane() {
            Plane::Focal => 1,
            Plane::OffFocal => 0,
        }
    }
}

impl fmt::Display for MeasurementRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasurementRule {
    type Err = MeasurementError;

    /// Accepts the type names (`CoherentFocal`) and kebab or snake forms
    /// (`coherent-focal`, `von_neumann_off_focal`), case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "vonneumannofffocal" | "vonneumann" | "offfocal" => Ok(MeasurementRule::VonNeumannOffFocal),
            "luedersfocal" | "luders" | "lueders" | "ludersfocal" => Ok(MeasurementRule::LuedersFocal),
            "coherentfocal" | "coherent" => Ok(MeasurementRule::CoherentFocal),
            _ => Err(MeasurementError::UnknownRule(s.to_string())),
        }
    }
}

/// One member of a measurement family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub label: String,
    pub operator: HermitianOperator,
    /// `|a⟩` when the operator is `|a⟩⟨a|`; conditional states are then
    /// pure, `(⟨a| ⊗ I)|ψ⟩`.
    pub rank_one: Option<Vec<C64>>,
}

/// Operators on Alice's space with their algebraic properties computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    members: Vec<FamilyMember>,
    complete: bool,
    orthogonal: bool,
    idempotent_scale: Vec<Option<f64>>,
}

impl ProjectorFamily {
    pub fn new(members: Vec<FamilyMember>) -> Self {
        let dim = members.first().map(|m| m.operator.dim()).unwrap_or(0);
        let mut sum = CMatrix::zeros(dim);
        for m in &members {
            sum = sum.add(m.operator.matrix()).expect("same dimension");
        }
        let complete = sum.max_abs_diff(&CMatrix::identity(dim)) <= ALGEBRA_TOL;

        let mut orthogonal = true;
        for (i, a) in members.iter().enumerate() {
            for b in members.iter().skip(i + 1) {
                let prod = a.operator.matrix().mul(b.operator.matrix()).expect("same dimension");
                if prod.max_abs_diff(&CMatrix::zeros(dim)) > ALGEBRA_TOL {
                    orthogonal = false;
                }
            }
        }

        let idempotent_scale = members.iter().map(|m| idempotent_scale(&m.operator)).collect();
        Self {
            members,
            complete,
            orthogonal,
            idempotent_scale,
        }
    }

    /// Rank-one family `{|a_i⟩⟨a_i|}` from (label, vector) pairs.
    pub fn from_rank_one(parts: Vec<(String, Vec<C64>)>) -> Self {
        Self::new(
            parts
                .into_iter()
                .map(|(label, v)| FamilyMember {
                    label,
                    operator: HermitianOperator::projector(&v),
                    rank_one: Some(v),
                })
                .collect(),
        )
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn alice_dim(&self) -> usize {
        self.members.first().map(|m| m.operator.dim()).unwrap_or(0)
    }

    /// `Σ P_i = I` within tolerance.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// `P_i P_j = 0` for every `i ≠ j`.
    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    /// Per member, the `c` with `P² = c P`, or `None` when no such `c` exists.
    pub fn idempotent_scale(&self) -> &[Option<f64>] {
        &self.idempotent_scale
    }

    /// Complete, orthogonal, and every member a true projector.
    pub fn is_projective(&self) -> bool {
        self.complete
            && self.orthogonal
            && self
                .idempotent_scale
                .iter()
                .all(|c| matches!(c, Some(c) if (c - 1.0).abs() <= ALGEBRA_TOL))
    }
}

fn idempotent_scale(op: &HermitianOperator) -> Option<f64> {
    let m = op.matrix();
    let sq = m.mul(m).expect("square");
    let tr = m.trace().re;
    if tr.abs() <= ALGEBRA_TOL {
        return None;
    }
    let c = sq.trace().re / tr;
    (sq.max_abs_diff(&m.scale(C64::new(c, 0.0))) <= ALGEBRA_TOL).then_some(c)
}

fn ket(h: f64, v: f64) -> Vec<C64> {
    vec![C64::new(h, 0.0), C64::new(v, 0.0)]
}

/// Alice's operators for a rule, in the `{H, V}` basis.
pub fn build_family(rule: MeasurementRule) -> ProjectorFamily {
    match rule {
        MeasurementRule::VonNeumannOffFocal => {
            ProjectorFamily::from_rank_one(vec![("l".into(), ket(0.0, 1.0)), ("m".into(), ket(1.0, 0.0))])
        }
        MeasurementRule::LuedersFocal => ProjectorFamily::new(vec![FamilyMember {
            label: "k".into(),
            operator: HermitianOperator::projector(&ket(0.0, 1.0))
                .matrix()
                .add(HermitianOperator::projector(&ket(1.0, 0.0)).matrix())
                .and_then(HermitianOperator::new)
                .expect("sum of projectors"),
            rank_one: None,
        }]),
        MeasurementRule::CoherentFocal => ProjectorFamily::from_rank_one(vec![("k".into(), ket(1.0, 1.0))]),
    }
}

/// What Bob is left with for one outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditional {
    Pure(StateVector),
    Mixed(DensityMatrix),
    /// The outcome has zero weight.
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: String,
    /// `⟨ψ|P ⊗ I|ψ⟩` before any renormalization.
    pub raw_weight: f64,
    /// Raw weight divided by the family total.
    pub probability: f64,
    pub conditional: Conditional,
}

impl MeasurementOutcome {
    pub fn bob_density(&self) -> Option<DensityMatrix> {
        match &self.conditional {
            Conditional::Pure(psi) => Some(DensityMatrix::from_pure(psi)),
            Conditional::Mixed(rho) => Some(rho.clone()),
            Conditional::Undefined => None,
        }
    }

    /// Bob's outcome distribution in his own basis (the diagonal).
    pub fn bob_distribution(&self) -> Option<Vec<f64>> {
        match &self.conditional {
            Conditional::Pure(psi) => Some(psi.amplitudes().iter().map(|a| a.norm_sqr()).collect()),
            Conditional::Mixed(rho) => Some((0..rho.dim()).map(|i| rho.entry(i, i).re).collect()),
            Conditional::Undefined => None,
        }
    }
}

/// `(⟨a| ⊗ I)|ψ⟩`.
fn contract_alice(bra: &[C64], psi: &StateVector, layout: BipartiteLayout) -> Vec<C64> {
    let amps = psi.amplitudes();
    (0..layout.dim_b)
        .map(|j| {
            bra.iter()
                .enumerate()
                .map(|(x, a)| a.conj() * amps[layout.index(x, j)])
                .sum()
        })
        .collect()
}

/// `(P ⊗ I)|ψ⟩`.
fn apply_alice(op: &CMatrix, psi: &StateVector, layout: BipartiteLayout) -> Vec<C64> {
    let amps = psi.amplitudes();
    let mut out = vec![C64::new(0.0, 0.0); layout.dim()];
    for x in 0..layout.dim_a {
        for y in 0..layout.dim_a {
            let p = op.get(x, y);
            if p == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..layout.dim_b {
                out[layout.index(x, j)] += p * amps[layout.index(y, j)];
            }
        }
    }
    out
}

/// Applies `rule` on Alice's side of a normalized pure state.
pub fn measure(rule: MeasurementRule, psi: &StateVector, layout: BipartiteLayout) -> Result<Vec<MeasurementOutcome>> {
    measure_with(&build_family(rule), psi, layout)
}

/// As [`measure`], for an arbitrary family on Alice's space.
pub fn measure_with(
    family: &ProjectorFamily,
    psi: &StateVector,
    layout: BipartiteLayout,
) -> Result<Vec<MeasurementOutcome>> {
    layout.check(psi.dim())?;
    if family.alice_dim() != layout.dim_a {
        return Err(MeasurementError::AliceDimension {
            expected: family.alice_dim(),
            found: layout.dim_a,
        });
    }
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(MeasurementError::NotNormalized(norm));
    }

    let mut outcomes = Vec::with_capacity(family.members().len());
    for member in family.members() {
        let (raw_weight, conditional) = match &member.rank_one {
            Some(bra) => {
                let bob = StateVector::from_amplitudes(contract_alice(bra, psi, layout))?;
                let w = bob.norm_sqr();
                let cond = match bob.normalize() {
                    Ok(b) if w > 0.0 => Conditional::Pure(relabel(b, psi, layout)),
                    _ => Conditional::Undefined,
                };
                (w, cond)
            }
            None => {
                let post = StateVector::from_amplitudes(apply_alice(member.operator.matrix(), psi, layout))?;
                let w = real_part_checked(psi.inner(&post)?)?;
                let cond = match post.normalize() {
                    Ok(p) if w > 0.0 => Conditional::Mixed(reduced_b_of_pure(&p, layout)?),
                    _ => Conditional::Undefined,
                };
                (w, cond)
            }
        };
        outcomes.push(MeasurementOutcome {
            label: member.label.clone(),
            raw_weight,
            probability: 0.0,
            conditional,
        });
    }

    let total: f64 = outcomes.iter().map(|o| o.raw_weight).sum();
    if total > 0.0 {
        for o in &mut outcomes {
            o.probability = o.raw_weight / total;
        }
    }
    Ok(outcomes)
}

/// Carries Bob's labels over from the composite basis when they are
/// recoverable (`"H" + "z3"` → `"z3"`).
fn relabel(bob: StateVector, psi: &StateVector, layout: BipartiteLayout) -> StateVector {
    let first = &psi.labels()[..layout.dim_b];
    let last = &psi.labels()[layout.index(layout.dim_a - 1, 0)..];
    let labels: Option<Vec<String>> = first
        .iter()
        .zip(last)
        .map(|(a, b)| common_suffix(a, b))
        .collect();
    match labels {
        Some(l) => StateVector::new(bob.amplitudes().to_vec(), l).unwrap_or(bob),
        None => bob,
    }
}

fn common_suffix(a: &str, b: &str) -> Option<String> {
    let n = a
        .chars()
        .rev()
        .zip(b.chars().rev())
        .take_while(|(x, y)| x == y)
        .count();
    (n > 0).then(|| a.chars().skip(a.chars().count() - n).collect())
}

/// Outcome-weighted mixture of Bob's conditional states.
pub fn bob_marginal(rule: MeasurementRule, psi: &StateVector, layout: BipartiteLayout) -> Result<DensityMatrix> {
    mixture_of(&measure(rule, psi, layout)?)
}

pub fn mixture_of(outcomes: &[MeasurementOutcome]) -> Result<DensityMatrix> {
    let parts: Vec<(f64, DensityMatrix)> = outcomes
        .iter()
        .filter(|o| o.probability > 0.0)
        .filter_map(|o| o.bob_density().map(|r| (o.probability, r)))
        .collect();
    if parts.is_empty() {
        return Err(MeasurementError::NoOutcome);
    }
    let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(w, r)| (*w, r)).collect();
    Ok(DensityMatrix::mixture(&refs)?)
}

/// `⟨ψ|(P_A ⊗ P_B)|ψ⟩`, computed without forming the Kronecker product.
pub fn joint_expectation(
    pa: &HermitianOperator,
    pb: &HermitianOperator,
    psi: &StateVector,
    layout: BipartiteLayout,
) -> Result<f64> {
    layout.check(psi.dim())?;
    if pa.dim() != layout.dim_a {
        return Err(HilbertError::DimensionMismatch {
            expected: layout.dim_a,
            found: pa.dim(),
        }
        .into());
    }
    if pb.dim() != layout.dim_b {
        return Err(HilbertError::DimensionMismatch {
            expected: layout.dim_b,
            found: pb.dim(),
        }
        .into());
    }
    let amps = psi.amplitudes();
    let (a, b) = (pa.matrix(), pb.matrix());
    // T = Ψ · P_Bᵀ, then (P_A ⊗ P_B)ψ = P_A · T
    let mut t = vec![C64::new(0.0, 0.0); layout.dim()];
    for y in 0..layout.dim_a {
        for j in 0..layout.dim_b {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..layout.dim_b {
                acc += b.get(j, k) * amps[layout.index(y, k)];
            }
            t[layout.index(y, j)] = acc;
        }
    }
    let mut value = C64::new(0.0, 0.0);
    for x in 0..layout.dim_a {
        for j in 0..layout.dim_b {
            let mut acc = C64::new(0.0, 0.0);
            for y in 0..layout.dim_a {
                acc += a.get(x, y) * t[layout.index(y, j)];
            }
            value += amps[layout.index(x, j)].conj() * acc;
        }
    }
    Ok(real_part_checked(value)?)
}

/// How well Bob can tell Alice's two settings apart from one photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStrength {
    pub trace_distance: f64,
    /// `(1 + D)/2`, the best single-shot guessing probability.
    pub helstrom_success: f64,
}

impl SignalStrength {
    pub fn from_trace_distance(d: f64) -> Self {
        Self {
            trace_distance: d,
            helstrom_success: 0.5 * (1.0 + d),
        }
    }
}

/// Distance between Bob's marginals under the coherent focal rule and the
/// off-focal von Neumann rule.
pub fn signal_strength(psi: &StateVector, layout: BipartiteLayout) -> Result<SignalStrength> {
    signal_strength_for(MeasurementRule::CoherentFocal, psi, layout)
}

/// As [`signal_strength`] with any rule standing in for the focal setting.
pub fn signal_strength_for(focal: MeasurementRule, psi: &StateVector, layout: BipartiteLayout) -> Result<SignalStrength> {
    let rho_f = bob_marginal(focal, psi, layout)?;
    let rho_g = bob_marginal(MeasurementRule::VonNeumannOffFocal, psi, layout)?;
    Ok(SignalStrength::from_trace_distance(trace_distance(&rho_f, &rho_g)?))
}
