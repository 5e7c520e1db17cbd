//! Seeded detection-event streams, histograms, visibility and Bob's decoder.
//!
//! # Generator
//!
//! Every run draws from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded with
//! `seed_from_u64(seed)` and switched to stream `stream` with `set_stream`.
//! Trial `i` of a batch uses stream `i`, so trials are independent and can
//! run in any order. A uniform deviate is `(next_u64() >> 11) · 2⁻⁵³`.
//!
//! Each emitted pair consumes exactly four deviates, in this order:
//! detection (kept iff `u < efficiency`), background (noise iff
//! `u < background_rate`), Alice's outcome, Bob's bin. Discrete draws use
//! inverse-CDF lookup where the first index with `cdf > u` wins, so ties go
//! to the lower index. The stream of records is then a pure function of
//! `(seed, stream, config)`.

mod eventlog;
mod visibility;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::experiment::{phase_evolved_state, ConfigError, ExperimentError, Geometry, Pattern};
use crate::hilbert::BipartiteLayout;
use crate::measurement::{measure, MeasurementError, MeasurementRule};

pub use eventlog::{read_event_log, write_event_log, EventLog, LogHeader, LOG_COLUMNS};
pub use visibility::{moving_average, visibility, VisibilityEstimate};

/// Moving-average width the decoder uses unless told otherwise.
///
/// Three bins is too narrow at 1000 events over 201 bins: the maximum of
/// a flat histogram's shot noise then routinely sits at twice the minimum,
/// which reads as V > 0.5. Fifteen bins (about a fifth of a fringe period
/// on the default screen) keeps flat runs well under 0.5 while fringes
/// still read close to 1.
pub const DEFAULT_WINDOW: usize = 15;

/// Default decision threshold on the visibility.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Runs with fewer than this many events per bin are flagged.
pub const MIN_EVENTS_PER_BIN: usize = 10;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid run: {0}")]
    InvalidRun(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error("visibility of an empty pattern")]
    EmptyPattern,
    #[error("visibility of an all-zero pattern is undefined")]
    AllZero,
    #[error("smoothing window {window} does not fit {len} bins")]
    BadWindow { window: usize, len: usize },
    #[error("event log: {0}")]
    Log(String),
}

pub type Result<T> = std::result::Result<T, McError>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_events: u64,
    pub seed: u64,
    pub stream: u64,
    pub rule: MeasurementRule,
    pub geometry: Geometry,
    /// Fraction of recorded events replaced by uniform noise at Bob.
    pub background_rate: f64,
    /// Probability that an emitted pair is recorded at all.
    pub efficiency: f64,
}

impl RunConfig {
    pub fn new(rule: MeasurementRule, geometry: Geometry, n_events: u64, seed: u64) -> Self {
        Self {
            n_events,
            seed,
            stream: 0,
            rule,
            geometry,
            background_rate: 0.0,
            efficiency: 1.0,
        }
    }

    /// Run-level checks; geometry errors come back as [`McError::Config`].
    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(McError::InvalidRun("n_events must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.background_rate) {
            return Err(McError::InvalidRun(format!(
                "background_rate must lie in [0, 1), got {}",
                self.background_rate
            )));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(McError::InvalidRun(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        self.geometry.validate()?;
        if self.geometry.n_bins < 2 {
            return Err(McError::InvalidRun("at least 2 screen bins are needed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventRecord {
    pub index: u64,
    pub alice_outcome: String,
    pub bob_bin: usize,
    pub is_background: bool,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Cumulative table from non-negative weights, scaled to end at one.
fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

/// First index whose cumulative value exceeds `u`.
fn lookup(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

#[derive(Debug, Clone)]
struct Branch {
    label: String,
    probability: f64,
    /// Bob's conditional distribution, summing to one.
    dist: Vec<f64>,
    cdf: Vec<f64>,
}

/// Precomputed outcome and bin tables for one rule on one geometry.
#[derive(Debug, Clone)]
pub struct Sampler {
    outcome_cdf: Vec<f64>,
    branches: Vec<Branch>,
    n_bins: usize,
}

impl Sampler {
    pub fn new(rule: MeasurementRule, geometry: &Geometry) -> Result<Self> {
        let grid = geometry.screen_grid();
        let psi = phase_evolved_state(geometry, rule.plane(), &grid)?;
        let outcomes = measure(rule, &psi, BipartiteLayout::new(2, grid.len()))?;

        let mut probs = Vec::new();
        let mut branches = Vec::new();
        for o in outcomes {
            let Some(dist) = o.bob_distribution() else { continue };
            if o.probability <= 0.0 {
                continue;
            }
            let total: f64 = dist.iter().sum();
            probs.push(o.probability);
            branches.push(Branch {
                label: o.label,
                probability: o.probability,
                cdf: cumulative(&dist),
                dist: dist.iter().map(|p| p / total).collect(),
            });
        }
        if branches.is_empty() {
            return Err(McError::Measurement(MeasurementError::NoOutcome));
        }
        Ok(Self {
            outcome_cdf: cumulative(&probs),
            branches,
            n_bins: grid.len(),
        })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Bob's bin distribution given Alice's outcome `label`.
    pub fn conditional(&self, label: &str) -> Option<&[f64]> {
        self.branches.iter().find(|b| b.label == label).map(|b| b.dist.as_slice())
    }

    /// `(label, probability)` for every outcome that can occur.
    pub fn outcomes(&self) -> impl Iterator<Item = (&str, f64)> {
        self.branches.iter().map(|b| (b.label.as_str(), b.probability))
    }

    /// Bob's singles distribution: the conditionals weighted by outcome.
    pub fn marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bins];
        for b in &self.branches {
            for (o, p) in out.iter_mut().zip(&b.dist) {
                *o += b.probability * p;
            }
        }
        out
    }

    /// Draws records for `cfg`, which must describe the same rule and
    /// geometry this sampler was built from.
    pub fn run(&self, cfg: &RunConfig) -> Vec<EventRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.stream);
        let mut events = Vec::with_capacity(cfg.n_events as usize);
        while (events.len() as u64) < cfg.n_events {
            let detect = uniform(&mut rng);
            let noise = uniform(&mut rng);
            let u_outcome = uniform(&mut rng);
            let u_bin = uniform(&mut rng);
            if detect >= cfg.efficiency {
                continue;
            }
            let branch = &self.branches[lookup(&self.outcome_cdf, u_outcome)];
            let is_background = noise < cfg.background_rate;
            let bob_bin = if is_background {
                ((u_bin * self.n_bins as f64) as usize).min(self.n_bins - 1)
            } else {
                lookup(&branch.cdf, u_bin)
            };
            events.push(EventRecord {
                index: events.len() as u64,
                alice_outcome: branch.label.clone(),
                bob_bin,
                is_background,
            });
        }
        events
    }
}

/// One seeded run.
pub fn simulate_run(cfg: &RunConfig) -> Result<Vec<EventRecord>> {
    cfg.validate()?;
    Ok(Sampler::new(cfg.rule, &cfg.geometry)?.run(cfg))
}

/// Per-bin counts of Bob's detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub pattern: Pattern,
    /// No events were given; the pattern is all zero.
    pub empty: bool,
}

impl Histogram {
    pub fn counts(&self) -> Vec<u64> {
        self.pattern.values().iter().map(|&v| v as u64).collect()
    }
}

/// Histogram with bin indices as positions.
pub fn histogram(events: &[EventRecord], n_bins: usize) -> Result<Histogram> {
    histogram_on(events, &(0..n_bins).map(|i| i as f64).collect::<Vec<_>>())
}

/// Histogram with the given screen positions, one per bin.
pub fn histogram_on(events: &[EventRecord], positions: &[f64]) -> Result<Histogram> {
    let mut counts = vec![0u64; positions.len()];
    for e in events {
        let slot = counts
            .get_mut(e.bob_bin)
            .ok_or_else(|| McError::InvalidRun(format!("bin {} outside 0..{}", e.bob_bin, positions.len())))?;
        *slot += 1;
    }
    Ok(Histogram {
        pattern: Pattern::from_counts(positions.to_vec(), &counts)?,
        empty: events.is_empty(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// 1 when Bob sees fringes (Alice measured at the focal plane).
    pub bit: u8,
    pub visibility: VisibilityEstimate,
    pub low_confidence: bool,
}

/// Bob's one-bit decision from his own detections only.
pub fn decode_bit(events: &[EventRecord], n_bins: usize, threshold: f64, window: usize) -> Result<Decision> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(McError::InvalidRun(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let h = histogram(events, n_bins)?;
    let low_confidence = events.len() < MIN_EVENTS_PER_BIN * n_bins;
    if h.empty {
        return Ok(Decision {
            bit: 0,
            visibility: VisibilityEstimate::default(),
            low_confidence,
        });
    }
    let v = visibility(&h.pattern, window)?;
    Ok(Decision {
        bit: u8::from(v.v > threshold),
        visibility: v,
        low_confidence,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    pub decision: Decision,
    pub events: Option<Vec<EventRecord>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub trials: u64,
    pub threshold: f64,
    pub window: usize,
    /// Keep each trial's records in its result.
    pub keep_events: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            trials: 1,
            threshold: DEFAULT_THRESHOLD,
            window: DEFAULT_WINDOW,
            keep_events: false,
        }
    }
}

/// Independent trials on streams `0..trials`, in parallel. `base.stream`
/// is ignored. Results come back in trial order.
pub fn run_trials(base: &RunConfig, opts: &TrialOptions) -> Result<Vec<TrialResult>> {
    if opts.trials == 0 {
        return Err(McError::InvalidRun("trials must be at least 1".into()));
    }
    base.validate()?;
    let sampler = Sampler::new(base.rule, &base.geometry)?;
    (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let cfg = RunConfig {
                stream: trial,
                ..base.clone()
            };
            let events = sampler.run(&cfg);
            let decision = decode_bit(&events, sampler.n_bins(), opts.threshold, opts.window)?;
            Ok(TrialResult {
                trial,
                decision,
                events: opts.keep_events.then_some(events),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub trials: u64,
    pub ones: u64,
    /// The bit Alice meant to send under the rule.
    pub intended_bit: u8,
    pub bit_error_rate: f64,
    pub mean_visibility: f64,
    pub low_confidence: u64,
}

pub fn summarize(rule: MeasurementRule, results: &[TrialResult]) -> TrialSummary {
    let n = results.len() as u64;
    let ones = results.iter().filter(|r| r.decision.bit == 1).count() as u64;
    let intended = rule.intended_bit();
    let errors = results.iter().filter(|r| r.decision.bit != intended).count();
    TrialSummary {
        trials: n,
        ones,
        intended_bit: intended,
        bit_error_rate: if n == 0 { 0.0 } else { errors as f64 / n as f64 },
        mean_visibility: if n == 0 {
            0.0
        } else {
            results.iter().map(|r| r.decision.visibility.v).sum::<f64>() / n as f64
        },
        low_confidence: results.iter().filter(|r| r.decision.low_confidence).count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rule: MeasurementRule, n: u64, seed: u64) -> RunConfig {
        RunConfig::new(rule, Geometry::default(), n, seed)
    }

    #[test]
    fn cumulative_and_lookup() {
        let cdf = cumulative(&[1.0, 0.0, 3.0]);
        assert_eq!(cdf, vec![0.25, 0.25, 1.0]);
        assert_eq!(lookup(&cdf, 0.0), 0);
        // u equal to a boundary moves past it; the zero-weight bin is never chosen
        assert_eq!(lookup(&cdf, 0.25), 2);
        assert_eq!(lookup(&cdf, 0.2499), 0);
        assert_eq!(lookup(&cdf, 0.999_999), 2);
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let u = uniform(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn validation() {
        assert!(cfg(MeasurementRule::CoherentFocal, 0, 1).validate().is_err());
        let mut c = cfg(MeasurementRule::CoherentFocal, 10, 1);
        c.background_rate = 1.0;
        assert!(matches!(c.validate(), Err(McError::InvalidRun(_))));
        c.background_rate = 0.0;
        c.efficiency = 0.0;
        assert!(c.validate().is_err());
        c.efficiency = 1.0;
        c.geometry.wavelength = -1.0;
        assert!(matches!(c.validate(), Err(McError::Config(_))));
    }

    #[test]
    fn single_event() {
        let ev = simulate_run(&cfg(MeasurementRule::VonNeumannOffFocal, 1, 99)).unwrap();
        assert_eq!(ev.len(), 1);
        assert!(ev[0].bob_bin < 201);
        assert!(ev[0].alice_outcome == "l" || ev[0].alice_outcome == "m");
    }

    #[test]
    fn same_seed_same_events_other_stream_differs() {
        let a = simulate_run(&cfg(MeasurementRule::CoherentFocal, 500, 7)).unwrap();
        let b = simulate_run(&cfg(MeasurementRule::CoherentFocal, 500, 7)).unwrap();
        assert_eq!(a, b);
        let mut c = cfg(MeasurementRule::CoherentFocal, 500, 7);
        c.stream = 1;
        assert_ne!(a, simulate_run(&c).unwrap());
    }

    #[test]
    fn efficiency_thins_but_keeps_count() {
        let mut c = cfg(MeasurementRule::CoherentFocal, 300, 3);
        c.efficiency = 0.25;
        let ev = simulate_run(&c).unwrap();
        assert_eq!(ev.len(), 300);
        assert!(ev.iter().enumerate().all(|(i, e)| e.index == i as u64));
    }

    #[test]
    fn background_fraction() {
        let mut c = cfg(MeasurementRule::CoherentFocal, 20_000, 5);
        c.background_rate = 0.3;
        let ev = simulate_run(&c).unwrap();
        let frac = ev.iter().filter(|e| e.is_background).count() as f64 / ev.len() as f64;
        // binomial sd ≈ 0.0032
        assert!((frac - 0.3).abs() < 0.02, "{frac}");
    }

    #[test]
    fn sampler_tables_match_rule() {
        let g = Geometry::default();
        let co = Sampler::new(MeasurementRule::CoherentFocal, &g).unwrap();
        let m = co.marginal();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // centre bin is a null of the coherent pattern
        assert!(m[100] < 1e-20);
        let vn = Sampler::new(MeasurementRule::VonNeumannOffFocal, &g).unwrap();
        for p in vn.marginal() {
            assert!((p - 1.0 / 201.0).abs() < 1e-15);
        }
        assert!(vn.conditional("l").is_some() && vn.conditional("k").is_none());
    }

    #[test]
    fn histogram_counts() {
        let ev = vec![EventRecord {
            index: 0,
            alice_outcome: "k".into(),
            bob_bin: 3,
            is_background: false,
        }];
        let h = histogram(&ev, 8).unwrap();
        assert!(!h.empty);
        assert_eq!(h.counts(), vec![0, 0, 0, 1, 0, 0, 0, 0]);
        assert!(histogram(&ev, 3).is_err());
        let e = histogram(&[], 8).unwrap();
        assert!(e.empty && e.pattern.is_all_zero());
    }

    #[test]
    fn decoder_small_and_empty_runs() {
        let ev = simulate_run(&cfg(MeasurementRule::CoherentFocal, 5, 11)).unwrap();
        let d = decode_bit(&ev, 201, 0.5, 3).unwrap();
        assert!(d.low_confidence);
        let d = decode_bit(&[], 201, 0.5, 3).unwrap();
        assert_eq!(d.bit, 0);
        assert!(d.low_confidence);
        assert!(decode_bit(&ev, 201, 1.0, 3).is_err());
    }

    #[test]
    fn trials_zero_rejected() {
        let opts = TrialOptions {
            trials: 0,
            ..TrialOptions::default()
        };
        assert!(matches!(
            run_trials(&cfg(MeasurementRule::CoherentFocal, 10, 1), &opts),
            Err(McError::InvalidRun(_))
        ));
    }

    #[test]
    fn trials_are_order_independent() {
        let base = cfg(MeasurementRule::CoherentFocal, 200, 42);
        let opts = TrialOptions {
            trials: 4,
            keep_events: true,
            ..TrialOptions::default()
        };
        let r = run_trials(&base, &opts).unwrap();
        for t in &r {
            let single = simulate_run(&RunConfig {
                stream: t.trial,
                ..base.clone()
            })
            .unwrap();
            assert_eq!(t.events.as_ref().unwrap(), &single);
        }
    }
}
