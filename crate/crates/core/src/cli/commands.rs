use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::experiment::{
    entangled_pair, phase_evolved_state, sweep_pattern, AliceSetting, ExperimentConfig, Pattern, Plane, SpdcState,
};
use crate::hilbert::{BipartiteLayout, HermitianOperator, StateVector, C64};
use crate::mc::{self, run_trials, summarize, LogHeader, RunConfig, TrialOptions};
use crate::measurement::{
    bob_marginal, build_family, joint_expectation, measure, MeasurementRule, SignalStrength,
};

use super::report::{Cell, Report};
use super::CliError;

/// Which two-photon state `marginals` works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFixture {
    /// The entangled pair with the configured arm phases.
    Singlet,
    /// `|H⟩_A |H⟩_B`, which no rule can steer.
    Product,
}

impl std::str::FromStr for StateFixture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "singlet" => Ok(StateFixture::Singlet),
            "product" => Ok(StateFixture::Product),
            other => Err(format!("unknown state {other:?}; expected singlet or product")),
        }
    }
}

fn header(cmd: &str, cfg: &ExperimentConfig) -> Report {
    let mut r = Report::default();
    r.meta("tool_version", crate::VERSION);
    r.meta("command", cmd);
    r.meta("config_hash", cfg.hash());
    r.meta("geometry_hash", cfg.geometry.hash());
    for (k, v) in cfg.entries() {
        r.meta(format!("config.{k}"), v);
    }
    r
}

/// Analytic screen pattern for one Alice setting.
pub fn cmd_pattern(cfg: &ExperimentConfig, alice: AliceSetting) -> Result<Report, CliError> {
    cfg.validate()?;
    let state = SpdcState::new(cfg.epsilon)?;
    let raw = sweep_pattern(&state, &cfg.geometry, alice)?;
    let unit = raw.unit_integral()?;
    let reference = sweep_pattern(&state, &cfg.geometry, AliceSetting::OffFocalSum)?;

    let mut r = header("pattern", cfg);
    r.meta("alice", alice);
    r.columns = ["z_m", "rate_raw", "rate_unit_integral"].map(String::from).to_vec();
    r.rows = raw
        .positions()
        .iter()
        .zip(raw.values())
        .zip(unit.values())
        .map(|((&z, &v), &u)| vec![Cell::Float(z), Cell::Float(v), Cell::Float(u)])
        .collect();
    r.sum("n_bins", raw.len());
    r.sum("raw_max", raw.max());
    r.sum("raw_min", raw.min());
    r.sum("raw_integral", raw.integral());
    r.sum("unit_integral_check", unit.integral());
    // total coincidence flux against Bob's off-focal singles flux
    r.sum("flux_ratio_to_offfocal_sum", raw.integral() / reference.integral());
    r.sum("visibility", mc::visibility(&raw, 1).map(|v| v.v).unwrap_or(0.0));
    Ok(r)
}

fn push_matrix(r: &mut Report, name: &str, rho: &crate::hilbert::DensityMatrix) {
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            let e = rho.entry(i, j);
            r.rows.push(vec![name.into(), i.into(), j.into(), Cell::Float(e.re), Cell::Float(e.im)]);
        }
    }
}

/// Bob's reduced states after a focal (coherent and Lüders) and an
/// off-focal measurement, with their distinguishability.
pub fn cmd_marginals(cfg: &ExperimentConfig, fixture: StateFixture) -> Result<Report, CliError> {
    cfg.validate()?;
    let geo = &cfg.geometry;
    let states: (StateVector, StateVector) = match fixture {
        StateFixture::Singlet => (entangled_pair(geo, Plane::Focal), entangled_pair(geo, Plane::OffFocal)),
        StateFixture::Product => {
            let one = C64::new(1.0, 0.0);
            let zero = C64::new(0.0, 0.0);
            let hh = StateVector::new(
                vec![one, zero, zero, zero],
                ["HH", "HV", "VH", "VV"].map(String::from).to_vec(),
            )?;
            (hh.clone(), hh)
        }
    };
    let l = BipartiteLayout::QUBITS;
    let rho_f = bob_marginal(MeasurementRule::CoherentFocal, &states.0, l)?;
    let rho_lu = bob_marginal(MeasurementRule::LuedersFocal, &states.0, l)?;
    let rho_g = bob_marginal(MeasurementRule::VonNeumannOffFocal, &states.1, l)?;
    let coherent = measure(MeasurementRule::CoherentFocal, &states.0, l)?;
    let s = SignalStrength::from_trace_distance(crate::hilbert::trace_distance(&rho_f, &rho_g)?);
    let s_lu = crate::hilbert::trace_distance(&rho_lu, &rho_g)?;

    let mut r = header("marginals", cfg);
    r.meta(
        "state",
        match fixture {
            StateFixture::Singlet => "singlet",
            StateFixture::Product => "product",
        },
    );
    r.columns = ["matrix", "row", "col", "re", "im"].map(String::from).to_vec();
    push_matrix(&mut r, "rho_f", &rho_f);
    push_matrix(&mut r, "rho_g", &rho_g);
    push_matrix(&mut r, "rho_lueders", &rho_lu);
    r.sum("trace_dist", s.trace_distance);
    r.sum("helstrom_success", s.helstrom_success);
    r.sum("trace_dist_lueders", s_lu);
    r.sum("rho_f_largest_eigenvalue", rho_f.largest_eigenvalue());
    r.sum("rho_g_largest_eigenvalue", rho_g.largest_eigenvalue());
    r.sum("coherent_raw_weight", coherent.first().map(|o| o.raw_weight).unwrap_or(0.0));
    Ok(r)
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn unit_sum(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    values.iter().map(|v| v / total).collect()
}

/// Field-correlation focal rate against the coherent and Lüders
/// expectations on the phase-evolved state, bin by bin. Each column is
/// scaled to unit sum before comparison.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let geo = &cfg.geometry;
    let state = SpdcState::new(cfg.epsilon)?;
    let qo: Pattern = sweep_pattern(&state, geo, AliceSetting::Focal)?;
    let grid = qo.positions().to_vec();
    let n = grid.len();
    let psi = phase_evolved_state(geo, Plane::Focal, &grid)?;
    let layout = BipartiteLayout::new(2, n);

    let coherent = build_family(MeasurementRule::CoherentFocal).members()[0].operator.clone();
    let lueders = build_family(MeasurementRule::LuedersFocal).members()[0].operator.clone();
    let mut qm_coh = Vec::with_capacity(n);
    let mut qm_lu = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[i] = C64::new(1.0, 0.0);
        let pz = HermitianOperator::projector(&e);
        qm_coh.push(joint_expectation(&coherent, &pz, &psi, layout)?);
        qm_lu.push(joint_expectation(&lueders, &pz, &psi, layout)?);
    }

    let qo_n = unit_sum(qo.values());
    let coh_n = unit_sum(&qm_coh);
    let lu_n = unit_sum(&qm_lu);
    let dev: Vec<f64> = qo_n.iter().zip(&coh_n).map(|(a, b)| relative_deviation(*a, *b)).collect();

    let mut r = header("compare", cfg);
    r.columns = [
        "z_m",
        "qo_focal_raw",
        "qm_coherent_raw",
        "qm_lueders_raw",
        "qo_focal_norm",
        "qm_coherent_norm",
        "qm_lueders_norm",
        "rel_dev_coherent",
    ]
    .map(String::from)
    .to_vec();
    for i in 0..n {
        r.rows.push(
            [grid[i], qo.values()[i], qm_coh[i], qm_lu[i], qo_n[i], coh_n[i], lu_n[i], dev[i]]
                .map(Cell::Float)
                .to_vec(),
        );
    }
    let lu_max = qm_lu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lu_min = qm_lu.iter().copied().fold(f64::INFINITY, f64::min);
    r.sum("n_bins", n);
    r.sum("max_rel_dev_coherent", dev.iter().copied().fold(0.0, f64::max));
    r.sum("lueders_spread", lu_max / lu_min - 1.0);
    Ok(r)
}

/// Monte Carlo parameters for `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub rule: MeasurementRule,
    pub n_events: u64,
    pub seed: u64,
    pub trials: u64,
    pub threshold: f64,
    pub window: usize,
    pub background_rate: f64,
    pub efficiency: f64,
}

impl RunSpec {
    pub fn new(rule: MeasurementRule, n_events: u64, seed: u64, trials: u64) -> Self {
        Self {
            rule,
            n_events,
            seed,
            trials,
            threshold: mc::DEFAULT_THRESHOLD,
            window: mc::DEFAULT_WINDOW,
            background_rate: 0.0,
            efficiency: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::InvalidRun("trials must be at least 1".into()));
        }
        if self.n_events == 0 {
            return Err(CliError::InvalidRun("events must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CliError::InvalidRun(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if self.window == 0 {
            return Err(CliError::InvalidRun("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Seeded trials with per-trial decisions; optionally writes one event log
/// per trial into `events_dir` as `trial_NNNN.csv`.
pub fn cmd_run(cfg: &ExperimentConfig, spec: &RunSpec, events_dir: Option<&Path>) -> Result<Report, CliError> {
    cfg.validate()?;
    spec.validate()?;
    if cfg.geometry.n_bins < spec.window {
        return Err(CliError::InvalidRun(format!(
            "window {} is wider than the {} screen bins",
            spec.window, cfg.geometry.n_bins
        )));
    }
    let base = RunConfig {
        n_events: spec.n_events,
        seed: spec.seed,
        stream: 0,
        rule: spec.rule,
        geometry: cfg.geometry.clone(),
        background_rate: spec.background_rate,
        efficiency: spec.efficiency,
    };
    let opts = TrialOptions {
        trials: spec.trials,
        threshold: spec.threshold,
        window: spec.window,
        keep_events: events_dir.is_some(),
    };
    let results = run_trials(&base, &opts)?;

    if let Some(dir) = events_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        // written sequentially after all trials finish: one writer per file
        for t in &results {
            let path = dir.join(format!("trial_{:04}.csv", t.trial));
            let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let header = LogHeader::for_run(&RunConfig {
                stream: t.trial,
                ..base.clone()
            });
            mc::write_event_log(BufWriter::new(file), &header, t.events.as_deref().unwrap_or_default())
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
    }

    let s = summarize(spec.rule, &results);
    let mut r = header("run", cfg);
    r.meta("rule", spec.rule);
    r.meta("generator", "ChaCha8Rng");
    r.meta("seed", spec.seed);
    r.meta("events", spec.n_events);
    r.meta("trials", spec.trials);
    r.meta("threshold", format!("{:.16e}", spec.threshold));
    r.meta("window", spec.window);
    r.meta("background_rate", format!("{:.16e}", spec.background_rate));
    r.meta("efficiency", format!("{:.16e}", spec.efficiency));
    r.columns = ["trial", "stream", "bit", "visibility", "std_error", "n_events", "low_confidence"]
        .map(String::from)
        .to_vec();
    r.rows = results
        .iter()
        .map(|t| {
            vec![
                t.trial.into(),
                t.trial.into(),
                t.decision.bit.into(),
                Cell::Float(t.decision.visibility.v),
                Cell::Float(t.decision.visibility.std_error),
                t.decision.visibility.n_events_used.into(),
                t.decision.low_confidence.into(),
            ]
        })
        .collect();
    r.sum("trials", s.trials);
    r.sum("intended_bit", s.intended_bit);
    r.sum("ones", s.ones);
    r.sum("zeros", s.trials - s.ones);
    r.sum("bit_error_rate", s.bit_error_rate);
    r.sum("mean_visibility", s.mean_visibility);
    r.sum("low_confidence_trials", s.low_confidence);
    Ok(r)
}
