//! Plain-text event logs.
//!
//! ```text
//! # tool_version=0.1.0
//! # seed=42
//! # rule=CoherentFocal
//! # geometry.wavelength=7.9000000000000000e-7
//! # index,alice_outcome,bob_bin,is_background
//! 0,k,57,0
//! ```
//!
//! Header lines are `# key=value`; the last `#` line names the columns.
//! `is_background` is written as `0` or `1`.

use std::io::{BufRead, Write};
use std::str::FromStr;

use super::{EventRecord, McError, Result, RunConfig};
use crate::experiment::Geometry;
use crate::measurement::MeasurementRule;

pub const LOG_COLUMNS: &str = "index,alice_outcome,bob_bin,is_background";

/// Everything needed to regenerate a log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHeader {
    pub entries: Vec<(String, String)>,
}

impl LogHeader {
    pub fn for_run(cfg: &RunConfig) -> Self {
        let mut entries: Vec<(String, String)> = vec![
            ("tool_version".into(), crate::VERSION.into()),
            ("generator".into(), "ChaCha8Rng".into()),
            ("seed".into(), cfg.seed.to_string()),
            ("stream".into(), cfg.stream.to_string()),
            ("rule".into(), cfg.rule.name().into()),
            ("n_events".into(), cfg.n_events.to_string()),
            ("background_rate".into(), format!("{:.16e}", cfg.background_rate)),
            ("efficiency".into(), format!("{:.16e}", cfg.efficiency)),
            ("geometry_hash".into(), cfg.geometry.hash()),
        ];
        entries.extend(
            cfg.geometry
                .entries()
                .into_iter()
                .map(|(k, v)| (format!("geometry.{k}"), v)),
        );
        Self { entries }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key).ok_or_else(|| McError::Log(format!("header lacks {key}")))?;
        raw.parse()
            .map_err(|_| McError::Log(format!("header {key}={raw:?} does not parse")))
    }

    /// Rebuilds the run configuration recorded in the header.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut geometry = Geometry::default();
        for (k, v) in &self.entries {
            if let Some(key) = k.strip_prefix("geometry.") {
                geometry
                    .set(key, v)
                    .map_err(|e| McError::Log(format!("header {k}: {e}")))?;
            }
        }
        let rule: MeasurementRule = self.parsed("rule")?;
        Ok(RunConfig {
            n_events: self.parsed("n_events")?,
            seed: self.parsed("seed")?,
            stream: self.parsed("stream")?,
            rule,
            geometry,
            background_rate: self.parsed("background_rate")?,
            efficiency: self.parsed("efficiency")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub header: LogHeader,
    pub events: Vec<EventRecord>,
}

pub fn write_event_log<W: Write>(mut out: W, header: &LogHeader, events: &[EventRecord]) -> std::io::Result<()> {
    for (k, v) in &header.entries {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "# {LOG_COLUMNS}")?;
    for e in events {
        writeln!(
            out,
            "{},{},{},{}",
            e.index,
            e.alice_outcome,
            e.bob_bin,
            u8::from(e.is_background)
        )?;
    }
    out.flush()
}

pub fn read_event_log<R: BufRead>(input: R) -> Result<EventLog> {
    let mut entries = Vec::new();
    let mut events = Vec::new();
    let mut saw_columns = false;
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| McError::Log(e.to_string()))?;
        let bad = |what: &str| McError::Log(format!("line {}: {what}", n + 1));
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest == LOG_COLUMNS {
                saw_columns = true;
            } else if let Some((k, v)) = rest.split_once('=') {
                entries.push((k.to_string(), v.to_string()));
            } else {
                return Err(bad("header line is not key=value"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !saw_columns {
            return Err(bad("record before the column line"));
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [index, outcome, bin, background] = fields[..] else {
            return Err(bad("expected 4 fields"));
        };
        events.push(EventRecord {
            index: index.parse().map_err(|_| bad("index"))?,
            alice_outcome: outcome.to_string(),
            bob_bin: bin.parse().map_err(|_| bad("bob_bin"))?,
            is_background: match background {
                "0" => false,
                "1" => true,
                _ => return Err(bad("is_background must be 0 or 1")),
            },
        });
    }
    Ok(EventLog {
        header: LogHeader { entries },
        events,
    })
}
