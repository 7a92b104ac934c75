//! Parameter sweeps over channel and state families.
//!
//! Rows are enumerated as the cartesian product of the swept parameters in
//! declaration order, with the last parameter varying fastest. Rows are
//! evaluated in parallel but always emitted in index order, and Monte-Carlo
//! oracle seeds are derived from the root seed and the row index, so output
//! does not depend on the worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{build_pair, ChannelSpec, StateSpec};
use crate::error::Error;
use crate::fidelity::channel_fidelity;
use crate::oracle::{derive_seed, mc_fidelity, quad_fidelity, McConfig, QuadratureGrid};

pub const MAX_ROWS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValues {
    List(Vec<f64>),
    Linear { start: f64, stop: f64, count: usize },
}

impl ParamValues {
    pub fn expand(&self) -> Vec<f64> {
        match self {
            ParamValues::List(v) => v.clone(),
            ParamValues::Linear { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![*start],
                c => (0..c)
                    .map(|k| {
                        if k == c - 1 {
                            *stop
                        } else {
                            start + (stop - start) * k as f64 / (c - 1) as f64
                        }
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweptParam {
    pub name: String,
    pub values: ParamValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum OracleSpec {
    Quad {
        #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
        half_width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Mc {
        samples: u64,
        #[serde(default)]
        seed: u64,
    },
}

/// Sweep configuration as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub channel: ChannelSpec,
    pub state: StateSpec,
    #[serde(default)]
    pub sweep: Vec<SweptParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("sweep has {rows} rows, limit is {MAX_ROWS}")]
    TooLarge { rows: f64 },
    #[error("row {row}: {source}")]
    Row { row: usize, source: Error },
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("write failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("write failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Validated sweep with expanded parameter values.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    config: SweepConfig,
    names: Vec<String>,
    values: Vec<Vec<f64>>,
    rows: usize,
}

impl SweepPlan {
    pub fn new(config: SweepConfig) -> Result<Self, SweepError> {
        let mut names = Vec::new();
        let mut values = Vec::new();
        let mut rows = 1.0_f64;
        for p in &config.sweep {
            if names.contains(&p.name) {
                return Err(SweepError::Invalid(format!("parameter {} swept twice", p.name)));
            }
            let accepted = config.channel.param_names().contains(&p.name.as_str())
                || config.state.param_names().contains(&p.name.as_str());
            if !accepted {
                return Err(SweepError::Invalid(format!(
                    "parameter {:?} is not accepted by the chosen channel/state (channel accepts {:?}, state accepts {:?})",
                    p.name,
                    config.channel.param_names(),
                    config.state.param_names()
                )));
            }
            let v = p.values.expand();
            if v.is_empty() {
                return Err(SweepError::Invalid(format!("parameter {} has no values", p.name)));
            }
            rows *= v.len() as f64;
            names.push(p.name.clone());
            values.push(v);
        }
        if rows > MAX_ROWS as f64 {
            return Err(SweepError::TooLarge { rows });
        }
        let plan = Self {
            config,
            names,
            values,
            rows: rows as usize,
        };
        if let Some(OracleSpec::Mc { samples, seed }) = &plan.config.oracle {
            McConfig::new(*samples, *seed).map_err(|e| SweepError::Invalid(e.to_string()))?;
        }
        // catches unsupported channel/oracle combinations before any work
        let (channel, _) = plan.specs_for_row(0);
        if matches!(plan.config.oracle, Some(OracleSpec::Mc { .. })) {
            let c = channel
                .build(plan.config.state.modes())
                .map_err(|e| SweepError::Invalid(e.to_string()))?;
            if !c.is_classical_noise() {
                return Err(SweepError::Invalid(
                    "Monte-Carlo oracle requires a channel with A = I".into(),
                ));
            }
        }
        Ok(plan)
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn has_oracle(&self) -> bool {
        self.config.oracle.is_some()
    }

    /// Parameter values of row `index`; last parameter varies fastest.
    pub fn row_params(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.values.len()];
        for (k, vals) in self.values.iter().enumerate().rev() {
            out[k] = vals[rem % vals.len()];
            rem /= vals.len();
        }
        out
    }

    fn specs_for_row(&self, index: usize) -> (ChannelSpec, StateSpec) {
        let mut channel = self.config.channel.clone();
        let mut state = self.config.state.clone();
        for (name, value) in self.names.iter().zip(self.row_params(index)) {
            if !channel.set_param(name, value) {
                state.set_param(name, value);
            }
        }
        (channel, state)
    }

    pub fn evaluate_row(&self, index: usize) -> Result<SweepRow, Error> {
        let (channel, state) = self.specs_for_row(index);
        let (c, s) = build_pair(&channel, &state)?;
        let fid = channel_fidelity(&c, &s)?;
        let (oracle, oracle_err) = match &self.config.oracle {
            None => (None, None),
            Some(OracleSpec::Quad { half_width, m }) => {
                let default = QuadratureGrid::default_for(s.modes());
                let grid = QuadratureGrid::new(
                    half_width.unwrap_or(default.half_width()),
                    m.unwrap_or(default.points_per_axis()),
                )?;
                let q = quad_fidelity(&c, &s, grid)?;
                (Some(q), Some((q - fid.value).abs()))
            }
            Some(OracleSpec::Mc { samples, seed }) => {
                let cfg = McConfig::new(*samples, derive_seed(*seed, index as u64))?;
                let est = mc_fidelity(&c, &s, cfg)?;
                (Some(est.estimate), Some(est.std_error))
            }
        };
        Ok(SweepRow {
            params: self.row_params(index),
            fidelity: fid.value,
            det_factor: fid.det_factor,
            disp_factor: fid.disp_factor,
            oracle,
            oracle_err,
        })
    }

    /// Evaluates every row on the current rayon pool.
    pub fn run(&self) -> Result<Vec<SweepRow>, SweepError> {
        let results: Vec<Result<SweepRow, Error>> = (0..self.rows)
            .into_par_iter()
            .map(|i| self.evaluate_row(i))
            .collect();
        results
            .into_iter()
            .enumerate()
            .map(|(row, r)| r.map_err(|source| SweepError::Row { row, source }))
            .collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.names.clone();
        h.extend(["fidelity", "det_factor", "disp_factor"].map(String::from));
        if self.has_oracle() {
            h.extend(["oracle", "oracle_err"].map(String::from));
        }
        h
    }
}

/// One evaluated grid point. `oracle_err` is the Monte-Carlo standard error,
/// or the absolute deviation from the closed form for quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub fidelity: f64,
    pub det_factor: f64,
    pub disp_factor: f64,
    pub oracle: Option<f64>,
    pub oracle_err: Option<f64>,
}

impl SweepRow {
    fn values(&self) -> Vec<f64> {
        let mut v = self.params.clone();
        v.extend([self.fidelity, self.det_factor, self.disp_factor]);
        v.extend(self.oracle);
        v.extend(self.oracle_err);
        v
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv<W: Write>(plan: &SweepPlan, rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(plan.header())?;
    for row in rows {
        w.write_record(row.values().into_iter().map(format_number))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn write_json<W: Write>(plan: &SweepPlan, rows: &[SweepRow], mut out: W) -> Result<(), SweepError> {
    let table = JsonTable {
        columns: plan.header(),
        rows: rows.iter().map(SweepRow::values).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &table)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Re-reads a CSV table written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>), SweepError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        rows.push(parsed.map_err(|e| SweepError::Invalid(format!("bad number in CSV: {e}")))?);
    }
    Ok((header, rows))
}

/// `(min, max)` of the analytic fidelity column.
pub fn fidelity_range(rows: &[SweepRow]) -> Option<(f64, f64)> {
    rows.iter().map(|r| r.fidelity).fold(None, |acc, f| match acc {
        None => Some((f, f)),
        Some((lo, hi)) => Some((lo.min(f), hi.max(f))),
    })
}
