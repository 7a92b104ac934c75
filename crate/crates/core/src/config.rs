//! JSON descriptions of states and channels.
//!
//! Matrices are row-major nested arrays. Example:
//!
//! ```json
//! {
//!   "channel": {"type": "memory", "N": 1.0, "x": 0.5},
//!   "state": {"type": "coherent", "alphas": [[0.0, 0.0], [1.0, -0.5]]}
//! }
//! ```

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::channels::{self, GaussianChannel, MemoryNoiseSpec};
use crate::error::{invalid, Result};
use crate::states::{self, GaussianState};
use crate::{Matrix, Vector};

pub type RowMajor = Vec<Vec<f64>>;

pub fn matrix_from_rows(rows: &RowMajor) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return invalid("matrix must be non-empty");
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return invalid("matrix rows have unequal lengths");
    }
    Ok(Matrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Amplifier {
        eta: f64,
    },
    Attenuator {
        eta: f64,
    },
    ClassicalNoise {
        #[serde(rename = "G")]
        g: RowMajor,
    },
    Memory {
        #[serde(rename = "N")]
        noise: f64,
        x: f64,
    },
    Custom {
        #[serde(rename = "A")]
        a: RowMajor,
        #[serde(rename = "G")]
        g: RowMajor,
    },
}

impl ChannelSpec {
    /// Mode count implied by the spec alone, if any.
    pub fn modes(&self) -> Option<usize> {
        match self {
            ChannelSpec::Identity { n } => *n,
            ChannelSpec::Amplifier { .. } | ChannelSpec::Attenuator { .. } => Some(1),
            ChannelSpec::Memory { .. } => Some(2),
            ChannelSpec::ClassicalNoise { g } | ChannelSpec::Custom { g, .. } => Some(g.len() / 2),
        }
    }

    /// Builds the channel; `modes_hint` fills in an unspecified identity size.
    pub fn build(&self, modes_hint: Option<usize>) -> Result<GaussianChannel> {
        match self {
            ChannelSpec::Identity { n } => GaussianChannel::identity(n.or(modes_hint).unwrap_or(1)),
            ChannelSpec::Amplifier { eta } => channels::amplifier(*eta),
            ChannelSpec::Attenuator { eta } => channels::attenuator(*eta),
            ChannelSpec::ClassicalNoise { g } => channels::classical_noise(matrix_from_rows(g)?),
            ChannelSpec::Memory { noise, x } => {
                Ok(channels::memory_channel(MemoryNoiseSpec::new(*noise, *x)?))
            }
            ChannelSpec::Custom { a, g } => {
                GaussianChannel::new(matrix_from_rows(a)?, matrix_from_rows(g)?)
            }
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ChannelSpec::Amplifier { .. } | ChannelSpec::Attenuator { .. } => &["eta"],
            ChannelSpec::Memory { .. } => &["N", "x"],
            _ => &[],
        }
    }

    /// Overrides a scalar parameter; returns false if the family has no such parameter.
    pub fn set_param(&mut self, name: &str, value: f64) -> bool {
        match (self, name) {
            (ChannelSpec::Amplifier { eta } | ChannelSpec::Attenuator { eta }, "eta") => *eta = value,
            (ChannelSpec::Memory { noise, .. }, "N") => *noise = value,
            (ChannelSpec::Memory { x, .. }, "x") => *x = value,
            _ => return false,
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Coherent {
        alphas: Vec<[f64; 2]>,
    },
    Tmsv {
        r: f64,
    },
    Squeezed {
        r: f64,
    },
    /// Arbitrary covariance and displacement (interleaved ordering).
    Custom {
        cov: RowMajor,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        disp: Option<Vec<f64>>,
    },
}

impl StateSpec {
    pub fn modes(&self) -> Option<usize> {
        match self {
            StateSpec::Vacuum { n } => *n,
            StateSpec::Coherent { alphas } => Some(alphas.len()),
            StateSpec::Tmsv { .. } => Some(2),
            StateSpec::Squeezed { .. } => Some(1),
            StateSpec::Custom { cov, .. } => Some(cov.len() / 2),
        }
    }

    pub fn build(&self, modes_hint: Option<usize>) -> Result<GaussianState> {
        match self {
            StateSpec::Vacuum { n } => states::vacuum(n.or(modes_hint).unwrap_or(1)),
            StateSpec::Coherent { alphas } => {
                let amps: Vec<Complex<f64>> =
                    alphas.iter().map(|[re, im]| Complex::new(*re, *im)).collect();
                states::coherent(&amps)
            }
            StateSpec::Tmsv { r } => states::two_mode_squeezed(*r),
            StateSpec::Squeezed { r } => states::squeezed_vacuum(*r),
            StateSpec::Custom { cov, disp } => {
                let cov = matrix_from_rows(cov)?;
                let disp = match disp {
                    Some(d) => Vector::from_column_slice(d),
                    None => Vector::zeros(cov.nrows()),
                };
                GaussianState::new(cov, disp)
            }
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            StateSpec::Tmsv { .. } | StateSpec::Squeezed { .. } => &["r"],
            _ => &[],
        }
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> bool {
        match (self, name) {
            (StateSpec::Tmsv { r } | StateSpec::Squeezed { r }, "r") => *r = value,
            _ => return false,
        }
        true
    }
}

/// A channel with an optional input state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub channel: ChannelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
}

/// Builds a channel/state pair, resolving unspecified mode counts from each other.
pub fn build_pair(
    channel: &ChannelSpec,
    state: &StateSpec,
) -> Result<(GaussianChannel, GaussianState)> {
    let hint = channel.modes().or(state.modes());
    let c = channel.build(hint)?;
    let s = state.build(Some(c.modes()))?;
    Ok((c, s))
}
