//! Frequency-tabulated circuit parameters with linear interpolation.
//!
//! The no-cylinder coil resistance and inductance are measured quantities
//! with no closed form; configs supply them either as a single constant or
//! as a `[frequency_hz, value]` table.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("frequency {0} Hz outside tabulated domain [{1}, {2}] Hz")]
    OutOfDomain(f64, f64, f64),
    #[error("profile table needs at least two strictly increasing points")]
    BadTable,
}

/// A scalar circuit parameter as a function of drive frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    /// `[f_hz, value]` pairs, strictly increasing in frequency.
    Table(Vec<[f64; 2]>),
}

impl Profile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        match self {
            Profile::Constant(_) => Ok(()),
            Profile::Table(points) => {
                if points.len() < 2 || points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    Err(ProfileError::BadTable)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Domain of validity; constants are valid everywhere.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Profile::Constant(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Profile::Table(points) => (points[0][0], points[points.len() - 1][0]),
        }
    }

    pub fn eval(&self, f_hz: f64) -> Result<f64, ProfileError> {
        match self {
            Profile::Constant(v) => Ok(*v),
            Profile::Table(points) => {
                let (lo, hi) = self.domain();
                if f_hz < lo || f_hz > hi {
                    return Err(ProfileError::OutOfDomain(f_hz, lo, hi));
                }
                let idx = points
                    .windows(2)
                    .position(|w| f_hz <= w[1][0])
                    .unwrap_or(points.len() - 2);
                let [f0, v0] = points[idx];
                let [f1, v1] = points[idx + 1];
                let t = (f_hz - f0) / (f1 - f0);
                Ok(v0 + t * (v1 - v0))
            }
        }
    }
}
