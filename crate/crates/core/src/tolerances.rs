use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative distance a focal coordinate must keep from every interior threshold.
    pub genericity: f64,
    /// Absolute distance below which a coordinate counts as sitting on a threshold.
    pub threshold: f64,
    /// Relative gap below which two exit times are considered tied.
    pub exit_tie: f64,
    /// Relative (to the variable's upper bound) size of `phi_s - x_s` below which
    /// a transition map is degenerate.
    pub degeneracy: f64,
    /// Relative tolerance for comparing focal coordinates in the alignment test.
    pub alignment: f64,
    /// Margin around 1 inside which the spectral radius is flagged as marginal.
    pub lambda_margin: f64,
    /// Max-norm step size at which return-map iteration stops.
    pub fixed_point: f64,
    pub max_iterations: usize,
    /// Random zone points drawn by the monotonicity/concavity checks.
    pub condition_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            genericity: 1e-9,
            threshold: 1e-12,
            exit_tie: 1e-12,
            degeneracy: 1e-12,
            alignment: 1e-12,
            lambda_margin: 1e-9,
            fixed_point: 1e-12,
            max_iterations: 100_000,
            condition_samples: 200,
        }
    }
}

impl Tolerances {
    pub const ENV_VAR: &'static str = "GLASSCERT_TOLERANCE";

    /// Applies overrides of the form `key=value[,key=value...]`.
    ///
    /// A bare number is shorthand for `fixed_point=<number>`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = match item.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => ("fixed_point", item),
            };
            let bad = || Error::InvalidArgument(format!("bad tolerance override {item:?}"));
            match key {
                "max_iterations" | "condition_samples" => {
                    let v: usize = value.parse().map_err(|_| bad())?;
                    if v == 0 {
                        return Err(bad());
                    }
                    if key == "max_iterations" {
                        self.max_iterations = v;
                    } else {
                        self.condition_samples = v;
                    }
                }
                _ => {
                    let v: f64 = value.parse().map_err(|_| bad())?;
                    if !(v.is_finite() && v > 0.0) {
                        return Err(bad());
                    }
                    let slot = match key {
                        "genericity" => &mut self.genericity,
                        "threshold" => &mut self.threshold,
                        "exit_tie" => &mut self.exit_tie,
                        "degeneracy" => &mut self.degeneracy,
                        "alignment" => &mut self.alignment,
                        "lambda_margin" => &mut self.lambda_margin,
                        "fixed_point" => &mut self.fixed_point,
                        _ => return Err(Error::InvalidArgument(format!("unknown tolerance {key:?}"))),
                    };
                    *slot = v;
                }
            }
        }
        Ok(self)
    }

    /// Defaults with `GLASSCERT_TOLERANCE` applied, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(Self::ENV_VAR) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}
