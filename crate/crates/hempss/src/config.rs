//! The JSON run configuration, one document per invocation.

use std::path::{Path, PathBuf};

use hempss_core::canonical::CanonicalParams;
use hempss_core::processes::PumpDesign;
use hempss_core::statistics::QuadratureConfig;
use hempss_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every field is optional; each command checks for the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<CanonicalParams>,
    /// `[re, im]`; zero when absent.
    pub beta1: Option<C64>,
    pub beta2: Option<C64>,
    /// Fixed PND size. Without it the size grows until the grid holds the
    /// state (up to `n_cap`).
    pub n_max: Option<usize>,
    pub n_cap: Option<usize>,
    /// Quadrature grid; sized from the state when absent.
    pub quadrature: Option<QuadratureConfig>,
    pub gammas: Option<Vec<f64>>,
    pub theta1: Option<Vec<f64>>,
    pub theta2: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    /// Oracle Fock cutoff `[n1_max, n2_max]`.
    pub cutoff: Option<[usize; 2]>,
    /// Largest `n1, n2` compared by `oracle-check`.
    pub compare_n_max: Option<usize>,
    pub omega: Option<[f64; 2]>,
    pub design: Option<PumpDesign>,
    pub fractions: Option<Vec<f64>>,
    pub orders: Option<Vec<u32>>,
    pub max_mode_exponent: Option<u32>,
    pub include_kerr: Option<bool>,
    pub tol: Option<f64>,
    /// Output directory; `--out` wins.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `ψ_β(z1 + i z2)`.
    Heterodyne,
    /// `ψ(x1, x2)`.
    Coordinate,
}

/// Square grid `min..=max` with `points` nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn axis(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + h * i as f64).collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::Usage("empty config".into()));
        }
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))?;
        if c == Self::default() {
            return Err(CliError::Usage("empty config".into()));
        }
        Ok(c)
    }

    pub fn params(&self) -> Result<CanonicalParams, CliError> {
        self.params.ok_or_else(|| missing("params"))
    }

    pub fn betas(&self) -> (C64, C64) {
        let z = C64::new(0.0, 0.0);
        (self.beta1.unwrap_or(z), self.beta2.unwrap_or(z))
    }

    pub fn omega(&self) -> Result<(f64, f64), CliError> {
        self.omega.map(|[a, b]| (a, b)).ok_or_else(|| missing("omega"))
    }
}

pub fn missing(field: &str) -> CliError {
    CliError::Usage(format!("config needs `{field}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_configs_are_usage_errors() {
        for text in ["", "  \n", "{}"] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Usage(_))));
        }
        assert!(matches!(RunConfig::parse("{\"bogus\": 1}"), Err(CliError::Usage(_))));
    }

    #[test]
    fn params_and_betas() {
        let c = RunConfig::parse(
            r#"{"params": {"r": 0.8, "phi": 0, "gamma_mod": 0.1, "chi_mod": 0.1, "delta1": 3.141592653589793,
                "delta2": 0, "theta1": 0, "theta2": 0, "order": 2}, "beta1": [3, 0]}"#,
        )
        .unwrap();
        assert_eq!(c.params().unwrap().order, 2);
        assert_eq!(c.betas(), (C64::new(3.0, 0.0), C64::new(0.0, 0.0)));
    }

    #[test]
    fn grid_axis_includes_both_ends() {
        let g = GridSpec { kind: GridKind::Coordinate, min: -1.0, max: 1.0, points: 5 };
        assert_eq!(g.axis(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
