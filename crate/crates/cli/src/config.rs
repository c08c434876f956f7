use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Configuration error: always exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffineWindow {
    Reference,
    Compact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    /// Cahill–Glauber parameters for `cg-table`.
    pub s: Vec<f64>,
    pub omega: f64,
    /// Temperatures for `thermal`.
    pub temp: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
    pub affine_window: AffineWindow,
    /// Density CSV keeps every `stride[0]`-th q and `stride[1]`-th p node.
    pub density_stride: [usize; 2],
    pub verify_affine: bool,
    pub outdir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 32,
            radial_order: 80,
            angular_order: 64,
            s: vec![-1.0, -2.0, -0.5, 0.0],
            omega: 1.0,
            temp: vec![0.0, 0.25, 0.5, 1.0, 2.0, 5.0],
            alpha: 2.0,
            lambda: 1.0,
            affine_window: AffineWindow::Reference,
            density_stride: [4, 16],
            verify_affine: true,
            outdir: PathBuf::from("intquant-out"),
            seed: 7,
        }
    }
}

pub const MAX_DIM: usize = 512;

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=MAX_DIM).contains(&self.dim) {
            return Err(bad(format!("dim must be in 2..={MAX_DIM}, got {}", self.dim)));
        }
        if self.radial_order < 2 || self.angular_order < 2 {
            return Err(bad("radial_order and angular_order must be at least 2"));
        }
        if self.s.is_empty() {
            return Err(bad("s list is empty"));
        }
        for &s in &self.s {
            if !s.is_finite() || s >= 1.0 {
                return Err(bad(format!("s = {s} is outside the Cahill-Glauber range s < 1")));
            }
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(bad(format!("omega must be positive, got {}", self.omega)));
        }
        if self.temp.is_empty() {
            return Err(bad("temp list is empty"));
        }
        for &t in &self.temp {
            if !(t.is_finite() && t >= 0.0) {
                return Err(bad(format!("temperatures must be finite and >= 0, got {t}")));
            }
        }
        if !(self.alpha.is_finite() && self.alpha > 1.5) {
            return Err(bad(format!(
                "alpha = {} gives a divergent c_-1 moment; need alpha > 1.5",
                self.alpha
            )));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(bad(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.density_stride.contains(&0) {
            return Err(bad("density_stride entries must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"dim": 8, "s": [-1.5]}"#).unwrap();
        assert_eq!(c.dim, 8);
        assert_eq!(c.s, vec![-1.5]);
        assert_eq!(c.alpha, 2.0);
    }

    #[test]
    fn rejects_unknown_fields_and_ranges() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"dimm": 8}"#).is_err());
        let c = RunConfig {
            s: vec![1.0],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            alpha: 1.5,
            ..Default::default()
        };
        assert!(c.validate().unwrap_err().0.contains("divergent"));
        let c = RunConfig {
            dim: 1,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
