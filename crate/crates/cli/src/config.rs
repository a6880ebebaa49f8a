use std::fmt;
use std::str::FromStr;

use hidden_momentum::basis::{BasisLimits, QuantumNumbers, HARD_N_CAP};
use hidden_momentum::quadrature::QuadratureConfig;
use hidden_momentum::stark::{FieldConfig, DEFAULT_FIELD};
use hidden_momentum::{ElementTable, UnitSystem};

use crate::error::{CliError, CliResult};

pub const DEFAULT_N_MAX: u32 = 20;
pub const DEFAULT_THETA_POINTS: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Everything that determines the numbers a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_max: u32,
    pub field: f64,
    pub theta: f64,
    pub state: QuantumNumbers,
    pub quadrature: QuadratureConfig,
    pub theta_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            field: DEFAULT_FIELD,
            theta: 0.0,
            state: QuantumNumbers::new(2, 1, 1).expect("valid"),
            quadrature: QuadratureConfig::default(),
            theta_points: DEFAULT_THETA_POINTS,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if !(1..=HARD_N_CAP).contains(&self.n_max) {
            return Err(CliError::Config(format!(
                "--nmax must lie in 1..={HARD_N_CAP}, got {}",
                self.n_max
            )));
        }
        if self.theta_points < 2 {
            return Err(CliError::Config("--theta-points must be at least 2".into()));
        }
        self.field_config()?;
        Ok(())
    }

    pub fn field_config(&self) -> CliResult<FieldConfig> {
        if !(self.field.is_finite() && self.field > 0.0) {
            return Err(CliError::Config(format!(
                "--field must be positive and finite, got {}",
                self.field
            )));
        }
        FieldConfig::new(self.field, self.theta).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Element table large enough for `n_max` and every listed state.
    pub fn table<'a>(&self, states: impl IntoIterator<Item = &'a QuantumNumbers>) -> CliResult<ElementTable> {
        let highest = states.into_iter().map(|q| q.n() as u32).max().unwrap_or(1);
        let cap = self.n_max.max(highest);
        let limits = BasisLimits::new(cap).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(ElementTable::new(limits, self.quadrature))
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem::atomic()
    }

    /// `theta_points` evenly spaced tilts on [0, π].
    pub fn theta_grid(&self) -> Vec<f64> {
        let last = (self.theta_points - 1) as f64;
        (0..self.theta_points)
            .map(|i| {
                if i + 1 == self.theta_points {
                    std::f64::consts::PI
                } else {
                    std::f64::consts::PI * i as f64 / last
                }
            })
            .collect()
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
    fn rejects_bad_values() {
        let bad = [
            RunConfig {
                n_max: 0,
                ..Default::default()
            },
            RunConfig {
                n_max: 31,
                ..Default::default()
            },
            RunConfig {
                field: 0.0,
                ..Default::default()
            },
            RunConfig {
                field: f64::NAN,
                ..Default::default()
            },
            RunConfig {
                theta: 4.0,
                ..Default::default()
            },
            RunConfig {
                theta_points: 1,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(CliError::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = RunConfig::default().theta_grid();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[12], std::f64::consts::PI);
        assert!((g[6] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
