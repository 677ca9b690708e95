//! JSON experiment descriptions.
//!
//! Optional distributions and costs are drawn from the seeded generator when
//! absent; everything given explicitly is validated here, before any
//! computation starts.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{config_err, CliError};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub problem: Problem,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Direction {
    #[serde(rename = "fwd")]
    Forward,
    #[serde(rename = "rev")]
    Reverse,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Problem {
    /// KL gradient flow on one simplex; `fwd` moves `q` in `KL(q‖target)`,
    /// `rev` moves `r` in `KL(target‖r)`.
    Klflow {
        n: usize,
        target: Option<Vec<f64>>,
        q0: Option<Vec<f64>>,
        direction: Direction,
    },
    /// Descent of a mean-field divergence; `fwd` is `KL(Π(r)‖r)`, `rev` the mutual information.
    Meanfield {
        n1: usize,
        n2: usize,
        joint: Option<Vec<f64>>,
        #[serde(default = "reverse")]
        direction: Direction,
    },
    Schrodinger {
        n1: usize,
        n2: usize,
        cost: Option<Vec<f64>>,
        epsilon: f64,
        margins: Option<[Vec<f64>; 2]>,
    },
    Vb {
        n1: usize,
        n2: usize,
        joint: Option<Vec<f64>>,
        x: usize,
        suffstat_dim: usize,
    },
    Gradcheck {
        which: GradName,
        n: Option<usize>,
        n1: Option<usize>,
        n2: Option<usize>,
        trials: usize,
    },
}

fn reverse() -> Direction {
    Direction::Reverse
}

/// Analytic gradients the `gradcheck` problem can compare with finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradName {
    Expect,
    KlTotal,
    CrossEntropyTotal,
    Entropy,
    Js,
    PhiMixtureCenter,
    MeanfieldFwd,
    MeanfieldRev,
    Schrodinger,
    Elbo,
}

impl GradName {
    /// Whether the instance lives on a product space (`n1`, `n2`) instead of `n` atoms.
    pub fn on_product(self) -> bool {
        matches!(
            self,
            GradName::MeanfieldFwd | GradName::MeanfieldRev | GradName::Schrodinger | GradName::Elbo
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SchemeName {
    #[serde(rename = "exp-euler")]
    ExpEuler,
    #[serde(rename = "rk4")]
    Rk4,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: SchemeName,
    pub dt: f64,
    pub steps: usize,
    /// Stop early once the field norm falls to this value.
    pub stop_grad_norm: Option<f64>,
}

impl Problem {
    /// Subcommand that runs this problem.
    pub fn command(&self) -> &'static str {
        match self {
            Problem::Klflow { .. } => "flow",
            Problem::Meanfield { .. } => "meanfield",
            Problem::Schrodinger { .. } => "schrodinger",
            Problem::Vb { .. } => "vb",
            Problem::Gradcheck { .. } => "gradcheck",
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// The integrator block; flow problems cannot run without one.
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        self.integrator
            .ok_or_else(|| config_err(format!("missing field `integrator` (required by `{}`)", self.problem.command())))
    }

    fn validate(&self) -> Result<(), CliError> {
        let dim = |name: &str, v: usize| {
            if v < 2 {
                Err(config_err(format!("`{name}` must be at least 2, got {v}")))
            } else {
                Ok(())
            }
        };
        let len = |name: &str, v: &Option<Vec<f64>>, want: usize| match v {
            Some(v) if v.len() != want => {
                Err(config_err(format!("`{name}` must have {want} entries, got {}", v.len())))
            }
            _ => Ok(()),
        };
        match &self.problem {
            Problem::Klflow { n, target, q0, .. } => {
                dim("n", *n)?;
                len("target", target, *n)?;
                len("q0", q0, *n)?;
            }
            Problem::Meanfield { n1, n2, joint, .. } => {
                dim("n1", *n1)?;
                dim("n2", *n2)?;
                len("joint", joint, n1 * n2)?;
            }
            Problem::Schrodinger {
                n1,
                n2,
                cost,
                epsilon,
                margins,
            } => {
                dim("n1", *n1)?;
                dim("n2", *n2)?;
                len("cost", cost, n1 * n2)?;
                if !(*epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(config_err("`epsilon` must be positive"));
                }
                if let Some([m1, m2]) = margins {
                    len("margins[0]", &Some(m1.clone()), *n1)?;
                    len("margins[1]", &Some(m2.clone()), *n2)?;
                }
            }
            Problem::Vb {
                n1,
                n2,
                joint,
                x,
                suffstat_dim,
            } => {
                dim("n1", *n1)?;
                dim("n2", *n2)?;
                len("joint", joint, n1 * n2)?;
                if x >= n1 {
                    return Err(config_err(format!("`x` must be below n1 = {n1}")));
                }
                if *suffstat_dim == 0 || *suffstat_dim >= *n2 {
                    return Err(config_err(format!("`suffstat_dim` must lie in 1..={}", n2 - 1)));
                }
            }
            Problem::Gradcheck {
                which,
                n,
                n1,
                n2,
                trials,
            } => {
                if which.on_product() {
                    dim("n1", n1.ok_or_else(|| config_err("missing field `n1`"))?)?;
                    dim("n2", n2.ok_or_else(|| config_err("missing field `n2`"))?)?;
                } else {
                    dim("n", n.ok_or_else(|| config_err("missing field `n`"))?)?;
                }
                if *trials == 0 {
                    return Err(config_err("`trials` must be at least 1"));
                }
            }
        }
        if let Some(int) = &self.integrator {
            if !(int.dt > 0.0 && int.dt.is_finite()) {
                return Err(config_err("`integrator.dt` must be positive"));
            }
            if int.steps < 1 {
                return Err(config_err("`integrator.steps` must be at least 1"));
            }
            if let Some(s) = int.stop_grad_norm {
                if !(s >= 0.0) {
                    return Err(config_err("`integrator.stop_grad_norm` must be non-negative"));
                }
            }
        }
        match &self.problem {
            Problem::Gradcheck { .. } => {}
            Problem::Vb { .. } => {
                let int = self.integrator()?;
                if int.scheme != SchemeName::Rk4 {
                    return Err(config_err("`vb` integrates the parameter with `rk4` only"));
                }
                if int.stop_grad_norm.is_some() {
                    return Err(config_err("`vb` does not support `integrator.stop_grad_norm`"));
                }
            }
            _ => {
                self.integrator()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_flow() {
        let c = ExperimentConfig::parse(
            r#"{"seed": 3, "output": "o.csv",
                "problem": {"kind": "klflow", "n": 3, "direction": "fwd"},
                "integrator": {"scheme": "rk4", "dt": 0.1, "steps": 5}}"#,
        )
        .unwrap();
        assert_eq!(c.problem.command(), "flow");
        assert_eq!(c.integrator().unwrap().scheme, SchemeName::Rk4);
    }

    #[test]
    fn missing_integrator_is_named() {
        let err = ExperimentConfig::parse(
            r#"{"seed": 3, "output": "o.csv",
                "problem": {"kind": "meanfield", "n1": 2, "n2": 2}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("`integrator`"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn gradcheck_needs_no_integrator() {
        let c = ExperimentConfig::parse(
            r#"{"seed": 1, "output": "g.csv",
                "problem": {"kind": "gradcheck", "which": "kl_total", "n": 5, "trials": 2}}"#,
        );
        assert!(c.is_ok());
    }

    #[test]
    fn rejects_bad_fields() {
        for text in [
            r#"{"seed": 1, "output": "g.csv", "problem": {"kind": "gradcheck", "which": "kl_total", "n": 1, "trials": 2}}"#,
            r#"{"seed": 1, "output": "g.csv", "problem": {"kind": "gradcheck", "which": "nope", "n": 3, "trials": 2}}"#,
            r#"{"seed": 1, "output": "g.csv", "problem": {"kind": "gradcheck", "which": "elbo", "n": 3, "trials": 2}}"#,
            r#"{"seed": 1, "output": "o.csv", "problem": {"kind": "klflow", "n": 3, "q0": [0.5, 0.5], "direction": "fwd"},
                "integrator": {"scheme": "rk4", "dt": 0.1, "steps": 5}}"#,
            r#"{"seed": 1, "output": "o.csv", "problem": {"kind": "klflow", "n": 3, "direction": "up"},
                "integrator": {"scheme": "rk4", "dt": 0.1, "steps": 5}}"#,
            r#"{"seed": 1, "output": "o.csv", "problem": {"kind": "klflow", "n": 3, "direction": "fwd"},
                "integrator": {"scheme": "rk4", "dt": 0.0, "steps": 5}}"#,
            r#"{"seed": 1, "output": "o.csv", "problem": {"kind": "vb", "n1": 2, "n2": 3, "x": 0, "suffstat_dim": 2},
                "integrator": {"scheme": "exp-euler", "dt": 0.1, "steps": 5}}"#,
            r#"{"seed": 1, "output": "o.csv", "problem": {"kind": "vb", "n1": 2, "n2": 3, "x": 2, "suffstat_dim": 2},
                "integrator": {"scheme": "rk4", "dt": 0.1, "steps": 5}}"#,
            r#"{"seed": 1, "output": "o.csv", "extra": 1, "problem": {"kind": "klflow", "n": 3, "direction": "fwd"},
                "integrator": {"scheme": "rk4", "dt": 0.1, "steps": 5}}"#,
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}");
        }
    }
}
