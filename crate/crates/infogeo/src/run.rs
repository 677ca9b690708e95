//! Executes an [`ExperimentConfig`] and writes its trajectory.

use std::path::{Path, PathBuf};

use infogeo_core::flows::{integrate, Diagnostics, IntegratorOptions, KlForwardDescent, KlReverseDescent, Scheme};
use infogeo_core::oracles::sinkhorn_oracle;
use infogeo_core::product::{constrained_schrodinger_flow, MeanFieldDescent, MeanFieldDirection, SchrodingerProblem};
use infogeo_core::vb::{posterior_theta, vb_flow, ExpModel, VBProblem};
use infogeo_core::{JointProb, Prob, Rv, SampleSpace, Trajectory};

use crate::config::{Direction, ExperimentConfig, IntegratorConfig, Problem, SchemeName};
use crate::error::{config_err, CliError};
use crate::gradcheck::{self, Dims};
use crate::instances;

/// Tolerance of the Sinkhorn reference solve reported by `schrodinger`.
pub const SINKHORN_TOLERANCE: f64 = 1e-12;

/// One CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub step: usize,
    pub t: f64,
    pub objective: Option<f64>,
    pub grad_norm: f64,
    pub state: Vec<f64>,
}

/// Rows plus the extra figures printed in the summary line.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub extras: Vec<(&'static str, f64)>,
    pub output: PathBuf,
}

impl Outcome {
    /// `key=value` pairs: final objective and gradient norm, then problem-specific figures.
    pub fn summary(&self) -> String {
        let last = self.rows.last().expect("at least one row");
        let mut parts = vec![
            format!("final_objective={}", fmt_opt(last.objective)),
            format!("final_grad_norm={:e}", last.grad_norm),
            format!("rows={}", self.rows.len()),
        ];
        parts.extend(self.extras.iter().map(|(k, v)| format!("{k}={v:e}")));
        parts.push(format!("output={}", self.output.display()));
        parts.join(" ")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| format!("{v:e}"))
}

/// 17 significant digits; round-trips every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `step,t,objective,grad_norm,state_0..` with one line per row.
pub fn write_csv(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let wrap = |source: csv::Error| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    let width = rows.first().map_or(0, |r| r.state.len());
    let mut header = vec!["step".to_string(), "t".into(), "objective".into(), "grad_norm".into()];
    header.extend((0..width).map(|i| format!("state_{i}")));
    w.write_record(&header).map_err(wrap)?;
    for r in rows {
        let mut rec = vec![
            r.step.to_string(),
            fmt_float(r.t),
            r.objective.map_or_else(String::new, fmt_float),
            fmt_float(r.grad_norm),
        ];
        rec.extend(r.state.iter().map(|v| fmt_float(*v)));
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| wrap(e.into()))
}

fn rows<S>(traj: &Trajectory<S>, state: impl Fn(&S) -> Vec<f64>) -> Vec<Row> {
    traj.times
        .iter()
        .zip(&traj.states)
        .zip(&traj.diagnostics)
        .enumerate()
        .map(|(step, ((t, s), d)): (usize, ((&f64, &S), &Diagnostics))| Row {
            step,
            t: *t,
            objective: d.objective,
            grad_norm: d.grad_norm,
            state: state(s),
        })
        .collect()
}

fn options(int: IntegratorConfig) -> IntegratorOptions {
    let scheme = match int.scheme {
        SchemeName::ExpEuler => Scheme::ExpEuler,
        SchemeName::Rk4 => Scheme::Rk4,
    };
    let mut opts = IntegratorOptions::new(scheme, int.dt, int.steps);
    opts.stop_grad_norm = int.stop_grad_norm.unwrap_or(0.0);
    opts
}

/// A configured distribution, or the generated one when the field is absent.
fn given_or(name: &str, given: &Option<Vec<f64>>, generated: Prob) -> Result<Prob, CliError> {
    match given {
        Some(w) => Prob::new(generated.space().clone(), w.clone()).map_err(|e| config_err(format!("`{name}`: {e}"))),
        None => Ok(generated),
    }
}

fn given_joint(given: &Option<Vec<f64>>, generated: JointProb) -> Result<JointProb, CliError> {
    match given {
        Some(w) => JointProb::from_weights(generated.n1(), generated.n2(), w.clone())
            .map_err(|e| config_err(format!("`joint`: {e}"))),
        None => Ok(generated),
    }
}

/// Runs the experiment; `out` overrides the configured output path.
///
/// Generated inputs are drawn from stream 0 of the seed in a fixed order,
/// whether or not the config supplies them.
pub fn run(config: &ExperimentConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
    let output = out.map_or_else(|| config.output.clone(), Path::to_path_buf);
    let mut rng = instances::stream(config.seed, 0);
    let mut extras = Vec::new();
    let rows = match &config.problem {
        Problem::Klflow {
            n,
            target,
            q0,
            direction,
        } => {
            let target = given_or("target", target, instances::prob(&mut rng, *n))?;
            let q0 = given_or("q0", q0, instances::prob(&mut rng, *n))?;
            let opts = options(config.integrator()?);
            let traj = match direction {
                Direction::Forward => integrate(&q0, &KlForwardDescent { target }, &opts)?,
                Direction::Reverse => integrate(&q0, &KlReverseDescent { source: target }, &opts)?,
            };
            rows(&traj, |p: &Prob| p.weights().to_vec())
        }
        Problem::Meanfield {
            n1,
            n2,
            joint,
            direction,
        } => {
            let r0 = given_joint(joint, instances::joint(&mut rng, *n1, *n2))?;
            let field = MeanFieldDescent {
                n1: *n1,
                n2: *n2,
                direction: match direction {
                    Direction::Forward => MeanFieldDirection::Forward,
                    Direction::Reverse => MeanFieldDirection::Reverse,
                },
            };
            let traj = integrate(r0.prob(), &field, &options(config.integrator()?))?;
            rows(&traj, |p: &Prob| p.weights().to_vec())
        }
        Problem::Schrodinger {
            n1,
            n2,
            cost,
            epsilon,
            margins,
        } => {
            let space = SampleSpace::new(n1 * n2)?;
            let generated_cost = instances::rv(&mut rng, &space);
            let q1 = instances::prob(&mut rng, *n1);
            let q2 = instances::prob(&mut rng, *n2);
            let cost = match cost {
                Some(c) => Rv::new(space, c.clone()).map_err(|e| config_err(format!("`cost`: {e}")))?,
                None => generated_cost,
            };
            let (m1, m2) = match margins {
                Some([a, b]) => (Some(a.clone()), Some(b.clone())),
                None => (None, None),
            };
            let q1 = given_or("margins[0]", &m1, q1)?;
            let q2 = given_or("margins[1]", &m2, q2)?;
            let problem = SchrodingerProblem::new(cost, *epsilon, q1, q2)?;
            let traj = constrained_schrodinger_flow(&problem, &problem.independent_plan(), &options(config.integrator()?))?;
            let (q1, q2) = problem.margins();
            let oracle = sinkhorn_oracle(problem.cost(), *epsilon, q1, q2, SINKHORN_TOLERANCE)?;
            let last = traj.last().expect("non-empty trajectory");
            extras.push(("sinkhorn_tv", last.prob().total_variation(oracle.plan.prob())?));
            rows(&traj, |j: &JointProb| j.weights().to_vec())
        }
        Problem::Vb {
            n1,
            n2,
            joint,
            x,
            suffstat_dim,
        } => {
            let joint = given_joint(joint, instances::joint(&mut rng, *n1, *n2))?;
            let problem = VBProblem::new(joint, *x)?;
            let m0 = ExpModel::orthonormal(problem.prior().clone(), *suffstat_dim)?;
            let int = config.integrator()?;
            let traj = vb_flow(&problem, &m0, int.dt, int.steps)?;
            if *suffstat_dim == n2 - 1 {
                let bar = posterior_theta(&problem, &m0)?;
                let theta = traj.last().expect("non-empty trajectory");
                let err = theta.iter().zip(&bar).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                extras.push(("theta_error", err));
            }
            rows(&traj, |th: &Vec<f64>| th.clone())
        }
        Problem::Gradcheck {
            which,
            n,
            n1,
            n2,
            trials,
        } => {
            let d = if which.on_product() {
                Dims::Product(n1.expect("validated"), n2.expect("validated"))
            } else {
                Dims::Simplex(n.expect("validated"))
            };
            let results = gradcheck::run_trials(*which, d, config.seed, *trials)?;
            let max_error = results.iter().map(|r| r.rel_error).fold(0.0, f64::max);
            extras.push(("max_rel_error", max_error));
            let rows = results
                .into_iter()
                .enumerate()
                .map(|(k, r)| Row {
                    step: k,
                    t: k as f64,
                    objective: Some(r.objective),
                    grad_norm: r.grad_norm,
                    state: r.base,
                })
                .collect();
            let outcome = Outcome { rows, extras, output };
            write_csv(&outcome.output, &outcome.rows)?;
            if !(max_error <= gradcheck::TOLERANCE) {
                return Err(CliError::GradCheck {
                    max_error,
                    tolerance: gradcheck::TOLERANCE,
                });
            }
            return Ok(outcome);
        }
    };
    let outcome = Outcome { rows, extras, output };
    write_csv(&outcome.output, &outcome.rows)?;
    Ok(outcome)
}

/// Loads `config_path`, checks it matches `command` (any problem when `None`) and runs it.
pub fn execute(command: Option<&str>, config_path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let config = ExperimentConfig::load(config_path)?;
    if let Some(cmd) = command {
        if config.problem.command() != cmd {
            return Err(config_err(format!(
                "subcommand `{cmd}` cannot run a problem of this kind (use `{}`)",
                config.problem.command()
            )));
        }
    }
    run(&config, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e10, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn stationary_flow_has_one_row() {
        let config = ExperimentConfig::parse(
            r#"{"seed": 1, "output": "unused.csv",
                "problem": {"kind": "klflow", "n": 3, "target": [0.2, 0.3, 0.5], "q0": [0.2, 0.3, 0.5], "direction": "fwd"},
                "integrator": {"scheme": "exp-euler", "dt": 0.1, "steps": 100}}"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("flow.csv");
        let outcome = run(&config, Some(&out)).unwrap();
        assert_eq!(outcome.rows.len(), 1);
        assert_eq!(outcome.rows[0].objective, Some(0.0));
        assert!(out.exists());
    }
}
