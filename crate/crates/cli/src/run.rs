//! Scenario pipeline: certificate, gradient check, minimization, coercivity
//! sampling and (clamped plate) dual verification.

use std::path::Path;
use std::time::Instant;

use platedual_core::constitutive::{build_bending_tensor, build_membrane_tensor};
use platedual_core::dual::{verify, CheckOutcome, VerifyOptions};
use platedual_core::elasticity3d::{build_t3d, check_tensor_hypotheses, coercivity_transcript};
use platedual_core::plate::{build_t_field, PlateProblem};
use platedual_core::rng::{sample_rng, uniform_vec};
use platedual_core::solver::{gradcheck, minimize, write_history_csv, CriticalPoint};
use platedual_core::{ElasticMode, ElasticProblem, Error, Objective, PlateMode};

use crate::config::{Model, ScenarioConfig};
use crate::error::{exit, CliError};
use crate::report::{CertificateSummary, CoercivitySummary, CriticalSummary, EnergyReport, VerificationReport};
use crate::snapshot::{SnapshotGrid, Solution};

/// Tolerance for `J(u) - bound(u)` over sampled states.
pub const COERCIVITY_TOL: f64 = 1e-10;
/// Relative tolerance of the 3D energy transcript.
pub const TRANSCRIPT_TOL: f64 = 1e-9;

pub enum Problem {
    Plate(PlateProblem),
    Elastic(ElasticProblem),
}

impl Problem {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let core = |e: Error| CliError::config(e.to_string());
        match cfg.model {
            Model::PlateClamped | Model::PlateMixed => {
                let g = cfg.grid2()?;
                let lp = cfg.lame()?;
                let h = build_membrane_tensor(&lp).map_err(core)?;
                let mode = if cfg.model == Model::PlateClamped { PlateMode::Clamped } else { PlateMode::Mixed };
                let loads = cfg.loads.plate(&g)?;
                Ok(Problem::Plate(PlateProblem::new(h, build_bending_tensor(&h, &lp), loads, mode).map_err(core)?))
            }
            Model::Elasticity3dClamped | Model::Elasticity3dMixed => {
                let g = cfg.grid3()?;
                let mode =
                    if cfg.model == Model::Elasticity3dClamped { ElasticMode::Clamped } else { ElasticMode::Mixed };
                let loads = cfg.loads.elastic(&g)?;
                Ok(Problem::Elastic(ElasticProblem::new(cfg.tensor3d()?, loads, mode).map_err(core)?))
            }
        }
    }

    pub fn objective(&self) -> &dyn Objective {
        match self {
            Problem::Plate(p) => p,
            Problem::Elastic(p) => p,
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        match self {
            Problem::Plate(p) => vec![0.0; p.dim()],
            Problem::Elastic(p) => p.initial_state(),
        }
    }

    pub fn grid_nodes(&self) -> Vec<usize> {
        match self {
            Problem::Plate(p) => vec![p.ops.grid.nx, p.ops.grid.ny],
            Problem::Elastic(p) => p.grid.shape().to_vec(),
        }
    }

    pub fn snapshot_grid(&self) -> SnapshotGrid {
        match self {
            Problem::Plate(p) => SnapshotGrid::Plate(p.ops.grid),
            Problem::Elastic(p) => SnapshotGrid::Elastic(p.grid),
        }
    }

    fn energy(&self, x: &[f64]) -> EnergyReport {
        match self {
            Problem::Plate(p) => EnergyReport::Plate(p.breakdown(x)),
            Problem::Elastic(p) => EnergyReport::Elastic(p.breakdown(x)),
        }
    }

    /// Admissible random state: `base` plus uniform noise on free dofs.
    fn sample_state(&self, base: &[f64], amp: f64, seed: u64, s: usize) -> Vec<f64> {
        let obj = self.objective();
        let noise = uniform_vec(&mut sample_rng(seed, s as u64), obj.dim(), amp);
        base.iter().zip(noise).zip(obj.free()).map(|((b, n), f)| if *f { b + n } else { *b }).collect()
    }
}

/// Where the state checked by the pipeline comes from.
pub enum Start {
    Solve,
    Stored(Solution),
}

pub struct RunOutcome {
    pub report: VerificationReport,
    pub solution: Option<Solution>,
    pub history: Option<Vec<platedual_core::solver::IterRecord>>,
    pub stalled: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.stalled {
            exit::STALL
        } else if self.report.passed() {
            exit::OK
        } else {
            exit::CHECK_FAILED
        }
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn certificate_stage(cfg: &ScenarioConfig, problem: &Problem, report: &mut VerificationReport, base: &[f64]) {
    let toggles = &cfg.checks;
    match problem {
        Problem::Plate(p) => match build_t_field(&p.loads, cfg.delta_pd) {
            Ok(cert) => {
                report.certificate = Some(CertificateSummary {
                    c_shift: cert.c_shift,
                    min_eigenvalue: cert.min_eigenvalue,
                    delta_pd: cert.delta_pd,
                    div_residual: cert.div_residual,
                    tol_div: cert.tol_div,
                });
                report.checks.push(CheckOutcome::le("certificate_divergence", cert.div_residual, cert.tol_div));
                report.checks.push(CheckOutcome::ge("certificate_min_eigenvalue", cert.min_eigenvalue, cert.delta_pd * (1.0 - 1e-12)));
                if toggles.coercivity_samples > 0 {
                    let min_slack = (0..toggles.coercivity_samples)
                        .map(|s| cert.slack(p, &problem.sample_state(base, toggles.coercivity_amplitude, cfg.seed, s)))
                        .fold(f64::INFINITY, f64::min);
                    report.coercivity = Some(CoercivitySummary {
                        samples: toggles.coercivity_samples,
                        min_slack,
                        transcript_mismatch: None,
                        min_floor_margin: None,
                    });
                    report.checks.push(CheckOutcome::ge("coercivity_min_slack", min_slack, -COERCIVITY_TOL));
                }
            }
            Err(e) => {
                report.checks.push(CheckOutcome::gt("certificate", 0.0, 0.0));
                report.notes.push(format!("certificate: {e}"));
            }
        },
        Problem::Elastic(p) => {
            match check_tensor_hypotheses(&p.h, toggles.hypothesis_samples, cfg.seed) {
                Ok(h) => {
                    report.checks.push(CheckOutcome::gt("tensor_c0", h.c0, 0.0));
                    report.checks.push(CheckOutcome::gt("tensor_c1_worst_ratio", h.c1_worst_ratio, 0.0));
                    report.tensor_hypotheses = Some(h);
                }
                Err(e) => {
                    report.checks.push(CheckOutcome::gt("tensor_hypotheses", 0.0, 0.0));
                    report.notes.push(format!("tensor hypotheses: {e}"));
                }
            }
            match build_t3d(&p.loads, cfg.delta_pd) {
                Ok(cert) => {
                    report.certificate = Some(CertificateSummary {
                        c_shift: cert.c_shift,
                        min_eigenvalue: cert.min_eigenvalue,
                        delta_pd: cert.delta_pd,
                        div_residual: cert.div_residual,
                        tol_div: cert.tol_div,
                    });
                    report.checks.push(CheckOutcome::le("certificate_divergence", cert.div_residual, cert.tol_div));
                    report.checks.push(CheckOutcome::ge("certificate_min_eigenvalue", cert.min_eigenvalue, cert.delta_pd * (1.0 - 1e-12)));
                    if toggles.coercivity_samples > 0 {
                        let (mut slack, mut mismatch, mut margin) = (f64::INFINITY, 0.0_f64, f64::INFINITY);
                        for s in 0..toggles.coercivity_samples {
                            let x = problem.sample_state(base, toggles.coercivity_amplitude, cfg.seed, s);
                            match coercivity_transcript(p, &cert, &x) {
                                Ok(t) => {
                                    let bound = if p.mode == ElasticMode::Clamped { t.proof_expression } else { t.bound };
                                    slack = slack.min(t.direct - bound);
                                    mismatch = mismatch.max((t.bound - t.direct).abs() / (1.0 + t.direct.abs()));
                                    margin = margin.min(t.proof_expression - t.floor);
                                }
                                Err(e) => {
                                    report.notes.push(format!("transcript: {e}"));
                                    slack = f64::NEG_INFINITY;
                                    break;
                                }
                            }
                        }
                        let slack = if slack.is_finite() { slack } else { -1.0 };
                        let margin = if margin.is_finite() { margin } else { -1.0 };
                        report.coercivity = Some(CoercivitySummary {
                            samples: toggles.coercivity_samples,
                            min_slack: slack,
                            transcript_mismatch: Some(mismatch),
                            min_floor_margin: Some(margin),
                        });
                        report.checks.push(CheckOutcome::le("transcript_identity", mismatch, TRANSCRIPT_TOL));
                        report.checks.push(CheckOutcome::ge("coercivity_min_slack", slack, -COERCIVITY_TOL));
                        report.checks.push(CheckOutcome::ge("coercivity_floor_margin", margin, 0.0));
                    }
                }
                Err(e) => {
                    report.checks.push(CheckOutcome::gt("certificate", 0.0, 0.0));
                    report.notes.push(format!("certificate: {e}"));
                }
            }
        }
    }
}

/// Gradient check alone, at random states around the initial iterate.
pub fn run_gradcheck(cfg: &ScenarioConfig) -> Result<VerificationReport, CliError> {
    let problem = Problem::build(cfg)?;
    let mut report = VerificationReport::new(&cfg.name, cfg.model, cfg.seed, problem.grid_nodes());
    let t = Instant::now();
    let t0 = problem.initial_state();
    let r = gradcheck(
        problem.objective(),
        &t0,
        cfg.checks.gradcheck_samples.max(1),
        cfg.checks.gradcheck_directions.max(1),
        cfg.checks.gradcheck_amplitude,
        cfg.seed,
    );
    report.checks.push(CheckOutcome::le("gradcheck", r.max_rel_error, r.tolerance));
    report.gradcheck = Some(r);
    report.timings.gradcheck_s = secs(t);
    report.timings.total_s = secs(t);
    Ok(report)
}

/// Run the full pipeline for `cfg`.
pub fn run_config(cfg: &ScenarioConfig, start: Start) -> Result<RunOutcome, CliError> {
    let total = Instant::now();
    let problem = Problem::build(cfg)?;
    let obj = problem.objective();
    let mut report = VerificationReport::new(&cfg.name, cfg.model, cfg.seed, problem.grid_nodes());
    let x_init = problem.initial_state();

    let stored = match start {
        Start::Solve => None,
        Start::Stored(sol) => {
            if sol.model != cfg.model || sol.grid != problem.snapshot_grid() {
                return Err(CliError::config("solution snapshot does not match the scenario model or grid"));
            }
            Some(sol)
        }
    };

    if cfg.checks.gradcheck {
        let t = Instant::now();
        let r = gradcheck(
            obj,
            &x_init,
            cfg.checks.gradcheck_samples.max(1),
            cfg.checks.gradcheck_directions.max(1),
            cfg.checks.gradcheck_amplitude,
            cfg.seed,
        );
        report.checks.push(CheckOutcome::le("gradcheck", r.max_rel_error, r.tolerance));
        report.gradcheck = Some(r);
        report.timings.gradcheck_s = secs(t);
    }

    let t = Instant::now();
    let mut history = None;
    let cp = match &stored {
        Some(sol) => {
            let x = sol.state()?;
            let gn = obj.grad_norm(&obj.projected_gradient(&x));
            CriticalPoint {
                value: obj.value(&x),
                grad_norm: gn,
                iters: sol.iters,
                converged: gn <= cfg.solver.grad_tol,
                history: Vec::new(),
                x,
            }
        }
        None => match minimize(obj, &x_init, &cfg.solver) {
            Ok(cp) => cp,
            Err(e @ Error::Stall { .. }) => {
                report.checks.push(CheckOutcome::gt("solver_converged", 0.0, 0.0));
                report.notes.push(format!("solver: {e}"));
                report.timings.solve_s = secs(t);
                report.timings.total_s = secs(total);
                return Ok(RunOutcome { report, solution: None, history: None, stalled: true });
            }
            Err(e) => return Err(e.into()),
        },
    };
    report.timings.solve_s = secs(t);
    if cfg.solver.record_history {
        history = Some(cp.history.clone());
    }
    report.energy = Some(problem.energy(&cp.x));
    report.critical_point = Some(CriticalSummary {
        value: cp.value,
        grad_norm: cp.grad_norm,
        grad_tol: cfg.solver.grad_tol,
        iters: cp.iters,
        converged: cp.converged,
    });
    report.checks.push(CheckOutcome::le("solver_grad_norm", cp.grad_norm, cfg.solver.grad_tol));

    let t = Instant::now();
    certificate_stage(cfg, &problem, &mut report, &cp.x);
    report.timings.certificate_s = secs(t);

    let t = Instant::now();
    match &problem {
        Problem::Plate(p) if p.mode == PlateMode::Clamped && cfg.checks.duality => {
            let opts = VerifyOptions {
                grad_tol: cfg.solver.grad_tol,
                eps3: cfg.eps3,
                k: cfg.k_policy.expect("validated"),
                seed: cfg.seed,
                weak_trials: cfg.checks.weak_duality_trials,
                concavity_directions: cfg.checks.concavity_directions,
                j2_samples: cfg.checks.j2_samples,
            };
            match verify(p, &cp.x, &opts) {
                Ok(d) => {
                    report.checks.extend(d.checks.iter().cloned());
                    report.dual = Some(d);
                }
                Err(e) => {
                    report.checks.push(CheckOutcome::gt("dual_verification", 0.0, 0.0));
                    report.notes.push(format!("dual verification: {e}"));
                }
            }
        }
        Problem::Plate(_) if cfg.checks.duality => {
            report.notes.push("dual verification applies to clamped plates only; skipped".into());
        }
        _ => {}
    }
    report.timings.verify_s = secs(t);
    report.timings.total_s = secs(total);

    let solution = Solution::new(
        cfg.model,
        problem.snapshot_grid(),
        &cp.x,
        cp.value,
        cp.grad_norm,
        cp.iters,
        cp.converged,
    );
    Ok(RunOutcome { report, solution: Some(solution), history, stalled: false })
}

/// Load a scenario file and run it from scratch.
pub fn run_scenario(config_path: &Path) -> Result<RunOutcome, CliError> {
    let cfg = ScenarioConfig::load(config_path)?;
    run_config(&cfg, Start::Solve)
}

/// Write `history.csv` into `dir` when a history was recorded.
pub fn write_history(outcome: &RunOutcome, dir: &Path) -> Result<(), CliError> {
    if let Some(h) = &outcome.history {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("history.csv");
        let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_history_csv(h, file).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
