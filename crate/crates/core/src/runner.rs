//! Scenario dispatch: runs one validated scenario, writes its artifacts, and
//! assembles the run report.

use crate::basis::build_basis;
use crate::continuous::branch_asymptotics_check;
use crate::dynamics::{grid_energy, integrate, project_initial, smoothness_sweep, FieldSpec, InitialData};
use crate::generator::{build_generator_assembled, discrepancy_entry, dissipativity_defect};
use crate::model::ModelError;
use crate::report::{fmt_f64, resolve_out_dir, write_csv, RunReport};
use crate::scenario::{Scenario, ScenarioError, Task};
use crate::spectral::{abscissa_table, resolvent_scan, spectrum_report};
use crate::verify;
use serde_json::json;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit code contract: 1 validation, 2 numerical or io.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Numerical(_) | RunError::Io(_) => 2,
        }
    }
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        RunError::Validation(e.to_string())
    }
}

impl From<crate::report::ReportError> for RunError {
    fn from(e: crate::report::ReportError) -> Self {
        RunError::Io(e.to_string())
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numerical(e.to_string())
}

/// Cross-check the closed-form build against the assembly and surface any
/// gap as a warning, never silently.
fn warn_discrepancies(report: &mut RunReport, scenario: &Scenario) -> Result<(), RunError> {
    let model = scenario.coupling()?;
    let bc = scenario.boundary()?;
    let entry = discrepancy_entry(&model, bc, scenario.n.min(8))?;
    for u in &entry.undefined_entries {
        report.warn(
            "build_generator_printed",
            &format!("{}/{} n={}", entry.kind, entry.bc, entry.n),
            format!("closed form leaves block {} entry ({}, {}) undefined", u.block, u.i, u.j),
        );
    }
    if !entry.agrees {
        report.warn(
            "discrepancy_entry",
            &format!("{}/{} n={}", entry.kind, entry.bc, entry.n),
            format!(
                "closed-form and assembled generators disagree: max |diff| {:.3e} (relative {:.3e})",
                entry.max_abs_diff, entry.rel_diff
            ),
        );
    }
    Ok(())
}

/// Run one scenario end to end. Output files land in the resolved output
/// directory; the report lists them with checksums.
pub fn run(scenario: &Scenario) -> Result<RunReport, RunError> {
    scenario.validate()?;
    let start = std::time::Instant::now();
    let name = scenario.effective_name();
    let out_dir = resolve_out_dir(scenario.out.as_deref());
    std::fs::create_dir_all(&out_dir).map_err(|e| RunError::Io(e.to_string()))?;
    let path = |suffix: &str| -> PathBuf { out_dir.join(format!("{name}_{suffix}")) };

    let mut report = RunReport::new(
        &name,
        scenario.task.slug(),
        scenario.seed,
        serde_json::to_value(scenario).expect("scenario serializes"),
    );

    match scenario.task {
        Task::Spectrum => {
            warn_discrepancies(&mut report, scenario)?;
            let model = scenario.coupling()?;
            let bc = scenario.boundary()?;
            let a = build_generator_assembled(&model, bc, scenario.n)?;
            let diss = dissipativity_defect(&a, 100, scenario.seed);
            if diss.sym_max_eigenvalue > 1e-10 {
                report.warn(
                    "dissipativity_defect",
                    &format!("{}/{} n={}", model.kind, bc, scenario.n),
                    format!("symmetric part has positive eigenvalue {:.3e}", diss.sym_max_eigenvalue),
                );
            }
            let spec = spectrum_report(&a).map_err(numerical)?;
            let rows: Vec<Vec<String>> = spec
                .eigenvalues
                .iter()
                .zip(spec.branches.iter())
                .map(|(l, b)| {
                    vec![
                        fmt_f64(l.re),
                        fmt_f64(l.im),
                        b.branch.to_string(),
                        b.low_confidence.to_string(),
                    ]
                })
                .collect();
            report.files.push(write_csv(
                &path("eigenvalues.csv"),
                &["re", "im", "branch", "low_confidence"],
                &rows,
            )?);
            report.summary = json!({
                "abscissa": spec.abscissa,
                "min_distance": spec.min_distance,
                "dissipativity_sym_max": diss.sym_max_eigenvalue,
            });
        }
        Task::Resolvent => {
            let model = scenario.coupling()?;
            let bc = scenario.boundary()?;
            let a = build_generator_assembled(&model, bc, scenario.n)?;
            let decades = (scenario.s_max / scenario.s_min).log10();
            let num = ((scenario.points_per_decade as f64 * decades).ceil() as usize + 1).max(2);
            let scan = resolvent_scan(&a, scenario.s_min, scenario.s_max, num, scenario.alpha)
                .map_err(numerical)?;
            for p in scan.samples.iter().filter(|p| p.flagged) {
                report.warn(
                    "resolvent_norm",
                    &format!("{}/{} n={}", model.kind, bc, scenario.n),
                    format!("shift i*{} numerically singular, excluded from supremum", p.s),
                );
            }
            let rows: Vec<Vec<String>> = scan
                .samples
                .iter()
                .map(|p| {
                    vec![
                        fmt_f64(p.s),
                        fmt_f64(p.norm),
                        fmt_f64(p.scaled),
                        p.flagged.to_string(),
                    ]
                })
                .collect();
            report.files.push(write_csv(
                &path("resolvent.csv"),
                &["s", "norm", "scaled", "flagged"],
                &rows,
            )?);
            report.summary = json!({
                "alpha": scan.alpha,
                "supremum": scan.supremum,
                "argsup": scan.argsup,
            });
        }
        Task::AbscissaTable => {
            let model = scenario.coupling()?;
            let bc = scenario.boundary()?;
            let table = abscissa_table(&model, bc, &scenario.ns).map_err(numerical)?;
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|&(n, d)| vec![n.to_string(), fmt_f64(d)])
                .collect();
            report.files.push(write_csv(
                &path("abscissa.csv"),
                &["n", "min_distance"],
                &rows,
            )?);
            report.summary = json!({ "rows": table.len() });
        }
        Task::ContinuousRoots => {
            let bc = scenario.boundary()?;
            let table = branch_asymptotics_check(scenario.gamma, bc, scenario.k_lo, scenario.k_hi);
            for row in table.iter().filter(|r| !r.converged) {
                report.warn(
                    "find_eigen_near",
                    &format!("{bc} gamma={} k={}", scenario.gamma, row.k),
                    "Newton search did not converge".to_string(),
                );
            }
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        fmt_f64(r.re),
                        fmt_f64(r.im),
                        r.converged.to_string(),
                        fmt_f64(r.re_k2),
                    ]
                })
                .collect();
            report.files.push(write_csv(
                &path("roots.csv"),
                &["k", "re", "im", "converged", "re_k2"],
                &rows,
            )?);
            report.summary = json!({ "rows": table.len() });
        }
        Task::Simulate => {
            warn_discrepancies(&mut report, scenario)?;
            let model = scenario.coupling()?;
            let bc = scenario.boundary()?;
            let basis = build_basis(&model, bc, scenario.n)?;
            let a = build_generator_assembled(&model, bc, scenario.n)?;
            let y0 =
                project_initial(&scenario.initial, &basis, &model, bc).map_err(|e| match e {
                    crate::dynamics::DynamicsError::IncompatibleData(m) => RunError::Validation(m),
                    other => numerical(other),
                })?;
            let traj = integrate(&a, &y0, scenario.t_final, scenario.dt, scenario.scheme)
                .map_err(numerical)?;
            if traj.fallback {
                report.warn(
                    "integrate",
                    &format!("{}/{} n={}", model.kind, bc, scenario.n),
                    "eigenbasis too ill-conditioned; fell back to the trapezoidal scheme"
                        .to_string(),
                );
            }
            let e_grid = grid_energy(&traj, &basis, scenario.n_grid())?;
            let rows: Vec<Vec<String>> = traj
                .times
                .iter()
                .zip(traj.energy_modal.iter())
                .zip(e_grid.iter())
                .map(|((&t, &em), &eg)| vec![fmt_f64(t), fmt_f64(em), fmt_f64(eg)])
                .collect();
            report.files.push(write_csv(
                &path("energy.csv"),
                &["t", "E_modal", "E_grid"],
                &rows,
            )?);
            report.summary = json!({
                "initial_modal_energy": traj.energy_modal.first(),
                "terminal_modal_energy": traj.energy_modal.last(),
                "scheme_used": traj.scheme_used,
            });
        }
        Task::SmoothnessSweep => {
            let model = scenario.coupling()?;
            let bc = scenario.boundary()?;
            let runs = smoothness_sweep(
                &model,
                bc,
                scenario.n,
                &scenario.js,
                scenario.t_final,
                scenario.dt,
            )
            .map_err(numerical)?;
            let mut rows = Vec::new();
            for r in &runs {
                for (&t, &e) in r.traj.times.iter().zip(r.traj.energy_modal.iter()) {
                    rows.push(vec![r.j.to_string(), fmt_f64(t), fmt_f64(e)]);
                }
            }
            report
                .files
                .push(write_csv(&path("sweep.csv"), &["j", "t", "E"], &rows)?);
            report.summary = json!({
                "terminal_energies": runs
                    .iter()
                    .map(|r| (r.j, r.terminal_energy))
                    .collect::<Vec<_>>(),
            });
        }
        Task::DiscontinuitySweep => {
            let model = scenario.coupling()?;
            let bc = scenario.boundary()?;
            let basis = build_basis(&model, bc, scenario.n)?;
            let a = build_generator_assembled(&model, bc, scenario.n)?;
            let cases: [(&str, InitialData); 2] = [
                (
                    "sine",
                    InitialData {
                        v0: FieldSpec::SineMode { j: 1 },
                        ..Default::default()
                    },
                ),
                (
                    "disc",
                    InitialData {
                        v0: FieldSpec::PiecewiseConstant {
                            breaks: vec![std::f64::consts::PI / 2.0],
                            values: vec![2.0, -1.0],
                        },
                        ..Default::default()
                    },
                ),
            ];
            let mut rows = Vec::new();
            let mut terminal = Vec::new();
            for (tag, data) in &cases {
                let y0 = project_initial(data, &basis, &model, bc).map_err(numerical)?;
                let traj = integrate(&a, &y0, scenario.t_final, scenario.dt, scenario.scheme)
                    .map_err(numerical)?;
                for (&t, &e) in traj.times.iter().zip(traj.energy_modal.iter()) {
                    rows.push(vec![tag.to_string(), fmt_f64(t), fmt_f64(e)]);
                }
                terminal.push(json!({
                    "tag": tag,
                    "initial": traj.energy_modal.first(),
                    "terminal": traj.energy_modal.last(),
                }));
            }
            report
                .files
                .push(write_csv(&path("sweep.csv"), &["tag", "t", "E"], &rows)?);
            report.summary = json!({ "cases": terminal });
        }
        Task::Verify => {
            let results = verify::run_all();
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.id.to_string(),
                        r.name.to_string(),
                        r.passed.to_string(),
                        r.detail.clone(),
                    ]
                })
                .collect();
            report.files.push(write_csv(
                &path("verify.csv"),
                &["id", "name", "passed", "detail"],
                &rows,
            )?);
            for r in results.iter().filter(|r| !r.passed) {
                report.warn("verify", &format!("criterion {}", r.id), r.detail.clone());
            }
            report.summary = json!({
                "passed": results.iter().filter(|r| r.passed).count(),
                "failed": results.iter().filter(|r| !r.passed).count(),
                "lines": results.iter().map(|r| r.line()).collect::<Vec<_>>(),
            });
        }
    }

    report.wall_time_s = start.elapsed().as_secs_f64();
    report.write_json(&path("report.json"))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_in(dir: &std::path::Path, task: Task) -> Scenario {
        let mut s = Scenario::with_task(task);
        s.out = Some(dir.to_path_buf());
        s
    }

    #[test]
    fn spectrum_run_row_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = scenario_in(dir.path(), Task::Spectrum);
        s.model = "weak".into();
        s.n = 32;
        let report = run(&s).unwrap();
        assert_eq!(report.files.len(), 1);
        assert_eq!(report.files[0].rows, 96);
        assert_eq!(report.seed, 42);
    }

    #[test]
    fn simulate_default_grid_has_1001_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = scenario_in(dir.path(), Task::Simulate);
        s.n = 20;
        let report = run(&s).unwrap();
        assert_eq!(report.files[0].rows, 1001);
    }

    #[test]
    fn checksums_reproducible_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = scenario_in(dir.path(), Task::Spectrum);
        s.n = 8;
        let first = run(&s).unwrap().files[0].sha256.clone();
        let second = run(&s).unwrap().files[0].sha256.clone();
        assert_eq!(first, second);
    }

    #[test]
    fn undefined_entries_become_warnings() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = scenario_in(dir.path(), Task::Spectrum);
        s.model = "strong".into();
        s.bc = "ND".into();
        s.n = 6;
        let report = run(&s).unwrap();
        assert!(report
            .warnings
            .iter()
            .any(|w| w.operation == "build_generator_printed" && w.parameters.contains("ND")));
    }

    #[test]
    fn invalid_scenario_is_validation_error() {
        let mut s = Scenario::with_task(Task::Simulate);
        s.gamma = -1.0;
        match run(&s) {
            Err(e @ RunError::Validation(_)) => assert_eq!(e.exit_code(), 1),
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
