//! Experiment drivers: run the configured simulations and write their files.

use std::path::{Path, PathBuf};

use crate::analysis::{
    energy_monitor, epsilon_cauchy_study, fit_decay_rate, space_convergence_study, StudySetup,
};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, ExecMode};
use crate::fem::{assemble, project_initial, project_initial_dirichlet};
use crate::mesh::MeshPartition;
use crate::params::{ModelParams, RateReport};
use crate::solver::{simulate, NewtonOptions, Variant};

use super::config::{ConvergenceSettings, DecaySettings, EpsilonSettings, Experiment, ExperimentConfig};
use super::output::{fmt_f64, fmt_opt, write_csv, Metadata, Table};
use super::svg::{line_chart, Chart};

pub const DECAY_COLUMNS: [&str; 4] = ["t", "l2_norm", "linf_norm", "control"];
pub const CONVERGENCE_COLUMNS: [&str; 10] = [
    "h",
    "epsilon",
    "k",
    "error_l2",
    "error_linf",
    "order_l2",
    "order_linf",
    "control_error_linf",
    "order_control",
    "status",
];
pub const EPSILON_COLUMNS: [&str; 11] = [
    "epsilon",
    "r",
    "state_l2",
    "state_linf",
    "control_linf",
    "diff_l2",
    "diff_linf",
    "control_diff_linf",
    "diff_l2_final",
    "diff_linf_final",
    "status",
];

/// Files written and the runs that failed (recorded in their metadata).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

fn newton_line(o: &NewtonOptions) -> String {
    let control = match o.control {
        crate::solver::ControlTreatment::Implicit => "implicit",
        crate::solver::ControlTreatment::Lagged => "lagged",
    };
    format!("tol={:e} max_iter={} control={control}", o.tol, o.max_iter)
}

fn rates_json(p: &ModelParams) -> String {
    match RateReport::new(p, None) {
        Ok(r) => serde_json::to_string(&r).expect("rate report serializes"),
        Err(e) => format!("unavailable ({e})"),
    }
}

fn base_metadata(cfg: &ExperimentConfig) -> Metadata {
    let mut m = Metadata::new(&cfg.resolved_json());
    m.push("newton", newton_line(&cfg.solver));
    m
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::PenalizedFeedback => "penalized_feedback",
        Variant::UncontrolledDirichlet => "uncontrolled_dirichlet",
    }
}

pub fn run_decay(cfg: &ExperimentConfig, settings: &DecaySettings, out: &Path, exec: ExecMode) -> Result<RunOutcome> {
    let mesh = MeshPartition::uniform(cfg.mesh.n_elements.as_vec()[0])?;
    let system = assemble(&mesh);
    let grid = cfg.grid()?;

    let values: Vec<Option<f64>> = match &settings.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut jobs = Vec::new();
    for v in &values {
        for &variant in &settings.variants {
            let mut p = match (&settings.sweep, v) {
                (Some(s), Some(v)) => s.param.apply(cfg.model, *v),
                _ => cfg.model,
            };
            if let Some(g) = settings.gain {
                p.r = g.gain(p.epsilon);
            }
            jobs.push((p, variant, *v));
        }
    }

    let profile = |x: f64| cfg.initial.eval(x);
    let runs = map_ordered(&jobs, exec, |(p, variant, _)| {
        let y0 = match variant {
            Variant::PenalizedFeedback => project_initial(&system, profile, cfg.projection),
            Variant::UncontrolledDirichlet => project_initial_dirichlet(&system, profile, cfg.projection),
        };
        simulate(p, &system, &y0, &grid, *variant, &cfg.solver)
    });

    let mut outcome = RunOutcome::default();
    for ((p, variant, value), run) in jobs.iter().zip(runs) {
        let traj = run?;
        let mut stem = format!("decay_{}", variant_name(*variant));
        if let (Some(s), Some(v)) = (&settings.sweep, value) {
            stem.push_str(&format!("_{}_{}", s.param.name(), v));
        }

        let mut meta = base_metadata(cfg);
        meta.push("variant", variant_name(*variant));
        meta.push("params", serde_json::to_string(p).expect("params serialize"));
        meta.push("a1", format!("admissible={} ({})", traj.a1.admissible, traj.a1.explanation));
        meta.push("rates", rates_json(p));
        match fit_decay_rate(&traj, None) {
            Ok(fit) => meta.push("decay_fit", serde_json::to_string(&fit).expect("fit serializes")),
            Err(e) => meta.push("decay_fit", format!("unavailable ({e})")),
        }
        if *variant == Variant::PenalizedFeedback {
            let gamma = settings.gamma.or_else(|| crate::params::gamma_max(p).ok());
            match gamma {
                Some(g) if traj.a1.admissible => {
                    let v = energy_monitor(&traj, g);
                    meta.push("energy_monitor", format!("gamma={} {}", fmt_f64(g), serde_json::to_string(&v).unwrap()));
                }
                _ => meta.push("energy_monitor", "skipped (admissibility or positive rate missing)"),
            }
        }
        match &traj.failure {
            None => meta.push("status", "ok"),
            Some(f) => {
                let msg = format!("{stem}: step {}: {}", f.step, f.reason);
                meta.push("status", format!("failed at step {}: {}", f.step, f.reason));
                outcome.failures.push(msg);
            }
        }

        let mut table = Table::new(&DECAY_COLUMNS);
        for (i, t) in traj.times.iter().enumerate() {
            table.push(vec![
                fmt_f64(*t),
                fmt_f64(traj.norms[i].l2),
                fmt_f64(traj.norms[i].l_inf),
                fmt_f64(traj.controls[i]),
            ]);
        }
        let csv = out.join(format!("{stem}.csv"));
        write_csv(&csv, &meta, &table)?;
        outcome.files.push(csv);

        if settings.svg {
            let points: Vec<(f64, f64)> = traj.times.iter().copied().zip(traj.l2_norms()).collect();
            let chart = Chart {
                title: &stem,
                x_label: "t",
                y_label: "l2_norm",
                log_y: settings.log_y,
            };
            let path = out.join(format!("{stem}.svg"));
            std::fs::write(&path, line_chart(&chart, &points)).map_err(|e| Error::io(&path, e))?;
            outcome.files.push(path);
        }
    }
    Ok(outcome)
}

fn setup<'a>(cfg: &ExperimentConfig, gain: crate::analysis::GainRule, profile: &'a crate::analysis::Profile, exec: ExecMode) -> Result<StudySetup<'a>> {
    Ok(StudySetup {
        base: cfg.model,
        gain,
        grid: cfg.grid()?,
        profile,
        projection: cfg.projection,
        newton: cfg.solver,
        exec,
    })
}

pub fn run_convergence(
    cfg: &ExperimentConfig,
    settings: &ConvergenceSettings,
    out: &Path,
    exec: ExecMode,
) -> Result<RunOutcome> {
    let initial = cfg.initial;
    let profile = move |x: f64| initial.eval(x);
    let setup = setup(cfg, settings.gain, &profile, exec)?;
    let sizes = cfg.mesh.n_elements.as_vec();
    let report = space_convergence_study(&setup, &sizes, settings.reference_n_elements, settings.epsilon_rule)?;

    let mut meta = base_metadata(cfg);
    meta.push("reference", report.reference.clone());
    let row_rates: Vec<String> = report
        .rows
        .iter()
        .map(|r| rates_json(&cfg.model.with_penalty(r.epsilon, settings.gain.gain(r.epsilon))))
        .collect();
    meta.push("rates", format!("[{}]", row_rates.join(",")));

    let mut outcome = RunOutcome::default();
    let mut table = Table::new(&CONVERGENCE_COLUMNS);
    for r in &report.rows {
        if r.status != crate::analysis::RowStatus::Ok {
            outcome.failures.push(format!("convergence row h={}: {}", r.h, r.status.as_str()));
        }
        table.push(vec![
            fmt_f64(r.h),
            fmt_f64(r.epsilon),
            fmt_f64(r.k),
            fmt_f64(r.error_l2),
            fmt_f64(r.error_linf),
            fmt_opt(r.order_l2),
            fmt_opt(r.order_linf),
            fmt_f64(r.control_error_linf),
            fmt_opt(r.order_control),
            r.status.as_str().to_string(),
        ]);
    }
    meta.push("status", if outcome.failures.is_empty() { "ok".to_string() } else { outcome.failures.join("; ") });
    let csv = out.join("convergence.csv");
    write_csv(&csv, &meta, &table)?;
    outcome.files.push(csv);
    Ok(outcome)
}

pub fn run_epsilon_study(
    cfg: &ExperimentConfig,
    settings: &EpsilonSettings,
    out: &Path,
    exec: ExecMode,
) -> Result<RunOutcome> {
    let initial = cfg.initial;
    let profile = move |x: f64| initial.eval(x);
    let setup = setup(cfg, settings.gain, &profile, exec)?;
    let mesh = MeshPartition::uniform(cfg.mesh.n_elements.as_vec()[0])?;
    let report = epsilon_cauchy_study(&setup, &mesh, &settings.epsilons)?;

    let mut meta = base_metadata(cfg);
    let row_rates: Vec<String> = report
        .rows
        .iter()
        .map(|r| rates_json(&cfg.model.with_penalty(r.epsilon, r.r)))
        .collect();
    meta.push("rates", format!("[{}]", row_rates.join(",")));
    meta.push(
        "columns",
        "state_* at the final time; diff_* and control_* as sup over time steps; diff_*_final at the final time",
    );

    let mut outcome = RunOutcome::default();
    let mut table = Table::new(&EPSILON_COLUMNS);
    for r in &report.rows {
        if r.status != crate::analysis::RowStatus::Ok {
            outcome.failures.push(format!("epsilon row {}: {}", r.epsilon, r.status.as_str()));
        }
        table.push(vec![
            fmt_f64(r.epsilon),
            fmt_f64(r.r),
            fmt_f64(r.state_l2),
            fmt_f64(r.state_linf),
            fmt_f64(r.control_linf),
            fmt_opt(r.diff_l2),
            fmt_opt(r.diff_linf),
            fmt_opt(r.control_diff_linf),
            fmt_opt(r.diff_l2_final),
            fmt_opt(r.diff_linf_final),
            r.status.as_str().to_string(),
        ]);
    }
    meta.push("status", if outcome.failures.is_empty() { "ok".to_string() } else { outcome.failures.join("; ") });
    let csv = out.join("epsilon_study.csv");
    write_csv(&csv, &meta, &table)?;
    outcome.files.push(csv);
    Ok(outcome)
}

/// Dispatches on the experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, exec: ExecMode) -> Result<RunOutcome> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    match &cfg.experiment {
        Experiment::Decay(s) => run_decay(cfg, s, out, exec),
        Experiment::Convergence(s) => run_convergence(cfg, s, out, exec),
        Experiment::EpsilonStudy(s) => run_epsilon_study(cfg, s, out, exec),
    }
}
