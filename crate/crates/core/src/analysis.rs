//! Post-processing of trajectories and the two refinement studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_ordered, ExecMode};
use crate::fem::{assemble, project_initial, AssembledSystem, Projection, StateVector};
use crate::mesh::MeshPartition;
use crate::params::ModelParams;
use crate::solver::{simulate, NewtonOptions, StateTrajectory, TimeGrid, Variant};

/// Initial data shared by every run of a study.
pub type Profile = dyn Fn(f64) -> f64 + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub gamma_fit: f64,
    pub window: (f64, f64),
    /// RMS misfit of the log-linear fit.
    pub residual: f64,
    pub samples: usize,
    /// Samples inside the window dropped because the norm had underflowed.
    pub trimmed: usize,
}

/// Least-squares slope of `ln‖Y^n‖` against `t_n` over `window`;
/// `gamma_fit = −slope`.
pub fn fit_decay_samples(times: &[f64], l2: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let floor = 100.0 * f64::EPSILON * l2.first().copied().unwrap_or(0.0);
    let mut trimmed = 0;
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(l2) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if v > floor && v > 0.0 {
            pts.push((t, v.ln()));
        } else {
            trimmed += 1;
        }
    }
    if pts.len() < 3 {
        return Err(Error::TooFewSamples(pts.len()));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - lm)).sum();
    let slope = sxy / sxx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - (lm + slope * (p.0 - tm))).powi(2))
        .sum();
    Ok(DecayFit {
        gamma_fit: -slope,
        window,
        residual: (rss / n).sqrt(),
        samples: pts.len(),
        trimmed,
    })
}

/// Default window `[0.1 T, T]` skips the initial transient.
pub fn default_window(traj: &StateTrajectory) -> (f64, f64) {
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    (0.1 * t_end, t_end)
}

pub fn fit_decay_rate(traj: &StateTrajectory, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let window = window.unwrap_or_else(|| default_window(traj));
    fit_decay_samples(&traj.times, &traj.l2_norms(), window)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyVerdict {
    pub passed: bool,
    pub first_violation: Option<usize>,
    /// `max_n ‖Y^n‖² / (e^{−2γt_n}‖Y⁰‖²)` over nonzero bounds.
    pub worst_ratio: f64,
}

/// Checks `‖Y^n‖² ≤ e^{−2γ t_n} ‖Y⁰‖²` at every sample.
pub fn energy_monitor_samples(times: &[f64], l2: &[f64], gamma: f64) -> EnergyVerdict {
    let e0 = l2.first().map(|v| v * v).unwrap_or(0.0);
    let mut first_violation = None;
    let mut worst_ratio: f64 = 0.0;
    for (n, (&t, &v)) in times.iter().zip(l2).enumerate() {
        let bound = (-2.0 * gamma * t).exp() * e0;
        let lhs = v * v;
        // one ulp-scale allowance for the n = 0 identity
        if lhs > bound * (1.0 + 4.0 * f64::EPSILON) && first_violation.is_none() {
            first_violation = Some(n);
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(lhs / bound);
        }
    }
    EnergyVerdict {
        passed: first_violation.is_none(),
        first_violation,
        worst_ratio,
    }
}

pub fn energy_monitor(traj: &StateTrajectory, gamma: f64) -> EnergyVerdict {
    energy_monitor_samples(&traj.times, &traj.l2_norms(), gamma)
}

/// Nodal sampling of a fine-mesh state at the nodes of a nested coarse mesh.
pub fn restrict_to_coarse(
    fine: &StateVector,
    fine_mesh: &MeshPartition,
    coarse: &MeshPartition,
) -> Result<StateVector> {
    if fine.len() != fine_mesh.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: fine_mesh.n_dofs(),
            actual: fine.len(),
        });
    }
    let m = fine_mesh.nesting_factor(coarse)?;
    Ok(StateVector(
        (1..=coarse.n_dofs()).map(|j| fine.0[j * m - 1]).collect(),
    ))
}

/// P1 interpolation of a coarse state onto a finer mesh.
pub fn prolong_to_fine(coarse: &StateVector, coarse_mesh: &MeshPartition, fine: &MeshPartition) -> StateVector {
    StateVector(
        fine.nodes()[1..]
            .iter()
            .map(|&x| coarse.value_at(coarse_mesh, x))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
}

/// `e = coarse − restrict(reference)`, measured as `√(eᵀMe)` and `max |e_i|`
/// on the coarse mesh.
pub fn error_vs_reference(
    coarse: &StateVector,
    reference: &StateVector,
    reference_mesh: &MeshPartition,
    coarse_system: &AssembledSystem,
) -> Result<ErrorNorms> {
    coarse_system.check_len(coarse)?;
    let r = restrict_to_coarse(reference, reference_mesh, &coarse_system.mesh)?;
    let e: Vec<f64> = coarse.0.iter().zip(&r.0).map(|(a, b)| a - b).collect();
    Ok(ErrorNorms {
        l2: coarse_system.mass.quad_form(&e).max(0.0).sqrt(),
        linf: e.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

/// `order_j = ln(e_{j−1}/e_j) / ln(h_{j−1}/h_j)`; `None` for the first entry
/// and wherever an error is zero or non-finite.
pub fn observed_orders(errors: &[f64], hs: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != hs.len() {
        return Err(Error::DimensionMismatch {
            expected: hs.len(),
            actual: errors.len(),
        });
    }
    if hs.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::config("hs", "mesh sizes must be strictly decreasing"));
    }
    let mut out = vec![None];
    for j in 1..errors.len() {
        let (a, b) = (errors[j - 1], errors[j]);
        let ok = a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite();
        out.push(ok.then(|| (a / b).ln() / (hs[j - 1] / hs[j]).ln()));
    }
    Ok(out)
}

/// Gain as a function of the penalty parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainRule {
    /// `r = √ε`
    SqrtEps,
    /// `r = √(2ε)`
    #[serde(rename = "sqrt_2eps")]
    Sqrt2Eps,
    Constant(f64),
}

impl GainRule {
    pub fn gain(&self, epsilon: f64) -> f64 {
        match *self {
            GainRule::SqrtEps => epsilon.sqrt(),
            GainRule::Sqrt2Eps => (2.0 * epsilon).sqrt(),
            GainRule::Constant(r) => r,
        }
    }
}

/// `ε = c · hˡ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRule {
    pub c: f64,
    pub l: f64,
}

impl EpsilonRule {
    pub fn epsilon(&self, h: f64) -> f64 {
        self.c * h.powf(self.l)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    #[default]
    Ok,
    Failed,
    DependsOnFailed,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed => "failed",
            RowStatus::DependsOnFailed => "depends_on_failed",
        }
    }
}

/// What the studies keep from each simulation.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub final_state: StateVector,
    pub controls: Vec<f64>,
    pub final_l2: f64,
    pub final_linf: f64,
    pub failure: Option<String>,
}

impl RunSummary {
    fn from_trajectory(traj: &StateTrajectory) -> Self {
        let last = traj.norms.last().copied().unwrap_or_default();
        RunSummary {
            final_state: traj.final_state().clone(),
            controls: traj.controls.clone(),
            final_l2: last.l2,
            final_linf: last.l_inf,
            failure: traj.failure.as_ref().map(|f| format!("step {}: {}", f.step, f.reason)),
        }
    }

    fn failed(reason: String) -> Self {
        RunSummary {
            final_state: StateVector(Vec::new()),
            controls: Vec::new(),
            final_l2: f64::NAN,
            final_linf: f64::NAN,
            failure: Some(reason),
        }
    }
}

/// `sup_n |a_n − b_n|` over the common prefix.
pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn run_penalized(
    params: &ModelParams,
    system: &AssembledSystem,
    profile: &Profile,
    projection: Projection,
    grid: &TimeGrid,
    opts: &NewtonOptions,
) -> (Option<StateTrajectory>, Option<String>) {
    let y0 = project_initial(system, profile, projection);
    match simulate(params, system, &y0, grid, Variant::PenalizedFeedback, opts) {
        Ok(t) => {
            let fail = t.failure.as_ref().map(|f| format!("step {}: {}", f.step, f.reason));
            (Some(t), fail)
        }
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Shared inputs of a refinement or penalty study.
pub struct StudySetup<'a> {
    pub base: ModelParams,
    pub gain: GainRule,
    pub grid: TimeGrid,
    pub profile: &'a Profile,
    pub projection: Projection,
    pub newton: NewtonOptions,
    pub exec: ExecMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub epsilon: f64,
    pub k: f64,
    pub error_l2: f64,
    pub error_linf: f64,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
    pub control_error_linf: f64,
    pub order_control: Option<f64>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub reference: String,
}

/// Spatial refinement study with `ε = c hˡ` per row.
///
/// State errors compare each coarse run against a run on the reference mesh
/// with the same `ε` and `r`. Control errors compare against one run on the
/// reference mesh with the rule evaluated at the reference size.
pub fn space_convergence_study(
    setup: &StudySetup<'_>,
    n_elements: &[usize],
    reference_n: usize,
    rule: EpsilonRule,
) -> Result<ConvergenceReport> {
    if n_elements.is_empty() {
        return Err(Error::config("mesh.n_elements", "empty mesh list"));
    }
    let reference_mesh = MeshPartition::uniform(reference_n)?;
    let meshes = n_elements
        .iter()
        .map(|&n| MeshPartition::uniform(n))
        .collect::<Result<Vec<_>>>()?;
    for (i, m) in meshes.iter().enumerate() {
        if i > 0 && m.n_elements() != 2 * meshes[i - 1].n_elements() {
            return Err(Error::config(
                "mesh.n_elements",
                "element counts must double from row to row",
            ));
        }
        reference_mesh
            .nesting_factor(m)
            .map_err(|e| Error::config("experiment.reference_n_elements", e.to_string()))?;
    }

    // jobs: (mesh, epsilon); the last one is the control reference
    let mut jobs: Vec<(MeshPartition, f64)> = Vec::new();
    for m in &meshes {
        let eps = rule.epsilon(m.h());
        jobs.push((m.clone(), eps));
        jobs.push((reference_mesh.clone(), eps));
    }
    jobs.push((reference_mesh.clone(), rule.epsilon(reference_mesh.h())));

    let reference_system = assemble(&reference_mesh);
    let results = map_ordered(&jobs, setup.exec, |(mesh, eps)| {
        let own;
        let system = if mesh.n_elements() == reference_n {
            &reference_system
        } else {
            own = assemble(mesh);
            &own
        };
        let params = setup.base.with_penalty(*eps, setup.gain.gain(*eps));
        match run_penalized(&params, system, setup.profile, setup.projection, &setup.grid, &setup.newton) {
            (Some(t), _) => RunSummary::from_trajectory(&t),
            (None, reason) => RunSummary::failed(reason.unwrap_or_default()),
        }
    });

    let control_ref = results.last().unwrap();
    let mut rows = Vec::with_capacity(meshes.len());
    for (i, mesh) in meshes.iter().enumerate() {
        let coarse = &results[2 * i];
        let reference = &results[2 * i + 1];
        let eps = jobs[2 * i].1;
        let mut row = ConvergenceRow {
            h: mesh.h(),
            epsilon: eps,
            k: setup.grid.k,
            error_l2: f64::NAN,
            error_linf: f64::NAN,
            order_l2: None,
            order_linf: None,
            control_error_linf: f64::NAN,
            order_control: None,
            status: RowStatus::Ok,
        };
        if coarse.failure.is_some() || reference.failure.is_some() {
            row.status = RowStatus::Failed;
        } else {
            let system = assemble(mesh);
            let e = error_vs_reference(&coarse.final_state, &reference.final_state, &reference_mesh, &system)?;
            row.error_l2 = e.l2;
            row.error_linf = e.linf;
            if control_ref.failure.is_none() {
                row.control_error_linf = sup_diff(&coarse.controls, &control_ref.controls);
            }
        }
        rows.push(row);
    }

    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let col = |f: fn(&ConvergenceRow) -> f64| observed_orders(&rows.iter().map(f).collect::<Vec<_>>(), &hs);
    let o_l2 = col(|r| r.error_l2)?;
    let o_linf = col(|r| r.error_linf)?;
    let o_ctrl = col(|r| r.control_error_linf)?;
    for (i, row) in rows.iter_mut().enumerate() {
        row.order_l2 = o_l2[i];
        row.order_linf = o_linf[i];
        row.order_control = o_ctrl[i];
    }
    for i in 1..rows.len() {
        if rows[i].status == RowStatus::Ok && rows[i - 1].status != RowStatus::Ok {
            rows[i].status = RowStatus::DependsOnFailed;
        }
    }

    Ok(ConvergenceReport {
        rows,
        reference: format!(
            "state: same scheme on {reference_n} elements with the row's epsilon; \
             control: {reference_n} elements with epsilon = {}·h_ref^{} (r from the gain rule)",
            rule.c, rule.l
        ),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub r: f64,
    /// Final-time norms.
    pub state_l2: f64,
    pub state_linf: f64,
    /// `sup_n |u(t_n)|`.
    pub control_linf: f64,
    /// `sup_n` of the norms of `Y_i^n − Y_{i−1}^n`.
    pub diff_l2: Option<f64>,
    pub diff_linf: Option<f64>,
    /// `sup_n |u_i(t_n) − u_{i−1}(t_n)|`.
    pub control_diff_linf: Option<f64>,
    /// Same differences at the final time only.
    pub diff_l2_final: Option<f64>,
    pub diff_linf_final: Option<f64>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonStudyReport {
    pub rows: Vec<EpsilonRow>,
}

/// Runs the penalized problem for each `ε` on one mesh and time grid and
/// compares neighbouring rows.
pub fn epsilon_cauchy_study(
    setup: &StudySetup<'_>,
    mesh: &MeshPartition,
    epsilons: &[f64],
) -> Result<EpsilonStudyReport> {
    if epsilons.is_empty() {
        return Err(Error::config("experiment.epsilons", "empty list"));
    }
    if let Some(&bad) = epsilons.iter().find(|&&e| !(e.is_finite() && e > 0.0)) {
        return Err(Error::config("experiment.epsilons", format!("non-positive value {bad}")));
    }
    if epsilons.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::config("experiment.epsilons", "values must be non-increasing"));
    }
    let system = assemble(mesh);
    let runs = map_ordered(epsilons, setup.exec, |&eps| {
        let params = setup.base.with_penalty(eps, setup.gain.gain(eps));
        run_penalized(&params, &system, setup.profile, setup.projection, &setup.grid, &setup.newton)
    });

    let mut rows: Vec<EpsilonRow> = Vec::with_capacity(runs.len());
    for (i, (&eps, (traj, fail))) in epsilons.iter().zip(&runs).enumerate() {
        let mut row = EpsilonRow {
            epsilon: eps,
            r: setup.gain.gain(eps),
            state_l2: f64::NAN,
            state_linf: f64::NAN,
            control_linf: f64::NAN,
            diff_l2: None,
            diff_linf: None,
            control_diff_linf: None,
            diff_l2_final: None,
            diff_linf_final: None,
            status: RowStatus::Ok,
        };
        let this = match (traj, fail) {
            (Some(t), None) => t,
            _ => {
                row.status = RowStatus::Failed;
                rows.push(row);
                continue;
            }
        };
        let last = this.norms.last().copied().unwrap_or_default();
        row.state_l2 = last.l2;
        row.state_linf = last.l_inf;
        row.control_linf = this.control_sup();
        if i > 0 {
            match &runs[i - 1] {
                (Some(prev), None) => {
                    let (mut sup_l2, mut sup_linf) = (0.0_f64, 0.0_f64);
                    let mut fin = ErrorNorms::default();
                    for (a, b) in this.states.iter().zip(&prev.states) {
                        let d: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect();
                        fin = ErrorNorms {
                            l2: system.mass.quad_form(&d).max(0.0).sqrt(),
                            linf: d.iter().fold(0.0, |m, v| m.max(v.abs())),
                        };
                        sup_l2 = sup_l2.max(fin.l2);
                        sup_linf = sup_linf.max(fin.linf);
                    }
                    row.diff_l2 = Some(sup_l2);
                    row.diff_linf = Some(sup_linf);
                    row.diff_l2_final = Some(fin.l2);
                    row.diff_linf_final = Some(fin.linf);
                    row.control_diff_linf = Some(sup_diff(&this.controls, &prev.controls));
                }
                _ => row.status = RowStatus::DependsOnFailed,
            }
        }
        rows.push(row);
    }
    Ok(EpsilonStudyReport { rows })
}
