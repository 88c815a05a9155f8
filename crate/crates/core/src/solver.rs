//! Backward Euler in time, Newton per step.
//!
//! The step residual for the penalized problem is
//!
//! ```text
//! F(Y) = M(Y − Y_prev)/k + νKY + (ν/ε)Y_N e_N + δ c(Y) − αMY + (νr/ε)(w·Y) e_N
//! ```
//!
//! where `c(Y)_i = ∫Y³φ_i` and the last term is `−(ν/ε) u e_N` with the
//! feedback `u = −r w·Y` evaluated at the new time level. Its derivative is a
//! symmetric tridiagonal core plus the single dense row `(νr/ε) e_N wᵀ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{cubic_jacobian, cubic_term, norms, AssembledSystem, Norms, StateVector};
use crate::linalg::{norm2, solve_structured, RankOne, SymTridiag};
use crate::params::{check_a1, A1Verdict, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub k: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    /// Grid with step `k` reaching `t_final`; `t_final / k` must be an integer
    /// up to round-off.
    pub fn new(k: f64, t_final: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::ParameterDomain {
                name: "k",
                value: k,
                reason: "time step must be positive",
            });
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::ParameterDomain {
                name: "t_final",
                value: t_final,
                reason: "final time must be positive",
            });
        }
        let steps = (t_final / k).round();
        if (steps * k - t_final).abs() > 1e-9 * t_final {
            return Err(Error::ParameterDomain {
                name: "k",
                value: k,
                reason: "final time is not an integer multiple of the time step",
            });
        }
        Ok(TimeGrid {
            k,
            n_steps: steps as usize,
        })
    }

    pub fn from_steps(t_final: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::ParameterDomain {
                name: "n_steps",
                value: 0.0,
                reason: "need at least one step",
            });
        }
        TimeGrid::new(t_final / n_steps as f64, t_final)
    }

    pub fn t_final(&self) -> f64 {
        self.k * self.n_steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.k
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Robin/penalty boundary with the implicit feedback control.
    #[default]
    PenalizedFeedback,
    /// Homogeneous Dirichlet at both ends, no control.
    UncontrolledDirichlet,
}

/// Time level at which the feedback enters the step equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlTreatment {
    /// `u(t_n)` from `Y^n`: adds a rank-one row to the Jacobian.
    #[default]
    Implicit,
    /// `u` from `Y^{n-1}`: Jacobian stays tridiagonal.
    Lagged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub control: ControlTreatment,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 25,
            control: ControlTreatment::Implicit,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::ParameterDomain {
                name: "tol",
                value: self.tol,
                reason: "Newton tolerance must be positive",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::ParameterDomain {
                name: "max_iter",
                value: 0.0,
                reason: "need at least one Newton iteration",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub control_value: f64,
    pub converged: bool,
    /// `‖F‖₂` before the first update and after each update.
    pub residual_history: Vec<f64>,
}

/// Newton matrix: tridiagonal core plus the optional feedback row.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub core: SymTridiag,
    pub rank_one: Option<RankOne>,
}

impl Jacobian {
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = self.core.to_dense();
        if let Some(ro) = &self.rank_one {
            for (j, c) in ro.coeffs.iter().enumerate() {
                a[ro.row][j] += c;
            }
        }
        a
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        solve_structured(&self.core, self.rank_one.as_ref(), rhs)
    }
}

/// Feedback value `−r ∫ x Y dx`.
pub fn control_value(params: &ModelParams, system: &AssembledSystem, y: &StateVector) -> f64 {
    -params.r * system.moment_of(y)
}

/// One backward Euler step problem, specialised to a variant and a control
/// treatment.
struct StepProblem<'a> {
    params: &'a ModelParams,
    system: &'a AssembledSystem,
    k: f64,
    variant: Variant,
    control: ControlTreatment,
}

impl StepProblem<'_> {
    fn n_active(&self) -> usize {
        match self.variant {
            Variant::PenalizedFeedback => self.system.n_dofs(),
            Variant::UncontrolledDirichlet => self.system.n_dofs() - 1,
        }
    }

    fn residual(&self, y: &StateVector, y_prev: &StateVector) -> Vec<f64> {
        let ModelParams {
            nu,
            alpha,
            delta,
            r,
            epsilon,
        } = *self.params;
        let sys = self.system;
        let inv_k = 1.0 / self.k;
        let my = sys.mass.mul_vec(&y.0);
        let mp = sys.mass.mul_vec(&y_prev.0);
        let ky = sys.stiffness.mul_vec(&y.0);
        let cy = cubic_term(&sys.mesh, y);
        let mut f: Vec<f64> = (0..y.len())
            .map(|i| (my[i] - mp[i]) * inv_k + nu * ky[i] + delta * cy[i] - alpha * my[i])
            .collect();
        match self.variant {
            Variant::PenalizedFeedback => {
                let nb = sys.boundary_index();
                let penalty = nu / epsilon;
                let moment = match self.control {
                    ControlTreatment::Implicit => sys.moment_of(y),
                    ControlTreatment::Lagged => sys.moment_of(y_prev),
                };
                f[nb] += penalty * y.0[nb] + penalty * r * moment;
            }
            Variant::UncontrolledDirichlet => {
                f.truncate(self.n_active());
            }
        }
        f
    }

    fn jacobian(&self, y: &StateVector) -> Jacobian {
        let ModelParams {
            nu,
            alpha,
            delta,
            r,
            epsilon,
        } = *self.params;
        let sys = self.system;
        let mut core = sys.mass.scaled(1.0 / self.k - alpha);
        core.axpy(nu, &sys.stiffness);
        core.axpy(delta, &cubic_jacobian(&sys.mesh, y));
        match self.variant {
            Variant::PenalizedFeedback => {
                let nb = sys.boundary_index();
                core.diag[nb] += nu / epsilon;
                let rank_one = (self.control == ControlTreatment::Implicit && r != 0.0).then(|| {
                    let s = nu * r / epsilon;
                    RankOne {
                        row: nb,
                        coeffs: sys.moment.iter().map(|w| s * w).collect(),
                    }
                });
                Jacobian { core, rank_one }
            }
            Variant::UncontrolledDirichlet => Jacobian {
                core: core.truncated(self.n_active()),
                rank_one: None,
            },
        }
    }

    fn newton(&self, y_prev: &StateVector, opts: &NewtonOptions) -> Result<(StateVector, StepReport)> {
        let mut y = y_prev.clone();
        let n_active = self.n_active();
        let mut f = self.residual(&y, y_prev);
        let mut history = vec![norm2(&f)];
        let mut iterations = 0;
        let converged = loop {
            let delta = self.jacobian(&y).solve(&f)?;
            for (yi, di) in y.0[..n_active].iter_mut().zip(&delta) {
                *yi -= di;
            }
            iterations += 1;
            f = self.residual(&y, y_prev);
            let res = norm2(&f);
            history.push(res);
            if res <= opts.tol {
                break true;
            }
            if iterations >= opts.max_iter || !res.is_finite() {
                break false;
            }
        };
        let control_value = match self.variant {
            Variant::PenalizedFeedback => control_value(self.params, self.system, &y),
            Variant::UncontrolledDirichlet => 0.0,
        };
        let report = StepReport {
            newton_iterations: iterations,
            final_residual_norm: *history.last().unwrap(),
            control_value,
            converged,
            residual_history: history,
        };
        Ok((y, report))
    }
}

fn check_inputs(system: &AssembledSystem, y: &StateVector, y_prev: &StateVector, k: f64) -> Result<()> {
    system.check_len(y)?;
    system.check_len(y_prev)?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::ParameterDomain {
            name: "k",
            value: k,
            reason: "time step must be positive",
        });
    }
    Ok(())
}

/// Residual of the penalized step equations with implicit feedback.
pub fn residual(
    params: &ModelParams,
    system: &AssembledSystem,
    y: &StateVector,
    y_prev: &StateVector,
    k: f64,
) -> Result<Vec<f64>> {
    check_inputs(system, y, y_prev, k)?;
    Ok(StepProblem {
        params,
        system,
        k,
        variant: Variant::PenalizedFeedback,
        control: ControlTreatment::Implicit,
    }
    .residual(y, y_prev))
}

/// Derivative of [`residual`] with respect to `y`.
pub fn jacobian(params: &ModelParams, system: &AssembledSystem, y: &StateVector, k: f64) -> Result<Jacobian> {
    check_inputs(system, y, y, k)?;
    Ok(StepProblem {
        params,
        system,
        k,
        variant: Variant::PenalizedFeedback,
        control: ControlTreatment::Implicit,
    }
    .jacobian(y))
}

/// One backward Euler step of the penalized scheme, started from `y_prev`.
///
/// Non-convergence is reported through [`StepReport::converged`]; only a
/// failing linear solve is an error.
pub fn newton_solve(
    params: &ModelParams,
    system: &AssembledSystem,
    y_prev: &StateVector,
    k: f64,
    opts: &NewtonOptions,
) -> Result<(StateVector, StepReport)> {
    check_inputs(system, y_prev, y_prev, k)?;
    opts.validate()?;
    StepProblem {
        params,
        system,
        k,
        variant: Variant::PenalizedFeedback,
        control: opts.control,
    }
    .newton(y_prev, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFailure {
    /// Index of the time level that could not be computed.
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub params: ModelParams,
    pub variant: Variant,
    pub a1: A1Verdict,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub controls: Vec<f64>,
    pub norms: Vec<Norms>,
    /// One per step; `step_reports[n - 1]` produced `states[n]`.
    pub step_reports: Vec<StepReport>,
    pub failure: Option<StepFailure>,
}

impl StateTrajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn l2_norms(&self) -> Vec<f64> {
        self.norms.iter().map(|n| n.l2).collect()
    }

    /// `sup_n |u(t_n)|`.
    pub fn control_sup(&self) -> f64 {
        self.controls.iter().fold(0.0, |m, u| m.max(u.abs()))
    }
}

/// Runs the time loop from `y0` (already in the discrete space).
///
/// For [`Variant::UncontrolledDirichlet`] the boundary coefficient of `y0` is
/// zeroed and stays zero. A failed step truncates the trajectory and records
/// a [`StepFailure`].
pub fn simulate(
    params: &ModelParams,
    system: &AssembledSystem,
    y0: &StateVector,
    grid: &TimeGrid,
    variant: Variant,
    opts: &NewtonOptions,
) -> Result<StateTrajectory> {
    system.check_len(y0)?;
    opts.validate()?;
    let a1 = check_a1(params)?;
    let problem = StepProblem {
        params,
        system,
        k: grid.k,
        variant,
        control: opts.control,
    };

    let mut y = y0.clone();
    if variant == Variant::UncontrolledDirichlet {
        let nb = system.boundary_index();
        y.0[nb] = 0.0;
    }
    let control_of = |y: &StateVector| match variant {
        Variant::PenalizedFeedback => control_value(params, system, y),
        Variant::UncontrolledDirichlet => 0.0,
    };

    let cap = grid.n_steps + 1;
    let mut traj = StateTrajectory {
        params: *params,
        variant,
        a1,
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        controls: Vec::with_capacity(cap),
        norms: Vec::with_capacity(cap),
        step_reports: Vec::with_capacity(grid.n_steps),
        failure: None,
    };
    traj.times.push(0.0);
    traj.controls.push(control_of(&y));
    traj.norms.push(norms(system, &y)?);
    traj.states.push(y);

    for n in 1..=grid.n_steps {
        let prev = traj.states.last().unwrap();
        match problem.newton(prev, opts) {
            Ok((next, report)) => {
                if !report.converged {
                    traj.failure = Some(StepFailure {
                        step: n,
                        reason: Error::NewtonDiverged {
                            iterations: report.newton_iterations,
                            residual: report.final_residual_norm,
                        }
                        .to_string(),
                    });
                    traj.step_reports.push(report);
                    break;
                }
                traj.times.push(grid.time(n));
                traj.controls.push(report.control_value);
                traj.norms.push(norms(system, &next)?);
                traj.states.push(next);
                traj.step_reports.push(report);
            }
            Err(e) => {
                traj.failure = Some(StepFailure {
                    step: n,
                    reason: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(traj)
}
