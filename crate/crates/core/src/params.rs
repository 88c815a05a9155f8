//! Model coefficients and the closed-form stability bounds attached to them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `‖x‖_{L⁴(0,1)} · ‖x‖_{L^{4/3}(0,1)} = (1/5)^{1/4} (3/7)^{3/4}`.
pub fn moment_norm_product() -> f64 {
    0.2_f64.powf(0.25) * (3.0_f64 / 7.0).powf(0.75)
}

/// Coefficients of the penalized Chafee–Infante problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Diffusion coefficient ν > 0.
    pub nu: f64,
    /// Linear reaction coefficient α > 0.
    pub alpha: f64,
    /// Cubic reaction coefficient δ ≥ 0 (δ = 0 gives the linear problem).
    pub delta: f64,
    /// Feedback gain r ≥ 0.
    pub r: f64,
    /// Penalty parameter ε > 0.
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(nu: f64, alpha: f64, delta: f64, r: f64, epsilon: f64) -> Result<Self> {
        let p = ModelParams {
            nu,
            alpha,
            delta,
            r,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("nu", self.nu)?;
        positive("alpha", self.alpha)?;
        positive("epsilon", self.epsilon)?;
        non_negative("delta", self.delta)?;
        non_negative("r", self.r)

    }

    /// Copy with a different penalty parameter and gain.
    pub fn with_penalty(self, epsilon: f64, r: f64) -> Self {
        ModelParams { epsilon, r, ..self }
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

/// Outcome of the admissibility check `r² < 3ε` and `α/ν ≤ 2(3ε − r²)/(3ε)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct A1Verdict {
    pub admissible: bool,
    pub gain_ok: bool,
    pub ratio_ok: bool,
    pub explanation: String,
}

pub fn check_a1(params: &ModelParams) -> Result<A1Verdict> {
    params.validate()?;
    let ModelParams {
        nu,
        alpha,
        r,
        epsilon,
        ..
    } = *params;
    let r2 = r * r;
    let three_eps = 3.0 * epsilon;
    let ratio = alpha / nu;
    let bound = 2.0 * (three_eps - r2) / three_eps;
    let gain_ok = r2 < three_eps;
    let ratio_ok = ratio <= bound;

    let mut failures = Vec::new();
    if !gain_ok {
        failures.push(format!("r² = {r2:e} is not < 3ε = {three_eps:e}"));
    }
    if !ratio_ok {
        failures.push(format!(
            "α/ν = {ratio:e} exceeds 2(3ε − r²)/(3ε) = {bound:e}"
        ));
    }
    let explanation = if failures.is_empty() {
        format!("r² = {r2:e} < 3ε = {three_eps:e}; α/ν = {ratio:e} ≤ {bound:e}")
    } else {
        failures.join("; ")
    };
    Ok(A1Verdict {
        admissible: gain_ok && ratio_ok,
        gain_ok,
        ratio_ok,
        explanation,
    })
}

fn gamma_bound(params: &ModelParams) -> f64 {
    let ModelParams {
        nu,
        alpha,
        r,
        epsilon,
        ..
    } = *params;
    2.0 * nu - 2.0 * nu * r * r / (3.0 * epsilon) - alpha
}

/// Largest decay rate `2ν − 2νr²/(3ε) − α` of the penalized problem.
pub fn gamma_max(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let g = gamma_bound(params);
    if g > 0.0 {
        Ok(g)
    } else {
        Err(Error::NoAdmissibleRate(g))
    }
}

/// The two competing terms of the penalized energy constant
/// `β = min{2ν − γ − 2νr²/(3ε) − α, ν/ε}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyConstant {
    pub value: f64,
    pub interior_term: f64,
    pub boundary_term: f64,
}

impl EnergyConstant {
    /// True when γ sits on the rate bound and the interior term vanishes.
    pub fn is_degenerate(&self) -> bool {
        self.value <= 0.0
    }
}

pub fn beta(params: &ModelParams, gamma: f64) -> Result<EnergyConstant> {
    let gmax = gamma_max(params)?;
    if !(gamma > 0.0 && gamma <= gmax) {
        return Err(Error::ParameterDomain {
            name: "gamma",
            value: gamma,
            reason: "must lie in (0, gamma_max]",
        });
    }
    // written as gamma_max − γ so the boundary case is exactly zero
    let interior_term = gmax - gamma;
    let boundary_term = params.nu / params.epsilon;
    Ok(EnergyConstant {
        value: interior_term.min(boundary_term),
        interior_term,
        boundary_term,
    })
}

/// Rate data for the unpenalized Dirichlet feedback problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirichletBounds {
    pub gamma_max: f64,
    pub r_max: f64,
    nu: f64,
    alpha: f64,
    delta: f64,
    r: f64,
}

impl DirichletBounds {
    /// `β* = min{2ν − α − γ(r+3)/3 − (rα + r²ν)/3, δ(1 − r‖x‖_{L⁴}‖x‖_{L^{4/3}})}`.
    pub fn beta_star(&self, gamma: f64) -> f64 {
        let Self {
            nu, alpha, delta, r, ..
        } = *self;
        let first = 2.0 * nu - alpha - gamma * (r + 3.0) / 3.0 - (r * alpha + r * r * nu) / 3.0;
        let second = delta * (1.0 - r * moment_norm_product());
        first.min(second)
    }
}

pub fn dirichlet_r_max() -> f64 {
    (1.0 / moment_norm_product()).min(6.0_f64.sqrt())
}

pub fn dirichlet_rate_bounds(params: &ModelParams) -> Result<DirichletBounds> {
    params.validate()?;
    let ModelParams {
        nu,
        alpha,
        delta,
        r,
        ..
    } = *params;
    let r_max = dirichlet_r_max();
    if r >= r_max {
        return Err(Error::Inadmissible(format!(
            "gain r = {r} is not below {r_max:.6}"
        )));
    }
    let ratio_bound = (6.0 - r * r) / (r + 3.0);
    if alpha / nu > ratio_bound {
        return Err(Error::Inadmissible(format!(
            "α/ν = {} exceeds (6 − r²)/(r + 3) = {ratio_bound}",
            alpha / nu
        )));
    }
    let gamma_max = 3.0 * (2.0 * nu - alpha - (r * alpha + r * r * nu) / 3.0) / (r + 3.0);
    Ok(DirichletBounds {
        gamma_max,
        r_max,
        nu,
        alpha,
        delta,
        r,
    })
}

/// Everything an experiment log needs about admissibility and rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub a1_satisfied: bool,
    pub a1_explanation: String,
    /// Raw value of `2ν − 2νr²/(3ε) − α`, reported even when non-positive.
    pub gamma_max: f64,
    pub gamma_max_positive: bool,
    /// Rate at which `beta` and `beta_star` were evaluated.
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_dirichlet_max: Option<f64>,
    pub beta_star: Option<f64>,
    pub r_max_dirichlet: f64,
}

impl RateReport {
    /// Evaluates all rates; `β` and `β*` use half of their respective rate
    /// bounds unless `gamma` is given.
    pub fn new(params: &ModelParams, gamma: Option<f64>) -> Result<Self> {
        let a1 = check_a1(params)?;
        let raw = gamma_bound(params);
        let positive = raw > 0.0;
        let chosen = if positive {
            Some(gamma.unwrap_or(0.5 * raw))
        } else {
            None
        };
        let beta = match chosen {
            Some(g) if a1.admissible => beta(params, g).ok().map(|b| b.value),
            _ => None,
        };
        let dirichlet = dirichlet_rate_bounds(params).ok();
        let beta_star = dirichlet.and_then(|d| {
            let g = gamma.unwrap_or(0.5 * d.gamma_max);
            (d.gamma_max > 0.0 && g > 0.0 && g <= d.gamma_max).then(|| d.beta_star(g))
        });
        Ok(RateReport {
            a1_satisfied: a1.admissible,
            a1_explanation: a1.explanation,
            gamma_max: raw,
            gamma_max_positive: positive,
            gamma: chosen,
            beta,
            gamma_dirichlet_max: dirichlet.map(|d| d.gamma_max),
            beta_star,
            r_max_dirichlet: dirichlet_r_max(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example1() -> ModelParams {
        ModelParams::new(0.1, 0.13, 0.13, 0.1, 0.01).unwrap()
    }

    #[test]
    fn a1_example1_admissible() {
        let v = check_a1(&example1()).unwrap();
        assert!(v.admissible, "{}", v.explanation);
    }

    #[test]
    fn a1_fails_for_small_diffusion() {
        let p = ModelParams::new(0.01, 0.1, 0.1, 0.002_f64.sqrt(), 0.001).unwrap();
        let v = check_a1(&p).unwrap();
        assert!(v.gain_ok);
        assert!(!v.ratio_ok);
        assert!(!v.admissible);
        assert!(v.explanation.contains("α/ν"));
    }

    #[test]
    fn a1_zero_gain_reduces_to_ratio_two() {
        let p = ModelParams::new(0.5, 1.0, 1.0, 0.0, 0.3).unwrap();
        assert!(check_a1(&p).unwrap().admissible);
        let p = ModelParams::new(0.5, 1.01, 1.0, 0.0, 0.3).unwrap();
        assert!(!check_a1(&p).unwrap().admissible);
    }

    #[test]
    fn a1_equality_is_admissible() {
        // r = 0: bound is α/ν ≤ 2
        let p = ModelParams::new(0.25, 0.5, 1.0, 0.0, 1.0).unwrap();
        assert!(check_a1(&p).unwrap().ratio_ok);
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        assert!(matches!(
            ModelParams::new(0.0, 0.1, 0.1, 0.1, 0.1),
            Err(Error::ParameterDomain { name: "nu", .. })
        ));
        let mut p = example1();
        p.epsilon = -1.0;
        assert!(matches!(
            check_a1(&p),
            Err(Error::ParameterDomain { name: "epsilon", .. })
        ));
    }

    #[test]
    fn gamma_max_values() {
        let g = gamma_max(&example1()).unwrap();
        assert!((g - 0.01 / 3.0).abs() < 1e-15, "{g}");
        let p = ModelParams::new(0.1, 0.1, 0.1, 0.0, 0.01).unwrap();
        assert!((gamma_max(&p).unwrap() - 0.1).abs() < 1e-15);
        let p = ModelParams::new(0.1, 0.2, 0.13, 0.1, 0.01).unwrap();
        assert!(matches!(gamma_max(&p), Err(Error::NoAdmissibleRate(_))));
    }

    #[test]
    fn beta_values() {
        let b = beta(&example1(), 0.001).unwrap();
        assert!((b.value - (0.01 / 3.0 - 0.001)).abs() < 1e-15);
        assert_eq!(b.boundary_term, 10.0);

        let p = ModelParams::new(1.0, 0.5, 1.0, 0.0, 1.0).unwrap();
        assert!((beta(&p, 0.5).unwrap().value - 1.0).abs() < 1e-15);

        let p = example1();
        let g = gamma_max(&p).unwrap();
        let b = beta(&p, g).unwrap();
        assert_eq!(b.interior_term, 0.0);
        assert!(b.is_degenerate());

        assert!(beta(&p, 0.0).is_err());
        assert!(beta(&p, 2.0 * g).is_err());
    }

    #[test]
    fn dirichlet_bounds() {
        let p = ModelParams::new(0.1, 0.13, 0.13, 0.0, 0.01).unwrap();
        let d = dirichlet_rate_bounds(&p).unwrap();
        assert!((d.gamma_max - 0.07).abs() < 1e-15);
        assert!((d.r_max - 6.0_f64.sqrt()).abs() < 1e-15);
        assert!((1.0 / moment_norm_product() - 2.8233).abs() < 1e-3);
        assert!((moment_norm_product() - 0.3542).abs() < 1e-3);

        let p = ModelParams::new(0.1, 0.13, 0.13, 3.0, 0.01).unwrap();
        assert!(matches!(
            dirichlet_rate_bounds(&p),
            Err(Error::Inadmissible(_))
        ));
        // β* at γ = 0 with r = 0 is min{2ν − α, δ}
        assert!((d.beta_star(0.0) - 0.07).abs() < 1e-15);
    }

    #[test]
    fn rate_report_example1() {
        let rep = RateReport::new(&example1(), None).unwrap();
        assert!(rep.a1_satisfied);
        assert!(rep.gamma_max_positive);
        assert!(rep.beta.unwrap() > 0.0);
        assert!(rep.gamma_dirichlet_max.is_some());

        let p = ModelParams::new(0.001, 0.1, 0.1, 0.002_f64.sqrt(), 0.001).unwrap();
        let rep = RateReport::new(&p, None).unwrap();
        assert!(!rep.a1_satisfied);
        assert!(!rep.gamma_max_positive);
        assert!(rep.beta.is_none());
    }

    fn admissible() -> impl Strategy<Value = ModelParams> {
        (0.01f64..2.0, 0.0f64..0.99, 0.01f64..1.0, 0.0f64..0.9, 0.001f64..10.0).prop_map(
            |(nu, alpha_frac, delta, gain_frac, epsilon)| {
                let r = gain_frac * (3.0 * epsilon).sqrt();
                let bound = 2.0 * nu * (3.0 * epsilon - r * r) / (3.0 * epsilon);
                let alpha = (alpha_frac * bound).max(1e-6);
                ModelParams { nu, alpha, delta, r, epsilon }
            },
        )
    }

    proptest! {
        #[test]
        fn beta_non_increasing_in_gamma(p in admissible(), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let g = gamma_max(&p).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let b_lo = beta(&p, lo * g).unwrap().value;
            let b_hi = beta(&p, hi * g).unwrap().value;
            prop_assert!(b_hi <= b_lo);
            prop_assert_eq!(beta(&p, g).unwrap().interior_term, 0.0);
        }

        #[test]
        fn a1_monotone_in_epsilon(p in admissible(), grow in 1.0f64..100.0) {
            prop_assume!(check_a1(&p).unwrap().admissible);
            let q = ModelParams { epsilon: p.epsilon * grow, ..p };
            prop_assert!(check_a1(&q).unwrap().admissible);
        }

        #[test]
        fn gamma_max_linear_in_alpha(p in admissible(), d in 1e-4f64..1e-2) {
            let q = ModelParams { alpha: p.alpha + d, ..p };
            let slope = (gamma_bound(&q) - gamma_bound(&p)) / d;
            prop_assert!((slope + 1.0).abs() < 1e-8);
        }
    }
}
