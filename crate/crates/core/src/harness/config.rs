//! JSON experiment configuration, `--override` edits and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{EpsilonRule, GainRule};
use crate::error::{Error, Result};
use crate::fem::Projection;
use crate::mesh::MeshPartition;
use crate::params::ModelParams;
use crate::solver::{NewtonOptions, TimeGrid, Variant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub initial: InitialProfile,
    #[serde(default)]
    pub projection: Projection,
    #[serde(default)]
    pub solver: NewtonOptions,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub n_elements: MeshSizes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSizes {
    One(usize),
    Many(Vec<usize>),
}

impl MeshSizes {
    pub fn as_vec(&self) -> Vec<usize> {
        match self {
            MeshSizes::One(n) => vec![*n],
            MeshSizes::Many(v) => v.clone(),
        }
    }
}

/// Exactly one of `k` and `n_steps` must be given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    pub t_final: f64,
}

impl TimeConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        let wrap = |e: Error| Error::config("time", e.to_string());
        match (self.k, self.n_steps) {
            (Some(k), None) => TimeGrid::new(k, self.t_final).map_err(wrap),
            (None, Some(n)) => TimeGrid::from_steps(self.t_final, n).map_err(wrap),
            _ => Err(Error::config("time", "give exactly one of `k` and `n_steps`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    #[default]
    SinPiX,
    XOneMinusX,
    Zero,
}

impl InitialProfile {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            InitialProfile::SinPiX => (std::f64::consts::PI * x).sin(),
            InitialProfile::XOneMinusX => x * (1.0 - x),
            InitialProfile::Zero => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Decay(DecaySettings),
    Convergence(ConvergenceSettings),
    EpsilonStudy(EpsilonSettings),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Decay(_) => "decay",
            Experiment::Convergence(_) => "convergence",
            Experiment::EpsilonStudy(_) => "epsilon_study",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Nu,
    Alpha,
    Delta,
    R,
    Epsilon,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Nu => "nu",
            SweepParam::Alpha => "alpha",
            SweepParam::Delta => "delta",
            SweepParam::R => "r",
            SweepParam::Epsilon => "epsilon",
        }
    }

    pub fn apply(self, mut p: ModelParams, v: f64) -> ModelParams {
        match self {
            SweepParam::Nu => p.nu = v,
            SweepParam::Alpha => p.alpha = v,
            SweepParam::Delta => p.delta = v,
            SweepParam::R => p.r = v,
            SweepParam::Epsilon => p.epsilon = v,
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::PenalizedFeedback]
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySettings {
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// When set, `r` is recomputed from `ε` for every run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<GainRule>,
    /// Rate for the energy monitor; defaults to `gamma_max` of each run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "yes")]
    pub svg: bool,
    #[serde(default = "yes")]
    pub log_y: bool,
}

fn default_rule() -> EpsilonRule {
    EpsilonRule { c: 0.01, l: 2.0 }
}

fn default_reference() -> usize {
    2048
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSettings {
    #[serde(default = "default_rule")]
    pub epsilon_rule: EpsilonRule,
    #[serde(default = "default_reference")]
    pub reference_n_elements: usize,
    #[serde(default = "default_gain")]
    pub gain: GainRule,
}

fn default_gain() -> GainRule {
    GainRule::SqrtEps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSettings {
    pub epsilons: Vec<f64>,
    #[serde(default = "default_gain")]
    pub gain: GainRule,
}

/// Sets `path` (dot separated; numeric segments index arrays) to `raw`,
/// parsed as JSON when possible and as a plain string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(Error::config(assignment, "empty override key"));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| Error::config(path, format!("`{seg}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::config(path, format!("index {idx} out of range (len {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                let parent = segments[..i].join(".");
                return Err(Error::config(path, format!("`{parent}` is not an object")));
            }
        };
    }
    unreachable!("loop returns on the last segment")
}

impl ExperimentConfig {
    /// Parses a JSON document, applying overrides first, then validates.
    pub fn from_value(mut doc: Value, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(doc).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "config".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        Self::from_value(doc, overrides)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, overrides)
    }

    /// The config with every default filled in, as a single JSON line.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        self.time.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let model_err = |e: Error| match e {
            Error::ParameterDomain { name, value, reason } => {
                Error::config(format!("model.{name}"), format!("{reason} (got {value})"))
            }
            other => other,
        };
        self.model.validate().map_err(model_err)?;
        self.solver.validate().map_err(|e| match e {
            Error::ParameterDomain { name, value, reason } => {
                Error::config(format!("solver.{name}"), format!("{reason} (got {value})"))
            }
            other => other,
        })?;
        let grid = self.grid()?;
        if grid.n_steps == 0 {
            return Err(Error::config("time.t_final", "need at least one time step"));
        }

        let sizes = self.mesh.n_elements.as_vec();
        if sizes.is_empty() {
            return Err(Error::config("mesh.n_elements", "empty list"));
        }
        for (i, &n) in sizes.iter().enumerate() {
            MeshPartition::uniform(n).map_err(|e| Error::config(format!("mesh.n_elements[{i}]"), e.to_string()))?;
        }

        match &self.experiment {
            Experiment::Decay(d) => {
                if sizes.len() != 1 {
                    return Err(Error::config("mesh.n_elements", "decay runs use a single mesh"));
                }
                if d.variants.is_empty() {
                    return Err(Error::config("experiment.variants", "empty list"));
                }
                if let Some(s) = &d.sweep {
                    if s.values.is_empty() {
                        return Err(Error::config("experiment.sweep.values", "empty list"));
                    }
                    for (i, &v) in s.values.iter().enumerate() {
                        let mut p = s.param.apply(self.model, v);
                        if let Some(g) = d.gain {
                            p.r = g.gain(p.epsilon);
                        }
                        p.validate()
                            .map_err(|e| Error::config(format!("experiment.sweep.values[{i}]"), e.to_string()))?;
                    }
                }
                if let Some(g) = d.gain {
                    validate_gain(g, "experiment.gain")?;
                }
                if let Some(g) = d.gamma {
                    if !(g.is_finite() && g > 0.0) {
                        return Err(Error::config("experiment.gamma", "rate must be positive"));
                    }
                }
            }
            Experiment::Convergence(c) => {
                if !(c.epsilon_rule.c.is_finite() && c.epsilon_rule.c > 0.0) {
                    return Err(Error::config("experiment.epsilon_rule.c", "must be positive"));
                }
                if !(c.epsilon_rule.l.is_finite() && c.epsilon_rule.l >= 0.0) {
                    return Err(Error::config("experiment.epsilon_rule.l", "must be non-negative"));
                }
                validate_gain(c.gain, "experiment.gain")?;
                let reference = MeshPartition::uniform(c.reference_n_elements)
                    .map_err(|e| Error::config("experiment.reference_n_elements", e.to_string()))?;
                for (i, &n) in sizes.iter().enumerate() {
                    if !n.is_power_of_two() {
                        return Err(Error::config(format!("mesh.n_elements[{i}]"), "must be a power of two"));
                    }
                    if i > 0 && n != 2 * sizes[i - 1] {
                        return Err(Error::config(
                            format!("mesh.n_elements[{i}]"),
                            "element counts must double from row to row",
                        ));
                    }
                    if n >= c.reference_n_elements {
                        return Err(Error::config(
                            format!("mesh.n_elements[{i}]"),
                            "must be coarser than the reference mesh",
                        ));
                    }
                    let coarse = MeshPartition::uniform(n)?;
                    reference
                        .nesting_factor(&coarse)
                        .map_err(|e| Error::config(format!("mesh.n_elements[{i}]"), e.to_string()))?;
                }
            }
            Experiment::EpsilonStudy(s) => {
                if sizes.len() != 1 {
                    return Err(Error::config("mesh.n_elements", "the study uses a single mesh"));
                }
                if s.epsilons.is_empty() {
                    return Err(Error::config("experiment.epsilons", "empty list"));
                }
                for (i, &e) in s.epsilons.iter().enumerate() {
                    if !(e.is_finite() && e > 0.0) {
                        return Err(Error::config(format!("experiment.epsilons[{i}]"), "must be positive"));
                    }
                    if i > 0 && e > s.epsilons[i - 1] {
                        return Err(Error::config(format!("experiment.epsilons[{i}]"), "list must be descending"));
                    }
                }
                validate_gain(s.gain, "experiment.gain")?;
            }
        }
        Ok(())
    }
}

fn validate_gain(g: GainRule, path: &str) -> Result<()> {
    match g {
        GainRule::Constant(r) if !(r.is_finite() && r >= 0.0) => {
            Err(Error::config(path, format!("constant gain must be non-negative (got {r})")))
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": {"nu": 0.1, "alpha": 0.13, "delta": 0.13, "r": 0.1, "epsilon": 0.01},
        "mesh": {"n_elements": 64},
        "time": {"n_steps": 1050, "t_final": 1.0},
        "experiment": {"kind": "decay"}
    }"#;

    #[test]
    fn defaults_filled() {
        let c = ExperimentConfig::from_json(BASE, &[]).unwrap();
        assert_eq!(c.initial, InitialProfile::SinPiX);
        assert_eq!(c.projection, Projection::L2);
        assert_eq!(c.solver, NewtonOptions::default());
        let Experiment::Decay(d) = &c.experiment else { panic!() };
        assert_eq!(d.variants, vec![Variant::PenalizedFeedback]);
        assert!(d.svg);
        // resolved form parses back to the same config
        let again = ExperimentConfig::from_json(&c.resolved_json(), &[]).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn overrides_apply() {
        let c = ExperimentConfig::from_json(
            BASE,
            &["model.nu=0.2".into(), "initial=x_one_minus_x".into(), "mesh.n_elements=32".into()],
        )
        .unwrap();
        assert_eq!(c.model.nu, 0.2);
        assert_eq!(c.initial, InitialProfile::XOneMinusX);
        assert_eq!(c.mesh.n_elements, MeshSizes::One(32));
    }

    #[test]
    fn errors_carry_paths() {
        let path_of = |o: &str| match ExperimentConfig::from_json(BASE, &[o.to_string()]) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(path_of("model.nu=-1"), "model.nu");
        assert_eq!(path_of("model.nu=\"fast\""), "model.nu");
        assert_eq!(path_of("mesh.n_elements=1"), "mesh.n_elements[0]");
        assert_eq!(path_of("solver.max_iter=0"), "solver.max_iter");
        assert_eq!(path_of("time.k=0.001"), "time");
        assert_eq!(path_of("initial=gaussian"), "initial");
        assert_eq!(path_of("model.typo=1"), "model.typo");
        assert_eq!(path_of("model.nu.x=1"), "model.nu.x");
    }

    #[test]
    fn convergence_mesh_checks() {
        let conv = r#"{
            "model": {"nu": 0.1, "alpha": 0.13, "delta": 0.13, "r": 0.1, "epsilon": 0.01},
            "mesh": {"n_elements": [8, 16, 32]},
            "time": {"n_steps": 10, "t_final": 0.01},
            "experiment": {"kind": "convergence", "reference_n_elements": 256}
        }"#;
        ExperimentConfig::from_json(conv, &[]).unwrap();
        let bad = ExperimentConfig::from_json(conv, &["mesh.n_elements=[8, 12]".into()]);
        assert!(matches!(bad, Err(Error::Config { ref path, .. }) if path == "mesh.n_elements[1]"));
        let bad = ExperimentConfig::from_json(conv, &["mesh.n_elements=[8, 32]".into()]);
        assert!(bad.is_err());
        let bad = ExperimentConfig::from_json(conv, &["experiment.reference_n_elements=24".into()]);
        assert!(bad.is_err());
    }

    #[test]
    fn epsilon_list_descending() {
        let eps = r#"{
            "model": {"nu": 0.1, "alpha": 0.13, "delta": 0.13, "r": 0.1, "epsilon": 0.01},
            "mesh": {"n_elements": 16},
            "time": {"n_steps": 10, "t_final": 0.01},
            "experiment": {"kind": "epsilon_study", "epsilons": [1.0, 0.1, 0.1], "gain": "sqrt_eps"}
        }"#;
        ExperimentConfig::from_json(eps, &[]).unwrap();
        let bad = ExperimentConfig::from_json(eps, &["experiment.epsilons.2=0.5".into()]);
        assert!(matches!(bad, Err(Error::Config { ref path, .. }) if path == "experiment.epsilons[2]"));
    }

    #[test]
    fn profiles() {
        assert_eq!(InitialProfile::Zero.eval(0.3), 0.0);
        assert_eq!(InitialProfile::XOneMinusX.eval(0.5), 0.25);
        assert!((InitialProfile::SinPiX.eval(0.5) - 1.0).abs() < 1e-16);
    }
}
