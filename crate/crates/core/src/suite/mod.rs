//! Registered checks: each one rebuilds a statement about norms, distance
//! functions and strongly convex sets from its exact constants and confirms
//! or refutes it on seeded samples.

mod counterexamples;
mod norms;
mod spheres;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::Witness;
use crate::error::{Result, SqcError};
use crate::geometry::{SamplerConfig, Vector};
use crate::report::{CheckResult, Report, Status};

pub use counterexamples::{
    check_halfspace_counterexample, check_l1_counterexample, check_lp_local,
    check_maxnorm_counterexample,
};
pub use norms::{check_lemma_interpolation, check_midpoint_conversion, check_norm_boundedness};
pub use spheres::{
    check_ball_spheres, check_projection_collapse, run_strongly_convex_pipeline, sigma_zero,
    PipelineRun, StronglyConvexPipeline,
};

pub const CHECK_NAMES: [&str; 10] = [
    "prop-ball-spheres",
    "ex-halfspace",
    "ex-maxnorm",
    "ex-l1",
    "thm-lp-local",
    "thm-strongly-convex",
    "ex-projection-collapse",
    "thm-norm-boundedness",
    "prop-midpoint-conversion",
    "lemma-1d-interpolation",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Pass,
    FailWithWitness,
}

/// A registered check with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub expected: Expectation,
    pub tolerance: f64,
}

fn allowed_params(name: &str) -> &'static [&'static str] {
    match name {
        "prop-ball-spheres" => &["R", "r", "dim", "tol"],
        "ex-halfspace" | "ex-maxnorm" => &["sigma"],
        "ex-l1" => &["sigma", "eps"],
        "thm-lp-local" => &["p", "R", "x0_1", "x0_2"],
        "thm-strongly-convex" => &["R", "r", "a", "tol"],
        "ex-projection-collapse" => &["R", "x0_1", "x0_2", "eps"],
        "thm-norm-boundedness" => &["p", "dim"],
        "prop-midpoint-conversion" => &["tol"],
        "lemma-1d-interpolation" => &["grid"],
        _ => &[],
    }
}

/// Value used when a parameter is not set; `dim` and `p` default to a list
/// for some checks and have no single entry here.
fn default_param(name: &str, key: &str) -> Option<f64> {
    Some(match (name, key) {
        ("prop-ball-spheres", "R") => 1.0,
        ("prop-ball-spheres", "r") => 2.0,
        ("ex-halfspace" | "ex-maxnorm" | "ex-l1", "sigma") => 1e-3,
        ("ex-l1", "eps") => 0.1,
        ("thm-lp-local" | "thm-strongly-convex" | "ex-projection-collapse", "R") => 1.0,
        ("thm-lp-local" | "ex-projection-collapse", "x0_1") => 2.0,
        ("thm-lp-local" | "ex-projection-collapse", "x0_2") => 0.0,
        ("thm-strongly-convex", "r") => 2.0,
        ("thm-strongly-convex", "a") => 0.0,
        ("ex-projection-collapse", "eps") => 0.5,
        ("thm-norm-boundedness", "p") => 1.5,
        ("thm-norm-boundedness", "dim") => 2.0,
        ("lemma-1d-interpolation", "grid") => 64.0,
        _ => return None,
    })
}

impl CheckSpec {
    pub fn new(name: &str) -> Result<Self> {
        if !CHECK_NAMES.contains(&name) {
            return Err(SqcError::invalid(format!(
                "unknown check `{name}` (known: {})",
                CHECK_NAMES.join(", ")
            )));
        }
        let expected = if name.starts_with("ex-") {
            Expectation::FailWithWitness
        } else {
            Expectation::Pass
        };
        let tolerance = match name {
            "prop-midpoint-conversion" => 1e-6,
            _ => 1e-9,
        };
        Ok(CheckSpec {
            name: name.to_string(),
            params: BTreeMap::new(),
            expected,
            tolerance,
        })
    }

    /// Sets one parameter; `tol` sets the tolerance.
    pub fn with_param(mut self, key: &str, value: f64) -> Result<Self> {
        if !allowed_params(&self.name).contains(&key) {
            return Err(SqcError::invalid(format!(
                "check `{}` has no parameter `{key}` (accepted: {})",
                self.name,
                allowed_params(&self.name).join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(SqcError::invalid(format!("parameter `{key}` must be finite")));
        }
        if key == "tol" {
            self.tolerance = value;
        } else {
            self.params.insert(key.to_string(), value);
        }
        Ok(self)
    }

    fn get(&self, key: &str) -> f64 {
        self.params
            .get(key)
            .copied()
            .or_else(|| default_param(&self.name, key))
            .expect("every single-valued parameter has a default")
    }

    /// Explicit parameters plus the defaults standing in for unset ones.
    pub fn effective_params(&self) -> BTreeMap<String, f64> {
        let mut out = self.params.clone();
        for key in allowed_params(&self.name) {
            if let (false, Some(v)) = (out.contains_key(*key), default_param(&self.name, key)) {
                out.insert(key.to_string(), v);
            }
        }
        out
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(&v) if v >= 1.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
            Some(&v) => Err(SqcError::invalid(format!("parameter `{key}` must be a positive integer, got {v}"))),
        }
    }

    fn point(&self) -> Result<Vector> {
        Vector::new(vec![self.get("x0_1"), self.get("x0_2")])
    }
}

/// What a check found, before naming and timing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub status: Option<Status>,
    pub sigma_hat: Option<f64>,
    pub sigma: Option<f64>,
    pub witness: Option<Witness>,
    pub n_samples: usize,
    /// Derived constants reported next to the parameters.
    pub derived: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn status(&self) -> Status {
        self.status.unwrap_or(Status::Pass)
    }

    pub(crate) fn note(&mut self, key: &str, value: f64) {
        self.derived.insert(key.to_string(), value);
    }

    /// Downgrades the status: fail beats hypothesis-failure beats pass.
    pub(crate) fn demote(&mut self, s: Status) {
        let rank = |s: Status| match s {
            Status::Pass => 0,
            Status::HypothesisFailure => 1,
            Status::Fail => 2,
        };
        if rank(s) > rank(self.status()) {
            self.status = Some(s);
        }
    }
}

/// Runs one check and wraps it with its name, parameters, seed and runtime.
pub fn run_check(spec: &CheckSpec, cfg: &SamplerConfig) -> Result<CheckResult> {
    let start = Instant::now();
    let out = dispatch(spec, cfg)?;
    let mut params = spec.effective_params();
    if spec.tolerance != CheckSpec::new(&spec.name)?.tolerance {
        params.insert("tol".into(), spec.tolerance);
    }
    params.extend(out.derived.clone());
    Ok(CheckResult {
        name: spec.name.clone(),
        params,
        status: out.status(),
        sigma_hat: out.sigma_hat,
        sigma: out.sigma,
        witness: out.witness,
        n_samples: out.n_samples,
        seed: cfg.seed,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn dispatch(spec: &CheckSpec, cfg: &SamplerConfig) -> Result<Outcome> {
    match spec.name.as_str() {
        "prop-ball-spheres" => {
            let dims = match spec.count("dim")? {
                Some(d) => vec![d],
                None => vec![2, 3, 5],
            };
            check_ball_spheres(spec.get("R"), spec.get("r"), &dims, cfg, spec.tolerance)
        }
        "ex-halfspace" => check_halfspace_counterexample(spec.get("sigma"), cfg),
        "ex-maxnorm" => check_maxnorm_counterexample(spec.get("sigma"), cfg),
        "ex-l1" => check_l1_counterexample(spec.get("sigma"), spec.get("eps"), cfg),
        "thm-lp-local" => {
            let ps = match spec.params.get("p") {
                Some(&p) => vec![p],
                None => vec![2.0, 1.5],
            };
            check_lp_local(&ps, &spec.point()?, spec.get("R"), cfg)
        }
        "thm-strongly-convex" => {
            let radius = spec.get("R");
            let a = spec.get("a");
            let omega = if a > 0.0 {
                crate::sets::SetSpec::spindle(
                    Vector::new(vec![-a, 0.0])?,
                    Vector::new(vec![a, 0.0])?,
                    radius,
                )?
            } else {
                crate::sets::SetSpec::euclidean_ball(Vector::zeros(2), radius)?
            };
            let run = run_strongly_convex_pipeline(&omega, radius, spec.get("r"), cfg, spec.tolerance)?;
            Ok(run.outcome())
        }
        "ex-projection-collapse" => {
            check_projection_collapse(spec.get("R"), &spec.point()?, spec.get("eps"))
        }
        "thm-norm-boundedness" => {
            check_norm_boundedness(spec.get("p"), spec.count("dim")?.unwrap_or(spec.get("dim") as usize), cfg)
        }
        "prop-midpoint-conversion" => check_midpoint_conversion(cfg, spec.tolerance),
        "lemma-1d-interpolation" => check_lemma_interpolation(spec.count("grid")?.unwrap_or(spec.get("grid") as usize), cfg),
        other => Err(SqcError::invalid(format!("unknown check `{other}`"))),
    }
}

/// Runs the given checks in parallel; the report lists them by name.
pub fn run_suite(specs: &[CheckSpec], cfg: &SamplerConfig) -> Result<Report> {
    let mut checks = specs
        .par_iter()
        .map(|s| run_check(s, cfg))
        .collect::<Result<Vec<_>>>()?;
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Report::new("paper", checks))
}

/// Every registered check with default parameters.
pub fn registry() -> Vec<CheckSpec> {
    CHECK_NAMES
        .iter()
        .map(|n| CheckSpec::new(n).expect("registered"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_covers_every_name() {
        let names: Vec<_> = registry().into_iter().map(|s| s.name).collect();
        assert_eq!(names, CHECK_NAMES);
        assert!(CheckSpec::new("nope").is_err());
    }

    #[test]
    fn unknown_parameters_rejected() {
        let s = CheckSpec::new("prop-ball-spheres").unwrap();
        assert!(s.clone().with_param("R", 1.0).is_ok());
        assert!(s.clone().with_param("sigma", 1.0).is_err());
        let s = s.with_param("tol", 1e-6).unwrap();
        assert_eq!(s.tolerance, 1e-6);
        assert!(s.params.is_empty());
        let s = CheckSpec::new("thm-norm-boundedness").unwrap().with_param("dim", 2.5).unwrap();
        assert!(s.count("dim").is_err());
    }

    #[test]
    fn expectations_follow_names() {
        assert_eq!(CheckSpec::new("ex-l1").unwrap().expected, Expectation::FailWithWitness);
        assert_eq!(CheckSpec::new("thm-lp-local").unwrap().expected, Expectation::Pass);
    }
}
