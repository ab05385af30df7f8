//! Checks on spheres around a convex set: the explicit modulus for a
//! Euclidean ball, the projection-regularity pipeline for strongly convex
//! sets, and the collinear collapse of projections.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::engine::{sigma_hat, Certification, FunctionSpec, RegionSpec, Sweep};
use crate::error::{Result, SqcError};
use crate::geometry::{sample_sphere, NormSpec, SamplerConfig, Vector};
use crate::report::Status;
use crate::sets::project::onto_segment;
use crate::sets::{
    default_boundary_samples, strong_convexity_probe, vial_inclusion_check, SetSpec, SpindleEscape,
};

/// Chords missing the ball on which a positive segment modulus is required.
const SEGMENT_CHORDS: usize = 4;
const SEGMENT_PAIRS: usize = 256;
/// Modulus that an interior chord must refute.
const IN_BALL_SIGMA: f64 = 1e-6;
/// Pairs drawn by the strong convexity probe.
const PROBE_PAIRS: usize = 1000;
/// Sampled (p₁, p₂, λ) triples for the inclusion-ball spot check.
const VIAL_SAMPLES: usize = 1000;
/// Compass steps polishing δ̂ and c₀.
const DESCENT_STEPS: usize = 10;
/// c₀ at or below this means the regularity condition is not observed.
const REGULARITY_FLOOR: f64 = 1e-9;

/// 2·min{1/(2r), (r−R)/r²}.
pub fn sigma_zero(radius: f64, r: f64) -> Result<f64> {
    if !(radius > 0.0) || !(r > radius) || !r.is_finite() {
        return Err(SqcError::invalid(format!("need r > R > 0, got R = {radius}, r = {r}")));
    }
    Ok(2.0 * (1.0 / (2.0 * r)).min((r - radius) / (r * r)))
}

fn euclidean_ball_distance(radius: f64, dim: usize) -> Result<FunctionSpec> {
    FunctionSpec::distance_to(SetSpec::euclidean_ball(Vector::zeros(dim), radius)?, NormSpec::L2)
}

/// Certifies σ₀ on chords of the r-sphere for the distance to the R-ball,
/// and a positive modulus on a few whole chords that miss the ball.
pub fn check_ball_spheres(
    radius: f64,
    r: f64,
    dims: &[usize],
    cfg: &SamplerConfig,
    tol: f64,
) -> Result<Outcome> {
    let sigma0 = sigma_zero(radius, r)?;
    if dims.is_empty() {
        return Err(SqcError::invalid("at least one dimension is needed"));
    }
    let mut out = Outcome {
        sigma: Some(sigma0),
        ..Default::default()
    };
    out.note("sigma0", sigma0);
    let mut sigma_hat_min = f64::INFINITY;
    let mut sigma1_min = f64::INFINITY;
    let mut worst_defect = f64::NEG_INFINITY;
    for &dim in dims {
        if dim < 2 {
            return Err(SqcError::invalid(format!("dimension must be at least 2, got {dim}")));
        }
        let f = euclidean_ball_distance(radius, dim)?;
        let region = RegionSpec::sphere_chords(Vector::zeros(dim), r, NormSpec::L2)?;
        let sweep = Sweep::run(&f, &region, cfg)?;
        let est = sweep.sigma_hat()?;
        sigma_hat_min = sigma_hat_min.min(est.sigma_hat);
        let cert = sweep.certify(sigma0, tol)?;
        out.n_samples += cert.n_triples;
        worst_defect = worst_defect.max(cert.worst_defect);
        if !cert.passed {
            out.demote(Status::Fail);
            out.witness = out.witness.or(cert.witness);
        }

        let origin = Vector::zeros(dim);
        let chords: Vec<_> = sweep.samples()[..cfg.n_pairs.min(sweep.samples().len())]
            .iter()
            .filter(|s| onto_segment(&s.x, &s.y, &origin).0.norm2() > radius)
            .take(SEGMENT_CHORDS)
            .collect();
        let seg_cfg = SamplerConfig {
            n_pairs: SEGMENT_PAIRS,
            ..cfg.clone()
        };
        for s in chords {
            let seg = RegionSpec::segment(s.x.clone(), s.y.clone())?;
            let est = sigma_hat(&f, &seg, &seg_cfg)?;
            out.n_samples += est.n_triples;
            sigma1_min = sigma1_min.min(est.sigma_hat);
            if !(est.sigma_hat > 0.0) {
                out.demote(Status::Fail);
                out.witness = out.witness.or(Some(est.witness.at_sigma(0.0)));
            }
        }
    }
    let inside = check_in_ball_pair(radius, dims[0], cfg)?;
    out.n_samples += inside.n_triples;
    out.note("in_ball_defect", inside.worst_defect);
    if inside.passed {
        out.demote(Status::Fail);
    }
    out.sigma_hat = Some(sigma_hat_min);
    out.note("worst_defect", worst_defect);
    if sigma1_min.is_finite() {
        out.note("sigma1_min", sigma1_min);
    }
    Ok(out)
}

/// Inside the ball the distance vanishes on the whole chord, so no positive
/// σ survives: certification of σ = 10⁻⁶ must fail.
fn check_in_ball_pair(radius: f64, dim: usize, cfg: &SamplerConfig) -> Result<Certification> {
    let f = euclidean_ball_distance(radius, dim)?;
    let x1 = Vector::basis(dim, 0).scale(0.5 * radius);
    let x2 = Vector::basis(dim, 1).scale(-0.5 * radius);
    crate::engine::certify(&f, &RegionSpec::segment(x1, x2)?, IN_BALL_SIGMA, cfg, 0.0)
}

/// The constants produced by the projection-regularity route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StronglyConvexPipeline {
    pub omega: SetSpec,
    #[serde(rename = "R")]
    pub radius: f64,
    pub r: f64,
    pub delta: f64,
    pub c0_hat: f64,
    pub c: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub pipeline: StronglyConvexPipeline,
    pub status: Status,
    /// Escaping spindle point found by the strong convexity probe, if any.
    pub probe_escape: Option<SpindleEscape>,
    pub certification: Certification,
    pub vial_checked: usize,
    pub vial_failures: usize,
}

impl PipelineRun {
    pub fn outcome(&self) -> Outcome {
        let p = &self.pipeline;
        let mut derived = BTreeMap::new();
        for (k, v) in [
            ("delta_hat", p.delta),
            ("c0_hat", p.c0_hat),
            ("c", p.c),
            ("worst_defect", self.certification.worst_defect),
            ("vial_checked", self.vial_checked as f64),
            ("vial_failures", self.vial_failures as f64),
        ] {
            derived.insert(k.to_string(), v);
        }
        Outcome {
            status: Some(self.status),
            sigma_hat: None,
            sigma: Some(p.sigma),
            witness: self.certification.witness.clone(),
            n_samples: self.certification.n_triples,
            derived,
        }
    }
}

/// Compass descent over points kept on the sphere of radius r about 0.
fn descend_on_sphere(
    mut points: Vec<Vector>,
    r: f64,
    objective: impl Fn(&[Vector]) -> Result<f64>,
) -> Result<(Vec<Vector>, f64)> {
    let mut best = objective(&points)?;
    let mut step = 0.01 * r;
    for _ in 0..DESCENT_STEPS {
        let mut improved: Option<(Vec<Vector>, f64)> = None;
        for i in 0..points.len() {
            let dim = points[i].dim();
            for k in 0..dim {
                for sign in [1.0, -1.0] {
                    let moved = points[i].add_scaled(sign * step, &Vector::basis(dim, k));
                    let norm = moved.norm2();
                    if norm == 0.0 {
                        continue;
                    }
                    let mut cand = points.clone();
                    cand[i] = moved.scale(r / norm);
                    let value = objective(&cand)?;
                    if value < improved.as_ref().map_or(best, |b| b.1) {
                        improved = Some((cand, value));
                    }
                }
            }
        }
        match improved {
            Some((p, v)) => {
                points = p;
                best = v;
            }
            None => step *= 0.5,
        }
    }
    Ok((points, best))
}

fn projection_ratio(omega: &SetSpec, x1: &Vector, x2: &Vector) -> Result<Option<f64>> {
    let d = x1.dist2(x2);
    if d < 1e-12 {
        return Ok(None);
    }
    Ok(Some(omega.project(x1)?.dist2(&omega.project(x2)?) / d))
}

/// Estimates δ̂ and c₀ on the r-sphere, forms c = min{c₀, √(2Rδ/r²)} and
/// σ = c²/R, certifies σ on the sphere chords and spot-checks the inclusion
/// ball around convex combinations of projected points.
pub fn run_strongly_convex_pipeline(
    omega: &SetSpec,
    radius: f64,
    r: f64,
    cfg: &SamplerConfig,
    tol: f64,
) -> Result<PipelineRun> {
    if !(radius > 0.0) || !(r > 0.0) {
        return Err(SqcError::invalid("R and r must be positive"));
    }
    cfg.validate()?;
    let dim = omega.dim();
    let center = Vector::zeros(dim);

    let probe_cfg = SamplerConfig {
        n_pairs: PROBE_PAIRS,
        ..cfg.clone()
    };
    let probe = strong_convexity_probe(omega, radius, &probe_cfg)?;

    let sphere = sample_sphere(&center, r, NormSpec::L2, cfg)?;
    let distances = (0..cfg.n_pairs as u64)
        .into_par_iter()
        .map(|i| omega.distance(&sphere.point(i), NormSpec::L2))
        .collect::<Result<Vec<_>>>()?;
    let (arg, _) = distances
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &d)| if d < b.1 { (i, d) } else { b });
    let (_, delta) = descend_on_sphere(vec![sphere.point(arg as u64)], r, |p| {
        omega.distance(&p[0], NormSpec::L2)
    })?;
    if !(delta > 0.0) {
        return Err(SqcError::invalid(format!(
            "the sphere of radius {r} meets Ω (δ̂ = {delta}); the construction needs δ > 0"
        )));
    }

    let region = RegionSpec::sphere_chords(center.clone(), r, NormSpec::L2)?;
    let ratios = (0..cfg.n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let (x1, x2) = region.pair(cfg.seed, i);
            projection_ratio(omega, &x1, &x2)
        })
        .collect::<Result<Vec<_>>>()?;
    let (arg, c0_raw) = ratios
        .iter()
        .enumerate()
        .filter_map(|(i, q)| q.map(|q| (i, q)))
        .fold((0, f64::INFINITY), |b, (i, q)| if q < b.1 { (i, q) } else { b });
    let (x1, x2) = region.pair(cfg.seed, arg as u64);
    let (_, c0_hat) = descend_on_sphere(vec![x1, x2], r, |p| {
        Ok(projection_ratio(omega, &p[0], &p[1])?.unwrap_or(f64::INFINITY))
    })?;
    let c0_hat = c0_hat.min(c0_raw);

    let c = c0_hat.min((2.0 * radius * delta / (r * r)).sqrt());
    let sigma = c * c / radius;

    let f = FunctionSpec::distance_to(omega.clone(), NormSpec::L2)?;
    let sweep = Sweep::run(&f, &region, cfg)?;
    let certification = sweep.certify(sigma, tol)?;

    let nodes = cfg.lambda_nodes();
    let n_dirs = default_boundary_samples(dim);
    let vial = (0..VIAL_SAMPLES as u64)
        .into_par_iter()
        .map(|j| {
            let (x1, x2) = region.pair(cfg.seed, j);
            let p1 = omega.project(&x1)?;
            let p2 = omega.project(&x2)?;
            let lambda = nodes[j as usize % nodes.len()];
            Ok(vial_inclusion_check(omega, &p1, &p2, lambda, radius, n_dirs)?.holds)
        })
        .collect::<Result<Vec<bool>>>()?;
    let vial_failures = vial.iter().filter(|h| !**h).count();

    let status = if !certification.passed || vial_failures > 0 {
        Status::Fail
    } else if !probe.holds || c0_hat <= REGULARITY_FLOOR {
        Status::HypothesisFailure
    } else {
        Status::Pass
    };
    Ok(PipelineRun {
        pipeline: StronglyConvexPipeline {
            omega: omega.clone(),
            radius,
            r,
            delta,
            c0_hat,
            c,
            sigma,
        },
        status,
        probe_escape: probe.witness,
        certification,
        vial_checked: vial.len(),
        vial_failures,
    })
}

/// Collinear points x₀ ∓ εu project to the same boundary point Ru, so no
/// lower bound on the projection ratio holds near x₀; on the sphere through
/// x₀ the ratio is R/‖x₀‖.
pub fn check_projection_collapse(radius: f64, x0: &Vector, eps: f64) -> Result<Outcome> {
    if !(radius > 0.0) {
        return Err(SqcError::invalid("R must be positive"));
    }
    let r = x0.norm2();
    if r <= radius {
        return Err(SqcError::invalid(format!("x₀ = {x0} must lie outside the ball of radius {radius}")));
    }
    if !(eps > 0.0 && eps < r - radius) {
        return Err(SqcError::invalid(format!("ε must lie in (0, {}), got {eps}", r - radius)));
    }
    if x0.dim() < 2 {
        return Err(SqcError::invalid("the contrast pair needs dimension ≥ 2"));
    }
    let omega = SetSpec::euclidean_ball(Vector::zeros(x0.dim()), radius)?;
    let u = x0.scale(1.0 / r);
    let x1 = x0.add_scaled(-eps, &u);
    let x2 = x0.add_scaled(eps, &u);
    let p1 = omega.project(&x1)?;
    let p2 = omega.project(&x2)?;
    let target = u.scale(radius);
    let collapse_err = p1.dist2(&target).max(p2.dist2(&target));
    let ratio = p1.dist2(&p2) / x1.dist2(&x2);

    let mut turned = vec![0.0; x0.dim()];
    turned[0] = -u.coords()[1];
    turned[1] = u.coords()[0];
    let y2 = Vector::new(turned)?.scale(r);
    let y1 = u.scale(r);
    let contrast = omega.project(&y1)?.dist2(&omega.project(&y2)?) / y1.dist2(&y2);

    let mut out = Outcome::default();
    out.note("collapse_error", collapse_err);
    out.note("ratio", ratio);
    out.note("contrast_ratio", contrast);
    if collapse_err > 1e-12 || ratio > 1e-12 || (contrast - radius / r).abs() > 1e-12 {
        out.demote(Status::Fail);
    }
    Ok(out)
}
