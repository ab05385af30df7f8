//! Checks on norms themselves: positive modulus only on bounded sets, the
//! midpoint-to-modulus conversion, and the one-dimensional interpolation
//! step behind it.

use rand::Rng;

use super::Outcome;
use crate::engine::{
    boundedness_probe, lambda_interpolation_check, midpoint_conversion_check,
    restriction_midpoint_modulus, sigma_hat, FunctionSpec, InterpolationOutcome, RegionSpec,
};
use crate::error::{Result, SqcError};
use crate::geometry::{stream_rng, NormSpec, SamplerConfig, StreamTag, Vector};
use crate::report::Status;
use crate::sets::SetSpec;

const RAY_RADII: [f64; 3] = [10.0, 100.0, 1000.0];
const FLAT_TOL: f64 = 1e-9;

fn v(c: &[f64]) -> Result<Vector> {
    Vector::new(c.to_vec())
}

/// (a) positive σ̂ for ‖·‖ₚ on [−1, 1]^dim when 1 < p ≤ 2; (b) σ̂ under the
/// envelope (4R + 16‖x₀‖)/R² along a ray; (c) zero σ̂ for ‖·‖₁ on a level
/// segment of the positive orthant.
pub fn check_norm_boundedness(p: f64, dim: usize, cfg: &SamplerConfig) -> Result<Outcome> {
    let n = NormSpec::lp(p)?;
    if dim == 0 {
        return Err(SqcError::invalid("dimension must be positive"));
    }
    let mut out = Outcome::default();
    if p > 1.0 && p <= 2.0 {
        let region = RegionSpec::cube(Vector::new(vec![-1.0; dim])?, Vector::new(vec![1.0; dim])?)?;
        let est = sigma_hat(&FunctionSpec::norm(n), &region, cfg)?;
        out.n_samples += est.n_triples;
        out.sigma_hat = Some(est.sigma_hat);
        if !(est.sigma_hat > 0.0) {
            out.demote(Status::Fail);
            out.witness = Some(est.witness.at_sigma(0.0));
        }
    }

    let x0 = if dim >= 2 { Vector::basis(dim, 1) } else { Vector::zeros(dim) };
    let rows = boundedness_probe(n, &x0, &Vector::basis(dim, 0), &RAY_RADII, cfg)?;
    for row in &rows {
        out.n_samples += 1;
        out.note(&format!("ray_sigma_hat_R{}", row.radius), row.sigma_hat);
        out.note(&format!("ray_envelope_R{}", row.radius), row.envelope);
        if row.sigma_hat > row.envelope + 1e-9 {
            out.demote(Status::Fail);
            out.witness = Some(row.witness.at_sigma(row.envelope));
        }
    }

    let level = RegionSpec::segment(v(&[1.0, 1.0])?, v(&[1.5, 0.5])?)?;
    let est = sigma_hat(&FunctionSpec::norm(NormSpec::L1), &level, cfg)?;
    out.n_samples += est.n_triples;
    out.note("l1_level_sigma_hat", est.sigma_hat);
    if est.sigma_hat > FLAT_TOL {
        out.demote(Status::Fail);
    }
    Ok(out)
}

/// σ̂ ≥ 8μ̂ − tol on shared samples for a norm and a distance function on
/// convex regions.
pub fn check_midpoint_conversion(cfg: &SamplerConfig, tol: f64) -> Result<Outcome> {
    let ball = SetSpec::euclidean_ball(v(&[0.0, 0.0])?, 1.0)?;
    let cases = [
        (
            "l2_segment",
            FunctionSpec::norm(NormSpec::L2),
            RegionSpec::segment(v(&[1.0, 0.0])?, v(&[0.0, 1.0])?)?,
        ),
        (
            "l1.5_box",
            FunctionSpec::norm(NormSpec::lp(1.5)?),
            RegionSpec::cube(v(&[-1.0, -1.0])?, v(&[1.0, 1.0])?)?,
        ),
        (
            "ball_distance_chord",
            FunctionSpec::distance_to(ball, NormSpec::L2)?,
            RegionSpec::segment(v(&[2.0, 0.0])?, v(&[0.0, 2.0])?)?,
        ),
    ];
    let mut out = Outcome::default();
    let mut lowest = f64::INFINITY;
    for (label, f, region) in &cases {
        let res = midpoint_conversion_check(f, region, cfg, tol)?;
        out.n_samples += res.sigma.n_triples;
        lowest = lowest.min(res.sigma.sigma_hat);
        out.note(&format!("{label}_sigma_hat"), res.sigma.sigma_hat);
        out.note(&format!("{label}_8mu_hat"), 8.0 * res.mu.mu_hat);
        if !res.holds {
            out.demote(Status::Fail);
            out.witness = Some(res.sigma.witness.at_sigma(8.0 * res.mu.mu_hat - tol));
        }
    }
    out.sigma_hat = Some(lowest);
    Ok(out)
}

/// Interpolation from the midpoint modulus on grid restrictions: the
/// Euclidean norm along a seeded segment with α from the grid, and an affine
/// restriction with α = 0.
pub fn check_lemma_interpolation(grid: usize, cfg: &SamplerConfig) -> Result<Outcome> {
    let mut rng = stream_rng(cfg.seed, StreamTag::Misc, 0);
    let mut point = || v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
    let x0 = point()?;
    let x1 = point()?;
    let l2 = FunctionSpec::norm(NormSpec::L2);
    let alpha = restriction_midpoint_modulus(&l2, &x0, &x1, grid)?.max(0.0);
    let mut out = Outcome::default();
    out.note("alpha", alpha);
    let cases = [
        (l2, x0, x1, alpha),
        (FunctionSpec::norm(NormSpec::L1), v(&[1.0, 1.0])?, v(&[2.0, 3.0])?, 0.0),
    ];
    for (f, a, b, alpha) in &cases {
        out.n_samples += grid + 1;
        match lambda_interpolation_check(f, a, b, *alpha, grid)? {
            InterpolationOutcome::Pass => {}
            InterpolationOutcome::HypothesisFailure { .. } => out.demote(Status::HypothesisFailure),
            InterpolationOutcome::ConclusionFailure { lambda, excess } => {
                out.demote(Status::Fail);
                out.note("failing_lambda", lambda);
                out.note("excess", excess);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_check_passes() {
        let out = check_lemma_interpolation(64, &SamplerConfig::with_seed(4)).unwrap();
        assert_eq!(out.status(), Status::Pass, "{out:?}");
    }
}
