//! One-dimensional restrictions: the midpoint-to-interpolation check on a
//! segment and the decay of σ̂ for a norm along a ray.

use serde::{Deserialize, Serialize};

use super::function::Objective;
use super::region::RegionSpec;
use super::sweep::{sigma_hat, Witness};
use crate::error::{Result, SqcError};
use crate::geometry::{lerp, NormSpec, SamplerConfig, Vector};

/// Tolerance of both inequalities in [`lambda_interpolation_check`].
pub const INTERPOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InterpolationOutcome {
    Pass,
    /// h((s+t)/2) > (h(s)+h(t))/2 − α(t−s)² at a grid pair.
    HypothesisFailure { s: f64, t: f64, excess: f64 },
    /// h(λ) > (1−λ)h(0) + λh(1) − 4αλ(1−λ) at a grid point.
    ConclusionFailure { lambda: f64, excess: f64 },
}

fn restriction(f: &impl Objective, x0: &Vector, x1: &Vector, grid: usize) -> Result<Vec<f64>> {
    x0.check_dim(x1, "segment restriction")?;
    if grid < 2 {
        return Err(SqcError::invalid("interpolation grid needs at least 2 intervals"));
    }
    (0..=grid)
        .map(|k| f.value(&lerp(x1, x0, k as f64 / grid as f64)))
        .collect()
}

/// Smallest ((h(s)+h(t))/2 − h((s+t)/2)) / (t−s)² over grid pairs whose
/// midpoint is a grid point, for h(λ) = f((1−λ)x₀ + λx₁).
pub fn restriction_midpoint_modulus(
    f: &impl Objective,
    x0: &Vector,
    x1: &Vector,
    grid: usize,
) -> Result<f64> {
    let h = restriction(f, x0, x1, grid)?;
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        for j in (i + 2..=grid).step_by(2) {
            let gap = (j - i) as f64 / grid as f64;
            let m = (0.5 * (h[i] + h[j]) - h[(i + j) / 2]) / (gap * gap);
            best = best.min(m);
        }
    }
    Ok(best)
}

/// Checks the midpoint hypothesis with modulus α on the grid, then the
/// interpolated conclusion at every grid λ.
pub fn lambda_interpolation_check(
    f: &impl Objective,
    x0: &Vector,
    x1: &Vector,
    alpha: f64,
    grid: usize,
) -> Result<InterpolationOutcome> {
    if !(alpha >= 0.0) {
        return Err(SqcError::invalid(format!("α = {alpha} must be nonnegative")));
    }
    let h = restriction(f, x0, x1, grid)?;
    let n = grid as f64;
    for i in 0..=grid {
        for j in (i + 2..=grid).step_by(2) {
            let gap = (j - i) as f64 / n;
            let excess = h[(i + j) / 2] - 0.5 * (h[i] + h[j]) + alpha * gap * gap;
            if excess > INTERPOLATION_TOL {
                return Ok(InterpolationOutcome::HypothesisFailure {
                    s: i as f64 / n,
                    t: j as f64 / n,
                    excess,
                });
            }
        }
    }
    for (k, hk) in h.iter().enumerate() {
        let l = k as f64 / n;
        let excess = hk - ((1.0 - l) * h[0] + l * h[grid]) + 4.0 * alpha * l * (1.0 - l);
        if excess > INTERPOLATION_TOL {
            return Ok(InterpolationOutcome::ConclusionFailure { lambda: l, excess });
        }
    }
    Ok(InterpolationOutcome::Pass)
}

/// t ↦ ‖x₀ + t·v‖ₙ on ℝ¹.
#[derive(Debug, Clone)]
pub struct RayObjective {
    pub n: NormSpec,
    pub x0: Vector,
    pub v: Vector,
}

impl Objective for RayObjective {
    fn value(&self, t: &Vector) -> Result<f64> {
        if t.dim() != 1 {
            return Err(SqcError::invalid("ray objective takes a scalar"));
        }
        Ok(self.n.of(&self.x0.add_scaled(t.coords()[0], &self.v)))
    }

    fn dim(&self) -> Option<usize> {
        Some(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessRow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub sigma_hat: f64,
    /// (4R + 16‖x₀‖)/R².
    pub envelope: f64,
    pub witness: Witness,
}

/// σ̂ of t ↦ ‖x₀ + t·v‖ₙ on [0, R] for each R, next to its envelope.
pub fn boundedness_probe(
    n: NormSpec,
    x0: &Vector,
    v: &Vector,
    radii: &[f64],
    cfg: &SamplerConfig,
) -> Result<Vec<BoundednessRow>> {
    x0.check_dim(v, "boundedness_probe")?;
    if v.is_zero() {
        return Err(SqcError::invalid("ray direction must be nonzero"));
    }
    if (n.of(v) - 1.0).abs() > 1e-12 {
        return Err(SqcError::invalid(format!("direction must be a unit vector in {n}")));
    }
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SqcError::invalid("radii must be positive and increasing"));
    }
    let ray = RayObjective {
        n,
        x0: x0.clone(),
        v: v.clone(),
    };
    let base = n.of(x0);
    radii
        .iter()
        .map(|&r| {
            let region = RegionSpec::segment(Vector::zeros(1), Vector::new(vec![r])?)?;
            let est = sigma_hat(&ray, &region, cfg)?;
            Ok(BoundednessRow {
                radius: r,
                sigma_hat: est.sigma_hat,
                envelope: (4.0 * r + 16.0 * base) / (r * r),
                witness: est.witness,
            })
        })
        .collect()
}
