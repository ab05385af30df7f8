//! Distance functions that are quasiconvex but not strongly so near a point:
//! a half-space, the max-norm ball and the ℓ1 ball, together with the local
//! positive modulus for ℓp balls with 1 < p ≤ 2.

use super::Outcome;
use crate::engine::{certify, defect, sigma_hat, FunctionSpec, RegionSpec, Witness};
use crate::error::{Result, SqcError};
use crate::geometry::{NormSpec, SamplerConfig, Vector};
use crate::report::Status;
use crate::sets::SetSpec;

/// σ̂ below this counts as "no positive modulus".
const FLAT_TOL: f64 = 1e-9;
/// Relative slack on the expected witness defect.
const WITNESS_SLACK: f64 = 1e-6;

fn v(c: &[f64]) -> Result<Vector> {
    Vector::new(c.to_vec())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(SqcError::invalid(format!("σ must be positive, got {sigma}")))
    }
}

/// Records σ̂ on the neighbourhood: it must be ≤ FLAT_TOL and, since the
/// function is convex there, not below −FLAT_TOL.
fn flat_on(out: &mut Outcome, f: &FunctionSpec, region: &RegionSpec, cfg: &SamplerConfig) -> Result<()> {
    let est = sigma_hat(f, region, cfg)?;
    out.n_samples += est.n_triples;
    out.sigma_hat = Some(est.sigma_hat);
    if est.sigma_hat > FLAT_TOL || est.sigma_hat < -FLAT_TOL {
        out.demote(Status::Fail);
        out.witness = out.witness.take().or(Some(est.witness));
    }
    Ok(())
}

/// Certifies σ on the exact chord [x₁, x₂]; confirmation requires failure
/// with a witness whose defect reaches (σ/8)‖x₁−x₂‖².
fn refuted_on_chord(
    out: &mut Outcome,
    f: &FunctionSpec,
    x1: &Vector,
    x2: &Vector,
    sigma: f64,
    cfg: &SamplerConfig,
) -> Result<Witness> {
    let region = RegionSpec::segment(x1.clone(), x2.clone())?;
    let cert = certify(f, &region, sigma, cfg, 0.0)?;
    out.n_samples += cert.n_triples;
    let floor = sigma / 8.0 * x1.dist2_sq(x2) * (1.0 - WITNESS_SLACK);
    if cert.passed || cert.worst_defect < floor {
        out.demote(Status::Fail);
    }
    Ok(cert.worst)
}

/// Distance to {u ≤ 0} around (1, 0): zero modulus, refuted on the vertical
/// unit chord through (1, 0).
pub fn check_halfspace_counterexample(sigma: f64, cfg: &SamplerConfig) -> Result<Outcome> {
    check_sigma(sigma)?;
    let omega = SetSpec::halfspace(v(&[1.0, 0.0])?, 0.0)?;
    let f = FunctionSpec::distance_to(omega, NormSpec::L2)?;
    let mut out = Outcome {
        sigma: Some(sigma),
        ..Default::default()
    };
    flat_on(&mut out, &f, &RegionSpec::ball(v(&[1.0, 0.0])?, 0.4, NormSpec::L2)?, cfg)?;
    let w = refuted_on_chord(&mut out, &f, &v(&[1.0, 0.0])?, &v(&[1.0, 1.0])?, sigma, cfg)?;
    out.witness = Some(w);
    Ok(out)
}

/// ℓ∞ distance to the max-norm ball of radius 1/2: equal distances 3/2 along
/// the chord (2,0)–(2,1) and zero modulus on chords of the max-norm sphere of
/// radius 2.
pub fn check_maxnorm_counterexample(sigma: f64, cfg: &SamplerConfig) -> Result<Outcome> {
    check_sigma(sigma)?;
    let omega = SetSpec::norm_ball(NormSpec::LInfinity, v(&[0.0, 0.0])?, 0.5)?;
    let f = FunctionSpec::distance_to(omega, NormSpec::LInfinity)?;
    let x1 = v(&[2.0, 0.0])?;
    let x2 = v(&[2.0, 1.0])?;
    let mut out = Outcome {
        sigma: Some(sigma),
        ..Default::default()
    };
    let dist_err = [&x1, &x2, &v(&[2.0, 0.5])?]
        .iter()
        .map(|z| Ok((crate::engine::Objective::value(&f, z)? - 1.5).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.note("distance_error", dist_err);
    if dist_err > 1e-12 {
        out.demote(Status::Fail);
    }
    let mut defect_err: f64 = 0.0;
    for l in cfg.lambda_nodes() {
        let d = defect(&f, &x1, &x2, l, sigma)?;
        defect_err = defect_err.max((d - 0.5 * sigma * l * (1.0 - l)).abs());
    }
    out.note("defect_error", defect_err);
    if defect_err > 1e-12 {
        out.demote(Status::Fail);
    }
    flat_on(&mut out, &f, &RegionSpec::sphere_chords(v(&[0.0, 0.0])?, 2.0, NormSpec::LInfinity)?, cfg)?;
    let w = refuted_on_chord(&mut out, &f, &x1, &x2, sigma, cfg)?;
    out.witness = Some(w);
    Ok(out)
}

/// ℓ1 distance to the unit ℓ1 ball: x₁ = (2, 0), x₂ = (2 − ε/2, ε/2) and their
/// midpoint all sit at distance 1, and no σ ≥ 10⁻⁶ survives on the chord.
pub fn check_l1_counterexample(sigma: f64, eps: f64, cfg: &SamplerConfig) -> Result<Outcome> {
    check_sigma(sigma)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SqcError::invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    let rho = 2.0 * eps;
    let omega = SetSpec::norm_ball(NormSpec::L1, v(&[0.0, 0.0])?, 1.0)?;
    let f = FunctionSpec::distance_to(omega, NormSpec::L1)?;
    let x1 = v(&[2.0, 0.0])?;
    let x2 = v(&[2.0 - eps / 2.0, eps / 2.0])?;
    let mid = crate::geometry::interpolate(&x1, &x2, 0.5)?;
    let mut out = Outcome {
        sigma: Some(sigma),
        ..Default::default()
    };
    let dist_err = [&x1, &x2, &mid]
        .iter()
        .map(|z| Ok((crate::engine::Objective::value(&f, z)? - 1.0).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let gap_sq = x1.dist2_sq(&x2);
    out.note("distance_error", dist_err);
    out.note("eps", eps);
    out.note("rho", rho);
    out.note("chord_length_sq", gap_sq);
    if dist_err > 1e-12 || (gap_sq - eps * eps / 2.0).abs() > 1e-15 {
        out.demote(Status::Fail);
    }
    flat_on(&mut out, &f, &RegionSpec::ball(x1.clone(), rho, NormSpec::L1)?, cfg)?;
    refuted_on_chord(&mut out, &f, &x1, &x2, 1e-6, cfg)?;
    let w = refuted_on_chord(&mut out, &f, &x1, &x2, sigma, cfg)?;
    out.witness = Some(w);
    Ok(out)
}

/// ℓp distance to the unit-radius ℓp ball on the ℓp ball around x₀ of radius
/// (‖x₀‖ₚ − R)/2: positive modulus for 1 < p ≤ 2, none for p = 1.
pub fn check_lp_local(ps: &[f64], x0: &Vector, radius: f64, cfg: &SamplerConfig) -> Result<Outcome> {
    if !(radius > 0.0) {
        return Err(SqcError::invalid("R must be positive"));
    }
    let mut out = Outcome::default();
    let mut lowest = f64::INFINITY;
    for &p in ps {
        if !(1.0..=2.0).contains(&p) {
            return Err(SqcError::invalid(format!("p must lie in [1, 2], got {p}")));
        }
        let n = NormSpec::lp(p)?;
        let norm = n.of(x0);
        if norm <= radius {
            return Err(SqcError::invalid(format!("x₀ = {x0} lies inside the ℓ{p} ball of radius {radius}")));
        }
        let eps = (norm - radius) / 2.0;
        let omega = SetSpec::norm_ball(n, Vector::zeros(x0.dim()), radius)?;
        let f = FunctionSpec::distance_to(omega, n)?;
        let est = sigma_hat(&f, &RegionSpec::ball(x0.clone(), eps, n)?, cfg)?;
        out.n_samples += est.n_triples;
        lowest = lowest.min(est.sigma_hat);
        out.note(&format!("sigma_hat_p{p}"), est.sigma_hat);
        let confirmed = if p == 1.0 {
            est.sigma_hat <= FLAT_TOL
        } else {
            est.sigma_hat > 0.0
        };
        if p == 1.0 {
            out.witness = out.witness.take().or(Some(est.witness.clone()));
        }
        if !confirmed {
            out.demote(Status::Fail);
            out.witness = Some(est.witness.at_sigma(est.sigma_hat.max(0.0)));
        }
    }
    out.sigma_hat = Some(lowest);
    Ok(out)
}
