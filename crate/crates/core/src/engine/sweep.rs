//! Seeded sweeps over (x, y, λ) triples: the defect and ratio calculus, the
//! modulus estimates built on it, and certification of a claimed modulus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::Objective;
use super::region::RegionSpec;
use crate::error::{Result, SqcError};
use crate::geometry::{lerp, SamplerConfig, Vector};

/// Triples with λ(1−λ)‖x−y‖² below this are skipped.
pub const EXCLUSION_BAND: f64 = 1e-14;
/// Ratios are clamped to ±RATIO_CLAMP.
pub const RATIO_CLAMP: f64 = 1e12;

/// Numerator noise floor in units of machine epsilon.
pub const NOISE_ULPS: f64 = 4.0;
/// Triples whose ratio is uncertain by more than this (absolute for ratios
/// below 1, relative above) are skipped.
pub const RATIO_RESOLUTION: f64 = 1e-7;

const REFINE_ROUNDS: usize = 300;
const REFINE_FIRST_STEP: f64 = 0.05;
const REFINE_LAST_STEP: f64 = 1e-13;

/// f(x_λ) − max{f(x), f(y)} + (σ/2)λ(1−λ)‖x−y‖² from stored values.
pub fn defect_from_values(f_values: [f64; 3], lambda: f64, dist_sq: f64, sigma: f64) -> f64 {
    f_values[2] - f_values[0].max(f_values[1]) + 0.5 * sigma * lambda * (1.0 - lambda) * dist_sq
}

/// 2(max{f(x), f(y)} − f(x_λ)) / (λ(1−λ)‖x−y‖²), clamped, or `None` inside
/// the exclusion band or when rounding in f leaves the ratio unresolved. The
/// flag reports clamping.
///
/// A numerator within a few ulps of the function values is rounding noise
/// and counts as zero.
pub fn ratio_from_values(f_values: [f64; 3], lambda: f64, dist_sq: f64) -> Option<(f64, bool)> {
    let weight = lambda * (1.0 - lambda) * dist_sq;
    if weight < EXCLUSION_BAND {
        return None;
    }
    let mut gap = f_values[0].max(f_values[1]) - f_values[2];
    let magnitude = f_values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let noise = NOISE_ULPS * f64::EPSILON * magnitude;
    if gap.abs() <= noise {
        gap = 0.0;
    }
    let r = 2.0 * gap / weight;
    if 2.0 * noise / weight > RATIO_RESOLUTION * r.abs().max(1.0) {
        return None;
    }
    if r.abs() > RATIO_CLAMP || r.is_nan() {
        Some((if r < 0.0 { -RATIO_CLAMP } else { RATIO_CLAMP }, true))
    } else {
        Some((r, false))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(SqcError::invalid(format!("λ = {lambda} must lie in (0, 1)")))
    }
}

/// The SQC defect of f at (x, y, λ) for modulus σ; x_λ = λx + (1−λ)y.
pub fn defect(f: &impl Objective, x: &Vector, y: &Vector, lambda: f64, sigma: f64) -> Result<f64> {
    check_lambda(lambda)?;
    x.check_dim(y, "defect")?;
    if !(sigma >= 0.0) {
        return Err(SqcError::invalid(format!("σ = {sigma} must be nonnegative")));
    }
    let fv = [f.value(x)?, f.value(y)?, f.value(&lerp(x, y, lambda))?];
    Ok(defect_from_values(fv, lambda, x.dist2_sq(y), sigma))
}

/// A concrete triple with its function values [f(x), f(y), f(x_λ)] and the
/// defect at `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vector,
    pub y: Vector,
    pub lambda: f64,
    pub defect: f64,
    pub f_values: [f64; 3],
    pub sigma: f64,
}

impl Witness {
    /// The defect recomputed from the stored points and values.
    pub fn replay_defect(&self) -> f64 {
        defect_from_values(self.f_values, self.lambda, self.x.dist2_sq(&self.y), self.sigma)
    }

    /// The same triple judged against another modulus.
    pub fn at_sigma(&self, sigma: f64) -> Witness {
        let mut w = self.clone();
        w.sigma = sigma;
        w.defect = w.replay_defect();
        w
    }

    pub fn ratio(&self) -> Option<f64> {
        ratio_from_values(self.f_values, self.lambda, self.x.dist2_sq(&self.y)).map(|r| r.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqcEstimate {
    /// Minimum ratio over the sample set; negative means quasiconvexity fails.
    pub sigma_hat: f64,
    /// The triple attaining the minimum, with defect at σ = sigma_hat.
    pub witness: Witness,
    pub n_triples: usize,
    pub seed: u64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidpointEstimate {
    pub mu_hat: f64,
    pub x: Vector,
    pub y: Vector,
    pub n_pairs: usize,
}

/// Outcome of checking every sampled defect against a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub passed: bool,
    pub worst_defect: f64,
    /// The worst triple; present on failure.
    pub witness: Option<Witness>,
    pub worst: Witness,
    pub n_triples: usize,
}

/// One evaluated pair with f at both ends, the midpoint and every λ.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub x: Vector,
    pub y: Vector,
    pub fx: f64,
    pub fy: f64,
    pub f_mid: f64,
    pub dist_sq: f64,
    pub lambdas: Vec<f64>,
    pub f_lambda: Vec<f64>,
}

impl PairSample {
    pub fn evaluate(f: &impl Objective, x: Vector, y: Vector, lambdas: Vec<f64>) -> Result<Self> {
        let fx = f.value(&x)?;
        let fy = f.value(&y)?;
        let f_mid = f.value(&lerp(&x, &y, 0.5))?;
        let f_lambda = lambdas
            .iter()
            .map(|&l| f.value(&lerp(&x, &y, l)))
            .collect::<Result<Vec<_>>>()?;
        let dist_sq = x.dist2_sq(&y);
        Ok(PairSample {
            x,
            y,
            fx,
            fy,
            f_mid,
            dist_sq,
            lambdas,
            f_lambda,
        })
    }

    pub fn f_values(&self, k: usize) -> [f64; 3] {
        [self.fx, self.fy, self.f_lambda[k]]
    }

    pub fn ratio(&self, k: usize) -> Option<(f64, bool)> {
        ratio_from_values(self.f_values(k), self.lambdas[k], self.dist_sq)
    }

    pub fn defect(&self, k: usize, sigma: f64) -> f64 {
        defect_from_values(self.f_values(k), self.lambdas[k], self.dist_sq, sigma)
    }

    /// Lowest ratio over this pair's λ values, first index on ties.
    pub fn min_ratio(&self) -> Option<(usize, f64, bool)> {
        let mut best: Option<(usize, f64, bool)> = None;
        for k in 0..self.lambdas.len() {
            if let Some((r, c)) = self.ratio(k) {
                if best.is_none_or(|b| r < b.1) {
                    best = Some((k, r, c));
                }
            }
        }
        best
    }

    pub fn midpoint_ratio(&self) -> Option<f64> {
        if 0.25 * self.dist_sq < EXCLUSION_BAND {
            return None;
        }
        Some((0.5 * (self.fx + self.fy) - self.f_mid) / self.dist_sq)
    }

    pub fn witness(&self, k: usize, sigma: f64) -> Witness {
        Witness {
            x: self.x.clone(),
            y: self.y.clone(),
            lambda: self.lambdas[k],
            defect: self.defect(k, sigma),
            f_values: self.f_values(k),
            sigma,
        }
    }
}

/// One row of a defect dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectRow {
    pub x: Vector,
    pub y: Vector,
    pub lambda: f64,
    pub f_x: f64,
    pub f_y: f64,
    pub f_mid: f64,
    pub defect: f64,
    pub ratio: f64,
}

pub const CSV_HEADER: &str = "x,y,lambda,f_x,f_y,f_mid,defect,ratio";

impl DefectRow {
    pub fn from_witness(w: &Witness) -> Self {
        DefectRow {
            x: w.x.clone(),
            y: w.y.clone(),
            lambda: w.lambda,
            f_x: w.f_values[0],
            f_y: w.f_values[1],
            f_mid: w.f_values[2],
            defect: w.defect,
            ratio: w.ratio().unwrap_or(f64::NAN),
        }
    }

    /// Coordinates are joined with `;` so each vector stays one CSV field.
    pub fn to_csv(&self) -> String {
        let join = |v: &Vector| {
            v.coords()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            join(&self.x),
            join(&self.y),
            self.lambda,
            self.f_x,
            self.f_y,
            self.f_mid,
            self.defect,
            self.ratio
        )
    }
}

/// The recorded sample set of one sweep. Every estimate and certificate is a
/// pure function of it.
#[derive(Debug, Clone)]
pub struct Sweep {
    samples: Vec<PairSample>,
    seed: u64,
}

impl Sweep {
    /// Evaluates `cfg.n_pairs` seeded pairs at their λ values, then refines the
    /// `cfg.refine` lowest-ratio pairs by compass search and appends them.
    /// A single-pair sweep evaluates exactly that pair and skips refinement.
    pub fn run(f: &impl Objective, region: &RegionSpec, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        region.validate()?;
        if let Some(d) = f.dim() {
            if d != region.dim() {
                return Err(SqcError::invalid(format!(
                    "function lives in dimension {d} but the region in dimension {}",
                    region.dim()
                )));
            }
        }
        let mut samples = (0..cfg.n_pairs as u64)
            .into_par_iter()
            .map(|i| {
                let (x, y) = region.pair(cfg.seed, i);
                PairSample::evaluate(f, x, y, cfg.lambdas_for_pair(i))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut ranked: Vec<(usize, usize, f64)> = samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.min_ratio().map(|(k, r, _)| (i, k, r)))
            .collect();
        ranked.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
        ranked.truncate(if cfg.n_pairs > 1 { cfg.refine } else { 0 });
        let scale = region.scale();
        let refined = ranked
            .par_iter()
            .map(|&(i, k, _)| refine_pair(f, region, &samples[i], k, scale))
            .collect::<Result<Vec<_>>>()?;
        samples.extend(refined.into_iter().flatten());
        Ok(Sweep {
            samples,
            seed: cfg.seed,
        })
    }

    pub fn samples(&self) -> &[PairSample] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn triples(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (0..s.lambdas.len()).map(move |k| (i, k)))
            .filter(|&(i, k)| self.samples[i].ratio(k).is_some())
    }

    pub fn n_triples(&self) -> usize {
        self.triples().count()
    }

    pub fn sigma_hat(&self) -> Result<SqcEstimate> {
        let mut best: Option<(usize, usize, f64, bool)> = None;
        let mut n = 0;
        for (i, k) in self.triples() {
            n += 1;
            let (r, c) = self.samples[i].ratio(k).expect("filtered");
            if best.is_none_or(|b| r < b.2) {
                best = Some((i, k, r, c));
            }
        }
        let (i, k, r, clamped) = best.ok_or_else(|| {
            SqcError::invalid("no triple outside the exclusion band: region is degenerate")
        })?;
        Ok(SqcEstimate {
            sigma_hat: r,
            witness: self.samples[i].witness(k, r),
            n_triples: n,
            seed: self.seed,
            clamped,
        })
    }

    pub fn mu_hat(&self) -> Result<MidpointEstimate> {
        let mut best: Option<(usize, f64)> = None;
        let mut n = 0;
        for (i, s) in self.samples.iter().enumerate() {
            if let Some(m) = s.midpoint_ratio() {
                n += 1;
                if best.is_none_or(|b| m < b.1) {
                    best = Some((i, m));
                }
            }
        }
        let (i, m) = best.ok_or_else(|| SqcError::invalid("no distinct pair: region is degenerate"))?;
        Ok(MidpointEstimate {
            mu_hat: m,
            x: self.samples[i].x.clone(),
            y: self.samples[i].y.clone(),
            n_pairs: n,
        })
    }

    /// Passes iff every sampled defect at σ is at most `tol`.
    pub fn certify(&self, sigma: f64, tol: f64) -> Result<Certification> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(SqcError::invalid(format!("σ = {sigma} must be nonnegative")));
        }
        let mut worst: Option<(usize, usize, f64)> = None;
        let mut n = 0;
        for (i, k) in self.triples() {
            n += 1;
            let d = self.samples[i].defect(k, sigma);
            if worst.is_none_or(|w| d > w.2) {
                worst = Some((i, k, d));
            }
        }
        let (i, k, d) = worst.ok_or_else(|| {
            SqcError::invalid("no triple outside the exclusion band: region is degenerate")
        })?;
        let w = self.samples[i].witness(k, sigma);
        let passed = d <= tol;
        Ok(Certification {
            passed,
            worst_defect: d,
            witness: (!passed).then(|| w.clone()),
            worst: w,
            n_triples: n,
        })
    }

    /// Every non-excluded triple as a dump row at modulus σ.
    pub fn rows(&self, sigma: f64) -> Vec<DefectRow> {
        self.triples()
            .map(|(i, k)| DefectRow::from_witness(&self.samples[i].witness(k, sigma)))
            .collect()
    }
}

fn triple_ratio(f: &impl Objective, x: &Vector, y: &Vector, lambda: f64) -> Result<f64> {
    let fv = [f.value(x)?, f.value(y)?, f.value(&lerp(x, y, lambda))?];
    Ok(ratio_from_values(fv, lambda, x.dist2_sq(y)).map_or(f64::INFINITY, |r| r.0))
}

/// Compass search on (x, y) with λ fixed, lowering the ratio while keeping
/// at least half the starting separation. Returns the
/// improved pair evaluated at the original pair's λ values, or `None` if no
/// move helped.
fn refine_pair(
    f: &impl Objective,
    region: &RegionSpec,
    start: &PairSample,
    k: usize,
    scale: f64,
) -> Result<Option<PairSample>> {
    let lambda = start.lambdas[k];
    let dim = start.x.dim();
    let mut x = start.x.clone();
    let mut y = start.y.clone();
    let mut best = triple_ratio(f, &x, &y, lambda)?;
    let initial = best;
    // Shrinking pairs lets rounding noise dominate the ratio.
    let min_sep_sq = 0.25 * start.dist_sq;
    let mut step = REFINE_FIRST_STEP * scale;
    for _ in 0..REFINE_ROUNDS {
        if step < REFINE_LAST_STEP * scale {
            break;
        }
        let mut improved = false;
        for coord in 0..2 * dim {
            for sign in [1.0, -1.0] {
                let (mut cx, mut cy) = (x.clone(), y.clone());
                let target = if coord < dim { &mut cx } else { &mut cy };
                *target = region.retract(&target.add_scaled(sign * step, &Vector::basis(dim, coord % dim)));
                if cx.dist2_sq(&cy) < min_sep_sq {
                    continue;
                }
                let r = triple_ratio(f, &cx, &cy, lambda)?;
                if r < best {
                    best = r;
                    x = cx;
                    y = cy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    if best < initial {
        Ok(Some(PairSample::evaluate(f, x, y, start.lambdas.clone())?))
    } else {
        Ok(None)
    }
}

/// Seeded estimate of the largest σ consistent with the sample set.
pub fn sigma_hat(f: &impl Objective, region: &RegionSpec, cfg: &SamplerConfig) -> Result<SqcEstimate> {
    Sweep::run(f, region, cfg)?.sigma_hat()
}

/// Seeded estimate of the midpoint modulus.
pub fn mu_hat(f: &impl Objective, region: &RegionSpec, cfg: &SamplerConfig) -> Result<MidpointEstimate> {
    Sweep::run(f, region, cfg)?.mu_hat()
}

/// Checks a claimed modulus on a seeded sweep.
pub fn certify(
    f: &impl Objective,
    region: &RegionSpec,
    sigma: f64,
    cfg: &SamplerConfig,
    tol: f64,
) -> Result<Certification> {
    if !(sigma >= 0.0) {
        return Err(SqcError::invalid(format!("σ = {sigma} must be nonnegative")));
    }
    Sweep::run(f, region, cfg)?.certify(sigma, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MidpointConversion {
    pub sigma: SqcEstimate,
    pub mu: MidpointEstimate,
    /// σ̂ ≥ 8μ̂ − tol.
    pub holds: bool,
}

/// Compares σ̂ with 8μ̂ on one shared sample set.
pub fn midpoint_conversion_check(
    f: &impl Objective,
    region: &RegionSpec,
    cfg: &SamplerConfig,
    tol: f64,
) -> Result<MidpointConversion> {
    if !region.is_convex() {
        return Err(SqcError::invalid("midpoint conversion needs a convex region"));
    }
    let sweep = Sweep::run(f, region, cfg)?;
    let sigma = sweep.sigma_hat()?;
    let mu = sweep.mu_hat()?;
    let holds = sigma.sigma_hat >= 8.0 * mu.mu_hat - tol;
    Ok(MidpointConversion { sigma, mu, holds })
}
