//! Points of ℝⁿ, ℓp norms, segment interpolation and the seeded sampling
//! primitives every estimator is built on.
//!
//! Sampling is index-addressable: the i-th point of any stream is derived
//! from `(seed, stream tag, i)` alone, so parallel sweeps reproduce the same
//! samples regardless of how the index range is split across workers.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqcError};

/// A finite point of ℝⁿ with n ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(SqcError::invalid("vector must have at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(SqcError::invalid(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Vector(coords))
    }

    /// Wraps coordinates produced by arithmetic on already-validated vectors.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The k-th standard basis vector of ℝ^dim.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm2_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm2(&self) -> f64 {
        euclidean(&self.0)
    }

    /// Euclidean distance to `other`.
    pub fn dist2(&self, other: &Vector) -> f64 {
        self.dist2_sq(other).sqrt()
    }

    pub fn dist2_sq(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * t).collect())
    }

    /// `self + t * dir`.
    pub fn add_scaled(&self, t: f64, dir: &Vector) -> Vector {
        Vector(self.0.iter().zip(&dir.0).map(|(a, d)| a + t * d).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub(crate) fn check_dim(&self, other: &Vector, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(SqcError::invalid(format!(
                "{what}: dimension mismatch ({} vs {})",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = SqcError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;

    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

fn euclidean(x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if !(1e-150..=1e150).contains(&m) {
        return m * x.iter().map(|c| (c / m) * (c / m)).sum::<f64>().sqrt();
    }
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Which ℓp norm measures lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormRepr", into = "NormRepr")]
pub enum NormSpec {
    /// ℓp with finite p ≥ 1.
    Lp { p: f64 },
    LInfinity,
}

impl NormSpec {
    pub const L1: NormSpec = NormSpec::Lp { p: 1.0 };
    pub const L2: NormSpec = NormSpec::Lp { p: 2.0 };

    pub fn lp(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(SqcError::invalid(format!("ℓp norm needs p ≥ 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(NormSpec::LInfinity);
        }
        Ok(NormSpec::Lp { p })
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, NormSpec::Lp { p } if *p == 2.0)
    }

    /// The exponent, with ∞ for the max norm.
    pub fn exponent(&self) -> f64 {
        match self {
            NormSpec::Lp { p } => *p,
            NormSpec::LInfinity => f64::INFINITY,
        }
    }

    /// Norm of a raw coordinate slice. Empty slices have norm 0.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            NormSpec::LInfinity => x.iter().fold(0.0_f64, |m, c| m.max(c.abs())),
            NormSpec::Lp { p } if p == 1.0 => x.iter().map(|c| c.abs()).sum(),
            NormSpec::Lp { p } if p == 2.0 => euclidean(x),
            NormSpec::Lp { p } => {
                let m = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                let s: f64 = x.iter().map(|c| (c.abs() / m).powf(p)).sum();
                m * s.powf(1.0 / p)
            }
        }
    }

    pub fn of(&self, x: &Vector) -> f64 {
        self.eval(x.coords())
    }

    /// Distance between two points measured in this norm.
    pub fn dist(&self, x: &Vector, y: &Vector) -> f64 {
        self.of(&(x - y))
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp { p } => write!(f, "L{p}"),
            NormSpec::LInfinity => write!(f, "LInfinity"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = SqcError;

    /// Accepts `L1`, `L2`, `L1.5`, `Linf`, `LInfinity` (case-insensitive prefix).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let body = t
            .strip_prefix('L')
            .or_else(|| t.strip_prefix('l'))
            .ok_or_else(|| SqcError::invalid(format!("unrecognised norm '{s}'")))?;
        if body.eq_ignore_ascii_case("inf") || body.eq_ignore_ascii_case("infinity") {
            return Ok(NormSpec::LInfinity);
        }
        let p: f64 = body
            .parse()
            .map_err(|_| SqcError::invalid(format!("unrecognised norm '{s}'")))?;
        NormSpec::lp(p)
    }
}

#[derive(Serialize, Deserialize)]
enum TaggedNorm {
    Lp { p: f64 },
    LInfinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormRepr {
    Tagged(TaggedNorm),
    Short(String),
}

impl TryFrom<NormRepr> for NormSpec {
    type Error = SqcError;

    fn try_from(r: NormRepr) -> Result<Self> {
        match r {
            NormRepr::Tagged(TaggedNorm::Lp { p }) => NormSpec::lp(p),
            NormRepr::Tagged(TaggedNorm::LInfinity) => Ok(NormSpec::LInfinity),
            NormRepr::Short(s) => s.parse(),
        }
    }
}

impl From<NormSpec> for NormRepr {
    fn from(n: NormSpec) -> Self {
        match n {
            NormSpec::Lp { p } => NormRepr::Tagged(TaggedNorm::Lp { p }),
            NormSpec::LInfinity => NormRepr::Tagged(TaggedNorm::LInfinity),
        }
    }
}

/// ‖x‖ under `n`.
pub fn norm(x: &Vector, n: NormSpec) -> Result<f64> {
    if x.dim() == 0 {
        return Err(SqcError::invalid("norm of a zero-dimensional vector"));
    }
    Ok(n.of(x))
}

/// `λx + (1−λ)y`, so `λ = 1` returns `x` and `λ = 0` returns `y`.
pub fn interpolate(x: &Vector, y: &Vector, lambda: f64) -> Result<Vector> {
    x.check_dim(y, "interpolate")?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(SqcError::invalid(format!("λ = {lambda} outside [0, 1]")));
    }
    Ok(lerp(x, y, lambda))
}

/// Unchecked form of [`interpolate`] for hot loops. Coordinates shared by
/// both endpoints are copied exactly.
#[inline]
pub(crate) fn lerp(x: &Vector, y: &Vector, lambda: f64) -> Vector {
    let mu = 1.0 - lambda;
    Vector(
        x.0.iter()
            .zip(&y.0)
            .map(|(a, b)| if a == b { *a } else { lambda * a + mu * b })
            .collect(),
    )
}

/// Seeded sampling parameters shared by every sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Number of point pairs drawn per sweep.
    pub n_pairs: usize,
    /// Number of interior λ nodes per pair (rounded up to odd so 0.5 is a node).
    pub lambda_grid: usize,
    /// Perturb the λ nodes per pair, keeping 0.5 fixed.
    pub jitter: bool,
    /// Number of worst sweep triples handed to local refinement.
    pub refine: usize,
    /// Evaluate every pair at this single λ instead of the node grid.
    #[serde(default)]
    pub fixed_lambda: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            n_pairs: 10_000,
            lambda_grid: 33,
            jitter: false,
            refine: 8,
            fixed_lambda: None,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(SqcError::invalid("n_pairs must be positive"));
        }
        if self.lambda_grid == 0 {
            return Err(SqcError::invalid("lambda_grid must be positive"));
        }
        if let Some(l) = self.fixed_lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(SqcError::invalid(format!("λ = {l} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Chebyshev-style interior nodes on (0,1), sorted, containing 0.5 exactly.
    pub fn lambda_nodes(&self) -> Vec<f64> {
        let n = if self.lambda_grid.is_multiple_of(2) {
            self.lambda_grid + 1
        } else {
            self.lambda_grid.max(1)
        };
        let mid = n / 2;
        (0..n)
            .map(|k| {
                if k == mid {
                    0.5
                } else {
                    let theta = (2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
                    0.5 * (1.0 - theta.cos())
                }
            })
            .collect()
    }

    /// The λ values used for pair `index`: the fixed λ if set, otherwise
    /// [`lambda_nodes`], perturbed when jitter is on.
    ///
    /// [`lambda_nodes`]: SamplerConfig::lambda_nodes
    pub fn lambdas_for_pair(&self, index: u64) -> Vec<f64> {
        if let Some(l) = self.fixed_lambda {
            return vec![l];
        }
        let nodes = self.lambda_nodes();
        if !self.jitter {
            return nodes;
        }
        let mut rng = stream_rng(self.seed, StreamTag::Jitter, index);
        let mut out = nodes.clone();
        for k in 0..nodes.len() {
            if nodes[k] == 0.5 {
                continue;
            }
            let lo = if k == 0 { 0.0 } else { nodes[k - 1] };
            let hi = if k + 1 == nodes.len() { 1.0 } else { nodes[k + 1] };
            let gap = (nodes[k] - lo).min(hi - nodes[k]);
            let shift: f64 = rng.random_range(-0.25..0.25);
            out[k] = nodes[k] + shift * gap;
        }
        out
    }
}

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Sphere = 1,
    Pairs = 2,
    Jitter = 3,
    Directions = 4,
    SetPairs = 5,
    Spindle = 6,
    Pipeline = 7,
    Misc = 8,
}

/// The RNG for element `index` of the stream `tag` under `seed`.
pub fn stream_rng(seed: u64, tag: StreamTag, index: u64) -> ChaCha8Rng {
    let mixed = seed ^ (tag as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.set_stream(index);
    rng
}

/// A standard Gaussian vector; normalising it gives a uniform direction.
pub(crate) fn gaussian(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if d.iter().any(|&c| c != 0.0) {
            return d;
        }
    }
}

/// Uniform unit direction in the Euclidean sense.
pub(crate) fn unit_direction(rng: &mut impl Rng, dim: usize) -> Vector {
    let d = gaussian(rng, dim);
    let n = euclidean(&d);
    Vector(d.into_iter().map(|c| c / n).collect())
}

/// Index-addressable stream of points on the sphere {z : ‖z − center‖ = radius}.
#[derive(Debug, Clone)]
pub struct SphereStream {
    center: Vector,
    radius: f64,
    norm: NormSpec,
    seed: u64,
    next: u64,
}

impl SphereStream {
    pub fn point(&self, index: u64) -> Vector {
        let mut rng = stream_rng(self.seed, StreamTag::Sphere, index);
        sphere_point(&mut rng, &self.center, self.radius, self.norm)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl Iterator for SphereStream {
    type Item = Vector;

    fn next(&mut self) -> Option<Vector> {
        let p = self.point(self.next);
        self.next += 1;
        Some(p)
    }
}

/// Isotropic direction normalised in `norm` and placed on the sphere.
pub(crate) fn sphere_point(
    rng: &mut impl Rng,
    center: &Vector,
    radius: f64,
    norm: NormSpec,
) -> Vector {
    let d = gaussian(rng, center.dim());
    let s = radius / norm.eval(&d);
    Vector(center.0.iter().zip(&d).map(|(c, di)| c + s * di).collect())
}

/// Unbounded, seed-deterministic stream of sphere points.
pub fn sample_sphere(
    center: &Vector,
    radius: f64,
    n: NormSpec,
    cfg: &SamplerConfig,
) -> Result<SphereStream> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(SqcError::invalid(format!("sphere radius must be positive, got {radius}")));
    }
    Ok(SphereStream {
        center: center.clone(),
        radius,
        norm: n,
        seed: cfg.seed,
        next: 0,
    })
}
