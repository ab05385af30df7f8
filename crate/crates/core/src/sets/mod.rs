//! Convex sets with membership, distance and Euclidean projection, plus the
//! probes that test strong convexity (spindle inclusion), the Vial inclusion
//! ball, and recession directions.

pub(crate) mod project;
mod spindle;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqcError};
use crate::geometry::{gaussian, lerp, stream_rng, NormSpec, SamplerConfig, StreamTag, Vector};

pub use project::{DYKSTRA_MAX_ITER, DYKSTRA_RESIDUAL};
pub use spindle::spindle_member;
pub(crate) use spindle::SpindleFrame;

/// Membership tolerance used wherever a tolerance is optional.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A closed Euclidean ball, the building block of [`SetSpec::BallIntersection`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

/// A closed convex set.
///
/// The JSON form is externally tagged by constructor name, e.g.
/// `{"Halfspace": {"a": [1, 0], "b": 0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetRepr")]
pub enum SetSpec {
    NormBall {
        norm: NormSpec,
        center: Vector,
        radius: f64,
    },
    /// {z : ⟨a, z⟩ ≤ b}
    Halfspace { a: Vector, b: f64 },
    Segment { x1: Vector, x2: Vector },
    Box { lo: Vector, hi: Vector },
    BallIntersection { balls: Vec<Ball>, interior: Vector },
    Spindle {
        x: Vector,
        y: Vector,
        #[serde(rename = "R")]
        radius: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
enum SetRepr {
    NormBall {
        norm: NormSpec,
        center: Vector,
        radius: f64,
    },
    Halfspace {
        a: Vector,
        b: f64,
    },
    Segment {
        x1: Vector,
        x2: Vector,
    },
    Box {
        lo: Vector,
        hi: Vector,
    },
    BallIntersection {
        balls: Vec<Ball>,
        interior: Vector,
    },
    Spindle {
        x: Vector,
        y: Vector,
        #[serde(rename = "R")]
        radius: f64,
    },
}

impl TryFrom<SetRepr> for SetSpec {
    type Error = SqcError;

    fn try_from(r: SetRepr) -> Result<Self> {
        let s = match r {
            SetRepr::NormBall {
                norm,
                center,
                radius,
            } => SetSpec::NormBall {
                norm,
                center,
                radius,
            },
            SetRepr::Halfspace { a, b } => SetSpec::Halfspace { a, b },
            SetRepr::Segment { x1, x2 } => SetSpec::Segment { x1, x2 },
            SetRepr::Box { lo, hi } => SetSpec::Box { lo, hi },
            SetRepr::BallIntersection { balls, interior } => {
                SetSpec::BallIntersection { balls, interior }
            }
            SetRepr::Spindle { x, y, radius } => SetSpec::Spindle { x, y, radius },
        };
        s.validate()?;
        Ok(s)
    }
}

fn positive(what: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(SqcError::invalid(format!("{what} must be positive and finite, got {r}")))
    }
}

impl SetSpec {
    pub fn norm_ball(norm: NormSpec, center: Vector, radius: f64) -> Result<Self> {
        let s = SetSpec::NormBall {
            norm,
            center,
            radius,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn euclidean_ball(center: Vector, radius: f64) -> Result<Self> {
        Self::norm_ball(NormSpec::L2, center, radius)
    }

    pub fn halfspace(a: Vector, b: f64) -> Result<Self> {
        let s = SetSpec::Halfspace { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn segment(x1: Vector, x2: Vector) -> Result<Self> {
        let s = SetSpec::Segment { x1, x2 };
        s.validate()?;
        Ok(s)
    }

    pub fn cube(lo: Vector, hi: Vector) -> Result<Self> {
        let s = SetSpec::Box { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn ball_intersection(balls: Vec<Ball>, interior: Vector) -> Result<Self> {
        let s = SetSpec::BallIntersection { balls, interior };
        s.validate()?;
        Ok(s)
    }

    pub fn spindle(x: Vector, y: Vector, radius: f64) -> Result<Self> {
        let s = SetSpec::Spindle { x, y, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::NormBall { radius, .. } => positive("ball radius", *radius),
            SetSpec::Halfspace { a, b } => {
                if a.is_zero() {
                    return Err(SqcError::invalid("half-space normal must be nonzero"));
                }
                if !b.is_finite() {
                    return Err(SqcError::invalid("half-space offset must be finite"));
                }
                Ok(())
            }
            SetSpec::Segment { x1, x2 } => x1.check_dim(x2, "segment"),
            SetSpec::Box { lo, hi } => {
                lo.check_dim(hi, "box")?;
                if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
                    return Err(SqcError::invalid("box needs lo ≤ hi componentwise"));
                }
                Ok(())
            }
            SetSpec::BallIntersection { balls, interior } => {
                if balls.is_empty() {
                    return Err(SqcError::invalid("ball intersection needs at least one ball"));
                }
                for b in balls {
                    positive("ball radius", b.radius)?;
                    b.center.check_dim(interior, "ball intersection")?;
                    if b.center.dist2(interior) > b.radius {
                        return Err(SqcError::invalid(format!(
                            "interior point {interior} is outside the ball at {}",
                            b.center
                        )));
                    }
                }
                Ok(())
            }
            SetSpec::Spindle { x, y, radius } => SpindleFrame::new(x, y, *radius).map(|_| ()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::NormBall { center, .. } => center.dim(),
            SetSpec::Halfspace { a, .. } => a.dim(),
            SetSpec::Segment { x1, .. } => x1.dim(),
            SetSpec::Box { lo, .. } => lo.dim(),
            SetSpec::BallIntersection { interior, .. } => interior.dim(),
            SetSpec::Spindle { x, .. } => x.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SetSpec::NormBall { .. } => "NormBall",
            SetSpec::Halfspace { .. } => "Halfspace",
            SetSpec::Segment { .. } => "Segment",
            SetSpec::Box { .. } => "Box",
            SetSpec::BallIntersection { .. } => "BallIntersection",
            SetSpec::Spindle { .. } => "Spindle",
        }
    }

    fn check_point(&self, z: &Vector, what: &str) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(SqcError::invalid(format!(
                "{what}: point has dimension {} but the {} lives in dimension {}",
                z.dim(),
                self.name(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Axis-aligned box containing the set, or `None` when unbounded.
    pub fn bounding_box(&self) -> Option<(Vector, Vector)> {
        let around = |c: &Vector, r: f64| {
            (
                Vector::from_raw(c.coords().iter().map(|x| x - r).collect()),
                Vector::from_raw(c.coords().iter().map(|x| x + r).collect()),
            )
        };
        match self {
            SetSpec::NormBall { center, radius, .. } => Some(around(center, *radius)),
            SetSpec::Halfspace { .. } => None,
            SetSpec::Segment { x1, x2 } => Some((
                Vector::from_raw(x1.coords().iter().zip(x2.coords()).map(|(a, b)| a.min(*b)).collect()),
                Vector::from_raw(x1.coords().iter().zip(x2.coords()).map(|(a, b)| a.max(*b)).collect()),
            )),
            SetSpec::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            SetSpec::BallIntersection { balls, .. } => {
                let (mut lo, mut hi) = around(&balls[0].center, balls[0].radius);
                for b in &balls[1..] {
                    let (l, h) = around(&b.center, b.radius);
                    lo = Vector::from_raw(lo.coords().iter().zip(l.coords()).map(|(a, b)| a.max(*b)).collect());
                    hi = Vector::from_raw(hi.coords().iter().zip(h.coords()).map(|(a, b)| a.min(*b)).collect());
                }
                Some((lo, hi))
            }
            SetSpec::Spindle { x, y, .. } => {
                let half = 0.5 * x.dist2(y);
                Some(around(&lerp(x, y, 0.5), half))
            }
        }
    }

    /// Whether z lies in the set up to `tol` in its defining inequalities.
    pub fn contains(&self, z: &Vector, tol: f64) -> Result<bool> {
        self.check_point(z, "member")?;
        Ok(match self {
            SetSpec::NormBall {
                norm,
                center,
                radius,
            } => norm.dist(z, center) <= radius + tol,
            SetSpec::Halfspace { a, b } => a.dot(z) - b <= tol,
            SetSpec::Segment { x1, x2 } => {
                let (p, _) = project::onto_segment(x1, x2, z);
                p.dist2(z) <= tol
            }
            SetSpec::Box { lo, hi } => z
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .all(|(c, (l, h))| *c >= l - tol && *c <= h + tol),
            SetSpec::BallIntersection { balls, .. } => balls
                .iter()
                .all(|b| z.dist2(&b.center) <= b.radius + tol),
            SetSpec::Spindle { x, y, radius } => spindle_member(x, y, *radius, z, tol)?,
        })
    }

    /// Nearest point of the set in the Euclidean norm.
    pub fn project(&self, z: &Vector) -> Result<Vector> {
        self.check_point(z, "project_euclidean")?;
        match self {
            SetSpec::NormBall {
                norm,
                center,
                radius,
            } => match norm {
                n if n.is_euclidean() => Ok(project::onto_ball(center, *radius, z)),
                NormSpec::LInfinity => {
                    let (lo, hi) = self.bounding_box().expect("balls are bounded");
                    Ok(project::onto_box(&lo, &hi, z))
                }
                NormSpec::Lp { p } if *p == 1.0 => Ok(project::onto_l1_ball(center, *radius, z)),
                n => Err(SqcError::unsupported(format!(
                    "Euclidean projection onto a {n} ball"
                ))),
            },
            SetSpec::Halfspace { a, b } => Ok(project::onto_halfspace(a, *b, z)),
            SetSpec::Segment { x1, x2 } => Ok(project::onto_segment(x1, x2, z).0),
            SetSpec::Box { lo, hi } => Ok(project::onto_box(lo, hi, z)),
            SetSpec::BallIntersection { balls, .. } => {
                let balls: Vec<_> = balls.iter().map(|b| (b.center.clone(), b.radius)).collect();
                project::dykstra_balls(&balls, z)
            }
            SetSpec::Spindle { x, y, radius } => Ok(SpindleFrame::new(x, y, *radius)?.project(z)),
        }
    }

    /// inf{‖z − w‖ : w in the set}.
    ///
    /// Norm balls are measured in their own norm (closed form); every
    /// projectable set is measured in ℓ2 through the Euclidean projection.
    pub fn distance(&self, z: &Vector, n: NormSpec) -> Result<f64> {
        self.check_point(z, "distance")?;
        match self {
            SetSpec::NormBall {
                norm,
                center,
                radius,
            } if *norm == n => Ok((n.dist(z, center) - radius).max(0.0)),
            _ if n.is_euclidean() && self.supports_projection() => Ok(z.dist2(&self.project(z)?)),
            _ => Err(SqcError::unsupported(format!(
                "distance to a {} measured in {n}",
                self.name()
            ))),
        }
    }

    /// Whether `(set, norm)` is a supported pair for [`SetSpec::distance`].
    pub fn supports_distance(&self, n: NormSpec) -> bool {
        match self {
            SetSpec::NormBall { norm, .. } if *norm == n => true,
            _ => n.is_euclidean() && self.supports_projection(),
        }
    }

    /// Whether [`SetSpec::project`] has a method for this set.
    pub fn supports_projection(&self) -> bool {
        match self {
            SetSpec::NormBall { norm, .. } => {
                norm.is_euclidean() || *norm == NormSpec::LInfinity || *norm == NormSpec::L1
            }
            _ => true,
        }
    }

    /// A point of the set: roughly uniform inside when `boundary` is false,
    /// otherwise the projection of a point drawn around the set.
    pub(crate) fn sample_point(&self, rng: &mut impl Rng, boundary: bool) -> Result<Vector> {
        if let SetSpec::Segment { x1, x2 } = self {
            let t: f64 = if boundary {
                if rng.random::<bool>() { 0.0 } else { 1.0 }
            } else {
                rng.random()
            };
            return Ok(lerp(x2, x1, t));
        }
        let (lo, hi) = self
            .bounding_box()
            .ok_or_else(|| SqcError::invalid(format!("{} is unbounded", self.name())))?;
        let dim = lo.dim();
        let draw = |rng: &mut dyn rand::RngCore, scale: f64| -> Vector {
            Vector::from_raw(
                (0..dim)
                    .map(|i| {
                        let (l, h) = (lo.coords()[i], hi.coords()[i]);
                        let m = 0.5 * (l + h);
                        let w = 0.5 * (h - l) * scale;
                        m + w * (2.0 * rng.random::<f64>() - 1.0)
                    })
                    .collect(),
            )
        };
        if !boundary {
            for _ in 0..10_000 {
                let z = draw(rng, 1.0);
                if self.contains(&z, 0.0)? {
                    return Ok(z);
                }
            }
        }
        let z = draw(rng, 2.0);
        let mut p = self.project(&z)?;
        if p == z {
            // Drawn inside: push out radially from the box center first.
            let m = lerp(&lo, &hi, 0.5);
            let d = &z - &m;
            let span = lo.dist2(&hi).max(1e-12);
            let dn = d.norm2();
            let dir = if dn > 0.0 {
                d.scale(1.0 / dn)
            } else {
                Vector::basis(dim, 0)
            };
            p = self.project(&m.add_scaled(2.0 * span, &dir))?;
        }
        Ok(p)
    }
}

/// Free-function form of [`SetSpec::contains`].
pub fn member(s: &SetSpec, z: &Vector, tol: f64) -> Result<bool> {
    s.contains(z, tol)
}

/// Free-function form of [`SetSpec::distance`].
pub fn distance(s: &SetSpec, z: &Vector, n: NormSpec) -> Result<f64> {
    s.distance(z, n)
}

/// Free-function form of [`SetSpec::project`].
pub fn project_euclidean(s: &SetSpec, z: &Vector) -> Result<Vector> {
    s.project(z)
}

/// Boundary directions used by the Vial inclusion check in dimension `dim`.
pub fn default_boundary_samples(dim: usize) -> usize {
    if dim <= 4 {
        4096
    } else {
        4096 << (dim - 4).min(16)
    }
}

/// Outcome of testing 𝔹²[p_λ; r_λ] ⊂ Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct VialInclusion {
    pub holds: bool,
    pub center: Vector,
    pub radius: f64,
    /// First sampled boundary point outside Ω, if any.
    pub escape: Option<Vector>,
}

/// Checks that the ball around p_λ = (1−λ)p₁ + λp₂ of radius
/// λ(1−λ)‖p₁−p₂‖²/(2R) stays inside `omega` on `n_boundary_samples` boundary
/// directions.
pub fn vial_inclusion_check(
    omega: &SetSpec,
    p1: &Vector,
    p2: &Vector,
    lambda: f64,
    radius: f64,
    n_boundary_samples: usize,
) -> Result<VialInclusion> {
    p1.check_dim(p2, "vial_inclusion_check")?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(SqcError::invalid(format!("λ = {lambda} outside [0, 1]")));
    }
    positive("R", radius)?;
    if n_boundary_samples == 0 {
        return Err(SqcError::invalid("need at least one boundary sample"));
    }
    for p in [p1, p2] {
        if !omega.contains(p, DEFAULT_TOL)? {
            return Err(SqcError::invalid(format!("{p} is not a member of Ω")));
        }
    }
    let center = lerp(p2, p1, lambda);
    let r = lambda * (1.0 - lambda) * p1.dist2_sq(p2) / (2.0 * radius);
    let dim = p1.dim();
    let escape = (0..n_boundary_samples)
        .into_par_iter()
        .map(|k| {
            let dir = boundary_direction(dim, k, n_boundary_samples);
            let z = center.add_scaled(r, &dir);
            omega.contains(&z, DEFAULT_TOL).map(|inside| (!inside).then_some(z))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(VialInclusion {
        holds: escape.is_none(),
        center,
        radius: r,
        escape,
    })
}

fn boundary_direction(dim: usize, k: usize, total: usize) -> Vector {
    match dim {
        1 => Vector::from_raw(vec![if k.is_multiple_of(2) { 1.0 } else { -1.0 }]),
        2 => {
            let t = 2.0 * std::f64::consts::PI * k as f64 / total as f64;
            Vector::from_raw(vec![t.cos(), t.sin()])
        }
        _ => {
            let mut rng = stream_rng(0, StreamTag::Directions, k as u64);
            crate::geometry::unit_direction(&mut rng, dim)
        }
    }
}

/// A point of D_R(x, y) that escapes Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct SpindleEscape {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongConvexityProbe {
    pub holds: bool,
    pub witness: Option<SpindleEscape>,
    pub pairs_checked: usize,
}

const SPINDLE_CANDIDATES: usize = 12;

/// Samples pairs x, y ∈ Ω and points of D_R(x, y), looking for one outside Ω.
pub fn strong_convexity_probe(
    omega: &SetSpec,
    radius: f64,
    cfg: &SamplerConfig,
) -> Result<StrongConvexityProbe> {
    positive("R", radius)?;
    cfg.validate()?;
    if omega.bounding_box().is_none() {
        return Err(SqcError::invalid(format!(
            "strong convexity probe needs a bounded set, got {}",
            omega.name()
        )));
    }
    let results = (0..cfg.n_pairs as u64)
        .into_par_iter()
        .map(|i| probe_pair(omega, radius, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;
    let pairs_checked = results.iter().filter(|r| r.0).count();
    let witness = results.into_iter().find_map(|r| r.1);
    Ok(StrongConvexityProbe {
        holds: witness.is_none(),
        witness,
        pairs_checked,
    })
}

fn probe_pair(
    omega: &SetSpec,
    radius: f64,
    seed: u64,
    index: u64,
) -> Result<(bool, Option<SpindleEscape>)> {
    let mut rng = stream_rng(seed, StreamTag::SetPairs, index);
    let bx = rng.random_bool(0.6);
    let by = rng.random_bool(0.6);
    let x = omega.sample_point(&mut rng, bx)?;
    let y = omega.sample_point(&mut rng, by)?;
    if x == y || x.dist2(&y) > 2.0 * radius {
        return Ok((false, None));
    }
    let frame = SpindleFrame::new(&x, &y, radius)?;
    let dim = x.dim();
    for k in 0..SPINDLE_CANDIDATES {
        let s = if k < 2 {
            0.0
        } else {
            frame.half * (2.0 * rng.random::<f64>() - 1.0)
        };
        let height = if k < SPINDLE_CANDIDATES / 2 {
            1.0 - 1e-9
        } else {
            rng.random::<f64>()
        };
        let mut z = match &frame.axis {
            Some(e) => frame.mid.add_scaled(s, e),
            None => frame.mid.clone(),
        };
        if dim > 1 {
            let g = Vector::from_raw(gaussian(&mut rng, dim));
            let perp = match &frame.axis {
                Some(e) => g.add_scaled(-g.dot(e), e),
                None => g,
            };
            let pn = perp.norm2();
            if pn > 0.0 {
                z = z.add_scaled(height * frame.profile(s) / pn, &perp);
            }
        }
        if frame.max_center_distance(&z) > radius {
            continue;
        }
        if !omega.contains(&z, DEFAULT_TOL)? {
            return Ok((true, Some(SpindleEscape { x, y, z })));
        }
    }
    Ok((true, None))
}

/// Result of marching along x₀ + t·v.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayProbeResult {
    pub direction_in_cone: bool,
    pub t_checked: f64,
    pub first_exit_t: Option<f64>,
}

/// Checks membership of x₀ + t·v on a doubling ladder of t ending at `t_max`,
/// then bisects the first failing rung down to the exit scale.
pub fn recession_ray_probe(
    omega: &SetSpec,
    x0: &Vector,
    v: &Vector,
    t_max: f64,
    steps: usize,
) -> Result<RayProbeResult> {
    x0.check_dim(v, "recession_ray_probe")?;
    positive("t_max", t_max)?;
    if steps == 0 {
        return Err(SqcError::invalid("ray probe needs at least one step"));
    }
    if v.is_zero() {
        return Err(SqcError::invalid("ray direction must be nonzero"));
    }
    if !omega.contains(x0, DEFAULT_TOL)? {
        return Err(SqcError::invalid(format!("ray origin {x0} is not in Ω")));
    }
    let inside = |t: f64| omega.contains(&x0.add_scaled(t, v), DEFAULT_TOL);
    let mut prev = 0.0;
    for k in 0..steps {
        let t = t_max * 0.5_f64.powi((steps - 1 - k) as i32);
        if !inside(t)? {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..200 {
                if hi - lo <= 1e-13 * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if inside(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(RayProbeResult {
                direction_in_cone: false,
                t_checked: t,
                first_exit_t: Some(hi),
            });
        }
        prev = t;
    }
    Ok(RayProbeResult {
        direction_in_cone: true,
        t_checked: t_max,
        first_exit_t: None,
    })
}
