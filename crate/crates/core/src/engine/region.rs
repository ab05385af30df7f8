//! Regions over which a modulus is estimated and the deterministic pair
//! sampler that feeds every sweep.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SqcError};
use crate::geometry::{lerp, sphere_point, stream_rng, NormSpec, StreamTag, Vector};
use crate::sets::project::onto_segment;

/// Where pairs (x, y) are drawn.
///
/// `SphereChords` is read pairwise: both endpoints lie on the sphere and each
/// chord between them is the set being tested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionRepr")]
pub enum RegionSpec {
    SegmentRegion { x1: Vector, x2: Vector },
    SphereChords { center: Vector, r: f64, n: NormSpec },
    BallRegion { center: Vector, radius: f64, n: NormSpec },
    BoxRegion { lo: Vector, hi: Vector },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
enum RegionRepr {
    SegmentRegion { x1: Vector, x2: Vector },
    SphereChords { center: Vector, r: f64, n: NormSpec },
    BallRegion { center: Vector, radius: f64, n: NormSpec },
    BoxRegion { lo: Vector, hi: Vector },
}

impl TryFrom<RegionRepr> for RegionSpec {
    type Error = SqcError;

    fn try_from(r: RegionRepr) -> Result<Self> {
        let region = match r {
            RegionRepr::SegmentRegion { x1, x2 } => RegionSpec::SegmentRegion { x1, x2 },
            RegionRepr::SphereChords { center, r, n } => RegionSpec::SphereChords { center, r, n },
            RegionRepr::BallRegion { center, radius, n } => {
                RegionSpec::BallRegion { center, radius, n }
            }
            RegionRepr::BoxRegion { lo, hi } => RegionSpec::BoxRegion { lo, hi },
        };
        region.validate()?;
        Ok(region)
    }
}

/// Share of Ball/Box pairs drawn as chords along a coordinate or diagonal
/// direction (one in eight).
const CHORD_SHARE: u32 = 8;

impl RegionSpec {
    pub fn segment(x1: Vector, x2: Vector) -> Result<Self> {
        let r = RegionSpec::SegmentRegion { x1, x2 };
        r.validate()?;
        Ok(r)
    }

    pub fn sphere_chords(center: Vector, r: f64, n: NormSpec) -> Result<Self> {
        let region = RegionSpec::SphereChords { center, r, n };
        region.validate()?;
        Ok(region)
    }

    pub fn ball(center: Vector, radius: f64, n: NormSpec) -> Result<Self> {
        let r = RegionSpec::BallRegion { center, radius, n };
        r.validate()?;
        Ok(r)
    }

    pub fn cube(lo: Vector, hi: Vector) -> Result<Self> {
        let r = RegionSpec::BoxRegion { lo, hi };
        r.validate()?;
        Ok(r)
    }

    /// Rejects regions without two distinct points.
    pub fn validate(&self) -> Result<()> {
        let radius = |what: &str, r: f64| {
            if r > 0.0 && r.is_finite() {
                Ok(())
            } else {
                Err(SqcError::invalid(format!("{what} must be positive, got {r}")))
            }
        };
        match self {
            RegionSpec::SegmentRegion { x1, x2 } => {
                x1.check_dim(x2, "segment region")?;
                if x1 == x2 {
                    return Err(SqcError::invalid("segment region has equal endpoints"));
                }
                Ok(())
            }
            RegionSpec::SphereChords { r, .. } => radius("sphere radius", *r),
            RegionSpec::BallRegion { radius: r, .. } => radius("ball radius", *r),
            RegionSpec::BoxRegion { lo, hi } => {
                lo.check_dim(hi, "box region")?;
                if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
                    return Err(SqcError::invalid("box region needs lo ≤ hi componentwise"));
                }
                if lo == hi {
                    return Err(SqcError::invalid("box region is a single point"));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RegionSpec::SegmentRegion { x1, .. } => x1.dim(),
            RegionSpec::SphereChords { center, .. } | RegionSpec::BallRegion { center, .. } => {
                center.dim()
            }
            RegionSpec::BoxRegion { lo, .. } => lo.dim(),
        }
    }

    /// Whether the region is a convex point set (SphereChords is not).
    pub fn is_convex(&self) -> bool {
        !matches!(self, RegionSpec::SphereChords { .. })
    }

    /// Euclidean diameter of the bounding box, the length scale for refinement.
    pub fn scale(&self) -> f64 {
        match self {
            RegionSpec::SegmentRegion { x1, x2 } => x1.dist2(x2),
            // Every ℓp ball sits inside the cube of half-width r.
            RegionSpec::SphereChords { center, r, .. }
            | RegionSpec::BallRegion { center, radius: r, .. } => 2.0 * r * (center.dim() as f64).sqrt(),
            RegionSpec::BoxRegion { lo, hi } => lo.dist2(hi),
        }
    }

    /// Whether z lies in the region (on the sphere, for SphereChords).
    pub fn contains(&self, z: &Vector) -> bool {
        match self {
            RegionSpec::SegmentRegion { x1, x2 } => onto_segment(x1, x2, z).0.dist2(z) <= 1e-12,
            RegionSpec::SphereChords { center, r, n } => (n.dist(z, center) - r).abs() <= 1e-9 * r,
            RegionSpec::BallRegion { center, radius, n } => n.dist(z, center) <= radius * (1.0 + 1e-12),
            RegionSpec::BoxRegion { lo, hi } => z
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .all(|(c, (l, h))| c >= l && c <= h),
        }
    }

    /// Maps a nearby point back into the region.
    pub(crate) fn retract(&self, z: &Vector) -> Vector {
        match self {
            RegionSpec::SegmentRegion { x1, x2 } => onto_segment(x1, x2, z).0,
            RegionSpec::BallRegion { center, radius, n } => {
                let d = n.dist(z, center);
                if d <= *radius {
                    z.clone()
                } else {
                    center.add_scaled(radius / d, &(z - center))
                }
            }
            RegionSpec::SphereChords { center, r, n } => {
                let d = n.dist(z, center);
                if d == 0.0 {
                    z.clone()
                } else {
                    center.add_scaled(r / d, &(z - center))
                }
            }
            RegionSpec::BoxRegion { lo, hi } => crate::sets::project::onto_box(lo, hi, z),
        }
    }

    /// The `index`-th sampled pair. For segments, pair 0 is the whole segment.
    pub fn pair(&self, seed: u64, index: u64) -> (Vector, Vector) {
        let mut rng = stream_rng(seed, StreamTag::Pairs, index);
        match self {
            RegionSpec::SegmentRegion { x1, x2 } => {
                if index == 0 {
                    return (x1.clone(), x2.clone());
                }
                let s: f64 = rng.random();
                let t: f64 = rng.random();
                (lerp(x2, x1, s), lerp(x2, x1, t))
            }
            RegionSpec::SphereChords { center, r, n } => {
                let x = sphere_point(&mut rng, center, *r, *n);
                let y = if rng.random_ratio(1, CHORD_SHARE) {
                    center.add_scaled(-1.0, &(&x - center))
                } else {
                    sphere_point(&mut rng, center, *r, *n)
                };
                (x, y)
            }
            RegionSpec::BallRegion { .. } | RegionSpec::BoxRegion { .. } => {
                let kind = rng.random_range(0..CHORD_SHARE);
                match kind {
                    0 => self.chord(&mut rng),
                    1 => (self.boundary_point(&mut rng), self.boundary_point(&mut rng)),
                    2 => (self.boundary_point(&mut rng), self.interior_point(&mut rng)),
                    _ => (self.interior_point(&mut rng), self.interior_point(&mut rng)),
                }
            }
        }
    }

    fn interior_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        match self {
            RegionSpec::BallRegion { center, radius, n } => {
                let dim = center.dim();
                for _ in 0..1000 {
                    let z = Vector::from_raw(
                        center
                            .coords()
                            .iter()
                            .map(|c| c + radius * rng.random_range(-1.0..1.0))
                            .collect(),
                    );
                    if n.dist(&z, center) <= *radius {
                        return z;
                    }
                }
                let u: f64 = rng.random();
                let p = sphere_point(rng, center, *radius, *n);
                lerp(&p, center, u.powf(1.0 / dim as f64))
            }
            RegionSpec::BoxRegion { lo, hi } => Vector::from_raw(
                lo.coords()
                    .iter()
                    .zip(hi.coords())
                    .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                    .collect(),
            ),
            _ => unreachable!("only solid regions have interiors to sample"),
        }
    }

    fn boundary_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        match self {
            RegionSpec::BallRegion { center, radius, n } => sphere_point(rng, center, *radius, *n),
            RegionSpec::BoxRegion { lo, hi } => {
                let mut z = self.interior_point(rng).into_coords();
                let k = rng.random_range(0..z.len());
                z[k] = if rng.random::<bool>() {
                    lo.coords()[k]
                } else {
                    hi.coords()[k]
                };
                Vector::from_raw(z)
            }
            _ => unreachable!("only solid regions have boundaries to sample"),
        }
    }

    /// The full chord through an interior point along a coordinate axis or a
    /// diagonal e_i ± e_j.
    fn chord(&self, rng: &mut ChaCha8Rng) -> (Vector, Vector) {
        let dim = self.dim();
        let p = self.interior_point(rng);
        let dirs = chord_directions(dim);
        let d = dirs[rng.random_range(0..dirs.len())].clone();
        let reach = self.scale();
        let forward = self.exit_along(&p, &d, reach);
        let backward = self.exit_along(&p, &d.scale(-1.0), reach);
        (p.add_scaled(forward, &d), p.add_scaled(-backward, &d))
    }

    /// Largest t ∈ [0, reach] with p + t·d still in the region, by bisection.
    fn exit_along(&self, p: &Vector, d: &Vector, reach: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, reach);
        if self.contains(&p.add_scaled(hi, d)) {
            return hi;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.contains(&p.add_scaled(mid, d)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn chord_directions(dim: usize) -> Vec<Vector> {
    let mut dirs: Vec<Vector> = (0..dim).map(|k| Vector::basis(dim, k)).collect();
    let w = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; dim];
                d[i] = w;
                d[j] = sign * w;
                dirs.push(Vector::from_raw(d));
            }
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_regions_rejected() {
        assert!(RegionSpec::segment(v(&[1.0, 0.0]), v(&[1.0, 0.0])).is_err());
        assert!(RegionSpec::ball(v(&[0.0]), 0.0, NormSpec::L2).is_err());
        assert!(RegionSpec::cube(v(&[0.0, 0.0]), v(&[0.0, 0.0])).is_err());
        assert!(RegionSpec::cube(v(&[0.0, 1.0]), v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn sampled_pairs_stay_in_region() {
        let regions = [
            RegionSpec::segment(v(&[1.0, 0.0]), v(&[0.0, 1.0])).unwrap(),
            RegionSpec::sphere_chords(v(&[0.0, 0.0, 0.0]), 2.0, NormSpec::LInfinity).unwrap(),
            RegionSpec::ball(v(&[2.0, 0.0]), 0.2, NormSpec::L1).unwrap(),
            RegionSpec::ball(v(&[1.0, 0.0]), 0.4, NormSpec::L2).unwrap(),
            RegionSpec::cube(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap(),
        ];
        for region in &regions {
            for i in 0..500 {
                let (x, y) = region.pair(9, i);
                assert!(region.contains(&x), "{x}");
                assert!(region.contains(&y), "{y}");
                assert_eq!(region.pair(9, i), (x, y));
            }
        }
        assert_eq!(
            regions[0].pair(9, 0),
            (v(&[1.0, 0.0]), v(&[0.0, 1.0]))
        );
    }

    #[test]
    fn chords_include_level_directions() {
        let region = RegionSpec::ball(v(&[1.0, 0.0]), 0.4, NormSpec::L2).unwrap();
        let vertical = (0..400)
            .map(|i| region.pair(1, i))
            .filter(|(x, y)| x.coords()[0] == y.coords()[0] && x != y)
            .count();
        assert!(vertical > 0);
    }

    #[test]
    fn json_round_trip() {
        let j = r#"{"SphereChords":{"center":[0,0],"r":2,"n":"L2"}}"#;
        let r: RegionSpec = serde_json::from_str(j).unwrap();
        let back: RegionSpec = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(r, back);
        assert!(serde_json::from_str::<RegionSpec>(r#"{"SphereChords":{"center":[0,0],"r":-2,"n":"L2"}}"#).is_err());
    }
}
