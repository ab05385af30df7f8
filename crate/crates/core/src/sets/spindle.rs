//! Geometry of the spindle D_R(x, y): the intersection of every radius-R
//! Euclidean ball that contains both x and y.
//!
//! Everything reduces to the 2-plane through the midpoint spanned by the axis
//! `y − x` and the part of `z − m` orthogonal to it. In that plane the
//! admissible centers {c : ‖c − x‖ ≤ R, ‖c − y‖ ≤ R} form a lens bounded by
//! two circular arcs, and ‖z − c‖ is maximised on one of them.

use crate::error::{Result, SqcError};
use crate::geometry::Vector;

/// Plane coordinates of the spindle with respect to its midpoint.
#[derive(Debug, Clone)]
pub(crate) struct SpindleFrame {
    pub mid: Vector,
    /// Unit axis direction; `None` when x = y.
    pub axis: Option<Vector>,
    /// Half the distance between the endpoints.
    pub half: f64,
    /// Distance from the midpoint to the lens tips, √(R² − a²).
    pub apex: f64,
    pub radius: f64,
}

impl SpindleFrame {
    pub fn new(x: &Vector, y: &Vector, radius: f64) -> Result<Self> {
        x.check_dim(y, "spindle")?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SqcError::invalid(format!("spindle radius must be positive, got {radius}")));
        }
        let d = y - x;
        let len = d.norm2();
        if len > 2.0 * radius {
            return Err(SqcError::invalid(format!(
                "‖x − y‖₂ = {len} exceeds 2R = {}",
                2.0 * radius
            )));
        }
        let half = 0.5 * len;
        let axis = (len > 0.0).then(|| d.scale(1.0 / len));
        let mid = crate::geometry::lerp(x, y, 0.5);
        let apex = ((radius - half) * (radius + half)).max(0.0).sqrt();
        Ok(SpindleFrame {
            mid,
            axis,
            half,
            apex,
            radius,
        })
    }

    /// Axial coordinate, distance from the axis, and the unit direction away
    /// from the axis (None when z is on the axis or the set is a point).
    pub fn split(&self, z: &Vector) -> (f64, f64, Option<Vector>) {
        let w = z - &self.mid;
        let (s, perp) = match &self.axis {
            Some(e) => {
                let s = w.dot(e);
                (s, w.add_scaled(-s, e))
            }
            None => (0.0, w),
        };
        let rho = perp.norm2();
        let dir = (rho > 0.0).then(|| perp.scale(1.0 / rho));
        (s, rho, dir)
    }

    /// max{‖z − c‖₂ : c admissible}, evaluated exactly on the two boundary arcs.
    pub fn max_center_distance(&self, z: &Vector) -> f64 {
        let (s, rho, _) = self.split(z);
        let r = self.radius;
        let a = self.half;
        // Arcs are parametrised by φ ∈ [−φ₀, φ₀] with cos φ₀ = a/R.
        let phi0 = self.apex.atan2(a);
        let mut best = 0.0_f64;
        // Arc around x = (−a, 0): c = (−a + R cos φ, R sin φ).
        // Arc around y = ( a, 0): c = ( a − R cos φ, R sin φ).
        for sign in [1.0_f64, -1.0] {
            let u = a + sign * s;
            let center_at = |phi: f64| -> f64 {
                let cs = sign * (-a + r * phi.cos());
                let ct = r * phi.sin();
                (s - cs).hypot(rho - ct)
            };
            best = best.max(center_at(phi0)).max(center_at(-phi0));
            // ‖z − c‖² = const − 2R(u cos φ + ρ sin φ); the unconstrained
            // maximiser sits opposite the direction (u, ρ).
            if u != 0.0 || rho != 0.0 {
                let mut phi = rho.atan2(u) + std::f64::consts::PI;
                if phi > std::f64::consts::PI {
                    phi -= 2.0 * std::f64::consts::PI;
                }
                if phi.abs() <= phi0 {
                    best = best.max(center_at(phi));
                }
            }
        }
        best
    }

    #[cfg(test)]
    /// A unit vector orthogonal to the axis, used when z sits on the axis.
    pub fn any_normal(&self, dim: usize) -> Option<Vector> {
        if dim < 2 {
            return None;
        }
        let e = match &self.axis {
            Some(e) => e,
            None => return Some(Vector::basis(dim, 0)),
        };
        let k = (0..dim)
            .min_by(|&i, &j| e.coords()[i].abs().total_cmp(&e.coords()[j].abs()))
            .unwrap_or(0);
        let b = Vector::basis(dim, k);
        let w = b.add_scaled(-b.dot(e), e);
        let n = w.norm2();
        Some(w.scale(1.0 / n))
    }

    /// Nearest point of the spindle, solved in the plane through the axis
    /// and z: the far-centered arc if its radial projection stays on the
    /// near side of the axis, otherwise the nearer tip.
    pub fn project(&self, z: &Vector) -> Vector {
        let (s, rho, dir) = self.split(z);
        if s * s + (rho + self.apex).powi(2) <= self.radius * self.radius {
            return z.clone();
        }
        let e = match &self.axis {
            Some(e) => e,
            None => return self.mid.clone(),
        };
        let tip = || self.mid.add_scaled(self.half.copysign(s), e);
        let dir = match dir {
            Some(d) => d,
            None => return tip(),
        };
        let lift = rho + self.apex;
        let scale = self.radius / s.hypot(lift);
        let (ps, prho) = (s * scale, lift * scale - self.apex);
        if prho >= 0.0 {
            self.mid.add_scaled(ps, e).add_scaled(prho, &dir)
        } else {
            tip()
        }
    }

    /// The two radius-R balls whose intersection agrees with the spindle in
    /// the plane through the axis and z.
    #[cfg(test)]
    pub fn bounding_pair(&self, z: &Vector) -> Option<[(Vector, f64); 2]> {
        let (_, _, dir) = self.split(z);
        let dir = dir.or_else(|| self.any_normal(z.dim()))?;
        Some([
            (self.mid.add_scaled(self.apex, &dir), self.radius),
            (self.mid.add_scaled(-self.apex, &dir), self.radius),
        ])
    }

    /// Height of the lens above the axis at axial coordinate s, |s| ≤ a.
    pub fn profile(&self, s: f64) -> f64 {
        let r = self.radius;
        (((r - s) * (r + s)).max(0.0).sqrt() - self.apex).max(0.0)
    }
}

/// Whether z ∈ D_R(x, y) up to `tol`.
pub fn spindle_member(x: &Vector, y: &Vector, radius: f64, z: &Vector, tol: f64) -> Result<bool> {
    x.check_dim(z, "spindle_member")?;
    let frame = SpindleFrame::new(x, y, radius)?;
    Ok(frame.max_center_distance(z) <= radius + tol)
}
