//! Euclidean projections: closed forms for the simple sets and Dykstra's
//! cyclic scheme for finite intersections of balls.

use crate::error::{Result, SqcError};
use crate::geometry::Vector;

pub const DYKSTRA_MAX_ITER: usize = 10_000;
pub const DYKSTRA_RESIDUAL: f64 = 1e-10;

pub(crate) fn onto_ball(center: &Vector, radius: f64, z: &Vector) -> Vector {
    let d = z - center;
    let r = d.norm2();
    if r <= radius {
        return z.clone();
    }
    center.add_scaled(radius / r, &d)
}

pub(crate) fn onto_halfspace(a: &Vector, b: f64, z: &Vector) -> Vector {
    let excess = a.dot(z) - b;
    if excess <= 0.0 {
        return z.clone();
    }
    z.add_scaled(-excess / a.norm2_sq(), a)
}

/// Nearest point of [x1, x2] together with its segment parameter.
pub(crate) fn onto_segment(x1: &Vector, x2: &Vector, z: &Vector) -> (Vector, f64) {
    let d = x2 - x1;
    let len2 = d.norm2_sq();
    if len2 == 0.0 {
        return (x1.clone(), 0.0);
    }
    let t = ((z - x1).dot(&d) / len2).clamp(0.0, 1.0);
    if t == 0.0 {
        (x1.clone(), t)
    } else if t == 1.0 {
        (x2.clone(), t)
    } else {
        (x1.add_scaled(t, &d), t)
    }
}

pub(crate) fn onto_box(lo: &Vector, hi: &Vector, z: &Vector) -> Vector {
    Vector::from_raw(
        z.coords()
            .iter()
            .zip(lo.coords().iter().zip(hi.coords()))
            .map(|(c, (l, h))| c.clamp(*l, *h))
            .collect(),
    )
}

/// Projection onto the ℓ1 ball via the sorted-threshold rule.
pub(crate) fn onto_l1_ball(center: &Vector, radius: f64, z: &Vector) -> Vector {
    let d = z - center;
    if d.coords().iter().map(|c| c.abs()).sum::<f64>() <= radius {
        return z.clone();
    }
    let mut mags: Vec<f64> = d.coords().iter().map(|c| c.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (k + 1) as f64;
        if *m > t {
            theta = t;
        } else {
            break;
        }
    }
    Vector::from_raw(
        center
            .coords()
            .iter()
            .zip(d.coords())
            .map(|(c, di)| c + di.signum() * (di.abs() - theta).max(0.0))
            .collect(),
    )
}

/// Dykstra's alternating projections onto ⋂ B(cᵢ, rᵢ).
///
/// Stops once a full cycle moves the iterate by less than the residual and
/// every ball is violated by less than the residual.
pub(crate) fn dykstra_balls(balls: &[(Vector, f64)], z: &Vector) -> Result<Vector> {
    if balls
        .iter()
        .all(|(c, r)| z.dist2(c) <= *r)
    {
        return Ok(z.clone());
    }
    let dim = z.dim();
    let mut x = z.clone();
    let mut increments = vec![Vector::zeros(dim); balls.len()];
    let mut residual = f64::INFINITY;
    for _ in 0..DYKSTRA_MAX_ITER {
        let start = x.clone();
        for ((c, r), p) in balls.iter().zip(increments.iter_mut()) {
            let shifted = &x + p;
            let y = onto_ball(c, *r, &shifted);
            *p = &shifted - &y;
            x = y;
        }
        let moved = x.dist2(&start);
        let violation = balls
            .iter()
            .map(|(c, r)| (x.dist2(c) - r).max(0.0))
            .fold(0.0, f64::max);
        residual = moved.max(violation);
        if residual < DYKSTRA_RESIDUAL {
            return Ok(x);
        }
    }
    Err(SqcError::NumericFailure {
        what: "Dykstra projection onto a ball intersection".into(),
        residual,
        iterations: DYKSTRA_MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    /// Exact projection onto the intersection of two balls: either one of the
    /// single-ball projections is feasible or the answer lies on the circle
    /// where both spheres meet.
    fn two_ball_exact(c1: &Vector, r1: f64, c2: &Vector, r2: f64, z: &Vector) -> Vector {
        let inside = |p: &Vector| p.dist2(c1) <= r1 + 1e-14 && p.dist2(c2) <= r2 + 1e-14;
        if inside(z) {
            return z.clone();
        }
        let p1 = onto_ball(c1, r1, z);
        if inside(&p1) {
            return p1;
        }
        let p2 = onto_ball(c2, r2, z);
        if inside(&p2) {
            return p2;
        }
        let d = c2 - c1;
        let dl = d.norm2();
        let e = d.scale(1.0 / dl);
        let s = (dl * dl + r1 * r1 - r2 * r2) / (2.0 * dl);
        let rho = (r1 * r1 - s * s).sqrt();
        let base = c1.add_scaled(s, &e);
        let w = z - &base;
        let perp = w.add_scaled(-w.dot(&e), &e);
        let pn = perp.norm2();
        base.add_scaled(rho / pn, &perp)
    }

    #[test]
    fn dykstra_matches_two_ball_closed_form() {
        let c1 = v(&[0.0, 0.0]);
        let c2 = v(&[1.0, 0.0]);
        let balls = vec![(c1.clone(), 1.0), (c2.clone(), 1.0)];
        for z in [
            v(&[0.5, 2.0]),
            v(&[-2.0, 0.3]),
            v(&[3.0, -1.0]),
            v(&[0.5, 0.1]),
            v(&[0.5, -5.0]),
        ] {
            let p = dykstra_balls(&balls, &z).unwrap();
            let q = two_ball_exact(&c1, 1.0, &c2, 1.0, &z);
            assert!(p.dist2(&q) < 1e-9, "{z}: {p} vs {q}");
        }
    }

    #[test]
    fn l1_projection_is_nearest() {
        let c = v(&[0.0, 0.0]);
        let p = onto_l1_ball(&c, 1.0, &v(&[2.0, 0.5]));
        assert!((p.coords()[0] - 1.0).abs() < 1e-15 && p.coords()[1].abs() < 1e-15);
        let p = onto_l1_ball(&c, 1.0, &v(&[1.0, 1.0]));
        assert!((p.coords()[0] - 0.5).abs() < 1e-15 && (p.coords()[1] - 0.5).abs() < 1e-15);
    }
}
