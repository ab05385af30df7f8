//! Shared test harness: the squared Euclidean norm objective and small
//! constructors.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sqclab::engine::Objective;
use sqclab::geometry::{NormSpec, SamplerConfig, Vector};
use sqclab::sets::{Ball, SetSpec};
use sqclab::Result;

/// f(x) = ‖x‖₂², available to tests only.
pub struct SquaredNorm;

impl Objective for SquaredNorm {
    fn value(&self, x: &Vector) -> Result<f64> {
        Ok(x.norm2_sq())
    }
}

pub fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

pub fn cfg(seed: u64, n_pairs: usize) -> SamplerConfig {
    SamplerConfig {
        n_pairs,
        ..SamplerConfig::with_seed(seed)
    }
}

/// Prints one verdict line and returns the verdict.
pub fn verdict(criterion: u32, ok: bool, detail: &str) -> bool {
    println!("criterion {criterion}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// Number of set variants produced by [`random_set`].
pub const SET_VARIANTS: usize = 8;

/// A random planar set of the given variant, every one with a Euclidean
/// projection.
pub fn random_set(rng: &mut ChaCha8Rng, variant: usize) -> SetSpec {
    let mut pt = |s: f64| v(&[rng.random_range(-s..s), rng.random_range(-s..s)]);
    match variant {
        0 => SetSpec::euclidean_ball(pt(1.0), 0.5 + pt(0.5).norm2()).unwrap(),
        1 => SetSpec::norm_ball(NormSpec::L1, pt(1.0), 0.5 + pt(0.5).norm2()).unwrap(),
        2 => SetSpec::norm_ball(NormSpec::LInfinity, pt(1.0), 0.5 + pt(0.5).norm2()).unwrap(),
        3 => {
            let a = pt(1.0);
            let a = if a.norm2() < 1e-3 { v(&[1.0, 0.0]) } else { a };
            SetSpec::halfspace(a, pt(1.0).coords()[0]).unwrap()
        }
        4 => SetSpec::segment(pt(2.0), pt(2.0)).unwrap(),
        5 => {
            let lo = pt(1.0);
            let span = pt(1.0);
            let hi = v(&[lo.coords()[0] + 0.2 + span.coords()[0].abs(), lo.coords()[1] + 0.2 + span.coords()[1].abs()]);
            SetSpec::cube(lo, hi).unwrap()
        }
        6 => {
            let interior = pt(0.5);
            let balls = (0..3)
                .map(|_| {
                    let center = pt(1.0);
                    Ball {
                        radius: center.dist2(&interior) + 0.3,
                        center,
                    }
                })
                .collect();
            SetSpec::ball_intersection(balls, interior).unwrap()
        }
        _ => {
            let x = pt(1.0);
            let y = pt(1.0);
            let radius = 0.5 * x.dist2(&y) + 0.05 + pt(1.0).coords()[0].abs();
            SetSpec::spindle(x, y, radius).unwrap()
        }
    }
}
