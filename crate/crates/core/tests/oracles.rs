//! Estimator and geometry values checked against independent brute-force
//! oracles. Each oracle value is frozen; the test recomputes it, confirms the
//! frozen number, then compares the library against it.

mod common;

use sqclab::engine::{
    boundedness_probe, lambda_interpolation_check, mu_hat, restriction_midpoint_modulus, sigma_hat,
    FunctionSpec, InterpolationOutcome, RegionSpec,
};
use sqclab::geometry::{NormSpec, SamplerConfig};
use sqclab::sets::{spindle_member, strong_convexity_probe, vial_inclusion_check, Ball, SetSpec};

use common::{cfg, v};

type P = [f64; 2];

fn l2(p: P) -> f64 {
    p[0].hypot(p[1])
}

fn l15(p: P) -> f64 {
    (p[0].abs().powf(1.5) + p[1].abs().powf(1.5)).powf(1.0 / 1.5)
}

fn dist_sq(x: P, y: P) -> f64 {
    (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)
}

fn mix(x: P, y: P, l: f64) -> P {
    [l * x[0] + (1.0 - l) * y[0], l * x[1] + (1.0 - l) * y[1]]
}

/// Smallest SQC ratio and smallest midpoint ratio over all grid pairs at the
/// given λ values.
fn grid_oracle(points: &[P], f: impl Fn(P) -> f64, lambdas: &[f64]) -> (f64, f64) {
    let (mut sigma, mut mu) = (f64::INFINITY, f64::INFINITY);
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let (x, y) = (points[a], points[b]);
            let d2 = dist_sq(x, y);
            let (fx, fy) = (f(x), f(y));
            for &l in lambdas {
                let band = l * (1.0 - l) * d2;
                if band >= 1e-14 {
                    sigma = sigma.min(2.0 * (fx.max(fy) - f(mix(x, y, l))) / band);
                }
            }
            mu = mu.min((0.5 * (fx + fy) - f(mix(x, y, 0.5))) / d2);
        }
    }
    (sigma, mu)
}

fn assert_frozen(label: &str, computed: f64, frozen: f64) {
    assert!(
        (computed - frozen).abs() <= 1e-12 * frozen.abs().max(1.0),
        "{label}: oracle recomputed {computed:.17e}, frozen {frozen:.17e}"
    );
}

/// Pitch 1e−3 along (1,0)–(0,1).
fn unit_segment_grid() -> Vec<P> {
    (0..=1000).map(|i| [1.0 - i as f64 / 1000.0, i as f64 / 1000.0]).collect()
}

const SEGMENT_L2_SIGMA: f64 = 1.000_283_165_135_979_1;
const SEGMENT_L2_MU: f64 = 6.259_383_200_646_329e-2;

#[test]
fn l2_norm_on_segment_matches_grid_oracle() {
    let c = SamplerConfig::default();
    let (sigma, mu) = grid_oracle(&unit_segment_grid(), l2, &c.lambda_nodes());
    assert_frozen("sigma", sigma, SEGMENT_L2_SIGMA);
    assert_frozen("mu", mu, SEGMENT_L2_MU);
    let region = RegionSpec::segment(v(&[1.0, 0.0]), v(&[0.0, 1.0])).unwrap();
    let f = FunctionSpec::norm(NormSpec::L2);
    let est = sigma_hat(&f, &region, &c).unwrap();
    assert!(est.sigma_hat > 0.0);
    assert!((est.sigma_hat - SEGMENT_L2_SIGMA).abs() <= 1e-4, "σ̂ = {}", est.sigma_hat);
    let m = mu_hat(&f, &region, &c).unwrap();
    assert!(m.mu_hat > 0.0);
    assert!((m.mu_hat - SEGMENT_L2_MU).abs() <= 1e-3, "μ̂ = {}", m.mu_hat);
}

/// 21 × 21 grid on [−1, 1]².
fn box_grid() -> Vec<P> {
    let g = 20;
    (0..=g)
        .flat_map(|i| (0..=g).map(move |j| [-1.0 + 2.0 * i as f64 / g as f64, -1.0 + 2.0 * j as f64 / g as f64]))
        .collect()
}

const BOX_L15_SIGMA: f64 = 4.177_371_857_655_202_7e-1;

#[test]
fn l15_norm_on_box_matches_grid_oracle() {
    let c = SamplerConfig::default();
    let (sigma, mu) = grid_oracle(&box_grid(), l15, &c.lambda_nodes());
    assert_frozen("sigma", sigma, BOX_L15_SIGMA);
    // Pairs on a line through the origin make the norm linear there.
    assert!(mu.abs() <= 1e-12);
    let region = RegionSpec::cube(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
    let f = FunctionSpec::norm(NormSpec::lp(1.5).unwrap());
    let est = sigma_hat(&f, &region, &c).unwrap();
    assert!(est.sigma_hat >= 1e-3);
    assert!(est.sigma_hat >= 0.5 * BOX_L15_SIGMA);
    assert!(est.sigma_hat <= BOX_L15_SIGMA + 1e-9);
    let m = mu_hat(&f, &region, &c).unwrap();
    assert!(est.sigma_hat >= 8.0 * m.mu_hat - 1e-6);
}

/// ‖·‖₁ is affine on the positive orthant, but (1,1) and (2,0.5) lie on
/// different level sets, so short pairs near one end keep the ratio near
/// the slope over (1−λ)d² rather than at zero.
const L1_OFF_LEVEL_SIGMA: f64 = 8.004_533_210_558_906e-1;

#[test]
fn l1_norm_off_level_segment_is_positive() {
    let region = RegionSpec::segment(v(&[1.0, 1.0]), v(&[2.0, 0.5])).unwrap();
    let est = sigma_hat(&FunctionSpec::norm(NormSpec::L1), &region, &SamplerConfig::default()).unwrap();
    assert!((est.sigma_hat - L1_OFF_LEVEL_SIGMA).abs() <= 1e-9, "σ̂ = {:.17e}", est.sigma_hat);
    let level = RegionSpec::segment(v(&[1.0, 1.0]), v(&[1.5, 0.5])).unwrap();
    let flat = sigma_hat(&FunctionSpec::norm(NormSpec::L1), &level, &SamplerConfig::default()).unwrap();
    assert!(flat.sigma_hat.abs() <= 1e-9);
}

/// √(t² + 1) on [0, R] at pitch R/1000 and the estimator's λ nodes.
fn ray_oracle(radius: f64) -> f64 {
    let pts: Vec<P> = (0..=1000).map(|i| [radius * i as f64 / 1000.0, 1.0]).collect();
    grid_oracle(&pts, l2, &SamplerConfig::default().lambda_nodes()).0
}

const RAY_SIGMA: [(f64, f64); 4] = [
    (1.0, 1.414_814_530_118_460_7),
    (10.0, 1.991_196_472_997_382_2e-1),
    (100.0, 2.001_033_196_789_993e-2),
    (1000.0, 2.001_132_301_507_849_6e-3),
];

#[test]
fn ray_decay_matches_grid_oracle() {
    for (radius, frozen) in RAY_SIGMA {
        let oracle = ray_oracle(radius);
        assert_frozen("ray", oracle, frozen);
    }
    let radii: Vec<f64> = RAY_SIGMA.iter().map(|r| r.0).collect();
    let rows = boundedness_probe(NormSpec::L2, &v(&[0.0, 1.0]), &v(&[1.0, 0.0]), &radii, &SamplerConfig::default())
        .unwrap();
    for (row, (_, oracle)) in rows.iter().zip(RAY_SIGMA) {
        assert!(row.sigma_hat > 0.0);
        assert!(row.sigma_hat <= row.envelope + 1e-9);
        assert!((row.sigma_hat - oracle).abs() <= 0.05 * oracle);
    }
    assert!(rows.windows(2).all(|w| w[1].sigma_hat < w[0].sigma_hat));
    for seed in 1..4 {
        let again = boundedness_probe(NormSpec::L2, &v(&[0.0, 1.0]), &v(&[1.0, 0.0]), &[1.0], &cfg(seed, 2000))
            .unwrap();
        assert!((again[0].sigma_hat - RAY_SIGMA[0].1).abs() <= 0.05 * RAY_SIGMA[0].1);
    }
}

/// Midpoint modulus of h(λ) = ‖(1−λ)x₀ + λx₁‖₂ over grid pairs with a grid
/// midpoint.
fn restriction_oracle(x0: P, x1: P, grid: usize) -> f64 {
    let h = |k: usize| {
        let l = k as f64 / grid as f64;
        l2([(1.0 - l) * x0[0] + l * x1[0], (1.0 - l) * x0[1] + l * x1[1]])
    };
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        for j in (i + 2..=grid).step_by(2) {
            let gap = (j - i) as f64 / grid as f64;
            best = best.min((0.5 * (h(i) + h(j)) - h((i + j) / 2)) / (gap * gap));
        }
    }
    best
}

const RESTRICTION_ALPHA: f64 = 1.831_758_583_430_200_8e-1;

#[test]
fn interpolation_with_oracle_alpha() {
    let (x0, x1) = ([-1.5, 0.5], [1.0, 1.25]);
    let alpha = restriction_oracle(x0, x1, 64);
    assert_frozen("alpha", alpha, RESTRICTION_ALPHA);
    let f = FunctionSpec::norm(NormSpec::L2);
    let lib = restriction_midpoint_modulus(&f, &v(&x0), &v(&x1), 64).unwrap();
    assert!((lib - alpha).abs() <= 1e-12);
    assert_eq!(
        lambda_interpolation_check(&f, &v(&x0), &v(&x1), alpha, 64).unwrap(),
        InterpolationOutcome::Pass
    );
    assert!(matches!(
        lambda_interpolation_check(&f, &v(&x0), &v(&x1), 2.0 * alpha + 0.1, 64).unwrap(),
        InterpolationOutcome::HypothesisFailure { .. }
    ));
}

/// Nearest member of a dense grid over [0, 1] × [−1, 2].
fn lens_projection_oracle(z: P) -> P {
    let inside = |p: P| l2(p) <= 1.0 && l2([p[0] - 1.0, p[1]]) <= 1.0;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    let n = 2000;
    for i in 0..=n {
        for j in 0..=2 * n {
            let p = [i as f64 / n as f64, -1.0 + j as f64 / n as f64];
            if inside(p) {
                let d = dist_sq(p, z);
                if d < best.0 {
                    best = (d, p);
                }
            }
        }
    }
    best.1
}

const LENS_PROJECTION: P = [0.5, 8.660_000_000_000_001e-1];

#[test]
fn ball_intersection_projection_matches_grid_oracle() {
    let z = [0.5, 2.0];
    let oracle = lens_projection_oracle(z);
    assert_frozen("lens x", oracle[0], LENS_PROJECTION[0]);
    assert_frozen("lens y", oracle[1], LENS_PROJECTION[1]);
    let lens = SetSpec::ball_intersection(
        vec![
            Ball {
                center: v(&[0.0, 0.0]),
                radius: 1.0,
            },
            Ball {
                center: v(&[1.0, 0.0]),
                radius: 1.0,
            },
        ],
        v(&[0.5, 0.0]),
    )
    .unwrap();
    let p = lens.project(&v(&z)).unwrap();
    assert!(p.dist2(&v(&oracle)) <= 1e-3, "{p} vs {oracle:?}");
    assert!(p.dist2(&v(&[0.5, 0.75f64.sqrt()])) <= 1e-8);
}

#[test]
fn spindle_membership_examples() {
    let (x, y) = (v(&[-0.6, 0.0]), v(&[0.6, 0.0]));
    assert!(spindle_member(&x, &y, 1.0, &v(&[0.0, 0.2]), 1e-12).unwrap());
    assert!(!spindle_member(&x, &y, 1.0, &v(&[0.0, 0.21]), 1e-12).unwrap());
    assert!(spindle_member(&x, &y, 1.0, &x, 0.0).unwrap());
    assert!(spindle_member(&x, &y, 1.0, &v(&[0.0, 0.0]), 0.0).unwrap());
    assert!(spindle_member(&x, &y, 2.0, &v(&[0.0, 0.5]), 0.0).is_ok());
    assert!(spindle_member(&x, &y, 0.5, &v(&[0.0, 0.0]), 0.0).is_err());
}

#[test]
fn box_is_not_strongly_convex() {
    let square = SetSpec::cube(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
    let (p1, p2) = (v(&[1.0, -0.5]), v(&[1.0, 0.5]));
    let vial = vial_inclusion_check(&square, &p1, &p2, 0.5, 1.0, 4096).unwrap();
    assert!(!vial.holds);
    assert!((vial.radius - 0.125).abs() <= 1e-15);
    let escape = vial.escape.expect("escape point");
    assert!(!square.contains(&escape, 1e-9).unwrap());
    assert!((escape.dist2(&vial.center) - vial.radius).abs() <= 1e-12);

    let probe = strong_convexity_probe(&square, 1.0, &cfg(2, 1000)).unwrap();
    assert!(!probe.holds);
    let w = probe.witness.expect("witness");
    assert!(square.contains(&w.x, 1e-9).unwrap() && square.contains(&w.y, 1e-9).unwrap());
    assert!(spindle_member(&w.x, &w.y, 1.0, &w.z, 1e-12).unwrap());
    assert!(!square.contains(&w.z, 1e-9).unwrap());

    let disk = SetSpec::euclidean_ball(v(&[0.0, 0.0]), 1.0).unwrap();
    assert!(vial_inclusion_check(&disk, &v(&[1.0, 0.0]), &v(&[-1.0, 0.0]), 0.5, 1.0, 4096).unwrap().holds);
    assert!(strong_convexity_probe(&disk, 1.0, &cfg(2, 1000)).unwrap().holds);
}
