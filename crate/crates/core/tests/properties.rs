//! Property tests for norms, sets, estimators and reports.

mod common;

use proptest::prelude::*;
use rand::Rng;
use sqclab::engine::{
    certify, midpoint_conversion_check, sigma_hat, FunctionSpec, Objective, RegionSpec, Sweep,
};
use sqclab::geometry::{interpolate, norm, stream_rng, NormSpec, SamplerConfig, StreamTag, Vector};
use sqclab::report::Report;
use sqclab::sets::{spindle_member, SetSpec};
use sqclab::suite::{run_check, CheckSpec};
use sqclab::Result;

use common::{cfg, random_set, v, SquaredNorm, SET_VARIANTS};

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim)
}

fn any_norm() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        Just(NormSpec::L1),
        Just(NormSpec::L2),
        Just(NormSpec::LInfinity),
        (1.0..8.0f64).prop_map(|p| NormSpec::lp(p).unwrap()),
    ]
}

/// t ↦ ‖t − a‖ₙ.
struct ShiftedNorm {
    n: NormSpec,
    a: Vector,
}

impl Objective for ShiftedNorm {
    fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.n.of(&(x - &self.a)))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_homogeneity(x in coords(3), t in -5.0..5.0f64, n in any_norm()) {
        let x = Vector::new(x).unwrap();
        let lhs = norm(&x.scale(t), n).unwrap();
        let rhs = t.abs() * norm(&x, n).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn norm_triangle(x in coords(4), y in coords(4), n in any_norm()) {
        let (x, y) = (Vector::new(x).unwrap(), Vector::new(y).unwrap());
        let lhs = norm(&(&x + &y), n).unwrap();
        prop_assert!(lhs <= norm(&x, n).unwrap() + norm(&y, n).unwrap() + 1e-12);
    }

    #[test]
    fn lp_norm_nonincreasing_in_p(x in coords(5)) {
        let x = Vector::new(x).unwrap();
        let grid = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0, 200.0];
        let values: Vec<f64> = grid.iter().map(|&p| NormSpec::lp(p).unwrap().of(&x)).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert!(NormSpec::LInfinity.of(&x) <= values[values.len() - 1] * (1.0 + 1e-12));
    }

    #[test]
    fn interpolate_swaps_endpoints(x in coords(3), y in coords(3), k in 0u32..=1024) {
        let (x, y) = (Vector::new(x).unwrap(), Vector::new(y).unwrap());
        let lambda = k as f64 / 1024.0;
        prop_assert_eq!(interpolate(&x, &y, lambda).unwrap(), interpolate(&y, &x, 1.0 - lambda).unwrap());
    }

    #[test]
    fn sphere_chord_identity(seed in any::<u64>(), dim in 2usize..6, lambda in 0.0..1.0f64) {
        let r = 2.0;
        let mut rng = stream_rng(seed, StreamTag::Misc, 0);
        let mut on_sphere = || {
            let d: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            Vector::new(d.into_iter().map(|c| r * c / n).collect()).unwrap()
        };
        let (x1, x2) = (on_sphere(), on_sphere());
        let cos = x1.dot(&x2) / (r * r);
        let a = (1.0 - 2.0 * lambda + 2.0 * lambda * lambda + 2.0 * lambda * (1.0 - lambda) * cos).max(0.0);
        let xl = interpolate(&x1, &x2, lambda).unwrap();
        prop_assert!((xl.norm2() - r * a.sqrt()).abs() <= 1e-12);
        prop_assert!(1.0 - a.sqrt() >= (1.0 - a) / 2.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_laws(seed in any::<u64>(), variant in 0..SET_VARIANTS) {
        let mut rng = stream_rng(seed, StreamTag::Misc, 1);
        let set = random_set(&mut rng, variant);
        let mut point = || v(&[rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]);
        let z = point();
        let p = set.project(&z).unwrap();
        prop_assert!(set.contains(&p, 1e-9).unwrap());
        prop_assert!(set.project(&p).unwrap().dist2(&p) <= 1e-10);
        prop_assert!((set.distance(&z, NormSpec::L2).unwrap() - z.dist2(&p)).abs() <= 1e-8);
        for _ in 0..8 {
            let w = set.project(&point()).unwrap();
            prop_assert!((&z - &p).dot(&(&w - &p)) <= 1e-8, "{} z={} p={} w={}", set.name(), z, p, w);
        }
    }

    #[test]
    fn ball_distance_in_own_norm(c in coords(2), z in coords(2), r in 0.1..5.0f64, n in any_norm()) {
        let (c, z) = (Vector::new(c).unwrap(), Vector::new(z).unwrap());
        let ball = SetSpec::norm_ball(n, c.clone(), r).unwrap();
        let expected = (n.of(&(&z - &c)) - r).max(0.0);
        prop_assert_eq!(ball.distance(&z, n).unwrap(), expected);
    }

    #[test]
    fn radial_projection_exact(z in coords(3), r in 0.1..3.0f64) {
        let z = Vector::new(z).unwrap();
        let len = z.norm2();
        prop_assume!(len > r);
        let ball = SetSpec::euclidean_ball(Vector::zeros(3), r).unwrap();
        let p = ball.project(&z).unwrap();
        prop_assert!(p.dist2(&z.scale(r / len)) <= 1e-12);
    }

    #[test]
    fn spindle_sandwich(seed in any::<u64>(), a in 0.05..0.95f64, t in 0.0..1.0f64) {
        let radius = 1.0;
        let (x, y) = (v(&[-a, 0.0]), v(&[a, 0.0]));
        prop_assert!(spindle_member(&x, &y, radius, &interpolate(&x, &y, t).unwrap(), 0.0).unwrap());
        let mut rng = stream_rng(seed, StreamTag::Misc, 2);
        let z = v(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        if spindle_member(&x, &y, radius, &z, 1e-12).unwrap() {
            let h = (radius * radius - a * a).sqrt();
            let mut checked = 0;
            while checked < 1000 {
                let c = v(&[rng.random_range(-(radius - a)..(radius - a)), rng.random_range(-h..h)]);
                if c.dist2(&x) <= radius && c.dist2(&y) <= radius {
                    prop_assert!(z.dist2(&c) <= radius + 1e-9);
                    checked += 1;
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_invariance(
        seed in any::<u64>(),
        x1 in coords(2),
        x2 in coords(2),
        shift in prop::collection::vec(-4i32..4, 2),
        n in any_norm(),
    ) {
        let (x1, x2) = (Vector::new(x1).unwrap(), Vector::new(x2).unwrap());
        prop_assume!(x1.dist2(&x2) > 0.5);
        let a = v(&[shift[0] as f64, shift[1] as f64]);
        // Without refinement both sweeps evaluate corresponding pairs.
        let c = SamplerConfig { refine: 0, ..cfg(seed, 400) };
        let base = sigma_hat(&FunctionSpec::norm(n), &RegionSpec::segment(x1.clone(), x2.clone()).unwrap(), &c).unwrap();
        let moved = RegionSpec::segment(&x1 + &a, &x2 + &a).unwrap();
        let shifted = sigma_hat(&ShiftedNorm { n, a }, &moved, &c).unwrap();
        prop_assert!(
            (base.sigma_hat - shifted.sigma_hat).abs() <= 1e-10 * base.sigma_hat.abs().max(1.0),
            "{} vs {}", base.sigma_hat, shifted.sigma_hat
        );
    }

    #[test]
    fn ratio_defect_duality(seed in any::<u64>(), x1 in coords(2), x2 in coords(2)) {
        let (x1, x2) = (Vector::new(x1).unwrap(), Vector::new(x2).unwrap());
        prop_assume!(x1.dist2(&x2) > 0.5);
        let region = RegionSpec::segment(x1, x2).unwrap();
        let c = cfg(seed, 300);
        for f in [FunctionSpec::norm(NormSpec::L2), FunctionSpec::norm(NormSpec::lp(1.5).unwrap())] {
            let sweep = Sweep::run(&f, &region, &c).unwrap();
            let est = sweep.sigma_hat().unwrap();
            let eps = 1e-6 * est.sigma_hat.abs().max(1.0);
            if est.sigma_hat - eps >= 0.0 {
                prop_assert!(sweep.certify(est.sigma_hat - eps, 0.0).unwrap().passed);
            }
            let above = sweep.certify(est.sigma_hat + eps, 0.0).unwrap();
            prop_assert!(!above.passed);
            prop_assert!(est.witness.at_sigma(est.sigma_hat + eps).replay_defect() > 0.0);
        }
        let sq = Sweep::run(&SquaredNorm, &region, &c).unwrap();
        let est = sq.sigma_hat().unwrap();
        prop_assert!(est.sigma_hat >= 2.0 - 1e-6);
        prop_assert!(sq.certify(est.sigma_hat - 1e-6 * est.sigma_hat, 0.0).unwrap().passed);
        prop_assert!(!sq.certify(est.sigma_hat + 1e-6 * est.sigma_hat, 0.0).unwrap().passed);
    }

    #[test]
    // Below radius ~0.5 the sampled λ(1−λ)d² reaches 1e−11 against f ~ 1e−2 and
    // rounding alone moves the ratio by ~1e−6.
    fn midpoint_conversion_on_convex_regions(seed in any::<u64>(), center in coords(2), radius in 0.5..3.0f64) {
        let center = Vector::new(center).unwrap();
        let c = cfg(seed, 400);
        let ball = RegionSpec::ball(center.clone(), radius, NormSpec::L2).unwrap();
        let cube = RegionSpec::cube(center.add_scaled(-radius, &v(&[1.0, 1.0])), center.add_scaled(radius, &v(&[1.0, 1.0]))).unwrap();
        let omega = SetSpec::euclidean_ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let fs = [
            FunctionSpec::norm(NormSpec::L2),
            FunctionSpec::norm(NormSpec::lp(1.5).unwrap()),
            FunctionSpec::distance_to(omega, NormSpec::L2).unwrap(),
        ];
        for f in &fs {
            for region in [&ball, &cube] {
                prop_assert!(midpoint_conversion_check(f, region, &c, 1e-6).unwrap().holds);
            }
        }
        let origin_ball = RegionSpec::ball(Vector::zeros(2), radius, NormSpec::L2).unwrap();
        let sq = midpoint_conversion_check(&SquaredNorm, &origin_ball, &c, 1e-6).unwrap();
        prop_assert!(sq.holds);
        prop_assert!((sq.mu.mu_hat - 0.25).abs() <= 1e-9);
    }

    #[test]
    fn halfspace_distance_is_flat_not_violated(seed in any::<u64>()) {
        let f = FunctionSpec::distance_to(SetSpec::halfspace(v(&[1.0, 0.0]), 0.0).unwrap(), NormSpec::L2).unwrap();
        let region = RegionSpec::ball(v(&[1.0, 0.0]), 0.4, NormSpec::L2).unwrap();
        let est = sigma_hat(&f, &region, &cfg(seed, 500)).unwrap();
        prop_assert!(est.sigma_hat.abs() <= 1e-9, "σ̂ = {}", est.sigma_hat);
        prop_assert!(!certify(&f, &region, 1e-3, &cfg(seed, 500), 0.0).unwrap().passed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn checks_are_deterministic_and_round_trip(seed in any::<u64>(), which in 0usize..3) {
        let name = ["ex-halfspace", "lemma-1d-interpolation", "ex-projection-collapse"][which];
        let spec = CheckSpec::new(name).unwrap();
        let c = SamplerConfig { n_pairs: 300, ..SamplerConfig::with_seed(seed) };
        let mut a = run_check(&spec, &c).unwrap();
        let mut b = run_check(&spec, &c).unwrap();
        a.runtime_ms = 0;
        b.runtime_ms = 0;
        prop_assert_eq!(&a, &b);
        let report = Report::new("paper", vec![a]);
        let json = report.emit(sqclab::report::Format::Json);
        let back: Report = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, report);
    }
}
