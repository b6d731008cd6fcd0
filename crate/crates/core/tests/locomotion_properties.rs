use foldkit::locomotion::{duty_rates, fit_curvature, simulate, DutySchedule, ModuleBody, Pose, Segment};
use proptest::prelude::*;

prop_compose! {
    fn any_body()(
        mass in 0.2e-3f64..2e-3,
        radius in 0.5e-3f64..3e-3,
        omega_max in 500.0f64..2000.0,
        speed_gain in 0.01f64..0.1,
        yaw_gain in 1e-5f64..1e-3,
        bias in -5.0f64..5.0,
    ) -> ModuleBody {
        ModuleBody::new(mass, radius, omega_max, speed_gain, yaw_gain)
            .unwrap()
            .with_bias(bias)
            .unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn single_motor_curvature_falls_towards_the_bias(body in any_body(), a in 0.05f64..1.0, b in 0.05f64..1.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let k_lo = duty_rates(&body, lo, 0.0).unwrap().curvature().unwrap();
        let k_hi = duty_rates(&body, hi, 0.0).unwrap().curvature().unwrap();
        prop_assert!(k_hi < k_lo);
        prop_assert!(k_hi > body.bias);
    }

    #[test]
    fn arc_length_matches_speed_times_duration(body in any_body(), d1 in 0.0f64..1.0, d2 in 0.0f64..1.0, duration in 0.1f64..5.0) {
        let rates = duty_rates(&body, d1, d2).unwrap();
        let traj = simulate(&body, &DutySchedule::constant(d1, d2, duration).unwrap(), 1e-2).unwrap();
        let expected = rates.speed * duration;
        prop_assert!((traj.path_length() - expected).abs() <= 1e-9 * expected.max(1e-12));
    }

    #[test]
    fn halving_dt_converges(body in any_body(), d1 in 0.2f64..1.0, d2 in 0.0f64..1.0) {
        let schedule = DutySchedule::new(vec![
            Segment::new(d1, d2, 1.0).unwrap(),
            Segment::new(d2, d1, 0.5).unwrap(),
        ])
        .unwrap();
        let end = |dt: f64| *simulate(&body, &schedule, dt).unwrap().final_pose().unwrap();
        let (p1, p2, p4) = (end(4e-3), end(2e-3), end(1e-3));
        let d12 = (p1.x - p2.x).hypot(p1.y - p2.y);
        let d24 = (p2.x - p4.x).hypot(p2.y - p4.y);
        // First-order method: successive differences shrink by about half,
        // and the Richardson estimate of the remaining error bounds the change.
        prop_assert!(d24 <= 0.6 * d12 + 1e-15, "{d24} vs {d12}");
        prop_assert!(d24 <= d12 + 1e-15);
    }

    #[test]
    fn curvature_ignores_rigid_motion(
        radius in 0.05f64..5.0,
        sweep in 0.5f64..6.0,
        ccw in any::<bool>(),
        theta in -3.2f64..3.2,
        tx in -10.0f64..10.0,
        ty in -10.0f64..10.0,
    ) {
        let sign = if ccw { 1.0 } else { -1.0 };
        let poses: Vec<Pose> = (0..40)
            .map(|k| {
                let a = sign * sweep * k as f64 / 39.0;
                Pose { t: k as f64, x: radius * a.cos(), y: radius * a.sin(), heading: 0.0 }
            })
            .collect();
        let (s, c) = theta.sin_cos();
        let moved: Vec<Pose> = poses
            .iter()
            .map(|p| Pose { x: c * p.x - s * p.y + tx, y: s * p.x + c * p.y + ty, ..*p })
            .collect();
        let k0 = fit_curvature(&poses).unwrap();
        let k1 = fit_curvature(&moved).unwrap();
        prop_assert!((k0 - sign / radius).abs() < 1e-6 / radius);
        prop_assert!((k0 - k1).abs() < 1e-6 * k0.abs());
    }

    #[test]
    fn simulation_is_deterministic(body in any_body(), d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
        let s = DutySchedule::constant(d1, d2, 1.0).unwrap();
        prop_assert_eq!(simulate(&body, &s, 1e-3).unwrap(), simulate(&body, &s, 1e-3).unwrap());
    }
}
