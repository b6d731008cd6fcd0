use foldkit::design::{export_map, import_map, inverse_design, sweep, DesignQuery, SweepGrid};
use foldkit::model::{solve_equilibrium, BandSpec, HingeSpec};
use proptest::prelude::*;

const MM: f64 = 1e-3;

prop_compose! {
    fn any_grid()(
        kbs in prop::collection::vec(20.0f64..400.0, 1..4),
        max_layers in 1u32..=4,
        first in 20.0f64..40.0,
        step in 1.0f64..5.0,
        count in 1usize..8,
    ) -> SweepGrid {
        let bands = kbs
            .iter()
            .enumerate()
            .map(|(i, &kb)| BandSpec::new(format!("b{i}"), (12.0 + 4.0 * i as f64) * MM, kb).unwrap())
            .collect();
        let hinges = (1..=max_layers).map(|n| HingeSpec::layered(n, 10.0 * MM, 5.0 * MM).unwrap()).collect();
        let spacings = (0..count).map(|k| (first + k as f64 * step) * MM).collect();
        SweepGrid::new(spacings, bands, hinges).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_design_is_the_grid_argmin(grid in any_grid(), target_deg in 30.0f64..175.0) {
        let target = target_deg.to_radians();
        let map = sweep(&grid).unwrap();
        let result = inverse_design(&DesignQuery {
            target_angle: target,
            tolerance: 2f64.to_radians(),
            candidates: grid,
        })
        .unwrap();
        for e in &map.entries {
            prop_assert!(result.error <= (e.solution.alpha - target).abs());
        }
        // The reported prediction is a fresh solve of the chosen config.
        prop_assert_eq!(result.predicted, solve_equilibrium(&result.config).unwrap());
        prop_assert_eq!(result.error, (result.predicted.alpha - target).abs());
    }

    #[test]
    fn export_round_trips_at_four_decimals(grid in any_grid()) {
        let map = sweep(&grid).unwrap();
        let rows = import_map(&export_map(&map)).unwrap();
        prop_assert_eq!(rows.len(), map.len());
        for (row, e) in rows.iter().zip(&map.entries) {
            prop_assert_eq!(&row.band, e.band_label());
            prop_assert_eq!(row.layers, e.layers());
            prop_assert!((row.hook_spacing_mm - e.config.hook_spacing * 1e3).abs() <= 5e-5 + 1e-9);
            prop_assert!((row.alpha_deg - e.solution.alpha.to_degrees()).abs() <= 5e-5 + 1e-9);
            prop_assert_eq!(row.band_slack, e.solution.band_slack);
            prop_assert_eq!(row.stop_limited, e.solution.stop_limited);
        }
    }

    #[test]
    fn sweeps_are_deterministic(grid in any_grid()) {
        prop_assert_eq!(sweep(&grid).unwrap(), sweep(&grid).unwrap());
    }
}
