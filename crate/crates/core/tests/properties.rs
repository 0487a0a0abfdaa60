//! Property tests for the resource arithmetic, encoding, and scheduling.

use colanet_core::data::{encode_counts, schedule_spikes, RawImage, NUM_PIXELS};
use colanet_core::digital::InputVector;
use colanet_core::plasticity::{
    conserved_update, resource_to_weight, threshold_potential, zero_weight_resource,
    PlasticityParams, ResourceVector,
};
use proptest::prelude::*;

fn valid_params() -> impl Strategy<Value = PlasticityParams> {
    (
        -2.0..-0.01f64,  // w_min
        0.01..2.0f64,    // w_max
        0u32..5,         // n_s
        0.0..0.9f64,     // alpha
    )
        .prop_map(|(w_min, w_max, n_s, alpha)| PlasticityParams {
            w_min,
            w_max,
            n_s,
            alpha,
            ..PlasticityParams::default()
        })
}

proptest! {
    #[test]
    fn weight_stays_in_range_and_increases_with_resource(
        params in valid_params(),
        a in -10.0..50.0f64,
        b in -10.0..50.0f64,
    ) {
        let wa = resource_to_weight(a, &params).unwrap();
        let wb = resource_to_weight(b, &params).unwrap();
        prop_assert!(wa >= params.w_min && wa < params.w_max);
        prop_assert!(wb >= params.w_min && wb < params.w_max);
        if a.max(0.0) < b.max(0.0) {
            prop_assert!(wa < wb);
        }
        if a <= 0.0 {
            prop_assert_eq!(wa, params.w_min);
        }
    }

    #[test]
    fn zero_weight_resource_round_trips(params in valid_params()) {
        let w0 = zero_weight_resource(&params).unwrap();
        prop_assert!(resource_to_weight(w0, &params).unwrap().abs() < 1e-12);
    }

    #[test]
    fn conserved_update_preserves_totals(
        params in valid_params(),
        len in 2usize..12,
        seed_deltas in proptest::collection::vec((-1.0..1.0f64, any::<bool>()), 2..12),
    ) {
        let state = ResourceVector::uniform(len, 1.5);
        let deltas: Vec<(usize, f64)> = seed_deltas
            .iter()
            .take(len - 1) // keep at least one non-targeted synapse
            .enumerate()
            .filter(|(_, (_, keep))| *keep)
            .map(|(i, (d, _))| (i, *d))
            .collect();
        let next = conserved_update(&state, &deltas, &params).unwrap();
        let before = state.total(params.n_s);
        let after = next.total(params.n_s);
        prop_assert!((before - after).abs() < 1e-9, "{before} -> {after}");
        // targeted synapses moved exactly by their delta
        for (i, d) in &deltas {
            prop_assert!((next.connected[*i] - (state.connected[*i] + d)).abs() < 1e-15);
        }
        // all non-targeted synapses moved by one shared amount
        let targeted: Vec<usize> = deltas.iter().map(|(i, _)| *i).collect();
        let moves: Vec<f64> = (0..len)
            .filter(|i| !targeted.contains(i))
            .map(|i| next.connected[i] - state.connected[i])
            .collect();
        for pair in moves.windows(2) {
            prop_assert!((pair[0] - pair[1]).abs() < 1e-15);
        }
        if let Some(first) = moves.first() {
            prop_assert!((next.reservoir - state.reservoir - first).abs() < 1e-15);
        }
    }

    #[test]
    fn compensation_vanishes_with_a_huge_reservoir(
        deltas in proptest::collection::vec(-1.0..1.0f64, 1..6),
    ) {
        let params = PlasticityParams {
            n_s: 1_000_000,
            ..PlasticityParams::default()
        };
        let state = ResourceVector::uniform(deltas.len() + 1, 0.0);
        let indexed: Vec<(usize, f64)> =
            deltas.iter().cloned().enumerate().collect();
        let next = conserved_update(&state, &indexed, &params).unwrap();
        let compensation = (next.reservoir - state.reservoir).abs();
        let magnitude: f64 = deltas.iter().map(|d| d.abs()).sum();
        prop_assert!(compensation < magnitude / 1_000_000.0 + f64::EPSILON);
    }

    #[test]
    fn threshold_is_invariant_under_non_positive_weights(
        weights in proptest::collection::vec(-1.0..1.0f64, 0..8),
        extra in proptest::collection::vec(-2.0..0.0f64, 0..8),
        alpha in 0.0..0.9f64,
    ) {
        let base = threshold_potential(&weights, alpha);
        let mut padded = weights.clone();
        padded.extend(extra);
        prop_assert_eq!(base, threshold_potential(&padded, alpha));
        prop_assert!(base >= 1.0);
    }

    #[test]
    fn schedule_round_trips_the_counts(
        raw in proptest::collection::vec(0u16..=10, 2..40),
    ) {
        let zeros = raw.iter().filter(|c| **c == 0).count();
        prop_assume!(zeros > 0 && zeros < raw.len());
        let counts = InputVector::new(raw.clone()).unwrap();
        let schedule = schedule_spikes(&counts, 10).unwrap();
        let mut reconstructed = vec![0u16; raw.len()];
        for tick in &schedule {
            for idx in tick {
                reconstructed[*idx as usize] += 1;
            }
        }
        prop_assert_eq!(reconstructed, raw);
    }

    #[test]
    fn encoding_is_monotone_in_pixel_intensity(
        a in 0u8..=255,
        b in 0u8..=255,
        s_max in 1u16..=10,
    ) {
        let mut pixels = vec![0u8; NUM_PIXELS];
        pixels[10] = a.max(128); // keep at least one pixel that encodes nonzero
        pixels[20] = b;
        let img = RawImage { pixels, label: 0 };
        let counts = encode_counts(&img, s_max).unwrap();
        if a.max(128) >= b {
            prop_assert!(counts.counts()[10] >= counts.counts()[20]);
        }
    }
}
