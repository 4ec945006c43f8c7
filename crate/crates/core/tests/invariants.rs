use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use ringglow_core::*;

fn ring_and_state() -> impl Strategy<Value = (usize, usize, i64, f64)> {
    (3usize..9).prop_flat_map(|n| (Just(n), 1..n.min(4), -12i64..12, 0.05f64..0.6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorized_equals_double_sum(
        (n, m, l, r) in ring_and_state(),
        theta in 0.0..PI,
        phi in 0.0..TAU,
    ) {
        let ring = AtomArray::single_ring(n, r).unwrap();
        let s = build_hpi_state(&ring, m, l, default_k_l()).unwrap();
        let d = Direction::new(theta, phi);
        let fast = omega_f(&s, &ring, d, Polarization::x()).unwrap();
        let slow = omega_f_bruteforce(&s, &ring, d, Polarization::x()).unwrap();
        prop_assert!(fast >= 0.0);
        prop_assert!((fast - slow).abs() <= 1e-11 * fast.max(1.0));
    }

    #[test]
    fn pattern_has_ring_symmetry(
        (n, m, l, r) in ring_and_state(),
        theta in 0.0..PI,
        phi in 0.0..TAU,
    ) {
        // A z dipole radiates azimuthally uniformly, so Ω_f keeps the ring's
        // n-fold symmetry: the imprinted phase only changes by a global factor.
        let ring = AtomArray::single_ring(n, r).unwrap();
        let s = build_hpi_state(&ring, m, l, default_k_l()).unwrap();
        let a = omega_f(&s, &ring, Direction::new(theta, phi), Polarization::z()).unwrap();
        let b = omega_f(&s, &ring, Direction::new(theta, phi + TAU / n as f64), Polarization::z()).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * a.max(1.0));
    }

    #[test]
    fn coupling_is_complex_symmetric_with_fixed_trace((n, m, _l, r) in ring_and_state()) {
        let ring = AtomArray::single_ring(n, r).unwrap();
        let c = build_effective_coupling(&ring, m, Polarization::x()).unwrap();
        let dim = c.dim();
        prop_assert_eq!(dim as u128, binomial(n, m));
        for i in 0..dim {
            prop_assert_eq!(c.get(i, i).re, -(m as f64) / 2.0);
            for j in 0..i {
                prop_assert!((c.get(i, j) - c.get(j, i)).norm() < 1e-14);
            }
        }
        prop_assert!((c.trace().re + (dim * m) as f64 / 2.0).abs() < 1e-10);
    }

    #[test]
    fn population_decays_monotonically((n, m, l, r) in ring_and_state()) {
        let ring = AtomArray::single_ring(n, r).unwrap();
        let s = build_hpi_state(&ring, m, l, default_k_l()).unwrap();
        let c = build_effective_coupling(&ring, m, Polarization::x()).unwrap();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let tr = fluorescence_trace(&s, &c, &times).unwrap();
        prop_assert_eq!(tr.intensity[0], 1.0);
        for w in tr.intensity.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
        prop_assert!(tr.emitted_power.iter().all(|&p| p >= -1e-10));
    }

    #[test]
    fn rank_inverts_unrank(n in 1usize..14, m_frac in 0.0f64..1.0, pick in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let manifold = enumerate_manifold(n, m).unwrap();
        let i = ((manifold.len() - 1) as f64 * pick) as usize;
        let config = manifold.unrank(i).unwrap();
        prop_assert_eq!(config.as_slice(), manifold.config(i));
        prop_assert_eq!(manifold.rank(&config).unwrap(), i);
    }
}
