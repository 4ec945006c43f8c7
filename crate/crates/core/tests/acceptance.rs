//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p ringglow-core --test acceptance -- --nocapture`.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringglow_core::farfield::three_atom_normalization;
use ringglow_core::*;

fn verdict(name: &str, ok: bool, detail: impl AsRef<str>) {
    println!(
        "[{}] {name}: {}",
        if ok { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    assert!(ok, "{name}: {}", detail.as_ref());
}

fn random_dirs(seed: u64, count: usize) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random_range(-1.0..1.0);
            Direction::new(u.acos(), rng.random_range(0.0..TAU))
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn times(step: f64, t_max: f64) -> Vec<f64> {
    let n = (t_max / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn ring_trace(array: &AtomArray, m: usize, ls: &[i64], ts: &[f64]) -> Vec<FluorescenceTrace> {
    let c = build_effective_coupling(array, m, Polarization::x()).unwrap();
    let spec = decay_spectrum(&c).unwrap();
    ls.iter()
        .map(|&l| {
            let s = build_hpi_state(array, m, l, default_k_l()).unwrap();
            trace_with_spectrum(&s, &c, &spec, ts).unwrap()
        })
        .collect()
}

#[test]
fn three_atom_closed_form_oracle() {
    let start = Instant::now();
    let dirs = random_dirs(11, 100);
    let mut worst: f64 = 0.0;
    for r_bar in [0.1, 0.4 * PI, 2.0] {
        let ring = AtomArray::single_ring(3, r_bar / TAU).unwrap();
        for l in 0..3 {
            let s = build_hpi_state(&ring, 2, l, default_k_l()).unwrap();
            for &d in &dirs {
                // The closed form omits the 1/C(3,2) normalization of the double sum.
                let general =
                    three_atom_normalization() * omega_f(&s, &ring, d, Polarization::x()).unwrap();
                worst = worst.max(rel(general, three_atom_closed_form(d, l, r_bar)));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "three-atom closed form",
        worst <= 1e-11 && elapsed < Duration::from_secs(1),
        format!("worst rel {worst:.2e} (tol 1e-11), {elapsed:?} (limit 1 s)"),
    );
}

#[test]
fn factorized_matches_double_sum() {
    let start = Instant::now();
    let dirs = random_dirs(12, 100);
    let mut worst: f64 = 0.0;
    for (n, m) in [(4, 2), (6, 2), (8, 3), (12, 2)] {
        let ring = AtomArray::single_ring(n, 0.2).unwrap();
        for l in [1, 2, n as i64 / 2] {
            let s = build_hpi_state(&ring, m, l, default_k_l()).unwrap();
            for &d in &dirs {
                let fast = omega_f(&s, &ring, d, Polarization::x()).unwrap();
                let slow = omega_f_bruteforce(&s, &ring, d, Polarization::x()).unwrap();
                worst = worst.max((fast - slow).abs() / fast.max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "double-sum equivalence",
        worst <= 1e-11 && elapsed < Duration::from_secs(10),
        format!("worst rel {worst:.2e} (tol 1e-11), {elapsed:?} (limit 10 s)"),
    );
}

#[test]
fn complement_manifold_matches_single_photon() {
    let dirs = random_dirs(13, 200);
    let mut worst: f64 = 0.0;
    for n in 3..=5usize {
        let ring = AtomArray::single_ring(n, 0.2).unwrap();
        for l in 0..n as i64 {
            let multi = build_hpi_state(&ring, n - 1, l, default_k_l()).unwrap();
            let single = build_hpi_state(&ring, 1, l, default_k_l()).unwrap();
            for &d in &dirs {
                let a = omega_f(&multi, &ring, d, Polarization::x()).unwrap();
                let b = omega_f(&single, &ring, d, Polarization::x()).unwrap();
                worst = worst.max(rel(a, b));
            }
        }
    }
    verdict(
        "M = N-1 correspondence",
        worst <= 1e-11,
        format!("worst rel {worst:.2e} (tol 1e-11)"),
    );
}

#[test]
fn mode_symmetry() {
    let mut worst_even: f64 = 0.0;
    for n in [4usize, 12] {
        let ring = AtomArray::single_ring(n, 0.2).unwrap();
        for l in 0..n as i64 {
            let a = build_hpi_state(&ring, 2, l, default_k_l()).unwrap();
            let b = build_hpi_state(&ring, 2, n as i64 - l, default_k_l()).unwrap();
            let ga = sample_grid(&a, &ring, Polarization::x(), 37, 72).unwrap();
            let gb = sample_grid(&b, &ring, Polarization::x(), 37, 72).unwrap();
            for (x, y) in ga.values.iter().zip(&gb.values) {
                worst_even = worst_even.max(rel(*x, *y));
            }
        }
    }
    let mut worst_small: f64 = 0.0;
    let ring = AtomArray::single_ring(5, 0.2)
        .unwrap()
        .scaled(1e-6)
        .unwrap();
    for m in 1..5 {
        for l in 0..5 {
            let a = build_hpi_state(&ring, m, l, default_k_l()).unwrap();
            let b = build_hpi_state(&ring, m, -l, default_k_l()).unwrap();
            let ga = sample_grid(&a, &ring, Polarization::x(), 37, 72).unwrap();
            let gb = sample_grid(&b, &ring, Polarization::x(), 37, 72).unwrap();
            for (x, y) in ga.values.iter().zip(&gb.values) {
                worst_small = worst_small.max(rel(*x, *y));
            }
        }
    }
    verdict(
        "mode symmetry",
        worst_even <= 1e-11 && worst_small <= 1e-11,
        format!("l <-> N-l worst {worst_even:.2e}, N=5 r->0 l <-> -l worst {worst_small:.2e} (tol 1e-11)"),
    );
}

#[test]
fn side_scattering_peak_counts() {
    let start = Instant::now();
    let mut counts = Vec::new();
    for (n, l) in [(12usize, 3i64), (4, 1)] {
        let ring = AtomArray::single_ring(n, 0.2).unwrap();
        let s = build_hpi_state(&ring, 2, l, default_k_l()).unwrap();
        let grid = sample_grid(&s, &ring, Polarization::x(), 181, 721).unwrap();
        counts.push(count_azimuthal_peaks(&grid, PI / 2.0).unwrap());
    }
    let elapsed = start.elapsed();
    verdict(
        "peak counts",
        counts == [12, 4] && elapsed < Duration::from_secs(5),
        format!(
            "N=12 l=3: {}, N=4 l=1: {} (want 12, 4), {elapsed:?} (limit 5 s)",
            counts[0], counts[1]
        ),
    );
}

#[test]
fn spectrum_shape() {
    let ring = AtomArray::single_ring(4, 0.2).unwrap();
    let spec =
        decay_spectrum(&build_effective_coupling(&ring, 2, Polarization::x()).unwrap()).unwrap();
    let total: f64 = spec.eigenvalues.iter().map(|l| -l.re).sum();
    let trace_err = (total - 6.0).abs() / 6.0;
    let far = ring.scaled(1e3).unwrap();
    let far_spec =
        decay_spectrum(&build_effective_coupling(&far, 2, Polarization::x()).unwrap()).unwrap();
    let far_worst = far_spec
        .rates
        .iter()
        .map(|r| (r - 2.0).abs() / 2.0)
        .fold(0.0, f64::max);
    verdict(
        "spectrum shape",
        spec.len() == 6 && trace_err <= 1e-8 && far_worst <= 1e-2,
        format!(
            "{} eigenvalues, trace rel err {trace_err:.2e} (tol 1e-8), x1000 worst rate dev {far_worst:.2e} (tol 1e-2)",
            spec.len()
        ),
    );
}

#[test]
fn sub_and_superradiance_ordering() {
    const MARGIN: f64 = 1e-4;
    let ring = AtomArray::single_ring(4, 0.2).unwrap();
    let ts = times(0.01, 4.0);
    let traces = ring_trace(&ring, 2, &[1, 2, 4], &ts);
    let (l1, l2, l4) = (&traces[0], &traces[1], &traces[2]);

    let sub = ts
        .iter()
        .zip(&l2.intensity)
        .filter(|(t, _)| (2.0..=4.0).contains(*t))
        .map(|(t, i)| i - (-2.0 * t).exp())
        .fold(f64::INFINITY, f64::min);
    let sup = ts
        .iter()
        .zip(&l4.intensity)
        .filter(|(t, _)| **t > 0.0 && **t <= 0.5)
        .map(|(t, i)| (-2.0 * t).exp() - i)
        .fold(f64::INFINITY, f64::min);
    let last = ts.len() - 1;
    let best = l2.intensity[last] - l1.intensity[last].max(l4.intensity[last]);
    verdict(
        "sub/superradiance ordering",
        sub >= MARGIN && sup >= MARGIN && best >= MARGIN,
        format!(
            "min(I_l2 - e^-2t) on [2,4] = {sub:.3e}; min(e^-2t - I_l4) on (0,0.5] = {sup:.3e}; I_l2 - max(I_l1, I_l4) at 4 = {best:.3e} (margin 1e-4)"
        ),
    );
}

#[test]
fn twelve_atom_longevity() {
    let ring = AtomArray::single_ring(12, 0.2).unwrap();
    let traces = ring_trace(&ring, 2, &[3, 4, 5, 6], &[6.0]);
    let at6: Vec<f64> = traces.iter().map(|t| t.intensity[0]).collect();
    let ok = at6[2] > at6[0] && at6[2] > at6[1] && at6[2] > at6[3];
    verdict(
        "N=12 longevity ordering",
        ok,
        format!(
            "I(6) for l=3,4,5,6: {:.4e} {:.4e} {:.4e} {:.4e}",
            at6[0], at6[1], at6[2], at6[3]
        ),
    );
}

/// `Ω_f(θ = 0)` over the full-sphere mean of `Ω_f`.
fn forward_ratio(n_z: usize, l: i64) -> f64 {
    let a = AtomArray::stacked_rings(8, n_z, 0.2, 0.35).unwrap();
    let s = build_hpi_state(&a, 2, l, default_k_l()).unwrap();
    let fwd = omega_f(&s, &a, Direction::new(0.0, 0.0), Polarization::x()).unwrap();
    fwd / sphere_mean(&s, &a, Polarization::x(), 300, 300).unwrap()
}

#[test]
fn stacked_forward_enhancement() {
    // Ratios below this are rounding noise on a structural zero, not signal.
    const ROUNDOFF_FLOOR: f64 = 1e-12;
    let ratios: Vec<f64> = (1..=3).map(|n_z| forward_ratio(n_z, 2)).collect();
    let ok = ratios[0] > ROUNDOFF_FLOOR && ratios[1] > ratios[0] && ratios[2] > ratios[1];
    verdict(
        "stacked-ring forward enhancement (l=2)",
        ok,
        format!(
            "Ω(0)/mean for N_z=1,2,3: {:.3e} {:.3e} {:.3e} (must exceed {ROUNDOFF_FLOOR:e} and increase)",
            ratios[0], ratios[1], ratios[2]
        ),
    );
}

#[test]
fn stacked_forward_enhancement_supplementary() {
    let l4: Vec<f64> = (1..=3).map(|n_z| forward_ratio(n_z, 4)).collect();
    let cone: Vec<f64> = (1..=3)
        .map(|n_z| {
            let a = AtomArray::stacked_rings(8, n_z, 0.2, 0.35).unwrap();
            let s = build_hpi_state(&a, 2, 2, default_k_l()).unwrap();
            let g = sample_grid(&s, &a, Polarization::x(), 181, 72).unwrap();
            let peak = (0..=30).flat_map(|i| g.row(i).to_vec()).fold(0.0, f64::max);
            peak / sphere_mean(&s, &a, Polarization::x(), 300, 300).unwrap()
        })
        .collect();
    let ok = l4.windows(2).all(|w| w[1] > w[0]) && cone.windows(2).all(|w| w[1] > w[0]);
    verdict(
        "stacked-ring forward enhancement (l=4 on axis, l=2 within 30 deg; informational)",
        ok,
        format!(
            "l=4 Ω(0)/mean {:.3} {:.3} {:.3}; l=2 cone max/mean {:.3} {:.3} {:.3}",
            l4[0], l4[1], l4[2], cone[0], cone[1], cone[2]
        ),
    );
}

#[test]
fn stacked_three_photon_subradiance() {
    let at4: Vec<f64> = (1..=2)
        .map(|n_z| {
            let a = AtomArray::stacked_rings(8, n_z, 0.2, 0.35).unwrap();
            ring_trace(&a, 3, &[3], &[4.0])[0].intensity[0]
        })
        .collect();
    verdict(
        "stacked-ring three-photon subradiance",
        at4[1] > at4[0],
        format!("I(4) N_z=1: {:.4e}, N_z=2: {:.4e}", at4[0], at4[1]),
    );
}

#[test]
fn noninteracting_fluorescence() {
    let ts = times(0.01, 5.0);
    let mut worst: f64 = 0.0;
    for (n, m) in [(4usize, 2usize), (8, 3)] {
        let far = AtomArray::single_ring(n, 0.2).unwrap().scaled(1e3).unwrap();
        let ls: Vec<i64> = (0..n as i64).collect();
        for tr in ring_trace(&far, m, &ls, &ts) {
            for (t, i) in ts.iter().zip(&tr.intensity) {
                worst = worst.max((i - (-(m as f64) * t).exp()).abs());
            }
        }
    }
    verdict(
        "noninteracting fluorescence",
        worst < 1e-3,
        format!("max |I - e^-MΓt| = {worst:.3e} (tol 1e-3)"),
    );
}

#[test]
fn integrator_cross_check() {
    let ring = AtomArray::single_ring(4, 0.2).unwrap();
    let c = build_effective_coupling(&ring, 2, Polarization::x()).unwrap();
    let ts = times(0.05, 5.0);
    let mut worst: f64 = 0.0;
    for l in 0..4 {
        let s = build_hpi_state(&ring, 2, l, default_k_l()).unwrap();
        let eig = fluorescence_trace(&s, &c, &ts).unwrap();
        assert_eq!(eig.method, EvolutionMethod::Eigen);
        let rk4 = integrate_rk4(&s, &c, &ts, 1e-3).unwrap();
        for (a, b) in eig.intensity.iter().zip(&rk4.intensity) {
            worst = worst.max((a - b).abs());
        }
    }
    verdict(
        "integrator cross-check",
        worst <= 1e-6,
        format!("max |ΔI| = {worst:.3e} (tol 1e-6)"),
    );
}
