use mbl_core::lattice::{coupling_from_modes, equilibrium_positions, fit_alpha, fit_alpha_trimmed, transverse_modes, TrapSpec};

#[test]
fn detuning_tunes_alpha_through_the_accessible_window() {
    let n = 10;
    let mut inside = Vec::new();
    let mut previous = 0.0;
    for k in 1..=40 {
        let mu = 10.0 + 0.01 * k as f64;
        let trap = TrapSpec::new(n, 10.0, 1.0, 1.0, mu);
        let c = coupling_from_modes(&trap).unwrap();
        let full = fit_alpha(&c).unwrap();
        let trimmed = fit_alpha_trimmed(&c, 1).unwrap();
        assert!(full.alpha > previous, "alpha grows with detuning");
        previous = full.alpha;
        assert!(c.get(0, 1).abs() >= c.get(0, n - 1).abs());
        if (0.95..=1.81).contains(&full.alpha) {
            inside.push((mu, full.alpha, trimmed.alpha));
        }
    }
    assert!(inside.len() >= 3, "{inside:?}");
    for (mu, a, t) in inside {
        assert!((a - t).abs() < 0.3, "μ = {mu}: full {a}, without edge ions {t}");
    }
}

#[test]
fn modes_are_consistent_for_larger_chains() {
    for n in [5, 12, 20] {
        let u = equilibrium_positions(n).unwrap();
        let m = transverse_modes(&u, 12.0).unwrap();
        assert!((m.frequencies[0] - 12.0).abs() < 1e-10);
        assert!(m.frequencies.iter().all(|&w| w > 0.0 && w <= 12.0 + 1e-10));
        let b = &m.mode_matrix;
        let gram = b.transpose() * b;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - target).abs() < 1e-10);
            }
        }
    }
}
