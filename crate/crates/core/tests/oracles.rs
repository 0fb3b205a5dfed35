//! Cross-checks of closed forms against independent constructions.

use num_complex::Complex64;

use phasedisc::distributions::PhotonDistribution;
use phasedisc::gram::{binary_error_from_overlap, gram_row_from_pfrak};
use phasedisc::optimizer::{optimize_squeeze, solve_optimal};
use phasedisc::probes::{squeezed_energy, squeezed_gram_row, squeezed_params_from_fraction, Sign};

/// Number-basis amplitudes of the squeezed coherent state from the
/// annihilation eigen-relation (μa + νa†)|ψ⟩ = α|ψ⟩, which in the Fock basis
/// reads μ√(n+1) c_{n+1} + ν√n c_{n−1} = α cₙ.
fn squeezed_fock_distribution(alpha: f64, mu: f64, nu: f64, len: usize) -> Vec<f64> {
    let mut c = vec![0.0f64; len];
    c[0] = 1.0;
    c[1] = alpha / mu;
    for n in 1..len - 1 {
        c[n + 1] =
            (alpha * c[n] - nu * (n as f64).sqrt() * c[n - 1]) / (mu * ((n + 1) as f64).sqrt());
    }
    let total: f64 = c.iter().map(|x| x * x).sum();
    c.iter().map(|x| x * x / total).collect()
}

#[test]
fn squeezed_row_matches_fock_recurrence() {
    for (n_s, f, sign) in [
        (0.5, 0.3, Sign::Plus),
        (1.0, 0.168, Sign::Minus),
        (2.0, 0.05, Sign::Minus),
        (0.8, 0.9, Sign::Plus),
    ] {
        let p = squeezed_params_from_fraction(n_s, f, sign).unwrap();
        let probs = squeezed_fock_distribution(p.alpha, p.mu, p.nu, 400);
        assert!(probs[399] < 1e-30);
        let dist = PhotonDistribution::exact(probs).unwrap();
        assert!((dist.mean_energy().value - squeezed_energy(p.alpha, p.mu, p.nu)).abs() < 1e-10);
        for m in [2usize, 3, 4, 8] {
            let oracle = gram_row_from_pfrak(&dist.fold_mod_m(m).unwrap());
            let closed = squeezed_gram_row(p.alpha, p.mu, p.nu, m).unwrap();
            for (a, b) in oracle.entries().iter().zip(closed.entries()) {
                assert!((a - b).norm() < 1e-10, "n_s {n_s} f {f} m {m}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn squeezed_energy_reference_value() {
    // α = 1, μ = cosh ½, ν = sinh ½: e^{−1} + sinh²(½), evaluated in 40-digit arithmetic
    let (mu, nu) = (0.5f64.cosh(), 0.5f64.sinh());
    assert!((squeezed_energy(1.0, mu, nu) - 0.6394197585790642).abs() < 1e-12);
}

#[test]
fn binary_overlap_values() {
    let sigma = Complex64::new((-0.5f64).exp(), 0.0);
    assert!((binary_error_from_overlap(sigma).unwrap() - 0.10246995).abs() < 1e-7);
    assert_eq!(
        binary_error_from_overlap(Complex64::new(1.0, 0.0)).unwrap(),
        0.5
    );
    assert_eq!(
        binary_error_from_overlap(Complex64::new(0.0, 0.0)).unwrap(),
        0.0
    );
    assert!(binary_error_from_overlap(Complex64::new(0.8, 0.7)).is_err());
}

#[test]
fn spectrum_route_matches_closed_binary_value() {
    // λ = (3/2, 1/2) gives 1 − (√1.5 + √0.5)²/4
    let d = phasedisc::ModMDistribution::new(vec![0.75, 0.25]).unwrap();
    let pe = gram_row_from_pfrak(&d)
        .eigenvalues()
        .unwrap()
        .error_probability();
    assert!((pe - 0.0669872981077807).abs() < 1e-15);
    // λ = (3/2, 3/2, 0) gives 1 − (2√1.5)²/9 = 1/3. The zero eigenvalue comes
    // back from the transform as ~1e-16 and its square root shifts P̄ₑ by ~1e-8.
    let d = phasedisc::ModMDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
    let pe = gram_row_from_pfrak(&d)
        .eigenvalues()
        .unwrap()
        .error_probability();
    assert!((pe - 1.0 / 3.0).abs() < 1e-7);
}

#[test]
fn optimal_state_beats_every_family() {
    for (m, n_s) in [(3usize, 0.5), (8, 1.0), (8, 2.0), (16, 3.0)] {
        let best = solve_optimal(n_s, m).unwrap().error_probability;
        let squeezed = optimize_squeeze(n_s, m).unwrap().p_error;
        assert!(best <= squeezed, "m {m} n_s {n_s}");
    }
}
