//! Dual-rail binary phase-shift keying receiver with loss.
//!
//! The probe is one photon split between an idler rail and a signal rail,
//! √(1−N_S)|1⟩_I|0⟩_S + √N_S|0⟩_I|1⟩_S. The signal rail picks up the phase
//! (−1)^bit, both rails pass through lossy channels and are recombined on a
//! balanced beam splitter whose outputs feed detectors D0 and D1. Bit 0 is
//! declared when D0 clicks and bit 1 when D1 clicks; no click is an erasure.
//! Dark counts are not modelled.

use std::f64::consts::FRAC_1_SQRT_2;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Trials handled by one parallel work unit.
const CHUNK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BpskConfig {
    pub n_s: f64,
    pub eta_s: f64,
    pub eta_i: f64,
    pub eta_d0: f64,
    pub eta_d1: f64,
    pub seed: u64,
    pub trials: u64,
}

impl BpskConfig {
    /// Lossless receiver with the given split and run size.
    pub fn lossless(n_s: f64, seed: u64, trials: u64) -> Self {
        Self::symmetric(n_s, 1.0, 1.0, seed, trials)
    }

    /// Equal transmittance `eta_t` on both rails and equal detector
    /// efficiency `eta_d`.
    pub fn symmetric(n_s: f64, eta_t: f64, eta_d: f64, seed: u64, trials: u64) -> Self {
        Self {
            n_s,
            eta_s: eta_t,
            eta_i: eta_t,
            eta_d0: eta_d,
            eta_d1: eta_d,
            seed,
            trials,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("n_s", self.n_s),
            ("eta_s", self.eta_s),
            ("eta_i", self.eta_i),
            ("eta_d0", self.eta_d0),
            ("eta_d1", self.eta_d1),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be positive".into()));
        }
        Ok(())
    }

    /// True when both rails and both detectors have equal efficiency.
    pub fn is_symmetric(&self) -> bool {
        self.eta_s == self.eta_i && self.eta_d0 == self.eta_d1
    }

    /// Overall efficiency η = η_t·η_d in the symmetric case.
    pub fn overall_efficiency(&self) -> f64 {
        self.eta_s * self.eta_d0
    }

    /// Click probabilities (P(D0), P(D1)) for a transmitted bit.
    pub fn click_probabilities(&self, bit: u8) -> (f64, f64) {
        let (a0, a1) = conditional_amplitudes(self.n_s, bit, self.eta_s, self.eta_i);
        (self.eta_d0 * a0 * a0, self.eta_d1 * a1 * a1)
    }
}

/// Output-port amplitudes (a_r0, a_r1) of the one-photon component after
/// loss, for transmitted `bit`. Squared, they are the probabilities that the
/// photon reaches D0 or D1.
pub fn conditional_amplitudes(n_s: f64, bit: u8, eta_s: f64, eta_i: f64) -> (f64, f64) {
    let phase = if bit == 0 { 1.0 } else { -1.0 };
    let a_s = phase * n_s.sqrt() * eta_s.sqrt();
    let a_i = (1.0 - n_s).sqrt() * eta_i.sqrt();
    ((a_s + a_i) * FRAC_1_SQRT_2, (a_s - a_i) * FRAC_1_SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BpskPredictions {
    /// Erasure probability averaged over equiprobable bits.
    pub p_erasure: f64,
    /// Probability that a click names the wrong bit. `None` when no click
    /// can occur.
    pub p_error_given_click: Option<f64>,
}

/// Outcome probabilities of the receiver for equiprobable bits.
pub fn analytic_predictions(cfg: &BpskConfig) -> BpskPredictions {
    let (c0, w0) = cfg.click_probabilities(0);
    let (w1, c1) = cfg.click_probabilities(1);
    let clicks = c0 + w0 + c1 + w1;
    let p_erasure = 1.0 - 0.5 * clicks;
    let p_error_given_click = (clicks > 0.0).then(|| (w0 + w1) / clicks);
    BpskPredictions {
        p_erasure: p_erasure.max(0.0),
        p_error_given_click,
    }
}

/// Closed forms for the symmetric case: (1 − η, 1/2 − √(N_S(1−N_S))).
pub fn symmetric_predictions(n_s: f64, eta: f64) -> (f64, f64) {
    (1.0 - eta, 0.5 - (n_s * (1.0 - n_s)).sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BitCounts {
    pub clicks_d0: u64,
    pub clicks_d1: u64,
    pub erasures: u64,
}

impl BitCounts {
    pub fn trials(&self) -> u64 {
        self.clicks_d0 + self.clicks_d1 + self.erasures
    }

    fn merge(self, other: Self) -> Self {
        Self {
            clicks_d0: self.clicks_d0 + other.clicks_d0,
            clicks_d1: self.clicks_d1 + other.clicks_d1,
            erasures: self.erasures + other.erasures,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BpskOutcomeCounts {
    pub bit0: BitCounts,
    pub bit1: BitCounts,
}

impl BpskOutcomeCounts {
    pub fn for_bit(&self, bit: u8) -> &BitCounts {
        if bit == 0 {
            &self.bit0
        } else {
            &self.bit1
        }
    }

    fn for_bit_mut(&mut self, bit: u8) -> &mut BitCounts {
        if bit == 0 {
            &mut self.bit0
        } else {
            &mut self.bit1
        }
    }

    pub fn trials(&self) -> u64 {
        self.bit0.trials() + self.bit1.trials()
    }

    pub fn erasures(&self) -> u64 {
        self.bit0.erasures + self.bit1.erasures
    }

    pub fn clicks(&self) -> u64 {
        self.trials() - self.erasures()
    }

    /// Clicks on the detector that names the other bit.
    pub fn errors(&self) -> u64 {
        self.bit0.clicks_d1 + self.bit1.clicks_d0
    }

    fn merge(self, other: Self) -> Self {
        Self {
            bit0: self.bit0.merge(other.bit0),
            bit1: self.bit1.merge(other.bit1),
        }
    }
}

/// Uniform variate in [0, 1) for trial `index`. Each trial owns one 64-bit
/// block of the ChaCha8 keystream at word position 2·index.
fn trial_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Simulates `cfg.trials` transmissions; trial t sends `bits[t % bits.len()]`.
/// Counts depend only on (seed, bits, trials), not on thread scheduling.
pub fn run_monte_carlo(cfg: &BpskConfig, bits: &[u8]) -> Result<BpskOutcomeCounts> {
    cfg.validate()?;
    if bits.is_empty() {
        return Err(Error::Domain("bit sequence must not be empty".into()));
    }
    if let Some(b) = bits.iter().find(|b| **b > 1) {
        return Err(Error::Domain(format!("bits must be 0 or 1, got {b}")));
    }
    let probs = [cfg.click_probabilities(0), cfg.click_probabilities(1)];
    let chunks = cfg.trials.div_ceil(CHUNK_TRIALS);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(cfg.trials);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_word_pos(2 * start as u128);
            let mut local = BpskOutcomeCounts::default();
            for t in start..end {
                let bit = bits[(t % bits.len() as u64) as usize];
                let (p0, p1) = probs[bit as usize];
                let u = trial_uniform(&mut rng);
                let slot = local.for_bit_mut(bit);
                if u < p0 {
                    slot.clicks_d0 += 1;
                } else if u < p0 + p1 {
                    slot.clicks_d1 += 1;
                } else {
                    slot.erasures += 1;
                }
            }
            local
        })
        .reduce(BpskOutcomeCounts::default, BpskOutcomeCounts::merge);
    Ok(counts)
}

/// Half-width of the 3σ binomial band for `n` trials with success
/// probability `p`.
pub fn three_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_examples() {
        let (a0, a1) = conditional_amplitudes(0.5, 0, 1.0, 1.0);
        assert!((a0 - 1.0).abs() < 1e-15 && a1 == 0.0);
        let (a0, a1) = conditional_amplitudes(0.0, 0, 1.0, 1.0);
        assert!((a0 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a1.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
        let (a0, a1) = conditional_amplitudes(0.25, 0, 1.0, 1.0);
        assert!((a0 * a0 - 0.9330127).abs() < 1e-6);
        assert!((a1 * a1 - 0.0669873).abs() < 1e-6);
        let (b0, b1) = conditional_amplitudes(0.25, 1, 1.0, 1.0);
        assert!((b0 * b0 - a1 * a1).abs() < 1e-15 && (b1 * b1 - a0 * a0).abs() < 1e-15);
    }

    #[test]
    fn prediction_examples() {
        let p = analytic_predictions(&BpskConfig::lossless(0.25, 0, 1));
        assert!(p.p_erasure.abs() < 1e-15);
        assert!((p.p_error_given_click.unwrap() - 0.0669873).abs() < 1e-6);
        for n_s in [0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
            let p = analytic_predictions(&BpskConfig::symmetric(n_s, 0.6, 0.6, 0, 1));
            assert!((p.p_erasure - 0.64).abs() < 1e-12);
            let (_, cond) = symmetric_predictions(n_s, 0.36);
            assert!((p.p_error_given_click.unwrap() - cond).abs() < 1e-12);
        }
        for eta in [0.1, 0.5, 1.0] {
            let p = analytic_predictions(&BpskConfig::symmetric(0.5, eta, 1.0, 0, 1));
            assert!(p.p_error_given_click.unwrap().abs() < 1e-15);
        }
        assert!(
            analytic_predictions(&BpskConfig::symmetric(0.3, 0.0, 1.0, 0, 1))
                .p_error_given_click
                .is_none()
        );
    }

    #[test]
    fn probabilities_are_conserved() {
        for bit in [0u8, 1] {
            for n_s in [0.0, 0.3, 0.7, 1.0] {
                let (a0, a1) = conditional_amplitudes(n_s, bit, 1.0, 1.0);
                assert!((a0 * a0 + a1 * a1 - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unequal_rails_shift_the_error() {
        let cfg = BpskConfig {
            n_s: 0.5,
            eta_s: 0.5,
            eta_i: 1.0,
            eta_d0: 1.0,
            eta_d1: 1.0,
            seed: 0,
            trials: 1,
        };
        assert!(!cfg.is_symmetric());
        let p = analytic_predictions(&cfg);
        assert!(p.p_error_given_click.unwrap() > 0.0);
        assert!((p.p_erasure - 0.25).abs() < 1e-12);
    }

    #[test]
    fn counts_are_reproducible_and_complete() {
        let cfg = BpskConfig::symmetric(0.25, 0.9, 0.8, 42, 200_003);
        let a = run_monte_carlo(&cfg, &[0, 1]).unwrap();
        let b = run_monte_carlo(&cfg, &[0, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials(), 200_003);
        assert_eq!(a.bit0.trials(), 100_002);
        let c = run_monte_carlo(&BpskConfig { seed: 43, ..cfg }, &[0, 1]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trial_draws_do_not_depend_on_chunking() {
        let cfg = BpskConfig::symmetric(0.25, 0.8, 1.0, 9, 3 * CHUNK_TRIALS + 17);
        let parallel = run_monte_carlo(&cfg, &[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (p0, p1) = cfg.click_probabilities(0);
        let mut serial = BitCounts::default();
        for _ in 0..cfg.trials {
            let u = trial_uniform(&mut rng);
            if u < p0 {
                serial.clicks_d0 += 1;
            } else if u < p0 + p1 {
                serial.clicks_d1 += 1;
            } else {
                serial.erasures += 1;
            }
        }
        assert_eq!(parallel.bit0, serial);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(run_monte_carlo(&BpskConfig::lossless(1.5, 0, 10), &[0]).is_err());
        assert!(run_monte_carlo(&BpskConfig::lossless(0.5, 0, 0), &[0]).is_err());
        assert!(run_monte_carlo(&BpskConfig::lossless(0.5, 0, 10), &[]).is_err());
        assert!(run_monte_carlo(&BpskConfig::lossless(0.5, 0, 10), &[2]).is_err());
        assert!(run_monte_carlo(&BpskConfig::symmetric(0.5, -0.1, 1.0, 0, 10), &[0]).is_err());
    }
}
