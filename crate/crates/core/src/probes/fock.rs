//! Truncated two-mode Fock expansions of the entangled probe families.
//!
//! These build the number-basis amplitudes of a probe directly, take the
//! signal photon-number marginal, fold it and form the Gram row from the
//! folded distribution. Nothing here uses the closed-form rows or the Bessel
//! kernel, so the result is an independent cross-check of both.

use serde::Serialize;

use crate::distributions::{ModMDistribution, PhotonDistribution};
use crate::error::{Error, Result};
use crate::gram::{gram_row_from_pfrak, GramRow};
use crate::probes::ProbeSpec;

/// Largest number-state index kept in any mode.
pub const INDEX_CAP: usize = 4096;
/// Target bound on the omitted probability mass.
pub const TAIL_TARGET: f64 = 1e-12;

/// One number-basis component |k⟩_I |n⟩_S with a real amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockTerm {
    pub idler: usize,
    pub signal: usize,
    pub amplitude: f64,
}

/// Real-amplitude two-mode state truncated in the number basis. The squared
/// amplitudes sum to `1 − tail_bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoModeFockState {
    terms: Vec<FockTerm>,
    tail_bound: f64,
}

impl TwoModeFockState {
    pub fn terms(&self) -> &[FockTerm] {
        &self.terms
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Two-mode squeezed vacuum Σ √((1−q)qⁿ) |n⟩|n⟩, q = n_s/(n_s+1).
    pub fn tmsv(n_s: f64) -> Result<Self> {
        if !(n_s >= 0.0) || !n_s.is_finite() {
            return Err(Error::Domain(format!("n_s must be >= 0, got {n_s}")));
        }
        let q = n_s / (n_s + 1.0);
        let mut terms = Vec::new();
        let mut weight = 1.0 - q;
        // tail after keeping 0..=n is q^{n+1}
        let mut tail = q;
        for n in 0..=INDEX_CAP {
            terms.push(FockTerm {
                idler: n,
                signal: n,
                amplitude: weight.sqrt(),
            });
            if tail < TAIL_TARGET {
                return Ok(Self {
                    terms,
                    tail_bound: tail,
                });
            }
            weight *= q;
            tail *= q;
        }
        Err(Error::Truncation {
            tail,
            cap: INDEX_CAP,
        })
    }

    /// Pair-coherent state ∝ Σ ζⁿ/n! |n⟩|n⟩ for real ζ ≥ 0.
    pub fn pcs(zeta: f64) -> Result<Self> {
        if !(zeta >= 0.0) || !zeta.is_finite() {
            return Err(Error::Domain(format!("zeta must be >= 0, got {zeta}")));
        }
        if zeta == 0.0 {
            return Ok(Self {
                terms: vec![FockTerm {
                    idler: 0,
                    signal: 0,
                    amplitude: 1.0,
                }],
                tail_bound: 0.0,
            });
        }
        let ln_z2 = 2.0 * zeta.ln();
        // ln wₙ with wₙ = ζ^{2n}/(n!)², ratio w_{n+1}/wₙ = ζ²/(n+1)²
        let mut log_weights = vec![0.0];
        loop {
            let n = log_weights.len() - 1;
            let next = log_weights[n] + ln_z2 - 2.0 * ((n + 1) as f64).ln();
            let ratio = zeta * zeta / ((n + 2) as f64).powi(2);
            if ratio < 0.5 {
                let tail = tail_fraction(&log_weights, next, ratio);
                if tail < TAIL_TARGET {
                    let terms = normalised(&log_weights, tail)
                        .enumerate()
                        .map(|(n, amplitude)| FockTerm {
                            idler: n,
                            signal: n,
                            amplitude,
                        })
                        .collect();
                    return Ok(Self {
                        terms,
                        tail_bound: tail,
                    });
                }
            }
            if n + 1 > INDEX_CAP {
                let tail = tail_fraction(&log_weights, next, ratio.min(0.5));
                return Err(Error::Truncation {
                    tail,
                    cap: INDEX_CAP,
                });
            }
            log_weights.push(next);
        }
    }

    /// Entangled coherent state (|α⟩|α⟩ − |−α⟩|−α⟩)/𝒩 for real α > 0. Its
    /// amplitudes are ∝ α^{k+n}/√(k! n!) on k + n odd and zero otherwise.
    pub fn ecs(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("ECS alpha must be > 0, got {alpha}")));
        }
        let a = alpha * alpha;
        let ln_a = a.ln();
        // single-mode Poisson log weights ln(aᵏ/k!)
        let mut single = vec![0.0];
        loop {
            let k = single.len() - 1;
            let next = single[k] + ln_a - ((k + 1) as f64).ln();
            let ratio = a / (k + 2) as f64;
            if ratio < 0.5 {
                let (log_weights, cells) = ecs_grid(&single);
                // every omitted cell has k > K or n > K; each of those two sets
                // weighs at most e^a Σ_{k>K} aᵏ/k!
                let log_total = log_sum_exp(&log_weights);
                let tail = 2.0 * (next + a - log_total).exp() / (1.0 - ratio);
                if tail < TAIL_TARGET {
                    let terms = normalised(&log_weights, tail)
                        .zip(cells)
                        .map(|(amplitude, (idler, signal))| FockTerm {
                            idler,
                            signal,
                            amplitude,
                        })
                        .collect();
                    return Ok(Self {
                        terms,
                        tail_bound: tail,
                    });
                }
            }
            if k + 1 > INDEX_CAP {
                return Err(Error::Truncation {
                    tail: f64::INFINITY,
                    cap: INDEX_CAP,
                });
            }
            single.push(next);
        }
    }

    /// Distribution of the signal photon number.
    pub fn signal_distribution(&self) -> Result<PhotonDistribution> {
        let len = self.terms.iter().map(|t| t.signal + 1).max().unwrap_or(1);
        let mut probs = vec![0.0; len];
        for t in &self.terms {
            probs[t.signal] += t.amplitude * t.amplitude;
        }
        PhotonDistribution::new(probs, self.tail_bound)
    }
}

fn ecs_grid(single: &[f64]) -> (Vec<f64>, Vec<(usize, usize)>) {
    let mut log_weights = Vec::new();
    let mut cells = Vec::new();
    for (k, lk) in single.iter().enumerate() {
        for (n, ln) in single.iter().enumerate() {
            if (k + n) % 2 == 1 {
                log_weights.push(lk + ln);
                cells.push((k, n));
            }
        }
    }
    (log_weights, cells)
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// Bound on the omitted fraction when the kept weights are `log_weights`,
/// the first omitted one is `next` and later ratios stay below `ratio`.
fn tail_fraction(log_weights: &[f64], next: f64, ratio: f64) -> f64 {
    (next - log_sum_exp(log_weights)).exp() / (1.0 - ratio)
}

/// Amplitudes √wᵢ scaled so the squared amplitudes sum to 1 − tail.
fn normalised(log_weights: &[f64], tail: f64) -> impl Iterator<Item = f64> + '_ {
    let log_total = log_sum_exp(log_weights);
    let scale = (1.0 - tail).sqrt();
    log_weights
        .iter()
        .map(move |l| (0.5 * (l - log_total)).exp() * scale)
}

/// Gram row obtained by expanding the probe in a truncated number basis,
/// folding the signal marginal and transforming.
pub fn fock_oracle_gram_row(spec: &ProbeSpec, m: usize) -> Result<GramRow> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "alphabet size must be >= 2, got {m}"
        )));
    }
    let state = match spec {
        ProbeSpec::Tmsv { n_s, j: 1 } => TwoModeFockState::tmsv(*n_s)?,
        ProbeSpec::Pcs { zeta } => TwoModeFockState::pcs(*zeta)?,
        ProbeSpec::Ecs { alpha } => TwoModeFockState::ecs(*alpha)?,
        ProbeSpec::ExplicitPfrak { pfrak } => {
            let d = ModMDistribution::new(pfrak.clone())?;
            if d.m() != m {
                return Err(Error::Domain(format!(
                    "explicit pfrak has length {} but M = {m}",
                    d.m()
                )));
            }
            return Ok(gram_row_from_pfrak(&d));
        }
        other => {
            return Err(Error::UnsupportedProbe(format!(
                "no Fock expansion for {other:?}"
            )))
        }
    };
    let folded = state.signal_distribution()?.fold_mod_m(m)?;
    Ok(gram_row_from_pfrak(&folded))
}
