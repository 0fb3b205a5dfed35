//! Symmetric-set machinery: the first row of the circulant Gram matrix, its
//! spectrum, the square-root-measurement error probability and the
//! measurement vectors themselves.
//!
//! Transform conventions: with θ = 2π/M,
//!
//! * Gram row from folded probabilities: `G₀ₖ = Σ_ν 𝔭_ν e^{+iθkν}`
//! * spectrum from the row: `λ_j = Σ_k G₀ₖ e^{−iθjk}`
//!
//! so that `λ = M·𝔭` index by index.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::compensated::{sum, ComplexSum};
use crate::distributions::ModMDistribution;
use crate::error::{Error, Result};

pub const ROW_TOLERANCE: f64 = 1e-12;
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-10;
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-8;
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// `e^{2πij/M}` for j in 0..M, each from its own reduced angle.
pub(crate) fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

/// First row (G₀₀, …, G₀,M−1) of the Gram matrix of a symmetric set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramRow {
    entries: Vec<Complex64>,
}

impl GramRow {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        let m = entries.len();
        if m < 2 {
            return Err(Error::InvalidGramRow(format!(
                "alphabet size must be >= 2, got {m}"
            )));
        }
        if let Some(k) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidGramRow(format!("entry {k} is not finite")));
        }
        if (entries[0] - 1.0).norm() > ROW_TOLERANCE {
            return Err(Error::InvalidGramRow(format!(
                "G00 = {} is not 1",
                entries[0]
            )));
        }
        for k in 1..m {
            let mirror = entries[m - k].conj();
            if (entries[k] - mirror).norm() > ROW_TOLERANCE {
                return Err(Error::InvalidGramRow(format!(
                    "conjugate symmetry broken at k = {k}: {} vs {}",
                    entries[k],
                    entries[m - k]
                )));
            }
            if entries[k].norm() > 1.0 + ROW_TOLERANCE {
                return Err(Error::InvalidGramRow(format!(
                    "|G0{k}| = {} exceeds 1",
                    entries[k].norm()
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Eigenvalues of the circulant Gram matrix (direct DFT of the row).
    pub fn eigenvalues(&self) -> Result<EigenvalueSpectrum> {
        eigenvalues(self)
    }
}

/// `G₀ₖ = Σ_ν 𝔭_ν e^{iθkν}`.
pub fn gram_row_from_pfrak(d: &ModMDistribution) -> GramRow {
    let m = d.m();
    let roots = roots_of_unity(m);
    let entries = (0..m)
        .map(|k| {
            let mut acc = ComplexSum::new();
            for (nu, p) in d.pfrak().iter().enumerate() {
                acc.add(roots[(k * nu) % m] * *p);
            }
            acc.value()
        })
        .collect();
    // 𝔭 is real, so the row is conjugate symmetric and G₀₀ = Σ𝔭 by construction.
    GramRow { entries }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueSpectrum {
    lambdas: Vec<f64>,
}

impl EigenvalueSpectrum {
    /// Validates and clamps roundoff-level negative eigenvalues to zero.
    pub fn new(mut lambdas: Vec<f64>) -> Result<Self> {
        let m = lambdas.len();
        if m < 2 {
            return Err(Error::Spectrum(format!(
                "alphabet size must be >= 2, got {m}"
            )));
        }
        for (j, l) in lambdas.iter_mut().enumerate() {
            if !l.is_finite() || *l < -NEGATIVE_EIGENVALUE_TOLERANCE {
                return Err(Error::Spectrum(format!("lambda[{j}] = {l}")));
            }
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        let trace = sum(lambdas.iter().copied());
        if (trace - m as f64).abs() > TRACE_TOLERANCE {
            return Err(Error::Spectrum(format!(
                "trace {trace} differs from M = {m}"
            )));
        }
        Ok(Self { lambdas })
    }

    /// λ = M·𝔭.
    pub fn from_pfrak(d: &ModMDistribution) -> Result<Self> {
        let m = d.m() as f64;
        Self::new(d.pfrak().iter().map(|p| m * p).collect())
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn error_probability(&self) -> f64 {
        error_probability(self)
    }
}

/// `λ_j = Σ_k G₀ₖ e^{−iθjk}`, computed as a compensated O(M²) sum.
pub fn eigenvalues(g: &GramRow) -> Result<EigenvalueSpectrum> {
    let m = g.m();
    let roots = roots_of_unity(m);
    let mut lambdas = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = ComplexSum::new();
        for (k, entry) in g.entries().iter().enumerate() {
            acc.add(*entry * roots[(j * k) % m].conj());
        }
        let lambda = acc.value();
        if lambda.im.abs() > IMAGINARY_RESIDUE_TOLERANCE {
            return Err(Error::Spectrum(format!(
                "lambda[{j}] has imaginary part {}",
                lambda.im
            )));
        }
        lambdas.push(lambda.re);
    }
    EigenvalueSpectrum::new(lambdas)
}

/// Square-root-measurement error probability `1 − (Σ√λ)²/M²`.
pub fn error_probability(s: &EigenvalueSpectrum) -> f64 {
    let m = s.m() as f64;
    let root_sum = sum(s.lambdas().iter().map(|l| l.sqrt()));
    let pe = 1.0 - root_sum * root_sum / (m * m);
    pe.clamp(0.0, 1.0 - 1.0 / m)
}

/// Error probability of the folded distribution, via λ = M·𝔭.
pub fn error_probability_from_pfrak(d: &ModMDistribution) -> f64 {
    let m = d.m() as f64;
    let root_sum = sum(d.pfrak().iter().map(|p| p.sqrt()));
    (1.0 - root_sum * root_sum / m).clamp(0.0, 1.0 - 1.0 / m)
}

/// Interval containing the error probability for every placement of the
/// unresolved tail mass of `d` among the congruence classes.
pub fn error_probability_band(d: &ModMDistribution) -> (f64, f64) {
    let m = d.m() as f64;
    let root_sum = sum(d.pfrak().iter().map(|p| p.sqrt()));
    // √(p+δ) − √p ≤ √δ and Σ√δ_ν ≤ √(Mδ)
    let root_sum_hi = root_sum + (m * d.tail_bound()).sqrt();
    let cap = 1.0 - 1.0 / m;
    let hi = (1.0 - root_sum * root_sum / m).clamp(0.0, cap);
    let lo = (1.0 - root_sum_hi * root_sum_hi / m).clamp(0.0, cap);
    (lo, hi)
}

/// Binary error probability from the overlap σ = ⟨ψ₀|ψ₁⟩.
pub fn binary_error_from_overlap(sigma: Complex64) -> Result<f64> {
    let s2 = sigma.norm_sqr();
    if !s2.is_finite() || sigma.norm() > 1.0 + ROW_TOLERANCE {
        return Err(Error::Domain(format!(
            "|sigma| = {} exceeds 1",
            sigma.norm()
        )));
    }
    Ok(0.5 * (1.0 - (1.0 - s2.min(1.0)).sqrt()))
}

/// Measurement vectors of the square-root measurement for the single-mode
/// probe Σ √𝔭ₙ |n⟩. Row m holds the number-basis coefficients of |χ_m⟩:
/// `e^{imnθ}/√M` on the support of 𝔭 and zero elsewhere.
pub fn srm_vectors(d: &ModMDistribution) -> Vec<Vec<Complex64>> {
    let m = d.m();
    let roots = roots_of_unity(m);
    let scale = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|row| {
            d.pfrak()
                .iter()
                .enumerate()
                .map(|(n, p)| {
                    if *p > SUPPORT_TOLERANCE {
                        roots[(row * n) % m] * scale
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect()
}
