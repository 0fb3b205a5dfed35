//! Probe-state families: analytic Gram rows, signal energies and folded
//! distributions, plus a truncated-Fock oracle in [`fock`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::distributions::{MeanEnergy, ModMDistribution};
use crate::error::{Error, Result};
use crate::gram::{gram_row_from_pfrak, roots_of_unity, GramRow};
use crate::optimizer::solve_optimal;
use crate::specfun::{bessel_i0, bessel_i1, ARGUMENT_GUARD};

pub mod fock;

pub use fock::{fock_oracle_gram_row, TwoModeFockState};

/// Tolerance on μ² − ν² = 1 for squeezed-state parameters.
pub const SQUEEZE_NORMALIZATION_TOLERANCE: f64 = 1e-9;
const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// A probe family together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProbeSpec {
    Coherent { n_s: f64 },
    Squeezed { alpha: f64, mu: f64, nu: f64 },
    Tmsv { n_s: f64, j: u32 },
    Pcs { zeta: f64 },
    Ecs { alpha: f64 },
    Optimal { n_s: f64 },
    Uniform,
    ExplicitPfrak { pfrak: Vec<f64> },
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!(
                    "{name} must be finite and >= 0, got {v}"
                )))
            }
        };
        match self {
            ProbeSpec::Coherent { n_s } => nonneg("n_s", *n_s),
            ProbeSpec::Squeezed { alpha, mu, nu } => check_squeeze(*alpha, *mu, *nu),
            ProbeSpec::Tmsv { n_s, j } => {
                nonneg("n_s", *n_s)?;
                if *j == 0 {
                    return Err(Error::Domain("TMSV copies J must be >= 1".into()));
                }
                Ok(())
            }
            ProbeSpec::Pcs { zeta } => nonneg("zeta", *zeta),
            ProbeSpec::Ecs { alpha } => {
                if *alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("ECS alpha must be > 0, got {alpha}")))
                }
            }
            ProbeSpec::Optimal { n_s } => {
                if *n_s > 0.0 && n_s.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("n_s must be positive, got {n_s}")))
                }
            }
            ProbeSpec::Uniform => Ok(()),
            ProbeSpec::ExplicitPfrak { pfrak } => ModMDistribution::new(pfrak.clone()).map(|_| ()),
        }
    }

    /// First Gram row for an M-ary symmetric phase set.
    pub fn gram_row(&self, m: usize) -> Result<GramRow> {
        check_alphabet(m)?;
        self.validate()?;
        match self {
            ProbeSpec::Coherent { n_s } => coherent_gram_row(*n_s, m),
            ProbeSpec::Squeezed { alpha, mu, nu } => squeezed_gram_row(*alpha, *mu, *nu, m),
            ProbeSpec::Tmsv { n_s, j } => tmsv_gram_row(*n_s, *j, m),
            ProbeSpec::Pcs { zeta } => pcs_gram_row(*zeta, m),
            ProbeSpec::Ecs { alpha } => ecs_gram_row(*alpha, m),
            ProbeSpec::Optimal { n_s } => Ok(gram_row_from_pfrak(&solve_optimal(*n_s, m)?.pfrak)),
            ProbeSpec::Uniform => Ok(gram_row_from_pfrak(&uniform_pfrak(m)?)),
            ProbeSpec::ExplicitPfrak { pfrak } => {
                let d = ModMDistribution::new(pfrak.clone())?;
                if d.m() != m {
                    return Err(Error::Domain(format!(
                        "explicit pfrak has length {} but M = {m}",
                        d.m()
                    )));
                }
                Ok(gram_row_from_pfrak(&d))
            }
        }
    }

    /// Mean total signal photon number.
    pub fn signal_energy(&self, m: usize) -> Result<f64> {
        self.validate()?;
        match self {
            ProbeSpec::Coherent { n_s }
            | ProbeSpec::Tmsv { n_s, .. }
            | ProbeSpec::Optimal { n_s } => Ok(*n_s),
            ProbeSpec::Squeezed { alpha, mu, nu } => Ok(squeezed_energy(*alpha, *mu, *nu)),
            ProbeSpec::Pcs { zeta } => pcs_energy(*zeta),
            ProbeSpec::Ecs { alpha } => Ok(ecs_pfrak(*alpha, m.max(2))?.1.value),
            ProbeSpec::Uniform => {
                check_alphabet(m)?;
                Ok((m as f64 - 1.0) / 2.0)
            }
            ProbeSpec::ExplicitPfrak { pfrak } => {
                Ok(ModMDistribution::new(pfrak.clone())?.pfrak_energy())
            }
        }
    }
}

fn check_alphabet(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "alphabet size must be >= 2, got {m}"
        )));
    }
    Ok(())
}

fn check_squeeze(alpha: f64, mu: f64, nu: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(mu > 0.0) || !mu.is_finite() || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "need mu > 0 and finite nu, got ({mu}, {nu})"
        )));
    }
    let defect = mu * mu - nu * nu - 1.0;
    if defect.abs() > SQUEEZE_NORMALIZATION_TOLERANCE {
        return Err(Error::Domain(format!("mu^2 - nu^2 - 1 = {defect:e}")));
    }
    Ok(())
}

/// Coherent state |√n_s⟩: `G₀ₖ = exp(n_s(e^{ikθ} − 1))`.
pub fn coherent_gram_row(n_s: f64, m: usize) -> Result<GramRow> {
    check_alphabet(m)?;
    if !(n_s >= 0.0) || !n_s.is_finite() {
        return Err(Error::Domain(format!("n_s must be >= 0, got {n_s}")));
    }
    let entries = roots_of_unity(m)
        .into_iter()
        .map(|z| ((z - 1.0) * n_s).exp())
        .collect();
    GramRow::new(entries)
}

/// Mean photon number of the two-photon coherent state |α; μ, ν⟩.
pub fn squeezed_energy(alpha: f64, mu: f64, nu: f64) -> f64 {
    (mu - nu) * (mu - nu) * alpha * alpha + nu * nu
}

/// Gram row of the two-photon coherent state |α; μ, ν⟩ with real μ > 0, ν.
///
/// The square root of `μ² − ν²e^{2iθₖ}` follows the branch continuous in k
/// from the positive root at k = 0.
pub fn squeezed_gram_row(alpha: f64, mu: f64, nu: f64, m: usize) -> Result<GramRow> {
    check_alphabet(m)?;
    check_squeeze(alpha, mu, nu)?;
    let a2 = alpha * alpha;
    let mut previous_root = Complex64::new(1.0, 0.0);
    let mut entries = Vec::with_capacity(m);
    for (k, phase) in roots_of_unity(m).into_iter().enumerate() {
        let phase2 = phase * phase;
        let denom = mu * mu - nu * nu * phase2;
        if denom.norm() < SINGULARITY_TOLERANCE {
            return Err(Error::Singularity {
                k,
                magnitude: denom.norm(),
            });
        }
        let mut root = denom.sqrt();
        if (root - previous_root).norm() > (root + previous_root).norm() {
            root = -root;
        }
        previous_root = root;
        let exponent = ((phase - mu * nu * (phase2 - 1.0)) / denom - 1.0) * a2;
        entries.push(exponent.exp() / root);
    }
    GramRow::new(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeParams {
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
}

impl SqueezeParams {
    pub fn energy(&self) -> f64 {
        squeezed_energy(self.alpha, self.mu, self.nu)
    }

    pub fn gram_row(&self, m: usize) -> Result<GramRow> {
        squeezed_gram_row(self.alpha, self.mu, self.nu, m)
    }
}

/// Squeeze parameters at total energy `n_s` with a fraction `f = ν²/n_s` of
/// it in squeezing.
pub fn squeezed_params_from_fraction(n_s: f64, f: f64, sign: Sign) -> Result<SqueezeParams> {
    if !(n_s > 0.0) || !n_s.is_finite() {
        return Err(Error::Domain(format!("n_s must be positive, got {n_s}")));
    }
    if !(0.0..1.0).contains(&f) {
        return Err(Error::Domain(format!(
            "squeeze fraction must lie in [0, 1), got {f}"
        )));
    }
    let nu = sign.value() * (f * n_s).sqrt();
    let mu = (1.0 + nu * nu).sqrt();
    let displacement_energy = n_s - nu * nu;
    if displacement_energy < 0.0 {
        return Err(Error::Domain(format!("alpha^2 negative for f = {f}")));
    }
    let alpha = (displacement_energy / ((mu - nu) * (mu - nu))).sqrt();
    Ok(SqueezeParams { alpha, mu, nu })
}

/// J copies of the two-mode squeezed vacuum at total signal energy n_s:
/// `G₀ₖ = [1 + (n_s/J)(1 − e^{ikθ})]^{−J}`.
pub fn tmsv_gram_row(n_s: f64, j: u32, m: usize) -> Result<GramRow> {
    check_alphabet(m)?;
    if !(n_s >= 0.0) || !n_s.is_finite() {
        return Err(Error::Domain(format!("n_s must be >= 0, got {n_s}")));
    }
    if j == 0 || j > i32::MAX as u32 {
        return Err(Error::Domain(format!(
            "TMSV copies J must be >= 1, got {j}"
        )));
    }
    let per_copy = n_s / j as f64;
    let entries = roots_of_unity(m)
        .into_iter()
        .map(|z| (1.0 / (1.0 + per_copy * (1.0 - z))).powi(j as i32))
        .collect();
    GramRow::new(entries)
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::Domain(format!("zeta must be >= 0, got {zeta}")));
    }
    if 2.0 * zeta > ARGUMENT_GUARD {
        return Err(Error::Domain(format!(
            "2 zeta = {} exceeds the Bessel guard",
            2.0 * zeta
        )));
    }
    Ok(())
}

/// Pair-coherent state (q = 0, real ζ): `G₀ₖ = I₀(2ζe^{ikθ/2}) / I₀(2ζ)`.
pub fn pcs_gram_row(zeta: f64, m: usize) -> Result<GramRow> {
    check_alphabet(m)?;
    check_zeta(zeta)?;
    let norm = bessel_i0(Complex64::new(2.0 * zeta, 0.0))?;
    let entries = (0..m)
        .map(|k| {
            let half_phase = PI * k as f64 / m as f64;
            bessel_i0(Complex64::from_polar(2.0 * zeta, half_phase)).map(|v| v / norm)
        })
        .collect::<Result<Vec<_>>>()?;
    GramRow::new(entries)
}

/// Signal energy ζ I₁(2ζ)/I₀(2ζ) of the pair-coherent state.
pub fn pcs_energy(zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    if zeta == 0.0 {
        return Ok(0.0);
    }
    let x = Complex64::new(2.0 * zeta, 0.0);
    Ok(zeta * bessel_i1(x)?.re / bessel_i0(x)?.re)
}

/// Inverts [`pcs_energy`] by bisection.
pub fn pcs_zeta_for_energy(n_s: f64) -> Result<f64> {
    if !(n_s >= 0.0) || !n_s.is_finite() {
        return Err(Error::Domain(format!("n_s must be >= 0, got {n_s}")));
    }
    if n_s == 0.0 {
        return Ok(0.0);
    }
    // energy(ζ) ≥ ζ − 1/2, so ζ = n_s + 1 overshoots
    bisect_increasing(pcs_energy, n_s, 0.0, (n_s + 1.0).min(ARGUMENT_GUARD / 2.0))
}

/// Entangled coherent state (|α⟩|α⟩ − |−α⟩|−α⟩)/𝒩, α real:
/// `G₀ₖ = [e^{a(z−1)} − e^{−a(z+3)}] / (1 − e^{−4a})` with a = α², z = e^{ikθ}.
pub fn ecs_gram_row(alpha: f64, m: usize) -> Result<GramRow> {
    check_alphabet(m)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("ECS alpha must be > 0, got {alpha}")));
    }
    let a = alpha * alpha;
    let denom = -(-4.0 * a).exp_m1();
    let entries = roots_of_unity(m)
        .into_iter()
        .map(|z| {
            // e^{a(z−1)}(1 − e^{−2a(z+1)})
            ((z - 1.0) * a).exp() * -complex_exp_m1((z + 1.0) * (-2.0 * a)) / denom
        })
        .collect();
    GramRow::new(entries)
}

fn complex_exp_m1(w: Complex64) -> Complex64 {
    if w.norm() > 0.5 {
        return w.exp() - 1.0;
    }
    let mut term = w;
    let mut acc = w;
    for k in 2..40 {
        term = term * w / k as f64;
        acc += term;
        if term.norm() < 1e-17 * acc.norm() {
            break;
        }
    }
    acc
}

/// Folded distribution and signal energy of the entangled coherent state,
/// both computed from its truncated two-mode Fock expansion.
pub fn ecs_pfrak(alpha: f64, m: usize) -> Result<(ModMDistribution, MeanEnergy)> {
    check_alphabet(m)?;
    let p = TwoModeFockState::ecs(alpha)?.signal_distribution()?;
    Ok((p.fold_mod_m(m)?, p.mean_energy()))
}

/// Smallest-norm α whose ECS signal energy equals `n_s` (requires n_s > 1/2).
pub fn ecs_alpha_for_energy(n_s: f64) -> Result<f64> {
    if !(n_s > 0.5) || !n_s.is_finite() {
        return Err(Error::Domain(format!(
            "ECS signal energy must exceed 1/2, got n_s = {n_s}"
        )));
    }
    let energy = |alpha: f64| -> Result<f64> {
        Ok(TwoModeFockState::ecs(alpha)?
            .signal_distribution()?
            .mean_energy()
            .value)
    };
    // energy ≥ α², so α = √n_s overshoots
    bisect_increasing(energy, n_s, 1e-8, n_s.sqrt() + 1e-3)
}

pub fn uniform_pfrak(m: usize) -> Result<ModMDistribution> {
    ModMDistribution::uniform(m)
}

/// Solves `f(x) = target` for increasing f on [lo, hi], doubling `hi` until
/// it brackets.
fn bisect_increasing(
    f: impl Fn(f64) -> Result<f64>,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let mut guard = 0;
    while f(hi)? < target {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::Convergence(format!(
                "could not bracket energy {target}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
