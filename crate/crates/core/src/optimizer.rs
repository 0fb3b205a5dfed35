//! Energy-constrained optimal probe and squeezed-probe parameter search.
//!
//! Below the zero-error threshold N_S < (M−1)/2 the optimal folded
//! distribution is 𝔭_ν = 1/(A + νB)² with A, B > 0 fixed by
//! Σ𝔭 = 1 and Σν𝔭 = N_S. The solver runs a damped Newton iteration on that
//! pair of equations and falls back to nested bisection (outer on B, inner on
//! A) when Newton stalls. The result is always a single-mode state, so its
//! idler energy is zero and its combined energy equals its signal energy.

use rayon::prelude::*;
use serde::Serialize;

use crate::compensated::NeumaierSum;
use crate::distributions::ModMDistribution;
use crate::error::{Error, Result};
use crate::gram::{eigenvalues, error_probability, gram_row_from_pfrak};
use crate::probes::{squeezed_params_from_fraction, Sign, SqueezeParams};

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const NEWTON_ITERATIONS: usize = 100;
const BISECTION_ITERATIONS: usize = 200;
const TINY_ENERGY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalSolution {
    pub n_s: f64,
    pub a: f64,
    pub b: f64,
    pub pfrak: ModMDistribution,
    pub residual_norm: f64,
    pub error_probability: f64,
}

impl OptimalSolution {
    /// Idler-mode energy of the optimal probe (single-mode, hence zero).
    pub fn idler_energy(&self) -> f64 {
        0.0
    }

    pub fn signal_energy(&self) -> f64 {
        self.pfrak.pfrak_energy()
    }
}

/// Zero-error threshold (M−1)/2.
pub fn zero_error_threshold(m: usize) -> f64 {
    (m as f64 - 1.0) / 2.0
}

/// Residuals (Σ𝔭 − 1, Σν𝔭 − N_S) and the Jacobian of the map (A, B) ↦ residuals.
struct Lagrange {
    m: usize,
    n_s: f64,
}

impl Lagrange {
    fn residual(&self, a: f64, b: f64) -> (f64, f64) {
        let mut mass = NeumaierSum::new();
        let mut energy = NeumaierSum::new();
        for nu in 0..self.m {
            let x = a + nu as f64 * b;
            let p = 1.0 / (x * x);
            mass.add(p);
            energy.add(nu as f64 * p);
        }
        (mass.value() - 1.0, energy.value() - self.n_s)
    }

    fn jacobian(&self, a: f64, b: f64) -> [[f64; 2]; 2] {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for nu in 0..self.m {
            let v = nu as f64;
            let c = -2.0 / (a + v * b).powi(3);
            s0 += c;
            s1 += c * v;
            s2 += c * v * v;
        }
        [[s0, s1], [s1, s2]]
    }

    fn admissible(&self, a: f64, b: f64) -> bool {
        a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()
    }

    fn newton(&self, mut a: f64, mut b: f64) -> Option<(f64, f64, f64)> {
        let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
        let mut r = self.residual(a, b);
        for _ in 0..NEWTON_ITERATIONS {
            if norm(r) <= 1e-15 {
                break;
            }
            let j = self.jacobian(a, b);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let da = -(j[1][1] * r.0 - j[0][1] * r.1) / det;
            let db = -(-j[1][0] * r.0 + j[0][0] * r.1) / det;
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-12 {
                let (na, nb) = (a + step * da, b + step * db);
                if self.admissible(na, nb) {
                    let nr = self.residual(na, nb);
                    if norm(nr) < norm(r) {
                        a = na;
                        b = nb;
                        r = nr;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let res = norm(r);
        (res <= RESIDUAL_TOLERANCE).then_some((a, b, res))
    }

    /// A(B) solving Σ (A+νB)⁻² = 1; the root lies in [1, √M] for B ≥ 0.
    fn a_for_b(&self, b: f64) -> f64 {
        let (mut lo, mut hi) = (1.0, (self.m as f64).sqrt());
        for _ in 0..BISECTION_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.residual(mid, b).0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn bisection(&self) -> Option<(f64, f64)> {
        let energy_gap = |b: f64| self.residual(self.a_for_b(b), b).1;
        let mut hi = 1.0;
        let mut guard = 0;
        while energy_gap(hi) > 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return None;
            }
        }
        let mut lo = 0.0;
        for _ in 0..BISECTION_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if energy_gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let b = 0.5 * (lo + hi);
        Some((self.a_for_b(b), b))
    }

    fn seed(&self) -> (f64, f64) {
        let harmonic: f64 = (1..self.m).map(|v| 1.0 / v as f64).sum();
        let small_energy_b = (harmonic / self.n_s).sqrt();
        if self.n_s < TINY_ENERGY {
            // p_ν ≈ 1/(νB)² for ν ≥ 1, so N_S ≈ H_{M−1}/B²
            return (1.0, small_energy_b);
        }
        let t = self.n_s / zero_error_threshold(self.m);
        let a = 1.0 + ((self.m as f64).sqrt() - 1.0) * t;
        (a, small_energy_b * (1.0 - t))
    }
}

/// Energy-constrained optimal probe for an M-ary symmetric phase set.
pub fn solve_optimal(n_s: f64, m: usize) -> Result<OptimalSolution> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "alphabet size must be >= 2, got {m}"
        )));
    }
    if !(n_s > 0.0) || !n_s.is_finite() {
        return Err(Error::Domain(format!("n_s must be positive, got {n_s}")));
    }
    if n_s >= zero_error_threshold(m) {
        let pfrak = ModMDistribution::uniform(m)?;
        let mass: f64 = crate::compensated::sum(pfrak.pfrak().iter().copied());
        return finish(n_s, (m as f64).sqrt(), 0.0, pfrak, (mass - 1.0).abs());
    }
    let system = Lagrange { m, n_s };
    let (sa, sb) = system.seed();
    let (a, b, residual) = match system.newton(sa, sb) {
        Some(found) => found,
        None => {
            let (ba, bb) = system.bisection().ok_or_else(|| {
                Error::Convergence(format!("could not bracket B for n_s = {n_s}, M = {m}"))
            })?;
            system.newton(ba, bb).ok_or_else(|| {
                let r = system.residual(ba, bb);
                Error::Convergence(format!(
                    "residual ({:e}, {:e}) above {RESIDUAL_TOLERANCE:e} for n_s = {n_s}, M = {m}",
                    r.0, r.1
                ))
            })?
        }
    };
    let probs = (0..m).map(|nu| 1.0 / (a + nu as f64 * b).powi(2)).collect();
    let pfrak = ModMDistribution::new(probs)?;
    finish(n_s, a, b, pfrak, residual)
}

/// Nested-bisection route alone (no Newton seed), polished by Newton.
/// Exposed for cross-checking the primary path.
pub fn solve_optimal_by_bisection(n_s: f64, m: usize) -> Result<OptimalSolution> {
    if m < 2 || !(n_s > 0.0) || n_s >= zero_error_threshold(m) {
        return Err(Error::Domain(format!(
            "bisection route needs 0 < n_s < (M-1)/2, got n_s = {n_s}, M = {m}"
        )));
    }
    let system = Lagrange { m, n_s };
    let (a, b) = system
        .bisection()
        .ok_or_else(|| Error::Convergence(format!("could not bracket B for n_s = {n_s}")))?;
    let (a, b, residual) = system
        .newton(a, b)
        .ok_or_else(|| Error::Convergence(format!("polish failed for n_s = {n_s}")))?;
    let pfrak =
        ModMDistribution::new((0..m).map(|nu| 1.0 / (a + nu as f64 * b).powi(2)).collect())?;
    finish(n_s, a, b, pfrak, residual)
}

fn finish(
    n_s: f64,
    a: f64,
    b: f64,
    pfrak: ModMDistribution,
    residual_norm: f64,
) -> Result<OptimalSolution> {
    let spectrum = eigenvalues(&gram_row_from_pfrak(&pfrak))?;
    Ok(OptimalSolution {
        n_s,
        a,
        b,
        error_probability: error_probability(&spectrum),
        pfrak,
        residual_norm,
    })
}

/// Optimal error probability at each energy of `grid`, in grid order.
pub fn optimal_error_curve(m: usize, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.par_iter()
        .map(|&n_s| {
            solve_optimal(n_s, m)
                .map(|s| (n_s, s.error_probability))
                .map_err(|e| match e {
                    Error::Convergence(msg) => Error::Convergence(format!("at n_s = {n_s}: {msg}")),
                    other => other,
                })
        })
        .collect()
}

/// Below this |ν| the best squeezed probe is reported as a coherent state.
pub const NO_SQUEEZING_THRESHOLD: f64 = 1e-3;
/// Largest squeeze fraction searched.
pub const MAX_SQUEEZE_FRACTION: f64 = 1.0 - 1e-9;
const COARSE_POINTS: usize = 64;
const GOLDEN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezeOptimum {
    pub n_s: f64,
    pub f: f64,
    pub sign: Sign,
    pub params: SqueezeParams,
    pub p_error: f64,
    pub no_squeezing: bool,
}

/// Error probability of the squeezed probe at energy `n_s` and squeeze
/// fraction `f`.
pub fn squeezed_error(n_s: f64, f: f64, sign: Sign, m: usize) -> Result<f64> {
    let params = squeezed_params_from_fraction(n_s, f, sign)?;
    Ok(params.gram_row(m)?.eigenvalues()?.error_probability())
}

/// Golden-section minimisation of `f` on `[lo, hi]` to absolute tolerance `tol`.
pub fn golden_section_minimize<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

fn best_fraction(n_s: f64, sign: Sign, m: usize) -> Result<(f64, f64)> {
    let grid: Vec<f64> = (0..=COARSE_POINTS)
        .map(|i| MAX_SQUEEZE_FRACTION * i as f64 / COARSE_POINTS as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&f| squeezed_error(n_s, f, sign, m))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(COARSE_POINTS)];
    let mut candidate = golden_section_minimize(
        |f| squeezed_error(n_s, f, sign, m),
        lo,
        hi,
        GOLDEN_TOLERANCE,
    )?;
    // endpoints are not sampled by the golden-section interior points
    for edge in [lo, hi] {
        let v = squeezed_error(n_s, edge, sign, m)?;
        if v < candidate.1 {
            candidate = (edge, v);
        }
    }
    Ok(candidate)
}

/// Best squeezed probe at energy `n_s`, searching both signs of ν.
pub fn optimize_squeeze(n_s: f64, m: usize) -> Result<SqueezeOptimum> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "alphabet size must be >= 2, got {m}"
        )));
    }
    if !(n_s > 0.0) || !n_s.is_finite() {
        return Err(Error::Domain(format!("n_s must be positive, got {n_s}")));
    }
    let plus = best_fraction(n_s, Sign::Plus, m)?;
    let minus = best_fraction(n_s, Sign::Minus, m)?;
    let (mut sign, (f, p_error)) = if minus.1 < plus.1 {
        (Sign::Minus, minus)
    } else {
        (Sign::Plus, plus)
    };
    let params = squeezed_params_from_fraction(n_s, f, sign)?;
    let no_squeezing = params.nu.abs() < NO_SQUEEZING_THRESHOLD;
    if no_squeezing {
        sign = Sign::Plus;
    }
    Ok(SqueezeOptimum {
        n_s,
        f,
        sign,
        params,
        p_error,
        no_squeezing,
    })
}
