//! Photon-number distributions and their modulo-M folding.
//!
//! A [`PhotonDistribution`] holds the probabilities of the total signal
//! photon number. Folding it onto the congruence classes modulo M gives a
//! [`ModMDistribution`], which is all the discrimination performance depends
//! on. Distributions of infinite-support states are truncated; the omitted
//! mass is kept as a certified `tail_bound` and never assigned to a class.

use serde::Serialize;

use crate::compensated::{sum, NeumaierSum};
use crate::error::{Error, Result};

/// Allowed deviation of total probability mass from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail_bound: f64,
}

impl PhotonDistribution {
    pub fn new(probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "tail bound must be finite and nonnegative, got {tail_bound}"
            )));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p >= 0.0) || !p.is_finite())
        {
            return Err(Error::InvalidDistribution(format!("p[{n}] = {p}")));
        }
        let mass = sum(probs.iter().copied()) + tail_bound;
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities plus tail sum to {mass}"
            )));
        }
        Ok(Self { probs, tail_bound })
    }

    /// A distribution with no truncated tail.
    pub fn exact(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs, 0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Mean photon number Σ n pₙ over the stored support.
    pub fn mean_energy(&self) -> MeanEnergy {
        let value = sum(self.probs.iter().enumerate().map(|(n, p)| n as f64 * p));
        MeanEnergy {
            value,
            lower_bound: self.tail_bound > 0.0,
        }
    }

    /// Folds onto the congruence classes modulo `m`.
    pub fn fold_mod_m(&self, m: usize) -> Result<ModMDistribution> {
        if m < 2 {
            return Err(Error::Domain(format!(
                "alphabet size must be >= 2, got {m}"
            )));
        }
        let mut classes = vec![NeumaierSum::new(); m];
        for (n, p) in self.probs.iter().enumerate() {
            classes[n % m].add(*p);
        }
        let pfrak = classes.iter().map(NeumaierSum::value).collect();
        ModMDistribution::with_tail(pfrak, self.tail_bound)
    }
}

/// Mean energy of a possibly truncated distribution. When `lower_bound` is
/// set the true mean may exceed `value` because of the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEnergy {
    pub value: f64,
    pub lower_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModMDistribution {
    pfrak: Vec<f64>,
    tail_bound: f64,
}

impl ModMDistribution {
    pub fn new(pfrak: Vec<f64>) -> Result<Self> {
        Self::with_tail(pfrak, 0.0)
    }

    /// `tail_bound` is probability mass whose congruence class is unresolved.
    pub fn with_tail(pfrak: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if pfrak.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "alphabet size must be >= 2, got {}",
                pfrak.len()
            )));
        }
        if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "tail bound must be finite and nonnegative, got {tail_bound}"
            )));
        }
        if let Some((nu, p)) = pfrak
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p >= 0.0) || !p.is_finite())
        {
            return Err(Error::InvalidDistribution(format!("pfrak[{nu}] = {p}")));
        }
        let mass = sum(pfrak.iter().copied()) + tail_bound;
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "folded probabilities plus tail sum to {mass}"
            )));
        }
        Ok(Self { pfrak, tail_bound })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!(
                "alphabet size must be >= 2, got {m}"
            )));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn m(&self) -> usize {
        self.pfrak.len()
    }

    pub fn pfrak(&self) -> &[f64] {
        &self.pfrak
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Σ ν 𝔭_ν: the signal energy of the single-mode state Σ √𝔭_ν |ν⟩.
    pub fn pfrak_energy(&self) -> f64 {
        sum(self.pfrak.iter().enumerate().map(|(nu, p)| nu as f64 * p))
    }

    /// The photon distribution of the single-mode representative, supported
    /// on 0..M−1.
    pub fn to_photon_distribution(&self) -> PhotonDistribution {
        PhotonDistribution {
            probs: self.pfrak.clone(),
            tail_bound: self.tail_bound,
        }
    }
}
