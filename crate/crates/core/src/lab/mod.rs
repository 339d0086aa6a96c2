//! Numerical checks of the defining properties of scoring rules on small instances.
//!
//! Each check returns a serialisable report. Randomised checks take a seed and are
//! reproducible; a report with violations carries a witness that can be replayed.

mod divergence;
mod invariance;
mod propriety;
mod spectral;

pub use divergence::{
    categorical_divergence, crps_representation_check, random_ensemble, symmetry_metric_check,
    CrpsRepresentationReport, SymmetryReport,
};
pub use invariance::{
    apply_transform, invariance_check, random_rotation, InvarianceReport, Transform,
};
pub use propriety::{
    concavity_scan, entropy_of, propriety_scan, replay_witness, simplex_grid, ConcavityReport,
    ConcavityWitness, ProprietyReport, ProprietyWitness,
};
pub use spectral::{
    normal_pair_divergence, spectral_proportionality_check, SpectralKernel, SpectralReport,
};

use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Uniform draw from the probability simplex on `n` classes.
pub(crate) fn random_simplex(r: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    // normalised standard exponentials are Dirichlet(1, …, 1)
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}
