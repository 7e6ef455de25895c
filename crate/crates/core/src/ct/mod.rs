//! Continuous-time channel `dY = sqrt(snr) X_t dt + dW_t`.

pub mod spectral;
pub mod telegraph;
pub mod time_snr;
pub mod wonham;

pub use spectral::{spectral_quantities, SpectralQuantities, SpectrumModel};
pub use telegraph::{
    duncan_check, f_integral, telegraph_cmmse, telegraph_mmse, verify_thm7, FIntegralTable, TelegraphModel,
};
pub use wonham::{simulate_telegraph, wonham_ensemble, wonham_filter, yao_smoother, SamplePath, WonhamEnsemble};
