//! Fixtures shared by the benchmarks.

use immse::nalgebra::DMatrix;
use immse::{InputLaw, MixtureComponent, VectorChannelModel, VectorInput};

pub fn mixture() -> InputLaw {
    InputLaw::mixture(vec![
        MixtureComponent::new(0.3, -1.5, 0.2),
        MixtureComponent::new(0.5, 0.2, 0.5),
        MixtureComponent::new(0.2, 2.0, 0.1),
    ])
    .expect("valid mixture")
}

/// Three BPSK users through a fixed 3×3 channel.
pub fn bpsk_model(snr: f64) -> VectorChannelModel {
    let points: Vec<Vec<f64>> = (0..8u32)
        .map(|b| (0..3).map(|k| if b >> k & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect();
    let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 0.9, 0.4, -0.3, 0.2, 0.8]);
    let input = VectorInput::atoms(&points, vec![0.125; 8]).expect("valid atoms");
    VectorChannelModel::common(h, input, snr).expect("valid model")
}
