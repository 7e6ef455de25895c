use immse::ct::{telegraph_cmmse, telegraph_mmse, TelegraphModel};
use immse::dt::{kalman_triple, ARProcess};
use immse::nalgebra::{DMatrix, DVector};
use immse::{InputLaw, McConfig, MixtureComponent, ScalarChannel, VectorChannelModel, VectorInput};
use proptest::prelude::*;

fn atom_law() -> impl Strategy<Value = InputLaw> {
    (2usize..5)
        .prop_flat_map(|k| (prop::collection::vec(0.2f64..1.5, k), prop::collection::vec(0.05f64..1.0, k), -2.0f64..2.0))
        .prop_map(|(gaps, weights, start)| {
            let mut v = start;
            let values: Vec<f64> = gaps
                .iter()
                .map(|g| {
                    v += g;
                    v
                })
                .collect();
            let total: f64 = weights.iter().sum();
            InputLaw::atoms(values, weights.iter().map(|w| w / total).collect()).unwrap()
        })
}

fn mixture_law() -> impl Strategy<Value = InputLaw> {
    prop::collection::vec((0.1f64..1.0, -2.0f64..2.0, 0.05f64..1.0), 1..4).prop_map(|c| {
        let total: f64 = c.iter().map(|x| x.0).sum();
        InputLaw::mixture(c.iter().map(|&(w, m, v)| MixtureComponent::new(w / total, m, v)).collect()).unwrap()
    })
}

fn any_law() -> impl Strategy<Value = InputLaw> {
    prop_oneof![atom_law(), mixture_law()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scalar_bound_chain(law in any_law(), snr in 0.05f64..20.0) {
        let ch = ScalarChannel::new(law.clone(), snr).unwrap();
        let var = law.variance();
        let mmse = ch.mmse().unwrap();
        let mi = ch.mutual_information().unwrap();
        prop_assert!(mmse >= -1e-12);
        prop_assert!(mmse <= var / (1.0 + snr * var) + 1e-9, "Gaussian maximality: {} > {}", mmse, var / (1.0 + snr * var));
        prop_assert!(mmse <= 2.0 * mi / snr + 1e-9);
        prop_assert!(2.0 * mi / snr <= var + 1e-9);
    }

    #[test]
    fn mmse_decreasing_mi_concave(law in any_law(), snr in 0.1f64..10.0) {
        let h = 0.05 * snr;
        let at = |s: f64| ScalarChannel::new(law.clone(), s).unwrap();
        let (lo, mid, hi) = (at(snr - h), at(snr), at(snr + h));
        prop_assert!(hi.mmse().unwrap() <= mid.mmse().unwrap() + 1e-10);
        prop_assert!(mid.mmse().unwrap() <= lo.mmse().unwrap() + 1e-10);
        let second = lo.mutual_information().unwrap() - 2.0 * mid.mutual_information().unwrap() + hi.mutual_information().unwrap();
        prop_assert!(second <= 1e-9, "second difference {}", second);
    }

    #[test]
    fn discrete_mi_below_entropy(law in atom_law(), snr in 0.1f64..100.0) {
        let h = match &law {
            InputLaw::DiscreteAtoms { probs, .. } => -probs.iter().map(|p| p * p.ln()).sum::<f64>(),
            _ => unreachable!(),
        };
        let mi = ScalarChannel::new(law, snr).unwrap().mutual_information().unwrap();
        prop_assert!(mi <= h + 1e-9);
    }

    #[test]
    fn kalman_ordering(a in -0.95f64..0.95, n in 1usize..40, snr in 0.0f64..10.0) {
        let t = kalman_triple(&ARProcess::new(a, n).unwrap(), snr).unwrap();
        for i in 0..n {
            prop_assert!(t.mmse[i] <= t.cmmse[i] + 1e-14);
            prop_assert!(t.cmmse[i] <= t.pmmse[i] + 1e-14);
            prop_assert!(t.pmmse[i] <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn gaussian_vector_fisher_bounds(entries in prop::collection::vec(-1.0f64..1.0, 6), diag in prop::collection::vec(0.2f64..2.0, 2), snr in 0.1f64..5.0, angle in 0.0f64..6.28) {
        let h = DMatrix::from_row_slice(3, 2, &entries);
        let cov = DMatrix::from_diagonal(&DVector::from_vec(diag));
        let model = VectorChannelModel::common(h.clone(), VectorInput::centered_gaussian(cov.clone()).unwrap(), snr).unwrap();
        let j = model.gaussian_fisher().unwrap();
        let eig = j.clone().symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|l| *l >= -1e-10 && *l <= 1.0 + 1e-10), "{:?}", eig);

        let (c, s) = (angle.cos(), angle.sin());
        let u = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let rotated = VectorChannelModel::common(&u * h, VectorInput::centered_gaussian(cov).unwrap(), snr).unwrap();
        prop_assert!((rotated.gaussian_mi().unwrap() - model.gaussian_mi().unwrap()).abs() < 1e-10);
        prop_assert!((rotated.gaussian_mmse().unwrap() - model.gaussian_mmse().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn telegraph_monotone(nu in 0.2f64..3.0, snr in 0.1f64..20.0) {
        let lo = TelegraphModel::new(nu, snr).unwrap();
        let hi = TelegraphModel::new(nu, 1.2 * snr).unwrap();
        let (c0, c1) = (telegraph_cmmse(&lo).unwrap(), telegraph_cmmse(&hi).unwrap());
        let (m0, m1) = (telegraph_mmse(&lo).unwrap(), telegraph_mmse(&hi).unwrap());
        prop_assert!(c1 <= c0 + 1e-10 && m1 <= m0 + 1e-10);
        prop_assert!(m0 <= c0 + 1e-10 && c0 <= 1.0 + 1e-10);
    }
}

#[test]
fn atom_mi_below_log_cardinality() {
    let points: Vec<Vec<f64>> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]].iter().map(|p| p.to_vec()).collect();
    let input = VectorInput::atoms(&points, vec![0.25; 4]).unwrap();
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 0.8]);
    for snr in [0.5, 4.0, 40.0] {
        let model = VectorChannelModel::common(h.clone(), input.clone(), snr).unwrap();
        let mi = model.mutual_information(&McConfig::new(9, 20_000)).unwrap();
        assert!(mi.mean <= 4f64.ln() + 3.0 * mi.se + 1e-12, "{mi:?}");
        assert!(mi.mean >= -3.0 * mi.se);
    }
}
