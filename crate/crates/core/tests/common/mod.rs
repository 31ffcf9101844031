#![allow(dead_code)]

use std::collections::BTreeMap;

use cohwit_core::expsim::{CountTable, ExperimentConfig};
use cohwit_core::lhv::ParadoxSpec;
use cohwit_core::linalg::CMatrix;
use cohwit_core::measure::{Axis, ObservableChain};
use cohwit_core::qstate::{DensityOperator, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `G G^dagger / tr` for a 4x4 complex `G` built from 32 reals.
pub fn density_from_params(p: &[f64]) -> DensityOperator {
    assert_eq!(p.len(), 32);
    let g = CMatrix::from_rows(4, (0..16).map(|k| Complex64::new(p[2 * k], p[2 * k + 1])).collect());
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    let m = m.scale(Complex64::new(1.0 / tr, 0.0));
    // clean Hermitian round-off
    let m = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
    DensityOperator::new(2, m).expect("Gram matrices are states")
}

pub fn random_density(rng: &mut ChaCha8Rng) -> DensityOperator {
    let p: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
    density_from_params(&p)
}

pub fn state_from_params(n: usize, p: &[f64]) -> StateVector {
    let dim = 1 << n;
    let raw: Vec<Complex64> = (0..dim).map(|k| Complex64::new(p[2 * k], p[2 * k + 1])).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::new(n, raw.iter().map(|z| z / norm).collect()).expect("normalized")
}

pub fn random_axis(rng: &mut ChaCha8Rng) -> Axis {
    Axis::PAULIS[rng.random_range(0..3)]
}

/// Count tables whose pooled correlators equal `values` up to rounding, with
/// `n` coincidences each and uniform marginals.
pub fn counts_for_values(
    spec: &ParadoxSpec,
    values: &[f64],
    n: u64,
) -> BTreeMap<(String, ObservableChain), CountTable> {
    spec.constraints()
        .iter()
        .zip(values)
        .map(|(c, &e)| {
            let agree = (n as f64 * (1.0 + e) / 4.0).round() as u64;
            let disagree = n / 2 - agree;
            let axes = c.observable.axes();
            let table = CountTable::from_counts(
                (axes[0], axes[1]),
                [agree, disagree, disagree, agree],
                ExperimentConfig::default(),
            );
            ((c.source_label.clone(), c.observable.clone()), table)
        })
        .collect()
}

/// Config whose single trial collects `total` coincidences per setting on average.
pub fn config_with_total(total: f64, visibility_v: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        num_trials: 1,
        duration_per_setting: 1.0,
        efficiency: 1.0,
        visibility_v,
        seed,
        ..Default::default()
    }
    .with_total_coincidences(total)
}
