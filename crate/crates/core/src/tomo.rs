//! Two-qubit state tomography from Pauli-basis coincidence counts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::expsim::{derive_seed, simulate_counts, std_dev, CountTable, ExperimentConfig};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::measure::Axis;
use crate::qstate::{
    epr_family, fidelity_report, werner_mix, werner_v_for_fidelity, DensityOperator, SourceLabel, StateVector,
};

/// Replicates used for tomography error bars.
pub const TOMO_BOOTSTRAP_REPLICATES: usize = 200;

const RESAMPLE_TAG: u64 = 0x7070_3a11;

pub type TomographyCounts = BTreeMap<(Axis, Axis), CountTable>;

/// The nine local Pauli settings, A's axis varying slowest.
pub fn tomography_settings() -> Vec<(Axis, Axis)> {
    Axis::PAULIS.iter().flat_map(|&a| Axis::PAULIS.iter().map(move |&b| (a, b))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub rho_hat: DensityOperator,
    pub fidelity_to_target: f64,
    pub settings_used: Vec<(Axis, Axis)>,
    /// Negative eigenvalue weight of the unconstrained estimate.
    pub clip_magnitude: f64,
    /// Largest imaginary part of any entry of `rho`.
    pub max_imag: f64,
}

/// Pauli correlation matrix `T[i][j] = <sigma_i (x) sigma_j>` with `sigma_0 = I`.
///
/// Single-party terms average the marginals of the three settings sharing
/// that party's axis.
pub fn pauli_correlations(counts: &TomographyCounts) -> Result<[[f64; 4]; 4]> {
    let mut t = [[0.0; 4]; 4];
    t[0][0] = 1.0;
    for (i, &a) in Axis::PAULIS.iter().enumerate() {
        for (j, &b) in Axis::PAULIS.iter().enumerate() {
            let table = counts.get(&(a, b)).ok_or(CoreError::MissingSetting(a.symbol(), b.symbol()))?;
            let f = table.frequencies()?;
            t[i + 1][j + 1] = f[0][0] - f[0][1] - f[1][0] + f[1][1];
            t[i + 1][0] += table.marginal_a()? / 3.0;
            t[0][j + 1] += table.marginal_b()? / 3.0;
        }
    }
    Ok(t)
}

/// `(1/4) sum_ij T_ij sigma_i (x) sigma_j`; unit trace and Hermitian, not
/// necessarily positive.
pub fn linear_inversion(counts: &TomographyCounts) -> Result<CMatrix> {
    let t = pauli_correlations(counts)?;
    let basis = [Axis::I, Axis::X, Axis::Y, Axis::Z];
    let mut rho = CMatrix::zeros(4);
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let term = a.matrix().kron(&b.matrix()).scale(Complex64::new(t[i][j] / 4.0, 0.0));
            rho = rho.add(&term);
        }
    }
    Ok(rho)
}

/// Nearest density operator in Frobenius norm: the eigenvalues are projected
/// onto the probability simplex, the eigenvectors kept. Returns the operator
/// and the total negative eigenvalue mass before projection.
pub fn project_to_density(num_qubits: usize, m: &CMatrix) -> Result<(DensityOperator, f64)> {
    let eig = hermitian_eigen(m)?;
    let clip_mass = eig.values.iter().filter(|&&v| v < 0.0).fold(0.0, |acc, v| acc - v);
    let projected = project_simplex(&eig.values);
    let mut k = 0;
    let rho = eig.reassemble(|_| {
        let v = projected[k];
        k += 1;
        v
    });
    Ok((DensityOperator::new(num_qubits, hermitize(&rho))?, clip_mass))
}

fn hermitize(m: &CMatrix) -> CMatrix {
    m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Euclidean projection of `v` onto `{x >= 0, sum x = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - shift).max(0.0)).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    out
}

/// Linear inversion followed by projection onto the density operators.
pub fn reconstruct(counts: &TomographyCounts, target: &DensityOperator) -> Result<TomographyResult> {
    if target.num_qubits() != 2 {
        return Err(CoreError::WrongQubitCount { expected: 2, got: target.num_qubits() });
    }
    let raw = linear_inversion(counts)?;
    let (rho_hat, clip_magnitude) = project_to_density(2, &raw)?;
    let fid = fidelity_report(&rho_hat, target)?;
    let max_imag = rho_hat.matrix().as_slice().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(TomographyResult {
        rho_hat,
        fidelity_to_target: fid.value,
        settings_used: tomography_settings(),
        clip_magnitude,
        max_imag,
    })
}

/// Bootstrap spread of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyErrors {
    pub fidelity_std_err: f64,
    /// Per-entry standard error of `Re rho`, row-major.
    pub re_std_err: Vec<f64>,
    /// Per-entry standard error of `Im rho`, row-major.
    pub im_std_err: Vec<f64>,
}

/// Resamples each pooled cell as Poisson around its observed value and
/// repeats the reconstruction.
pub fn bootstrap_reconstruction(
    counts: &TomographyCounts,
    target: &DensityOperator,
    replicates: usize,
    seed: u64,
) -> Result<TomographyErrors> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Poisson};

    let seed = derive_seed(seed, RESAMPLE_TAG);
    let mut fids = Vec::with_capacity(replicates);
    let mut re: Vec<Vec<f64>> = (0..16).map(|_| Vec::with_capacity(replicates)).collect();
    let mut im: Vec<Vec<f64>> = (0..16).map(|_| Vec::with_capacity(replicates)).collect();
    for r in 0..replicates {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let resampled: TomographyCounts = counts
            .iter()
            .map(|(k, table)| {
                let mut cells = table.pooled();
                for c in cells.iter_mut() {
                    if *c > 0 {
                        *c = Poisson::new(*c as f64).map(|d| d.sample(&mut rng) as u64).unwrap_or(0);
                    }
                }
                (*k, CountTable::from_counts(table.setting, cells, table.config))
            })
            .collect();
        let Ok(res) = reconstruct(&resampled, target) else {
            continue;
        };
        fids.push(res.fidelity_to_target);
        for (idx, z) in res.rho_hat.matrix().as_slice().iter().enumerate() {
            re[idx].push(z.re);
            im[idx].push(z.im);
        }
    }
    Ok(TomographyErrors {
        fidelity_std_err: std_dev(&fids),
        re_std_err: re.iter().map(|v| std_dev(v)).collect(),
        im_std_err: im.iter().map(|v| std_dev(v)).collect(),
    })
}

/// Simulates all nine settings on `state` with independent seeds per setting.
pub fn simulate_tomography(state: &DensityOperator, cfg: &ExperimentConfig) -> Result<TomographyCounts> {
    tomography_settings()
        .into_iter()
        .enumerate()
        .map(|(k, s)| Ok((s, simulate_counts(state, s, &cfg.derived(k as u64))?)))
        .collect()
}

/// A two-qubit source with its reported fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub name: String,
    pub state: StateVector,
    pub reported_fidelity: f64,
}

/// The six sources characterized in the experiment: the two product inputs
/// and the entangled source at four angles.
pub fn reference_states() -> Result<Vec<ReferenceState>> {
    use core::f64::consts::PI;
    let rows: [(&str, f64, SourceLabel, f64); 6] = [
        ("psi01", PI / 4.0, SourceLabel::Psi01, 0.9973),
        ("psi00_pi_12", PI / 12.0, SourceLabel::Psi00, 0.9946),
        ("psi00_pi_8", PI / 8.0, SourceLabel::Psi00, 0.9686),
        ("psi00_pi_6", PI / 6.0, SourceLabel::Psi00, 0.9771),
        ("psi00_pi_4", PI / 4.0, SourceLabel::Psi00, 0.9937),
        ("psi10", PI / 4.0, SourceLabel::Psi10, 0.9939),
    ];
    rows.iter()
        .map(|&(name, theta, label, f)| {
            Ok(ReferenceState { name: name.into(), state: epr_family(theta, label)?, reported_fidelity: f })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReportRow {
    pub name: String,
    pub visibility_v: f64,
    /// Fidelity of the noisy source itself to the ideal state.
    pub expected_fidelity: f64,
    pub result: TomographyResult,
    pub errors: TomographyErrors,
}

/// Simulates, reconstructs and bootstraps one reference state after Werner
/// noise `visibility_v`. `tag` separates the RNG streams of different states.
pub fn reconstruct_reference(
    reference: &ReferenceState,
    visibility_v: f64,
    cfg: &ExperimentConfig,
    replicates: usize,
    tag: u64,
) -> Result<TomographyReportRow> {
    let noisy = werner_mix(&reference.state, visibility_v)?;
    let ideal = DensityOperator::from(&reference.state);
    let sub = cfg.derived(1000 + tag);
    let counts = simulate_tomography(&noisy, &sub)?;
    let result = reconstruct(&counts, &ideal)?;
    let errors = bootstrap_reconstruction(&counts, &ideal, replicates, sub.seed)?;
    let expected_fidelity = fidelity_report(&noisy, &ideal)?.value;
    Ok(TomographyReportRow { name: reference.name.clone(), visibility_v, expected_fidelity, result, errors })
}

/// Reconstructs each reference state after Werner noise chosen to match its
/// reported fidelity. `cfg.visibility_v` is ignored here.
pub fn tomography_report(cfg: &ExperimentConfig, replicates: usize) -> Result<Vec<TomographyReportRow>> {
    reference_states()?
        .iter()
        .enumerate()
        .map(|(k, r)| reconstruct_reference(r, werner_v_for_fidelity(r.reported_fidelity), cfg, replicates, k as u64))
        .collect()
}
