//! Pure and mixed qubit states and the state families used by the witnesses.
//!
//! Qubit 0 is the leftmost tensor factor (party A, path I). A basis index is
//! the big-endian bit string, so qubit `q` of an `n`-qubit register is bit
//! `n - 1 - q` of the index.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{hermitian_eigen, CMatrix, ZERO};

pub const MAX_QUBITS: usize = 10;
pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Residual allowed when checking a matrix square root.
pub const SQRT_RESIDUAL_TOL: f64 = 1e-10;

fn check_qubits(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(CoreError::TooFewQubits { min, got: n });
    }
    if n > MAX_QUBITS {
        return Err(CoreError::TooManyQubits { max: MAX_QUBITS, got: n });
    }
    Ok(())
}

/// Which of the three prepared two-photon sources a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceLabel {
    /// `|0>_A |1>_B`
    Psi01,
    /// `|1>_A |0>_B`
    Psi10,
    /// `cos t |01> + sin t |10>`
    Psi00,
}

impl SourceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Psi01 => "01",
            Self::Psi10 => "10",
            Self::Psi00 => "00",
        }
    }

    /// Inverse of [`SourceLabel::as_str`].
    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "01" => Some(Self::Psi01),
            "10" => Some(Self::Psi10),
            "00" => Some(Self::Psi00),
            _ => None,
        }
    }

    pub fn input_pair(self) -> (u8, u8) {
        match self {
            Self::Psi01 => (0, 1),
            Self::Psi10 => (1, 0),
            Self::Psi00 => (0, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(num_qubits, 1)?;
        let dim = 1usize << num_qubits;
        if amplitudes.len() != dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: amplitudes.len() });
        }
        let norm = libm::sqrt(amplitudes.iter().map(|a| a.norm_sqr()).sum());
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(CoreError::NotNormalized(norm));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits, 1)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: index });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Two-qubit source family: `|01>`, `|10>`, or `cos(theta)|01> + sin(theta)|10>`.
///
/// `theta` is only read for [`SourceLabel::Psi00`] and must lie in `(0, pi/2)`;
/// the endpoints collapse the superposition onto one of the other sources.
pub fn epr_family(theta: f64, label: SourceLabel) -> Result<StateVector> {
    let mut amps = vec![ZERO; 4];
    match label {
        SourceLabel::Psi01 => amps[0b01] = Complex64::new(1.0, 0.0),
        SourceLabel::Psi10 => amps[0b10] = Complex64::new(1.0, 0.0),
        SourceLabel::Psi00 => {
            check_theta(theta)?;
            amps[0b01] = Complex64::new(libm::cos(theta), 0.0);
            amps[0b10] = Complex64::new(libm::sin(theta), 0.0);
        }
    }
    StateVector::new(2, amps)
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(CoreError::AngleOutOfRange(theta));
    }
    Ok(())
}

/// `(|0...0> + |1...1>)/sqrt(2)`
pub fn ghz_state(n: usize) -> Result<StateVector> {
    check_qubits(n, 2)?;
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = h;
    amps[dim - 1] = h;
    StateVector::new(n, amps)
}

/// `|D_n^(1)>`: uniform superposition of the `n` weight-one basis states.
pub fn dicke_one_excitation(n: usize) -> Result<StateVector> {
    check_qubits(n, 2)?;
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    let a = Complex64::new(1.0 / libm::sqrt(n as f64), 0.0);
    for q in 0..n {
        amps[1usize << q] = a;
    }
    StateVector::new(n, amps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(num_qubits: usize, matrix: CMatrix) -> Result<Self> {
        check_qubits(num_qubits, 1)?;
        let dim = 1usize << num_qubits;
        if matrix.dim() != dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: matrix.dim() });
        }
        let herm = matrix.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(CoreError::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(CoreError::TraceNotOne(tr.re));
        }
        let eig = hermitian_eigen(&matrix)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(CoreError::NotPositive(min));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits, 1)?;
        let dim = 1usize << num_qubits;
        let m = CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Ok(Self { num_qubits, matrix: m })
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }
}

impl From<&StateVector> for DensityOperator {
    fn from(psi: &StateVector) -> Self {
        density_from_state(psi)
    }
}

/// `|psi><psi|`
pub fn density_from_state(psi: &StateVector) -> DensityOperator {
    let a = psi.amplitudes();
    DensityOperator { num_qubits: psi.num_qubits(), matrix: CMatrix::outer(a, a) }
}

/// `v |psi><psi| + (1 - v) I / 2^n`
pub fn werner_mix(psi: &StateVector, v: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&v) {
        return Err(CoreError::OutOfRange { name: "visibility", value: v });
    }
    let pure = density_from_state(psi);
    if v == 1.0 {
        return Ok(pure);
    }
    let dim = psi.dim();
    let noise = CMatrix::identity(dim).scale(Complex64::new((1.0 - v) / dim as f64, 0.0));
    let matrix = pure.matrix.scale(Complex64::new(v, 0.0)).add(&noise);
    Ok(DensityOperator { num_qubits: psi.num_qubits(), matrix })
}

/// Werner parameter whose mixture with a pure two-qubit target has fidelity `f`.
///
/// Inverts `f = sqrt(v + (1 - v)/4)`; the result is clamped to `[0, 1]`.
pub fn werner_v_for_fidelity(f: f64) -> f64 {
    ((4.0 * f * f - 1.0) / 3.0).clamp(0.0, 1.0)
}

/// Uhlmann fidelity and the negative-eigenvalue mass clipped from `rho`
/// while forming its square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub value: f64,
    pub clip_mass: f64,
}

/// `tr sqrt( sqrt(rho) rho0 sqrt(rho) )`, via Hermitian eigen-decomposition.
pub fn fidelity(rho: &DensityOperator, rho0: &DensityOperator) -> Result<f64> {
    fidelity_report(rho, rho0).map(|r| r.value)
}

pub fn fidelity_report(rho: &DensityOperator, rho0: &DensityOperator) -> Result<FidelityReport> {
    if rho.dim() != rho0.dim() {
        return Err(CoreError::DimensionMismatch { expected: rho.dim(), got: rho0.dim() });
    }
    let eig = hermitian_eigen(&rho.matrix)?;
    let clip_mass: f64 = eig.values.iter().filter(|&&l| l < 0.0).fold(0.0, |acc, l| acc - l);
    let sqrt_rho = eig.reassemble(|l| libm::sqrt(l.max(0.0)));
    let clipped = eig.reassemble(|l| l.max(0.0));
    let residual = sqrt_rho.matmul(&sqrt_rho).max_abs_diff(&clipped);
    if residual > SQRT_RESIDUAL_TOL {
        return Err(CoreError::NoConvergence(residual));
    }
    let inner = sqrt_rho.matmul(&rho0.matrix).matmul(&sqrt_rho);
    let inner_eig = hermitian_eigen(&inner)?;
    // eigenvalues at round-off level would contribute sqrt(eps) each
    let floor = 64.0 * f64::EPSILON * inner.frobenius_norm();
    let value: f64 = inner_eig
        .values
        .iter()
        .filter(|&&l| l > floor)
        .map(|&l| libm::sqrt(l))
        .sum();
    Ok(FidelityReport { value: value.clamp(0.0, 1.0), clip_mass })
}

/// `sqrt(<psi| rho |psi>)`, the pure-target special case of [`fidelity`].
pub fn fidelity_with_pure(rho: &DensityOperator, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(CoreError::DimensionMismatch { expected: rho.dim(), got: psi.dim() });
    }
    let rp = rho.matrix.mul_vec(psi.amplitudes());
    let overlap: Complex64 = psi.amplitudes().iter().zip(&rp).map(|(a, b)| a.conj() * b).sum();
    Ok(libm::sqrt(overlap.re.max(0.0)).min(1.0))
}
