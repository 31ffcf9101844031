//! Dichotomic Pauli observables, Born-rule expectations and outcome tables.
//!
//! Outcome bit 0 is the +1 eigenvalue and bit 1 the -1 eigenvalue, so
//! `M_{0|A} - M_{1|A} = M_A`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::qstate::{DensityOperator, StateVector};

/// Tolerance for distribution normalization.
pub const DIST_TOL: f64 = 1e-10;
/// Entries may dip this far below zero from round-off.
pub const NEG_PROB_TOL: f64 = 1e-12;
/// Imaginary residue of an expectation value that is silently discarded.
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub const PAULIS: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn symbol(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Axis::I),
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> CMatrix {
        let i = Complex64::new(0.0, 1.0);
        let data = match self {
            Axis::I => [ONE, ZERO, ZERO, ONE],
            Axis::X => [ZERO, ONE, ONE, ZERO],
            Axis::Y => [ZERO, -i, i, ZERO],
            Axis::Z => [ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::from_rows(2, data.to_vec())
    }

    /// Eigenvector for `outcome` (0 -> +1, 1 -> -1) with fixed phases:
    /// `|+> = (|0>+|1>)/sqrt2`, `|+i> = (|0>+i|1>)/sqrt2`, `|0>`, and their partners.
    pub fn eigenvector(self, outcome: u8) -> Result<[Complex64; 2]> {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        Ok(match self {
            Axis::X => [Complex64::new(h, 0.0), Complex64::new(s * h, 0.0)],
            Axis::Y => [Complex64::new(h, 0.0), Complex64::new(0.0, s * h)],
            Axis::Z if outcome == 0 => [ONE, ZERO],
            Axis::Z => [ZERO, ONE],
            Axis::I => return Err(CoreError::InvalidAxis('I')),
        })
    }

    /// `(I + (-1)^outcome sigma)/2`
    pub fn projector(self, outcome: u8) -> Result<CMatrix> {
        if self == Axis::I {
            return Err(CoreError::InvalidAxis('I'));
        }
        let s = if outcome == 0 { 0.5 } else { -0.5 };
        Ok(CMatrix::identity(2)
            .scale(Complex64::new(0.5, 0.0))
            .add(&self.matrix().scale(Complex64::new(s, 0.0))))
    }

    /// Action on a single basis bit: `sigma |bit> = phase |bit'>`.
    fn act(self, bit: usize) -> (usize, Complex64) {
        match self {
            Axis::I => (bit, ONE),
            Axis::X => (bit ^ 1, ONE),
            Axis::Y => (bit ^ 1, if bit == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) }),
            Axis::Z => (bit, if bit == 0 { ONE } else { -ONE }),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Tensor product of single-qubit Paulis, one per qubit, leftmost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ObservableChain(Vec<Axis>);

impl ObservableChain {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self(axes)
    }

    pub fn uniform(axis: Axis, n: usize) -> Self {
        Self(alloc::vec![axis; n])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Explicit `2^n x 2^n` Kronecker product.
    pub fn matrix(&self) -> CMatrix {
        self.0
            .iter()
            .fold(CMatrix::identity(1), |acc, a| acc.kron(&a.matrix()))
    }

    /// The chain maps `|j>` to `phase(j) |j ^ flip_mask>`.
    fn action(&self, j: usize) -> (usize, Complex64) {
        let n = self.0.len();
        let mut out = 0usize;
        let mut phase = ONE;
        for (q, axis) in self.0.iter().enumerate() {
            let shift = n - 1 - q;
            let (bit, p) = axis.act((j >> shift) & 1);
            out |= bit << shift;
            phase *= p;
        }
        (out, phase)
    }

    /// `<psi| O |psi>` on a pure state.
    pub fn expectation_pure(&self, psi: &StateVector) -> Result<f64> {
        if psi.num_qubits() != self.len() {
            return Err(CoreError::DimensionMismatch { expected: self.len(), got: psi.num_qubits() });
        }
        let amps = psi.amplitudes();
        let mut acc = ZERO;
        for (j, a) in amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let (k, phase) = self.action(j);
            acc += amps[k].conj() * phase * a;
        }
        real_part(acc)
    }
}

fn real_part(z: Complex64) -> Result<f64> {
    debug_assert!(z.im.abs() <= IMAG_TOL, "expectation has imaginary part {}", z.im);
    if z.im.abs() > IMAG_TOL {
        return Err(CoreError::NotHermitian(z.im.abs()));
    }
    Ok(z.re)
}

impl fmt::Display for ObservableChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for ObservableChain {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        let axes: Option<Vec<Axis>> = s.trim().chars().map(Axis::from_symbol).collect();
        match axes {
            Some(a) if !a.is_empty() => Ok(Self(a)),
            _ => Err(CoreError::ParseObservable(s.into())),
        }
    }
}

impl From<ObservableChain> for String {
    fn from(c: ObservableChain) -> String {
        format!("{c}")
    }
}

impl TryFrom<String> for ObservableChain {
    type Error = CoreError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `tr(O rho)`
pub fn expectation(rho: &DensityOperator, obs: &ObservableChain) -> Result<f64> {
    if rho.num_qubits() != obs.len() {
        return Err(CoreError::DimensionMismatch { expected: obs.len(), got: rho.num_qubits() });
    }
    // tr(O rho) = sum_j O_{j^m, j} rho_{j, j^m}
    let m = rho.matrix();
    let mut acc = ZERO;
    for j in 0..rho.dim() {
        let (k, phase) = obs.action(j);
        acc += phase * m[(j, k)];
    }
    real_part(acc)
}

/// A local two-outcome measurement, optionally with its outcome labels swapped
/// (the observable `-sigma`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalObservable {
    pub axis: Axis,
    pub negated: bool,
}

impl LocalObservable {
    pub fn new(axis: Axis) -> Self {
        Self { axis, negated: false }
    }

    pub fn negated(axis: Axis) -> Self {
        Self { axis, negated: true }
    }

    /// Projector `M_{outcome}` of this observable.
    pub fn projector(&self, outcome: u8) -> Result<CMatrix> {
        self.axis.projector(outcome ^ self.negated as u8)
    }

    pub fn matrix(&self) -> CMatrix {
        let m = self.axis.matrix();
        if self.negated {
            m.scale(-ONE)
        } else {
            m
        }
    }
}

/// What produces the outcomes for one input pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// A two-qubit state measured with the Born rule.
    Prepared(DensityOperator),
    /// Both parties output independent uniform bits.
    UniformOutputs,
}

/// `P(a, b | x, y)` over binary inputs and outputs, stored `[x][y][a][b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    probs: [[[[f64; 2]; 2]; 2]; 2],
}

impl JointDistribution {
    pub fn new(probs: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self> {
        for x in 0..2 {
            for y in 0..2 {
                let row = &probs[x][y];
                let mut sum = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let p = row[a][b];
                        if !p.is_finite() || p < -NEG_PROB_TOL {
                            return Err(CoreError::InvalidDistribution(format!(
                                "P({a},{b}|{x},{y}) = {p}"
                            )));
                        }
                        sum += p;
                    }
                }
                if (sum - 1.0).abs() > DIST_TOL {
                    return Err(CoreError::InvalidDistribution(format!(
                        "row ({x},{y}) sums to {sum}"
                    )));
                }
            }
        }
        Ok(Self { probs })
    }

    /// Builds a distribution with the same `P(a, b)` row for every input pair.
    pub fn input_independent(row: [[f64; 2]; 2]) -> Result<Self> {
        Self::new([[row; 2]; 2])
    }

    pub fn uniform() -> Self {
        Self { probs: [[[[0.25; 2]; 2]; 2]; 2] }
    }

    pub fn get(&self, a: u8, b: u8, x: u8, y: u8) -> f64 {
        self.probs[x as usize][y as usize][a as usize][b as usize]
    }

    pub fn row(&self, x: u8, y: u8) -> [[f64; 2]; 2] {
        self.probs[x as usize][y as usize]
    }

    pub fn table(&self) -> &[[[[f64; 2]; 2]; 2]; 2] {
        &self.probs
    }
}

/// Born-rule outcome table `P(a,b|x,y) = tr((M_{a|x} (x) M_{b|y}) rho_xy)`.
///
/// `sources` must cover all four input pairs; `obs_a[x]` / `obs_b[y]` are the
/// measurements for each input.
pub fn outcome_distribution(
    sources: &BTreeMap<(u8, u8), Source>,
    obs_a: [LocalObservable; 2],
    obs_b: [LocalObservable; 2],
) -> Result<JointDistribution> {
    let mut probs = [[[[0.0; 2]; 2]; 2]; 2];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let source = sources.get(&(x, y)).ok_or(CoreError::MissingState(x, y))?;
            probs[x as usize][y as usize] = match source {
                Source::UniformOutputs => [[0.25; 2]; 2],
                Source::Prepared(rho) => born_row(rho, obs_a[x as usize], obs_b[y as usize])?,
            };
        }
    }
    JointDistribution::new(probs)
}

/// `P(a, b)` for one two-qubit state and one pair of local measurements.
pub fn born_row(rho: &DensityOperator, a: LocalObservable, b: LocalObservable) -> Result<[[f64; 2]; 2]> {
    if rho.num_qubits() != 2 {
        return Err(CoreError::WrongQubitCount { expected: 2, got: rho.num_qubits() });
    }
    let mut row = [[0.0; 2]; 2];
    for oa in 0..2u8 {
        let pa = a.projector(oa)?;
        for ob in 0..2u8 {
            let joint = pa.kron(&b.projector(ob)?);
            let p = real_part(joint.trace_product(rho.matrix()))?;
            row[oa as usize][ob as usize] = p;
        }
    }
    Ok(row)
}

/// `sum_{a,b} (-1)^{a xor b} P(a, b | x, y)`
pub fn correlator(dist: &JointDistribution, x: u8, y: u8) -> f64 {
    let r = dist.row(x, y);
    r[0][0] - r[0][1] - r[1][0] + r[1][1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{density_from_state, dicke_one_excitation, epr_family, ghz_state, SourceLabel};
    use core::f64::consts::PI;

    fn chain(s: &str) -> ObservableChain {
        s.parse().unwrap()
    }

    fn rho(theta: f64, label: SourceLabel) -> DensityOperator {
        density_from_state(&epr_family(theta, label).unwrap())
    }

    #[test]
    fn pauli_factors_are_dichotomic() {
        for a in Axis::PAULIS {
            let m = a.matrix();
            assert!(m.hermiticity_defect() == 0.0);
            assert!(m.matmul(&m).max_abs_diff(&CMatrix::identity(2)) == 0.0);
            assert!(m.trace().norm() == 0.0);
            let p0 = a.projector(0).unwrap();
            let p1 = a.projector(1).unwrap();
            assert!(p0.add(&p1).max_abs_diff(&CMatrix::identity(2)) == 0.0);
            assert!(p0.sub(&p1).max_abs_diff(&m) == 0.0);
            for o in 0..2 {
                let v = a.eigenvector(o).unwrap();
                let proj = CMatrix::outer(&v, &v);
                assert!(proj.max_abs_diff(&a.projector(o).unwrap()) < 1e-15);
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let ghz = density_from_state(&ghz_state(3).unwrap());
        assert!((expectation(&ghz, &chain("XYY")).unwrap() + 1.0).abs() < 1e-12);
        let epr = rho(PI / 4.0, SourceLabel::Psi00);
        assert!((expectation(&epr, &chain("XX")).unwrap() - 1.0).abs() < 1e-12);
        let s = rho(PI / 12.0, SourceLabel::Psi00);
        assert!((expectation(&s, &chain("XX")).unwrap() - 0.5).abs() < 1e-12);
        let d3 = density_from_state(&dicke_one_excitation(3).unwrap());
        assert!((expectation(&d3, &chain("XXZ")).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            expectation(&epr, &chain("XXX")),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stabilizer_values_match_explicit_matrices() {
        let ghz = ghz_state(3).unwrap();
        let g = density_from_state(&ghz);
        let cases = [("XYY", -1.0), ("YXY", -1.0), ("YYX", -1.0), ("XXX", 1.0)];
        for (c, want) in cases {
            let o = chain(c);
            let fast = expectation(&g, &o).unwrap();
            let slow = o.matrix().trace_product(g.matrix()).re;
            let pure = o.expectation_pure(&ghz).unwrap();
            assert!((fast - want).abs() < 1e-12, "{c}");
            assert!((slow - want).abs() < 1e-12, "{c}");
            assert!((pure - want).abs() < 1e-12, "{c}");
        }
        let two = [
            (SourceLabel::Psi01, "ZZ", -1.0),
            (SourceLabel::Psi10, "ZZ", -1.0),
            (SourceLabel::Psi01, "XX", 0.0),
            (SourceLabel::Psi10, "XX", 0.0),
            (SourceLabel::Psi00, "XX", 1.0),
            (SourceLabel::Psi01, "YY", 0.0),
            (SourceLabel::Psi10, "YY", 0.0),
            (SourceLabel::Psi00, "YY", 1.0),
        ];
        for (label, c, want) in two {
            let r = rho(PI / 4.0, label);
            assert!((expectation(&r, &chain(c)).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_parsing() {
        assert_eq!(chain("xyz").axes(), &[Axis::X, Axis::Y, Axis::Z]);
        assert!("XQ".parse::<ObservableChain>().is_err());
        assert!("".parse::<ObservableChain>().is_err());
        assert_eq!(alloc::format!("{}", chain("IZX")), "IZX");
    }

    fn all_prepared(r: &DensityOperator) -> BTreeMap<(u8, u8), Source> {
        let mut m = BTreeMap::new();
        for x in 0..2 {
            for y in 0..2 {
                m.insert((x, y), Source::Prepared(r.clone()));
            }
        }
        m
    }

    #[test]
    fn outcome_distribution_examples() {
        let z = LocalObservable::new(Axis::Z);
        let x = LocalObservable::new(Axis::X);
        let d = outcome_distribution(&all_prepared(&rho(0.0, SourceLabel::Psi01)), [z; 2], [z; 2]).unwrap();
        for xi in 0..2 {
            for yi in 0..2 {
                assert!((d.get(0, 1, xi, yi) - 1.0).abs() < 1e-15);
            }
        }

        // hand arithmetic: |+>|+> and |->|-> components of the EPR state
        let d = outcome_distribution(&all_prepared(&rho(PI / 4.0, SourceLabel::Psi00)), [x; 2], [x; 2]).unwrap();
        assert!((d.get(0, 0, 0, 0) - 0.5).abs() < 1e-15);
        assert!((d.get(1, 1, 0, 0) - 0.5).abs() < 1e-15);
        assert!(d.get(0, 1, 0, 0).abs() < 1e-15 && d.get(1, 0, 0, 0).abs() < 1e-15);

        let d = outcome_distribution(&all_prepared(&rho(0.0, SourceLabel::Psi01)), [x; 2], [x; 2]).unwrap();
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((d.get(a, b, 1, 1) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn outcome_distribution_missing_source() {
        let mut m = all_prepared(&rho(0.0, SourceLabel::Psi01));
        m.remove(&(1, 0));
        let z = LocalObservable::new(Axis::Z);
        assert_eq!(outcome_distribution(&m, [z; 2], [z; 2]), Err(CoreError::MissingState(1, 0)));
    }

    #[test]
    fn negation_swaps_labels() {
        let r = rho(PI / 4.0, SourceLabel::Psi00);
        let x = LocalObservable::new(Axis::X);
        let nx = LocalObservable::negated(Axis::X);
        let plain = born_row(&r, x, x).unwrap();
        let flipped = born_row(&r, x, nx).unwrap();
        assert!((plain[0][0] - flipped[0][1]).abs() < 1e-15);
        assert!((plain[1][1] - flipped[1][0]).abs() < 1e-15);
    }

    #[test]
    fn correlator_examples() {
        let perfect = JointDistribution::input_independent([[0.5, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(correlator(&perfect, 0, 0), 1.0);
        assert_eq!(correlator(&JointDistribution::uniform(), 1, 0), 0.0);
        let anti = JointDistribution::input_independent([[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(correlator(&anti, 1, 1), -1.0);
    }

    #[test]
    fn distribution_validation() {
        assert!(JointDistribution::input_independent([[0.5, 0.5], [0.5, 0.0]]).is_err());
        assert!(JointDistribution::input_independent([[1.1, -0.1], [0.0, 0.0]]).is_err());
        assert!(JointDistribution::input_independent([[f64::NAN, 0.5], [0.5, 0.0]]).is_err());
    }
}
