//! GHZ-type coherence paradoxes and the convex-mixture refuter.
//!
//! A multi-source local model assigns each prepared source its own hidden
//! variable. If the "wave" source is a classical mixture of the "particle"
//! sources, every correlator it produces is the same convex combination of
//! the particle correlators. A paradox is a list of correlator constraints for
//! which no such combination exists.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::lp::minimax_mixture;
use crate::measure::{expectation, Axis, ObservableChain};
use crate::qstate::{
    check_theta, density_from_state, dicke_one_excitation, epr_family, ghz_state, SourceLabel,
    StateVector,
};

/// Tolerance used when matching stabilizer expectations to +-1.
pub const STABILIZER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub source_label: String,
    pub observable: ObservableChain,
    pub expected_value: f64,
}

/// The mixed ("wave") source and the sources it is hypothesized to mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureClaim {
    pub mixed_label: String,
    pub component_labels: Vec<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ParadoxSpec {
    constraints: Vec<Constraint>,
    mixture_claim: MixtureClaim,
}

#[derive(Deserialize)]
struct RawSpec {
    constraints: Vec<Constraint>,
    mixture_claim: MixtureClaim,
}

impl TryFrom<RawSpec> for ParadoxSpec {
    type Error = CoreError;
    fn try_from(raw: RawSpec) -> Result<Self> {
        ParadoxSpec::new(raw.constraints, raw.mixture_claim)
    }
}

/// `(source label, observable)` -> measured or predicted correlator.
pub type Observations = BTreeMap<(String, ObservableChain), f64>;

impl ParadoxSpec {
    pub fn new(constraints: Vec<Constraint>, mixture_claim: MixtureClaim) -> Result<Self> {
        for c in &constraints {
            if !(-1.0..=1.0).contains(&c.expected_value) {
                return Err(CoreError::InvalidSpec(format!(
                    "expected value {} of {} on {} is outside [-1, 1]",
                    c.expected_value, c.observable, c.source_label
                )));
            }
        }
        let labels: BTreeSet<&str> = constraints.iter().map(|c| c.source_label.as_str()).collect();
        if !labels.contains(mixture_claim.mixed_label.as_str()) {
            return Err(CoreError::InvalidSpec(format!(
                "mixed label {} has no constraint",
                mixture_claim.mixed_label
            )));
        }
        if mixture_claim.component_labels.is_empty() {
            return Err(CoreError::InvalidSpec("no component labels".into()));
        }
        let mut seen = BTreeSet::new();
        for l in &mixture_claim.component_labels {
            if !seen.insert(l.as_str()) {
                return Err(CoreError::InvalidSpec(format!("duplicate component {l}")));
            }
            if !labels.contains(l.as_str()) {
                return Err(CoreError::InvalidSpec(format!("component {l} has no constraint")));
            }
            if *l == mixture_claim.mixed_label {
                return Err(CoreError::InvalidSpec(format!("{l} is both mixed and a component")));
            }
        }
        Ok(Self { constraints, mixture_claim })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn mixture_claim(&self) -> &MixtureClaim {
        &self.mixture_claim
    }

    /// The value of the last constraint on the mixed source.
    pub fn final_value(&self) -> f64 {
        self.constraints
            .iter()
            .rev()
            .find(|c| c.source_label == self.mixture_claim.mixed_label)
            .map(|c| c.expected_value)
            .unwrap_or(0.0)
    }

    /// The spec's own expected values, keyed for [`lhv_mixture_test`].
    pub fn theoretical_observations(&self) -> Observations {
        self.constraints
            .iter()
            .map(|c| ((c.source_label.clone(), c.observable.clone()), c.expected_value))
            .collect()
    }

    /// Observables measured on the mixed source, in constraint order.
    pub fn mixed_observables(&self) -> Vec<ObservableChain> {
        let mut out: Vec<ObservableChain> = Vec::new();
        for c in &self.constraints {
            if c.source_label == self.mixture_claim.mixed_label && !out.contains(&c.observable) {
                out.push(c.observable.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxVerdict {
    /// Value used for each constraint, in spec order.
    pub per_constraint_values: Vec<f64>,
    pub lhv_feasible: bool,
    /// Zero when feasible; otherwise the smallest achievable worst-case residual.
    pub violation_gap: f64,
    /// Best mixture weights (component order), or for the GHZ check the
    /// closest sign assignment `v_X^1, v_Y^1, v_X^2, v_Y^2, v_X^3, v_Y^3`.
    pub witness_weights: Vec<f64>,
}

fn chain(s: &str) -> ObservableChain {
    s.parse().expect("static chain")
}

/// The four GHZ stabilizers in the order `XYY, YXY, YYX, XXX`.
pub const GHZ_STABILIZERS: [&str; 4] = ["XYY", "YXY", "YYX", "XXX"];
/// Their expectation values on the GHZ state.
pub const GHZ_SIGNS: [f64; 4] = [-1.0, -1.0, -1.0, 1.0];

/// Predicted product of pre-assigned local values for a stabilizer.
/// `assignment` bit `2*q` is `v_X^q`, bit `2*q+1` is `v_Y^q` (set bit = -1).
fn assignment_product(stabilizer: &str, assignment: u8) -> f64 {
    stabilizer
        .chars()
        .enumerate()
        .map(|(q, c)| {
            let bit = if c == 'X' { 2 * q } else { 2 * q + 1 };
            if assignment >> bit & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .product()
}

/// Evaluates the four GHZ stabilizers on a three-qubit state and searches all
/// 64 deterministic local assignments for one reproducing every stabilizer
/// whose value is definite (+-1).
pub fn ghz_stabilizer_check(state: &StateVector) -> Result<ParadoxVerdict> {
    if state.num_qubits() != 3 {
        return Err(CoreError::WrongQubitCount { expected: 3, got: state.num_qubits() });
    }
    let values: Vec<f64> = GHZ_STABILIZERS
        .iter()
        .map(|s| chain(s).expectation_pure(state))
        .collect::<Result<_>>()?;
    let definite: Vec<usize> = (0..4)
        .filter(|&k| (values[k].abs() - 1.0).abs() <= STABILIZER_TOL)
        .collect();

    let mut best: Option<(u8, f64)> = None;
    for assignment in 0u8..64 {
        let worst = definite
            .iter()
            .map(|&k| (values[k] - assignment_product(GHZ_STABILIZERS[k], assignment)).abs())
            .fold(0.0, f64::max);
        if best.is_none_or(|(_, w)| worst < w) {
            best = Some((assignment, worst));
        }
    }
    let (assignment, worst) = best.expect("64 candidates");
    let lhv_feasible = worst <= STABILIZER_TOL;
    let witness_weights = (0..6)
        .map(|bit| if assignment >> bit & 1 == 1 { -1.0 } else { 1.0 })
        .collect();
    Ok(ParadoxVerdict {
        per_constraint_values: values,
        lhv_feasible,
        violation_gap: if lhv_feasible { 0.0 } else { worst },
        witness_weights,
    })
}

/// Convenience: the check on the three-qubit GHZ state itself.
pub fn ghz_paradox() -> Result<ParadoxVerdict> {
    ghz_stabilizer_check(&ghz_state(3)?)
}

/// The five-constraint paradox for `|psi_00(theta)>` measured along `axis`
/// (X or Y) against the particle sources `|01>` and `|10>`.
///
/// Expected values are Born-rule predictions on the actual states.
pub fn coherence_paradox(theta: f64, axis: Axis) -> Result<ParadoxSpec> {
    check_theta(theta)?;
    if !matches!(axis, Axis::X | Axis::Y) {
        return Err(CoreError::InvalidAxis(axis.symbol()));
    }
    let zz = ObservableChain::uniform(Axis::Z, 2);
    let aa = ObservableChain::uniform(axis, 2);
    let rows = [
        (SourceLabel::Psi01, &zz),
        (SourceLabel::Psi10, &zz),
        (SourceLabel::Psi01, &aa),
        (SourceLabel::Psi10, &aa),
        (SourceLabel::Psi00, &aa),
    ];
    let mut constraints = Vec::with_capacity(5);
    for (label, obs) in rows {
        let rho = density_from_state(&epr_family(theta, label)?);
        constraints.push(Constraint {
            source_label: label.as_str().to_string(),
            observable: obs.clone(),
            expected_value: expectation(&rho, obs)?,
        });
    }
    ParadoxSpec::new(
        constraints,
        MixtureClaim {
            mixed_label: "00".into(),
            component_labels: vec!["01".into(), "10".into()],
            note: format!("psi_00(theta={theta}) as a mixture of psi_01 and psi_10, {axis}{axis} vs ZZ"),
        },
    )
}

/// Bit-string label of a basis index, qubit 0 first.
pub fn basis_label(n: usize, index: usize) -> String {
    (0..n).map(|q| if index >> (n - 1 - q) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Multi-slit paradox on the one-excitation Dicke state: `Z^n` and
/// `X^{n-1} Z` (Z at `z_position`) on each weight-one basis state, and the
/// latter on `|D_n^(1)>`. All values are Born-rule predictions.
pub fn dicke_paradox(n: usize, z_position: usize) -> Result<ParadoxSpec> {
    let dicke = dicke_one_excitation(n)?;
    if z_position >= n {
        return Err(CoreError::InvalidPosition { position: z_position, n });
    }
    let zs = ObservableChain::uniform(Axis::Z, n);
    let mut mixed_axes = vec![Axis::X; n];
    mixed_axes[z_position] = Axis::Z;
    let xz = ObservableChain::new(mixed_axes);

    // the excitation sits on qubit q -> basis index 1 << (n-1-q)
    let particles: Vec<(String, StateVector)> = (0..n)
        .rev()
        .map(|q| {
            let idx = 1usize << (n - 1 - q);
            Ok((basis_label(n, idx), StateVector::basis(n, idx)?))
        })
        .collect::<Result<_>>()?;

    let mut constraints = Vec::with_capacity(2 * n + 1);
    for obs in [&zs, &xz] {
        for (label, psi) in &particles {
            constraints.push(Constraint {
                source_label: label.clone(),
                observable: obs.clone(),
                expected_value: obs.expectation_pure(psi)?,
            });
        }
    }
    let mixed_label = basis_label(n, 0);
    constraints.push(Constraint {
        source_label: mixed_label.clone(),
        observable: xz.clone(),
        expected_value: xz.expectation_pure(&dicke)?,
    });
    ParadoxSpec::new(
        constraints,
        MixtureClaim {
            mixed_label,
            component_labels: particles.into_iter().map(|(l, _)| l).collect(),
            note: format!("D_{n}^(1) as a mixture of the {n} single-excitation states, {xz} vs {zs}"),
        },
    )
}

/// Is the mixed source's data a convex mixture of the component sources'
/// data, simultaneously for every observable measured on the mixed source?
///
/// The worst-case residual is minimized exactly over the weight simplex by a
/// linear program; the verdict is feasible when it does not exceed `tol`.
pub fn lhv_mixture_test(spec: &ParadoxSpec, observed: &Observations, tol: f64) -> Result<ParadoxVerdict> {
    mixture_fit(spec, observed, None, tol)
}

pub(crate) fn lookup(observed: &Observations, label: &str, obs: &ObservableChain) -> Result<f64> {
    observed
        .get(&(label.to_string(), obs.clone()))
        .copied()
        .ok_or_else(|| CoreError::MissingObservation {
            label: label.to_string(),
            observable: format!("{obs}"),
        })
}

/// Shared by the mixture test and the p-value bound; `scale` weights each
/// mixed-source observable's residual.
pub(crate) fn mixture_fit(
    spec: &ParadoxSpec,
    observed: &Observations,
    scale: Option<&[f64]>,
    tol: f64,
) -> Result<ParadoxVerdict> {
    if tol.is_nan() || tol < 0.0 {
        return Err(CoreError::OutOfRange { name: "tol", value: tol });
    }
    let per_constraint_values: Vec<f64> = spec
        .constraints
        .iter()
        .map(|c| lookup(observed, &c.source_label, &c.observable))
        .collect::<Result<_>>()?;

    let claim = &spec.mixture_claim;
    let mixed_obs = spec.mixed_observables();
    let target: Vec<f64> = mixed_obs
        .iter()
        .map(|o| lookup(observed, &claim.mixed_label, o))
        .collect::<Result<_>>()?;
    let components: Vec<Vec<f64>> = claim
        .component_labels
        .iter()
        .map(|l| mixed_obs.iter().map(|o| lookup(observed, l, o)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ones = vec![1.0; target.len()];
    let fit = minimax_mixture(&components, &target, scale.unwrap_or(&ones))?;

    let lhv_feasible = fit.residual <= tol;
    Ok(ParadoxVerdict {
        per_constraint_values,
        lhv_feasible,
        violation_gap: if lhv_feasible { 0.0 } else { fit.residual },
        witness_weights: fit.weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn ghz_verdict() {
        let v = ghz_paradox().unwrap();
        for (got, want) in v.per_constraint_values.iter().zip(GHZ_SIGNS) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(!v.lhv_feasible);
        assert!((v.violation_gap - 2.0).abs() < 1e-9);
    }

    #[test]
    fn product_state_admits_assignment() {
        let v = ghz_stabilizer_check(&StateVector::basis(3, 0).unwrap()).unwrap();
        assert!(v.per_constraint_values.iter().all(|x| x.abs() < 1e-15));
        assert!(v.lhv_feasible);
        assert_eq!(v.violation_gap, 0.0);
    }

    #[test]
    fn ghz_enumeration_is_exhaustive() {
        // independent brute force over explicit sign vectors
        let mut solutions = 0;
        for bits in 0u32..64 {
            let v: Vec<i32> = (0..6).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
            let (x1, y1, x2, y2, x3, y3) = (v[0], v[1], v[2], v[3], v[4], v[5]);
            if x1 * y2 * y3 == -1 && y1 * x2 * y3 == -1 && y1 * y2 * x3 == -1 && x1 * x2 * x3 == 1 {
                solutions += 1;
            }
        }
        assert_eq!(solutions, 0);
        assert!(matches!(
            ghz_stabilizer_check(&epr_family(0.0, SourceLabel::Psi01).unwrap()),
            Err(CoreError::WrongQubitCount { .. })
        ));
    }

    #[test]
    #[allow(clippy::approx_constant)] // four-decimal table entries
    fn coherence_paradox_examples() {
        let s = coherence_paradox(PI / 4.0, Axis::X).unwrap();
        assert_eq!(s.constraints().len(), 5);
        assert!((s.final_value() - 1.0).abs() < 1e-12);
        let s = coherence_paradox(PI / 8.0, Axis::X).unwrap();
        assert!((s.final_value() - 0.7071).abs() < 5e-5);
        let s = coherence_paradox(PI / 6.0, Axis::Y).unwrap();
        assert!((s.final_value() - 0.8660).abs() < 5e-5);
        assert_eq!(s.mixture_claim().mixed_label, "00");
        assert!(coherence_paradox(0.0, Axis::X).is_err());
        assert!(coherence_paradox(PI / 4.0, Axis::Z).is_err());
    }

    #[test]
    fn eq5_theoretical_values_are_infeasible() {
        let s = coherence_paradox(PI / 4.0, Axis::X).unwrap();
        let v = lhv_mixture_test(&s, &s.theoretical_observations(), 1e-9).unwrap();
        assert!(!v.lhv_feasible);
        assert!((v.violation_gap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constructed_mixture_is_feasible() {
        let s = coherence_paradox(PI / 4.0, Axis::X).unwrap();
        let mut obs = s.theoretical_observations();
        let xx = ObservableChain::uniform(Axis::X, 2);
        obs.insert(("01".into(), xx.clone()), 0.3);
        obs.insert(("10".into(), xx.clone()), -0.2);
        obs.insert(("00".into(), xx), 0.6 * 0.3 + 0.4 * -0.2);
        let v = lhv_mixture_test(&s, &obs, 1e-9).unwrap();
        assert!(v.lhv_feasible);
        assert_eq!(v.violation_gap, 0.0);
        assert!((v.witness_weights[0] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn table_one_values_match_grid_oracle() {
        let s = coherence_paradox(PI / 4.0, Axis::X).unwrap();
        let zz = ObservableChain::uniform(Axis::Z, 2);
        let xx = ObservableChain::uniform(Axis::X, 2);
        let mut obs = Observations::new();
        obs.insert(("01".into(), zz.clone()), -0.9967);
        obs.insert(("10".into(), zz), -0.9912);
        obs.insert(("01".into(), xx.clone()), 0.0625);
        obs.insert(("10".into(), xx.clone()), 0.0317);
        obs.insert(("00".into(), xx), 0.9949);
        // dense grid oracle at step 1e-4
        let oracle = (0..=10_000)
            .map(|i| {
                let p = i as f64 * 1e-4;
                (0.9949 - (p * 0.0625 + (1.0 - p) * 0.0317)).abs()
            })
            .fold(f64::INFINITY, f64::min);
        let v = lhv_mixture_test(&s, &obs, 1e-3).unwrap();
        assert!(!v.lhv_feasible);
        assert!((v.violation_gap - oracle).abs() < 1e-9);
        assert!((v.violation_gap - 0.9324).abs() < 1e-9);
    }

    #[test]
    fn mixture_test_errors() {
        let s = coherence_paradox(PI / 4.0, Axis::X).unwrap();
        let mut obs = s.theoretical_observations();
        assert!(matches!(
            lhv_mixture_test(&s, &obs, -1.0),
            Err(CoreError::OutOfRange { name: "tol", .. })
        ));
        obs.remove(&("10".into(), ObservableChain::uniform(Axis::Z, 2)));
        assert!(matches!(
            lhv_mixture_test(&s, &obs, 0.0),
            Err(CoreError::MissingObservation { .. })
        ));
    }

    #[test]
    fn dicke_paradox_three_qubits() {
        for z in 0..3 {
            let s = dicke_paradox(3, z).unwrap();
            assert_eq!(s.constraints().len(), 7);
            assert!((s.final_value() - 2.0 / 3.0).abs() < 1e-12);
            assert_eq!(s.mixture_claim().mixed_label, "000");
            assert_eq!(s.mixture_claim().component_labels, ["001", "010", "100"]);
            for c in &s.constraints()[..3] {
                assert_eq!(c.expected_value, -1.0);
            }
            for c in &s.constraints()[3..6] {
                assert_eq!(c.expected_value, 0.0);
            }
            let v = lhv_mixture_test(&s, &s.theoretical_observations(), 1e-9).unwrap();
            assert!(!v.lhv_feasible);
            assert!((v.violation_gap - 2.0 / 3.0).abs() < 1e-10);
        }
        assert!(matches!(dicke_paradox(3, 3), Err(CoreError::InvalidPosition { .. })));
        assert!(dicke_paradox(1, 0).is_err());
    }

    #[test]
    fn dicke_final_value_against_explicit_matrix() {
        // X^{n-1} Z built as a dense Kronecker product
        for n in 2..=6 {
            let d = density_from_state(&dicke_one_excitation(n).unwrap());
            for z in 0..n {
                let s = dicke_paradox(n, z).unwrap();
                let mut axes = vec![Axis::X; n];
                axes[z] = Axis::Z;
                let dense = ObservableChain::new(axes).matrix().trace_product(d.matrix()).re;
                assert!((s.final_value() - dense).abs() < 1e-12, "n={n} z={z}");
            }
        }
    }

    #[test]
    fn spec_validation() {
        let c = |l: &str, v: f64| Constraint {
            source_label: l.into(),
            observable: chain("ZZ"),
            expected_value: v,
        };
        let claim = |m: &str, comps: &[&str]| MixtureClaim {
            mixed_label: m.into(),
            component_labels: comps.iter().map(|s| s.to_string()).collect(),
            note: String::new(),
        };
        assert!(ParadoxSpec::new(vec![c("a", 1.5), c("b", 0.0)], claim("a", &["b"])).is_err());
        assert!(ParadoxSpec::new(vec![c("a", 0.5)], claim("a", &["b"])).is_err());
        assert!(ParadoxSpec::new(vec![c("a", 0.5), c("b", 0.0)], claim("a", &["b", "b"])).is_err());
        assert!(ParadoxSpec::new(vec![c("a", 0.5), c("b", 0.0)], claim("c", &["b"])).is_err());
        assert!(ParadoxSpec::new(vec![c("a", 0.5), c("b", 0.0)], claim("a", &["b"])).is_ok());
    }

    #[test]
    fn basis_labels_are_big_endian() {
        assert_eq!(basis_label(3, 1), "001");
        assert_eq!(basis_label(3, 4), "100");
        assert_eq!(basis_label(2, 0), "00");
    }
}
