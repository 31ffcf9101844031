//! The XOR coherence game: win iff `a xor b = x xor y`.

use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::measure::{outcome_distribution, Axis, JointDistribution, LocalObservable, Source};
use crate::qstate::{check_theta, density_from_state, epr_family, SourceLabel};

/// Tolerance of the `P_win = 1/2 + (I_00 + I_11)/4` identity.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyNote {
    pub theta: f64,
    pub observable_a: LocalObservable,
    pub observable_b: LocalObservable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameEvaluation {
    /// `i_terms[a][b]`
    pub i_terms: [[f64; 2]; 2],
    pub p_win: f64,
    pub strategy_note: Option<StrategyNote>,
}

/// `I_ab = sum_{x,y} (-1)^{x xor y} P(a, b | x, y)`
pub fn coherence_term(dist: &JointDistribution, a: u8, b: u8) -> f64 {
    dist.get(a, b, 0, 0) - dist.get(a, b, 0, 1) - dist.get(a, b, 1, 0) + dist.get(a, b, 1, 1)
}

fn win_sum(dist: &JointDistribution) -> f64 {
    let mut total = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    if a ^ b == x ^ y {
                        total += dist.get(a, b, x, y);
                    }
                }
            }
        }
    }
    total / 4.0
}

/// Average winning probability with uniformly random inputs.
pub fn winning_probability(dist: &JointDistribution) -> Result<GameEvaluation> {
    let mut i_terms = [[0.0; 2]; 2];
    for a in 0..2u8 {
        for b in 0..2u8 {
            i_terms[a as usize][b as usize] = coherence_term(dist, a, b);
        }
    }
    let p_win = win_sum(dist);
    let via_identity = 0.5 + (i_terms[0][0] + i_terms[1][1]) / 4.0;
    if (p_win - via_identity).abs() > IDENTITY_TOL {
        return Err(CoreError::InvalidDistribution(alloc::format!(
            "winning probability {p_win} disagrees with coherence terms ({via_identity})"
        )));
    }
    Ok(GameEvaluation { i_terms, p_win, strategy_note: None })
}

/// Outcome table of the quantum players: sources `|01>`, `|10>` and
/// `|psi_00(theta)>` on inputs 01, 10, 00, uniform random bits on input 11.
/// Both players use the same observable for either input.
pub fn quantum_strategy(theta: f64, m_a: LocalObservable, m_b: LocalObservable) -> Result<JointDistribution> {
    check_theta(theta)?;
    for m in [m_a, m_b] {
        if m.axis == Axis::I {
            return Err(CoreError::InvalidAxis('I'));
        }
    }
    let mut sources = BTreeMap::new();
    for label in [SourceLabel::Psi00, SourceLabel::Psi01, SourceLabel::Psi10] {
        let rho = density_from_state(&epr_family(theta, label)?);
        sources.insert(label.input_pair(), Source::Prepared(rho));
    }
    sources.insert((1, 1), Source::UniformOutputs);
    outcome_distribution(&sources, [m_a; 2], [m_b; 2])
}

/// The two Pauli strategies used in the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// `M_A = M_B = sigma_X`: `P_win = 1/2 + sin(2 theta)/8`.
    SigmaX,
    /// `M_A = M_B = sigma_Z`: `P_win = 5/8`.
    SigmaZ,
}

impl Strategy {
    pub fn observables(self) -> (LocalObservable, LocalObservable) {
        let axis = match self {
            Strategy::SigmaX => Axis::X,
            Strategy::SigmaZ => Axis::Z,
        };
        (LocalObservable::new(axis), LocalObservable::new(axis))
    }

    pub fn axis(self) -> Axis {
        self.observables().0.axis
    }
}

/// Builds and scores a quantum strategy in one step.
pub fn evaluate_strategy(theta: f64, m_a: LocalObservable, m_b: LocalObservable) -> Result<GameEvaluation> {
    let dist = quantum_strategy(theta, m_a, m_b)?;
    let mut eval = winning_probability(&dist)?;
    eval.strategy_note = Some(StrategyNote { theta, observable_a: m_a, observable_b: m_b });
    Ok(eval)
}

/// `|P_win - 1/2 - (I_00 + I_11)/4| <= 1e-10`
pub fn classical_identity_check(dist: &JointDistribution) -> bool {
    let p = win_sum(dist);
    let i00 = coherence_term(dist, 0, 0);
    let i11 = coherence_term(dist, 1, 1);
    (p - 0.5 - (i00 + i11) / 4.0).abs() <= IDENTITY_TOL
}

/// `P_win` from the three prepared-source correlators when input 11 is random:
/// `1/2 + (E_00 - E_01 - E_10)/8`.
pub fn p_win_from_correlators(e00: f64, e01: f64, e10: f64) -> f64 {
    0.5 + (e00 - e01 - e10) / 8.0
}
