//! Synthetic photon-coincidence experiment.
//!
//! Every outcome cell of every trial is an independent Poisson draw whose mean
//! is `pair_rate * efficiency * duration * P(a, b | setting)`. Randomness is
//! ChaCha8 keyed by the configured seed, with one stream per trial (or per
//! bootstrap replicate), so results are bit-for-bit reproducible.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::lhv::{mixture_fit, Observations, ParadoxSpec};
use crate::measure::{born_row, Axis, LocalObservable, ObservableChain};
use crate::qstate::DensityOperator;

/// Number of parametric bootstrap replicates behind every error bar.
pub const BOOTSTRAP_REPLICATES: usize = 1000;
/// Visibility above which no classical wave model reproduces the fringe.
pub const CLASSICAL_VISIBILITY_BOUND: f64 = 0.71;

const BOOTSTRAP_TAG: u64 = 0xb007_57a9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Pair rate of the source in coincidences per second.
    pub pair_rate: f64,
    /// Seconds per measurement setting and trial.
    pub duration_per_setting: f64,
    pub num_trials: usize,
    /// Werner mixing parameter applied to every prepared state.
    pub visibility_v: f64,
    pub seed: u64,
    /// Fraction of pairs detected.
    pub efficiency: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pair_rate: 0.34e6,
            duration_per_setting: 100.0,
            num_trials: 10,
            visibility_v: 0.99,
            seed: 2024,
            efficiency: 0.60,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate > 0.0 && self.pair_rate.is_finite()) {
            return Err(CoreError::InvalidConfig("pair_rate must be positive"));
        }
        if !(self.duration_per_setting > 0.0 && self.duration_per_setting.is_finite()) {
            return Err(CoreError::InvalidConfig("duration_per_setting must be positive"));
        }
        if self.num_trials == 0 {
            return Err(CoreError::InvalidConfig("num_trials must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.visibility_v) {
            return Err(CoreError::InvalidConfig("visibility_v must lie in [0, 1]"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(CoreError::InvalidConfig("efficiency must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Expected detected coincidences per setting and trial.
    pub fn mean_per_trial(&self) -> f64 {
        self.pair_rate * self.efficiency * self.duration_per_setting
    }

    /// Expected detected coincidences per setting, summed over trials.
    pub fn mean_per_setting(&self) -> f64 {
        self.mean_per_trial() * self.num_trials as f64
    }

    /// Same config with the pair rate chosen so that one setting collects
    /// `total` coincidences on average.
    pub fn with_total_coincidences(mut self, total: f64) -> Self {
        self.pair_rate = total / (self.efficiency * self.duration_per_setting * self.num_trials as f64);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Derives an independent seed for sub-experiment `tag`.
    pub fn derived(&self, tag: u64) -> Self {
        self.with_seed(derive_seed(self.seed, tag))
    }
}

/// SplitMix64 finalizer over `seed ^ tag`-style mixing.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x632b_e59b_d9b4_e019);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng) as u64,
        Err(_) => 0,
    }
}

/// Coincidence counts `N^{a,b}_{u,v}` for one local setting `(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub setting: (Axis, Axis),
    /// `trials[t][2a + b]`
    pub trials: Vec<[u64; 4]>,
    pub config: ExperimentConfig,
}

impl CountTable {
    /// A single-trial table from known counts `[N00, N01, N10, N11]`.
    pub fn from_counts(setting: (Axis, Axis), counts: [u64; 4], config: ExperimentConfig) -> Self {
        Self { setting, trials: vec![counts], config }
    }

    pub fn pooled(&self) -> [u64; 4] {
        let mut out = [0u64; 4];
        for t in &self.trials {
            for (o, c) in out.iter_mut().zip(t) {
                *o += c;
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.pooled().iter().sum()
    }

    pub fn count(&self, a: u8, b: u8) -> u64 {
        self.pooled()[(2 * a + b) as usize]
    }

    /// `P(a, b)` estimated from pooled counts.
    pub fn frequencies(&self) -> Result<[[f64; 2]; 2]> {
        let p = self.pooled();
        let n = self.total();
        if n == 0 {
            return Err(CoreError::ZeroCounts);
        }
        let n = n as f64;
        Ok([[p[0] as f64 / n, p[1] as f64 / n], [p[2] as f64 / n, p[3] as f64 / n]])
    }

    /// Same counts on Party A alone: `(N_{a=0} - N_{a=1}) / N`.
    pub fn marginal_a(&self) -> Result<f64> {
        let p = self.pooled();
        let n = self.total();
        if n == 0 {
            return Err(CoreError::ZeroCounts);
        }
        Ok(((p[0] + p[1]) as f64 - (p[2] + p[3]) as f64) / n as f64)
    }

    pub fn marginal_b(&self) -> Result<f64> {
        let p = self.pooled();
        let n = self.total();
        if n == 0 {
            return Err(CoreError::ZeroCounts);
        }
        Ok(((p[0] + p[2]) as f64 - (p[1] + p[3]) as f64) / n as f64)
    }
}

/// Simulates `cfg.num_trials` trials of one setting on a two-qubit state.
pub fn simulate_counts(state: &DensityOperator, setting: (Axis, Axis), cfg: &ExperimentConfig) -> Result<CountTable> {
    cfg.validate()?;
    for axis in [setting.0, setting.1] {
        if axis == Axis::I {
            return Err(CoreError::InvalidAxis('I'));
        }
    }
    let probs = born_row(state, LocalObservable::new(setting.0), LocalObservable::new(setting.1))?;
    let mean = cfg.mean_per_trial();
    let trials = (0..cfg.num_trials)
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t as u64);
            let mut cell = [0u64; 4];
            for a in 0..2 {
                for b in 0..2 {
                    cell[2 * a + b] = poisson(mean * probs[a][b].max(0.0), &mut rng);
                }
            }
            cell
        })
        .collect();
    Ok(CountTable { setting, trials, config: *cfg })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedCorrelator {
    pub value: f64,
    /// Parametric-bootstrap standard deviation.
    pub std_err: f64,
    /// Delta-method prediction `sqrt((1 - E^2) / N)`.
    pub delta_std_err: f64,
    pub n_total: u64,
}

fn correlator_of(c: &[u64; 4]) -> Option<f64> {
    let n = c.iter().sum::<u64>();
    if n == 0 {
        return None;
    }
    Some((c[0] as f64 - c[1] as f64 - c[2] as f64 + c[3] as f64) / n as f64)
}

/// Point estimate `(N00 - N01 - N10 + N11)/(N00 + N01 + N10 + N11)` over
/// pooled trials, with a Poisson parametric-bootstrap error bar.
pub fn correlator_from_counts(counts: &CountTable) -> Result<EstimatedCorrelator> {
    let pooled = counts.pooled();
    let value = correlator_of(&pooled).ok_or(CoreError::ZeroCounts)?;
    let n_total = counts.total();
    let seed = derive_seed(counts.config.seed, BOOTSTRAP_TAG);
    let replicates: Vec<f64> = (0..BOOTSTRAP_REPLICATES)
        .filter_map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let mut sample = [0u64; 4];
            for (s, &c) in sample.iter_mut().zip(&pooled) {
                *s = poisson(c as f64, &mut rng);
            }
            correlator_of(&sample)
        })
        .collect();
    let std_err = std_dev(&replicates);
    let delta_std_err = libm::sqrt((1.0 - value * value).max(0.0) / n_total as f64);
    Ok(EstimatedCorrelator { value, std_err, delta_std_err, n_total })
}

pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    libm::sqrt(var)
}

/// Upper bound on the probability that the best classical-mixture model
/// produces mixed-source data at least as far from its prediction as observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueBound {
    /// Natural log of the bound.
    pub ln_bound: f64,
    /// `min over weights of max over observables sqrt(N_o) * residual_o`.
    pub z: f64,
    /// Mixture weights attaining `z`.
    pub weights: Vec<f64>,
}

impl PValueBound {
    /// The bound itself. Values below the smallest positive double are
    /// rounded up to it, which keeps the result a valid upper bound in (0, 1].
    pub fn value(&self) -> f64 {
        libm::exp(self.ln_bound).max(f64::MIN_POSITIVE)
    }

    pub fn log10(&self) -> f64 {
        self.ln_bound / core::f64::consts::LN_10
    }
}

/// Hoeffding bound for the mixed-source correlators against every classical
/// mixture of the component sources.
///
/// Each coincidence contributes a +-1 product of outcomes, so for `N`
/// coincidences the empirical correlator exceeds its model mean by `t` with
/// probability at most `exp(-N t^2 / 2)`. The model correlators are the
/// observed component correlators; the bound is maximized over the weight
/// simplex, which reduces to minimizing `max_o sqrt(N_o) |residual_o|`.
pub fn paradox_p_value(spec: &ParadoxSpec, counts: &BTreeMap<(String, ObservableChain), CountTable>) -> Result<PValueBound> {
    let mut observed = Observations::new();
    for c in spec.constraints() {
        let key = (c.source_label.clone(), c.observable.clone());
        let table = counts.get(&key).ok_or_else(|| CoreError::MissingObservation {
            label: c.source_label.clone(),
            observable: alloc::format!("{}", c.observable),
        })?;
        let value = correlator_of(&table.pooled()).ok_or(CoreError::ZeroCounts)?;
        observed.insert(key, value);
    }
    let mixed = &spec.mixture_claim().mixed_label;
    let scale: Vec<f64> = spec
        .mixed_observables()
        .iter()
        .map(|o| libm::sqrt(counts[&(mixed.clone(), o.clone())].total() as f64))
        .collect();
    let fit = mixture_fit(spec, &observed, Some(&scale), 0.0)?;
    let z = fit.violation_gap;
    Ok(PValueBound { ln_bound: -z * z / 2.0, z, weights: fit.witness_weights })
}

/// Transmitted-port projector of a linear polarizer at `angle`:
/// `|angle> = cos(angle)|H> + sin(angle)|V>`.
fn polarizer_ket(angle: f64) -> [Complex64; 2] {
    [Complex64::new(libm::cos(angle), 0.0), Complex64::new(libm::sin(angle), 0.0)]
}

/// Probability that both photons pass polarizers at `(angle_a, angle_b)`.
pub fn transmission_probability(state: &DensityOperator, angle_a: f64, angle_b: f64) -> Result<f64> {
    if state.num_qubits() != 2 {
        return Err(CoreError::WrongQubitCount { expected: 2, got: state.num_qubits() });
    }
    let a = polarizer_ket(angle_a);
    let b = polarizer_ket(angle_b);
    let ket = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let rk = state.matrix().mul_vec(&ket);
    Ok(ket.iter().zip(&rk).map(|(k, r)| k.conj() * r).sum::<Complex64>().re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub angle: f64,
    /// Coincidences per second.
    pub coincidence_rate: f64,
    /// Raw counts when simulated.
    pub counts: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub fixed_arm_angle: f64,
    pub points: Vec<ScanPoint>,
    /// Fitted `offset + c cos(2 angle) + s sin(2 angle)` as `[offset, c, s]`.
    pub fit: [f64; 3],
    /// `(max - min) / (max + min)` of the fitted fringe.
    pub visibility: f64,
    pub exceeds_classical_bound: bool,
}

/// Coincidence fringe with arm A fixed and arm B scanned.
///
/// With `cfg = None` the rates are exact (`pair_rate * efficiency * P` from the
/// default config); otherwise each point is a Poisson count over
/// `duration_per_setting * num_trials` seconds.
pub fn visibility_scan(
    state: &DensityOperator,
    fixed_arm_angle: f64,
    scan_grid: &[f64],
    cfg: Option<&ExperimentConfig>,
) -> Result<ScanResult> {
    if scan_grid.is_empty() {
        return Err(CoreError::InvalidConfig("scan grid is empty"));
    }
    let points: Vec<ScanPoint> = match cfg {
        None => {
            let base = ExperimentConfig::default();
            let detected = base.pair_rate * base.efficiency;
            scan_grid
                .iter()
                .map(|&angle| {
                    let p = transmission_probability(state, fixed_arm_angle, angle)?;
                    Ok(ScanPoint { angle, coincidence_rate: detected * p, counts: None })
                })
                .collect::<Result<_>>()?
        }
        Some(cfg) => {
            cfg.validate()?;
            let seconds = cfg.duration_per_setting * cfg.num_trials as f64;
            let mean = cfg.mean_per_setting();
            scan_grid
                .iter()
                .enumerate()
                .map(|(i, &angle)| {
                    let p = transmission_probability(state, fixed_arm_angle, angle)?;
                    let mut rng = stream_rng(cfg.seed, i as u64);
                    let n = poisson(mean * p.max(0.0), &mut rng);
                    Ok(ScanPoint { angle, coincidence_rate: n as f64 / seconds, counts: Some(n) })
                })
                .collect::<Result<_>>()?
        }
    };
    let (fit, visibility) = fit_fringe(&points);
    Ok(ScanResult {
        fixed_arm_angle,
        points,
        fit,
        visibility,
        exceeds_classical_bound: visibility > CLASSICAL_VISIBILITY_BOUND,
    })
}

/// Least-squares `offset + c cos 2t + s sin 2t`; falls back to raw extremes
/// when the grid cannot determine three coefficients.
fn fit_fringe(points: &[ScanPoint]) -> ([f64; 3], f64) {
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for p in points {
        let row = [1.0, libm::cos(2.0 * p.angle), libm::sin(2.0 * p.angle)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * p.coincidence_rate;
        }
    }
    if let Some(coef) = solve3(ata, aty) {
        let amp = libm::hypot(coef[1], coef[2]);
        if coef[0] > 0.0 {
            return (coef, (amp / coef[0]).min(1.0));
        }
    }
    let max = points.iter().map(|p| p.coincidence_rate).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.coincidence_rate).fold(f64::INFINITY, f64::min);
    let v = if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 };
    ([(max + min) / 2.0, (max - min) / 2.0, 0.0], v)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = ((r + 1)..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
