use std::collections::BTreeMap;
use std::f64::consts::PI;

use clap::ValueEnum;
use cohwit_core::expsim::{
    correlator_from_counts, paradox_p_value, simulate_counts, visibility_scan, CountTable, ExperimentConfig,
};
use cohwit_core::game::{evaluate_strategy, p_win_from_correlators, GameEvaluation, Strategy};
use cohwit_core::lhv::{coherence_paradox, dicke_paradox, lhv_mixture_test, Observations, ParadoxSpec, ParadoxVerdict};
use cohwit_core::measure::{Axis, ObservableChain};
use cohwit_core::qstate::{epr_family, werner_mix, werner_v_for_fidelity, DensityOperator, SourceLabel};
use cohwit_core::tomo::{reconstruct_reference, reference_states, ReferenceState, TomographyReportRow};
use serde::Serialize;

use crate::angle::angle_tag;
use crate::error::{CliError, CliResult};
use crate::output::RunDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Simulated,
}

#[derive(Debug, Serialize)]
pub struct CountRow {
    pub u: char,
    pub v: char,
    pub a: u8,
    pub b: u8,
    pub trial: usize,
    pub count: u64,
}

pub fn count_rows(table: &CountTable) -> Vec<CountRow> {
    let (u, v) = (table.setting.0.symbol(), table.setting.1.symbol());
    let mut rows = Vec::with_capacity(4 * table.trials.len());
    for (trial, cells) in table.trials.iter().enumerate() {
        for a in 0..2u8 {
            for b in 0..2u8 {
                rows.push(CountRow { u, v, a, b, trial, count: cells[(2 * a + b) as usize] });
            }
        }
    }
    rows
}

fn source_state(theta: f64, label: &str, v: f64) -> CliResult<DensityOperator> {
    let label = SourceLabel::from_label(label).ok_or_else(|| CliError::Usage(format!("unknown source {label}")))?;
    Ok(werner_mix(&epr_family(theta, label)?, v)?)
}

// ---------------------------------------------------------------- paradox

pub struct ParadoxOpts {
    pub theta: f64,
    pub axis: Axis,
    pub mode: Mode,
    pub tol: f64,
}

#[derive(Debug, Serialize)]
struct ParadoxRow {
    row: usize,
    source: String,
    observable: String,
    theory: f64,
    value: Option<f64>,
    std_err: Option<f64>,
    delta_std_err: Option<f64>,
    n_total: Option<u64>,
}

#[derive(Debug, Serialize)]
struct PValueSummary {
    bound: f64,
    log10_bound: f64,
    z: f64,
    weights: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ParadoxReport {
    theta: f64,
    axis: char,
    theoretical: ParadoxVerdict,
    observed: Option<ParadoxVerdict>,
    p_value: Option<PValueSummary>,
}

/// Counts for every constraint of `spec`, each setting on its own RNG stream.
pub fn simulate_paradox(
    spec: &ParadoxSpec,
    theta: f64,
    cfg: &ExperimentConfig,
) -> CliResult<BTreeMap<(String, ObservableChain), CountTable>> {
    let mut out = BTreeMap::new();
    for (k, c) in spec.constraints().iter().enumerate() {
        let state = source_state(theta, &c.source_label, cfg.visibility_v)?;
        let axes = c.observable.axes();
        let table = simulate_counts(&state, (axes[0], axes[1]), &cfg.derived(k as u64))?;
        out.insert((c.source_label.clone(), c.observable.clone()), table);
    }
    Ok(out)
}

pub fn paradox(run: &mut RunDir, prefix: &str, o: &ParadoxOpts, cfg: &ExperimentConfig) -> CliResult<()> {
    let spec = coherence_paradox(o.theta, o.axis)?;
    let theoretical = lhv_mixture_test(&spec, &spec.theoretical_observations(), o.tol)?;
    run.write_json(&format!("{prefix}spec.json"), &spec)?;

    let mut rows: Vec<ParadoxRow> = spec
        .constraints()
        .iter()
        .enumerate()
        .map(|(i, c)| ParadoxRow {
            row: i + 1,
            source: c.source_label.clone(),
            observable: c.observable.to_string(),
            theory: c.expected_value,
            value: None,
            std_err: None,
            delta_std_err: None,
            n_total: None,
        })
        .collect();

    let mut report = ParadoxReport { theta: o.theta, axis: o.axis.symbol(), theoretical, observed: None, p_value: None };
    if o.mode == Mode::Simulated {
        let counts = simulate_paradox(&spec, o.theta, cfg)?;
        let mut observed = Observations::new();
        for (row, c) in rows.iter_mut().zip(spec.constraints()) {
            let key = (c.source_label.clone(), c.observable.clone());
            let table = &counts[&key];
            let est = correlator_from_counts(table)?;
            row.value = Some(est.value);
            row.std_err = Some(est.std_err);
            row.delta_std_err = Some(est.delta_std_err);
            row.n_total = Some(est.n_total);
            observed.insert(key, est.value);
            run.write_csv(&format!("{prefix}counts/{}_{}.csv", c.source_label, c.observable), &count_rows(table))?;
        }
        report.observed = Some(lhv_mixture_test(&spec, &observed, o.tol)?);
        let p = paradox_p_value(&spec, &counts)?;
        report.p_value = Some(PValueSummary { bound: p.value(), log10_bound: p.log10(), z: p.z, weights: p.weights });
    }
    run.write_csv(&format!("{prefix}paradox.csv"), &rows)?;
    run.write_json(&format!("{prefix}verdict.json"), &report)
}

// ---------------------------------------------------------------- game

pub struct GameOpts {
    pub grid: Vec<f64>,
    pub strategy: Strategy,
    pub mode: Mode,
}

#[derive(Debug, Serialize)]
struct GameRow {
    theta: f64,
    p_win: f64,
    i00: f64,
    i01: f64,
    i10: f64,
    i11: f64,
    p_win_simulated: Option<f64>,
    p_win_std_err: Option<f64>,
}

pub fn game(run: &mut RunDir, prefix: &str, o: &GameOpts, cfg: &ExperimentConfig) -> CliResult<()> {
    if o.grid.is_empty() {
        return Err(CliError::Usage("theta grid is empty".into()));
    }
    let (ma, mb) = o.strategy.observables();
    let axis = o.strategy.axis();
    let mut rows = Vec::with_capacity(o.grid.len());
    let mut evaluations: Vec<GameEvaluation> = Vec::with_capacity(o.grid.len());
    for (g, &theta) in o.grid.iter().enumerate() {
        let e = evaluate_strategy(theta, ma, mb)?;
        let mut row = GameRow {
            theta,
            p_win: e.p_win,
            i00: e.i_terms[0][0],
            i01: e.i_terms[0][1],
            i10: e.i_terms[1][0],
            i11: e.i_terms[1][1],
            p_win_simulated: None,
            p_win_std_err: None,
        };
        if o.mode == Mode::Simulated {
            let mut est = Vec::with_capacity(3);
            for (s, label) in ["00", "01", "10"].iter().enumerate() {
                let state = source_state(theta, label, cfg.visibility_v)?;
                let table = simulate_counts(&state, (axis, axis), &cfg.derived((3 * g + s) as u64))?;
                run.write_csv(&format!("{prefix}counts/{}_{label}.csv", angle_tag(theta)), &count_rows(&table))?;
                est.push(correlator_from_counts(&table)?);
            }
            row.p_win_simulated = Some(p_win_from_correlators(est[0].value, est[1].value, est[2].value));
            row.p_win_std_err = Some(est.iter().map(|e| e.std_err * e.std_err).sum::<f64>().sqrt() / 8.0);
        }
        rows.push(row);
        evaluations.push(e);
    }
    run.write_csv(&format!("{prefix}game.csv"), &rows)?;
    run.write_json(&format!("{prefix}game.json"), &evaluations)
}

// ---------------------------------------------------------------- tomography

pub enum StateSelection {
    All,
    Angles(Vec<f64>),
}

pub struct TomoOpts {
    pub states: StateSelection,
    /// Overrides the per-state noise level when set.
    pub visibility: Option<f64>,
    pub replicates: usize,
}

#[derive(Debug, Serialize)]
struct FidelityRow {
    state: String,
    visibility_v: f64,
    reported_fidelity: Option<f64>,
    expected_fidelity: f64,
    fidelity: f64,
    fidelity_std_err: f64,
    clip_magnitude: f64,
    max_imag: f64,
    max_imag_std_err: f64,
}

fn matrix_records(row: &TomographyReportRow) -> (Vec<String>, Vec<Vec<String>>) {
    let m = row.result.rho_hat.matrix();
    let dim = m.dim();
    let mut header = vec!["part".to_string(), "row".to_string()];
    header.extend((0..dim).map(|c| format!("c{c}")));
    let mut records = Vec::with_capacity(2 * dim);
    for (part, pick) in [("re", 0), ("im", 1)] {
        for r in 0..dim {
            let mut rec = vec![part.to_string(), r.to_string()];
            rec.extend((0..dim).map(|c| {
                let z = m[(r, c)];
                let x = if pick == 0 { z.re } else { z.im };
                x.to_string()
            }));
            records.push(rec);
        }
    }
    (header, records)
}

pub fn tomo(run: &mut RunDir, prefix: &str, o: &TomoOpts, cfg: &ExperimentConfig) -> CliResult<()> {
    let chosen: Vec<(ReferenceState, f64, Option<f64>)> = match &o.states {
        StateSelection::All => reference_states()?
            .into_iter()
            .map(|r| {
                let v = o.visibility.unwrap_or_else(|| werner_v_for_fidelity(r.reported_fidelity));
                let f = r.reported_fidelity;
                (r, v, Some(f))
            })
            .collect(),
        StateSelection::Angles(thetas) => thetas
            .iter()
            .map(|&t| {
                let r = ReferenceState {
                    name: format!("psi00_{}", angle_tag(t)),
                    state: epr_family(t, SourceLabel::Psi00)?,
                    reported_fidelity: f64::NAN,
                };
                Ok((r, o.visibility.unwrap_or(cfg.visibility_v), None))
            })
            .collect::<CliResult<_>>()?,
    };
    let mut table = Vec::with_capacity(chosen.len());
    let mut report = Vec::with_capacity(chosen.len());
    for (k, (r, v, reported)) in chosen.iter().enumerate() {
        let row = reconstruct_reference(r, *v, cfg, o.replicates, k as u64)?;
        let (header, records) = matrix_records(&row);
        run.write_records(&format!("{prefix}rho/{}.csv", row.name), &header, &records)?;
        table.push(FidelityRow {
            state: row.name.clone(),
            visibility_v: *v,
            reported_fidelity: *reported,
            expected_fidelity: row.expected_fidelity,
            fidelity: row.result.fidelity_to_target,
            fidelity_std_err: row.errors.fidelity_std_err,
            clip_magnitude: row.result.clip_magnitude,
            max_imag: row.result.max_imag,
            max_imag_std_err: row.errors.im_std_err.iter().copied().fold(0.0, f64::max),
        });
        report.push(row);
    }
    run.write_csv(&format!("{prefix}fidelity.csv"), &table)?;
    run.write_json(&format!("{prefix}tomography.json"), &report)
}

// ---------------------------------------------------------------- dicke

#[derive(Debug, Serialize)]
struct DickeRow {
    n: usize,
    z_position: usize,
    mixed_observable: String,
    final_value: f64,
    n_minus_1_over_n: f64,
    lhv_feasible: bool,
    violation_gap: f64,
}

pub fn dicke(run: &mut RunDir, prefix: &str, n: usize, tol: f64) -> CliResult<()> {
    let mut rows = Vec::with_capacity(n);
    for z in 0..n {
        let spec = dicke_paradox(n, z)?;
        let verdict = lhv_mixture_test(&spec, &spec.theoretical_observations(), tol)?;
        run.write_json(&format!("{prefix}spec_z{z}.json"), &spec)?;
        rows.push(DickeRow {
            n,
            z_position: z,
            mixed_observable: spec.mixed_observables()[0].to_string(),
            final_value: spec.final_value(),
            n_minus_1_over_n: (n as f64 - 1.0) / n as f64,
            lhv_feasible: verdict.lhv_feasible,
            violation_gap: verdict.violation_gap,
        });
    }
    run.write_csv(&format!("{prefix}dicke.csv"), &rows)
}

// ---------------------------------------------------------------- visibility

pub struct VisibilityOpts {
    pub fixed: f64,
    pub mode: Mode,
    pub points: usize,
}

#[derive(Debug, Serialize)]
struct ScanRow {
    angle: f64,
    coincidence_rate: f64,
    counts: Option<u64>,
}

pub fn visibility(run: &mut RunDir, prefix: &str, o: &VisibilityOpts, cfg: &ExperimentConfig) -> CliResult<()> {
    if o.points == 0 {
        return Err(CliError::Usage("scan needs at least one point".into()));
    }
    let rho = source_state(PI / 4.0, "00", cfg.visibility_v)?;
    let grid: Vec<f64> = (0..o.points).map(|k| k as f64 * PI / o.points as f64).collect();
    let sim = (o.mode == Mode::Simulated).then_some(cfg);
    let scan = visibility_scan(&rho, o.fixed, &grid, sim)?;
    let rows: Vec<ScanRow> = scan
        .points
        .iter()
        .map(|p| ScanRow { angle: p.angle, coincidence_rate: p.coincidence_rate, counts: p.counts })
        .collect();
    run.write_csv(&format!("{prefix}scan.csv"), &rows)?;
    run.write_json(&format!("{prefix}visibility.json"), &scan)
}

// ---------------------------------------------------------------- report

#[derive(Debug, Serialize)]
struct CurveRow {
    theta: f64,
    axis: char,
    mixed_value: f64,
    lhv_max: f64,
    violation_gap: f64,
}

#[derive(Debug, Serialize)]
struct GameCurveRow {
    theta: f64,
    p_win_x: f64,
    p_win_z: f64,
    classical: f64,
}

const TABLE_THETAS: [f64; 4] = [PI / 12.0, PI / 8.0, PI / 6.0, PI / 4.0];

/// Every table, curve, scan and tomography dump in one directory.
pub fn report(run: &mut RunDir, cfg: &ExperimentConfig, replicates: usize) -> CliResult<()> {
    let tol = 1e-9;
    paradox(run, "paradox_quarter_pi/", &ParadoxOpts { theta: PI / 4.0, axis: Axis::X, mode: Mode::Simulated, tol }, cfg)?;
    for (dir, axis) in [("paradox_x", Axis::X), ("paradox_y", Axis::Y)] {
        for (k, &theta) in TABLE_THETAS.iter().enumerate() {
            let sub = cfg.derived(100 + k as u64 + if axis == Axis::Y { 10 } else { 0 });
            let prefix = format!("{dir}/{}/", angle_tag(theta));
            paradox(run, &prefix, &ParadoxOpts { theta, axis, mode: Mode::Simulated, tol }, &sub)?;
        }
    }
    for (dir, strategy, tag) in [("game_sigma_x", Strategy::SigmaX, 200), ("game_sigma_z", Strategy::SigmaZ, 201)] {
        let o = GameOpts { grid: TABLE_THETAS.to_vec(), strategy, mode: Mode::Simulated };
        game(run, &format!("{dir}/"), &o, &cfg.derived(tag))?;
    }

    let curve_grid: Vec<f64> = (1..90).map(|d| d as f64 * PI / 180.0).collect();
    let mut curve = Vec::new();
    for axis in [Axis::X, Axis::Y] {
        for &theta in &curve_grid {
            let spec = coherence_paradox(theta, axis)?;
            let v = lhv_mixture_test(&spec, &spec.theoretical_observations(), tol)?;
            let mixed = spec.final_value();
            curve.push(CurveRow { theta, axis: axis.symbol(), mixed_value: mixed, lhv_max: mixed - v.violation_gap, violation_gap: v.violation_gap });
        }
    }
    run.write_csv("curves/paradox_curve.csv", &curve)?;

    let (xa, xb) = Strategy::SigmaX.observables();
    let (za, zb) = Strategy::SigmaZ.observables();
    let game_curve: Vec<GameCurveRow> = curve_grid
        .iter()
        .map(|&theta| {
            Ok(GameCurveRow {
                theta,
                p_win_x: evaluate_strategy(theta, xa, xb)?.p_win,
                p_win_z: evaluate_strategy(theta, za, zb)?.p_win,
                classical: 0.5,
            })
        })
        .collect::<CliResult<_>>()?;
    run.write_csv("curves/game_curve.csv", &game_curve)?;

    let t = TomoOpts { states: StateSelection::All, visibility: None, replicates };
    tomo(run, "tomography/", &t, &cfg.derived(300))?;
    for (dir, fixed, tag) in [("visibility_hv", 0.0, 400), ("visibility_da", 3.0 * PI / 4.0, 401)] {
        let o = VisibilityOpts { fixed, mode: Mode::Simulated, points: 72 };
        visibility(run, &format!("{dir}/"), &o, &cfg.derived(tag))?;
    }
    dicke(run, "dicke/", 3, tol)
}
