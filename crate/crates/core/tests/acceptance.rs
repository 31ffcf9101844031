//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cohwit_core::expsim::{
    correlator_from_counts, paradox_p_value, simulate_counts, visibility_scan, CountTable, ExperimentConfig,
    CLASSICAL_VISIBILITY_BOUND,
};
use cohwit_core::game::{classical_identity_check, evaluate_strategy, winning_probability, Strategy};
use cohwit_core::lhv::{
    coherence_paradox, dicke_paradox, ghz_paradox, lhv_mixture_test, Constraint, MixtureClaim, ParadoxSpec,
    GHZ_SIGNS, GHZ_STABILIZERS,
};
use cohwit_core::measure::{
    correlator, expectation, outcome_distribution, Axis, JointDistribution, LocalObservable, ObservableChain,
    Source,
};
use cohwit_core::qstate::{epr_family, ghz_state, werner_mix, DensityOperator, SourceLabel};
use cohwit_core::tomo::{bootstrap_reconstruction, reconstruct, reference_states, simulate_tomography};
use common::*;
use rand::Rng;

const THETAS: [f64; 4] = [PI / 12.0, PI / 8.0, PI / 6.0, PI / 4.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > budget {
        o.pass = false;
    }
    o.detail = format!("{}; {:.2?} (budget {:?})", o.detail, elapsed, budget);
    o
}

fn exact_paradox_values() -> Outcome {
    let mut worst = 0.0f64;
    let mut infeasible = true;
    for theta in THETAS {
        for axis in [Axis::X, Axis::Y] {
            let spec = coherence_paradox(theta, axis).unwrap();
            let want = [-1.0, -1.0, 0.0, 0.0, (2.0 * theta).sin()];
            for (c, w) in spec.constraints().iter().zip(want) {
                worst = worst.max((c.expected_value - w).abs());
            }
            let verdict = lhv_mixture_test(&spec, &spec.theoretical_observations(), 1e-10).unwrap();
            infeasible &= !verdict.lhv_feasible;
        }
    }
    outcome(worst <= 1e-10 && infeasible, format!("max deviation {worst:.1e}, all verdicts infeasible: {infeasible}"))
}

fn ghz_check() -> Outcome {
    let ghz = ghz_state(3).unwrap();
    let mut worst = 0.0f64;
    for (s, sign) in GHZ_STABILIZERS.iter().zip(GHZ_SIGNS) {
        let chain: ObservableChain = s.parse().unwrap();
        worst = worst.max((chain.expectation_pure(&ghz).unwrap() - sign).abs());
    }
    // independent enumeration of the 2^6 local value assignments
    let satisfying = (0u32..64)
        .filter(|bits| {
            let v: Vec<i32> = (0..6).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
            let (x1, y1, x2, y2, x3, y3) = (v[0], v[1], v[2], v[3], v[4], v[5]);
            x1 * y2 * y3 == -1 && y1 * x2 * y3 == -1 && y1 * y2 * x3 == -1 && x1 * x2 * x3 == 1
        })
        .count();
    let verdict = ghz_paradox().unwrap();
    outcome(
        worst <= 1e-12 && satisfying == 0 && !verdict.lhv_feasible,
        format!("max stabilizer deviation {worst:.1e}, satisfying assignments {satisfying}"),
    )
}

fn dicke_family() -> Outcome {
    let mut misses = Vec::new();
    for n in 2..=8usize {
        let want = (n as f64 - 1.0) / n as f64;
        for z in 0..n {
            let got = dicke_paradox(n, z).unwrap().final_value();
            if (got - want).abs() > 1e-12 {
                misses.push(format!("n={n} z={z}: {got:.6} vs {want:.6}"));
            }
        }
    }
    let detail = if misses.is_empty() {
        "all n = 2..8 and Z positions match (n-1)/n".to_string()
    } else {
        format!("{} mismatches, e.g. {}", misses.len(), misses.iter().take(3).cloned().collect::<Vec<_>>().join("; "))
    };
    outcome(misses.is_empty(), detail)
}

fn game_values() -> Outcome {
    let mut ok = true;
    let (za, zb) = Strategy::SigmaZ.observables();
    let (xa, xb) = Strategy::SigmaX.observables();
    let table = [0.5625, 0.5884, 0.6083, 0.6250];
    let mut worst_formula = 0.0f64;
    let mut worst_table = 0.0f64;
    for (theta, t) in THETAS.iter().zip(table) {
        let z = evaluate_strategy(*theta, za, zb).unwrap();
        ok &= (z.p_win - 0.625).abs() <= 1e-10;
        let x = evaluate_strategy(*theta, xa, xb).unwrap();
        worst_formula = worst_formula.max((x.p_win - (0.5 + (2.0 * theta).sin() / 8.0)).abs());
        worst_table = worst_table.max((x.p_win - t).abs());
        for e in [z, x] {
            ok &= (e.p_win - 0.5 - (e.i_terms[0][0] + e.i_terms[1][1]) / 4.0).abs() <= 1e-10;
        }
    }
    // classical (input-independent) tables carry no coherence
    let classical = JointDistribution::input_independent([[0.4, 0.1], [0.2, 0.3]]).unwrap();
    let c = winning_probability(&classical).unwrap();
    ok &= c.i_terms.iter().flatten().all(|i| i.abs() <= 1e-10) && classical_identity_check(&classical);
    ok &= worst_formula <= 1e-10;
    // the table is printed to four decimals
    ok &= worst_table <= 5e-5;
    outcome(ok, format!("formula deviation {worst_formula:.1e}, table deviation {worst_table:.1e}"))
}

fn paradox_counts(theta: f64, v: f64, cfg: &ExperimentConfig) -> (ParadoxSpec, BTreeMap<(String, ObservableChain), CountTable>) {
    let spec = coherence_paradox(theta, Axis::X).unwrap();
    let counts = spec
        .constraints()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let label = match c.source_label.as_str() {
                "00" => SourceLabel::Psi00,
                "01" => SourceLabel::Psi01,
                _ => SourceLabel::Psi10,
            };
            let state = werner_mix(&epr_family(theta, label).unwrap(), v).unwrap();
            let axes = c.observable.axes();
            let table = simulate_counts(&state, (axes[0], axes[1]), &cfg.derived(k as u64)).unwrap();
            ((c.source_label.clone(), c.observable.clone()), table)
        })
        .collect();
    (spec, counts)
}

fn desk_scale_statistics() -> Outcome {
    let cfg = config_with_total(1e5, 0.99, 2024);
    let (spec, counts) = paradox_counts(PI / 4.0, 0.99, &cfg);
    let mut worst_value = 0.0f64;
    let mut worst_err_ratio = 0.0f64;
    for c in spec.constraints() {
        let table = &counts[&(c.source_label.clone(), c.observable.clone())];
        let est = correlator_from_counts(table).unwrap();
        worst_value = worst_value.max((est.value - c.expected_value).abs());
        worst_err_ratio = worst_err_ratio.max((est.std_err / est.delta_std_err - 1.0).abs());
    }
    let p = paradox_p_value(&spec, &counts).unwrap();
    outcome(
        worst_value <= 0.02 && worst_err_ratio <= 0.25 && p.value() < 1e-10,
        format!(
            "max |E - theory| {worst_value:.4}, max bootstrap/delta deviation {:.1}%, p <= {:.3e} (log10 {:.0})",
            100.0 * worst_err_ratio,
            p.value(),
            p.log10()
        ),
    )
}

fn full_scale_statistics() -> Outcome {
    let cfg = ExperimentConfig { visibility_v: 0.99, seed: 2024, ..Default::default() };
    let (spec, counts) = paradox_counts(PI / 4.0, cfg.visibility_v, &cfg);
    let p = paradox_p_value(&spec, &counts).unwrap();
    let n: u64 = counts.values().map(|t| t.total()).sum();
    outcome(p.value() < 1e-15, format!("{n} coincidences, p <= {:.3e} (log10 {:.3e})", p.value(), p.log10()))
}

fn tomography() -> Outcome {
    let mut worst_noiseless = 1.0f64;
    for (k, r) in reference_states().unwrap().iter().enumerate() {
        let rho: DensityOperator = (&r.state).into();
        let counts = simulate_tomography(&rho, &config_with_total(1e7, 1.0, 100 + k as u64)).unwrap();
        worst_noiseless = worst_noiseless.min(reconstruct(&counts, &rho).unwrap().fidelity_to_target);
    }
    let v = 0.98;
    let psi = epr_family(PI / 4.0, SourceLabel::Psi00).unwrap();
    let target: DensityOperator = (&psi).into();
    let noisy = werner_mix(&psi, v).unwrap();
    let cfg = config_with_total(1e5, v, 77);
    let counts = simulate_tomography(&noisy, &cfg).unwrap();
    let res = reconstruct(&counts, &target).unwrap();
    let errs = bootstrap_reconstruction(&counts, &target, 200, cfg.seed).unwrap();
    let closed = (v + (1.0 - v) / 4.0).sqrt();
    let dev = (res.fidelity_to_target - closed).abs();
    outcome(
        worst_noiseless > 0.999 && dev <= 3.0 * errs.fidelity_std_err,
        format!(
            "min noiseless fidelity {worst_noiseless:.6}; v=0.98 fidelity {:.5} vs {closed:.5} (|diff| {dev:.5}, 3 se {:.5})",
            res.fidelity_to_target,
            3.0 * errs.fidelity_std_err
        ),
    )
}

fn visibility() -> Outcome {
    let grid: Vec<f64> = (0..72).map(|k| k as f64 * PI / 72.0).collect();
    let epr = epr_family(PI / 4.0, SourceLabel::Psi00).unwrap();
    let ideal = visibility_scan(&(&epr).into(), 0.0, &grid, None).unwrap();
    let ideal_dev = (ideal.visibility - 1.0).abs();

    let mut worst_sim = 0.0f64;
    for (k, v) in [0.6, 0.8, 0.9966].into_iter().enumerate() {
        let rho = werner_mix(&epr, v).unwrap();
        for fixed in [0.0, 3.0 * PI / 4.0] {
            let scan = visibility_scan(&rho, fixed, &grid, Some(&config_with_total(1e5, v, k as u64))).unwrap();
            worst_sim = worst_sim.max((scan.visibility - v).abs());
        }
    }
    let mut flag_ok = true;
    for k in 0..=200 {
        let v = 0.6 + 0.001 * k as f64;
        let scan = visibility_scan(&werner_mix(&epr, v).unwrap(), 0.0, &grid, None).unwrap();
        flag_ok &= scan.exceeds_classical_bound == (scan.visibility > CLASSICAL_VISIBILITY_BOUND);
        if (v - 0.70).abs() < 1e-9 {
            flag_ok &= !scan.exceeds_classical_bound;
        }
        if (v - 0.72).abs() < 1e-9 {
            flag_ok &= scan.exceeds_classical_bound;
        }
    }
    outcome(
        ideal_dev <= 1e-10 && worst_sim <= 0.005 && flag_ok,
        format!("ideal |V - 1| {ideal_dev:.1e}, simulated max |V - v| {worst_sim:.4}, flag consistent: {flag_ok}"),
    )
}

fn property_suites() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let mut r = rng(seed);

        // Born rule: correlators of the outcome table equal Pauli expectations
        let rho = random_density(&mut r);
        let a = [LocalObservable::new(random_axis(&mut r)), LocalObservable::new(random_axis(&mut r))];
        let b = [LocalObservable::new(random_axis(&mut r)), LocalObservable::new(random_axis(&mut r))];
        let sources: BTreeMap<_, _> =
            [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().map(|k| (k, Source::Prepared(rho.clone()))).collect();
        let dist = outcome_distribution(&sources, a, b).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let e = expectation(&rho, &ObservableChain::new(vec![a[x].axis, b[y].axis])).unwrap();
                if (e - correlator(&dist, x as u8, y as u8)).abs() > 1e-10 {
                    failures.push(format!("born rule seed {seed}"));
                }
            }
        }

        // convex mixtures of component rows are declared feasible
        let k = r.random_range(2..=4usize);
        let m = r.random_range(1..=3usize);
        let chains: Vec<ObservableChain> = ["XX", "YY", "ZZ"].iter().map(|s| s.parse().unwrap()).collect();
        let rows: Vec<Vec<f64>> = (0..k).map(|_| (0..m).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let raw_w: Vec<f64> = (0..k).map(|_| r.random_range(0.01..1.0)).collect();
        let total: f64 = raw_w.iter().sum();
        let mut constraints = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (o, &v) in row.iter().enumerate() {
                constraints.push(Constraint { source_label: format!("c{i}"), observable: chains[o].clone(), expected_value: v });
            }
        }
        for o in 0..m {
            let mixed: f64 = (0..k).map(|i| raw_w[i] / total * rows[i][o]).sum();
            constraints.push(Constraint { source_label: "m".into(), observable: chains[o].clone(), expected_value: mixed });
        }
        let claim = MixtureClaim {
            mixed_label: "m".into(),
            component_labels: (0..k).map(|i| format!("c{i}")).collect(),
            note: String::new(),
        };
        let spec = ParadoxSpec::new(constraints, claim).unwrap();
        if !lhv_mixture_test(&spec, &spec.theoretical_observations(), 1e-9).unwrap().lhv_feasible {
            failures.push(format!("mixture completeness seed {seed}"));
        }

        // game identity on arbitrary normalized tables
        let mut probs = [[[[0.0; 2]; 2]; 2]; 2];
        for row in probs.iter_mut().flatten() {
            let cells: Vec<f64> = (0..4).map(|_| r.random_range(0.0..1.0)).collect();
            let s: f64 = cells.iter().sum();
            for (i, p) in row.iter_mut().flatten().enumerate() {
                *p = cells[i] / s;
            }
        }
        probs[1][1] = [[0.25; 2]; 2];
        if !classical_identity_check(&JointDistribution::new(probs).unwrap()) {
            failures.push(format!("game identity seed {seed}"));
        }

        // estimator determinism, and estimator consistency counted below
        let setting = (random_axis(&mut r), random_axis(&mut r));
        let cfg = config_with_total(2e5, 1.0, seed);
        let t1 = simulate_counts(&rho, setting, &cfg).unwrap();
        let t2 = simulate_counts(&rho, setting, &cfg).unwrap();
        let e1 = correlator_from_counts(&t1).unwrap();
        let e2 = correlator_from_counts(&t2).unwrap();
        if t1 != t2 || e1 != e2 {
            failures.push(format!("determinism seed {seed}"));
        }
    }
    let inside = (0..100u64)
        .filter(|&seed| {
            let mut r = rng(1_000 + seed);
            let rho = random_density(&mut r);
            let setting = (random_axis(&mut r), random_axis(&mut r));
            let t = simulate_counts(&rho, setting, &config_with_total(2e5, 1.0, seed)).unwrap();
            let est = correlator_from_counts(&t).unwrap();
            let exact = expectation(&rho, &ObservableChain::new(vec![setting.0, setting.1])).unwrap();
            (est.value - exact).abs() <= 3.0 * est.std_err
        })
        .count();
    if inside < 99 {
        failures.push(format!("consistency {inside}/100 within 3 se"));
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("100 seeds, 0 failures; consistency {inside}/100 within 3 se")
        } else {
            format!("{} failures: {}", failures.len(), failures.join(", "))
        },
    )
}

type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 exact paradox values", Box::new(|| timed(Duration::from_secs(1), exact_paradox_values))),
        ("2 GHZ check", Box::new(|| timed(Duration::from_secs(1), ghz_check))),
        ("3 Dicke family", Box::new(dicke_family)),
        ("4 game values", Box::new(game_values)),
        ("5 desk-scale statistics", Box::new(|| timed(Duration::from_secs(30), desk_scale_statistics))),
        ("6 full-scale statistics", Box::new(|| timed(Duration::from_secs(600), full_scale_statistics))),
        ("7 tomography", Box::new(tomography)),
        ("8 visibility", Box::new(visibility)),
        ("9 property suites", Box::new(property_suites)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
