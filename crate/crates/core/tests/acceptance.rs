//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{random_coherent_tree, rng, Oracle};
use eps_reliability::cli;
use eps_reliability::document::TreeDocument;
use eps_reliability::fta::{EventNode, FaultTree, GateKind, GateNode, RawTree};
use eps_reliability::quant::{
    quantify_mission, top_probability_from, Method, MissionProfile, ModelMap, ProbabilityModel, QuantOptions,
};
use eps_reliability::riskmx::{classify, Color, RiskConfig};
use eps_reliability::scenario::{enumerate_scenarios, ScenarioClassifierConfig, ScenarioStats};
use eps_reliability::simkit::{
    battery_params_from_curve, compare_traces, open_circuit_voltage, pv_iv_detailed, simulate_battery, simulate_pv,
    BatteryFault, BatteryFaultKind, DischargeAnchors, LoadProfile, PVFault, PVFaultKind, PVParams, PvLoad, Trace,
};
use eps_reliability::sizing::{
    array_layout, array_power, battery_capacity, cell_count, ArraySizingInput, BatterySizingInput, ComponentLibrary,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

const RANDOM_TREES: usize = 200;
const TREE_SEED: u64 = 0x05EE_DF7A;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli_run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        std::iter::once("epsrel").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    let mut text = String::from_utf8(out).unwrap_or_default();
    if code != 0 {
        text.push_str(&String::from_utf8_lossy(&err));
    }
    (code, text)
}

/// The 200 random trees used by criteria 2 to 4.
fn random_trees() -> Vec<RawTree> {
    let mut r = rng(TREE_SEED);
    (0..RANDOM_TREES).map(|_| random_coherent_tree(&mut r, 12, 5)).collect()
}

fn gate_depth(raw: &RawTree) -> usize {
    fn depth(raw: &RawTree, id: &str) -> usize {
        match raw.gates.iter().find(|g| g.id == id) {
            Some(g) => 1 + g.inputs.iter().map(|i| depth(raw, i)).max().unwrap_or(0),
            None => 0,
        }
    }
    depth(raw, &raw.top)
}

/// Integer sum identities of an enumeration run.
fn check_identities(stats: &ScenarioStats) -> Result<(), String> {
    let m = stats.event_count;
    let sum_n: u64 = stats.per_m.iter().map(|l| l.scenarios).sum();
    ensure(stats.total == 1u64 << m, || format!("N = {} != 2^{m}", stats.total))?;
    ensure(sum_n == stats.total, || {
        format!("sum N(m) = {sum_n} != N = {}", stats.total)
    })?;
    let sum_srf: u64 = stats.per_m.iter().map(|l| l.survive + l.recoverable + l.fail).sum();
    ensure(sum_srf == stats.total, || format!("sum (S+R+F)(m) = {sum_srf} != N"))?;
    for l in &stats.per_m {
        ensure(l.survive + l.recoverable + l.fail == l.scenarios, || {
            format!("m = {}: S + R + F != N(m)", l.m)
        })?;
    }
    ensure(stats.per_m.len() == m + 1, || "levels m = 0..M missing".into())?;
    stats.check().map_err(|e| e.to_string())
}

fn ac1() -> Outcome {
    let doc = TreeDocument::eps_example();
    let tree = doc.fault_tree().map_err(|e| e.to_string())?;
    ensure(tree.gate_count() == 8, || format!("{} gates", tree.gate_count()))?;
    ensure(tree.event_count() == 12, || format!("{} events", tree.event_count()))?;
    let (code, out) = cli_run(&["enumerate", "eps_example", "--exclude-constant"]);
    ensure(code == 0, || format!("enumerate exited {code}: {out}"))?;
    let header = out.lines().next().unwrap_or_default().to_string();
    ensure(header.starts_with("M = 11  N = 2048 "), || format!("header {header:?}"))?;
    Ok(format!("8 gates, 12 events; `{}`", header.trim()))
}

fn ac2() -> Outcome {
    let trees = random_trees();
    let mut total_sets = 0;
    let mut max_events = 0;
    let mut max_depth = 0;
    for (k, raw) in trees.iter().enumerate() {
        let oracle = Oracle::new(raw);
        max_events = max_events.max(oracle.events.len());
        max_depth = max_depth.max(gate_depth(raw));
        let tree = FaultTree::validate(raw.clone()).map_err(|e| format!("tree {k}: {e}"))?;
        let got = tree
            .minimal_cut_sets()
            .map_err(|e| format!("tree {k}: {e}"))?
            .to_id_sets();
        let want = oracle.minimal_cut_sets();
        ensure(got == want, || format!("tree {k}: {got:?} != {want:?}"))?;
        total_sets += got.len();
    }
    ensure(max_events <= 12 && max_depth <= 5, || {
        format!("generator exceeded bounds: {max_events} events, depth {max_depth}")
    })?;
    Ok(format!(
        "{RANDOM_TREES} trees, {total_sets} cut sets set-for-set equal (max {max_events} events, depth {max_depth})"
    ))
}

fn ac3() -> Outcome {
    let trees = random_trees();
    let mut r = rng(TREE_SEED ^ 0xA11);
    let mut worst = 0.0f64;
    for (k, raw) in trees.iter().enumerate() {
        let oracle = Oracle::new(raw);
        let tree = FaultTree::validate(raw.clone()).map_err(|e| e.to_string())?;
        let q: Vec<f64> = (0..tree.stochastic_count()).map(|_| r.gen_range(0.0..=0.1)).collect();
        let exact = top_probability_from(&tree, &q, Method::Exact).map_err(|e| e.to_string())?;
        let rare = top_probability_from(&tree, &q, Method::RareEvent).map_err(|e| e.to_string())?;
        let want = oracle.exact_probability(&q);
        let err = (exact - want).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("tree {k}: exact {exact} vs oracle {want}"))?;
        // equal cut-set sums can differ from the union by rounding alone
        ensure(rare >= exact - 1e-15, || {
            format!("tree {k}: rare {rare} < exact {exact}")
        })?;
    }
    Ok(format!(
        "{RANDOM_TREES} trees, max |exact - oracle| = {worst:.1e}; rare-event >= exact"
    ))
}

fn ac4() -> Outcome {
    let mut runs = 0;
    let doc = TreeDocument::eps_example();
    let tree = doc.fault_tree().map_err(|e| e.to_string())?;
    let configs = [
        ScenarioClassifierConfig::default(),
        ScenarioClassifierConfig {
            excluded_events: vec!["FD-1".into()],
            ..Default::default()
        },
        ScenarioClassifierConfig {
            fail_gate: Some("Gate11".into()),
            recoverable_gates: vec!["PS-2".into(), "Gate18".into(), "PS-1".into()],
            excluded_events: vec!["FD-1".into()],
        },
    ];
    for config in &configs {
        let stats = enumerate_scenarios(&tree, config).map_err(|e| e.to_string())?;
        check_identities(&stats)?;
        runs += 1;
    }
    for (k, raw) in random_trees().into_iter().enumerate() {
        let tree = FaultTree::validate(raw.clone()).map_err(|e| e.to_string())?;
        let sub: Vec<String> = raw.gates.iter().skip(1).take(2).map(|g| g.id.clone()).collect();
        for config in [
            ScenarioClassifierConfig::default(),
            ScenarioClassifierConfig {
                recoverable_gates: sub,
                ..Default::default()
            },
        ] {
            let stats = enumerate_scenarios(&tree, &config).map_err(|e| format!("tree {k}: {e}"))?;
            check_identities(&stats).map_err(|e| format!("tree {k}: {e}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} enumeration runs satisfy all integer identities"))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ac5() -> Outcome {
    let n = cell_count(18.0, 3.6).map_err(|e| e.to_string())?;
    ensure(n == 5, || format!("cell_count(18, 3.6) = {n}"))?;
    let battery = BatterySizingInput {
        v_line: 18.0,
        v_cell: 3.6,
        p_e: 20.0,
        t_e: 0.6,
        n_b: 1,
        eta_dis: 0.9,
        v_cdis: 3.6,
        v_d: 0.6,
        dod: 0.3,
    };
    // hand oracle: 20 * 0.6 / (1 * 0.9 * (4 * 3.6 - 0.6) * 0.3) = 12 / 3.726
    let c_oracle = 12.0 / 3.726;
    let c = battery_capacity(&battery).map_err(|e| e.to_string())?.capacity_ah;
    ensure(rel(c, c_oracle) <= 1e-9, || format!("capacity {c} vs {c_oracle}"))?;
    let array = ArraySizingInput {
        eta_pc: 0.9,
        eta_d: 0.95,
        p_av: 40.0,
        p_p: 60.0,
        t_p: 0.5,
        t_s: 1.0,
        v_max: 16.8,
        v_min: 12.0,
        v_bus: 16.0,
        v_mp_eol: 2.2,
        i_mp_eol: 0.45,
    };
    // (40 + 60 * 0.5 / 1 * 16.8 / 12) / (0.9 * 0.95) = 82 / 0.855
    let p_oracle = 82.0 / 0.855;
    let p = array_power(&array).map_err(|e| e.to_string())?;
    ensure(rel(p, p_oracle) <= 1e-9, || format!("array power {p} vs {p_oracle}"))?;
    let layout = array_layout(p, &array).map_err(|e| e.to_string())?;
    // ceil(16 / 2.2) = 8; ceil(95.906 / 16 / 0.45) = ceil(13.32) = 14
    ensure(layout.series_cells == 8 && layout.parallel_strings == 14, || {
        format!("layout {layout:?}")
    })?;
    Ok(format!(
        "N = 5; C = {c:.6} Ah; P_sa = {p:.6} W; N_s = {}, N_p = {}",
        layout.series_cells, layout.parallel_strings
    ))
}

fn ac6() -> Outcome {
    let mut r = rng(66);
    let mut worst = 0.0f64;
    let mut trials = 0;
    for k in 1..=10 {
        for _ in 0..30 {
            let ids: Vec<String> = (0..k).map(|i| format!("S{i}")).collect();
            let mut raw = RawTree::new("TOP").gate(GateNode::new("TOP", GateKind::Or, ids.clone()));
            let mut models = ModelMap::new();
            let mut sum = 0.0;
            for id in &ids {
                raw = raw.event(EventNode::basic(id.clone()));
                let lambda = 10f64.powf(r.gen_range(-9.0..=-4.0));
                sum += lambda;
                models.insert(id.clone(), ProbabilityModel::FailureRateOnly { lambda });
            }
            let t = r.gen_range(1.0..=1e5);
            let tree = FaultTree::validate(raw).map_err(|e| e.to_string())?;
            let res = quantify_mission(
                &tree,
                &models,
                &MissionProfile::new(t).map_err(|e| e.to_string())?,
                QuantOptions::default(),
            )
            .map_err(|e| e.to_string())?;
            let want = (-sum * t).exp();
            let err = (res.reliability_mission - want).abs();
            worst = worst.max(err);
            ensure(err <= 1e-12, || {
                format!("k = {k}, t = {t}: {} vs {want}", res.reliability_mission)
            })?;
            trials += 1;
        }
    }
    Ok(format!("{trials} series systems, max error {worst:.1e}"))
}

fn ac7() -> Outcome {
    let lib = ComponentLibrary::bundled();
    let expected: [(&str, f64, f64); 9] = [
        ("Transistor", 1e-9, 70e-9),
        ("Thyristor", 36e-9, 360e-9),
        ("Digital integrated circuits", 30e-9, 30e-9),
        ("Logic elements", 30e-9, 30e-9),
        ("Analogue switch", 2000e-9, 2000e-9),
        ("Amplifier", 300e-9, 900e-9),
        ("Diodes", 1e-9, 6e-9),
        ("Li-Ion battery", 200e-9, 300e-9),
        ("Solar arrays", 100e-9, 200e-9),
    ];
    ensure(lib.entries().len() == 9, || format!("{} entries", lib.entries().len()))?;
    for (name, low, high) in expected {
        let e = lib.lookup(name).map_err(|e| e.to_string())?;
        ensure(e.lambda_low == low && e.lambda_high == high, || {
            format!("{name}: ({}, {}) != ({low}, {high})", e.lambda_low, e.lambda_high)
        })?;
        ensure(e.temperature_c == 40.0, || format!("{name}: {} C", e.temperature_c))?;
    }
    Ok("9 components exact, e.g. Analogue switch 2000e-9 /h".into())
}

fn li_ion() -> DischargeAnchors {
    DischargeAnchors {
        v_full: 4.2,
        v_exp: 3.9,
        q_exp: 0.3,
        v_nom: 3.6,
        q_nom: 2.0,
        q_max: 2.3,
        i_rated: 1.0,
        r_int: 0.05,
    }
}

fn timed<F: FnOnce() -> Result<String, String>>(f: F) -> (Result<String, String>, Duration) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed())
}

fn causal(h: &Trace, f: &Trace, onset: f64, dt: f64) -> Result<f64, String> {
    let k0 = h.rows.iter().position(|r| r.t >= onset).ok_or("onset beyond trace")?;
    ensure(h.rows[..k0] == f.rows[..k0], || {
        format!("{}: traces differ before onset", f.label)
    })?;
    let n = h.len().min(f.len());
    let (mut a, mut b) = (h.clone(), f.clone());
    a.rows.truncate(n);
    b.rows.truncate(n);
    let first = compare_traces(&a, &b)
        .map_err(|e| e.to_string())?
        .first_divergence
        .ok_or_else(|| format!("{}: no divergence", f.label))?;
    ensure(first >= onset && first <= onset + dt * (1.0 + 1e-9), || {
        format!("{}: first divergence {first} h for onset {onset} h", f.label)
    })?;
    Ok(first)
}

fn ac8() -> Vec<(&'static str, Outcome, Duration, Duration)> {
    let limit = Duration::from_secs(5);
    let mut out = Vec::new();

    let (r, d) = timed(|| {
        let p = battery_params_from_curve(&li_ion()).map_err(|e| e.to_string())?;
        let t =
            simulate_battery(&p, &LoadProfile::Constant(1.0), None, 1.0 / 3600.0, 5.0).map_err(|e| e.to_string())?;
        ensure(t.charge_exhausted, || "run did not reach charge exhaustion".into())?;
        let bad = t.rows.windows(2).position(|w| w[1].voltage >= w[0].voltage);
        ensure(bad.is_none(), || {
            format!("voltage not decreasing at sample {}", bad.unwrap_or(0))
        })?;
        Ok(format!(
            "{} samples strictly decreasing to exhaustion at {:.3} h",
            t.len(),
            t.rows.last().map_or(0.0, |r| r.t)
        ))
    });
    out.push(("AC8a healthy battery discharge", r, d, limit));

    let (r, d) = timed(|| {
        let dt = 1.0 / 360.0;
        let onset = 0.5;
        let p = battery_params_from_curve(&li_ion()).map_err(|e| e.to_string())?;
        let load = LoadProfile::Constant(1.0);
        let h = simulate_battery(&p, &load, None, dt, 1.0).map_err(|e| e.to_string())?;
        let mut kinds = 0;
        for kind in [
            BatteryFaultKind::OpenCircuit,
            BatteryFaultKind::InternalShort { r_leak: 2.0 },
            BatteryFaultKind::ResistanceGrowth { factor: 3.0 },
            BatteryFaultKind::CapacityFade { factor: 0.5 },
        ] {
            let f =
                simulate_battery(&p, &load, Some(&BatteryFault { kind, onset }), dt, 1.0).map_err(|e| e.to_string())?;
            causal(&h, &f, onset, dt)?;
            kinds += 1;
        }
        let pv = PVParams::example();
        let pdt = 0.01;
        for load in [PvLoad::Resistive(30.0), PvLoad::Bus(15.0)] {
            let h = simulate_pv(&pv, None, load, pdt, 1.0).map_err(|e| e.to_string())?;
            for kind in [
                PVFaultKind::Ground { string: 0, cells: 6 },
                PVFaultKind::LineLine { string: 1, span: 10 },
                PVFaultKind::Mismatch { string: 2, factor: 0.5 },
                PVFaultKind::OpenString { string: 3 },
            ] {
                let f = simulate_pv(&pv, Some(&PVFault { kind, onset }), load, pdt, 1.0).map_err(|e| e.to_string())?;
                causal(&h, &f, onset, pdt)?;
                kinds += 1;
            }
        }
        Ok(format!(
            "{kinds} fault runs identical before onset, divergent within one step"
        ))
    });
    out.push(("AC8b fault causality", r, d, limit));

    let (r, d) = timed(|| {
        let mut rg = rng(88);
        let mut runs = 0;
        for _ in 0..40 {
            let mut pv = PVParams::example();
            pv.n_s = rg.gen_range(4..=60);
            pv.n_p = rg.gen_range(1..=6);
            pv.i_ph = rg.gen_range(0.1..2.0);
            pv.irradiance = (0..pv.n_p).map(|_| rg.gen_range(0.2..=1.0)).collect();
            let voc = open_circuit_voltage(&pv).map_err(|e| e.to_string())?;
            let s = rg.gen_range(0..pv.n_p as usize);
            let k = rg.gen_range(1..pv.n_s);
            for load in [
                PvLoad::Bus(rg.gen_range(0.3..0.95) * voc),
                PvLoad::Resistive(rg.gen_range(0.5..50.0)),
            ] {
                let h = simulate_pv(&pv, None, load, 0.1, 1.0).map_err(|e| e.to_string())?;
                for kind in [
                    PVFaultKind::Ground { string: s, cells: k },
                    PVFaultKind::LineLine { string: s, span: k },
                    PVFaultKind::Mismatch {
                        string: s,
                        factor: rg.gen_range(0.0..=1.0),
                    },
                ] {
                    let onset = 0.4;
                    let f =
                        simulate_pv(&pv, Some(&PVFault { kind, onset }), load, 0.1, 1.0).map_err(|e| e.to_string())?;
                    for (a, b) in h.rows.iter().zip(&f.rows).filter(|(a, _)| a.t >= onset) {
                        ensure(b.power <= a.power * (1.0 + 1e-12), || {
                            format!("{kind}: {} W > {} W", b.power, a.power)
                        })?;
                    }
                    runs += 1;
                }
            }
        }
        Ok(format!("{runs} faulted runs never exceed healthy power"))
    });
    out.push(("AC8c PV fault power dominance", r, d, limit));

    let (r, d) = timed(|| {
        let mut rg = rng(89);
        let mut points = 0;
        let mut worst = 0.0f64;
        for case in 0..30 {
            let mut pv = PVParams::example();
            if case > 0 {
                pv.i_ph = rg.gen_range(0.05..3.0);
                pv.i_0 = 10f64.powf(rg.gen_range(-12.0..-6.0));
                pv.n = rg.gen_range(1.0..2.0);
                pv.r_s = rg.gen_range(0.0..0.1);
                pv.r_sh = rg.gen_range(10.0..1000.0);
                pv.n_s = rg.gen_range(1..=72);
                pv.n_p = rg.gen_range(1..=8);
                pv.irradiance = (0..pv.n_p).map(|_| rg.gen_range(0.0..=1.0)).collect();
            }
            let voc = open_circuit_voltage(&pv).map_err(|e| e.to_string())?;
            for k in 0..=200 {
                let pt = pv_iv_detailed(&pv, voc * 1.05 * f64::from(k) / 200.0).map_err(|e| e.to_string())?;
                worst = worst.max(pt.max_residual());
                points += 1;
            }
        }
        ensure(worst <= 1e-9, || format!("residual {worst:e} A"))?;
        Ok(format!("{points} solved points, max residual {worst:.1e} A"))
    });
    out.push(("AC8d pv_iv residual", r, d, limit));
    out
}

fn color_monotone(cfg: &RiskConfig) -> Result<(), String> {
    let m = classify(&[], cfg).map_err(|e| e.to_string())?;
    for l in 1..=5u8 {
        for s in 1..=5u8 {
            let c = m.cell(l, s).color;
            if l < 5 && m.cell(l + 1, s).color < c {
                return Err(format!("{cfg:?}: color drops from ({l},{s}) to ({},{s})", l + 1));
            }
            if s < 5 && m.cell(l, s + 1).color < c {
                return Err(format!("{cfg:?}: color drops from ({l},{s}) to ({l},{})", s + 1));
            }
        }
    }
    Ok(())
}

fn ac9() -> Outcome {
    let m = classify(&[], &RiskConfig::default()).map_err(|e| e.to_string())?;
    ensure(m.cell(1, 1).color == Color::Green, || "(1,1) is not green".into())?;
    ensure(m.cell(5, 5).color == Color::Red, || "(5,5) is not red".into())?;
    let mut r = rng(99);
    let mut accepted = 0;
    while accepted < 100 {
        let mut edges: Vec<f64> = (0..4).map(|_| 10f64.powf(r.gen_range(-9.0..0.0))).collect();
        edges.sort_by(f64::total_cmp);
        let yellow = r.gen_range(2..=11);
        let cfg = RiskConfig {
            likelihood_thresholds: [edges[0], edges[1], edges[2], edges[3]],
            yellow_min_sum: yellow,
            red_min_sum: r.gen_range(yellow..=11),
        };
        if cfg.check().is_err() {
            continue;
        }
        color_monotone(&cfg)?;
        accepted += 1;
    }
    Ok("corners green/red; monotone under 100 random configurations".into())
}

fn ac10() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/valid");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tree"))
        .collect();
    files.sort();
    ensure(files.len() == 20, || format!("{} corpus files", files.len()))?;
    for path in &files {
        let doc = TreeDocument::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let text = doc.serialize();
        let again = TreeDocument::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(again == doc && again.serialize() == text, || {
            format!("{}: round trip changed", path.display())
        })?;
    }
    for format in ["text", "json", "csv"] {
        let args = [
            "analyze",
            "eps_example",
            "--mission-hours",
            "17520",
            "--no-timestamp",
            "--scenarios",
            "--exclude-constant",
            "--format",
            format,
        ];
        let (c1, a) = cli_run(&args);
        let (c2, b) = cli_run(&args);
        ensure(c1 == 0 && c2 == 0, || format!("analyze exited {c1}/{c2}: {a}"))?;
        ensure(a == b, || format!("{format} output differs between runs"))?;
    }
    Ok("20 files round-trip; analyze byte-identical in text, json and csv".into())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("AC1 structural reproduction", ac1, Duration::from_secs(1)),
        ("AC2 cut-set oracle", ac2, Duration::from_secs(30)),
        ("AC3 quantification oracle", ac3, Duration::from_secs(60)),
        ("AC4 enumeration identities", ac4, Duration::from_secs(60)),
        ("AC5 sizing", ac5, Duration::from_secs(1)),
        ("AC6 series closed form", ac6, Duration::from_secs(60)),
        ("AC7 component library", ac7, Duration::from_secs(60)),
    ];
    let mut rows: Vec<(&str, Outcome, Duration, Duration)> = criteria
        .into_iter()
        .map(|(name, f, limit)| {
            let (r, d) = timed(f);
            (name, r, d, limit)
        })
        .collect();
    rows.extend(ac8());
    for (name, f, limit) in [
        ("AC9 risk matrix", ac9 as fn() -> Outcome, Duration::from_secs(60)),
        ("AC10 round trip and determinism", ac10, Duration::from_secs(60)),
    ] {
        let (r, d) = timed(f);
        rows.push((name, r, d, limit));
    }

    let mut failed = 0;
    for (name, result, took, limit) in rows {
        let secs = took.as_secs_f64();
        let (ok, detail) = match result {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took {secs:.3} s, limit {} s", limit.as_secs())),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name}: {detail} [{secs:.3} s]", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
