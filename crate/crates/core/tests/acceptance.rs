//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails. `ACCEPTANCE_ONLY=3,4` restricts the run to a subset.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, Output};
use std::time::Instant;

use common::{binary, brute_force_corridors, naive_flight, oracle_box, rotate};
use corridor_gas::cli::off_diagonal_ratio;
use corridor_gas::dynamics::{retrace, Lattice};
use corridor_gas::experiment::{run_diffusion, simulate_flights, DiffusionConfig, FlightConfig, FlightStats};
use corridor_gas::real::{Real, Wide};
use corridor_gas::sampling::{sample_state, Measure, SampleRng, SeedPlan};
use corridor_gas::stats::{fit_tail, ExponentMode, TailFit};
use corridor_gas::{enumerate_corridors, free_flight, tail_constants, Horizon, LatticeSpec};
use serde_json::Value;

const FLOW_WINDOW: (f64, f64) = (1e2, 1e4);
const MAP_WINDOW: (f64, f64) = (31.622776601683793, 3162.2776601683795);
const TRIANGULAR: &str = "1,0,0.5,0.8660254";

type Outcome = (bool, String);

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn rel(observed: f64, target: f64) -> f64 {
    (observed / target - 1.0).abs()
}

fn flights(spec: LatticeSpec, measure: Measure, samples: u64, seed: u64) -> FlightStats {
    let cfg = FlightConfig { lattice: spec, measure, samples, seed, cap: 1e7, t_min: 1.0, bins_per_decade: 10 };
    simulate_flights(&cfg, workers()).expect("flights")
}

fn fit(stats: &FlightStats, mode: ExponentMode, window: (f64, f64)) -> Result<TailFit, String> {
    fit_tail(&stats.curve, mode, window).map_err(|e| e.to_string())
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut rng = SampleRng::new(0xAC1, 0);
    let mut mismatches = Vec::new();
    let mut total = 0;
    for case in 0..50 {
        let angle = rng.uniform() * std::f64::consts::TAU;
        let g1 = rotate([1.0, 0.0], angle);
        let g2 = rotate([rng.uniform() - 0.5, 0.8 + 0.45 * rng.uniform()], angle);
        let probe = LatticeSpec::planar(g1, g2, 0.01);
        let r = 0.5 * probe.shortest_vector() * (0.15 + 0.8 * rng.uniform());
        let spec = probe.with_radius(r);
        let ours = enumerate_corridors(&spec).expect("valid lattice");
        let oracle = brute_force_corridors(&spec, oracle_box(&spec));
        total += oracle.len();
        let same = ours.corridors.len() == oracle.len()
            && ours.corridors.iter().zip(&oracle).all(|(c, (u, w))| &c.direction == u && (c.width - w).abs() < 1e-9);
        if !same {
            mismatches.push(case);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = mismatches.is_empty() && secs < 10.0;
    (ok, format!("50 configs, {total} corridors, mismatches {mismatches:?}, {secs:.2} s (limit 10 s)"))
}

fn ac2() -> Outcome {
    let m2 = flights(LatticeSpec::cubic(2, 0.25), Measure::Map, 10_000_000, 21).mean_length();
    let m3 = flights(LatticeSpec::cubic(3, 0.25), Measure::Map, 10_000_000, 22).mean_length();
    let (e2, e3) = (rel(m2, 1.607301), rel(m3, 4.759631));
    (
        e2 < 0.01 && e3 < 0.01,
        format!("Z2 mean {m2:.6} vs 1.607301 (rel {e2:.2e}); Z3 mean {m3:.6} vs 4.759631 (rel {e3:.2e}); tol 1%"),
    )
}

struct PlanarTail {
    c_flow: f64,
    c_map: f64,
    tau: f64,
    flow_fixed: Result<TailFit, String>,
    flow_free: Result<TailFit, String>,
    map_fixed: Result<TailFit, String>,
    map_free: Result<TailFit, String>,
}

fn planar_tail() -> PlanarTail {
    let spec = LatticeSpec::cubic(2, 0.4);
    let theory = tail_constants(&enumerate_corridors(&spec).unwrap());
    let flow = flights(spec.clone(), Measure::Flow, 100_000_000, 3);
    let map = flights(spec, Measure::Map, 100_000_000, 4);
    PlanarTail {
        c_flow: theory.c_flow,
        c_map: theory.c_map,
        tau: theory.mean_free_path,
        flow_fixed: fit(&flow, ExponentMode::Fixed(-1.0), FLOW_WINDOW),
        flow_free: fit(&flow, ExponentMode::Free, FLOW_WINDOW),
        map_fixed: fit(&map, ExponentMode::Fixed(-2.0), MAP_WINDOW),
        map_free: fit(&map, ExponentMode::Free, MAP_WINDOW),
    }
}

fn ac3(t: &PlanarTail) -> Outcome {
    match (&t.flow_fixed, &t.flow_free) {
        (Ok(fixed), Ok(free)) => {
            let e = rel(fixed.constant, t.c_flow);
            let ok = e < 0.10 && (free.exponent + 1.0).abs() < 0.1;
            (
                ok,
                format!(
                    "C_flow {:.6} ± {:.6} vs {:.6} (rel {e:.3}, tol 0.10); free exponent {:.4} ± {:.4} (tol ±0.1)",
                    fixed.constant, fixed.stderr_constant, t.c_flow, free.exponent, free.stderr_exponent
                ),
            )
        }
        (a, b) => (false, format!("fit failed: {:?} / {:?}", a.as_ref().err(), b.as_ref().err())),
    }
}

fn ac4(t: &PlanarTail) -> Outcome {
    match (&t.map_fixed, &t.map_free) {
        (Ok(fixed), Ok(free)) => {
            let e = rel(fixed.constant, t.c_map);
            let ok = e < 0.15 && (free.exponent + 2.0).abs() < 0.15;
            (
                ok,
                format!(
                    "C_map {:.6} ± {:.6} vs {:.6} (rel {e:.3}, tol 0.15); free exponent {:.4} ± {:.4} (tol ±0.15)",
                    fixed.constant, fixed.stderr_constant, t.c_map, free.exponent, free.stderr_exponent
                ),
            )
        }
        (a, b) => (false, format!("fit failed: {:?} / {:?}", a.as_ref().err(), b.as_ref().err())),
    }
}

fn ac5(t: &PlanarTail) -> Outcome {
    match (&t.flow_fixed, &t.map_fixed) {
        (Ok(flow), Ok(map)) => {
            let ratio = map.constant / flow.constant;
            let e = rel(ratio, 0.621681);
            (
                e < 0.15,
                format!("C_map/C_flow {ratio:.4} vs 0.621681 (rel {e:.3}, tol 0.15); computed mean free path {:.6}", t.tau),
            )
        }
        _ => (false, "tail fits unavailable".into()),
    }
}

fn run_cli(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(binary());
    cmd.args(args).env_remove("CORRIDOR_GAS_WORKERS");
    if let Some(w) = workers {
        cmd.env("CORRIDOR_GAS_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn ac6() -> Outcome {
    let spec = LatticeSpec::triangular(0.45);
    let spectrum = enumerate_corridors(&spec).unwrap();
    let stats = flights(spec, Measure::Flow, 1_000_000, 6);
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run_cli(
        &[
            "verify", "--radius", "0.45", "--basis", TRIANGULAR, "--samples", "1e6", "--cap", "1e3",
            "--output", report.to_str().unwrap(),
        ],
        None,
    );
    let v: Value = std::fs::read(&report).ok().and_then(|b| serde_json::from_slice(&b).ok()).unwrap_or(Value::Null);
    let rows = v["checks"].as_array().cloned().unwrap_or_default();
    let na = rows.iter().filter(|r| r["status"] == "not_applicable").count();
    let ok = spectrum.corridors.is_empty()
        && spectrum.horizon() == Horizon::Finite
        && stats.censored == 0
        && stats.max_length < 10.0
        && o.status.code() == Some(0)
        && na == 5;
    (
        ok,
        format!(
            "corridors {}, censored {}, max flight {:.4}, verify exit {:?}, n/a rows {na}",
            spectrum.corridors.len(),
            stats.censored,
            stats.max_length,
            o.status.code()
        ),
    )
}

fn ac7() -> Outcome {
    let cfg = DiffusionConfig {
        lattice: LatticeSpec::cubic(2, 0.4),
        measure: Measure::Map,
        trajectories: 10_000,
        collisions: 10_000,
        seed: 7,
        cap: 1e7,
    };
    let result = run_diffusion(&cfg, workers()).expect("diffusion");
    let last = result.checkpoints.len() - 1;
    let ratio = off_diagonal_ratio(&result.raw[last]);
    let slope = result.growth_slope(1_000);
    let raw = result.raw_growth_slope(1_000);
    let ok = ratio < 0.05 && (1.0..=1.2).contains(&slope);
    (
        ok,
        format!(
            "off-diagonal ratio {ratio:.4} (< 0.05); growth slope {slope:.4} in [1.0, 1.2]; sample-variance slope {raw:.4} (info)"
        ),
    )
}

fn ac8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let curve = d("curve.csv");
    let seeded = run_cli(&["simulate", "--radius", "0.4", "--samples", "1e5", "--output", &curve], None);
    if seeded.status.code() != Some(0) {
        return (false, "could not produce a survival curve for tailfit".into());
    }
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("corridors", vec!["corridors".into(), "--dim".into(), "3".into(), "--radius".into(), "0.2".into()]),
        ("simulate", "simulate --radius 0.4 --samples 100000 --seed 5".split(' ').map(String::from).collect()),
        ("simulate-3d", "simulate --dim 3 --radius 0.3 --measure map --samples 40000".split(' ').map(String::from).collect()),
        ("tailfit", vec!["tailfit".into(), "--input".into(), curve.clone(), "--window".into(), "10,1e3".into()]),
        ("diffusion", "diffusion --radius 0.4 --trajectories 2000 --collisions 100".split(' ').map(String::from).collect()),
        (
            "verify",
            "verify --radius 0.4 --samples 100000 --trajectories 600 --collisions 100 --flow-window 3,300 --map-window 2,100"
                .split(' ')
                .map(String::from)
                .collect(),
        ),
    ];
    let takes_workers = |name: &str| !matches!(name, "corridors" | "tailfit");
    let mut differing = BTreeSet::new();
    let mut runs = 0;
    for (name, args) in &commands {
        let mut reference: Option<(Vec<u8>, Vec<u8>, Vec<u8>)> = None;
        for w in ["1", "4", "16"] {
            for via_env in [false, true] {
                if !via_env && !takes_workers(name) {
                    continue;
                }
                let out = d(&format!("{name}-{w}-{via_env}.out"));
                let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
                full.extend(["--output", &out]);
                if !via_env {
                    full.extend(["--workers", w]);
                }
                let o = run_cli(&full, via_env.then_some(w));
                runs += 1;
                let triple = (o.stdout.clone(), o.stderr.clone(), std::fs::read(&out).unwrap_or_default());
                if o.status.code() != Some(0) && *name != "verify" {
                    differing.insert(format!("{name} exit {:?}", o.status.code()));
                }
                match &reference {
                    None => reference = Some(triple),
                    Some(r) if *r != triple => {
                        differing.insert(name.to_string());
                    }
                    _ => {}
                }
            }
        }
    }
    (
        differing.is_empty(),
        format!("{} commands x workers {{1, 4, 16}} via flag and env, {runs} runs; differing {differing:?}", commands.len()),
    )
}

fn ac9() -> Outcome {
    let reach = 20.0;
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    for i in 0..10_000u64 {
        let spec = LatticeSpec::cubic(2, if i % 2 == 0 { 0.2 } else { 0.4 });
        let measure = if i % 4 < 2 { Measure::Flow } else { Measure::Map };
        let lat = Lattice::<2>::new(&spec).unwrap();
        let state = sample_state(&lat, measure, SeedPlan::new(0xAC9, i)).unwrap();
        let f = free_flight(&lat, &state, reach).unwrap();
        match naive_flight(&spec, &lat.position(&state), &state.velocity, reach) {
            Some((t, _)) if !f.censored => worst = worst.max((f.length - t).abs()),
            None if f.censored => {}
            _ => disagreements += 1,
        }
    }

    // Retracing is gated on the r = 0.4 lattice. At r = 0.2 the per-collision
    // stretching factor (~20-30) exceeds the working precision over 100
    // collisions, so that pass fraction is reported only.
    let retraces = |r: f64, count: u64| -> (f64, usize) {
        let spec = LatticeSpec::cubic(2, r);
        let lat = Lattice::<2>::new(&spec).unwrap();
        let wide = Lattice::<2, Wide>::new(&spec).unwrap();
        let mut worst: f64 = 0.0;
        let mut passing = 0;
        for i in 0..count {
            let measure = if i % 2 == 0 { Measure::Flow } else { Measure::Map };
            let mut start = sample_state(&lat, measure, SeedPlan::new(0x9AC, i)).unwrap().convert::<Wide>();
            start.normalize_velocity();
            let r = retrace(&wide, &start, 100, Wide::from_f64(1e7)).expect("retrace");
            let defect = r.defect.to_f64() / r.path_length.to_f64();
            worst = worst.max(defect);
            passing += usize::from(defect < 1e-6);
        }
        (worst, passing)
    };
    let (worst_retrace, _) = retraces(0.4, 1_000);
    let (_, thin_passing) = retraces(0.2, 200);

    // Informational: collision count at which plain f64 stops retracing.
    let mut horizon = 0;
    for n in [4usize, 8, 12, 16, 20, 24, 32] {
        let passing = (0..100u64)
            .filter(|&i| {
                let lat = Lattice::<2>::new(&LatticeSpec::cubic(2, 0.4)).unwrap();
                let start = sample_state(&lat, Measure::Map, SeedPlan::new(0x9AD, i)).unwrap();
                retrace(&lat, &start, n, 1e7).is_ok_and(|r| r.defect / r.path_length < 1e-6)
            })
            .count();
        if passing >= 50 {
            horizon = n;
        }
    }

    let ok = disagreements == 0 && worst < 1e-9 && worst_retrace < 1e-6;
    (
        ok,
        format!(
            "1e4 flights: max |dt| {worst:.2e}, hit/censor disagreements {disagreements}; \
             1e3 extended-precision retraces of 100 collisions at r = 0.4: max relative defect {worst_retrace:.2e}; \
             r = 0.2 retraces within 1e-6: {thin_passing}/200 (info); f64 retraces hold to ~{horizon} collisions (info)"
        ),
    )
}

fn ac10() -> Outcome {
    let spec = LatticeSpec::cubic(3, 0.3);
    let theory = tail_constants(&enumerate_corridors(&spec).unwrap());
    let stats = flights(spec, Measure::Flow, 100_000_000, 10);
    match (fit(&stats, ExponentMode::Free, FLOW_WINDOW), fit(&stats, ExponentMode::Fixed(-1.0), FLOW_WINDOW)) {
        (Ok(free), Ok(fixed)) => (
            (free.exponent + 1.0).abs() < 0.15,
            format!(
                "free exponent {:.4} ± {:.4} (tol ±0.15); fixed-exponent constant {:.5} vs slab sum {:.5} \
                 (first_order = {}, non-gating)",
                free.exponent, free.stderr_exponent, fixed.constant, theory.c_flow, theory.first_order
            ),
        ),
        (a, b) => (false, format!("fit failed: {:?} / {:?}", a.err(), b.err())),
    }
}

fn main() {
    let only: Option<BTreeSet<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().is_none_or(|s| s.contains(&k));
    let mut failed = Vec::new();
    let mut report = |k: u32, run: &dyn Fn() -> Outcome| {
        if !wanted(k) {
            return;
        }
        let start = Instant::now();
        let (ok, detail) = run();
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("AC-{k} {verdict}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
        if !ok {
            failed.push(k);
        }
    };
    report(1, &ac1);
    report(2, &ac2);
    // AC-3..5 share one pair of runs; AC-3's timing includes them.
    let tail = std::cell::OnceCell::new();
    report(3, &|| ac3(tail.get_or_init(planar_tail)));
    report(4, &|| ac4(tail.get_or_init(planar_tail)));
    report(5, &|| ac5(tail.get_or_init(planar_tail)));
    report(6, &ac6);
    report(7, &ac7);
    report(8, &ac8);
    report(9, &ac9);
    report(10, &ac10);
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
