//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use relaybeam::config::{Adaptive, ExperimentConfig};
use relaybeam::report::gap_at_bler;
use relaybeam_core::beamsolver::{oracle_grid, solve_no_dl, solve_no_dl_detailed};
use relaybeam_core::channel::{sample_disk_placement, sample_rayleigh, ChannelRealization, Topology};
use relaybeam_core::dlsolver::{solve_dl_both, solve_dl_second, IterationControl};
use relaybeam_core::feedback::{apply_all, encode_index_list, encode_threshold, FeedbackMessage};
use relaybeam_core::montecarlo::{diversity_slope, BlerCurve, Scheme};
use relaybeam_core::{PowerBudget, RngSeed};

const SEED: u64 = 20_240_601;
const WORKERS: usize = 4;
const FLOAT_SLACK: f64 = 1e-12;

// Criterion 1
const C1_DRAWS: usize = 10_000;
const C1_GRID_STEP: f64 = 1e-2;
const C1_REL_TOL: f64 = 1e-3;
// Criterion 2
const C2_DRAWS: usize = 100_000;
const C2_RECURSION_TOL: f64 = 1e-9;
// Criteria 3 and 4
const GAP_TRIALS: u64 = 1_000_000;
const C3_BEST_RELAY: (f64, f64) = (1.5, 2.5);
const C3_LARSSON: (f64, f64) = (0.2, 0.8);
const C4_BEST_RELAY: (f64, f64) = (3.0, 4.0);
const C4_LARSSON: (f64, f64) = (1.0, 2.0);
// Criterion 5
const SLOPE_WINDOW: (f64, f64) = (20.0, 30.0);
const SLOPE_MIN_TRIALS: u64 = 1_000_000;
const SLOPE_MIN_ERRORS: u64 = 50;
const DIVERSITY_2: (f64, f64) = (1.7, 2.3);
const DIVERSITY_1: (f64, f64) = (0.7, 1.3);
// Criterion 6
const TRIANGLE_TRIALS: u64 = 1_000_000;
const C6_BOTH_OVER_FIRST: (f64, f64) = (0.5, 1.5);
const C6_FIRST_OVER_SECOND: (f64, f64) = (0.0, 0.5);
const C6_FIXED_SECOND_1E2: (f64, f64) = (2.0, 4.0);
const C6_FIXED_SECOND_1E3: (f64, f64) = (4.5, 7.5);
const C6_FIXED_BOTH: (f64, f64) = (1.0, 2.0);
// Criterion 7
const C7_DRAWS: u64 = 1_000;
const C7_SCAN: usize = 1000;
const C7_REL_TOL: f64 = 1e-3;
// Criterion 8
const C8_DRAWS: usize = 10_000;
const C8_TOL: f64 = 1e-9;
// Criterion 9
const C9_SAMPLES: u64 = 100_000;
const C9_RADIUS: f64 = 0.5;
/// Asymptotic Kolmogorov critical value at the 1% level.
const KS_1PCT: f64 = 1.627_6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(x: Option<f64>, range: (f64, f64)) -> bool {
    x.is_some_and(|v| v >= range.0 && v <= range.1)
}

fn show(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn oracle_equivalence() -> Outcome {
    let budget_for = |r| PowerBudget::uniform(10.0, r).unwrap();
    let (mut worst, mut below, mut far) = (0.0f64, 0, 0);
    for r in [2, 3] {
        let budget = budget_for(r);
        for ch in sample_rayleigh(C1_DRAWS / 2, r, false, RngSeed::new(SEED, r as u64)).unwrap() {
            let exact = solve_no_dl(&ch, &budget).unwrap();
            let grid = oracle_grid(&ch, &budget, C1_GRID_STEP).unwrap();
            if exact.snr < grid.snr * (1.0 - FLOAT_SLACK) {
                below += 1;
            }
            let d = rel(exact.snr, grid.snr);
            worst = worst.max(d);
            if d > C1_REL_TOL {
                far += 1;
            }
        }
    }
    Outcome {
        pass: below == 0 && far == 0,
        detail: format!("{C1_DRAWS} draws, {below} below grid, {far} beyond {C1_REL_TOL:e}, worst rel {worst:.2e}"),
    }
}

fn structural_invariants() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut stream = RngSeed::new(SEED, 100).rng();
    for t in 0..C2_DRAWS {
        let r = 2 + t % 5;
        let ch = sample_rayleigh(1, r, false, RngSeed::new(SEED, 200).trial(t as u64)).unwrap().next().unwrap();
        let relays: Vec<f64> = (0..r).map(|_| 10.0 * (0.1 + stream.uniform())).collect();
        let budget = PowerBudget::new(10.0, relays).unwrap();
        let (alloc, ws) = solve_no_dl_detailed(&ch, &budget).unwrap();
        let n = ws.active_count();
        if alloc.i0 < 1 {
            failures.push(format!("draw {t}: i0 = 0"));
        }
        if !alloc.alpha.iter().all(|a| (0.0..=1.0).contains(a)) {
            failures.push(format!("draw {t}: alpha outside [0, 1]"));
        }
        for &k in &ws.tau {
            for &l in &ws.tau {
                if ws.phi[k] > ws.phi[l] && alloc.alpha[k] < alloc.alpha[l] {
                    failures.push(format!("draw {t}: order violated"));
                }
            }
        }
        if (1..alloc.i0).any(|i| ws.scan_condition(i)) || !ws.scan_condition(alloc.i0) {
            failures.push(format!("draw {t}: i0 is not the first scan hit"));
        }
        if (alloc.i0..n).any(|i| ws.scan_condition(i) && !ws.scan_condition(i + 1)) {
            failures.push(format!("draw {t}: lambda chain broken"));
        }
        let mut sum_a2 = 0.0;
        for i in 0..n {
            let j = ws.tau[i];
            let a2 = ws.a[j] * ws.a[j];
            if i >= 1 {
                let lhs = ws.candidate_snr(i) - ws.candidate_snr(i + 1);
                let gap = ws.phi[j] - 1.0 / ws.lambda[i];
                let rhs = ws.p0 * (1.0 + sum_a2) * a2 / (1.0 + sum_a2 + a2) * gap * gap;
                let scale = ws.candidate_snr(i).max(ws.candidate_snr(i + 1));
                let err = (lhs - rhs).abs() / scale;
                worst = worst.max(err);
                if err > C2_RECURSION_TOL {
                    failures.push(format!("draw {t}: recursion off by {err:.2e}"));
                }
            }
            sum_a2 += a2;
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{C2_DRAWS} draws, {} violations, worst recursion rel {worst:.2e}{}",
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(", first: {f}"))
        ),
    }
}

#[derive(Clone)]
struct Experiment<'a> {
    schemes: &'a [Scheme],
    topology: Topology,
    powers_db: Vec<f64>,
    trials: u64,
    adaptive: Option<Adaptive>,
    workers: usize,
}

impl Experiment<'_> {
    fn config(&self, out: &Path) -> ExperimentConfig {
        ExperimentConfig {
            schemes: self.schemes.to_vec(),
            relay_ratios: vec![1.0; self.topology.relay_count],
            topology: self.topology.clone(),
            powers_db: self.powers_db.clone(),
            trials: self.trials,
            adaptive: self.adaptive,
            seed: SEED,
            workers: Some(self.workers),
            control: IterationControl::default(),
            b1: None,
            output_dir: out.to_path_buf(),
            targets: vec![1e-2, 1e-3],
            slope_window_db: SLOPE_WINDOW,
        }
    }

    fn run(&self, out: &Path) -> Vec<BlerCurve> {
        relaybeam::run(&self.config(out)).expect("simulation failed").curves
    }
}

fn db_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    relaybeam::config::sweep_points(lo, hi, step)
}

fn gap_criterion(relays: usize, best: (f64, f64), larsson: (f64, f64), out: &Path) -> (Outcome, Experiment<'static>) {
    const SCHEMES: [Scheme; 3] = [Scheme::BeamformNoDl, Scheme::BestRelay, Scheme::LarssonAggregate];
    let (lo, hi) = if relays == 2 { (10.0, 20.0) } else { (6.0, 16.0) };
    let exp = Experiment {
        schemes: &SCHEMES,
        topology: Topology::unit_variance(relays),
        powers_db: db_range(lo, hi, 1.0),
        trials: GAP_TRIALS,
        adaptive: None,
        workers: WORKERS,
    };
    let curves = exp.run(out);
    let g_best = gap_at_bler(&curves[0], &curves[1], 1e-3);
    let g_lars = gap_at_bler(&curves[0], &curves[2], 1e-3);
    let outcome = Outcome {
        pass: within(g_best, best) && within(g_lars, larsson),
        detail: format!(
            "at 1e-3: over best-relay {} dB in {best:?}, over larsson {} dB in {larsson:?}",
            show(g_best),
            show(g_lars)
        ),
    };
    (outcome, exp)
}

fn diversity_orders(out: &Path) -> Outcome {
    const SCHEMES: [Scheme; 4] =
        [Scheme::BeamformNoDl, Scheme::AfNoPowerControl, Scheme::BestRelay, Scheme::LarssonAggregate];
    let exp = Experiment {
        schemes: &SCHEMES,
        topology: Topology::unit_variance(2),
        powers_db: db_range(SLOPE_WINDOW.0, SLOPE_WINDOW.1, 2.5),
        trials: SLOPE_MIN_TRIALS,
        adaptive: Some(Adaptive { min_errors: SLOPE_MIN_ERRORS, max_trials: u64::from(u32::MAX) }),
        workers: WORKERS,
    };
    let curves = exp.run(out);
    let mut pass = true;
    let mut parts = Vec::new();
    for (curve, expected) in curves.iter().zip([DIVERSITY_2, DIVERSITY_1, DIVERSITY_2, DIVERSITY_2]) {
        let slope = diversity_slope(curve, SLOPE_WINDOW).ok();
        pass &= within(slope, expected);
        parts.push(format!("{} {} in {expected:?}", curve.scheme, show(slope)));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn triangle_network(out: &Path) -> Outcome {
    const SCHEMES: [Scheme; 4] =
        [Scheme::BeamformDlFirst, Scheme::BeamformDlSecond, Scheme::BeamformDlBoth, Scheme::DlBothFixedSplit];
    const FIXED: [Scheme; 1] = [Scheme::DlSecondFixedSplit];
    let topology = Topology::triangle(1, 2.0);
    let optimized = Experiment {
        schemes: &SCHEMES,
        topology: topology.clone(),
        powers_db: db_range(6.0, 16.0, 1.0),
        trials: TRIANGLE_TRIALS,
        adaptive: None,
        workers: WORKERS,
    }
    .run(&out.join("optimized"));
    let fixed = Experiment {
        schemes: &FIXED,
        topology,
        powers_db: db_range(6.0, 30.0, 1.0),
        trials: TRIANGLE_TRIALS,
        adaptive: Some(Adaptive { min_errors: SLOPE_MIN_ERRORS, max_trials: u64::from(u32::MAX) }),
        workers: WORKERS,
    }
    .run(&out.join("fixed"));
    let [first, second, both, fixed_both] = [&optimized[0], &optimized[1], &optimized[2], &optimized[3]];
    let fixed_second = &fixed[0];

    let checks = [
        ("dl-both over dl-first at 1e-3", gap_at_bler(both, first, 1e-3), C6_BOTH_OVER_FIRST),
        ("dl-first over dl-second at 1e-3", gap_at_bler(first, second, 1e-3), C6_FIRST_OVER_SECOND),
        ("fixed-second slope", diversity_slope(fixed_second, SLOPE_WINDOW).ok(), DIVERSITY_1),
        ("dl-second over fixed-second at 1e-2", gap_at_bler(second, fixed_second, 1e-2), C6_FIXED_SECOND_1E2),
        ("dl-second over fixed-second at 1e-3", gap_at_bler(second, fixed_second, 1e-3), C6_FIXED_SECOND_1E3),
        ("dl-both over fixed-both at 1e-3", gap_at_bler(both, fixed_both, 1e-3), C6_FIXED_BOTH),
    ];
    Outcome {
        pass: checks.iter().all(|(_, v, r)| within(*v, *r)),
        detail: checks.iter().map(|(n, v, r)| format!("{n} {} in {r:?}", show(*v))).collect::<Vec<_>>().join("; "),
    }
}

/// Best value of `objective(a0, a1)` over the uniform `(C7_SCAN + 1)²` grid.
fn dense_scan(p0: f64, p1: f64, f0: f64, f: f64, g: f64, first_branch: bool) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=C7_SCAN {
        let a0 = i as f64 / C7_SCAN as f64;
        let den = 1.0 + a0 * a0 * f * f * p0;
        let direct = (1.0 - a0 * a0).max(0.0).sqrt() * f0;
        let relay = a0 * f * g * (p1 / den).sqrt();
        let noise = g * g * p1 / den;
        let extra = if first_branch { a0 * a0 * p0 * f0 * f0 } else { 0.0 };
        for k in 0..=C7_SCAN {
            let a1 = k as f64 / C7_SCAN as f64;
            let amp = direct + a1 * relay;
            best = best.max(extra + p0 * amp * amp / (1.0 + a1 * a1 * noise));
        }
    }
    best
}

fn dl_solver_validation() -> Outcome {
    let ctrl = IterationControl::default();
    let topology = Topology::triangle(1, 2.0);
    let (mut worst_second, mut worst_both, mut bad) = (0.0f64, 0.0f64, 0);
    for t in 0..C7_DRAWS {
        let p = [1.0, 10.0, 100.0][t as usize % 3];
        let budget = PowerBudget::uniform(p, 1).unwrap();
        let ch = relaybeam_core::channel::realize(&topology, RngSeed::new(SEED, 300).trial(t)).unwrap();
        let (f0, f, g) = (ch.f0_mag().unwrap(), ch.f_mag(0), ch.g_mag(0));
        let second = solve_dl_second(&ch, &budget, f0, &ctrl).unwrap().allocation.snr;
        let both = solve_dl_both(&ch, &budget, f0, &ctrl).unwrap().allocation.snr;
        let e2 = rel(second, dense_scan(p, p, f0, f, g, false));
        let eb = rel(both, dense_scan(p, p, f0, f, g, true));
        worst_second = worst_second.max(e2);
        worst_both = worst_both.max(eb);
        bad += usize::from(e2 > C7_REL_TOL) + usize::from(eb > C7_REL_TOL);
    }
    Outcome {
        pass: bad == 0,
        detail: format!(
            "{C7_DRAWS} draws, worst rel dl-second {worst_second:.2e}, dl-both {worst_both:.2e}, {bad} beyond {C7_REL_TOL:e}"
        ),
    }
}

fn ceil_log2(r: usize) -> u64 {
    let mut bits = 0;
    while (1usize << bits) < r {
        bits += 1;
    }
    bits
}

fn feedback_fidelity() -> Outcome {
    const B1: u32 = 64;
    let (mut worst, mut cost_mismatch, mut fallbacks) = (0.0f64, 0, 0);
    for t in 0..C8_DRAWS {
        let r = 2 + t % 5;
        let ch: ChannelRealization =
            sample_rayleigh(1, r, false, RngSeed::new(SEED, 400).trial(t as u64)).unwrap().next().unwrap();
        let budget = PowerBudget::uniform(10.0, r).unwrap();
        let (alloc, ws) = solve_no_dl_detailed(&ch, &budget).unwrap();
        let f: Vec<f64> = (0..r).map(|j| ch.f_mag(j)).collect();
        let g: Vec<f64> = (0..r).map(|j| ch.g_mag(j)).collect();
        let list = encode_index_list(&alloc, &ws, B1).unwrap();
        let threshold = encode_threshold(&alloc, &ws, B1).unwrap();
        if alloc.i0 as u64 * ceil_log2(r) + u64::from(B1) != list.bit_cost(r) {
            cost_mismatch += 1;
        }
        match threshold {
            FeedbackMessage::Threshold { .. } if threshold.bit_cost(r) != 2 * u64::from(B1) => cost_mismatch += 1,
            FeedbackMessage::Threshold { .. } => {}
            FeedbackMessage::IndexList { .. } => fallbacks += 1,
        }
        for msg in [&list, &threshold] {
            let alpha = apply_all(msg, &f, &g, budget.p0(), budget.relays()).unwrap();
            for (a, b) in alpha.iter().zip(&alloc.alpha) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Outcome {
        pass: worst <= C8_TOL && cost_mismatch == 0 && fallbacks == 0,
        detail: format!(
            "{C8_DRAWS} draws, worst |alpha diff| {worst:.2e}, {cost_mismatch} bit-cost mismatches, {fallbacks} threshold fallbacks"
        ),
    }
}

fn placement_distribution() -> Outcome {
    let mut rho: Vec<f64> = (0..C9_SAMPLES)
        .map(|t| sample_disk_placement(C9_RADIUS, RngSeed::new(SEED, 500).trial(t)).unwrap().rho)
        .collect();
    rho.sort_by(f64::total_cmp);
    let n = rho.len() as f64;
    let cdf = |x: f64| (x / C9_RADIUS).powi(2).clamp(0.0, 1.0);
    let d = rho
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let critical = KS_1PCT / n.sqrt();
    Outcome { pass: d < critical, detail: format!("D = {d:.5}, critical {critical:.5} at n = {C9_SAMPLES}") }
}

fn determinism(exp: &Experiment<'_>, reference: &Path, out: &Path) -> Outcome {
    let single = Experiment { workers: 1, ..exp.clone() };
    single.run(out);
    let mut names: Vec<_> = fs::read_dir(reference).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| fs::read(reference.join(n)).unwrap() != fs::read(out.join(n)).ok().unwrap_or_default())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    Outcome {
        pass: differing.is_empty() && !names.is_empty(),
        detail: format!(
            "{} files compared between {} and 1 workers, {} differ",
            names.len(),
            exp.workers,
            differing.len()
        ),
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut all = true;
    let mut report = |n: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {name}: {verdict} ({}) [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
    };

    report(1, "oracle equivalence", &mut oracle_equivalence);
    report(2, "structural invariants", &mut structural_invariants);
    let mut two_relay = None;
    report(3, "two-relay gaps", &mut || {
        let (o, exp) = gap_criterion(2, C3_BEST_RELAY, C3_LARSSON, &dir.path().join("c3"));
        two_relay = Some(exp);
        o
    });
    report(4, "three-relay gaps", &mut || gap_criterion(3, C4_BEST_RELAY, C4_LARSSON, &dir.path().join("c4")).0);
    report(5, "diversity orders", &mut || diversity_orders(&dir.path().join("c5")));
    report(6, "triangle network", &mut || triangle_network(&dir.path().join("c6")));
    report(7, "direct-link solver validation", &mut dl_solver_validation);
    report(8, "feedback fidelity", &mut feedback_fidelity);
    report(9, "placement distribution", &mut placement_distribution);
    let exp = two_relay.expect("criterion 3 ran");
    report(10, "determinism", &mut || determinism(&exp, &dir.path().join("c3"), &dir.path().join("c10")));

    if !all {
        std::process::exit(1);
    }
}
