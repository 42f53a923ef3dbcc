//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs the built-in scenarios at full size (except the grid-mode
//! comparison, which uses a shorter horizon).

use std::process::ExitCode;
use std::time::Instant;

use updown::decomposition::corollary_identity;
use updown::exec::Execution;
use updown::harness::{evaluate, lookup, reference_down, Criterion, Evaluation, RunConfig};
use updown::sim::SimMode;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn full(name: &str) -> RunConfig {
    lookup(name).expect("built-in scenario")
}

fn run(cfg: &RunConfig) -> Evaluation {
    evaluate(cfg, Execution::Parallel).unwrap_or_else(|e| panic!("{}: {e}", cfg.name))
}

fn z(c: &Criterion) -> f64 {
    match (c.value, c.se) {
        (Some(v), Some(se)) if se > 0.0 => (v - c.target).abs() / se,
        _ => f64::NAN,
    }
}

/// Checks every record of `family` at the given α values (all when empty).
fn family(ev: &Evaluation, family: &str, alphas: &[f64]) -> (bool, String) {
    let picked: Vec<&Criterion> = ev
        .criteria_named(family)
        .filter(|c| alphas.is_empty() || c.alpha.is_some_and(|a| alphas.contains(&a)))
        .collect();
    let expected = if alphas.is_empty() { 1 } else { alphas.len() };
    if picked.len() < expected {
        return (false, format!("{family}: {} of {expected} records present", picked.len()));
    }
    let failed: Vec<String> = picked.iter().filter(|c| !c.pass).map(|c| c.describe()).collect();
    let worst = picked.iter().map(|c| z(c)).fold(0.0, f64::max);
    let detail = format!(
        "{}: {}/{} within tolerance, max |value-target|/se = {worst:.2}{}",
        ev.config.name,
        picked.len() - failed.len(),
        picked.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(" | ")) }
    );
    (failed.is_empty(), detail)
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let ev = run(&full("A"));
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = family(&ev, "pk_match", &[0.25, 0.5, 1.0, 2.0]);
    let values: Vec<String> = ev.time_avg.values.iter().map(|v| format!("{v:.6}")).collect();
    Outcome {
        id: "AC1 generalized PK transform (scenario A)",
        pass: ok && secs < 120.0,
        detail: format!("{detail}; time averages {values:?}; {secs:.1}s"),
    }
}

fn ac2(b: &Evaluation) -> Outcome {
    let (pass, detail) = family(b, "identity", &[0.25, 0.5, 1.0, 2.0]);
    Outcome {
        id: "AC2 decomposition identity residual (scenario B)",
        pass,
        detail,
    }
}

fn ac3(b: &Evaluation) -> Outcome {
    let (emp, detail) = family(b, "corollary", &[0.25, 0.5, 1.0, 2.0]);
    let down = reference_down();
    let worst = (1..=50)
        .map(|j| {
            let a = 0.1 * j as f64;
            let (l, r) = corollary_identity(a, &down, 1.0).expect("r > eta'(0)");
            (l - r).abs()
        })
        .fold(0.0, f64::max);
    Outcome {
        id: "AC3 corollary special case (scenario B + analytic)",
        pass: emp && worst <= 1e-12,
        detail: format!("{detail}; analytic max |lhs-rhs| on 50 points = {worst:.2e}"),
    }
}

fn ac4(b: &Evaluation) -> Outcome {
    let (pass, detail) = family(b, "pm", &[0.5, 1.0, 2.0]);
    Outcome {
        id: "AC4 embedded W+/W- identity (scenario B)",
        pass,
        detail,
    }
}

fn ac5(a: &Evaluation, b: &Evaluation) -> Outcome {
    let (pa, da) = family(a, "martingale", &[0.25, 0.5, 1.0, 2.0]);
    let (pb, db) = family(b, "martingale", &[0.25, 0.5, 1.0, 2.0]);
    let mut short = full("B");
    short.scenario.horizon = 1e4;
    let short = run(&short);
    let mean_abs = |ev: &Evaluation, i: usize| {
        ev.replicas.iter().map(|r| r.martingale[i].value.abs()).sum::<f64>() / ev.replicas.len() as f64
    };
    let mut shrinks = true;
    let mut pairs = Vec::new();
    for (i, &alpha) in b.config.alpha_grid.iter().enumerate().filter(|(_, &a)| a > 0.0) {
        let (long, brief) = (mean_abs(b, i), mean_abs(&short, i));
        shrinks &= long < brief;
        pairs.push(format!("a={alpha}: {long:.2e}<{brief:.2e}"));
    }
    Outcome {
        id: "AC5 martingale residual (scenarios A, B) and its decay",
        pass: pa && pb && shrinks,
        detail: format!("{da}; {db}; mean|R| 1e5 vs 1e4: {}", pairs.join(", ")),
    }
}

fn ac6() -> Outcome {
    let mut exact = full("A");
    exact.scenario.horizon = 2e4;
    exact.replicas = 4;
    let mut grid = exact.clone();
    exact.scenario.mode = SimMode::Exact;
    grid.scenario.mode = SimMode::Grid;
    grid.scenario.grid_step = 1e-3;
    let (e, g) = (run(&exact), run(&grid));
    let diffs: Vec<f64> = e.time_avg.values.iter().zip(&g.time_avg.values).map(|(x, y)| (x - y).abs()).collect();
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    Outcome {
        id: "AC6 exact vs grid sampler (scenario A)",
        pass: worst <= 0.01,
        detail: format!("horizon 2e4, 4 replicas, step 1e-3: max |exact-grid| = {worst:.2e} (limit 0.01)"),
    }
}

fn ac7() -> Outcome {
    let ev = run(&full("E"));
    let (pw, dw) = family(&ev, "w_drift", &[]);
    let (pl, dl) = family(&ev, "l_drift", &[]);
    let l = ev.criteria_named("l_drift").next().expect("l_drift");
    Outcome {
        id: "AC7 instability drift (scenario E, p_d = 0.75)",
        pass: pw && pl,
        detail: format!(
            "W(H)/H {dw}; L(H)/H {dl} (value {:.2e}, absolute floor {})",
            l.value.unwrap_or(f64::NAN),
            l.floor
        ),
    }
}

fn ac8(b: &Evaluation) -> Outcome {
    let (pass, detail) = family(b, "delta", &[0.5, 1.0]);
    let min_periods = b
        .replicas
        .iter()
        .map(|r| r.delta.as_ref().map_or(0.0, |d| d[0].horizon_or_n))
        .fold(f64::INFINITY, f64::min);
    Outcome {
        id: "AC8 per-period martingale (scenario B)",
        pass: pass && min_periods >= 1e4,
        detail: format!("{detail}; fewest down periods in a replica = {min_periods}"),
    }
}

fn main() -> ExitCode {
    let a = run(&full("A"));
    let b = run(&full("B"));
    let outcomes = [ac1(), ac2(&b), ac3(&b), ac4(&b), ac5(&a, &b), ac6(), ac7(), ac8(&b)];
    let mut all = true;
    for o in &outcomes {
        all &= o.pass;
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.detail);
    }
    if all {
        println!("acceptance: {} of {} criteria pass", outcomes.len(), outcomes.len());
        ExitCode::SUCCESS
    } else {
        let failed = outcomes.iter().filter(|o| !o.pass).count();
        println!("acceptance: {failed} of {} criteria fail", outcomes.len());
        ExitCode::FAILURE
    }
}
