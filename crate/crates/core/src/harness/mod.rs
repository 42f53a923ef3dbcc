//! Replicated experiments: configuration, execution, reports and their
//! verification.
//!
//! [`evaluate`] simulates the replicas (in parallel when enabled), streams each
//! path through the estimators and turns the pooled statistics into
//! [`Criterion`] records. [`run`] additionally writes the CSV artifacts and
//! `summary.json`; [`verify`] re-checks a written report without simulating.
//!
//! Residual criteria use the spread of per-replica values (`sd/√n`) as their
//! standard error; with a single replica they fall back to the within-path
//! error (batch means, jackknife or first-order propagation).

mod config;
mod registry;
mod report;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{default_alpha_grid, parse_config, ConfigError, RunConfig, Tolerances};
pub use registry::{lookup, reference_down, reference_up, registry, NamedScenario};
pub use report::{verify, Criterion, Summary, Verification};

use crate::decomposition::{
    corollary_identity, decomp_rhs, identity_residual, identity_residual_se, DecompositionInputs,
    DecompositionReport, PmInputs,
};
use crate::error::{io_error, Error, Result};
use crate::estimators::{mean_and_se, LstEstimate, PathStatistics, PathSummary, ResidualStat};
use crate::exec::{try_map_replicas, Execution};
use crate::numfmt::sig12;
use crate::sim::{simulate_replica, DownPeriod, PathEnd, PathObserver, Piece, Tee};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub emit_paths: bool,
    pub execution: Execution,
}

/// Everything computed by a run, before anything is written.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub config: RunConfig,
    pub replicas: Vec<PathSummary>,
    pub time_avg: LstEstimate,
    pub down_conditional: Option<LstEstimate>,
    pub embedded_s: Option<LstEstimate>,
    pub embedded_t: Option<LstEstimate>,
    /// Pooled down fraction and its standard error.
    pub p_d: (f64, f64),
    pub martingale: Vec<ResidualStat>,
    pub delta: Option<Vec<ResidualStat>>,
    pub decomposition: Option<DecompositionReport>,
    pub criteria: Vec<Criterion>,
    pub notes: Vec<String>,
}

impl Evaluation {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn criteria_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Criterion> + 'a {
        self.criteria.iter().filter(move |c| c.criterion == name)
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub evaluation: Evaluation,
    pub summary: Summary,
    pub output_dir: PathBuf,
}

/// Simulates and evaluates without writing anything.
pub fn evaluate(config: &RunConfig, execution: Execution) -> Result<Evaluation> {
    evaluate_inner(config, execution, None)
}

/// Simulates, evaluates and writes the report into `config.output_dir`.
pub fn run(config: &RunConfig, options: RunOptions) -> Result<RunOutcome> {
    config.validate().map_err(config_to_error)?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    let paths_dir = dir.join("paths");
    let emit = if options.emit_paths {
        fs::create_dir_all(&paths_dir).map_err(io_error(&paths_dir))?;
        Some(paths_dir.as_path())
    } else {
        None
    };
    let evaluation = evaluate_inner(config, options.execution, emit)?;
    let summary = write_report(&evaluation, &dir)?;
    Ok(RunOutcome {
        evaluation,
        summary,
        output_dir: dir,
    })
}

/// Writes each replica's skeleton and boundary CSVs without estimating.
pub fn simulate_paths(config: &RunConfig, dir: &Path, execution: Execution) -> Result<Vec<PathBuf>> {
    config.validate().map_err(config_to_error)?;
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let files = try_map_replicas(execution, config.replicas, |r| {
        let path = dir.join(format!("path_{r:03}.csv"));
        let bounds = dir.join(format!("boundaries_{r:03}.csv"));
        let mut writer = SkeletonWriter::create(&path)?;
        let mut periods = PeriodCollector::default();
        simulate_replica(&config.scenario, r, &mut Tee(&mut writer, &mut periods))?;
        writer.finish()?;
        write_boundaries(&bounds, periods.0.iter())?;
        Ok(path)
    })?;
    Ok(files)
}

fn config_to_error(e: ConfigError) -> Error {
    match e {
        ConfigError::Invalid { path, rule } => Error::InvalidParameter { field: path, rule },
        ConfigError::Stability(msg) => Error::Unstable(msg),
        other => Error::InvalidParameter {
            field: "config".into(),
            rule: other.to_string(),
        },
    }
}

fn evaluate_inner(config: &RunConfig, execution: Execution, paths: Option<&Path>) -> Result<Evaluation> {
    config.validate().map_err(config_to_error)?;
    let alphas = &config.alpha_grid;
    let settings = config.estimator_settings();
    let sc = &config.scenario;
    let replicas = try_map_replicas(execution, config.replicas, |r| {
        let mut stats = PathStatistics::new(alphas, &sc.up, &sc.down, sc.horizon, settings)?;
        match paths {
            None => simulate_replica(sc, r, &mut stats)?,
            Some(dir) => {
                let mut writer = SkeletonWriter::create(&dir.join(format!("path_{r:03}.csv")))?;
                simulate_replica(sc, r, &mut Tee(&mut stats, &mut writer))?;
                writer.finish()?;
            }
        }
        let mut summary = stats.finish()?;
        if let Some(dir) = paths {
            let periods = summary.periods.iter().map(|p| &p.period);
            write_boundaries(&dir.join(format!("boundaries_{r:03}.csv")), periods)?;
        }
        summary.periods = Vec::new();
        Ok(summary)
    })?;
    Ok(Aggregator::new(config, replicas).finish())
}

struct Aggregator<'a> {
    config: &'a RunConfig,
    reps: Vec<PathSummary>,
    criteria: Vec<Criterion>,
    notes: Vec<String>,
}

/// `(mean, sd/√n)` of per-replica values, or `(value, fallback)` for one replica.
fn spread(values: &[f64], fallback: f64) -> (f64, f64) {
    match values.len() {
        1 => (values[0], fallback),
        _ => mean_and_se(values),
    }
}

/// Mean of estimates with their within-replica errors combined as independent.
fn pool_lst(ests: &[&LstEstimate]) -> LstEstimate {
    let n = ests.len() as f64;
    let first = ests[0];
    let mut out = LstEstimate {
        alphas: first.alphas.clone(),
        values: vec![0.0; first.alphas.len()],
        std_errors: vec![0.0; first.alphas.len()],
        basis: first.basis,
    };
    for i in 0..out.alphas.len() {
        out.values[i] = ests.iter().map(|e| e.values[i]).sum::<f64>() / n;
        out.std_errors[i] = ests.iter().map(|e| e.std_errors[i].powi(2)).sum::<f64>().sqrt() / n;
    }
    out
}

fn all_ok<T: Clone>(items: impl Iterator<Item = std::result::Result<T, Error>>) -> std::result::Result<Vec<T>, Error> {
    items.collect()
}

impl<'a> Aggregator<'a> {
    fn new(config: &'a RunConfig, reps: Vec<PathSummary>) -> Self {
        Self {
            config,
            reps,
            criteria: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, alpha: Option<f64>, (value, se): (f64, f64), target: f64) {
        self.criteria
            .push(Criterion::new(name, alpha, value, target, se, self.config.tolerances));
    }

    fn positive_alphas(&self) -> Vec<(usize, f64)> {
        self.config
            .alpha_grid
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, a)| a > 0.0)
            .collect()
    }

    fn finish(mut self) -> Evaluation {
        let cfg = self.config;
        let sc = &cfg.scenario;
        let time_avg = pool_lst(&self.reps.iter().map(|r| &r.time_avg).collect::<Vec<_>>());
        let p_d_values: Vec<f64> = self.reps.iter().map(|r| r.occupancy.value).collect();
        let p_d = spread(&p_d_values, self.reps[0].occupancy.std_error);

        if sc.policy.is_up_only() {
            match sc.up.is_stable() {
                true => {
                    for (i, a) in self.positive_alphas() {
                        let target = sc.up.pk_lst(a).expect("stable up process");
                        self.push("pk_match", Some(a), (time_avg.values[i], time_avg.std_errors[i]), target);
                    }
                }
                false => self.notes.push("up process unstable: no PK comparison".into()),
            }
        }

        let martingale: Vec<ResidualStat> = (0..cfg.alpha_grid.len())
            .map(|i| {
                let vals: Vec<f64> = self.reps.iter().map(|r| r.martingale[i].value).collect();
                let (value, std_error) = spread(&vals, self.reps[0].martingale[i].std_error);
                ResidualStat {
                    alpha: cfg.alpha_grid[i],
                    value,
                    horizon_or_n: self.reps[0].martingale[i].horizon_or_n,
                    std_error,
                }
            })
            .collect();
        for (i, a) in self.positive_alphas() {
            let m = martingale[i];
            self.push("martingale", Some(a), (m.value, m.std_error), 0.0);
        }

        let down_conditional = all_ok(self.reps.iter().map(|r| r.down_conditional.clone()));
        let embedded_s = all_ok(self.reps.iter().map(|r| r.embedded_s.clone()));
        let embedded_t = all_ok(self.reps.iter().map(|r| r.embedded_t.clone()));
        let delta = all_ok(self.reps.iter().map(|r| r.delta.clone()));

        let pooled_delta = match (&delta, sc.down.is_zero()) {
            (Ok(per_rep), false) => Some(
                (0..cfg.alpha_grid.len())
                    .map(|i| {
                        let stats: Vec<ResidualStat> = per_rep.iter().map(|d| d[i]).collect();
                        let total: f64 = stats.iter().map(|s| s.horizon_or_n).sum();
                        let value = stats.iter().map(|s| s.value * s.horizon_or_n).sum::<f64>() / total;
                        let se = stats
                            .iter()
                            .map(|s| (s.std_error * s.horizon_or_n).powi(2))
                            .sum::<f64>()
                            .sqrt()
                            / total;
                        ResidualStat {
                            alpha: cfg.alpha_grid[i],
                            value,
                            horizon_or_n: total,
                            std_error: se,
                        }
                    })
                    .collect::<Vec<_>>(),
            ),
            _ => None,
        };
        if let Some(d) = &pooled_delta {
            for (i, a) in self.positive_alphas() {
                self.push("delta", Some(a), (d[i].value, d[i].std_error), 0.0);
            }
        }

        let decomposition = match (&down_conditional, sc.down.is_zero()) {
            (_, true) => None,
            (Err(e), false) => {
                self.notes.push(format!("decomposition skipped: {e}"));
                None
            }
            (Ok(wd), false) => self.decomposition(&time_avg, wd, p_d, &embedded_s, &embedded_t),
        };

        if let Some(nominal) = sc.nominal_down_fraction() {
            let bound = sc.down_fraction_bound();
            if nominal > bound {
                let drift = nominal * sc.down.eta_prime0() - (1.0 - nominal) * sc.up.phi_prime0();
                // whole-horizon ratios W(H)/H and L(H)/H
                let w: Vec<f64> = self.reps.iter().map(|r| r.end.w / sc.horizon).collect();
                let l: Vec<f64> = self.reps.iter().map(|r| r.end.l / sc.horizon).collect();
                self.push("w_drift", None, spread(&w, self.reps[0].w_drift.std_error), drift);
                self.push("l_drift", None, spread(&l, self.reps[0].l_drift.std_error), 0.0);
            }
        }

        let pooled = |r: std::result::Result<Vec<LstEstimate>, Error>| {
            r.ok().map(|v| pool_lst(&v.iter().collect::<Vec<_>>()))
        };
        Evaluation {
            config: cfg.clone(),
            time_avg,
            down_conditional: pooled(down_conditional),
            embedded_s: pooled(embedded_s),
            embedded_t: pooled(embedded_t),
            p_d,
            martingale,
            delta: pooled_delta,
            decomposition,
            criteria: self.criteria,
            notes: self.notes,
            replicas: self.reps,
        }
    }

    /// Identity, decomposition, corollary and W₊/W₋ checks.
    fn decomposition(
        &mut self,
        time_avg: &LstEstimate,
        wd: &[LstEstimate],
        p_d: (f64, f64),
        embedded_s: &std::result::Result<Vec<LstEstimate>, Error>,
        embedded_t: &std::result::Result<Vec<LstEstimate>, Error>,
    ) -> Option<DecompositionReport> {
        let cfg = self.config;
        let (up, down) = (cfg.scenario.up, cfg.scenario.down);
        let n = self.reps.len();
        let pooled_wd = pool_lst(&wd.iter().collect::<Vec<_>>());
        let pooled = match DecompositionInputs::new(up, down, p_d.0, p_d.1, pooled_wd) {
            Ok(p) => p,
            Err(e) => {
                self.notes.push(format!("decomposition skipped: {e}"));
                return None;
            }
        };
        // a single replica's p_d varies by √n pooled standard errors
        let rep_p_se = p_d.1 * (n as f64).sqrt();
        let inputs: Vec<DecompositionInputs> = match self
            .reps
            .iter()
            .zip(wd)
            .map(|(r, w)| DecompositionInputs::new(up, down, r.occupancy.value, rep_p_se, w.clone()))
            .collect::<Result<Vec<_>>>()
        {
            Ok(v) => v,
            Err(e) => {
                self.notes.push(format!("decomposition skipped for a replica: {e}"));
                return None;
            }
        };
        let r = up.drift;
        let corollary_form = !up.is_stable()
            || cfg.alpha_grid.iter().all(|&a| {
                (up.phi_unchecked(a) - (a * r - down.eta_unchecked(a))).abs() <= 1e-12 * (1.0 + a)
            });
        let pm_ready = match (embedded_s, embedded_t) {
            (Ok(s), Ok(t)) => Some((s, t)),
            (Err(e), _) | (_, Err(e)) => {
                self.notes.push(format!("W+/W- check skipped: {e}"));
                None
            }
        };

        let k = cfg.alpha_grid.len();
        let mut report = DecompositionReport {
            alphas: cfg.alpha_grid.clone(),
            empirical: time_avg.values.clone(),
            predicted: vec![f64::NAN; k],
            identity_residuals: vec![0.0; k],
            pm_residuals: vec![f64::NAN; k],
            std_errors: vec![0.0; k],
            pass: vec![true; k],
        };
        for (i, &a) in cfg.alpha_grid.iter().enumerate() {
            report.predicted[i] = decomp_rhs(a, &pooled).unwrap_or(f64::NAN);
            if a == 0.0 {
                continue;
            }
            let phi = up.phi_unchecked(a);
            let mut ident = Vec::with_capacity(n);
            let mut gap = Vec::with_capacity(n);
            let mut coroll = Vec::with_capacity(n);
            for (rep, inp) in self.reps.iter().zip(&inputs) {
                let w = rep.time_avg.values[i];
                ident.push(identity_residual(a, inp, w).unwrap_or(f64::NAN));
                gap.push(w - decomp_rhs(a, inp).unwrap_or(f64::NAN));
                let pl = inp.pi_ell();
                let pk = up.pk_lst(a).unwrap_or(f64::NAN);
                coroll.push(w - pk * (pl + (1.0 - pl) * inp.lst_wd.values[i]));
            }
            let single_se = identity_residual_se(a, &inputs[0], self.reps[0].time_avg.std_errors[i]).unwrap_or(f64::NAN);
            let id = spread(&ident, single_se);
            self.push("identity", Some(a), id, 0.0);
            report.pass[i] = self.criteria.last().is_some_and(|c| c.pass);
            self.push("decomposition", Some(a), spread(&gap, single_se / phi), 0.0);
            if corollary_form {
                self.push("corollary", Some(a), spread(&coroll, single_se / phi), 0.0);
            }
            report.identity_residuals[i] = id.0;
            report.std_errors[i] = id.1;

            if let Some((s, t)) = pm_ready {
                let mut pm = Vec::with_capacity(n);
                let mut first_se = f64::NAN;
                for (j, rep) in self.reps.iter().enumerate() {
                    let (Ok(plus), Ok(minus)) = (&rep.mean_w_plus, &rep.mean_w_minus) else {
                        continue;
                    };
                    let input = PmInputs {
                        lst_w_minus: (t[j].values[i], t[j].std_errors[i]),
                        lst_w_plus: (s[j].values[i], s[j].std_errors[i]),
                        ew_minus: (minus.value, minus.std_error),
                        ew_plus: (plus.value, plus.std_error),
                        lst_wd: (wd[j].values[i], wd[j].std_errors[i]),
                    };
                    pm.push(input.residual(a, &down).unwrap_or(f64::NAN));
                    if j == 0 {
                        first_se = input.residual_se(a, &down).unwrap_or(f64::NAN);
                    }
                }
                let stat = spread(&pm, first_se);
                report.pm_residuals[i] = stat.0;
                self.push("pm", Some(a), stat, 0.0);
            }
        }
        if let Some(&a) = cfg.alpha_grid.iter().find(|&&a| a > 0.0) {
            if corollary_form && up.is_stable() {
                // analytic identity, independent of the simulation
                let grid: Vec<f64> = (1..=50).map(|j| a * j as f64 / 10.0).collect();
                let worst = grid
                    .iter()
                    .map(|&x| corollary_identity(x, &down, r).map_or(f64::NAN, |(l, rr)| (l - rr).abs()))
                    .fold(0.0, f64::max);
                self.criteria.push(Criterion::new(
                    "corollary_analytic",
                    None,
                    worst,
                    0.0,
                    0.0,
                    Tolerances {
                        se_multiplier: cfg.tolerances.se_multiplier,
                        abs_floor: 1e-12,
                    },
                ));
            }
        }
        Some(report)
    }
}

const TIME_AVG_CSV: &str = "lst_time_average.csv";
const DOWN_COND_CSV: &str = "lst_down_conditional.csv";
const EMBEDDED_S_CSV: &str = "lst_embedded_S.csv";
const EMBEDDED_T_CSV: &str = "lst_embedded_T.csv";
const DECOMPOSITION_CSV: &str = "decomposition.csv";

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_error(path))
}

fn write_with<F>(dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let mut out = create(&path)?;
    f(&mut out).and_then(|_| out.flush()).map_err(io_error(&path))
}

/// Writes CSV artifacts and `summary.json`; returns the summary.
pub fn write_report(ev: &Evaluation, dir: &Path) -> Result<Summary> {
    let mut alpha_files = Vec::new();
    write_with(dir, TIME_AVG_CSV, |o| ev.time_avg.write_csv(o))?;
    alpha_files.push(TIME_AVG_CSV.to_string());
    for (est, name) in [
        (&ev.down_conditional, DOWN_COND_CSV),
        (&ev.embedded_s, EMBEDDED_S_CSV),
        (&ev.embedded_t, EMBEDDED_T_CSV),
    ] {
        if let Some(est) = est {
            write_with(dir, name, |o| est.write_csv(o))?;
            alpha_files.push(name.to_string());
        }
    }
    if let Some(report) = &ev.decomposition {
        write_with(dir, DECOMPOSITION_CSV, |o| report.write_csv(o))?;
        alpha_files.push(DECOMPOSITION_CSV.to_string());
    }
    write_with(dir, "residuals.csv", |o| {
        writeln!(o, "alpha,kind,value,horizon_or_n,std_error")?;
        let rows = ev
            .martingale
            .iter()
            .map(|r| ("martingale", r))
            .chain(ev.delta.iter().flatten().map(|r| ("delta", r)));
        for (kind, r) in rows {
            writeln!(
                o,
                "{},{kind},{},{},{}",
                sig12(r.alpha),
                sig12(r.value),
                sig12(r.horizon_or_n),
                sig12(r.std_error)
            )?;
        }
        Ok(())
    })?;
    write_with(dir, "replicas.csv", |o| {
        writeln!(o, "replica,p_d,w_drift,l_drift,completed_periods,W_end,L_end")?;
        for (i, r) in ev.replicas.iter().enumerate() {
            writeln!(
                o,
                "{i},{},{},{},{},{},{}",
                sig12(r.occupancy.value),
                sig12(r.w_drift.value),
                sig12(r.l_drift.value),
                r.completed_periods,
                sig12(r.end.w),
                sig12(r.end.l)
            )?;
        }
        Ok(())
    })?;
    let cfg = &ev.config;
    let summary = Summary {
        name: cfg.name.clone(),
        seed: cfg.scenario.seed,
        replicas: cfg.replicas,
        horizon: cfg.scenario.horizon,
        alphas: cfg.alpha_grid.clone(),
        alpha_files,
        notes: ev.notes.clone(),
        criteria: ev.criteria.clone(),
        pass: ev.pass(),
    };
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&path, text + "\n").map_err(io_error(&path))?;
    Ok(summary)
}

/// Streams `t,W,L,J` rows to a file.
struct SkeletonWriter {
    path: PathBuf,
    out: BufWriter<File>,
    failed: Option<std::io::Error>,
    wrote_any: bool,
}

impl SkeletonWriter {
    fn create(path: &Path) -> Result<Self> {
        let mut out = create(path)?;
        writeln!(out, "t,W,L,J").map_err(io_error(path))?;
        Ok(Self {
            path: path.to_path_buf(),
            out,
            failed: None,
            wrote_any: false,
        })
    }

    fn row(&mut self, t: f64, w: f64, l: f64, j: bool) {
        if self.failed.is_none() {
            let res = writeln!(self.out, "{},{},{},{}", sig12(t), sig12(w), sig12(l), j as u8);
            self.failed = res.err();
        }
    }

    fn finish(mut self) -> Result<()> {
        match self.failed.take() {
            Some(e) => Err(io_error(&self.path)(e)),
            None => self.out.flush().map_err(io_error(&self.path)),
        }
    }
}

impl PathObserver for SkeletonWriter {
    fn piece(&mut self, p: &Piece) {
        self.wrote_any = true;
        self.row(p.t, p.w, p.l, p.down);
    }

    fn end(&mut self, e: &PathEnd) {
        if self.wrote_any {
            self.row(e.t, e.w, e.l, e.down);
        }
    }
}

#[derive(Default)]
struct PeriodCollector(Vec<DownPeriod>);

impl PathObserver for PeriodCollector {
    fn piece(&mut self, _: &Piece) {}

    fn down_period(&mut self, p: &DownPeriod) {
        self.0.push(*p);
    }
}

fn write_boundaries<'p>(path: &Path, periods: impl Iterator<Item = &'p DownPeriod>) -> Result<()> {
    let mut out = create(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(out, "k,T_prev,S_k,W_at_T_prev,W_at_S_k")?;
        for p in periods.filter(|p| p.is_complete()) {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.k,
                sig12(p.start),
                sig12(p.end.unwrap_or(f64::NAN)),
                sig12(p.w_start),
                sig12(p.w_end.unwrap_or(f64::NAN))
            )?;
        }
        out.flush()
    };
    body().map_err(io_error(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, horizon: f64, replicas: u64) -> RunConfig {
        let mut cfg = lookup(name).unwrap();
        cfg.scenario.horizon = horizon;
        cfg.replicas = replicas;
        cfg
    }

    #[test]
    fn evaluation_is_deterministic_and_schedule_independent() {
        let cfg = small("B", 2_000.0, 4);
        let a = evaluate(&cfg, Execution::Parallel).unwrap();
        let b = evaluate(&cfg, Execution::Sequential).unwrap();
        assert_eq!(a.criteria, b.criteria);
        assert_eq!(a.time_avg, b.time_avg);
    }

    #[test]
    fn families_follow_the_scenario() {
        let names = |ev: &Evaluation| {
            let mut v: Vec<String> = ev.criteria.iter().map(|c| c.criterion.clone()).collect();
            v.dedup();
            v
        };
        let a = evaluate(&small("A", 2_000.0, 2), Execution::Parallel).unwrap();
        assert_eq!(names(&a), vec!["pk_match", "martingale"]);
        let b = evaluate(&small("B", 2_000.0, 2), Execution::Parallel).unwrap();
        for fam in ["martingale", "delta", "identity", "decomposition", "corollary", "pm", "corollary_analytic"] {
            assert!(b.criteria_named(fam).next().is_some(), "{fam} missing");
        }
        let e = evaluate(&small("E", 2_000.0, 2), Execution::Parallel).unwrap();
        assert!(e.criteria_named("w_drift").next().is_some());
        assert!(e.criteria_named("identity").next().is_none());
        assert!(!e.notes.is_empty());
    }

    #[test]
    fn zero_horizon_is_rejected_before_simulating() {
        let cfg = small("A", 0.0, 2);
        assert!(matches!(evaluate(&cfg, Execution::Parallel), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn run_writes_a_verifiable_report() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small("D", 3_000.0, 3);
        cfg.output_dir = dir.path().to_path_buf();
        let out = run(&cfg, RunOptions { emit_paths: true, ..RunOptions::default() }).unwrap();
        let check = verify(dir.path()).unwrap();
        assert_eq!(check.pass(), out.summary.pass);
        assert!(check.altered_flags.is_empty());
        assert!(dir.path().join("paths/path_002.csv").exists());
        assert!(dir.path().join("paths/boundaries_000.csv").exists());
        for f in &out.summary.alpha_files {
            assert!(dir.path().join(f).exists());
        }
    }

    #[test]
    fn simulate_paths_matches_run_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small("B", 200.0, 2);
        cfg.output_dir = dir.path().join("run");
        run(&cfg, RunOptions { emit_paths: true, ..RunOptions::default() }).unwrap();
        let files = simulate_paths(&cfg, &dir.path().join("sim"), Execution::Sequential).unwrap();
        assert_eq!(files.len(), 2);
        for name in ["path_001.csv", "boundaries_001.csv"] {
            let a = fs::read(dir.path().join("run/paths").join(name)).unwrap();
            let b = fs::read(dir.path().join("sim").join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }
}
