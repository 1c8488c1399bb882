//! `run`, `verify` and `batch`.

use crate::cache::{instance_key, OracleCache};
use crate::config::InstanceConfig;
use crate::trace::{Footer, Trace};
use crate::CliError;
use datacompat::oracle::{solution_reference, SweepOptions};
use datacompat::{
    hsm_step, prox_value, run, Certifier, CompatCriteria, Error, Execution, OperatorSpec,
    OracleResult, ProblemInstance, SolverKind,
};
use std::path::{Path, PathBuf};

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub max_iter: Option<usize>,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: InstanceConfig) -> Result<InstanceConfig, CliError> {
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A validated config with its instance and compatibility criteria.
pub struct Prepared {
    pub config: InstanceConfig,
    pub instance: ProblemInstance,
    pub criteria: CompatCriteria,
    /// NaN when the reference was supplied instead of computed.
    pub gamma_star: f64,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<InstanceConfig, CliError> {
    overrides.apply(InstanceConfig::load(path)?)
}

/// Grid oracle for the config, served from `cache` when present there.
pub fn oracle(cfg: &InstanceConfig, instance: &ProblemInstance, cache: Option<&OracleCache>) -> Result<OracleResult, CliError> {
    if let Some(hit) = cache.and_then(|c| c.get(&instance_key(cfg))) {
        return Ok(hit);
    }
    let opts = SweepOptions { value_tol: cfg.oracle_value_tol, exec: Execution::default() };
    solution_reference(instance, cfg.grid_h(), cfg.gamma, opts).map_err(|e| match e {
        Error::EmptyFeasible => CliError::OracleInfeasible(
            "no grid point of the ambient box satisfies the feasibility test; the representative set is empty"
                .into(),
        ),
        e => CliError::Validation(format!("oracle: {e}")),
    })
}

/// Builds the instance and criteria; a computed oracle result is returned
/// for caching.
pub fn prepare(
    config: InstanceConfig,
    cache: Option<&OracleCache>,
) -> Result<(Prepared, Option<OracleResult>), CliError> {
    let instance = config.instance()?;
    let l_bar = instance.lipschitz_bound();
    let simultaneous = matches!(instance.operator().spec(), OperatorSpec::Simultaneous { .. });
    let (reference, gamma_star, computed) = match config.reference_points()? {
        Some(r) => (r, f64::NAN, None),
        None => {
            let o = oracle(&config, &instance, cache)?;
            (o.reference.clone(), o.gamma_star, Some(o))
        }
    };
    let gamma = match config.gamma {
        Some(g) => g,
        None if simultaneous && gamma_star.is_finite() => gamma_star,
        None => 0.0,
    };
    let criteria = CompatCriteria::new(gamma, config.tau, l_bar, reference)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((Prepared { config, instance, criteria, gamma_star }, computed))
}

fn with_cache<T>(
    path: Option<&Path>,
    f: impl FnOnce(Option<&OracleCache>) -> Result<(T, Option<(String, OracleResult)>), CliError>,
) -> Result<T, CliError> {
    let mut cache = path.map(OracleCache::open).transpose()?;
    let (out, fresh) = f(cache.as_ref())?;
    if let (Some(c), Some((key, r))) = (cache.as_mut(), fresh) {
        c.insert(key, &r);
        c.save()?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: Trace,
}

impl RunOutcome {
    pub fn out_index(&self) -> Option<usize> {
        self.trace.footer.out_index
    }

    /// 0 with a defined OUT, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.out_index().is_some() {
            0
        } else {
            3
        }
    }

    pub fn summary(&self) -> String {
        let f = &self.trace.footer;
        match f.out_index {
            Some(k) => format!("K={k} dist_to_S={:.6e} f_gap={:.6e} L_bar={:.6e}", f.dist_to_s, f.f_gap, f.l_bar),
            None => format!(
                "K=undefined after {} iterations (dist_to_S={:.6e} f_gap={:.6e})",
                self.trace.rows.len() - 1,
                f.dist_to_s,
                f.f_gap
            ),
        }
    }
}

pub fn solve(prep: &Prepared, solver: SolverKind) -> Result<RunOutcome, CliError> {
    prep.instance
        .check_solver(solver)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let res = run(solver, &prep.instance, prep.config.start()?, prep.config.max_iter, &prep.criteria)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let footer = Footer {
        out_index: res.report.out_index,
        dist_to_s: res.report.dist_to_s,
        f_gap: res.report.f_gap,
        l_bar: prep.criteria.l_bar,
        gamma_star: prep.gamma_star,
        tau: prep.criteria.tau,
        gamma: prep.criteria.gamma,
        solver,
    };
    Ok(RunOutcome { trace: Trace { dim: prep.instance.dim(), rows: res.trace, footer } })
}

/// Runs `solver` on the config and writes the trace, whether or not OUT is
/// defined.
pub fn run_command(
    config: &Path,
    solver: SolverKind,
    trace: &Path,
    overrides: &Overrides,
    oracle_cache: Option<&Path>,
) -> Result<RunOutcome, CliError> {
    let cfg = load(config, overrides)?;
    let key = instance_key(&cfg);
    let outcome = with_cache(oracle_cache, |cache| {
        let (prep, fresh) = prepare(cfg, cache)?;
        Ok((solve(&prep, solver)?, fresh.map(|r| (key, r))))
    })?;
    outcome.trace.write(trace)?;
    Ok(outcome)
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

fn mismatch(msg: String) -> CliError {
    CliError::Mismatch(msg)
}

/// Replays `trace` against the config and re-derives its certificate.
pub fn check_trace(prep: &Prepared, trace: &Trace) -> Result<(), CliError> {
    let inst = &prep.instance;
    let cfg = &prep.config;
    let footer = &trace.footer;
    if trace.dim != inst.dim() {
        return Err(mismatch(format!("trace has {} coordinates, instance has {}", trace.dim, inst.dim())));
    }
    inst.check_solver(footer.solver).map_err(|e| mismatch(e.to_string()))?;
    let rows = &trace.rows;
    if rows.is_empty() {
        return Err(mismatch("trace has no rows".into()));
    }
    if rows[0].x != cfg.start()? {
        return Err(mismatch("row 0 does not hold the configured starting point".into()));
    }
    let op = inst.operator();
    let f = inst.objective();
    let schedule = inst.schedule();

    // Rows only depend on their predecessor, so they are checked independently.
    let problems = Execution::default().map_range(rows.len(), |i| -> Option<String> {
        let r = &rows[i];
        if r.k != i {
            return Some(format!("row {i} is labelled k={}", r.k));
        }
        if r.x.iter().any(|v| !v.is_finite()) {
            return Some(format!("row {i}: non-finite iterate"));
        }
        let fx = f.evaluate(&r.x).ok()?;
        if !same(fx, r.f) {
            return Some(format!("row {i}: f recorded {} but recomputed {fx}", r.f));
        }
        let prox = prox_value(inst.family(), &r.x).ok()?;
        if !same(prox, r.prox) {
            return Some(format!("row {i}: prox recorded {} but recomputed {prox}", r.prox));
        }
        let alpha = schedule.alpha(i).unwrap_or(f64::NAN);
        if !same(alpha, r.alpha) {
            return Some(format!("row {i}: alpha recorded {} but schedule gives {alpha}", r.alpha));
        }
        if i == 0 {
            return (r.residual != 0.0).then(|| "row 0: residual must be 0".to_string());
        }
        let prev = &rows[i - 1];
        let next = match hsm_step(&prev.x, i - 1, op, f, schedule) {
            Ok(x) => x,
            Err(e) => return Some(format!("row {i}: cannot replay step: {e}")),
        };
        if next != r.x {
            return Some(format!("row {i}: iterate differs from the replayed step"));
        }
        let residual = (&r.x - op.apply(&prev.x).ok()?).norm();
        if !same(residual, r.residual) {
            return Some(format!("row {i}: residual recorded {} but recomputed {residual}", r.residual));
        }
        None
    });
    if let Some(p) = problems.into_iter().flatten().next() {
        return Err(mismatch(p));
    }

    let certifier = Certifier::new(&prep.criteria, f).map_err(|e| CliError::Validation(e.to_string()))?;
    let xs: Vec<_> = rows.iter().map(|r| r.x.clone()).collect();
    let first = certifier
        .out_index(&xs, Execution::default())
        .map_err(|e| mismatch(e.to_string()))?;
    if first != footer.out_index {
        let show = |k: Option<usize>| k.map_or_else(|| "undefined".to_string(), |k| k.to_string());
        return Err(mismatch(format!(
            "recorded K={} but the first compatible row is {}",
            show(footer.out_index),
            show(first)
        )));
    }
    let last = rows.len() - 1;
    match first {
        Some(k) if k != last => {
            return Err(mismatch(format!("trace continues past K={k} to row {last}")));
        }
        None if last != cfg.max_iter && !rows[last].alpha.is_nan() => {
            return Err(mismatch(format!(
                "trace stops at row {last} without OUT, before the budget of {} iterations",
                cfg.max_iter
            )));
        }
        _ => {}
    }
    let check = certifier.check(&rows[last].x).map_err(|e| mismatch(e.to_string()))?;
    for (name, recorded, actual) in [
        ("dist_to_S", footer.dist_to_s, check.dist_to_s),
        ("f_gap", footer.f_gap, check.f_gap),
        ("L_bar", footer.l_bar, prep.criteria.l_bar),
        ("gamma_star", footer.gamma_star, prep.gamma_star),
        ("tau", footer.tau, prep.criteria.tau),
        ("gamma", footer.gamma, prep.criteria.gamma),
    ] {
        if !same(recorded, actual) {
            return Err(mismatch(format!("footer {name} recorded {recorded} but recomputed {actual}")));
        }
    }
    Ok(())
}

pub fn verify_command(
    trace: &Path,
    config: &Path,
    overrides: &Overrides,
    oracle_cache: Option<&Path>,
) -> Result<usize, CliError> {
    let cfg = load(config, overrides)?;
    let key = instance_key(&cfg);
    let trace = Trace::read(trace)?;
    with_cache(oracle_cache, |cache| {
        let (prep, fresh) = prepare(cfg, cache)?;
        check_trace(&prep, &trace)?;
        Ok((trace.rows.len(), fresh.map(|r| (key, r))))
    })
}

#[derive(Debug)]
pub struct BatchItem {
    pub config: PathBuf,
    pub trace: PathBuf,
    pub result: Result<RunOutcome, CliError>,
}

impl BatchItem {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(o) => o.exit_code(),
            Err(e) => e.exit_code(),
        }
    }
}

/// Runs every config concurrently, writing `<out_dir>/<config stem>.csv`.
/// The oracle cache is read once and updated once at the end.
pub fn batch_command(
    configs: &[PathBuf],
    solver: SolverKind,
    out_dir: &Path,
    overrides: &Overrides,
    oracle_cache: Option<&Path>,
) -> Result<Vec<BatchItem>, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut stems: Vec<String> = configs
        .iter()
        .map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let mut sorted = stems.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        // Disambiguate by position so outputs stay per-instance.
        stems = stems.iter().enumerate().map(|(i, s)| format!("{i:03}_{s}")).collect();
    }
    let mut cache = oracle_cache.map(OracleCache::open).transpose()?;
    let jobs: Vec<(PathBuf, PathBuf)> = configs
        .iter()
        .zip(&stems)
        .map(|(c, s)| (c.clone(), out_dir.join(format!("{s}.csv"))))
        .collect();
    let shared = cache.as_ref();
    let results = Execution::default().map_slice(&jobs, |(config, trace)| {
        let attempt = || -> Result<(RunOutcome, Option<(String, OracleResult)>), CliError> {
            let cfg = load(config, overrides)?;
            let key = instance_key(&cfg);
            let (prep, fresh) = prepare(cfg, shared)?;
            let outcome = solve(&prep, solver)?;
            outcome.trace.write(trace)?;
            Ok((outcome, fresh.map(|r| (key, r))))
        };
        attempt()
    });
    let mut items = Vec::with_capacity(jobs.len());
    for ((config, trace), res) in jobs.into_iter().zip(results) {
        let result = res.map(|(outcome, fresh)| {
            if let (Some(c), Some((key, r))) = (cache.as_mut(), fresh) {
                c.insert(key, &r);
            }
            outcome
        });
        items.push(BatchItem { config, trace, result });
    }
    if let Some(c) = cache.as_mut() {
        c.save()?;
    }
    Ok(items)
}
