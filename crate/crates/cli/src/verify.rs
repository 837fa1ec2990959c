use std::f64::consts::PI;
use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;
use hodge_core::bdm::{classify_problem, model_symbol_check, poisson_symbol_bounds};
use hodge_core::oracle::{
    adjoint_gap_with_tol, closed_form_gap, estimate_ratio_ensemble, random_adjoint_pair, random_mode_datum,
    EnsembleConfig, OracleConfig,
};
use hodge_core::ops::default_dom_tol;
use hodge_core::solvers::ProblemKind;
use hodge_core::strip::norm_sobolev_form;
use hodge_core::symbols::{green_dirichlet_mode, green_of_khat, m1, m2, omega};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Adjoint,
    Oracle,
    Residual,
    Estimate,
    Symbols,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Adjoint => "adjoint",
            Suite::Oracle => "oracle",
            Suite::Residual => "residual",
            Suite::Estimate => "estimate",
            Suite::Symbols => "symbols",
        }
    }
}

/// Per-case metrics: one CSV row each, with a pass flag.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<(Vec<String>, bool)>,
    summary: serde_json::Map<String, serde_json::Value>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
            summary: serde_json::Map::new(),
        }
    }

    fn push(&mut self, row: Vec<String>, pass: bool) {
        self.rows.push((row, pass));
    }

    fn note(&mut self, key: &str, value: serde_json::Value) {
        self.summary.insert(key.into(), value);
    }
}

fn e(v: f64) -> String {
    format!("{v:.6e}")
}

fn kind_name(k: ProblemKind) -> &'static str {
    match k {
        ProblemKind::DirichletType => "dirichlet-type",
        ProblemKind::NeumannType => "neumann-type",
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn symbols() -> Result<Table> {
    let mut t = Table::new(&["case", "value", "tol", "pass"]);
    let check = |t: &mut Table, case: String, value: f64, tol: f64| {
        let pass = value <= tol;
        t.push(vec![case, e(value), e(tol), pass.to_string()], pass);
    };
    for i in 0..200 {
        let b = 10f64.powf(-6.0 + 12.0 * i as f64 / 199.0);
        let ulps = (m2(b) * omega(b) - m1(b)).abs() / (m1(b) * f64::EPSILON);
        check(&mut t, format!("m2*omega-m1 ulps beta={b:.4e}"), ulps, 4.0);
    }
    check(&mut t, "m1(0)-1".into(), (m1(0.0) - 1.0).abs(), 0.0);
    check(&mut t, "m1(1e6)-2/3".into(), (m1(1e6) - 2.0 / 3.0).abs(), 1e-6);
    for beta in [0.5, 1.0, 5.0] {
        let w = omega(beta);
        check(&mut t, format!("green_of_khat(0) beta={beta}"), green_of_khat(beta, 0.0).abs(), 0.0);
        for x in [0.3, 1.0, 2.5] {
            let g = |y: f64| green_dirichlet_mode(beta, x, y) * (-w * y).exp();
            let q = simpson(g, 0.0, x, 2000) + simpson(g, x, x + 80.0 / beta, 40000);
            check(&mut t, format!("green quadrature beta={beta} x={x}"), (q - green_of_khat(beta, x)).abs(), 1e-8);
        }
    }
    let betas: Vec<f64> = (0..25).map(|i| 10f64.powf(-1.0 + 0.2 * i as f64)).collect();
    for b in poisson_symbol_bounds(&betas).into_iter().filter(|b| b.alpha == 0) {
        check(
            &mut t,
            format!("poisson bound spread l={} l'={}", b.ell, b.ell_prime),
            b.max_ratio / b.min_ratio,
            3.0,
        );
    }
    let c = classify_problem();
    let order_class = |n: &str| c.operators.iter().find(|o| o.name == n).map(|o| (o.desc.order, o.desc.class));
    let table_ok = order_class("G") == Some((2.0, Some(2))) && order_class("T") == Some((1.0, Some(3)));
    check(&mut t, "order/class table".into(), if table_ok { 0.0 } else { 1.0 }, 0.0);
    let cond = model_symbol_check(&[1.0, 10.0, 100.0])?;
    check(&mut t, "model system condition".into(), cond, 1e12);
    t.note("classification", serde_json::to_value(&c)?);
    Ok(t)
}

fn adjoint(cfg: &RunConfig) -> Result<Table> {
    let grid = cfg.grid();
    let degree = if cfg.problem.degree > grid.dim { 0 } else { cfg.problem.degree };
    let mut t = Table::new(&["case", "degree", "gap", "scale", "relative_gap", "tol", "pass"]);
    for i in 0..cfg.verify.cases {
        let (u, psi) = random_adjoint_pair(&grid, degree, cfg.seed.wrapping_add(i as u64))?;
        let gap = adjoint_gap_with_tol(&u, &psi, default_dom_tol(&psi))?;
        let scale = norm_sobolev_form(&u, 2) * norm_sobolev_form(&psi, 2);
        let rel = gap / scale;
        let pass = rel <= cfg.tolerances.adjoint;
        t.push(
            vec![i.to_string(), degree.to_string(), e(gap), e(scale), e(rel), e(cfg.tolerances.adjoint), pass.to_string()],
            pass,
        );
    }
    Ok(t)
}

/// Least-squares slope of `log gap` against `log h`.
fn slope(hs: &[f64], gaps: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn oracle(cfg: &RunConfig) -> Result<Table> {
    let finest = cfg.oracle.nodes;
    let mut levels = vec![finest];
    while levels.len() < 4 {
        let last = *levels.last().unwrap();
        if (last - 1) % 2 != 0 || (last - 1) / 2 + 1 < 65 {
            break;
        }
        levels.push((last - 1) / 2 + 1);
    }
    levels.reverse();
    if levels.len() < 2 {
        anyhow::bail!(crate::config::ConfigError(format!(
            "P_oracle = {finest} admits no coarser level with at least 65 nodes"
        )));
    }
    let at = |p: usize| OracleConfig { nodes: p, ..cfg.oracle };
    let fine_grid = at(finest).grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(&["kind", "beta", "nodes", "h", "gap", "observed_order", "slope", "pass"]);
    let period = cfg.grid.period;
    let mut max_gap: f64 = 0.0;
    for kind in [ProblemKind::DirichletType, ProblemKind::NeumannType] {
        for k in [0.0, 1.0, 2.0, 10.0] {
            let beta = 2.0 * PI * k / period;
            let (f, h) = random_mode_datum(&fine_grid, beta, kind, &mut rng);
            let mut hs = Vec::new();
            let mut gaps = Vec::new();
            for &p in &levels {
                let stride = (finest - 1) / (p - 1);
                let fs: Vec<_> = f.iter().step_by(stride).copied().collect();
                gaps.push(closed_form_gap(beta, &fs, h, kind, &at(p))?);
                hs.push(cfg.oracle.depth / (p - 1) as f64);
            }
            max_gap = max_gap.max(*gaps.last().unwrap());
            let s = slope(&hs, &gaps);
            let pass = s >= cfg.tolerances.order;
            for (i, (&p, (&hh, &g))) in levels.iter().zip(hs.iter().zip(&gaps)).enumerate() {
                let observed = if i == 0 { String::new() } else { format!("{:.4}", (gaps[i - 1] / g).log2()) };
                t.push(
                    vec![kind_name(kind).into(), format!("{beta}"), p.to_string(), e(hh), e(g), observed, format!("{s:.4}"), pass.to_string()],
                    pass,
                );
            }
        }
    }
    t.note("max_gap_finest", json!(max_gap));
    t.note("oracle_tol", json!(cfg.oracle.tol));
    t.note("gap_within_oracle_tol", json!(max_gap <= cfg.oracle.tol));
    Ok(t)
}

fn residual(cfg: &RunConfig) -> Result<Table> {
    let (phi, rep) = run::solve(cfg)?;
    let mut t = Table::new(&["metric", "value", "tol", "pass"]);
    let check = |t: &mut Table, name: &str, v: f64, tol: f64| {
        let pass = v <= tol;
        t.push(vec![name.into(), e(v), e(tol), pass.to_string()], pass);
    };
    let tl = &cfg.tolerances;
    check(&mut t, "relative_residual", rep.report.relative_residual, tl.residual);
    check(&mut t, "bc_violation", rep.report.bc_violation, tl.bc * norm_sobolev_form(&phi, 2));
    if let Some(err) = rep.relative_error {
        check(&mut t, "relative_error", err, tl.manufactured);
    }
    t.note("report", serde_json::to_value(&rep)?);
    Ok(t)
}

fn estimate(cfg: &RunConfig) -> Result<Table> {
    let grid = cfg.grid();
    let kinds = match cfg.problem.kind {
        Some(k) => vec![k],
        None => vec![ProblemKind::DirichletType, ProblemKind::NeumannType],
    };
    let mut t = Table::new(&["kind", "instance", "ratio", "pass"]);
    let mut reports = serde_json::Map::new();
    for kind in kinds {
        let r = estimate_ratio_ensemble(&grid, &EnsembleConfig::new(cfg.verify.instances, cfg.seed, kind))?;
        let cap = cfg.tolerances.ratio_cap.unwrap_or(f64::INFINITY);
        for (i, ratio) in r.ratios.iter().enumerate() {
            let pass = ratio.map_or(true, |v| v.is_finite() && v <= cap);
            t.push(
                vec![kind_name(kind).into(), i.to_string(), ratio.map(e).unwrap_or_else(|| "skipped".into()), pass.to_string()],
                pass,
            );
        }
        for f in &r.failures {
            t.push(vec![kind_name(kind).into(), f.clone(), String::new(), "false".into()], false);
        }
        reports.insert(
            kind_name(kind).into(),
            json!({"max": r.max, "median": r.median, "skipped": r.skipped, "failures": r.failures}),
        );
    }
    t.note("ensembles", serde_json::Value::Object(reports));
    Ok(t)
}

/// Runs a suite, writes `verify_<suite>.csv` and `verify_<suite>.json` into
/// `out`, and returns whether every case passed.
pub fn run(suite: Suite, cfg: &RunConfig, out: &Path) -> Result<bool> {
    let table = match suite {
        Suite::Symbols => symbols()?,
        Suite::Adjoint => adjoint(cfg)?,
        Suite::Oracle => oracle(cfg)?,
        Suite::Residual => residual(cfg)?,
        Suite::Estimate => estimate(cfg)?,
    };
    std::fs::create_dir_all(out)?;
    let name = suite.name();
    let mut w = csv::Writer::from_path(out.join(format!("verify_{name}.csv")))?;
    w.write_record(&table.header)?;
    for (row, _) in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    let failing: Vec<serde_json::Value> = table
        .rows
        .iter()
        .filter(|(_, pass)| !pass)
        .map(|(row, _)| {
            let obj: serde_json::Map<_, _> = table
                .header
                .iter()
                .zip(row)
                .map(|(h, v)| (h.to_string(), json!(v)))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let pass = failing.is_empty();
    let mut summary = serde_json::Map::new();
    summary.insert("suite".into(), json!(name));
    summary.insert("cases".into(), json!(table.rows.len()));
    summary.insert("failures".into(), json!(failing.len()));
    summary.insert("pass".into(), json!(pass));
    summary.insert("failing_cases".into(), json!(failing));
    summary.extend(table.summary);
    std::fs::write(
        out.join(format!("verify_{name}.json")),
        serde_json::to_string_pretty(&serde_json::Value::Object(summary))?,
    )?;
    if pass {
        info!("verify {name}: {} cases passed", table.rows.len());
    } else {
        warn!("verify {name}: {} of {} cases failed", failing.len(), table.rows.len());
        for f in &failing {
            eprintln!("failing case: {f}");
        }
    }
    Ok(pass)
}
