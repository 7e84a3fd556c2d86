//! Subcommand implementations.

use std::path::Path;

use anyhow::{anyhow, Result};
use crb_core::diagnostics::{
    error_sweep, fundamental_frequency, max_abs_error, peak_track_error, run_conservation, sweep_slopes,
};
use crb_core::scenario::Sources;
use crb_core::wnl::{ExpansionOrder, Rho2Variant, WnlOptions, WnlSolver};
use crb_core::{CrbSolver, TimeGrid};
use log::info;

use crate::config::{ConfigError, ConservationCfg, Resolved, DEFAULT_CONSERVATION_DT};
use crate::output::{fmt_num, RunOutput};

const FIELD_HEADER: [&str; 4] = ["t", "x", "u", "w"];

fn field_rows(t: f64, x: &[f64], u: &[f64], w: &[f64]) -> Vec<Vec<String>> {
    (0..x.len())
        .map(|j| vec![fmt_num(t), fmt_num(x[j]), fmt_num(u[j]), fmt_num(w[j])])
        .collect()
}

fn rho2_name(v: Rho2Variant) -> &'static str {
    match v {
        Rho2Variant::Gamma => "gamma",
        Rho2Variant::Delta => "delta",
    }
}

/// Runs `body`, finalising the manifest as complete or failed.
fn with_output<F>(dir: &Path, command: &str, r: &Resolved, body: F) -> Result<()>
where
    F: FnOnce(&mut RunOutput) -> Result<()>,
{
    let mut out = RunOutput::start(dir, command, r.echo.clone())?;
    match body(&mut out) {
        Ok(()) => {
            let m = out.finish("complete")?;
            info!("manifest written to {}", m.display());
            Ok(())
        }
        Err(e) => {
            out.finish(&format!("failed: {e}"))?;
            Err(e)
        }
    }
}

/// Direct and weakly-nonlinear snapshots with difference files.
pub fn simulate(r: &Resolved, dir: &Path) -> Result<()> {
    with_output(dir, "simulate", r, |out| {
        let ic = r.initial_condition()?;
        let x = r.grid.nodes();
        let mut direct = CrbSolver::new(&ic, &r.params)?;
        let with_wnl = r.sources == Sources::Both;
        // The primary ρ2 variant plus the alternative for the comparison.
        let alt = match r.rho2 {
            Rho2Variant::Gamma => Rho2Variant::Delta,
            Rho2Variant::Delta => Rho2Variant::Gamma,
        };
        let mut wnl = Vec::new();
        if with_wnl {
            for v in [r.rho2, alt] {
                let opts = WnlOptions {
                    rho2: v,
                    ..WnlOptions::default()
                };
                wnl.push((v, WnlSolver::new(&ic, r.case, &r.params, opts)?));
            }
        }
        let k_sqrt = ExpansionOrder::SqrtEps.index();
        let mut rho2_err = [0.0f64; 2];
        for (i, &t) in r.snapshots.iter().enumerate() {
            direct.advance_to(t, r.dt)?;
            let (u, w) = direct.fields();
            info!("t = {t}: direct snapshot");
            out.csv(&format!("direct_{i:03}.csv"), &FIELD_HEADER, field_rows(t, &x, &u, &w))?;
            for (slot, (variant, solver)) in wnl.iter_mut().enumerate() {
                solver.advance_to(t, r.dt)?;
                let f = solver.assemble();
                let (su, sw) = f.at(ExpansionOrder::ALL[k_sqrt]);
                rho2_err[slot] = max_abs_error(&u, su)?.max(max_abs_error(&w, sw)?);
                if *variant != r.rho2 {
                    continue;
                }
                for &o in &r.orders {
                    let (wu, ww) = f.at(o);
                    let name = o.as_str();
                    out.csv(
                        &format!("wnl_{name}_{i:03}.csv"),
                        &FIELD_HEADER,
                        field_rows(t, &x, wu, ww),
                    )?;
                    let du: Vec<f64> = wu.iter().zip(&u).map(|(a, b)| a - b).collect();
                    let dw: Vec<f64> = ww.iter().zip(&w).map(|(a, b)| a - b).collect();
                    out.csv(
                        &format!("diff_{name}_{i:03}.csv"),
                        &["t", "x", "du", "dw"],
                        field_rows(t, &x, &du, &dw),
                    )?;
                    let e = max_abs_error(&u, wu)?.max(max_abs_error(&w, ww)?);
                    out.note(&format!("max_error.{name}.{i:03}"), fmt_num(e));
                }
            }
        }
        if with_wnl {
            let (primary, other) = (rho2_err[0], rho2_err[1]);
            let outcome = if primary == other {
                "identical".to_string()
            } else if (r.rho2 == Rho2Variant::Gamma) == (primary < other) {
                "gamma variant smaller".to_string()
            } else {
                "discrepancy: delta variant smaller".to_string()
            };
            out.note(
                &format!("rho2.{}.sqrt-eps.final_error", rho2_name(r.rho2)),
                fmt_num(primary),
            );
            out.note(&format!("rho2.{}.sqrt-eps.final_error", rho2_name(alt)), fmt_num(other));
            out.note("rho2.outcome", outcome.clone());
            println!("rho2 comparison at final snapshot: {outcome}");
        }
        Ok(())
    })
}

/// Error sweep and power-law fits.
pub fn sweep(r: &Resolved, dir: &Path) -> Result<()> {
    let cfg = r
        .sweep
        .clone()
        .ok_or_else(|| anyhow!(ConfigError("sweep needs a [sweep] section with an eps list".into())))?;
    let mut distinct = cfg.eps.clone();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(anyhow!(ConfigError(format!(
            "degenerate spread: sweep needs at least 4 distinct eps values, got {}",
            distinct.len()
        ))));
    }
    let dt = cfg.dt.unwrap_or(r.dt);
    with_output(dir, "sweep", r, |out| {
        let opts = WnlOptions {
            rho2: r.rho2,
            ..WnlOptions::default()
        };
        let (spec, grid) = (r.ic_spec.clone(), r.grid);
        let entries = error_sweep(&cfg.eps, |p| spec.build(p, grid), r.case, &r.params, opts, dt)?;
        let names: Vec<String> = ["u", "w"]
            .iter()
            .flat_map(|f| ExpansionOrder::ALL.iter().map(move |o| format!("e_{f}_{}", o.as_str())))
            .collect();
        let mut header = vec!["t"];
        header.extend(names.iter().map(String::as_str));
        for (i, e) in entries.iter().enumerate() {
            let rec = &e.record;
            let rows = (0..rec.t.len()).map(|k| {
                let mut row = vec![fmt_num(rec.t[k])];
                row.extend(rec.u.iter().chain(&rec.w).map(|s| fmt_num(s[k])));
                row
            });
            out.csv(&format!("errors_{i:02}.csv"), &header, rows)?;
        }
        let mut th = vec!["eps", "t_end"];
        th.extend(names.iter().map(|s| &s[2..]));
        let table = entries.iter().map(|e| {
            let mut row = vec![fmt_num(e.eps), fmt_num(e.t_end)];
            row.extend(e.ehat.iter().flatten().map(|v| fmt_num(*v)));
            row
        });
        out.csv("ehat.csv", &th, table)?;
        let slopes = sweep_slopes(&entries)?;
        let mut rows = Vec::new();
        println!("field order      alpha      C");
        for (fi, field) in ["u", "w"].iter().enumerate() {
            for (oi, o) in ExpansionOrder::ALL.iter().enumerate() {
                let s = slopes[fi][oi];
                println!("{field}     {:<9} {:8.4} {:10.4e}", o.as_str(), s.alpha, s.prefactor());
                out.note(&format!("slope.{field}.{}", o.as_str()), format!("{:.6}", s.alpha));
                rows.push(vec![
                    field.to_string(),
                    o.as_str().to_string(),
                    fmt_num(s.alpha),
                    fmt_num(s.prefactor()),
                    fmt_num(s.residual),
                ]);
            }
        }
        out.csv(
            "slopes.csv",
            &["field", "order", "alpha", "prefactor", "residual"],
            rows,
        )?;
        Ok(())
    })
}

/// Conservation series with peak-tracked balance errors.
pub fn conservation(r: &Resolved, dir: &Path) -> Result<()> {
    let cfg = r.conservation.unwrap_or(ConservationCfg {
        dt: DEFAULT_CONSERVATION_DT,
        sample_every: 1,
        skip: 4,
    });
    with_output(dir, "conservation", r, |out| {
        let ic = r.initial_condition()?;
        let tg = TimeGrid::new(cfg.dt, r.t_end, vec![])?;
        let s = run_conservation(&ic, &r.params, &tg, cfg.sample_every)?;
        let rows = (0..s.t.len()).map(|k| {
            [
                s.t[k],
                s.mass[k],
                s.mean_u[k],
                s.energy[k],
                s.energy_lhs[k],
                s.energy_rhs[k],
                s.momentum[k],
                s.momentum_lhs[k],
                s.momentum_rhs[k],
            ]
            .iter()
            .map(|v| fmt_num(*v))
            .collect()
        });
        out.csv(
            "conservation.csv",
            &[
                "t",
                "mass",
                "mean_u",
                "energy",
                "energy_lhs",
                "energy_rhs",
                "momentum",
                "momentum_lhs",
                "momentum_rhs",
            ],
            rows,
        )?;
        let pct = |lhs: &[f64], rhs: &[f64]| match peak_track_error(&s.t, lhs, rhs, cfg.skip) {
            Ok(v) => format!("{v:.6e}"),
            Err(e) => format!("n/a ({e})"),
        };
        let e = pct(&s.energy_lhs, &s.energy_rhs);
        let m = pct(&s.momentum_lhs, &s.momentum_rhs);
        let h = cfg.dt * cfg.sample_every as f64;
        let (f, bin) = fundamental_frequency(&s.mean_u, h, 1e-2);
        println!("energy peak mismatch   {e} %");
        println!("momentum peak mismatch {m} %");
        println!("mass drift             {:.3e}", s.mass_drift());
        println!("mean frequency {f:.6} (bin {bin:.2e}), omega {:.6}", r.params.omega());
        out.note("energy_peak_error_percent", e);
        out.note("momentum_peak_error_percent", m);
        out.note("mass_drift", format!("{:.6e}", s.mass_drift()));
        out.note("mean_frequency", format!("{f:.9}"));
        out.note("frequency_bin", format!("{bin:.9}"));
        out.note("omega", format!("{:.9}", r.params.omega()));
        Ok(())
    })
}
