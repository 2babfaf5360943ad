//! Write study results as CSV tables, SVG figures and a manifest.

use serde_json::json;

use super::config::ExperimentConfig;
use super::emit::{Cell, OutputDir, Table};
use super::stats::histogram;
use super::studies::{Arm, ModelStudy, MultiplierStudy, Sweep, TrotterStudy};
use super::svg::{Plot, Series};
use crate::error::Result;

const RUN_HEADERS: [&str; 17] = [
    "group",
    "cost",
    "restart",
    "seed",
    "iterations",
    "termination",
    "cost_init",
    "cost_final",
    "overlap_init",
    "overlap_final",
    "eigen_index",
    "eigenvalue",
    "degeneracy",
    "overlap_gain",
    "cost_gain",
    "converged",
    "final_gradient_norm",
];

fn push_runs(table: &mut Table, group: &str, arm: &Arm) {
    for (run, rec) in arm.runs.iter().zip(&arm.records) {
        table.push(vec![
            group.into(),
            arm.cost.as_str().into(),
            run.restart.into(),
            run.seed.into(),
            run.iterations.into(),
            run.termination.as_str().into(),
            run.cost_init.into(),
            run.cost_final.into(),
            run.overlap_init.into(),
            run.overlap_final.into(),
            run.eigen_index.into(),
            run.eigenvalue.into(),
            run.degeneracy.into(),
            run.overlap_gain.into(),
            run.cost_gain.into(),
            run.converged.into(),
            rec.final_gradient_norm.into(),
        ]);
    }
}

const SUMMARY_HEADERS: [&str; 13] = [
    "group",
    "cost",
    "runs",
    "converged",
    "convergence_rate",
    "overlap_gain_mean",
    "overlap_gain_se",
    "overlap_gain_undefined",
    "cost_gain_mean",
    "cost_gain_se",
    "cost_gain_undefined",
    "iters_mean",
    "iters_se",
];

fn push_summary(table: &mut Table, group: &str, arm: &Arm) {
    let (o, c) = (&arm.overlap_report, &arm.cost_report);
    let (im, ise) = arm.iteration_stats();
    table.push(vec![
        group.into(),
        arm.cost.as_str().into(),
        o.runs.into(),
        o.converged.into(),
        o.convergence_rate.into(),
        o.mean_gain.into(),
        o.gain_se.into(),
        o.undefined.into(),
        c.mean_gain.into(),
        c.gain_se.into(),
        c.undefined.into(),
        im.into(),
        ise.into(),
    ]);
}

fn seeds_of<'a>(arms: impl Iterator<Item = &'a Arm>) -> Vec<u64> {
    arms.flat_map(|a| a.records.iter().map(|r| r.seed)).collect()
}

/// `runs.csv`, `summary.csv`, `histogram.csv`, `gains.svg`, `manifest.json`.
pub fn write_model_study(out: &mut OutputDir, cfg: &ExperimentConfig, studies: &[ModelStudy]) -> Result<()> {
    let mut runs = Table::new(&RUN_HEADERS);
    let mut summary = Table::new(&SUMMARY_HEADERS);
    let mut hist = Table::new(&["group", "cost", "bin_lo", "bin_hi", "count"]);
    let mut series = Vec::new();
    for study in studies {
        let group = study.model.name();
        for arm in &study.arms {
            push_runs(&mut runs, group, arm);
            push_summary(&mut summary, group, arm);
            let gains: Vec<f64> = arm.overlap_report.gains.iter().flatten().copied().collect();
            let bins = histogram(&gains, -1.0, 1.0, 20);
            for &(lo, hi, count) in &bins {
                hist.push(vec![group.into(), arm.cost.as_str().into(), lo.into(), hi.into(), count.into()]);
            }
            series.push(Series {
                label: format!("{group} {}", arm.cost.as_str()),
                points: bins.iter().map(|&(lo, hi, c)| (0.5 * (lo + hi), c as f64, None)).collect(),
                dashed: arm.cost == crate::cost::CostKind::Unitary,
            });
        }
    }
    out.write_table("runs.csv", &runs)?;
    out.write_table("summary.csv", &summary)?;
    out.write_table("histogram.csv", &hist)?;
    let plot = Plot {
        title: "Overlap gain".into(),
        x_label: "overlap gain".into(),
        y_label: "restarts".into(),
        series,
    };
    out.write_text("gains.svg", &plot.render())?;
    let summary_json: Vec<_> = studies
        .iter()
        .flat_map(|s| {
            s.arms.iter().map(move |a| {
                json!({
                    "model": s.model.name(),
                    "cost": a.cost.as_str(),
                    "convergence_rate": a.overlap_report.convergence_rate,
                    "overlap_gain_mean": a.overlap_report.mean_gain,
                    "cost_gain_mean": a.cost_report.mean_gain,
                })
            })
        })
        .collect();
    let seeds = seeds_of(studies.iter().flat_map(|s| s.arms.iter()));
    out.write_manifest("study-models", cfg, cfg.seed, seeds, json!(summary_json))?;
    Ok(())
}

/// `sweep.csv`, `runs.csv`, `sweep.svg`, `manifest.json`. Rows at
/// `highlight` are flagged in the table and the manifest.
pub fn write_sweep(out: &mut OutputDir, cfg: &ExperimentConfig, study: &str, sweep: &Sweep, highlight: Option<f64>) -> Result<()> {
    let marked = |x: f64| highlight.is_some_and(|h| (x - h).abs() < 1e-9);
    let v = sweep.variable.as_str();
    let mut table = Table::new(&[v, "cost_kind", "runs", "converged", "overlap_mean", "overlap_se", "iters_mean", "iters_se", "highlight"]);
    for p in &sweep.points {
        table.push(vec![
            p.x.into(),
            p.cost.as_str().into(),
            p.runs.into(),
            p.converged.into(),
            p.overlap_mean.into(),
            p.overlap_se.into(),
            p.iters_mean.into(),
            p.iters_se.into(),
            marked(p.x).into(),
        ]);
    }
    out.write_table("sweep.csv", &table)?;
    let mut runs = Table::new(&RUN_HEADERS);
    for (x, arm) in &sweep.arms {
        push_runs(&mut runs, &format!("{v}={x:?}"), arm);
    }
    out.write_table("runs.csv", &runs)?;

    let mut kinds: Vec<_> = sweep.points.iter().map(|p| p.cost).collect();
    kinds.sort_by_key(|k| k.as_str());
    kinds.dedup();
    let series = kinds
        .iter()
        .map(|&kind| Series {
            label: kind.as_str().into(),
            points: sweep.points.iter().filter(|p| p.cost == kind).map(|p| (p.x, p.converged as f64, None)).collect(),
            dashed: kind == crate::cost::CostKind::Unitary,
        })
        .collect();
    let plot = Plot {
        title: format!("Converged restarts against {v}"),
        x_label: v.into(),
        y_label: format!("runs with overlap >= {}", cfg.gamma),
        series,
    };
    out.write_text("sweep.svg", &plot.render())?;
    let seeds = seeds_of(sweep.arms.iter().map(|(_, a)| a));
    let summary: Vec<_> = sweep
        .points
        .iter()
        .map(|p| json!({ v: p.x, "cost": p.cost.as_str(), "converged": p.converged, "runs": p.runs }))
        .collect();
    out.write_manifest(study, cfg, cfg.seed, seeds, json!({ "points": summary, "highlight": highlight }))?;
    Ok(())
}

/// `summary.csv`, `runs.csv`, `multiplier.svg`, `manifest.json`.
pub fn write_multiplier_study(out: &mut OutputDir, cfg: &ExperimentConfig, study: &MultiplierStudy) -> Result<()> {
    let mut runs = Table::new(&RUN_HEADERS);
    let mut summary = Table::new(&SUMMARY_HEADERS);
    for (scale, arm) in &study.arms {
        let group = format!("scale={scale:?}");
        push_runs(&mut runs, &group, arm);
        push_summary(&mut summary, &group, arm);
    }
    out.write_table("runs.csv", &runs)?;
    out.write_table("summary.csv", &summary)?;
    let mut kinds: Vec<_> = study.arms.iter().map(|(_, a)| a.cost).collect();
    kinds.sort_by_key(|k| k.as_str());
    kinds.dedup();
    let series = kinds
        .iter()
        .map(|&kind| Series {
            label: kind.as_str().into(),
            points: study
                .arms
                .iter()
                .filter(|(_, a)| a.cost == kind)
                .map(|(s, a)| (s.log10(), a.overlap_report.convergence_rate, None))
                .collect(),
            dashed: kind == crate::cost::CostKind::Unitary,
        })
        .collect();
    let plot = Plot {
        title: "Convergence against Hamiltonian scale".into(),
        x_label: "log10 scale".into(),
        y_label: "convergence rate".into(),
        series,
    };
    out.write_text("multiplier.svg", &plot.render())?;
    let summary_json: Vec<_> = study
        .arms
        .iter()
        .map(|(s, a)| json!({ "scale": s, "cost": a.cost.as_str(), "convergence_rate": a.overlap_report.convergence_rate }))
        .collect();
    let mut seeds = study.hamiltonian_seeds.clone();
    if let Some((_, arm)) = study.arms.first() {
        seeds.extend(arm.records.iter().map(|r| r.seed));
    }
    out.write_manifest("study-multiplier", cfg, cfg.seed, seeds, json!(summary_json))?;
    Ok(())
}

/// `trotter.csv`, `instances.csv`, `trotter.svg`, `manifest.json`.
pub fn write_trotter_study(out: &mut OutputDir, cfg: &ExperimentConfig, study: &TrotterStudy) -> Result<()> {
    let (hm, hse) = study.delta_h_stats();
    let q = study.delta_q_stats();
    let mut table = Table::new(&["r", "delta_q_mean", "delta_q_se", "delta_h_mean", "delta_h_se", "instances"]);
    for &(r, m, se) in &q {
        table.push(vec![r.into(), m.into(), se.into(), hm.into(), hse.into(), study.instances().into()]);
    }
    out.write_table("trotter.csv", &table)?;

    let mut headers = vec!["instance".to_string(), "seed".into(), "f_h_exact".into(), "f_h_sampled".into(), "f_q_exact".into()];
    headers.extend(study.steps.iter().map(|r| format!("f_q_sampled_r{r}")));
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut inst = Table::new(&refs);
    for i in 0..study.instances() {
        let mut row: Vec<Cell> = vec![
            i.into(),
            study.seeds[i].into(),
            study.f_h_exact[i].into(),
            study.f_h_sampled[i].into(),
            study.f_q_exact[i].into(),
        ];
        row.extend(study.f_q_sampled.iter().map(|col| Cell::from(col[i])));
        inst.push(row);
    }
    out.write_table("instances.csv", &inst)?;

    let plot = Plot {
        title: format!("Estimator error, {} shots", study.shots),
        x_label: "Trotter steps r".into(),
        y_label: "mean absolute error".into(),
        series: vec![
            Series {
                label: "unitary".into(),
                points: q.iter().map(|&(r, m, se)| (r as f64, m, Some(se))).collect(),
                dashed: false,
            },
            Series {
                label: format!("variance / {}", study.normalization),
                points: study.steps.iter().map(|&r| (r as f64, hm, Some(hse))).collect(),
                dashed: true,
            },
        ],
    };
    out.write_text("trotter.svg", &plot.render())?;
    let summary = json!({
        "delta_h_mean": hm,
        "delta_h_se": hse,
        "normalization": study.normalization,
        "delta_q": q.iter().map(|&(r, m, se)| json!({ "r": r, "mean": m, "se": se })).collect::<Vec<_>>(),
    });
    out.write_manifest("study-trotter", cfg, cfg.seed, study.seeds.clone(), summary)?;
    Ok(())
}

/// `run.json`, `manifest.json`.
pub fn write_solve(out: &mut OutputDir, cfg: &ExperimentConfig, arm: &Arm) -> Result<()> {
    let run = &arm.runs[0];
    let record = &arm.records[0];
    let body = json!({ "summary": run, "record": record });
    let text = serde_json::to_string_pretty(&body).map_err(|e| crate::error::Error::Numerical(format!("run encoding: {e}")))?;
    out.write_text("run.json", &text)?;
    let mut runs = Table::new(&RUN_HEADERS);
    push_runs(&mut runs, cfg.model.name(), arm);
    out.write_table("runs.csv", &runs)?;
    out.write_manifest("solve", cfg, cfg.seed, vec![record.seed], json!(run))?;
    Ok(())
}
