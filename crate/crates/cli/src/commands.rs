use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use glassboost::bench::{emit_report, run_benchmark, ReportFormat};
use glassboost::data::{load_csv, split_preprocessed, write_csv, Dataset};
use glassboost::diagnostics::{dominance_report, load_importances, spurious_report};
use glassboost::ensemble::{
    altered_ebm, ensemble1, ensemble2, plain_ebm, run_cross_selectors, Pool,
};
use glassboost::selectors::SelectorRegistry;
use serde::Serialize;
use serde_json::json;

use crate::args::{
    AuditArgs, BenchArgs, FormatArg, PipelineArgs, PipelineKind, SelectArgs, SynthArgs, TrainArgs,
};
use crate::config::{bench_config, synth_config, RunConfig};
use crate::UserError;

type Result<T = ()> = anyhow::Result<T>;

fn core<T>(r: glassboost::Result<T>) -> Result<T> {
    r.map_err(UserError::from_core)
}

/// One line of JSON on stderr, written in a single call.
fn print_manifest(manifest: &serde_json::Value) -> Result {
    let line = serde_json::to_string(manifest)? + "\n";
    let mut err = std::io::stderr().lock();
    err.write_all(line.as_bytes())?;
    err.flush()?;
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result {
    fs::write(path, contents)
        .map_err(|e| UserError::new(format!("cannot write {}: {e}", path.display())).into())
}

/// Pretty JSON to `out/<file_name>` or to stdout.
fn emit<T: Serialize>(value: &T, out: Option<&Path>, file_name: &str) -> Result {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| UserError::new(format!("cannot create {}: {e}", dir.display())))?;
            write_file(&dir.join(file_name), &text)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn finish_manifest(manifest: serde_json::Value, out: Option<&Path>) -> Result {
    print_manifest(&manifest)?;
    if out.is_some() {
        emit(&manifest, out, "manifest.json")?;
    }
    Ok(())
}

fn load_split(cfg: &RunConfig) -> Result<(Dataset, Dataset)> {
    let (path, target) = cfg.data()?;
    let raw = core(load_csv(path, target))?;
    core(split_preprocessed(&raw, cfg.split_ratio, cfg.seed))
}

pub fn synth(a: &SynthArgs) -> Result {
    let cfg = synth_config(a)?;
    let planted = core(cfg.generate())?;
    core(write_csv(&planted.dataset, &a.output))?;
    print_manifest(&json!({
        "command": "synth",
        "config": cfg,
        "output": a.output,
        "roles": planted.roles,
    }))
}

pub fn select(a: &SelectArgs) -> Result {
    let mut cfg = RunConfig::from_common(&a.common)?;
    cfg.apply_selector_flags(&a.selectors);
    cfg.validate()?;
    let registry = SelectorRegistry::default();
    if !registry.contains(&a.selector) {
        return Err(UserError::new(format!(
            "unknown selector {:?}; expected one of {}",
            a.selector,
            registry.names().join(", ")
        ))
        .into());
    }
    let (train, _) = load_split(&cfg)?;
    let output = core(registry.run(&a.selector, &train, &cfg.selectors))?;
    let out = a.common.out.as_deref();
    emit(&output, out, &format!("selector_{}.json", a.selector))?;
    finish_manifest(
        json!({ "command": "select", "selector": a.selector, "config": cfg }),
        out,
    )
}

pub fn train(a: &TrainArgs) -> Result {
    let cfg = RunConfig::from_common(&a.common)?;
    cfg.validate()?;
    let (train, test) = load_split(&cfg)?;
    let mut result = core(plain_ebm(&train, &test, &cfg.ebm))?;
    if cfg.threshold != glassboost::bench::DEFAULT_THRESHOLD {
        result.eval = core(glassboost::bench::evaluate_at(
            &result.model,
            &test,
            result.eval.fit_seconds,
            cfg.threshold,
        ))?;
    }
    let out = a.common.out.as_deref();
    emit(&result.model, out, "model.json")?;
    if out.is_some() {
        emit(&result.importance, out, "importance.json")?;
        emit(&result.eval, out, "eval.json")?;
    }
    log::info!(
        "test F1 {:.4}, accuracy {:.4}, fit {:.2}s",
        result.eval.f1,
        result.eval.accuracy,
        result.eval.fit_seconds
    );
    finish_manifest(json!({ "command": "train", "config": cfg }), out)
}

pub fn pipeline(a: &PipelineArgs) -> Result {
    let mut cfg = RunConfig::from_common(&a.common)?;
    cfg.apply_selector_flags(&a.selectors);
    cfg.apply_pipeline_flags(a);
    cfg.validate()?;
    let (train, test) = load_split(&cfg)?;
    let mut result = match a.kind {
        PipelineKind::Ensemble1 => {
            let selector = a.selector.as_deref().context("--selector is required")?;
            core(ensemble1(&train, &test, selector, &cfg.selectors, &cfg.ebm))?
        }
        PipelineKind::PoolA | PipelineKind::PoolB => {
            let outputs = core(run_cross_selectors(&train, &cfg.selectors))?;
            let pool = if a.kind == PipelineKind::PoolA {
                Pool::A
            } else {
                Pool::B
            };
            core(ensemble2(
                &train, &test, &outputs, pool, &cfg.pool, &cfg.ebm,
            ))?
        }
        PipelineKind::Altered => core(altered_ebm(&train, &test, &cfg.altered, &cfg.ebm))?,
    };
    if cfg.threshold != glassboost::bench::DEFAULT_THRESHOLD {
        result.eval = core(glassboost::bench::evaluate_at(
            &result.model,
            &test,
            result.eval.fit_seconds,
            cfg.threshold,
        ))?;
        result.manifest.threshold = cfg.threshold;
    }
    let kind = match a.kind {
        PipelineKind::Ensemble1 => "ensemble1",
        PipelineKind::PoolA => "pool_a",
        PipelineKind::PoolB => "pool_b",
        PipelineKind::Altered => "altered",
    };
    let out = a.common.out.as_deref();
    emit(&result, out, &format!("pipeline_{kind}.json"))?;
    finish_manifest(
        json!({ "command": "pipeline", "kind": kind, "selector": a.selector, "config": cfg }),
        out,
    )
}

pub fn audit(a: &AuditArgs) -> Result {
    let text = fs::read_to_string(&a.importances)
        .map_err(|e| UserError::new(format!("cannot read {}: {e}", a.importances.display())))?;
    let importance = core(load_importances(&text))?;
    let dominance = dominance_report(&importance);
    // pair-only dumps (such as published top-5 tables) cannot be checked for
    // spurious pairs, but their dominance is still meaningful
    let spurious = match spurious_report(&importance) {
        Ok(r) => Some(r),
        Err(e @ glassboost::Error::UnhousedMainEffect(_)) => {
            log::warn!("spurious audit skipped: {e}");
            None
        }
        Err(e) => return Err(UserError::from_core(e)),
    };
    if a.json {
        emit(
            &json!({ "dominance": dominance, "spurious": spurious }),
            None,
            "",
        )?;
    } else {
        let summary = if dominance.summary.is_empty() {
            "-"
        } else {
            &dominance.summary
        };
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "Feature Dominance: {summary}")?;
        for p in &dominance.top_pairs {
            writeln!(stdout, "  {}  {}", p.name, p.importance)?;
        }
        match &spurious {
            Some(s) => {
                writeln!(stdout, "Spurious Interactions: {}", s.count)?;
                for f in &s.flags {
                    writeln!(
                        stdout,
                        "  {} (noisy {})  {}",
                        f.pair, f.noisy_feature, f.importance
                    )?;
                }
            }
            None => writeln!(
                stdout,
                "Spurious Interactions: n/a (pairs without main-effect terms)"
            )?,
        }
        stdout.flush()?;
    }
    print_manifest(&json!({ "command": "audit", "importances": a.importances }))
}

pub fn bench(a: &BenchArgs) -> Result {
    let cfg = bench_config(a.config.as_deref(), a.seed)?;
    let mut formats = vec![ReportFormat::Json];
    for f in &a.format {
        let f = match f {
            FormatArg::Json => continue,
            FormatArg::Markdown => ReportFormat::Markdown,
            FormatArg::Csv => ReportFormat::Csv,
        };
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    let report = core(run_benchmark(&cfg))?;
    let failed = report.rows.iter().filter(|r| !r.succeeded()).count();
    if failed > 0 {
        log::warn!("{failed} of {} rows failed", report.rows.len());
    }
    if report.rows.is_empty() {
        log::warn!("no rows to report");
    } else {
        core(emit_report(&report, &formats, &a.out))?;
    }
    print_manifest(&json!({ "command": "bench", "config": cfg, "out": a.out }))
}
