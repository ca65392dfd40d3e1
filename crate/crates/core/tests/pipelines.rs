use glassboost::bench::{
    emit_report, render_markdown, run_benchmark, BenchConfig, BenchDataset, BenchReport,
    PipelineSpec, ReportFormat,
};
use glassboost::data::synth::SynthConfig;
use glassboost::data::{split_preprocessed, Dataset};
use glassboost::diagnostics::load_importances;
use glassboost::ebm::{EbmParams, Term};
use glassboost::ensemble::{
    altered_ebm, ensemble1, ensemble2, plain_ebm, run_cross_selectors, AlteredEbmConfig, Pool,
    PoolConfig, RankRule,
};
use glassboost::selectors::{SelectorConfig, CROSS_SELECTORS};
use glassboost::Error;

fn quick_ebm() -> EbmParams {
    EbmParams {
        outer_rounds: 300,
        ..EbmParams::default()
    }
}

fn planted(rows: usize) -> (Dataset, Dataset) {
    let ds = SynthConfig {
        rows,
        ..SynthConfig::default()
    }
    .generate()
    .unwrap()
    .dataset;
    split_preprocessed(&ds, 0.7, 5).unwrap()
}

fn small_bench(pipelines: Vec<PipelineSpec>) -> BenchConfig {
    BenchConfig {
        datasets: vec![BenchDataset::Synthetic {
            name: "small".into(),
            config: SynthConfig {
                rows: 800,
                ..SynthConfig::default()
            },
        }],
        pipelines,
        seed: 2,
        ebm: quick_ebm(),
        ..BenchConfig::default()
    }
}

#[test]
fn ensemble1_drops_unselected_features() {
    let (train, test) = planted(1000);
    let r = ensemble1(
        &train,
        &test,
        "xgboost",
        &SelectorConfig::default(),
        &quick_ebm(),
    )
    .unwrap();
    let chosen = &r.manifest.selectors[0].selected;
    let mut sorted = chosen.clone();
    sorted.sort_unstable();
    assert_eq!(r.selected_features, sorted);
    assert_eq!(r.eval.n_features, chosen.len());
    assert!(r.selected_features.len() < train.n_features());
}

#[test]
fn pools_are_built_from_all_nine_selectors() {
    let (train, test) = planted(800);
    let outputs = run_cross_selectors(&train, &SelectorConfig::default()).unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o.selector.as_str()).collect();
    assert_eq!(names, CROSS_SELECTORS);
    let pooled = ensemble2(
        &train,
        &test,
        &outputs,
        Pool::B,
        &PoolConfig::default(),
        &quick_ebm(),
    )
    .unwrap();
    assert_eq!(pooled.pipeline, "pool_b");
    assert!(pooled.selected_features.len() <= 3 * 9);
    assert_eq!(pooled.manifest.selectors.len(), 9);
}

#[test]
fn pool_a_with_unreachable_k_is_empty() {
    let (train, test) = planted(800);
    let outputs = run_cross_selectors(&train, &SelectorConfig::default()).unwrap();
    // a feature nobody selects can never reach K
    let mut outputs = outputs;
    for o in &mut outputs {
        o.selected.clear();
    }
    let err = ensemble2(
        &train,
        &test,
        &outputs,
        Pool::A,
        &PoolConfig::default(),
        &quick_ebm(),
    );
    assert!(matches!(err, Err(Error::EmptyFeaturePool)));
}

#[test]
fn altered_model_only_keeps_pairs_ranked_below_their_mains() {
    let (train, test) = planted(1200);
    let cfg = AlteredEbmConfig::default();
    let r = altered_ebm(&train, &test, &cfg, &quick_ebm()).unwrap();
    let m = r.manifest.altered.as_ref().unwrap();
    for t in &m.preliminary {
        if let Term::Main(f) = t.term {
            let kept = m.kept_features.contains(&f);
            assert_eq!(
                kept,
                t.importance >= cfg.importance_threshold,
                "feature {f}"
            );
        }
    }
    let rank = |term: Term| m.preliminary.iter().find(|t| t.term == term).unwrap().rank;
    for &(a, b) in &m.kept_pairs {
        let p = rank(Term::Pair(a, b));
        assert!(rank(Term::Main(a)) < p && rank(Term::Main(b)) < p);
    }
    // every fitted pair came from the whitelist
    for p in &r.model.pair_terms {
        let (a, b) = p.features;
        let ids = (r.model.feature_ids[a], r.model.feature_ids[b]);
        assert!(m.kept_pairs.contains(&ids), "{ids:?}");
    }
}

#[test]
fn altered_threshold_above_every_main_fails() {
    let (train, test) = planted(800);
    let cfg = AlteredEbmConfig {
        importance_threshold: 1.1,
        comparison: RankRule::Either,
    };
    assert!(matches!(
        altered_ebm(&train, &test, &cfg, &quick_ebm()),
        Err(Error::ThresholdEliminatesAll)
    ));
}

#[test]
fn plain_pipeline_reports_fit_time_only() {
    let (train, test) = planted(800);
    let r = plain_ebm(&train, &test, &quick_ebm()).unwrap();
    assert!(r.eval.fit_seconds >= 0.0);
    assert!(r.manifest.selectors.is_empty());
    assert_eq!(r.eval.confusion.total(), test.n_rows());
}

#[test]
fn one_row_report_has_table_headers() {
    let report = run_benchmark(&small_bench(vec![PipelineSpec::Plain])).unwrap();
    assert_eq!(report.rows.len(), 1);
    let md = render_markdown(&report);
    for header in ["# Feat", "F1", "Accuracy", "Time (sec)"] {
        assert!(md.contains(header), "{header}");
    }
}

#[test]
fn dominated_row_renders_occurrence_cell() {
    let mut report = run_benchmark(&small_bench(vec![PipelineSpec::Plain])).unwrap();
    let fixture = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/dominated_interactions.json"
    ))
    .unwrap();
    let importance = load_importances(&fixture).unwrap();
    let outcome = report.rows[0].outcome.as_mut().unwrap();
    outcome.dominance = glassboost::diagnostics::dominance_report(&importance);
    assert!(render_markdown(&report).contains("| 1 feature x 5 Occurrence |"));
}

#[test]
fn markdown_matches_json_to_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_benchmark(&small_bench(vec![
        PipelineSpec::Plain,
        PipelineSpec::Ensemble1 {
            selector: "correlation".into(),
        },
    ]))
    .unwrap();
    let files = emit_report(&report, &ReportFormat::ALL, dir.path()).unwrap();
    assert!(files.iter().any(|f| f.ends_with("model_small__plain.json")));

    let back =
        BenchReport::from_json(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    for row in &back.rows {
        let o = row.outcome.as_ref().unwrap();
        let line = format!(
            "| {} | {} | {} | {:.2} | {:.2} |",
            row.dataset,
            row.pipeline,
            o.eval.n_features,
            100.0 * o.eval.f1,
            100.0 * o.eval.accuracy
        );
        assert!(md.contains(&line), "missing {line}");
    }
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let dump = std::fs::read_to_string(dir.path().join("model_small__plain.json")).unwrap();
    let importance = load_importances(&dump).unwrap();
    assert_eq!(
        importance,
        back.rows[0].outcome.as_ref().unwrap().importance
    );
}

#[test]
fn row_manifest_reruns_the_row() {
    let report = run_benchmark(&small_bench(vec![
        PipelineSpec::Plain,
        PipelineSpec::Ensemble1 {
            selector: "vif".into(),
        },
    ]))
    .unwrap();
    let row = &report.rows[1];
    let m = &row.manifest;
    let rerun = BenchConfig {
        datasets: vec![m.dataset.clone()],
        pipelines: vec![m.pipeline.clone()],
        seed: m.seed,
        split_ratio: m.split_ratio,
        threshold: m.threshold,
        ebm: m.ebm.clone(),
        selectors: m.selectors.clone().unwrap(),
        ..BenchConfig::default()
    };
    let again = run_benchmark(&rerun).unwrap();
    let (a, b) = (
        row.outcome.as_ref().unwrap(),
        again.rows[0].outcome.as_ref().unwrap(),
    );
    assert_eq!(a.eval.confusion, b.eval.confusion);
    assert_eq!(a.selected_features, b.selected_features);
}

#[test]
fn emitting_an_empty_report_is_an_error() {
    let report = run_benchmark(&small_bench(Vec::new())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_report(&report, &[ReportFormat::Json], dir.path()).is_err());
}
