use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use dissbus_core::bagger::{Provenance, TopicBag};
use dissbus_core::corpus::PosTag;
use dissbus_core::error::Error;
use dissbus_core::fixtures::{fixture_dir, fixture_pipeline, verify_goldens};
use dissbus_core::pipeline::{Pipeline, RunReport, Stage, BAGS_UPCYCLED, MATRIX, RUN_REPORT};
use dissbus_core::score::matrix_header;
use dissbus_core::summarize::is_valid_combination;

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn every_golden_case_passes() {
    let dir = tempfile::tempdir().unwrap();
    let results = verify_goldens(dir.path()).unwrap();
    assert_eq!(results.len(), 6);
    for r in results {
        assert!(r.passed, "{} ({}):\n{}", r.name, r.expected.display(), r.diff.unwrap_or_default());
    }
}

#[test]
fn stage_by_stage_equals_run_all() {
    let dir = tempfile::tempdir().unwrap();
    let all = fixture_pipeline(&dir.path().join("all")).unwrap();
    let report = all.run_all().unwrap();
    let staged = fixture_pipeline(&dir.path().join("staged")).unwrap();
    let mut counts = BTreeMap::new();
    for s in Stage::ALL {
        counts.insert(s, staged.run_stage(s).unwrap().counts);
    }
    let mut a = snapshot(&all.config.paths.output);
    assert!(a.remove(RUN_REPORT).is_some());
    assert_eq!(a, snapshot(&staged.config.paths.output));

    assert_eq!(report.reviews, 60);
    assert_eq!(report.rows, 60);
    assert_eq!(report.clauses, counts[&Stage::Disintegrate]["clauses"]);
    assert_eq!(report.unique_biterms, counts[&Stage::Summarize]["unique_biterms"]);
    assert_eq!(report.strained, counts[&Stage::Strain]["strained"]);
    assert_eq!(report.matched + report.unmatched, counts[&Stage::Upcycle]["unstrained"]);
    assert!(report.strained <= report.unique_biterms);
    assert!(report.matched <= report.unique_biterms);
    let saved: RunReport = serde_json::from_slice(&fs::read(all.config.output(RUN_REPORT)).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn rerunning_a_stage_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_pipeline(dir.path()).unwrap();
    p.run_all().unwrap();
    let before = snapshot(dir.path());
    for s in Stage::ALL {
        p.run_stage(s).unwrap();
    }
    p.run_all().unwrap();
    assert_eq!(before, snapshot(dir.path()));
}

#[test]
fn manifests_record_hashes_parameters_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_pipeline(dir.path()).unwrap();
    p.run_all().unwrap();
    let m = p.read_manifest(Stage::Strain).unwrap();
    assert_eq!(m.stage, "strain");
    assert_eq!(m.parameters["cut_point"], serde_json::json!(3));
    assert_eq!(m.inputs["occurrences.tsv"].len(), 64);
    assert_eq!(m.counts["strained"], 20);
    let text = fs::read_to_string(p.config.output(&Stage::Strain.manifest_name())).unwrap();
    assert!(!text.contains("time"), "{text}");
}

#[test]
fn missing_predecessor_names_the_stage_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_pipeline(dir.path()).unwrap();
    let cases = [
        (Stage::Summarize, "disintegrate"),
        (Stage::Strain, "summarize"),
        (Stage::Bag, "strain"),
        (Stage::Upcycle, "bag"),
        (Stage::Score, "upcycle"),
    ];
    for (stage, needed) in cases {
        match p.run_stage(stage) {
            Err(e @ Error::MissingStage { .. }) => {
                assert!(e.to_string().contains(&format!("{needed} required")), "{e}");
                assert!(e.to_string().contains(&format!("dissbus {needed}")), "{e}");
                assert_eq!(e.exit_code(), 1);
            }
            other => panic!("{stage}: expected a missing-stage error, got {other:?}"),
        }
    }
}

#[test]
fn bag_without_any_labels_points_at_the_service() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = fixture_pipeline(dir.path()).unwrap();
    p.config.paths.labels = None;
    for s in [Stage::Disintegrate, Stage::Summarize, Stage::Strain] {
        p.run_stage(s).unwrap();
    }
    let err = p.run_stage(Stage::Bag).unwrap_err();
    assert!(err.to_string().contains("labels required"), "{err}");
    assert!(err.to_string().contains("dissbus serve"), "{err}");
}

#[test]
fn empty_corpus_gives_zero_counts_and_a_header_only_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    fs::write(&corpus, "").unwrap();
    let mut p = fixture_pipeline(&dir.path().join("out")).unwrap();
    p.config.paths.corpus = corpus;
    p.config.paths.parses = None;
    let report = p.run_all().unwrap();
    assert_eq!(report, RunReport::default());
    let topics = p.config.topics().unwrap();
    assert_eq!(fs::read_to_string(p.config.output(MATRIX)).unwrap(), matrix_header(&topics) + "\n");
}

#[test]
fn fractional_seed_changes_only_downstream_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for seed in [42u64, 43] {
        let mut p = fixture_pipeline(&dir.path().join(seed.to_string())).unwrap();
        p.config.parameters.mode = "fractional".parse().unwrap();
        p.config.parameters.seed = seed;
        let report = p.run_all().unwrap();
        outs.push((report, p.read_manifest(Stage::Upcycle).unwrap()));
    }
    assert_eq!(outs[0].0.strained, outs[1].0.strained);
    assert_eq!(outs[0].0.unique_biterms, outs[1].0.unique_biterms);
    assert_eq!(outs[0].1.parameters["seed"], serde_json::json!(42));
    assert_eq!(outs[1].1.parameters["seed"], serde_json::json!(43));
}

#[test]
fn fractional_mode_rejects_a_budget_below_the_bag_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = fixture_pipeline(dir.path()).unwrap();
    p.config.parameters.mode = "fractional".parse().unwrap();
    p.config.parameters.m = 2;
    let err = p.run_all().unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn upcycled_bags_keep_manual_members_and_stay_disjoint() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_pipeline(dir.path()).unwrap();
    p.run_all().unwrap();
    let bags: Vec<TopicBag> = p.bags(BAGS_UPCYCLED).unwrap();
    let manual: usize = bags.iter().map(|b| b.members.values().filter(|v| **v == Provenance::Manual).count()).sum();
    assert_eq!(manual, 19);
    dissbus_core::bagger::assert_disjoint(&bags).unwrap();
}

#[test]
fn fixture_covers_the_required_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let p = fixture_pipeline(dir.path()).unwrap();
    p.run_all().unwrap();
    let clauses: Vec<_> = p.clauses().unwrap().into_iter().map(|r| r.clause).collect();
    assert!(clauses.iter().filter(|c| c.negated).count() >= 3);

    let combos: std::collections::BTreeSet<(PosTag, PosTag)> = p
        .occurrences()
        .unwrap()
        .iter()
        .map(|o| (o.biterm.object_pos, o.biterm.evaluation_pos))
        .collect();
    assert_eq!(combos.len(), 5, "{combos:?}");
    assert!(combos.iter().all(|(a, b)| is_valid_combination(*a, *b)));

    let bags = p.bags(BAGS_UPCYCLED).unwrap();
    assert!(bags.iter().all(|b| !b.is_empty()), "every topic has a bag member");

    let list_commas = clauses
        .iter()
        .filter(|c| {
            c.tokens
                .windows(3)
                .any(|w| w[1].surface == "," && w[0].pos == w[2].pos && w[0].pos != PosTag::PUNCT)
        })
        .count();
    assert!(list_commas >= 2, "{list_commas} list-comma clauses");

    let abbreviation = clauses.iter().any(|c| {
        c.tokens[..c.tokens.len().saturating_sub(1)]
            .iter()
            .any(|t| t.surface.len() > 1 && t.surface.ends_with('.'))
    });
    assert!(abbreviation, "no clause keeps an abbreviation period inside");
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dissbus")).args(args).output().unwrap()
}

fn config_into(dir: &Path) -> String {
    let text = fs::read_to_string(fixture_dir().join("dissbus.toml")).unwrap();
    let fx = fixture_dir();
    let mut out = String::new();
    let mut in_paths = false;
    for line in text.lines() {
        if line.starts_with('[') {
            in_paths = line == "[paths]";
        }
        match line.split_once(" = \"").filter(|_| in_paths) {
            Some(("output", _)) => out.push_str(&format!("output = \"{}\"\n", dir.join("out").display())),
            Some((k, v)) => out.push_str(&format!("{k} = \"{}\"\n", fx.join(v.trim_end_matches('"')).display())),
            None => out.push_str(&format!("{line}\n")),
        }
    }
    let path = dir.join("dissbus.toml");
    fs::write(&path, out).unwrap();
    path.display().to_string()
}

#[test]
fn cli_runs_stages_and_maps_errors_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_into(dir.path());

    let out = cli(&["score", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("dissbus upcycle"), "{stderr}");

    let out = cli(&["strain", "--config", &cfg, "--cut-point", "0"]);
    assert_eq!(out.status.code(), Some(3));

    let out = cli(&["all", "--config", &dir.path().join("nope.toml").display().to_string()]);
    assert_eq!(out.status.code(), Some(2));

    let out = cli(&["all", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.rows, 60);

    let out = cli(&["strain", "--config", &cfg, "--cut-point", "8"]);
    assert!(out.status.success());
    let p = Pipeline::from_path(Path::new(&cfg)).unwrap();
    assert_eq!(p.read_manifest(Stage::Strain).unwrap().parameters["cut_point"], serde_json::json!(8));
    assert_eq!(
        fs::read(p.config.output(MATRIX)).unwrap(),
        fs::read(fixture_dir().join("golden/matrix.csv")).unwrap()
    );
}
