//! Acceptance suite. Prints one PASS/FAIL line per criterion with its
//! runtime against the budget, and exits non-zero if any criterion fails.

use std::cell::Cell;
use std::collections::{HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::Array2;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qaforge_core::clock::FixedClock;
use qaforge_core::evaluation::{
    aggregate_reviews, group_totals, load_scores, loss_report, score_report, ReportFormat, ScoreCard,
};
use qaforge_core::finetune::lora::{full_param_count, lora_delta, lora_param_count, merge_lora, unmerge_lora};
use qaforge_core::finetune::{build_manifest, early_stop_epoch, load_results, sample_training_set, WhitespaceCounter};
use qaforge_core::generation::{
    extract_qa_json, run_generation, ExtractError, ExtractedQa, GenParams, MockBackend, MockStep, RunOptions,
};
use qaforge_core::prompt::builtin_qa_prompt;
use qaforge_core::qa::{load_store, stats, Category, QAPair};
use qaforge_core::reference::{
    dedup, export_store, import_store, ingest_files, parse_bibtex, parse_nbib, InputFormat, PaperRecord, RecordStore,
    SourceFormat, StoreFormat,
};
use qaforge_core::Execution;

type Check = fn() -> Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn main() {
    let criteria: [(u32, &str, Duration, Check); 10] = [
        (1, "parser fidelity and dedup", Duration::from_secs(1), c1_parsers),
        (2, "store round trip", Duration::from_secs(10), c2_round_trip),
        (3, "curation stats fixture", Duration::from_secs(1), c3_stats),
        (4, "LoRA algebra", Duration::from_secs(5), c4_lora),
        (5, "early stopping", Duration::from_secs(10), c5_early_stop),
        (6, "training-set sampling", Duration::from_secs(1), c6_sampling),
        (7, "report fidelity", Duration::from_secs(1), c7_reports),
        (8, "rubric", Duration::from_secs(1), c8_rubric),
        (9, "end-to-end generation", Duration::from_secs(2), c9_end_to_end),
        (10, "extraction robustness", Duration::from_secs(1), c10_extraction),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget {budget:?}")),
            other => other,
        };
        let ms = elapsed.as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} ({ms:.1} ms, budget {budget:?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} ({ms:.1} ms, budget {budget:?})");
            }
        }
    }
    let _ = panic::take_hook();
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

// 1 ------------------------------------------------------------------------

fn oracle_title(t: &str) -> String {
    t.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase().trim_end_matches('.').to_string()
}

/// Connected components of the "shares a DOI, a PMID or (identifier-less)
/// a title" relation, by naive pairwise relabelling until stable.
fn oracle_group_count(recs: &[PaperRecord]) -> usize {
    let doi = |r: &PaperRecord| r.doi.as_ref().map(|d| d.to_lowercase());
    let linked = |a: &PaperRecord, b: &PaperRecord| {
        (doi(a).is_some() && doi(a) == doi(b))
            || (a.pmid.is_some() && a.pmid == b.pmid)
            || (a.doi.is_none()
                && a.pmid.is_none()
                && b.doi.is_none()
                && b.pmid.is_none()
                && oracle_title(&a.title) == oracle_title(&b.title))
    };
    let mut label: Vec<usize> = (0..recs.len()).collect();
    loop {
        let mut changed = false;
        for i in 0..recs.len() {
            for j in 0..recs.len() {
                if linked(&recs[i], &recs[j]) && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    label.iter().collect::<HashSet<_>>().len()
}

fn c1_parsers() -> Result<String, String> {
    let bib_text = std::fs::read_to_string(fixture("pubmed-set.bib")).map_err(|e| e.to_string())?;
    let nbib_text = std::fs::read_to_string(fixture("pubmed-set.nbib")).map_err(|e| e.to_string())?;
    let (bib, _) = parse_bibtex(&bib_text).map_err(|e| e.to_string())?;
    let (nbib, _) = parse_nbib(&nbib_text).map_err(|e| e.to_string())?;
    ensure(bib.len() >= 10 && nbib.len() >= 10, format!("corpus too small: {} / {}", bib.len(), nbib.len()))?;
    ensure(bib.iter().any(|r| r.doi.is_none()) && nbib.iter().any(|r| r.doi.is_none()), "no DOI-less records")?;

    let bib_dois: HashSet<String> = bib.iter().filter_map(|r| r.doi.clone()).collect();
    let shared = nbib.iter().filter_map(|r| r.doi.as_ref()).filter(|d| bib_dois.contains(*d)).count();
    ensure(shared == 1, format!("expected one shared DOI, found {shared}"))?;

    let continued = nbib.iter().any(|r| r.abstract_or_empty().contains("urinary cadmium concentration in relation"));
    ensure(continued, "continuation lines not joined")?;

    let mut all = bib.clone();
    all.extend(nbib.clone());
    let expected = oracle_group_count(&all);
    ensure(expected == bib.len() + nbib.len() - shared, "oracle disagrees with the fixture layout")?;

    for exec in [Execution::Sequential, Execution::Parallel] {
        let inputs =
            [(fixture("pubmed-set.bib"), InputFormat::Bibtex), (fixture("pubmed-set.nbib"), InputFormat::Nbib)];
        let (store, _) = ingest_files(&inputs, exec).map_err(|e| e.to_string())?;
        ensure(store.len() == expected, format!("{exec:?}: dedup gave {} records, oracle {expected}", store.len()))?;
        for r in &all {
            let hit = r
                .doi
                .as_ref()
                .and_then(|d| store.get_by_doi(d))
                .or_else(|| r.pmid.as_ref().and_then(|p| store.get_by_pmid(p)));
            ensure(hit.is_some(), format!("record {} not reachable after dedup", r.record_id))?;
        }
    }
    Ok(format!("{} bib + {} nbib - {shared} shared = {expected}", bib.len(), nbib.len()))
}

// 2 ------------------------------------------------------------------------

fn record_strategy() -> impl Strategy<Value = PaperRecord> {
    (
        proptest::option::of("10\\.[0-9]{4}/[a-z0-9.]{1,8}"),
        proptest::option::of("[0-9]{1,8}"),
        "[ -~\n\t\u{e9}\u{3b1}]{1,40}",
        proptest::collection::vec("[A-Za-z ,.'-]{1,20}", 0..4),
        proptest::option::of("[ -~\n\"':#]{0,120}"),
        proptest::collection::vec("[a-z ]{1,12}", 0..3),
        any::<bool>(),
        proptest::collection::btree_map("[a-z]{1,6}", "[ -~]{0,20}", 0..3),
    )
        .prop_map(|(doi, pmid, title, authors, abs, keywords, bib, extra)| {
            let mut r = PaperRecord::empty(if bib { SourceFormat::Bibtex } else { SourceFormat::Nbib });
            r.doi = doi;
            r.pmid = pmid;
            r.title = format!("T {title}");
            r.authors = authors;
            r.abstract_text = abs;
            r.keywords = keywords;
            r.journal = Some("J".into());
            r.extra = extra;
            r.finish()
        })
}

fn c2_round_trip() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    let strategy = proptest::collection::vec(record_strategy(), 0..12).prop_map(|recs| dedup(recs).0);
    let sizes = Cell::new(0usize);
    runner
        .run(&strategy, |store: RecordStore| {
            sizes.set(sizes.get() + store.len());
            for (format, name) in [(StoreFormat::Yaml, "s.yaml"), (StoreFormat::Jsonl, "s.jsonl")] {
                let path = dir.path().join(name);
                export_store(&store, format, &path).unwrap();
                let back = import_store(&path, format).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(&back, &store);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("100 stores, {} records, YAML and JSONL", sizes.get()))
}

// 3 ------------------------------------------------------------------------

fn c3_stats() -> Result<String, String> {
    let (pairs, warnings) = load_store(&fixture("qa_fig2a.jsonl")).map_err(|e| e.to_string())?;
    ensure(warnings.is_empty(), format!("fixture produced warnings: {warnings:?}"))?;
    let s = stats(&pairs);
    let cats = |k| s.by_category.get(&k).copied().unwrap_or(0);
    let got =
        (s.total_papers, s.total_qas, cats(Category::Knowledge), cats(Category::Method), cats(Category::Discussion));
    ensure(got == (22, 44, 26, 15, 3), format!("stats() gave {got:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let qa_file = dir.path().join("qa.jsonl");
    std::fs::copy(fixture("qa_fig2a.jsonl"), &qa_file).map_err(|e| e.to_string())?;
    let port =
        std::net::TcpListener::bind("127.0.0.1:0").and_then(|l| l.local_addr()).map_err(|e| e.to_string())?.port();
    let cfg = qaforge_server::ServiceConfig { port, qa_file, ..Default::default() };
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let server = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        rt.block_on(qaforge_server::serve(&cfg, async {
            let _ = rx.await;
        }))
    });
    let url = format!("http://127.0.0.1:{port}/api/stats");
    let client = reqwest::blocking::Client::new();
    let deadline = Instant::now() + Duration::from_millis(800);
    let body: serde_json::Value = loop {
        match client.get(&url).send() {
            Ok(resp) => break resp.json().map_err(|e| e.to_string())?,
            Err(_) if Instant::now() < deadline => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(format!("server did not answer: {e}")),
        }
    };
    let _ = tx.send(());
    server.join().map_err(|_| "server thread panicked")?.map_err(|e| e.to_string())?;
    let expected = serde_json::json!({
        "total_papers": 22, "total_qas": 44,
        "by_category": {"knowledge": 26, "method": 15, "discussion": 3}
    });
    ensure(body == expected, format!("/api/stats returned {body}"))?;
    Ok("stats() and /api/stats = {22, 44, {26, 15, 3}}".into())
}

// 4 ------------------------------------------------------------------------

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
fn oracle_rank(m: &[Vec<i128>]) -> usize {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                a[r][k] = (a[rank][c] * a[r][k] - a[r][c] * a[rank][k]) / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
    }
    rank
}

fn c4_lora() -> Result<String, String> {
    let b = Array2::from_shape_vec((2, 1), vec![1.0, 2.0]).unwrap();
    let a = Array2::from_shape_vec((1, 2), vec![3.0, 4.0]).unwrap();
    let delta = lora_delta(&b, &a, 2.0, 1).map_err(|e| e.to_string())?;
    ensure(
        delta == Array2::from_shape_vec((2, 2), vec![6.0, 8.0, 12.0, 16.0]).unwrap(),
        format!("hand example gave {delta}"),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_err = 0f64;
    for _ in 0..200 {
        let d_out = rng.random_range(1..=8);
        let d_in = rng.random_range(1..=8);
        let r = rng.random_range(1..=4);
        let bi: Vec<i64> = (0..d_out * r).map(|_| rng.random_range(-3..=3)).collect();
        let ai: Vec<i64> = (0..r * d_in).map(|_| rng.random_range(-3..=3)).collect();
        let to_f = |v: &[i64], shape| Array2::from_shape_vec(shape, v.iter().map(|&x| x as f64).collect()).unwrap();
        let delta =
            lora_delta(&to_f(&bi, (d_out, r)), &to_f(&ai, (r, d_in)), r as f64, r).map_err(|e| e.to_string())?;
        let product: Vec<Vec<i128>> = (0..d_out)
            .map(|i| (0..d_in).map(|j| (0..r).map(|k| (bi[i * r + k] * ai[k * d_in + j]) as i128).sum()).collect())
            .collect();
        for i in 0..d_out {
            for j in 0..d_in {
                ensure(delta[[i, j]] == product[i][j] as f64, "delta differs from the integer product")?;
            }
        }
        let rank = oracle_rank(&product);
        ensure(rank <= r && rank <= d_in.min(d_out), format!("rank {rank} exceeds r = {r}"))?;

        let w: Vec<i64> = (0..d_out * d_in).map(|_| rng.random_range(-50..=50)).collect();
        let wi = Array2::from_shape_vec((d_out, d_in), w.clone()).unwrap();
        let di = Array2::from_shape_vec((d_out, d_in), product.iter().flatten().map(|&x| x as i64).collect()).unwrap();
        let back = unmerge_lora(&merge_lora(&wi, &di).map_err(|e| e.to_string())?, &di).map_err(|e| e.to_string())?;
        ensure(back == wi, "integer merge/unmerge not exact")?;

        let wf = Array2::from_shape_fn((d_out, d_in), |_| rng.random_range(-1.0..1.0));
        let df = Array2::from_shape_fn((d_out, d_in), |_| rng.random_range(-1.0..1.0) * 1e3);
        let back = unmerge_lora(&merge_lora(&wf, &df).map_err(|e| e.to_string())?, &df).map_err(|e| e.to_string())?;
        let err = (&back - &wf).iter().fold(0f64, |m, x: &f64| m.max(x.abs()));
        max_err = max_err.max(err);
    }
    ensure(max_err <= 1e-9, format!("float round trip error {max_err:e}"))?;

    let lora = lora_param_count(512, 512, 16);
    let full = full_param_count(512, 512);
    ensure(lora == 16384 && full == 262144 && lora * 10000 / full == 625, format!("param counts {lora} / {full}"))?;
    Ok(format!("hand example, 200 ranks, float err {max_err:.1e}, 16384/262144 = 6.25%"))
}

// 5 ------------------------------------------------------------------------

/// Epoch `i` improves iff it is the first or strictly below every earlier loss.
/// Training stops at the first 1-based epoch `t` whose last `p` epochs all failed to improve.
fn oracle_stop(losses: &[f64], p: usize) -> Option<usize> {
    let improves = |i: usize| i == 0 || losses[..i].iter().all(|&x| losses[i] < x);
    (p + 1..=losses.len()).find(|&t| (t - p..t).all(|i| !improves(i)))
}

fn c5_early_stop() -> Result<String, String> {
    let mut cases = 0usize;
    for len in 0..=8u32 {
        for code in 0..3usize.pow(len) {
            let losses: Vec<f64> = (0..len).map(|i| (code / 3usize.pow(i) % 3 + 1) as f64).collect();
            for p in 1..=3 {
                cases += 1;
                let (got, want) = (early_stop_epoch(&losses, p), oracle_stop(&losses, p));
                ensure(got == want, format!("{losses:?} patience {p}: got {got:?}, oracle {want:?}"))?;
            }
        }
    }
    Ok(format!("{cases} sequences x patience agree"))
}

// 6 ------------------------------------------------------------------------

fn c6_sampling() -> Result<String, String> {
    let (pairs, warnings) = load_store(&fixture("qa_curated50.jsonl")).map_err(|e| e.to_string())?;
    ensure(pairs.len() == 50 && warnings.is_empty(), format!("{} pairs, {} warnings", pairs.len(), warnings.len()))?;
    for size in [3usize, 5, 8, 10, 25] {
        let mut seen = HashSet::new();
        for seed in 0..10u64 {
            let first = sample_training_set(&pairs, size, seed).map_err(|e| e.to_string())?;
            let again = sample_training_set(&pairs, size, seed).map_err(|e| e.to_string())?;
            ensure(first == again, format!("size {size} seed {seed} not deterministic"))?;
            let refs: HashSet<String> = first.iter().map(QAPair::reference).collect();
            ensure(first.len() == size && refs.len() == size, format!("size {size} seed {seed}: repeated elements"))?;
            seen.insert(first.iter().map(QAPair::reference).collect::<Vec<_>>());
        }
        ensure(seen.len() == 10, format!("size {size}: only {} distinct subsets over 10 seeds", seen.len()))?;
    }
    let inputs = [(fixture("pubmed-set.bib"), InputFormat::Bibtex), (fixture("pubmed-set.nbib"), InputFormat::Nbib)];
    let (store, _) = ingest_files(&inputs, Execution::Sequential).map_err(|e| e.to_string())?;
    let (examples, warnings) = build_manifest(&pairs, &store, &WhitespaceCounter, 512);
    ensure(examples.len() == 50, format!("only {} of 50 pairs resolve to an abstract: {warnings:?}", examples.len()))?;
    Ok("sizes 3/5/8/10/25 distinct, deterministic, 10 distinct seeds; all 50 resolve".into())
}

// 7 ------------------------------------------------------------------------

fn c7_reports() -> Result<String, String> {
    let (results, warnings) = load_results(&fixture("results_losses.jsonl")).map_err(|e| e.to_string())?;
    ensure(results.len() == 6 && warnings.is_empty(), format!("{} results, {warnings:?}", results.len()))?;
    let table = loss_report(&results);
    let (m1, m3) = ("meta-llama/Llama-3.2-1B", "meta-llama/Llama-3.2-3B");
    for (size, model, want) in
        [(3, m1, "13.31"), (3, m3, "13.71"), (8, m1, "13.22"), (8, m3, "12.57"), (25, m1, "9.27"), (25, m3, "9.13")]
    {
        let got = table.cell(size, model);
        ensure(got.as_deref() == Some(want), format!("cell ({size}, {model}) = {got:?}, want {want}"))?;
    }
    let csv = table.render(ReportFormat::Csv);
    let want_csv = format!("qa_size,{m1},{m3}\n3,13.31,13.71\n8,13.22,12.57\n25,9.27,9.13\n");
    ensure(csv == want_csv, format!("csv was {csv:?}"))?;

    let (cards, warnings) = load_scores(&fixture("scores.jsonl")).map_err(|e| e.to_string())?;
    ensure(warnings.is_empty(), format!("score warnings: {warnings:?}"))?;
    let mut labels = HashMap::new();
    for (label, file) in [("1B", "generated_1b.jsonl"), ("3B", "generated_3b.jsonl")] {
        let (pairs, _) = load_store(&fixture(file)).map_err(|e| e.to_string())?;
        labels.extend(pairs.iter().map(|p| (p.reference(), label.to_string())));
    }
    let (groups, warnings) = group_totals(&cards, &labels);
    ensure(warnings.is_empty(), format!("grouping warnings: {warnings:?}"))?;
    let report = score_report(&groups, Execution::default());
    for (group, lo, hi) in [("1B", 2.0, 9.0), ("3B", 2.0, 10.0)] {
        let s = report.get(group).ok_or(format!("group {group} missing"))?;
        ensure(s.min == lo && s.max == hi, format!("{group}: min/max {}/{}", s.min, s.max))?;
    }
    Ok("loss cells 13.31/13.71, 13.22/12.57, 9.27/9.13; score ranges 2-9 and 2-10".into())
}

// 8 ------------------------------------------------------------------------

const ALLOWED: [&[u8]; 5] = [&[0, 2], &[0, 2, 4], &[0, 2, 4], &[0, 1], &[0, 4]];

fn c8_rubric() -> Result<String, String> {
    let cards = ScoreCard::enumerate_all("q", "r");
    let expected: usize = ALLOWED.iter().map(|a| a.len()).product();
    ensure(cards.len() == expected && expected == 72, format!("{} cards", cards.len()))?;
    let distinct: HashSet<[u8; 5]> = cards.iter().map(ScoreCard::components).collect();
    ensure(distinct.len() == 72, "duplicate cards")?;
    let totals: Vec<u32> = cards.iter().map(ScoreCard::total).collect();
    ensure(totals.iter().all(|&t| t <= 15), "total above 15")?;
    ensure(totals.iter().filter(|&&t| t == 15).count() == 1, "max 15 not unique")?;
    ensure(totals.iter().filter(|&&t| t == 0).count() == 1, "min 0 not unique")?;
    for c in &cards {
        ensure(ScoreCard::new("q", "r", c.components()).is_ok(), "enumerated card rejected")?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for set in 0..100 {
        let n = rng.random_range(1..=7);
        let reviews: Vec<ScoreCard> = (0..n)
            .map(|i| {
                let comps = ALLOWED.map(|a| a[rng.random_range(0..a.len())]);
                ScoreCard::new(format!("ref{set}"), format!("rev{i}"), comps).unwrap()
            })
            .collect();
        let agg = aggregate_reviews(&reviews).map_err(|e| e.to_string())?;
        let mean_of_sums = reviews.iter().map(|c| f64::from(c.total())).sum::<f64>() / n as f64;
        ensure((agg.total - mean_of_sums).abs() <= 1e-12, format!("set {set}: {} vs {mean_of_sums}", agg.total))?;
    }
    Ok("72 cards, unique 0 and 15; 100 review sets agree".into())
}

// 9 ------------------------------------------------------------------------

fn c9_end_to_end() -> Result<String, String> {
    let inputs = [(fixture("pubmed-set.bib"), InputFormat::Bibtex), (fixture("pubmed-set.nbib"), InputFormat::Nbib)];
    let (store, _) = ingest_files(&inputs, Execution::default()).map_err(|e| e.to_string())?;
    let records: Vec<PaperRecord> =
        store.records().iter().filter(|r| !r.abstract_or_empty().trim().is_empty()).take(10).cloned().collect();
    ensure(records.len() == 10, "fewer than 10 records with abstracts")?;

    let template = builtin_qa_prompt();
    let clock = FixedClock::at("2025-02-01T12:00:00Z");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, exec) in [Execution::Parallel, Execution::Parallel, Execution::Sequential].into_iter().enumerate() {
        let backend = MockBackend::new()
            .with_rule(records[2].title.clone(), MockStep::Prose)
            .with_rule(records[6].title.clone(), MockStep::MissingAnswer);
        let out = dir.path().join(format!("run{i}.jsonl"));
        let mut opts = RunOptions::new(&clock);
        opts.exec = exec;
        let report = run_generation(&records, &template, &backend, &GenParams::default(), &out, &opts)
            .map_err(|e| e.to_string())?;
        let counts = (report.attempted, report.succeeded, report.extraction_failed);
        ensure(counts == (10, 8, 2), format!("run {i}: attempted/succeeded/extraction_failed = {counts:?}"))?;
        ensure(report.is_balanced(), "report counters do not add up")?;
        let (pairs, warnings) = load_store(&out).map_err(|e| e.to_string())?;
        ensure(pairs.len() == 8 && warnings.is_empty(), format!("run {i}: {} valid lines, {warnings:?}", pairs.len()))?;
        let bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
        ensure(bytes.iter().filter(|&&b| b == b'\n').count() == 8, "extra lines in output")?;
        outputs.push(bytes);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), "outputs are not byte-identical")?;
    Ok("10 attempted, 8 written, 2 extraction failures; 3 runs byte-identical".into())
}

// 10 -----------------------------------------------------------------------

fn c10_extraction() -> Result<String, String> {
    let ok = |q: &str, a: &str| Ok(ExtractedQa { question: q.into(), answer: a.into() });
    let cases: Vec<(&str, Result<ExtractedQa, ExtractError>)> = vec![
        (r#"{"question":"Q","answer":"A"}"#, ok("Q", "A")),
        ("```json\n{\"question\":\"Q\",\"answer\":\"A\"}\n```", ok("Q", "A")),
        ("```\n{\"question\":\"Q\",\"answer\":\"A\"}\n```", ok("Q", "A")),
        (r#"Sure, here you go: {"question":"Q","answer":"A"} Hope it helps."#, ok("Q", "A")),
        (r#"{"question":"Q {x}","answer":"A","meta":{"k":{"n":1}}}"#, ok("Q {x}", "A")),
        (r#"{"wrapper":{"question":"Q","answer":"A"}}"#, ok("Q", "A")),
        (r#"{"question":"Q1","answer":"A1"} {"question":"Q2","answer":"A2"}"#, ok("Q1", "A1")),
        (r#"{"question":"a \"quoted\" }","answer":"B"}"#, ok("a \"quoted\" }", "B")),
        (r#"{"question":"  padded  ","answer":"A"}"#, ok("  padded  ", "A")),
        ("The question is Q and the answer is A.", Err(ExtractError::NoJsonFound)),
        ("", Err(ExtractError::NoJsonFound)),
        (r#"{"question":"Q","answer":"A""#, Err(ExtractError::NoJsonFound)),
        ("{not json at all}", Err(ExtractError::NoJsonFound)),
        (r#"["question","answer"]"#, Err(ExtractError::NoJsonFound)),
        (r#"{"question":"Q"}"#, Err(ExtractError::MissingKeys("answer"))),
        (r#"{"answer":"A"}"#, Err(ExtractError::MissingKeys("question"))),
        (r#"{"question":"Q","answer":42}"#, Err(ExtractError::NonStringValue("answer"))),
        (r#"{"question":null,"answer":"A"}"#, Err(ExtractError::NonStringValue("question"))),
        (r#"{"question":["Q"],"answer":"A"}"#, Err(ExtractError::NonStringValue("question"))),
        (r#"{"question":"Q"} then {"question":"Q2","answer":"A2"}"#, ok("Q2", "A2")),
    ];
    for (input, want) in &cases {
        let got = extract_qa_json(input);
        ensure(&got == want, format!("{input:?}: got {got:?}, want {want:?}"))?;
    }
    Ok(format!("{} cases", cases.len()))
}
