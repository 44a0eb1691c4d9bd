use std::collections::HashMap;
use std::path::{Path, PathBuf};

use qaforge_core::clock::SystemClock;
use qaforge_core::evaluation::{group_totals, load_scores, loss_report, score_report, ReportFormat};
use qaforge_core::finetune::trainer::SyntheticTrainer;
use qaforge_core::finetune::{
    build_manifest_with, emit_experiment_bundle, load_results, record_result, split_training_set, ExperimentSpec,
    WhitespaceCounter,
};
use qaforge_core::generation::{run_generation, GenParams, HttpBackend, MockBackend, ModelBackend, RunOptions};
use qaforge_core::io::write_atomic;
use qaforge_core::prompt::{render, PromptTemplate, RenderContext, TemplateLibrary};
use qaforge_core::qa::load_store;
use qaforge_core::reference::{export_store, import_store, ingest_files, InputFormat, RecordStore, StoreFormat};
use qaforge_core::{Execution, Warning};
use qaforge_server::ServiceConfig;

use crate::args::*;
use crate::CliError;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.command {
        Command::Ingest(a) => ingest(a, exec),
        Command::Serve(a) => serve(a),
        Command::Render(a) => render_cmd(a),
        Command::Sample(a) => sample(a, exec),
        Command::Generate(a) => generate(a, exec),
        Command::Score(a) => score(a, exec),
        Command::Report(a) => report(a),
    }
}

fn log_warnings(source: &str, warnings: &[Warning]) {
    for w in warnings {
        log::warn!("{source}: {w}");
    }
}

fn table_format(f: TableFormat) -> ReportFormat {
    match f {
        TableFormat::Csv => ReportFormat::Csv,
        TableFormat::Text => ReportFormat::Text,
    }
}

fn load_records(path: &Path) -> Result<RecordStore, CliError> {
    let format = StoreFormat::from_path(path).ok_or_else(|| {
        CliError::Usage(format!("{}: record store must end in .yaml, .yml or .jsonl", path.display()))
    })?;
    import_store(path, format).map_err(|e| CliError::runtime("StoreError", format!("{}: {e}", path.display())))
}

fn templates(dir: Option<&Path>) -> Result<TemplateLibrary, CliError> {
    match dir {
        Some(d) => TemplateLibrary::load_dir(d).map_err(|e| CliError::runtime("TemplateError", e)),
        None => Ok(TemplateLibrary::default()),
    }
}

fn template(dir: Option<&Path>, name: &str) -> Result<PromptTemplate, CliError> {
    templates(dir)?.get(name).cloned().map_err(|e| CliError::Usage(e.to_string()))
}

fn ingest(a: IngestArgs, exec: Execution) -> Result<(), CliError> {
    if a.bibtex_files.is_empty() && a.nbib_files.is_empty() {
        return Err(CliError::Usage("give at least one of --bibtex_files or --nbib_files".into()));
    }
    let (format, out) = match a.output_type {
        OutputType::Yaml => (StoreFormat::Yaml, a.yaml_file),
        OutputType::Jsonl => (StoreFormat::Jsonl, a.jsonl_file),
    };
    let out = out.ok_or_else(|| {
        CliError::Usage(match format {
            StoreFormat::Yaml => "--output_type yaml needs --yaml_file".into(),
            StoreFormat::Jsonl => "--output_type jsonl needs --jsonl_file".into(),
        })
    })?;
    let inputs: Vec<(PathBuf, InputFormat)> = a
        .bibtex_files
        .into_iter()
        .map(|p| (p, InputFormat::Bibtex))
        .chain(a.nbib_files.into_iter().map(|p| (p, InputFormat::Nbib)))
        .collect();
    let (store, warnings) = ingest_files(&inputs, exec).map_err(|e| CliError::runtime("ParseError", e))?;
    log_warnings("ingest", &warnings);
    export_store(&store, format, &out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
    eprintln!("wrote {} records to {} ({} warnings)", store.len(), out.display(), warnings.len());
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let cfg = ServiceConfig {
        host: a.host,
        port: a.port,
        qa_file: a.file,
        records_file: a.records,
        static_dir: a.static_dir,
        fsync: a.fsync,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::io)?;
    runtime
        .block_on(qaforge_server::serve(&cfg, async {
            let _ = tokio::signal::ctrl_c().await;
        }))
        .map_err(|e| CliError::runtime("ServerError", e))
}

/// A JSON object (e.g. a record line) contributes its string fields plus
/// `abstract`; `key=value` items set one variable each.
fn parse_context(items: &[String]) -> Result<RenderContext, CliError> {
    let mut ctx = RenderContext::new();
    for item in items {
        let trimmed = item.trim_start();
        if trimmed.starts_with('{') {
            let value: serde_json::Value =
                serde_json::from_str(trimmed).map_err(|e| CliError::Usage(format!("--context JSON: {e}")))?;
            let obj = value.as_object().ok_or_else(|| CliError::Usage("--context JSON must be an object".into()))?;
            for (k, v) in obj {
                match v {
                    serde_json::Value::String(s) => {
                        ctx.insert(k.clone(), s.clone());
                    }
                    serde_json::Value::Array(items) => {
                        let parts: Vec<&str> = items.iter().filter_map(|v| v.as_str()).collect();
                        ctx.insert(k.clone(), parts.join("; "));
                    }
                    serde_json::Value::Number(n) => {
                        ctx.insert(k.clone(), n.to_string());
                    }
                    _ => {}
                }
            }
        } else {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--context {item:?}: expected KEY=VALUE or a JSON object")))?;
            ctx.insert(k.trim().to_string(), v.to_string());
        }
    }
    Ok(ctx)
}

fn render_cmd(a: RenderArgs) -> Result<(), CliError> {
    let t = template(a.templates_dir.as_deref(), &a.template)?;
    let ctx = parse_context(&a.context)?;
    for v in t.empty_vars(&ctx) {
        log::warn!("placeholder {v:?} rendered with an empty value");
    }
    let text = render(&t, &ctx).map_err(|e| CliError::Usage(e.to_string()))?;
    match a.out {
        Some(path) => {
            write_atomic(&path, text.as_bytes()).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sample(a: SampleArgs, exec: Execution) -> Result<(), CliError> {
    let (pairs, warnings) = load_store(&a.qa).map_err(|e| CliError::io(format!("{}: {e}", a.qa.display())))?;
    log_warnings(&a.qa.display().to_string(), &warnings);
    let records = load_records(&a.records)?;
    let size = usize::try_from(a.size).map_err(|_| CliError::Usage("--size too large".into()))?;
    let (train_pairs, rest) =
        split_training_set(&pairs, size, a.seed).map_err(|e| CliError::runtime("SizeExceedsPopulation", e))?;
    let mut spec = ExperimentSpec::new(&a.model, size, a.seed);
    spec.hyper.max_token_len = a.max_token_len;
    let (train, w1) = build_manifest_with(&train_pairs, &records, &WhitespaceCounter, a.max_token_len, exec);
    let held_out: Vec<_> = rest.into_iter().take(a.eval_size).collect();
    let (eval, w2) = build_manifest_with(&held_out, &records, &WhitespaceCounter, a.max_token_len, exec);
    log_warnings("train manifest", &w1);
    log_warnings("eval manifest", &w2);
    emit_experiment_bundle(&spec, &train, &eval, &a.out).map_err(|e| match e {
        qaforge_core::finetune::BundleError::Io(e) => CliError::io(format!("{}: {e}", a.out.display())),
        other => CliError::runtime("BundleError", other),
    })?;
    eprintln!(
        "wrote bundle to {} ({} train, {} eval examples, {} warnings)",
        a.out.display(),
        train.len(),
        eval.len(),
        w1.len() + w2.len()
    );
    if let Some(path) = a.stub_results {
        let result = SyntheticTrainer::default().run(&spec);
        record_result(&path, &result).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn generate(a: GenerateArgs, exec: Execution) -> Result<(), CliError> {
    let t = template(a.templates_dir.as_deref(), &a.template)?;
    let records = load_records(&a.records)?;
    let backend: Box<dyn ModelBackend> = match a.backend {
        BackendKind::Mock => Box::new(MockBackend::new()),
        BackendKind::Http => {
            let url = a
                .endpoint
                .clone()
                .ok_or_else(|| CliError::Usage("--backend http needs --endpoint or QAFORGE_BACKEND_URL".into()))?;
            Box::new(
                HttpBackend::new(url, &a.model)
                    .map_err(|e| CliError::runtime("BackendError", e))?
                    .with_env_token()
                    .with_response_path(&a.response_path),
            )
        }
    };
    let params = GenParams {
        max_tokens: a.max_tokens,
        temperature: a.temperature,
        stop: (!a.stop.is_empty()).then(|| a.stop.clone()),
    };
    let clock = SystemClock;
    let opts = RunOptions { exec, ..RunOptions::new(&clock) };
    let report =
        run_generation(records.records(), &t, backend.as_ref(), &params, &a.out, &opts).map_err(|e| match e {
            qaforge_core::generation::GenerationError::Io(e) => CliError::io(format!("{}: {e}", a.out.display())),
            other => CliError::Usage(other.to_string()),
        })?;
    if let Some(path) = &a.audit_file {
        let mut buf = Vec::new();
        for g in &report.generations {
            buf.extend(serde_json::to_vec(g).expect("generation serialises"));
            buf.push(b'\n');
        }
        write_atomic(path, &buf).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    }
    for f in &report.failures {
        log::info!("{}: {:?}: {}", f.record_id, f.kind, f.message);
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    if report.attempted > 0 && report.backend_failed == report.attempted {
        return Err(CliError::runtime("BackendError", format!("all {} backend requests failed", report.attempted)));
    }
    Ok(())
}

/// `label=path` or bare `path` (label = file stem).
fn split_label(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() && !label.contains(['/', '\\']) => {
            (label.to_string(), PathBuf::from(path))
        }
        _ => {
            let path = PathBuf::from(spec);
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.to_string());
            (label, path)
        }
    }
}

fn score(a: ScoreArgs, exec: Execution) -> Result<(), CliError> {
    let (cards, warnings) = load_scores(&a.input).map_err(|e| CliError::io(format!("{}: {e}", a.input.display())))?;
    log_warnings(&a.input.display().to_string(), &warnings);
    let mut labels = HashMap::new();
    for spec in &a.qa {
        let (label, path) = split_label(spec);
        if !path.exists() {
            return Err(CliError::io(format!("{}: no such file", path.display())));
        }
        let (pairs, warns) = load_store(&path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        log_warnings(&path.display().to_string(), &warns);
        for p in &pairs {
            labels.insert(p.reference(), label.clone());
        }
    }
    let (groups, warns) = group_totals(&cards, &labels);
    log_warnings("score", &warns);
    print!("{}", score_report(&groups, exec).render(table_format(a.report)));
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), CliError> {
    if !a.results.exists() {
        return Err(CliError::io(format!("{}: no such file", a.results.display())));
    }
    let (results, warnings) =
        load_results(&a.results).map_err(|e| CliError::io(format!("{}: {e}", a.results.display())))?;
    log_warnings(&a.results.display().to_string(), &warnings);
    print!("{}", loss_report(&results).render(table_format(a.format)));
    Ok(())
}
