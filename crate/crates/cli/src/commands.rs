use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};

use itinera_core::datagen::{gen_dataset, ingest_flight_csv, read_jsonl, write_jsonl, ColumnMap};
use itinera_core::eval::{
    dominant_error_mix, evaluate_corpus, profile_phases, report_markdown, CorruptingTranslator,
};
use itinera_core::milp::ObjectiveMode;
use itinera_core::model::{
    exact_match, request_from_value, DatasetRecord, Inventory, SymbolicRequest,
};
use itinera_core::nl::{
    render_nl_variant, translator_for, EndpointConfig, TemplateTranslator, Translator,
    TranslatorBackend, DEFAULT_SYSTEM_PROMPT, NUM_VARIANTS,
};
use itinera_core::pipeline::plan;

use crate::config::GlobalConfig;
use crate::{CliError, Output};

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn read_records(path: &Path) -> Result<Vec<DatasetRecord>, CliError> {
    let file = File::open(path).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    read_jsonl(BufReader::new(file)).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.3}"))
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Number of records.
    #[arg(long)]
    pub count: u64,
    /// Output JSON-lines file.
    #[arg(long)]
    pub out: PathBuf,
    /// Real flight table to sample flights from.
    #[arg(long, requires = "column_map")]
    pub csv: Option<PathBuf>,
    /// JSON object mapping flight fields to CSV column names.
    #[arg(long, requires = "csv")]
    pub column_map: Option<PathBuf>,
    /// Probability of rendering a record's text with two leg dates swapped.
    #[arg(long, value_name = "PROB")]
    pub simulate_noise: Option<f64>,
}

pub fn gen(cfg: &GlobalConfig, args: &GenArgs) -> Result<Output, CliError> {
    let mut params = cfg.gen_params();
    if let Some(p) = args.simulate_noise {
        params.date_swap_noise = p;
    }
    params
        .validate()
        .map_err(|e| CliError::Usage(format!("gen.{e}")))?;
    let mut summary = json!({});
    let base = match (&args.csv, &args.column_map) {
        (Some(csv), Some(map_path)) => {
            let text = std::fs::read_to_string(map_path)
                .map_err(|e| domain(format!("{}: {e}", map_path.display())))?;
            let map: ColumnMap = serde_json::from_str(&text)
                .map_err(|e| domain(format!("{}: {e}", map_path.display())))?;
            let (table, report) = ingest_flight_csv(csv, &map).map_err(domain)?;
            summary["csv_rows_read"] = json!(report.rows_read);
            summary["csv_rows_skipped"] = json!(report.skipped.len());
            Some(table)
        }
        _ => None,
    };
    let records = gen_dataset(&params, args.count, base.as_ref());
    let file =
        File::create(&args.out).map_err(|e| domain(format!("{}: {e}", args.out.display())))?;
    let mut w = BufWriter::new(file);
    write_jsonl(&records, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| domain(format!("{}: {e}", args.out.display())))?;
    summary["count"] = json!(records.len());
    summary["seed"] = json!(params.rng_seed);
    summary["out"] = json!(args.out);
    let text = format!(
        "wrote {} records to {} (seed {})",
        records.len(),
        args.out.display(),
        params.rng_seed
    );
    Ok(Output {
        json: summary,
        text,
    })
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// JSON object with `request` and `inventory`.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "min_cost", value_parser = parse_mode)]
    pub mode: ObjectiveMode,
    /// Include search statistics and model size.
    #[arg(long)]
    pub dump_stats: bool,
    #[arg(long)]
    pub time_limit_ms: Option<u64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
}

fn parse_mode(s: &str) -> Result<ObjectiveMode, String> {
    s.parse()
}

#[derive(Deserialize)]
struct Instance {
    request: Value,
    inventory: Inventory,
}

fn read_instance(path: &Path) -> Result<(SymbolicRequest, Inventory), CliError> {
    let shown = path.display();
    let text = std::fs::read_to_string(path).map_err(|e| domain(format!("{shown}: {e}")))?;
    let inst: Instance =
        serde_json::from_str(&text).map_err(|e| domain(format!("{shown}: {e}")))?;
    let request = request_from_value(inst.request).map_err(|e| domain(format!("{shown}: {e}")))?;
    inst.inventory
        .validate()
        .map_err(|e| domain(format!("{shown}: inventory: {}", e.0)))?;
    Ok((request, inst.inventory))
}

pub fn solve(cfg: &GlobalConfig, args: &SolveArgs) -> Result<Output, CliError> {
    let (request, inventory) = read_instance(&args.instance)?;
    let params = cfg.model.with_mode(args.mode);
    let mut solver = cfg.solver.clone();
    if let Some(t) = args.time_limit_ms {
        solver.time_limit_ms = t.max(1);
    }
    if args.node_limit.is_some() {
        solver.node_limit = args.node_limit;
    }
    let outcome = plan(&request, &inventory, &params, &solver).map_err(domain)?;
    let feasible = outcome.verdict.as_ref().map(|v| v.is_feasible());
    let mut out = json!({
        "status": outcome.status,
        "mode": args.mode,
        "objective": outcome.objective,
        "itinerary": outcome.itinerary,
        "verified": feasible,
        "violations": outcome.verdict.as_ref().map(|v| &v.violations),
    });
    if args.dump_stats {
        out["stats"] = json!(outcome.stats);
        out["timings"] = json!(outcome.timings);
        out["num_vars"] = json!(outcome.num_vars);
        out["num_constraints"] = json!(outcome.num_constraints);
    }

    let mut text = format!("status: {:?}\n", outcome.status);
    if let Some(it) = &outcome.itinerary {
        for c in &it.chosen_flights {
            let f = inventory
                .flight(&c.flight_id)
                .expect("decoded flight exists");
            text += &format!(
                "leg {}: {} {} -> {} dep {} arr {} {}\n",
                c.leg + 1,
                f.id,
                f.origin,
                f.destination,
                f.departure,
                f.arrival,
                f.price
            );
        }
        for c in &it.chosen_hotels {
            let h = inventory.hotel(&c.hotel_id).expect("decoded hotel exists");
            text += &format!(
                "stay {}: {} rating {} {} per night\n",
                c.stay + 1,
                h.name,
                h.rating,
                h.price_per_night
            );
        }
        text += &format!(
            "flights {} hotels {} total {}\n",
            it.cost.flight_total, it.cost.hotel_total, it.cost.grand_total
        );
    }
    if args.dump_stats {
        text += &format!(
            "vars {} constraints {} nodes {} build {:.2} ms load {:.2} ms solve {:.2} ms\n",
            outcome.num_vars,
            outcome.num_constraints,
            outcome.stats.nodes,
            outcome.timings.build_ms,
            outcome.timings.load_ms,
            outcome.timings.solve_ms
        );
    }
    Ok(Output {
        json: out,
        text: text.trim_end().to_string(),
    })
}

#[derive(Args, Debug)]
pub struct RoundtripArgs {
    /// Dataset to check.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Where to write the full JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Translates each record's stored text and every fixed rendering variant
/// and compares the result with the record's request.
pub fn roundtrip(cfg: &GlobalConfig, args: &RoundtripArgs) -> Result<Output, CliError> {
    let records = read_records(&args.input)?;
    let translator = translator_for(&cfg.translator);
    let (mut checks, mut exact, mut valid) = (0usize, 0usize, 0usize);
    let mut failures = Vec::new();
    for r in &records {
        let mut texts = Vec::new();
        if !r.nl_text.is_empty() {
            texts.push(("stored".to_string(), r.nl_text.clone()));
        }
        for k in 0..NUM_VARIANTS {
            texts.push((format!("variant {k}"), render_nl_variant(&r.request, k)));
        }
        for (source, text) in texts {
            checks += 1;
            match translator.translate(&text) {
                Ok(t) => {
                    valid += usize::from(t.valid_json);
                    let m = exact_match(&r.request, &t.request);
                    if m.is_match {
                        exact += 1;
                    } else {
                        failures.push(json!({
                            "id": r.id, "source": source, "mismatched_fields": m.mismatched_fields,
                        }));
                    }
                }
                Err(e) => failures.push(json!({
                    "id": r.id, "source": source, "error": e.to_string(),
                })),
            }
        }
    }
    let rate = |k: usize| (checks > 0).then(|| k as f64 / checks as f64);
    let report = json!({
        "records": records.len(),
        "checks": checks,
        "exact": exact,
        "em_accuracy": rate(exact),
        "valid_output_rate": rate(valid),
        "failures": failures,
    });
    if let Some(p) = &args.report {
        write_json(p, &report)?;
    }
    let text = format!(
        "{} records, {} checks: EM {} valid {} ({} failures)",
        records.len(),
        checks,
        fmt_opt(rate(exact)),
        fmt_opt(rate(valid)),
        failures.len()
    );
    Ok(Output { json: report, text })
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Corpus of generated records.
    #[arg(long)]
    pub data: PathBuf,
    /// `template` or `endpoint:URL`; defaults to the configured translator.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub subsets: usize,
    /// Where to write the JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Render tables as Markdown, to PATH or stdout.
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    pub emit_markdown: Option<Option<PathBuf>>,
    /// Corrupt this share of template translations with the dominant error mix.
    #[arg(long, value_name = "RATE")]
    pub corrupt_rate: Option<f64>,
    /// Time each phase on the first record, repeated N times.
    #[arg(long, value_name = "N")]
    pub profile: Option<usize>,
}

fn backend_from_flag(
    cfg: &GlobalConfig,
    flag: Option<&str>,
) -> Result<TranslatorBackend, CliError> {
    match flag {
        None => Ok(cfg.translator.clone()),
        Some("template") => Ok(TranslatorBackend::TemplateParser),
        Some(s) => {
            let Some(url) = s.strip_prefix("endpoint:") else {
                return Err(CliError::Usage(format!(
                    "--backend: expected `template` or `endpoint:URL`, got `{s}`"
                )));
            };
            let mut c = match &cfg.translator {
                TranslatorBackend::ExternalEndpoint(c) => c.clone(),
                TranslatorBackend::TemplateParser => EndpointConfig {
                    url: String::new(),
                    model: "default".into(),
                    timeout_ms: 30_000,
                    max_retries: 2,
                    system_prompt: DEFAULT_SYSTEM_PROMPT.into(),
                },
            };
            c.url = url.to_string();
            let b = TranslatorBackend::ExternalEndpoint(c);
            b.validate()
                .map_err(|e| CliError::Usage(format!("--backend: {e}")))?;
            Ok(b)
        }
    }
}

pub fn eval(cfg: &GlobalConfig, args: &EvalArgs) -> Result<Output, CliError> {
    let backend = backend_from_flag(cfg, args.backend.as_deref())?;
    let translator: Box<dyn Translator> = match args.corrupt_rate {
        Some(rate) if !(0.0..=1.0).contains(&rate) => {
            return Err(CliError::Usage(format!(
                "--corrupt-rate: {rate} is outside [0, 1]"
            )))
        }
        Some(_) if backend != TranslatorBackend::TemplateParser => {
            return Err(CliError::Usage(
                "--corrupt-rate needs the template backend".into(),
            ))
        }
        Some(rate) => Box::new(CorruptingTranslator {
            rate,
            mix: dominant_error_mix(),
            seed: cfg.gen_params().rng_seed,
        }),
        None => translator_for(&backend),
    };
    let records = read_records(&args.data)?;
    let mut report = evaluate_corpus(
        &records,
        translator.as_ref(),
        args.subsets,
        &cfg.model,
        &cfg.solver,
    );
    if let (Some(reps), Some(first)) = (args.profile, records.first()) {
        let t = profile_phases(
            &first.nl_text,
            &TemplateTranslator,
            &first.inventory,
            &cfg.model,
            &cfg.solver,
            reps,
        )
        .map_err(domain)?;
        report.timings = Some(t);
    }
    if let Some(p) = &args.out {
        write_json(p, &report)?;
    }
    let mut text = format!(
        "{} records: EM {} valid {} score {} ± {} ({} failures)",
        report.count,
        fmt_opt(report.em_accuracy),
        fmt_opt(report.valid_output_rate),
        fmt_opt(report.score_mean),
        fmt_opt(report.score_std),
        report.failures
    );
    match &args.emit_markdown {
        Some(Some(path)) => {
            std::fs::write(path, report_markdown(&report))
                .map_err(|e| domain(format!("{}: {e}", path.display())))?;
        }
        Some(None) => text = format!("{text}\n\n{}", report_markdown(&report)),
        None => {}
    }
    let mut summary = serde_json::to_value(&report).expect("reports serialize");
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("records");
    }
    Ok(Output {
        json: summary,
        text: text.trim_end().to_string(),
    })
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Inventory file; overrides `serve.dataset_path`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub session_log: Option<PathBuf>,
    /// Solve the three modes on separate threads.
    #[arg(long)]
    pub parallel_modes: bool,
}

pub fn serve(cfg: &GlobalConfig, args: &ServeArgs) -> Result<Output, CliError> {
    let mut sc = cfg.service_config();
    if let Some(d) = &args.dataset {
        sc.dataset_path = d.clone();
    }
    if let Some(b) = &args.bind {
        sc.bind = b.clone();
    }
    if let Some(p) = args.port {
        sc.port = p;
    }
    if let Some(l) = &args.session_log {
        sc.session_log = Some(l.clone());
    }
    sc.parallel_modes |= args.parallel_modes;
    let runtime = tokio::runtime::Runtime::new().map_err(domain)?;
    runtime
        .block_on(itinera_service::serve(sc))
        .map_err(|e| match e {
            itinera_service::ServiceError::Config(m) => CliError::Usage(m),
            other => domain(other),
        })?;
    Ok(Output {
        json: json!({ "status": "stopped" }),
        text: "stopped".into(),
    })
}
