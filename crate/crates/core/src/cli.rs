//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration, 4 data, 5 numeric failure.
//! Failures print one JSON line on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::augment::augment_corpus;
use crate::cascade::{diagnosis_csv, split_dataset, train_cascade, CascadeModel, LabeledDataset, Split, SplitLevel};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evalkit::{
    ablation_study, ablation_table, band_study_table, band_width_study, component_importance, evaluate, loo_baseline,
    Component, Table,
};
use crate::flightlog::{
    list_flights, meta_path, parse_log, read_flight, validate, write_flight_with, DamageLabel, FlightLog, FlightMeta,
    TypeClass, WINDOW_LEN,
};
use crate::io::{read_feature_csv, write_atomic, write_feature_csv, Provenance};
use crate::plot::{bar_chart, line_chart};
use crate::spectral::{window_count, Channel, FeatureSchema};
use crate::synthgen::{build_corpus, default_damage_list, CorpusDurations};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn error_kind(code: i32) -> &'static str {
    match code {
        EXIT_CONFIG => "config",
        EXIT_NUMERIC => "numeric",
        EXIT_USAGE => "usage",
        _ => "data",
    }
}

/// Propeller damage detection, localization and quantification from flight logs.
#[derive(Debug, Parser)]
#[command(name = "propdamage", version)]
pub struct Cli {
    /// TOML run configuration (every field optional)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config (default 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the report as JSON and also write it next to the other artifacts
    #[arg(long, global = true)]
    pub json: bool,
    /// Corpus directory of flight CSVs with sidecars (default ./corpus)
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Output directory (default ./out)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LevelArg {
    Row,
    Flight,
}

impl From<LevelArg> for SplitLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Row => SplitLevel::Row,
            LevelArg::Flight => SplitLevel::Flight,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the default 18-flight corpus (plus rotated copies) into the corpus directory
    Synth {
        /// Scale the reference window counts by this factor
        #[arg(long, conflicts_with = "duration")]
        scale: Option<f64>,
        /// Give every flight this duration in seconds
        #[arg(long)]
        duration: Option<f64>,
        /// Write only the unrotated flights
        #[arg(long)]
        no_augment: bool,
    },
    /// Validate external flight logs and copy them into the corpus directory
    Ingest {
        /// Directory with flight CSVs and sidecars
        #[arg(long)]
        input: PathBuf,
    },
    /// Extract the windowed band-energy feature matrix of the corpus
    Features {
        /// Band width in Hz, one of 2,3,4,5,6,7,8,10 (default 5)
        #[arg(long)]
        bw: Option<usize>,
        /// Output CSV (default <out>/features.csv)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write rotated copies of every flight for the other rotor positions
    Augment {
        /// Directory with flight CSVs and sidecars
        #[arg(long)]
        input: PathBuf,
        /// Destination directory (default <out>/augmented)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Assign windows to train/val/test (40/30/30)
    Split {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Train the cascade and save the model bundle
    Train {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Confusion matrices, localization and regression summaries of a model
    Eval {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Diagnose every window of one flight log
    Infer {
        #[command(flatten)]
        model: ModelArg,
        /// Flight CSV; a sidecar is optional
        #[arg(long)]
        log: PathBuf,
        /// Diagnosis CSV (default <out>/diagnosis/<flight>.csv)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Permutation feature importance of cascade components
    Importance {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        data: DataArgs,
        /// type_svm, tipcut_loc_svm, long_loc_svm, tipcut_nn, long_nn or all (default all)
        #[arg(long, default_value = "all")]
        component: String,
        /// Column shuffles per feature (default 5)
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Retrain the type classifier for several band widths
    Bandstudy {
        /// Comma-separated widths in Hz (default 2,3,4,5,6,7,8,10)
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
    },
    /// Retrain the tip-cut network on sensor subsets
    Ablate {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Leave-one-group-out comparison of the quadratic classifier and the network
    Loo {
        /// Held-out tip-cut class as CUT1-CUT2 in mm (default 20-20)
        #[arg(long)]
        held_out: Option<String>,
    },
}

#[derive(Debug, clap::Args)]
pub struct DataArgs {
    /// Feature CSV to use instead of extracting from the corpus
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Split CSV from the `split` subcommand (default: split with the seed)
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Split granularity (default row)
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
}

#[derive(Debug, clap::Args)]
pub struct ModelArg {
    /// Model bundle index (default <out>/model/cascade.json)
    #[arg(long)]
    pub model: Option<PathBuf>,
}

/// Structured result of a subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub provenance: Provenance,
    pub summary: Value,
    pub artifacts: Vec<PathBuf>,
    #[serde(skip)]
    pub text: String,
}

struct Ctx {
    cfg: RunConfig,
    prov: Provenance,
    corpus: PathBuf,
    out: PathBuf,
    json: bool,
    artifacts: Vec<PathBuf>,
}

impl Ctx {
    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.artifacts.push(path.to_path_buf());
        Ok(())
    }

    fn write_table(&mut self, dir: &Path, stem: &str, table: &Table) -> Result<()> {
        let head = self.prov.csv_comment();
        self.write(&dir.join(format!("{stem}.csv")), format!("{head}\n{}", table.to_csv()).as_bytes())?;
        self.write(&dir.join(format!("{stem}.txt")), format!("{head}\n{}", table.to_text()).as_bytes())
    }

    fn write_svg(&mut self, path: &Path, svg: &str) -> Result<()> {
        let comment = self.prov.csv_comment().trim_start_matches("# ").replace("--", "-");
        self.write(path, format!("<!-- {comment} -->\n{svg}").as_bytes())
    }

    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let doc = json!({ "provenance": self.prov, "report": value });
        self.write(path, serde_json::to_string_pretty(&doc)?.as_bytes())
    }

    fn level(&self, arg: Option<LevelArg>) -> SplitLevel {
        arg.map(Into::into).unwrap_or(self.cfg.training.split_level)
    }

    fn model_path(&self, arg: &ModelArg) -> PathBuf {
        arg.model.clone().unwrap_or_else(|| self.out.join("model").join("cascade.json"))
    }

    fn schema(&self) -> Result<FeatureSchema> {
        FeatureSchema::new(self.cfg.features.band_width_hz)
    }

    fn corpus_logs(&self) -> Result<Vec<FlightLog>> {
        read_dir_logs(&self.corpus)
    }

    /// Feature matrix from `--features` or the corpus, tagged with a split.
    fn dataset(&self, data: &DataArgs, schema: FeatureSchema) -> Result<LabeledDataset> {
        let mut ds = match &data.features {
            Some(p) => {
                let text = read_input(p)?;
                let (file_schema, rows) = read_feature_csv(&text)?;
                if file_schema != schema {
                    return Err(Error::SchemaMismatch {
                        expected: schema.id(),
                        got: file_schema.id(),
                    });
                }
                LabeledDataset::from_rows(schema, &rows)?
            }
            None => LabeledDataset::from_logs(&self.corpus_logs()?, schema, self.cfg.features.stride)?,
        };
        if ds.is_empty() {
            return Err(Error::InsufficientData("no windows in the dataset".into()));
        }
        match &data.split {
            Some(p) => apply_split_file(&mut ds, &read_input(p)?)?,
            None => split_dataset(&mut ds, self.cfg.seed, self.level(data.level))?,
        }
        Ok(ds)
    }
}

fn read_input(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))
}

fn read_dir_logs(dir: &Path) -> Result<Vec<FlightLog>> {
    if !dir.is_dir() {
        return Err(Error::InvalidInput(format!("{} is not a directory", dir.display())));
    }
    let files = list_flights(dir)?;
    if files.is_empty() {
        return Err(Error::InsufficientData(format!("no flight logs in {}", dir.display())));
    }
    files
        .iter()
        .map(|f| read_flight(f).map_err(|e| Error::InvalidInput(format!("{}: {e}", f.display()))))
        .collect()
}

pub const SPLIT_HEADER: &str = "flight_id,start_index,split";

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Val => "val",
        Split::Test => "test",
    }
}

pub fn split_csv(ds: &LabeledDataset, prov: Option<&Provenance>) -> String {
    let mut s = String::new();
    if let Some(p) = prov {
        s.push_str(&p.csv_comment());
        s.push('\n');
    }
    s.push_str(SPLIT_HEADER);
    s.push('\n');
    for i in 0..ds.len() {
        s.push_str(&format!("{},{},{}\n", ds.flight_ids[i], ds.start_indices[i], split_name(ds.split[i])));
    }
    s
}

/// Tags `ds` from a split CSV; every row must be covered.
pub fn apply_split_file(ds: &mut LabeledDataset, text: &str) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut map = std::collections::HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = || Error::Parse {
            row: i + 1,
            msg: "expected flight_id,start_index,split".into(),
        };
        let start: usize = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let split = match rec.get(2) {
            Some("train") => Split::Train,
            Some("val") => Split::Val,
            Some("test") => Split::Test,
            _ => return Err(bad()),
        };
        map.insert((rec[0].to_string(), start), split);
    }
    ds.split = (0..ds.len())
        .map(|i| {
            map.get(&(ds.flight_ids[i].clone(), ds.start_indices[i]))
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("split file misses {}@{}", ds.flight_ids[i], ds.start_indices[i])))
        })
        .collect::<Result<_>>()?;
    Ok(())
}

fn parse_held_out(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("held-out class must look like 20-20, got '{s}'"));
    let (a, b) = s.split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match &cli.command {
        Command::Features { bw: Some(bw), .. } => cfg.features.band_width_hz = *bw,
        Command::Bandstudy { widths: Some(w) } => cfg.studies.band_widths = w.clone(),
        Command::Importance { repeats: Some(r), .. } => cfg.studies.importance_repeats = *r,
        Command::Loo { held_out: Some(h) } => {
            let (a, b) = parse_held_out(h)?;
            cfg.studies.loo_held_out = [a, b];
        }
        _ => {}
    }
    if let Some(p) = &cli.corpus {
        cfg.paths.corpus_dir = p.clone();
    }
    if let Some(p) = &cli.out {
        cfg.paths.output_dir = p.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Hash of the configuration without its paths, so relocating outputs keeps artifacts identical.
fn config_hash(cfg: &RunConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.paths = Default::default();
    c.hash()
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth { .. } => "synth",
        Command::Ingest { .. } => "ingest",
        Command::Features { .. } => "features",
        Command::Augment { .. } => "augment",
        Command::Split { .. } => "split",
        Command::Train { .. } => "train",
        Command::Eval { .. } => "eval",
        Command::Infer { .. } => "infer",
        Command::Importance { .. } => "importance",
        Command::Bandstudy { .. } => "bandstudy",
        Command::Ablate { .. } => "ablate",
        Command::Loo { .. } => "loo",
    }
}

/// Runs the parsed command and returns its report.
pub fn execute(cli: &Cli) -> Result<Report> {
    let cfg = load_config(cli)?;
    let prov = Provenance::new(config_hash(&cfg)?, vec![cfg.seed]);
    let mut ctx = Ctx {
        corpus: cfg.paths.corpus_dir.clone(),
        out: cfg.paths.output_dir.clone(),
        cfg,
        prov,
        json: cli.json,
        artifacts: Vec::new(),
    };
    let (summary, text) = match &cli.command {
        Command::Synth {
            scale,
            duration,
            no_augment,
        } => cmd_synth(&mut ctx, *scale, *duration, *no_augment)?,
        Command::Ingest { input } => cmd_ingest(&mut ctx, input)?,
        Command::Features { output, .. } => cmd_features(&mut ctx, output.as_deref())?,
        Command::Augment { input, output } => cmd_augment(&mut ctx, input, output.as_deref())?,
        Command::Split { data } => cmd_split(&mut ctx, data)?,
        Command::Train { data } => cmd_train(&mut ctx, data)?,
        Command::Eval { model, data } => cmd_eval(&mut ctx, model, data)?,
        Command::Infer { model, log, output } => cmd_infer(&mut ctx, model, log, output.as_deref())?,
        Command::Importance {
            model, data, component, ..
        } => cmd_importance(&mut ctx, model, data, component)?,
        Command::Bandstudy { .. } => cmd_bandstudy(&mut ctx)?,
        Command::Ablate { data } => cmd_ablate(&mut ctx, data)?,
        Command::Loo { .. } => cmd_loo(&mut ctx)?,
    };
    let name = command_name(&cli.command);
    if ctx.json {
        let path = ctx.out.join("reports").join(format!("{name}.json"));
        ctx.write_json(&path, &summary)?;
    }
    Ok(Report {
        command: name.to_string(),
        provenance: ctx.prov,
        summary,
        artifacts: ctx.artifacts,
        text,
    })
}

/// Entry point used by the binary: parse, execute, print, return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = e.print();
            } else {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                eprintln!("{}", json!({ "error": error_kind(code), "code": code, "message": first }));
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(r) => {
            if cli.json {
                println!("{}", serde_json::to_string(&r).unwrap_or_default());
            } else {
                print!("{}", r.text);
                println!("wrote {} artifact(s) under {}", r.artifacts.len(), cli_out_hint(&r));
            }
            EXIT_OK
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", json!({ "error": error_kind(code), "code": code, "message": e.to_string() }));
            code
        }
    }
}

fn cli_out_hint(r: &Report) -> String {
    r.artifacts
        .first()
        .and_then(|p| p.parent())
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "-".into())
}

type Outcome = Result<(Value, String)>;

fn cmd_synth(ctx: &mut Ctx, scale: Option<f64>, duration: Option<f64>, no_augment: bool) -> Outcome {
    let durations = match (scale, duration) {
        (Some(f), _) => CorpusDurations::Scaled(f),
        (None, Some(d)) => CorpusDurations::Fixed(d),
        (None, None) => ctx.cfg.synth.durations,
    };
    let template = ctx.cfg.synth_template();
    let mut logs = build_corpus(&template, &default_damage_list(), durations)?;
    if ctx.cfg.synth.augment && !no_augment {
        logs = augment_corpus(&logs, &ctx.cfg.geometry)?;
    }
    let stride = ctx.cfg.features.stride;
    let mut table = Table::new(&["flight", "samples", "windows"]);
    let mut windows = 0;
    let corpus = ctx.corpus.clone();
    for log in &logs {
        write_flight_with(&corpus, log, Some(&ctx.prov))?;
        ctx.artifacts.push(crate::flightlog::csv_path(&corpus, &log.flight_id));
        ctx.artifacts.push(meta_path(&corpus, &log.flight_id));
        let w = window_count(log.len(), WINDOW_LEN, stride);
        windows += w;
        table.push(vec![log.flight_id.clone(), log.len().to_string(), w.to_string()]);
    }
    let text = format!("{}synthesized {} flights, {windows} windows\n", table.to_text(), logs.len());
    Ok((json!({ "flights": logs.len(), "windows": windows, "corpus_dir": corpus }), text))
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn cmd_ingest(ctx: &mut Ctx, input: &Path) -> Outcome {
    if same_dir(input, &ctx.corpus) {
        return Err(Error::InvalidInput("ingest input and corpus directory must differ".into()));
    }
    let logs = read_dir_logs(input)?;
    let mut table = Table::new(&["flight", "samples", "duration_s", "label", "rate_ok", "gaps"]);
    for log in &logs {
        let v = validate(log);
        if !(v.rate_ok && v.finite_ok && v.length_ok) {
            return Err(Error::Validation {
                row: 0,
                msg: format!("{}: {v:?}", log.flight_id),
            });
        }
        if v.gap_count > 0 {
            log::warn!("{}: {} timestamp gaps", log.flight_id, v.gap_count);
        }
        table.push(vec![
            log.flight_id.clone(),
            log.len().to_string(),
            format!("{:.2}", log.duration_s()),
            log.label.damage_name(),
            v.rate_ok.to_string(),
            v.gap_count.to_string(),
        ]);
    }
    let corpus = ctx.corpus.clone();
    for log in &logs {
        write_flight_with(&corpus, log, Some(&ctx.prov))?;
        ctx.artifacts.push(crate::flightlog::csv_path(&corpus, &log.flight_id));
    }
    let out = ctx.out.join("reports");
    ctx.write_table(&out, "ingest", &table)?;
    Ok((json!({ "flights": logs.len() }), table.to_text()))
}

fn cmd_features(ctx: &mut Ctx, output: Option<&Path>) -> Outcome {
    let schema = ctx.schema()?;
    let ds = LabeledDataset::from_logs(&ctx.corpus_logs()?, schema, ctx.cfg.features.stride)?;
    let path = output.map(Path::to_path_buf).unwrap_or_else(|| ctx.out.join("features.csv"));
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &schema, &ds.to_rows(), Some(&ctx.prov))?;
    ctx.write(&path, &buf)?;
    // mean acc_x band energies per type class
    let mut series = Vec::new();
    for t in TypeClass::ALL {
        let rows: Vec<usize> = (0..ds.len()).filter(|&i| ds.type_class(i) == t).collect();
        if rows.is_empty() {
            continue;
        }
        let pts = (0..schema.n_bands())
            .map(|b| {
                let c = schema.band_index(Channel::AccX, b);
                let m = rows.iter().map(|&i| ds.features[[i, c]]).sum::<f64>() / rows.len() as f64;
                ((b as f64 + 0.5) * schema.band_width_hz as f64, m)
            })
            .collect();
        series.push((t.name().to_string(), pts));
    }
    let svg = line_chart("mean acc_x band energy", "frequency [Hz]", "energy", &series, true)?;
    let plot = ctx.out.join("plots").join("spectra_acc_x.svg");
    ctx.write_svg(&plot, &svg)?;
    let text = format!("{} rows x {} features ({})\n", ds.len(), schema.len(), schema.id());
    Ok((json!({ "rows": ds.len(), "features": schema.len(), "schema_id": schema.id(), "path": path }), text))
}

fn cmd_augment(ctx: &mut Ctx, input: &Path, output: Option<&Path>) -> Outcome {
    let dest = output.map(Path::to_path_buf).unwrap_or_else(|| ctx.out.join("augmented"));
    if same_dir(input, &dest) {
        return Err(Error::InvalidInput("augment output must differ from its input".into()));
    }
    let logs = read_dir_logs(input)?;
    let rotated = augment_corpus(&logs, &ctx.cfg.geometry)?;
    for log in &rotated {
        write_flight_with(&dest, log, Some(&ctx.prov))?;
        ctx.artifacts.push(crate::flightlog::csv_path(&dest, &log.flight_id));
    }
    let text = format!("{} flights -> {} flights in {}\n", logs.len(), rotated.len(), dest.display());
    Ok((json!({ "input_flights": logs.len(), "output_flights": rotated.len() }), text))
}

fn split_counts_json(ds: &LabeledDataset) -> Value {
    let n = |s| ds.indices(Some(s)).len();
    json!({ "train": n(Split::Train), "val": n(Split::Val), "test": n(Split::Test) })
}

fn cmd_split(ctx: &mut Ctx, data: &DataArgs) -> Outcome {
    let ds = ctx.dataset(data, ctx.schema()?)?;
    let path = ctx.out.join("split.csv");
    let text = split_csv(&ds, Some(&ctx.prov));
    ctx.write(&path, text.as_bytes())?;
    let counts = split_counts_json(&ds);
    Ok((counts.clone(), format!("split {} rows: {counts}\n", ds.len())))
}

fn loss_series(losses: &[f64]) -> Vec<(f64, f64)> {
    losses.iter().enumerate().map(|(e, &l)| ((e + 1) as f64, l)).collect()
}

fn cmd_train(ctx: &mut Ctx, data: &DataArgs) -> Outcome {
    let ds = ctx.dataset(data, ctx.schema()?)?;
    let cfg = ctx.cfg.cascade();
    let model = train_cascade(&ds, &cfg)?;
    let mut seeds = vec![ctx.cfg.seed];
    seeds.extend(model.record.seeds.all());
    ctx.prov.seeds = seeds;
    let dir = ctx.out.join("model");
    for (name, text) in model.bundle_files(&ctx.prov)? {
        ctx.write(&dir.join(name), text.as_bytes())?;
    }
    let split_path = ctx.out.join("split.csv");
    let split_text = split_csv(&ds, Some(&ctx.prov));
    ctx.write(&split_path, split_text.as_bytes())?;
    let svg = line_chart(
        "training loss",
        "epoch",
        "mse",
        &[
            ("tipcut_nn".into(), loss_series(&model.tipcut_nn.loss_history)),
            ("long_nn".into(), loss_series(&model.long_nn.loss_history)),
        ],
        true,
    )?;
    let plot = ctx.out.join("plots").join("loss_curves.svg");
    ctx.write_svg(&plot, &svg)?;
    let r = &model.record;
    let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
    let summary = json!({
        "rows": ds.len(),
        "split": split_counts_json(&ds),
        "type_train_counts": r.type_train_counts,
        "type_balanced_count": r.type_balanced_count,
        "tipcut_loc_counts": r.tipcut_loc_counts,
        "long_loc_counts": r.long_loc_counts,
        "tipcut_nn_final_loss": last(&model.tipcut_nn.loss_history),
        "long_nn_final_loss": last(&model.long_nn.loss_history),
        "model": dir.join("cascade.json"),
    });
    let text = format!(
        "trained on {} rows; type classes {:?} balanced to {}; final losses tipcut {:.4}, long {:.4}\nmodel: {}\n",
        ds.len(),
        r.type_train_counts,
        r.type_balanced_count,
        last(&model.tipcut_nn.loss_history),
        last(&model.long_nn.loss_history),
        dir.join("cascade.json").display()
    );
    Ok((summary, text))
}

fn load_model(ctx: &Ctx, arg: &ModelArg) -> Result<CascadeModel> {
    let p = ctx.model_path(arg);
    if !p.is_file() {
        return Err(Error::InvalidInput(format!("no model bundle at {}", p.display())));
    }
    CascadeModel::load(&p)
}

fn cmd_eval(ctx: &mut Ctx, model: &ModelArg, data: &DataArgs) -> Outcome {
    let model = load_model(ctx, model)?;
    let ds = ctx.dataset(data, model.schema)?;
    let report = evaluate(&model, &ds)?;
    let dir = ctx.out.join("reports").join("eval");
    let mut text = String::new();
    for (stem, table) in report.tables() {
        ctx.write_table(&dir, &stem, &table)?;
        text.push_str(&format!("== {stem} ==\n{}\n", table.to_text()));
    }
    Ok((serde_json::to_value(&report.metrics)?, text))
}

fn cmd_infer(ctx: &mut Ctx, model: &ModelArg, log_path: &Path, output: Option<&Path>) -> Outcome {
    let model = load_model(ctx, model)?;
    let stem = log_path
        .file_name()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_suffix(".csv"))
        .ok_or_else(|| Error::InvalidInput(format!("not a .csv file: {}", log_path.display())))?;
    let dir = log_path.parent().unwrap_or(Path::new("."));
    let log = if meta_path(dir, stem).exists() {
        read_flight(log_path)?
    } else {
        let meta = FlightMeta::from_label(stem, &DamageLabel::healthy(), crate::flightlog::DEFAULT_SAMPLE_RATE_HZ);
        let f = std::fs::File::open(log_path).map_err(|e| Error::InvalidInput(format!("{}: {e}", log_path.display())))?;
        parse_log(f, &meta)?
    };
    let t0 = Instant::now();
    let (diag, _) = model.infer_log(&log, ctx.cfg.features.stride)?;
    let rate = diag.len() as f64 / t0.elapsed().as_secs_f64().max(1e-9);
    let path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ctx.out.join("diagnosis").join(format!("{}.csv", log.flight_id)));
    let csv = diagnosis_csv(&log.flight_id, &diag, Some(&ctx.prov));
    ctx.write(&path, csv.as_bytes())?;
    let mut counts = [0usize; 3];
    for (_, d) in &diag {
        counts[d.type_class.index()] += 1;
    }
    let majority = TypeClass::ALL[crate::svm::argmax(&counts.map(|c| c as f64))];
    let summary = json!({
        "flight_id": log.flight_id,
        "windows": diag.len(),
        "type_counts": counts,
        "majority_type": majority.name(),
        "windows_per_s": rate,
        "path": path,
    });
    let text = format!(
        "{}: {} windows, types C0/C1/C2 = {:?}, majority {}, {:.0} windows/s\n",
        log.flight_id,
        diag.len(),
        counts,
        majority.name(),
        rate
    );
    Ok((summary, text))
}

fn cmd_importance(ctx: &mut Ctx, model: &ModelArg, data: &DataArgs, component: &str) -> Outcome {
    let model = load_model(ctx, model)?;
    let ds = ctx.dataset(data, model.schema)?;
    let comps: Vec<Component> = if component == "all" {
        Component::ALL.to_vec()
    } else {
        vec![Component::parse(component).ok_or_else(|| Error::Config(format!("unknown component '{component}'")))?]
    };
    let s = ctx.cfg.studies.clone();
    let dir = ctx.out.join("reports").join("importance");
    let mut summary = serde_json::Map::new();
    let mut text = String::new();
    for c in comps {
        let rep = component_importance(&model, &ds, c, s.importance_repeats, ctx.cfg.seed, s.importance_max_rows)?;
        let full = rep.table(rep.features.len());
        ctx.write_table(&dir, c.name(), &full)?;
        let top = rep.table(s.importance_top);
        let bars: Vec<(String, f64)> = rep.features.iter().take(s.importance_top).map(|f| (f.name.clone(), f.mean)).collect();
        let svg = bar_chart(&format!("{} permutation importance", c.name()), &format!("{} drop", rep.metric), &bars)?;
        let plot = ctx.out.join("plots").join(format!("importance_{}.svg", c.name()));
        ctx.write_svg(&plot, &svg)?;
        text.push_str(&format!("== {} (baseline {} {:.4}) ==\n{}\n", c.name(), rep.metric, rep.baseline, top.to_text()));
        summary.insert(
            c.name().to_string(),
            json!({
                "metric": rep.metric,
                "baseline": rep.baseline,
                "top": rep.features.iter().take(s.importance_top).collect::<Vec<_>>(),
            }),
        );
    }
    Ok((Value::Object(summary), text))
}

fn cmd_bandstudy(ctx: &mut Ctx) -> Outcome {
    let logs = ctx.corpus_logs()?;
    let rows = band_width_study(&logs, &ctx.cfg.studies.band_widths, &ctx.cfg.cascade())?;
    let table = band_study_table(&rows);
    let dir = ctx.out.join("reports");
    ctx.write_table(&dir, "bandstudy", &table)?;
    let series: Vec<(String, Vec<(f64, f64)>)> = (0..3)
        .map(|k| {
            let pts = rows.iter().map(|r| (r.band_width_hz as f64, 100.0 * r.class_accuracy[k])).collect();
            (TypeClass::ALL[k].name().to_string(), pts)
        })
        .collect();
    let svg = line_chart("type accuracy by band width", "band width [Hz]", "accuracy [%]", &series, false)?;
    let plot = ctx.out.join("plots").join("bandstudy.svg");
    ctx.write_svg(&plot, &svg)?;
    Ok((serde_json::to_value(&rows)?, table.to_text()))
}

fn cmd_ablate(ctx: &mut Ctx, data: &DataArgs) -> Outcome {
    let ds = ctx.dataset(data, ctx.schema()?)?;
    let rows = ablation_study(&ds, &ctx.cfg.ablation_masks(), &ctx.cfg.cascade())?;
    let table = ablation_table(&rows);
    let dir = ctx.out.join("reports");
    ctx.write_table(&dir, "ablation", &table)?;
    Ok((serde_json::to_value(&rows)?, table.to_text()))
}

fn cmd_loo(ctx: &mut Ctx) -> Outcome {
    let schema = ctx.schema()?;
    let ds = LabeledDataset::from_logs(&ctx.corpus_logs()?, schema, ctx.cfg.features.stride)?;
    let [a, b] = ctx.cfg.studies.loo_held_out;
    let rep = loo_baseline(&ds, (a, b), &ctx.cfg.loo())?;
    let table = rep.table();
    let dir = ctx.out.join("reports");
    ctx.write_table(&dir, "loo", &table)?;
    let text = format!(
        "held out {a}-{b} ({} windows); quadratic classifier test accuracy {:.4}\n{}",
        rep.n_held_out,
        rep.classifier_test_accuracy,
        table.to_text()
    );
    Ok((serde_json::to_value(&rep)?, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Numeric("x".into())), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), EXIT_DATA);
        assert_eq!(run(["propdamage", "frobnicate"]), EXIT_USAGE);
    }

    #[test]
    fn held_out_parsing() {
        assert_eq!(parse_held_out("20-20").unwrap(), (20.0, 20.0));
        assert_eq!(parse_held_out("0-5").unwrap(), (0.0, 5.0));
        assert!(parse_held_out("20").is_err());
    }
}
