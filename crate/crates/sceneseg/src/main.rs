//! Command line front end.
//!
//! Exit codes: 0 success, 2 validation or I/O error, 3 anomaly detected
//! (monitor only).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sceneseg::anomaly::{run_monitor, train_nominal};
use sceneseg::cluster::{context_clusters, elbow_select, ensemble_merge, kmeans_dtw, KmeansOptions};
use sceneseg::error::{Error, Result};
use sceneseg::features::normalize_motion;
use sceneseg::io;
use sceneseg::pipeline;
use sceneseg::report;
use sceneseg::scenario::{generate_scenario, FlawSpec, ScenarioSpec, Template};
use sceneseg::scene::ObjectCatalog;
use sceneseg::segment::SegmentationResult;
use sceneseg::similarity::{confidence_matrix, multi_subject_matrix, MotionSequence, SubjectRep};

#[derive(Parser)]
#[command(
    name = "sceneseg",
    about = "Scene-graph interaction segmentation, clustering and anomaly detection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Object catalog (JSON). Defaults to the built-in scenario catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Input file(s); repeat the flag where several are accepted.
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Output file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// RNG seed where randomness is involved.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON object overriding catalog parameters, e.g. '{"filter_length":7}'.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a frame stream into ERUs, IUs and activities.
    Segment {
        #[command(flatten)]
        common: Common,
        /// Hand id to analyze (defaults to the only hand present).
        #[arg(long)]
        hand: Option<u32>,
    },
    /// Encode a frame stream into per-frame feature couples (JSONL).
    Encode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hand: Option<u32>,
    },
    /// Cluster the IUs of one or more segmentation reports.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// Largest k tried for the motion clustering.
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// k-means restarts per k.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Optional CSV path for the WCSS-over-k curve.
        #[arg(long)]
        wcss: Option<PathBuf>,
    },
    /// Train a nominal job model from segmented correct executions.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Monitor a stream against a trained model; exit 3 on anomalies.
    Monitor {
        #[command(flatten)]
        common: Common,
        /// Trained model file from `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        hand: Option<u32>,
    },
    /// Generate a synthetic scenario stream plus its ground-truth sidecar.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Template name (box_filling, boxing, measuring, assembly,
        /// disassembly, polishing, drilling, polish_measure_job).
        #[arg(long)]
        template: Option<String>,
        /// Layout variant (drilling: c1, c2, c3).
        #[arg(long)]
        layout: Option<String>,
        /// Tool count for box_filling.
        #[arg(long)]
        repetitions: Option<usize>,
        /// Gaussian position noise amplitude in meters.
        #[arg(long)]
        noise: Option<f64>,
        /// Frames per second.
        #[arg(long)]
        fps: Option<f64>,
        /// Flaw injection, e.g. '{"activity":0,"iu":1,"mode":"halt_halfway"}'.
        #[arg(long)]
        flaw: Option<String>,
        /// Sidecar path (defaults to <output>.sidecar.json).
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Also write the catalog used by the scenario.
        #[arg(long)]
        save_catalog: Option<PathBuf>,
    },
    /// Pairwise confidence matrix of the IUs of segmentation reports.
    Matrix {
        #[command(flatten)]
        common: Common,
        /// Optional SVG heatmap path.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Treat the single input as a multi-subject corpus (JSONL of
        /// {"type","subject","rep","motion"}) and build the averaged matrix.
        #[arg(long)]
        mcm: bool,
    },
}

fn load_catalog(common: &Common) -> Result<ObjectCatalog> {
    let mut catalog = match &common.catalog {
        Some(path) => io::load_catalog(path)?,
        None => sceneseg::scenario::scenario_catalog(),
    };
    if let Some(overrides) = &common.params {
        catalog.params = io::merge_params(&catalog.params, overrides)?;
    }
    Ok(catalog)
}

fn single_input(common: &Common) -> Result<&PathBuf> {
    match common.input.as_slice() {
        [one] => Ok(one),
        got => Err(Error::InvalidCatalog(format!("expected exactly one --input, got {}", got.len()))),
    }
}

fn output_writer(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_reports(paths: &[PathBuf]) -> Result<Vec<(String, SegmentationResult)>> {
    if paths.is_empty() {
        return Err(Error::InvalidCatalog("at least one --input report is required".into()));
    }
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((stem, report::read_segmentation_json(p)?))
        })
        .collect()
}

/// All IUs of the reports as labeled motion sequences with their contexts.
fn pool_ius(
    reports: &[(String, SegmentationResult)],
) -> Result<(Vec<String>, Vec<MotionSequence>, Vec<Vec<i64>>)> {
    let mut ids = Vec::new();
    let mut seqs = Vec::new();
    let mut contexts = Vec::new();
    for (stem, result) in reports {
        for (i, iu) in result.ius.iter().enumerate() {
            ids.push(format!("{stem}#{i}"));
            seqs.push(MotionSequence::from_rows(&iu.motion)?);
            contexts.push(iu.context.clone());
        }
    }
    Ok((ids, seqs, contexts))
}

fn cmd_segment(common: &Common, hand: Option<u32>) -> Result<()> {
    let catalog = load_catalog(common)?;
    let frames = io::read_stream_file(single_input(common)?)?;
    let result = pipeline::segment_stream(&frames, &catalog, hand)?;
    report::write_segmentation_json(&result, output_writer(common)?)?;
    Ok(())
}

fn cmd_encode(common: &Common, hand: Option<u32>) -> Result<()> {
    let catalog = load_catalog(common)?;
    let mut frames = io::read_stream_file(single_input(common)?)?;
    pipeline::apply_mode(&mut frames, &catalog);
    pipeline::validate_stream(&frames, &catalog)?;
    let hand = pipeline::resolve_hand(&frames, hand)?;
    let series = pipeline::encode_stream(&frames, &catalog, hand)?;
    let enc = sceneseg::features::EncodingParams::from_params(&catalog.params);
    let mut out = output_writer(common)?;
    for (t, couple) in series.timestamps.iter().zip(&series.couples) {
        let record = serde_json::json!({
            "t": t,
            "motion": couple.motion,
            "context": couple.context,
            "normalized": normalize_motion(&couple.motion, &enc)?,
        });
        serde_json::to_writer(&mut out, &record)?;
        writeln!(out)?;
    }
    Ok(())
}

fn cmd_cluster(common: &Common, k_max: usize, restarts: usize, wcss_out: Option<&Path>) -> Result<()> {
    let reports = read_reports(&common.input)?;
    let (ids, seqs, contexts) = pool_ius(&reports)?;
    let opts = KmeansOptions { restarts, seed: common.seed.unwrap_or(0), ..Default::default() };

    let k_hi = k_max.min(seqs.len());
    let wcss: Vec<f64> = (1..=k_hi)
        .map(|k| kmeans_dtw(&seqs, k, &opts).map(|m| m.wcss))
        .collect::<Result<_>>()?;
    let k_star = elbow_select(&wcss)?;
    let motion = kmeans_dtw(&seqs, k_star, &opts)?;
    let context = context_clusters(&contexts)?;
    let combined = ensemble_merge(&motion, &context)?;

    if let Some(path) = wcss_out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "k,wcss")?;
        for (i, v) in wcss.iter().enumerate() {
            writeln!(w, "{},{v:.6}", i + 1)?;
        }
    }
    eprintln!("selected k = {k_star} over k in [1, {k_hi}]");
    report::write_labels_csv(&ids, &combined, output_writer(common)?)?;
    Ok(())
}

fn cmd_train(common: &Common) -> Result<()> {
    let reports = read_reports(&common.input)?;
    let executions: Vec<SegmentationResult> = reports.into_iter().map(|(_, r)| r).collect();
    let nominal = train_nominal(&executions)?;
    let path = common
        .output
        .as_ref()
        .ok_or_else(|| Error::InvalidCatalog("train requires --output".into()))?;
    io::save_model(&nominal, path)?;
    eprintln!(
        "trained {} activities / {} IUs from {} executions",
        nominal.activities.len(),
        nominal.iu_count(),
        executions.len()
    );
    Ok(())
}

fn cmd_monitor(common: &Common, model: &Path, hand: Option<u32>) -> Result<bool> {
    let catalog = load_catalog(common)?;
    let nominal = io::load_model(model)?;
    let reader = io::StreamReader::new(BufReader::new(File::open(single_input(common)?)?));
    let events = run_monitor(reader, &catalog, &nominal, hand)?;
    let anomalies = events.iter().filter(|e| e.kind.is_anomaly()).count();
    report::write_events_jsonl(&events, output_writer(common)?)?;
    eprintln!("{} events, {anomalies} anomalies", events.len());
    Ok(anomalies > 0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    common: &Common,
    template: Option<&str>,
    layout: Option<&str>,
    repetitions: Option<usize>,
    noise: Option<f64>,
    fps: Option<f64>,
    flaw: Option<&str>,
    sidecar_path: Option<&Path>,
    save_catalog: Option<&Path>,
) -> Result<()> {
    // --params may carry a full ScenarioSpec; dedicated flags override it
    let mut spec = match &common.params {
        Some(json) => serde_json::from_str::<ScenarioSpec>(json)?,
        None => {
            let name = template.ok_or_else(|| {
                Error::InvalidCatalog("simulate requires --template (or --params)".into())
            })?;
            ScenarioSpec::new(name.parse::<Template>()?)
        }
    };
    if let Some(name) = template {
        let t = name.parse::<Template>()?;
        if t != spec.template {
            spec = ScenarioSpec::new(t);
        }
    }
    if let Some(l) = layout {
        spec.layout = l.to_string();
    }
    if let Some(r) = repetitions {
        spec.repetitions = r;
    }
    if let Some(n) = noise {
        spec.noise = n;
    }
    if let Some(f) = fps {
        spec.fps = f;
    }
    if let Some(s) = common.seed {
        spec.seed = s;
    }
    if let Some(f) = flaw {
        spec.flaw = Some(serde_json::from_str::<FlawSpec>(f)?);
    }

    let scenario = generate_scenario(&spec)?;
    let output = common
        .output
        .as_ref()
        .ok_or_else(|| Error::InvalidCatalog("simulate requires --output".into()))?;
    io::write_stream(&scenario.frames, BufWriter::new(File::create(output)?))?;

    let sidecar_path = match sidecar_path {
        Some(p) => p.to_path_buf(),
        None => {
            let mut os = output.clone().into_os_string();
            os.push(".sidecar.json");
            PathBuf::from(os)
        }
    };
    std::fs::write(&sidecar_path, serde_json::to_string_pretty(&scenario.sidecar)?)?;
    if let Some(path) = save_catalog {
        io::save_catalog(&scenario.catalog, path)?;
    }
    eprintln!(
        "wrote {} frames to {} (sidecar: {})",
        scenario.frames.len(),
        output.display(),
        sidecar_path.display()
    );
    Ok(())
}

#[derive(serde::Deserialize)]
struct McmRecord {
    #[serde(rename = "type")]
    iu_type: String,
    subject: String,
    rep: usize,
    motion: Vec<Vec<f64>>,
}

fn cmd_matrix(common: &Common, svg: Option<&Path>, mcm: bool) -> Result<()> {
    let matrix = if mcm {
        let path = single_input(common)?;
        let mut entries = Vec::new();
        for (i, line) in std::fs::read_to_string(path)?.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: McmRecord = serde_json::from_str(line)
                .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            entries.push(SubjectRep {
                iu_type: record.iu_type,
                subject: record.subject,
                rep: record.rep,
                seq: MotionSequence::from_rows(&record.motion)?,
            });
        }
        multi_subject_matrix(&entries)?
    } else {
        let reports = read_reports(&common.input)?;
        let (ids, seqs, _) = pool_ius(&reports)?;
        confidence_matrix(&ids.into_iter().zip(seqs).collect::<Vec<_>>())?
    };
    if matrix.degenerate_normalization {
        eprintln!("note: all distances are zero; normalization skipped");
    }
    report::write_matrix_csv(&matrix, output_writer(common)?)?;
    if let Some(path) = svg {
        report::write_matrix_svg(&matrix, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Segment { common, hand } => cmd_segment(common, *hand).map(|_| false),
        Command::Encode { common, hand } => cmd_encode(common, *hand).map(|_| false),
        Command::Cluster { common, k_max, restarts, wcss } => {
            cmd_cluster(common, *k_max, *restarts, wcss.as_deref()).map(|_| false)
        }
        Command::Train { common } => cmd_train(common).map(|_| false),
        Command::Monitor { common, model, hand } => cmd_monitor(common, model, *hand),
        Command::Simulate {
            common,
            template,
            layout,
            repetitions,
            noise,
            fps,
            flaw,
            sidecar,
            save_catalog,
        } => cmd_simulate(
            common,
            template.as_deref(),
            layout.as_deref(),
            *repetitions,
            *noise,
            *fps,
            flaw.as_deref(),
            sidecar.as_deref(),
            save_catalog.as_deref(),
        )
        .map(|_| false),
        Command::Matrix { common, svg, mcm } => cmd_matrix(common, svg.as_deref(), *mcm).map(|_| false),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
