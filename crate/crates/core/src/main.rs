use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use earpace_core::audio::{synth_meal, SynthMealSpec};
use earpace_core::evaluation::{dataset_stats, evaluate, AnnotationTrack, DEFAULT_TOLERANCE_S};
use earpace_core::eventlog::{chew_times, read_event_log, EventLogRecord};
use earpace_core::features::{ChewScorer, HeuristicScorer, ScoreTable};
use earpace_core::intervention::PromptLibrary;
use earpace_core::{run_replay, run_stream, Pipeline, ReplayRequest, SessionConfig};

#[derive(Parser)]
#[command(name = "earpace", version, about = "Chew/swallow detection and eating-pace prompting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SessionArgs {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides rng_seed from the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Prompt library table; the bundled one is used otherwise
    #[arg(long)]
    library: Option<PathBuf>,
    /// `segment_id,probability` CSV replacing the heuristic scorer
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Process a WAV file in 3 s windows
    Replay {
        wav: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Read raw s16le 16 kHz mono PCM on stdin, write the event log to stdout
    Stream {
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Generate a synthetic meal (meal.wav + truth.tsv)
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Score an event log against a truth track
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE_S * 1000.0)]
        tolerance_ms: f64,
        #[arg(long)]
        csv: bool,
    },
    /// Per-track and aggregate annotation statistics
    Stats {
        #[arg(required = true)]
        tracks: Vec<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
}

fn build_pipeline(args: &SessionArgs) -> Result<Pipeline> {
    let mut config = match &args.config {
        Some(p) => SessionConfig::load(p)?,
        None => SessionConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if let Some(lib) = &args.library {
        config.prompt_library_path = Some(lib.clone());
    }
    let library = match &config.prompt_library_path {
        Some(p) => PromptLibrary::load(p)?,
        None => PromptLibrary::bundled(),
    };
    let scorer: Box<dyn ChewScorer> = match &args.scores {
        Some(p) => Box::new(ScoreTable::load(p)?),
        None => Box::new(HeuristicScorer::new(&config)),
    };
    Ok(Pipeline::new(config, library, scorer)?)
}

fn replay(wav: PathBuf, truth: Option<PathBuf>, out: PathBuf, session: &SessionArgs) -> Result<()> {
    let pipeline = build_pipeline(session)?;
    let request = ReplayRequest { wav, truth, out_dir: Some(out.clone()) };
    let outcome = run_replay(&request, pipeline)?;
    let s = &outcome.summary;
    println!(
        "{} chews, {} swallows, {} prompts over {:.1} s -> {}",
        s.total_chews,
        s.total_swallows,
        s.prompts_delivered,
        outcome.duration_s,
        out.display()
    );
    if let Some(report) = &outcome.evaluation {
        print!("{}", report.to_text());
    }
    eprintln!("mean window processing {:.3} ms", outcome.mean_window_ms());
    Ok(())
}

fn stream(session: &SessionArgs) -> Result<()> {
    let pipeline = build_pipeline(session)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let outcome = run_stream(std::io::stdin(), &mut out, pipeline)?;
    if outcome.truncated_byte {
        eprintln!("warning: input ended mid-sample; trailing byte discarded");
    }
    Ok(())
}

fn synth(spec: Option<PathBuf>, out: &Path, seed: Option<u64>, duration: Option<f64>) -> Result<()> {
    let mut spec = match spec {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            SynthMealSpec::parse_str(&text)?
        }
        None => SynthMealSpec::default(),
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(d) = duration {
        spec.duration_s = d;
    }
    let meal = synth_meal(&spec)?;
    meal.write(out)?;
    println!("{} chews, {} swallows -> {}", meal.total_chews(), meal.runs.len(), out.display());
    Ok(())
}

fn eval(pred: &Path, truth: &Path, tolerance_ms: f64, csv: bool) -> Result<()> {
    let records = read_event_log(pred)?;
    let truth = AnnotationTrack::load(truth)?;
    let duration = records.iter().find_map(|r| match r {
        EventLogRecord::Summary { duration_s, .. } => Some(*duration_s),
        _ => None,
    });
    let duration = duration.map(|d| d.max(truth.duration_s()));
    let report = evaluate(&chew_times(&records), None, &truth, duration, tolerance_ms / 1000.0)?;
    print!("{}", if csv { report.to_csv() } else { report.to_text() });
    Ok(())
}

fn stats(paths: &[PathBuf], csv: bool) -> Result<()> {
    let tracks = paths.iter().map(|p| AnnotationTrack::load(p)).collect::<Result<Vec<_>, _>>()?;
    let s = dataset_stats(&tracks);
    print!("{}", if csv { s.to_csv() } else { s.to_text() });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Replay { wav, truth, out, session } => replay(wav, truth, out, &session),
        Command::Stream { session } => stream(&session),
        Command::Synth { spec, out, seed, duration } => synth(spec, &out, seed, duration),
        Command::Eval { pred, truth, tolerance_ms, csv } => eval(&pred, &truth, tolerance_ms, csv),
        Command::Stats { tracks, csv } => stats(&tracks, csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
