use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hcoseg::commands;
use hcoseg::config::PipelineConfig;
use hcoseg::Error;

/// Primary object segmentation for frame sequences.
#[derive(Parser, Debug)]
#[command(name = "hcoseg", version)]
struct Cli {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment a directory of frame_NNNNNN.png files.
    Segment(Box<SegmentArgs>),
    /// Score predicted masks against ground truth.
    Eval(EvalArgs),
    /// Object count and area statistics of a ground-truth tree.
    Stats {
        gt: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Average annotation map of a ground-truth tree.
    Avgmap {
        gt: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        /// Output path; `.pfm` and `.png` are written.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Blend masks over frames for inspection.
    Overlay {
        frames: PathBuf,
        masks: PathBuf,
        out: PathBuf,
    },
    /// Co-segmentation call counts per hierarchy depth.
    Complexity {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        min_depth: usize,
        /// Defaults to the deepest valid depth.
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// Print the leaves of the odd-even slice tree.
    SliceDump {
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = hcoseg::hierarchy::DEFAULT_DEPTH)]
        depth: usize,
    },
}

#[derive(Args, Debug)]
struct SegmentArgs {
    /// Frame directory; defaults to `input` from the config.
    frames: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    /// `baseline` or `external`.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    external_dir: Option<PathBuf>,
    #[arg(long)]
    processing_width: Option<usize>,
    #[arg(long)]
    processing_height: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    border_fraction: Option<f64>,
    #[arg(long)]
    lambda_p: Option<f64>,
    #[arg(long)]
    lambda_s: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    threshold_ratio: Option<f64>,
    #[arg(long)]
    superpixels: Option<usize>,
    #[arg(long)]
    compactness: Option<f64>,
    #[arg(long)]
    slic_iters: Option<usize>,
    #[arg(long)]
    recursive_refine: bool,
    /// Write the final pass's superpixel flows here as text.
    #[arg(long)]
    dump_flows: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    pred: PathBuf,
    gt: PathBuf,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    /// Score only frames whose number is a multiple of this.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn overrides(args: &SegmentArgs) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    let mut put = |key, v: Option<String>| {
        if let Some(v) = v {
            out.push((key, v));
        }
    };
    put("depth", args.depth.map(|v| v.to_string()));
    put("external_dir", args.external_dir.as_ref().map(|p| p.display().to_string()));
    put("backend", args.backend.clone());
    put("processing_width", args.processing_width.map(|v| v.to_string()));
    put("processing_height", args.processing_height.map(|v| v.to_string()));
    put("bins", args.bins.map(|v| v.to_string()));
    put("border_fraction", args.border_fraction.map(|v| v.to_string()));
    put("lambda_p", args.lambda_p.map(|v| v.to_string()));
    put("lambda_s", args.lambda_s.map(|v| v.to_string()));
    put("sigma", args.sigma.map(|v| v.to_string()));
    put("knn_k", args.knn_k.map(|v| v.to_string()));
    put("threshold_ratio", args.threshold_ratio.map(|v| v.to_string()));
    put("superpixels", args.superpixels.map(|v| v.to_string()));
    put("compactness", args.compactness.map(|v| v.to_string()));
    put("slic_iters", args.slic_iters.map(|v| v.to_string()));
    put("recursive_refine", args.recursive_refine.then(|| "true".to_string()));
    put("output", args.out.as_ref().map(|p| p.display().to_string()));
    out
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Error> {
    match path {
        Some(p) => PipelineConfig::from_file(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(j) = cli.jobs {
        cfg.set("jobs", &j.to_string())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    pool.install(|| match &cli.command {
        Command::Segment(args) => {
            for (k, v) in overrides(args) {
                cfg.set(k, &v)?;
            }
            let out = cfg
                .output
                .clone()
                .ok_or_else(|| Error::Config("segment needs --out (or `output` in the config)".into()))?;
            if let Some(frames) = &args.frames {
                cfg.set("input", &frames.display().to_string())?;
            }
            let frames = cfg
                .input
                .clone()
                .ok_or_else(|| Error::Config("segment needs a frame directory (or `input` in the config)".into()))?;
            commands::cmd_segment(&frames, &out, &cfg, args.dump_flows.as_deref())
        }
        Command::Eval(args) => {
            if let Some(r) = args.ratio {
                cfg.set("eval_ratio", &r.to_string())?;
            }
            if let Some(b) = args.beta2 {
                cfg.set("beta2", &b.to_string())?;
            }
            if let Some(s) = args.stride {
                cfg.set("keyframe_stride", &s.to_string())?;
            }
            commands::cmd_eval(&args.pred, &args.gt, &cfg, args.csv.as_deref())
        }
        Command::Stats { gt, csv } => commands::cmd_stats(gt, csv.as_deref()),
        Command::Avgmap { gt, width, height, out } => commands::cmd_avgmap(gt, *width, *height, out),
        Command::Overlay { frames, masks, out } => commands::cmd_overlay(frames, masks, out),
        Command::Complexity {
            length,
            min_depth,
            max_depth,
        } => commands::cmd_complexity(
            *length,
            *min_depth,
            max_depth.unwrap_or_else(|| commands::max_depth(*length)),
        ),
        Command::SliceDump { length, depth } => commands::cmd_slice_dump(*length, *depth),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
