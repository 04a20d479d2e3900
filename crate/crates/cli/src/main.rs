use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bitvision_core::bitstream::{parse_container, ContainerFormat};
use bitvision_core::dataset::{
    build_dataset, default_signatures, load_signatures, synth_dataset, DatasetError, DatasetManifest,
    SynthConfig, DEFAULT_NOISE,
};
use bitvision_core::device::{load_profile, synthetic_profile, DeviceProfile, FamilyParams};
use bitvision_core::image::{compression_ratio, encode_image, format_ratio, image_dims, write_image, PixelOrder};
use bitvision_core::metrics::evaluate;

#[derive(Parser, Debug)]
#[command(name = "bitvision", version, about = "FPGA bitstream to image-coded representation toolkit")]
struct Cli {
    /// More output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect device profiles.
    #[command(subcommand)]
    Profile(ProfileCmd),
    /// Encode one bitstream into a PNG.
    Encode(EncodeArgs),
    /// Generate synthetic profiles or datasets.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// Assemble a dataset from a manifest.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Score predictions against ground-truth annotations.
    Eval(EvalArgs),
}

#[derive(Subcommand, Debug)]
enum ProfileCmd {
    Validate { path: PathBuf },
    Show { path: PathBuf },
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "chw")]
    order: PixelOrder,
    #[arg(long, default_value = "synth")]
    format: ContainerFormat,
}

#[derive(Subcommand, Debug)]
enum SynthCmd {
    /// Write a synthetic device profile.
    Profile {
        /// Builtin family name (zynq7000, ultrascale) or a family JSON file.
        #[arg(long, default_value = "zynq7000")]
        family: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        rows: u32,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        clb_cols: u32,
        #[arg(long, default_value_t = 0)]
        non_clb_cols: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate bitstreams, placements and a manifest.
    Dataset {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        /// Number of auto-generated class signatures.
        #[arg(long, default_value_t = 4, conflicts_with = "signatures")]
        classes: usize,
        /// JSON list of class signatures.
        #[arg(long)]
        signatures: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        blocks_min: usize,
        #[arg(long, default_value_t = 3)]
        blocks_max: usize,
        #[arg(long, default_value_t = DEFAULT_NOISE, value_parser = parse_probability)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "synth")]
        format: ContainerFormat,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum DatasetCmd {
    Build {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "chw")]
        order: PixelOrder,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the manifest's split seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    classes: PathBuf,
    #[arg(long, default_value = "0.5,0.75", value_parser = parse_threshold, value_delimiter = ',')]
    iou: Vec<f64>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} outside [0, 1]"))
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("IoU threshold {v} outside (0, 1)"))
    }
}

fn resolve_family(name: &str) -> Result<FamilyParams> {
    match FamilyParams::builtin(name) {
        Ok(f) => Ok(f),
        Err(_) => FamilyParams::load(name).with_context(|| format!("loading family `{name}`")),
    }
}

fn describe(profile: &DeviceProfile) -> String {
    let f = profile.family();
    let (h, w) = image_dims(profile);
    let mut out = String::new();
    out += &format!("name: {}\n", profile.name());
    out += &format!(
        "family: m={} q={} l={} clb_bytes_per_frame={} n={:?} slices_per_clb={}\n",
        f.frame_words,
        f.clbs_per_column,
        f.excluded_mid_words,
        f.clb_bytes_per_frame,
        f.frames_per_column.values(),
        f.slices_per_clb
    );
    out += &format!("config rows: {}\n", profile.rows().len());
    out += &format!("grid: {}x{}\n", profile.grid_rows(), profile.grid_cols());
    out += &format!("clbs: {}\n", profile.clb_count());
    out += &format!("fdri frames: {}\n", profile.total_fdri_frames());
    out += &format!("fdri words: {}\n", profile.total_fdri_words());
    out += &format!("image: {h}x{w}x3\n");
    if let Some(bits) = profile.bitstream_bits() {
        let ratio = (h as f64 * w as f64 * 24.0) / bits as f64 * 100.0;
        out += &format!("bitstream bits: {bits}\ncompression ratio: {}\n", format_ratio(ratio));
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Profile(ProfileCmd::Validate { path }) => {
            let p = load_profile(&path)?;
            println!("{}: ok ({} frames, grid {}x{})", path.display(), p.total_fdri_frames(), p.grid_rows(), p.grid_cols());
        }
        Command::Profile(ProfileCmd::Show { path }) => {
            print!("{}", describe(&load_profile(&path)?));
        }
        Command::Encode(args) => {
            let profile = load_profile(&args.profile)?;
            let start = Instant::now();
            let bytes = std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
            let parsed = parse_container(&bytes, &profile, args.format)?;
            let image = encode_image(&parsed.frames, &profile, args.order)?;
            write_image(&image, &args.out)?;
            let elapsed = start.elapsed().as_secs_f64();
            if parsed.ignored_trailing_words > 0 {
                eprintln!("warning: ignored {} trailing FDRI words", parsed.ignored_trailing_words);
            }
            println!("{}: {}x{}x3 order={}", args.out.display(), image.height, image.width, image.order);
            if let Some(bits) = profile.bitstream_bits() {
                println!("compression_ratio={}", format_ratio(compression_ratio(&image, bits)?));
            }
            eprintln!("elapsed_seconds={elapsed:.6}");
        }
        Command::Synth(SynthCmd::Profile {
            family,
            rows,
            clb_cols,
            non_clb_cols,
            seed,
            out,
        }) => {
            let family = resolve_family(&family)?;
            let p = synthetic_profile(&family, rows, clb_cols, non_clb_cols, seed)?;
            p.save(&out)?;
            println!("{}: {} frames, grid {}x{}", out.display(), p.total_fdri_frames(), p.grid_rows(), p.grid_cols());
        }
        Command::Synth(SynthCmd::Dataset {
            profile,
            count,
            classes,
            signatures,
            blocks_min,
            blocks_max,
            noise,
            seed,
            format,
            out,
        }) => {
            if blocks_min == 0 || blocks_min > blocks_max {
                bail!("blocks range must satisfy 1 <= --blocks-min <= --blocks-max");
            }
            let profile = load_profile(&profile)?;
            let sigs = match signatures {
                Some(path) => load_signatures(path)?,
                None => default_signatures(classes, &profile),
            };
            let config = SynthConfig {
                count: count as usize,
                blocks_per_image: (blocks_min, blocks_max),
                noise,
                seed,
                format,
            };
            let (_, summary) = synth_dataset(&profile, &sigs, &config, &out)?;
            println!(
                "{}: {} images, {} blocks, {} regenerated",
                out.join("manifest.json").display(),
                summary.images,
                summary.blocks,
                summary.regenerated
            );
        }
        Command::Dataset(DatasetCmd::Build {
            manifest,
            out,
            order,
            jobs,
            seed,
        }) => {
            let mut m = DatasetManifest::load(&manifest)?;
            if let Some(seed) = seed {
                m.seed = seed;
            }
            let start = Instant::now();
            let summary = match build_dataset(&m, order, &out, jobs) {
                Ok(s) => s,
                Err(DatasetError::AllFailed(s)) => {
                    for f in &s.failures {
                        eprintln!("failed: entry {} ({}): {}", f.entry, f.bitstream, f.error);
                    }
                    bail!("all {} entries failed", s.failures.len());
                }
                Err(e) => return Err(e.into()),
            };
            for f in &summary.failures {
                eprintln!("skipped: entry {} ({}): {}", f.entry, f.bitstream, f.error);
            }
            println!(
                "images={} boxes={} train={} test={} failed={}",
                summary.images_written,
                summary.boxes_written,
                summary.train,
                summary.test,
                summary.failures.len()
            );
            if verbose > 0 {
                eprintln!("elapsed_seconds={:.6}", start.elapsed().as_secs_f64());
            }
        }
        Command::Eval(args) => {
            let classes = bitvision_core::annotation::read_class_list(&args.classes)?;
            let report = evaluate(&args.pred, &args.gt, &classes, &args.iou)?;
            print!("{}", report.to_table());
            if let Some(path) = args.json {
                let text = serde_json::to_string_pretty(&report)? + "\n";
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
