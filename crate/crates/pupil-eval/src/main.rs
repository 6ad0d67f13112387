//! Command-line evaluation harness for the pupil detector.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use pupil_core::synth::{generate_suite, SuiteClass};
use pupil_core::{detect_with_debug, DetectorParams, FileSink, NullSink};
use pupil_eval::{
    benchmark, convert_ground_truth, evaluate, load_dataset, load_images, parse_baselines, sweep,
    write_image_log, write_reports,
};

#[derive(Parser)]
#[command(
    name = "pupil-eval",
    about = "Pupil detection and evaluation harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the pupil in one image and print `x y stage valid`.
    Detect {
        /// Input raster (binary PGM; PNG with the core `png` feature).
        image: PathBuf,
        /// key=value parameter file overriding the defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Directory for intermediate artifacts of every pipeline stage.
        #[arg(long)]
        debug: Option<PathBuf>,
    },
    /// Evaluate detection rates over a labeled dataset.
    Eval {
        #[arg(long)]
        images: PathBuf,
        /// Ground-truth CSV (`filename,x,y`; empty coordinates mark
        /// images without a pupil).
        #[arg(long)]
        gt: PathBuf,
        /// Directory for CSV reports and the per-image log.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 15)]
        max_error: usize,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Externally computed rates (`dataset,algorithm,rate`) for a
        /// side-by-side table at five pixels.
        #[arg(long)]
        baselines: Option<PathBuf>,
    },
    /// Measure single-threaded detection latency over a directory of
    /// images.
    Bench {
        #[arg(long)]
        images: PathBuf,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Evaluate once per value of one parameter.
    Sweep {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Parameter name, e.g. `validity_threshold`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 15)]
        max_error: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Render a synthetic suite as PGM images plus a ground-truth CSV.
    Synth {
        /// One of: clean, blurred, reflections, dark-surround, closed-eye.
        #[arg(long)]
        class: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a whitespace-separated annotation file (`frame x y` per
    /// line) into the canonical CSV.
    ConvertGt {
        raw: PathBuf,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extension appended to frames that lack one.
        #[arg(long, default_value = "pgm")]
        ext: String,
    },
}

/// Errors with their process exit codes: usage mistakes exit 1, broken
/// data exits 2.
enum CliError {
    Usage(String),
    Data(String),
}

impl From<pupil_eval::DataError> for CliError {
    fn from(e: pupil_eval::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            // Help and version requests are not errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_params(path: Option<&Path>) -> Result<DetectorParams, CliError> {
    match path {
        None => Ok(DetectorParams::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            DetectorParams::from_config_str(&text).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect {
            image,
            params,
            debug,
        } => {
            let params = load_params(params.as_deref())?;
            let img = pupil_core::load_gray_image(&image)
                .map_err(|e| CliError::Data(format!("{}: {e}", image.display())))?;
            let result = match debug {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                    let mut sink = FileSink::new(&dir);
                    let result = detect_with_debug(&img, &params, &mut sink);
                    for warning in sink.warnings() {
                        eprintln!("warning: {warning}");
                    }
                    result
                }
                None => detect_with_debug(&img, &params, &mut NullSink),
            };
            match result.center {
                Some((x, y)) => println!("{x:.3} {y:.3} {} {}", result.stage, result.valid),
                None => println!("nan nan {} {}", result.stage, result.valid),
            }
            Ok(())
        }
        Command::Eval {
            images,
            gt,
            out,
            max_error,
            params,
            baselines,
        } => {
            let params = load_params(params.as_deref())?;
            let dataset = load_dataset(&images, &gt)?;
            for warning in &dataset.warnings {
                eprintln!("warning: {warning}");
            }
            if dataset.skipped > 0 {
                eprintln!("warning: skipped {} record(s)", dataset.skipped);
            }
            let evaluation = evaluate(&dataset, &params, max_error);
            let curve = &evaluation.curve;
            println!(
                "{}: {} labeled image(s), rate@5px = {:.4}, rate@{}px = {:.4}",
                curve.name,
                curve.images,
                curve.rate_at(5),
                max_error,
                curve.rate_at(max_error),
            );
            if evaluation.unlabeled_images > 0 {
                println!(
                    "unlabeled: {} image(s), false positives = {}",
                    evaluation.unlabeled_images, evaluation.false_positives
                );
            }
            if let Some(out) = out {
                let baseline_rows = match baselines {
                    Some(path) => {
                        let text = std::fs::read_to_string(&path)
                            .with_context(|| format!("reading {}", path.display()))?;
                        Some(parse_baselines(&text)?)
                    }
                    None => None,
                };
                let files = write_reports(
                    &out,
                    std::slice::from_ref(curve),
                    baseline_rows.as_deref(),
                )?;
                write_image_log(&out.join("per_image.csv"), &evaluation.outcomes)?;
                for warning in &files.warnings {
                    eprintln!("warning: {warning}");
                }
                println!(
                    "wrote {} report file(s) under {}",
                    files.written.len() + 1,
                    out.display()
                );
            }
            Ok(())
        }
        Command::Bench {
            images,
            reps,
            params,
        } => {
            let params = load_params(params.as_deref())?;
            let frames = load_images(&images)?;
            let imgs: Vec<_> = frames.into_iter().map(|(_, img)| img).collect();
            let stats = benchmark(&imgs, &params, reps);
            println!(
                "{} frame(s) x {} rep(s): mean {:.2} ms, p50 {:.2} ms, p95 {:.2} ms",
                stats.frames,
                reps,
                stats.mean_us / 1000.0,
                stats.p50_us as f64 / 1000.0,
                stats.p95_us as f64 / 1000.0
            );
            println!(
                "per stage: edge mean {:.2} ms, fallback mean {:.2} ms",
                stats.edge_mean_us / 1000.0,
                stats.coarse_mean_us / 1000.0
            );
            Ok(())
        }
        Command::Sweep {
            images,
            gt,
            param,
            values,
            max_error,
            out,
            params,
        } => {
            let base = load_params(params.as_deref())?;
            if !DetectorParams::field_names().contains(&param.as_str()) {
                return Err(CliError::Usage(format!("unknown parameter `{param}`")));
            }
            let dataset = load_dataset(&images, &gt)?;
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(CliError::Usage("no sweep values given".into()));
            }
            let curves = sweep(&dataset, &base, &param, &values, max_error)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            for (value, curve) in &curves {
                println!("{param}={value}: rate@5px = {:.4}", curve.rate_at(5));
            }
            if let Some(out) = out {
                let rate_curves: Vec<_> = curves.into_iter().map(|(_, c)| c).collect();
                let files = write_reports(&out, &rate_curves, None)?;
                println!(
                    "wrote {} report file(s) under {}",
                    files.written.len(),
                    out.display()
                );
            }
            Ok(())
        }
        Command::Synth {
            class,
            n,
            seed,
            out,
        } => {
            let class = SuiteClass::parse(&class).map_err(|e| CliError::Usage(e.to_string()))?;
            if n == 0 {
                return Err(CliError::Usage("--n must be positive".into()));
            }
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            let suite =
                generate_suite(class, n, seed).map_err(|e| CliError::Data(e.to_string()))?;
            let mut gt_csv = String::from("filename,x,y\n");
            for (i, (img, center)) in suite.iter().enumerate() {
                let filename = format!("{i:05}.pgm");
                pupil_core::save_pgm(img, out.join(&filename))
                    .map_err(|e| CliError::Data(e.to_string()))?;
                match center {
                    Some((x, y)) => gt_csv.push_str(&format!("{filename},{x:.3},{y:.3}\n")),
                    None => gt_csv.push_str(&format!("{filename},,\n")),
                }
            }
            std::fs::write(out.join("gt.csv"), gt_csv)
                .with_context(|| format!("writing {}", out.join("gt.csv").display()))?;
            println!(
                "wrote {} {} image(s) and gt.csv under {}",
                n,
                class.name(),
                out.display()
            );
            Ok(())
        }
        Command::ConvertGt { raw, out, ext } => {
            let text = std::fs::read_to_string(&raw)
                .with_context(|| format!("reading {}", raw.display()))?;
            let csv = convert_ground_truth(&text, &ext)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, csv)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("wrote {}", path.display());
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}
