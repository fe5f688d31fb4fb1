use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dpdof::bench::{bench_blur, write_csv};
use dpdof::calibrate::calibrate_manifest;
use dpdof::config::Config;
use dpdof::formats::{save_calib, save_noise_bank};
use dpdof::io::load_field;
use dpdof::scene::{write_scene, SceneFile};
use dpdof::{run, Mode, PipelineConfig};
use dpdof_core::bokeh::build_noise_bank;
use dpdof_core::edgeaware::FaceRect;
use dpdof_core::FieldKind;

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "dpdof", version, about = "Synthetic depth of field from dual-pixel captures")]
struct Cli {
    /// Exit with status 3 when an iterative solver fails to converge.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a shallow depth-of-field image.
    Render(RenderArgs),
    /// Fit a calibration table from a capture manifest.
    Calibrate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Control lattice as WxH; the config value when absent.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
    },
    /// Write a synthetic scene described by a TOML file.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build periodic noise tiles from flat-field images.
    NoiseBank {
        /// Glob matching the flat-field images.
        #[arg(long)]
        flats: String,
        #[arg(long, value_delimiter = ',', default_value = "61,67,73")]
        periods: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Time the brute-force and gradient-domain blurs.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "256,512")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0,4,8,16,32")]
        radii: Vec<f32>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Colour image (sRGB PNG/PPM, or linear F32M).
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    dp_left: Option<PathBuf>,
    #[arg(long)]
    dp_right: Option<PathBuf>,
    /// Colour pixels per DP pixel as SX,SY; inferred from the sizes when absent.
    #[arg(long, value_parser = parse_pair)]
    dp_scale: Option<(usize, usize)>,
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Face rectangle X0,Y0,X1,Y1 in colour pixels.
    #[arg(long, value_parser = parse_face)]
    face: Option<FaceRect>,
    /// Tap-to-focus point X,Y.
    #[arg(long, value_parser = parse_pair)]
    tap: Option<(usize, usize)>,
    #[arg(long)]
    calib: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Shot-noise coefficient of the injected noise.
    #[arg(long)]
    noise_shot: Option<f32>,
    /// Read-noise floor of the injected noise.
    #[arg(long)]
    noise_read: Option<f32>,
    /// Write the run report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn numbers(s: &str, n: usize) -> Result<Vec<usize>, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated integers"));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let v = numbers(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_face(s: &str) -> Result<FaceRect, String> {
    let v = numbers(s, 4)?;
    FaceRect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let h = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((w, h))
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<Config> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn render(args: RenderArgs, threads: Option<usize>, strict: bool) -> anyhow::Result<u8> {
    let mut params = load_config(args.config.as_ref())?;
    if let Some(a) = args.noise_shot {
        params.noise.shot = a;
    }
    if let Some(b) = args.noise_read {
        params.noise.read = b;
    }
    let cfg = PipelineConfig {
        mode: args.mode,
        image: args.image,
        dp_left: args.dp_left,
        dp_right: args.dp_right,
        dp_scale: args.dp_scale,
        mask: args.mask,
        face: args.face,
        tap: args.tap,
        calib: args.calib,
        output: args.out,
        diagnostics: args.diagnostics,
        threads,
        params,
    };
    let report = run(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {}", w.message);
    }
    for s in &report.stages {
        eprintln!("{:>12} {:9.1} ms", s.name, s.ms);
    }
    eprintln!("{:>12} {:9.1} ms", "total", report.total_ms);
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, text).with_context(|| path.display().to_string())?;
    }
    Ok(if strict && report.has_nonconvergence() { EXIT_NOT_CONVERGED } else { 0 })
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    match cli.command {
        Command::Render(args) => return render(args, cli.threads, cli.strict),
        Command::Calibrate {
            manifest,
            out,
            config,
            grid,
        } => {
            let cfg = load_config(config.as_ref())?;
            let (gw, gh) = grid.unwrap_or((cfg.calib.grid_w, cfg.calib.grid_h));
            let table = calibrate_manifest(&manifest, &cfg.stereo.params(), gw, gh)?;
            save_calib(&table, &out)?;
            eprintln!(
                "calibrated {} focus distance(s) on a {gw}x{gh} lattice -> {}",
                table.focus_distances.len(),
                out.display()
            );
        }
        Command::Synth { spec, out } => {
            let scene = SceneFile::load(&spec)?;
            let files = write_scene(&scene, &out)?;
            eprintln!("wrote {} file(s) to {}", files.len(), out.display());
        }
        Command::NoiseBank {
            flats,
            periods,
            out,
            config,
        } => {
            let cfg = load_config(config.as_ref())?;
            let mut paths: Vec<PathBuf> = glob::glob(&flats)?.collect::<Result<_, _>>()?;
            paths.sort();
            if paths.is_empty() {
                bail!("no flat-field images match {flats:?}");
            }
            let fields = paths
                .iter()
                .map(|p| load_field(p, FieldKind::Generic, None))
                .collect::<Result<Vec<_>, _>>()?;
            let bank = build_noise_bank(&fields, &periods, &cfg.noise.bank_params())?;
            save_noise_bank(&bank, &out)?;
            eprintln!("wrote {} tile(s) to {}", bank.patches.len(), out.display());
        }
        Command::Bench {
            sizes,
            radii,
            reps,
            csv,
        } => {
            let rows = bench_blur(&sizes, &radii, reps);
            match csv {
                Some(path) => {
                    let f = File::create(&path).with_context(|| path.display().to_string())?;
                    write_csv(&rows, BufWriter::new(f))?;
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
