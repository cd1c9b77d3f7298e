use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfa_cli::config::{parse_grid, parse_p_list, parse_scales};
use mfa_cli::output::{kind_tag, write_pair_report, write_report};
use mfa_cli::synth_io::write_signal_csv;
use mfa_cli::{analyze, analyze_pair, ingest, read_segments, AnalysisConfig, CliError, CliResult, Integration, Segment};
use mfa_core::synth::{Generator, GeneratorSpec};

#[derive(Parser)]
#[command(name = "mfa", version, about = "Wavelet-leader multifractal analysis of time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Univariate analysis of one CSV column.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        opts: AnalysisOpts,
    },
    /// Joint analysis of two CSV columns (same or different files).
    AnalyzePair {
        input: PathBuf,
        input2: PathBuf,
        #[command(flatten)]
        source: Source,
        /// Column of the second file (defaults to --column).
        #[arg(long)]
        column2: Option<String>,
        #[command(flatten)]
        opts: AnalysisOpts,
    },
    /// Write a synthetic signal as CSV.
    Synth {
        #[command(subcommand)]
        generator: GeneratorArg,
        #[arg(long, default_value_t = 1 << 16, global = true)]
        length: usize,
        #[arg(long, default_value_t = 0, global = true)]
        seed: u64,
        /// Output CSV file.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Ingest a CSV column and print what would be analysed.
    IngestCheck {
        input: PathBuf,
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args)]
struct Source {
    /// Data column; may be omitted when the file has a single non-time column.
    #[arg(long)]
    column: Option<String>,
    /// File of `start,end` data-row ranges to stitch.
    #[arg(long)]
    segments: Option<PathBuf>,
}

#[derive(Args)]
struct AnalysisOpts {
    /// Named profile applied before the other flags (`physio`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    wavelet_order: Option<usize>,
    /// Regression scales `j1:j2`, finer scales having larger j.
    #[arg(long)]
    scales: Option<String>,
    /// Comma-separated leader exponents; `inf` for classical leaders.
    #[arg(long)]
    p: Option<String>,
    /// Moment grid `lo:hi:step`.
    #[arg(long)]
    q_grid: Option<String>,
    /// Fractional integration order.
    #[arg(long, conflicts_with = "auto_integrate", allow_negative_numbers = true)]
    integrate: Option<f64>,
    /// Choose the smallest integration order that makes every requested p valid.
    #[arg(long)]
    auto_integrate: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GeneratorArg {
    Weierstrass {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        terms: Option<usize>,
    },
    Cusp {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
    },
    Chirp {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
    },
    LacunaryComb {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        gamma: f64,
    },
    Riemann {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        terms: Option<usize>,
    },
    Fbm {
        #[arg(long)]
        alpha: f64,
    },
    BinomialCascade {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        depth: Option<u32>,
    },
    FbmMultifractalTime {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        oversampling: Option<usize>,
    },
}

impl From<GeneratorArg> for Generator {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Weierstrass { a, omega, terms } => Generator::Weierstrass { a, omega, terms },
            GeneratorArg::Cusp { alpha, x0 } => Generator::Cusp { alpha, x0 },
            GeneratorArg::Chirp { alpha, beta, x0 } => Generator::Chirp { alpha, beta, x0 },
            GeneratorArg::LacunaryComb { alpha, omega, gamma } => Generator::LacunaryComb { alpha, omega, gamma },
            GeneratorArg::Riemann { s, terms } => Generator::Riemann { s, terms },
            GeneratorArg::Fbm { alpha } => Generator::Fbm { alpha },
            GeneratorArg::BinomialCascade { p, depth } => Generator::BinomialCascade { p, depth },
            GeneratorArg::FbmMultifractalTime {
                alpha,
                p,
                depth,
                oversampling,
            } => Generator::FbmMultifractalTime {
                alpha,
                p,
                depth,
                oversampling,
            },
        }
    }
}

fn config(opts: &AnalysisOpts) -> CliResult<AnalysisConfig> {
    let mut c = match &opts.preset {
        Some(name) => AnalysisConfig::preset(name)?,
        None => AnalysisConfig::default(),
    };
    if let Some(o) = opts.wavelet_order {
        c.wavelet_order = o;
    }
    if let Some(s) = &opts.scales {
        c.scales = Some(parse_scales(s)?);
    }
    if let Some(p) = &opts.p {
        c.kinds = parse_p_list(p)?;
    }
    if let Some(q) = &opts.q_grid {
        c.q_grid = parse_grid(q)?;
    }
    c.integration = match (opts.integrate, opts.auto_integrate) {
        (Some(s), _) => Integration::Fixed(s),
        (None, true) => Integration::Auto,
        (None, false) => Integration::None,
    };
    c.validate()?;
    Ok(c)
}

fn segments(path: &Option<PathBuf>) -> CliResult<Option<Vec<Segment>>> {
    path.as_deref().map(read_segments).transpose()
}

fn print_summary(r: &mfa_cli::Report, out: &Path) {
    println!("input     {} ({} samples, sha256 {})", r.input.label, r.input.len, r.input.sha256);
    println!("scales    {}:{}", r.range.j1, r.range.j2);
    println!("h_min     {:.4} (r² {:.3})", r.h_min.value, r.h_min.r2);
    println!("integrate s = {}", r.integration.s);
    for a in &r.analyses {
        println!(
            "{:<9} c1 = {:.4}, max L = {:.4}",
            kind_tag(a.kind),
            a.spectrum.c1,
            a.spectrum.max_l
        );
    }
    let d = &r.diagnosis;
    println!("verdicts  monofractal: {:?}, no lacunary: {:?}, canonical: {:?}",
        d.monofractal.status, d.no_lacunary.status, d.canonical.status);
    for w in &r.warnings {
        println!("warning   {w}");
    }
    println!("report    {}", out.display());
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze { input, source, opts } => {
            let cfg = config(&opts)?;
            let segs = segments(&source.segments)?;
            let data = ingest(&input, source.column.as_deref(), segs.as_deref())?;
            let report = analyze(&data.signal, &cfg)?;
            let path = write_report(&opts.out, &report)?;
            print_summary(&report, &path);
        }
        Command::AnalyzePair {
            input,
            input2,
            source,
            column2,
            opts,
        } => {
            let cfg = config(&opts)?;
            let segs = segments(&source.segments)?;
            let a = ingest(&input, source.column.as_deref(), segs.as_deref())?;
            let col2 = column2.as_deref().or(source.column.as_deref());
            let b = ingest(&input2, col2, segs.as_deref())?;
            let report = analyze_pair(&a.signal, &b.signal, &cfg)?;
            let path = write_pair_report(&opts.out, &report)?;
            print_summary(&report.first, &path);
            print_summary(&report.second, &path);
            let bs = &report.bivariate.spectrum;
            println!(
                "pair      argmax ({:.3}, {:.3}), max |C(j)| = {}",
                bs.argmax.0,
                bs.argmax.1,
                report.max_abs_coherence.map_or("undefined".into(), |c| format!("{c:.3}"))
            );
            println!("caveat    {}", report.bivariate.caveat);
        }
        Command::Synth {
            generator,
            length,
            seed,
            out,
        } => {
            let out = out.ok_or_else(|| CliError::Config("--out FILE is required".into()))?;
            let spec = GeneratorSpec::new(generator.into(), length, seed);
            let generated = spec.generate()?;
            write_signal_csv(&out, &spec, &generated)?;
            println!("wrote {} samples to {}", generated.signal.len(), out.display());
        }
        Command::IngestCheck { input, source } => {
            let segs = segments(&source.segments)?;
            let data = ingest(&input, source.column.as_deref(), segs.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&data.provenance)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
