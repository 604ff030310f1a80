use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use torus_quant::symbol::{DEFAULT_M_MAX, DEFAULT_N_MAX};
use torus_quant::{corollary_from_check, decay_scan, spectrum_compare, correspondence_check, Error, FloquetTorus, FourierSymbol};

const THREADS_ENV: &str = "TORUSQ_THREADS";

#[derive(Parser, Debug)]
#[command(name = "torusq", version, about = "Toeplitz and complex Weyl quantization of the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the Toeplitz matrix and the complex Weyl matrix of the heat-flowed symbol.
    Quantize(RunArgs),
    /// Report the correspondence residual on both sides.
    Compare(RunArgs),
    /// Sweep several levels and fit the residual decay.
    Scan(RunArgs),
    /// Eigenvalues of both operators and their Hausdorff distance.
    Spectrum(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["symbol", "symbol_file"])))]
struct RunArgs {
    /// Built-in symbol: one, cos_p, harper, two_plus_cos_p, skew.
    #[arg(long)]
    symbol: Option<String>,
    /// Coefficient table with a `frame=` header and `m n re im` lines.
    #[arg(long, value_name = "PATH")]
    symbol_file: Option<PathBuf>,
    /// Level, or a comma-separated increasing list for `scan`.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    k: Vec<u32>,
    /// Floquet angle of u = e^{ic}.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c: f64,
    /// Floquet angle of v = e^{id}.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    d: f64,
    /// Theta series half-width.
    #[arg(long)]
    j: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: u32,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: u32,
    /// Trapezoid nodes in p (single-level commands only).
    #[arg(long)]
    np: Option<usize>,
    /// Gauss-Legendre nodes in q (single-level commands only).
    #[arg(long)]
    nq: Option<usize>,
    /// Output file; a directory for `quantize`. Defaults to stdout (or `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Symbol(String),
    Level(String),
    Accuracy(String),
    Numeric(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Symbol(_) => 3,
            Failure::Level(_) => 4,
            Failure::Accuracy(_) => 5,
            Failure::Numeric(_) => 6,
            Failure::Output(_) => 7,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Symbol(_) => "symbol",
            Failure::Level(_) => "level",
            Failure::Accuracy(_) => "accuracy",
            Failure::Numeric(_) => "numeric",
            Failure::Output(_) => "output",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Symbol(m)
            | Failure::Level(m)
            | Failure::Accuracy(m)
            | Failure::Numeric(m)
            | Failure::Output(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let msg = err.to_string();
        match err {
            Error::Accuracy { .. } => Failure::Accuracy(msg),
            Error::Precondition(_) | Error::Index { .. } => Failure::Level(msg),
            Error::Parse { .. } | Error::Frame { .. } => Failure::Symbol(msg),
            Error::Io(_) | Error::Json(_) => Failure::Output(msg),
            Error::Input(_) | Error::Basis { .. } => Failure::Usage(msg),
            Error::Numeric(_) | Error::Domain(_) => Failure::Numeric(msg),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn load_symbol(args: &RunArgs) -> Outcome<(String, FourierSymbol)> {
    let (name, sym) = match (&args.symbol, &args.symbol_file) {
        (Some(name), None) => (name.clone(), FourierSymbol::builtin(name).map_err(|e| Failure::Symbol(e.to_string()))?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Symbol(format!("cannot read {}: {e}", path.display())))?;
            let sym = FourierSymbol::from_table_str(&text).map_err(|e| Failure::Symbol(format!("{}: {e}", path.display())))?;
            (path.display().to_string(), sym)
        }
        _ => return Err(Failure::Usage("give exactly one of --symbol and --symbol-file".into())),
    };
    Ok((name, sym.truncate(args.m_max, args.n_max)))
}

fn torus_for(args: &RunArgs, k: u32) -> Outcome<FloquetTorus> {
    let mut torus = FloquetTorus::new(k, args.c, args.d)?;
    if let Some(j) = args.j {
        torus = torus.with_truncation(j)?;
    }
    match (args.np, args.nq) {
        (None, None) => {}
        (np, nq) => {
            let default = torus.quadrature(0);
            torus = torus.with_quadrature(np.unwrap_or(default.n_p), nq.unwrap_or(default.n_q))?;
        }
    }
    Ok(torus)
}

fn single_level(args: &RunArgs) -> Outcome<u32> {
    match args.k.as_slice() {
        [k] => Ok(*k),
        _ => Err(Failure::Usage("this command takes a single --k".into())),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Output(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Output(e.to_string()))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Output(e.to_string()))
}

fn run_quantize(args: &RunArgs) -> Outcome<()> {
    let (name, sym) = load_symbol(args)?;
    let k = single_level(args)?;
    let torus = torus_for(args, k)?;
    let check = correspondence_check(&torus, &sym)?;
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::Output(format!("cannot create {}: {e}", dir.display())))?;
    let toeplitz_path = dir.join(format!("toeplitz_k{k}.txt"));
    let weyl_path = dir.join(format!("weyl_k{k}.txt"));
    emit(Some(&toeplitz_path), &check.toeplitz.orthonormal.to_text())?;
    emit(Some(&weyl_path), &check.weyl.to_text())?;
    let summary = json!({
        "symbol": name,
        "k": k,
        "c": torus.c(),
        "d": torus.d(),
        "toeplitz": toeplitz_path.display().to_string(),
        "weyl": weyl_path.display().to_string(),
        "quadrature": check.toeplitz.quadrature,
        "max_refinement_change": check.toeplitz.max_change,
        "floor": check.toeplitz.floor,
    });
    emit(None, &to_json(&summary)?)
}

fn run_compare(args: &RunArgs) -> Outcome<()> {
    let (name, sym) = load_symbol(args)?;
    let k = single_level(args)?;
    let torus = torus_for(args, k)?;
    let check = correspondence_check(&torus, &sym)?;
    let corollary = corollary_from_check(&torus, &sym, &check)?;
    let text = match args.format {
        Format::Json => to_json(&json!({
            "symbol": name,
            "k": k,
            "c": torus.c(),
            "d": torus.d(),
            "theorem_a_residual": check.residual,
            "corollary_residual": corollary,
            "floor": check.floor(),
        }))?,
        Format::Csv => format!(
            "k,theorem_a_residual,corollary_residual,floor\n{k},{:.17e},{:.17e},{:.17e}\n",
            check.residual,
            corollary,
            check.floor()
        ),
    };
    emit(args.out.as_deref(), &text)
}

fn run_scan(args: &RunArgs) -> Outcome<()> {
    if args.np.is_some() || args.nq.is_some() {
        return Err(Failure::Usage("scan derives quadrature per level; --np/--nq are not accepted".into()));
    }
    let (name, sym) = load_symbol(args)?;
    let first = *args.k.first().ok_or_else(|| Failure::Usage("missing --k".into()))?;
    let template = torus_for(args, first)?;
    let report = decay_scan(&name, &sym, &args.k, &template)?;
    let text = match args.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(args.out.as_deref(), &text)
}

fn run_spectrum(args: &RunArgs) -> Outcome<()> {
    let (name, sym) = load_symbol(args)?;
    let k = single_level(args)?;
    let torus = torus_for(args, k)?;
    let spectra = spectrum_compare(&torus, &sym)?;
    let text = match args.format {
        Format::Json => to_json(&json!({
            "symbol": name,
            "k": k,
            "eigs_toeplitz": spectra.eigs_toeplitz,
            "eigs_weyl": spectra.eigs_weyl,
            "hausdorff": spectra.hausdorff,
        }))?,
        Format::Csv => {
            let mut s = String::from("index,toeplitz,weyl\n");
            for (i, (a, b)) in spectra.eigs_toeplitz.iter().zip(&spectra.eigs_weyl).enumerate() {
                s.push_str(&format!("{i},{a:.17e},{b:.17e}\n"));
            }
            s
        }
    };
    emit(args.out.as_deref(), &text)
}

fn configure_threads() -> Outcome<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Quantize(a) => run_quantize(a),
        Command::Compare(a) => run_compare(a),
        Command::Scan(a) => run_scan(a),
        Command::Spectrum(a) => run_spectrum(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let record = json!({
                "error": failure.kind(),
                "message": failure.message(),
                "exit_code": failure.code(),
            });
            eprintln!("{record}");
            ExitCode::from(failure.code())
        }
    }
}
