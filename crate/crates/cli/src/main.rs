use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bkrylov::bounds::Instance;
use bkrylov::gappoly::{gamma_factor, select_q};
use bkrylov::harness::{
    angle_diagnostics, gaussian_expectation_mc, gen_guess, instance_angles, prepare_trial, read_matrix,
    run_verify, synth_matrix, write_csv, write_json, ExperimentConfig, GuessKind, OutputFormat, Spectrum,
};
use bkrylov::matcore::{partition_svd, thin_svd};
use bkrylov::{Error, Norm};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bkrylov", version, about = "Block Krylov subspace approximation and bound verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and check every bound.
    Verify(VerifyArgs),
    /// Print principal-angle diagnostics for the first trial or for a given matrix.
    Angles(AnglesArgs),
    /// Print the iteration count that brings the polynomial factor below epsilon.
    Selectq(SelectArgs),
    /// Monte Carlo check of the expected guess misalignment.
    Mc(McArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 80)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, default_value_t = 3)]
    q: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// default, plateau, geometric:RATE or custom:V1,V2,...
    #[arg(long, default_value = "default")]
    spectrum: String,
    /// gaussian, sign, orthonormal, exact_vk or custom:PATH
    #[arg(long, default_value = "gaussian")]
    guess: String,
    /// Starting guess file; shorthand for --guess custom:PATH.
    #[arg(long)]
    x_file: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Two,
    Fro,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value = "both")]
    norm: NormArg,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Record wall-clock time per trial (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct AnglesArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Matrix file to analyse instead of a synthetic matrix; --m and --n are
    /// taken from it and --gamma is ignored.
    #[arg(long)]
    a_file: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    epsilon: f64,
    /// Tangent of the guess angles; measured on the first trial when omitted.
    #[arg(long)]
    tan: Option<f64>,
    #[command(flatten)]
    problem: ProblemArgs,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value = "default")]
    spectrum: String,
    #[arg(long, default_value_t = 10000)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn config(p: &ProblemArgs) -> Result<ExperimentConfig, Error> {
    let guess = match &p.x_file {
        Some(path) => GuessKind::Custom(path.clone()),
        None => p.guess.parse()?,
    };
    Ok(ExperimentConfig {
        m: p.m,
        n: p.n,
        k: p.k,
        s: p.s,
        q: p.q,
        gamma: p.gamma,
        spectrum: p.spectrum.parse()?,
        guess,
        seed: p.seed,
        ..ExperimentConfig::default()
    })
}

fn verify(args: VerifyArgs) -> Result<u8, Error> {
    let mut cfg = config(&args.problem)?;
    cfg.trials = args.trials;
    cfg.norms = match args.norm {
        NormArg::Two => vec![Norm::Two],
        NormArg::Fro => vec![Norm::Fro],
        NormArg::Both => Norm::BOTH.to_vec(),
    };
    cfg.format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    cfg.out = args.out;
    cfg.timing = args.timing;
    cfg.validate()?;

    let outcome = run_verify(&cfg)?;
    let sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match cfg.format {
        OutputFormat::Csv => write_csv(&outcome.records, &mut sink)?,
        OutputFormat::Json => write_json(&outcome.records, &mut sink)?,
    }
    sink.flush()?;

    let reports: usize = outcome.records.iter().map(|r| r.reports.len()).sum();
    eprintln!(
        "trials: {}, reports: {reports}, violations: {}, failed trials: {}",
        outcome.records.len(),
        outcome.violations(),
        outcome.failed_trials()
    );
    for rec in outcome.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("trial {}: {}", rec.trial, rec.error.as_deref().unwrap_or_default());
    }
    Ok(outcome.exit_code() as u8)
}

fn angles(args: AnglesArgs) -> Result<u8, Error> {
    let d = match &args.a_file {
        None => angle_diagnostics(&config(&args.problem)?)?,
        Some(path) => {
            let a = read_matrix(path)?;
            let mut cfg = config(&args.problem)?;
            (cfg.m, cfg.n) = a.shape();
            cfg.validate_shape()?;
            let p = partition_svd(&thin_svd(&a)?, cfg.k)?;
            let x = gen_guess(&cfg.guess, cfg.n, cfg.s, cfg.seed, 0, &p)?;
            instance_angles(&Instance::prepare(a, x, cfg.k, cfg.q)?)?
        }
    };
    let list = |v: &[f64]| v.iter().map(|t| format!("{t:.6e}")).collect::<Vec<_>>().join(" ");
    println!("gamma (measured)        {:.6e}", d.gamma);
    println!("theta(X, V_k)           {}", list(&d.guess_angles));
    println!("tan alignment two       {:.6e}", d.guess_tan_two);
    println!("tan alignment fro       {:.6e}", d.guess_tan_fro);
    println!("theta(K_q, U_k)         {}", list(&d.krylov_angles));
    println!("sin distance two        {:.6e}", d.krylov_sin_two);
    println!("sin distance fro        {:.6e}", d.krylov_sin_fro);
    println!("krylov rank             {} ({})", d.krylov_rank, if d.krylov_rank_ok { "full" } else { "deficient" });
    Ok(0)
}

fn selectq(args: SelectArgs) -> Result<u8, Error> {
    let gamma = args.problem.gamma;
    let tan = match args.tan {
        Some(t) => t,
        None => {
            let cfg = config(&args.problem)?;
            cfg.validate()?;
            prepare_trial(&cfg, 0)?.align_two
        }
    };
    let q = select_q(args.epsilon, gamma, tan)?;
    println!("q = {q}");
    println!("tan = {tan:.6e}");
    println!("Gamma = {:.6e}", gamma_factor(tan, q, gamma));
    Ok(0)
}

fn mc(args: McArgs) -> Result<u8, Error> {
    let spectrum: Spectrum = args.spectrum.parse()?;
    let (_, p) = synth_matrix(args.m, args.n, args.k, args.gamma, &spectrum, args.seed, 0)?;
    let est = gaussian_expectation_mc(&p.v_kp, args.trials, args.seed)?;
    println!("trials            {}", est.trials);
    println!("mean              {:.6}", est.mean);
    println!("stderr            {:.6}", est.stderr);
    println!("expected          {:.6}", est.expected);
    println!("markov frequency  {:.4}", est.markov_frequency);
    let ok = est.mean_consistent() && est.markov_frequency >= 0.9;
    println!("{}", if ok { "consistent" } else { "inconsistent" });
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Angles(a) => angles(a),
        Command::Selectq(a) => selectq(a),
        Command::Mc(a) => mc(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 2 } else { 1 })
        }
    }
}
