use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ratkrylov::arnoldi::rational_arnoldi;
use ratkrylov::dense::{self, ComplexMatrix, C64};
use ratkrylov::diagnostics::experiment::{
    build_matrix, build_vector, csv_writer, run_experiment, write_ritz_records, Experiment, ExperimentConfig, MatrixSource, VectorSpec,
    DEFAULT_SEED,
};
use ratkrylov::diagnostics::mtx::{read_matrix_market, write_matrix_market};
use ratkrylov::diagnostics::poles::{parse_pole_list, GeneratorSpec};
use ratkrylov::diagnostics::ritz::{ritz_convergence, ritz_values};
use ratkrylov::lanczos::{cycle_poles, rat_lan, LanczosConfig, SERIOUS_BREAKDOWN_TOL};
use ratkrylov::oracle::oracle_run;
use ratkrylov::pencil::{pole_sequence, ProjectivePole};
use ratkrylov::selftest;
use ratkrylov::Error;

/// Exit status for a breakdown before the requested minimum step count.
const EXIT_BREAKDOWN: u8 = 2;
/// Exit status when a self-test criterion fails.
const EXIT_SELFTEST: u8 = 3;

#[derive(Parser)]
#[command(name = "ratkrylov", version, about = "Rational Krylov experiments: Arnoldi, rational Lanczos and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a rational Arnoldi decomposition, dump the pencil and report checks.
    Arnoldi(ArnoldiArgs),
    /// Run the rational Lanczos iteration and write the pencil and measures.
    Lanczos(LanczosArgs),
    /// Ritz values of a stored pencil, per leading block, as CSV.
    Ritz(RitzArgs),
    /// Compare rational Lanczos against the explicit oracle.
    OracleCheck(OracleArgs),
    /// Rerun a preset experiment (example1 or example2).
    Reproduce(ReproduceArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct MatrixArgs {
    /// Matrix Market file.
    #[arg(long, conflicts_with = "gen")]
    matrix: Option<PathBuf>,
    /// Generator, e.g. `triangular:m=50,eigs=1:50`, `hermitian:m=20`, `random:m=30`.
    #[arg(long)]
    gen: Option<GeneratorSpec>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl MatrixArgs {
    fn source(&self) -> Result<MatrixSource> {
        match (&self.matrix, &self.gen) {
            (Some(p), None) => Ok(MatrixSource::File(p.clone())),
            (None, Some(g)) => Ok(MatrixSource::Generator(g.clone())),
            _ => bail!("give exactly one of --matrix and --gen"),
        }
    }
}

#[derive(Args)]
struct ArnoldiArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Poles of K, cycled to length n.
    #[arg(long, default_value = "inf")]
    poles_k: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "ones")]
    v: VectorSpec,
    /// Output directory for H.mtx, K.mtx and V.mtx.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LanczosArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Poles Ξ of K(A, v), cycled to length n.
    #[arg(long, default_value = "inf")]
    poles_k: String,
    /// Poles Ψ of L(Aᴴ, w), cycled to length n.
    #[arg(long, default_value = "inf")]
    poles_l: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "ones")]
    v: VectorSpec,
    /// Defaults to the same vector as `--v`.
    #[arg(long)]
    w: Option<VectorSpec>,
    /// Serious-breakdown threshold on |⟨v̂, ŵ⟩| / (‖v̂‖‖ŵ‖).
    #[arg(long, default_value_t = SERIOUS_BREAKDOWN_TOL)]
    tol: f64,
    /// Rebiorthogonalize against all previous vectors (debugging only).
    #[arg(long)]
    rebiorth: bool,
    /// Steps that must complete before a breakdown counts as a success.
    #[arg(long)]
    min_n: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out/lanczos")]
    out: PathBuf,
    /// Also write the bases V.mtx and W.mtx.
    #[arg(long)]
    bases: bool,
}

#[derive(Args)]
struct RitzArgs {
    /// T of the pencil (square or (n+1)×n).
    #[arg(long)]
    t: PathBuf,
    /// S of the pencil.
    #[arg(long)]
    s: PathBuf,
    /// Matrix whose spectrum the Ritz values are compared with.
    #[command(flatten)]
    matrix: MatrixArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, default_value = "inf")]
    poles_k: String,
    #[arg(long, default_value = "inf")]
    poles_l: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "random")]
    v: VectorSpec,
    #[arg(long, default_value = "random")]
    w: VectorSpec,
}

#[derive(Args)]
struct ReproduceArgs {
    /// `example1` or `example2`.
    preset: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    /// Output directory; defaults to `out/<preset>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    rebiorth: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run a single criterion (1-10).
    #[arg(long)]
    criterion: Option<u8>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Arnoldi(a) => arnoldi(a),
        Command::Lanczos(a) => lanczos(a),
        Command::Ritz(a) => ritz(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Reproduce(a) => reproduce(a),
        Command::Selftest(a) => run_selftest(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn poles(list: &str, n: usize) -> Result<Vec<ProjectivePole>> {
    Ok(cycle_poles(&parse_pole_list(list)?, n))
}

fn write_mtx(dir: &Path, name: &str, m: &ComplexMatrix) -> Result<()> {
    let path = dir.join(name);
    write_matrix_market(&path, m).with_context(|| format!("writing {}", path.display()))
}

fn arnoldi(args: ArnoldiArgs) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.matrix.seed);
    let (a, _) = build_matrix(&args.matrix.source()?, &mut rng)?;
    let xi = poles(&args.poles_k, args.n)?;
    let v = build_vector(args.v, a.nrows(), &mut rng)?;
    let dec = rational_arnoldi(&a, &v, &xi, None)?;
    let pole_err = pole_sequence(&dec.pencil())?.iter().zip(dec.poles()).map(|(g, p)| g.distance(p)).fold(0.0, f64::max);
    println!("steps            {}", dec.steps());
    println!("orthonormality   {:e}", dec.orthonormality_defect());
    println!("residual / ‖A‖   {:e}", dec.residual(&a) / dense::norm2(&a));
    println!("pole readout     {pole_err:e}");
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        write_mtx(out, "H.mtx", dec.h())?;
        write_mtx(out, "K.mtx", dec.k())?;
        write_mtx(out, "V.mtx", dec.v())?;
        println!("wrote H.mtx, K.mtx, V.mtx to {}", out.display());
    }
    if let Some(j) = dec.breakdown() {
        println!("breakdown        step {j}");
        return Ok(ExitCode::from(EXIT_BREAKDOWN));
    }
    Ok(ExitCode::SUCCESS)
}

fn report_experiment(e: &Experiment) {
    let s = e.summary();
    println!("steps completed      {} of {}", s.steps_completed, e.config.n);
    if let Some(b) = &s.breakdown {
        println!("breakdown            {:?} at vector {} (value {:e})", b.kind, b.vector, b.value);
    }
    if let Some(x) = s.final_biorthogonality {
        println!("biorthogonality      {x:e}");
    }
    if let Some(x) = s.final_projection_residual {
        println!("projection residual  {x:e}");
    }
    if let Some(p) = s.pole_recovery {
        println!("pole readout         sub {:e}, super {:e}", p.sub_max_error, p.super_max_error);
    }
    if let Some(n) = s.first_red_step {
        println!("first red Ritz value n = {n}");
    }
}

fn finish(e: &Experiment, out: &Path) -> Result<ExitCode> {
    e.write_artifacts(out).with_context(|| format!("writing artifacts to {}", out.display()))?;
    report_experiment(e);
    println!("artifacts in {}", out.display());
    if e.breakdown_before_min_n() {
        eprintln!("breakdown before the minimum of {} steps", e.config.min_steps());
        return Ok(ExitCode::from(EXIT_BREAKDOWN));
    }
    Ok(ExitCode::SUCCESS)
}

fn lanczos(args: LanczosArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig {
        name: "lanczos".into(),
        matrix: args.matrix.source()?,
        v: args.v,
        w: args.w,
        xi: parse_pole_list(&args.poles_k)?,
        psi: parse_pole_list(&args.poles_l)?,
        n: args.n,
        seed: Some(args.matrix.seed),
        out: Some(args.out.clone()),
        breakdown_tol: args.tol,
        rebiorth: args.rebiorth,
        min_n: args.min_n,
    };
    let e = run_experiment(&cfg)?;
    fs::create_dir_all(&args.out)?;
    write_mtx(&args.out, "T.mtx", &e.run.pencil.t_dense())?;
    write_mtx(&args.out, "S.mtx", &e.run.pencil.s_dense())?;
    if args.bases {
        write_mtx(&args.out, "V.mtx", &e.run.v)?;
        write_mtx(&args.out, "W.mtx", &e.run.w)?;
    }
    finish(&e, &args.out)
}

fn ritz(args: RitzArgs) -> Result<ExitCode> {
    let t = read_matrix_market(&args.t)?;
    let s = read_matrix_market(&args.s)?;
    if t.shape() != s.shape() {
        bail!("T is {:?} but S is {:?}", t.shape(), s.shape());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.matrix.seed);
    let (_, spectrum) = build_matrix(&args.matrix.source()?, &mut rng)?;
    let cols = t.ncols().min(t.nrows());
    let mut steps = Vec::with_capacity(cols);
    for n in 1..=cols {
        let tn = t.view((0, 0), (n, n)).into_owned();
        let sn = s.view((0, 0), (n, n)).into_owned();
        match ritz_values(&tn, &sn) {
            Ok(values) => steps.push((n, values)),
            Err(Error::SingularPencil) => eprintln!("n = {n}: singular pencil, skipped"),
            Err(e) => return Err(e.into()),
        }
    }
    let records = ritz_convergence(&spectrum, steps);
    match &args.out {
        Some(path) => {
            let mut w = csv_writer(path, "ritz")?;
            write_ritz_records(&mut w, &records)?;
            w.flush()?;
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            write_ritz_records(&mut w, &records)?;
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(args: OracleArgs) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.matrix.seed);
    let (a, _) = build_matrix(&args.matrix.source()?, &mut rng)?;
    let m = a.nrows();
    if args.n >= m {
        bail!("n = {} must be below m = {m}", args.n);
    }
    let v = build_vector(args.v, m, &mut rng)?;
    let w = build_vector(args.w, m, &mut rng)?;
    let xi = poles(&args.poles_k, args.n)?;
    let psi = poles(&args.poles_l, args.n)?;
    let out = rat_lan(&a, &v, &w, args.n, &xi, &psi, &LanczosConfig::default())?;
    if let Some(b) = &out.breakdown {
        println!("rat_lan breakdown {:?} at vector {}", b.kind, b.vector);
        return Ok(ExitCode::from(EXIT_BREAKDOWN));
    }
    let run = oracle_run(&a, &v, &w, &xi, &psi, None)?;
    let Some(pencil) = run.pencil else {
        println!("oracle LR breakdown at column {:?}", run.pair.breakdown);
        return Ok(ExitCode::from(EXIT_BREAKDOWN));
    };
    let n = args.n;
    let sine_v = dense::subspace_sine(&out.v, &run.pair.v);
    let sine_w = dense::subspace_sine(&out.w, &run.pair.w);
    // Columns agree up to scalars d_i, so the square pencils are D-similar.
    let d: Vec<C64> = (0..n).map(|i| run.pair.v.column(i).dotc(&out.v.column(i)) / run.pair.v.column(i).norm_squared()).collect();
    let sq = out.pencil.square();
    let osq = pencil.primal.square();
    let z = dense::right_divide(&sq.t.to_dense(), &sq.s.to_dense()).context("S of rat_lan is singular")?;
    let zo = dense::right_divide(&osq.t.to_dense(), &osq.s.to_dense()).context("S of the oracle is singular")?;
    let zo = ComplexMatrix::from_fn(n, n, |i, j| zo[(i, j)] * d[j] / d[i]);
    let anorm = dense::norm2(&a);
    let bio = dense::norm2(&(out.w.adjoint() * &out.v - dense::identity(n + 1)));
    println!("m = {m}, n = {n}");
    println!("sin∠(V, V_oracle)              {sine_v:e}");
    println!("sin∠(W, W_oracle)              {sine_w:e}");
    println!("‖T·S⁻¹ − D⁻¹T_o·S_o⁻¹D‖ / ‖A‖  {:e}", dense::norm2(&(z - zo)) / anorm);
    println!("rat_lan biorthogonality        {bio:e}");
    println!("oracle biorthogonality         {:e}", run.pair.biorthogonality_defect());
    Ok(ExitCode::SUCCESS)
}

fn reproduce(args: ReproduceArgs) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::preset(&args.preset, args.seed)?;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(tol) = args.tol {
        cfg.breakdown_tol = tol;
    }
    cfg.rebiorth = args.rebiorth;
    let out = args.out.unwrap_or_else(|| PathBuf::from("out").join(&args.preset));
    cfg.out = Some(out.clone());
    let e = run_experiment(&cfg)?;
    finish(&e, &out)
}

fn run_selftest(args: SelftestArgs) -> Result<ExitCode> {
    let reports = match args.criterion {
        Some(id) => vec![selftest::run_one(id).with_context(|| format!("no criterion {id} (1-10)"))?],
        None => selftest::run_all(),
    };
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        eprintln!("{failed} criterion(s) failed");
        return Ok(ExitCode::from(EXIT_SELFTEST));
    }
    Ok(ExitCode::SUCCESS)
}
