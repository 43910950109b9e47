//! Reproducible rational Lanczos experiments and their artifacts.
//!
//! A run writes into its output directory:
//!
//! * `biorthogonality.csv`: `n, measure` with `‖W_nᴴV_n − I‖₂`
//! * `projection.csv`: `n, residual` with `‖W_{n+1}ᴴAV_{n+1}S̲_n − T̲_n‖₂`
//! * `ritz.csv`: `n, index, theta_re, theta_im, distance, class`
//! * `summary.json`: configuration echo, breakdown, final measures and the
//!   pole readout check
//!
//! Each CSV starts with a `# ratkrylov <name> v<version>` comment line.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dense::{self, c64, ComplexMatrix, ComplexVector, C64};
use crate::diagnostics::generate::{gen_upper_triangular, random_complex_matrix, random_complex_vector, random_hermitian};
use crate::diagnostics::mtx::read_matrix_market;
use crate::diagnostics::poles::{format_pole_list, GeneratorSpec};
use crate::diagnostics::ritz::{ritz_values, RitzRecord, RitzValue};
use crate::diagnostics::{biorthogonality_measure, projection_residual};
use crate::error::{Error, Result};
use crate::lanczos::{rat_lan, recover_poles_sub, recover_poles_super, Breakdown, LanczosConfig, RatLanOutput};
use crate::pencil::ProjectivePole;

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
/// Seed used when a configuration leaves it open; the example presets are
/// checked at this seed.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Generator(GeneratorSpec),
}

impl std::fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixSource::File(p) => write!(f, "file:{}", p.display()),
            MatrixSource::Generator(g) => write!(f, "{g}"),
        }
    }
}

/// Starting vector: `ones` (normalized all-ones), `random` (complex normal
/// from the run's generator) or `e<k>` (unit vector, 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorSpec {
    Ones,
    Random,
    Unit(usize),
}

impl FromStr for VectorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ones" => Ok(VectorSpec::Ones),
            "random" => Ok(VectorSpec::Random),
            t => t
                .strip_prefix('e')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k >= 1)
                .map(VectorSpec::Unit)
                .ok_or_else(|| Error::Parse(format!("unknown vector spec {s:?} (ones, random, e<k>)"))),
        }
    }
}

impl std::fmt::Display for VectorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorSpec::Ones => write!(f, "ones"),
            VectorSpec::Random => write!(f, "random"),
            VectorSpec::Unit(k) => write!(f, "e{k}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub matrix: MatrixSource,
    pub v: VectorSpec,
    /// `None` uses the same vector as `v`.
    pub w: Option<VectorSpec>,
    pub xi: Vec<ProjectivePole>,
    pub psi: Vec<ProjectivePole>,
    pub n: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub breakdown_tol: f64,
    pub rebiorth: bool,
    /// A breakdown before this many steps makes the run a failure. Defaults
    /// to `n`.
    pub min_n: Option<usize>,
}

impl ExperimentConfig {
    fn example(name: &str, second_pole: f64, seed: u64) -> Self {
        let poles = vec![ProjectivePole::real(0.0), ProjectivePole::real(second_pole)];
        Self {
            name: name.into(),
            matrix: MatrixSource::Generator(GeneratorSpec::Triangular { eigenvalues: (1..=50).map(|i| c64(i as f64, 0.0)).collect() }),
            v: VectorSpec::Ones,
            w: None,
            xi: poles.clone(),
            psi: poles,
            n: 45,
            seed: Some(seed),
            out: None,
            breakdown_tol: crate::lanczos::SERIOUS_BREAKDOWN_TOL,
            rebiorth: false,
            min_n: None,
        }
    }

    /// 50×50 upper triangular with eigenvalues `1..50`, `Ξ = Ψ = {0, 24.1}`
    /// cycled, `v = w` normalized all-ones, 45 steps.
    pub fn example1(seed: u64) -> Self {
        Self::example("example1", 24.1, seed)
    }

    /// As [`example1`](Self::example1) with the poles `{0, 24 + 1e-5}`.
    pub fn example2(seed: u64) -> Self {
        Self::example("example2", 24.0 + 1e-5, seed)
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "example1" => Ok(Self::example1(seed)),
            "example2" => Ok(Self::example2(seed)),
            other => Err(Error::Config(format!("unknown preset {other:?} (example1, example2)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi.is_empty() || self.psi.is_empty() {
            return Err(Error::Config("pole lists must be nonempty".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if let MatrixSource::Generator(g) = &self.matrix {
            if self.seed.is_none() {
                return Err(Error::Config("a generated matrix needs a seed".into()));
            }
            if self.n >= g.dim() {
                return Err(Error::Config(format!("n = {} must be below m = {}", self.n, g.dim())));
            }
        }
        if self.seed.is_none() && [Some(self.v), self.w].contains(&Some(VectorSpec::Random)) {
            return Err(Error::Config("random starting vectors need a seed".into()));
        }
        if !(self.breakdown_tol > 0.0) {
            return Err(Error::Config("breakdown tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn min_steps(&self) -> usize {
        self.min_n.unwrap_or(self.n)
    }
}

/// The normalized starting vector a spec describes.
pub fn build_vector(spec: VectorSpec, m: usize, rng: &mut ChaCha8Rng) -> Result<ComplexVector> {
    let x = match spec {
        VectorSpec::Ones => ComplexVector::from_element(m, c64(1.0, 0.0)),
        VectorSpec::Random => random_complex_vector(rng, m),
        VectorSpec::Unit(k) => {
            if k > m {
                return Err(Error::Config(format!("unit vector e{k} in dimension {m}")));
            }
            let mut e = ComplexVector::zeros(m);
            e[k - 1] = c64(1.0, 0.0);
            e
        }
    };
    Ok(&x / C64::new(x.norm(), 0.0))
}

/// The matrix and its spectrum (exact for generators with a prescribed one,
/// otherwise from the dense eigensolver).
pub fn build_matrix(source: &MatrixSource, rng: &mut ChaCha8Rng) -> Result<(ComplexMatrix, Vec<C64>)> {
    let a = match source {
        MatrixSource::File(p) => read_matrix_market(p)?,
        MatrixSource::Generator(GeneratorSpec::Triangular { eigenvalues }) => gen_upper_triangular(rng, eigenvalues),
        MatrixSource::Generator(GeneratorSpec::Hermitian { eigenvalues }) => random_hermitian(rng, eigenvalues),
        MatrixSource::Generator(GeneratorSpec::Random { m }) => random_complex_matrix(rng, *m, *m),
    };
    if !a.is_square() {
        return Err(Error::Config(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    let spectrum = match source {
        MatrixSource::Generator(g) => g.spectrum(),
        MatrixSource::File(_) => None,
    };
    let spectrum = match spectrum {
        Some(s) => s,
        None => dense::eigenvalues(&a)?,
    };
    Ok((a, spectrum))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepMeasures {
    pub n: usize,
    pub biorthogonality: f64,
    pub projection_residual: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoleCheck {
    /// Largest distance of a subdiagonal readout from `ξ_i`.
    pub sub_max_error: f64,
    /// Largest distance of a superdiagonal readout from `conj(ψ_i)`.
    pub super_max_error: f64,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub a: ComplexMatrix,
    pub spectrum: Vec<C64>,
    pub run: RatLanOutput,
    pub measures: Vec<StepMeasures>,
    pub ritz: Vec<RitzRecord>,
    pub pole_check: Option<PoleCheck>,
}

/// Run the configured experiment. Nothing is written; see
/// [`Experiment::write_artifacts`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(DEFAULT_SEED));
    let (a, spectrum) = build_matrix(&cfg.matrix, &mut rng)?;
    let m = a.nrows();
    if cfg.n >= m {
        return Err(Error::Config(format!("n = {} must be below m = {m}", cfg.n)));
    }
    let v = build_vector(cfg.v, m, &mut rng)?;
    let w = match cfg.w {
        None => v.clone(),
        Some(spec) => build_vector(spec, m, &mut rng)?,
    };
    let lconf = LanczosConfig { breakdown_tol: cfg.breakdown_tol, rebiorth: cfg.rebiorth, ..LanczosConfig::default() };
    let run = rat_lan(&a, &v, &w, cfg.n, &cfg.xi, &cfg.psi, &lconf)?;
    let k = run.steps();

    let mut measures = Vec::with_capacity(k);
    let mut steps = Vec::with_capacity(k);
    for n in 1..=k {
        let part = run.truncated(n);
        let biorthogonality = biorthogonality_measure(&part.v.columns(0, n).into_owned(), &part.w.columns(0, n).into_owned())?;
        let projection_residual = projection_residual(&a, &part.v, &part.w, &part.pencil.s_dense(), &part.pencil.t_dense())?;
        measures.push(StepMeasures { n, biorthogonality, projection_residual });
        let sq = run.pencil.leading(n);
        let values = match ritz_values(&sq.t.to_dense(), &sq.s.to_dense()) {
            Ok(v) => v,
            Err(Error::SingularPencil) => Vec::new(),
            Err(e) => return Err(e),
        };
        steps.push((n, values));
    }
    let ritz = crate::diagnostics::ritz::ritz_convergence(&spectrum, steps);
    let pole_check = pole_check(&run);
    Ok(Experiment { config: cfg.clone(), a, spectrum, run, measures, ritz, pole_check })
}

fn pole_check(run: &RatLanOutput) -> Option<PoleCheck> {
    if run.steps() == 0 {
        return None;
    }
    let sub = recover_poles_sub(&run.pencil).ok()?;
    let sup = recover_poles_super(&run.pencil).ok()?;
    let sub_max_error = sub.iter().zip(&run.xi).map(|(p, x)| p.distance(x)).fold(0.0, f64::max);
    let super_max_error = sup.iter().zip(&run.psi).map(|(p, x)| p.distance(&x.conj())).fold(0.0, f64::max);
    Some(PoleCheck { sub_max_error, super_max_error })
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryConfig {
    pub name: String,
    pub matrix: String,
    pub v: String,
    pub w: String,
    pub xi: String,
    pub psi: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub breakdown_tol: f64,
    pub rebiorth: bool,
    pub min_n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: SummaryConfig,
    pub dimension: usize,
    pub steps_completed: usize,
    pub breakdown: Option<Breakdown>,
    pub breakdown_before_min_n: bool,
    pub final_biorthogonality: Option<f64>,
    pub final_projection_residual: Option<f64>,
    pub max_normalization_error: f64,
    pub pole_recovery: Option<PoleCheck>,
    /// First step at which some Ritz value is within `1e-8` of an eigenvalue.
    pub first_red_step: Option<usize>,
}

impl Experiment {
    pub fn breakdown_before_min_n(&self) -> bool {
        self.run.breakdown.is_some() && self.run.steps() < self.config.min_steps()
    }

    /// First step whose Ritz values include one within `tol` of `target`.
    pub fn first_step_within(&self, target: C64, tol: f64) -> Option<usize> {
        self.ritz.iter().find(|r| r.closest_to(target) < tol).map(|r| r.step)
    }

    pub fn measure_at(&self, n: usize) -> Option<&StepMeasures> {
        self.measures.get(n.checked_sub(1)?)
    }

    pub fn summary(&self) -> Summary {
        let cfg = &self.config;
        let last = self.measures.last();
        Summary {
            schema_version: SUMMARY_SCHEMA_VERSION,
            config: SummaryConfig {
                name: cfg.name.clone(),
                matrix: cfg.matrix.to_string(),
                v: cfg.v.to_string(),
                w: cfg.w.unwrap_or(cfg.v).to_string(),
                xi: format_pole_list(&cfg.xi),
                psi: format_pole_list(&cfg.psi),
                n: cfg.n,
                seed: cfg.seed,
                breakdown_tol: cfg.breakdown_tol,
                rebiorth: cfg.rebiorth,
                min_n: cfg.min_steps(),
            },
            dimension: self.a.nrows(),
            steps_completed: self.run.steps(),
            breakdown: self.run.breakdown,
            breakdown_before_min_n: self.breakdown_before_min_n(),
            final_biorthogonality: last.map(|m| m.biorthogonality),
            final_projection_residual: last.map(|m| m.projection_residual),
            max_normalization_error: self.run.normalization_errors.iter().copied().fold(0.0, f64::max),
            pole_recovery: self.pole_check,
            first_red_step: self.ritz.iter().find(|r| !r.red_eigenvalues().is_empty()).map(|r| r.step),
        }
    }

    /// Write the three CSVs and `summary.json` into `dir` (created if
    /// missing).
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = csv_writer(&dir.join("biorthogonality.csv"), "biorthogonality")?;
        w.write_record(["n", "measure"])?;
        for m in &self.measures {
            w.write_record([m.n.to_string(), fmt_f64(m.biorthogonality)])?;
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("projection.csv"), "projection")?;
        w.write_record(["n", "residual"])?;
        for m in &self.measures {
            w.write_record([m.n.to_string(), fmt_f64(m.projection_residual)])?;
        }
        w.flush()?;

        let mut w = csv_writer(&dir.join("ritz.csv"), "ritz")?;
        write_ritz_records(&mut w, &self.ritz)?;
        w.flush()?;

        let json = serde_json::to_string_pretty(&self.summary())?;
        fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(())
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A CSV writer whose file starts with the schema comment line.
pub fn csv_writer(path: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    use std::io::Write;
    let mut f = fs::File::create(path)?;
    writeln!(f, "# ratkrylov {name} v{CSV_SCHEMA_VERSION}")?;
    Ok(csv::Writer::from_writer(f))
}

/// Header and rows `n, index, theta_re, theta_im, distance, class`.
pub fn write_ritz_records<W: std::io::Write>(w: &mut csv::Writer<W>, records: &[RitzRecord]) -> Result<()> {
    w.write_record(["n", "index", "theta_re", "theta_im", "distance", "class"])?;
    for r in records {
        for (i, (v, (d, c))) in r.values.iter().zip(r.distances.iter().zip(&r.classes)).enumerate() {
            let (re, im) = match v {
                RitzValue::Finite(z) => (fmt_f64(z.re), fmt_f64(z.im)),
                RitzValue::Infinite => ("inf".into(), "inf".into()),
            };
            w.write_record([r.step.to_string(), (i + 1).to_string(), re, im, fmt_f64(*d), c.as_str().into()])?;
        }
    }
    Ok(())
}
