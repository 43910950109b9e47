//! Parsing of pole lists and generator specifications.

use std::str::FromStr;

use crate::dense::{c64, C64};
use crate::error::{Error, Result};
use crate::pencil::ProjectivePole;

/// Comma-separated poles: complex literals such as `2`, `3+1i`, `-0.5i`,
/// or `inf`.
pub fn parse_pole_list(s: &str) -> Result<Vec<ProjectivePole>> {
    let poles: Vec<ProjectivePole> =
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(ProjectivePole::from_str).collect::<Result<_>>()?;
    if poles.is_empty() {
        return Err(Error::Parse(format!("empty pole list {s:?}")));
    }
    Ok(poles)
}

pub fn format_pole_list(poles: &[ProjectivePole]) -> String {
    poles.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

/// Test-matrix generator, written `kind:key=value,...`.
///
/// * `triangular:m=50,eigs=1:50` random upper triangular with the given
///   diagonal and standard complex normal strict upper part
/// * `hermitian:m=20,eigs=1:20` unitarily similar to the real diagonal
/// * `random:m=30` dense standard complex normal
///
/// `eigs` is either a range `a:b` (step 1, or `a:step:b`) or a
/// `;`-separated list of complex literals. It defaults to `1:m`.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    Triangular { eigenvalues: Vec<C64> },
    Hermitian { eigenvalues: Vec<f64> },
    Random { m: usize },
}

impl GeneratorSpec {
    pub fn dim(&self) -> usize {
        match self {
            GeneratorSpec::Triangular { eigenvalues } => eigenvalues.len(),
            GeneratorSpec::Hermitian { eigenvalues } => eigenvalues.len(),
            GeneratorSpec::Random { m } => *m,
        }
    }

    /// The exact spectrum, where the generator fixes it.
    pub fn spectrum(&self) -> Option<Vec<C64>> {
        match self {
            GeneratorSpec::Triangular { eigenvalues } => Some(eigenvalues.clone()),
            GeneratorSpec::Hermitian { eigenvalues } => Some(eigenvalues.iter().map(|x| c64(*x, 0.0)).collect()),
            GeneratorSpec::Random { .. } => None,
        }
    }
}

fn parse_eigs(s: &str) -> Result<Vec<C64>> {
    let bad = || Error::Parse(format!("bad eigenvalue spec {s:?}"));
    if s.contains(';') || !s.contains(':') {
        return s.split(';').map(|t| C64::from_str(t.trim()).map_err(|_| bad())).collect();
    }
    let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (a, step, b) = match parts[..] {
        [a, b] => (a, 1.0, b),
        [a, step, b] => (a, step, b),
        _ => return Err(bad()),
    };
    if !(step > 0.0) || b < a {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| c64(a + k as f64 * step, 0.0)).collect())
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut m: Option<usize> = None;
        let mut eigs: Option<Vec<C64>> = None;
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            match key.trim() {
                "m" => m = Some(value.trim().parse().map_err(|_| Error::Parse(format!("bad dimension {value:?}")))?),
                "eigs" => eigs = Some(parse_eigs(value)?),
                other => return Err(Error::Parse(format!("unknown generator key {other:?}"))),
            }
        }
        let eigs = match (eigs, m) {
            (Some(e), Some(m)) if e.len() != m => {
                return Err(Error::Parse(format!("m = {m} but {} eigenvalues given", e.len())));
            }
            (Some(e), _) => e,
            (None, Some(m)) => (1..=m).map(|i| c64(i as f64, 0.0)).collect(),
            (None, None) => return Err(Error::Parse(format!("generator {s:?} needs m or eigs"))),
        };
        if eigs.is_empty() {
            return Err(Error::Parse("generator with an empty spectrum".into()));
        }
        match kind.trim() {
            "triangular" => Ok(GeneratorSpec::Triangular { eigenvalues: eigs }),
            "hermitian" => {
                if eigs.iter().any(|z| z.im != 0.0) {
                    return Err(Error::Parse("hermitian generator needs real eigenvalues".into()));
                }
                Ok(GeneratorSpec::Hermitian { eigenvalues: eigs.iter().map(|z| z.re).collect() })
            }
            "random" => Ok(GeneratorSpec::Random { m: eigs.len() }),
            other => Err(Error::Parse(format!("unknown generator {other:?}"))),
        }
    }
}

impl std::fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let list = |e: &mut dyn Iterator<Item = String>| e.collect::<Vec<_>>().join(";");
        match self {
            GeneratorSpec::Triangular { eigenvalues } => {
                write!(f, "triangular:m={},eigs={}", eigenvalues.len(), list(&mut eigenvalues.iter().map(|z| z.to_string())))
            }
            GeneratorSpec::Hermitian { eigenvalues } => {
                write!(f, "hermitian:m={},eigs={}", eigenvalues.len(), list(&mut eigenvalues.iter().map(|z| z.to_string())))
            }
            GeneratorSpec::Random { m } => write!(f, "random:m={m}"),
        }
    }
}
