//! Dense Matrix Market I/O: `coordinate` and `array` formats with `real`,
//! `integer` or `complex` fields and `general`, `symmetric`, `hermitian` or
//! `skew-symmetric` symmetry. Reading always produces a dense matrix.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dense::{c64, ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse(format!("Matrix Market line {line}: {}", msg.into()))
}

pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(bad(1, format!("unsupported header {header:?}")));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(bad(1, format!("unsupported format {f:?}"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        f => return Err(bad(1, format!("unsupported field {f:?}"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        s => return Err(bad(1, format!("unsupported symmetry {s:?}"))),
    };
    let mut data = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_line, size) = data.next().ok_or_else(|| bad(1, "missing size line"))?;
    let dims: Vec<usize> =
        size.split_whitespace().map(|t| t.parse().map_err(|_| bad(size_line, format!("bad size {t:?}")))).collect::<Result<_>>()?;
    let (rows, cols) = match (coordinate, dims.as_slice()) {
        (true, [r, c, _]) | (false, [r, c]) => (*r, *c),
        _ => return Err(bad(size_line, "wrong number of size fields")),
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err(bad(size_line, "symmetric storage needs a square matrix"));
    }
    let parse_value = |line: usize, toks: &[&str]| -> Result<C64> {
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad(line, format!("bad number {t:?}")));
        match (field, toks) {
            (Field::Real, [x]) => Ok(c64(num(x)?, 0.0)),
            (Field::Complex, [x, y]) => Ok(c64(num(x)?, num(y)?)),
            _ => Err(bad(line, "wrong number of value fields")),
        }
    };
    let mut m = ComplexMatrix::zeros(rows, cols);
    let mut set = |i: usize, j: usize, z: C64| {
        m[(i, j)] = z;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = z,
                Symmetry::Hermitian => m[(j, i)] = z.conj(),
                Symmetry::Skew => m[(j, i)] = -z,
            }
        }
    };
    if coordinate {
        let nnz = dims[2];
        let mut seen = 0;
        for (line, l) in data {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() < 2 {
                return Err(bad(line, "short entry"));
            }
            let idx = |t: &str, lim: usize| -> Result<usize> {
                let k: usize = t.parse().map_err(|_| bad(line, format!("bad index {t:?}")))?;
                if k == 0 || k > lim {
                    return Err(bad(line, format!("index {k} out of range 1..={lim}")));
                }
                Ok(k - 1)
            };
            let (i, j) = (idx(toks[0], rows)?, idx(toks[1], cols)?);
            set(i, j, parse_value(line, &toks[2..])?);
            seen += 1;
        }
        if seen != nnz {
            return Err(bad(size_line, format!("expected {nnz} entries, found {seen}")));
        }
    } else {
        // Column-major; symmetric variants list the lower triangle only.
        let positions: Vec<(usize, usize)> = (0..cols)
            .flat_map(|j| {
                let start = if symmetry == Symmetry::General {
                    0
                } else if symmetry == Symmetry::Skew {
                    j + 1
                } else {
                    j
                };
                (start..rows).map(move |i| (i, j))
            })
            .collect();
        let mut k = 0;
        for (line, l) in data {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let &(i, j) = positions.get(k).ok_or_else(|| bad(line, "too many entries"))?;
            set(i, j, parse_value(line, &toks)?);
            k += 1;
        }
        if k != positions.len() {
            return Err(bad(size_line, format!("expected {} entries, found {k}", positions.len())));
        }
    }
    Ok(m)
}

pub fn read_matrix_market(path: &Path) -> Result<ComplexMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// `array complex general`, full precision.
pub fn format_matrix_market(m: &ComplexMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array complex general\n");
    out.push_str(&format!("{} {}\n", m.nrows(), m.ncols()));
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            out.push_str(&format!("{:e} {:e}\n", z.re, z.im));
        }
    }
    out
}

pub fn write_matrix_market(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_matrix_market(m).as_bytes())?;
    Ok(())
}
