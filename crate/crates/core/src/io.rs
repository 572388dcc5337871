//! File formats: Matrix Market, permutations, fill patterns, pole lists.
//!
//! Indices in files are 1-based.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::factorization::LdltFactors;
use crate::ordering::Permutation;
use crate::pexsi::{Pole, PoleExpansion};
use crate::scalar::{Real, Scalar};
use crate::sparse::SymmetricMatrix;
use crate::symbolic::FillPattern;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field_name<S: Scalar>() -> &'static str {
    if S::is_complex() {
        "complex"
    } else {
        "real"
    }
}

fn write_value<S: Scalar>(w: &mut impl Write, v: S) -> Result<()> {
    if S::is_complex() {
        write!(w, "{:e} {:e}", v.re().as_f64(), v.im().as_f64())?;
    } else {
        write!(w, "{:e}", v.re().as_f64())?;
    }
    Ok(())
}

/// Writes the lower triangle of `a` as a symmetric coordinate Matrix Market file.
pub fn write_matrix_market<S: Scalar>(mut w: impl Write, a: &SymmetricMatrix<S>) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate {} symmetric", field_name::<S>())?;
    writeln!(w, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for (i, j, v) in a.iter() {
        write!(w, "{} {} ", i + 1, j + 1)?;
        write_value(&mut w, v)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a square coordinate Matrix Market file.
///
/// Accepts `real`, `integer`, `complex` and `pattern` fields (pattern entries
/// read as one) with `symmetric` or `general` symmetry; a general file must
/// describe a symmetric matrix.
pub fn read_matrix_market(r: impl BufRead) -> Result<SymmetricMatrix<C>> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let words: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" || words[2] != "coordinate" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    let field = words[3].as_str();
    if !matches!(field, "real" | "integer" | "complex" | "pattern") {
        return Err(parse_err(1, format!("unsupported field '{field}'")));
    }
    if !matches!(words[4].as_str(), "symmetric" | "general") {
        return Err(parse_err(1, format!("unsupported symmetry '{}'", words[4])));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut entries = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let num = |k: usize| -> Result<f64> {
            toks.get(k)
                .ok_or_else(|| parse_err(lineno, "missing field"))?
                .parse::<f64>()
                .map_err(|e| parse_err(lineno, e.to_string()))
        };
        let index = |k: usize| -> Result<usize> {
            toks.get(k)
                .ok_or_else(|| parse_err(lineno, "missing index"))?
                .parse::<usize>()
                .map_err(|e| parse_err(lineno, e.to_string()))
        };
        match size {
            None => {
                let (rows, cols, nnz) = (index(0)?, index(1)?, index(2)?);
                if rows != cols {
                    return Err(parse_err(lineno, format!("matrix is {rows}x{cols}, not square")));
                }
                size = Some((rows, nnz));
                entries.reserve(nnz);
            }
            Some((n, _)) => {
                let (i, j) = (index(0)?, index(1)?);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) out of range")));
                }
                let v = match field {
                    "pattern" => C::new(1.0, 0.0),
                    "complex" => C::new(num(2)?, num(3)?),
                    _ => C::new(num(2)?, 0.0),
                };
                entries.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(parse_err(0, format!("expected {nnz} entries, found {}", entries.len())));
    }
    SymmetricMatrix::from_triplets(n, &entries)
}

/// Writes `L` (unit diagonal included) as a general lower-triangular
/// Matrix Market file.
pub fn write_factor_l<S: Scalar>(mut w: impl Write, f: &LdltFactors<S>) -> Result<()> {
    let n = f.n();
    let p = f.pattern();
    writeln!(w, "%%MatrixMarket matrix coordinate {} general", field_name::<S>())?;
    writeln!(w, "{} {} {}", n, n, n + f.nnz_l())?;
    for j in 0..n {
        write!(w, "{} {} ", j + 1, j + 1)?;
        write_value(&mut w, S::one())?;
        writeln!(w)?;
        for q in p.col_range(j) {
            write!(w, "{} {} ", p.row_indices()[q] + 1, j + 1)?;
            write_value(&mut w, f.l_values()[q])?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Writes `D` as an `n x 1` dense Matrix Market array.
pub fn write_factor_d<S: Scalar>(mut w: impl Write, f: &LdltFactors<S>) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array {} general", field_name::<S>())?;
    writeln!(w, "{} 1", f.n())?;
    for &d in f.d() {
        write_value(&mut w, d)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Writes a permutation, one line per vertex: the new position of vertex `i`
/// on line `i`.
pub fn write_permutation(mut w: impl Write, p: &Permutation) -> Result<()> {
    writeln!(w, "% new position of each vertex, 1-based")?;
    for &k in p.forward() {
        writeln!(w, "{}", k + 1)?;
    }
    Ok(())
}

pub fn read_permutation(r: impl BufRead) -> Result<Permutation> {
    let mut forward = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let k: usize = t.parse().map_err(|e: std::num::ParseIntError| parse_err(idx + 1, e.to_string()))?;
        if k == 0 {
            return Err(parse_err(idx + 1, "positions are 1-based"));
        }
        forward.push(k - 1);
    }
    Permutation::from_forward(forward)
}

/// Writes a fill pattern as CSV `row,col,level` (strict lower triangle).
pub fn write_pattern_csv(mut w: impl Write, p: &FillPattern) -> Result<()> {
    writeln!(w, "row,col,level")?;
    for (i, j, l) in p.iter() {
        writeln!(w, "{},{},{}", i + 1, j + 1, l)?;
    }
    Ok(())
}

/// Reads poles from CSV with header `re_w,im_w,re_z,im_z`.
pub fn read_poles_csv(r: impl BufRead) -> Result<PoleExpansion> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty pole file"))?;
    let header = header?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["re_w", "im_w", "re_z", "im_z"] {
        return Err(parse_err(1, "expected header 're_w,im_w,re_z,im_z'"));
    }
    let mut poles = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| parse_err(idx + 1, e.to_string())))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(parse_err(idx + 1, format!("expected 4 fields, found {}", v.len())));
        }
        poles.push(Pole { weight: C::new(v[0], v[1]), z: C::new(v[2], v[3]) });
    }
    PoleExpansion::new(poles)
}

pub fn write_poles_csv(mut w: impl Write, p: &PoleExpansion) -> Result<()> {
    writeln!(w, "re_w,im_w,re_z,im_z")?;
    for pole in p.poles() {
        writeln!(w, "{:e},{:e},{:e},{:e}", pole.weight.re, pole.weight.im, pole.z.re, pole.z.im)?;
    }
    Ok(())
}
