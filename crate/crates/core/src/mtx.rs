//! Minimal Matrix Market (`.mtx`) reader and writer for dense and coordinate
//! files with real, integer or complex fields.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LqoError, Result};
use crate::linalg::CMat;
use crate::model::LqoStateSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(ctx: &str, line: usize, msg: impl Into<String>) -> LqoError {
    LqoError::Parse {
        context: format!("{ctx} line {line}"),
        message: msg.into(),
    }
}

/// Parse Matrix Market text into a dense complex matrix.
pub fn parse_mtx(text: &str, ctx: &str) -> Result<CMat> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(ctx, 1, "empty file"))?;
    let head: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if head.len() < 5 || head[0] != "%%matrixmarket" || head[1] != "matrix" {
        return Err(parse_err(ctx, 1, "missing %%MatrixMarket matrix header"));
    }
    let coordinate = match head[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(parse_err(ctx, 1, format!("unknown format {f}"))),
    };
    let field = match head[3].as_str() {
        "real" | "double" | "integer" => Field::Real,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        f => return Err(parse_err(ctx, 1, format!("unsupported field {f}"))),
    };
    let symmetry = match head[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        s => return Err(parse_err(ctx, 1, format!("unsupported symmetry {s}"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_no, size_line) = data.next().ok_or_else(|| parse_err(ctx, 2, "missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ctx, size_no + 1, "bad size entry")))
        .collect::<Result<_>>()?;
    let (nr, nc) = match sizes.as_slice() {
        [r, c, ..] => (*r, *c),
        _ => return Err(parse_err(ctx, size_no + 1, "size line needs rows and columns")),
    };
    let mut m = CMat::zeros(nr, nc);

    let parse_value = |toks: &[&str], line: usize| -> Result<Complex64> {
        let num = |t: &str| t.parse::<f64>().map_err(|_| parse_err(ctx, line, format!("bad number {t}")));
        match field {
            Field::Pattern => Ok(Complex64::new(1.0, 0.0)),
            Field::Real => Ok(Complex64::new(num(toks.first().copied().unwrap_or(""))?, 0.0)),
            Field::Complex => {
                if toks.len() < 2 {
                    return Err(parse_err(ctx, line, "complex entry needs two values"));
                }
                Ok(Complex64::new(num(toks[0])?, num(toks[1])?))
            }
        }
    };
    let mirror = |v: Complex64| match symmetry {
        Symmetry::General => None,
        Symmetry::Symmetric => Some(v),
        Symmetry::SkewSymmetric => Some(-v),
        Symmetry::Hermitian => Some(v.conj()),
    };

    if coordinate {
        let nnz = *sizes.get(2).ok_or_else(|| parse_err(ctx, size_no + 1, "coordinate size line needs nnz"))?;
        let mut seen = 0;
        for (no, line) in data {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 2 {
                return Err(parse_err(ctx, no + 1, "entry needs row and column"));
            }
            let idx = |t: &str| t.parse::<usize>().map_err(|_| parse_err(ctx, no + 1, "bad index"));
            let (i, j) = (idx(toks[0])?, idx(toks[1])?);
            if i == 0 || j == 0 || i > nr || j > nc {
                return Err(parse_err(ctx, no + 1, format!("index ({i},{j}) out of range")));
            }
            let v = parse_value(&toks[2..], no + 1)?;
            m[(i - 1, j - 1)] += v;
            if i != j {
                if let Some(w) = mirror(v) {
                    m[(j - 1, i - 1)] += w;
                }
            }
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(ctx, size_no + 1, format!("expected {nnz} entries, found {seen}")));
        }
    } else {
        // dense column-major; symmetric variants list the lower triangle only
        let mut positions = Vec::with_capacity(nr * nc);
        for j in 0..nc {
            for i in 0..nr {
                if symmetry == Symmetry::General || i >= j {
                    if symmetry == Symmetry::SkewSymmetric && i == j {
                        continue;
                    }
                    positions.push((i, j));
                }
            }
        }
        let mut k = 0;
        for (no, line) in data {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let &(i, j) = positions
                .get(k)
                .ok_or_else(|| parse_err(ctx, no + 1, "too many entries"))?;
            let v = parse_value(&toks, no + 1)?;
            m[(i, j)] = v;
            if i != j {
                if let Some(w) = mirror(v) {
                    m[(j, i)] = w;
                }
            }
            k += 1;
        }
        if k != positions.len() {
            return Err(parse_err(ctx, size_no + 1, format!("expected {} entries, found {k}", positions.len())));
        }
    }
    Ok(m)
}

pub fn read_mtx(path: impl AsRef<Path>) -> Result<CMat> {
    let path = path.as_ref();
    parse_mtx(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// Dense `array` format, `complex` field unless every entry is real.
pub fn format_mtx(m: &CMat) -> String {
    let real = m.iter().all(|v| v.im == 0.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "%%MatrixMarket matrix array {} general",
        if real { "real" } else { "complex" }
    );
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for v in m.iter() {
        if real {
            let _ = writeln!(out, "{:.17e}", v.re);
        } else {
            let _ = writeln!(out, "{:.17e} {:.17e}", v.re, v.im);
        }
    }
    out
}

pub fn write_mtx(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    std::fs::write(path, format_mtx(m))?;
    Ok(())
}

fn as_vector(m: CMat, name: &str) -> Result<crate::linalg::CVec> {
    if m.ncols() == 1 {
        Ok(m.column(0).into_owned())
    } else if m.nrows() == 1 {
        Ok(m.row(0).transpose())
    } else {
        Err(LqoError::Dimension(format!("{name} must be a vector, got {}x{}", m.nrows(), m.ncols())))
    }
}

/// Load `A.mtx`, `b.mtx`, `c.mtx` and optionally `M.mtx` from a directory.
///
/// Multi-input/output benchmarks stored as `B.mtx` / `C.mtx` are accepted in
/// place of `b.mtx` / `c.mtx`; their first input column and first output row
/// are used. A missing output file means no linear output; a missing `M.mtx`
/// means no quadratic output.
pub fn load_model_dir(dir: impl AsRef<Path>) -> Result<LqoStateSpace> {
    let dir = dir.as_ref();
    let a = read_mtx(dir.join("A.mtx"))?;
    let n = a.nrows();
    let b = if dir.join("b.mtx").exists() {
        as_vector(read_mtx(dir.join("b.mtx"))?, "b")?
    } else if dir.join("B.mtx").exists() {
        let big = read_mtx(dir.join("B.mtx"))?;
        if big.nrows() != n {
            return Err(LqoError::Dimension(format!("B has {} rows, A has {n}", big.nrows())));
        }
        big.column(0).into_owned()
    } else {
        return Err(LqoError::Argument(format!("no b.mtx or B.mtx in {}", dir.display())));
    };
    let c = if dir.join("c.mtx").exists() {
        as_vector(read_mtx(dir.join("c.mtx"))?, "c")?
    } else if dir.join("C.mtx").exists() {
        let big = read_mtx(dir.join("C.mtx"))?;
        if big.ncols() != n {
            return Err(LqoError::Dimension(format!("C has {} columns, A has {n}", big.ncols())));
        }
        big.row(0).transpose()
    } else {
        crate::linalg::CVec::zeros(n)
    };
    let m = match dir.join("M.mtx") {
        p if p.exists() => read_mtx(p)?,
        _ => CMat::zeros(n, n),
    };
    LqoStateSpace::new(a, b, c, m)
}
