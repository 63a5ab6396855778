//! Input sniffing and the formats the library does not own (shift lists, edges, FD grids).

use std::fs::File;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use spectral_poisson::basis::{
    read_coeffs, read_grid, read_grid3, read_tensor, CoeffMatrix2D, CoeffTensor3D,
};
use spectral_poisson::poisson_square::EdgeData;
use spectral_poisson::zolotarev_shifts::ShiftSchedule;

use crate::job::CliError;

#[derive(Debug)]
pub enum Rhs {
    Coeffs(CoeffMatrix2D),
    Samples2(Array2<f64>),
    Fd(Array2<f64>),
    Samples3 { grid: String, data: Array3<f64> },
    Tensor(CoeffTensor3D),
}

impl Rhs {
    /// The discretization size the file implies.
    pub fn n(&self) -> usize {
        match self {
            Rhs::Coeffs(c) => c.data.nrows(),
            Rhs::Samples2(s) => s.nrows(),
            Rhs::Fd(f) => f.nrows() + 1,
            Rhs::Samples3 { data, .. } => data.len_of(ndarray::Axis(0)),
            Rhs::Tensor(t) => t.data.len_of(ndarray::Axis(0)),
        }
    }
}

fn header_value<'a>(head: &'a str, key: &str) -> Option<&'a str> {
    head.trim_start_matches('#')
        .split(',')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim())
}

/// Reads `path` and decides from its header what it holds.
pub fn read_rhs(path: &Path, solver: &str) -> Result<Rhs, CliError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::io(path, e))?;
    let head = text.lines().next().unwrap_or("");
    let bad = |e: spectral_poisson::Error| CliError::Usage(format!("{}: {e}", path.display()));
    let bytes = text.as_bytes();
    if header_value(head, "basis_x").is_some() {
        return read_coeffs(bytes).map(Rhs::Coeffs).map_err(bad);
    }
    if header_value(head, "basis").is_some() {
        return read_tensor(bytes).map(Rhs::Tensor).map_err(bad);
    }
    match header_value(head, "grid") {
        Some("chebyshev") => read_grid(bytes).map(Rhs::Samples2).map_err(bad),
        Some("fd") => read_fd(bytes).map(Rhs::Fd),
        Some(g @ ("cylinder" | "chebyshev3")) => Ok(Rhs::Samples3 {
            grid: g.to_string(),
            data: read_grid3(bytes, g).map_err(bad)?,
        }),
        _ => Err(CliError::Usage(format!(
            "{}: unrecognized header `{head}` for {solver}",
            path.display()
        ))),
    }
}

fn parse_row(line: &str, want: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = line
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("{what}: `{line}`: {e}")))?;
    if want != usize::MAX && v.len() != want {
        return Err(CliError::Usage(format!(
            "{what}: {} values, expected {want}",
            v.len()
        )));
    }
    Ok(v)
}

fn data_lines(r: impl BufRead) -> Result<Vec<String>, CliError> {
    r.lines()
        .map(|l| l.map_err(|e| CliError::Usage(e.to_string())))
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .collect()
}

/// `# grid=fd, n=<n>` then `n−1` rows of `n−1` interior values; row `j` is `y_j`.
pub fn read_fd(r: impl BufRead) -> Result<Array2<f64>, CliError> {
    let lines = data_lines(r)?;
    let head = lines
        .first()
        .ok_or_else(|| CliError::Usage("empty fd file".into()))?;
    let n: usize = header_value(head, "n")
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 2)
        .ok_or_else(|| CliError::Usage(format!("fd header `{head}` needs n ≥ 2")))?;
    let m = n - 1;
    if lines.len() != m + 1 {
        return Err(CliError::Usage(format!(
            "fd file has {} rows, expected {m}",
            lines.len() - 1
        )));
    }
    let mut out = Array2::zeros((m, m));
    for (j, l) in lines[1..].iter().enumerate() {
        let row = parse_row(l, m, &format!("fd row {j}"))?;
        out.row_mut(j).assign(&ndarray::Array1::from(row));
    }
    Ok(out)
}

pub fn write_fd(w: &mut dyn Write, n: usize, x: &Array2<f64>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Usage(e.to_string());
    writeln!(w, "# grid=fd, n={n}").map_err(io)?;
    for row in x.rows() {
        let s: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", s.join(",")).map_err(io)?;
    }
    Ok(())
}

/// `# edges=chebyshev, n=<m>` then four rows of Chebyshev coefficients: left, right, bottom, top.
pub fn read_edges(r: impl BufRead) -> Result<EdgeData, CliError> {
    let lines = data_lines(r)?;
    let head = lines
        .first()
        .ok_or_else(|| CliError::Usage("empty edges file".into()))?;
    if header_value(head, "edges") != Some("chebyshev") {
        return Err(CliError::Usage(format!(
            "edges header `{head}` must say edges=chebyshev"
        )));
    }
    let m: usize = header_value(head, "n")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("edges header `{head}` lacks n")))?;
    if lines.len() != 5 {
        return Err(CliError::Usage(format!(
            "edges file needs 4 rows, found {}",
            lines.len() - 1
        )));
    }
    let row = |i: usize, name: &str| parse_row(&lines[i], m, name);
    Ok(EdgeData {
        left: row(1, "left")?,
        right: row(2, "right")?,
        bottom: row(3, "bottom")?,
        top: row(4, "top")?,
    })
}

pub fn write_shifts(w: &mut dyn Write, s: &ShiftSchedule) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Usage(e.to_string());
    writeln!(w, "# J={}", s.len()).map_err(io)?;
    writeln!(w, "j,p,q").map_err(io)?;
    for (j, (p, q)) in s.p.iter().zip(&s.q).enumerate() {
        writeln!(w, "{},{p:e},{q:e}", j + 1).map_err(io)?;
    }
    Ok(())
}
