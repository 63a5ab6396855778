//! Plain-text coefficient and sample files.
//!
//! Coefficients: a header `# basis_x=<tag>, basis_y=<tag>, n=<int>` followed by `n`
//! comma-separated rows. Samples use the header `# grid=chebyshev, n=<int>` with row `i`
//! holding `f(x_j, y_i)` on ascending Chebyshev points. Values are written with `{:e}`,
//! which round-trips every `f64`.
//!
//! Three-dimensional data flattens the first two axes into rows: row `i·n₁ + j` holds
//! `t[[i, j, ..]]`. Complex tensors interleave real and imaginary parts along a row.

use std::io::{BufRead, Write};

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::{BasisTag, CoeffMatrix2D, CoeffTensor3D};
use crate::error::{Error, Result};

fn header_fields(line: &str) -> Result<Vec<(String, String)>> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("expected a `#` header, found `{line}`")))?;
    body.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed header field `{}`", kv.trim())))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn field<'a>(fields: &'a [(String, String)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("header lacks `{key}`")))
}

fn read_rows(
    lines: impl Iterator<Item = std::io::Result<String>>,
    n: usize,
) -> Result<Array2<f64>> {
    read_block(lines, n, n)
}

fn read_block(
    lines: impl Iterator<Item = std::io::Result<String>>,
    nrows: usize,
    n: usize,
) -> Result<Array2<f64>> {
    let mut data = Vec::with_capacity(nrows * n);
    let mut rows = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {rows}: `{}`: {e}", t.trim())))
            })
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(Error::Parse(format!(
                "row {rows} has {} values, expected {n}",
                vals.len()
            )));
        }
        data.extend(vals);
        rows += 1;
    }
    if rows != nrows {
        return Err(Error::Parse(format!("found {rows} rows, expected {nrows}")));
    }
    Ok(Array2::from_shape_vec((nrows, n), data).expect("checked shape"))
}

fn write_rows(w: &mut impl Write, a: &Array2<f64>) -> Result<()> {
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_coeffs(w: &mut impl Write, c: &CoeffMatrix2D) -> Result<()> {
    let (r, k) = c.data.dim();
    if r != k {
        return Err(Error::Shape(format!(
            "coefficient files hold square matrices, got {r}×{k}"
        )));
    }
    writeln!(w, "# basis_x={}, basis_y={}, n={r}", c.basis_x, c.basis_y)?;
    write_rows(w, &c.data)
}

pub fn read_coeffs(r: impl BufRead) -> Result<CoeffMatrix2D> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let f = header_fields(&head)?;
    let bx: BasisTag = field(&f, "basis_x")?.parse()?;
    let by: BasisTag = field(&f, "basis_y")?.parse()?;
    let n: usize = field(&f, "n")?
        .parse()
        .map_err(|e| Error::Parse(format!("n: {e}")))?;
    Ok(CoeffMatrix2D::new(read_rows(lines, n)?, bx, by))
}

pub fn write_grid(w: &mut impl Write, samples: &Array2<f64>) -> Result<()> {
    let (r, k) = samples.dim();
    if r != k {
        return Err(Error::Shape(format!(
            "sample files hold square grids, got {r}×{k}"
        )));
    }
    writeln!(w, "# grid=chebyshev, n={r}")?;
    write_rows(w, samples)
}

pub fn read_grid(r: impl BufRead) -> Result<Array2<f64>> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let f = header_fields(&head)?;
    if field(&f, "grid")? != "chebyshev" {
        return Err(Error::Parse(
            "only `grid=chebyshev` sample files are supported".into(),
        ));
    }
    let n: usize = field(&f, "n")?
        .parse()
        .map_err(|e| Error::Parse(format!("n: {e}")))?;
    read_rows(lines, n)
}

fn parse_usize(f: &[(String, String)], key: &str) -> Result<usize> {
    field(f, key)?
        .parse()
        .map_err(|e| Error::Parse(format!("{key}: {e}")))
}

fn parse_dims(s: &str) -> Result<[usize; 3]> {
    let v: Vec<usize> = s
        .split('x')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("dims `{s}`: {e}")))
        })
        .collect::<Result<_>>()?;
    v.try_into()
        .map_err(|_| Error::Parse(format!("dims `{s}` must have three factors")))
}

fn parse_basis3(s: &str) -> Result<[BasisTag; 3]> {
    let v: Vec<BasisTag> = s
        .split('/')
        .map(|t| t.trim().parse())
        .collect::<Result<_>>()?;
    v.try_into()
        .map_err(|_| Error::Parse(format!("basis `{s}` must name three tags")))
}

fn flatten(t: &Array3<f64>) -> Array2<f64> {
    let (a, b, c) = t.dim();
    t.as_standard_layout()
        .into_owned()
        .into_shape_with_order((a * b, c))
        .expect("contiguous")
}

/// Samples on an `n × n × n` grid; `grid` names it (`chebyshev3`, `cylinder`).
pub fn write_grid3(w: &mut impl Write, grid: &str, samples: &Array3<f64>) -> Result<()> {
    let (a, b, c) = samples.dim();
    if a != b || b != c {
        return Err(Error::Shape(format!(
            "sample files hold cubic grids, got {:?}",
            samples.dim()
        )));
    }
    writeln!(w, "# grid={grid}, n={a}")?;
    write_rows(w, &flatten(samples))
}

pub fn read_grid3(r: impl BufRead, grid: &str) -> Result<Array3<f64>> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let f = header_fields(&head)?;
    let g = field(&f, "grid")?;
    if g != grid {
        return Err(Error::Parse(format!(
            "expected `grid={grid}`, found `grid={g}`"
        )));
    }
    let n = parse_usize(&f, "n")?;
    let flat = read_block(lines, n * n, n)?;
    Ok(flat
        .into_shape_with_order((n, n, n))
        .expect("checked shape"))
}

pub fn write_tensor(w: &mut impl Write, t: &CoeffTensor3D) -> Result<()> {
    let (a, b, c) = t.data.dim();
    let [x, y, z] = t.basis;
    writeln!(w, "# basis={x}/{y}/{z}, dims={a}x{b}x{c}")?;
    write_rows(w, &flatten(&t.data))
}

pub fn read_tensor(r: impl BufRead) -> Result<CoeffTensor3D> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let f = header_fields(&head)?;
    if f.iter().any(|(k, v)| k == "complex" && v == "true") {
        return Err(Error::Parse(
            "complex tensor where a real one was expected".into(),
        ));
    }
    let basis = parse_basis3(field(&f, "basis")?)?;
    let [a, b, c] = parse_dims(field(&f, "dims")?)?;
    let flat = read_block(lines, a * b, c)?;
    Ok(CoeffTensor3D {
        data: flat
            .into_shape_with_order((a, b, c))
            .expect("checked shape"),
        basis,
    })
}

pub fn write_tensor_complex(w: &mut impl Write, t: &CoeffTensor3D<Complex64>) -> Result<()> {
    let (a, b, c) = t.data.dim();
    let [x, y, z] = t.basis;
    writeln!(w, "# basis={x}/{y}/{z}, dims={a}x{b}x{c}, complex=true")?;
    for i in 0..a {
        for j in 0..b {
            let line: Vec<String> = (0..c)
                .flat_map(|k| {
                    let v = t.data[[i, j, k]];
                    [format!("{:e}", v.re), format!("{:e}", v.im)]
                })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
    }
    Ok(())
}

pub fn read_tensor_complex(r: impl BufRead) -> Result<CoeffTensor3D<Complex64>> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let f = header_fields(&head)?;
    if field(&f, "complex")? != "true" {
        return Err(Error::Parse("expected `complex=true`".into()));
    }
    let basis = parse_basis3(field(&f, "basis")?)?;
    let [a, b, c] = parse_dims(field(&f, "dims")?)?;
    let flat = read_block(lines, a * b, 2 * c)?;
    let data = Array3::from_shape_fn((a, b, c), |(i, j, k)| {
        Complex64::new(flat[[i * b + j, 2 * k]], flat[[i * b + j, 2 * k + 1]])
    });
    Ok(CoeffTensor3D { data, basis })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coeff_round_trip_is_bitwise() {
        let a = Array2::from_shape_fn((3, 3), |(i, j)| (1.0 + i as f64) / (3.0 + j as f64) * 1e-7);
        let c = CoeffMatrix2D::new(a, BasisTag::ChebyshevT, BasisTag::UltraC32);
        let mut buf = Vec::new();
        write_coeffs(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# basis_x=chebyshev, basis_y=ultra32, n=3\n"));
        assert_eq!(read_coeffs(&buf[..]).unwrap(), c);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_coeffs(&b""[..]).is_err());
        assert!(read_coeffs(&b"# basis_x=chebyshev, n=1\n1\n"[..]).is_err());
        assert!(
            read_coeffs(&b"# basis_x=chebyshev, basis_y=chebyshev, n=2\n1,2\n3\n"[..]).is_err()
        );
        assert!(read_coeffs(&b"# basis_x=chebyshev, basis_y=chebyshev, n=1\nabc\n"[..]).is_err());
        assert!(read_grid(&b"# grid=uniform, n=1\n1\n"[..]).is_err());
    }

    #[test]
    fn grid_round_trip() {
        let a = Array2::from_shape_fn((2, 2), |(i, j)| i as f64 - 0.1 * j as f64);
        let mut buf = Vec::new();
        write_grid(&mut buf, &a).unwrap();
        assert_eq!(read_grid(&buf[..]).unwrap(), a);
    }

    #[test]
    fn tensor_round_trips_are_bitwise() {
        let t = CoeffTensor3D {
            data: Array3::from_shape_fn((2, 3, 4), |(i, j, k)| {
                (i as f64 + 0.1) / (j as f64 + 0.7) * (k as f64 - 1.3).exp()
            }),
            basis: [
                BasisTag::ChebyshevT,
                BasisTag::LegendreP,
                BasisTag::UltraC32,
            ],
        };
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        assert_eq!(read_tensor(&buf[..]).unwrap(), t);
        assert!(read_tensor_complex(&buf[..]).is_err());

        let z = CoeffTensor3D {
            data: t.data.mapv(|v| Complex64::new(v, -v / 3.0)),
            basis: [
                BasisTag::ChebyshevT,
                BasisTag::FourierComplex,
                BasisTag::ChebyshevT,
            ],
        };
        let mut buf = Vec::new();
        write_tensor_complex(&mut buf, &z).unwrap();
        assert_eq!(read_tensor_complex(&buf[..]).unwrap(), z);
        assert!(read_tensor(&buf[..]).is_err());
    }

    #[test]
    fn grid3_round_trip() {
        let s = Array3::from_shape_fn((3, 3, 3), |(i, j, k)| (i * 9 + j * 3 + k) as f64 / 7.0);
        let mut buf = Vec::new();
        write_grid3(&mut buf, "cylinder", &s).unwrap();
        assert_eq!(read_grid3(&buf[..], "cylinder").unwrap(), s);
        assert!(read_grid3(&buf[..], "chebyshev3").is_err());
        assert!(write_grid3(&mut Vec::new(), "x", &Array3::zeros((2, 2, 3))).is_err());
    }
}
