use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::{Array2, Array3};
use spectral_poisson::basis::{
    cheb_eval_2d, cheb_points, read_coeffs, read_tensor, read_tensor_complex, sample_cheb_2d,
    write_grid, write_grid3,
};
use spectral_poisson::poisson_cylinder::{cylinder_grid, eval_cheb_fourier_cheb};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectral-poisson"));
    c.env_remove("SPECTRAL_POISSON_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_to(p: &Path, f: impl FnOnce(&mut Vec<u8>)) {
    let mut buf = Vec::new();
    f(&mut buf);
    std::fs::write(p, buf).unwrap();
}

// u = (1−x²)(1−y²)
fn square_rhs(dir: &Path, n: usize) -> PathBuf {
    let p = dir.join("f.csv");
    let g = sample_cheb_2d(n, n, |x, y| -2.0 * (2.0 - x * x - y * y));
    write_to(&p, |b| write_grid(b, &g).unwrap());
    p
}

#[test]
fn shifts_prints_one_row_per_iteration() {
    let o = run(&[
        "shifts", "--a", "-1", "--b", "-0.25", "--c", "0.25", "--d", "1", "--eps", "1e-6",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let j: usize = lines
        .next()
        .unwrap()
        .trim_start_matches("# J=")
        .parse()
        .unwrap();
    assert_eq!(lines.next(), Some("j,p,q"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), j);
    for r in rows {
        let v: Vec<f64> = r.split(',').map(|t| t.parse().unwrap()).collect();
        assert!(v[1] <= -0.25 && v[1] >= -1.0 && v[2] >= 0.25 && v[2] <= 1.0);
    }
}

#[test]
fn verify_bounds_passes() {
    let o = run(&["verify-bounds", "--n", "64"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("ok"));
    assert_eq!(code(&run(&["verify-bounds", "--n", "128", "--sweep"])), 0);
}

#[test]
fn validation_errors_exit_one() {
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(
        code(&run(&[
            "shifts", "--a", "1", "--b", "0", "--c", "2", "--d", "3", "--eps", "1e-6"
        ])),
        1
    );
    assert_eq!(
        code(&run(&[
            "shifts", "--a", "-1", "--b", "-0.5", "--c", "0.5", "--d", "1", "--eps", "2"
        ])),
        1
    );
    assert_eq!(
        code(&run(&[
            "solve-square",
            "--eps",
            "1e-6",
            "--rhs",
            "/nonexistent.csv"
        ])),
        1
    );
    assert_eq!(code(&run(&["--help"])), 0);
    let o = bin()
        .env("SPECTRAL_POISSON_THREADS", "lots")
        .args(["verify-bounds", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn solve_square_from_samples() {
    let dir = tempfile::tempdir().unwrap();
    let rhs = square_rhs(dir.path(), 12);
    let (out, rep) = (dir.path().join("u.csv"), dir.path().join("r.json"));
    let o = run(&[
        "solve-square",
        "--n",
        "12",
        "--eps",
        "1e-12",
        "--rhs",
        s(&rhs),
        "--out",
        s(&out),
        "--report",
        s(&rep),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = read_coeffs(
        std::fs::File::open(&out)
            .map(std::io::BufReader::new)
            .unwrap(),
    )
    .unwrap();
    for (x, y) in [(0.2, -0.6), (-0.9, 0.3)] {
        let u = (1.0 - x * x) * (1.0 - y * y);
        assert!((cheb_eval_2d(c.data.view(), x, y) - u).abs() < 1e-11);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    for key in ["solver", "n", "eps", "iterations", "residual", "seconds"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert_eq!(json["solver"], "square");
    assert!(json["residual"].as_f64().unwrap() < 1e-10);
    assert!(json["seconds"]["adi"].as_f64().is_some());

    // a mismatched --n is a validation error
    assert_eq!(
        code(&run(&[
            "solve-square",
            "--n",
            "8",
            "--eps",
            "1e-6",
            "--rhs",
            s(&rhs)
        ])),
        1
    );
}

#[test]
fn outputs_are_rereadable_and_bitwise_stable() {
    let dir = tempfile::tempdir().unwrap();
    let rhs = square_rhs(dir.path(), 10);
    let go = |name: &str, input: &Path| {
        let out = dir.path().join(name);
        let o = run(&[
            "--threads",
            "1",
            "solve-square",
            "--eps",
            "1e-10",
            "--rhs",
            s(input),
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = go("a.csv", &rhs);
    let b = go("b.csv", &rhs);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // the coefficient output is itself a valid --rhs
    let again = go("c.csv", &a);
    assert!(std::fs::metadata(again).unwrap().len() > 0);
}

#[test]
fn rectangle_and_edges() {
    let dir = tempfile::tempdir().unwrap();
    let rhs = square_rhs(dir.path(), 10);
    let out = dir.path().join("u.csv");
    let o = run(&[
        "solve-rect",
        "--eps",
        "1e-10",
        "--rhs",
        s(&rhs),
        "--domain",
        "0,2,-1,3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        code(&run(&[
            "solve-rect",
            "--eps",
            "1e-10",
            "--rhs",
            s(&rhs),
            "--domain",
            "2,0,-1,3"
        ])),
        1
    );

    // u = x + y: harmonic, boundary data only
    let zero = dir.path().join("z.csv");
    write_to(&zero, |b| write_grid(b, &Array2::zeros((6, 6))).unwrap());
    let edges = dir.path().join("g.csv");
    std::fs::write(&edges, "# edges=chebyshev, n=2\n-1,1\n1,1\n-1,1\n1,1\n").unwrap();
    let o = run(&[
        "solve-square",
        "--eps",
        "1e-10",
        "--rhs",
        s(&zero),
        "--edges",
        s(&edges),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = read_coeffs(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert!((cheb_eval_2d(c.data.view(), 0.3, -0.4) - (-0.1)).abs() < 1e-12);

    std::fs::write(&edges, "# edges=chebyshev, n=2\n0,1\n5,1\n-1,1\n1,1\n").unwrap();
    assert_eq!(
        code(&run(&[
            "solve-square",
            "--eps",
            "1e-10",
            "--rhs",
            s(&zero),
            "--edges",
            s(&edges)
        ])),
        1
    );
}

#[test]
fn fd_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let n = 16;
    let h = 2.0 / n as f64;
    let rhs = dir.path().join("f.csv");
    let mut text = format!("# grid=fd, n={n}\n");
    for j in 1..n {
        let row: Vec<String> = (1..n)
            .map(|k| {
                format!(
                    "{:e}",
                    ((-1.0 + k as f64 * h) * 3.0).sin() + (-1.0 + j as f64 * h)
                )
            })
            .collect();
        text += &(row.join(",") + "\n");
    }
    std::fs::write(&rhs, text).unwrap();
    let read = |p: &Path| -> Vec<f64> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .flat_map(|l| {
                l.split(',')
                    .map(|t| t.parse::<f64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(
        code(&run(&[
            "solve-fd",
            "--eps",
            "1e-10",
            "--rhs",
            s(&rhs),
            "--method",
            "adi",
            "--out",
            s(&a)
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "solve-fd",
            "--eps",
            "1e-10",
            "--rhs",
            s(&rhs),
            "--method",
            "dst",
            "--out",
            s(&b)
        ])),
        0
    );
    let (x, y) = (read(&a), read(&b));
    assert_eq!(x.len(), (n - 1) * (n - 1));
    // the finite-difference count only guarantees 4·exp(−Jπ²/log(4n²))
    let j = ((2.0 * n as f64).ln() * (4.0f64 / 1e-10).ln() / std::f64::consts::PI.powi(2)).ceil();
    let sharp = 4.0 * (-j * std::f64::consts::PI.powi(2) / (4.0 * (n * n) as f64).ln()).exp();
    let diff: f64 = x
        .iter()
        .zip(&y)
        .map(|(u, v)| (u - v).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(diff <= sharp * norm, "{diff} {sharp}");
}

#[test]
fn cylinder_and_cube() {
    let dir = tempfile::tempdir().unwrap();
    // u = (1−x²−y²)(1−z²), Δu = −4(1−z²) − 2(1−x²−y²)
    let n = 8;
    let (r, _, z) = cylinder_grid(n);
    let f = Array3::from_shape_fn((n, n, n), |(i, _, l)| {
        -4.0 * (1.0 - z[l] * z[l]) - 2.0 * (1.0 - r[i] * r[i])
    });
    let rhs = dir.path().join("cyl.csv");
    write_to(&rhs, |b| write_grid3(b, "cylinder", &f).unwrap());
    let out = dir.path().join("cyl_u.csv");
    let o = run(&[
        "solve-cylinder",
        "--eps",
        "1e-12",
        "--rhs",
        s(&rhs),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c =
        read_tensor_complex(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    let v = eval_cheb_fourier_cheb(&c, 0.5, 1.0, 0.2);
    assert!((v - 0.75 * 0.96).abs() < 1e-10, "{v}");

    // u = (1−x²)(1−y²)(1−z²)
    let m = 4;
    let p = cheb_points(m);
    let w = |s: f64| 1.0 - s * s;
    let g = Array3::from_shape_fn((m, m, m), |(i, j, k)| {
        let (x, y, z) = (p[i], p[j], p[k]);
        -2.0 * (w(y) * w(z) + w(x) * w(z) + w(x) * w(y))
    });
    let rhs = dir.path().join("cube.csv");
    write_to(&rhs, |b| write_grid3(b, "chebyshev3", &g).unwrap());
    let out = dir.path().join("cube_u.csv");
    let o = run(&[
        "solve-cube",
        "--eps",
        "1e-10",
        "--rhs",
        s(&rhs),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experimental"));
    let c = read_tensor(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(c.data.dim(), (6, 6, 6));
    assert!((c.data[[0, 0, 0]] - (0.5f64).powi(3)).abs() < 1e-10);

    // a cylinder file is not a cube file
    assert_eq!(
        code(&run(&[
            "solve-cube",
            "--eps",
            "1e-6",
            "--rhs",
            s(&dir.path().join("cyl.csv"))
        ])),
        1
    );
}

#[test]
fn bench_csv() {
    let o = run(&[
        "bench", "--solver", "fd", "--nmin", "16", "--nmax", "64", "--eps", "1e-6",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,adi_seconds,transform_seconds,iterations,residual"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("64,"));
}
