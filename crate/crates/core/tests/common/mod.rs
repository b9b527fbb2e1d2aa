//! Reference computations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Smallest positive root of `tan μ = μ`, by bisection of `sin μ − μ cos μ` on `(π, 3π/2)`.
pub fn tan_root() -> f64 {
    let g = |m: f64| m.sin() - m * m.cos();
    let (mut lo, mut hi) = (PI + 1e-9, 1.5 * PI - 1e-9);
    assert!(g(lo) * g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Section constants computed longhand from radii, moduli and stacking.
pub struct SectionOracle {
    pub y_na: f64,
    pub dy_na: f64,
    pub dy_wire: f64,
    pub ei: f64,
}

pub fn section_oracle(r_f: f64, r_w: f64, n: f64, e_f: f64, e_w: f64) -> SectionOracle {
    let a_f = PI * r_f * r_f;
    let a_w = PI * r_w * r_w;
    let y_fiber = r_w + r_f;
    let y_na = e_f * a_f * y_fiber / (e_f * a_f + n * e_w * a_w);
    let dy_na = y_fiber - y_na;
    let dy_wire = -y_na;
    let i_f = a_f * (r_f * r_f / 4.0 + dy_na * dy_na);
    let i_w = n * a_w * (r_w * r_w / 4.0 + dy_wire * dy_wire);
    SectionOracle { y_na, dy_na, dy_wire, ei: e_f * i_f + e_w * i_w }
}

/// Normalized elastica solved as a whole-interval boundary value problem.
///
/// Unknowns are `θ₁..θ_N` on a uniform grid over `[0, T]` plus `λ = T²`.
/// Equations: Numerov at every interior node, Numerov at `t = T` with a
/// mirror ghost node (`θ'(T) = 0`), and Simpson's rule for `∫ sin θ = 0`.
/// The Jacobian is tridiagonal bordered by one dense row and column, solved
/// by two pivoted tridiagonal solves per Newton step.
pub struct Collocation {
    pub kappa: f64,
    pub t_end: f64,
    /// `θ(t_i)`, `i = 0..=N`.
    pub theta: Vec<f64>,
}

impl Collocation {
    pub fn theta_at(&self, t: f64) -> f64 {
        // cubic Lagrange through the four nearest nodes
        let n = self.theta.len() - 1;
        let h = self.t_end / n as f64;
        let x = t / h;
        let i = (x.floor() as isize - 1).clamp(0, n as isize - 3) as usize;
        let mut acc = 0.0;
        for j in i..i + 4 {
            let mut w = 1.0;
            for k in i..i + 4 {
                if k != j {
                    w *= (x - k as f64) / (j as f64 - k as f64);
                }
            }
            acc += w * self.theta[j];
        }
        acc
    }
}

fn f(kappa: f64, th: f64) -> f64 {
    -(kappa * th.sin() + th.cos())
}

fn df(kappa: f64, th: f64) -> f64 {
    -(kappa * th.cos() - th.sin())
}

/// Residuals `F₁..F_N` and `G`.
fn residual(kappa: f64, th: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let n = th.len() - 1;
    let c = lambda / (12.0 * (n * n) as f64);
    let mut r = vec![0.0; n];
    for i in 1..=n {
        let prev = th[i - 1];
        let next = if i == n { th[n - 1] } else { th[i + 1] };
        r[i - 1] = next - 2.0 * th[i] + prev - c * (f(kappa, next) + 10.0 * f(kappa, th[i]) + f(kappa, prev));
    }
    (r, simpson_sin(th))
}

fn simpson_sin(th: &[f64]) -> f64 {
    let n = th.len() - 1;
    let mut acc = th[0].sin() + th[n].sin();
    for (i, t) in th.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * t.sin();
    }
    acc / 3.0
}

/// Solves `A x = d` for tridiagonal `A` (`a[i] = A[i][i-1]`, `b` main,
/// `c[i] = A[i][i+1]`) by Gaussian elimination with partial pivoting.
///
/// The Numerov matrix is indefinite here, so unpivoted elimination can meet
/// near-zero pivots.
fn tridiag_solve(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let (mut a, mut b, mut c, mut d) = (a.to_vec(), b.to_vec(), c.to_vec(), d.to_vec());
    let mut du2 = vec![0.0; n];
    for i in 0..n - 1 {
        if b[i].abs() >= a[i + 1].abs() {
            let m = a[i + 1] / b[i];
            b[i + 1] -= m * c[i];
            d[i + 1] -= m * d[i];
        } else {
            let m = b[i] / a[i + 1];
            b[i] = a[i + 1];
            let t = b[i + 1];
            b[i + 1] = c[i] - m * t;
            if i + 2 < n {
                du2[i] = c[i + 1];
                c[i + 1] *= -m;
            }
            c[i] = t;
            let t = d[i];
            d[i] = d[i + 1];
            d[i + 1] = t - m * d[i + 1];
        }
        a[i + 1] = 0.0;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = d[i];
        if i + 1 < n {
            v -= c[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= du2[i] * x[i + 2];
        }
        x[i] = v / b[i];
    }
    x
}

/// Undamped Newton; returns the size of the last correction.
///
/// The Numerov rows are scaled by `h²`, so their max-norm is a poor merit
/// function for a line search; continuation keeps each start close enough
/// for full steps instead.
fn newton(kappa: f64, th: &mut [f64], lambda: &mut f64) -> f64 {
    let n = th.len() - 1;
    let mut last = f64::INFINITY;
    for _ in 0..50 {
        let (r, g) = residual(kappa, th, *lambda);
        let c = *lambda / (12.0 * (n * n) as f64);
        let dc = 1.0 / (12.0 * (n * n) as f64);
        // row i-1 ↔ node i; unknown j-1 ↔ θ_j
        let (mut sub, mut diag, mut sup, mut col) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 1..=n {
            let prev = th[i - 1];
            let next = if i == n { th[n - 1] } else { th[i + 1] };
            diag[i - 1] = -2.0 - 10.0 * c * df(kappa, th[i]);
            if i > 1 {
                sub[i - 1] = 1.0 - c * df(kappa, prev);
            }
            if i < n {
                sup[i - 1] = 1.0 - c * df(kappa, next);
            } else {
                sub[i - 1] = 2.0 - 2.0 * c * df(kappa, next);
            }
            col[i - 1] = -dc * (f(kappa, next) + 10.0 * f(kappa, th[i]) + f(kappa, prev));
        }
        let row: Vec<f64> = (1..=n)
            .map(|j| {
                let w = if j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                w * th[j].cos() / 3.0
            })
            .collect();
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let z1 = tridiag_solve(&sub, &diag, &sup, &neg_r);
        let z2 = tridiag_solve(&sub, &diag, &sup, &col);
        let dot = |u: &[f64]| u.iter().zip(&row).map(|(a, b)| a * b).sum::<f64>();
        let dl = (-g - dot(&z1)) / (0.0 - dot(&z2));
        let mut size = (dl / *lambda).abs();
        for (t, (a, b)) in th[1..].iter_mut().zip(z1.iter().zip(&z2)) {
            let d = a - dl * b;
            size = size.max(d.abs());
            *t += d;
        }
        *lambda += dl;
        if !size.is_finite() {
            return f64::INFINITY;
        }
        if size < 1e-15 || (size < 1e-12 && size >= last) {
            return size;
        }
        last = size;
    }
    last
}

/// Solves at each `κ` in `targets` by continuation from `κ = 1000`,
/// starting from the linearized solution `θ = (μ sin kt + cos kt − 1)/κ`.
pub fn collocation(targets: &[f64], nodes: usize) -> Vec<Collocation> {
    assert!(nodes.is_multiple_of(2));
    let mu = tan_root();
    let k0 = 1000.0f64;
    let t0 = mu / k0.sqrt();
    let mut th: Vec<f64> = (0..=nodes)
        .map(|i| {
            let t = t0 * i as f64 / nodes as f64;
            (mu * (k0.sqrt() * t).sin() + (k0.sqrt() * t).cos() - 1.0) / k0
        })
        .collect();
    let mut lambda = t0 * t0;
    let mut kappa = k0;
    let mut out = Vec::new();
    let mut sorted = targets.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    for target in sorted {
        while kappa > target {
            kappa = (kappa * 0.9).max(target);
            let res = newton(kappa, &mut th, &mut lambda);
            assert!(res < 1e-12, "collocation stalled at kappa = {kappa}: last correction {res}");
        }
        out.push(Collocation { kappa, t_end: lambda.sqrt(), theta: th.clone() });
    }
    out
}

/// One row of a reference RMSE/IQR summary (kPa).
#[derive(Debug, Clone)]
pub struct TableRow {
    pub sample: String,
    pub estimated: f64,
    pub actual: f64,
    pub rmse: f64,
    pub iqr: f64,
}

pub fn load_table(name: &str) -> Vec<TableRow> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let num = |i: usize| r[i].parse::<f64>().unwrap();
            TableRow { sample: r[0].to_string(), estimated: num(1), actual: num(2), rmse: num(3), iqr: num(4) }
        })
        .collect()
}

/// Five per-trial values whose RMSE against `actual` and interquartile range
/// equal the given row: `c−b, c−b, c, c+b, c+b` with `b = IQR/2`.
pub fn synthetic_trials(row: &TableRow) -> Vec<f64> {
    let b = row.iqr / 2.0;
    let offset = (row.rmse * row.rmse - 0.8 * b * b).sqrt();
    assert!(offset.is_finite(), "row {} cannot be matched by this construction", row.sample);
    let c = row.actual + offset;
    vec![c - b, c - b, c, c + b, c + b]
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
