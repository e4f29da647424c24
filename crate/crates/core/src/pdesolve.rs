//! Finite-difference solvers for `a u_xx + b u_yy = -f` on the grid.
//!
//! Unknowns live at the cell centers. The elliptic scheme treats the outer
//! ring of centers as the Dirichlet boundary; the hyperbolic scheme marches
//! from the left column; the parabolic case reduces to two axis integrals.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::calculus::{axis_integral, Axis};
use crate::error::{Result, VltError};
use crate::fields::{Grid, ScalarField};

/// Coefficients with magnitude at or below this are treated as zero.
pub const COEF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
    /// Both coefficients vanish; there is no equation to solve.
    Degenerate,
}

impl PdeKind {
    pub fn classify(a: f64, b: f64) -> PdeKind {
        let za = a.abs() <= COEF_TOL;
        let zb = b.abs() <= COEF_TOL;
        match (za, zb) {
            (true, true) => PdeKind::Degenerate,
            (true, false) | (false, true) => PdeKind::Parabolic,
            _ if a * b > 0.0 => PdeKind::Elliptic,
            _ => PdeKind::Hyperbolic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PdeKind::Elliptic => "elliptic",
            PdeKind::Parabolic => "parabolic",
            PdeKind::Hyperbolic => "hyperbolic",
            PdeKind::Degenerate => "degenerate",
        }
    }
}

/// `a u_xx + b u_yy = -source`, with optional boundary or initial data.
///
/// Absent data means homogeneous data. `dirichlet` supplies the values on the
/// outer ring of the grid (interior samples are ignored). `initial_g` and
/// `initial_gx` are the value and x-derivative on the first column, indexed
/// by row.
#[derive(Debug, Clone)]
pub struct SecondOrderProblem {
    pub a: f64,
    pub b: f64,
    pub source: ScalarField,
    pub dirichlet: Option<ScalarField>,
    pub initial_g: Option<Vec<f64>>,
    pub initial_gx: Option<Vec<f64>>,
}

impl SecondOrderProblem {
    pub fn homogeneous(a: f64, b: f64, source: ScalarField) -> Self {
        SecondOrderProblem {
            a,
            b,
            source,
            dirichlet: None,
            initial_g: None,
            initial_gx: None,
        }
    }

    pub fn kind(&self) -> PdeKind {
        PdeKind::classify(self.a, self.b)
    }

    fn expect(&self, want: PdeKind) -> Result<()> {
        let got = self.kind();
        if got == want {
            Ok(())
        } else {
            Err(VltError::Classification {
                expected: want.name(),
                actual: got.name(),
                a: self.a,
                b: self.b,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EllipticBackend {
    /// Exact solve in the discrete sine basis, which diagonalizes the
    /// constant-coefficient five-point operator with Dirichlet data.
    #[default]
    SineTransform,
    /// Matrix-free conjugate gradients.
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub elliptic: EllipticBackend,
    /// Refinement factor in x for the hyperbolic march.
    pub refine: usize,
    /// Relative 2-norm tolerance of conjugate gradients.
    pub cg_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            elliptic: EllipticBackend::default(),
            refine: 4,
            cg_tol: 1e-11,
        }
    }
}

/// Accepted residual `||A U - F||_inf / ||F||_inf`.
pub const RESIDUAL_BOUND: f64 = 1e-8;

/// Dispatches on the equation type.
pub fn solve(p: &SecondOrderProblem, opts: &SolverOptions) -> Result<ScalarField> {
    match p.kind() {
        PdeKind::Elliptic => solve_elliptic_with(p, opts),
        PdeKind::Parabolic => solve_parabolic(p),
        PdeKind::Hyperbolic => solve_hyperbolic(p, opts.refine),
        PdeKind::Degenerate => Err(VltError::Classification {
            expected: "elliptic, parabolic or hyperbolic",
            actual: PdeKind::Degenerate.name(),
            a: p.a,
            b: p.b,
        }),
    }
}

pub fn solve_elliptic(p: &SecondOrderProblem) -> Result<ScalarField> {
    solve_elliptic_with(p, &SolverOptions::default())
}

/// Five-point operator `2(a+b) U - a U_{i+-1} - b U_{j+-1}` on the
/// `m x m` interior, zero outside.
fn apply_operator(a: f64, b: f64, m: usize, u: &[f64], out: &mut [f64]) {
    let diag = 2.0 * (a + b);
    out.par_chunks_mut(m).enumerate().for_each(|(j, row)| {
        let cur = &u[j * m..(j + 1) * m];
        let below = (j > 0).then(|| &u[(j - 1) * m..j * m]);
        let above = (j + 1 < m).then(|| &u[(j + 1) * m..(j + 2) * m]);
        for i in 0..m {
            let mut v = diag * cur[i];
            if i > 0 {
                v -= a * cur[i - 1];
            }
            if i + 1 < m {
                v -= a * cur[i + 1];
            }
            if let Some(r) = below {
                v -= b * r[i];
            }
            if let Some(r) = above {
                v -= b * r[i];
            }
            row[i] = v;
        }
    });
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.par_iter().zip(y).map(|(a, b)| a * b).sum()
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn conjugate_gradient(a: f64, b: f64, m: usize, rhs: &[f64], tol: f64, cap: usize) -> Result<Vec<f64>> {
    let len = rhs.len();
    let mut x = vec![0.0; len];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; len];
    let target = tol * dot(rhs, rhs).sqrt();
    let mut rr = dot(&r, &r);
    let mut it = 0;
    while rr.sqrt() > target {
        if it == cap {
            return Err(VltError::SolverDiverged {
                iterations: it,
                residual: rr.sqrt() / dot(rhs, rhs).sqrt(),
            });
        }
        apply_operator(a, b, m, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(xv, pv)| *xv += alpha * pv);
        r.par_iter_mut().zip(&ap).for_each(|(rv, av)| *rv -= alpha * av);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        p.par_iter_mut().zip(&r).for_each(|(pv, rv)| *pv = rv + beta * *pv);
        rr = rr_new;
        it += 1;
    }
    Ok(x)
}

/// Orthonormal sine basis `sqrt(2/(m+1)) sin(pi k l / (m+1))`, and the
/// eigenvalues `2 - 2 cos(pi k / (m+1))` of `tridiag(-1, 2, -1)`.
fn sine_basis(m: usize) -> (DMatrix<f64>, Vec<f64>) {
    let w = std::f64::consts::PI / (m + 1) as f64;
    let c = (2.0 / (m + 1) as f64).sqrt();
    let s = DMatrix::from_fn(m, m, |k, l| c * (w * ((k + 1) * (l + 1)) as f64).sin());
    let lam = (1..=m).map(|k| 2.0 - 2.0 * (w * k as f64).cos()).collect();
    (s, lam)
}

fn sine_solve(a: f64, b: f64, m: usize, rhs: &[f64]) -> Vec<f64> {
    let (s, lam) = sine_basis(m);
    // Row j of F is y-index j; column i is x-index i.
    let f = DMatrix::from_fn(m, m, |j, i| rhs[j * m + i]);
    let mut hat = &s * f * &s;
    for j in 0..m {
        for i in 0..m {
            hat[(j, i)] /= a * lam[i] + b * lam[j];
        }
    }
    let u = &s * hat * &s;
    let mut out = vec![0.0; m * m];
    for j in 0..m {
        for i in 0..m {
            out[j * m + i] = u[(j, i)];
        }
    }
    out
}

pub fn solve_elliptic_with(p: &SecondOrderProblem, opts: &SolverOptions) -> Result<ScalarField> {
    p.expect(PdeKind::Elliptic)?;
    let grid = p.source.grid();
    let n = grid.n();
    if n < 3 {
        return Err(VltError::InvalidGrid(format!("elliptic solve needs n >= 3, got {n}")));
    }
    if let Some(d) = &p.dirichlet {
        p.source.ensure_same_grid(d)?;
    }
    // Both coefficients negative: the same equation with flipped signs.
    let sign = if p.a > 0.0 { 1.0 } else { -1.0 };
    let (a, b) = (sign * p.a, sign * p.b);
    let h2 = grid.h() * grid.h();
    let m = n - 2;

    let boundary = |i: usize, j: usize| p.dirichlet.as_ref().map_or(0.0, |d| d.get(i, j));
    // Boundary-lifted right side h^2 f plus known neighbor values.
    let mut rhs = vec![0.0; m * m];
    for jj in 0..m {
        for ii in 0..m {
            let (i, j) = (ii + 1, jj + 1);
            let mut v = sign * h2 * p.source.get(i, j);
            if ii == 0 {
                v += a * boundary(0, j);
            }
            if ii + 1 == m {
                v += a * boundary(n - 1, j);
            }
            if jj == 0 {
                v += b * boundary(i, 0);
            }
            if jj + 1 == m {
                v += b * boundary(i, n - 1);
            }
            rhs[jj * m + ii] = v;
        }
    }

    let mut full = vec![0.0; grid.len()];
    for j in 0..n {
        for i in 0..n {
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                full[j * n + i] = boundary(i, j);
            }
        }
    }
    let f_norm = inf_norm(&rhs);
    if f_norm == 0.0 {
        return Ok(ScalarField::from_raw(grid, full));
    }

    let u = match opts.elliptic {
        EllipticBackend::SineTransform => sine_solve(a, b, m, &rhs),
        EllipticBackend::ConjugateGradient => conjugate_gradient(a, b, m, &rhs, opts.cg_tol, 20 * m)?,
    };
    let mut au = vec![0.0; m * m];
    apply_operator(a, b, m, &u, &mut au);
    let res = au.iter().zip(&rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / f_norm;
    if res > RESIDUAL_BOUND {
        return Err(VltError::SolverDiverged {
            iterations: 0,
            residual: res,
        });
    }
    for jj in 0..m {
        full[(jj + 1) * n + 1..(jj + 1) * n + 1 + m].copy_from_slice(&u[jj * m..(jj + 1) * m]);
    }
    Ok(ScalarField::from_raw(grid, full))
}

/// `u = -X_e X_e (f / c)` along the axis of the nonzero coefficient `c`.
pub fn solve_parabolic(p: &SecondOrderProblem) -> Result<ScalarField> {
    p.expect(PdeKind::Parabolic)?;
    let (axis, coef) = if p.b.abs() <= COEF_TOL {
        (Axis::PosX, p.a)
    } else {
        (Axis::PosY, p.b)
    };
    let scaled = p.source.scale(-1.0 / coef);
    Ok(axis_integral(&axis_integral(&scaled, axis), axis))
}

fn transpose(f: &ScalarField) -> ScalarField {
    let n = f.n();
    let mut out = vec![0.0; f.grid().len()];
    for j in 0..n {
        for i in 0..n {
            out[i * n + j] = f.get(i, j);
        }
    }
    ScalarField::from_raw(f.grid(), out)
}

pub fn solve_hyperbolic(p: &SecondOrderProblem, refine: usize) -> Result<ScalarField> {
    p.expect(PdeKind::Hyperbolic)?;
    if refine == 0 {
        return Err(VltError::Argument("refinement factor must be positive".into()));
    }
    if p.a > 0.0 {
        return march(p.a, -p.b, &p.source, p.initial_g.as_deref(), p.initial_gx.as_deref(), refine);
    }
    // a < 0 < b: march along y instead, on the transposed problem.
    let src = transpose(&p.source);
    let u = march(p.b, -p.a, &src, p.initial_g.as_deref(), p.initial_gx.as_deref(), refine)?;
    Ok(transpose(&u))
}

/// Explicit leapfrog march in x for `a u_xx - bt u_yy = -f`, `a, bt > 0`.
fn march(a: f64, bt: f64, f: &ScalarField, g: Option<&[f64]>, gx: Option<&[f64]>, refine: usize) -> Result<ScalarField> {
    let grid: Grid = f.grid();
    let n = grid.n();
    for data in [g, gx].into_iter().flatten() {
        if data.len() != n {
            return Err(VltError::Argument(format!(
                "initial data has {} samples, expected {n}",
                data.len()
            )));
        }
    }
    let h = grid.h();
    let hx = h / refine as f64;
    let lam = (bt / a) * (hx * hx) / (h * h);
    let courant = lam.sqrt();
    if courant > 1.0 + 1e-12 {
        return Err(VltError::Cfl {
            courant,
            required_refine: (bt / a).sqrt().ceil() as usize,
        });
    }
    let fine_cols = refine * (n - 1) + 1;
    let coef = hx * hx / a;
    // Source column at fine node k, linearly interpolated between coarse columns.
    let source_col = |k: usize, out: &mut [f64]| {
        let (c, r) = (k / refine, k % refine);
        let t = r as f64 / refine as f64;
        for (j, o) in out.iter_mut().enumerate().take(n) {
            let lo = f.get(c, j);
            *o = if r == 0 { lo } else { (1.0 - t) * lo + t * f.get(c + 1, j) };
        }
    };

    let mut result = vec![0.0; grid.len()];
    let mut prev: Vec<f64> = g.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut cur: Vec<f64> = match gx {
        Some(d) => prev.iter().zip(d).map(|(u, v)| u + hx * v).collect(),
        None => prev.clone(),
    };
    let store = |k: usize, col: &[f64], result: &mut Vec<f64>| {
        if k.is_multiple_of(refine) {
            let i = k / refine;
            for j in 0..n {
                result[j * n + i] = col[j];
            }
        }
    };
    store(0, &prev, &mut result);
    if fine_cols > 1 {
        store(1, &cur, &mut result);
    }
    let mut src = vec![0.0; n];
    let mut next = vec![0.0; n];
    for k in 1..fine_cols - 1 {
        source_col(k, &mut src);
        next[0] = cur[0];
        next[n - 1] = cur[n - 1];
        for j in 1..n - 1 {
            next[j] = 2.0 * cur[j] - prev[j] + lam * (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) - coef * src[j];
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        store(k + 1, &cur, &mut result);
    }
    Ok(ScalarField::from_raw(grid, result))
}

/// Sup-norm error of `solve` on a closed-form problem of the given type:
/// a Dirichlet problem for elliptic, compact support in `y` for parabolic,
/// initial data on the left edge for hyperbolic.
pub fn manufactured_error(kind: PdeKind, n: usize, opts: &SolverOptions) -> Result<f64> {
    use std::f64::consts::PI;
    let grid = Grid::new(n)?;
    let eta = |y: f64| (0.81 - y * y).max(0.0).powi(3);
    let eta_yy = |y: f64| {
        let q = 0.81 - y * y;
        if q > 0.0 { -6.0 * q * q + 24.0 * y * y * q } else { 0.0 }
    };
    let (p, exact) = match kind {
        PdeKind::Elliptic => {
            let (a, b) = (2.25, 0.25);
            let u = |x: f64, y: f64| (PI * x / 2.0 + 0.3).sin() * (1.3 * y).cos();
            let k = a * PI * PI / 4.0 + b * 1.69;
            let p = SecondOrderProblem {
                dirichlet: Some(ScalarField::from_fn(grid, u)),
                ..SecondOrderProblem::homogeneous(a, b, ScalarField::from_fn(grid, |x, y| k * u(x, y)))
            };
            (p, ScalarField::from_fn(grid, u))
        }
        PdeKind::Parabolic => {
            let b = 2.0;
            let src = ScalarField::from_fn(grid, |x, y| -b * x.cos() * eta_yy(y));
            (SecondOrderProblem::homogeneous(0.0, b, src), ScalarField::from_fn(grid, |x, y| x.cos() * eta(y)))
        }
        PdeKind::Hyperbolic => {
            let (a, b) = (1.5, -0.5);
            let s = |x: f64| (PI * (x + 1.0) / 2.0).sin();
            let src = ScalarField::from_fn(grid, |x, y| a * PI * PI / 4.0 * s(x) * eta(y) - b * s(x) * eta_yy(y));
            let x0 = grid.x(0);
            let c = (PI * (x0 + 1.0) / 2.0).cos() * PI / 2.0;
            let p = SecondOrderProblem {
                initial_g: Some((0..n).map(|j| s(x0) * eta(grid.y(j))).collect()),
                initial_gx: Some((0..n).map(|j| c * eta(grid.y(j))).collect()),
                ..SecondOrderProblem::homogeneous(a, b, src)
            };
            (p, ScalarField::from_fn(grid, |x, y| s(x) * eta(y)))
        }
        PdeKind::Degenerate => {
            return Err(VltError::Argument("no manufactured problem for a degenerate equation".into()));
        }
    };
    Ok((&solve(&p, opts)? - &exact).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn classification() {
        assert_eq!(PdeKind::classify(1.0, 2.0), PdeKind::Elliptic);
        assert_eq!(PdeKind::classify(-1.0, -2.0), PdeKind::Elliptic);
        assert_eq!(PdeKind::classify(1.0, -2.0), PdeKind::Hyperbolic);
        assert_eq!(PdeKind::classify(-1.0, 2.0), PdeKind::Hyperbolic);
        assert_eq!(PdeKind::classify(1.0, 1e-13), PdeKind::Parabolic);
        assert_eq!(PdeKind::classify(0.0, -3.0), PdeKind::Parabolic);
        assert_eq!(PdeKind::classify(0.0, 1e-14), PdeKind::Degenerate);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = grid(16);
        let z = ScalarField::zeros(g);
        for (a, b) in [(1.0, 1.0), (1.0, 0.0), (1.0, -0.5)] {
            let p = SecondOrderProblem::homogeneous(a, b, z.clone());
            assert_eq!(solve(&p, &SolverOptions::default()).unwrap(), z);
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let p = SecondOrderProblem::homogeneous(1.0, -1.0, ScalarField::zeros(grid(8)));
        assert!(matches!(solve_elliptic(&p), Err(VltError::Classification { .. })));
        assert!(matches!(solve_parabolic(&p), Err(VltError::Classification { .. })));
        let p = SecondOrderProblem::homogeneous(1.0, 1.0, ScalarField::zeros(grid(8)));
        assert!(matches!(solve_hyperbolic(&p, 4), Err(VltError::Classification { .. })));
    }

    fn elliptic_error(n: usize, backend: EllipticBackend) -> f64 {
        let g = grid(n);
        let exact = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let p = SecondOrderProblem {
            dirichlet: Some(ScalarField::from_fn(g, exact)),
            ..SecondOrderProblem::homogeneous(1.0, 1.0, ScalarField::from_fn(g, |x, y| 2.0 * PI * PI * exact(x, y)))
        };
        let opts = SolverOptions { elliptic: backend, ..Default::default() };
        let u = solve_elliptic_with(&p, &opts).unwrap();
        (&u - &ScalarField::from_fn(g, exact)).max_abs()
    }

    #[test]
    fn elliptic_manufactured_second_order() {
        for backend in [EllipticBackend::SineTransform, EllipticBackend::ConjugateGradient] {
            let (e1, e2) = (elliptic_error(40, backend), elliptic_error(80, backend));
            assert!(e1 / e2 > 3.5, "{backend:?}: {e1} {e2}");
        }
    }

    #[test]
    fn backends_agree_on_anisotropic_problem() {
        let g = grid(48);
        let src = ScalarField::from_fn(g, |x, y| (-(x * x + 2.0 * y * y) * 8.0).exp());
        let p = SecondOrderProblem::homogeneous(2.25, 0.25, src);
        let a = solve_elliptic_with(&p, &SolverOptions::default()).unwrap();
        let cg = SolverOptions { elliptic: EllipticBackend::ConjugateGradient, ..Default::default() };
        let b = solve_elliptic_with(&p, &cg).unwrap();
        assert!((&a - &b).max_abs() < 1e-8 * a.max_abs());
    }

    #[test]
    fn elliptic_maximum_principle() {
        let g = grid(32);
        let src = ScalarField::from_fn(g, |x, y| if x * x + y * y < 0.2 { 1.0 } else { 0.0 });
        let u = solve_elliptic(&SecondOrderProblem::homogeneous(0.7, 1.3, src)).unwrap();
        assert!(u.values().iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn negative_definite_is_negated() {
        let g = grid(24);
        let src = ScalarField::from_fn(g, |x, y| (x + 0.3).cos() * y.cos());
        let pos = solve_elliptic(&SecondOrderProblem::homogeneous(1.0, 2.0, src.clone())).unwrap();
        let neg = solve_elliptic(&SecondOrderProblem::homogeneous(-1.0, -2.0, src.scale(-1.0))).unwrap();
        assert!((&pos - &neg).max_abs() < 1e-12);
    }

    #[test]
    fn parabolic_strip() {
        // u_xx = -f with f = -1 on |x| < 0.1: left of the strip u is linear
        // in x with slope equal to minus the strip mass.
        let n = 200;
        let g = grid(n);
        let f = ScalarField::from_fn(g, |x, _| if x.abs() < 0.1 { -1.0 } else { 0.0 });
        let u = solve_parabolic(&SecondOrderProblem::homogeneous(1.0, 0.0, f)).unwrap();
        // Closed form for x < -0.1: u = integral_x^1 (t - x) * 1_{|t|<0.1} dt = 0.2 * (0 - x).
        for i in 0..n / 4 {
            let x = g.x(i);
            let want = -0.2 * x;
            assert!((u.get(i, 50) - want).abs() < 2.0 * g.h(), "{x}: {} vs {want}", u.get(i, 50));
        }
    }

    #[test]
    fn parabolic_inverse_relation() {
        let n = 128;
        let g = grid(n);
        let bump = |x: f64, y: f64| {
            let r = x * x + y * y;
            if r < 0.25 { (1.0 - 4.0 * r).powi(3) } else { 0.0 }
        };
        let f = ScalarField::from_fn(g, bump);
        let u = solve_parabolic(&SecondOrderProblem::homogeneous(0.0, 2.0, f.clone())).unwrap();
        let uyy = crate::calculus::partial_y(&crate::calculus::partial_y(&u));
        let mut err: f64 = 0.0;
        for j in 5..n - 5 {
            for i in 5..n - 5 {
                err = err.max((2.0 * uyy.get(i, j) + f.get(i, j)).abs());
            }
        }
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn hyperbolic_courant_number() {
        let p = SecondOrderProblem::homogeneous(0.5, -0.5, ScalarField::zeros(grid(16)));
        assert!(solve_hyperbolic(&p, 4).is_ok());
        let lam: f64 = (0.5 / 0.5) * (1.0f64 / 4.0).powi(2);
        assert_eq!(lam, 1.0 / 16.0);
        assert_eq!(lam.sqrt(), 0.25);
        let steep = SecondOrderProblem::homogeneous(1.0, -20.0, ScalarField::zeros(grid(16)));
        match solve_hyperbolic(&steep, 4) {
            Err(VltError::Cfl { required_refine, .. }) => assert_eq!(required_refine, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(solve_hyperbolic(&steep, 5).is_ok());
    }

    fn eta(y: f64) -> f64 {
        let q = 0.81 - y * y;
        if q > 0.0 { q.powi(3) } else { 0.0 }
    }

    fn eta_yy(y: f64) -> f64 {
        let q = 0.81 - y * y;
        if q > 0.0 {
            -6.0 * q * q + 24.0 * y * y * q
        } else {
            0.0
        }
    }

    fn hyperbolic_error(n: usize) -> f64 {
        let g = grid(n);
        let s = |x: f64| (PI * (x + 1.0) / 2.0).sin();
        let exact = |x: f64, y: f64| s(x) * eta(y);
        // u_xx - u_yy = -f  =>  f = -u_xx + u_yy.
        let f = ScalarField::from_fn(g, |x, y| (PI * PI / 4.0) * s(x) * eta(y) + s(x) * eta_yy(y));
        let x0 = g.x(0);
        let c = (PI * (x0 + 1.0) / 2.0).cos() * PI / 2.0;
        let p = SecondOrderProblem {
            initial_g: Some((0..n).map(|j| exact(x0, g.y(j))).collect()),
            initial_gx: Some((0..n).map(|j| c * eta(g.y(j))).collect()),
            ..SecondOrderProblem::homogeneous(1.0, -1.0, f)
        };
        let u = solve_hyperbolic(&p, 4).unwrap();
        (&u - &ScalarField::from_fn(g, exact)).max_abs()
    }

    #[test]
    fn hyperbolic_manufactured_first_order() {
        let (e1, e2) = (hyperbolic_error(40), hyperbolic_error(80));
        assert!(e1 / e2 > 1.7, "{e1} {e2}");
    }

    #[test]
    fn hyperbolic_is_reproducible_and_transposes() {
        let g = grid(24);
        let src = ScalarField::from_fn(g, |x, y| (-(x * x + y * y) * 20.0).exp());
        let p = SecondOrderProblem::homogeneous(1.0, -0.5, src.clone());
        assert_eq!(solve_hyperbolic(&p, 4).unwrap(), solve_hyperbolic(&p, 4).unwrap());
        let q = SecondOrderProblem::homogeneous(-0.5, 1.0, transpose(&src));
        let u = solve_hyperbolic(&q, 4).unwrap();
        assert!((&transpose(&u) - &solve_hyperbolic(&p, 4).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn manufactured_errors_shrink() {
        for kind in [PdeKind::Elliptic, PdeKind::Parabolic, PdeKind::Hyperbolic] {
            let opts = SolverOptions::default();
            let (e1, e2) = (manufactured_error(kind, 40, &opts).unwrap(), manufactured_error(kind, 80, &opts).unwrap());
            assert!(e2 < e1 / 1.7, "{kind:?}: {e1} {e2}");
        }
        assert!(manufactured_error(PdeKind::Degenerate, 40, &SolverOptions::default()).is_err());
    }
}
