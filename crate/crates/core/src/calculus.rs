//! Finite-difference derivatives and axis-aligned ray integrals.
//!
//! Interior samples use central differences; the outer ring falls back to
//! first-order one-sided differences.

use rayon::prelude::*;

use crate::fields::{Direction, ScalarField, SymTensorField, VectorField};

/// Derivative along `x` (column index).
pub fn partial_x(h: &ScalarField) -> ScalarField {
    let grid = h.grid();
    let n = grid.n();
    let inv = 1.0 / grid.h();
    let mut out = vec![0.0; grid.len()];
    if n >= 2 {
        out.par_chunks_mut(n).enumerate().for_each(|(j, row_out)| {
            let row = h.row(j);
            row_out[0] = (row[1] - row[0]) * inv;
            row_out[n - 1] = (row[n - 1] - row[n - 2]) * inv;
            for i in 1..n - 1 {
                row_out[i] = 0.5 * (row[i + 1] - row[i - 1]) * inv;
            }
        });
    }
    ScalarField::from_raw(grid, out)
}

/// Derivative along `y` (row index).
pub fn partial_y(h: &ScalarField) -> ScalarField {
    let grid = h.grid();
    let n = grid.n();
    let inv = 1.0 / grid.h();
    let mut out = vec![0.0; grid.len()];
    if n >= 2 {
        out.par_chunks_mut(n).enumerate().for_each(|(j, row_out)| {
            let (lo, hi, scale) = if j == 0 {
                (0, 1, inv)
            } else if j == n - 1 {
                (n - 2, n - 1, inv)
            } else {
                (j - 1, j + 1, 0.5 * inv)
            };
            let (a, b) = (h.row(lo), h.row(hi));
            for i in 0..n {
                row_out[i] = (b[i] - a[i]) * scale;
            }
        });
    }
    ScalarField::from_raw(grid, out)
}

pub fn gradient(h: &ScalarField) -> VectorField {
    VectorField::from_parts(partial_x(h), partial_y(h))
}

/// `d1 * dh/dx + d2 * dh/dy`.
pub fn dir_deriv(h: &ScalarField, d: Direction) -> ScalarField {
    partial_x(h).lincomb(d.d1(), &partial_y(h), d.d2())
}

/// `D_u D_v h`, differentiating along `v` first.
pub fn dudv(h: &ScalarField, u: Direction, v: Direction) -> ScalarField {
    dir_deriv(&dir_deriv(h, v), u)
}

/// Symmetrized Jacobian `d g`.
pub fn sym_deriv(g: &VectorField) -> SymTensorField {
    let (g1, g2) = (g.c1(), g.c2());
    let f12 = partial_y(g1).lincomb(0.5, &partial_x(g2), 0.5);
    SymTensorField::from_parts(partial_x(g1), f12, partial_y(g2))
}

/// `d_perp g`: `(-dg1/dy, (dg1/dx - dg2/dy)/2, dg2/dx)`.
pub fn perp_sym_deriv(g: &VectorField) -> SymTensorField {
    let (g1, g2) = (g.c1(), g.c2());
    let f12 = partial_x(g1).lincomb(0.5, &partial_y(g2), -0.5);
    SymTensorField::from_parts(partial_y(g1).scale(-1.0), f12, partial_x(g2))
}

/// `d_perp phi = (-dphi/dy, dphi/dx)`.
pub fn perp_gradient(phi: &ScalarField) -> VectorField {
    VectorField::from_parts(partial_y(phi).scale(-1.0), partial_x(phi))
}

/// `d^2 phi`, the Hessian.
pub fn d2(phi: &ScalarField) -> SymTensorField {
    sym_deriv(&gradient(phi))
}

/// `(d_perp)^2 phi = (phi_yy, -phi_xy, phi_xx)`.
pub fn dperp2(phi: &ScalarField) -> SymTensorField {
    perp_sym_deriv(&perp_gradient(phi))
}

/// `d d_perp phi = (-phi_xy, (phi_xx - phi_yy)/2, phi_xy)`, averaged over both
/// composition orders so the discrete result does not favor either.
pub fn ddperp(phi: &ScalarField) -> SymTensorField {
    let a = sym_deriv(&perp_gradient(phi));
    let b = perp_sym_deriv(&gradient(phi));
    a.lincomb(0.5, &b, 0.5)
}

/// Direction of an axis-aligned ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    PosX,
    NegX,
    PosY,
    NegY,
}

impl Axis {
    pub fn direction(self) -> Direction {
        match self {
            Axis::PosX => Direction::E1,
            Axis::NegX => Direction::new(-1.0, 0.0).expect("unit"),
            Axis::PosY => Direction::E2,
            Axis::NegY => Direction::new(0.0, -1.0).expect("unit"),
        }
    }
}

/// Integral of `h` along the axis ray from each cell center to the grid
/// edge (midpoint rule, half weight on the starting cell).
pub fn axis_integral(h: &ScalarField, axis: Axis) -> ScalarField {
    let grid = h.grid();
    let n = grid.n();
    let dh = grid.h();
    let mut out = vec![0.0; grid.len()];
    match axis {
        Axis::PosX | Axis::NegX => {
            out.par_chunks_mut(n).enumerate().for_each(|(j, row_out)| {
                let row = h.row(j);
                let mut acc = 0.0;
                let mut step = |i: usize| {
                    row_out[i] = dh * (acc + 0.5 * row[i]);
                    acc += row[i];
                };
                if axis == Axis::PosX {
                    (0..n).rev().for_each(&mut step);
                } else {
                    (0..n).for_each(&mut step);
                }
            });
        }
        Axis::PosY | Axis::NegY => {
            let mut acc = vec![0.0; n];
            let rows: Box<dyn Iterator<Item = usize>> = if axis == Axis::PosY {
                Box::new((0..n).rev())
            } else {
                Box::new(0..n)
            };
            for j in rows {
                let row = h.row(j);
                let row_out = &mut out[j * n..(j + 1) * n];
                for i in 0..n {
                    row_out[i] = dh * (acc[i] + 0.5 * row[i]);
                    acc[i] += row[i];
                }
            }
        }
    }
    ScalarField::from_raw(grid, out)
}
