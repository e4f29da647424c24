//! Full recovery of a symmetric 2-tensor field from three V-line transforms.

use super::{dudv_masked, zero_margin, InversionOptions};
use crate::calculus::{axis_integral, partial_x, partial_y, Axis};
use crate::error::{Result, VltError};
use crate::fields::{ScalarField, SymTensorField, VLineGeometry};
use crate::pdesolve::{solve_elliptic_with, SecondOrderProblem};
use crate::vlt::{vline_scalar, Moment};

/// Geometries with `|u1 - u2|` at or below this use the symmetric formulas.
pub const EQUAL_COMPONENTS_TOL: f64 = 1e-12;

/// `|u1^2 - u2^2|` below this is rejected by the `{L, L1, T}` inversion.
pub const MOMENT_SPLIT_TOL: f64 = 1e-9;

fn same_grid(fields: &[&ScalarField]) -> Result<()> {
    for f in &fields[1..] {
        fields[0].ensure_same_grid(f)?;
    }
    Ok(())
}

/// `f` from `L f`, `T f` and `M f`.
pub fn invert_ltm(
    data_l: &ScalarField,
    data_t: &ScalarField,
    data_m: &ScalarField,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<SymTensorField> {
    same_grid(&[data_l, data_t, data_m])?;
    let (u1, u2) = (geom.u1(), geom.u2());
    let px = opts.margin;
    let int_up = |h: &ScalarField| zero_margin(&axis_integral(h, Axis::PosY), px);
    let int_left = |h: &ScalarField| zero_margin(&axis_integral(h, Axis::NegX), px);

    let dd_l = dudv_masked(data_l, geom, opts);
    let dd_t = dudv_masked(data_t, geom, opts);
    let dd_m = dudv_masked(data_m, geom, opts);
    let sum_up = int_up(&(&dd_l + &dd_t));

    if (u1 - u2).abs() <= EQUAL_COMPONENTS_TOL {
        let m_left = int_left(&dd_m);
        let f11 = sum_up.lincomb(1.0 / (4.0 * u2), &m_left, -1.0 / (2.0 * u1));
        let f22 = sum_up.lincomb(1.0 / (4.0 * u2), &m_left, 1.0 / (2.0 * u1));
        let f12 = int_left(&(&dd_l - &dd_t)).scale(1.0 / (4.0 * u1));
        return Ok(SymTensorField::from_parts(f11, f12, f22));
    }

    let s = u1 * u1 - u2 * u2;
    let g = zero_margin(
        &partial_x(&(&dd_t - &dd_l)).lincomb(u1 * u1, &partial_y(&dd_m), s),
        px,
    )
    .scale(1.0 / (2.0 * u2));
    let a = 2.0 * u1 * u1 * (1.0 + s);
    let b = s * s;
    let f12 = solve_elliptic_with(&SecondOrderProblem::homogeneous(a, b, g), &opts.solver)?;

    let dx_f12 = partial_x(&f12);
    let grid = f12.grid();
    let bracket = ScalarField::from_raw(
        grid,
        (0..grid.len())
            .map(|k| {
                (u2 * u2 * dd_t.values()[k] - u1 * u1 * dd_l.values()[k] + 4.0 * u1 * u1 * u2 * dx_f12.values()[k])
                    / (2.0 * u2 * s)
            })
            .collect(),
    );
    let f11 = int_up(&bracket).scale(-1.0);
    let f22 = sum_up.lincomb(1.0 / (2.0 * u2), &f11, -1.0);
    Ok(SymTensorField::from_parts(f11, f12, f22))
}

/// `B = D_u D_v L1 f + (D_u + D_v) L f`, zeroed near the edge.
fn moment_bracket(data_l: &ScalarField, data_l1: &ScalarField, geom: &VLineGeometry, opts: &InversionOptions) -> ScalarField {
    let (u, v) = (geom.u(), geom.v());
    // (D_u + D_v) = 2 u2 d/dy for the symmetric geometry, written out in full.
    let first = partial_x(data_l).lincomb(u.d1() + v.d1(), &partial_y(data_l), u.d2() + v.d2());
    zero_margin(&dudv_masked(data_l1, geom, opts).lincomb(1.0, &first, 1.0), opts.margin)
}

/// `f12 = (1/4u1^2) d/dy X_e1 [B + (1/u2) X_e2 D_u D_v L f]`.
fn moment_f12(b: &ScalarField, data_l: &ScalarField, geom: &VLineGeometry, opts: &InversionOptions) -> ScalarField {
    let (u1, u2) = (geom.u1(), geom.u2());
    let lifted = zero_margin(&axis_integral(&dudv_masked(data_l, geom, opts), Axis::PosY), opts.margin);
    let inner = b.lincomb(1.0, &lifted, 1.0 / u2);
    partial_y(&axis_integral(&inner, Axis::PosX)).scale(1.0 / (4.0 * u1 * u1))
}

/// `f` from `L f`, `L1 f` and `T f`; needs `u1 != u2`.
pub fn invert_ll1t(
    data_l: &ScalarField,
    data_l1: &ScalarField,
    data_t: &ScalarField,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<SymTensorField> {
    same_grid(&[data_l, data_l1, data_t])?;
    let (u1, u2) = (geom.u1(), geom.u2());
    let s = u1 * u1 - u2 * u2;
    if s.abs() < MOMENT_SPLIT_TOL {
        return Err(VltError::Precondition(format!(
            "recovery from L, L1, T needs u1^2 != u2^2 (u = ({u1}, {u2}))"
        )));
    }
    let b = moment_bracket(data_l, data_l1, geom, opts);
    let f12 = moment_f12(&b, data_l, geom, opts);
    let lt_up = zero_margin(
        &axis_integral(&dudv_masked(&(data_l + data_t), geom, opts), Axis::PosY),
        opts.margin,
    );
    let f11 = b.lincomb(1.0, &lt_up, u2).scale(-1.0 / (2.0 * s));
    let f22 = b.lincomb(1.0, &lt_up, u1 * u1 / u2).scale(1.0 / (2.0 * s));
    Ok(SymTensorField::from_parts(f11, f12, f22))
}

/// `f` from `L f`, `L1 f` and `M f`.
pub fn invert_ll1m(
    data_l: &ScalarField,
    data_l1: &ScalarField,
    data_m: &ScalarField,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<SymTensorField> {
    same_grid(&[data_l, data_l1, data_m])?;
    let (u1, u2) = (geom.u1(), geom.u2());
    let b = moment_bracket(data_l, data_l1, geom, opts);
    let f12 = moment_f12(&b, data_l, geom, opts);
    let s = u1 * u1 - u2 * u2;
    let w = vline_scalar(&f12, geom, Moment::Zero).lincomb(s, data_m, -1.0);
    let e = zero_margin(&axis_integral(&dudv_masked(&w, geom, opts), Axis::NegX), opts.margin);
    let f11 = b.lincomb(-0.5, &e, 0.5 * u2 / (u1 * u1));
    let f22 = b.lincomb(-0.5, &e, -0.5 / u2);
    Ok(SymTensorField::from_parts(f11, f12, f22))
}
