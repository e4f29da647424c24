//! Potentials of the special tensor fields `d^2 phi`, `(d_perp)^2 phi`,
//! `d d_perp phi`, `d g` and `d_perp g`.

use super::{dudv_masked, zero_margin, InversionOptions};
use crate::calculus::{axis_integral, partial_x, Axis};
use crate::error::{Result, VltError};
use crate::fields::{ScalarField, VLineGeometry, VectorField};
use crate::pdesolve::{solve, SecondOrderProblem};
use crate::vlt::{vline_scalar, Moment, TransformKind};

fn unsupported(method: &str, kind: TransformKind) -> VltError {
    VltError::Argument(format!("{method} cannot be recovered from the {:?} transform", kind))
}

/// `phi` from `L f` or `M f` of `f = d^2 phi`.
pub fn invert_d2phi(data: &ScalarField, src: TransformKind, geom: &VLineGeometry) -> Result<ScalarField> {
    let c = 1.0 / (2.0 * geom.u2());
    match src {
        TransformKind::Longitudinal => Ok(axis_integral(data, Axis::PosY).scale(c)),
        TransformKind::Mixed => Ok(axis_integral(data, Axis::PosX).scale(-c)),
        TransformKind::Transverse => Err(unsupported("d2phi", src)),
    }
}

/// `phi` from `T f` or `M f` of `f = (d_perp)^2 phi`.
pub fn invert_dperp2phi(data: &ScalarField, src: TransformKind, geom: &VLineGeometry) -> Result<ScalarField> {
    let c = 1.0 / (2.0 * geom.u2());
    match src {
        TransformKind::Transverse => Ok(axis_integral(data, Axis::PosY).scale(c)),
        TransformKind::Mixed => Ok(axis_integral(data, Axis::PosX).scale(c)),
        TransformKind::Longitudinal => Err(unsupported("dperp2phi", src)),
    }
}

/// `phi` from one transform of `f = d d_perp phi`.
///
/// `L` and `T` give `phi` explicitly; `M` leads to
/// `(1 + 2u1^2) phi_xx + (u1^2 - u2^2) phi_yy = -(1/u2) X_e2 (D_u D_v M f)`,
/// solved with homogeneous data.
pub fn invert_ddperpphi(
    data: &ScalarField,
    src: TransformKind,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<ScalarField> {
    let c = 1.0 / (2.0 * geom.u2());
    match src {
        TransformKind::Longitudinal => Ok(axis_integral(data, Axis::PosX).scale(c)),
        TransformKind::Transverse => Ok(axis_integral(data, Axis::PosX).scale(-c)),
        TransformKind::Mixed => {
            let (u1, u2) = (geom.u1(), geom.u2());
            let lifted = axis_integral(&dudv_masked(data, geom, opts), Axis::PosY);
            let source = zero_margin(&lifted, opts.margin).scale(1.0 / u2);
            let p = SecondOrderProblem::homogeneous(1.0 + 2.0 * u1 * u1, u1 * u1 - u2 * u2, source);
            solve(&p, &opts.solver)
        }
    }
}

/// Uses the first available of `L`, `T`, `M`, in that order.
pub fn invert_ddperpphi_from(
    l: Option<&ScalarField>,
    t: Option<&ScalarField>,
    m: Option<&ScalarField>,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<ScalarField> {
    let (data, kind) = match (l, t, m) {
        (Some(d), _, _) => (d, TransformKind::Longitudinal),
        (None, Some(d), _) => (d, TransformKind::Transverse),
        (None, None, Some(d)) => (d, TransformKind::Mixed),
        (None, None, None) => {
            return Err(VltError::Argument("ddperpphi needs at least one of L, T, M".into()));
        }
    };
    invert_ddperpphi(data, kind, geom, opts)
}

/// Solves `2u1^2 w_xx + (u1^2 - u2^2) w_yy = -(1/2u2) D_u D_v h`.
fn solve_vector_component(h: &ScalarField, geom: &VLineGeometry, opts: &InversionOptions) -> Result<ScalarField> {
    let (u1, u2) = (geom.u1(), geom.u2());
    let source = dudv_masked(h, geom, opts).scale(1.0 / (2.0 * u2));
    let p = SecondOrderProblem::homogeneous(2.0 * u1 * u1, u1 * u1 - u2 * u2, source);
    solve(&p, &opts.solver)
}

/// `g` from `L f` and `M f` of `f = d g`.
pub fn invert_dg(
    data_l: &ScalarField,
    data_m: &ScalarField,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<VectorField> {
    data_l.ensure_same_grid(data_m)?;
    let g2 = data_l.scale(-1.0 / (2.0 * geom.u2()));
    let h = data_m.lincomb(2.0, &vline_scalar(&partial_x(&g2), geom, Moment::Zero), 1.0);
    let g1 = solve_vector_component(&h, geom, opts)?;
    VectorField::new(g1, g2)
}

/// `g` from `T f` and `M f` of `f = d_perp g`.
pub fn invert_dperpg(
    data_t: &ScalarField,
    data_m: &ScalarField,
    geom: &VLineGeometry,
    opts: &InversionOptions,
) -> Result<VectorField> {
    data_t.ensure_same_grid(data_m)?;
    let g1 = data_t.scale(1.0 / (2.0 * geom.u2()));
    let h = data_m.lincomb(-2.0, &vline_scalar(&partial_x(&g1), geom, Moment::Zero), -1.0);
    let g2 = solve_vector_component(&h, geom, opts)?;
    VectorField::new(g1, g2)
}
