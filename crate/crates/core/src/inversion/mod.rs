//! Reconstruction algorithms.
//!
//! Differentiation is always applied to the data before any integration.
//! Every mixed derivative `D_u D_v` of data is zeroed within a frame of
//! `InversionOptions::margin` pixels, and so is anything integrated from it,
//! since these quantities vanish identically outside the support disc and
//! only pick up stencil errors at the grid edge.

mod full;
mod special;
mod star;

pub use self::full::{invert_ll1m, invert_ll1t, invert_ltm, EQUAL_COMPONENTS_TOL, MOMENT_SPLIT_TOL};
pub use self::special::{
    invert_d2phi, invert_ddperpphi, invert_ddperpphi_from, invert_dg, invert_dperp2phi, invert_dperpg,
};
pub use self::star::{
    gamma_vectors, invert_star, is_singular_type1, star_q_residual, type1_directions, QMatrix, StarInversion,
    StarOptions, DET_TOL, EPS_SING, POST_MASK_RADIUS,
};

use crate::calculus::dudv;
use crate::fields::{ScalarField, VLineGeometry};
use crate::pdesolve::SolverOptions;

/// Frame width zeroed by default.
pub const DEFAULT_MARGIN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    pub margin: usize,
    pub solver: SolverOptions,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            margin: DEFAULT_MARGIN,
            solver: SolverOptions::default(),
        }
    }
}

/// Copy of `h` with the outer `px`-wide frame set to zero.
///
/// A frame of half the grid or more zeroes everything.
pub fn zero_margin(h: &ScalarField, px: usize) -> ScalarField {
    if px == 0 {
        return h.clone();
    }
    let n = h.n();
    let mut values = h.values().to_vec();
    for j in 0..n {
        for i in 0..n {
            if i < px || j < px || i + px >= n || j + px >= n {
                values[j * n + i] = 0.0;
            }
        }
    }
    ScalarField::from_raw(h.grid(), values)
}

/// `zero_margin(D_u D_v h)`.
pub(crate) fn dudv_masked(h: &ScalarField, geom: &VLineGeometry, opts: &InversionOptions) -> ScalarField {
    zero_margin(&dudv(h, geom.u(), geom.v()), opts.margin)
}
