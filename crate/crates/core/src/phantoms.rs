//! Test phantoms and the potentials derived from them.

use crate::error::{Result, VltError};
use crate::fields::{Grid, ScalarField, SymTensorField, VectorField};

/// Smooth bump `exp(-r^2 / (r^2 - rho^2))` centered at `(a, b)`, zero for `rho >= r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub a: f64,
    pub b: f64,
    r: f64,
}

impl CutoffSpec {
    pub fn new(a: f64, b: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(VltError::Precondition(format!(
                "cutoff radius must be positive and finite, got {r}"
            )));
        }
        Ok(CutoffSpec { a, b, r })
    }

    const fn raw(a: f64, b: f64, r: f64) -> Self {
        CutoffSpec { a, b, r }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        cutoff_eval(self, x, y)
    }
}

pub fn cutoff_eval(spec: &CutoffSpec, x: f64, y: f64) -> f64 {
    let rho2 = (x - spec.a).powi(2) + (y - spec.b).powi(2);
    let r2 = spec.r * spec.r;
    if rho2 < r2 {
        (-r2 / (r2 - rho2)).exp()
    } else {
        0.0
    }
}

// sqrt(0.05), sqrt(0.03), sqrt(0.1)
const R05: f64 = 0.223_606_797_749_979;
const R03: f64 = 0.173_205_080_756_887_72;
const R10: f64 = 0.316_227_766_016_837_94;

pub const PHANTOM1_F11: [CutoffSpec; 6] = [
    CutoffSpec::raw(0.0, 0.0, R05),
    CutoffSpec::raw(0.09, 0.28, R03),
    CutoffSpec::raw(-0.25, 0.15, R03),
    CutoffSpec::raw(-0.22, -0.2, R03),
    CutoffSpec::raw(0.13, -0.27, R03),
    CutoffSpec::raw(0.3, 0.0, R03),
];

pub const PHANTOM1_F12: [CutoffSpec; 3] = [
    CutoffSpec::raw(0.0, 0.0, R10),
    CutoffSpec::raw(0.3, 0.2, R03),
    CutoffSpec::raw(-0.3, 0.2, R03),
];

pub const PHANTOM1_F22: [CutoffSpec; 5] = [
    CutoffSpec::raw(0.0, 0.0, R05),
    CutoffSpec::raw(0.0, 0.3, R03),
    CutoffSpec::raw(0.0, -0.3, R03),
    CutoffSpec::raw(-0.3, 0.0, R03),
    CutoffSpec::raw(0.3, 0.0, R03),
];

fn cutoff_sum(grid: Grid, specs: &[CutoffSpec]) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| specs.iter().map(|s| cutoff_eval(s, x, y)).sum())
}

/// Smooth phantom: each component is a sum of cutoff bumps.
pub fn phantom1(grid: Grid) -> SymTensorField {
    SymTensorField::from_parts(
        cutoff_sum(grid, &PHANTOM1_F11),
        cutoff_sum(grid, &PHANTOM1_F12),
        cutoff_sum(grid, &PHANTOM1_F22),
    )
}

/// Letter glyphs on `[-GLYPH_HALF, GLYPH_HALF]^2`.
pub const GLYPH_HALF: f64 = 0.45;
pub const STROKE: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    V,
    L,
    T,
}

fn in_box(x: f64, y: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> bool {
    (x0..=x1).contains(&x) && (y0..=y1).contains(&y)
}

fn segment_distance(x: f64, y: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let t = (((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((x - ax - t * dx).powi(2) + (y - ay - t * dy).powi(2)).sqrt()
}

impl Glyph {
    /// Whether `(x, y)` belongs to the glyph.
    pub fn contains(self, x: f64, y: f64) -> bool {
        let g = GLYPH_HALF;
        let w = STROKE;
        match self {
            Glyph::V => {
                // Arms are cut off at the glyph box, as in a typeset letter.
                let tip = (0.0, -g);
                in_box(x, y, -g, g, -g, g)
                    && (segment_distance(x, y, (-g, g), tip) <= w / 2.0
                        || segment_distance(x, y, (g, g), tip) <= w / 2.0)
            }
            Glyph::L => in_box(x, y, -g, -g + w, -g, g) || in_box(x, y, -g, g, -g, -g + w),
            Glyph::T => {
                in_box(x, y, -g, g, g - w, g) || in_box(x, y, -w / 2.0, w / 2.0, -g, g)
            }
        }
    }

    /// Indicator of the glyph sampled at cell centers.
    pub fn rasterize(self, grid: Grid) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| if self.contains(x, y) { 1.0 } else { 0.0 })
    }
}

/// Non-smooth phantom: `f11` is a "V", `f12` an "L" and `f22` a "T".
pub fn phantom2(grid: Grid) -> SymTensorField {
    SymTensorField::from_parts(
        Glyph::V.rasterize(grid),
        Glyph::L.rasterize(grid),
        Glyph::T.rasterize(grid),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomId {
    Smooth,
    Letters,
}

impl PhantomId {
    pub fn build(self, grid: Grid) -> SymTensorField {
        match self {
            PhantomId::Smooth => phantom1(grid),
            PhantomId::Letters => phantom2(grid),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            PhantomId::Smooth => 1,
            PhantomId::Letters => 2,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(PhantomId::Smooth),
            2 => Ok(PhantomId::Letters),
            _ => Err(VltError::Argument(format!("phantom must be 1 or 2, got {k}"))),
        }
    }
}

/// Scalar potential: smooth uses phantom 1's `f12`, non-smooth the "V" glyph.
pub fn potential_scalar(grid: Grid, which: PhantomId) -> ScalarField {
    match which {
        PhantomId::Smooth => cutoff_sum(grid, &PHANTOM1_F12),
        PhantomId::Letters => Glyph::V.rasterize(grid),
    }
}

/// Vector potential `(g1, g2) = (f11, f22)` of the chosen phantom.
pub fn potential_vector(grid: Grid, which: PhantomId) -> VectorField {
    let (f11, _, f22) = which.build(grid).into_parts();
    VectorField::from_parts(f11, f22)
}
