//! Divergent beam transform and its first moment by exact pixel traversal.
//!
//! A ray is split at every crossing of a grid line; each piece lies in one
//! pixel, identified from its midpoint. Pixel values are treated as
//! constant over the pixel.

use rayon::prelude::*;

use crate::fields::{Direction, Grid, ScalarField};

/// Weight used for the first moment of a pixel's contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentWeight {
    /// Distance from the vertex to the midpoint of the chord; exact for
    /// piecewise-constant data.
    #[default]
    ChordMidpoint,
    /// Distance from the vertex to the pixel center.
    PixelCenter,
}

/// Crossing parameters of one family of grid lines, in increasing order.
struct Crossings {
    next: f64,
    step: f64,
}

impl Crossings {
    /// Lines `-1 + k h` crossed after `t0` by a ray that is at `p` at time `t0`.
    fn new(p: f64, d: f64, h: f64, t0: f64) -> Self {
        if d == 0.0 {
            return Crossings {
                next: f64::INFINITY,
                step: 0.0,
            };
        }
        let pos = (p + Grid::EXTENT) / h;
        let k = if d > 0.0 { pos.floor() + 1.0 } else { pos.ceil() - 1.0 };
        let mut next = t0 + ((k * h - Grid::EXTENT) - p) / d;
        let step = h / d.abs();
        // Guard against a start point sitting on a line up to rounding.
        while next <= t0 {
            next += step;
        }
        Crossings { next, step }
    }

    #[inline]
    fn advance(&mut self) {
        self.next += self.step;
    }
}

/// Walks the line `p + t d`, `t in [t0, t1]`, calling `visit(index, ta, tb)`
/// for each pixel piece of positive length.
#[inline]
fn walk(grid: Grid, p: (f64, f64), d: (f64, f64), t0: f64, t1: f64, mut visit: impl FnMut(usize, f64, f64)) {
    if t1 <= t0 {
        return;
    }
    let n = grid.n();
    let h = grid.h();
    let inv_h = 1.0 / h;
    let mut cx = Crossings::new(p.0 + t0 * d.0, d.0, h, t0);
    let mut cy = Crossings::new(p.1 + t0 * d.1, d.1, h, t0);
    let last = (n - 1) as f64;
    // Crossings closer than this count as one corner crossing.
    let tol = 1e-10 * h;
    let mut ta = t0;
    loop {
        let mut tb = cx.next.min(cy.next).min(t1);
        if t1 - tb <= tol {
            tb = t1;
        }
        if tb > ta {
            let tm = 0.5 * (ta + tb);
            let i = ((p.0 + tm * d.0 + Grid::EXTENT) * inv_h).floor().clamp(0.0, last) as usize;
            let j = ((p.1 + tm * d.1 + Grid::EXTENT) * inv_h).floor().clamp(0.0, last) as usize;
            visit(j * n + i, ta, tb);
        }
        if tb >= t1 {
            break;
        }
        // Step every family that crosses here, so corners produce no
        // zero-length pieces.
        if cx.next <= tb + tol {
            cx.advance();
        }
        if cy.next <= tb + tol {
            cy.advance();
        }
        ta = tb;
    }
}

/// Parameter interval in which `p + t d` lies in the square `[-1, 1]^2`.
fn clip_to_box(p: (f64, f64), d: (f64, f64)) -> Option<(f64, f64)> {
    let e = Grid::EXTENT;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (pc, dc) in [(p.0, d.0), (p.1, d.1)] {
        if dc == 0.0 {
            if pc < -e || pc > e {
                return None;
            }
        } else {
            let a = (-e - pc) / dc;
            let b = (e - pc) / dc;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    (hi > lo).then_some((lo, hi))
}

/// Exit parameter of the ray from an interior point.
fn exit_time(p: (f64, f64), d: (f64, f64)) -> f64 {
    clip_to_box(p, d).map_or(0.0, |(_, hi)| hi.max(0.0))
}

/// Divergent beam transforms of several fields along one direction, sharing
/// a single traversal per vertex. With `moment = Some(w)` the first moment
/// is returned instead.
pub fn xray_many(fields: &[&ScalarField], d: Direction, moment: Option<MomentWeight>) -> Vec<ScalarField> {
    let Some(first) = fields.first() else {
        return Vec::new();
    };
    let grid = first.grid();
    for f in fields {
        assert_eq!(f.grid(), grid, "fields live on different grids");
    }
    let n = grid.n();
    let k = fields.len();
    let dv = (d.d1(), d.d2());
    // Interleave so one traversal reads all fields from one cache line.
    let packed: Vec<f64> = (0..grid.len())
        .flat_map(|idx| fields.iter().map(move |f| f.values()[idx]))
        .collect();

    let mut out = vec![0.0; grid.len() * k];
    out.par_chunks_mut(n * k).enumerate().for_each(|(j, row_out)| {
        let y = grid.y(j);
        let mut acc = vec![0.0; k];
        for i in 0..n {
            let x = grid.x(i);
            let t1 = exit_time((x, y), dv);
            acc.iter_mut().for_each(|a| *a = 0.0);
            walk(grid, (x, y), dv, 0.0, t1, |idx, ta, tb| {
                let len = tb - ta;
                let w = match moment {
                    None => len,
                    Some(MomentWeight::ChordMidpoint) => len * 0.5 * (ta + tb),
                    Some(MomentWeight::PixelCenter) => {
                        let (pi, pj) = (idx % n, idx / n);
                        len * (grid.x(pi) - x).hypot(grid.y(pj) - y)
                    }
                };
                let vals = &packed[idx * k..idx * k + k];
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += w * v;
                }
            });
            for (c, a) in acc.iter().enumerate() {
                row_out[i * k + c] = *a;
            }
        }
    });
    (0..k)
        .map(|c| ScalarField::from_raw(grid, out.iter().skip(c).step_by(k).copied().collect()))
        .collect()
}

/// `X_d h(x) = integral of h(x + t d), t >= 0`.
pub fn xray(h: &ScalarField, d: Direction) -> ScalarField {
    xray_many(&[h], d, None).pop().expect("one field")
}

/// `X^1_d h(x) = integral of t h(x + t d), t >= 0`.
pub fn xray_moment1(h: &ScalarField, d: Direction) -> ScalarField {
    xray_moment1_with(h, d, MomentWeight::default())
}

pub fn xray_moment1_with(h: &ScalarField, d: Direction, weight: MomentWeight) -> ScalarField {
    xray_many(&[h], d, Some(weight)).pop().expect("one field")
}

/// Integral of `h` along the full line `{x : x . xi = s}` through the square.
pub fn line_integral(h: &ScalarField, xi: Direction, s: f64) -> f64 {
    let grid = h.grid();
    let p = (s * xi.d1(), s * xi.d2());
    let tang = (-xi.d2(), xi.d1());
    let vals = h.values();
    let mut acc = 0.0;
    if let Some((t0, t1)) = clip_to_box(p, tang) {
        walk(grid, p, tang, t0, t1, |idx, ta, tb| acc += vals[idx] * (tb - ta));
    }
    acc
}

/// Line integrals of several fields along one line, sharing the traversal.
pub(crate) fn line_integral_many(packed: &[f64], k: usize, grid: Grid, xi: Direction, s: f64, out: &mut [f64]) {
    let p = (s * xi.d1(), s * xi.d2());
    let tang = (-xi.d2(), xi.d1());
    out.iter_mut().for_each(|o| *o = 0.0);
    if let Some((t0, t1)) = clip_to_box(p, tang) {
        walk(grid, p, tang, t0, t1, |idx, ta, tb| {
            let len = tb - ta;
            for (o, v) in out.iter_mut().zip(&packed[idx * k..idx * k + k]) {
                *o += len * v;
            }
        });
    }
}
