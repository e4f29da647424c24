//! 8-bit binary PGM previews with per-image min-max scaling.

use std::fs;
use std::path::Path;

use crate::error::{Result, VltError};
use crate::fields::ScalarField;

/// P5 image with the top row at the largest `y`; a constant field maps to 0.
pub fn render_pgm(h: &ScalarField) -> Vec<u8> {
    let n = h.n();
    let (lo, hi) = h.min_max();
    let span = hi - lo;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        out.extend(h.row(j).iter().map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        }));
    }
    out
}

pub fn write_pgm(h: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_pgm(h)).map_err(|e| VltError::io(path, e))
}
