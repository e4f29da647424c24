//! Star transform inversion through the component-wise Radon transform.
//!
//! For `xi` off the singular sets, `Q(xi) (R f)(xi, s) = d/ds R(S f)(xi, s)`
//! where the three rows of `Q` act on `(R f11, R f12, R f22)`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Result, VltError};
use crate::fields::{Direction, StarGeometry, SymTensorField};
use crate::radon::{fbp, radon_forward_many, sino_sderiv, uniform_angles, Sinogram};
use crate::vlt::StarData;

/// Default `|xi . gamma_i|` below which `xi` counts as singular of type 1.
pub const EPS_SING: f64 = 1e-3;

/// `|det Q|` below this is singular of type 2.
pub const DET_TOL: f64 = 1e-10;

/// Rows `gamma(xi)`, `gamma_dag(xi)`, `gamma_perp(xi)` as coefficients of
/// `(R f11, R f12, R f22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMatrix {
    pub rows: [[f64; 3]; 3],
}

impl QMatrix {
    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.rows[r][c])
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    pub fn apply(&self, r: [f64; 3]) -> [f64; 3] {
        let v = self.matrix() * Vector3::from(r);
        [v[0], v[1], v[2]]
    }

    /// Solves `Q r = d`; `None` if `Q` is singular.
    pub fn solve(&self, d: [f64; 3]) -> Option<[f64; 3]> {
        let lu = self.matrix().lu();
        lu.solve(&Vector3::from(d)).map(|v| [v[0], v[1], v[2]])
    }
}

/// Tensor `w (.) z` as the row pairing with `(f11, f12, f22)`.
fn pairing(w: Direction, z: Direction) -> [f64; 3] {
    [w.d1() * z.d1(), w.d1() * z.d2() + w.d2() * z.d1(), w.d2() * z.d2()]
}

fn first_type1(sg: &StarGeometry, xi: Direction, eps: f64) -> Option<(usize, f64)> {
    sg.branches()
        .iter()
        .enumerate()
        .map(|(k, b)| (k, xi.dot(&b.direction)))
        .find(|(_, dot)| dot.abs() < eps)
}

fn theta_deg(xi: Direction) -> f64 {
    xi.angle().to_degrees()
}

/// `Q(xi)`; fails on either singular set.
pub fn gamma_vectors(sg: &StarGeometry, xi: Direction) -> Result<QMatrix> {
    gamma_vectors_eps(sg, xi, EPS_SING)
}

fn gamma_vectors_eps(sg: &StarGeometry, xi: Direction, eps: f64) -> Result<QMatrix> {
    if let Some((branch, dot)) = first_type1(sg, xi, eps) {
        return Err(VltError::SingularType1 {
            theta_deg: theta_deg(xi),
            branch: branch + 1,
            dot,
        });
    }
    let mut rows = [[0.0; 3]; 3];
    for b in sg.branches() {
        let g = b.direction;
        let gp = g.perp();
        let w = -b.weight / xi.dot(&g);
        for (row, p) in rows.iter_mut().zip([pairing(g, g), pairing(g, gp), pairing(gp, gp)]) {
            for c in 0..3 {
                row[c] += w * p[c];
            }
        }
    }
    let q = QMatrix { rows };
    let det = q.det();
    if det.is_nan() || det.abs() < DET_TOL {
        return Err(VltError::SingularType2 {
            theta_deg: theta_deg(xi),
            det,
        });
    }
    Ok(q)
}

pub fn is_singular_type1(sg: &StarGeometry, xi: Direction, eps: f64) -> bool {
    first_type1(sg, xi, eps).is_some()
}

/// Polar angles in degrees, in `[0, 360)` and ascending, of the directions
/// orthogonal to some branch.
pub fn type1_directions(sg: &StarGeometry) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for b in sg.branches() {
        let base = b.direction.angle().to_degrees();
        for off in [90.0, 270.0] {
            let a = (base + off).rem_euclid(360.0);
            let a = if 360.0 - a < 1e-9 { 0.0 } else { a };
            if !out.iter().any(|&o| angular_distance(o, a, 360.0) < 1e-9) {
                out.push(a);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn angular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarOptions {
    /// Number of uniformly spaced projection angles in `[0, 180)`.
    pub num_angles: usize,
    /// Angles closer than this (degrees) to a type-1 direction are refilled.
    pub drop_band_deg: f64,
    pub eps_sing: f64,
    /// Zero the reconstruction outside this radius.
    pub post_mask: Option<f64>,
}

impl Default for StarOptions {
    fn default() -> Self {
        StarOptions {
            num_angles: 180,
            drop_band_deg: 2.0,
            eps_sing: EPS_SING,
            post_mask: None,
        }
    }
}

/// Radius of the post-processing mask used by the masked experiments.
pub const POST_MASK_RADIUS: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct StarInversion {
    pub field: SymTensorField,
    pub kept_angles: Vec<f64>,
    pub dropped_angles: Vec<f64>,
    /// Largest relative residual `|Q r - d|_inf / |d|_inf` over kept angles.
    pub max_residual: f64,
}

struct Recovered {
    sinograms: [Sinogram; 3],
    kept: Vec<usize>,
    dropped: Vec<usize>,
    residuals: Vec<(f64, f64)>,
}

fn recover_radon(data: &StarData, sg: &StarGeometry, opts: &StarOptions) -> Result<Recovered> {
    let [a, b, c] = data.components();
    a.ensure_same_grid(b)?;
    a.ensure_same_grid(c)?;
    if opts.num_angles == 0 {
        return Err(VltError::Argument("star inversion needs at least one angle".into()));
    }
    let angles = uniform_angles(opts.num_angles);
    let z1 = type1_directions(sg);
    let near_z1 = |theta: f64| z1.iter().any(|&z| angular_distance(theta, z, 180.0) < opts.drop_band_deg);

    let sinos = radon_forward_many(&[a, b, c], &angles);
    let d: Vec<Sinogram> = sinos.iter().map(sino_sderiv).collect::<Result<_>>()?;
    let m = d[0].num_offsets();
    let ds = d[0].ds();
    let mut out = [
        Sinogram::zeros(angles.clone(), m, ds),
        Sinogram::zeros(angles.clone(), m, ds),
        Sinogram::zeros(angles.clone(), m, ds),
    ];

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut residuals = Vec::new();
    for (ai, &theta) in angles.iter().enumerate() {
        let xi = Direction::from_angle(theta.to_radians());
        if near_z1(theta) || is_singular_type1(sg, xi, opts.eps_sing) {
            dropped.push(ai);
            continue;
        }
        let q = gamma_vectors_eps(sg, xi, opts.eps_sing)?;
        let scale = (0..3).flat_map(|k| d[k].row(ai).iter()).fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut worst = 0.0f64;
        for j in 0..m {
            let rhs = [d[0].get(ai, j), d[1].get(ai, j), d[2].get(ai, j)];
            let r = q.solve(rhs).ok_or(VltError::SingularType2 {
                theta_deg: theta,
                det: q.det(),
            })?;
            let back = q.apply(r);
            for k in 0..3 {
                worst = worst.max((back[k] - rhs[k]).abs());
                out[k].row_mut(ai)[j] = r[k];
            }
        }
        residuals.push((theta, if scale > 0.0 { worst / scale } else { worst }));
        kept.push(ai);
    }
    if kept.is_empty() {
        return Err(VltError::Precondition("every projection angle is singular".into()));
    }
    for sino in out.iter_mut() {
        fill_dropped(sino, &kept, &dropped);
    }
    Ok(Recovered {
        sinograms: out,
        kept,
        dropped,
        residuals,
    })
}

/// Linear interpolation in angle between the nearest kept rows; nearest
/// kept row beyond the ends.
fn fill_dropped(sino: &mut Sinogram, kept: &[usize], dropped: &[usize]) {
    let angles = sino.angles_deg().to_vec();
    for &a in dropped {
        let lo = kept.iter().rev().find(|&&k| k < a).copied();
        let hi = kept.iter().find(|&&k| k > a).copied();
        let row: Vec<f64> = match (lo, hi) {
            (Some(l), Some(h)) => {
                let t = (angles[a] - angles[l]) / (angles[h] - angles[l]);
                sino.row(l).iter().zip(sino.row(h)).map(|(x, y)| (1.0 - t) * x + t * y).collect()
            }
            (Some(k), None) | (None, Some(k)) => sino.row(k).to_vec(),
            (None, None) => unreachable!("at least one angle is kept"),
        };
        sino.row_mut(a).copy_from_slice(&row);
    }
}

/// Per kept angle, the relative residual of the `Q`-solve.
pub fn star_q_residual(data: &StarData, sg: &StarGeometry, opts: &StarOptions) -> Result<Vec<(f64, f64)>> {
    Ok(recover_radon(data, sg, opts)?.residuals)
}

pub fn invert_star(data: &StarData, sg: &StarGeometry, opts: &StarOptions) -> Result<StarInversion> {
    let grid = data.long_c.grid();
    let rec = recover_radon(data, sg, opts)?;
    let [s11, s12, s22] = &rec.sinograms;
    let (f11, (f12, f22)) = rayon::join(
        || fbp(s11, grid),
        || rayon::join(|| fbp(s12, grid), || fbp(s22, grid)),
    );
    let mut field = SymTensorField::from_parts(f11?, f12?, f22?);
    if let Some(radius) = opts.post_mask {
        field = field.map_components(|c| c.mask_disc(radius));
    }
    let angles = s11.angles_deg();
    Ok(StarInversion {
        field,
        kept_angles: rec.kept.iter().map(|&a| angles[a]).collect(),
        dropped_angles: rec.dropped.iter().map(|&a| angles[a]).collect(),
        max_residual: rec.residuals.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}
