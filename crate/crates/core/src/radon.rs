//! Parallel-beam Radon transform, s-derivative and filtered backprojection.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Result, VltError};
use crate::fields::{Direction, Grid, ScalarField};
use crate::raytrace::line_integral_many;

/// Samples `R h(xi(theta), s)`, one row per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    angles_deg: Vec<f64>,
    ds: f64,
    m: usize,
    values: Vec<f64>,
}

/// `k` angles at uniform spacing `180/k` degrees starting at 0.
pub fn uniform_angles(k: usize) -> Vec<f64> {
    (0..k).map(|i| i as f64 * 180.0 / k as f64).collect()
}

/// Default offsets for a grid: spacing `h`, covering `[-sqrt 2, sqrt 2]`.
pub fn default_offset_count(grid: Grid) -> usize {
    2 * (2f64.sqrt() / grid.h()).ceil() as usize + 1
}

impl Sinogram {
    pub fn new(angles_deg: Vec<f64>, m: usize, ds: f64, values: Vec<f64>) -> Result<Self> {
        if m == 0 || ds.is_nan() || ds <= 0.0 {
            return Err(VltError::Sinogram(format!("need positive offsets and spacing, got m={m}, ds={ds}")));
        }
        if values.len() != angles_deg.len() * m {
            return Err(VltError::Sinogram(format!(
                "expected {} values for {} angles x {m} offsets, got {}",
                angles_deg.len() * m,
                angles_deg.len(),
                values.len()
            )));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) || angles_deg.iter().any(|a| !(0.0..180.0).contains(a)) {
            return Err(VltError::Sinogram("angles must be ascending within [0, 180)".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VltError::Sinogram("non-finite sinogram value".into()));
        }
        Ok(Sinogram {
            angles_deg,
            ds,
            m,
            values,
        })
    }

    pub fn zeros(angles_deg: Vec<f64>, m: usize, ds: f64) -> Self {
        let values = vec![0.0; angles_deg.len() * m];
        Sinogram {
            angles_deg,
            ds,
            m,
            values,
        }
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn num_angles(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn num_offsets(&self) -> usize {
        self.m
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    /// Offset of column `j`, centered so the middle column is `s = 0`.
    pub fn offset(&self, j: usize) -> f64 {
        (j as f64 - (self.m as f64 - 1.0) / 2.0) * self.ds
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.offset(j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.m..(a + 1) * self.m]
    }

    pub fn row_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.values[a * self.m..(a + 1) * self.m]
    }

    pub fn get(&self, a: usize, j: usize) -> f64 {
        self.values[a * self.m + j]
    }

    /// `alpha * self + beta * other` on identical sampling.
    pub fn lincomb(&self, alpha: f64, other: &Sinogram, beta: f64) -> Sinogram {
        assert_eq!(self.angles_deg, other.angles_deg, "sinograms sample different angles");
        assert_eq!(self.m, other.m, "sinograms sample different offsets");
        Sinogram {
            values: self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect(),
            ..self.clone()
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "angles={} offsets={} ds={}", self.num_angles(), self.m, self.ds);
        for a in 0..self.num_angles() {
            for (j, v) in self.row(a).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes the CSV form; angles must be the uniform set `uniform_angles(k)`.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.angles_deg != uniform_angles(self.num_angles()) {
            return Err(VltError::Sinogram("only uniformly spaced angles from 0 can be written".into()));
        }
        fs::write(path, self.render()).map_err(|e| VltError::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Sinogram> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| VltError::io(path, e))?;
        Sinogram::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Sinogram> {
        let err = |line: usize, column: usize, message: String| VltError::Parse {
            path: origin.to_path_buf(),
            line,
            column,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end_matches('\r')));
        let (_, header) = lines.next().ok_or_else(|| err(1, 1, "empty file".into()))?;
        let (mut k, mut m, mut ds) = (None, None, None);
        for (c, tok) in header.split_whitespace().enumerate() {
            let bad = || err(1, c + 1, format!("invalid header token '{tok}'"));
            match tok.split_once('=') {
                Some(("angles", v)) => k = Some(v.parse::<usize>().map_err(|_| bad())?),
                Some(("offsets", v)) => m = Some(v.parse::<usize>().map_err(|_| bad())?),
                Some(("ds", v)) => ds = Some(v.parse::<f64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        let (Some(k), Some(m), Some(ds)) = (k, m, ds) else {
            return Err(err(1, 1, "header needs angles=, offsets= and ds=".into()));
        };
        let mut values = Vec::with_capacity(k * m);
        let mut rows = 0;
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != m {
                return Err(err(ln, cells.len().min(m) + 1, format!("row has {} columns, expected {m}", cells.len())));
            }
            for (c, cell) in cells.iter().enumerate() {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| err(ln, c + 1, format!("invalid number '{}'", cell.trim())))?;
                values.push(v);
            }
            rows += 1;
        }
        if rows != k {
            return Err(err(text.lines().count() + 1, 1, format!("expected {k} rows, found {rows}")));
        }
        Sinogram::new(uniform_angles(k), m, ds, values)
    }
}

fn xi_of(theta_deg: f64) -> Direction {
    Direction::from_angle(theta_deg.to_radians())
}

/// Radon transforms of several fields on one sampling, sharing traversals.
pub fn radon_forward_many(fields: &[&ScalarField], angles_deg: &[f64]) -> Vec<Sinogram> {
    let grid = fields[0].grid();
    let k = fields.len();
    let m = default_offset_count(grid);
    let ds = grid.h();
    let packed: Vec<f64> = (0..grid.len())
        .flat_map(|idx| fields.iter().map(move |f| f.values()[idx]))
        .collect();
    let template = Sinogram::zeros(angles_deg.to_vec(), m, ds);
    let rows: Vec<Vec<f64>> = angles_deg
        .par_iter()
        .map(|&theta| {
            let xi = xi_of(theta);
            let mut row = vec![0.0; m * k];
            let mut buf = vec![0.0; k];
            for j in 0..m {
                line_integral_many(&packed, k, grid, xi, template.offset(j), &mut buf);
                for c in 0..k {
                    row[c * m + j] = buf[c];
                }
            }
            row
        })
        .collect();
    (0..k)
        .map(|c| {
            let mut sg = template.clone();
            for (a, row) in rows.iter().enumerate() {
                sg.row_mut(a).copy_from_slice(&row[c * m..(c + 1) * m]);
            }
            sg
        })
        .collect()
}

pub fn radon_forward(h: &ScalarField, angles_deg: &[f64]) -> Sinogram {
    radon_forward_many(&[h], angles_deg).pop().expect("one field")
}

/// Derivative in `s`: central differences inside, one-sided at the ends.
pub fn sino_sderiv(sg: &Sinogram) -> Result<Sinogram> {
    let m = sg.num_offsets();
    if m < 3 {
        return Err(VltError::Sinogram(format!("s-derivative needs at least 3 offsets, got {m}")));
    }
    let inv = 1.0 / sg.ds();
    let mut out = sg.clone();
    for a in 0..sg.num_angles() {
        let r = sg.row(a);
        let o = out.row_mut(a);
        o[0] = (r[1] - r[0]) * inv;
        o[m - 1] = (r[m - 1] - r[m - 2]) * inv;
        for j in 1..m - 1 {
            o[j] = 0.5 * (r[j + 1] - r[j - 1]) * inv;
        }
    }
    Ok(out)
}

/// Spatial Ram-Lak kernel `h[k]` for spacing `tau`.
fn ramlak(k: isize, tau: f64) -> f64 {
    if k == 0 {
        1.0 / (4.0 * tau * tau)
    } else if k % 2 == 0 {
        0.0
    } else {
        -1.0 / (PI * PI * (k * k) as f64 * tau * tau)
    }
}

/// Ramp-filters each projection by direct convolution with the band-limited
/// kernel.
pub fn ramp_filter(sg: &Sinogram) -> Sinogram {
    let m = sg.num_offsets();
    let tau = sg.ds();
    let kernel: Vec<f64> = (-(m as isize - 1)..m as isize).map(|k| ramlak(k, tau)).collect();
    let mut out = sg.clone();
    out.values
        .par_chunks_mut(m)
        .zip(sg.values.par_chunks(m))
        .for_each(|(o, p)| {
            for (j, oj) in o.iter_mut().enumerate() {
                let mut acc = 0.0;
                // kernel index of lag (j - l) is (j - l) + m - 1
                for (l, pl) in p.iter().enumerate() {
                    acc += kernel[j + m - 1 - l] * pl;
                }
                *oj = tau * acc;
            }
        });
    out
}

/// Filtered backprojection onto `grid`; angles must cover `[0, 180)` uniformly.
pub fn fbp(sg: &Sinogram, grid: Grid) -> Result<ScalarField> {
    let k = sg.num_angles();
    if k == 0 || sg.num_offsets() == 0 {
        return Err(VltError::Sinogram("empty sinogram".into()));
    }
    let q = ramp_filter(sg);
    let m = sg.num_offsets();
    let s0 = sg.offset(0);
    let inv_ds = 1.0 / sg.ds();
    let trig: Vec<(f64, f64)> = sg.angles_deg().iter().map(|t| t.to_radians().sin_cos()).collect();
    let n = grid.n();
    let scale = PI / k as f64;
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let y = grid.y(j);
        for (i, v) in row.iter_mut().enumerate() {
            let x = grid.x(i);
            let mut acc = 0.0;
            for (a, &(sn, cs)) in trig.iter().enumerate() {
                let pos = (x * cs + y * sn - s0) * inv_ds;
                let l = pos.floor();
                let t = pos - l;
                let l = l as isize;
                if l >= 0 && (l as usize) + 1 < m {
                    let r = q.row(a);
                    acc += (1.0 - t) * r[l as usize] + t * r[l as usize + 1];
                }
            }
            *v = scale * acc;
        }
    });
    Ok(ScalarField::from_raw(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms::CutoffSpec;

    #[test]
    fn disc_chords() {
        let n = 128;
        let g = Grid::new(n).unwrap();
        let disc = ScalarField::from_fn(g, |x, y| if x * x + y * y < 0.25 { 1.0 } else { 0.0 });
        let sg = radon_forward(&disc, &[0.0, 33.0, 90.0, 147.5]);
        for a in 0..4 {
            for j in 0..sg.num_offsets() {
                let s: f64 = sg.offset(j);
                let exact = if s.abs() < 0.5 { 2.0 * (0.25 - s * s).sqrt() } else { 0.0 };
                // Pixelized boundary: allow a few pixels of chord error near the rim.
                let tol = if (s.abs() - 0.5).abs() < 4.0 * g.h() { 0.3 } else { 2.0 * g.h() * 2.0 };
                assert!((sg.get(a, j) - exact).abs() <= tol, "a={a} s={s}: {} vs {exact}", sg.get(a, j));
            }
        }
        let z = radon_forward(&ScalarField::zeros(g), &uniform_angles(4));
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mass_is_angle_independent() {
        let g = Grid::new(96).unwrap();
        let c = CutoffSpec::new(0.1, -0.2, 0.4).unwrap();
        let f = ScalarField::from_fn(g, |x, y| c.eval(x, y));
        let sg = radon_forward(&f, &uniform_angles(36));
        let masses: Vec<f64> = (0..36).map(|a| sg.row(a).iter().sum::<f64>() * sg.ds()).collect();
        let mean = masses.iter().sum::<f64>() / 36.0;
        for m in masses {
            assert!((m - mean).abs() <= 0.005 * mean);
        }
        assert!((mean - f.sum() * g.h() * g.h()).abs() < 1e-3 * mean);
    }

    #[test]
    fn derivative_of_linear_rows() {
        let mut sg = Sinogram::zeros(vec![0.0, 90.0], 9, 0.25);
        for a in 0..2 {
            for j in 0..9 {
                sg.row_mut(a)[j] = sg.offset(j);
            }
        }
        let d = sino_sderiv(&sg).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(sino_sderiv(&Sinogram::zeros(vec![0.0], 2, 0.1)).is_err());
    }

    #[test]
    fn smooth_profile_derivative() {
        // f = (1 - rho^2/R^2)^2 on rho < R has R f(s) = 16 w^(5/2) / (15 R^4)
        // with w = R^2 - s^2, so d/ds R f = -(16/3) s w^(3/2) / R^4.
        let r2: f64 = 0.25;
        let g = Grid::new(256).unwrap();
        let f = ScalarField::from_fn(g, |x, y| {
            let q = 1.0 - (x * x + y * y) / r2;
            if q > 0.0 { q * q } else { 0.0 }
        });
        let d = sino_sderiv(&radon_forward(&f, &[20.0])).unwrap();
        let mut worst = 0.0f64;
        for j in 0..d.num_offsets() {
            let s = d.offset(j);
            let w = (r2 - s * s).max(0.0);
            let exact = -16.0 / 3.0 * s * w.powf(1.5) / (r2 * r2);
            worst = worst.max((d.get(0, j) - exact).abs());
        }
        // Peak of |d/ds R f| is about 1.03.
        assert!(worst < 0.01, "max deviation {worst}");
    }

    #[test]
    fn fbp_roundtrip_on_cutoff() {
        let g = Grid::new(160).unwrap();
        let c = CutoffSpec::new(0.0, 0.0, 0.5).unwrap();
        let f = ScalarField::from_fn(g, |x, y| c.eval(x, y));
        let rec = fbp(&radon_forward(&f, &uniform_angles(180)), g).unwrap();
        let err = crate::harness::relative_error_spectral(&f, &rec).unwrap();
        assert!(err <= 5.0, "{err}");
        assert_eq!(
            fbp(&Sinogram::zeros(uniform_angles(10), 11, 0.1), g).unwrap(),
            ScalarField::zeros(g)
        );
        assert!(fbp(&Sinogram::zeros(vec![], 11, 0.1), g).is_err());
    }

    #[test]
    fn fbp_is_linear() {
        let g = Grid::new(32).unwrap();
        let a = radon_forward(&ScalarField::from_fn(g, |x, y| (x * 3.0).sin() * y), &uniform_angles(30));
        let b = radon_forward(&ScalarField::from_fn(g, |x, y| x * x - y), &uniform_angles(30));
        let lhs = fbp(&a.lincomb(2.0, &b, -0.5), g).unwrap();
        let rhs = fbp(&a, g).unwrap().lincomb(2.0, &fbp(&b, g).unwrap(), -0.5);
        assert!((&lhs - &rhs).max_abs() < 1e-10);
    }

    #[test]
    fn rotation_covariance() {
        // Rotating the bump center by 30 degrees shifts the sinogram by 30 angles.
        let g = Grid::new(128).unwrap();
        let (a, b) = (0.3, 0.1);
        let rot = 30f64.to_radians();
        let c1 = CutoffSpec::new(a, b, 0.3).unwrap();
        let c2 = CutoffSpec::new(a * rot.cos() - b * rot.sin(), a * rot.sin() + b * rot.cos(), 0.3).unwrap();
        let s1 = radon_forward(&ScalarField::from_fn(g, |x, y| c1.eval(x, y)), &[10.0]);
        let s2 = radon_forward(&ScalarField::from_fn(g, |x, y| c2.eval(x, y)), &[40.0]);
        let scale = s1.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..s1.num_offsets() {
            assert!((s1.get(0, j) - s2.get(0, j)).abs() < 1e-3 * scale, "j={j}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut sg = Sinogram::zeros(uniform_angles(4), 5, 0.125);
        for (k, v) in sg.values.iter_mut().enumerate() {
            *v = (k as f64).sqrt() - 1.5;
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        sg.write(&p).unwrap();
        assert_eq!(Sinogram::read(&p).unwrap(), sg);
        assert!(Sinogram::parse("angles=2 offsets=2 ds=1\n1,2\n3\n", Path::new("x")).is_err());
    }
}
