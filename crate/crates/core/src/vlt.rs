//! Forward V-line and star transforms of symmetric 2-tensor fields.

use crate::fields::{Direction, ScalarField, StarGeometry, SymTensorField, VLineGeometry};
use crate::raytrace::{xray_many, MomentWeight};

/// Pointwise `<f, w (.) z> = f11 w1 z1 + f12 (w1 z2 + w2 z1) + f22 w2 z2`.
pub fn project_tensor(f: &SymTensorField, w: Direction, z: Direction) -> ScalarField {
    let (c11, c12, c22) = (w.d1() * z.d1(), w.d1() * z.d2() + w.d2() * z.d1(), w.d2() * z.d2());
    let values = f
        .f11()
        .values()
        .iter()
        .zip(f.f12().values())
        .zip(f.f22().values())
        .map(|((a, b), c)| c11 * a + c12 * b + c22 * c)
        .collect();
    ScalarField::from_raw(f.grid(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// Projection onto `u (.) u`.
    Longitudinal,
    /// Projection onto `u_perp (.) u_perp`.
    Transverse,
    /// Projection onto `u (.) u_perp`.
    Mixed,
}

impl TransformKind {
    /// The pair `(w, z)` the tensor is projected onto for branch direction `d`.
    pub fn projection(self, d: Direction) -> (Direction, Direction) {
        match self {
            TransformKind::Longitudinal => (d, d),
            TransformKind::Transverse => (d.perp(), d.perp()),
            TransformKind::Mixed => (d, d.perp()),
        }
    }

    pub fn letter(self) -> char {
        match self {
            TransformKind::Longitudinal => 'L',
            TransformKind::Transverse => 'T',
            TransformKind::Mixed => 'M',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    Zero,
    First,
}

/// Reads `L`, `T`, `M`, `L1`, `T1`, `M1`.
pub fn parse_transform(s: &str) -> Option<(TransformKind, Moment)> {
    let mut chars = s.chars();
    let kind = match chars.next()? {
        'L' | 'l' => TransformKind::Longitudinal,
        'T' | 't' => TransformKind::Transverse,
        'M' | 'm' => TransformKind::Mixed,
        _ => return None,
    };
    match chars.as_str() {
        "" => Some((kind, Moment::Zero)),
        "1" => Some((kind, Moment::First)),
        _ => None,
    }
}

pub fn transform_name(kind: TransformKind, moment: Moment) -> String {
    match moment {
        Moment::Zero => kind.letter().to_string(),
        Moment::First => format!("{}1", kind.letter()),
    }
}

fn weight_of(moment: Moment, weight: MomentWeight) -> Option<MomentWeight> {
    match moment {
        Moment::Zero => None,
        Moment::First => Some(weight),
    }
}

/// `V h = X_u h + X_v h` (or the first-moment analog).
pub fn vline_scalar(h: &ScalarField, geom: &VLineGeometry, moment: Moment) -> ScalarField {
    vline_scalar_with(h, geom, moment, MomentWeight::default())
}

pub fn vline_scalar_with(h: &ScalarField, geom: &VLineGeometry, moment: Moment, weight: MomentWeight) -> ScalarField {
    let w = weight_of(moment, weight);
    let a = xray_many(&[h], geom.u(), w).pop().expect("one field");
    let b = xray_many(&[h], geom.v(), w).pop().expect("one field");
    &a + &b
}

/// One of the six generalized V-line transforms.
pub fn vlt_forward(f: &SymTensorField, geom: &VLineGeometry, kind: TransformKind, moment: Moment) -> ScalarField {
    vlt_forward_with(f, geom, kind, moment, MomentWeight::default())
}

pub fn vlt_forward_with(
    f: &SymTensorField,
    geom: &VLineGeometry,
    kind: TransformKind,
    moment: Moment,
    weight: MomentWeight,
) -> ScalarField {
    let w = weight_of(moment, weight);
    let branch = |d: Direction| {
        let (a, b) = kind.projection(d);
        xray_many(&[&project_tensor(f, a, b)], d, w).pop().expect("one field")
    };
    &branch(geom.u()) + &branch(geom.v())
}

/// Several transforms of one field, sharing ray traversals per branch.
pub fn vlt_forward_many(
    f: &SymTensorField,
    geom: &VLineGeometry,
    which: &[(TransformKind, Moment)],
    weight: MomentWeight,
) -> Vec<ScalarField> {
    let mut out: Vec<ScalarField> = which.iter().map(|_| ScalarField::zeros(f.grid())).collect();
    for d in [geom.u(), geom.v()] {
        for moment in [Moment::Zero, Moment::First] {
            let slots: Vec<usize> = (0..which.len()).filter(|&k| which[k].1 == moment).collect();
            if slots.is_empty() {
                continue;
            }
            let projections: Vec<ScalarField> = slots
                .iter()
                .map(|&k| {
                    let (a, b) = which[k].0.projection(d);
                    project_tensor(f, a, b)
                })
                .collect();
            let refs: Vec<&ScalarField> = projections.iter().collect();
            for (slot, res) in slots.iter().zip(xray_many(&refs, d, weight_of(moment, weight))) {
                out[*slot] = &out[*slot] + &res;
            }
        }
    }
    out
}

/// The three vertex-wise components of the star transform.
#[derive(Debug, Clone, PartialEq)]
pub struct StarData {
    /// Longitudinal component, from projections onto `gamma (.) gamma`.
    pub long_c: ScalarField,
    /// Mixed component, from projections onto `gamma (.) gamma_perp`.
    pub mixed_c: ScalarField,
    /// Transverse component, from projections onto `gamma_perp (.) gamma_perp`.
    pub trans_c: ScalarField,
}

impl StarData {
    pub fn components(&self) -> [&ScalarField; 3] {
        [&self.long_c, &self.mixed_c, &self.trans_c]
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> StarData {
        StarData {
            long_c: f(&self.long_c),
            mixed_c: f(&self.mixed_c),
            trans_c: f(&self.trans_c),
        }
    }
}

pub const STAR_COMPONENTS: [&str; 3] = ["long", "mixed", "trans"];

pub fn star_forward(f: &SymTensorField, sg: &StarGeometry) -> StarData {
    let grid = f.grid();
    let mut acc = [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)];
    for b in sg.branches() {
        let g = b.direction;
        let p = g.perp();
        let proj = [project_tensor(f, g, g), project_tensor(f, g, p), project_tensor(f, p, p)];
        let rays = xray_many(&[&proj[0], &proj[1], &proj[2]], g, None);
        for (a, r) in acc.iter_mut().zip(&rays) {
            *a = a.lincomb(1.0, r, b.weight);
        }
    }
    let [long_c, mixed_c, trans_c] = acc;
    StarData { long_c, mixed_c, trans_c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::phantoms::phantom1;
    use crate::raytrace::xray;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn identity_tensor(g: Grid) -> SymTensorField {
        SymTensorField::from_parts(ScalarField::constant(g, 1.0), ScalarField::zeros(g), ScalarField::constant(g, 1.0))
    }

    #[test]
    fn projections_of_simple_tensors() {
        let g = Grid::new(8).unwrap();
        let u = Direction::from_angle(0.4);
        let p = project_tensor(&identity_tensor(g), u, u);
        assert!(p.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        // Pins the orientation of u_perp = (-u2, u1).
        let off = SymTensorField::from_parts(ScalarField::zeros(g), ScalarField::constant(g, 1.0), ScalarField::zeros(g));
        let m = project_tensor(&off, u, u.perp());
        let expect = u.d1() * u.d1() - u.d2() * u.d2();
        assert!(m.values().iter().all(|v| (v - expect).abs() < 1e-15));
    }

    proptest! {
        #[test]
        fn projection_matches_matrix_contraction(
            f in prop::array::uniform3(-5.0f64..5.0),
            a in 0.0f64..6.3,
            b in 0.0f64..6.3,
        ) {
            let g = Grid::new(8).unwrap();
            let t = SymTensorField::from_parts(
                ScalarField::constant(g, f[0]), ScalarField::constant(g, f[1]), ScalarField::constant(g, f[2]));
            let (w, z) = (Direction::from_angle(a), Direction::from_angle(b));
            let m = [[f[0], f[1]], [f[1], f[2]]];
            let wv = [w.d1(), w.d2()];
            let zv = [z.d1(), z.d2()];
            let mut oracle = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    oracle += m[i][j] * wv[i] * zv[j];
                }
            }
            let got = project_tensor(&t, w, z).get(3, 3);
            prop_assert!((got - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_tensor_transforms() {
        let g = Grid::new(24).unwrap();
        let geom = VLineGeometry::from_angle(PI / 3.0).unwrap();
        let f = identity_tensor(g);
        let one = ScalarField::constant(g, 1.0);
        let v = vline_scalar(&one, &geom, Moment::Zero);
        let l = vlt_forward(&f, &geom, TransformKind::Longitudinal, Moment::Zero);
        let t = vlt_forward(&f, &geom, TransformKind::Transverse, Moment::Zero);
        let m = vlt_forward(&f, &geom, TransformKind::Mixed, Moment::Zero);
        assert!((&l - &v).max_abs() < 1e-12);
        assert!((&t - &v).max_abs() < 1e-12);
        assert!(m.max_abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetry() {
        let g = Grid::new(32).unwrap();
        let p = phantom1(g);
        // Symmetrize: f11, f22 even in x, f12 odd.
        let mirror = |h: &ScalarField, sign: f64| {
            let n = g.n();
            let vals = (0..g.len())
                .map(|k| {
                    let (i, j) = (k % n, k / n);
                    0.5 * (h.get(i, j) + sign * h.get(n - 1 - i, j))
                })
                .collect();
            ScalarField::from_raw(g, vals)
        };
        let f = SymTensorField::from_parts(mirror(p.f11(), 1.0), mirror(p.f12(), -1.0), mirror(p.f22(), 1.0));
        let geom = VLineGeometry::from_angle(PI / 3.0).unwrap();
        let n = g.n();
        for (kind, sign) in [
            (TransformKind::Longitudinal, 1.0),
            (TransformKind::Transverse, 1.0),
            (TransformKind::Mixed, -1.0),
        ] {
            let out = vlt_forward(&f, &geom, kind, Moment::Zero);
            let scale = out.max_abs();
            for j in 0..n {
                for i in 0..n {
                    let d = out.get(i, j) - sign * out.get(n - 1 - i, j);
                    assert!(d.abs() < 1e-12 * scale.max(1.0), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn isotropic_tensor_has_no_mixed_transform() {
        let g = Grid::new(24).unwrap();
        let p = phantom1(g);
        let f = SymTensorField::from_parts(p.f11().clone(), ScalarField::zeros(g), p.f11().clone());
        let geom = VLineGeometry::from_angle(PI / 6.0).unwrap();
        assert!(vlt_forward(&f, &geom, TransformKind::Mixed, Moment::First).max_abs() < 1e-14);
    }

    #[test]
    fn batched_transforms_agree() {
        let g = Grid::new(20).unwrap();
        let f = phantom1(g);
        let geom = VLineGeometry::from_angle(PI / 3.0).unwrap();
        let which = [
            (TransformKind::Longitudinal, Moment::Zero),
            (TransformKind::Mixed, Moment::First),
            (TransformKind::Transverse, Moment::Zero),
        ];
        let batch = vlt_forward_many(&f, &geom, &which, MomentWeight::default());
        for (k, &(kind, mom)) in which.iter().enumerate() {
            let single = vlt_forward(&f, &geom, kind, mom);
            assert!((&batch[k] - &single).max_abs() < 1e-13);
        }
    }

    #[test]
    fn single_branch_star_is_plain_xray() {
        let g = Grid::new(16).unwrap();
        let f = phantom1(g);
        let sg = StarGeometry::from_angles(&[0.7]).unwrap();
        let s = star_forward(&f, &sg);
        let d = Direction::from_angle(0.7);
        assert_eq!(s.long_c, xray(&project_tensor(&f, d, d), d));
        assert_eq!(s.mixed_c, xray(&project_tensor(&f, d, d.perp()), d));
        assert_eq!(s.trans_c, xray(&project_tensor(&f, d.perp(), d.perp()), d));
        let z = star_forward(&SymTensorField::zeros(g), &StarGeometry::three_branch());
        assert!(z.components().iter().all(|c| c.max_abs() == 0.0));
    }

    #[test]
    fn names_round_trip() {
        for kind in [TransformKind::Longitudinal, TransformKind::Transverse, TransformKind::Mixed] {
            for m in [Moment::Zero, Moment::First] {
                assert_eq!(parse_transform(&transform_name(kind, m)), Some((kind, m)));
            }
        }
        assert_eq!(parse_transform("X"), None);
        assert_eq!(parse_transform("L2"), None);
    }
}
