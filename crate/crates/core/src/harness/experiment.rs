//! End-to-end experiments: phantom, forward data, noise, inversion, errors.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::manifest::{error_key, noise_label, RunManifest, MANIFEST_FILE};
use super::metrics::relative_error_spectral;
use super::noise::add_noise_tagged;
use super::preview::write_pgm;
use crate::calculus::{d2, ddperp, dperp2, perp_sym_deriv, sym_deriv};
use crate::error::{Result, VltError};
use crate::fields::{write_field, Grid, ScalarField, StarGeometry, SymTensorField, VLineGeometry};
use crate::inversion::{
    invert_d2phi, invert_ddperpphi, invert_dg, invert_dperp2phi, invert_dperpg, invert_ll1m, invert_ll1t,
    invert_ltm, invert_star, InversionOptions, StarOptions, POST_MASK_RADIUS,
};
use crate::phantoms::{potential_scalar, potential_vector, PhantomId};
use crate::raytrace::MomentWeight;
use crate::vlt::{star_forward, transform_name, vlt_forward_many, Moment, StarData, TransformKind, STAR_COMPONENTS};

/// Grid size for methods that solve a PDE.
pub const PDE_GRID: usize = 160;
/// Grid size for explicit methods.
pub const EXPLICIT_GRID: usize = 512;

/// How the noise level is interpreted, recorded in every manifest.
pub const NOISE_CONVENTION: &str = "gaussian, sd = percent/100 * rms(transform data), per transform";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    D2Phi,
    DPerp2Phi,
    DdPerpPhi,
    Dg,
    DPerpG,
    Ltm,
    Ll1t,
    Ll1m,
    Star,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::D2Phi,
        Method::DPerp2Phi,
        Method::DdPerpPhi,
        Method::Dg,
        Method::DPerpG,
        Method::Ltm,
        Method::Ll1t,
        Method::Ll1m,
        Method::Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::D2Phi => "d2phi",
            Method::DPerp2Phi => "dperp2phi",
            Method::DdPerpPhi => "ddperpphi",
            Method::Dg => "dg",
            Method::DPerpG => "dperpg",
            Method::Ltm => "ltm",
            Method::Ll1t => "ll1t",
            Method::Ll1m => "ll1m",
            Method::Star => "star",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                VltError::Argument(format!("unknown method {s:?}; expected one of {}", names.join(", ")))
            })
    }

    /// Methods whose inversion goes through a second-order PDE.
    pub fn uses_pde(self) -> bool {
        matches!(self, Method::DdPerpPhi | Method::Dg | Method::DPerpG | Method::Ltm)
    }

    pub fn default_grid(self) -> usize {
        if self.uses_pde() {
            PDE_GRID
        } else {
            EXPLICIT_GRID
        }
    }

    /// Data sources a single-transform method may use; empty for the others.
    pub fn sources(self) -> &'static [TransformKind] {
        use TransformKind::*;
        match self {
            Method::D2Phi => &[Longitudinal, Mixed],
            Method::DPerp2Phi => &[Transverse, Mixed],
            Method::DdPerpPhi => &[Mixed, Longitudinal, Transverse],
            _ => &[],
        }
    }

    /// Transforms the method consumes, given the chosen source.
    pub fn inputs(self, source: Option<TransformKind>) -> Vec<(TransformKind, Moment)> {
        use Moment::*;
        use TransformKind::*;
        match self {
            Method::D2Phi | Method::DPerp2Phi | Method::DdPerpPhi => {
                vec![(source.unwrap_or(self.sources()[0]), Zero)]
            }
            Method::Dg => vec![(Longitudinal, Zero), (Mixed, Zero)],
            Method::DPerpG => vec![(Transverse, Zero), (Mixed, Zero)],
            Method::Ltm => vec![(Longitudinal, Zero), (Transverse, Zero), (Mixed, Zero)],
            Method::Ll1t => vec![(Longitudinal, Zero), (Longitudinal, First), (Transverse, Zero)],
            Method::Ll1m => vec![(Longitudinal, Zero), (Longitudinal, First), (Mixed, Zero)],
            Method::Star => vec![],
        }
    }
}

/// Reads `pi/3`, `pi/4`, `pi/6`, `pi`, `<k>pi/<m>`, `<x>deg`, or radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || VltError::Argument(format!("cannot read angle {s:?}"));
    if let Some(deg) = t.strip_suffix("deg") {
        return deg.trim().parse::<f64>().map(f64::to_radians).map_err(|_| bad());
    }
    if let Some(pos) = t.find("pi") {
        let num = t[..pos].trim().trim_end_matches('*');
        let k = if num.is_empty() { 1.0 } else { num.parse::<f64>().map_err(|_| bad())? };
        let rest = t[pos + 2..].trim();
        let m = match rest.strip_prefix('/') {
            Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        return Ok(k * PI / m);
    }
    t.parse::<f64>().map_err(|_| bad())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub phantom: PhantomId,
    /// Grid size; `None` picks the method's default.
    pub n: Option<usize>,
    /// Polar angle of `u` in radians (ignored by the star method).
    pub angle: f64,
    /// Transform used by single-transform methods; `None` picks the default.
    pub source: Option<TransformKind>,
    pub noise: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Star method: zero the reconstruction outside the mask radius.
    pub star_mask: bool,
    pub inversion: InversionOptions,
    pub moment_weight: MomentWeight,
    pub write_previews: bool,
}

impl ExperimentConfig {
    pub fn new(method: Method, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            method,
            phantom: if method == Method::Star { PhantomId::Letters } else { PhantomId::Smooth },
            n: None,
            angle: PI / 3.0,
            source: None,
            noise: vec![0.0],
            seed: 0,
            out_dir: out_dir.into(),
            star_mask: false,
            inversion: InversionOptions::default(),
            moment_weight: MomentWeight::default(),
            write_previews: true,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.n.unwrap_or_else(|| self.method.default_grid())
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.grid_size())?;
        if let Some(src) = self.source {
            if !self.method.sources().contains(&src) {
                return Err(VltError::Argument(format!(
                    "method {} cannot use the {} transform",
                    self.method.name(),
                    src.letter()
                )));
            }
        }
        if self.noise.is_empty() {
            return Err(VltError::Argument("noise list is empty".into()));
        }
        if let Some(p) = self.noise.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(VltError::Argument(format!("noise percent must be >= 0, got {p}")));
        }
        if self.method != Method::Star {
            VLineGeometry::from_angle(self.angle)?;
        }
        Ok(())
    }

    fn echo(&self, m: &mut RunManifest) {
        m.set("method", self.method.name());
        m.set("phantom", self.phantom.number());
        m.set("n", self.grid_size());
        if self.method == Method::Star {
            m.set("geometry", "star 0,2pi/3,4pi/3 weights 1,1,1");
            m.set("star_mask", if self.star_mask { POST_MASK_RADIUS.to_string() } else { "none".into() });
        } else {
            m.set("angle", format!("{:.17}", self.angle));
            m.set("angle_deg", format!("{:.6}", self.angle.to_degrees()));
        }
        if !self.method.sources().is_empty() {
            let src = self.source.unwrap_or(self.method.sources()[0]);
            m.set("source", src.letter());
        }
        let levels: Vec<String> = self.noise.iter().map(|p| p.to_string()).collect();
        m.set("noise", levels.join(","));
        m.set("seed", self.seed);
        m.set("margin", self.inversion.margin);
        m.set("noise_convention", NOISE_CONVENTION);
    }
}

/// One reconstruction at one noise level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub noise: f64,
    pub reconstruction: Vec<(String, ScalarField)>,
    /// Percent errors per component, in the order of the reference.
    pub errors: Vec<(String, f64)>,
    pub notes: Vec<(String, String)>,
    pub millis: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub reference: Vec<(String, ScalarField)>,
    pub data: Vec<(String, ScalarField)>,
    pub levels: Vec<LevelResult>,
    pub forward_millis: f64,
}

impl Evaluation {
    pub fn error(&self, noise: f64, component: &str) -> Option<f64> {
        let level = self.levels.iter().find(|l| l.noise == noise)?;
        level.errors.iter().find(|(c, _)| c == component).map(|e| e.1)
    }
}

fn named(names: &[&str], fields: Vec<ScalarField>) -> Vec<(String, ScalarField)> {
    names.iter().map(|s| s.to_string()).zip(fields).collect()
}

fn tensor_named(f: SymTensorField) -> Vec<(String, ScalarField)> {
    let (a, b, c) = f.into_parts();
    named(&["f11", "f12", "f22"], vec![a, b, c])
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the pipeline in memory.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Evaluation> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid_size())?;
    let t0 = Instant::now();
    let method = cfg.method;
    let (reference, data) = if method == Method::Star {
        let f = cfg.phantom.build(grid);
        let s = star_forward(&f, &StarGeometry::three_branch());
        let data = named(&STAR_COMPONENTS, vec![s.long_c, s.mixed_c, s.trans_c]);
        (tensor_named(f), data)
    } else {
        let geom = VLineGeometry::from_angle(cfg.angle)?;
        let inputs = method.inputs(cfg.source);
        let (reference, f) = match method {
            Method::D2Phi | Method::DPerp2Phi | Method::DdPerpPhi => {
                let phi = potential_scalar(grid, cfg.phantom);
                let f = match method {
                    Method::D2Phi => d2(&phi),
                    Method::DPerp2Phi => dperp2(&phi),
                    _ => ddperp(&phi),
                };
                (vec![("phi".to_string(), phi)], f)
            }
            Method::Dg | Method::DPerpG => {
                let g = potential_vector(grid, cfg.phantom);
                let f = if method == Method::Dg { sym_deriv(&g) } else { perp_sym_deriv(&g) };
                let (g1, g2) = g.into_parts();
                (named(&["g1", "g2"], vec![g1, g2]), f)
            }
            _ => {
                let f = cfg.phantom.build(grid);
                (tensor_named(f.clone()), f)
            }
        };
        let values = vlt_forward_many(&f, &geom, &inputs, cfg.moment_weight);
        let data = inputs.iter().map(|&(k, m)| transform_name(k, m)).zip(values).collect();
        (reference, data)
    };
    let forward_millis = millis(t0);

    let levels = cfg
        .noise
        .par_iter()
        .map(|&p| run_level(cfg, &reference, &data, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation {
        reference,
        data,
        levels,
        forward_millis,
    })
}

fn run_level(
    cfg: &ExperimentConfig,
    reference: &[(String, ScalarField)],
    data: &[(String, ScalarField)],
    percent: f64,
) -> Result<LevelResult> {
    let t0 = Instant::now();
    let noisy: Vec<ScalarField> = data
        .iter()
        .enumerate()
        .map(|(k, (_, d))| add_noise_tagged(d, percent, cfg.seed, k as u64))
        .collect::<Result<_>>()?;
    let opts = &cfg.inversion;
    let mut notes = Vec::new();
    let reconstruction = match cfg.method {
        Method::Star => {
            let sopts = StarOptions {
                post_mask: cfg.star_mask.then_some(POST_MASK_RADIUS),
                ..StarOptions::default()
            };
            let sd = StarData {
                long_c: noisy[0].clone(),
                mixed_c: noisy[1].clone(),
                trans_c: noisy[2].clone(),
            };
            let res = invert_star(&sd, &StarGeometry::three_branch(), &sopts)?;
            notes.push(("kept_angles".to_string(), res.kept_angles.len().to_string()));
            notes.push(("max_q_residual".to_string(), format!("{:e}", res.max_residual)));
            tensor_named(res.field)
        }
        method => {
            let geom = VLineGeometry::from_angle(cfg.angle)?;
            let src = cfg.source.unwrap_or_else(|| method.sources().first().copied().unwrap_or(TransformKind::Mixed));
            match method {
                Method::D2Phi => named(&["phi"], vec![invert_d2phi(&noisy[0], src, &geom)?]),
                Method::DPerp2Phi => named(&["phi"], vec![invert_dperp2phi(&noisy[0], src, &geom)?]),
                Method::DdPerpPhi => named(&["phi"], vec![invert_ddperpphi(&noisy[0], src, &geom, opts)?]),
                Method::Dg | Method::DPerpG => {
                    let g = if method == Method::Dg {
                        invert_dg(&noisy[0], &noisy[1], &geom, opts)?
                    } else {
                        invert_dperpg(&noisy[0], &noisy[1], &geom, opts)?
                    };
                    let (g1, g2) = g.into_parts();
                    named(&["g1", "g2"], vec![g1, g2])
                }
                Method::Ltm => tensor_named(invert_ltm(&noisy[0], &noisy[1], &noisy[2], &geom, opts)?),
                Method::Ll1t => tensor_named(invert_ll1t(&noisy[0], &noisy[1], &noisy[2], &geom, opts)?),
                Method::Ll1m => tensor_named(invert_ll1m(&noisy[0], &noisy[1], &noisy[2], &geom, opts)?),
                Method::Star => unreachable!("handled above"),
            }
        }
    };
    let errors = reference
        .iter()
        .zip(&reconstruction)
        .map(|((name, orig), (_, rec))| Ok((name.clone(), relative_error_spectral(orig, rec)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelResult {
        noise: percent,
        reconstruction,
        errors,
        notes,
        millis: millis(t0),
    })
}

fn persist_field(
    m: &mut RunManifest,
    dir: &Path,
    key: &str,
    stem: &str,
    h: &ScalarField,
    preview: bool,
) -> Result<()> {
    let csv = format!("{stem}.csv");
    write_field(h, dir.join(&csv))?;
    m.set(format!("file.{key}"), csv);
    if preview {
        let pgm = format!("{stem}.pgm");
        write_pgm(h, dir.join(&pgm))?;
        m.set(format!("preview.{key}"), pgm);
    }
    Ok(())
}

fn persist(cfg: &ExperimentConfig, ev: &Evaluation, m: &mut RunManifest) -> Result<()> {
    let dir = &cfg.out_dir;
    let pv = cfg.write_previews;
    for (name, h) in &ev.reference {
        persist_field(m, dir, &format!("original.{name}"), &format!("original_{name}"), h, pv)?;
    }
    for (name, h) in &ev.data {
        persist_field(m, dir, &format!("data.{name}"), &format!("data_{name}"), h, false)?;
    }
    for level in &ev.levels {
        let label = noise_label(level.noise);
        for (name, h) in &level.reconstruction {
            persist_field(m, dir, &format!("{label}.rec.{name}"), &format!("{label}_rec_{name}"), h, pv)?;
        }
    }
    Ok(())
}

fn record_results(ev: &Evaluation, m: &mut RunManifest) {
    for level in &ev.levels {
        for (name, e) in &level.errors {
            m.set(error_key(level.noise, name), format!("{e:.6}"));
        }
        for (k, v) in &level.notes {
            m.set(format!("info.{}.{k}", noise_label(level.noise)), v);
        }
    }
    m.set("time.forward_ms", format!("{:.1}", ev.forward_millis));
    for level in &ev.levels {
        m.set(format!("time.{}_ms", noise_label(level.noise)), format!("{:.1}", level.millis));
    }
}

/// Runs the pipeline and writes grids, previews and the manifest to
/// `cfg.out_dir`. On failure the manifest records the error, which is then
/// returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let t0 = Instant::now();
    fs::create_dir_all(&cfg.out_dir).map_err(|e| VltError::io(&cfg.out_dir, e))?;
    let mut m = RunManifest::new();
    cfg.echo(&mut m);
    let outcome = evaluate(cfg).and_then(|ev| {
        persist(cfg, &ev, &mut m)?;
        record_results(&ev, &mut m);
        Ok(())
    });
    let path = cfg.out_dir.join(MANIFEST_FILE);
    match outcome {
        Ok(()) => {
            m.set("status", "ok");
            m.set("time.total_ms", format!("{:.1}", millis(t0)));
            m.write(&path)?;
            Ok(m)
        }
        Err(e) => {
            m.set("status", "error");
            m.set("error", e.to_string().replace('\n', " "));
            m.write(&path)?;
            Err(e)
        }
    }
}
