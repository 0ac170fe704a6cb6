//! Synthetic generators, the UCI Ecoli loader, the 13-city worked example
//! and points CSV I/O.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::{csv_error, parse_finite, Dataset};
use crate::error::{Error, Result};
use crate::ltree::write_file;

/// Five spheres sampled on their surfaces and projected onto the x-y plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereParams {
    pub n_points: usize,
    pub seed: u64,
    pub centers: Vec<[f64; 3]>,
    pub radius: f64,
}

impl Default for SphereParams {
    /// 2200 points on five unit spheres whose centers sit on a circle of
    /// radius 10 at 0°, 30°, 150°, 180° and 270°: two close pairs and one
    /// loner.
    fn default() -> Self {
        let centers = [0.0f64, 30.0, 150.0, 180.0, 270.0]
            .iter()
            .map(|deg| {
                let a = deg.to_radians();
                [10.0 * a.cos(), 10.0 * a.sin(), 0.0]
            })
            .collect();
        SphereParams {
            n_points: 2200,
            seed: 0,
            centers,
            radius: 1.0,
        }
    }
}

/// Spiral curves `origin + (-t/8 cos(t + θ), -t/8 sin(t + θ))` with `t`
/// uniform on `t_range`, one per `(origin, θ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiralParams {
    pub n_points: usize,
    pub seed: u64,
    pub thetas: Vec<f64>,
    pub origins: Vec<[f64; 2]>,
    pub t_range: (f64, f64),
}

impl Default for SpiralParams {
    /// 1060 points on five spirals: two pairs 4 apart whose pairs sit 10
    /// apart, plus one spiral about 18 away from both pairs.
    fn default() -> Self {
        SpiralParams {
            n_points: 1060,
            seed: 0,
            thetas: vec![0.0, 0.3, 2.2, 2.5, 4.4],
            origins: vec![
                [0.0, 0.0],
                [4.0, 0.0],
                [0.0, 10.0],
                [4.0, 10.0],
                [20.0, 5.0],
            ],
            t_range: (2.0, 4.0 * PI),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    FiveSpherical(SphereParams),
    FiveSpiral(SpiralParams),
}

impl GeneratorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::FiveSpherical(_) => "5spherical",
            GeneratorSpec::FiveSpiral(_) => "5spiral",
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        match self {
            GeneratorSpec::FiveSpherical(p) => gen_five_spherical(p),
            GeneratorSpec::FiveSpiral(p) => gen_five_spiral(p),
        }
    }

    /// `key: value` pairs describing the generator, for manifests.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = vec![("kind".to_string(), self.kind().to_string())];
        match self {
            GeneratorSpec::FiveSpherical(p) => {
                out.push(("n_points".into(), p.n_points.to_string()));
                out.push(("seed".into(), p.seed.to_string()));
                out.push(("radius".into(), p.radius.to_string()));
                let centers: Vec<String> = p
                    .centers
                    .iter()
                    .map(|c| format!("({} {} {})", c[0], c[1], c[2]))
                    .collect();
                out.push(("centers".into(), centers.join(" ")));
            }
            GeneratorSpec::FiveSpiral(p) => {
                out.push(("n_points".into(), p.n_points.to_string()));
                out.push(("seed".into(), p.seed.to_string()));
                let thetas: Vec<String> = p.thetas.iter().map(f64::to_string).collect();
                out.push(("thetas".into(), thetas.join(",")));
                let origins: Vec<String> = p
                    .origins
                    .iter()
                    .map(|o| format!("({} {})", o[0], o[1]))
                    .collect();
                out.push(("origins".into(), origins.join(" ")));
                out.push(("t_range".into(), format!("{},{}", p.t_range.0, p.t_range.1)));
            }
        }
        out
    }
}

/// Splits `n` as evenly as possible over `groups`, earlier groups taking the remainder.
fn group_sizes(n: usize, groups: usize) -> impl Iterator<Item = usize> {
    (0..groups).map(move |g| n / groups + usize::from(g < n % groups))
}

pub fn gen_five_spherical(p: &SphereParams) -> Result<Dataset> {
    if p.centers.is_empty() || p.n_points == 0 || p.radius.is_nan() || p.radius <= 0.0 {
        return Err(Error::Parameter(
            "sphere generator needs centers, points and a positive radius".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut rows = Vec::with_capacity(p.n_points);
    let mut labels = Vec::with_capacity(p.n_points);
    for (k, count) in group_sizes(p.n_points, p.centers.len()).enumerate() {
        let c = p.centers[k];
        for _ in 0..count {
            // Normalised Gaussian triples are uniform on the sphere.
            let (x, y) = loop {
                let v: [f64; 3] = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if norm > 1e-12 {
                    break (v[0] / norm, v[1] / norm);
                }
            };
            rows.push(vec![c[0] + p.radius * x, c[1] + p.radius * y]);
            labels.push(k + 1);
        }
    }
    Dataset::new(rows, Some(labels))
}

pub fn spiral_point(t: f64, theta: f64) -> [f64; 2] {
    let r = -t / 8.0;
    [r * (t + theta).cos(), r * (t + theta).sin()]
}

pub fn gen_five_spiral(p: &SpiralParams) -> Result<Dataset> {
    let (t0, t1) = p.t_range;
    if p.thetas.is_empty() || p.n_points == 0 || t0.is_nan() || t1.is_nan() || t0 >= t1 {
        return Err(Error::Parameter(
            "spiral generator needs spirals, points and a nonempty t range".into(),
        ));
    }
    if p.origins.len() != p.thetas.len() {
        return Err(Error::Parameter(format!(
            "{} spiral origins for {} start angles",
            p.origins.len(),
            p.thetas.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut rows = Vec::with_capacity(p.n_points);
    let mut labels = Vec::with_capacity(p.n_points);
    for (k, count) in group_sizes(p.n_points, p.thetas.len()).enumerate() {
        for _ in 0..count {
            let t = rng.random_range(t0..t1);
            let [x, y] = spiral_point(t, p.thetas[k]);
            let [ox, oy] = p.origins[k];
            rows.push(vec![ox + x, oy + y]);
            labels.push(k + 1);
        }
    }
    Dataset::new(rows, Some(labels))
}

/// Isotropic Gaussian blobs, `n_points` split evenly over `centers`.
pub fn gen_blobs(
    n_points: usize,
    centers: &[Vec<f64>],
    std_dev: f64,
    seed: u64,
) -> Result<Dataset> {
    if centers.is_empty() || n_points == 0 {
        return Err(Error::Parameter(
            "blob generator needs centers and points".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_points);
    let mut labels = Vec::with_capacity(n_points);
    for (k, count) in group_sizes(n_points, centers.len()).enumerate() {
        for _ in 0..count {
            let row = centers[k]
                .iter()
                .map(|c| c + std_dev * rng.sample::<f64, _>(StandardNormal))
                .collect();
            rows.push(row);
            labels.push(k + 1);
        }
    }
    Dataset::new(rows, Some(labels))
}

/// Reads the UCI Ecoli file: a sequence name, seven attributes and a class
/// per whitespace-separated line. Classes become labels `1, 2, ...` in order
/// of first appearance.
pub fn load_ecoli(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ecoli(&text, path)
}

pub fn parse_ecoli(text: &str, path: &Path) -> Result<Dataset> {
    const ATTRIBUTES: usize = 7;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut classes: HashMap<String, usize> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != ATTRIBUTES + 2 {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!(
                    "expected name, {ATTRIBUTES} attributes and a class, found {} fields",
                    fields.len()
                ),
            ));
        }
        let row = fields[1..=ATTRIBUTES]
            .iter()
            .map(|f| parse_finite(f))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|msg| Error::parse(path, lineno + 1, msg))?;
        let next = classes.len() + 1;
        labels.push(
            *classes
                .entry(fields[ATTRIBUTES + 1].to_string())
                .or_insert(next),
        );
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 0, "no data rows"));
    }
    Dataset::new(rows, Some(labels))
}

/// Reads comma-separated points. With `has_header`, a last column named
/// `label` is taken as integer ground truth.
pub fn read_points_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let labeled = has_header
        && reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .next_back()
            .is_some_and(|h| h.eq_ignore_ascii_case("label"));
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut fields: Vec<&str> = record.iter().collect();
        if labeled {
            let raw = fields.pop().unwrap_or_default();
            let label = raw.parse::<usize>().map_err(|_| {
                Error::parse(path, line, format!("label `{raw}` is not an integer"))
            })?;
            labels.push(label);
        }
        let row = fields
            .iter()
            .map(|f| parse_finite(f))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|msg| Error::parse(path, line, msg))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 0, "no data rows"));
    }
    Dataset::new(rows, labeled.then_some(labels)).map_err(|e| match e {
        Error::Input(msg) => Error::parse(path, 0, msg),
        other => other,
    })
}

/// Writes a header `x1,...,xA[,label]` and one row per point, using the
/// shortest decimal that parses back to the same `f64`.
pub fn write_points_csv(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (1..=dataset.dim()).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    if dataset.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, point) in dataset.points().enumerate() {
        for (k, v) in point.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        if let Some(labels) = dataset.labels() {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    write_file(path.as_ref(), out.as_bytes())
}

/// Writes `key: value` lines.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k}: {v}");
    }
    write_file(path.as_ref(), out.as_bytes())
}

/// The 13-city worked example, 1-based as published; the root's parent is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ds1Fixture {
    pub nneigh: [usize; 13],
    pub ord_rho: [usize; 13],
    pub sort_gamma_ind: [usize; 13],
    pub cl: [usize; 13],
}

pub fn ds1_fixture() -> Ds1Fixture {
    Ds1Fixture {
        nneigh: [12, 13, 12, 6, 6, 13, 8, 6, 11, 11, 12, 13, 0],
        ord_rho: [13, 12, 11, 10, 9, 6, 3, 2, 4, 8, 1, 7, 5],
        sort_gamma_ind: [13, 6, 11, 3, 12, 1, 8, 4, 2, 7, 10, 5, 9],
        cl: [1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 1, 1],
    }
}

impl Ds1Fixture {
    /// 0-based parent array.
    pub fn nn(&self) -> Vec<Option<usize>> {
        self.nneigh.iter().map(|&p| p.checked_sub(1)).collect()
    }

    /// 0-based density order.
    pub fn q(&self) -> Vec<usize> {
        self.ord_rho.iter().map(|i| i - 1).collect()
    }

    /// 0-based gamma order.
    pub fn gamma_order(&self) -> Vec<usize> {
        self.sort_gamma_ind.iter().map(|i| i - 1).collect()
    }

    /// The three centers of the published split, 0-based: cities 13, 6 and 11.
    pub fn centers(&self) -> Vec<usize> {
        self.gamma_order()[..3].to_vec()
    }
}
