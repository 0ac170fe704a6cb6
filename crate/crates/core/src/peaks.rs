//! Nearest higher-density neighbours, gamma ranking, center selection and
//! the classic single-scan label propagation.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::density::{descending_order, DensityVector, Distances};
use crate::error::{Error, Result};

/// One cluster id per point, in `1..=m`.
pub type LabelVector = Vec<usize>;

/// Everything density-peaks clustering derives from the distances before
/// centers are chosen.
///
/// Fields are only reachable through accessors: a profile built by
/// [`PeakProfile::compute`] always has a single-rooted, acyclic `nn` whose
/// root leads both orderings, which lets the leading tree skip revalidation.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakProfile {
    density: DensityVector,
    delta: Vec<f64>,
    nn: Vec<Option<usize>>,
    gamma: Vec<f64>,
    q: Vec<usize>,
    gamma_order: Vec<usize>,
}

impl PeakProfile {
    pub fn compute<D: Distances + ?Sized>(d: &D, density: DensityVector) -> Result<Self> {
        if density.len() != d.len() {
            return Err(Error::Parameter(format!(
                "{} densities for {} points",
                density.len(),
                d.len()
            )));
        }
        if density.is_empty() {
            return Err(Error::Input("no points".into()));
        }
        let q = crate::density::density_order(&density.rho);
        let (delta, nn) = delta_nn(d, &q)?;
        let gamma = gamma(&density.rho, &delta)?;
        let gamma_order = gamma_order(&gamma);
        if gamma_order[0] != q[0] {
            return Err(Error::Structural(format!(
                "densest point {} does not lead the gamma ranking",
                q[0]
            )));
        }
        Ok(PeakProfile {
            density,
            delta,
            nn,
            gamma,
            q,
            gamma_order,
        })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn density(&self) -> &DensityVector {
        &self.density
    }

    pub fn rho(&self) -> &[f64] {
        &self.density.rho
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Parent pointer of every point; `None` only for the densest point.
    pub fn nn(&self) -> &[Option<usize>] {
        &self.nn
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Density order.
    pub fn q(&self) -> &[usize] {
        &self.q
    }

    pub fn gamma_order(&self) -> &[usize] {
        &self.gamma_order
    }

    pub fn root(&self) -> usize {
        self.q[0]
    }

    /// Writes `index,rho,delta,nn,gamma` with 1-based indices and `-1` for the root's parent.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "index,rho,delta,nn,gamma")?;
            for i in 0..self.len() {
                let parent = self.nn[i].map_or(-1, |p| p as i64 + 1);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i + 1,
                    self.density.rho[i],
                    self.delta[i],
                    parent,
                    self.gamma[i]
                )?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

fn check_permutation(order: &[usize], n: usize, what: &str) -> Result<()> {
    if order.len() != n {
        return Err(Error::Parameter(format!(
            "{what} has {} entries for {n} points",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Parameter(format!("{what} is not a permutation")));
        }
    }
    Ok(())
}

/// Distance to, and index of, the nearest point earlier in the density order.
///
/// Ties go to the earliest position in `q`. The densest point gets its
/// largest distance to any other point and no parent; a lone point gets 0.
pub fn delta_nn<D: Distances + ?Sized>(
    d: &D,
    q: &[usize],
) -> Result<(Vec<f64>, Vec<Option<usize>>)> {
    let n = d.len();
    check_permutation(q, n, "density order")?;
    let mut delta = vec![0.0; n];
    let mut nn = vec![None; n];
    for (pos, &i) in q.iter().enumerate().skip(1) {
        let mut best = f64::INFINITY;
        let mut parent = q[0];
        for &j in &q[..pos] {
            let dist = d.distance(i, j);
            if dist < best {
                best = dist;
                parent = j;
            }
        }
        delta[i] = best;
        nn[i] = Some(parent);
    }
    let root = q[0];
    delta[root] = q[1..]
        .iter()
        .map(|&j| d.distance(root, j))
        .fold(0.0, f64::max);
    Ok((delta, nn))
}

pub fn gamma(rho: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
    if rho.len() != delta.len() {
        return Err(Error::Parameter(format!(
            "{} densities but {} deltas",
            rho.len(),
            delta.len()
        )));
    }
    Ok(rho.iter().zip(delta).map(|(r, d)| r * d).collect())
}

/// Indices by descending gamma, ties by ascending index.
pub fn gamma_order(gamma: &[f64]) -> Vec<usize> {
    descending_order(gamma)
}

/// Distinct point indices in gamma-descending order; label `k + 1` belongs to `centers[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterSet(Vec<usize>);

impl CenterSet {
    pub fn new(centers: Vec<usize>, n: usize) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Parameter("center set is empty".into()));
        }
        let mut seen = HashSet::with_capacity(centers.len());
        for &c in &centers {
            if c >= n {
                return Err(Error::Parameter(format!(
                    "center {c} out of range for {n} points"
                )));
            }
            if !seen.insert(c) {
                return Err(Error::Parameter(format!("center {c} listed twice")));
            }
        }
        Ok(CenterSet(centers))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl std::ops::Deref for CenterSet {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// The top `m` points of the gamma ranking.
pub fn select_centers(gamma_order: &[usize], m: usize) -> Result<CenterSet> {
    let n = gamma_order.len();
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "center count {m} outside [1, {n}]"
        )));
    }
    Ok(CenterSet(gamma_order[..m].to_vec()))
}

/// Labels centers `1..=m`, then walks the density order once and copies each
/// unlabeled point's label from its parent.
pub fn assign_baseline(
    nn: &[Option<usize>],
    q: &[usize],
    centers: &CenterSet,
) -> Result<LabelVector> {
    let n = nn.len();
    if q.len() != n {
        return Err(Error::Parameter(format!(
            "density order has {} entries for {n} points",
            q.len()
        )));
    }
    let mut cl = vec![0usize; n];
    for (k, &c) in centers.iter().enumerate() {
        if c >= n {
            return Err(Error::Parameter(format!(
                "center {c} out of range for {n} points"
            )));
        }
        cl[c] = k + 1;
    }
    for &i in q {
        if cl[i] == 0 {
            match nn[i] {
                Some(p) if cl[p] != 0 => cl[i] = cl[p],
                _ => return Err(Error::IncompleteAssignment { point: i }),
            }
        }
    }
    Ok(cl)
}
