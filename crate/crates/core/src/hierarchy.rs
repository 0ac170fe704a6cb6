//! Multi-layer clustering from a single leading tree.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ltree::{split, write_file, LeadingTree, SplitMode};
use crate::peaks::{select_centers, LabelVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub centers: usize,
    pub labels: LabelVector,
}

/// Flat clusterings for ascending center counts, coarsest first.
///
/// Labels are center gamma ranks, so cluster 1 holds the root on every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub layers: Vec<Layer>,
}

/// Splits `tree` at the top-`m` gamma prefix for each count, reusing the cuts
/// of the previous layer.
pub fn build_hierarchy(tree: &LeadingTree, layer_counts: &[usize]) -> Result<Hierarchy> {
    let n = tree.len();
    if layer_counts.is_empty() {
        return Err(Error::Parameter("no layer counts given".into()));
    }
    if let Some(&m) = layer_counts.iter().find(|&&m| m == 0 || m > n) {
        return Err(Error::Parameter(format!(
            "layer count {m} outside [1, {n}]"
        )));
    }
    if layer_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(format!(
            "layer counts {layer_counts:?} are not strictly ascending"
        )));
    }
    let first = select_centers(tree.gamma_order(), layer_counts[0])?;
    let mut forest = split(tree, &first, SplitMode::PrefixFast)?;
    let mut layers = Vec::with_capacity(layer_counts.len());
    for &m in layer_counts {
        forest.refine_to(m)?;
        layers.push(Layer {
            centers: m,
            labels: forest.labels(),
        });
    }
    Ok(Hierarchy { layers })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefinementViolation {
    /// Index of the finer layer of the offending pair.
    pub layer: usize,
    /// Two points sharing a fine cluster but split across coarse ones.
    pub points: (usize, usize),
}

/// `Ok(())` when every layer refines the one before it.
pub fn check_refinement(h: &Hierarchy) -> std::result::Result<(), RefinementViolation> {
    for (k, pair) in h.layers.windows(2).enumerate() {
        if let Some(points) = refines(&pair[0].labels, &pair[1].labels) {
            return Err(RefinementViolation {
                layer: k + 1,
                points,
            });
        }
    }
    Ok(())
}

/// First pair `(i, j)` with `fine[i] == fine[j]` but `coarse[i] != coarse[j]`.
pub fn refines(coarse: &[usize], fine: &[usize]) -> Option<(usize, usize)> {
    let mut first_member: HashMap<usize, usize> = HashMap::new();
    for (j, &f) in fine.iter().enumerate() {
        let i = *first_member.entry(f).or_insert(j);
        if coarse[i] != coarse[j] {
            return Some((i, j));
        }
    }
    None
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index of two labelings of the same points.
///
/// Two labelings that each put everything in one cluster (or each isolate
/// every point) agree perfectly and score 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Parameter(format!(
            "labelings have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(a.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max = (sum_rows + sum_cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Writes `layer_<m>.csv` (`index,label`, 1-based) per layer and a
/// `manifest.txt` of `key: value` lines into `dir`.
pub fn write_hierarchy(
    h: &Hierarchy,
    dir: impl AsRef<Path>,
    manifest: &[(String, String)],
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for layer in &h.layers {
        let mut out = String::from("index,label\n");
        for (i, l) in layer.labels.iter().enumerate() {
            out.push_str(&format!("{},{l}\n", i + 1));
        }
        write_file(
            &dir.join(format!("layer_{}.csv", layer.centers)),
            out.as_bytes(),
        )?;
    }
    let counts: Vec<String> = h.layers.iter().map(|l| l.centers.to_string()).collect();
    let mut text = format!("layers: {}\n", counts.join(","));
    for (k, v) in manifest {
        text.push_str(&format!("{k}: {v}\n"));
    }
    write_file(&dir.join("manifest.txt"), text.as_bytes())
}
