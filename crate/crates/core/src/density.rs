//! Pairwise distances, cutoff-distance estimation and local-density kernels.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A set of `N` points with `A` numeric attributes each, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Input(format!(
                    "row {} has {} attributes, expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(dim, coords, labels)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("points need at least one attribute".into()));
        }
        if coords.is_empty() {
            return Err(Error::Input("dataset has no points".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Input(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite coordinate at point {}, attribute {}",
                pos / dim + 1,
                pos % dim + 1
            )));
        }
        let n = coords.len() / dim;
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Input(format!(
                    "{} labels for {n} points",
                    labels.len()
                )));
            }
        }
        Ok(Dataset {
            dim,
            coords,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Ground-truth class per point, when the source carried one.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Random access to the pairwise distances of `n` objects.
///
/// Implemented by the stored [`CondensedDistanceMatrix`] and, computing
/// Euclidean distances on the fly, by [`Dataset`] itself. The latter keeps
/// memory at O(N) for inputs whose full matrix would not fit.
pub trait Distances {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, i: usize, j: usize) -> f64;
}

impl Distances for Dataset {
    fn len(&self) -> usize {
        Dataset::len(self)
    }

    #[inline]
    fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }
}

/// Upper-triangular pairwise distances, row `i` holding `d(i, j)` for `j > i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CondensedDistanceMatrix {
    pub fn from_condensed(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input(
                "distance matrix needs at least one object".into(),
            ));
        }
        let expected = n * (n - 1) / 2;
        if values.len() != expected {
            return Err(Error::Input(format!(
                "{} condensed entries for {n} objects, expected {expected}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Input(format!(
                "distances must be finite and nonnegative, found {v}"
            )));
        }
        Ok(CondensedDistanceMatrix { n, values })
    }

    /// Builds the condensed form of a full square matrix, which must be
    /// symmetric with a zero diagonal within `1e-9`.
    pub fn from_square(rows: &[Vec<f64>]) -> Result<Self> {
        const TOL: f64 = 1e-9;
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Input(format!(
                "distance matrix row {} has {} columns, expected {n}",
                i + 1,
                row.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row[i].abs() > TOL {
                return Err(Error::Input(format!(
                    "nonzero diagonal entry {} at row {}",
                    row[i],
                    i + 1
                )));
            }
            for j in i + 1..n {
                if (row[j] - rows[j][i]).abs() > TOL || !row[j].is_finite() {
                    return Err(Error::Input(format!(
                        "distance matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let values = rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row[i + 1..].iter().copied())
            .collect();
        Self::from_condensed(n, values)
    }

    /// Reads an `N x N` comma-separated matrix without header.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let mut rows = Vec::new();
        for (lineno, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let row = record
                .iter()
                .map(parse_finite)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|msg| Error::parse(path, lineno + 1, msg))?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::parse(path, 0, "empty distance matrix"));
        }
        Self::from_square(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// `d(i, j)` for any order of the indices; `d(i, i) = 0`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.values[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.values[self.offset(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }
}

impl Distances for CondensedDistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn distance(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

pub fn pairwise_distances(dataset: &Dataset) -> Result<CondensedDistanceMatrix> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "pairwise distances need at least 2 points, got {n}"
        )));
    }
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let a = dataset.point(i);
        values.extend((i + 1..n).map(|j| euclidean(a, dataset.point(j))));
    }
    Ok(CondensedDistanceMatrix { n, values })
}

/// Returns the distance at rank `ceil(percent / 100 * M)` (1-based, clamped
/// to `[1, M]`) among the `M` ascending pairwise distances.
pub fn estimate_dc(d: &CondensedDistanceMatrix, percent: f64) -> Result<f64> {
    if !(percent > 0.0 && percent < 100.0) {
        return Err(Error::Parameter(format!(
            "dc percent must lie in (0, 100), got {percent}"
        )));
    }
    percentile_of(d.values.clone(), percent)
}

pub(crate) fn percentile_of(mut values: Vec<f64>, percent: f64) -> Result<f64> {
    let m = values.len();
    if m == 0 {
        return Err(Error::Parameter(
            "dc estimation needs at least one pair".into(),
        ));
    }
    let rank = ((percent * m as f64) / 100.0).ceil() as usize;
    let rank = rank.clamp(1, m);
    let (_, value, _) = values.select_nth_unstable_by(rank - 1, f64::total_cmp);
    let value = *value;
    if value <= 0.0 {
        return Err(Error::Degenerate(format!(
            "cutoff distance at {percent}% is zero; too many coincident points"
        )));
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Count of neighbours strictly closer than `dc`.
    Cutoff,
    /// Sum of `exp(-(d / dc)^2)` over all other points.
    Gaussian,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Cutoff => "cutoff",
            Kernel::Gaussian => "gaussian",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cutoff" => Ok(Kernel::Cutoff),
            "gaussian" => Ok(Kernel::Gaussian),
            other => Err(Error::Parameter(format!(
                "unknown kernel `{other}`, expected cutoff or gaussian"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    pub rho: Vec<f64>,
    pub kernel: Kernel,
    pub dc: f64,
}

impl DensityVector {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

fn check_dc(dc: f64) -> Result<()> {
    if dc > 0.0 && dc.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "cutoff distance must be positive and finite, got {dc}"
        )))
    }
}

// Both kernels visit each unordered pair once. For any fixed i the terms still
// arrive in ascending j, so the sums equal a plain per-row loop bit for bit.
fn accumulate_pairs<D, F>(d: &D, weight: F) -> Vec<f64>
where
    D: Distances + ?Sized,
    F: Fn(f64) -> f64,
{
    let n = d.len();
    let mut rho = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = weight(d.distance(i, j));
            if w != 0.0 {
                rho[i] += w;
                rho[j] += w;
            }
        }
    }
    rho
}

pub fn rho_cutoff<D: Distances + ?Sized>(d: &D, dc: f64) -> Result<DensityVector> {
    check_dc(dc)?;
    let rho = accumulate_pairs(d, |dist| if dist < dc { 1.0 } else { 0.0 });
    Ok(DensityVector {
        rho,
        kernel: Kernel::Cutoff,
        dc,
    })
}

pub fn rho_gaussian<D: Distances + ?Sized>(d: &D, dc: f64) -> Result<DensityVector> {
    check_dc(dc)?;
    let rho = accumulate_pairs(d, |dist| {
        let r = dist / dc;
        (-(r * r)).exp()
    });
    Ok(DensityVector {
        rho,
        kernel: Kernel::Gaussian,
        dc,
    })
}

pub fn local_density<D: Distances + ?Sized>(
    d: &D,
    kernel: Kernel,
    dc: f64,
) -> Result<DensityVector> {
    match kernel {
        Kernel::Cutoff => rho_cutoff(d, dc),
        Kernel::Gaussian => rho_gaussian(d, dc),
    }
}

/// Point indices by descending density; equal densities keep index order.
pub fn density_order(rho: &[f64]) -> Vec<usize> {
    descending_order(rho)
}

pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort keeps ascending indices inside equal runs.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

pub(crate) fn parse_finite(field: &str) -> std::result::Result<f64, String> {
    let value: f64 = field
        .parse()
        .map_err(|_| format!("`{field}` is not a number"))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{field}` is not a finite number"))
    }
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
            .collect();
        Dataset::new(rows, None).unwrap()
    }

    fn pair(d: f64) -> CondensedDistanceMatrix {
        CondensedDistanceMatrix::from_condensed(2, vec![d]).unwrap()
    }

    #[test]
    fn three_four_five() {
        let ds = Dataset::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]], None).unwrap();
        let d = pairwise_distances(&ds).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn repeated_point_has_zero_distance() {
        let ds = Dataset::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], None).unwrap();
        assert_eq!(pairwise_distances(&ds).unwrap().get(0, 1), 0.0);
    }

    #[test]
    fn condensed_matches_double_loop() {
        let ds = random_dataset(10, 1);
        let d = pairwise_distances(&ds).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let (a, b) = (ds.point(i), ds.point(j));
                let direct = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert_relative_eq!(d.get(i, j), direct, max_relative = 1e-15);
                assert_eq!(d.get(i, j), ds.distance(i, j));
            }
        }
    }

    #[test]
    fn rejects_bad_points() {
        assert!(matches!(
            Dataset::new(vec![vec![0.0, f64::NAN]], None),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            Dataset::new(vec![vec![0.0, 1.0], vec![2.0]], None),
            Err(Error::Input(_))
        ));
        let one = Dataset::new(vec![vec![0.0]], None).unwrap();
        assert!(matches!(pairwise_distances(&one), Err(Error::Parameter(_))));
    }

    #[test]
    fn square_import_checks_symmetry() {
        let ok = vec![
            vec![0.0, 2.0, 3.0],
            vec![2.0, 0.0, 4.0],
            vec![3.0, 4.0, 0.0],
        ];
        let d = CondensedDistanceMatrix::from_square(&ok).unwrap();
        assert_eq!(d.values(), &[2.0, 3.0, 4.0]);
        assert_eq!(d.get(2, 1), 4.0);

        let mut skew = ok.clone();
        skew[2][1] = 4.1;
        assert!(matches!(
            CondensedDistanceMatrix::from_square(&skew),
            Err(Error::Input(_))
        ));
        let mut near = ok;
        near[2][1] = 4.0 + 1e-12;
        assert!(CondensedDistanceMatrix::from_square(&near).is_ok());
    }

    #[test]
    fn dc_rank_rule() {
        assert_eq!(estimate_dc(&pair(5.0), 2.0).unwrap(), 5.0);
        let d =
            CondensedDistanceMatrix::from_condensed(4, vec![5.0, 3.0, 1.0, 4.0, 2.0, 6.0]).unwrap();
        // ascending 1..6, rank ceil(0.4 * 6) = 3
        assert_eq!(estimate_dc(&d, 40.0).unwrap(), 3.0);
        assert!(matches!(estimate_dc(&d, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(estimate_dc(&d, 100.0), Err(Error::Parameter(_))));
        assert!(matches!(
            estimate_dc(&pair(0.0), 2.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn dc_rank_rule_five_values() {
        assert_eq!(
            percentile_of(vec![3.0, 5.0, 1.0, 4.0, 2.0], 40.0).unwrap(),
            2.0
        );
        assert_eq!(
            percentile_of(vec![3.0, 5.0, 1.0, 4.0, 2.0], 0.1).unwrap(),
            1.0
        );
        assert_eq!(
            percentile_of(vec![3.0, 5.0, 1.0, 4.0, 2.0], 99.9).unwrap(),
            5.0
        );
    }

    #[test]
    fn dc_matches_full_sort() {
        let d = pairwise_distances(&random_dataset(60, 9)).unwrap();
        let mut sorted = d.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        for percent in [0.5, 2.0, 13.7, 50.0, 99.0] {
            let rank = (percent / 100.0 * sorted.len() as f64).ceil() as usize;
            assert_eq!(estimate_dc(&d, percent).unwrap(), sorted[rank.max(1) - 1]);
        }
    }

    #[test]
    fn cutoff_kernel_is_strict() {
        assert_eq!(rho_cutoff(&pair(1.0), 2.0).unwrap().rho, vec![1.0, 1.0]);
        assert_eq!(rho_cutoff(&pair(2.0), 2.0).unwrap().rho, vec![0.0, 0.0]);
        assert!(matches!(
            rho_cutoff(&pair(2.0), 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            rho_gaussian(&pair(2.0), -1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn gaussian_kernel_closed_forms() {
        let rho = rho_gaussian(&pair(1.5), 1.5).unwrap().rho;
        assert_relative_eq!(rho[0], (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(rho[0], 0.367879, epsilon = 1e-6);
        assert_eq!(rho_gaussian(&pair(0.0), 1.0).unwrap().rho, vec![1.0, 1.0]);
    }

    #[test]
    fn kernels_match_brute_force() {
        let ds = random_dataset(50, 3);
        let d = pairwise_distances(&ds).unwrap();
        let dc = 1.3;
        let cut = rho_cutoff(&d, dc).unwrap();
        let gauss = rho_gaussian(&d, dc).unwrap();
        for i in 0..50 {
            let count = (0..50).filter(|&j| j != i && d.get(i, j) < dc).count();
            assert_eq!(cut.rho[i], count as f64);
            let sum: f64 = (0..50)
                .filter(|&j| j != i)
                .map(|j| (-(d.get(i, j) / dc).powi(2)).exp())
                .sum();
            assert_relative_eq!(gauss.rho[i], sum, max_relative = 1e-12);
        }
        // The on-the-fly source agrees exactly with the stored matrix.
        assert_eq!(rho_gaussian(&ds, dc).unwrap().rho, gauss.rho);
    }

    #[test]
    fn density_order_examples() {
        assert_eq!(density_order(&[1.0, 3.0, 2.0]), vec![1, 2, 0]);
        assert_eq!(density_order(&[2.0, 2.0, 2.0]), vec![0, 1, 2]);
    }

    #[test]
    fn density_order_reproduces_table_order() {
        // 1-based ordering of the 13-city worked example.
        let ord_rho = [13, 12, 11, 10, 9, 6, 3, 2, 4, 8, 1, 7, 5];
        let mut rho = vec![0.0; 13];
        for (rank, &idx) in ord_rho.iter().enumerate() {
            rho[idx - 1] = (13 - rank) as f64;
        }
        let q: Vec<usize> = density_order(&rho).iter().map(|i| i + 1).collect();
        assert_eq!(q, ord_rho);
    }

    #[test]
    fn kernel_round_trips_through_str() {
        for k in [Kernel::Cutoff, Kernel::Gaussian] {
            assert_eq!(k.to_string().parse::<Kernel>().unwrap(), k);
        }
        assert!("epanechnikov".parse::<Kernel>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn points() -> impl Strategy<Value = Vec<Vec<f64>>> {
            prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 2..40)
        }

        proptest! {
            #[test]
            fn symmetric_with_zero_diagonal(rows in points()) {
                let ds = Dataset::new(rows, None).unwrap();
                let d = pairwise_distances(&ds).unwrap();
                for i in 0..ds.len() {
                    prop_assert_eq!(d.get(i, i), 0.0);
                    for j in 0..ds.len() {
                        prop_assert_eq!(d.get(i, j), d.get(j, i));
                        prop_assert!(d.get(i, j) >= 0.0);
                    }
                }
            }

            #[test]
            fn density_bounds(rows in points(), dc in 0.1f64..8.0) {
                let ds = Dataset::new(rows, None).unwrap();
                let n = ds.len() as f64;
                for &r in &rho_cutoff(&ds, dc).unwrap().rho {
                    prop_assert!(r >= 0.0 && r <= n - 1.0 && r.fract() == 0.0);
                }
                for &r in &rho_gaussian(&ds, dc).unwrap().rho {
                    prop_assert!(r >= 0.0 && r <= n - 1.0 + 1e-9);
                }
            }

            #[test]
            fn gaussian_density_grows_with_points(rows in points(), extra in prop::collection::vec(-10.0f64..10.0, 2), dc in 0.1f64..8.0) {
                let before = rho_gaussian(&Dataset::new(rows.clone(), None).unwrap(), dc).unwrap().rho;
                let mut more = rows;
                more.push(extra);
                let after = rho_gaussian(&Dataset::new(more, None).unwrap(), dc).unwrap().rho;
                for (b, a) in before.iter().zip(&after) {
                    prop_assert!(a >= b);
                }
            }

            #[test]
            fn order_is_sorted_permutation(rho in prop::collection::vec(0u8..6, 1..60)) {
                let rho: Vec<f64> = rho.into_iter().map(f64::from).collect();
                let q = density_order(&rho);
                let mut seen = q.clone();
                seen.sort_unstable();
                prop_assert_eq!(seen, (0..rho.len()).collect::<Vec<_>>());
                for w in q.windows(2) {
                    prop_assert!(rho[w[0]] > rho[w[1]] || (rho[w[0]] == rho[w[1]] && w[0] < w[1]));
                }
            }

            #[test]
            fn dc_monotone_in_percent(rows in points(), a in 0.1f64..99.9, b in 0.1f64..99.9) {
                let d = pairwise_distances(&Dataset::new(rows, None).unwrap()).unwrap();
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                if let (Ok(x), Ok(y)) = (estimate_dc(&d, lo), estimate_dc(&d, hi)) {
                    prop_assert!(x <= y);
                }
            }
        }
    }
}
