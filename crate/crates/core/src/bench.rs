//! Wall-clock timing of the three assignment-related stages and the
//! break-even analysis between them.
//!
//! * `assign` runs the single-scan label propagation over the density order.
//! * `construct` builds the leading tree from precomputed parents.
//! * `split` records the cut edges for a gamma-prefix center set.
//! * `split+labels` additionally walks the forest to produce labels; it is
//!   reported in the summary but not as a report row, since the tree split
//!   itself excludes labeling.
//!
//! Each timed section is single-threaded. Every sample repeats the stage
//! until it spans at least 20 µs, so all sizes are measured the same way;
//! stages whose per-call time is below a microsecond are flagged as low
//! confidence.

use std::fmt::{self, Write as _};
use std::hint::black_box;
use std::path::Path;
use std::time::Instant;

use crate::density::{
    local_density, pairwise_distances, percentile_of, Dataset, Distances, Kernel,
};
use crate::error::{Error, Result};
use crate::ltree::{split, write_file, LeadingTree, SplitMode};
use crate::peaks::{assign_baseline, select_centers, CenterSet, PeakProfile};

pub const DEFAULT_REPEATS: usize = 21;
pub const MIN_REPEATS: usize = 3;
/// Per-call medians below this are flagged.
pub const RESOLUTION_NS: f64 = 1_000.0;
/// Every sample runs for at least this long.
const TARGET_SAMPLE_NS: f64 = 20_000.0;
const WARMUP_CALLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Assign,
    Construct,
    Split,
    SplitLabels,
}

impl Stage {
    pub const REPORTED: [Stage; 3] = [Stage::Assign, Stage::Construct, Stage::Split];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Assign => "assign",
            Stage::Construct => "construct",
            Stage::Split => "split",
            Stage::SplitLabels => "split+labels",
        })
    }
}

/// Everything the stages need, computed ahead of timing.
#[derive(Debug, Clone)]
pub struct StageInputs {
    pub profile: PeakProfile,
    pub tree: LeadingTree,
    pub centers: CenterSet,
}

impl StageInputs {
    pub fn new(profile: PeakProfile, m: usize) -> Result<Self> {
        let centers = select_centers(profile.gamma_order(), m)?;
        let tree = LeadingTree::from_profile(&profile);
        Ok(StageInputs {
            profile,
            tree,
            centers,
        })
    }

    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }

    fn run(&self, stage: Stage) {
        match stage {
            Stage::Assign => {
                let cl = assign_baseline(self.profile.nn(), self.profile.q(), &self.centers);
                black_box(cl.ok());
            }
            Stage::Construct => {
                black_box(LeadingTree::from_profile(black_box(&self.profile)));
            }
            Stage::Split => {
                let forest = split(&self.tree, black_box(&self.centers), SplitMode::PrefixFast);
                black_box(forest.ok());
            }
            Stage::SplitLabels => {
                let forest = split(&self.tree, black_box(&self.centers), SplitMode::PrefixFast);
                black_box(forest.map(|f| f.labels()).ok());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingStats {
    pub median_ns: f64,
    pub min_ns: f64,
    pub repeats: usize,
    /// Calls per sample.
    pub batch: u64,
    /// Per-call time of every sample, in nanoseconds.
    pub samples: Vec<f64>,
}

impl TimingStats {
    pub fn low_confidence(&self) -> bool {
        self.median_ns < RESOLUTION_NS
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn elapsed_ns(start: Instant) -> f64 {
    start.elapsed().as_nanos() as f64
}

/// Times `stage` over `repeats` samples after a short warm-up.
pub fn time_stage(stage: Stage, inputs: &StageInputs, repeats: usize) -> Result<TimingStats> {
    if repeats < MIN_REPEATS {
        return Err(Error::Parameter(format!(
            "at least {MIN_REPEATS} repeats are needed, got {repeats}"
        )));
    }
    let mut single = f64::INFINITY;
    for _ in 0..WARMUP_CALLS {
        let start = Instant::now();
        inputs.run(stage);
        single = single.min(elapsed_ns(start));
    }
    let batch = (TARGET_SAMPLE_NS / single.max(1.0)).ceil().max(1.0) as u64;
    let samples: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..batch {
                inputs.run(stage);
            }
            (elapsed_ns(start) / batch as f64).max(1.0)
        })
        .collect();
    Ok(TimingStats {
        median_ns: median(&samples),
        min_ns: samples.iter().copied().fold(f64::INFINITY, f64::min),
        repeats,
        batch,
        samples,
    })
}

/// Smallest layer count for which building the tree once and splitting per
/// layer beats assigning from scratch per layer, i.e. the least integer
/// `Nl > t_constr / (t_assign - t_split)`. `None` when splitting is no cheaper.
pub fn break_even_layers(t_constr: f64, t_assign: f64, t_split: f64) -> Option<u64> {
    let saving = t_assign - t_split;
    if saving.is_nan() || saving <= 0.0 || !t_constr.is_finite() || t_constr < 0.0 {
        return None;
    }
    let ratio = t_constr / saving;
    if !ratio.is_finite() {
        return None;
    }
    Some(ratio.floor() as u64 + 1)
}

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
}

pub fn fit_linear(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
        slope_se,
    }
}

/// Density peaks of `dataset` without materialising the distance matrix
/// when it would be large. For more than `FULL_MATRIX_LIMIT` points the
/// cutoff distance comes from an evenly strided subsample.
pub fn profile_for(dataset: &Dataset, kernel: Kernel, dc_percent: f64) -> Result<PeakProfile> {
    const FULL_MATRIX_LIMIT: usize = 4_000;
    const DC_SAMPLE: usize = 2_000;
    let n = dataset.len();
    if n <= FULL_MATRIX_LIMIT {
        let d = pairwise_distances(dataset)?;
        let dc = crate::density::estimate_dc(&d, dc_percent)?;
        let rho = local_density(&d, kernel, dc)?;
        return PeakProfile::compute(&d, rho);
    }
    let stride = n.div_ceil(DC_SAMPLE);
    let sample: Vec<usize> = (0..n).step_by(stride).collect();
    let mut values = Vec::with_capacity(sample.len() * sample.len() / 2);
    for (a, &i) in sample.iter().enumerate() {
        for &j in &sample[a + 1..] {
            values.push(dataset.distance(i, j));
        }
    }
    let dc = percentile_of(values, dc_percent)?;
    let rho = local_density(dataset, kernel, dc)?;
    PeakProfile::compute(dataset, rho)
}

/// Eight well-separated Gaussian blobs in the plane.
pub fn benchmark_blobs(n_points: usize, seed: u64) -> Result<Dataset> {
    let centers: Vec<Vec<f64>> = (0..8)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 8.0;
            vec![20.0 * a.cos(), 20.0 * a.sin()]
        })
        .collect();
    crate::datasets::gen_blobs(n_points, &centers, 1.0, seed)
}

#[derive(Debug, Clone)]
pub struct BenchDataset {
    pub name: String,
    pub dataset: Dataset,
    /// Center count used for the assign and split stages.
    pub centers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub stage: Stage,
    pub stats: TimingStats,
    pub break_even: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub kernel: Kernel,
    pub dc: f64,
    pub assign: TimingStats,
    pub construct: TimingStats,
    pub split: TimingStats,
    pub split_labels: TimingStats,
    pub break_even: Option<u64>,
}

impl DatasetSummary {
    pub fn split_faster(&self) -> bool {
        self.split.median_ns < self.assign.median_ns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<DatasetSummary>,
    pub environment: String,
}

pub fn environment_note() -> String {
    format!(
        "os={} arch={} threads=1 optimized={}",
        std::env::consts::OS,
        std::env::consts::ARCH,
        !cfg!(debug_assertions)
    )
}

/// Times the three stages on every dataset at its center count.
pub fn run_benchmark(
    datasets: &[BenchDataset],
    repeats: usize,
    kernel: Kernel,
    dc_percent: f64,
) -> Result<BenchReport> {
    if repeats < MIN_REPEATS {
        return Err(Error::Parameter(format!(
            "at least {MIN_REPEATS} repeats are needed, got {repeats}"
        )));
    }
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for bd in datasets {
        let profile = profile_for(&bd.dataset, kernel, dc_percent)?;
        let dc = profile.density().dc;
        let inputs = StageInputs::new(profile, bd.centers)?;
        let assign = time_stage(Stage::Assign, &inputs, repeats)?;
        let construct = time_stage(Stage::Construct, &inputs, repeats)?;
        let split = time_stage(Stage::Split, &inputs, repeats)?;
        let split_labels = time_stage(Stage::SplitLabels, &inputs, repeats)?;
        let break_even = break_even_layers(construct.median_ns, assign.median_ns, split.median_ns);
        for (stage, stats) in [
            (Stage::Assign, &assign),
            (Stage::Construct, &construct),
            (Stage::Split, &split),
        ] {
            rows.push(BenchRow {
                dataset: bd.name.clone(),
                n: inputs.len(),
                m: bd.centers,
                stage,
                stats: stats.clone(),
                break_even,
            });
        }
        summaries.push(DatasetSummary {
            dataset: bd.name.clone(),
            n: inputs.len(),
            m: bd.centers,
            kernel,
            dc,
            assign,
            construct,
            split,
            split_labels,
            break_even,
        });
    }
    Ok(BenchReport {
        rows,
        summaries,
        environment: environment_note(),
    })
}

impl BenchReport {
    /// `dataset,N,m,stage,median_ns,min_ns,repeats,break_even_Nl`; an empty
    /// last field means splitting never pays off.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,N,m,stage,median_ns,min_ns,repeats,break_even_Nl\n");
        for r in &self.rows {
            let nl = r.break_even.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{:.1},{:.1},{},{}",
                r.dataset,
                r.n,
                r.m,
                r.stage,
                r.stats.median_ns,
                r.stats.min_ns,
                r.stats.repeats,
                nl
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("environment: {}\n", self.environment);
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "\n{} (N={}, m={}, kernel={}, dc={:.6})",
                s.dataset, s.n, s.m, s.kernel, s.dc
            );
            for (stage, t) in [
                (Stage::Assign, &s.assign),
                (Stage::Construct, &s.construct),
                (Stage::Split, &s.split),
                (Stage::SplitLabels, &s.split_labels),
            ] {
                let flag = if t.low_confidence() {
                    format!("  [below clock resolution; {} calls per sample]", t.batch)
                } else {
                    String::new()
                };
                let _ = writeln!(
                    out,
                    "  {:<13} median {:>12.1} ns  min {:>12.1} ns{flag}",
                    stage.to_string(),
                    t.median_ns,
                    t.min_ns
                );
            }
            let _ = writeln!(out, "  split faster than assign: {}", s.split_faster());
            match s.break_even {
                Some(nl) => {
                    let _ = writeln!(out, "  break-even layers: {nl}");
                }
                None => {
                    let _ = writeln!(out, "  break-even layers: none (split not cheaper)");
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_csv().as_bytes())
    }
}
