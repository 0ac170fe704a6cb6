use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leading_tree::bench::{
    benchmark_blobs, run_benchmark, BenchDataset, DEFAULT_REPEATS, MIN_REPEATS,
};
use leading_tree::datasets::write_manifest;
use leading_tree::hierarchy::write_hierarchy;
use leading_tree::prelude::*;
use leading_tree::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_STRUCTURAL: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "ltclus",
    version,
    about = "Density-peaks clustering on a leading tree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic benchmark dataset as CSV with a label column.
    Generate(GenerateArgs),
    /// Cluster a dataset with m centers and write one label per point.
    Cluster(ClusterArgs),
    /// Build nested layers for ascending center counts.
    Hierarchy(HierarchyArgs),
    /// Time assignment, tree construction and splitting.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    #[value(name = "5spherical")]
    FiveSpherical,
    #[value(name = "5spiral")]
    FiveSpiral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Ecoli,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Prefix,
    General,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Defaults to 2200 for 5spherical and 1060 for 5spiral.
    #[arg(long)]
    n_points: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    /// Points file; CSV with an optional trailing `label` column, or UCI Ecoli.
    #[arg(
        long,
        required_unless_present = "distances",
        conflicts_with = "distances"
    )]
    input: Option<PathBuf>,
    /// Square distance matrix CSV used instead of coordinates.
    #[arg(long)]
    distances: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// The CSV input has no header row.
    #[arg(long)]
    no_header: bool,
    #[arg(long, default_value = "gaussian")]
    kernel: Kernel,
    /// Percentile of pairwise distances used as the cutoff distance.
    #[arg(long, default_value_t = 2.0)]
    dc_percent: f64,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of centers, taken in descending gamma order.
    #[arg(long)]
    centers: usize,
    #[arg(long, value_enum, default_value = "prefix")]
    mode: Mode,
    /// Labels CSV (`index,label`).
    #[arg(long)]
    out: PathBuf,
    /// Also write the forest as a Graphviz file.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Also write `index,parent,depth,label`.
    #[arg(long)]
    parents: Option<PathBuf>,
    /// Also write `index,rho,delta,nn,gamma`.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args)]
struct HierarchyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Strictly ascending center counts, e.g. `2,4,8`.
    #[arg(long, value_parser = parse_layers)]
    layers: Layers,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Blob dataset sizes to time, e.g. `1000,4000`.
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 4000])]
    sizes: Vec<usize>,
    /// Centers used on the blob datasets.
    #[arg(long, default_value_t = 8)]
    centers: usize,
    /// Also time the 5spherical and 5spiral datasets at 5 centers.
    #[arg(long)]
    synthetic: bool,
    /// Also time the Ecoli file at 8 centers.
    #[arg(long)]
    ecoli: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REPEATS, value_parser = parse_repeats)]
    repeats: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "cutoff")]
    kernel: Kernel,
    #[arg(long, default_value_t = 2.0)]
    dc_percent: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone)]
struct Layers(Vec<usize>);

fn parse_layers(s: &str) -> Result<Layers, String> {
    let counts = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if counts.is_empty() || counts.contains(&0) {
        return Err("layer counts must be positive".into());
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err("layer counts must be strictly ascending".into());
    }
    Ok(Layers(counts))
}

fn parse_repeats(s: &str) -> Result<usize, String> {
    let r: usize = s.parse().map_err(|e| format!("{e}"))?;
    if r < MIN_REPEATS {
        return Err(format!("at least {MIN_REPEATS} repeats are required"));
    }
    Ok(r)
}

struct Loaded {
    profile: PeakProfile,
    truth: Option<Vec<usize>>,
    source: String,
}

fn load(args: &InputArgs) -> leading_tree::Result<Loaded> {
    if let Some(path) = &args.distances {
        let d = CondensedDistanceMatrix::read_csv(path)?;
        let rho = local_density(&d, args.kernel, estimate_dc(&d, args.dc_percent)?)?;
        return Ok(Loaded {
            profile: PeakProfile::compute(&d, rho)?,
            truth: None,
            source: path.display().to_string(),
        });
    }
    let path = args
        .input
        .as_ref()
        .expect("clap requires --input or --distances");
    let ds = match args.format {
        Format::Csv => read_points_csv(path, !args.no_header)?,
        Format::Ecoli => load_ecoli(path)?,
    };
    let d = pairwise_distances(&ds)?;
    let rho = local_density(&d, args.kernel, estimate_dc(&d, args.dc_percent)?)?;
    Ok(Loaded {
        profile: PeakProfile::compute(&d, rho)?,
        truth: ds.labels().map(<[usize]>::to_vec),
        source: path.display().to_string(),
    })
}

fn input_manifest(args: &InputArgs, loaded: &Loaded) -> Vec<(String, String)> {
    vec![
        ("input".into(), loaded.source.clone()),
        ("n_points".into(), loaded.profile.len().to_string()),
        ("kernel".into(), args.kernel.to_string()),
        ("dc_percent".into(), args.dc_percent.to_string()),
        ("dc".into(), loaded.profile.density().dc.to_string()),
    ]
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.txt");
    out.with_file_name(name)
}

fn write_labels(path: &Path, labels: &[usize]) -> leading_tree::Result<()> {
    let mut text = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        text.push_str(&format!("{},{l}\n", i + 1));
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn generate(args: GenerateArgs) -> leading_tree::Result<()> {
    let spec = match args.kind {
        Kind::FiveSpherical => {
            let mut p = SphereParams {
                seed: args.seed,
                ..Default::default()
            };
            p.n_points = args.n_points.unwrap_or(p.n_points);
            GeneratorSpec::FiveSpherical(p)
        }
        Kind::FiveSpiral => {
            let mut p = SpiralParams {
                seed: args.seed,
                ..Default::default()
            };
            p.n_points = args.n_points.unwrap_or(p.n_points);
            GeneratorSpec::FiveSpiral(p)
        }
    };
    let ds = spec.generate()?;
    write_points_csv(&args.out, &ds)?;
    write_manifest(manifest_path(&args.out), &spec.describe())?;
    println!("wrote {} points to {}", ds.len(), args.out.display());
    Ok(())
}

fn cluster(args: ClusterArgs) -> leading_tree::Result<()> {
    let loaded = load(&args.input)?;
    let p = &loaded.profile;
    let tree = LeadingTree::from_profile(p);
    let centers = select_centers(p.gamma_order(), args.centers)?;
    let mode = match args.mode {
        Mode::Prefix => SplitMode::PrefixFast,
        Mode::General => SplitMode::General,
    };
    let forest = split(&tree, &centers, mode)?;
    let labels = forest.labels();
    write_labels(&args.out, &labels)?;
    if let Some(dot) = &args.dot {
        forest.write_dot(dot)?;
    }
    if let Some(parents) = &args.parents {
        forest.write_parents_csv(parents)?;
    }
    if let Some(profile) = &args.profile {
        p.write_csv(profile)?;
    }
    let mut manifest = input_manifest(&args.input, &loaded);
    manifest.push(("centers".into(), args.centers.to_string()));
    let one_based: Vec<String> = centers.iter().map(|c| (c + 1).to_string()).collect();
    manifest.push(("center_indices".into(), one_based.join(",")));
    println!(
        "N={} m={} dc={:.6} centers={}",
        p.len(),
        args.centers,
        p.density().dc,
        one_based.join(",")
    );
    if let Some(truth) = &loaded.truth {
        let ari = adjusted_rand_index(&labels, truth)?;
        manifest.push(("ari".into(), format!("{ari:.6}")));
        println!("ARI vs labels: {ari:.4}");
    }
    write_manifest(manifest_path(&args.out), &manifest)
}

fn hierarchy(args: HierarchyArgs) -> leading_tree::Result<()> {
    let loaded = load(&args.input)?;
    let tree = LeadingTree::from_profile(&loaded.profile);
    let h = build_hierarchy(&tree, &args.layers.0)?;
    if let Err(v) = check_refinement(&h) {
        return Err(Error::Structural(format!(
            "layer {} does not refine its predecessor at points {} and {}",
            v.layer,
            v.points.0 + 1,
            v.points.1 + 1
        )));
    }
    let mut manifest = input_manifest(&args.input, &loaded);
    if let Some(truth) = &loaded.truth {
        for layer in &h.layers {
            let ari = adjusted_rand_index(&layer.labels, truth)?;
            manifest.push((format!("ari_{}", layer.centers), format!("{ari:.6}")));
        }
    }
    write_hierarchy(&h, &args.out_dir, &manifest)?;
    println!(
        "wrote {} nested layers to {}",
        h.layers.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> leading_tree::Result<()> {
    let mut datasets = Vec::new();
    if args.synthetic {
        datasets.push(BenchDataset {
            name: "5spherical".into(),
            dataset: gen_five_spherical(&SphereParams {
                seed: args.seed,
                ..Default::default()
            })?,
            centers: 5,
        });
        datasets.push(BenchDataset {
            name: "5spiral".into(),
            dataset: gen_five_spiral(&SpiralParams {
                seed: args.seed,
                ..Default::default()
            })?,
            centers: 5,
        });
    }
    if let Some(path) = &args.ecoli {
        datasets.push(BenchDataset {
            name: "ecoli".into(),
            dataset: load_ecoli(path)?,
            centers: 8,
        });
    }
    for &n in &args.sizes {
        datasets.push(BenchDataset {
            name: format!("blobs{n}"),
            dataset: benchmark_blobs(n, args.seed)?,
            centers: args.centers,
        });
    }
    let report = run_benchmark(&datasets, args.repeats, args.kernel, args.dc_percent)?;
    report.write_csv(&args.out)?;
    write_manifest(
        manifest_path(&args.out),
        &[
            ("repeats".into(), args.repeats.to_string()),
            ("seed".into(), args.seed.to_string()),
            ("kernel".into(), args.kernel.to_string()),
            ("dc_percent".into(), args.dc_percent.to_string()),
            ("environment".into(), report.environment.clone()),
        ],
    )?;
    print!("{}", report.summary());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) => EXIT_USAGE,
        Error::Input(_) | Error::Parse { .. } => EXIT_PARSE,
        Error::Degenerate(_)
        | Error::Structural(_)
        | Error::ModeViolation(_)
        | Error::IncompleteAssignment { .. } => EXIT_STRUCTURAL,
        Error::Io { .. } => EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Cluster(a) => cluster(a),
        Command::Hierarchy(a) => hierarchy(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ltclus: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
