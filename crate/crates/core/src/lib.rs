//! Density-peaks clustering built around its leading tree.
//!
//! Each point's nearest denser neighbour is its parent; the resulting tree,
//! with children ordered by descending `gamma = rho * delta`, turns cluster
//! assignment for any gamma-prefix center set into cutting `m - 1` edges.
//!
//! ```
//! use leading_tree::prelude::*;
//!
//! let ds = gen_five_spherical(&SphereParams { n_points: 200, ..Default::default() })?;
//! let d = pairwise_distances(&ds)?;
//! let rho = rho_gaussian(&d, estimate_dc(&d, 2.0)?)?;
//! let profile = PeakProfile::compute(&d, rho)?;
//! let tree = LeadingTree::from_profile(&profile);
//! let layers = build_hierarchy(&tree, &[2, 4, 5])?;
//! assert!(check_refinement(&layers).is_ok());
//! # Ok::<(), leading_tree::Error>(())
//! ```

pub mod bench;
pub mod datasets;
pub mod density;
pub mod error;
pub mod hierarchy;
pub mod ltree;
pub mod peaks;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::datasets::{
        ds1_fixture, gen_five_spherical, gen_five_spiral, load_ecoli, read_points_csv,
        write_points_csv, GeneratorSpec, SphereParams, SpiralParams,
    };
    pub use crate::density::{
        density_order, estimate_dc, local_density, pairwise_distances, rho_cutoff, rho_gaussian,
        CondensedDistanceMatrix, Dataset, DensityVector, Distances, Kernel,
    };
    pub use crate::hierarchy::{adjusted_rand_index, build_hierarchy, check_refinement, Hierarchy};
    pub use crate::ltree::{split, ClusterForest, LeadingTree, SplitMode};
    pub use crate::peaks::{
        assign_baseline, delta_nn, gamma, gamma_order, select_centers, CenterSet, LabelVector,
        PeakProfile,
    };
}
