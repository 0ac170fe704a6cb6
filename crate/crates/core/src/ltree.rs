//! The leading tree: every point hangs off its nearest denser neighbour,
//! and every child list is ordered by descending gamma.
//!
//! Clustering with `m` centers is then a matter of severing the `m - 1`
//! edges that connect non-root centers to their parents. The tree itself is
//! never mutated; a [`ClusterForest`] records the severed edges, so one tree
//! serves any number of layers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::peaks::{CenterSet, LabelVector, PeakProfile};

/// Parent array plus contiguous child lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadingTree {
    parent: Vec<Option<usize>>,
    // children of `i` are `children[child_start[i]..child_start[i + 1]]`
    child_start: Vec<usize>,
    children: Vec<usize>,
    gamma_order: Vec<usize>,
    root: usize,
}

impl LeadingTree {
    /// Validates `nn` and `gamma_order` before building.
    pub fn build(nn: &[Option<usize>], gamma_order: &[usize]) -> Result<Self> {
        let root = validate_parents(nn)?;
        let n = nn.len();
        if gamma_order.len() != n {
            return Err(Error::Structural(format!(
                "gamma order has {} entries for {n} nodes",
                gamma_order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in gamma_order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Structural("gamma order is not a permutation".into()));
            }
        }
        if gamma_order[0] != root {
            return Err(Error::Structural(format!(
                "gamma order starts at {} but the root is {root}",
                gamma_order[0]
            )));
        }
        Ok(Self::assemble(nn, gamma_order, root))
    }

    /// Builds from a computed profile, whose arrays are valid by construction.
    pub fn from_profile(profile: &PeakProfile) -> Self {
        Self::assemble(profile.nn(), profile.gamma_order(), profile.root())
    }

    // Appends every non-root node to its parent's list in gamma order.
    fn assemble(nn: &[Option<usize>], gamma_order: &[usize], root: usize) -> Self {
        let n = nn.len();
        let mut child_start = vec![0usize; n + 1];
        for p in nn.iter().flatten() {
            child_start[p + 1] += 1;
        }
        for i in 0..n {
            child_start[i + 1] += child_start[i];
        }
        let mut cursor = child_start[..n].to_vec();
        let mut children = vec![0usize; n.saturating_sub(1)];
        for &child in &gamma_order[1..] {
            if let Some(p) = nn[child] {
                children[cursor[p]] = child;
                cursor[p] += 1;
            }
        }
        LeadingTree {
            parent: nn.to_vec(),
            child_start,
            children,
            gamma_order: gamma_order.to_vec(),
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Children of `i`, highest gamma first.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[self.child_start[i]..self.child_start[i + 1]]
    }

    pub fn gamma_order(&self) -> &[usize] {
        &self.gamma_order
    }

    /// Position of every node in the gamma order.
    pub fn gamma_ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.len()];
        for (r, &i) in self.gamma_order.iter().enumerate() {
            rank[i] = r;
        }
        rank
    }
}

/// Returns the root if `nn` is a single-rooted, acyclic parent array.
fn validate_parents(nn: &[Option<usize>]) -> Result<usize> {
    let n = nn.len();
    if n == 0 {
        return Err(Error::Structural("empty parent array".into()));
    }
    let mut roots = (0..n).filter(|&i| nn[i].is_none());
    let root = roots
        .next()
        .ok_or_else(|| Error::Structural("parent array has no root".into()))?;
    if let Some(other) = roots.next() {
        return Err(Error::Structural(format!(
            "parent array has several roots ({root}, {other}, ...)"
        )));
    }
    if let Some((i, p)) = nn
        .iter()
        .enumerate()
        .find_map(|(i, p)| p.filter(|&p| p >= n).map(|p| (i, p)))
    {
        return Err(Error::Structural(format!(
            "parent {p} of node {i} out of range"
        )));
    }

    const UNSEEN: u8 = 0;
    const ON_PATH: u8 = 1;
    const DONE: u8 = 2;
    let mut state = vec![UNSEEN; n];
    state[root] = DONE;
    let mut path = Vec::new();
    for start in 0..n {
        let mut node = start;
        while state[node] == UNSEEN {
            state[node] = ON_PATH;
            path.push(node);
            node = nn[node].expect("only the root lacks a parent");
        }
        if state[node] == ON_PATH {
            return Err(Error::Structural(format!(
                "parent array has a cycle through node {node}"
            )));
        }
        for v in path.drain(..) {
            state[v] = DONE;
        }
    }
    Ok(root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitMode {
    /// Cuts the first remaining child of each center's parent. Only valid
    /// for gamma-prefix center sets.
    PrefixFast,
    /// Locates each center in its parent's child list.
    General,
}

/// A leading tree with the edges above every non-root center severed.
#[derive(Debug, Clone)]
pub struct ClusterForest<'t> {
    tree: &'t LeadingTree,
    mode: SplitMode,
    centers: Vec<usize>,
    rank: HashMap<usize, usize>,
    cuts: Vec<(usize, usize)>,
    // prefix mode: how many leading children each parent has lost
    removed: HashMap<usize, usize>,
}

/// Splits `tree` at `centers`; `O(m)` apart from validation of the center set.
pub fn split<'t>(
    tree: &'t LeadingTree,
    centers: &CenterSet,
    mode: SplitMode,
) -> Result<ClusterForest<'t>> {
    if let Some(&c) = centers.iter().find(|&&c| c >= tree.len()) {
        return Err(Error::Parameter(format!(
            "center {c} out of range for {} nodes",
            tree.len()
        )));
    }
    if mode == SplitMode::General && !centers.contains(&tree.root) {
        return Err(Error::Parameter(format!(
            "center set must contain the tree root {}",
            tree.root
        )));
    }
    let mut forest = ClusterForest {
        tree,
        mode,
        centers: Vec::with_capacity(centers.len()),
        rank: HashMap::with_capacity(centers.len()),
        cuts: Vec::with_capacity(centers.len().saturating_sub(1)),
        removed: HashMap::new(),
    };
    forest.add_centers(centers)?;
    Ok(forest)
}

impl<'t> ClusterForest<'t> {
    pub fn tree(&self) -> &'t LeadingTree {
        self.tree
    }

    pub fn mode(&self) -> SplitMode {
        self.mode
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    /// Severed `(parent, center)` edges in the order they were cut.
    pub fn cuts(&self) -> &[(usize, usize)] {
        &self.cuts
    }

    /// Label of `i` if it is a center.
    pub fn center_label(&self, i: usize) -> Option<usize> {
        self.rank.get(&i).copied()
    }

    pub fn component_count(&self) -> usize {
        self.centers.len()
    }

    /// Promotes further centers, continuing the label numbering.
    pub fn add_centers(&mut self, more: &[usize]) -> Result<()> {
        let tree = self.tree;
        if self.mode == SplitMode::PrefixFast {
            let start = self.centers.len();
            let expected = tree.gamma_order.get(start..start + more.len());
            if expected != Some(more) {
                return Err(Error::ModeViolation(format!(
                    "centers {more:?} do not continue the gamma prefix at position {start}"
                )));
            }
        }
        for &c in more {
            if c >= tree.len() {
                return Err(Error::Parameter(format!(
                    "center {c} out of range for {} nodes",
                    tree.len()
                )));
            }
            if self.rank.contains_key(&c) {
                return Err(Error::Parameter(format!("center {c} listed twice")));
            }
            if let Some(parent) = tree.parent[c] {
                self.cut(parent, c)?;
            }
            self.centers.push(c);
            self.rank.insert(c, self.centers.len());
        }
        Ok(())
    }

    /// Extends a prefix forest to the top `m` gamma points.
    pub fn refine_to(&mut self, m: usize) -> Result<()> {
        let have = self.centers.len();
        if m < have || m > self.tree.len() {
            return Err(Error::Parameter(format!(
                "cannot refine {have} centers to {m} on {} nodes",
                self.tree.len()
            )));
        }
        let tree = self.tree;
        self.add_centers(&tree.gamma_order[have..m])
    }

    fn cut(&mut self, parent: usize, center: usize) -> Result<()> {
        let siblings = self.tree.children(parent);
        match self.mode {
            SplitMode::PrefixFast => {
                let first = self.removed.entry(parent).or_insert(0);
                if siblings.get(*first) != Some(&center) {
                    return Err(Error::Structural(format!(
                        "center {center} is not the first remaining child of {parent}"
                    )));
                }
                *first += 1;
            }
            SplitMode::General => {
                if !siblings.contains(&center) {
                    return Err(Error::Structural(format!(
                        "center {center} missing from the child list of {parent}"
                    )));
                }
            }
        }
        self.cuts.push((parent, center));
        Ok(())
    }

    /// Cluster label and jump depth of every node, found by walking each
    /// component down from its center.
    pub fn labels_and_depths(&self) -> (LabelVector, Vec<usize>) {
        let n = self.tree.len();
        let mut labels = vec![0usize; n];
        let mut depth = vec![0usize; n];
        for (k, &c) in self.centers.iter().enumerate() {
            labels[c] = k + 1;
        }
        let mut stack = Vec::new();
        for (k, &c) in self.centers.iter().enumerate() {
            stack.push(c);
            while let Some(u) = stack.pop() {
                for &v in self.tree.children(u) {
                    // pre-labeled children are centers: the edge is cut
                    if labels[v] == 0 {
                        labels[v] = k + 1;
                        depth[v] = depth[u] + 1;
                        stack.push(v);
                    }
                }
            }
        }
        (labels, depth)
    }

    pub fn labels(&self) -> LabelVector {
        self.labels_and_depths().0
    }

    /// Number of parent hops from `i` up to the center of its cluster.
    pub fn jump_depth(&self, i: usize) -> usize {
        let mut node = i;
        let mut hops = 0;
        while !self.rank.contains_key(&node) {
            node = self.tree.parent[node].expect("every component has a center");
            hops += 1;
        }
        hops
    }

    /// Members of cluster `label`, center first, in traversal order.
    pub fn members(&self, label: usize) -> Vec<usize> {
        let Some(&center) = label.checked_sub(1).and_then(|k| self.centers.get(k)) else {
            return Vec::new();
        };
        let mut out = vec![center];
        let mut next = 0;
        while next < out.len() {
            let u = out[next];
            next += 1;
            out.extend(
                self.tree
                    .children(u)
                    .iter()
                    .filter(|v| !self.rank.contains_key(v)),
            );
        }
        out
    }

    /// `index,parent,depth,label`, 1-based, with `-1` as the parent of each center.
    pub fn write_parents_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (labels, depth) = self.labels_and_depths();
        let mut out = String::from("index,parent,depth,label\n");
        for i in 0..self.tree.len() {
            let parent = match self.tree.parent[i] {
                Some(p) if !self.rank.contains_key(&i) => (p + 1) as i64,
                _ => -1,
            };
            let _ = writeln!(out, "{},{parent},{},{}", i + 1, depth[i], labels[i]);
        }
        write_file(path, out.as_bytes())
    }

    /// Graphviz digraph of the forest: cut edges omitted, centers drawn as
    /// double circles, node names 1-based.
    pub fn to_dot(&self) -> String {
        let labels = self.labels();
        let mut out = String::from("digraph leading_forest {\n    node [shape=circle];\n");
        for (i, label) in labels.iter().enumerate() {
            let shape = if self.rank.contains_key(&i) {
                ", shape=doublecircle"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    n{} [label=\"{}\", cluster={label}{shape}];",
                i + 1,
                i + 1
            );
        }
        for u in 0..self.tree.len() {
            for &v in self.tree.children(u) {
                if !self.rank.contains_key(&v) {
                    let _ = writeln!(out, "    n{} -> n{};", u + 1, v + 1);
                }
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn write_dot(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_dot().as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ds1_fixture;
    use crate::peaks::select_centers;

    fn one_based(v: &[usize]) -> Vec<usize> {
        v.iter().map(|i| i + 1).collect()
    }

    fn ds1_tree() -> LeadingTree {
        let fx = ds1_fixture();
        LeadingTree::build(&fx.nn(), &fx.gamma_order()).unwrap()
    }

    #[test]
    fn worked_example_topology() {
        let tree = ds1_tree();
        assert_eq!(tree.root(), 12);
        let expect: [(usize, &[usize]); 5] = [
            (13, &[6, 12, 2]),
            (12, &[11, 3, 1]),
            (6, &[8, 4, 5]),
            (8, &[7]),
            (11, &[10, 9]),
        ];
        for (parent, kids) in expect {
            assert_eq!(one_based(tree.children(parent - 1)), kids);
        }
        let leaves = [1, 2, 3, 4, 5, 7, 9, 10];
        for leaf in leaves {
            assert!(tree.children(leaf - 1).is_empty());
        }
    }

    #[test]
    fn tiny_trees() {
        let single = LeadingTree::build(&[None], &[0]).unwrap();
        assert_eq!(single.root(), 0);
        assert!(single.children(0).is_empty());

        let pair = LeadingTree::build(&[Some(1), None], &[1, 0]).unwrap();
        assert_eq!(pair.children(1), &[0]);
    }

    #[test]
    fn rejects_malformed_parents() {
        let cycle = [None, Some(2), Some(1)];
        assert!(matches!(
            LeadingTree::build(&cycle, &[0, 1, 2]),
            Err(Error::Structural(_))
        ));
        let two_roots = [None, None, Some(0)];
        assert!(matches!(
            LeadingTree::build(&two_roots, &[0, 1, 2]),
            Err(Error::Structural(_))
        ));
        let no_root = [Some(1), Some(0)];
        assert!(LeadingTree::build(&no_root, &[0, 1]).is_err());
        let root_not_first = [None, Some(0)];
        assert!(LeadingTree::build(&root_not_first, &[1, 0]).is_err());
        let dangling = [None, Some(7)];
        assert!(LeadingTree::build(&dangling, &[0, 1]).is_err());
    }

    #[test]
    fn worked_example_split() {
        let tree = ds1_tree();
        let fx = ds1_fixture();
        let centers = CenterSet::new(fx.centers(), 13).unwrap();
        for mode in [SplitMode::PrefixFast, SplitMode::General] {
            let forest = split(&tree, &centers, mode).unwrap();
            assert_eq!(forest.cuts(), &[(12, 5), (11, 10)]);
            let mut groups: Vec<Vec<usize>> = (1..=3)
                .map(|k| {
                    let mut m = one_based(&forest.members(k));
                    m.sort_unstable();
                    m
                })
                .collect();
            groups.sort();
            assert_eq!(
                groups,
                vec![vec![1, 2, 3, 12, 13], vec![4, 5, 6, 7, 8], vec![9, 10, 11]]
            );
            assert_eq!(forest.labels(), fx.cl.to_vec());
        }
    }

    #[test]
    fn worked_example_jumps() {
        let tree = ds1_tree();
        let centers = CenterSet::new(ds1_fixture().centers(), 13).unwrap();
        let forest = split(&tree, &centers, SplitMode::PrefixFast).unwrap();
        assert_eq!(forest.jump_depth(1), 1); // object 2 → 13
        assert_eq!(forest.jump_depth(0), 2); // object 1 → 12 → 13
        assert_eq!(forest.jump_depth(2), 2);
        for &c in forest.centers() {
            assert_eq!(forest.jump_depth(c), 0);
        }
        let (_, depth) = forest.labels_and_depths();
        for (i, &d) in depth.iter().enumerate() {
            assert_eq!(d, forest.jump_depth(i));
        }
    }

    #[test]
    fn root_only_and_all_centers() {
        let tree = ds1_tree();
        let order = tree.gamma_order().to_vec();
        let whole = split(
            &tree,
            &select_centers(&order, 1).unwrap(),
            SplitMode::PrefixFast,
        )
        .unwrap();
        assert!(whole.cuts().is_empty());
        assert_eq!(whole.labels(), vec![1; 13]);

        let all = split(
            &tree,
            &select_centers(&order, 13).unwrap(),
            SplitMode::PrefixFast,
        )
        .unwrap();
        assert_eq!(all.cuts().len(), 12);
        let labels = all.labels();
        for (rank, &c) in order.iter().enumerate() {
            assert_eq!(labels[c], rank + 1);
        }
    }

    #[test]
    fn prefix_mode_rejects_non_prefix() {
        let tree = ds1_tree();
        // {13, 11}: skips 6, the second-highest gamma.
        let centers = CenterSet::new(vec![12, 10], 13).unwrap();
        assert!(matches!(
            split(&tree, &centers, SplitMode::PrefixFast),
            Err(Error::ModeViolation(_))
        ));
        let forest = split(&tree, &centers, SplitMode::General).unwrap();
        assert_eq!(forest.component_count(), 2);
        let rootless = CenterSet::new(vec![5], 13).unwrap();
        assert!(split(&tree, &rootless, SplitMode::General).is_err());
        assert!(split(&tree, &rootless, SplitMode::PrefixFast).is_err());
    }

    #[test]
    fn incremental_refinement_matches_fresh_split() {
        let tree = ds1_tree();
        let order = tree.gamma_order().to_vec();
        let mut forest = split(
            &tree,
            &select_centers(&order, 2).unwrap(),
            SplitMode::PrefixFast,
        )
        .unwrap();
        forest.refine_to(5).unwrap();
        let fresh = split(
            &tree,
            &select_centers(&order, 5).unwrap(),
            SplitMode::PrefixFast,
        )
        .unwrap();
        assert_eq!(forest.labels(), fresh.labels());
        assert_eq!(forest.cuts(), fresh.cuts());
        assert!(forest.refine_to(4).is_err());
    }

    #[test]
    fn parents_csv_and_dot() {
        let tree = ds1_tree();
        let centers = CenterSet::new(ds1_fixture().centers(), 13).unwrap();
        let forest = split(&tree, &centers, SplitMode::General).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("parents.csv");
        forest.write_parents_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,parent,depth,label");
        assert_eq!(lines[1], "1,12,2,1");
        assert_eq!(lines[6], "6,-1,0,2");
        assert_eq!(lines[11], "11,-1,0,3");
        assert_eq!(lines[13], "13,-1,0,1");

        let dot = forest.to_dot();
        assert!(dot.contains("n13 -> n12;"));
        assert!(!dot.contains("n13 -> n6;"));
        assert!(!dot.contains("n12 -> n11;"));
        assert!(dot.contains("n6 [label=\"6\", cluster=2, shape=doublecircle];"));
        assert_eq!(dot.matches("->").count(), 10);
    }
}
