//! Exact maximum acyclic induced subgraph with pairwise distinct message
//! labels.
//!
//! The solver is a depth-first branch and bound over nodes in index order,
//! trying "include" before "exclude". Reachability inside the chosen set is
//! kept as bitmasks, so adding a node and testing for a new cycle costs one
//! pass over the chosen nodes. The bound is the chosen size plus the number
//! of still-unused labels that appear among the undecided nodes. Because
//! inclusion is tried first and only strict improvements are kept, the first
//! maximum found is the lexicographically smallest sorted node list.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::digraph::{bits, mask_of, nodes_of, ChoiceDigraph, LabeledGraph, Node, NodeMask};
use crate::error::{Error, Result};

/// Node cap for [`mais_naive`].
pub const NAIVE_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaisWitness {
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    pub size: usize,
    pub topo_order: Vec<usize>,
}

impl MaisWitness {
    pub fn mask(&self) -> NodeMask {
        mask_of(self.nodes.iter().copied())
    }

    pub fn labels(&self, g: &LabeledGraph) -> Vec<usize> {
        self.nodes.iter().map(|&v| g.label(v)).collect()
    }

    /// JSON with `(receiver, message)` pairs in place of node indices.
    pub fn to_json(&self, dg: &ChoiceDigraph) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            size: usize,
            nodes: Vec<&'a Node>,
            topo_order: Vec<&'a Node>,
        }
        let e = Export {
            size: self.size,
            nodes: self.nodes.iter().map(|&v| dg.node(v)).collect(),
            topo_order: self.topo_order.iter().map(|&v| dg.node(v)).collect(),
        };
        serde_json::to_string_pretty(&e).expect("plain data serializes")
    }
}

struct Search<'a> {
    g: &'a LabeledGraph,
    n: usize,
    label_bit: Vec<u64>,
    /// Labels present among nodes `i..n`.
    suffix_labels: Vec<u64>,
    reach: Vec<NodeMask>,
    undo: Vec<(usize, NodeMask)>,
    best_size: usize,
    best_mask: NodeMask,
}

impl<'a> Search<'a> {
    fn new(g: &'a LabeledGraph) -> Self {
        let n = g.node_count();
        let mut ids = BTreeMap::new();
        for &l in g.labels() {
            let next = ids.len();
            ids.entry(l).or_insert(next);
        }
        let label_bit: Vec<u64> = g.labels().iter().map(|l| 1u64 << ids[l]).collect();
        let mut suffix_labels = vec![0u64; n + 1];
        for i in (0..n).rev() {
            suffix_labels[i] = suffix_labels[i + 1] | label_bit[i];
        }
        Search {
            g,
            n,
            label_bit,
            suffix_labels,
            reach: vec![0; n],
            undo: Vec::new(),
            best_size: 0,
            best_mask: 0,
        }
    }

    /// Set of chosen nodes reachable from `v` if it joined, or `None` when
    /// joining would close a cycle.
    fn reach_if_added(&self, v: usize, chosen: NodeMask) -> Option<NodeMask> {
        let out = self.g.out_mask(v);
        if out >> v & 1 == 1 {
            return None;
        }
        let into = self.g.in_mask(v) & chosen;
        let mut reach = 1u64 << v;
        for u in bits(out & chosen) {
            reach |= self.reach[u];
        }
        (reach & into == 0).then_some(reach)
    }

    fn run(&mut self, i: usize, chosen: NodeMask, used: u64, size: usize) {
        if size > self.best_size {
            self.best_size = size;
            self.best_mask = chosen;
        }
        if i == self.n {
            return;
        }
        let bound = size + (self.suffix_labels[i] & !used).count_ones() as usize;
        if bound <= self.best_size {
            return;
        }
        if used & self.label_bit[i] == 0 {
            if let Some(reach_v) = self.reach_if_added(i, chosen) {
                let into = self.g.in_mask(i) & chosen;
                let mark = self.undo.len();
                for u in bits(chosen) {
                    let old = self.reach[u];
                    if u_reaches(old, into, u) {
                        self.undo.push((u, old));
                        self.reach[u] = old | reach_v;
                    }
                }
                self.reach[i] = reach_v;
                self.run(i + 1, chosen | 1 << i, used | self.label_bit[i], size + 1);
                while self.undo.len() > mark {
                    let (u, old) = self.undo.pop().unwrap();
                    self.reach[u] = old;
                }
                self.reach[i] = 0;
            }
        }
        self.run(i + 1, chosen, used, size);
    }
}

/// `u` reaches the new node when it is an in-neighbour or reaches one.
fn u_reaches(reach_u: NodeMask, into: NodeMask, u: usize) -> bool {
    into >> u & 1 == 1 || reach_u & into != 0
}

fn solve(g: &LabeledGraph) -> (usize, NodeMask) {
    let mut s = Search::new(g);
    s.run(0, 0, 0, 0);
    (s.best_size, s.best_mask)
}

/// A maximum witness; among equal sizes, the lexicographically smallest.
pub fn mais(g: &LabeledGraph) -> MaisWitness {
    let (size, mask) = solve(g);
    let topo_order = g
        .topo_order(mask)
        .expect("solver keeps the chosen set acyclic");
    MaisWitness {
        nodes: nodes_of(mask),
        size,
        topo_order,
    }
}

pub fn mais_size(g: &LabeledGraph) -> usize {
    solve(g).0
}

/// Convenience wrapper for choice digraphs.
pub fn mais_of(dg: &ChoiceDigraph) -> MaisWitness {
    mais(dg.graph())
}

/// Reference size by enumerating every node subset.
pub fn mais_naive(g: &LabeledGraph) -> Result<usize> {
    let n = g.node_count();
    if n > NAIVE_CAP {
        return Err(Error::NaiveCap {
            cap: NAIVE_CAP,
            nodes: n,
        });
    }
    let mut best = 0;
    for subset in 0u64..(1u64 << n) {
        let size = subset.count_ones() as usize;
        if size > best && labels_distinct(g, subset) && peel_sinks(g, subset) {
            best = size;
        }
    }
    Ok(best)
}

fn labels_distinct(g: &LabeledGraph, subset: NodeMask) -> bool {
    let mut labels: Vec<usize> = nodes_of(subset).into_iter().map(|v| g.label(v)).collect();
    labels.sort_unstable();
    labels.windows(2).all(|w| w[0] != w[1])
}

/// Acyclic iff repeatedly deleting nodes without out-edges empties the set.
fn peel_sinks(g: &LabeledGraph, subset: NodeMask) -> bool {
    let mut rest = subset;
    loop {
        let sinks = nodes_of(rest)
            .into_iter()
            .filter(|&v| g.out_mask(v) & rest == 0)
            .fold(0u64, |acc, v| acc | 1 << v);
        if sinks == 0 {
            return rest == 0;
        }
        rest &= !sinks;
    }
}

/// Acyclic and pairwise distinct labels; maximality is not checked.
pub fn is_valid_witness(g: &LabeledGraph, nodes: &[usize]) -> bool {
    if nodes.iter().any(|&v| v >= g.node_count()) {
        return false;
    }
    let mask = mask_of(nodes.iter().copied());
    mask.count_ones() as usize == nodes.len() && labels_distinct(g, mask) && g.is_acyclic(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::build_digraph;
    use crate::instance::{enumerate_choices, DecodingChoice, Instance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(labels: &[usize], edges: &[(usize, usize)]) -> LabeledGraph {
        LabeledGraph::new(labels.to_vec(), edges).unwrap()
    }

    /// Lexicographically smallest maximum set by brute force.
    fn naive_witness(g: &LabeledGraph) -> Vec<usize> {
        let n = g.node_count();
        let mut best: Option<Vec<usize>> = None;
        for subset in 0u64..(1u64 << n) {
            if !(labels_distinct(g, subset) && peel_sinks(g, subset)) {
                continue;
            }
            let nodes = nodes_of(subset);
            best = match best {
                None => Some(nodes),
                Some(b) if nodes.len() > b.len() || (nodes.len() == b.len() && nodes < b) => {
                    Some(nodes)
                }
                keep => keep,
            };
        }
        best.unwrap()
    }

    #[test]
    fn edgeless_distinct_labels() {
        let g = graph(&[1, 2, 3, 4], &[]);
        assert_eq!(mais(&g).size, 4);
        assert_eq!(mais_naive(&g).unwrap(), 4);
    }

    #[test]
    fn shared_label() {
        let g = graph(&[7, 7, 7], &[]);
        let w = mais(&g);
        assert_eq!(w.size, 1);
        assert_eq!(w.nodes, vec![0]);
    }

    #[test]
    fn cycles() {
        let i = Instance::new(2, 1, 1, 1).unwrap();
        let d = enumerate_choices(&i, 1).unwrap().choice_at(0);
        let two = build_digraph(&i, &d).unwrap();
        assert_eq!(mais_of(&two).size, 1);
        assert_eq!(mais_naive(two.graph()).unwrap(), 1);
        assert!(!is_valid_witness(two.graph(), &[0, 1]));
        assert!(is_valid_witness(two.graph(), &[1]));

        let i = Instance::new(3, 1, 1, 1).unwrap();
        let d = DecodingChoice::from_pairs(&i, &[(&[1], &[2]), (&[2], &[3]), (&[3], &[1])], false)
            .unwrap();
        let three = build_digraph(&i, &d).unwrap();
        let w = mais_of(&three);
        assert_eq!(w.size, 2);
        assert_eq!(w.nodes, vec![0, 1]);
        assert_eq!(w.topo_order, vec![1, 0]);
        assert_eq!(mais_naive(three.graph()).unwrap(), 2);
    }

    #[test]
    fn empty_graph() {
        let g = graph(&[], &[]);
        assert_eq!(mais_naive(&g).unwrap(), 0);
        assert_eq!(mais(&g).size, 0);
    }

    #[test]
    fn witness_validity() {
        let g = graph(&[1, 1], &[]);
        assert!(!is_valid_witness(&g, &[0, 1]));
        assert!(is_valid_witness(&g, &[0]));
        assert!(!is_valid_witness(&g, &[5]));
        let loopy = graph(&[1, 2], &[(0, 0)]);
        assert!(!is_valid_witness(&loopy, &[0]));
        assert_eq!(mais(&loopy).size, 1);
    }

    #[test]
    fn naive_cap() {
        let g = graph(&(0..21).collect::<Vec<_>>(), &[]);
        assert!(matches!(mais_naive(&g), Err(Error::NaiveCap { .. })));
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(0..=11);
            let label_count = rng.gen_range(1..=n.max(1));
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..label_count)).collect();
            let p = rng.gen_range(0.05..0.6);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|_| rng.gen_bool(p))
                .collect();
            let g = LabeledGraph::new(labels, &edges).unwrap();
            let w = mais(&g);
            assert!(is_valid_witness(&g, &w.nodes));
            assert_eq!(w.size, mais_naive(&g).unwrap());
            assert_eq!(w.nodes, naive_witness(&g));
        }
    }

    #[test]
    fn witness_maximality_spot_check() {
        let i = Instance::new(4, 1, 2, 3).unwrap();
        let space = enumerate_choices(&i, u64::MAX).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let dg = build_digraph(&i, &space.choice_at(rng.gen_range(0..space.count()))).unwrap();
            let w = mais_of(&dg);
            for &v in &w.nodes {
                let rest: Vec<usize> = w.nodes.iter().copied().filter(|&u| u != v).collect();
                assert!(is_valid_witness(dg.graph(), &rest));
            }
            for v in 0..dg.node_count() {
                if w.nodes.contains(&v) {
                    continue;
                }
                let mut more = w.nodes.clone();
                more.push(v);
                more.sort_unstable();
                assert!(!is_valid_witness(dg.graph(), &more));
            }
        }
    }
}
