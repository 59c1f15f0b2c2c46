//! The digraph of a decoding choice and the layer structure of its acyclic
//! induced subgraphs.
//!
//! Each receiver `r` contributes one node `(r, j)` per message `j` it is
//! assigned. There is an edge `(r, j) -> (r', j')` exactly when `r` holds
//! `j'`. Node subsets are `u64` bitmasks over node indices, so graphs are
//! limited to 64 nodes.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{validate_choice, DecodingChoice, Instance, ReceiverId};

pub const MAX_NODES: usize = 64;

/// Node set as a bitmask over node indices.
pub type NodeMask = u64;

pub fn mask_of(nodes: impl IntoIterator<Item = usize>) -> NodeMask {
    nodes.into_iter().fold(0, |acc, v| acc | 1 << v)
}

pub fn nodes_of(mask: NodeMask) -> Vec<usize> {
    bits(mask).collect()
}

/// Set bit positions of `mask`, ascending.
pub fn bits(mask: NodeMask) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        (rest != 0).then(|| {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            v
        })
    })
}

/// A digraph on at most 64 nodes where every node carries a message label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<usize>,
    out: Vec<NodeMask>,
    inn: Vec<NodeMask>,
}

impl LabeledGraph {
    pub fn new(labels: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if n > MAX_NODES {
            return Err(Error::TooManyNodes(n));
        }
        let mut out = vec![0; n];
        let mut inn = vec![0; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownNode(a.max(b)));
            }
            out[a] |= 1 << b;
            inn[b] |= 1 << a;
        }
        Ok(LabeledGraph { labels, out, inn })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn all_nodes(&self) -> NodeMask {
        if self.labels.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.labels.len()) - 1
        }
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn out_mask(&self, v: usize) -> NodeMask {
        self.out[v]
    }

    pub fn in_mask(&self, v: usize) -> NodeMask {
        self.inn[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out[a] >> b & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|m| m.count_ones() as usize).sum()
    }

    /// Topological order of the induced subgraph (Kahn, smallest index first),
    /// or `None` if it has a cycle.
    pub fn topo_order(&self, subset: NodeMask) -> Option<Vec<usize>> {
        let mut indeg: Vec<u32> = (0..self.node_count())
            .map(|v| (self.inn[v] & subset).count_ones())
            .collect();
        let mut ready: BTreeSet<usize> = nodes_of(subset)
            .into_iter()
            .filter(|&v| indeg[v] == 0)
            .collect();
        let mut order = Vec::with_capacity(subset.count_ones() as usize);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for w in nodes_of(self.out[v] & subset) {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == subset.count_ones() as usize).then_some(order)
    }

    pub fn is_acyclic(&self, subset: NodeMask) -> bool {
        self.topo_order(subset).is_some()
    }

    /// Longest-path layering of an acyclic induced subgraph: sources first,
    /// then each node one layer past its deepest in-neighbour.
    pub fn layering(&self, subset: NodeMask) -> Result<Layering> {
        let order = self.topo_order(subset).ok_or(Error::Cyclic)?;
        let mut depth = vec![0usize; self.node_count()];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            let d = nodes_of(self.inn[v] & subset)
                .into_iter()
                .map(|u| depth[u] + 1)
                .max()
                .unwrap_or(0);
            depth[v] = d;
            if layers.len() <= d {
                layers.resize(d + 1, Vec::new());
            }
            layers[d].push(v);
        }
        for layer in &mut layers {
            layer.sort_unstable();
        }
        Ok(Layering { layers })
    }
}

/// Ordered partition of a node subset into layers `L1, L2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Layering {
    pub layers: Vec<Vec<usize>>,
}

impl Layering {
    pub fn subset(&self) -> NodeMask {
        mask_of(self.layers.iter().flatten().copied())
    }

    pub fn flatten(&self) -> Vec<usize> {
        self.layers.iter().flatten().copied().collect()
    }

    /// Layer index (0-based) of every node in the subset.
    fn layer_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut idx = vec![None; n];
        for (i, layer) in self.layers.iter().enumerate() {
            for &v in layer {
                idx[v] = Some(i);
            }
        }
        idx
    }
}

/// A node `(receiver, message)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Node {
    pub receiver: ReceiverId,
    pub message: usize,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.receiver, self.message)
    }
}

#[derive(Clone, Debug)]
pub struct ChoiceDigraph {
    instance: Instance,
    choice: DecodingChoice,
    nodes: Vec<Node>,
    graph: LabeledGraph,
}

pub fn build_digraph(inst: &Instance, d: &DecodingChoice) -> Result<ChoiceDigraph> {
    validate_choice(inst, d).map_err(|v| Error::InvalidChoice(v.to_string()))?;
    let nodes: Vec<Node> = d
        .assignments()
        .iter()
        .flat_map(|(r, msgs)| {
            msgs.iter().map(move |&j| Node {
                receiver: r.clone(),
                message: j,
            })
        })
        .collect();
    if nodes.len() > MAX_NODES {
        return Err(Error::TooManyNodes(nodes.len()));
    }
    let mut edges = Vec::new();
    for (a, from) in nodes.iter().enumerate() {
        for (b, to) in nodes.iter().enumerate() {
            if inst.holds(&from.receiver, to.message) {
                edges.push((a, b));
            }
        }
    }
    let labels = nodes.iter().map(|n| n.message).collect();
    Ok(ChoiceDigraph {
        instance: *inst,
        choice: d.clone(),
        nodes,
        graph: LabeledGraph::new(labels, &edges)?,
    })
}

impl ChoiceDigraph {
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn choice(&self) -> &DecodingChoice {
        &self.choice
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn index_of(&self, receiver: &ReceiverId, message: usize) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| &n.receiver == receiver && n.message == message)
    }

    pub fn layering(&self, subset: NodeMask) -> Result<Layering> {
        self.graph.layering(subset)
    }

    /// Graphviz rendering; with a layering, only its nodes are drawn and each
    /// layer shares a rank.
    pub fn to_dot(&self, layering: Option<&Layering>) -> String {
        let subset = layering.map_or(self.graph.all_nodes(), Layering::subset);
        let id = |v: usize| {
            let n = &self.nodes[v];
            let groups: Vec<String> = n.receiver.groups().iter().map(|x| x.to_string()).collect();
            format!("\"r{}_m{}\"", groups.join("-"), n.message)
        };
        let mut s = String::from("digraph G {\n  rankdir=TB;\n");
        for v in nodes_of(subset) {
            let n = &self.nodes[v];
            let _ = writeln!(
                s,
                "  {} [label=\"({} | {})\"];",
                id(v),
                n.receiver,
                n.message
            );
        }
        for a in nodes_of(subset) {
            for b in nodes_of(self.graph.out_mask(a) & subset) {
                let _ = writeln!(s, "  {} -> {};", id(a), id(b));
            }
        }
        if let Some(layering) = layering {
            for (i, layer) in layering.layers.iter().enumerate() {
                let members: Vec<String> = layer.iter().map(|&v| id(v)).collect();
                let _ = writeln!(
                    s,
                    "  {{ rank=same; /* L{} */ {} }}",
                    i + 1,
                    members.join("; ")
                );
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Check {
    Pass,
    Fail { witness: String },
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }

    fn from_witness(w: Option<String>) -> Check {
        match w {
            None => Check::Pass,
            Some(witness) => Check::Fail { witness },
        }
    }
}

/// Outcome of the structural checks on a layered subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    /// Edges only run to later layers.
    pub p1: Check,
    /// No receiver in layer `k` holds a message labelled in layer `i <= k`.
    pub p2: Check,
    /// Equal receiver labels, equal out-neighbourhoods.
    pub p3: Check,
    /// Same-group message labels, equal in-neighbourhoods.
    pub p4: Check,
    /// A group is partially present in at most one layer.
    pub p5: Check,
    /// Sinks hold none of the subgraph's message labels.
    pub p6: Check,
    pub last_layer_sinks: Check,
    pub no_intra_layer_edges: Check,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.passed())
    }

    pub fn checks(&self) -> [(&'static str, &Check); 8] {
        [
            ("P1", &self.p1),
            ("P2", &self.p2),
            ("P3", &self.p3),
            ("P4", &self.p4),
            ("P5", &self.p5),
            ("P6", &self.p6),
            ("last-layer-sinks", &self.last_layer_sinks),
            ("no-intra-layer-edges", &self.no_intra_layer_edges),
        ]
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks()
            .iter()
            .filter_map(|(name, c)| match c {
                Check::Pass => None,
                Check::Fail { witness } => Some(format!("{name}: {witness}")),
            })
            .collect()
    }
}

/// Evaluates each property literally on the given layering. The layering is
/// taken as given, so a corrupted one shows up as failures.
pub fn check_properties(dg: &ChoiceDigraph, layering: &Layering) -> PropertyReport {
    let inst = dg.instance();
    let g = dg.graph();
    let subset = layering.subset();
    let members = nodes_of(subset);
    let layer = layering.layer_index(dg.node_count());
    let node = |v: usize| dg.node(v).to_string();

    let p1 = members.iter().find_map(|&a| {
        nodes_of(g.out_mask(a) & subset)
            .into_iter()
            .find(|&b| layer[b] <= layer[a])
            .map(|b| {
                format!(
                    "edge {} -> {} does not move to a later layer",
                    node(a),
                    node(b)
                )
            })
    });

    let p2 = members.iter().find_map(|&a| {
        members.iter().find_map(|&b| {
            let (na, nb) = (dg.node(a), dg.node(b));
            (layer[b] >= layer[a] && inst.holds(&nb.receiver, na.message)).then(|| {
                format!(
                    "receiver of {} (layer {}) holds message of {} (layer {})",
                    node(b),
                    layer[b].unwrap() + 1,
                    node(a),
                    layer[a].unwrap() + 1
                )
            })
        })
    });

    let p3 = pairwise(&members, |a, b| {
        (dg.node(a).receiver == dg.node(b).receiver
            && g.out_mask(a) & subset != g.out_mask(b) & subset)
            .then(|| format!("{} and {} differ in out-neighbourhood", node(a), node(b)))
    });

    let group = |v: usize| inst.group_of(dg.node(v).message).expect("valid label");
    let p4 = pairwise(&members, |a, b| {
        (group(a) == group(b) && g.in_mask(a) & subset != g.in_mask(b) & subset)
            .then(|| format!("{} and {} differ in in-neighbourhood", node(a), node(b)))
    });

    let p5 = (1..=inst.m()).find_map(|grp| {
        let partial: Vec<usize> = layering
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| {
                group_presence(inst, l.iter().map(|&v| dg.node(v).message)).tags[grp - 1]
                    == GroupPresence::PartiallyPresent
            })
            .map(|(i, _)| i + 1)
            .collect();
        (partial.len() > 1).then(|| format!("group {grp} partially present in layers {partial:?}"))
    });

    let sinks: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&v| g.out_mask(v) & subset == 0)
        .collect();
    let p6 = sinks.iter().find_map(|&sink| {
        members
            .iter()
            .find(|&&v| inst.holds(&dg.node(sink).receiver, dg.node(v).message))
            .map(|&v| format!("sink {} holds message label of {}", node(sink), node(v)))
    });

    let last_layer_sinks = layering.layers.last().and_then(|l| {
        l.iter()
            .find(|&&v| g.out_mask(v) & subset != 0)
            .map(|&v| format!("{} in the last layer has an out-edge", node(v)))
    });

    let no_intra = layering.layers.iter().find_map(|l| {
        let lm = mask_of(l.iter().copied());
        l.iter()
            .find(|&&v| g.out_mask(v) & lm != 0)
            .map(|&v| format!("{} has an edge inside its own layer", node(v)))
    });

    PropertyReport {
        p1: Check::from_witness(p1),
        p2: Check::from_witness(p2),
        p3: Check::from_witness(p3),
        p4: Check::from_witness(p4),
        p5: Check::from_witness(p5),
        p6: Check::from_witness(p6),
        last_layer_sinks: Check::from_witness(last_layer_sinks),
        no_intra_layer_edges: Check::from_witness(no_intra),
    }
}

fn pairwise(members: &[usize], f: impl Fn(usize, usize) -> Option<String>) -> Option<String> {
    members
        .iter()
        .enumerate()
        .find_map(|(i, &a)| members[i + 1..].iter().find_map(|&b| f(a, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupPresence {
    FullyPresent,
    PartiallyPresent,
    Absent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresenceReport {
    /// Entry `i` describes group `i + 1`.
    pub tags: Vec<GroupPresence>,
    /// The groups whose union is exactly the label set, if one exists.
    pub perfectly_covered_by: Option<Vec<usize>>,
}

impl PresenceReport {
    pub fn count(&self, tag: GroupPresence) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }
}

/// Classify every group against a set of message labels (a layer or a whole
/// subgraph).
pub fn group_presence(inst: &Instance, labels: impl IntoIterator<Item = usize>) -> PresenceReport {
    let labels: BTreeSet<usize> = labels.into_iter().collect();
    let tags: Vec<GroupPresence> = (1..=inst.m())
        .map(|grp| {
            let present = inst
                .group_messages(grp)
                .filter(|j| labels.contains(j))
                .count();
            match present {
                0 => GroupPresence::Absent,
                p if p == inst.g() => GroupPresence::FullyPresent,
                _ => GroupPresence::PartiallyPresent,
            }
        })
        .collect();
    let perfectly_covered_by = (!tags.contains(&GroupPresence::PartiallyPresent)).then(|| {
        tags.iter()
            .enumerate()
            .filter(|(_, &t)| t == GroupPresence::FullyPresent)
            .map(|(i, _)| i + 1)
            .collect()
    });
    PresenceReport {
        tags,
        perfectly_covered_by,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::enumerate_choices;

    fn inst(m: usize, s: usize, g: usize, t: usize) -> Instance {
        Instance::new(m, s, g, t).unwrap()
    }

    fn three_cycle() -> ChoiceDigraph {
        let i = inst(3, 1, 1, 1);
        let d = DecodingChoice::from_pairs(&i, &[(&[1], &[2]), (&[2], &[3]), (&[3], &[1])], false)
            .unwrap();
        build_digraph(&i, &d).unwrap()
    }

    #[test]
    fn two_cycle() {
        let i = inst(2, 1, 1, 1);
        let d = enumerate_choices(&i, 10).unwrap().choice_at(0);
        let dg = build_digraph(&i, &d).unwrap();
        assert_eq!(dg.node_count(), 2);
        assert_eq!(dg.node(0).to_string(), "({1}, 2)");
        assert_eq!(dg.node(1).to_string(), "({2}, 1)");
        assert!(dg.graph().has_edge(0, 1));
        assert!(dg.graph().has_edge(1, 0));
        assert_eq!(dg.graph().edge_count(), 2);
    }

    #[test]
    fn three_cycle_edges() {
        let dg = three_cycle();
        assert_eq!(dg.graph().edge_count(), 3);
        // ({1},2) -> ({3},1) since receiver {1} holds X1
        assert!(dg.graph().has_edge(0, 2));
        assert!(dg.graph().has_edge(1, 0));
        assert!(dg.graph().has_edge(2, 1));
        assert!(!dg.graph().is_acyclic(0b111));
    }

    #[test]
    fn node_count_is_t_times_receivers() {
        for (m, s, g, t) in [(4, 1, 2, 4), (4, 2, 1, 1), (5, 2, 2, 3)] {
            let i = inst(m, s, g, t);
            let d = enumerate_choices(&i, u64::MAX).unwrap().choice_at(0);
            let dg = build_digraph(&i, &d).unwrap();
            assert_eq!(dg.node_count() as u64, t as u64 * i.receiver_count());
            for a in 0..dg.node_count() {
                for b in 0..dg.node_count() {
                    let want = i.holds(&dg.node(a).receiver, dg.node(b).message);
                    assert_eq!(dg.graph().has_edge(a, b), want);
                }
            }
        }
    }

    #[test]
    fn rejects_invalid_choice() {
        let i = inst(2, 1, 1, 1);
        let d = DecodingChoice::from_assignments(Default::default(), false);
        assert!(matches!(
            build_digraph(&i, &d),
            Err(Error::InvalidChoice(_))
        ));
    }

    #[test]
    fn layering_basics() {
        let edgeless = LabeledGraph::new(vec![1, 2, 3], &[]).unwrap();
        assert_eq!(
            edgeless.layering(0b111).unwrap().layers,
            vec![vec![0, 1, 2]]
        );
        let path = LabeledGraph::new(vec![1, 2], &[(1, 0)]).unwrap();
        assert_eq!(path.layering(0b11).unwrap().layers, vec![vec![1], vec![0]]);
        assert_eq!(three_cycle().layering(0b111), Err(Error::Cyclic));
    }

    #[test]
    fn three_cycle_witness_layers() {
        let dg = three_cycle();
        for drop in 0..3 {
            let subset = 0b111 & !(1 << drop);
            let layering = dg.layering(subset).unwrap();
            assert_eq!(layering.layers.len(), 2);
            let last = layering.layers.last().unwrap();
            assert!(last.iter().all(|&v| dg.graph().out_mask(v) & subset == 0));
            assert!(check_properties(&dg, &layering).all_passed());
        }
    }

    #[test]
    fn corrupted_layering_fails_p1() {
        let dg = three_cycle();
        // ({2},3) -> ({1},2) is an edge; put its head first
        let bad = Layering {
            layers: vec![vec![0], vec![1]],
        };
        let report = check_properties(&dg, &bad);
        match &report.p1 {
            Check::Fail { witness } => assert!(witness.contains("({2}, 3) -> ({1}, 2)")),
            Check::Pass => panic!("back edge not caught"),
        }
        assert!(!report.all_passed());
    }

    #[test]
    fn presence_tags() {
        let g1 = inst(3, 1, 1, 1);
        let r = group_presence(&g1, [1, 3]);
        assert_eq!(
            r.tags,
            vec![
                GroupPresence::FullyPresent,
                GroupPresence::Absent,
                GroupPresence::FullyPresent
            ]
        );
        assert_eq!(r.perfectly_covered_by, Some(vec![1, 3]));

        let g2 = inst(3, 1, 2, 1);
        let r = group_presence(&g2, [3]);
        assert_eq!(r.tags[1], GroupPresence::PartiallyPresent);
        assert_eq!(r.perfectly_covered_by, None);

        let r = group_presence(&g2, [1, 2, 3, 4]);
        assert_eq!(r.perfectly_covered_by, Some(vec![1, 2]));
        assert_eq!(r.count(GroupPresence::Absent), 1);
    }

    #[test]
    fn dot_export() {
        let dg = three_cycle();
        let layering = dg.layering(0b011).unwrap();
        let dot = dg.to_dot(Some(&layering));
        assert!(dot.starts_with("digraph G {"));
        assert!(dot.contains("\"r1_m2\" [label=\"({1} | 2)\"]"));
        assert!(dot.contains("\"r2_m3\" -> \"r1_m2\";"));
        assert!(dot.contains("rank=same"));
        assert!(!dot.contains("r3_m1"));
        assert_eq!(dg.to_dot(None).matches("->").count(), 3);
    }
}
