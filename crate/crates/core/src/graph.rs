//! Discrete transition structure over regular domains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::model::{DomainIndex, Network};
use crate::tolerances::Tolerances;

/// Type of the wall between two adjacent regular domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WallClass {
    /// Crossed in direction `direction` (+1 or -1) from both sides.
    Transparent { direction: i8 },
    /// Flow points toward the wall on both sides.
    Black,
    /// Flow points away from the wall on both sides.
    White,
}

/// Escaping directions of a domain, split by sign.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExitDirections {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

impl ExitDirections {
    pub fn len(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(variable, sign)` pairs in variable order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        let mut all: Vec<(usize, i8)> = self
            .plus
            .iter()
            .map(|&i| (i, 1))
            .chain(self.minus.iter().map(|&i| (i, -1)))
            .collect();
        all.sort_unstable();
        all.into_iter()
    }
}

/// `i` escapes upward when the focal point lies above the domain's upper
/// interior threshold, downward when it lies below the lower one. The outer
/// box bounds are never crossed.
pub fn exit_directions(net: &Network, a: &DomainIndex) -> ExitDirections {
    let phi = net.focal_point(a);
    let mut out = ExitDirections::default();
    for (i, &p) in phi.iter().enumerate() {
        if a.0[i] + 1 < net.segments(i) && p > net.upper(a, i) {
            out.plus.push(i);
        }
        if a.0[i] > 0 && p < net.lower(a, i) {
            out.minus.push(i);
        }
    }
    out
}

/// Classifies the wall between `a` and `a + e_i`.
pub fn classify_wall(net: &Network, a: &DomainIndex, i: usize) -> WallClass {
    let theta = net.upper(a, i);
    let up_below = net.focal_point(a)[i] > theta;
    let up_above = net.focal_point(&a.step(i, 1))[i] > theta;
    match (up_below, up_above) {
        (true, true) => WallClass::Transparent { direction: 1 },
        (false, false) => WallClass::Transparent { direction: -1 },
        (true, false) => WallClass::Black,
        (false, true) => WallClass::White,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub from: DomainIndex,
    pub to: DomainIndex,
    pub variable: usize,
    pub sign: i8,
    /// 1-based rank of the crossed threshold.
    pub threshold_rank: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wall {
    pub below: DomainIndex,
    pub above: DomainIndex,
    pub variable: usize,
    pub threshold_rank: usize,
    pub class: WallClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionGraph {
    pub nodes: Vec<DomainIndex>,
    pub edges: Vec<Edge>,
    pub walls: Vec<Wall>,
    pub interior_equilibria: Vec<DomainIndex>,
    /// Extended threshold sets `{0, theta^1, ..., upper}` per variable.
    #[serde(skip)]
    thresholds: Vec<Vec<f64>>,
    #[serde(skip)]
    out_edges: BTreeMap<DomainIndex, Vec<usize>>,
}

pub fn build_graph(net: &Network) -> TransitionGraph {
    let nodes = net.domains();
    let thresholds: Vec<Vec<f64>> = (0..net.dim())
        .map(|i| (0..=net.segments(i)).map(|k| net.threshold(i, k)).collect())
        .collect();
    let mut edges = Vec::new();
    let mut walls = Vec::new();
    let mut interior_equilibria = Vec::new();
    let mut out_edges: BTreeMap<DomainIndex, Vec<usize>> = BTreeMap::new();
    for a in &nodes {
        let exits = exit_directions(net, a);
        if exits.is_empty() {
            interior_equilibria.push(a.clone());
        }
        let slot = out_edges.entry(a.clone()).or_default();
        for (i, sign) in exits.iter() {
            let rank = if sign > 0 { a.0[i] + 1 } else { a.0[i] };
            slot.push(edges.len());
            edges.push(Edge {
                from: a.clone(),
                to: a.step(i, sign),
                variable: i,
                sign,
                threshold_rank: rank,
                threshold: net.threshold(i, rank),
            });
        }
        for i in 0..net.dim() {
            if a.0[i] + 1 < net.segments(i) {
                walls.push(Wall {
                    below: a.clone(),
                    above: a.step(i, 1),
                    variable: i,
                    threshold_rank: a.0[i] + 1,
                    class: classify_wall(net, a, i),
                });
            }
        }
    }
    TransitionGraph {
        nodes,
        edges,
        walls,
        interior_equilibria,
        thresholds,
        out_edges,
    }
}

impl TransitionGraph {
    pub fn out_edges(&self, a: &DomainIndex) -> impl Iterator<Item = &Edge> {
        self.out_edges
            .get(a)
            .into_iter()
            .flatten()
            .map(move |&k| &self.edges[k])
    }

    pub fn out_degree(&self, a: &DomainIndex) -> usize {
        self.out_edges.get(a).map_or(0, Vec::len)
    }

    pub fn successors(&self, a: &DomainIndex) -> Vec<DomainIndex> {
        self.out_edges(a).map(|e| e.to.clone()).collect()
    }

    pub fn wall_between(&self, a: &DomainIndex, b: &DomainIndex) -> Option<&Wall> {
        self.walls
            .iter()
            .find(|w| (&w.below == a && &w.above == b) || (&w.below == b && &w.above == a))
    }

    /// Strongly connected components with more than one node or a self-loop,
    /// in order of their smallest domain.
    pub fn recurrent_components(&self) -> Vec<Vec<DomainIndex>> {
        let index: BTreeMap<&DomainIndex, usize> = self.nodes.iter().enumerate().map(|(k, a)| (a, k)).collect();
        let succ: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|a| self.out_edges(a).map(|e| index[&e.to]).collect())
            .collect();
        let comps = tarjan(&succ);
        let mut out: Vec<Vec<DomainIndex>> = comps
            .into_iter()
            .filter(|c| c.len() > 1 || succ[c[0]].contains(&c[0]))
            .map(|c| {
                let mut v: Vec<DomainIndex> = c.into_iter().map(|k| self.nodes[k].clone()).collect();
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }

    /// Recurrent components that no edge leaves.
    pub fn terminal_components(&self) -> Vec<Vec<DomainIndex>> {
        self.recurrent_components()
            .into_iter()
            .filter(|c| {
                let members: BTreeSet<&DomainIndex> = c.iter().collect();
                c.iter().all(|a| self.out_edges(a).all(|e| members.contains(&e.to)))
            })
            .collect()
    }

    /// Domains reachable from `start`, including itself.
    pub fn reachable(&self, start: &DomainIndex) -> BTreeSet<DomainIndex> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.clone()];
        while let Some(a) = stack.pop() {
            if seen.insert(a.clone()) {
                stack.extend(self.successors(&a));
            }
        }
        seen
    }
}

fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        succ: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for k in 0..s.succ[v].len() {
            let w = s.succ[v][k];
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = s.stack.pop() {
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let n = succ.len();
    let mut s = State {
        succ,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Exit data of one domain of a cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleExit {
    /// Exit direction `s_i`.
    pub variable: usize,
    /// `+1` or `-1`.
    pub sign: i8,
    pub threshold_rank: usize,
    /// Crossed threshold value.
    pub threshold: f64,
}

/// Closed box of a wall: `bounds[j] = (lo, hi)`, with `lo == hi` on the pinned coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallBox {
    pub pinned: usize,
    pub bounds: Vec<(f64, f64)>,
}

impl WallBox {
    /// Coordinates other than the pinned one, in increasing order.
    pub fn free(&self) -> Vec<usize> {
        (0..self.bounds.len()).filter(|&j| j != self.pinned).collect()
    }

    /// Smallest distance from a free coordinate of `x` to the wall's boundary
    /// (negative when outside).
    pub fn interior_margin(&self, x: &[f64]) -> f64 {
        self.free()
            .into_iter()
            .map(|j| (x[j] - self.bounds[j].0).min(self.bounds[j].1 - x[j]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A periodic sequence of regular domains, each with a unique exit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cycle {
    pub id: String,
    pub domains: Vec<DomainIndex>,
    pub exits: Vec<CycleExit>,
    /// `walls[i]` is the wall between `domains[i]` and `domains[i + 1]`.
    pub walls: Vec<WallBox>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    /// Comma-separated domain list, e.g. `000,010,011`.
    pub fn label(&self) -> String {
        cycle_label(&self.domains)
    }

    pub fn exit_variables(&self) -> Vec<usize> {
        self.exits.iter().map(|e| e.variable).collect()
    }
}

fn cycle_label(domains: &[DomainIndex]) -> String {
    domains.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

/// Stable identifier of a normalized domain sequence.
pub fn cycle_id(domains: &[DomainIndex]) -> String {
    let digest = Sha256::digest(cycle_label(domains).as_bytes());
    hex::encode(&digest[..6])
}

/// Cycles of the successor map restricted to domains with exactly one exit,
/// each rotated to start at its smallest domain, sorted by that domain.
///
/// Loops that bounce across a black wall are sliding modes, not cycles, and
/// are skipped.
pub fn find_deterministic_cycles(g: &TransitionGraph) -> Vec<Cycle> {
    let next = |a: &DomainIndex| -> Option<&Edge> {
        if g.out_degree(a) == 1 {
            g.out_edges(a).next()
        } else {
            None
        }
    };
    let mut done: BTreeSet<DomainIndex> = BTreeSet::new();
    let mut cycles = Vec::new();
    for start in &g.nodes {
        if done.contains(start) {
            continue;
        }
        let mut path: Vec<DomainIndex> = Vec::new();
        let mut pos: BTreeMap<DomainIndex, usize> = BTreeMap::new();
        let mut cur = start.clone();
        loop {
            if done.contains(&cur) {
                break;
            }
            if let Some(&k) = pos.get(&cur) {
                let mut domains: Vec<DomainIndex> = path[k..].to_vec();
                let min = (0..domains.len()).min_by_key(|&i| &domains[i]).unwrap();
                domains.rotate_left(min);
                let crosses_only_transparent = (0..domains.len()).all(|i| {
                    let next = &domains[(i + 1) % domains.len()];
                    g.wall_between(&domains[i], next)
                        .is_some_and(|w| matches!(w.class, WallClass::Transparent { .. }))
                });
                if crosses_only_transparent {
                    cycles.push(make_cycle(g, domains));
                }
                break;
            }
            let Some(edge) = next(&cur) else { break };
            pos.insert(cur.clone(), path.len());
            path.push(cur.clone());
            cur = edge.to.clone();
        }
        done.extend(path);
    }
    cycles.sort_by(|a, b| a.domains[0].cmp(&b.domains[0]));
    cycles
}

fn make_cycle(g: &TransitionGraph, domains: Vec<DomainIndex>) -> Cycle {
    let mut exits = Vec::with_capacity(domains.len());
    let mut walls = Vec::with_capacity(domains.len());
    for a in &domains {
        let e = g.out_edges(a).next().expect("deterministic node has an edge");
        exits.push(CycleExit {
            variable: e.variable,
            sign: e.sign,
            threshold_rank: e.threshold_rank,
            threshold: e.threshold,
        });
        let bounds = (0..a.len())
            .map(|j| {
                if j == e.variable {
                    (e.threshold, e.threshold)
                } else {
                    (g.thresholds[j][a.0[j]], g.thresholds[j][a.0[j] + 1])
                }
            })
            .collect();
        walls.push(WallBox {
            pinned: e.variable,
            bounds,
        });
    }
    Cycle {
        id: cycle_id(&domains),
        domains,
        exits,
        walls,
    }
}

/// Structural hypotheses of the return-map theorem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleProperties {
    pub aligned: bool,
    pub all_switch: bool,
    pub parallel_thresholds: bool,
    pub switching_variables: BTreeSet<usize>,
    /// `(i, j)`: focal coordinate `j` changes between domains `i` and `i + 1`
    /// although `j` is not the exit direction of domain `i + 1`.
    pub misalignments: Vec<(usize, usize)>,
}

fn nearly_equal(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn cycle_properties(net: &Network, c: &Cycle, tol: &Tolerances) -> CycleProperties {
    let len = c.len();
    let focal: Vec<Vec<f64>> = c.domains.iter().map(|a| net.focal_point(a)).collect();
    let mut misalignments = Vec::new();
    for i in 0..len {
        let next = (i + 1) % len;
        let s_next = c.exits[next].variable;
        for j in (0..net.dim()).filter(|&j| j != s_next) {
            if !nearly_equal(focal[i][j], focal[next][j], tol.alignment) {
                misalignments.push((i, j));
            }
        }
    }
    let switching_variables: BTreeSet<usize> = c.exits.iter().map(|e| e.variable).collect();
    let mut crossed: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for e in &c.exits {
        crossed.entry(e.variable).or_default().insert(e.threshold_rank);
    }
    CycleProperties {
        aligned: misalignments.is_empty(),
        all_switch: switching_variables.len() == net.dim(),
        parallel_thresholds: crossed.values().any(|ranks| ranks.len() > 1),
        switching_variables,
        misalignments,
    }
}

/// Graphviz rendering. Transition edges are solid, edges of `highlight` bold,
/// black and white walls are drawn as undirected labelled markers.
pub fn export_dot(g: &TransitionGraph, highlight: Option<&Cycle>) -> String {
    let bold: BTreeSet<(DomainIndex, DomainIndex)> = highlight
        .map(|c| {
            (0..c.len())
                .map(|i| (c.domains[i].clone(), c.domains[(i + 1) % c.len()].clone()))
                .collect()
        })
        .unwrap_or_default();
    let mut out = String::from("digraph transitions {\n  node [shape=box];\n");
    for a in &g.nodes {
        let extra = if g.interior_equilibria.contains(a) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(out, "  \"{a}\" [label=\"{a}\"{extra}];");
    }
    for e in &g.edges {
        let style = if bold.contains(&(e.from.clone(), e.to.clone())) {
            "bold"
        } else {
            "solid"
        };
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [style={style}];", e.from, e.to);
    }
    for w in &g.walls {
        let (label, style) = match w.class {
            WallClass::Transparent { .. } => continue,
            WallClass::Black => ("black wall", "dashed"),
            WallClass::White => ("white wall", "dotted"),
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [dir=none, style={style}, label=\"{label}\", constraint=false];",
            w.below, w.above
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{ProductionTerm, Sign, StepLiteral, VariableSpec};

    fn d(s: &str) -> DomainIndex {
        s.parse().unwrap()
    }

    fn edge_set(g: &TransitionGraph) -> BTreeSet<(String, String)> {
        g.edges.iter().map(|e| (e.from.to_string(), e.to.to_string())).collect()
    }

    fn one_variable(focal_low: f64, focal_high: f64) -> Network {
        // x regulates itself so the two domains get different focal points
        Network::new(vec![VariableSpec {
            name: "x".into(),
            thresholds: vec![1.0],
            upper_bound: 3.0,
            gamma: 1.0,
            production: vec![
                ProductionTerm {
                    rate: focal_low,
                    literals: vec![StepLiteral {
                        variable: 0,
                        threshold_rank: 1,
                        sign: Sign::Minus,
                    }],
                },
                ProductionTerm {
                    rate: focal_high,
                    literals: vec![StepLiteral {
                        variable: 0,
                        threshold_rank: 1,
                        sign: Sign::Plus,
                    }],
                },
            ],
        }])
        .unwrap()
    }

    #[test]
    fn exit_directions_examples() {
        let net = fixtures::two_negative_loops();
        let ex = exit_directions(&net, &d("000"));
        assert_eq!(ex.plus, vec![1]);
        assert!(ex.minus.is_empty());
        let net = fixtures::parallel_thresholds();
        assert_eq!(exit_directions(&net, &d("20")).plus, vec![1]);
        let net = one_variable(0.5, 2.0);
        assert!(exit_directions(&net, &d("0")).is_empty());
        assert!(exit_directions(&net, &d("1")).is_empty());
    }

    #[test]
    fn two_loop_graph_matches_diagram() {
        let net = fixtures::two_negative_loops();
        let g = build_graph(&net);
        assert_eq!(g.nodes.len(), 12);
        let expected: BTreeSet<(String, String)> = [
            ("000", "010"),
            ("010", "011"),
            ("011", "111"),
            ("111", "101"),
            ("101", "100"),
            ("100", "000"),
            ("110", "111"),
            ("110", "100"),
            ("110", "010"),
            ("112", "111"),
            ("112", "102"),
            ("102", "101"),
            ("012", "011"),
            ("012", "112"),
            ("012", "002"),
            ("001", "000"),
            ("001", "011"),
            ("001", "101"),
            ("002", "102"),
            ("002", "001"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(edge_set(&g), expected);
        for a in &g.nodes {
            assert_eq!(g.out_degree(a), exit_directions(&net, a).len());
        }
        assert!(g.interior_equilibria.is_empty());
        assert!(g.walls.iter().all(|w| matches!(w.class, WallClass::Transparent { .. })));
    }

    #[test]
    fn parallel_threshold_graph_has_one_white_wall() {
        let net = fixtures::parallel_thresholds();
        let g = build_graph(&net);
        assert_eq!(g.nodes.len(), 6);
        let white: Vec<&Wall> = g.walls.iter().filter(|w| w.class == WallClass::White).collect();
        assert_eq!(white.len(), 1);
        assert_eq!(
            (white[0].below.to_string(), white[0].above.to_string()),
            ("10".into(), "11".into())
        );
        let expected: BTreeSet<(String, String)> = [
            ("00", "10"),
            ("10", "20"),
            ("20", "21"),
            ("21", "11"),
            ("11", "01"),
            ("01", "00"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(edge_set(&g), expected);
    }

    #[test]
    fn one_variable_walls() {
        // focal points on their own side: flow leaves the wall on both sides
        let g = build_graph(&one_variable(0.5, 2.0));
        assert_eq!(g.walls.len(), 1);
        assert_eq!(g.walls[0].class, WallClass::White);
        assert!(g.edges.is_empty());
        assert_eq!(g.interior_equilibria.len(), 2);
        // focal points across the wall: both sides point toward it
        let g = build_graph(&one_variable(2.0, 0.5));
        assert_eq!(g.walls[0].class, WallClass::Black);
        assert_eq!(g.edges.len(), 2);
        assert!(find_deterministic_cycles(&g).is_empty());
    }

    #[test]
    fn classify_wall_examples() {
        let net = fixtures::mixed_loops();
        assert_eq!(classify_wall(&net, &d("101"), 1), WallClass::White);
        let net = fixtures::two_negative_loops();
        assert_eq!(
            classify_wall(&net, &d("000"), 1),
            WallClass::Transparent { direction: 1 }
        );
        assert_eq!(
            classify_wall(&one_variable(2.0, 2.5), &d("0"), 0),
            WallClass::Transparent { direction: 1 }
        );
    }

    #[test]
    fn two_loop_cycle() {
        let net = fixtures::two_negative_loops();
        let cycles = find_deterministic_cycles(&build_graph(&net));
        assert_eq!(cycles.len(), 1);
        let c = &cycles[0];
        assert_eq!(c.label(), "000,010,011,111,101,100");
        assert_eq!(c.exit_variables(), vec![1, 2, 0, 1, 2, 0]);
        assert_eq!(
            c.exits.iter().map(|e| e.sign).collect::<Vec<_>>(),
            vec![1, 1, 1, -1, -1, -1]
        );
        assert_eq!(c.walls[0].pinned, 1);
        assert_eq!(c.walls[0].bounds, vec![(0.0, 1.0), (1.0, 1.0), (0.0, 1.0)]);
        let p = cycle_properties(&net, c, &Tolerances::default());
        assert!(p.aligned && p.all_switch && !p.parallel_thresholds);
    }

    #[test]
    fn parallel_threshold_cycle() {
        let net = fixtures::parallel_thresholds();
        let cycles = find_deterministic_cycles(&build_graph(&net));
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].label(), "00,10,20,21,11,01");
        let p = cycle_properties(&net, &cycles[0], &Tolerances::default());
        assert!(p.aligned && p.all_switch && p.parallel_thresholds);
    }

    #[test]
    fn mixed_loop_cycle() {
        let net = fixtures::mixed_loops();
        let cycles = find_deterministic_cycles(&build_graph(&net));
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].label(), "000,010,110,111,011,001,101,100");
        let p = cycle_properties(&net, &cycles[0], &Tolerances::default());
        assert!(p.aligned && p.all_switch && !p.parallel_thresholds);
    }

    #[test]
    fn misaligned_cycle_detected() {
        let net = fixtures::misaligned_two_negative_loops();
        let cycles = find_deterministic_cycles(&build_graph(&net));
        assert_eq!(cycles.len(), 1);
        let p = cycle_properties(&net, &cycles[0], &Tolerances::default());
        assert!(!p.aligned);
        assert!(p.misalignments.contains(&(0, 0)));
    }

    #[test]
    fn steady_state_has_no_cycles() {
        let net = one_variable(0.5, 2.0);
        assert!(find_deterministic_cycles(&build_graph(&net)).is_empty());
    }

    #[test]
    fn every_node_reaches_the_two_loop_cycle() {
        let net = fixtures::two_negative_loops();
        let g = build_graph(&net);
        let cycle: BTreeSet<DomainIndex> = find_deterministic_cycles(&g)[0].domains.iter().cloned().collect();
        for a in &g.nodes {
            assert!(g.reachable(a).is_superset(&cycle), "{a}");
        }
        assert_eq!(g.terminal_components(), vec![cycle.into_iter().collect::<Vec<_>>()]);
        // the half-space x3 > theta_3^2 is never entered
        for e in &g.edges {
            if e.to.0[2] == 2 {
                assert_eq!(e.from.0[2], 2);
            }
        }
    }

    #[test]
    fn dot_output() {
        let net = fixtures::two_negative_loops();
        let g = build_graph(&net);
        let c = find_deterministic_cycles(&g).remove(0);
        let dot = export_dot(&g, Some(&c));
        assert_eq!(dot.matches("style=bold").count(), 6);
        assert!(dot.contains("\"000\" -> \"010\" [style=bold]"));
        let plain = export_dot(&g, None);
        assert_eq!(plain.matches("style=bold").count(), 0);
        assert_eq!(plain.matches("style=solid").count(), g.edges.len());

        let g = build_graph(&fixtures::parallel_thresholds());
        let dot = export_dot(&g, None);
        assert!(dot.contains("\"10\" -> \"11\" [dir=none, style=dotted, label=\"white wall\""));
    }

    #[test]
    fn cycle_ids_are_stable() {
        let net = fixtures::two_negative_loops();
        let c = find_deterministic_cycles(&build_graph(&net)).remove(0);
        assert_eq!(c.id, cycle_id(&c.domains));
        assert_eq!(c.id.len(), 12);
    }
}
