//! Partitioning an observable's terms into jointly measurable groups.
//!
//! Two families of planners share the incompatibility-graph machinery: a
//! largest-degree-first coloring over either the qubitwise or the commuting
//! relation, and a greedy merger that grows groups around high-degree terms
//! by placing entangled measurements position by position. A branch-and-
//! bound clique search supplies the lower bound on achievable group counts.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurements::{circuit_for, MeasurementAssignment, MeasurementKind, Placement};
use crate::pauli::{Observable, PauliOp, PauliString};
use crate::Circuit;

/// Incompatibility relation a graph is built over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GraphMode {
    /// Edge when two strings are not qubitwise compatible.
    #[serde(rename = "TPB")]
    Tpb,
    /// Edge when two strings do not commute.
    #[serde(rename = "ALL")]
    All,
}

/// Word-packed vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn empty(n: usize) -> Self {
        Bits { words: vec![0; n.div_ceil(64)] }
    }

    fn full(n: usize) -> Self {
        let mut b = Bits { words: vec![u64::MAX; n.div_ceil(64)] };
        let spare = n % 64;
        if spare != 0 {
            *b.words.last_mut().unwrap() = (1u64 << spare) - 1;
        }
        b
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }
}

/// Incompatibility graph over an observable's term indices.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliGraph {
    strings: Vec<PauliString>,
    mode: GraphMode,
    adj: Vec<Bits>,
}

impl PauliGraph {
    pub fn node_count(&self) -> usize {
        self.strings.len()
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u].get(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Bits::count).sum::<usize>() / 2
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }
}

/// Builds the incompatibility graph for the observable's terms. Rows are
/// filled in parallel; the result is deterministic.
pub fn build_pauli_graph(obs: &Observable, mode: GraphMode) -> PauliGraph {
    let strings: Vec<PauliString> = obs.terms().iter().map(|(_, s)| s.clone()).collect();
    let n = strings.len();
    let adj: Vec<Bits> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Bits::empty(n);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let compatible = match mode {
                    GraphMode::Tpb => strings[i].qubitwise_compatible(&strings[j]),
                    GraphMode::All => strings[i].commutes_with(&strings[j]),
                };
                if !compatible {
                    row.set(j);
                }
            }
            row
        })
        .collect();
    PauliGraph { strings, mode, adj }
}

/// One measurement group: the term indices it covers and, when circuits can
/// be synthesized for it, the measurement layout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Group {
    members: Vec<usize>,
    assignment: Option<MeasurementAssignment>,
}

impl Group {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn assignment(&self) -> Option<&MeasurementAssignment> {
        self.assignment.as_ref()
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Planner that produced a grouping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GroupingMethod {
    #[serde(rename = "No-grouping")]
    NoGrouping,
    #[serde(rename = "TPB")]
    Tpb,
    #[serde(rename = "TPB+Bell")]
    TpbBell,
    #[serde(rename = "TPB+2Q")]
    Tpb2Q,
    #[serde(rename = "ALL")]
    All,
}

impl GroupingMethod {
    pub fn name(self) -> &'static str {
        match self {
            GroupingMethod::NoGrouping => "No-grouping",
            GroupingMethod::Tpb => "TPB",
            GroupingMethod::TpbBell => "TPB+Bell",
            GroupingMethod::Tpb2Q => "TPB+2Q",
            GroupingMethod::All => "ALL",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            GroupingMethod::NoGrouping,
            GroupingMethod::Tpb,
            GroupingMethod::TpbBell,
            GroupingMethod::Tpb2Q,
            GroupingMethod::All,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

impl std::fmt::Display for GroupingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A partition of the observable's terms into measurement groups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupingResult {
    method: GroupingMethod,
    qubit_count: usize,
    groups: Vec<Group>,
}

impl GroupingResult {
    pub fn method(&self) -> GroupingMethod {
        self.method
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn term_count(&self) -> usize {
        self.groups.iter().map(Group::size).sum()
    }

    /// Measurement circuit per group, in group order.
    pub fn circuits(&self) -> Result<Vec<Circuit>> {
        self.groups
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                let assignment = g
                    .assignment()
                    .ok_or(Error::MissingAssignment { group: gi })?;
                circuit_for(assignment, self.qubit_count)
            })
            .collect()
    }

    /// Checks the partition and per-group measurability against `obs`.
    pub fn validate(&self, obs: &Observable) -> Result<()> {
        let n = obs.num_terms();
        if obs.qubit_count() != self.qubit_count {
            return Err(Error::InvalidGrouping {
                reason: format!(
                    "grouping is over {} qubits, observable over {}",
                    self.qubit_count,
                    obs.qubit_count()
                ),
            });
        }
        let mut seen = vec![false; n];
        for group in &self.groups {
            for &m in group.members() {
                if m >= n {
                    return Err(Error::InvalidGrouping {
                        reason: format!("member index {m} out of range for {n} terms"),
                    });
                }
                if seen[m] {
                    return Err(Error::InvalidGrouping {
                        reason: format!("term {m} appears in two groups"),
                    });
                }
                seen[m] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidGrouping {
                reason: format!("term {missing} is in no group"),
            });
        }
        for (gi, group) in self.groups.iter().enumerate() {
            let Some(assignment) = group.assignment() else { continue };
            for q in 0..self.qubit_count {
                if !assignment.covers(q) {
                    return Err(Error::InvalidGrouping {
                        reason: format!("group {gi} leaves qubit {q} unmeasured"),
                    });
                }
            }
            for &m in group.members() {
                let (_, string) = obs.term(m);
                if !assignment.compatible_with(string) {
                    return Err(Error::InvalidGrouping {
                        reason: format!("group {gi} cannot measure term {m} ({string})"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Term order preserved, one singleton group per term, each measured in its
/// own product basis.
pub fn no_grouping(obs: &Observable) -> GroupingResult {
    let groups = obs
        .terms()
        .iter()
        .enumerate()
        .map(|(i, (_, s))| Group {
            members: vec![i],
            assignment: Some(tpb_assignment_for(s)),
        })
        .collect();
    GroupingResult {
        method: GroupingMethod::NoGrouping,
        qubit_count: obs.qubit_count(),
        groups,
    }
}

fn tpb_kind_for(op: PauliOp) -> MeasurementKind {
    match op {
        PauliOp::X => MeasurementKind::TpbX,
        PauliOp::Y => MeasurementKind::TpbY,
        // Identity reads out in the Z basis; the bit is ignored.
        PauliOp::I | PauliOp::Z => MeasurementKind::TpbZ,
    }
}

fn tpb_assignment_for(s: &PauliString) -> MeasurementAssignment {
    MeasurementAssignment::from_placements(
        (0..s.len()).map(|q| Placement::new(tpb_kind_for(s.op(q)), vec![q])),
    )
}

/// Vertex order used by every planner: descending degree, ties by ascending
/// index.
fn degree_order(g: &PauliGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    order
}

/// Largest-degree-first coloring; color classes become groups. Qubitwise
/// graphs get per-qubit product-basis assignments; commuting-relation
/// graphs report counts only.
pub fn ldfc_coloring(g: &PauliGraph) -> GroupingResult {
    let n = g.node_count();
    let mut color = vec![usize::MAX; n];
    let mut color_count = 0;
    for &v in &degree_order(g) {
        let mut used = vec![false; color_count];
        for u in g.adj[v].ones() {
            if color[u] != usize::MAX {
                used[color[u]] = true;
            }
        }
        let c = used.iter().position(|&u| !u).unwrap_or(color_count);
        if c == color_count {
            color_count += 1;
        }
        color[v] = c;
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); color_count];
    for (v, &c) in color.iter().enumerate() {
        members[c].push(v);
    }

    let qubit_count = g.strings.first().map_or(0, PauliString::len);
    let (method, groups) = match g.mode {
        GraphMode::Tpb => {
            let groups = members
                .into_iter()
                .map(|m| {
                    let assignment = union_tpb_assignment(&g.strings, &m, qubit_count);
                    Group { members: m, assignment: Some(assignment) }
                })
                .collect();
            (GroupingMethod::Tpb, groups)
        }
        GraphMode::All => {
            let groups = members
                .into_iter()
                .map(|m| Group { members: m, assignment: None })
                .collect();
            (GroupingMethod::All, groups)
        }
    };
    GroupingResult { method, qubit_count, groups }
}

/// Product basis jointly measuring a qubitwise-compatible set: at each
/// qubit the unique non-identity operator across members, Z where none.
fn union_tpb_assignment(
    strings: &[PauliString],
    members: &[usize],
    qubit_count: usize,
) -> MeasurementAssignment {
    MeasurementAssignment::from_placements((0..qubit_count).map(|q| {
        let op = members
            .iter()
            .map(|&m| strings[m].op(q))
            .find(|&o| o != PauliOp::I)
            .unwrap_or(PauliOp::I);
        Placement::new(tpb_kind_for(op), vec![q])
    }))
}

/// Ordered tuples of `len` distinct elements of `pool`, lexicographic in
/// the pool's order.
fn ordered_tuples(pool: &[usize], len: usize) -> Vec<Vec<usize>> {
    match len {
        1 => pool.iter().map(|&q| vec![q]).collect(),
        2 => {
            let mut out = Vec::new();
            for &a in pool {
                for &b in pool {
                    if a != b {
                        out.push(vec![a, b]);
                    }
                }
            }
            out
        }
        _ => unreachable!("catalog holds one- and two-qubit measurements"),
    }
}

/// Tries to extend `m_i`, the layout measuring `v_i`'s group, so that it
/// also measures `v_j`. Positions where the two strings carry the same
/// operator are left for finalization; every disagreeing uncovered position
/// must be claimed by some kind from `e`, scanned in catalog order with
/// position tuples in lexicographic order, restarting after each placement.
/// Returns `None` without side effects when no full cover exists.
pub fn assign_measurements(
    v_i: &PauliString,
    v_j: &PauliString,
    e: &[MeasurementKind],
    m_i: &MeasurementAssignment,
) -> Option<MeasurementAssignment> {
    assert_eq!(v_i.len(), v_j.len(), "strings of different lengths");
    if !m_i.compatible_with(v_j) {
        return None;
    }
    let mut uncovered: Vec<usize> = (0..v_i.len())
        .filter(|&q| !m_i.covers(q) && v_i.op(q) != v_j.op(q))
        .collect();
    let mut m = m_i.clone();
    'place: while !uncovered.is_empty() {
        for &kind in e {
            for tuple in ordered_tuples(&uncovered, kind.arity()) {
                if kind.compatible_at(v_i, &tuple) && kind.compatible_at(v_j, &tuple) {
                    uncovered.retain(|q| !tuple.contains(q));
                    m.push(Placement::new(kind, tuple));
                    continue 'place;
                }
            }
        }
        return None;
    }
    Some(m)
}

/// Greedy grouping over an ordered measurement sequence: walk terms in
/// descending qubitwise-conflict degree; each still-ungrouped term becomes
/// a representative and absorbs every later ungrouped term the layout can
/// be extended to, then uncovered positions fall back to the
/// representative's product basis.
pub fn greedy_group(obs: &Observable, e: &[MeasurementKind]) -> GroupingResult {
    assert!(!e.is_empty(), "measurement sequence is empty");
    let g = build_pauli_graph(obs, GraphMode::Tpb);
    let order = degree_order(&g);
    let n = g.node_count();
    let qubit_count = obs.qubit_count();

    let mut grouped = vec![false; n];
    let mut groups = Vec::new();
    for (pos, &rep) in order.iter().enumerate() {
        if grouped[rep] {
            continue;
        }
        grouped[rep] = true;
        let mut members = vec![rep];
        let mut assignment = MeasurementAssignment::new();
        for &cand in &order[pos + 1..] {
            if grouped[cand] {
                continue;
            }
            if let Some(extended) =
                assign_measurements(&g.strings[rep], &g.strings[cand], e, &assignment)
            {
                assignment = extended;
                members.push(cand);
                grouped[cand] = true;
            }
        }
        for q in 0..qubit_count {
            if !assignment.covers(q) {
                assignment.push(Placement::new(tpb_kind_for(g.strings[rep].op(q)), vec![q]));
            }
        }
        groups.push(Group { members, assignment: Some(assignment) });
    }

    let method = infer_greedy_method(e);
    GroupingResult { method, qubit_count, groups }
}

fn infer_greedy_method(e: &[MeasurementKind]) -> GroupingMethod {
    use crate::measurements::{catalog, CatalogSelector};
    if e == catalog(CatalogSelector::Tpb2Q) {
        GroupingMethod::Tpb2Q
    } else if e == catalog(CatalogSelector::TpbBell) {
        GroupingMethod::TpbBell
    } else {
        GroupingMethod::Tpb
    }
}

/// Runs the planner named by `method` on `obs`.
pub fn group_observable(obs: &Observable, method: GroupingMethod) -> GroupingResult {
    use crate::measurements::{catalog, CatalogSelector};
    match method {
        GroupingMethod::NoGrouping => no_grouping(obs),
        GroupingMethod::Tpb => ldfc_coloring(&build_pauli_graph(obs, GraphMode::Tpb)),
        GroupingMethod::TpbBell => greedy_group(obs, &catalog(CatalogSelector::TpbBell)),
        GroupingMethod::Tpb2Q => greedy_group(obs, &catalog(CatalogSelector::Tpb2Q)),
        GroupingMethod::All => ldfc_coloring(&build_pauli_graph(obs, GraphMode::All)),
    }
}

/// Exact maximum-clique size of the graph, branch and bound with a greedy
/// coloring bound. Stops at `time_limit` seconds and reports the best
/// clique found so far with `exact = false`.
pub fn max_clique(g: &PauliGraph, time_limit: f64) -> (usize, bool) {
    let n = g.node_count();
    if n == 0 {
        return (0, true);
    }
    let deadline = Instant::now() + Duration::from_secs_f64(time_limit.max(0.0));

    // Greedy clique seeds the bound so a timeout still reports something.
    let mut best = 0;
    {
        let mut clique = Bits::empty(n);
        let mut size = 0;
        for &v in &degree_order(g) {
            if clique.ones().all(|u| g.adj[v].get(u)) {
                clique.set(v);
                size += 1;
            }
        }
        best = best.max(size);
    }

    let mut exact = true;
    let mut r = Vec::new();
    expand_clique(g, &mut r, Bits::full(n), &mut best, deadline, &mut exact);
    (best, exact)
}

fn expand_clique(
    g: &PauliGraph,
    r: &mut Vec<usize>,
    mut p: Bits,
    best: &mut usize,
    deadline: Instant,
    exact: &mut bool,
) {
    if !*exact || Instant::now() >= deadline {
        *exact = false;
        return;
    }
    if p.is_empty() {
        *best = (*best).max(r.len());
        return;
    }
    // Greedy coloring of the candidate set; a vertex of color c caps any
    // clique through it at |r| + c.
    let mut classes: Vec<Bits> = Vec::new();
    let mut colored: Vec<(usize, usize)> = Vec::new();
    for v in p.ones() {
        let c = match classes.iter().position(|cl| !cl.intersects(&g.adj[v])) {
            Some(c) => c,
            None => {
                classes.push(Bits::empty(g.node_count()));
                classes.len() - 1
            }
        };
        classes[c].set(v);
        colored.push((v, c + 1));
    }
    colored.sort_by_key(|&(v, c)| (c, v));

    for &(v, c) in colored.iter().rev() {
        if r.len() + c <= *best {
            return;
        }
        r.push(v);
        expand_clique(g, r, p.and(&g.adj[v]), best, deadline, exact);
        r.pop();
        p.clear(v);
        if !*exact {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::{catalog, CatalogSelector};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs(lines: &[&str]) -> Observable {
        Observable::from_terms(
            lines
                .iter()
                .map(|s| (1.0, s.parse::<PauliString>().unwrap()))
                .collect(),
        )
    }

    fn heisenberg() -> Observable {
        obs(&["XX", "YY", "ZZ"])
    }

    fn random_obs(rng: &mut ChaCha8Rng, terms: usize, qubits: usize) -> Observable {
        let ops = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];
        let list: Vec<(f64, PauliString)> = (0..terms)
            .map(|_| {
                let s: Vec<PauliOp> =
                    (0..qubits).map(|_| ops[rng.random_range(0..4)]).collect();
                (1.0, PauliString::from_ops(&s))
            })
            .collect();
        Observable::from_terms(list)
    }

    #[test]
    fn heisenberg_graphs() {
        let tpb = build_pauli_graph(&heisenberg(), GraphMode::Tpb);
        assert_eq!(tpb.edge_count(), 3);
        assert!(tpb.has_edge(0, 1) && tpb.has_edge(1, 2) && tpb.has_edge(0, 2));

        let all = build_pauli_graph(&heisenberg(), GraphMode::All);
        assert_eq!(all.edge_count(), 0);
    }

    #[test]
    fn disjoint_supports_share_a_tpb_group() {
        let g = build_pauli_graph(&obs(&["XI", "IZ"]), GraphMode::Tpb);
        assert_eq!(g.edge_count(), 0);
        let result = ldfc_coloring(&g);
        assert_eq!(result.k(), 1);
        let a = result.groups()[0].assignment().unwrap();
        assert_eq!(
            a.placements(),
            &[
                Placement::new(MeasurementKind::TpbX, vec![0]),
                Placement::new(MeasurementKind::TpbZ, vec![1]),
            ]
        );
    }

    #[test]
    fn ldfc_on_triangle_and_edgeless() {
        let tpb = ldfc_coloring(&build_pauli_graph(&heisenberg(), GraphMode::Tpb));
        assert_eq!(tpb.k(), 3);
        assert_eq!(tpb.method(), GroupingMethod::Tpb);

        let all = ldfc_coloring(&build_pauli_graph(&heisenberg(), GraphMode::All));
        assert_eq!(all.k(), 1);
        assert_eq!(all.method(), GroupingMethod::All);
        assert!(all.groups()[0].assignment().is_none());
        assert!(all.circuits().is_err());
    }

    #[test]
    fn assign_examples() {
        let e_bell = catalog(CatalogSelector::TpbBell);
        let e_tpb = catalog(CatalogSelector::Tpb);
        let empty = MeasurementAssignment::new();

        let m = assign_measurements(
            &"XX".parse().unwrap(),
            &"YY".parse().unwrap(),
            &e_bell,
            &empty,
        )
        .unwrap();
        assert_eq!(m.placements(), &[Placement::new(MeasurementKind::Bell, vec![0, 1])]);

        // The shared X at position 0 is deferred to finalization; only the
        // disagreement at position 1 is placed here.
        let m = assign_measurements(
            &"XI".parse().unwrap(),
            &"XZ".parse().unwrap(),
            &e_tpb,
            &empty,
        )
        .unwrap();
        assert_eq!(m.placements(), &[Placement::new(MeasurementKind::TpbZ, vec![1])]);

        assert!(assign_measurements(
            &"XX".parse().unwrap(),
            &"ZX".parse().unwrap(),
            &e_bell,
            &empty,
        )
        .is_none());
    }

    #[test]
    fn assign_rejects_candidates_incompatible_with_existing_layout() {
        let m_i = MeasurementAssignment::from_placements([Placement::new(
            MeasurementKind::Bell,
            vec![0, 1],
        )]);
        let e = catalog(CatalogSelector::TpbBell);
        assert!(assign_measurements(
            &"XX".parse().unwrap(),
            &"ZZ".parse().unwrap(),
            &e,
            &m_i,
        )
        .is_some());
        assert!(assign_measurements(
            &"XX".parse().unwrap(),
            &"ZX".parse().unwrap(),
            &e,
            &m_i,
        )
        .is_none());
    }

    #[test]
    fn greedy_examples() {
        let bell = greedy_group(&heisenberg(), &catalog(CatalogSelector::TpbBell));
        assert_eq!(bell.k(), 1);
        assert_eq!(bell.method(), GroupingMethod::TpbBell);
        let a = bell.groups()[0].assignment().unwrap();
        assert_eq!(a.placements(), &[Placement::new(MeasurementKind::Bell, vec![0, 1])]);

        let two = greedy_group(&obs(&["XX", "YY", "ZX"]), &catalog(CatalogSelector::TpbBell));
        assert_eq!(two.k(), 2);
        assert_eq!(two.groups()[0].members(), &[0, 1]);
        assert_eq!(two.groups()[1].members(), &[2]);

        let tpb_only = greedy_group(&heisenberg(), &catalog(CatalogSelector::Tpb));
        assert_eq!(tpb_only.k(), 3);
    }

    #[test]
    fn no_grouping_keeps_singletons_in_term_order() {
        let r = no_grouping(&heisenberg());
        assert_eq!(r.k(), 3);
        assert_eq!(r.method(), GroupingMethod::NoGrouping);
        for (i, g) in r.groups().iter().enumerate() {
            assert_eq!(g.members(), &[i]);
        }
        r.validate(&heisenberg()).unwrap();
    }

    #[test]
    fn dispatcher_covers_every_method() {
        let h = heisenberg();
        let counts: Vec<usize> = [
            GroupingMethod::NoGrouping,
            GroupingMethod::Tpb,
            GroupingMethod::TpbBell,
            GroupingMethod::Tpb2Q,
            GroupingMethod::All,
        ]
        .into_iter()
        .map(|m| {
            let r = group_observable(&h, m);
            assert_eq!(r.method(), m);
            r.validate(&h).unwrap();
            r.k()
        })
        .collect();
        assert_eq!(counts, vec![3, 3, 1, 1, 1]);
    }

    #[test]
    fn coloring_is_proper_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let o = random_obs(&mut rng, 40, 5);
            for mode in [GraphMode::Tpb, GraphMode::All] {
                let g = build_pauli_graph(&o, mode);
                let r = ldfc_coloring(&g);
                r.validate(&o).unwrap();
                for group in r.groups() {
                    for (ai, &a) in group.members().iter().enumerate() {
                        for &b in &group.members()[ai + 1..] {
                            assert!(!g.has_edge(a, b), "adjacent pair {a},{b} share a group");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coloring_count_never_beats_clique_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for round in 0..15 {
            let terms = 10 + (round % 4) * 15;
            let o = random_obs(&mut rng, terms, 4);
            let g = build_pauli_graph(&o, GraphMode::Tpb);
            let (size, exact) = max_clique(&g, 30.0);
            assert!(exact);
            let r = ldfc_coloring(&g);
            assert!(r.k() >= size, "K = {} below clique size {}", r.k(), size);
        }
    }

    #[test]
    fn greedy_groups_are_valid_and_no_larger_than_term_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..15 {
            let o = random_obs(&mut rng, 30, 4);
            for selector in [
                CatalogSelector::Tpb,
                CatalogSelector::TpbBell,
                CatalogSelector::Tpb2Q,
            ] {
                let r = greedy_group(&o, &catalog(selector));
                assert!(r.k() <= o.num_terms());
                r.validate(&o).unwrap();
            }
            // Both TPB planners must be valid even though counts may differ.
            let ldfc = ldfc_coloring(&build_pauli_graph(&o, GraphMode::Tpb));
            ldfc.validate(&o).unwrap();
        }
    }

    #[test]
    fn entangled_catalog_groups_no_worse_than_bell_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let o = random_obs(&mut rng, 25, 4);
            let bell = greedy_group(&o, &catalog(CatalogSelector::TpbBell));
            let two_q = greedy_group(&o, &catalog(CatalogSelector::Tpb2Q));
            b_no_worse(&two_q, &bell);
        }
    }

    fn b_no_worse(two_q: &GroupingResult, bell: &GroupingResult) {
        // The larger catalog can only help a given representative, but the
        // greedy order makes a strict guarantee impossible; require sanity
        // instead: both partitions exist and 2Q is within one group of Bell
        // on these small instances.
        assert!(two_q.k() <= bell.k() + 1, "2Q {} vs Bell {}", two_q.k(), bell.k());
    }

    #[test]
    fn grouping_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let o = random_obs(&mut rng, 30, 5);
        for method in [
            GroupingMethod::NoGrouping,
            GroupingMethod::Tpb,
            GroupingMethod::TpbBell,
            GroupingMethod::Tpb2Q,
            GroupingMethod::All,
        ] {
            assert_eq!(group_observable(&o, method), group_observable(&o, method));
        }
    }

    #[test]
    fn clique_examples() {
        let k3 = build_pauli_graph(&heisenberg(), GraphMode::Tpb);
        assert_eq!(max_clique(&k3, 10.0), (3, true));

        let edgeless = build_pauli_graph(&heisenberg(), GraphMode::All);
        assert_eq!(max_clique(&edgeless, 10.0), (1, true));
    }

    #[test]
    fn clique_matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..10 {
            let o = random_obs(&mut rng, 18, 3);
            let g = build_pauli_graph(&o, GraphMode::Tpb);
            let n = g.node_count();
            let mut brute = 0usize;
            for mask in 0u32..(1 << n) {
                let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                let is_clique = verts
                    .iter()
                    .enumerate()
                    .all(|(i, &a)| verts[i + 1..].iter().all(|&b| g.has_edge(a, b)));
                if is_clique {
                    brute = brute.max(verts.len());
                }
            }
            assert_eq!(max_clique(&g, 30.0), (brute, true));
        }
    }

    #[test]
    fn clique_time_limit_reports_inexact() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let o = random_obs(&mut rng, 50, 6);
        let g = build_pauli_graph(&o, GraphMode::Tpb);
        let (size, exact) = max_clique(&g, 0.0);
        assert!(!exact);
        assert!(size >= 1);
    }

    #[test]
    fn group_circuits_cover_every_qubit() {
        let o = obs(&["XXI", "YYI", "IZZ", "ZIZ"]);
        let r = group_observable(&o, GroupingMethod::Tpb2Q);
        let circuits = r.circuits().unwrap();
        assert_eq!(circuits.len(), r.k());
        for c in &circuits {
            assert_eq!(c.width(), 3);
            assert!(c.has_measurement());
        }
    }
}
