//! Symbolic dynamics of the Markov partition attached to a simple pair.
//!
//! For a pair with periods `p1 > p2` the partition has `3*p1 + 3*p2 + 1`
//! rectangles, labelled `r1 ..` by edge type of the invariant graph. Only the
//! skeleton of allowed transitions used to build new orbits is modelled: the
//! upper loop through the `B` rectangles, the lower loop through the `D`
//! rectangles, and the chain of `L` rectangles returning to the upper loop.
//!
//! Rotation numbers are assigned by horizontal displacement. A full lap of the
//! `B` loop moves `q1` over `p1` steps; a lap of the `D` loop and a pass through
//! the `L` chain each move `q2` over `p2` steps. With the `D` loop taken `m - 1`
//! times this gives the total `n*q1 + m*q2` for `O(n, m)`. An alternative
//! reading attributes `q1` to the `L` chain instead; it does not reproduce that
//! total and is not used.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::forcing::{forced_set, ForcingElement};
use crate::rational::{weighted_mediant, FareyPair, Rational};

/// Guard on cycle lengths for enumeration.
pub const MAX_CYCLE_LEN: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum RectKind {
    A,
    B,
    C,
    D,
    K,
    L,
    M,
}

impl fmt::Display for RectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct RectangleId {
    pub index: usize,
    pub kind: RectKind,
}

impl fmt::Display for RectangleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}:{}", self.index, self.kind)
    }
}

fn periods(pair: &FareyPair) -> (usize, usize) {
    (pair.long().den() as usize, pair.short().den() as usize)
}

fn kind_of(p1: usize, p2: usize, index: usize) -> Option<RectKind> {
    let kind = match index {
        0 => return None,
        i if i <= p2 => RectKind::D,
        i if i <= 2 * p2 => RectKind::C,
        i if i <= 3 * p2 => RectKind::L,
        i if i <= 4 * p2 => RectKind::K,
        i if i <= 4 * p2 + p1 => RectKind::A,
        // the last B edge is split in two
        i if i <= 4 * p2 + 2 * p1 + 1 => RectKind::B,
        i if i <= 3 * p1 + 3 * p2 + 1 => RectKind::M,
        _ => return None,
    };
    Some(kind)
}

/// All rectangles of the partition, in index order.
pub fn label_rectangles(pair: &FareyPair) -> Vec<RectangleId> {
    let (p1, p2) = periods(pair);
    (1..=3 * p1 + 3 * p2 + 1)
        .map(|index| RectangleId {
            index,
            kind: kind_of(p1, p2, index).expect("index in range"),
        })
        .collect()
}

/// Allowed transitions between rectangles of a simple pair's partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    pair: FareyPair,
    n_rectangles: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl TransitionGraph {
    pub fn pair(&self) -> &FareyPair {
        &self.pair
    }

    pub fn n_rectangles(&self) -> usize {
        self.n_rectangles
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((from, 0)..=(from, usize::MAX))
            .map(|&(_, to)| to)
    }

    pub fn rectangle(&self, index: usize) -> Option<RectangleId> {
        let (p1, p2) = periods(&self.pair);
        kind_of(p1, p2, index).map(|kind| RectangleId { index, kind })
    }

    /// `r_{p1+4p2+1} .. r_{2p1+4p2}`.
    pub fn b_loop(&self) -> Vec<usize> {
        let (p1, p2) = periods(&self.pair);
        (p1 + 4 * p2 + 1..=2 * p1 + 4 * p2).collect()
    }

    /// `r_1 .. r_{p2}`.
    pub fn d_loop(&self) -> Vec<usize> {
        let (_, p2) = periods(&self.pair);
        (1..=p2).collect()
    }

    /// `r_{2p2+1} .. r_{3p2}`.
    pub fn connector(&self) -> Vec<usize> {
        let (_, p2) = periods(&self.pair);
        (2 * p2 + 1..=3 * p2).collect()
    }

    fn block_entries(&self) -> (usize, usize, usize) {
        let (p1, p2) = periods(&self.pair);
        (p1 + 4 * p2 + 1, 1, 2 * p2 + 1)
    }

    /// Horizontal displacement charged on entering rectangle `index`.
    pub fn displacement(&self, index: usize) -> u64 {
        let (b, d, l) = self.block_entries();
        if index == b {
            self.pair.long().num()
        } else if index == d || index == l {
            self.pair.short().num()
        } else {
            0
        }
    }

    /// Graphviz rendering; every rectangle is a node labelled `r<i>:<kind>`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph markov {\n");
        for r in label_rectangles(&self.pair) {
            out.push_str(&format!("  r{} [label=\"{}\"];\n", r.index, r));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  r{a} -> r{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// The subgraph of transitions used to build the `O(n, m)` family.
pub fn build_skeleton_graph(pair: &FareyPair) -> TransitionGraph {
    let (p1, p2) = periods(pair);
    let mut edges = BTreeSet::new();

    let b_first = p1 + 4 * p2 + 1;
    let b_last = 2 * p1 + 4 * p2;
    for i in b_first..b_last {
        edges.insert((i, i + 1));
    }
    edges.insert((b_last, b_first));

    for i in 1..p2 {
        edges.insert((i, i + 1));
    }
    edges.insert((p2, 1));

    let l_first = 2 * p2 + 1;
    let l_last = 3 * p2;
    edges.insert((b_last, 1));
    edges.insert((p2, l_first));
    edges.insert((b_last, l_first));
    for i in l_first..l_last {
        edges.insert((i, i + 1));
    }
    edges.insert((l_last, b_first));

    TransitionGraph {
        pair: *pair,
        n_rectangles: 3 * p1 + 3 * p2 + 1,
        edges,
    }
}

fn canonical_rotation(word: &[usize]) -> Vec<usize> {
    (0..word.len())
        .map(|s| {
            word[s..]
                .iter()
                .chain(&word[..s])
                .copied()
                .collect::<Vec<_>>()
        })
        .min()
        .unwrap_or_default()
}

/// A periodic allowed sequence of rectangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicCycle {
    word: Vec<RectangleId>,
    canonical: Vec<usize>,
}

impl SymbolicCycle {
    /// Checks every transition, including the wrap-around one, against `graph`.
    pub fn new(indices: Vec<usize>, graph: &TransitionGraph) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::NotAllowedCycle("empty word".into()));
        }
        let mut word = Vec::with_capacity(indices.len());
        for (i, &from) in indices.iter().enumerate() {
            let to = indices[(i + 1) % indices.len()];
            if !graph.has_edge(from, to) {
                return Err(Error::NotAllowedCycle(format!(
                    "no transition r{from} -> r{to}"
                )));
            }
            word.push(graph.rectangle(from).expect("edge endpoints are valid"));
        }
        let canonical = canonical_rotation(&indices);
        Ok(SymbolicCycle { word, canonical })
    }

    /// The word as constructed.
    pub fn word(&self) -> &[RectangleId] {
        &self.word
    }

    pub fn indices(&self) -> Vec<usize> {
        self.word.iter().map(|r| r.index).collect()
    }

    /// Lexicographically least rotation of the index sequence.
    pub fn canonical(&self) -> &[usize] {
        &self.canonical
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Not a repetition of a shorter word.
    pub fn is_primitive(&self) -> bool {
        let n = self.canonical.len();
        (1..n)
            .filter(|d| n.is_multiple_of(*d))
            .all(|d| self.canonical[d..] != self.canonical[..n - d])
    }
}

impl fmt::Display for SymbolicCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.word.iter().map(|r| format!("r{}", r.index)).collect();
        write!(f, "{}", parts.join(" -> "))
    }
}

/// `O(n, m)`: `n` laps of the `B` loop, `m - 1` laps of the `D` loop, then the
/// `L` chain back to the start.
pub fn build_onm(pair: &FareyPair, n: usize, m: usize) -> Result<SymbolicCycle> {
    if n == 0 || m == 0 {
        return Err(Error::ZeroWeights);
    }
    let graph = build_skeleton_graph(pair);
    let mut word = Vec::new();
    for _ in 0..n {
        word.extend(graph.b_loop());
    }
    for _ in 1..m {
        word.extend(graph.d_loop());
    }
    word.extend(graph.connector());
    SymbolicCycle::new(word, &graph)
}

/// Splits an allowed word into laps and counts `(B laps, D laps + L passes)`.
fn block_counts(indices: &[usize], graph: &TransitionGraph) -> Result<(u64, u64)> {
    let (b_entry, d_entry, l_entry) = graph.block_entries();
    let start = indices
        .iter()
        .position(|&i| i == b_entry)
        .or_else(|| indices.iter().position(|&i| i == d_entry))
        .ok_or_else(|| Error::NotAllowedCycle("word never enters a loop".into()))?;
    let rotated: Vec<usize> = indices[start..]
        .iter()
        .chain(&indices[..start])
        .copied()
        .collect();

    let blocks = [
        (b_entry, graph.b_loop(), true),
        (d_entry, graph.d_loop(), false),
        (l_entry, graph.connector(), false),
    ];
    let (mut a, mut b) = (0, 0);
    let mut pos = 0;
    while pos < rotated.len() {
        let (_, block, is_b) = blocks
            .iter()
            .find(|(entry, _, _)| *entry == rotated[pos])
            .ok_or_else(|| {
                Error::NotAllowedCycle(format!("r{} does not start a block", rotated[pos]))
            })?;
        let end = pos + block.len();
        if end > rotated.len() || rotated[pos..end] != block[..] {
            return Err(Error::NotAllowedCycle("incomplete block".into()));
        }
        if *is_b {
            a += 1;
        } else {
            b += 1;
        }
        pos = end;
    }
    Ok((a, b))
}

/// `(a*q1 + b*q2) / (a*p1 + b*p2)` for a cycle with `a` laps of the `B` loop
/// and `b` laps of the `D` loop or passes through the `L` chain.
pub fn cycle_rotation_number(cycle: &SymbolicCycle, pair: &FareyPair) -> Result<Rational> {
    let graph = build_skeleton_graph(pair);
    let indices = cycle.indices();
    // re-validate against this pair's graph
    SymbolicCycle::new(indices.clone(), &graph)?;
    let (a, b) = block_counts(&indices, &graph)?;
    weighted_mediant(pair.long(), pair.short(), a, b)
}

/// All primitive allowed cycles of length `<= max_len`, one per rotation class,
/// sorted by length then canonical word.
pub fn enumerate_cycles(graph: &TransitionGraph, max_len: usize) -> Result<Vec<SymbolicCycle>> {
    if max_len > MAX_CYCLE_LEN {
        return Err(Error::LengthTooLarge(max_len, MAX_CYCLE_LEN));
    }
    let (b_entry, d_entry, _) = graph.block_entries();
    // Every cycle passes through one of the roots; a cycle rooted at a later
    // root avoids the earlier ones.
    let roots = [b_entry, d_entry];
    let mut seen = HashSet::new();
    let mut out = Vec::new();

    for (ri, &root) in roots.iter().enumerate() {
        let banned = &roots[..ri];
        let mut path = vec![root];
        let mut stack: Vec<std::vec::IntoIter<usize>> =
            vec![graph.successors(root).collect::<Vec<_>>().into_iter()];
        while let Some(iter) = stack.last_mut() {
            let Some(next) = iter.next() else {
                stack.pop();
                path.pop();
                continue;
            };
            // walks may pass through the root again (several laps)
            if next == root && path.len() <= max_len {
                let cycle = SymbolicCycle::new(path.clone(), graph)?;
                if cycle.is_primitive() && seen.insert(cycle.canonical.clone()) {
                    out.push(cycle);
                }
            }
            if banned.contains(&next) || path.len() >= max_len {
                continue;
            }
            path.push(next);
            stack.push(graph.successors(next).collect::<Vec<_>>().into_iter());
        }
    }
    out.sort_by(|x, y| (x.len(), &x.canonical).cmp(&(y.len(), &y.canonical)));
    Ok(out)
}

/// Rotation numbers of every closed walk of length `<= max_period` in the
/// skeleton graph.
///
/// Tracks `(rectangle, steps, displacement)` states rather than listing
/// cycles, which keeps the cost polynomial in `max_period`.
pub fn realized_rotation_numbers(
    pair: &FareyPair,
    max_period: usize,
) -> Result<BTreeSet<Rational>> {
    if max_period > MAX_CYCLE_LEN {
        return Err(Error::LengthTooLarge(max_period, MAX_CYCLE_LEN));
    }
    let graph = build_skeleton_graph(pair);
    let (b_entry, d_entry, _) = graph.block_entries();
    let mut out = BTreeSet::new();
    if max_period == 0 {
        return Ok(out);
    }

    for root in [b_entry, d_entry] {
        let start = (root, 1usize, graph.displacement(root));
        let mut visited = HashSet::from([start]);
        let mut stack = vec![start];
        while let Some((v, len, disp)) = stack.pop() {
            for u in graph.successors(v) {
                if u == root {
                    out.insert(Rational::new(disp as i64, len as i64)?);
                }
                if len < max_period {
                    let state = (u, len + 1, disp + graph.displacement(u));
                    if visited.insert(state) {
                        stack.push(state);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of checking the forced orbits of a pair against its symbolic cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovCheck {
    pub pair: FareyPair,
    pub max_den: u64,
    pub max_period: usize,
    pub orbits_checked: usize,
    /// Forced rotation numbers with no realising cycle.
    pub missing: Vec<Rational>,
    /// Realised rotation numbers outside the pair's interval.
    pub outside: Vec<Rational>,
}

impl MarkovCheck {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.outside.is_empty()
    }
}

/// Every orbit in the forcing closure of `pair` up to `max_den` must have a
/// realising symbolic cycle, and nothing realised may fall outside the pair.
pub fn verify_against_forcing(pair: &FareyPair, max_den: u64) -> Result<MarkovCheck> {
    let max_period = (max_den as usize).max(pair.long().den() as usize);
    let realized = realized_rotation_numbers(pair, max_period)?;
    let orbits: Vec<Rational> = forced_set(pair, max_den)
        .into_iter()
        .filter_map(|e| match e {
            ForcingElement::Orbit(r) => Some(r),
            ForcingElement::Pair(_) => None,
        })
        .collect();
    Ok(MarkovCheck {
        pair: *pair,
        max_den,
        max_period,
        orbits_checked: orbits.len(),
        missing: orbits
            .iter()
            .filter(|r| !realized.contains(r))
            .copied()
            .collect(),
        outside: realized
            .iter()
            .filter(|r| !pair.contains(**r))
            .copied()
            .collect(),
    })
}
