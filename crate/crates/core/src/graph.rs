//! Switching directed-graph process: piecewise-constant schedules, switching
//! instants, Laplacians, and the uniform joint strong connectivity check.

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::{Error, Result};

/// A directed graph on nodes `0..n`; an arc `(j, i)` means node `i` receives
/// from node `j`. Self-arcs are not allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl DirectedGraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (j, i) in arcs {
            if j >= n || i >= n {
                return Err(Error::InvalidConfig(format!(
                    "arc ({j}, {i}) references a node outside 0..{n}"
                )));
            }
            if j == i {
                return Err(Error::InvalidConfig(format!("self-arc ({i}, {i}) not allowed")));
            }
            set.insert((j, i));
        }
        Ok(DirectedGraph { n, arcs: set })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn complete(n: usize) -> Result<Self> {
        let arcs = (0..n).flat_map(|j| (0..n).filter(move |i| *i != j).map(move |i| (j, i)));
        Self::new(n, arcs)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn has_arc(&self, j: usize, i: usize) -> bool {
        self.arcs.contains(&(j, i))
    }

    /// In-neighbors of node `i` (the nodes it receives from).
    pub fn neighbors_in(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().filter(move |(_, t)| *t == i).map(|(j, _)| *j)
    }

    pub fn is_undirected(&self) -> bool {
        self.arcs.iter().all(|(j, i)| self.arcs.contains(&(*i, *j)))
    }

    /// Union of arc sets (node counts must agree).
    pub fn union(&self, other: &DirectedGraph) -> Result<DirectedGraph> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut arcs = self.arcs.clone();
        arcs.extend(other.arcs.iter().copied());
        Ok(DirectedGraph { n: self.n, arcs })
    }

    /// Graph Laplacian: `L[i][j] = -1` if `i` receives from `j`, diagonal is
    /// the in-degree. Row sums are exactly zero.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = Array2::zeros((self.n, self.n));
        for &(j, i) in &self.arcs {
            l[[i, j]] -= 1.0;
            l[[i, i]] += 1.0;
        }
        l
    }

    /// Tarjan strongly-connected-components decomposition; true iff the graph
    /// is a single component.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        // Adjacency in the "information flow" sense j -> i.
        let mut adj = vec![Vec::new(); self.n];
        for &(j, i) in &self.arcs {
            adj[j].push(i);
        }

        let mut index = vec![usize::MAX; self.n];
        let mut lowlink = vec![0usize; self.n];
        let mut on_stack = vec![false; self.n];
        let mut stack = Vec::new();
        let mut next_index = 0usize;
        let mut components = 0usize;

        // Iterative Tarjan: (node, child cursor).
        let mut call_stack: Vec<(usize, usize)> = Vec::new();
        for root in 0..self.n {
            if index[root] != usize::MAX {
                continue;
            }
            call_stack.push((root, 0));
            index[root] = next_index;
            lowlink[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&(v, cursor)) = call_stack.last() {
                if cursor < adj[v].len() {
                    let w = adj[v][cursor];
                    call_stack.last_mut().unwrap().1 += 1;
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        lowlink[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call_stack.push((w, 0));
                    } else if on_stack[w] {
                        lowlink[v] = lowlink[v].min(index[w]);
                    }
                } else {
                    call_stack.pop();
                    if let Some(&(parent, _)) = call_stack.last() {
                        lowlink[parent] = lowlink[parent].min(lowlink[v]);
                    }
                    if lowlink[v] == index[v] {
                        components += 1;
                        while let Some(w) = stack.pop() {
                            on_stack[w] = false;
                            if w == v {
                                break;
                            }
                        }
                    }
                }
            }
        }
        components == 1
    }
}

/// Piecewise-constant graph process: a list of `(graph, duration)` segments,
/// optionally repeated forever.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSchedule {
    segments: Vec<(DirectedGraph, f64)>,
    periodic: bool,
}

impl GraphSchedule {
    pub fn new(segments: Vec<(DirectedGraph, f64)>, periodic: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidConfig("graph schedule needs a segment".into()));
        }
        let n = segments[0].0.node_count();
        for (g, d) in &segments {
            if g.node_count() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.node_count(),
                });
            }
            if !(*d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "segment duration must be positive and finite, got {d}"
                )));
            }
        }
        Ok(GraphSchedule { segments, periodic })
    }

    pub fn node_count(&self) -> usize {
        self.segments[0].0.node_count()
    }

    pub fn segments(&self) -> &[(DirectedGraph, f64)] {
        &self.segments
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|(_, d)| d).sum()
    }

    /// Dwell time: the minimum gap between consecutive switches.
    pub fn dwell_time(&self) -> f64 {
        self.segments
            .iter()
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_undirected(&self) -> bool {
        self.segments.iter().all(|(g, _)| g.is_undirected())
    }

    /// Right-continuous lookup: the graph of the segment whose half-open
    /// interval `[t_k, t_{k+1})` contains `t`.
    pub fn graph_at(&self, t: f64) -> Result<&DirectedGraph> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidConfig(format!("time must be >= 0, got {t}")));
        }
        let total = self.total_duration();
        let local = if self.periodic {
            let r = t % total;
            if r == total {
                0.0
            } else {
                r
            }
        } else {
            if t >= total {
                return Err(Error::ScheduleExhausted { t });
            }
            t
        };
        let mut acc = 0.0;
        for (g, d) in &self.segments {
            acc += d;
            if local < acc {
                return Ok(g);
            }
        }
        // Floating-point slack at the very end of the period.
        Ok(&self.segments.last().unwrap().0)
    }

    /// Switching instants in `(0, horizon]`, in increasing order.
    pub fn switching_instants(&self, horizon: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let total = self.total_duration();
        let mut base = 0.0;
        loop {
            let mut acc = base;
            for (_, d) in &self.segments {
                acc += d;
                if acc > horizon + 1e-12 {
                    return out;
                }
                out.push(acc);
            }
            if !self.periodic {
                return out;
            }
            base += total;
        }
    }

    /// Union of the arc sets active over `[start, start + window)`.
    fn union_over(&self, start: f64, window: f64) -> Result<DirectedGraph> {
        let mut g = DirectedGraph::empty(self.node_count())?;
        let total = self.total_duration();
        if self.periodic && window >= total {
            for (seg, _) in &self.segments {
                g = g.union(seg)?;
            }
            return Ok(g);
        }
        let mut t = start;
        let end = start + window;
        let mut guard = 0;
        while t < end - 1e-12 {
            g = g.union(self.graph_at(t)?)?;
            // Advance to the next switching instant after t.
            let local = if self.periodic { t % total } else { t };
            let mut acc = 0.0;
            let mut next = None;
            for (_, d) in &self.segments {
                acc += d;
                if local < acc - 1e-12 {
                    next = Some(t + (acc - local));
                    break;
                }
            }
            t = next.unwrap_or(t + total);
            guard += 1;
            if guard > 100_000 {
                break;
            }
        }
        Ok(g)
    }

    /// Uniform joint strong connectivity: every window of length `window`
    /// has a strongly connected union graph.
    ///
    /// Decidable only for periodic schedules: the union over `[t, t + w)`
    /// changes only at switching instants, so checking window starts at
    /// `t = 0` and at each switching instant within one period suffices.
    pub fn is_ujsc(&self, window: f64) -> Result<bool> {
        if !self.periodic {
            return Err(Error::UjscUndecidable);
        }
        if !(window > 0.0) {
            return Err(Error::InvalidConfig("window must be positive".into()));
        }
        let total = self.total_duration();
        let mut starts = vec![0.0];
        starts.extend(
            self.switching_instants(total)
                .into_iter()
                .filter(|t| *t < total - 1e-12),
        );
        for s in starts {
            if !self.union_over(s, window)?.is_strongly_connected() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Periodic two-segment schedule on three nodes with directed arcs
    /// e1 = {(2,1),(3,2)}, e2 = {(1,3)} (1-based labels).
    fn directed_demo() -> GraphSchedule {
        let e1 = DirectedGraph::new(3, [(1, 0), (2, 1)]).unwrap();
        let e2 = DirectedGraph::new(3, [(0, 2)]).unwrap();
        GraphSchedule::new(vec![(e1, 1.0), (e2, 1.0)], true).unwrap()
    }

    #[test]
    fn graph_at_lookup_and_wrap() {
        let s = directed_demo();
        let e1 = DirectedGraph::new(3, [(1, 0), (2, 1)]).unwrap();
        let e2 = DirectedGraph::new(3, [(0, 2)]).unwrap();
        assert_eq!(s.graph_at(0.5).unwrap(), &e1);
        // Right-continuity at the switch.
        assert_eq!(s.graph_at(1.0).unwrap(), &e2);
        // Periodic wraparound: 3.5 mod 2 = 1.5.
        assert_eq!(s.graph_at(3.5).unwrap(), &e2);
    }

    #[test]
    fn nonperiodic_schedule_exhausts() {
        let g = DirectedGraph::new(2, [(0, 1)]).unwrap();
        let s = GraphSchedule::new(vec![(g, 2.0)], false).unwrap();
        assert!(s.graph_at(1.9).is_ok());
        assert!(matches!(
            s.graph_at(2.5),
            Err(Error::ScheduleExhausted { .. })
        ));
    }

    #[test]
    fn switching_instants_examples() {
        let s = directed_demo();
        assert_eq!(s.switching_instants(3.0), vec![1.0, 2.0, 3.0]);

        let g = DirectedGraph::new(2, [(0, 1)]).unwrap();
        let single = GraphSchedule::new(vec![(g.clone(), 10.0)], false).unwrap();
        assert!(single.switching_instants(3.0).is_empty());

        let short = GraphSchedule::new(vec![(g, 5.0)], false).unwrap();
        assert!(short.switching_instants(4.0).is_empty());
    }

    #[test]
    fn laplacian_rows() {
        let e1 = DirectedGraph::new(3, [(1, 0), (2, 1)]).unwrap();
        let l = e1.laplacian();
        assert_eq!(
            l.rows().into_iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            vec![
                vec![1.0, -1.0, 0.0],
                vec![0.0, 1.0, -1.0],
                vec![0.0, 0.0, 0.0]
            ]
        );
        assert_eq!(DirectedGraph::empty(3).unwrap().laplacian(), Array2::zeros((3, 3)));
        let k3 = DirectedGraph::complete(3).unwrap().laplacian();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k3[[i, j]], if i == j { 2.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn laplacian_row_sums_zero() {
        let g = DirectedGraph::new(4, [(0, 1), (2, 1), (3, 0), (1, 3)]).unwrap();
        for row in g.laplacian().rows() {
            assert_eq!(row.sum(), 0.0);
        }
    }

    #[test]
    fn ujsc_directed_cycle() {
        assert!(directed_demo().is_ujsc(2.0).unwrap());
    }

    #[test]
    fn ujsc_unreachable_node() {
        let g = DirectedGraph::new(3, [(0, 1)]).unwrap();
        let s = GraphSchedule::new(vec![(g, 1.0)], true).unwrap();
        for w in [0.5, 1.0, 2.0, 7.0] {
            assert!(!s.is_ujsc(w).unwrap());
        }
    }

    #[test]
    fn ujsc_undirected_path() {
        let e1 = DirectedGraph::new(3, [(2, 1), (1, 2)]).unwrap();
        let e2 = DirectedGraph::new(3, [(0, 1), (1, 0)]).unwrap();
        let s = GraphSchedule::new(vec![(e1, 1.0), (e2, 1.0)], true).unwrap();
        assert!(s.is_ujsc(2.0).unwrap());
        assert!(s.is_undirected());
    }

    #[test]
    fn ujsc_monotone_in_window() {
        let s = directed_demo();
        let mut prev = false;
        for w in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let now = s.is_ujsc(w).unwrap();
            assert!(!prev || now, "UJSC not monotone at window {w}");
            prev = now;
        }
    }

    #[test]
    fn ujsc_nonperiodic_undecidable() {
        let g = DirectedGraph::new(2, [(0, 1)]).unwrap();
        let s = GraphSchedule::new(vec![(g, 1.0)], false).unwrap();
        assert!(matches!(s.is_ujsc(1.0), Err(Error::UjscUndecidable)));
    }

    #[test]
    fn graph_at_changes_only_at_switching_instants() {
        let s = directed_demo();
        let instants = s.switching_instants(6.0);
        let mut t = 0.0;
        let mut prev = s.graph_at(0.0).unwrap().clone();
        while t < 5.99 {
            t += 0.01;
            let g = s.graph_at(t).unwrap().clone();
            if g != prev {
                assert!(
                    instants.iter().any(|s| (s - t).abs() < 0.011),
                    "change at {t} away from switching instants"
                );
            }
            prev = g;
        }
    }

    #[test]
    fn self_arcs_rejected() {
        assert!(DirectedGraph::new(3, [(1, 1)]).is_err());
        assert!(DirectedGraph::new(3, [(5, 0)]).is_err());
    }
}
