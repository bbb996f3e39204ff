//! Reachability and strongly connected components on the edge graph `(S, E)`.

use std::collections::VecDeque;
use std::fmt::Write;

use crate::model::Imc;
use crate::stateset::StateSet;

#[derive(Clone, Debug)]
pub struct Digraph {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); vertices];
        let mut pred = vec![Vec::new(); vertices];
        for (s, t) in edges {
            succ[s].push(t);
            pred[t].push(s);
        }
        Digraph { succ, pred }
    }

    pub fn from_imc(m: &Imc) -> Self {
        Self::new(m.len(), m.edges().into_iter().map(|e| (e.source, e.target)))
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    /// Vertices with a (possibly empty) path into `target`.
    pub fn can_reach(&self, target: &StateSet) -> StateSet {
        let mut seen = target.clone();
        let mut queue: VecDeque<usize> = target.iter().collect();
        while let Some(v) = queue.pop_front() {
            for &p in &self.pred[v] {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// SCCs of the subgraph induced by `restrict`, ordered by smallest member.
    ///
    /// Every vertex of `restrict` lands in exactly one component; isolated
    /// vertices come back as singletons whether or not they have a self-loop.
    pub fn sccs(&self, restrict: &StateSet) -> Vec<StateSet> {
        const UNVISITED: usize = usize::MAX;
        let n = self.len();
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut out = Vec::new();
        // (vertex, position in its successor list)
        let mut call: Vec<(usize, usize)> = Vec::new();

        for root in restrict.iter() {
            if index[root] != UNVISITED {
                continue;
            }
            call.push((root, 0));
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if let Some(&w) = self.succ[v].get(*pos) {
                    *pos += 1;
                    if !restrict.contains(w) {
                        continue;
                    }
                    if index[w] == UNVISITED {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = StateSet::empty(n);
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.insert(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
        out.sort_by_key(|c| c.first());
        out
    }

    pub fn is_strongly_connected(&self, set: &StateSet) -> bool {
        !set.is_empty() && self.sccs(set).len() == 1
    }
}

/// Graphviz rendering of the edge graph, labelled with intervals.
pub fn to_dot(m: &Imc) -> String {
    let mut out = String::from("digraph imc {\n");
    for name in m.states() {
        let _ = writeln!(out, "  \"{name}\";");
    }
    for s in 0..m.len() {
        for (t, iv) in m.row(s) {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                m.name(s),
                m.name(*t),
                iv
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{fig1, fig2};
    use proptest::prelude::*;

    #[test]
    fn reach_on_fixtures() {
        let g1 = Digraph::from_imc(&fig1());
        assert_eq!(
            g1.can_reach(&StateSet::from_indices(2, [1])).to_vec(),
            vec![0, 1]
        );
        let g2 = Digraph::from_imc(&fig2());
        assert_eq!(
            g2.can_reach(&StateSet::from_indices(3, [0])).to_vec(),
            vec![0, 1]
        );
        assert!(g2.can_reach(&StateSet::empty(3)).is_empty());
    }

    #[test]
    fn sccs_on_fixtures() {
        let g2 = Digraph::from_imc(&fig2());
        assert_eq!(
            g2.sccs(&StateSet::from_indices(3, [0, 1])),
            vec![StateSet::from_indices(3, [0, 1])]
        );
        let g1 = Digraph::from_imc(&fig1());
        assert_eq!(
            g1.sccs(&StateSet::from_indices(2, [0])),
            vec![StateSet::from_indices(2, [0])]
        );
        let bare = Digraph::new(2, []);
        assert_eq!(bare.sccs(&StateSet::full(2)).len(), 2);
    }

    #[test]
    fn dot_lists_edges() {
        let dot = to_dot(&fig1());
        assert!(dot.contains("\"s0\" -> \"s1\" [label=\"(0,1)\"]"));
    }

    fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(s, t) in edges {
            r[s][t] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if r[i][k] && r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
        r
    }

    proptest! {
        #[test]
        fn reach_matches_transitive_closure(
            n in 1usize..=6,
            raw in prop::collection::vec((0usize..6, 0usize..6), 0..20),
            tmask in 0u32..64,
        ) {
            let edges: Vec<(usize, usize)> = raw.into_iter().filter(|&(s, t)| s < n && t < n).collect();
            let g = Digraph::new(n, edges.clone());
            let target = StateSet::from_indices(n, (0..n).filter(|i| tmask & (1 << i) != 0));
            let reach = g.can_reach(&target);
            let tc = closure(n, &edges);
            for (s, row) in tc.iter().enumerate() {
                let expected = target.iter().any(|t| row[t]);
                prop_assert_eq!(reach.contains(s), expected);
            }
            prop_assert!(target.is_subset(&reach));
        }

        #[test]
        fn sccs_partition_and_match_mutual_reachability(
            n in 1usize..=6,
            raw in prop::collection::vec((0usize..6, 0usize..6), 0..20),
            rmask in 0u32..64,
        ) {
            let edges: Vec<(usize, usize)> = raw.into_iter().filter(|&(s, t)| s < n && t < n).collect();
            let restrict = StateSet::from_indices(n, (0..n).filter(|i| rmask & (1 << i) != 0));
            let induced: Vec<(usize, usize)> = edges.iter().copied()
                .filter(|&(s, t)| restrict.contains(s) && restrict.contains(t)).collect();
            let g = Digraph::new(n, edges);
            let comps = g.sccs(&restrict);
            let mut union = StateSet::empty(n);
            for c in &comps {
                prop_assert!(union.is_disjoint(c));
                union.union_with(c);
            }
            prop_assert_eq!(&union, &restrict);
            let tc = closure(n, &induced);
            for c in &comps {
                for a in c.iter() {
                    for b in restrict.iter() {
                        prop_assert_eq!(c.contains(b), tc[a][b] && tc[b][a]);
                    }
                }
            }
        }
    }
}
