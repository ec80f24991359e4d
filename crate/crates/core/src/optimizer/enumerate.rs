use std::collections::HashSet;

use crate::diagram::{Cell, Diagram};
use crate::error::{Error, Result};

/// Largest grid side accepted by [`enumerate_diagrams`].
pub const ENUMERATION_LIMIT: usize = 6;

/// Backtracking over clique assignments of an ordered cell list, with
/// cross-closure checked as soon as all four cells of a cross are decided.
pub(super) struct CliqueSearch<'a> {
    pub d_a: usize,
    pub d_b: usize,
    pub cells: Vec<Cell>,
    /// Cells may be left out of the diagram.
    pub optional: bool,
    /// Whether two cells (by index) may share a clique; diagonality is checked separately.
    pub compatible: &'a dyn Fn(usize, usize) -> bool,
    pub min_cliques: usize,
    pub max_cliques: usize,
    pub forbid_singletons: bool,
    pub cover_all_lines: bool,
}

struct State {
    label: Vec<Option<usize>>,
    cliques: Vec<Vec<usize>>,
    /// (u, v, p, q): if u and v share a clique then p and q must too; keyed by
    /// the largest of the four indices.
    checks: Vec<Vec<[usize; 4]>>,
}

impl CliqueSearch<'_> {
    pub fn run(&self, mut emit: impl FnMut(Diagram)) {
        let n = self.cells.len();
        let index = |c: Cell| self.cells.iter().position(|&x| x == c);
        let mut checks = vec![Vec::new(); n];
        for u in 0..n {
            for v in u + 1..n {
                let ((a, b), (a2, b2)) = (self.cells[u], self.cells[v]);
                if a == a2 || b == b2 {
                    continue;
                }
                if let (Some(p), Some(q)) = (index((a, b2)), index((a2, b))) {
                    let last = u.max(v).max(p).max(q);
                    checks[last].push([u, v, p, q]);
                }
            }
        }
        let mut st = State {
            label: vec![None; n],
            cliques: Vec::new(),
            checks,
        };
        self.step(0, &mut st, &mut emit);
    }

    fn closure_ok(&self, i: usize, st: &State) -> bool {
        st.checks[i]
            .iter()
            .all(|&[u, v, p, q]| match (st.label[u], st.label[v]) {
                (Some(x), Some(y)) if x == y => st.label[p].is_some() && st.label[p] == st.label[q],
                _ => true,
            })
    }

    fn step(&self, i: usize, st: &mut State, emit: &mut impl FnMut(Diagram)) {
        let n = self.cells.len();
        if st.cliques.len() > self.max_cliques {
            return;
        }
        if !self.optional && st.cliques.len() + (n - i) < self.min_cliques {
            return;
        }
        if i == n {
            self.leaf(st, emit);
            return;
        }
        let (a, b) = self.cells[i];

        if self.optional {
            st.label[i] = None;
            if self.closure_ok(i, st) {
                self.step(i + 1, st, emit);
            }
        }
        for k in 0..st.cliques.len() {
            let fits = st.cliques[k].iter().all(|&j| {
                let (a2, b2) = self.cells[j];
                a2 != a && b2 != b && (self.compatible)(j, i)
            });
            if !fits {
                continue;
            }
            st.label[i] = Some(k);
            st.cliques[k].push(i);
            if self.closure_ok(i, st) {
                self.step(i + 1, st, emit);
            }
            st.cliques[k].pop();
        }
        if st.cliques.len() < self.max_cliques {
            st.label[i] = Some(st.cliques.len());
            st.cliques.push(vec![i]);
            if self.closure_ok(i, st) {
                self.step(i + 1, st, emit);
            }
            st.cliques.pop();
        }
        st.label[i] = None;
    }

    fn leaf(&self, st: &State, emit: &mut impl FnMut(Diagram)) {
        let count = st.cliques.len();
        if count < self.min_cliques || count > self.max_cliques {
            return;
        }
        if self.forbid_singletons && st.cliques.iter().any(|c| c.len() < 2) {
            return;
        }
        let cliques: Vec<Vec<Cell>> = st
            .cliques
            .iter()
            .map(|c| c.iter().map(|&j| self.cells[j]).collect())
            .collect();
        let diagram = Diagram::new(self.d_a, self.d_b, cliques)
            .expect("search keeps cliques disjoint and diagonal");
        if self.cover_all_lines && !diagram.covers_all_lines() {
            return;
        }
        emit(diagram);
    }
}

/// All admissible diagrams on a `d_a x d_b` grid with at most `max_cliques`
/// cliques, one canonical representative per row/column-permutation class.
///
/// Admissible: disjoint diagonal cliques of at least two cells, cross-closed
/// edges, and every row and column occupied.
pub fn enumerate_diagrams(d_a: usize, d_b: usize, max_cliques: usize) -> Result<Vec<Diagram>> {
    if d_a > ENUMERATION_LIMIT || d_b > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard {
            d_a,
            d_b,
            limit: ENUMERATION_LIMIT,
        });
    }
    if d_a == 0 || d_b == 0 {
        return Ok(Vec::new());
    }
    let cells: Vec<Cell> = (0..d_a)
        .flat_map(|a| (0..d_b).map(move |b| (a, b)))
        .collect();
    let always = |_: usize, _: usize| true;
    let search = CliqueSearch {
        d_a,
        d_b,
        cells,
        optional: true,
        compatible: &always,
        min_cliques: 1,
        max_cliques,
        forbid_singletons: true,
        cover_all_lines: true,
    };
    let mut seen = HashSet::new();
    search.run(|d| {
        seen.insert(d.canonical_form());
    });
    let mut out: Vec<Diagram> = seen.into_iter().collect();
    out.sort_by(|x, y| x.cliques().cmp(y.cliques()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_has_only_the_full_cross() {
        let ds = enumerate_diagrams(2, 2, 4).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(
            ds[0].cliques(),
            &[vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]]
        );
    }

    #[test]
    fn clique_cap_applies() {
        assert!(enumerate_diagrams(2, 2, 1).unwrap().is_empty());
        assert!(enumerate_diagrams(3, 3, 3).unwrap().is_empty());
    }

    #[test]
    fn guard() {
        assert!(matches!(
            enumerate_diagrams(7, 2, 3),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn members_are_admissible_and_canonical() {
        for d in enumerate_diagrams(3, 4, 6).unwrap() {
            assert!(d.is_union_of_crosses() && d.covers_all_lines());
            assert_eq!(d.canonical_form(), d);
        }
    }
}
