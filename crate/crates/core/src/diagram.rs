//! Grid diagrams: the nonzero cells of P_AB partitioned into Eve's cliques.

use std::collections::BTreeSet;

use crate::dist::{JointDistribution3, MarginalDistribution, ZERO_THRESHOLD};
use crate::error::{Error, Result};

/// A grid cell `(a, b)`.
pub type Cell = (usize, usize);

/// The 2x2 submatrix on rows `{a0, a1}` and columns `{b0, b1}`, with
/// `a0 < a1` and `b0 < b1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Cross {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl Cross {
    fn spanning(u: Cell, v: Cell) -> Self {
        Cross {
            rows: (u.0.min(v.0), u.0.max(v.0)),
            cols: (u.1.min(v.1), u.1.max(v.1)),
        }
    }

    /// The determinant p(a0,b0) p(a1,b1) - p(a0,b1) p(a1,b0).
    pub fn determinant(&self, p_ab: &MarginalDistribution) -> f64 {
        let (a0, a1) = self.rows;
        let (b0, b1) = self.cols;
        p_ab.get2(a0, b0) * p_ab.get2(a1, b1) - p_ab.get2(a0, b1) * p_ab.get2(a1, b0)
    }
}

/// Disjoint diagonal cliques on a `d_a x d_b` grid.
///
/// Cliques are kept in canonical order: cells sorted within each clique, and
/// cliques sorted by their smallest cell. A clique's index is Eve's symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    d_a: usize,
    d_b: usize,
    cliques: Vec<Vec<Cell>>,
}

impl Diagram {
    pub fn new(d_a: usize, d_b: usize, cliques: Vec<Vec<Cell>>) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidDiagram(
                "grid dimensions must be positive".into(),
            ));
        }
        let mut used = vec![false; d_a * d_b];
        for clique in &cliques {
            if clique.is_empty() {
                return Err(Error::InvalidDiagram("empty clique".into()));
            }
            for (i, &(a, b)) in clique.iter().enumerate() {
                if a >= d_a || b >= d_b {
                    return Err(Error::InvalidDiagram(format!(
                        "cell ({a}, {b}) outside {d_a}x{d_b} grid"
                    )));
                }
                if std::mem::replace(&mut used[a * d_b + b], true) {
                    return Err(Error::InvalidDiagram(format!(
                        "cell ({a}, {b}) appears twice"
                    )));
                }
                for &(a2, b2) in &clique[..i] {
                    if a2 == a || b2 == b {
                        return Err(Error::InvalidDiagram(format!(
                            "clique is not diagonal: ({a2}, {b2}) and ({a}, {b}) share a row or column"
                        )));
                    }
                }
            }
        }
        Ok(Self::canonical_labels(d_a, d_b, cliques))
    }

    fn canonical_labels(d_a: usize, d_b: usize, mut cliques: Vec<Vec<Cell>>) -> Self {
        cliques.iter_mut().for_each(|c| c.sort_unstable());
        cliques.sort_unstable();
        Self { d_a, d_b, cliques }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Number of cliques, i.e. the size of Eve's alphabet.
    pub fn d_e(&self) -> usize {
        self.cliques.len()
    }

    pub fn cliques(&self) -> &[Vec<Cell>] {
        &self.cliques
    }

    pub fn cell_count(&self) -> usize {
        self.cliques.iter().map(Vec::len).sum()
    }

    /// Clique label of each cell, row-major; `None` for empty cells.
    pub fn label_grid(&self) -> Vec<Option<usize>> {
        let mut grid = vec![None; self.d_a * self.d_b];
        for (e, clique) in self.cliques.iter().enumerate() {
            for &(a, b) in clique {
                grid[a * self.d_b + b] = Some(e);
            }
        }
        grid
    }

    pub fn label(&self, cell: Cell) -> Option<usize> {
        self.cliques.iter().position(|c| c.contains(&cell))
    }

    /// Every pair of cells sharing a clique.
    pub fn edges(&self) -> Vec<(Cell, Cell)> {
        let mut out = Vec::new();
        for clique in &self.cliques {
            for (i, &u) in clique.iter().enumerate() {
                for &v in &clique[i + 1..] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// The distinct 2x2 submatrices spanned by an edge of the diagram.
    pub fn crosses(&self) -> Vec<Cross> {
        let set: BTreeSet<Cross> = self
            .edges()
            .into_iter()
            .map(|(u, v)| Cross::spanning(u, v))
            .collect();
        set.into_iter().collect()
    }

    /// Every edge (a,b)-(a',b') has its partner edge (a,b')-(a',b) in the diagram.
    pub fn is_cross_closed(&self) -> bool {
        let grid = self.label_grid();
        self.edges().into_iter().all(|((a, b), (a2, b2))| {
            let x = grid[a * self.d_b + b2];
            let y = grid[a2 * self.d_b + b];
            x.is_some() && x == y
        })
    }

    /// Cross-closed with every cell on at least one edge.
    pub fn is_union_of_crosses(&self) -> bool {
        self.cliques.iter().all(|c| c.len() >= 2) && self.is_cross_closed()
    }

    /// Every row and column holds at least one cell.
    pub fn covers_all_lines(&self) -> bool {
        let mut rows = vec![false; self.d_a];
        let mut cols = vec![false; self.d_b];
        for &(a, b) in self.cliques.iter().flatten() {
            rows[a] = true;
            cols[b] = true;
        }
        rows.into_iter().chain(cols).all(|x| x)
    }

    /// Sends row `a` to `row_perm[a]` and column `b` to `col_perm[b]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Diagram {
        let cliques = self
            .cliques
            .iter()
            .map(|c| c.iter().map(|&(a, b)| (row_perm[a], col_perm[b])).collect())
            .collect();
        Self::canonical_labels(self.d_a, self.d_b, cliques)
    }

    /// Representative of the orbit under row and column permutations: the
    /// permuted diagram with the lexicographically smallest clique list.
    pub fn canonical_form(&self) -> Diagram {
        let rows = permutations(self.d_a);
        let cols = permutations(self.d_b);
        let mut best = self.clone();
        for rp in &rows {
            for cp in &cols {
                let cand = self.permuted(rp, cp);
                if cand.cliques < best.cliques {
                    best = cand;
                }
            }
        }
        best
    }

    /// Builds p(a, b, e) = P_AB(a, b) on the cells of clique `e`.
    pub fn to_distribution(&self, p_ab: &MarginalDistribution) -> Result<JointDistribution3> {
        if p_ab.dims() != [self.d_a, self.d_b] {
            return Err(Error::DimensionMismatch {
                expected: self.d_a * self.d_b,
                found: p_ab.probs().len(),
            });
        }
        let grid = self.label_grid();
        let d_e = self.d_e();
        let mut p = vec![0.0; self.d_a * self.d_b * d_e];
        for a in 0..self.d_a {
            for b in 0..self.d_b {
                let v = p_ab.get2(a, b);
                match grid[a * self.d_b + b] {
                    Some(e) => p[(a * self.d_b + b) * d_e + e] = v,
                    None if v > ZERO_THRESHOLD => return Err(Error::SupportMismatch { a, b }),
                    None => {}
                }
            }
        }
        JointDistribution3::new(self.d_a, self.d_b, d_e, p)
    }
}

/// Builds the unambiguous distribution determined by a diagram and P_AB.
pub fn from_diagram(diagram: &Diagram, p_ab: &MarginalDistribution) -> Result<JointDistribution3> {
    diagram.to_distribution(p_ab)
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| cur[j] > cur[i - 1])
            .expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}
