use super::enumerate::CliqueSearch;
use crate::diagram::{Cell, Diagram};
use crate::dist::{MarginalDistribution, ZERO_THRESHOLD};
use crate::error::{Error, Result};

/// Every diagram with exactly `d_e` cliques covering the support of P_AB for
/// which the induced distribution has a PT-invariant lift: cliques are
/// diagonal, edges are cross-closed, and each cross determinant is at most
/// `tol` in magnitude. Cells may form singleton cliques.
pub fn infer_diagram(p_ab: &MarginalDistribution, d_e: usize, tol: f64) -> Result<Vec<Diagram>> {
    let [d_a, d_b] = match p_ab.dims() {
        &[x, y] => [x, y],
        dims => {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: dims.len(),
            })
        }
    };
    let cells: Vec<Cell> = (0..d_a)
        .flat_map(|a| (0..d_b).map(move |b| (a, b)))
        .filter(|&(a, b)| p_ab.get2(a, b) > ZERO_THRESHOLD)
        .collect();
    let support = |a: usize, b: usize| p_ab.get2(a, b) > ZERO_THRESHOLD;
    let compatible = |i: usize, j: usize| {
        let ((a, b), (a2, b2)) = (cells[i], cells[j]);
        support(a, b2)
            && support(a2, b)
            && (p_ab.get2(a, b) * p_ab.get2(a2, b2) - p_ab.get2(a, b2) * p_ab.get2(a2, b)).abs()
                <= tol
    };
    let search = CliqueSearch {
        d_a,
        d_b,
        cells: cells.clone(),
        optional: false,
        compatible: &compatible,
        min_cliques: d_e,
        max_cliques: d_e,
        forbid_singletons: false,
        cover_all_lines: false,
    };
    let mut out = Vec::new();
    search.run(|d| out.push(d));
    if out.is_empty() {
        return Err(Error::NoneFound { d_e });
    }
    out.sort_by(|x, y| x.cliques().cmp(y.cliques()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_gives_single_cell_clique() {
        let pab = MarginalDistribution::matrix(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let ds = infer_diagram(&pab, 1, 1e-9).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].cliques(), &[vec![(0, 0)]]);
    }

    #[test]
    fn uniform_two_by_two() {
        let pab = MarginalDistribution::matrix(2, 2, vec![0.25; 4]).unwrap();
        let ds = infer_diagram(&pab, 2, 1e-12).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(
            ds[0].cliques(),
            &[vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]]
        );
        assert_eq!(infer_diagram(&pab, 4, 1e-12).unwrap().len(), 1);
        assert!(matches!(
            infer_diagram(&pab, 3, 1e-12),
            Err(Error::NoneFound { d_e: 3 })
        ));
    }

    #[test]
    fn full_rank_block_blocks_cross() {
        let pab = MarginalDistribution::matrix(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        assert!(infer_diagram(&pab, 2, 1e-6).is_err());
        assert_eq!(infer_diagram(&pab, 4, 1e-6).unwrap().len(), 1);
    }
}
