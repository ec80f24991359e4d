//! The lift P -> sqrt(P), reduced density matrices, partial transposition,
//! and coherent information. All amplitudes are real and nonnegative.

use serde::Serialize;

use crate::diagram::Cell;
use crate::dist::{EveSymbol, JointDistribution3, Party, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues};

/// Eigenvalues in `[-VN_CLAMP, 0)` are treated as zero in von Neumann entropies.
pub const VN_CLAMP: f64 = 1e-12;

/// A real pure state on A, B, E with nonnegative amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState3 {
    dims: [usize; 3],
    amp: Vec<f64>,
}

impl PureState3 {
    pub fn new(d_a: usize, d_b: usize, d_e: usize, amp: Vec<f64>) -> Result<Self> {
        if amp.len() != d_a * d_b * d_e {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b * d_e,
                found: amp.len(),
            });
        }
        if amp.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::DomainError(
                "amplitudes must be finite and nonnegative".into(),
            ));
        }
        let norm: f64 = amp.iter().map(|x| x * x).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::DomainError(format!("state has squared norm {norm}")));
        }
        Ok(Self {
            dims: [d_a, d_b, d_e],
            amp,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amp
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, e: usize) -> f64 {
        self.amp[(a * self.dims[1] + b) * self.dims[2] + e]
    }

    /// Reduced density matrix of a single party, as a row-major `d x d` matrix.
    pub fn reduced_single(&self, keep: Party) -> Vec<f64> {
        let [d_a, d_b, d_e] = self.dims;
        let d = self.dims[keep.slot()];
        let mut rho = vec![0.0; d * d];
        // Sum over the other two indices of psi(..i..) psi(..j..).
        let (o1, o2) = match keep {
            Party::A => (d_b, d_e),
            Party::B => (d_a, d_e),
            Party::E => (d_a, d_b),
        };
        let at = |k: usize, x: usize, y: usize| match keep {
            Party::A => self.get(k, x, y),
            Party::B => self.get(x, k, y),
            Party::E => self.get(x, y, k),
        };
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for x in 0..o1 {
                    for y in 0..o2 {
                        s += at(i, x, y) * at(j, x, y);
                    }
                }
                rho[i * d + j] = s;
                rho[j * d + i] = s;
            }
        }
        rho
    }
}

/// The lift |psi> = sum sqrt(p(a,b,e)) |a>|b>|e>.
pub fn lift_state(p: &JointDistribution3) -> PureState3 {
    let [d_a, d_b, d_e] = p.dims();
    PureState3 {
        dims: [d_a, d_b, d_e],
        amp: p.probs().iter().map(|v| v.sqrt()).collect(),
    }
}

/// A real symmetric unit-trace matrix on A ⊗ B with row index `a * d_b + b`.
/// Partial transposes share this type, so positivity is not enforced; see
/// [`DensityMatrix::min_eigenvalue`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    #[serde(rename = "dA")]
    d_a: usize,
    #[serde(rename = "dB")]
    d_b: usize,
    matrix: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(d_a: usize, d_b: usize, matrix: Vec<f64>) -> Result<Self> {
        let n = d_a * d_b;
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: matrix.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if (matrix[i * n + j] - matrix[j * n + i]).abs() > 1e-12 {
                    return Err(Error::DomainError(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let tr: f64 = (0..n).map(|i| matrix[i * n + i]).sum();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::DomainError(format!("trace is {tr}, not 1")));
        }
        Ok(Self { d_a, d_b, matrix })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn n(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn get(&self, row: (usize, usize), col: (usize, usize)) -> f64 {
        self.matrix[(row.0 * self.d_b + row.1) * self.n() + col.0 * self.d_b + col.1]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.matrix[i * self.n() + i]).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(&self.matrix, self.n())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Transposes Bob's factor:
    /// ρΓ[(a,b),(a',b')] = ρ[(a,b'),(a',b)].
    pub fn partial_transpose(&self) -> DensityMatrix {
        let (d_a, d_b, n) = (self.d_a, self.d_b, self.n());
        let mut out = vec![0.0; n * n];
        for a in 0..d_a {
            for b in 0..d_b {
                for a2 in 0..d_a {
                    for b2 in 0..d_b {
                        out[(a * d_b + b) * n + a2 * d_b + b2] = self.get((a, b2), (a2, b));
                    }
                }
            }
        }
        DensityMatrix {
            d_a,
            d_b,
            matrix: out,
        }
    }

    pub fn max_abs_difference(&self, other: &DensityMatrix) -> f64 {
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn pt_report(&self, tol: f64) -> Result<PtReport> {
        pt_report(self, tol)
    }
}

/// ρ_AB = tr_E |psi><psi|.
pub fn reduce_to_ab(psi: &PureState3) -> DensityMatrix {
    let [d_a, d_b, d_e] = psi.dims;
    let n = d_a * d_b;
    let mut m = vec![0.0; n * n];
    let rows: Vec<&[f64]> = psi.amp.chunks(d_e).collect();
    for i in 0..n {
        for j in i..n {
            let s: f64 = rows[i].iter().zip(rows[j]).map(|(x, y)| x * y).sum();
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    DensityMatrix {
        d_a,
        d_b,
        matrix: m,
    }
}

pub fn partial_transpose(rho: &DensityMatrix) -> DensityMatrix {
    rho.partial_transpose()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PtReport {
    pub is_pt_invariant: bool,
    pub max_abs_deviation: f64,
    pub min_eig_pt: f64,
    pub is_ppt: bool,
}

/// PT-invariance and positivity of the partial transpose, both at tolerance `tol`.
pub fn pt_report(rho: &DensityMatrix, tol: f64) -> Result<PtReport> {
    let pt = rho.partial_transpose();
    let max_abs_deviation = pt.max_abs_difference(rho);
    let min_eig_pt = pt.min_eigenvalue()?;
    Ok(PtReport {
        is_pt_invariant: max_abs_deviation <= tol,
        max_abs_deviation,
        min_eig_pt,
        is_ppt: min_eig_pt >= -tol,
    })
}

/// Why a pair of same-clique cells breaks PT-invariance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CrossDefect {
    /// The partner cells (a,b') and (a',b) are empty or carry different Eve symbols.
    MissingPartner,
    /// p(a,b) p(a',b') - p(a,b') p(a',b), exceeding the tolerance.
    Determinant(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossViolation {
    pub cells: (Cell, Cell),
    pub defect: CrossDefect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinatorialPtReport {
    pub holds: bool,
    /// Largest |determinant| over pairs whose partner cells share a symbol.
    pub max_determinant: f64,
    pub violations: Vec<CrossViolation>,
}

/// Checks PT-invariance of the lift on the distribution itself: whenever
/// e(a,b) = e(a',b') is a symbol with a ≠ a' and b ≠ b', the partner cells
/// must share a symbol and the 2x2 determinant of P_AB must vanish within `tol`.
pub fn pt_invariance_combinatorial(
    p: &JointDistribution3,
    tol: f64,
) -> Result<CombinatorialPtReport> {
    if !p.validate_unambiguous().is_unambiguous() {
        return Err(Error::NotUnambiguous);
    }
    let (d_a, d_b) = (p.d_a(), p.d_b());
    let pab = p.marginal(&[Party::A, Party::B]);
    let mut eve = Vec::with_capacity(d_a * d_b);
    for a in 0..d_a {
        for b in 0..d_b {
            eve.push(p.eve_symbol_with(a, b, ZERO_THRESHOLD)?);
        }
    }
    let e = |a: usize, b: usize| eve[a * d_b + b];
    let mut violations = Vec::new();
    let mut max_determinant: f64 = 0.0;
    for a in 0..d_a {
        for a2 in a + 1..d_a {
            for b in 0..d_b {
                for b2 in 0..d_b {
                    if b == b2 || e(a, b) == EveSymbol::Yuzz || e(a, b) != e(a2, b2) {
                        continue;
                    }
                    let cells = ((a, b), (a2, b2));
                    if e(a, b2) == EveSymbol::Yuzz || e(a, b2) != e(a2, b) {
                        violations.push(CrossViolation {
                            cells,
                            defect: CrossDefect::MissingPartner,
                        });
                        continue;
                    }
                    let det = pab.get2(a, b) * pab.get2(a2, b2) - pab.get2(a, b2) * pab.get2(a2, b);
                    max_determinant = max_determinant.max(det.abs());
                    if det.abs() > tol {
                        violations.push(CrossViolation {
                            cells,
                            defect: CrossDefect::Determinant(det),
                        });
                    }
                }
            }
        }
    }
    Ok(CombinatorialPtReport {
        holds: violations.is_empty(),
        max_determinant,
        violations,
    })
}

/// von Neumann entropy in bits of a symmetric PSD `n x n` matrix.
pub fn von_neumann_entropy(rho: &[f64], n: usize) -> Result<f64> {
    let values = symmetric_eigen(rho, n)?.values;
    Ok(values
        .into_iter()
        .map(|l| {
            if (-VN_CLAMP..0.0).contains(&l) {
                0.0
            } else {
                l
            }
        })
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum())
}

/// I(A>B) = S(B) - S(E), computed from the spectra of the reduced states.
pub fn coherent_information(psi: &PureState3) -> Result<f64> {
    let [_, d_b, d_e] = psi.dims;
    let s_b = von_neumann_entropy(&psi.reduced_single(Party::B), d_b)?;
    let s_e = von_neumann_entropy(&psi.reduced_single(Party::E), d_e)?;
    Ok(s_b - s_e)
}
