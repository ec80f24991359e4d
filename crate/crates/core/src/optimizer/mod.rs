//! Maximization of the noisy-processing key rate over (P_AB, Q_X|A) on a
//! fixed diagram, and enumeration/inference of admissible diagrams.
//!
//! Each start draws its initial point from `ChaCha8Rng::seed_from_u64(seed)`
//! switched to stream `start_index`, so a start's trajectory does not depend
//! on how many other starts run or on thread scheduling.

mod enumerate;
mod infer;
pub mod nelder_mead;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{Cross, Diagram};
use crate::dist::{entropy_bits, MarginalDistribution, NoisyChannel};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use nelder_mead::{minimize, NelderMeadOptions};

pub use enumerate::{enumerate_diagrams, ENUMERATION_LIMIT};
pub use infer::infer_diagram;

/// A result is feasible when its constraint residual is at most this.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// P_AB logits are clamped to this magnitude, keeping every support cell
/// well above the zero threshold.
const P_LOGIT_BOUND: f64 = 10.0;
const Q_LOGIT_BOUND: f64 = 25.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptConfig {
    pub starts: usize,
    pub seed: u64,
    pub penalty_schedule: Vec<f64>,
    pub simplex_tol: f64,
    pub max_evals_per_start: usize,
    pub d_x: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            starts: 50,
            seed: 0,
            penalty_schedule: vec![1e2, 1e4, 1e6, 1e8],
            simplex_tol: 1e-10,
            max_evals_per_start: 200_000,
            d_x: 2,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::DomainError(format!("optimizer config: {m}")));
        if self.starts == 0 || self.max_evals_per_start == 0 || self.d_x == 0 {
            return bad("starts, evaluation budget and d_X must be positive");
        }
        if self.simplex_tol.is_nan() || self.simplex_tol <= 0.0 {
            return bad("simplex tolerance must be positive");
        }
        if self.penalty_schedule.is_empty()
            || self
                .penalty_schedule
                .iter()
                .any(|w| w.is_nan() || *w <= 0.0)
        {
            return bad("penalty weights must be positive");
        }
        if self.penalty_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("penalty weights must be strictly increasing");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    /// |sum P_AB - 1|.
    pub normalization: f64,
    /// |det| of each cross submatrix.
    pub crosses: Vec<(Cross, f64)>,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.crosses
            .iter()
            .map(|c| c.1)
            .fold(self.normalization, f64::max)
    }
}

/// Normalization residual and |det| of every 2x2 cross submatrix of P_AB.
pub fn constraint_residuals(p_ab: &MarginalDistribution, diagram: &Diagram) -> ConstraintResiduals {
    let normalization = (p_ab.probs().iter().sum::<f64>() - 1.0).abs();
    let crosses = diagram
        .crosses()
        .into_iter()
        .map(|c| (c, c.determinant(p_ab).abs()))
        .collect();
    ConstraintResiduals {
        normalization,
        crosses,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptResult {
    pub best_rate: f64,
    pub p_ab: MarginalDistribution,
    pub q: NoisyChannel,
    pub constraint_residual: f64,
    /// Objective evaluations summed over all starts.
    pub evaluations: usize,
    pub start_index: usize,
    pub feasible_starts: usize,
}

/// The search space of one diagram: softmax logits for P_AB on the support
/// (first logit pinned to 0) followed by `d_x - 1` free logits per column of Q.
struct Problem {
    d_a: usize,
    d_b: usize,
    d_e: usize,
    d_x: usize,
    /// (a, b, e) of each support cell.
    cells: Vec<(usize, usize, usize)>,
    /// Cross constraints as indices into `cells`: det = p[i0] p[i1] - p[j0] p[j1].
    crosses: Vec<[usize; 4]>,
}

impl Problem {
    fn new(diagram: &Diagram, d_x: usize) -> Result<Self> {
        if !diagram.is_cross_closed() {
            return Err(Error::InvalidDiagram(
                "optimization needs a cross-closed diagram".into(),
            ));
        }
        let mut cells = Vec::new();
        for (e, clique) in diagram.cliques().iter().enumerate() {
            cells.extend(clique.iter().map(|&(a, b)| (a, b, e)));
        }
        cells.sort_unstable();
        let pos = |a: usize, b: usize| {
            cells
                .iter()
                .position(|c| c.0 == a && c.1 == b)
                .expect("cross-closed")
        };
        let crosses = diagram
            .crosses()
            .into_iter()
            .map(|c| {
                let ((a0, a1), (b0, b1)) = (c.rows, c.cols);
                [pos(a0, b0), pos(a1, b1), pos(a0, b1), pos(a1, b0)]
            })
            .collect();
        Ok(Self {
            d_a: diagram.d_a(),
            d_b: diagram.d_b(),
            d_e: diagram.d_e(),
            d_x,
            cells,
            crosses,
        })
    }

    fn dim(&self) -> usize {
        self.cells.len() - 1 + self.d_a * (self.d_x - 1)
    }

    fn decode(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.cells.len();
        let p = softmax(
            std::iter::once(0.0).chain(
                x[..n - 1]
                    .iter()
                    .map(|v| v.clamp(-P_LOGIT_BOUND, P_LOGIT_BOUND)),
            ),
            n,
        );
        // q[x * d_a + a]
        let mut q = vec![0.0; self.d_x * self.d_a];
        let qx = &x[n - 1..];
        for a in 0..self.d_a {
            let logits = std::iter::once(0.0).chain(
                qx[a * (self.d_x - 1)..(a + 1) * (self.d_x - 1)]
                    .iter()
                    .map(|v| v.clamp(-Q_LOGIT_BOUND, Q_LOGIT_BOUND)),
            );
            for (xi, v) in softmax(logits, self.d_x).into_iter().enumerate() {
                q[xi * self.d_a + a] = v;
            }
        }
        (p, q)
    }

    /// I(X;B) - I(X;E) = H(B) - H(E) + H(XE) - H(XB).
    fn rate(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut hb = vec![0.0; self.d_b];
        let mut he = vec![0.0; self.d_e];
        let mut xb = vec![0.0; self.d_x * self.d_b];
        let mut xe = vec![0.0; self.d_x * self.d_e];
        for (&(a, b, e), &v) in self.cells.iter().zip(p) {
            hb[b] += v;
            he[e] += v;
            for x in 0..self.d_x {
                let w = q[x * self.d_a + a] * v;
                xb[x * self.d_b + b] += w;
                xe[x * self.d_e + e] += w;
            }
        }
        entropy_bits(&hb) - entropy_bits(&he) + entropy_bits(&xe) - entropy_bits(&xb)
    }

    fn determinants<'a>(&'a self, p: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.crosses
            .iter()
            .map(move |&[i0, i1, j0, j1]| p[i0] * p[i1] - p[j0] * p[j1])
    }

    /// Negated rate at the projection of the decoded P_AB onto the
    /// determinant manifold, plus the weighted squared determinants of the
    /// unprojected point.
    fn penalized(&self, x: &[f64], weight: f64) -> f64 {
        let (p, q) = self.decode(x);
        let pen: f64 = self.determinants(&p).map(|d| d * d).sum();
        let mut on_manifold = p;
        self.project(&mut on_manifold);
        -self.rate(&on_manifold, &q) + weight * pen
    }

    /// Moves p onto the manifold where every cross determinant vanishes by
    /// minimum-norm Gauss–Newton steps, then renormalizes.
    fn project(&self, p: &mut [f64]) {
        let m = self.crosses.len();
        if m == 0 {
            return;
        }
        let n = p.len();
        for _ in 0..100 {
            let r: Vec<f64> = self.determinants(p).collect();
            if r.iter().all(|v| v.abs() <= 1e-17) {
                break;
            }
            let mut jac = vec![0.0; m * n];
            for (k, &[i0, i1, j0, j1]) in self.crosses.iter().enumerate() {
                jac[k * n + i0] += p[i1];
                jac[k * n + i1] += p[i0];
                jac[k * n + j0] -= p[j1];
                jac[k * n + j1] -= p[j0];
            }
            let mut gram = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    gram[i * m + j] = (0..n).map(|c| jac[i * n + c] * jac[j * n + c]).sum();
                }
            }
            let Ok(eig) = symmetric_eigen(&gram, m) else {
                break;
            };
            let top = eig.values.last().copied().unwrap_or(0.0);
            // y = pinv(J J^T) r
            let mut y = vec![0.0; m];
            for (k, &lam) in eig.values.iter().enumerate() {
                if lam <= 1e-12 * top {
                    continue;
                }
                let v = eig.vector(k);
                let coef = v.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / lam;
                y.iter_mut().zip(&v).for_each(|(yi, vi)| *yi += coef * vi);
            }
            for c in 0..n {
                let step: f64 = (0..m).map(|k| jac[k * n + c] * y[k]).sum();
                p[c] = (p[c] - step).max(f64::MIN_POSITIVE);
            }
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
    }

    fn finish(&self, x: &[f64]) -> Candidate {
        let (mut p, q) = self.decode(x);
        self.project(&mut p);
        let rate = self.rate(&p, &q);
        let mut dense = vec![0.0; self.d_a * self.d_b];
        for (&(a, b, _), &v) in self.cells.iter().zip(&p) {
            dense[a * self.d_b + b] = v;
        }
        let det_max = self.determinants(&p).map(f64::abs).fold(0.0, f64::max);
        let norm = (p.iter().sum::<f64>() - 1.0).abs();
        Candidate {
            rate,
            p_ab: dense,
            q,
            residual: det_max.max(norm),
        }
    }
}

fn softmax(logits: impl Iterator<Item = f64>, n: usize) -> Vec<f64> {
    let v: Vec<f64> = logits.collect();
    debug_assert_eq!(v.len(), n);
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / s).collect()
}

#[derive(Clone, Debug)]
struct Candidate {
    rate: f64,
    p_ab: Vec<f64>,
    q: Vec<f64>,
    residual: f64,
}

#[derive(Clone, Debug)]
struct StartOutcome {
    index: usize,
    evals: usize,
    candidate: Candidate,
}

/// Higher rate wins; equal rates go to the lexicographically smaller P_AB,
/// then the lower start index.
fn better(x: &StartOutcome, y: &StartOutcome) -> Ordering {
    y.candidate
        .rate
        .total_cmp(&x.candidate.rate)
        .then_with(|| {
            x.candidate
                .p_ab
                .iter()
                .zip(&y.candidate.p_ab)
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then(x.index.cmp(&y.index))
}

fn run_start(problem: &Problem, cfg: &OptConfig, index: usize) -> StartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut x: Vec<f64> = (0..problem.dim())
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    let mut evals = 0;
    for (stage, &w) in cfg.penalty_schedule.iter().enumerate() {
        let remaining = cfg.max_evals_per_start.saturating_sub(evals);
        if remaining == 0 {
            break;
        }
        let opts = NelderMeadOptions {
            f_tol: cfg.simplex_tol,
            x_tol: 1e-8,
            max_evals: remaining,
            initial_step: if stage == 0 { 1.0 } else { 0.1 },
            max_restarts: 20,
        };
        let m = minimize(|v| problem.penalized(v, w), &x, &opts);
        evals += m.evals;
        x = m.x;
    }
    StartOutcome {
        index,
        evals,
        candidate: problem.finish(&x),
    }
}

/// Multi-start penalty maximization of I(X;B) - I(X;E) over P_AB supported on
/// the diagram and Q_X|A. Starts run in parallel; the result depends only on
/// the configuration.
pub fn maximize_keyrate(diagram: &Diagram, cfg: &OptConfig) -> Result<OptResult> {
    cfg.validate()?;
    let problem = Problem::new(diagram, cfg.d_x)?;
    let outcomes: Vec<StartOutcome> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| run_start(&problem, cfg, i))
        .collect();
    let evaluations = outcomes.iter().map(|o| o.evals).sum();
    let feasible: Vec<&StartOutcome> = outcomes
        .iter()
        .filter(|o| o.candidate.residual <= FEASIBILITY_TOL)
        .collect();
    let Some(best) = feasible.iter().copied().min_by(|x, y| better(x, y)) else {
        let best_residual = outcomes
            .iter()
            .map(|o| o.candidate.residual)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::NoFeasiblePoint { best_residual });
    };
    let c = &best.candidate;
    Ok(OptResult {
        best_rate: c.rate,
        p_ab: MarginalDistribution::matrix(problem.d_a, problem.d_b, c.p_ab.clone())?,
        q: NoisyChannel::new(problem.d_x, problem.d_a, c.q.clone())?,
        constraint_residual: c.residual,
        evaluations,
        start_index: best.index,
        feasible_starts: feasible.len(),
    })
}
