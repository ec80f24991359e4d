//! Independent reference computations on dense arrays, written without the
//! library's entropy, lift, transpose, or eigen routines.

#![allow(dead_code)]

use boundkey::diagram::Diagram;
use boundkey::dist::JointDistribution3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SUPPORT: f64 = 1e-12;

pub struct Dense {
    pub d: [usize; 3],
    pub p: Vec<f64>,
}

impl Dense {
    pub fn of(p: &JointDistribution3) -> Self {
        let [d_a, d_b, d_e] = p.dims();
        let mut v = vec![0.0; d_a * d_b * d_e];
        for (a, b, e, x) in p.entries() {
            v[(a * d_b + b) * d_e + e] = x;
        }
        Self {
            d: [d_a, d_b, d_e],
            p: v,
        }
    }

    pub fn at(&self, a: usize, b: usize, e: usize) -> f64 {
        self.p[(a * self.d[1] + b) * self.d[2] + e]
    }

    /// Entropy in bits of the marginal on the parties flagged in `keep` (A, B, E).
    pub fn h(&self, keep: [bool; 3]) -> f64 {
        let dims: Vec<usize> = (0..3)
            .map(|i| if keep[i] { self.d[i] } else { 1 })
            .collect();
        let mut m = vec![0.0; dims.iter().product()];
        for a in 0..self.d[0] {
            for b in 0..self.d[1] {
                for e in 0..self.d[2] {
                    let idx = [a, b, e];
                    let k: Vec<usize> = (0..3).map(|i| if keep[i] { idx[i] } else { 0 }).collect();
                    m[(k[0] * dims[1] + k[1]) * dims[2] + k[2]] += self.at(a, b, e);
                }
            }
        }
        entropy(&m)
    }

    /// For each pair of parties, the largest number of distinct values the
    /// third party takes with positive probability.
    pub fn max_fan_out(&self) -> usize {
        let mut worst = 0;
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            for x in 0..self.d[i] {
                for y in 0..self.d[j] {
                    let n = (0..self.d[k])
                        .filter(|&z| {
                            let mut idx = [0; 3];
                            idx[i] = x;
                            idx[j] = y;
                            idx[k] = z;
                            self.at(idx[0], idx[1], idx[2]) > SUPPORT
                        })
                        .count();
                    worst = worst.max(n);
                }
            }
        }
        worst
    }

    pub fn unambiguous(&self) -> bool {
        self.max_fan_out() <= 1
    }

    pub fn p_ab(&self, a: usize, b: usize) -> f64 {
        (0..self.d[2]).map(|e| self.at(a, b, e)).sum()
    }

    /// rho_AB of the square-root lift, row-major over (a, b).
    pub fn rho(&self) -> Vec<f64> {
        let [d_a, d_b, d_e] = self.d;
        let n = d_a * d_b;
        let mut r = vec![0.0; n * n];
        for a in 0..d_a {
            for b in 0..d_b {
                for a2 in 0..d_a {
                    for b2 in 0..d_b {
                        let s: f64 = (0..d_e)
                            .map(|e| (self.at(a, b, e) * self.at(a2, b2, e)).sqrt())
                            .sum();
                        r[(a * d_b + b) * n + a2 * d_b + b2] = s;
                    }
                }
            }
        }
        r
    }

    /// Largest |p(a,b) p(a',b') - p(a,b') p(a',b)| over cells sharing an Eve symbol.
    pub fn max_cross_det(&self) -> f64 {
        let [d_a, d_b, d_e] = self.d;
        let mut worst: f64 = 0.0;
        for e in 0..d_e {
            for a in 0..d_a {
                for b in 0..d_b {
                    for a2 in 0..d_a {
                        for b2 in 0..d_b {
                            if a == a2
                                || b == b2
                                || self.at(a, b, e) <= SUPPORT
                                || self.at(a2, b2, e) <= SUPPORT
                            {
                                continue;
                            }
                            let det = self.p_ab(a, b) * self.p_ab(a2, b2)
                                - self.p_ab(a, b2) * self.p_ab(a2, b);
                            worst = worst.max(det.abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// I(X;B) - I(X;E) after X is drawn from `q[x][a]`.
    pub fn noisy_bound(&self, q: &[Vec<f64>]) -> f64 {
        let [d_a, d_b, d_e] = self.d;
        let d_x = q.len();
        let mut pxbe = vec![0.0; d_x * d_b * d_e];
        for (x, row) in q.iter().enumerate() {
            for (a, &qa) in row.iter().enumerate().take(d_a) {
                for b in 0..d_b {
                    for e in 0..d_e {
                        pxbe[(x * d_b + b) * d_e + e] += qa * self.at(a, b, e);
                    }
                }
            }
        }
        let t = Dense {
            d: [d_x, d_b, d_e],
            p: pxbe,
        };
        t.h([false, true, false]) - t.h([false, false, true]) + t.h([true, false, true])
            - t.h([true, true, false])
    }
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Swaps b and b' in every entry: out[(a,b),(a',b')] = in[(a,b'),(a',b)].
pub fn partial_transpose(m: &[f64], d_a: usize, d_b: usize) -> Vec<f64> {
    let n = d_a * d_b;
    let mut out = vec![0.0; n * n];
    for a in 0..d_a {
        for b in 0..d_b {
            for a2 in 0..d_a {
                for b2 in 0..d_b {
                    out[(a * d_b + b) * n + a2 * d_b + b2] = m[(a * d_b + b2) * n + a2 * d_b + b];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
        .collect()
}

/// Largest eigenvalue of the PSD matrix `m` by power iteration with a
/// Rayleigh-quotient stopping rule.
fn power_top(m: &[f64], n: usize) -> f64 {
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract())
        .collect();
    let mut lambda = 0.0;
    for it in 0..500_000 {
        let w = mat_vec(m, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>()
            / v.iter().map(|x| x * x).sum::<f64>();
        v = w.into_iter().map(|x| x / norm).collect();
        if it > 10 && (next - lambda).abs() <= 1e-15 * next.abs().max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

fn gershgorin(m: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a symmetric matrix: power iteration on `sI - M`.
pub fn min_eig_shifted_power(m: &[f64], n: usize) -> f64 {
    let s = gershgorin(m, n);
    let shifted: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { s - m[k] } else { -m[k] })
        .collect();
    s - power_top(&shifted, n)
}

/// Whether `m + shift I` admits a Cholesky factorization with positive pivots.
fn positive_definite_after_shift(m: &[f64], n: usize, shift: f64) -> bool {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let d = m[j * n + j] + shift - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            l[i * n + j] = (m[i * n + j] - s) / d;
        }
    }
    true
}

/// Smallest eigenvalue of a symmetric matrix by bisection on the shift at
/// which Cholesky factorization starts to succeed.
pub fn min_eig_cholesky_bisection(m: &[f64], n: usize) -> f64 {
    let s = gershgorin(m, n) + 1.0;
    let (mut lo, mut hi) = (-s, s);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if positive_definite_after_shift(m, n, -mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Largest eigenvalue of a symmetric matrix: power iteration on `M + sI`.
pub fn max_eig_shifted_power(m: &[f64], n: usize) -> f64 {
    let s = gershgorin(m, n);
    let shifted: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { s + m[k] } else { m[k] })
        .collect();
    power_top(&shifted, n) - s
}

/// A random distribution built from a random partition of random cells into
/// diagonal cliques: `d_a, d_b <= max_side`, at most `max_e` Eve symbols.
pub fn random_unambiguous(
    rng: &mut ChaCha8Rng,
    max_side: usize,
    max_e: usize,
) -> JointDistribution3 {
    loop {
        let d_a = rng.random_range(1..=max_side);
        let d_b = rng.random_range(1..=max_side);
        let mut cliques: Vec<Vec<(usize, usize)>> = Vec::new();
        for a in 0..d_a {
            for b in 0..d_b {
                if rng.random_bool(0.3) {
                    continue;
                }
                let open: Vec<usize> = (0..cliques.len())
                    .filter(|&k| cliques[k].iter().all(|&(x, y)| x != a && y != b))
                    .collect();
                let fresh = cliques.len() < max_e && (open.is_empty() || rng.random_bool(0.4));
                if fresh {
                    cliques.push(vec![(a, b)]);
                } else if !open.is_empty() {
                    cliques[open[rng.random_range(0..open.len())]].push((a, b));
                }
            }
        }
        if cliques.is_empty() {
            continue;
        }
        let d_e = rng.random_range(cliques.len()..=max_e);
        let weights: Vec<f64> = (0..d_a * d_b)
            .map(|_| rng.random_range(0.01..1.0))
            .collect();
        let label = |a: usize, b: usize| cliques.iter().position(|c| c.contains(&(a, b)));
        let total: f64 = (0..d_a)
            .flat_map(|a| (0..d_b).map(move |b| (a, b)))
            .filter(|&(a, b)| label(a, b).is_some())
            .map(|(a, b)| weights[a * d_b + b])
            .sum();
        return JointDistribution3::from_fn(d_a, d_b, d_e, |a, b, e| {
            if label(a, b) == Some(e) {
                weights[a * d_b + b] / total
            } else {
                0.0
            }
        })
        .expect("weights form a pmf");
    }
}

/// A random column-stochastic matrix `rows[out][in]`, with some columns deterministic.
pub fn random_stochastic(rng: &mut ChaCha8Rng, d_out: usize, d_in: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; d_in]; d_out];
    for x in 0..d_in {
        if rng.random_bool(0.3) {
            rows[rng.random_range(0..d_out)][x] = 1.0;
            continue;
        }
        let w: Vec<f64> = (0..d_out).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: f64 = w.iter().sum();
        for (row, wm) in rows.iter_mut().zip(&w) {
            row[x] = wm / s;
        }
    }
    rows
}

/// The 3x3 diagram: main diagonal plus three 2-cell crosses.
pub fn three_by_three_diagram() -> Diagram {
    Diagram::new(
        3,
        3,
        vec![
            vec![(0, 0), (1, 1), (2, 2)],
            vec![(0, 1), (1, 0)],
            vec![(0, 2), (2, 0)],
            vec![(1, 2), (2, 1)],
        ],
    )
    .unwrap()
}
