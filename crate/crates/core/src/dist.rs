//! Finite tripartite distributions, their marginals, and Shannon functionals.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries at or below this value count as zero on loaded or constructed data.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Zero threshold used when validating the published 6-decimal fixtures.
pub const FIXTURE_TOLERANCE: f64 = 5e-6;

/// Inputs whose total lies within this distance of 1 are renormalized on load.
pub const LOAD_TOLERANCE: f64 = 5e-6;

/// Position of a variable inside a [`JointDistribution3`].
///
/// The slots keep their names after processing, so the first slot is still
/// `A` once a channel has replaced Alice's variable by `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    E,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::E];

    pub fn slot(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 1,
            Party::E => 2,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::E => "E",
        };
        f.write_str(s)
    }
}

/// Eve's value as a function of Alice's and Bob's, or the sentinel for pairs that never occur.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EveSymbol {
    Symbol(usize),
    Yuzz,
}

impl EveSymbol {
    pub fn symbol(self) -> Option<usize> {
        match self {
            EveSymbol::Symbol(e) => Some(e),
            EveSymbol::Yuzz => None,
        }
    }
}

fn check_pmf(values: &mut [f64], what: &str) -> Result<()> {
    let mut total = 0.0;
    for &v in values.iter() {
        if !v.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "{what}: non-finite entry {v}"
            )));
        }
        if v < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what}: negative entry {v}"
            )));
        }
        total += v;
    }
    if (total - 1.0).abs() > LOAD_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entries sum to {total}, not 1 within {LOAD_TOLERANCE:e}"
        )));
    }
    if (total - 1.0).abs() > values.len() as f64 * f64::EPSILON {
        values.iter_mut().for_each(|v| *v /= total);
    }
    Ok(())
}

/// A probability mass function p(a, b, e) stored densely in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution3 {
    dims: [usize; 3],
    p: Vec<f64>,
}

impl JointDistribution3 {
    /// Builds a distribution from a dense row-major array, renormalizing
    /// totals within [`LOAD_TOLERANCE`] of one. Totals that differ from one
    /// only by summation rounding are kept as given, so saved distributions
    /// reload bit for bit.
    pub fn new(d_a: usize, d_b: usize, d_e: usize, mut p: Vec<f64>) -> Result<Self> {
        if d_a == 0 || d_b == 0 || d_e == 0 {
            return Err(Error::InvalidDistribution(
                "alphabet sizes must be positive".into(),
            ));
        }
        if p.len() != d_a * d_b * d_e {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b * d_e,
                found: p.len(),
            });
        }
        check_pmf(&mut p, "joint distribution")?;
        Ok(Self {
            dims: [d_a, d_b, d_e],
            p,
        })
    }

    /// Builds a distribution from sparse `(a, b, e, p)` entries. Repeated
    /// indices are rejected.
    pub fn from_entries(
        d_a: usize,
        d_b: usize,
        d_e: usize,
        entries: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let mut p = vec![0.0; d_a * d_b * d_e];
        let mut seen = vec![false; p.len()];
        for &(a, b, e, v) in entries {
            if a >= d_a || b >= d_b || e >= d_e {
                return Err(Error::InvalidDistribution(format!(
                    "entry ({a}, {b}, {e}) outside {d_a}x{d_b}x{d_e}"
                )));
            }
            let i = (a * d_b + b) * d_e + e;
            if seen[i] {
                return Err(Error::InvalidDistribution(format!(
                    "entry ({a}, {b}, {e}) repeated"
                )));
            }
            seen[i] = true;
            p[i] = v;
        }
        Self::new(d_a, d_b, d_e, p)
    }

    pub fn from_fn(
        d_a: usize,
        d_b: usize,
        d_e: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut p = Vec::with_capacity(d_a * d_b * d_e);
        for a in 0..d_a {
            for b in 0..d_b {
                for e in 0..d_e {
                    p.push(f(a, b, e));
                }
            }
        }
        Self::new(d_a, d_b, d_e, p)
    }

    /// Internal constructor for results of exact transformations of valid inputs.
    pub(crate) fn from_parts(dims: [usize; 3], p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), dims.iter().product::<usize>());
        Self { dims, p }
    }

    pub fn d_a(&self) -> usize {
        self.dims[0]
    }

    pub fn d_b(&self) -> usize {
        self.dims[1]
    }

    pub fn d_e(&self) -> usize {
        self.dims[2]
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, party: Party) -> usize {
        self.dims[party.slot()]
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, e: usize) -> usize {
        (a * self.dims[1] + b) * self.dims[2] + e
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, e: usize) -> f64 {
        self.p[self.index(a, b, e)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Nonzero entries as `(a, b, e, p)`, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let [_, d_b, d_e] = self.dims;
        self.p
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(move |(i, &v)| {
                let e = i % d_e;
                let b = (i / d_e) % d_b;
                let a = i / (d_e * d_b);
                (a, b, e, v)
            })
    }

    pub fn validate_unambiguous(&self) -> UnambiguityReport {
        self.validate_unambiguous_with(ZERO_THRESHOLD)
    }

    /// Checks that any two variables determine the third: for each fixed pair
    /// of values, at most one value of the remaining variable has an entry
    /// above `threshold`.
    pub fn validate_unambiguous_with(&self, threshold: f64) -> UnambiguityReport {
        let [d_a, d_b, d_e] = self.dims;
        let mut violations = Vec::new();
        let nz = |a, b, e| self.get(a, b, e) > threshold;
        for b in 0..d_b {
            for e in 0..d_e {
                let count = (0..d_a).filter(|&a| nz(a, b, e)).count();
                if count > 1 {
                    violations.push(Violation {
                        ambiguous: Party::A,
                        fixed: (b, e),
                        count,
                    });
                }
            }
        }
        for a in 0..d_a {
            for e in 0..d_e {
                let count = (0..d_b).filter(|&b| nz(a, b, e)).count();
                if count > 1 {
                    violations.push(Violation {
                        ambiguous: Party::B,
                        fixed: (a, e),
                        count,
                    });
                }
            }
        }
        for a in 0..d_a {
            for b in 0..d_b {
                let count = (0..d_e).filter(|&e| nz(a, b, e)).count();
                if count > 1 {
                    violations.push(Violation {
                        ambiguous: Party::E,
                        fixed: (a, b),
                        count,
                    });
                }
            }
        }
        let flag = |party| !violations.iter().any(|v: &Violation| v.ambiguous == party);
        UnambiguityReport {
            flag_a: flag(Party::A),
            flag_b: flag(Party::B),
            flag_e: flag(Party::E),
            violations,
        }
    }

    pub fn eve_symbol(&self, a: usize, b: usize) -> Result<EveSymbol> {
        self.eve_symbol_with(a, b, ZERO_THRESHOLD)
    }

    /// The unique `e` with p(a, b, e) above `threshold`, or [`EveSymbol::Yuzz`].
    pub fn eve_symbol_with(&self, a: usize, b: usize, threshold: f64) -> Result<EveSymbol> {
        let mut found = EveSymbol::Yuzz;
        for e in 0..self.d_e() {
            if self.get(a, b, e) > threshold {
                if found != EveSymbol::Yuzz {
                    return Err(Error::AmbiguousEve { a, b });
                }
                found = EveSymbol::Symbol(e);
            }
        }
        Ok(found)
    }

    /// Sums out every variable not listed in `keep`. The retained variables
    /// appear in slot order regardless of the order in `keep`.
    pub fn marginal(&self, keep: &[Party]) -> MarginalDistribution {
        let mut parties: Vec<Party> = keep.to_vec();
        parties.sort();
        parties.dedup();
        assert!(!parties.is_empty(), "marginal over an empty set of parties");
        let dims: Vec<usize> = parties.iter().map(|&q| self.dim(q)).collect();
        let mut p = vec![0.0; dims.iter().product()];
        let [d_a, d_b, d_e] = self.dims;
        for a in 0..d_a {
            for b in 0..d_b {
                for e in 0..d_e {
                    let v = self.get(a, b, e);
                    if v == 0.0 {
                        continue;
                    }
                    let idx = [a, b, e];
                    let mut i = 0;
                    for (q, d) in parties.iter().zip(&dims) {
                        i = i * d + idx[q.slot()];
                    }
                    p[i] += v;
                }
            }
        }
        MarginalDistribution { parties, dims, p }
    }

    /// Shannon entropy in bits of the joint distribution of `parties`.
    pub fn entropy_of(&self, parties: &[Party]) -> f64 {
        self.marginal(parties).entropy()
    }

    pub fn mutual_information(&self, x: Party, y: Party) -> f64 {
        self.entropy_of(&[x]) + self.entropy_of(&[y]) - self.entropy_of(&[x, y])
    }

    /// H(Y | X) = H(XY) - H(X).
    pub fn conditional_entropy(&self, y: Party, given: Party) -> f64 {
        self.entropy_of(&[given, y]) - self.entropy_of(&[given])
    }

    /// Replaces the variable in slot `on` by its image under `ch`:
    /// p'(.., x, ..) = sum_a q(x|a) p(.., a, ..).
    pub fn apply_channel(&self, ch: &NoisyChannel, on: Party) -> Result<JointDistribution3> {
        let slot = on.slot();
        if ch.d_a() != self.dims[slot] {
            return Err(Error::DimensionMismatch {
                expected: self.dims[slot],
                found: ch.d_a(),
            });
        }
        let mut dims = self.dims;
        dims[slot] = ch.d_x();
        let mut out = vec![0.0; dims.iter().product()];
        let [d_a, d_b, d_e] = self.dims;
        for a in 0..d_a {
            for b in 0..d_b {
                for e in 0..d_e {
                    let v = self.get(a, b, e);
                    if v == 0.0 {
                        continue;
                    }
                    let mut idx = [a, b, e];
                    let src = idx[slot];
                    for x in 0..ch.d_x() {
                        let q = ch.get(x, src);
                        if q == 0.0 {
                            continue;
                        }
                        idx[slot] = x;
                        out[(idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]] += q * v;
                    }
                }
            }
        }
        Ok(JointDistribution3::from_parts(dims, out))
    }

    /// Reorders Eve's alphabet so that `perm[e]` becomes the new label of `e`.
    pub fn relabel_eve(&self, perm: &[usize]) -> Result<JointDistribution3> {
        let d_e = self.d_e();
        let mut seen = vec![false; d_e];
        if perm.len() != d_e
            || perm
                .iter()
                .any(|&e| e >= d_e || std::mem::replace(&mut seen[e], true))
        {
            return Err(Error::InvalidDistribution(
                "Eve relabeling is not a permutation".into(),
            ));
        }
        let mut out = vec![0.0; self.p.len()];
        for (a, b, e, v) in self.entries() {
            out[(a * self.d_b() + b) * d_e + perm[e]] = v;
        }
        Ok(JointDistribution3::from_parts(self.dims, out))
    }

    /// Eve's labels sorted by the lexicographically smallest (a, b) cell on
    /// which each label is supported; unsupported labels go last.
    pub fn canonical_eve_order(&self) -> JointDistribution3 {
        let [d_a, d_b, d_e] = self.dims;
        let slice =
            |e: usize| -> Vec<f64> { (0..d_a * d_b).map(|ab| self.p[ab * d_e + e]).collect() };
        let first_cell =
            |e: usize| (0..d_a * d_b).find(|&ab| self.p[ab * d_e + e] > ZERO_THRESHOLD);
        let mut order: Vec<usize> = (0..d_e).collect();
        order.sort_by(|&x, &y| {
            let key = |e| first_cell(e).unwrap_or(usize::MAX);
            key(x).cmp(&key(y)).then_with(|| {
                let (sx, sy) = (slice(x), slice(y));
                sy.iter()
                    .zip(&sx)
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
        });
        let mut perm = vec![0; d_e];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new;
        }
        self.relabel_eve(&perm).expect("order is a permutation")
    }

    /// Compares two distributions up to a relabeling of Eve's alphabet.
    pub fn equal_up_to_eve_relabel(&self, other: &JointDistribution3, tol: f64) -> bool {
        if self.dims != other.dims {
            return false;
        }
        let (x, y) = (self.canonical_eve_order(), other.canonical_eve_order());
        x.p.iter().zip(&y.p).all(|(u, v)| (u - v).abs() <= tol)
    }

    /// The i.i.d. extension P^{⊗n}, with copy 1 as the most significant digit
    /// of each composite symbol.
    pub fn iid_extension(&self, n: usize) -> Result<JointDistribution3> {
        if !(1..=3).contains(&n) {
            return Err(Error::DomainError(format!(
                "i.i.d. extension supports 1 <= n <= 3, got {n}"
            )));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    fn tensor(&self, other: &JointDistribution3) -> JointDistribution3 {
        let dims = [
            self.dims[0] * other.dims[0],
            self.dims[1] * other.dims[1],
            self.dims[2] * other.dims[2],
        ];
        let mut p = vec![0.0; dims.iter().product()];
        for (a1, b1, e1, v1) in self.entries() {
            for (a2, b2, e2, v2) in other.entries() {
                let a = a1 * other.dims[0] + a2;
                let b = b1 * other.dims[1] + b2;
                let e = e1 * other.dims[2] + e2;
                p[(a * dims[1] + b) * dims[2] + e] = v1 * v2;
            }
        }
        JointDistribution3::from_parts(dims, p)
    }
}

/// One failure of the unambiguity conditions: `count` values of the
/// `ambiguous` variable are possible once the other two are fixed to `fixed`
/// (listed in slot order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub ambiguous: Party,
    pub fixed: (usize, usize),
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnambiguityReport {
    /// (b, e) determines a.
    pub flag_a: bool,
    /// (a, e) determines b.
    pub flag_b: bool,
    /// (a, b) determines e.
    pub flag_e: bool,
    pub violations: Vec<Violation>,
}

impl UnambiguityReport {
    pub fn is_unambiguous(&self) -> bool {
        self.flag_a && self.flag_b && self.flag_e
    }
}

/// A pmf over a subset of the three variables, row-major in slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalDistribution {
    parties: Vec<Party>,
    dims: Vec<usize>,
    p: Vec<f64>,
}

impl MarginalDistribution {
    pub fn new(parties: Vec<Party>, dims: Vec<usize>, mut p: Vec<f64>) -> Result<Self> {
        if parties.is_empty() || parties.len() != dims.len() {
            return Err(Error::InvalidDistribution(
                "one alphabet size per party required".into(),
            ));
        }
        if parties.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "parties must be distinct and in slot order".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDistribution(
                "alphabet sizes must be positive".into(),
            ));
        }
        let n: usize = dims.iter().product();
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        check_pmf(&mut p, "marginal distribution")?;
        Ok(Self { parties, dims, p })
    }

    /// A pmf over (A, B) from a `d_a x d_b` row-major matrix.
    pub fn matrix(d_a: usize, d_b: usize, p: Vec<f64>) -> Result<Self> {
        Self::new(vec![Party::A, Party::B], vec![d_a, d_b], p)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d_a = rows.len();
        let d_b = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d_b) {
            return Err(Error::InvalidDistribution("ragged P_AB matrix".into()));
        }
        Self::matrix(d_a, d_b, rows.concat())
    }

    /// Single-variable pmf.
    pub fn single(party: Party, p: Vec<f64>) -> Result<Self> {
        let n = p.len();
        Self::new(vec![party], vec![n], p)
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// Entry (i, j) of a two-variable marginal.
    pub fn get2(&self, i: usize, j: usize) -> f64 {
        assert_eq!(
            self.dims.len(),
            2,
            "get2 on a marginal over {} variables",
            self.dims.len()
        );
        self.p[i * self.dims[1] + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let width = *self.dims.last().expect("nonempty");
        self.p.chunks(width).map(<[f64]>::to_vec).collect()
    }

    /// Base-2 Shannon entropy with 0 log 0 = 0.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.p)
    }
}

/// Base-2 Shannon entropy of a slice of probabilities, skipping zeros.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

/// A column-stochastic map q(x|a), stored row-major over x.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyChannel {
    d_x: usize,
    d_a: usize,
    q: Vec<f64>,
}

impl NoisyChannel {
    /// Columns whose sums are within [`LOAD_TOLERANCE`] of one are renormalized.
    pub fn new(d_x: usize, d_a: usize, mut q: Vec<f64>) -> Result<Self> {
        if d_x == 0 || d_a == 0 {
            return Err(Error::InvalidChannel(
                "alphabet sizes must be positive".into(),
            ));
        }
        if q.len() != d_x * d_a {
            return Err(Error::DimensionMismatch {
                expected: d_x * d_a,
                found: q.len(),
            });
        }
        if let Some(v) = q.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidChannel(format!(
                "entry {v} is not a probability"
            )));
        }
        for a in 0..d_a {
            let s: f64 = (0..d_x).map(|x| q[x * d_a + a]).sum();
            if (s - 1.0).abs() > LOAD_TOLERANCE {
                return Err(Error::InvalidChannel(format!("column {a} sums to {s}")));
            }
            if s != 1.0 {
                (0..d_x).for_each(|x| q[x * d_a + a] /= s);
            }
        }
        Ok(Self { d_x, d_a, q })
    }

    /// From rows indexed by x, each holding q(x|a) for every a.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d_x = rows.len();
        let d_a = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d_a) {
            return Err(Error::InvalidChannel("ragged channel matrix".into()));
        }
        Self::new(d_x, d_a, rows.concat())
    }

    pub fn identity(d: usize) -> Self {
        let mut q = vec![0.0; d * d];
        (0..d).for_each(|i| q[i * d + i] = 1.0);
        Self { d_x: d, d_a: d, q }
    }

    /// Maps every input to the symbol `x`.
    pub fn constant(d_x: usize, d_a: usize, x: usize) -> Self {
        assert!(x < d_x);
        let mut q = vec![0.0; d_x * d_a];
        (0..d_a).for_each(|a| q[x * d_a + a] = 1.0);
        Self { d_x, d_a, q }
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.q[x * self.d_a + a]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.d_a).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn from_parts(d_x: usize, d_a: usize, q: Vec<f64>) -> Self {
        Self { d_x, d_a, q }
    }
}
