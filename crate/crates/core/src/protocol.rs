//! Exact simulation of public-discussion protocols on distributions.
//!
//! A message `m` drawn from q(m | speaker's variable) is appended to all
//! three parties' variables: p'[(a,m),(b,m),(e,m)] = p(a,b,e) q(m|a). The
//! composite symbol of a party after messages m1..mk is
//! `((x * |M1| + m1) * |M2| + m2) ...`.
//!
//! The simulator evaluates concrete protocols; it cannot certify that no
//! public-discussion protocol yields key. That certificate comes from
//! PT-invariance of the lifted state.

use crate::dist::{JointDistribution3, NoisyChannel, Party, LOAD_TOLERANCE};
use crate::error::{Error, Result};
use crate::keyrate::{key_rate_report, Direction, KeyRateReport};

pub const MAX_MESSAGE_ALPHABET: usize = 8;
pub const MAX_STEPS: usize = 4;

/// One public message: `q[m * d_local + x] = q(m | x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolStep {
    speaker: Party,
    d_m: usize,
    d_local: usize,
    q: Vec<f64>,
}

impl ProtocolStep {
    /// `rows[m][x] = q(m | x)`. `x` ranges over either the speaker's original
    /// alphabet (the message ignores history) or the speaker's composite
    /// alphabet at the time the step runs (the message may depend on history).
    pub fn new(speaker: Party, rows: &[Vec<f64>]) -> Result<Self> {
        if speaker == Party::E {
            return Err(Error::InvalidProtocol("only A or B may speak".into()));
        }
        let d_m = rows.len();
        let d_local = rows.first().map_or(0, Vec::len);
        if d_m == 0 || d_local == 0 || rows.iter().any(|r| r.len() != d_local) {
            return Err(Error::InvalidProtocol(
                "message map must be a nonempty rectangular matrix".into(),
            ));
        }
        if d_m > MAX_MESSAGE_ALPHABET {
            return Err(Error::InvalidProtocol(format!(
                "message alphabet {d_m} exceeds {MAX_MESSAGE_ALPHABET}"
            )));
        }
        let mut q = rows.concat();
        if q.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidProtocol(
                "message probabilities must be nonnegative".into(),
            ));
        }
        for x in 0..d_local {
            let s: f64 = (0..d_m).map(|m| q[m * d_local + x]).sum();
            if (s - 1.0).abs() > LOAD_TOLERANCE {
                return Err(Error::InvalidProtocol(format!("q(.|{x}) sums to {s}")));
            }
            (0..d_m).for_each(|m| q[m * d_local + x] /= s);
        }
        Ok(Self {
            speaker,
            d_m,
            d_local,
            q,
        })
    }

    /// The message `m = f(x)`.
    pub fn deterministic(
        speaker: Party,
        d_m: usize,
        f: impl Fn(usize) -> usize,
        d_local: usize,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..d_m)
            .map(|m| {
                (0..d_local)
                    .map(|x| if f(x) == m { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(speaker, &rows)
    }

    pub fn speaker(&self) -> Party {
        self.speaker
    }

    pub fn d_m(&self) -> usize {
        self.d_m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.d_local).map(<[f64]>::to_vec).collect()
    }
}

/// The distribution over composite variables after some messages.
#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptState {
    dist: JointDistribution3,
    base_dims: [usize; 3],
    arities: Vec<usize>,
    /// Unambiguity of the initial distribution followed by one flag per step.
    unambiguous: Vec<bool>,
}

impl TranscriptState {
    pub fn new(p: JointDistribution3) -> Self {
        let flag = p.validate_unambiguous().is_unambiguous();
        Self {
            base_dims: p.dims(),
            dist: p,
            arities: Vec::new(),
            unambiguous: vec![flag],
        }
    }

    pub fn distribution(&self) -> &JointDistribution3 {
        &self.dist
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn unambiguity_history(&self) -> &[bool] {
        &self.unambiguous
    }

    fn history_size(&self) -> usize {
        self.arities.iter().product()
    }

    /// q(m | composite symbol), resolving a history-free map by ignoring history.
    fn conditional(&self, step: &ProtocolStep) -> Result<impl Fn(usize, usize) -> f64 + '_> {
        let composite = self.dist.dim(step.speaker);
        let base = self.base_dims[step.speaker.slot()];
        let history = self.history_size();
        let full = if step.d_local == composite {
            true
        } else if step.d_local == base {
            false
        } else {
            return Err(Error::DimensionMismatch {
                expected: composite,
                found: step.d_local,
            });
        };
        let q = step.q.clone();
        let d_local = step.d_local;
        Ok(move |m: usize, x: usize| {
            let x = if full { x } else { x / history };
            q[m * d_local + x]
        })
    }

    /// The message step as a map on flattened distribution indices.
    pub fn message_map(&self, step: &ProtocolStep) -> Result<StochasticMap> {
        let cond = self.conditional(step)?;
        let [d_a, d_b, d_e] = self.dist.dims();
        let k = step.d_m;
        let out_dims = [d_a * k, d_b * k, d_e * k];
        let mut columns = Vec::with_capacity(d_a * d_b * d_e);
        for a in 0..d_a {
            for b in 0..d_b {
                for e in 0..d_e {
                    let x = [a, b, e][step.speaker.slot()];
                    let col = (0..k)
                        .filter_map(|m| {
                            let w = cond(m, x);
                            let row =
                                ((a * k + m) * out_dims[1] + b * k + m) * out_dims[2] + e * k + m;
                            (w != 0.0).then_some((row, w))
                        })
                        .collect();
                    columns.push(col);
                }
            }
        }
        Ok(StochasticMap {
            out_dim: out_dims.iter().product(),
            columns,
            out_dims,
        })
    }

    /// Appends one public message to every party's variable.
    pub fn public_message_step(&self, step: &ProtocolStep) -> Result<TranscriptState> {
        if self.arities.len() >= MAX_STEPS {
            return Err(Error::InvalidProtocol(format!(
                "at most {MAX_STEPS} steps are simulated"
            )));
        }
        let map = self.message_map(step)?;
        let p = map.apply(self.dist.probs());
        let dist = JointDistribution3::from_parts(map.out_dims, p);
        let mut unambiguous = self.unambiguous.clone();
        unambiguous.push(dist.validate_unambiguous().is_unambiguous());
        let mut arities = self.arities.clone();
        arities.push(step.d_m);
        Ok(TranscriptState {
            dist,
            base_dims: self.base_dims,
            arities,
            unambiguous,
        })
    }

    /// Extends a channel on the original alphabet of `party` to its composite
    /// alphabet, keeping the message history: (x, h) from (a, h) w.p. q(x|a).
    pub fn lift_channel(&self, ch: &NoisyChannel, party: Party) -> Result<NoisyChannel> {
        let composite = self.dist.dim(party);
        if ch.d_a() == composite {
            return Ok(ch.clone());
        }
        let base = self.base_dims[party.slot()];
        if ch.d_a() != base {
            return Err(Error::DimensionMismatch {
                expected: composite,
                found: ch.d_a(),
            });
        }
        let h = self.history_size();
        let (d_x, d_in) = (ch.d_x() * h, composite);
        let mut q = vec![0.0; d_x * d_in];
        for x in 0..ch.d_x() {
            for a in 0..base {
                for hist in 0..h {
                    q[(x * h + hist) * d_in + a * h + hist] = ch.get(x, a);
                }
            }
        }
        Ok(NoisyChannel::from_parts(d_x, d_in, q))
    }
}

pub fn public_message_step(
    state: &TranscriptState,
    step: &ProtocolStep,
) -> Result<TranscriptState> {
    state.public_message_step(step)
}

/// Runs the messages, then optional noisy processing by the sender of
/// `direction`, and reports the one-way rate of the final distribution.
pub fn run_pipeline(
    p: &JointDistribution3,
    steps: &[ProtocolStep],
    final_channel: Option<&NoisyChannel>,
    direction: Direction,
) -> Result<KeyRateReport> {
    if steps.len() > MAX_STEPS {
        return Err(Error::InvalidProtocol(format!(
            "at most {MAX_STEPS} steps are simulated"
        )));
    }
    let mut state = TranscriptState::new(p.clone());
    for step in steps {
        state = state.public_message_step(step)?;
    }
    let channel = final_channel
        .map(|ch| state.lift_channel(ch, direction.sender()))
        .transpose()?;
    key_rate_report(&state.dist, channel.as_ref(), direction)
}

/// A column-stochastic map stored sparsely by column.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMap {
    out_dim: usize,
    out_dims: [usize; 3],
    columns: Vec<Vec<(usize, f64)>>,
}

impl StochasticMap {
    /// From a dense matrix `rows[out][in]`; the output is treated as a flat alphabet.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let out_dim = rows.len();
        let in_dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != in_dim) {
            return Err(Error::InvalidProtocol("ragged stochastic map".into()));
        }
        let columns = (0..in_dim)
            .map(|c| {
                (0..out_dim)
                    .filter(|&r| rows[r][c] != 0.0)
                    .map(|r| (r, rows[r][c]))
                    .collect()
            })
            .collect();
        Ok(Self {
            out_dim,
            out_dims: [out_dim, 1, 1],
            columns,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.columns.len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        for (col, &x) in self.columns.iter().zip(v) {
            for &(r, w) in col {
                out[r] += w * x;
            }
        }
        out
    }

    /// Distinct inputs map to outputs with disjoint supports.
    pub fn check_isometry(&self) -> Result<()> {
        let mut owner = vec![usize::MAX; self.out_dim];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, _) in col {
                if owner[r] != usize::MAX && owner[r] != c {
                    return Err(Error::NotIsometry {
                        first: owner[r],
                        second: c,
                        output: r,
                    });
                }
                owner[r] = c;
            }
        }
        Ok(())
    }
}

/// max |sqrt(M) sqrt(q) - sqrt(M q)| entrywise, for a classical isometry `M`.
pub fn check_sqrt_lift(map: &StochasticMap, q: &JointDistribution3) -> Result<f64> {
    if map.in_dim() != q.probs().len() {
        return Err(Error::DimensionMismatch {
            expected: map.in_dim(),
            found: q.probs().len(),
        });
    }
    map.check_isometry()?;
    let mut lifted = vec![0.0; map.out_dim];
    for (col, &x) in map.columns.iter().zip(q.probs()) {
        let s = x.sqrt();
        for &(r, w) in col {
            lifted[r] += w.sqrt() * s;
        }
    }
    let direct = map.apply(q.probs());
    Ok(lifted
        .iter()
        .zip(&direct)
        .map(|(l, d)| (l - d.sqrt()).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyrate::advantage;

    fn bell() -> JointDistribution3 {
        JointDistribution3::from_entries(2, 2, 1, &[(0, 0, 0, 0.5), (1, 1, 0, 0.5)]).unwrap()
    }

    #[test]
    fn broadcasting_the_key_destroys_it() {
        let copy = ProtocolStep::deterministic(Party::A, 2, |a| a, 2).unwrap();
        let state = TranscriptState::new(bell())
            .public_message_step(&copy)
            .unwrap();
        assert!(advantage(state.distribution(), Direction::AliceToBob).abs() < 1e-12);
        assert_eq!(state.distribution().dims(), [4, 4, 2]);
        assert_eq!(state.unambiguity_history(), &[true, true]);
    }

    #[test]
    fn constant_message_changes_nothing() {
        let constant = ProtocolStep::new(Party::B, &[vec![1.0, 1.0]]).unwrap();
        let r = run_pipeline(&bell(), &[constant], None, Direction::AliceToBob).unwrap();
        assert!((r.noisy_bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_has_no_key_after_any_steps() {
        let p = JointDistribution3::from_entries(2, 2, 1, &[(0, 0, 0, 1.0)]).unwrap();
        let s1 = ProtocolStep::new(Party::A, &[vec![0.3, 0.5], vec![0.7, 0.5]]).unwrap();
        let s2 = ProtocolStep::new(Party::B, &[vec![0.1, 0.9], vec![0.9, 0.1]]).unwrap();
        let r = run_pipeline(&p, &[s1, s2], None, Direction::BobToAlice).unwrap();
        assert!(r.noisy_bound.abs() < 1e-12);
    }

    #[test]
    fn history_dependent_messages() {
        let s1 = ProtocolStep::deterministic(Party::A, 2, |a| a, 2).unwrap();
        // composite alphabet of B after one binary message is 4
        let s2 = ProtocolStep::deterministic(Party::B, 2, |x| x % 2, 4).unwrap();
        let st = TranscriptState::new(bell())
            .public_message_step(&s1)
            .unwrap();
        let st = st.public_message_step(&s2).unwrap();
        assert_eq!(st.arities(), &[2, 2]);
        assert!((st.distribution().total() - 1.0).abs() < 1e-15);
        let bad = ProtocolStep::deterministic(Party::B, 2, |x| x % 2, 3).unwrap();
        assert!(st.public_message_step(&bad).is_err());
    }

    #[test]
    fn copy_map_lifts_exactly() {
        let copy = ProtocolStep::deterministic(Party::A, 2, |a| a, 2).unwrap();
        let state = TranscriptState::new(bell());
        let map = state.message_map(&copy).unwrap();
        assert_eq!(check_sqrt_lift(&map, &bell()).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_supports_are_rejected() {
        let map = StochasticMap::from_dense(&[vec![1.0, 0.5], vec![0.0, 0.5]]).unwrap();
        let q = JointDistribution3::new(2, 1, 1, vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            check_sqrt_lift(&map, &q),
            Err(Error::NotIsometry { .. })
        ));
    }

    #[test]
    fn step_limits() {
        assert!(ProtocolStep::new(Party::E, &[vec![1.0]]).is_err());
        assert!(ProtocolStep::new(Party::A, &vec![vec![0.1]; 10]).is_err());
        let constant = ProtocolStep::new(Party::A, &[vec![1.0, 1.0]]).unwrap();
        let steps = vec![constant; 5];
        assert!(run_pipeline(&bell(), &steps, None, Direction::AliceToBob).is_err());
    }
}
