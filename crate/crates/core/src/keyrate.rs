//! One-way key rates: the advantage I(F;G) - I(F;E) and its noisy-processing
//! lower bound, plus the closed form for the structured 4x5 family.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::diagram::Diagram;
use crate::dist::{JointDistribution3, MarginalDistribution, NoisyChannel, Party};
use crate::error::{Error, Result};

/// Direction of the final one-way error correction and privacy amplification.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Direction {
    #[default]
    AliceToBob,
    BobToAlice,
}

impl Direction {
    pub fn sender(self) -> Party {
        match self {
            Direction::AliceToBob => Party::A,
            Direction::BobToAlice => Party::B,
        }
    }

    pub fn receiver(self) -> Party {
        match self {
            Direction::AliceToBob => Party::B,
            Direction::BobToAlice => Party::A,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "A->B" | "AB" | "A" => Some(Direction::AliceToBob),
            "B->A" | "BA" | "B" => Some(Direction::BobToAlice),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AliceToBob => "A->B",
            Direction::BobToAlice => "B->A",
        })
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// I(F;G) - I(F;E) with F the sender and G the receiver.
pub fn advantage(p: &JointDistribution3, direction: Direction) -> f64 {
    let (f, g) = (direction.sender(), direction.receiver());
    p.mutual_information(f, g) - p.mutual_information(f, Party::E)
}

/// I(X;B) - I(X;E) for X obtained from A through `ch`: the certified lower
/// bound on the key rate with noisy processing.
pub fn noisy_bound(p: &JointDistribution3, ch: &NoisyChannel) -> Result<f64> {
    noisy_bound_from(p, ch, Direction::AliceToBob)
}

/// Noisy-processing bound with the channel applied by the sender of `direction`.
pub fn noisy_bound_from(
    p: &JointDistribution3,
    ch: &NoisyChannel,
    direction: Direction,
) -> Result<f64> {
    let processed = p.apply_channel(ch, direction.sender())?;
    Ok(advantage(&processed, direction))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyRateReport {
    pub advantage_ab_vs_e: f64,
    pub noisy_bound: f64,
    pub channel_used: NoisyChannel,
    pub direction: Direction,
}

impl KeyRateReport {
    pub fn csv_header() -> &'static str {
        "label,direction,advantage_bits,noisy_bound_bits,d_x"
    }

    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "{label},{},{:.9},{:.9},{}",
            self.direction,
            self.advantage_ab_vs_e,
            self.noisy_bound,
            self.channel_used.d_x()
        )
    }
}

/// Advantage and noisy-processing bound in one report; without a channel the
/// identity is used, so both numbers coincide.
pub fn key_rate_report(
    p: &JointDistribution3,
    channel: Option<&NoisyChannel>,
    direction: Direction,
) -> Result<KeyRateReport> {
    let channel = match channel {
        Some(ch) => ch.clone(),
        None => NoisyChannel::identity(p.dim(direction.sender())),
    };
    Ok(KeyRateReport {
        advantage_ab_vs_e: advantage(p, direction),
        noisy_bound: noisy_bound_from(p, &channel, direction)?,
        channel_used: channel,
        direction,
    })
}

/// h(p) = -p log2 p, with inputs below 1e-15 treated as zero.
pub fn h(p: f64) -> f64 {
    if p < 1e-15 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Closed-form noisy-processing rate of the structured 4x5 family, valid on
/// the constraint surface ab = de.
pub fn f_structured(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<f64> {
    let xs = [a, b, c, d, e];
    if xs.iter().any(|&x| x.is_nan() || x < 0.0) {
        return Err(Error::DomainError(format!(
            "structured parameters must be nonnegative: {xs:?}"
        )));
    }
    let s: f64 = xs.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::DomainError(format!(
            "structured parameters sum to {s}, not 1"
        )));
    }
    Ok(-a - c - e + h(a) - h(d) + h(e) - h(a + b) + h(b + d) + h(c + d) - h(c + d + e))
}

/// The 4x5 diagram with eight cliques: four carrying the values (a, b) and
/// four carrying (c, d, e) of [`structured_pab`].
pub fn structured_diagram() -> Diagram {
    Diagram::new(
        4,
        5,
        vec![
            vec![(0, 0), (3, 3)],
            vec![(0, 1), (3, 4)],
            vec![(0, 2), (1, 3), (2, 4)],
            vec![(0, 3), (1, 2), (3, 0)],
            vec![(0, 4), (2, 2), (3, 1)],
            vec![(1, 0), (2, 1), (3, 2)],
            vec![(1, 1), (2, 0)],
            vec![(1, 4), (2, 3)],
        ],
    )
    .expect("structured diagram is valid")
}

/// P_AB of the structured family, one quarter of
/// `[[a,b,c,d,e],[e,b,c,d,a],[a,d,c,b,e],[e,d,c,b,a]]`.
pub fn structured_pab(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<MarginalDistribution> {
    let rows = [
        [a, b, c, d, e],
        [e, b, c, d, a],
        [a, d, c, b, e],
        [e, d, c, b, a],
    ];
    MarginalDistribution::matrix(4, 5, rows.iter().flatten().map(|v| v / 4.0).collect())
}

/// X = 0 for a in {0, 1}, X = 1 for a in {2, 3}.
pub fn structured_channel() -> NoisyChannel {
    NoisyChannel::from_rows(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]])
        .expect("valid channel")
}
