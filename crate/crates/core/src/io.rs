//! JSON file formats.
//!
//! - distribution: `{ "dA", "dB", "dE", "entries": [[a, b, e, p], ...] }`
//! - diagram: `{ "dA", "dB", "cliques": [[[a, b], ...], ...] }`
//! - channel: `{ "dX", "dA", "q": [[q(x|0), q(x|1), ...], ...] }`, one row per x
//! - P_AB matrix: `{ "dA", "dB", "p": [[...], ...] }`, one row per a
//! - density matrix: `{ "dA", "dB", "matrix": [...] }`, row-major
//! - protocol: `{ "steps": [{ "speaker": "A"|"B", "q": [[...]] }], "final_channel"?, "direction"? }`

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};

use crate::diagram::Diagram;
use crate::dist::{JointDistribution3, MarginalDistribution, NoisyChannel, Party};
use crate::error::{Error, Result};
use crate::keyrate::Direction;
use crate::protocol::ProtocolStep;
use crate::quantum::DensityMatrix;

pub const SCHEMA_HELP: &str = r#"File formats (JSON, UTF-8, probabilities as decimal floats):
  distribution  {"dA":2,"dB":2,"dE":1,"entries":[[0,0,0,0.5],[1,1,0,0.5]]}
  diagram       {"dA":2,"dB":2,"cliques":[[[0,0],[1,1]],[[0,1],[1,0]]]}
  channel       {"dX":2,"dA":3,"q":[[1,0,0.5],[0,1,0.5]]}   (rows indexed by x)
  P_AB matrix   {"dA":2,"dB":2,"p":[[0.25,0.25],[0.25,0.25]]}
  protocol      {"steps":[{"speaker":"A","q":[[1,0],[0,1]]}],"final_channel":null,"direction":"A->B"}"#;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFile {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    #[serde(rename = "dE")]
    pub d_e: usize,
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl DistributionFile {
    pub fn to_distribution(&self) -> Result<JointDistribution3> {
        JointDistribution3::from_entries(self.d_a, self.d_b, self.d_e, &self.entries)
    }
}

impl From<&JointDistribution3> for DistributionFile {
    fn from(p: &JointDistribution3) -> Self {
        Self {
            d_a: p.d_a(),
            d_b: p.d_b(),
            d_e: p.d_e(),
            entries: p.entries().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramFile {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub cliques: Vec<Vec<[usize; 2]>>,
}

impl DiagramFile {
    pub fn to_diagram(&self) -> Result<Diagram> {
        let cliques = self
            .cliques
            .iter()
            .map(|c| c.iter().map(|&[a, b]| (a, b)).collect())
            .collect();
        Diagram::new(self.d_a, self.d_b, cliques)
    }
}

impl From<&Diagram> for DiagramFile {
    fn from(d: &Diagram) -> Self {
        Self {
            d_a: d.d_a(),
            d_b: d.d_b(),
            cliques: d
                .cliques()
                .iter()
                .map(|c| c.iter().map(|&(a, b)| [a, b]).collect())
                .collect(),
        }
    }
}

impl Serialize for Diagram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiagramFile::from(self).serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(rename = "dX")]
    pub d_x: usize,
    #[serde(rename = "dA")]
    pub d_a: usize,
    pub q: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<NoisyChannel> {
        if self.q.len() != self.d_x || self.q.iter().any(|r| r.len() != self.d_a) {
            return Err(Error::InvalidChannel(format!(
                "q must be {}x{}",
                self.d_x, self.d_a
            )));
        }
        NoisyChannel::from_rows(&self.q)
    }
}

impl From<&NoisyChannel> for ChannelFile {
    fn from(ch: &NoisyChannel) -> Self {
        Self {
            d_x: ch.d_x(),
            d_a: ch.d_a(),
            q: ch.rows(),
        }
    }
}

impl Serialize for NoisyChannel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelFile::from(self).serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PabFile {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub p: Vec<Vec<f64>>,
}

impl PabFile {
    pub fn to_marginal(&self) -> Result<MarginalDistribution> {
        if self.p.len() != self.d_a || self.p.iter().any(|r| r.len() != self.d_b) {
            return Err(Error::InvalidDistribution(format!(
                "p must be {}x{}",
                self.d_a, self.d_b
            )));
        }
        MarginalDistribution::from_rows(&self.p)
    }
}

impl Serialize for MarginalDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match (self.parties(), self.dims()) {
            ([Party::A, Party::B], &[d_a, d_b]) => PabFile {
                d_a,
                d_b,
                p: self.rows(),
            }
            .serialize(s),
            _ => {
                #[derive(Serialize)]
                struct Generic<'a> {
                    parties: &'a [Party],
                    dims: &'a [usize],
                    p: &'a [f64],
                }
                Generic {
                    parties: self.parties(),
                    dims: self.dims(),
                    p: self.probs(),
                }
                .serialize(s)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub matrix: Vec<f64>,
}

impl DensityMatrixFile {
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.d_a, self.d_b, self.matrix.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFile {
    pub speaker: String,
    pub q: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub steps: Vec<StepFile>,
    #[serde(default)]
    pub final_channel: Option<ChannelFile>,
    #[serde(default)]
    pub direction: Option<String>,
}

/// A parsed protocol description.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub steps: Vec<ProtocolStep>,
    pub final_channel: Option<NoisyChannel>,
    pub direction: Direction,
}

impl ProtocolFile {
    pub fn to_protocol(&self) -> Result<Protocol> {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let speaker = match s.speaker.as_str() {
                    "A" => Party::A,
                    "B" => Party::B,
                    other => {
                        return Err(Error::InvalidProtocol(format!("unknown speaker {other:?}")))
                    }
                };
                ProtocolStep::new(speaker, &s.q)
            })
            .collect::<Result<_>>()?;
        let final_channel = self
            .final_channel
            .as_ref()
            .map(ChannelFile::to_channel)
            .transpose()?;
        let direction = match &self.direction {
            None => Direction::AliceToBob,
            Some(d) => Direction::parse(d)
                .ok_or_else(|| Error::InvalidProtocol(format!("unknown direction {d:?}")))?,
        };
        Ok(Protocol {
            steps,
            final_channel,
            direction,
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed JSON followed by a newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn load_distribution(path: impl AsRef<Path>) -> Result<JointDistribution3> {
    read_json::<DistributionFile>(path)?.to_distribution()
}

pub fn load_diagram(path: impl AsRef<Path>) -> Result<Diagram> {
    read_json::<DiagramFile>(path)?.to_diagram()
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<NoisyChannel> {
    read_json::<ChannelFile>(path)?.to_channel()
}

pub fn load_pab(path: impl AsRef<Path>) -> Result<MarginalDistribution> {
    read_json::<PabFile>(path)?.to_marginal()
}

pub fn load_protocol(path: impl AsRef<Path>) -> Result<Protocol> {
    read_json::<ProtocolFile>(path)?.to_protocol()
}
