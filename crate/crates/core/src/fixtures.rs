//! The five published private bound-entangled examples and the
//! reproduction report built from them.
//!
//! Matrices are kept as the printed decimal strings. The diagrams are cached
//! outputs of [`infer_diagram`](crate::optimizer::infer_diagram) at
//! [`FIXTURE_TOLERANCE`]; [`Fixture::reinfer`] regenerates them.

use std::fmt::Write as _;

use serde::Serialize;

use crate::diagram::{Cell, Diagram};
use crate::dist::{
    JointDistribution3, MarginalDistribution, NoisyChannel, Party, FIXTURE_TOLERANCE,
};
use crate::error::Result;
use crate::io::{ChannelFile, DistributionFile};
use crate::keyrate::{advantage, noisy_bound, Direction};
use crate::optimizer::infer_diagram;
use crate::quantum::{lift_state, pt_invariance_combinatorial, reduce_to_ab};

/// Tolerance for matrix-level PT-invariance and PPT of the rounded fixtures.
pub const FIXTURE_PT_TOLERANCE: f64 = 5e-5;

#[derive(Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub p_ab: &'static [&'static [&'static str]],
    pub q: &'static [&'static [&'static str]],
    pub d_e: usize,
    cliques: &'static [&'static [Cell]],
}

pub static FIXTURES: [Fixture; 5] = [
    Fixture {
        name: "3x3",
        p_ab: &[
            &["0.167184", "0.171529", "0.001243"],
            &["0.089041", "0.091355", "0.017492"],
            &["0.441714", "0.017157", "0.003285"],
        ],
        q: &[&["1", "0", "0.670965"], &["0", "1", "0.329035"]],
        d_e: 4,
        cliques: &[
            &[(0, 0), (1, 1), (2, 2)],
            &[(0, 1), (1, 0)],
            &[(0, 2), (2, 0)],
            &[(1, 2), (2, 1)],
        ],
    },
    Fixture {
        name: "4x4",
        p_ab: &[
            &["0.024798", "0.119200", "0.128999", "0.009393"],
            &["0", "0.087320", "0.094498", "0.035793"],
            &["0.128999", "0.119200", "0.024798", "0.009393"],
            &["0.094498", "0.087320", "0", "0.035793"],
        ],
        q: &[&["1", "0", "1", "0"], &["0", "1", "0", "1"]],
        d_e: 6,
        cliques: &[
            &[(0, 0), (3, 3)],
            &[(0, 1), (1, 2), (2, 3)],
            &[(0, 2), (1, 1)],
            &[(0, 3), (2, 1), (3, 0)],
            &[(1, 3), (2, 2)],
            &[(2, 0), (3, 1)],
        ],
    },
    Fixture {
        name: "4x5",
        p_ab: &[
            &["0.015228", "0.033970", "0.092123", "0.004989", "0.103690"],
            &["0.103690", "0.033970", "0.092123", "0.004989", "0.015228"],
            &["0.015228", "0.004989", "0.092123", "0.033970", "0.103690"],
            &["0.103690", "0.004989", "0.092123", "0.033970", "0.015228"],
        ],
        q: &[&["1", "1", "0", "0"], &["0", "0", "1", "1"]],
        d_e: 8,
        cliques: &[
            &[(0, 0), (3, 3)],
            &[(0, 1), (3, 4)],
            &[(0, 2), (1, 3), (2, 4)],
            &[(0, 3), (1, 2), (3, 0)],
            &[(0, 4), (2, 2), (3, 1)],
            &[(1, 0), (2, 1), (3, 2)],
            &[(1, 1), (2, 0)],
            &[(1, 4), (2, 3)],
        ],
    },
    Fixture {
        name: "5x6",
        p_ab: &[
            &["0.076349", "0.004299", "0.070542", "0", "0", "0.014384"],
            &[
                "0.014674", "0.006016", "0.098724", "0.006016", "0.014674", "0.098724",
            ],
            &[
                "0.050896", "0.020867", "0.047025", "0.020867", "0.050896", "0.047025",
            ],
            &["0", "0", "0.014384", "0.004299", "0.076349", "0.070542"],
            &["0", "0.022142", "0.074083", "0.022142", "0", "0.074083"],
        ],
        q: &[&["0", "0", "1", "0", "1"], &["1", "1", "0", "1", "0"]],
        d_e: 10,
        cliques: &[
            &[(0, 0), (2, 2)],
            &[(0, 1), (1, 2), (4, 5)],
            &[(0, 2), (1, 1), (2, 0)],
            &[(0, 5), (4, 1)],
            &[(1, 0), (2, 1)],
            &[(1, 3), (2, 4), (3, 5)],
            &[(1, 4), (2, 3)],
            &[(1, 5), (3, 3), (4, 2)],
            &[(2, 5), (3, 4)],
            &[(3, 2), (4, 3)],
        ],
    },
    Fixture {
        name: "6x5",
        p_ab: &[
            &["0.026574", "0.061138", "0.065969", "0", "0"],
            &["0.003409", "0.056660", "0.061138", "0", "0.011779"],
            &["0.004843", "0.080489", "0.012023", "0.026034", "0.089945"],
            &["0", "0.056660", "0.061138", "0.003409", "0.011779"],
            &["0", "0.061138", "0.065969", "0.026574", "0"],
            &["0.026034", "0.080489", "0.012023", "0.004843", "0.089945"],
        ],
        q: &[
            &["0", "1", "1", "0", "1", "0"],
            &["1", "0", "0", "1", "0", "1"],
        ],
        d_e: 10,
        cliques: &[
            &[(0, 0), (2, 2)],
            &[(0, 1), (1, 2)],
            &[(0, 2), (1, 1), (2, 0)],
            &[(1, 0), (2, 1), (5, 4)],
            &[(1, 4), (5, 0)],
            &[(2, 3), (3, 4)],
            &[(2, 4), (3, 3), (5, 1)],
            &[(3, 1), (4, 2), (5, 3)],
            &[(3, 2), (4, 1)],
            &[(4, 3), (5, 2)],
        ],
    },
];

pub fn fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

fn parse(rows: &[&[&str]]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|s| s.parse::<f64>().expect("fixture literal is a decimal"))
                .collect()
        })
        .collect()
}

impl Fixture {
    pub fn d_a(&self) -> usize {
        self.p_ab.len()
    }

    pub fn d_b(&self) -> usize {
        self.p_ab[0].len()
    }

    /// Printed values, not renormalized.
    pub fn p_ab_values(&self) -> Vec<Vec<f64>> {
        parse(self.p_ab)
    }

    /// P_AB renormalized to total one.
    pub fn p_ab(&self) -> MarginalDistribution {
        MarginalDistribution::from_rows(&self.p_ab_values())
            .expect("fixture P_AB is a pmf within load tolerance")
    }

    pub fn channel(&self) -> NoisyChannel {
        NoisyChannel::from_rows(&parse(self.q)).expect("fixture Q is stochastic")
    }

    /// The cached diagram.
    pub fn diagram(&self) -> Diagram {
        let cliques = self.cliques.iter().map(|c| c.to_vec()).collect();
        Diagram::new(self.d_a(), self.d_b(), cliques).expect("cached fixture diagram is valid")
    }

    /// Infers the diagram afresh; when several are consistent with P_AB, picks
    /// the one on which the printed channel yields the largest rate.
    pub fn reinfer(&self) -> Result<Diagram> {
        let p_ab = self.p_ab();
        let ch = self.channel();
        let mut best: Option<(f64, Diagram)> = None;
        for d in infer_diagram(&p_ab, self.d_e, FIXTURE_TOLERANCE)? {
            let rate = noisy_bound(&d.to_distribution(&p_ab)?, &ch)?;
            if best.as_ref().is_none_or(|(r, _)| rate > *r) {
                best = Some((rate, d));
            }
        }
        Ok(best.expect("infer_diagram returns at least one diagram").1)
    }

    pub fn distribution(&self) -> JointDistribution3 {
        self.diagram()
            .to_distribution(&self.p_ab())
            .expect("fixture P_AB lives on its diagram")
    }

    /// The distribution file with the printed values verbatim.
    pub fn distribution_file(&self) -> DistributionFile {
        let values = self.p_ab_values();
        let mut entries = Vec::new();
        let grid = self.diagram().label_grid();
        for (a, row) in values.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if let Some(e) = grid[a * self.d_b() + b] {
                    entries.push((a, b, e, v));
                }
            }
        }
        DistributionFile {
            d_a: self.d_a(),
            d_b: self.d_b(),
            d_e: self.d_e,
            entries,
        }
    }

    pub fn channel_file(&self) -> ChannelFile {
        ChannelFile {
            d_x: self.q.len(),
            d_a: self.d_a(),
            q: parse(self.q),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureReport {
    pub name: String,
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    #[serde(rename = "dE")]
    pub d_e: usize,
    pub diagram_cliques: usize,
    pub unambiguous: bool,
    pub pt_invariance_residual: f64,
    pub max_cross_determinant: f64,
    pub min_eig_pt: f64,
    pub ppt_at_fixture_tolerance: bool,
    pub advantage_a_to_b: f64,
    pub advantage_b_to_a: f64,
    pub key_rate_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub fixtures: Vec<FixtureReport>,
}

impl ReproductionReport {
    /// True when every fixture is unambiguous, PPT within
    /// [`FIXTURE_PT_TOLERANCE`], and has a positive key rate.
    pub fn all_pass(&self) -> bool {
        self.fixtures
            .iter()
            .all(|f| f.unambiguous && f.ppt_at_fixture_tolerance && f.key_rate_bits > 0.0)
    }

    /// Dimensions, Eve's alphabet and the certified rate, one row per fixture.
    pub fn table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "| dA x dB | dE | Bits of private key | PT residual | min eig PT | unambiguous |"
        )
        .unwrap();
        writeln!(
            s,
            "|---------|----|---------------------|-------------|------------|-------------|"
        )
        .unwrap();
        for f in &self.fixtures {
            writeln!(
                s,
                "| {:>7} | {:>2} | {:>19.7} | {:>11.3e} | {:>10.3e} | {:>11} |",
                format!("{} x {}", f.d_a, f.d_b),
                f.d_e,
                f.key_rate_bits,
                f.pt_invariance_residual,
                f.min_eig_pt,
                f.unambiguous
            )
            .unwrap();
        }
        s
    }
}

pub fn fixture_report(f: &Fixture, diagram: &Diagram) -> Result<FixtureReport> {
    let p = diagram.to_distribution(&f.p_ab())?;
    let unambiguous = p.validate_unambiguous().is_unambiguous();
    let rho = reduce_to_ab(&lift_state(&p));
    let pt = rho.pt_report(FIXTURE_PT_TOLERANCE)?;
    let comb = pt_invariance_combinatorial(&p, FIXTURE_TOLERANCE)?;
    Ok(FixtureReport {
        name: f.name.to_string(),
        d_a: f.d_a(),
        d_b: f.d_b(),
        d_e: p.d_e(),
        diagram_cliques: diagram.d_e(),
        unambiguous,
        pt_invariance_residual: pt.max_abs_deviation,
        max_cross_determinant: comb.max_determinant,
        min_eig_pt: pt.min_eig_pt,
        ppt_at_fixture_tolerance: pt.is_ppt,
        advantage_a_to_b: advantage(&p, Direction::AliceToBob),
        advantage_b_to_a: advantage(&p, Direction::BobToAlice),
        key_rate_bits: noisy_bound(&p, &f.channel())?,
    })
}

/// Runs every fixture through validation, lifting, and the key-rate bound.
/// With `reinfer`, diagrams are inferred again instead of read from the cache.
pub fn reproduce(reinfer: bool) -> Result<ReproductionReport> {
    let fixtures = FIXTURES
        .iter()
        .map(|f| {
            let d = if reinfer { f.reinfer()? } else { f.diagram() };
            fixture_report(f, &d)
        })
        .collect::<Result<_>>()?;
    Ok(ReproductionReport { fixtures })
}

/// Column sums of a P_AB matrix, i.e. Bob's marginal.
pub fn column_sums(rows: &[Vec<f64>]) -> Vec<f64> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|b| rows.iter().map(|r| r[b]).sum())
        .collect()
}

/// Bob's marginal of the fixture distribution.
pub fn bob_marginal(f: &Fixture) -> Vec<f64> {
    f.distribution().marginal(&[Party::B]).probs().to_vec()
}
