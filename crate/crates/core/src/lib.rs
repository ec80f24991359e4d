//! Classical analogues of private bound entanglement.
//!
//! Unambiguous tripartite distributions P_ABE, their square-root lift to pure
//! quantum states, partial-transpose invariance, secret-key rates with noisy
//! preprocessing, a multi-start optimizer over diagram-constrained P_AB,
//! exact simulation of public-discussion protocols, and the five published
//! fixtures.
//!
//! ```
//! use boundkey::fixtures::fixture;
//! use boundkey::keyrate::noisy_bound;
//!
//! let f = fixture("4x5").unwrap();
//! let rate = noisy_bound(&f.distribution(), &f.channel()).unwrap();
//! assert!(rate > 0.0347);
//! ```

pub mod diagram;
pub mod dist;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod keyrate;
pub mod linalg;
pub mod optimizer;
pub mod protocol;
pub mod quantum;
pub mod render;

pub use diagram::{from_diagram, Cell, Cross, Diagram};
pub use dist::{
    EveSymbol, JointDistribution3, MarginalDistribution, NoisyChannel, Party, UnambiguityReport,
};
pub use error::{Error, Result};
pub use fixtures::{fixture, reproduce, Fixture, ReproductionReport, FIXTURES};
pub use keyrate::{
    advantage, f_structured, key_rate_report, noisy_bound, Direction, KeyRateReport,
};
pub use optimizer::{enumerate_diagrams, infer_diagram, maximize_keyrate, OptConfig, OptResult};
pub use protocol::{
    check_sqrt_lift, public_message_step, run_pipeline, ProtocolStep, StochasticMap,
    TranscriptState,
};
pub use quantum::{
    coherent_information, lift_state, partial_transpose, pt_invariance_combinatorial, pt_report,
    reduce_to_ab, DensityMatrix, PtReport, PureState3,
};
pub use render::{render_diagram, RenderFormat};
