//! Bit-error-rate analysis of free-space optical links over log-normal
//! turbulence: SISO, repetition-coded MISO and decode-and-forward multi-hop
//! links with OOK, M-PAM, M-QAM and M²-QAM.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod modulation;
pub mod numerics;
pub mod scenario;
pub mod simulation;

pub use analysis::{ber_curve, snr_gain_at_target, BerCurve, HopBerModel, NodePlacement};
pub use channel::{ChannelStats, FadeVector, LinkGeometry, WaveModel, WeatherProfile};
pub use error::{Error, Result};
pub use modulation::{Constellation, Family, ModulationScheme, QMode};
pub use numerics::{CovarianceFactor, QuadratureRule};
pub use scenario::{LinkScenario, SigmaMode, SnrSweep, WeatherSpec};
pub use simulation::{BerEstimate, SimulationParams};
