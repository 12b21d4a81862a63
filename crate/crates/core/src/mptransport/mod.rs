//! Multipath reliable transport.
//!
//! Reno-style AIMD per subflow with linked-increases coupling across
//! subflows, connection-level sequencing and reassembly, a minimum-RTT
//! packet scheduler, and the subflow establishment/priority controls that
//! ATSSS drives.

mod connection;
mod establish;
mod subflow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::SimTime;

pub use connection::{AckInfo, AckOutcome, CcEvent, CcRecord, ConnectionState, Reassembly, Transmit};
pub use establish::{Established, HandshakeStep, PathManager, Side, SignalOut};
pub use subflow::{lia_alpha, ByteRange, LossKind, Phase, Priority, SubflowState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvertiseMode {
    #[default]
    Standard,
    Fast,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    #[default]
    MinRtt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportConfig {
    /// Payload bytes per full segment.
    pub mss: u32,
    pub initial_cwnd_segments: u32,
    pub rto_min: SimTime,
    pub rto_initial: SimTime,
    pub rto_max: SimTime,
    /// Later segments acknowledged before an earlier one counts as lost.
    pub dupthresh: usize,
    /// Cap on connection-level bytes sent but not yet acknowledged end to
    /// end. `None` leaves the sender unconstrained.
    pub send_buffer_bytes: Option<u64>,
    pub advertise_mode: AdvertiseMode,
    pub scheduler: SchedulerKind,
    /// Retry interval for unanswered handshake and control signals.
    pub handshake_timeout: SimTime,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            mss: 1440,
            initial_cwnd_segments: 10,
            rto_min: SimTime::from_millis(200),
            rto_initial: SimTime::from_secs(1),
            rto_max: SimTime::from_secs(60),
            dupthresh: 3,
            send_buffer_bytes: None,
            advertise_mode: AdvertiseMode::Standard,
            scheduler: SchedulerKind::MinRtt,
            handshake_timeout: SimTime::from_secs(1),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("unknown subflow id {0}")]
    UnknownSubflow(u16),
    #[error("fast address advertisement requires the converged-core topology")]
    FastAdvertiseNeedsConvergedCore,
}
