use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::netpath::{AccessId, PacketKind};
use crate::sim::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    SlowStart,
    CongestionAvoidance,
    Recovery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    Normal,
    Backup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    TripleDupack,
    Rto,
}

/// A contiguous run of connection-level bytes awaiting (re)transmission.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ByteRange {
    pub conn_seq: u64,
    pub len: u32,
    pub kind: PacketKind,
}

impl ByteRange {
    pub fn end(&self) -> u64 {
        self.conn_seq + self.len as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Segment {
    pub range: ByteRange,
    pub sent_at: SimTime,
}

/// Per-path congestion and loss-recovery state of one subflow (sender side).
#[derive(Clone, Debug)]
pub struct SubflowState {
    pub id: u16,
    pub access_id: AccessId,
    pub cwnd: f64,
    pub ssthresh: f64,
    pub mss: u32,
    pub srtt: Option<SimTime>,
    pub rttvar: SimTime,
    pub rto: SimTime,
    /// Payload bytes sent and neither acked nor declared lost.
    pub inflight: u64,
    pub phase: Phase,
    pub priority: Priority,
    /// Handshake complete on the sending side.
    pub established: bool,
    /// The underlying access is up.
    pub available: bool,

    pub(crate) next_sf_seq: u64,
    pub(crate) outstanding: BTreeMap<u64, Segment>,
    /// Three highest subflow sequence numbers ever acknowledged, descending.
    pub(crate) top_acked: [Option<u64>; 3],
    pub(crate) recovery_point: u64,
    pub(crate) retx: VecDeque<ByteRange>,
    pub(crate) rto_deadline: Option<SimTime>,
    pub(crate) rto_min: SimTime,
    pub(crate) rto_max: SimTime,
    pub(crate) initial_cwnd: f64,
    pub(crate) initial_rto: SimTime,
}

impl SubflowState {
    pub fn new(id: u16, access_id: AccessId, mss: u32, cfg: &super::TransportConfig) -> Self {
        let initial_cwnd = (cfg.initial_cwnd_segments * mss) as f64;
        SubflowState {
            id,
            access_id,
            cwnd: initial_cwnd,
            ssthresh: f64::INFINITY,
            mss,
            srtt: None,
            rttvar: SimTime::ZERO,
            rto: cfg.rto_initial,
            inflight: 0,
            phase: Phase::SlowStart,
            priority: Priority::Normal,
            established: false,
            available: true,
            next_sf_seq: 0,
            outstanding: BTreeMap::new(),
            top_acked: [None; 3],
            recovery_point: 0,
            retx: VecDeque::new(),
            rto_deadline: None,
            rto_min: cfg.rto_min,
            rto_max: cfg.rto_max,
            initial_cwnd,
            initial_rto: cfg.rto_initial,
        }
    }

    pub fn mss_f(&self) -> f64 {
        self.mss as f64
    }

    pub fn usable(&self) -> bool {
        self.established && self.available
    }

    pub fn has_window(&self) -> bool {
        (self.inflight + self.mss as u64) as f64 <= self.cwnd
    }

    pub fn outstanding_segments(&self) -> usize {
        self.outstanding.len()
    }

    pub fn rto_deadline(&self) -> Option<SimTime> {
        self.rto_deadline
    }

    /// Standard smoothed RTT estimator (gains 1/8 and 1/4), RTO floored.
    pub fn on_rtt_sample(&mut self, sample: SimTime) {
        let sample = sample.max(SimTime::from_micros(1));
        match self.srtt {
            None => {
                self.srtt = Some(sample);
                self.rttvar = SimTime::from_micros(sample.as_micros() / 2);
            }
            Some(srtt) => {
                let (s, r) = (srtt.as_micros(), sample.as_micros());
                let err = s.abs_diff(r);
                self.rttvar = SimTime::from_micros((3 * self.rttvar.as_micros() + err) / 4);
                self.srtt = Some(SimTime::from_micros((7 * s + r) / 8));
            }
        }
        let srtt = self.srtt.expect("set above");
        self.rto = (srtt + self.rttvar.saturating_mul(4))
            .max(self.rto_min)
            .min(self.rto_max);
    }

    /// Window growth for `acked` newly acknowledged bytes.
    ///
    /// In congestion avoidance the increase is the coupled one,
    /// `min(alpha * acked * mss / cwnd_total, acked * mss / cwnd)`.
    pub fn grow(&mut self, acked: u64, alpha: f64, cwnd_total: f64) {
        match self.phase {
            Phase::Recovery => {}
            Phase::SlowStart => {
                self.cwnd += acked as f64;
                if self.cwnd >= self.ssthresh {
                    self.phase = Phase::CongestionAvoidance;
                }
            }
            Phase::CongestionAvoidance => {
                let coupled = alpha * acked as f64 * self.mss_f() / cwnd_total;
                let uncoupled = acked as f64 * self.mss_f() / self.cwnd;
                self.cwnd += coupled.min(uncoupled);
            }
        }
    }

    /// Multiplicative decrease. A duplicate-ack loss inside an ongoing
    /// recovery episode is not a new congestion event.
    pub fn apply_loss(&mut self, kind: LossKind) {
        let floor = 2.0 * self.mss_f();
        match kind {
            LossKind::TripleDupack => {
                if self.phase == Phase::Recovery {
                    return;
                }
                self.ssthresh = (self.cwnd / 2.0).max(floor);
                self.cwnd = self.ssthresh;
                self.phase = Phase::Recovery;
                self.recovery_point = self.next_sf_seq;
            }
            LossKind::Rto => {
                self.ssthresh = (self.cwnd / 2.0).max(floor);
                self.cwnd = floor;
                self.phase = Phase::SlowStart;
                self.recovery_point = self.next_sf_seq;
                self.rto = self.rto.saturating_mul(2).min(self.rto_max);
            }
        }
    }

    /// Returns to the initial congestion state, e.g. after the access came
    /// back up.
    pub fn reset_congestion_state(&mut self) {
        self.cwnd = self.initial_cwnd;
        self.ssthresh = f64::INFINITY;
        self.phase = Phase::SlowStart;
        self.srtt = None;
        self.rttvar = SimTime::ZERO;
        self.rto = self.initial_rto;
    }

    pub(crate) fn note_acked_seq(&mut self, seq: u64) {
        let mut v = seq;
        for slot in self.top_acked.iter_mut() {
            match *slot {
                Some(cur) if cur == v => return,
                Some(cur) if cur > v => {}
                _ => {
                    let prev = slot.replace(v);
                    match prev {
                        Some(p) => v = p,
                        None => return,
                    }
                }
            }
        }
    }

    /// Sequence number below which outstanding segments count as lost: at
    /// least three later segments on this subflow were acknowledged.
    pub(crate) fn loss_threshold(&self, dupthresh: usize) -> Option<u64> {
        self.top_acked.get(dupthresh.checked_sub(1)?).copied().flatten()
    }
}

/// Linked-increases coupling factor.
///
/// `alpha = cwnd_total * max_i(cwnd_i / rtt_i^2) / (sum_i cwnd_i / rtt_i)^2`,
/// taken over normal-priority subflows that are not in loss recovery (or,
/// failing that, all subflows with an RTT estimate). Returns 1.0 until any
/// subflow has an RTT sample.
pub fn lia_alpha(subflows: &[SubflowState]) -> f64 {
    let set = coupled_set(subflows);
    if set.is_empty() {
        return 1.0;
    }
    alpha_over(&set)
}

/// `(cwnd, rtt)` of the subflows LIA couples over.
pub(crate) fn coupled_set(subflows: &[SubflowState]) -> Vec<(f64, f64)> {
    let with_rtt = |s: &&SubflowState| s.srtt.is_some() && s.cwnd > 0.0;
    let pick = |s: &SubflowState| (s.cwnd, s.srtt.expect("filtered").as_micros() as f64);
    let preferred: Vec<(f64, f64)> = subflows
        .iter()
        .filter(with_rtt)
        .filter(|s| s.priority == Priority::Normal && s.phase != Phase::Recovery && s.usable())
        .map(pick)
        .collect();
    if !preferred.is_empty() {
        return preferred;
    }
    subflows.iter().filter(with_rtt).map(pick).collect()
}

pub(crate) fn alpha_over(set: &[(f64, f64)]) -> f64 {
    // Normalizing every rtt by the rtt of the subflow that maximizes
    // cwnd/rtt^2 keeps symmetric cases exact in floating point.
    let total: f64 = set.iter().map(|s| s.0).sum();
    let (c_max, r_max) = set
        .iter()
        .copied()
        .fold(None::<(f64, f64)>, |best, (c, r)| match best {
            Some((bc, br)) if bc / (br * br) >= c / (r * r) => Some((bc, br)),
            _ => Some((c, r)),
        })
        .expect("non-empty");
    let denom: f64 = set.iter().map(|&(c, r)| c * (r_max / r)).sum();
    total * c_max / (denom * denom)
}
