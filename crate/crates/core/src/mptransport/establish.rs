//! Subflow establishment.
//!
//! Each subflow opens with a one-RTT handshake: the initiator sends `Syn`,
//! the responder answers `SynAck`, the initiator is established on the
//! `SynAck` and confirms with `HandshakeAck`, which establishes the
//! responder.
//!
//! With standard advertisement only the primary subflow is opened by the
//! client at start. Once it is established the client announces its other
//! access addresses over the primary path, and the anchor side then opens a
//! join handshake on each of them. With fast advertisement the core already
//! knows every access address, so the client opens all subflows at once.

use crate::netpath::{Direction, Signal};
use crate::sim::SimTime;

use super::AdvertiseMode;

/// Endpoint of a connection. The client is the multi-homed customer side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Client,
    Server,
}

impl Side {
    pub fn peer(self) -> Side {
        match self {
            Side::Client => Side::Server,
            Side::Server => Side::Client,
        }
    }

    /// Direction of packets this side sends.
    pub fn tx_dir(self) -> Direction {
        match self {
            Side::Client => Direction::Uplink,
            Side::Server => Direction::Downlink,
        }
    }
}

/// A handshake or control packet to send.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignalOut {
    pub from: Side,
    pub subflow_id: u16,
    pub signal: Signal,
}

/// A side became able to send on a subflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Established {
    pub side: Side,
    pub subflow_id: u16,
    pub rtt_sample: Option<SimTime>,
}

#[derive(Debug, Default, PartialEq)]
pub struct HandshakeStep {
    pub send: Vec<SignalOut>,
    pub established: Vec<Established>,
}

#[derive(Clone, Debug)]
struct SubflowHandshake {
    initiator: Option<Side>,
    syn_sent_at: Option<SimTime>,
    synack_sent_at: Option<SimTime>,
    initiator_up: bool,
    responder_up: bool,
}

impl SubflowHandshake {
    fn new() -> Self {
        SubflowHandshake {
            initiator: None,
            syn_sent_at: None,
            synack_sent_at: None,
            initiator_up: false,
            responder_up: false,
        }
    }

    fn up(&self, side: Side) -> bool {
        match self.initiator {
            Some(i) if i == side => self.initiator_up,
            Some(_) => self.responder_up,
            None => false,
        }
    }
}

/// Handshake state of every subflow of one connection.
#[derive(Clone, Debug)]
pub struct PathManager {
    mode: AdvertiseMode,
    primary: u16,
    subflows: Vec<SubflowHandshake>,
    advertised: bool,
}

impl PathManager {
    pub fn new(mode: AdvertiseMode, n_subflows: usize, primary: u16) -> Self {
        assert!((primary as usize) < n_subflows);
        PathManager {
            mode,
            primary,
            subflows: vec![SubflowHandshake::new(); n_subflows],
            advertised: false,
        }
    }

    pub fn primary(&self) -> u16 {
        self.primary
    }

    pub fn is_established(&self, side: Side, id: u16) -> bool {
        self.subflows[id as usize].up(side)
    }

    pub fn fully_established(&self) -> bool {
        self.subflows.iter().all(|s| s.initiator_up && s.responder_up)
    }

    fn open(&mut self, id: u16, from: Side, now: SimTime, step: &mut HandshakeStep) {
        let hs = &mut self.subflows[id as usize];
        hs.initiator = Some(from);
        hs.syn_sent_at = Some(now);
        step.send.push(SignalOut {
            from,
            subflow_id: id,
            signal: Signal::Syn,
        });
    }

    /// Opening moves at connection start.
    pub fn start(&mut self, now: SimTime) -> HandshakeStep {
        let mut step = HandshakeStep::default();
        match self.mode {
            AdvertiseMode::Standard => self.open(self.primary, Side::Client, now, &mut step),
            AdvertiseMode::Fast => {
                for id in 0..self.subflows.len() as u16 {
                    self.open(id, Side::Client, now, &mut step);
                }
            }
        }
        step
    }

    /// `at` received `signal` on subflow `id`.
    pub fn on_signal(&mut self, now: SimTime, at: Side, id: u16, signal: Signal) -> HandshakeStep {
        let mut step = HandshakeStep::default();
        let idx = id as usize;
        match signal {
            Signal::Syn => {
                let hs = &mut self.subflows[idx];
                if hs.initiator.is_none() {
                    hs.initiator = Some(at.peer());
                }
                if hs.initiator == Some(at.peer()) {
                    hs.synack_sent_at = Some(now);
                    step.send.push(SignalOut {
                        from: at,
                        subflow_id: id,
                        signal: Signal::SynAck,
                    });
                }
            }
            Signal::SynAck => {
                let hs = &mut self.subflows[idx];
                if hs.initiator == Some(at) {
                    if !hs.initiator_up {
                        hs.initiator_up = true;
                        step.established.push(Established {
                            side: at,
                            subflow_id: id,
                            rtt_sample: hs.syn_sent_at.map(|t| now.saturating_sub(t)),
                        });
                        if self.mode == AdvertiseMode::Standard
                            && id == self.primary
                            && at == Side::Client
                            && self.subflows.len() > 1
                        {
                            self.advertised = true;
                            step.send.push(SignalOut {
                                from: Side::Client,
                                subflow_id: id,
                                signal: Signal::AddAddress,
                            });
                        }
                    }
                    step.send.push(SignalOut {
                        from: at,
                        subflow_id: id,
                        signal: Signal::HandshakeAck,
                    });
                }
            }
            Signal::HandshakeAck => self.responder_up(now, at, id, &mut step),
            Signal::AddAddress => {
                if at == Side::Server {
                    for other in 0..self.subflows.len() as u16 {
                        if other != self.primary && self.subflows[other as usize].initiator.is_none() {
                            self.open(other, Side::Server, now, &mut step);
                        }
                    }
                }
            }
        }
        step
    }

    fn responder_up(&mut self, now: SimTime, at: Side, id: u16, step: &mut HandshakeStep) {
        let hs = &mut self.subflows[id as usize];
        if hs.initiator == Some(at.peer()) && !hs.responder_up {
            hs.responder_up = true;
            step.established.push(Established {
                side: at,
                subflow_id: id,
                rtt_sample: hs.synack_sent_at.map(|t| now.saturating_sub(t)),
            });
        }
    }

    /// A payload segment arrived at `at` on subflow `id`; this implies the
    /// peer is established even if its final handshake ack was lost.
    pub fn on_payload(&mut self, now: SimTime, at: Side, id: u16) -> HandshakeStep {
        let mut step = HandshakeStep::default();
        self.responder_up(now, at, id, &mut step);
        step
    }

    /// Retries whatever step each unfinished subflow is waiting on.
    pub fn on_timeout(&mut self, now: SimTime, usable: impl Fn(u16) -> bool) -> HandshakeStep {
        let mut step = HandshakeStep::default();
        for id in 0..self.subflows.len() as u16 {
            if !usable(id) {
                continue;
            }
            let hs = &self.subflows[id as usize];
            match hs.initiator {
                None => {
                    // A join that waits for the address announcement.
                    let primary_up = self.subflows[self.primary as usize].initiator_up;
                    if self.mode == AdvertiseMode::Standard && primary_up && usable(self.primary) {
                        step.send.push(SignalOut {
                            from: Side::Client,
                            subflow_id: self.primary,
                            signal: Signal::AddAddress,
                        });
                    }
                }
                Some(init) if !hs.initiator_up => self.open(id, init, now, &mut step),
                Some(init) if !hs.responder_up => step.send.push(SignalOut {
                    from: init,
                    subflow_id: id,
                    signal: Signal::HandshakeAck,
                }),
                Some(_) => {}
            }
        }
        step.send.dedup();
        step
    }

    /// Restarts the handshake of subflow `id` after its access came back.
    pub fn reset_subflow(&mut self, id: u16) {
        self.subflows[id as usize] = SubflowHandshake::new();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(v: u64) -> SimTime {
        SimTime::from_millis(v)
    }

    #[test]
    fn single_path_one_rtt_handshake() {
        let mut pm = PathManager::new(AdvertiseMode::Standard, 1, 0);
        let s = pm.start(ms(0));
        assert_eq!(
            s.send,
            [SignalOut {
                from: Side::Client,
                subflow_id: 0,
                signal: Signal::Syn
            }]
        );
        let s = pm.on_signal(ms(6), Side::Server, 0, Signal::Syn);
        assert_eq!(s.send[0].signal, Signal::SynAck);
        let s = pm.on_signal(ms(13), Side::Client, 0, Signal::SynAck);
        assert_eq!(
            s.established,
            [Established {
                side: Side::Client,
                subflow_id: 0,
                rtt_sample: Some(ms(13))
            }]
        );
        assert_eq!(s.send.len(), 1, "no address announcement with one path");
        let s = pm.on_signal(ms(19), Side::Server, 0, Signal::HandshakeAck);
        assert_eq!(s.established[0].side, Side::Server);
        assert!(pm.fully_established());
    }

    #[test]
    fn standard_mode_announces_then_server_joins() {
        let mut pm = PathManager::new(AdvertiseMode::Standard, 2, 0);
        let s = pm.start(ms(0));
        assert_eq!(s.send.len(), 1);
        pm.on_signal(ms(6), Side::Server, 0, Signal::Syn);
        let s = pm.on_signal(ms(13), Side::Client, 0, Signal::SynAck);
        assert!(s.send.iter().any(|o| o.signal == Signal::AddAddress));
        let s = pm.on_signal(ms(19), Side::Server, 0, Signal::AddAddress);
        assert_eq!(
            s.send,
            [SignalOut {
                from: Side::Server,
                subflow_id: 1,
                signal: Signal::Syn
            }]
        );
        pm.on_signal(ms(46), Side::Client, 1, Signal::Syn);
        let s = pm.on_signal(ms(72), Side::Server, 1, Signal::SynAck);
        assert_eq!(s.established[0].side, Side::Server);
        assert!(pm.is_established(Side::Server, 1));
        assert!(!pm.is_established(Side::Client, 1));
    }

    #[test]
    fn fast_mode_opens_all_paths_at_once() {
        let mut pm = PathManager::new(AdvertiseMode::Fast, 2, 0);
        let s = pm.start(ms(0));
        assert_eq!(s.send.len(), 2);
        assert!(s.send.iter().all(|o| o.signal == Signal::Syn && o.from == Side::Client));
        pm.on_signal(ms(26), Side::Server, 1, Signal::Syn);
        let s = pm.on_signal(ms(53), Side::Client, 1, Signal::SynAck);
        assert_eq!(s.established[0].rtt_sample, Some(ms(53)));
        assert!(s.send.iter().all(|o| o.signal != Signal::AddAddress));
    }

    #[test]
    fn timeout_retries_syn() {
        let mut pm = PathManager::new(AdvertiseMode::Standard, 1, 0);
        pm.start(ms(0));
        let s = pm.on_timeout(ms(1000), |_| true);
        assert_eq!(s.send[0].signal, Signal::Syn);
        let s = pm.on_signal(ms(1013), Side::Client, 0, Signal::SynAck);
        assert_eq!(s.established[0].rtt_sample, Some(ms(13)));
    }
}
