//! Lossless directive-response channels: typed payloads, run-global message
//! ids, persistent send/receive sets, FIFO in-flight queues, and the replay
//! checkers for causality and losslessness.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use trace_core::{
    check_persistent, eval_precedes, MessageInfo, Trace, TraceError, TracePredicate, Verdict,
};

use crate::geometry::{Path, Pose};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel {channel} carries {expected}, rejected a {got} payload")]
    TypeMismatch {
        channel: ChannelName,
        expected: &'static str,
        got: &'static str,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Components at channel endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    CustomerInterface,
    Supervisor,
    Planner,
    Tracker,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Endpoint::CustomerInterface => "CustomerInterface",
            Endpoint::Supervisor => "Supervisor",
            Endpoint::Planner => "Planner",
            Endpoint::Tracker => "Tracker",
        };
        write!(f, "{s}")
    }
}

/// Directed channel name, e.g. `Supervisor->Planner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelName {
    pub from: Endpoint,
    pub to: Endpoint,
}

impl std::fmt::Display for ChannelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Customer identity; phantom obstacles also get ids.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CustomerId(pub u32);

impl std::fmt::Display for CustomerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Customer requests (directives of the CustomerInterface).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RequestKind {
    Park,
    Retrieve,
}

/// Replies carried back to the CustomerInterface. `Failed` is the one
/// response type of the customer channel; the rest are supervisor responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplyKind {
    Rejected,
    Accepted,
    Returned,
    Failed,
}

/// Task status shared by planner and tracker responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Blocked,
    Failed,
    Completed,
}

/// Typed message payloads; each channel carries exactly one variant kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Request(RequestKind),
    Reply(ReplyKind),
    /// Supervisor directive: pair of configurations in R^3 x R^3.
    PosePair { start: Pose, goal: Pose },
    /// Planner directive: a path for the tracker.
    Path(Path),
    /// Tracker directive: control pair applied by the environment.
    Controls { v: f64, phi: f64 },
    /// Planner/tracker response.
    Task(TaskStatus),
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Request(_) => PayloadKind::Request,
            Payload::Reply(_) => PayloadKind::Reply,
            Payload::PosePair { .. } => PayloadKind::PosePair,
            Payload::Path(_) => PayloadKind::Path,
            Payload::Controls { .. } => PayloadKind::Controls,
            Payload::Task(_) => PayloadKind::Task,
        }
    }

    /// Short label recorded in trace events.
    pub fn label(&self) -> String {
        match self {
            Payload::Request(r) => format!("{r:?}"),
            Payload::Reply(r) => format!("{r:?}"),
            Payload::PosePair { .. } => "PosePair".into(),
            Payload::Path(_) => "Path".into(),
            Payload::Controls { .. } => "Controls".into(),
            Payload::Task(t) => format!("{t:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    Request,
    Reply,
    PosePair,
    Path,
    Controls,
    Task,
}

impl PayloadKind {
    fn name(&self) -> &'static str {
        match self {
            PayloadKind::Request => "Request",
            PayloadKind::Reply => "Reply",
            PayloadKind::PosePair => "PosePair",
            PayloadKind::Path => "Path",
            PayloadKind::Controls => "Controls",
            PayloadKind::Task => "Task",
        }
    }
}

/// A message: globally unique id, typed payload, customer tag, send tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: u64,
    pub payload: Payload,
    pub customer: CustomerId,
    pub sent_at: u64,
}

/// Run-global message id counter; ids are strictly increasing in send order.
#[derive(Debug, Default)]
pub struct IdGen {
    next: u64,
}

impl IdGen {
    pub fn new() -> Self {
        IdGen { next: 1 }
    }

    fn take(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

/// A lossless FIFO channel with persistent send/receive logs.
#[derive(Debug)]
pub struct Channel {
    name: ChannelName,
    payload_kind: PayloadKind,
    /// Minimum ticks between send and broadcast.
    latency: u64,
    send_log: Vec<Message>,
    receive_log: Vec<Message>,
    in_flight: VecDeque<Message>,
    broadcast: Option<Message>,
}

impl Channel {
    pub fn new(name: ChannelName, payload_kind: PayloadKind, latency: u64) -> Self {
        assert!(latency >= 1, "delivery latency is at least one tick");
        Channel {
            name,
            payload_kind,
            latency,
            send_log: Vec::new(),
            receive_log: Vec::new(),
            in_flight: VecDeque::new(),
            broadcast: None,
        }
    }

    pub fn name(&self) -> ChannelName {
        self.name
    }

    pub fn latency(&self) -> u64 {
        self.latency
    }

    pub fn send_log(&self) -> &[Message] {
        &self.send_log
    }

    pub fn receive_log(&self) -> &[Message] {
        &self.receive_log
    }

    pub fn in_flight_len(&self) -> usize {
        self.in_flight.len()
    }

    /// Message currently on the wire (at most one per tick).
    pub fn broadcast(&self) -> Option<&Message> {
        self.broadcast.as_ref()
    }

    /// Append a fresh message to the send set and the in-flight queue.
    pub fn send(
        &mut self,
        ids: &mut IdGen,
        payload: Payload,
        customer: CustomerId,
        tick: u64,
    ) -> Result<Message, ChannelError> {
        if payload.kind() != self.payload_kind {
            return Err(ChannelError::TypeMismatch {
                channel: self.name,
                expected: self.payload_kind.name(),
                got: payload.kind().name(),
            });
        }
        let msg = Message {
            id: ids.take(),
            payload,
            customer,
            sent_at: tick,
        };
        self.send_log.push(msg.clone());
        self.in_flight.push_back(msg.clone());
        Ok(msg)
    }

    /// Deliver at most one message this tick: pop the FIFO head once its
    /// latency has elapsed, set it as the broadcast, and add it to the
    /// receive set.
    pub fn deliver(&mut self, tick: u64) -> Option<Message> {
        self.broadcast = None;
        let ready = self
            .in_flight
            .front()
            .is_some_and(|m| tick >= m.sent_at + self.latency);
        if !ready {
            return None;
        }
        let msg = self.in_flight.pop_front().unwrap();
        self.broadcast = Some(msg.clone());
        self.receive_log.push(msg.clone());
        Some(msg)
    }
}

/// Signal names a channel writes into the trace.
pub fn send_set_signal(name: ChannelName) -> String {
    format!("chan.{name}.send_set")
}

pub fn receive_set_signal(name: ChannelName) -> String {
    format!("chan.{name}.receive_set")
}

pub fn broadcast_signal(name: ChannelName) -> String {
    format!("chan.{name}.broadcast")
}

/// Every message id that appears in the trace for a channel, with its
/// metadata, in id order.
fn channel_messages<'t>(tr: &'t Trace, channel: &str) -> Vec<&'t MessageInfo> {
    let mut v: Vec<&MessageInfo> = tr
        .messages()
        .iter()
        .filter(|m| m.channel == channel)
        .collect();
    v.sort_by_key(|m| m.id);
    v
}

/// Causality: a message shows in the receive set no earlier than its
/// broadcast, which shows no earlier than its membership in the send set.
/// Built on `eval_precedes` per message.
pub fn check_causality(tr: &Trace, channel: &str) -> Result<Verdict, ChannelError> {
    let send = send_set_signal_str(channel);
    let recv = receive_set_signal_str(channel);
    let bcast = broadcast_signal_str(channel);
    // Surface missing-signal errors eagerly.
    for sig in [&send, &recv, &bcast] {
        tr.signal_index(sig)?;
    }

    let mut ids = tr.set_universe(&send)?;
    ids.extend(tr.set_universe(&recv)?);
    for id in ids {
        let sent = membership_pred(&send, id);
        let received = membership_pred(&recv, id);
        let being_broadcast = broadcast_pred(&bcast, id);
        match eval_precedes(tr, &sent, &being_broadcast)? {
            Verdict::Holds => {}
            v => return Ok(v),
        }
        match eval_precedes(tr, &being_broadcast, &received)? {
            Verdict::Holds => {}
            v => return Ok(v),
        }
    }
    Ok(Verdict::Holds)
}

/// Losslessness: send/receive sets are persistent and every sent message is
/// eventually broadcast and received. Messages whose FIFO delivery schedule
/// extends past the horizon are reported `Pending`, not violated.
pub fn check_lossless(tr: &Trace, channel: &str, latency: u64) -> Result<Verdict, ChannelError> {
    let send = send_set_signal_str(channel);
    let recv = receive_set_signal_str(channel);
    for sig in [&send, &recv] {
        tr.signal_index(sig)?;
    }

    match check_persistent(tr, &send)? {
        Verdict::Holds => {}
        v => return Ok(v),
    }
    match check_persistent(tr, &recv)? {
        Verdict::Holds => {}
        v => return Ok(v),
    }

    // FIFO drains one message per tick after each message's latency; compute
    // each undelivered message's earliest feasible delivery tick.
    let msgs = channel_messages(tr, channel);
    let horizon = tr.horizon();
    let mut expected: u64 = 0;
    let mut verdict = Verdict::Holds;
    for m in msgs {
        let sent_tick = tr
            .first_membership(&send, m.id)?
            .unwrap_or(m.sent_tick) as u64;
        expected = expected.max(sent_tick + latency);
        match tr.first_membership(&recv, m.id)? {
            Some(_) => {}
            None => {
                if (expected as usize) >= horizon {
                    if verdict == Verdict::Holds {
                        verdict = Verdict::Pending(sent_tick as usize);
                    }
                } else {
                    return Ok(Verdict::ViolatedAt(expected as usize));
                }
            }
        }
        expected += 1;
    }
    Ok(verdict)
}

/// Receive order must equal send order (FIFO).
pub fn check_fifo(tr: &Trace, channel: &str) -> Result<bool, ChannelError> {
    let recv = receive_set_signal_str(channel);
    tr.signal_index(&recv)?;
    let mut received: Vec<(usize, u64)> = Vec::new();
    for id in tr.set_universe(&recv)? {
        if let Some(t) = tr.first_membership(&recv, id)? {
            received.push((t, id));
        }
    }
    received.sort();
    // Ids are assigned in global send order, so per-channel FIFO means the
    // receive sequence is id-sorted.
    Ok(received.windows(2).all(|w| w[0].1 < w[1].1))
}

fn send_set_signal_str(channel: &str) -> String {
    format!("chan.{channel}.send_set")
}

fn receive_set_signal_str(channel: &str) -> String {
    format!("chan.{channel}.receive_set")
}

fn broadcast_signal_str(channel: &str) -> String {
    format!("chan.{channel}.broadcast")
}

fn membership_pred(signal: &str, id: u64) -> TracePredicate {
    let sig = signal.to_string();
    TracePredicate::new(format!("{id} in {signal}"), move |tr, t| {
        tr.set_contains(&sig, id, t)
    })
}

fn broadcast_pred(signal: &str, id: u64) -> TracePredicate {
    let sig = signal.to_string();
    TracePredicate::new(format!("{signal} == {id}"), move |tr, t| {
        Ok(tr.num_or_null_at(&sig, t)? == Some(id as f64))
    })
}
