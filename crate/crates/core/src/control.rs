//! Control-plane message log shared by every clustering protocol.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{Hop, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    /// Score announcement to neighbors before head election.
    ChInf,
    /// Cluster head advertisement.
    ChAdv,
    /// Super cluster head advertisement.
    SchAdv,
    /// Join request sent by a regular member to its head.
    JoinReqMember,
    /// Join request sent by a head to its above-layer head.
    JoinReqHead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Delivery {
    /// Heard by every alive node within `radius` of the sender.
    Broadcast { radius: f64 },
    Unicast { to: Hop },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlMessage {
    pub from: NodeId,
    pub kind: MessageKind,
    pub delivery: Delivery,
}

/// Message counts per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ControlTraffic {
    pub ch_inf: u64,
    pub ch_adv: u64,
    pub sch_adv: u64,
    pub join_req_member: u64,
    pub join_req_head: u64,
}

impl ControlTraffic {
    pub fn from_log(log: &[ControlMessage]) -> Self {
        let mut t = Self::default();
        for m in log {
            t.record(m.kind);
        }
        t
    }

    pub fn record(&mut self, kind: MessageKind) {
        match kind {
            MessageKind::ChInf => self.ch_inf += 1,
            MessageKind::ChAdv => self.ch_adv += 1,
            MessageKind::SchAdv => self.sch_adv += 1,
            MessageKind::JoinReqMember => self.join_req_member += 1,
            MessageKind::JoinReqHead => self.join_req_head += 1,
        }
    }

    pub fn join_req(&self) -> u64 {
        self.join_req_member + self.join_req_head
    }

    /// Messages of the cluster head phase: score exchange, advertisements and
    /// member joins.
    pub fn ch_phase(&self) -> u64 {
        self.ch_inf + self.ch_adv + self.join_req_member
    }

    /// Messages of the super cluster head phase: advertisements and head joins.
    pub fn sch_phase(&self) -> u64 {
        self.sch_adv + self.join_req_head
    }

    pub fn total(&self) -> u64 {
        self.ch_phase() + self.sch_phase()
    }
}

impl core::ops::AddAssign for ControlTraffic {
    fn add_assign(&mut self, rhs: Self) {
        self.ch_inf += rhs.ch_inf;
        self.ch_adv += rhs.ch_adv;
        self.sch_adv += rhs.sch_adv;
        self.join_req_member += rhs.join_req_member;
        self.join_req_head += rhs.join_req_head;
    }
}

pub(crate) fn broadcast(from: NodeId, kind: MessageKind, radius: f64) -> ControlMessage {
    ControlMessage {
        from,
        kind,
        delivery: Delivery::Broadcast { radius },
    }
}

pub(crate) fn unicast(from: NodeId, kind: MessageKind, to: Hop) -> ControlMessage {
    ControlMessage {
        from,
        kind,
        delivery: Delivery::Unicast { to },
    }
}

pub(crate) type ControlLog = Vec<ControlMessage>;
