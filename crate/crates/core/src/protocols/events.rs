//! Per-pair event records and their CSV export.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::models::{AvailabilityRecord, Medium};
use crate::optics::PatternKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slit {
    Slit1,
    Slit2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Splitter {
    BsA,
    BsB,
    BsC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitterOutcome {
    Reflect,
    Transmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitterDecision {
    pub splitter: Splitter,
    pub outcome: SplitterOutcome,
}

impl fmt::Display for SplitterDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.splitter {
            Splitter::BsA => "a",
            Splitter::BsB => "b",
            Splitter::BsC => "c",
        };
        let o = match self.outcome {
            SplitterOutcome::Reflect => "R",
            SplitterOutcome::Transmit => "T",
        };
        write!(f, "{s}:{o}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
    D3,
    D4,
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
            Detector::D3 => "D3",
            Detector::D4 => "D4",
        }
    }

    /// D3/D4 keep which-way; D1/D2 erase it.
    pub fn erases(&self) -> bool {
        matches!(self, Detector::D1 | Detector::D2)
    }
}

/// Full life record of one entangled pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonPairEvent {
    pub pair_id: u64,
    pub t_created: f64,
    pub slit: Slit,
    pub t_signal_impact: f64,
    pub signal_x: Option<f64>,
    pub idler_route: Vec<SplitterDecision>,
    pub detector: Option<Detector>,
    pub t_detector: f64,
    /// `Some(true)` erased (R = 0), `Some(false)` recorded (R = 1).
    pub erased: Option<bool>,
    pub availability: AvailabilityRecord,
    pub rendered: Option<PatternKind>,
    pub phase_rad: f64,
    pub switch_on: Option<bool>,
}

#[derive(Serialize)]
struct EventRow {
    pair_id: u64,
    t_created: f64,
    slit: Slit,
    t_signal_impact: f64,
    signal_x: Option<f64>,
    idler_route: String,
    detector: Option<&'static str>,
    t_detector: f64,
    erased: Option<bool>,
    detected: bool,
    recorded: bool,
    medium: &'static str,
    ttl_s: Option<f64>,
    erased_at: Option<f64>,
    observation_time: f64,
    rendered: Option<PatternKind>,
    phase_rad: f64,
    switch_on: Option<bool>,
}

/// Column header of the event log, in order.
pub const EVENT_LOG_HEADER: &str = "pair_id,t_created,slit,t_signal_impact,signal_x,idler_route,detector,t_detector,erased,detected,recorded,medium,ttl_s,erased_at,observation_time,rendered,phase_rad,switch_on";

impl From<&PhotonPairEvent> for EventRow {
    fn from(e: &PhotonPairEvent) -> Self {
        let route: Vec<String> = e.idler_route.iter().map(ToString::to_string).collect();
        let ttl_s = match e.availability.medium {
            Medium::Perishable { ttl_s } => ttl_s,
            _ => None,
        };
        EventRow {
            pair_id: e.pair_id,
            t_created: e.t_created,
            slit: e.slit,
            t_signal_impact: e.t_signal_impact,
            signal_x: e.signal_x,
            idler_route: route.join(";"),
            detector: e.detector.map(|d| d.name()),
            t_detector: e.t_detector,
            erased: e.erased,
            detected: e.availability.detected,
            recorded: e.availability.recorded,
            medium: e.availability.medium.label(),
            ttl_s,
            erased_at: e.availability.erased_at,
            observation_time: e.availability.observation_time,
            rendered: e.rendered,
            phase_rad: e.phase_rad,
            switch_on: e.switch_on,
        }
    }
}

/// Writes the event log as CSV, one row per pair, header first.
pub fn write_event_csv<W: Write>(events: &[PhotonPairEvent], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(EVENT_LOG_HEADER.split(','))?;
    for e in events {
        w.serialize(EventRow::from(e))?;
    }
    w.flush()
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// SHA-256 of the CSV event log, hex encoded.
pub fn event_digest(events: &[PhotonPairEvent]) -> String {
    let mut h = HashWriter(Sha256::new());
    write_event_csv(events, &mut h).expect("hashing never fails");
    hex::encode(h.0.finalize())
}
