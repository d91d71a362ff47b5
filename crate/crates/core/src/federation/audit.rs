use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Growth,
    Adjustment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToClient,
    ToServer,
}

/// A client grew a tree during one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub iteration: usize,
    pub client: usize,
    pub tree: usize,
    pub nodes_before: usize,
    pub nodes_after: usize,
}

/// A client reported leaf information for a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjustmentRecord {
    pub client: usize,
    pub tree: usize,
    pub leaves_reached: usize,
}

/// A serialized message that crossed the client/server boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireMessage {
    pub phase: Phase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<usize>,
    /// `None` for a broadcast to every client.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub client: Option<usize>,
    pub tree: usize,
    pub direction: Direction,
    pub payload: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLog {
    pub growth: Vec<GrowthRecord>,
    pub adjustment: Vec<AdjustmentRecord>,
    /// Only filled when wire capture is requested.
    pub wire: Vec<WireMessage>,
}

#[derive(Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Line<'a> {
    Grow(&'a GrowthRecord),
    Adjust(&'a AdjustmentRecord),
}

impl AuditLog {
    /// One JSON object per line: growth records then adjustment records.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let lines = self
            .growth
            .iter()
            .map(Line::Grow)
            .chain(self.adjustment.iter().map(Line::Adjust));
        for line in lines {
            out.push_str(&serde_json::to_string(&line).expect("audit records serialize"));
            out.push('\n');
        }
        out
    }

    /// Messages sent during the growth phase.
    pub fn growth_messages(&self) -> impl Iterator<Item = &WireMessage> {
        self.wire.iter().filter(|m| m.phase == Phase::Growth)
    }
}
