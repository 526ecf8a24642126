//! Report rendering: deterministic JSON and CSV views of command results.
//!
//! The rational strings are authoritative; decimal renderings are
//! presentational. Field order is fixed by the struct declarations, so
//! identical inputs produce byte-identical output.

use serde::Serialize;

use tic_core::audit::RatioValue;
use tic_core::{Coord, Lottery, Placement};

/// A rational value with its decimal rendering.
#[derive(Debug, Clone, Serialize)]
pub struct NumberValue {
    pub rational: String,
    pub decimal: String,
}

impl NumberValue {
    pub fn of(value: Coord) -> Self {
        NumberValue {
            rational: value.to_string(),
            decimal: value.decimal_string(),
        }
    }
}

/// A ratio, which may be the explicit unbounded state.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRepr {
    pub rational: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
}

impl RatioRepr {
    pub fn of(value: &RatioValue) -> Self {
        RatioRepr {
            rational: value.to_string_exact(),
            decimal: value.finite().map(|v| v.decimal_string()),
        }
    }
}

/// A mechanism output: one placement or a lottery over placements.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OutputValue {
    Placement { s: NumberValue },
    Lottery { entries: Vec<LotteryEntryValue> },
}

#[derive(Debug, Clone, Serialize)]
pub struct LotteryEntryValue {
    pub s: NumberValue,
    pub probability: NumberValue,
}

impl OutputValue {
    pub fn placement(p: Placement) -> Self {
        OutputValue::Placement {
            s: NumberValue::of(p.s),
        }
    }

    pub fn lottery(lot: &Lottery) -> Self {
        OutputValue::Lottery {
            entries: lot
                .entries()
                .iter()
                .map(|e| LotteryEntryValue {
                    s: NumberValue::of(e.placement.s),
                    probability: NumberValue::of(e.probability),
                })
                .collect(),
        }
    }
}

/// Result status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    /// Computation finished; no witness where none was expected.
    Ok,
    /// A ratio or deviation witness was produced.
    Witness,
    /// A truthfulness violation was produced.
    Violation,
    /// A claim failed or a game exhausted its iteration cap.
    Fail,
}

/// One command result.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Echo of the command line that produced this report.
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_digest: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub social_cost: Option<NumberValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_cost: Option<NumberValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_placement: Option<NumberValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioRepr>,
    /// Command-specific payload: witnesses, transcripts, claim rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: String, status: Status) -> Self {
        Report {
            command,
            mechanism: None,
            instance_digest: None,
            status,
            output: None,
            social_cost: None,
            optimal_cost: None,
            optimal_placement: None,
            ratio: None,
            detail: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Flat one-line view for spreadsheet ingestion.
    pub fn to_csv_row(&self) -> String {
        let fields = [
            self.command.clone(),
            self.mechanism.clone().unwrap_or_default(),
            self.instance_digest.clone().unwrap_or_default(),
            format!("{:?}", self.status).to_uppercase(),
            self.social_cost
                .as_ref()
                .map(|v| v.rational.clone())
                .unwrap_or_default(),
            self.social_cost
                .as_ref()
                .map(|v| v.decimal.clone())
                .unwrap_or_default(),
            self.optimal_cost
                .as_ref()
                .map(|v| v.rational.clone())
                .unwrap_or_default(),
            self.optimal_cost
                .as_ref()
                .map(|v| v.decimal.clone())
                .unwrap_or_default(),
            self.ratio
                .as_ref()
                .map(|v| v.rational.clone())
                .unwrap_or_default(),
            self.ratio
                .as_ref()
                .and_then(|v| v.decimal.clone())
                .unwrap_or_default(),
            self.output
                .as_ref()
                .map(|o| serde_json::to_string(o).expect("outputs serialize"))
                .unwrap_or_default(),
            self.detail
                .as_ref()
                .map(|d| serde_json::to_string(d).expect("details serialize"))
                .unwrap_or_default(),
        ];
        fields
            .iter()
            .map(|f| csv_escape(f))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub const CSV_HEADER: &str = "command,mechanism,instance_digest,status,social_cost,\
social_cost_decimal,optimal_cost,optimal_cost_decimal,ratio,ratio_decimal,output,detail";

pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
