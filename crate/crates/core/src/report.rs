//! Per-recording report rows and the consistency check behind
//! `cardioseis report --check`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CardioError, Result};
use crate::grouping::{pick_winner, CriterionComparison, GroupId, Winner};

/// Tolerance when recomputing a stored RD from its mean columns.
pub const RD_CHECK_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub group: GroupId,
    pub n: usize,
    pub same_mean: f64,
    pub same_sd: f64,
    pub alt_mean: f64,
    pub alt_sd: f64,
    pub rd: f64,
    /// False when `n == 1` and the SDs are placeholders.
    #[serde(default = "default_true")]
    pub sd_defined: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub flow_group: GroupId,
    pub volume_group: GroupId,
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub recording_id: String,
    pub n_events: usize,
    #[serde(default)]
    pub outliers_dropped: usize,
    /// Always in the order inspiration, expiration, llv, hlv.
    pub groups: Vec<GroupRow>,
    pub pairs: Vec<PairRow>,
    pub overall: Winner,
}

impl ReportRow {
    pub fn from_comparison(
        recording_id: impl Into<String>,
        n_events: usize,
        outliers_dropped: usize,
        cmp: &CriterionComparison,
    ) -> Self {
        let groups = GroupId::ALL
            .iter()
            .map(|&g| {
                let s = cmp.group(g);
                GroupRow {
                    group: g,
                    n: s.n,
                    same_mean: s.same.mean,
                    same_sd: s.same.sd,
                    alt_mean: s.alt.mean,
                    alt_sd: s.alt.sd,
                    rd: s.rd,
                    sd_defined: s.same.sd_defined(),
                }
            })
            .collect();
        let pairs = cmp
            .pairs
            .iter()
            .map(|p| PairRow {
                flow_group: p.flow_group,
                volume_group: p.volume_group,
                winner: p.winner,
            })
            .collect();
        Self {
            recording_id: recording_id.into(),
            n_events,
            outliers_dropped,
            groups,
            pairs,
            overall: cmp.overall,
        }
    }

    fn group(&self, id: GroupId) -> Option<&GroupRow> {
        self.groups.iter().find(|g| g.group == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    /// Rows sorted by recording id.
    pub fn new(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.recording_id.cmp(&b.recording_id));
        Self { rows }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| CardioError::Invariant(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CardioError::Parse {
            location: "report json".into(),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CardioError::io(path, e))?;
        Self::from_json(&text)
    }

    /// One line per group.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "recording_id,group,n,same_mean,same_sd,alt_mean,alt_sd,rd,pair_winner,overall_winner\n",
        );
        for row in &self.rows {
            for g in &row.groups {
                let pair = row
                    .pairs
                    .iter()
                    .find(|p| p.flow_group == g.group || p.volume_group == g.group)
                    .map(|p| winner_name(p.winner))
                    .unwrap_or("");
                let _ = writeln!(
                    s,
                    "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.2},{},{}",
                    row.recording_id,
                    g.group,
                    g.n,
                    g.same_mean,
                    g.same_sd,
                    g.alt_mean,
                    g.alt_sd,
                    g.rd,
                    pair,
                    winner_name(row.overall)
                );
            }
        }
        s
    }
}

pub fn winner_name(w: Winner) -> &'static str {
    match w {
        Winner::FlowRate => "flow_rate",
        Winner::LungVolume => "lung_volume",
        Winner::Tie => "tie",
    }
}

/// Recomputes every derived column from the row's own means and returns a
/// description of each inconsistency. An empty list means the report is
/// self-consistent.
pub fn check_report(report: &Report) -> Vec<String> {
    let mut problems = Vec::new();
    for pair in report.rows.windows(2) {
        if pair[0].recording_id > pair[1].recording_id {
            problems.push(format!(
                "rows out of order: '{}' before '{}'",
                pair[0].recording_id, pair[1].recording_id
            ));
        }
    }
    for row in &report.rows {
        let id = &row.recording_id;
        let order: Vec<GroupId> = row.groups.iter().map(|g| g.group).collect();
        if order != GroupId::ALL {
            problems.push(format!("{id}: groups not in fixed order: {order:?}"));
        }
        for g in &row.groups {
            if g.same_mean <= 0.0 {
                problems.push(format!("{id}/{}: non-positive same-group mean", g.group));
                continue;
            }
            if g.same_mean < 0.0 || g.alt_mean < 0.0 || g.same_sd < 0.0 || g.alt_sd < 0.0 {
                problems.push(format!("{id}/{}: negative dissimilarity", g.group));
            }
            let rd = 100.0 * (g.alt_mean - g.same_mean) / g.same_mean;
            if (rd - g.rd).abs() > RD_CHECK_TOLERANCE {
                problems.push(format!(
                    "{id}/{}: stored rd {} but means give {rd:.4}",
                    g.group, g.rd
                ));
            }
        }
        for p in &row.pairs {
            match (row.group(p.flow_group), row.group(p.volume_group)) {
                (Some(f), Some(v)) => {
                    let expected = pick_winner(f.rd, v.rd);
                    if expected != p.winner {
                        problems.push(format!(
                            "{id}: {}/{} winner {:?}, rds give {:?}",
                            p.flow_group, p.volume_group, p.winner, expected
                        ));
                    }
                }
                _ => problems.push(format!(
                    "{id}: pair {}/{} refers to a missing group",
                    p.flow_group, p.volume_group
                )),
            }
        }
        let mean_rd = |a: GroupId, b: GroupId| -> Option<f64> {
            Some(0.5 * (row.group(a)?.rd + row.group(b)?.rd))
        };
        if let (Some(fr), Some(lv)) = (
            mean_rd(GroupId::Inspiration, GroupId::Expiration),
            mean_rd(GroupId::Llv, GroupId::Hlv),
        ) {
            let expected = pick_winner(fr, lv);
            if expected != row.overall {
                problems.push(format!(
                    "{id}: overall winner {:?}, mean rds give {expected:?}",
                    row.overall
                ));
            }
        }
    }
    problems
}
