use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::rubric::{aggregate_reviews, ScoreCard};
use super::stats::{box_stats, BoxStats};
use crate::finetune::ExperimentResult;
use crate::{Execution, Warning, WarningKind};

/// Placeholder for a (model, size) pair with no result.
pub const MISSING_CELL: &str = "—";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

fn render_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 cells")
}

/// Right-aligned columns separated by two spaces.
fn render_aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
        parts.join("  ") + "\n"
    };
    let mut out = line(header);
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

/// Best eval loss by QA size (rows, ascending) and model (columns, sorted
/// by name). When a (model, size) pair appears more than once the lowest
/// loss is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    pub models: Vec<String>,
    pub rows: Vec<(usize, Vec<Option<f64>>)>,
}

pub fn loss_report(results: &[ExperimentResult]) -> LossTable {
    let mut cells: BTreeMap<(usize, &str), f64> = BTreeMap::new();
    let mut models = BTreeSet::new();
    for r in results {
        models.insert(r.spec.model_name.as_str());
        cells
            .entry((r.spec.qa_size, r.spec.model_name.as_str()))
            .and_modify(|v| *v = v.min(r.best_loss))
            .or_insert(r.best_loss);
    }
    let sizes: BTreeSet<usize> = cells.keys().map(|(s, _)| *s).collect();
    let rows = sizes
        .into_iter()
        .map(|size| (size, models.iter().map(|m| cells.get(&(size, *m)).copied()).collect()))
        .collect();
    LossTable { models: models.into_iter().map(String::from).collect(), rows }
}

impl LossTable {
    fn header(&self) -> Vec<String> {
        std::iter::once("qa_size".to_string()).chain(self.models.iter().cloned()).collect()
    }

    fn body(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|(size, cells)| {
                std::iter::once(size.to_string())
                    .chain(cells.iter().map(|c| c.map_or_else(|| MISSING_CELL.to_string(), |v| format!("{v:.2}"))))
                    .collect()
            })
            .collect()
    }

    /// Rendered value for (size, model), if both exist in the table.
    pub fn cell(&self, size: usize, model: &str) -> Option<String> {
        let col = self.models.iter().position(|m| m == model)?;
        let row = self.rows.iter().position(|(s, _)| *s == size)?;
        self.body()[row].get(col + 1).cloned()
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => render_csv(&self.header(), &self.body()),
            ReportFormat::Text => render_aligned(&self.header(), &self.body()),
        }
    }
}

/// Aggregated totals per group. Cards are grouped by `qa_ref`, aggregated
/// across reviewers, and assigned to a group through `labels`
/// (qa_ref -> group). With no labels everything lands in group `"all"`;
/// otherwise unlabelled references are skipped with a warning.
pub fn group_totals(
    cards: &[ScoreCard],
    labels: &HashMap<String, String>,
) -> (BTreeMap<String, Vec<f64>>, Vec<Warning>) {
    let mut by_ref: BTreeMap<&str, Vec<ScoreCard>> = BTreeMap::new();
    for card in cards {
        by_ref.entry(card.qa_ref()).or_default().push(card.clone());
    }
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (qa_ref, reviews) in by_ref {
        let label = if labels.is_empty() {
            "all".to_string()
        } else if let Some(label) = labels.get(qa_ref) {
            label.clone()
        } else {
            warnings
                .push(Warning::new(WarningKind::UnresolvedPair, format!("qa_ref {qa_ref} not found in any QA file")));
            continue;
        };
        let agg = aggregate_reviews(&reviews).expect("non-empty, single qa_ref");
        groups.entry(label).or_default().push(agg.total);
    }
    (groups, warnings)
}

/// One box-statistics row per group.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<(String, BoxStats)>,
}

pub fn score_report(groups: &BTreeMap<String, Vec<f64>>, exec: Execution) -> ScoreTable {
    let entries: Vec<(&String, &Vec<f64>)> = groups.iter().collect();
    let stats = exec.map(&entries, |(_, totals)| box_stats(totals));
    let rows = entries.into_iter().zip(stats).filter_map(|((name, _), s)| s.ok().map(|s| (name.clone(), s))).collect();
    ScoreTable { rows }
}

impl ScoreTable {
    pub fn get(&self, group: &str) -> Option<&BoxStats> {
        self.rows.iter().find(|(g, _)| g == group).map(|(_, s)| s)
    }

    fn header() -> Vec<String> {
        ["model", "n", "min", "q1", "median", "q3", "max", "mean"].map(String::from).to_vec()
    }

    fn body(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|(name, s)| {
                let mut row = vec![name.clone(), s.n.to_string()];
                row.extend([s.min, s.q1, s.median, s.q3, s.max, s.mean].map(|v| format!("{v:.2}")));
                row
            })
            .collect()
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => render_csv(&Self::header(), &self.body()),
            ReportFormat::Text => render_aligned(&Self::header(), &self.body()),
        }
    }
}
