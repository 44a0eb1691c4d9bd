//! Human-expert scoring rubric, multi-reviewer aggregation, box statistics
//! and benchmark tables.

mod rubric;
mod stats;
mod tables;

pub use rubric::{
    aggregate_reviews, append_score, load_scores, AggregateError, AggregatedScore, ScoreCard, ScoreError,
};
pub use stats::{box_stats, BoxStats, EmptyInput};
pub use tables::{group_totals, loss_report, score_report, LossTable, ReportFormat, ScoreTable, MISSING_CELL};
