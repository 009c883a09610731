//! File formats, wall-clock budgets and parallel runners on top of
//! `bellslice-core`, plus the pieces of the `bellslice` command line.

pub mod analysis;
pub mod campaign;
pub mod clock;
pub mod formats;
pub mod report;

pub use analysis::{analyze_all, write_analysis, AliasTable, AnalysisOptions};
pub use campaign::{classify_parallel, run_campaign, RunOptions};
pub use clock::Deadline;
pub use formats::{FormatError, CampaignConfig};
