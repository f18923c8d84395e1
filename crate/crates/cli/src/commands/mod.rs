pub mod ablate;
pub mod embed;
pub mod eval;
pub mod ingest;
pub mod predict;
pub mod report;
pub mod train;
pub mod tune;
