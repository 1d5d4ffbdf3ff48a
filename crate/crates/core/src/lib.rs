//! Analysis of user-reported misinformation signals. Covers the content
//! taxonomy and its noise buckets, report ingestion, volume statistics, a
//! synthetic report generator and a boosted-tree router, all driven by
//! [`pipeline`] and the `reportsignal` binary.

pub mod cli;
pub mod gbdt;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod taxonomy;
