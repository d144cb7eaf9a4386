pub mod ingest;
pub mod linkage;
pub mod metrics;
pub mod names;
pub mod output;
pub mod pipeline;
pub mod quality;
pub mod synthworld;
