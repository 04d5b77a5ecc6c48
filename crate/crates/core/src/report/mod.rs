//! Cluster statistics, inter-cluster flows and the emitted tables/figures.

pub mod stats;
pub mod svg;
pub mod tables;

pub use stats::{cluster_stats, flow_table, ClusterStats, FlowTable};
pub use svg::{histogram_svg, scatter_svg, ScatterPoint};
pub use tables::{
    format_value, read_clusters_csv, read_matrix_csv, write_cluster_stats_csv,
    write_clusters_csv, write_dendrogram_csv, write_flows_csv, write_histogram_csv,
    write_matrix_csv,
};
