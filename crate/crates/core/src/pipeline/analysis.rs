//! The `detect` and `analyze` stage results.

use serde::{Deserialize, Serialize};

use crate::canon::Testament;
use crate::detect::{
    find_matches, merge_matches, merge_positional, NGramIndex, Quotation, RawMatch,
};
use crate::error::PipelineError;
use crate::numerics::{
    log_transform, pca_project, proportion_matrix, ward_cluster, Axis, ClusterAssignment,
    Dendrogram, LogMatrix, LogOffset, ProportionMatrix,
};

use super::container::CorpusFile;

/// Counts produced by the detect stage. The quotations themselves travel in
/// the quotation CSV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub n: usize,
    pub raw_matches: usize,
    pub quotations: usize,
    /// Quotation count under the alternate positional-overlap merge rule.
    pub positional_groups: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection {
    pub summary: DetectionSummary,
    pub quotations: Vec<Quotation>,
}

/// The raw windows covered by merged quotations. Every window inside a
/// diagonal-merged span matches, so this is exactly the raw match set.
pub fn expand_windows(quotes: &[Quotation], n: usize) -> Vec<RawMatch> {
    let mut raw: Vec<RawMatch> = quotes
        .iter()
        .flat_map(|q| {
            (0..q.window_count(n)).map(move |i| RawMatch {
                nt_book: q.nt_book,
                nt_start: q.nt_start + i,
                ot_book: q.ot_book,
                ot_start: q.ot_start + i,
                n,
            })
        })
        .collect();
    raw.sort_unstable();
    raw
}

pub fn detect(corpus: &CorpusFile, n: usize, workers: usize) -> Result<Detection, PipelineError> {
    let index = NGramIndex::build(&corpus.ot, n)?;
    let raw = find_matches(&index, &corpus.nt, workers);
    let quotations = merge_matches(&raw)?;
    Ok(Detection {
        summary: DetectionSummary {
            n,
            raw_matches: raw.len(),
            quotations: quotations.len(),
            positional_groups: merge_positional(&raw).len(),
        },
        quotations,
    })
}

/// Rebuilds the summary of quotations read back from a CSV.
pub fn summarize(quotations: &[Quotation], n: usize) -> Result<DetectionSummary, PipelineError> {
    if let Some(q) = quotations.iter().find(|q| q.length < n) {
        return Err(PipelineError::Parse(format!(
            "quotation of length {} is shorter than n = {n}",
            q.length
        )));
    }
    let raw = expand_windows(quotations, n);
    Ok(DetectionSummary {
        n,
        raw_matches: raw.len(),
        quotations: quotations.len(),
        positional_groups: merge_positional(&raw).len(),
    })
}

/// Clustering and PCA of one testament's books.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub assignment: ClusterAssignment,
    pub dendrogram: Dendrogram,
    /// Figure coordinates: each book's loadings on the first two components
    /// of the PCA fitted with the other testament's books as observations.
    pub figure: Vec<[f64; 2]>,
    /// Explained variance of that fit.
    pub figure_explained: f64,
    /// Explained variance of a 2-component PCA of this testament's own book
    /// vectors.
    pub own_explained: f64,
}

/// The same clustering under the other log-offset mode, for comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternateRun {
    pub log_offset: LogOffset,
    pub offset: f64,
    pub ot: ClusterAssignment,
    pub nt: ClusterAssignment,
    pub ot_figure_explained: f64,
    pub nt_figure_explained: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustered {
    pub log: LogMatrix,
    pub ot: View,
    pub nt: View,
    pub alternate: Option<AlternateRun>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Clustering {
    Done(Box<Clustered>),
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub k_ot: usize,
    pub k_nt: usize,
    pub log_offset: LogOffset,
    pub proportion: ProportionMatrix,
    pub clustering: Clustering,
}

impl Analysis {
    pub fn clustered(&self) -> Option<&Clustered> {
        match &self.clustering {
            Clustering::Done(c) => Some(c),
            Clustering::Skipped { .. } => None,
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("analysis serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Analysis, PipelineError> {
        serde_json::from_slice(bytes).map_err(|e| PipelineError::Parse(format!("analysis: {e}")))
    }
}

fn view(log: &LogMatrix, testament: Testament, k: usize) -> Result<View, PipelineError> {
    let (own, other) = match testament {
        Testament::Old => (Axis::OtCols, Axis::NtRows),
        Testament::New => (Axis::NtRows, Axis::OtCols),
    };
    let points = log.points(own);
    let (labels, dendrogram) = ward_cluster(&points, k)?;
    let fit = pca_project(&log.points(other), 2)?;
    let figure = fit.loadings().into_iter().map(|l| [l[0], l[1]]).collect();
    let own_explained = pca_project(&points, 2)?.explained_fraction();
    Ok(View {
        assignment: ClusterAssignment::new(testament, labels)?,
        dendrogram,
        figure,
        figure_explained: fit.explained_fraction(),
        own_explained,
    })
}

fn cluster_both(
    p: &ProportionMatrix,
    mode: LogOffset,
    k_ot: usize,
    k_nt: usize,
) -> Result<(LogMatrix, View, View), PipelineError> {
    let log = log_transform(p, mode)?;
    let ot = view(&log, Testament::Old, k_ot)?;
    let nt = view(&log, Testament::New, k_nt)?;
    Ok((log, ot, nt))
}

/// Log transform, Ward clustering and PCA of both views of a proportion
/// matrix, plus the same under the other log-offset mode. An all-zero
/// matrix has no log transform and clustering is recorded as skipped.
pub fn cluster_proportions(
    proportion: &ProportionMatrix,
    k_ot: usize,
    k_nt: usize,
    log_offset: LogOffset,
) -> Result<Clustering, PipelineError> {
    if proportion.min_nonzero().is_none() {
        return Ok(Clustering::Skipped {
            reason: "no quotations: the proportion matrix is all zero".into(),
        });
    }
    let (log, ot, nt) = cluster_both(proportion, log_offset, k_ot, k_nt)?;
    let other = match log_offset {
        LogOffset::Value => LogOffset::Literal,
        LogOffset::Literal => LogOffset::Value,
    };
    // The alternate mode is informational; a failure there is not fatal.
    let alternate = cluster_both(proportion, other, k_ot, k_nt)
        .ok()
        .map(|(alt_log, alt_ot, alt_nt)| AlternateRun {
            log_offset: other,
            offset: alt_log.offset,
            ot: alt_ot.assignment,
            nt: alt_nt.assignment,
            ot_figure_explained: alt_ot.figure_explained,
            nt_figure_explained: alt_nt.figure_explained,
        });
    Ok(Clustering::Done(Box::new(Clustered {
        log,
        ot,
        nt,
        alternate,
    })))
}

/// Proportion matrix of the quotations, then [`cluster_proportions`].
pub fn analyze(
    corpus: &CorpusFile,
    quotations: &[Quotation],
    k_ot: usize,
    k_nt: usize,
    log_offset: LogOffset,
) -> Result<Analysis, PipelineError> {
    let proportion = proportion_matrix(quotations, &corpus.ot, &corpus.nt);
    let clustering = cluster_proportions(&proportion, k_ot, k_nt, log_offset)?;
    Ok(Analysis {
        k_ot,
        k_nt,
        log_offset,
        proportion,
        clustering,
    })
}
