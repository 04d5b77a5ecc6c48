//! Browser bindings for a handful of intertext operations. Each export takes
//! plain strings/numbers and returns a JSON string, so the page needs no
//! generated TypeScript types.

use intertext::canon::{BookId, Testament};
use intertext::corpus::{Book, Corpus, Token, TokenKey};
use intertext::detect::{find_matches, length_histogram, merge_matches, NGramIndex};
use intertext::ingest::{normalize_strongs, normalize_surface, CustomKeyTable};
use intertext::numerics::{pca_project, ward_cluster, LogOffset};
use intertext::pipeline::{cluster_proportions, pca_svg, Clustering};
use intertext::reference::{agreement, published_matrix, reference_assignment, Disagreement};
use intertext::report::{histogram_svg, scatter_svg, ScatterPoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Found {
    source_start: usize,
    target_start: usize,
    length: usize,
    text: String,
}

#[derive(Serialize)]
struct Detected {
    source_words: usize,
    target_words: usize,
    raw_matches: usize,
    quotations: Vec<Found>,
    histogram_svg: String,
}

/// Words of a free text. `word|G3056` attaches a Strong's number; bare
/// words are compared by normalized spelling.
fn tokens(text: &str, table: &mut CustomKeyTable) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|raw| {
            let (word, strongs) = match raw.split_once('|') {
                Some((w, s)) => (w, normalize_strongs(s)),
                None => (raw, None),
            };
            let surface = normalize_surface(word)?;
            let key: TokenKey = strongs.unwrap_or_else(|| table.key_for(&surface));
            Some(Token {
                key,
                surface,
                chapter: 1,
                verse: 1,
            })
        })
        .collect()
}

fn single_book(testament: Testament, tokens: Vec<Token>) -> Result<Corpus, String> {
    let id = BookId::new(testament, 0).expect("every testament has a first book");
    Corpus::new(testament, vec![Book { id, tokens }]).map_err(|e| e.to_string())
}

/// Shared n-word runs between two texts, as JSON.
pub fn detect_quotes_json(source: &str, target: &str, n: usize) -> Result<String, String> {
    if n < 2 {
        return Err(format!("n must be at least 2, got {n}"));
    }
    let mut table = CustomKeyTable::new();
    let src = single_book(Testament::Old, tokens(source, &mut table))?;
    let tgt = single_book(Testament::New, tokens(target, &mut table))?;
    let index = NGramIndex::build(&src, n).map_err(|e| e.to_string())?;
    let raw = find_matches(&index, &tgt, 1);
    let quotes = merge_matches(&raw).map_err(|e| e.to_string())?;
    let words = &tgt.books()[0].tokens;
    let found = quotes
        .iter()
        .map(|q| Found {
            source_start: q.ot_start,
            target_start: q.nt_start,
            length: q.length,
            text: words[q.nt_span()]
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect();
    let out = Detected {
        source_words: src.total_words(),
        target_words: tgt.total_words(),
        raw_matches: raw.len(),
        quotations: found,
        histogram_svg: histogram_svg(&length_histogram(&quotes), "Shared run lengths"),
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[derive(Serialize)]
struct Clustered {
    labels: Vec<usize>,
    explained: f64,
    svg: String,
}

/// Parses `label,x1,x2,...` rows; a first row that is not numeric is a header.
fn parse_points(csv: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut labels = Vec::new();
    let mut points = Vec::new();
    for (i, line) in csv.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let label = fields.next().unwrap_or_default().to_string();
        let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        match values {
            Ok(v) if !v.is_empty() => {
                labels.push(label);
                points.push(v);
            }
            _ if i == 0 && points.is_empty() => continue,
            _ => return Err(format!("line {}: expected label followed by numbers", i + 1)),
        }
    }
    Ok((labels, points))
}

/// Ward clusters of arbitrary labelled points, drawn on their first two
/// principal components.
pub fn cluster_points_json(csv: &str, k: usize) -> Result<String, String> {
    let (names, points) = parse_points(csv)?;
    let (labels, _) = ward_cluster(&points, k).map_err(|e| e.to_string())?;
    let dims = points[0].len().min(2);
    let pca = pca_project(&points, dims).map_err(|e| e.to_string())?;
    let scatter: Vec<ScatterPoint> = names
        .into_iter()
        .zip(&pca.coords)
        .zip(&labels)
        .map(|((label, c), &cluster)| ScatterPoint {
            label,
            x: c[0],
            y: c.get(1).copied().unwrap_or(0.0),
            cluster,
        })
        .collect();
    let legend: Vec<String> = (1..=k).map(|l| format!("cluster {l}")).collect();
    let out = Clustered {
        explained: pca.explained_fraction(),
        svg: scatter_svg(&scatter, &legend, "Ward clusters on the first two components"),
        labels,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[derive(Serialize)]
struct PublishedView {
    ot_svg: String,
    nt_svg: String,
    ot_agreement: Option<(usize, usize)>,
    nt_agreement: Option<(usize, usize)>,
    disagreements: Vec<Disagreement>,
}

/// Clusters the published proportion table and compares the result with
/// the published memberships (comparable only for k = 3 and k = 2).
pub fn published_view_json(k_ot: usize, k_nt: usize, mode: &str) -> Result<String, String> {
    let mode: LogOffset = mode.parse()?;
    let clustering = cluster_proportions(&published_matrix(), k_ot, k_nt, mode)
        .map_err(|e| e.to_string())?;
    let Clustering::Done(c) = clustering else {
        return Err("the table has no nonzero cells".into());
    };
    let mut disagreements = Vec::new();
    let mut compare = |ours: &intertext::numerics::ClusterAssignment, t: Testament| {
        let reference = reference_assignment(t);
        (ours.k == reference.k).then(|| {
            let a = agreement(ours, &reference);
            disagreements.extend(a.disagreements);
            (a.agreeing, a.total)
        })
    };
    let ot_agreement = compare(&c.ot.assignment, Testament::Old);
    let nt_agreement = compare(&c.nt.assignment, Testament::New);
    let out = PublishedView {
        ot_svg: pca_svg(&c.ot, "Old Testament books"),
        nt_svg: pca_svg(&c.nt, "New Testament books"),
        ot_agreement,
        nt_agreement,
        disagreements,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[wasm_bindgen]
pub fn detect_quotes(source: &str, target: &str, n: usize) -> Result<String, JsError> {
    detect_quotes_json(source, target, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cluster_points(csv: &str, k: usize) -> Result<String, JsError> {
    cluster_points_json(csv, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn published_view(k_ot: usize, k_nt: usize, mode: &str) -> Result<String, JsError> {
    published_view_json(k_ot, k_nt, mode).map_err(|e| JsError::new(&e))
}
