use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::canon::{BookId, Testament};
use crate::corpus::Corpus;
use crate::detect::Quotation;
use crate::numerics::{union_length, ClusterAssignment};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub cluster: String,
    pub books: usize,
    pub word_count: usize,
    /// Distinct word positions of the cluster's books covered by a quotation.
    pub reference_words: usize,
    pub mean_reference_length: f64,
    pub references: usize,
    pub density: f64,
}

fn side_stats(
    quotes: &[Quotation],
    corpus: &Corpus,
    assign: &ClusterAssignment,
    book_of: impl Fn(&Quotation) -> BookId,
    span_of: impl Fn(&Quotation) -> Range<usize>,
) -> Vec<ClusterStats> {
    let mut spans: Vec<Vec<Range<usize>>> = vec![Vec::new(); corpus.books().len()];
    for q in quotes {
        spans[book_of(q).canon_index()].push(span_of(q));
    }
    let covered: Vec<usize> = spans.iter_mut().map(|s| union_length(s)).collect();

    (1..=assign.k)
        .map(|label| {
            let members: Vec<BookId> = assign.members(label).collect();
            let word_count: usize = members
                .iter()
                .map(|b| corpus.books()[b.canon_index()].len())
                .sum();
            let reference_words: usize = members.iter().map(|b| covered[b.canon_index()]).sum();
            let lengths: Vec<usize> = quotes
                .iter()
                .filter(|q| assign.label(book_of(q)) == label)
                .map(|q| q.length)
                .collect();
            let mean_reference_length = if lengths.is_empty() {
                0.0
            } else {
                lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
            };
            ClusterStats {
                cluster: assign.label_name(label),
                books: members.len(),
                word_count,
                reference_words,
                mean_reference_length,
                references: lengths.len(),
                density: if word_count == 0 {
                    0.0
                } else {
                    reference_words as f64 / word_count as f64
                },
            }
        })
        .collect()
}

/// Statistics for every OT cluster, then every NT cluster.
pub fn cluster_stats(
    quotes: &[Quotation],
    ot: &Corpus,
    nt: &Corpus,
    ot_assign: &ClusterAssignment,
    nt_assign: &ClusterAssignment,
) -> Vec<ClusterStats> {
    debug_assert_eq!(ot_assign.testament, Testament::Old);
    debug_assert_eq!(nt_assign.testament, Testament::New);
    let mut out = side_stats(quotes, ot, ot_assign, |q| q.ot_book, Quotation::ot_span);
    out.extend(side_stats(quotes, nt, nt_assign, |q| q.nt_book, Quotation::nt_span));
    out
}

/// Quotation counts between NT clusters (rows) and OT clusters (columns).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTable {
    pub nt_k: usize,
    pub ot_k: usize,
    pub counts: Vec<Vec<usize>>,
}

impl FlowTable {
    /// Count for 1-based cluster labels.
    pub fn get(&self, nt_label: usize, ot_label: usize) -> usize {
        self.counts[nt_label - 1][ot_label - 1]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn nt_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn ot_totals(&self) -> Vec<usize> {
        (0..self.ot_k)
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    /// Grand total equals the quotation count and the margins equal the
    /// per-cluster reference counts in `stats`.
    pub fn is_conserved(&self, quotations: usize, stats: &[ClusterStats]) -> bool {
        let (ot_stats, nt_stats) = stats.split_at(self.ot_k.min(stats.len()));
        self.total() == quotations
            && self.ot_totals() == ot_stats.iter().map(|s| s.references).collect::<Vec<_>>()
            && self.nt_totals() == nt_stats.iter().map(|s| s.references).collect::<Vec<_>>()
    }
}

pub fn flow_table(
    quotes: &[Quotation],
    ot_assign: &ClusterAssignment,
    nt_assign: &ClusterAssignment,
) -> FlowTable {
    let mut counts = vec![vec![0; ot_assign.k]; nt_assign.k];
    for q in quotes {
        counts[nt_assign.label(q.nt_book) - 1][ot_assign.label(q.ot_book) - 1] += 1;
    }
    FlowTable {
        nt_k: nt_assign.k,
        ot_k: ot_assign.k,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Book, Token, TokenKey};

    fn corpus(t: Testament, sizes: &[(&str, usize)]) -> Corpus {
        let books = sizes
            .iter()
            .map(|&(name, n)| Book {
                id: BookId::from_name(name).unwrap(),
                tokens: (0..n)
                    .map(|_| Token {
                        key: TokenKey::real("G1").unwrap(),
                        surface: "x".into(),
                        chapter: 1,
                        verse: 1,
                    })
                    .collect(),
            })
            .collect();
        Corpus::new(t, books).unwrap()
    }

    fn q(nt: &str, nt_start: usize, ot: &str, ot_start: usize, length: usize) -> Quotation {
        Quotation {
            nt_book: BookId::from_name(nt).unwrap(),
            nt_start,
            ot_book: BookId::from_name(ot).unwrap(),
            ot_start,
            length,
        }
    }

    fn assign(t: Testament, second: &[&str]) -> ClusterAssignment {
        let labels = t
            .books()
            .map(|b| if second.contains(&b.name()) { 2 } else { 1 })
            .collect();
        ClusterAssignment::new(t, labels).unwrap()
    }

    #[test]
    fn stats_and_flows() {
        let ot = corpus(Testament::Old, &[("Genesis", 100), ("Psalms", 200), ("Job", 50)]);
        let nt = corpus(Testament::New, &[("Mark", 60), ("Revelation", 40)]);
        let oa = assign(Testament::Old, &["Psalms"]);
        let na = assign(Testament::New, &["Revelation"]);
        let quotes = vec![
            q("Mark", 0, "Genesis", 10, 5),
            q("Mark", 2, "Psalms", 30, 6),
            q("Revelation", 10, "Psalms", 32, 5),
        ];
        let s = cluster_stats(&quotes, &ot, &nt, &oa, &na);
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].cluster, "OT1");
        assert_eq!(s[0].books, 38);
        assert_eq!(s[0].word_count, 150);
        assert_eq!(s[0].reference_words, 5);
        assert_eq!(s[0].references, 1);
        assert_eq!(s[1].word_count, 200);
        // Psalms spans 30..36 and 32..37 overlap: 7 distinct words
        assert_eq!(s[1].reference_words, 7);
        assert_eq!(s[1].references, 2);
        assert!((s[1].mean_reference_length - 5.5).abs() < 1e-12);
        assert!((s[1].density - 0.035).abs() < 1e-12);
        // Mark spans 0..5 and 2..8: 8 distinct words
        assert_eq!(s[2].reference_words, 8);
        assert_eq!(s[3].cluster, "NT2");
        assert_eq!(s[3].references, 1);

        let f = flow_table(&quotes, &oa, &na);
        assert_eq!(f.get(1, 1), 1);
        assert_eq!(f.get(1, 2), 1);
        assert_eq!(f.get(2, 2), 1);
        assert_eq!(f.get(2, 1), 0);
        assert!(f.is_conserved(3, &s));
        assert!(!f.is_conserved(4, &s));
    }

    #[test]
    fn empty_quotes() {
        let ot = corpus(Testament::Old, &[("Genesis", 100)]);
        let nt = corpus(Testament::New, &[("Mark", 60)]);
        let oa = assign(Testament::Old, &["Psalms"]);
        let na = assign(Testament::New, &["Revelation"]);
        let s = cluster_stats(&[], &ot, &nt, &oa, &na);
        assert!(s.iter().all(|c| c.density == 0.0 && c.references == 0));
        let f = flow_table(&[], &oa, &na);
        assert_eq!(f.total(), 0);
        assert!(f.is_conserved(0, &s));
    }

    #[test]
    fn single_quotation_flow() {
        let oa = assign(Testament::Old, &["Psalms"]);
        let na = assign(Testament::New, &["Revelation"]);
        let f = flow_table(&[q("Revelation", 0, "Genesis", 0, 5)], &oa, &na);
        assert_eq!(f.counts, vec![vec![0, 0], vec![1, 0]]);
    }
}
