//! Proportion matrix, log transform, distances, Ward clustering and PCA.

mod pca;
mod ward;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::canon::{BookId, Testament};
use crate::corpus::Corpus;
use crate::detect::Quotation;
use crate::error::NumericsError;

pub use pca::{pca_project, symmetric_eigen, PcaProjection, JACOBI_TOLERANCE};
pub use ward::{ward_cluster, ward_linkage, Dendrogram, Merge, TIE_RTOL};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix, NumericsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumericsError::Ragged);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Which books are the points: NT rows (39-D) or OT columns (27-D).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    NtRows,
    OtCols,
}

impl Axis {
    pub fn testament(self) -> Testament {
        match self {
            Axis::NtRows => Testament::New,
            Axis::OtCols => Testament::Old,
        }
    }
}

/// Fraction of each NT book's words (rows, canon order) quoted from each OT
/// book (columns, canon order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionMatrix(pub Matrix);

impl ProportionMatrix {
    pub fn get(&self, nt: BookId, ot: BookId) -> f64 {
        self.0.get(nt.canon_index(), ot.canon_index())
    }

    pub fn min_nonzero(&self) -> Option<f64> {
        self.0
            .values()
            .filter(|&v| v > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Total length of the union of half-open spans. Sorts `spans` in place.
pub fn union_length(spans: &mut [Range<usize>]) -> usize {
    spans.sort_unstable_by_key(|r| (r.start, r.end));
    let mut total = 0;
    let mut cur: Option<Range<usize>> = None;
    for s in spans.iter() {
        match cur.as_mut() {
            Some(c) if s.start <= c.end => c.end = c.end.max(s.end),
            _ => {
                if let Some(c) = cur.take() {
                    total += c.end - c.start;
                }
                cur = Some(s.clone());
            }
        }
    }
    total + cur.map_or(0, |c| c.end - c.start)
}

/// Cell (r, c) is the number of distinct positions of NT book r covered by
/// quotations from OT book c, over the word count of book r. Books without
/// words have all-zero rows.
pub fn proportion_matrix(quotes: &[Quotation], ot: &Corpus, nt: &Corpus) -> ProportionMatrix {
    let rows = Testament::New.book_count();
    let cols = Testament::Old.book_count();
    let mut spans: Vec<Vec<Range<usize>>> = vec![Vec::new(); rows * cols];
    for q in quotes {
        spans[q.nt_book.canon_index() * cols + q.ot_book.canon_index()].push(q.nt_span());
    }
    let mut m = Matrix::zeros(rows, cols);
    debug_assert_eq!(ot.books().len(), cols);
    for (r, book) in nt.books().iter().enumerate() {
        let words = book.len();
        if words == 0 {
            continue;
        }
        for c in 0..cols {
            let covered = union_length(&mut spans[r * cols + c]);
            m.set(r, c, covered as f64 / words as f64);
        }
    }
    ProportionMatrix(m)
}

/// How the zero-avoiding offset is chosen before taking logarithms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogOffset {
    /// ln(p + ε), ε the smallest nonzero proportion.
    #[default]
    Value,
    /// ln(p + |ln ε|): the logarithm of the smallest nonzero proportion is
    /// what gets added.
    Literal,
}

impl LogOffset {
    pub fn as_str(self) -> &'static str {
        match self {
            LogOffset::Value => "value",
            LogOffset::Literal => "literal",
        }
    }
}

impl fmt::Display for LogOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogOffset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "value" => Ok(LogOffset::Value),
            "literal" => Ok(LogOffset::Literal),
            other => Err(format!("unknown log offset mode {other:?} (value|literal)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogMatrix {
    pub values: Matrix,
    pub mode: LogOffset,
    /// Smallest nonzero proportion of the source matrix.
    pub epsilon: f64,
    /// The amount actually added before the logarithm.
    pub offset: f64,
}

impl LogMatrix {
    /// Book vectors for the chosen view, in canon order.
    pub fn points(&self, axis: Axis) -> Vec<Vec<f64>> {
        match axis {
            Axis::NtRows => (0..self.values.rows())
                .map(|r| self.values.row(r).to_vec())
                .collect(),
            Axis::OtCols => (0..self.values.cols())
                .map(|c| self.values.column(c))
                .collect(),
        }
    }
}

pub fn log_transform(m: &ProportionMatrix, mode: LogOffset) -> Result<LogMatrix, NumericsError> {
    let epsilon = m.min_nonzero().ok_or(NumericsError::AllZero)?;
    let offset = match mode {
        LogOffset::Value => epsilon,
        LogOffset::Literal => epsilon.ln().abs(),
    };
    if !(offset > 0.0 && offset.is_finite()) {
        return Err(NumericsError::AllZero);
    }
    Ok(LogMatrix {
        values: m.0.map(|p| (p + offset).ln()),
        mode,
        epsilon,
        offset,
    })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Symmetric matrix of pairwise Euclidean distances.
pub fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = euclidean(&points[i], &points[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Distances between the book vectors of one view of a log matrix.
pub fn row_distance_matrix(m: &LogMatrix, axis: Axis) -> Vec<Vec<f64>> {
    distance_matrix(&m.points(axis))
}

/// Cluster label (1..=k) for every canon book of a testament.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub testament: Testament,
    pub k: usize,
    pub labels: Vec<usize>,
}

impl ClusterAssignment {
    pub fn new(testament: Testament, labels: Vec<usize>) -> Result<ClusterAssignment, NumericsError> {
        let k = labels.iter().copied().max().unwrap_or(0);
        let complete = labels.len() == testament.book_count()
            && (1..=k).all(|l| labels.contains(&l))
            && !labels.contains(&0);
        if !complete {
            return Err(NumericsError::ClusterCount {
                k,
                points: labels.len(),
            });
        }
        Ok(ClusterAssignment {
            testament,
            k,
            labels,
        })
    }

    pub fn label(&self, book: BookId) -> usize {
        self.labels[book.canon_index()]
    }

    /// "OT1", "NT2", ...
    pub fn label_name(&self, label: usize) -> String {
        format!("{}{}", self.testament.short(), label)
    }

    pub fn members(&self, label: usize) -> impl Iterator<Item = BookId> + '_ {
        self.testament
            .books()
            .filter(move |b| self.labels[b.canon_index()] == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Book, Token, TokenKey};

    fn nt_with(name: &str, words: usize) -> Corpus {
        let tokens = (0..words)
            .map(|i| Token {
                key: TokenKey::real(&format!("G{}", i + 1)).unwrap(),
                surface: "x".into(),
                chapter: 1,
                verse: 1,
            })
            .collect();
        Corpus::new(
            Testament::New,
            vec![Book {
                id: BookId::from_name(name).unwrap(),
                tokens,
            }],
        )
        .unwrap()
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

    #[test]
    fn union_lengths() {
        assert_eq!(union_length(&mut []), 0);
        assert_eq!(union_length(&mut [0..5, 3..8, 10..12]), 10);
        assert_eq!(union_length(&mut [10..12, 0..5, 5..6]), 8);
    }

    #[test]
    fn proportions() {
        let nt = nt_with("Jude", 100);
        let ot = Corpus::empty(Testament::Old);
        let m = proportion_matrix(&[q("Jude", 10, "Psalms", 3, 6)], &ot, &nt);
        let jude = BookId::from_name("Jude").unwrap();
        let ps = BookId::from_name("Psalms").unwrap();
        assert!((m.get(jude, ps) - 0.06).abs() < 1e-15);
        assert_eq!(m.0.values().filter(|&v| v > 0.0).count(), 1);

        // overlapping quotations from one OT book count positions once;
        // another OT book gets its own cell
        let m = proportion_matrix(
            &[
                q("Jude", 10, "Psalms", 3, 6),
                q("Jude", 12, "Psalms", 40, 6),
                q("Jude", 12, "Isaiah", 40, 5),
            ],
            &ot,
            &nt,
        );
        assert!((m.get(jude, ps) - 0.08).abs() < 1e-15);
        let isa = BookId::from_name("Isaiah").unwrap();
        assert!((m.get(jude, isa) - 0.05).abs() < 1e-15);

        let empty = proportion_matrix(&[], &ot, &nt);
        assert!(empty.0.values().all(|v| v == 0.0));
        assert_eq!((empty.0.rows(), empty.0.cols()), (27, 39));
    }

    fn matrix_with(cells: &[(usize, usize, f64)]) -> ProportionMatrix {
        let mut m = Matrix::zeros(27, 39);
        for &(r, c, v) in cells {
            m.set(r, c, v);
        }
        ProportionMatrix(m)
    }

    #[test]
    fn log_offsets() {
        let m = matrix_with(&[(0, 0, 0.01), (1, 1, 0.5)]);
        let l = log_transform(&m, LogOffset::Value).unwrap();
        assert!((l.values.get(2, 2) - (-4.605170185988091)).abs() < 1e-12);
        assert!((l.values.get(0, 0) - (0.02f64).ln()).abs() < 1e-15);
        assert_eq!(l.epsilon, 0.01);

        let lit = log_transform(&m, LogOffset::Literal).unwrap();
        assert!((lit.offset - 4.605170185988091).abs() < 1e-12);
        assert!((lit.values.get(2, 2) - lit.offset.ln()).abs() < 1e-15);

        assert!(matches!(
            log_transform(&matrix_with(&[]), LogOffset::Value),
            Err(NumericsError::AllZero)
        ));
        assert_eq!("literal".parse::<LogOffset>().unwrap(), LogOffset::Literal);
        assert!("other".parse::<LogOffset>().is_err());
    }

    #[test]
    fn constant_matrix_stays_constant() {
        let mut m = Matrix::zeros(27, 39);
        for r in 0..27 {
            for c in 0..39 {
                m.set(r, c, 0.2);
            }
        }
        let l = log_transform(&ProportionMatrix(m), LogOffset::Value).unwrap();
        let first = l.values.get(0, 0);
        assert!(l.values.values().all(|v| v == first));
    }

    #[test]
    fn distances() {
        let p = vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![0.0, 0.0]];
        let d = distance_matrix(&p);
        assert_eq!(d[0][1], 5.0);
        assert_eq!(d[0][2], 0.0);
        assert_eq!(d[1][0], d[0][1]);
    }

    #[test]
    fn views() {
        let m = matrix_with(&[(3, 7, 0.1)]);
        let l = log_transform(&m, LogOffset::Value).unwrap();
        let nt = l.points(Axis::NtRows);
        let ot = l.points(Axis::OtCols);
        assert_eq!((nt.len(), nt[0].len()), (27, 39));
        assert_eq!((ot.len(), ot[0].len()), (39, 27));
        assert_eq!(nt[3][7], ot[7][3]);
        assert_eq!(row_distance_matrix(&l, Axis::OtCols).len(), 39);
    }

    #[test]
    fn assignments() {
        let mut labels = vec![1; 27];
        labels[26] = 2;
        let a = ClusterAssignment::new(Testament::New, labels.clone()).unwrap();
        assert_eq!(a.k, 2);
        assert_eq!(a.label_name(2), "NT2");
        assert_eq!(a.members(2).collect::<Vec<_>>(), vec![BookId::from_name("Revelation").unwrap()]);
        labels[26] = 3;
        assert!(ClusterAssignment::new(Testament::New, labels).is_err());
        assert!(ClusterAssignment::new(Testament::New, vec![1; 26]).is_err());
    }
}
