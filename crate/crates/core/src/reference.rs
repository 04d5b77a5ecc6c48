//! Published reference values for the Septuagint / Tischendorf corpora:
//! cluster memberships, per-cluster statistics, headline counts and the
//! full NT × OT quotation-proportion table. Used to score reproduction runs.

use serde::Serialize;

use crate::canon::{BookId, Testament};
use crate::numerics::{ClusterAssignment, Matrix, ProportionMatrix};

pub const RAW_MATCHES: usize = 6_388;
pub const QUOTATIONS: usize = 4_807;
pub const REVELATION_DENSITY: f64 = 0.122;
pub const REVELATION_PSALMS: f64 = 0.023;
pub const FLOW_NT2_OT1: usize = 2_726;
pub const EXPLAINED_OT: f64 = 0.67;
pub const EXPLAINED_NT: f64 = 0.58;

/// Cluster of each OT book in canon order (1 = OT1, ...).
pub const OT_CLUSTERS: [usize; 39] = [
    3, 1, 1, 1, 1, // Genesis..Deuteronomy
    1, 1, 2, 1, 1, // Joshua..2 Samuel
    1, 1, 1, 1, 2, // 1 Kings..Ezra
    1, 2, 2, 3, 2, // Nehemiah..Proverbs
    2, 2, 3, 1, 2, // Ecclesiastes..Lamentations
    1, 1, 2, 2, 2, // Ezekiel..Amos
    2, 2, 2, 2, 2, // Obadiah..Habakkuk
    2, 2, 1, 2, // Zephaniah..Malachi
];

/// Cluster of each NT book in canon order (1 = NT1, 2 = NT2).
pub const NT_CLUSTERS: [usize; 27] = [
    2, 2, 2, 2, 2, // Gospels, Acts
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, // Romans..Philemon
    2, // Hebrews
    1, 1, 1, 1, 1, 1, 1, // James..Jude
    2, // Revelation
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterTarget {
    pub name: &'static str,
    pub books: usize,
    pub word_count: usize,
    pub reference_words: usize,
    pub mean_reference_length: f64,
    pub references: usize,
    pub density: f64,
}

pub const CLUSTER_STATS: [ClusterTarget; 5] = [
    ClusterTarget {
        name: "OT1",
        books: 17,
        word_count: 317_173,
        reference_words: 9_062,
        mean_reference_length: 5.24,
        references: 2_884,
        density: 0.0286,
    },
    ClusterTarget {
        name: "OT2",
        books: 19,
        word_count: 63_622,
        reference_words: 1_060,
        mean_reference_length: 5.34,
        references: 348,
        density: 0.0167,
    },
    ClusterTarget {
        name: "OT3",
        books: 3,
        word_count: 94_605,
        reference_words: 3_660,
        mean_reference_length: 5.5,
        references: 1_575,
        density: 0.0387,
    },
    ClusterTarget {
        name: "NT1",
        books: 20,
        word_count: 39_907,
        reference_words: 1_017,
        mean_reference_length: 5.51,
        references: 464,
        density: 0.0255,
    },
    ClusterTarget {
        name: "NT2",
        books: 7,
        word_count: 97_618,
        reference_words: 6_058,
        mean_reference_length: 5.32,
        references: 4_343,
        density: 0.0621,
    },
];

const PUBLISHED_CSV: &str = include_str!("../data/published_percent.csv");

/// The published proportion table (two decimals of a percent), as fractions.
pub fn published_matrix() -> ProportionMatrix {
    let mut m = Matrix::zeros(Testament::New.book_count(), Testament::Old.book_count());
    let mut lines = PUBLISHED_CSV.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').skip(1).collect();
    debug_assert_eq!(header, Testament::Old.names());
    for (r, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let name = fields.next();
        debug_assert_eq!(name, Some(Testament::New.names()[r]));
        for (c, f) in fields.enumerate() {
            m.set(r, c, f.parse::<f64>().expect("percent") / 100.0);
        }
    }
    ProportionMatrix(m)
}

pub fn reference_assignment(testament: Testament) -> ClusterAssignment {
    let labels = match testament {
        Testament::Old => OT_CLUSTERS.to_vec(),
        Testament::New => NT_CLUSTERS.to_vec(),
    };
    ClusterAssignment::new(testament, labels).expect("reference labels are complete")
}

/// Agreement between two labelings of the same books, maximized over
/// relabelings of `ours` (cluster numbering is arbitrary).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub agreeing: usize,
    pub total: usize,
    /// `mapping[l - 1]` is the reference label matched to our label `l`.
    pub mapping: Vec<usize>,
    pub disagreements: Vec<Disagreement>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disagreement {
    pub book: &'static str,
    pub ours: String,
    pub reference: String,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k);
            out.push(q);
        }
    }
    out.sort();
    out
}

pub fn agreement(ours: &ClusterAssignment, reference: &ClusterAssignment) -> Agreement {
    let k = ours.k.max(reference.k);
    let books: Vec<BookId> = ours.testament.books().collect();
    let score = |map: &[usize]| {
        books
            .iter()
            .filter(|b| map[ours.label(**b) - 1] == reference.label(**b))
            .count()
    };
    // k is at most a handful in practice; fall back to identity beyond 7.
    let mapping = if k <= 7 {
        permutations(k)
            .into_iter()
            .max_by(|a, b| score(a).cmp(&score(b)).then(b.cmp(a)))
            .unwrap_or_default()
    } else {
        (1..=k).collect()
    };
    let disagreements = books
        .iter()
        .filter(|b| mapping[ours.label(**b) - 1] != reference.label(**b))
        .map(|b| Disagreement {
            book: b.name(),
            ours: ours.label_name(ours.label(*b)),
            reference: reference.label_name(reference.label(*b)),
        })
        .collect();
    Agreement {
        agreeing: score(&mapping),
        total: books.len(),
        mapping,
        disagreements,
    }
}
