//! Exact n-gram matching of New Testament windows against an index of Old
//! Testament windows, and merging of raw matches into quotations.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::canon::{BookId, Testament};
use crate::corpus::{Corpus, Token};
use crate::error::DetectError;

pub const DEFAULT_N: usize = 5;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const KEY_SEPARATOR: u8 = 0x1f;

/// One pair of equal n-windows. Field order gives the output sort order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawMatch {
    pub nt_book: BookId,
    pub nt_start: usize,
    pub ot_book: BookId,
    pub ot_start: usize,
    pub n: usize,
}

impl RawMatch {
    pub fn diagonal(&self) -> i64 {
        self.nt_start as i64 - self.ot_start as i64
    }
}

/// A maximal run of matching words shared by one OT book and one NT book.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quotation {
    pub nt_book: BookId,
    pub nt_start: usize,
    pub ot_book: BookId,
    pub ot_start: usize,
    pub length: usize,
}

impl Quotation {
    pub fn nt_span(&self) -> Range<usize> {
        self.nt_start..self.nt_start + self.length
    }

    pub fn ot_span(&self) -> Range<usize> {
        self.ot_start..self.ot_start + self.length
    }

    pub fn diagonal(&self) -> i64 {
        self.nt_start as i64 - self.ot_start as i64
    }

    /// Number of n-windows this quotation covers.
    pub fn window_count(&self, n: usize) -> usize {
        (self.length + 1).saturating_sub(n)
    }
}

/// 64-bit FNV-1a over the key strings, each followed by a separator byte.
pub fn fingerprint(window: &[Token]) -> u64 {
    let mut h = FNV_OFFSET;
    for t in window {
        for &b in t.key.as_str().as_bytes().iter().chain(&[KEY_SEPARATOR]) {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

fn same_keys(a: &[Token], b: &[Token]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.key == y.key)
}

/// Fingerprint multimap over every in-book window of the indexed corpus.
pub struct NGramIndex<'a> {
    corpus: &'a Corpus,
    n: usize,
    table: HashMap<u64, Vec<(u8, u32)>>,
    windows: usize,
}

impl<'a> NGramIndex<'a> {
    pub fn build(corpus: &'a Corpus, n: usize) -> Result<NGramIndex<'a>, DetectError> {
        if n < 2 {
            return Err(DetectError::WindowTooSmall(n));
        }
        let mut table: HashMap<u64, Vec<(u8, u32)>> = HashMap::new();
        let mut windows = 0;
        for book in corpus.books() {
            for (start, w) in book.tokens.windows(n).enumerate() {
                table
                    .entry(fingerprint(w))
                    .or_default()
                    .push((book.id.canon_index() as u8, start as u32));
                windows += 1;
            }
        }
        Ok(NGramIndex {
            corpus,
            n,
            table,
            windows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    /// Total number of indexed windows.
    pub fn len(&self) -> usize {
        self.windows
    }

    pub fn is_empty(&self) -> bool {
        self.windows == 0
    }

    /// Indexed windows whose keys equal `window`, verified key by key.
    pub fn lookup<'s>(
        &'s self,
        window: &'s [Token],
    ) -> impl Iterator<Item = (BookId, usize)> + 's {
        let testament = self.corpus.testament();
        self.table
            .get(&fingerprint(window))
            .into_iter()
            .flatten()
            .filter_map(move |&(book, start)| {
                let b = &self.corpus.books()[book as usize];
                let start = start as usize;
                same_keys(&b.tokens[start..start + self.n], window)
                    .then(|| (BookId::new(testament, book as usize).expect("indexed book"), start))
            })
    }
}

fn matches_in_book(index: &NGramIndex<'_>, nt: &Corpus, book: usize) -> Vec<RawMatch> {
    let b = &nt.books()[book];
    let mut out = Vec::new();
    for (nt_start, w) in b.tokens.windows(index.n).enumerate() {
        for (ot_book, ot_start) in index.lookup(w) {
            out.push(RawMatch {
                nt_book: b.id,
                nt_start,
                ot_book,
                ot_start,
                n: index.n,
            });
        }
    }
    out
}

/// All (OT window, NT window) pairs with equal keys, sorted by
/// (nt_book, nt_start, ot_book, ot_start). NT books are spread over up to
/// `workers` threads; the result does not depend on the worker count.
pub fn find_matches(index: &NGramIndex<'_>, nt: &Corpus, workers: usize) -> Vec<RawMatch> {
    let books = nt.books().len();
    let workers = workers.clamp(1, books.max(1));
    let mut out = if workers == 1 {
        (0..books).flat_map(|b| matches_in_book(index, nt, b)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let results = Mutex::new(Vec::new());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let b = next.fetch_add(1, Ordering::Relaxed);
                    if b >= books {
                        break;
                    }
                    let found = matches_in_book(index, nt, b);
                    results.lock().expect("worker panicked").extend(found);
                });
            }
        });
        results.into_inner().expect("worker panicked")
    };
    out.sort_unstable();
    out
}

/// Merges raw matches that share a book pair and a diagonal and whose spans
/// overlap or touch. Output is sorted like [`find_matches`].
pub fn merge_matches(raw: &[RawMatch]) -> Result<Vec<Quotation>, DetectError> {
    let Some(first) = raw.first() else {
        return Ok(Vec::new());
    };
    let n = first.n;
    if let Some(m) = raw.iter().find(|m| m.n != n) {
        return Err(DetectError::MixedWindowSizes(n, m.n));
    }

    let mut diagonals: BTreeMap<(BookId, BookId, i64), Vec<usize>> = BTreeMap::new();
    for m in raw {
        diagonals
            .entry((m.ot_book, m.nt_book, m.diagonal()))
            .or_default()
            .push(m.nt_start);
    }

    let mut quotes = Vec::new();
    for ((ot_book, nt_book, diag), mut starts) in diagonals {
        starts.sort_unstable();
        starts.dedup();
        let mut run_start = starts[0];
        let mut run_end = starts[0] + n;
        for &s in &starts[1..] {
            if s <= run_end {
                run_end = run_end.max(s + n);
            } else {
                quotes.push(quote(ot_book, nt_book, diag, run_start, run_end));
                run_start = s;
                run_end = s + n;
            }
        }
        quotes.push(quote(ot_book, nt_book, diag, run_start, run_end));
    }
    quotes.sort_unstable();
    Ok(quotes)
}

fn quote(ot_book: BookId, nt_book: BookId, diag: i64, nt_start: usize, nt_end: usize) -> Quotation {
    Quotation {
        nt_book,
        nt_start,
        ot_book,
        ot_start: (nt_start as i64 - diag) as usize,
        length: nt_end - nt_start,
    }
}

/// A group of raw matches merged on positional overlap alone: same book
/// pair, NT spans and OT spans both overlapping or touching, closed
/// transitively. Spans of a group need not align word for word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionalGroup {
    pub nt_book: BookId,
    pub nt_span: Range<usize>,
    pub ot_book: BookId,
    pub ot_span: Range<usize>,
    pub matches: usize,
}

/// Alternate merge rule that ignores diagonals, kept for comparing counts.
pub fn merge_positional(raw: &[RawMatch]) -> Vec<PositionalGroup> {
    let mut by_pair: BTreeMap<(BookId, BookId), Vec<RawMatch>> = BTreeMap::new();
    for m in raw {
        by_pair.entry((m.nt_book, m.ot_book)).or_default().push(*m);
    }

    let mut groups = Vec::new();
    for ((nt_book, ot_book), mut ms) in by_pair {
        ms.sort_unstable();
        let mut parent: Vec<usize> = (0..ms.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for j in 0..ms.len() {
            for i in (0..j).rev() {
                if ms[j].nt_start > ms[i].nt_start + ms[i].n {
                    break;
                }
                if ms[i].ot_start.abs_diff(ms[j].ot_start) <= ms[i].n {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut spans: BTreeMap<usize, PositionalGroup> = BTreeMap::new();
        for (i, m) in ms.iter().enumerate() {
            let root = find(&mut parent, i);
            let g = spans.entry(root).or_insert(PositionalGroup {
                nt_book,
                nt_span: m.nt_start..m.nt_start + m.n,
                ot_book,
                ot_span: m.ot_start..m.ot_start + m.n,
                matches: 0,
            });
            g.nt_span.start = g.nt_span.start.min(m.nt_start);
            g.nt_span.end = g.nt_span.end.max(m.nt_start + m.n);
            g.ot_span.start = g.ot_span.start.min(m.ot_start);
            g.ot_span.end = g.ot_span.end.max(m.ot_start + m.n);
            g.matches += 1;
        }
        groups.extend(spans.into_values());
    }
    groups.sort_unstable_by_key(|g| (g.nt_book, g.nt_span.start, g.ot_book, g.ot_span.start));
    groups
}

/// Histogram of quotation lengths.
pub fn length_histogram(quotes: &[Quotation]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for q in quotes {
        *h.entry(q.length).or_insert(0) += 1;
    }
    h
}

/// Checks that a quotation lies inside both books and that its OT and NT
/// words carry equal keys throughout.
pub fn verify_quotation(q: &Quotation, ot: &Corpus, nt: &Corpus) -> Result<(), DetectError> {
    let ot_span = ot.span_positions(q.ot_book, q.ot_start, q.length)?;
    let nt_span = nt.span_positions(q.nt_book, q.nt_start, q.length)?;
    let a = &ot.book(q.ot_book)?.tokens[ot_span];
    let b = &nt.book(q.nt_book)?.tokens[nt_span];
    if same_keys(a, b) {
        Ok(())
    } else {
        Err(DetectError::Unverified(format!(
            "{} {} / {} {} len {}",
            q.ot_book, q.ot_start, q.nt_book, q.nt_start, q.length
        )))
    }
}

pub const QUOTATION_HEADER: [&str; 7] = [
    "ot_book", "ot_start", "ot_ref", "nt_book", "nt_start", "nt_ref", "length",
];

/// Writes the quotation CSV: header row, one row per quotation, LF endings.
pub fn write_quotations_csv<W: Write>(
    quotes: &[Quotation],
    ot: &Corpus,
    nt: &Corpus,
    out: W,
) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(QUOTATION_HEADER)?;
    let mut sorted = quotes.to_vec();
    sorted.sort_unstable();
    for q in &sorted {
        let ot_ref = ot
            .book(q.ot_book)
            .ok()
            .and_then(|b| b.reference(q.ot_start))
            .unwrap_or_default();
        let nt_ref = nt
            .book(q.nt_book)
            .ok()
            .and_then(|b| b.reference(q.nt_start))
            .unwrap_or_default();
        w.write_record([
            q.ot_book.name(),
            &q.ot_start.to_string(),
            &ot_ref,
            q.nt_book.name(),
            &q.nt_start.to_string(),
            &nt_ref,
            &q.length.to_string(),
        ])?;
    }
    w.flush()
}

/// Reads a quotation CSV and re-verifies every row against the corpora.
pub fn read_quotations_csv<R: Read>(
    input: R,
    ot: &Corpus,
    nt: &Corpus,
) -> Result<Vec<Quotation>, DetectError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header_ok = rdr
        .headers()
        .map(|h| h.iter().eq(QUOTATION_HEADER.iter().copied()))
        .unwrap_or(false);
    if !header_ok {
        return Err(DetectError::Csv {
            line: 1,
            message: format!("expected header {}", QUOTATION_HEADER.join(",")),
        });
    }
    let mut quotes = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DetectError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| DetectError::Csv { line, message };
        let book = |s: &str, t: Testament| {
            BookId::from_name(s)
                .filter(|b| b.testament() == t)
                .ok_or_else(|| bad(format!("unknown {t} book {s:?}")))
        };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad number {s:?}")))
        };
        let q = Quotation {
            ot_book: book(&rec[0], Testament::Old)?,
            ot_start: num(&rec[1])?,
            nt_book: book(&rec[3], Testament::New)?,
            nt_start: num(&rec[4])?,
            length: num(&rec[6])?,
        };
        verify_quotation(&q, ot, nt)?;
        quotes.push(q);
    }
    quotes.sort_unstable();
    Ok(quotes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Book, TokenKey};

    fn corpus(t: Testament, books: &[(&str, &[u32])]) -> Corpus {
        Corpus::new(
            t,
            books
                .iter()
                .map(|(name, keys)| Book {
                    id: BookId::from_name(name).unwrap(),
                    tokens: keys
                        .iter()
                        .enumerate()
                        .map(|(i, k)| Token {
                            key: TokenKey::real(&format!("G{k}")).unwrap(),
                            surface: format!("w{k}"),
                            chapter: 1,
                            verse: 1 + i as u32 / 10,
                        })
                        .collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn b(name: &str) -> BookId {
        BookId::from_name(name).unwrap()
    }

    fn raw(nt: usize, ot: usize) -> RawMatch {
        RawMatch {
            nt_book: b("Mark"),
            nt_start: nt,
            ot_book: b("Genesis"),
            ot_start: ot,
            n: 5,
        }
    }

    #[test]
    fn window_counts() {
        let ten: Vec<u32> = (0..10).collect();
        let c = corpus(Testament::Old, &[("Genesis", &ten)]);
        assert_eq!(NGramIndex::build(&c, 5).unwrap().len(), 6);
        let c = corpus(Testament::Old, &[("Genesis", &[1, 2, 3, 4])]);
        assert_eq!(NGramIndex::build(&c, 5).unwrap().len(), 0);
        let c = corpus(
            Testament::Old,
            &[("Genesis", &[1, 2, 3, 4, 5, 6, 7]), ("Exodus", &[8, 9, 10, 11, 12])],
        );
        let idx = NGramIndex::build(&c, 5).unwrap();
        assert_eq!(idx.len(), 4);
        // The window straddling the seam (5,6,7,8,9) is not indexed.
        let seam = corpus(Testament::New, &[("Mark", &[5, 6, 7, 8, 9])]);
        assert!(find_matches(&idx, &seam, 1).is_empty());
        assert!(matches!(
            NGramIndex::build(&c, 1),
            Err(DetectError::WindowTooSmall(1))
        ));
    }

    #[test]
    fn planted_quote() {
        let mut ot: Vec<u32> = (100..160).collect();
        let quote: Vec<u32> = (1..=8).collect();
        ot[20..28].copy_from_slice(&quote);
        let mut nt: Vec<u32> = (200..240).collect();
        nt[7..15].copy_from_slice(&quote);
        let ot = corpus(Testament::Old, &[("Isaiah", &ot)]);
        let nt = corpus(Testament::New, &[("Luke", &nt)]);
        let idx = NGramIndex::build(&ot, 5).unwrap();
        let m = find_matches(&idx, &nt, 1);
        assert_eq!(m.len(), 4);
        assert!(m.iter().all(|r| r.diagonal() == 7 - 20));
        let q = merge_matches(&m).unwrap();
        assert_eq!(
            q,
            vec![Quotation {
                nt_book: b("Luke"),
                nt_start: 7,
                ot_book: b("Isaiah"),
                ot_start: 20,
                length: 8
            }]
        );
        verify_quotation(&q[0], &ot, &nt).unwrap();
        assert_eq!(length_histogram(&q), BTreeMap::from([(8, 1)]));
    }

    #[test]
    fn disjoint_vocabularies() {
        let ot = corpus(Testament::Old, &[("Genesis", &[1, 2, 3, 4, 5, 6])]);
        let nt = corpus(Testament::New, &[("John", &[7, 8, 9, 10, 11, 12])]);
        let idx = NGramIndex::build(&ot, 5).unwrap();
        assert!(find_matches(&idx, &nt, 4).is_empty());
    }

    #[test]
    fn merge_rule() {
        assert_eq!(merge_matches(&[]).unwrap(), vec![]);
        let single = merge_matches(&[raw(10, 50)]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].length, 5);

        let same_diag = merge_matches(&[raw(10, 50), raw(11, 51)]).unwrap();
        assert_eq!(same_diag.len(), 1);
        assert_eq!((same_diag[0].nt_start, same_diag[0].ot_start), (10, 50));
        assert_eq!(same_diag[0].length, 6);

        let other_diag = merge_matches(&[raw(10, 50), raw(11, 52)]).unwrap();
        assert_eq!(other_diag.len(), 2);

        // touching spans close the run; a gap splits it
        let touching = merge_matches(&[raw(0, 0), raw(5, 5)]).unwrap();
        assert_eq!(touching.len(), 1);
        assert_eq!(touching[0].length, 10);
        let gap = merge_matches(&[raw(0, 0), raw(6, 6)]).unwrap();
        assert_eq!(gap.len(), 2);

        let mut mixed = raw(0, 0);
        mixed.n = 4;
        assert!(matches!(
            merge_matches(&[raw(3, 3), mixed]),
            Err(DetectError::MixedWindowSizes(5, 4))
        ));
    }

    #[test]
    fn positional_merge_ignores_diagonal() {
        let groups = merge_positional(&[raw(10, 50), raw(11, 52)]);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].nt_span, 10..16);
        assert_eq!(groups[0].ot_span, 50..57);
        assert_eq!(merge_positional(&[raw(10, 50), raw(11, 90)]).len(), 2);
    }

    #[test]
    fn workers_do_not_change_output() {
        let ot: Vec<u32> = (0..300).map(|i| i % 7).collect();
        let nt1: Vec<u32> = (0..120).map(|i| (i * 3) % 7).collect();
        let nt2: Vec<u32> = (0..90).map(|i| i % 7).collect();
        let ot = corpus(Testament::Old, &[("Job", &ot)]);
        let nt = corpus(Testament::New, &[("Acts", &nt1), ("Jude", &nt2)]);
        let idx = NGramIndex::build(&ot, 5).unwrap();
        let one = find_matches(&idx, &nt, 1);
        assert!(!one.is_empty());
        assert_eq!(one, find_matches(&idx, &nt, 8));
    }

    #[test]
    fn csv_round_trip_and_verification() {
        let mut ot: Vec<u32> = (100..130).collect();
        ot[3..9].copy_from_slice(&[1, 2, 3, 4, 5, 6]);
        let mut nt: Vec<u32> = (200..230).collect();
        nt[12..18].copy_from_slice(&[1, 2, 3, 4, 5, 6]);
        let ot = corpus(Testament::Old, &[("Exodus", &ot)]);
        let nt = corpus(Testament::New, &[("Romans", &nt)]);
        let idx = NGramIndex::build(&ot, 5).unwrap();
        let q = merge_matches(&find_matches(&idx, &nt, 1)).unwrap();
        let mut buf = Vec::new();
        write_quotations_csv(&q, &ot, &nt, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "ot_book,ot_start,ot_ref,nt_book,nt_start,nt_ref,length\nExodus,3,1:1,Romans,12,1:2,6\n"
        );
        assert_eq!(read_quotations_csv(&buf[..], &ot, &nt).unwrap(), q);

        let tampered = text.replace(",6\n", ",7\n");
        assert!(matches!(
            read_quotations_csv(tampered.as_bytes(), &ot, &nt),
            Err(DetectError::Unverified(_))
        ));
        let shifted = text.replace("Romans,12", "Romans,13");
        assert!(read_quotations_csv(shifted.as_bytes(), &ot, &nt).is_err());
        assert!(read_quotations_csv("a,b\n".as_bytes(), &ot, &nt).is_err());
    }

    #[test]
    fn fingerprint_separates_key_boundaries() {
        let k = |s: &str| Token {
            key: TokenKey::real(s).unwrap(),
            surface: "x".into(),
            chapter: 1,
            verse: 1,
        };
        assert_ne!(
            fingerprint(&[k("G1"), k("G23")]),
            fingerprint(&[k("G12"), k("G3")])
        );
    }
}
