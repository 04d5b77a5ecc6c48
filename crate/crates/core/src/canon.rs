//! The fixed 66-book Protestant canon and book-name resolution.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Testament {
    #[serde(rename = "OT")]
    Old,
    #[serde(rename = "NT")]
    New,
}

impl Testament {
    pub fn book_count(self) -> usize {
        self.names().len()
    }

    pub fn names(self) -> &'static [&'static str] {
        match self {
            Testament::Old => &OT_BOOKS,
            Testament::New => &NT_BOOKS,
        }
    }

    pub fn books(self) -> impl Iterator<Item = BookId> {
        (0..self.book_count()).map(move |i| BookId {
            testament: self,
            canon_index: i as u8,
        })
    }

    pub fn short(self) -> &'static str {
        match self {
            Testament::Old => "OT",
            Testament::New => "NT",
        }
    }
}

impl fmt::Display for Testament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

pub const OT_BOOKS: [&str; 39] = [
    "Genesis",
    "Exodus",
    "Leviticus",
    "Numbers",
    "Deuteronomy",
    "Joshua",
    "Judges",
    "Ruth",
    "1 Samuel",
    "2 Samuel",
    "1 Kings",
    "2 Kings",
    "1 Chronicles",
    "2 Chronicles",
    "Ezra",
    "Nehemiah",
    "Esther",
    "Job",
    "Psalms",
    "Proverbs",
    "Ecclesiastes",
    "Song of Solomon",
    "Isaiah",
    "Jeremiah",
    "Lamentations",
    "Ezekiel",
    "Daniel",
    "Hosea",
    "Joel",
    "Amos",
    "Obadiah",
    "Jonah",
    "Micah",
    "Nahum",
    "Habakkuk",
    "Zephaniah",
    "Haggai",
    "Zechariah",
    "Malachi",
];

pub const NT_BOOKS: [&str; 27] = [
    "Matthew",
    "Mark",
    "Luke",
    "John",
    "Acts",
    "Romans",
    "1 Corinthians",
    "2 Corinthians",
    "Galatians",
    "Ephesians",
    "Philippians",
    "Colossians",
    "1 Thessalonians",
    "2 Thessalonians",
    "1 Timothy",
    "2 Timothy",
    "Titus",
    "Philemon",
    "Hebrews",
    "James",
    "1 Peter",
    "2 Peter",
    "1 John",
    "2 John",
    "3 John",
    "Jude",
    "Revelation",
];

/// A canon book. Ordering follows the canon (all OT books before NT books).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "BookRepr", into = "BookRepr")]
pub struct BookId {
    testament: Testament,
    canon_index: u8,
}

#[derive(Serialize, Deserialize)]
struct BookRepr {
    testament: Testament,
    canon_index: u8,
}

impl TryFrom<BookRepr> for BookId {
    type Error = String;

    fn try_from(r: BookRepr) -> Result<Self, Self::Error> {
        BookId::new(r.testament, r.canon_index as usize)
            .ok_or_else(|| format!("canon index {} out of range for {}", r.canon_index, r.testament))
    }
}

impl From<BookId> for BookRepr {
    fn from(b: BookId) -> Self {
        BookRepr {
            testament: b.testament,
            canon_index: b.canon_index,
        }
    }
}

impl BookId {
    pub fn new(testament: Testament, canon_index: usize) -> Option<BookId> {
        (canon_index < testament.book_count()).then_some(BookId {
            testament,
            canon_index: canon_index as u8,
        })
    }

    pub fn testament(self) -> Testament {
        self.testament
    }

    pub fn canon_index(self) -> usize {
        self.canon_index as usize
    }

    pub fn name(self) -> &'static str {
        self.testament.names()[self.canon_index()]
    }

    /// Looks up a book by its canonical English name (exact match).
    pub fn from_name(name: &str) -> Option<BookId> {
        [Testament::Old, Testament::New].into_iter().find_map(|t| {
            t.names()
                .iter()
                .position(|n| *n == name)
                .and_then(|i| BookId::new(t, i))
        })
    }
}

impl fmt::Display for BookId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// Alternate spellings and abbreviations seen in Zefania bnames/bsnames,
// including the Septuagint titles for Samuel, Kings and Chronicles.
const ALIASES: &[(&str, &str)] = &[
    ("gen", "Genesis"),
    ("gn", "Genesis"),
    ("exod", "Exodus"),
    ("ex", "Exodus"),
    ("exo", "Exodus"),
    ("lev", "Leviticus"),
    ("lv", "Leviticus"),
    ("num", "Numbers"),
    ("nm", "Numbers"),
    ("deut", "Deuteronomy"),
    ("deu", "Deuteronomy"),
    ("dt", "Deuteronomy"),
    ("josh", "Joshua"),
    ("jos", "Joshua"),
    ("judg", "Judges"),
    ("jdg", "Judges"),
    ("rut", "Ruth"),
    ("rth", "Ruth"),
    ("1sam", "1 Samuel"),
    ("1sa", "1 Samuel"),
    ("1kingdoms", "1 Samuel"),
    ("1reigns", "1 Samuel"),
    ("2sam", "2 Samuel"),
    ("2sa", "2 Samuel"),
    ("2kingdoms", "2 Samuel"),
    ("2reigns", "2 Samuel"),
    ("1kgs", "1 Kings"),
    ("1ki", "1 Kings"),
    ("1kin", "1 Kings"),
    ("3kingdoms", "1 Kings"),
    ("3reigns", "1 Kings"),
    ("2kgs", "2 Kings"),
    ("2ki", "2 Kings"),
    ("2kin", "2 Kings"),
    ("4kingdoms", "2 Kings"),
    ("4reigns", "2 Kings"),
    ("1chr", "1 Chronicles"),
    ("1ch", "1 Chronicles"),
    ("1chron", "1 Chronicles"),
    ("1paralipomenon", "1 Chronicles"),
    ("2chr", "2 Chronicles"),
    ("2ch", "2 Chronicles"),
    ("2chron", "2 Chronicles"),
    ("2paralipomenon", "2 Chronicles"),
    ("ezr", "Ezra"),
    ("neh", "Nehemiah"),
    ("esth", "Esther"),
    ("est", "Esther"),
    ("jb", "Job"),
    ("ps", "Psalms"),
    ("psa", "Psalms"),
    ("psalm", "Psalms"),
    ("pss", "Psalms"),
    ("prov", "Proverbs"),
    ("pro", "Proverbs"),
    ("prv", "Proverbs"),
    ("eccl", "Ecclesiastes"),
    ("ecc", "Ecclesiastes"),
    ("eccles", "Ecclesiastes"),
    ("qoh", "Ecclesiastes"),
    ("qoheleth", "Ecclesiastes"),
    ("song", "Song of Solomon"),
    ("songofsongs", "Song of Solomon"),
    ("sos", "Song of Solomon"),
    ("canticles", "Song of Solomon"),
    ("canticleofcanticles", "Song of Solomon"),
    ("isa", "Isaiah"),
    ("is", "Isaiah"),
    ("jer", "Jeremiah"),
    ("lam", "Lamentations"),
    ("ezek", "Ezekiel"),
    ("eze", "Ezekiel"),
    ("ezk", "Ezekiel"),
    ("dan", "Daniel"),
    ("dn", "Daniel"),
    ("hos", "Hosea"),
    ("joe", "Joel"),
    ("jl", "Joel"),
    ("amo", "Amos"),
    ("am", "Amos"),
    ("obad", "Obadiah"),
    ("oba", "Obadiah"),
    ("ob", "Obadiah"),
    ("jon", "Jonah"),
    ("jnh", "Jonah"),
    ("mic", "Micah"),
    ("mi", "Micah"),
    ("nah", "Nahum"),
    ("na", "Nahum"),
    ("hab", "Habakkuk"),
    ("zeph", "Zephaniah"),
    ("zep", "Zephaniah"),
    ("hag", "Haggai"),
    ("zech", "Zechariah"),
    ("zec", "Zechariah"),
    ("mal", "Malachi"),
    ("matt", "Matthew"),
    ("mat", "Matthew"),
    ("mt", "Matthew"),
    ("mk", "Mark"),
    ("mar", "Mark"),
    ("mrk", "Mark"),
    ("lk", "Luke"),
    ("luk", "Luke"),
    ("jn", "John"),
    ("joh", "John"),
    ("jhn", "John"),
    ("act", "Acts"),
    ("actsoftheapostles", "Acts"),
    ("rom", "Romans"),
    ("1cor", "1 Corinthians"),
    ("1co", "1 Corinthians"),
    ("2cor", "2 Corinthians"),
    ("2co", "2 Corinthians"),
    ("gal", "Galatians"),
    ("eph", "Ephesians"),
    ("phil", "Philippians"),
    ("php", "Philippians"),
    ("col", "Colossians"),
    ("1thess", "1 Thessalonians"),
    ("1th", "1 Thessalonians"),
    ("2thess", "2 Thessalonians"),
    ("2th", "2 Thessalonians"),
    ("1tim", "1 Timothy"),
    ("1ti", "1 Timothy"),
    ("2tim", "2 Timothy"),
    ("2ti", "2 Timothy"),
    ("tit", "Titus"),
    ("phlm", "Philemon"),
    ("philem", "Philemon"),
    ("phm", "Philemon"),
    ("heb", "Hebrews"),
    ("jas", "James"),
    ("jam", "James"),
    ("1pet", "1 Peter"),
    ("1pe", "1 Peter"),
    ("1pt", "1 Peter"),
    ("2pet", "2 Peter"),
    ("2pe", "2 Peter"),
    ("2pt", "2 Peter"),
    ("1jn", "1 John"),
    ("1jo", "1 John"),
    ("1joh", "1 John"),
    ("2jn", "2 John"),
    ("2jo", "2 John"),
    ("2joh", "2 John"),
    ("3jn", "3 John"),
    ("3jo", "3 John"),
    ("3joh", "3 John"),
    ("jud", "Jude"),
    ("jde", "Jude"),
    ("rev", "Revelation"),
    ("re", "Revelation"),
    ("revelationofjohn", "Revelation"),
    ("apocalypse", "Revelation"),
    ("apoc", "Revelation"),
];

/// Folds a book name to a comparison form: lowercase ASCII alphanumerics
/// only, with leading roman numerals ("I", "II", "III", "IV") turned into digits.
fn fold_name(name: &str) -> String {
    let trimmed = name.trim();
    let (prefix, rest) = match trimmed.split_once(|c: char| c.is_whitespace() || c == '.') {
        Some((head, tail)) => match head {
            "I" | "i" => ("1", tail),
            "II" | "ii" => ("2", tail),
            "III" | "iii" => ("3", tail),
            "IV" | "iv" => ("4", tail),
            _ => ("", trimmed),
        },
        None => ("", trimmed),
    };
    let mut out = String::from(prefix);
    out.extend(
        rest.chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase()),
    );
    out
}

/// Resolves a book name (full name, common abbreviation or Septuagint title)
/// to a canon book of either testament.
pub fn resolve_name(name: &str) -> Option<BookId> {
    let folded = fold_name(name);
    if folded.is_empty() {
        return None;
    }
    for t in [Testament::Old, Testament::New] {
        if let Some(i) = t.names().iter().position(|n| fold_name(n) == folded) {
            return BookId::new(t, i);
        }
    }
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == folded)
        .and_then(|(_, canonical)| BookId::from_name(canonical))
}

/// Standard Zefania book numbering: 1–39 Old Testament, 40–66 New Testament.
/// Numbers above 66 are deuterocanonical and resolve to nothing.
pub fn resolve_number(bnumber: u32) -> Option<BookId> {
    match bnumber {
        1..=39 => BookId::new(Testament::Old, bnumber as usize - 1),
        40..=66 => BookId::new(Testament::New, bnumber as usize - 40),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canon_sizes() {
        assert_eq!(Testament::Old.book_count(), 39);
        assert_eq!(Testament::New.book_count(), 27);
        assert_eq!(Testament::Old.books().count(), 39);
    }

    #[test]
    fn names_round_trip() {
        for t in [Testament::Old, Testament::New] {
            for b in t.books() {
                assert_eq!(BookId::from_name(b.name()), Some(b));
                assert_eq!(resolve_name(b.name()), Some(b));
            }
        }
    }

    #[test]
    fn aliases_point_at_real_books() {
        for (alias, canonical) in ALIASES {
            assert!(BookId::from_name(canonical).is_some(), "{alias} -> {canonical}");
        }
    }

    #[test]
    fn resolves_variants() {
        let ps = BookId::from_name("Psalms").unwrap();
        assert_eq!(resolve_name("Psalm"), Some(ps));
        assert_eq!(resolve_name("PSA"), Some(ps));
        assert_eq!(resolve_name("III Kingdoms"), BookId::from_name("1 Kings"));
        assert_eq!(resolve_name("1. Samuel"), BookId::from_name("1 Samuel"));
        assert_eq!(resolve_name("Song of Songs"), BookId::from_name("Song of Solomon"));
        assert_eq!(resolve_name("1Jn"), BookId::from_name("1 John"));
        assert_eq!(resolve_name("Tobit"), None);
        assert_eq!(resolve_name("1 Maccabees"), None);
        assert_eq!(resolve_name(""), None);
    }

    #[test]
    fn numbering() {
        assert_eq!(resolve_number(1), BookId::from_name("Genesis"));
        assert_eq!(resolve_number(39), BookId::from_name("Malachi"));
        assert_eq!(resolve_number(40), BookId::from_name("Matthew"));
        assert_eq!(resolve_number(66), BookId::from_name("Revelation"));
        assert_eq!(resolve_number(67), None);
        assert_eq!(resolve_number(0), None);
    }

    #[test]
    fn book_order_is_canon_order() {
        let gen = BookId::from_name("Genesis").unwrap();
        let mal = BookId::from_name("Malachi").unwrap();
        let mat = BookId::from_name("Matthew").unwrap();
        assert!(gen < mal && mal < mat);
        assert!(BookId::new(Testament::New, 27).is_none());
    }
}
