//! Zefania XML parsing and custom-key assignment.
//!
//! A Zefania bible is a `XMLBIBLE > BIBLEBOOK > CHAPTER > VERS` tree. Inside a
//! verse, annotated words are `<gr str="…">word</gr>` elements and anything
//! else is plain text split on whitespace. `NOTE` and `CAPTION` content is
//! not scripture and is skipped.

use std::collections::HashMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::canon::{self, BookId, Testament};
use crate::corpus::{Book, Corpus, Token, TokenKey};
use crate::error::IngestError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawToken {
    pub surface: String,
    pub strongs: Option<String>,
    pub chapter: u32,
    pub verse: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawBook {
    pub name: String,
    pub number: Option<u32>,
    /// `None` when the book is not part of this testament's canon.
    pub book: Option<BookId>,
    pub tokens: Vec<RawToken>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDocument {
    pub testament: Testament,
    pub books: Vec<RawBook>,
}

impl RawDocument {
    pub fn word_count(&self) -> usize {
        self.books.iter().map(|b| b.tokens.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub book: String,
    pub chapter: u32,
    pub verse: u32,
    pub raw: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedBook {
    pub name: String,
    pub number: Option<u32>,
    pub words: usize,
}

/// Shared surface → `C-<n>` table. Keys are numbered from 1 in order of
/// first appearance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct CustomKeyTable {
    surfaces: Vec<String>,
    index: HashMap<String, u32>,
}

impl CustomKeyTable {
    pub fn new() -> CustomKeyTable {
        CustomKeyTable::default()
    }

    pub fn key_for(&mut self, surface: &str) -> TokenKey {
        if let Some(&seq) = self.index.get(surface) {
            return TokenKey::custom(seq);
        }
        self.surfaces.push(surface.to_string());
        let seq = self.surfaces.len() as u32;
        self.index.insert(surface.to_string(), seq);
        TokenKey::custom(seq)
    }

    pub fn get(&self, surface: &str) -> Option<TokenKey> {
        self.index.get(surface).map(|&s| TokenKey::custom(s))
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn next_sequence(&self) -> u32 {
        self.surfaces.len() as u32 + 1
    }
}

impl From<Vec<String>> for CustomKeyTable {
    fn from(surfaces: Vec<String>) -> Self {
        let index = surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32 + 1))
            .collect();
        CustomKeyTable { surfaces, index }
    }
}

impl From<CustomKeyTable> for Vec<String> {
    fn from(t: CustomKeyTable) -> Self {
        t.surfaces
    }
}

/// Result of keying one parsed document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ingested {
    pub corpus: Corpus,
    pub drops: Vec<DropRecord>,
    pub excluded: Vec<ExcludedBook>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

fn trim_punctuation(s: &str) -> &str {
    s.trim_matches(|c: char| !is_word_char(c))
}

/// NFC composition plus lowercasing, after stripping leading and trailing
/// punctuation. Diacritics are kept. Returns `None` when nothing is left.
pub fn normalize_surface(raw: &str) -> Option<String> {
    let composed: String = trim_punctuation(raw).nfc().collect();
    let folded: String = composed.to_lowercase().nfc().collect();
    (!folded.is_empty()).then_some(folded)
}

/// Canonical form of a Strong's annotation. Only the first of several
/// space- or comma-separated numbers is used. Bare and `G`-prefixed numbers
/// become `G<n>` without leading zeros.
pub fn normalize_strongs(raw: &str) -> Option<TokenKey> {
    let first = raw
        .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .find(|s| !s.is_empty())?;
    let body = first
        .strip_prefix('G')
        .or_else(|| first.strip_prefix('g'))
        .unwrap_or(first);
    let digits_end = body
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(body.len());
    if digits_end > 0 {
        let (digits, suffix) = body.split_at(digits_end);
        let number: u64 = digits.parse().ok()?;
        if number == 0 {
            return None;
        }
        if suffix.chars().all(|c| c.is_ascii_alphabetic()) {
            return TokenKey::real(&format!("G{number}{suffix}")).ok();
        }
    }
    TokenKey::real(first).ok()
}

fn attr(e: &BytesStart<'_>, name: &str) -> Option<String> {
    e.attributes().flatten().find_map(|a| {
        a.key
            .as_ref()
            .eq_ignore_ascii_case(name.as_bytes())
            .then(|| a.unescape_value().ok().map(|v| v.trim().to_string()))
            .flatten()
    })
}

fn leading_number(s: &str) -> Option<u32> {
    let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    s[..end].parse().ok().filter(|&n| n > 0)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tag {
    Root,
    Book,
    Chapter,
    Verse,
    Word,
    Skipped,
    Other,
}

fn classify(name: &[u8]) -> Tag {
    let upper = name.to_ascii_uppercase();
    match upper.as_slice() {
        b"XMLBIBLE" => Tag::Root,
        b"BIBLEBOOK" => Tag::Book,
        b"CHAPTER" => Tag::Chapter,
        b"VERS" => Tag::Verse,
        b"GR" | b"GRAM" => Tag::Word,
        b"NOTE" | b"CAPTION" => Tag::Skipped,
        _ => Tag::Other,
    }
}

fn resolve_book(testament: Testament, e: &BytesStart<'_>) -> (String, Option<u32>, Option<BookId>) {
    let bname = attr(e, "bname").unwrap_or_default();
    let bsname = attr(e, "bsname");
    let number = attr(e, "bnumber").and_then(|n| n.parse().ok());
    let by_name = canon::resolve_name(&bname)
        .or_else(|| bsname.as_deref().and_then(canon::resolve_name));
    let book = by_name
        .or_else(|| number.and_then(canon::resolve_number))
        .filter(|b| b.testament() == testament);
    let name = if bname.is_empty() {
        bsname.unwrap_or_else(|| number.map(|n| format!("#{n}")).unwrap_or_default())
    } else {
        bname
    };
    (name, number, book)
}

struct ParseState {
    books: Vec<RawBook>,
    chapter: u32,
    verse: u32,
    in_verse: bool,
    skip_depth: usize,
    word: Option<(Option<String>, String)>,
}

impl ParseState {
    fn push(&mut self, surface: String, strongs: Option<String>) {
        if let Some(book) = self.books.last_mut() {
            book.tokens.push(RawToken {
                surface,
                strongs,
                chapter: self.chapter,
                verse: self.verse,
            });
        }
    }

    fn text(&mut self, text: &str) {
        if self.skip_depth > 0 {
            return;
        }
        if let Some((_, buf)) = self.word.as_mut() {
            buf.push_str(text);
        } else if self.in_verse {
            for chunk in text.split_whitespace() {
                if chunk.chars().any(char::is_alphanumeric) {
                    self.push(chunk.to_string(), None);
                }
            }
        }
    }
}

/// Parses a Zefania document into raw words in document order. Books that
/// cannot be placed in the testament's canon are kept with `book: None`.
pub fn parse_zefania(xml: &[u8], testament: Testament) -> Result<RawDocument, IngestError> {
    let xml_error = |pos: u64, message: String| {
        let pos = pos.min(xml.len() as u64);
        let line = xml[..pos as usize].iter().filter(|&&b| b == b'\n').count() + 1;
        IngestError::Xml {
            line,
            offset: pos,
            message,
        }
    };

    let mut reader = Reader::from_reader(xml);
    reader.config_mut().trim_text(false);
    let mut st = ParseState {
        books: Vec::new(),
        chapter: 0,
        verse: 0,
        in_verse: false,
        skip_depth: 0,
        word: None,
    };
    let mut stack: Vec<Tag> = Vec::new();
    let mut saw_root = false;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| xml_error(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let tag = classify(e.name().as_ref());
                saw_root |= stack.is_empty() && tag == Tag::Root;
                st.open(tag, &e, testament);
                stack.push(tag);
            }
            Event::Empty(e) => {
                let tag = classify(e.name().as_ref());
                saw_root |= stack.is_empty() && tag == Tag::Root;
                st.open(tag, &e, testament);
                st.close(tag);
            }
            Event::End(_) => {
                if let Some(tag) = stack.pop() {
                    st.close(tag);
                }
            }
            Event::Text(t) => {
                let text = t
                    .unescape()
                    .map_err(|e| xml_error(reader.buffer_position(), e.to_string()))?;
                st.text(&text);
            }
            Event::CData(t) => st.text(&String::from_utf8_lossy(t.as_ref())),
            Event::Eof => break,
            _ => {}
        }
    }
    if !stack.is_empty() {
        return Err(xml_error(
            xml.len() as u64,
            "document ends inside an open element".into(),
        ));
    }
    if !saw_root {
        return Err(xml_error(0, "missing XMLBIBLE root element".into()));
    }
    Ok(RawDocument {
        testament,
        books: st.books,
    })
}

/// Keys every word of a parsed document. Annotated words keep their Strong's
/// number; the rest get a shared custom key for their normalized surface.
/// Words of non-canon books are set aside without touching the table.
pub fn assign_custom_keys(
    doc: &RawDocument,
    table: &mut CustomKeyTable,
) -> Result<Ingested, IngestError> {
    let mut books: Vec<Book> = Vec::new();
    let mut drops = Vec::new();
    let mut excluded = Vec::new();

    for raw in &doc.books {
        let Some(id) = raw.book else {
            excluded.push(ExcludedBook {
                name: raw.name.clone(),
                number: raw.number,
                words: raw.tokens.len(),
            });
            continue;
        };
        // A book split across several BIBLEBOOK elements is concatenated.
        let pos = match books.iter().position(|b| b.id == id) {
            Some(p) => p,
            None => {
                books.push(Book {
                    id,
                    tokens: Vec::with_capacity(raw.tokens.len()),
                });
                books.len() - 1
            }
        };
        for rt in &raw.tokens {
            let Some(surface) = normalize_surface(&rt.surface) else {
                drops.push(DropRecord {
                    book: id.name().to_string(),
                    chapter: rt.chapter,
                    verse: rt.verse,
                    raw: rt.surface.clone(),
                });
                continue;
            };
            let key = match rt.strongs.as_deref().and_then(normalize_strongs) {
                Some(k) => k,
                None => table.key_for(&surface),
            };
            books[pos].tokens.push(Token {
                key,
                surface,
                chapter: rt.chapter,
                verse: rt.verse,
            });
        }
    }

    Ok(Ingested {
        corpus: Corpus::new(doc.testament, books)?,
        drops,
        excluded,
    })
}

impl ParseState {
    fn open(&mut self, tag: Tag, e: &BytesStart<'_>, testament: Testament) {
        match tag {
            Tag::Book => {
                let (name, number, book) = resolve_book(testament, e);
                self.books.push(RawBook {
                    name,
                    number,
                    book,
                    tokens: Vec::new(),
                });
                self.chapter = 0;
                self.verse = 0;
            }
            Tag::Chapter => {
                self.chapter = attr(e, "cnumber")
                    .as_deref()
                    .and_then(leading_number)
                    .unwrap_or(self.chapter + 1);
                self.verse = 0;
            }
            Tag::Verse => {
                self.verse = attr(e, "vnumber")
                    .as_deref()
                    .and_then(leading_number)
                    .unwrap_or(self.verse + 1);
                self.in_verse = true;
            }
            Tag::Word if self.in_verse && self.skip_depth == 0 => {
                let strongs = attr(e, "str").filter(|s| !s.is_empty());
                self.word = Some((strongs, String::new()));
            }
            Tag::Skipped => self.skip_depth += 1,
            _ => {}
        }
    }

    fn close(&mut self, tag: Tag) {
        match tag {
            Tag::Verse => self.in_verse = false,
            Tag::Word => {
                if let Some((strongs, text)) = self.word.take() {
                    self.push(text.trim().to_string(), strongs);
                }
            }
            Tag::Skipped => self.skip_depth = self.skip_depth.saturating_sub(1),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<XMLBIBLE biblename="fixture">
  <BIBLEBOOK bnumber="43" bname="John">
    <CHAPTER cnumber="1">
      <VERS vnumber="1"><gr str="1722">Ἐν</gr> <gr str="746">ἀρχῇ</gr> <gr str="G2258">ἦν</gr> <gr str="3588">ὁ</gr> <gr str="3056">λόγος,</gr></VERS>
      <VERS vnumber="2"><gr str="3778">οὗτος</gr> <gr str="2258">ἦν</gr> <gr str="1722">ἐν</gr> <gr str="G2316">θεοῦ</gr><NOTE>a note that is skipped</NOTE></VERS>
    </CHAPTER>
  </BIBLEBOOK>
</XMLBIBLE>"#;

    fn book(name: &str) -> BookId {
        BookId::from_name(name).unwrap()
    }

    #[test]
    fn parses_annotated_fixture() {
        let doc = parse_zefania(FIXTURE.as_bytes(), Testament::New).unwrap();
        assert_eq!(doc.books.len(), 1);
        assert_eq!(doc.books[0].book, Some(book("John")));
        assert_eq!(doc.word_count(), 9);
        assert!(doc.books[0].tokens.iter().all(|t| t.strongs.is_some()));
        assert_eq!(doc.books[0].tokens[4].surface, "λόγος,");
        assert_eq!(doc.books[0].tokens[5].verse, 2);

        let mut table = CustomKeyTable::new();
        let ing = assign_custom_keys(&doc, &mut table).unwrap();
        let john = ing.corpus.book(book("John")).unwrap();
        assert_eq!(john.len(), 9);
        assert!(table.is_empty());
        assert_eq!(john.tokens[8].key, TokenKey::real("G2316").unwrap());
        assert_eq!(john.tokens[2].key, john.tokens[6].key);
        assert_eq!(john.tokens[4].surface, "λόγος");
    }

    #[test]
    fn empty_book_has_no_tokens() {
        let xml = r#"<XMLBIBLE><BIBLEBOOK bnumber="1" bname="Genesis"></BIBLEBOOK><BIBLEBOOK bnumber="2" bname="Exodus"/></XMLBIBLE>"#;
        let doc = parse_zefania(xml.as_bytes(), Testament::Old).unwrap();
        assert_eq!(doc.books.len(), 2);
        assert!(doc.books.iter().all(|b| b.tokens.is_empty()));
    }

    #[test]
    fn malformed_xml_reports_position() {
        let xml = "<XMLBIBLE>\n<BIBLEBOOK bname=\"Genesis\">\n<CHAPTER></VERS>\n</XMLBIBLE>";
        match parse_zefania(xml.as_bytes(), Testament::Old) {
            Err(IngestError::Xml { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected XML error, got {other:?}"),
        }
        assert!(matches!(
            parse_zefania(b"just text", Testament::Old),
            Err(IngestError::Xml { .. })
        ));
        assert!(matches!(
            parse_zefania(b"<XMLBIBLE><BIBLEBOOK>", Testament::Old),
            Err(IngestError::Xml { .. })
        ));
    }

    #[test]
    fn unknown_and_deuterocanonical_books_are_excluded() {
        let xml = r#"<XMLBIBLE>
          <BIBLEBOOK bnumber="1" bname="Genesis"><CHAPTER cnumber="1"><VERS vnumber="1">ἐν ἀρχῇ</VERS></CHAPTER></BIBLEBOOK>
          <BIBLEBOOK bnumber="67" bname="Tobit"><CHAPTER cnumber="1"><VERS vnumber="1">λόγοι τωβιθ</VERS></CHAPTER></BIBLEBOOK>
          <BIBLEBOOK bnumber="40" bname="Matthew"><CHAPTER cnumber="1"><VERS vnumber="1">βίβλος</VERS></CHAPTER></BIBLEBOOK>
        </XMLBIBLE>"#;
        let doc = parse_zefania(xml.as_bytes(), Testament::Old).unwrap();
        assert_eq!(doc.books[1].book, None);
        assert_eq!(doc.books[2].book, None);
        let mut table = CustomKeyTable::new();
        let ing = assign_custom_keys(&doc, &mut table).unwrap();
        assert_eq!(ing.excluded.len(), 2);
        assert_eq!(ing.excluded[0].name, "Tobit");
        assert_eq!(ing.excluded[0].words, 2);
        // Only canon words reach the key table.
        assert_eq!(table.len(), 2);
        assert_eq!(
            ing.corpus.total_words() + ing.drops.len() + 3,
            doc.word_count()
        );
    }

    #[test]
    fn custom_keys_follow_first_appearance() {
        let xml = r#"<XMLBIBLE><BIBLEBOOK bname="Mark"><CHAPTER><VERS>ἀρχὴ τοῦ <gr str="2098">εὐαγγελίου</gr> ἀρχὴ καὶ</VERS></CHAPTER></BIBLEBOOK></XMLBIBLE>"#;
        let doc = parse_zefania(xml.as_bytes(), Testament::New).unwrap();
        let mut table = CustomKeyTable::new();
        let ing = assign_custom_keys(&doc, &mut table).unwrap();
        let keys: Vec<_> = ing
            .corpus
            .book(book("Mark"))
            .unwrap()
            .keys()
            .map(|k| k.to_string())
            .collect();
        assert_eq!(keys, ["C-1", "C-2", "G2098", "C-1", "C-3"]);
        let first = &ing.corpus.book(book("Mark")).unwrap().tokens[0];
        assert_eq!((first.chapter, first.verse), (1, 1));
    }

    #[test]
    fn custom_keys_are_shared_across_testaments() {
        let ot = r#"<XMLBIBLE><BIBLEBOOK bname="Genesis"><CHAPTER><VERS>και̃ λόγος</VERS></CHAPTER></BIBLEBOOK></XMLBIBLE>"#;
        let nt = r#"<XMLBIBLE><BIBLEBOOK bname="John"><CHAPTER><VERS>Λόγος και̃</VERS></CHAPTER></BIBLEBOOK></XMLBIBLE>"#;
        let mut table = CustomKeyTable::new();
        let o = assign_custom_keys(&parse_zefania(ot.as_bytes(), Testament::Old).unwrap(), &mut table).unwrap();
        let n = assign_custom_keys(&parse_zefania(nt.as_bytes(), Testament::New).unwrap(), &mut table).unwrap();
        let ok: Vec<_> = o.corpus.book(book("Genesis")).unwrap().keys().cloned().collect();
        let nk: Vec<_> = n.corpus.book(book("John")).unwrap().keys().cloned().collect();
        assert_eq!(ok[0], nk[1]);
        assert_eq!(ok[1], nk[0]);
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn annotated_input_leaves_table_untouched() {
        let doc = parse_zefania(FIXTURE.as_bytes(), Testament::New).unwrap();
        let mut table = CustomKeyTable::from(vec!["x".to_string()]);
        assign_custom_keys(&doc, &mut table).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.next_sequence(), 2);
    }

    #[test]
    fn punctuation_only_words_are_dropped() {
        let xml = r#"<XMLBIBLE><BIBLEBOOK bname="Jude"><CHAPTER><VERS><gr str="2455">Ἰούδας</gr> <gr str="1401">·</gr> ; λόγος</VERS></CHAPTER></BIBLEBOOK></XMLBIBLE>"#;
        let doc = parse_zefania(xml.as_bytes(), Testament::New).unwrap();
        assert_eq!(doc.word_count(), 3);
        let ing = assign_custom_keys(&doc, &mut CustomKeyTable::new()).unwrap();
        assert_eq!(ing.corpus.total_words(), 2);
        assert_eq!(ing.drops.len(), 1);
        assert_eq!(ing.drops[0].raw, "·");
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_surface("Λόγος").unwrap(), "λόγος");
        assert_eq!(normalize_surface("θεός").unwrap(), "θεός");
        // omicron + combining acute composes to the precomposed letter
        let decomposed = "λο\u{301}γος";
        assert_eq!(normalize_surface(decomposed).unwrap(), "λόγος");
        assert_eq!(normalize_surface("λόγος").unwrap(), "λόγος".nfc().collect::<String>());
        assert_eq!(normalize_surface("(ΘΕΟΣ),").unwrap(), "θεος");
        assert_eq!(normalize_surface("··"), None);
        assert_eq!(normalize_surface(""), None);
    }

    #[test]
    fn strongs_forms() {
        let g = |s: &str| normalize_strongs(s).map(|k| k.to_string());
        assert_eq!(g("2316").as_deref(), Some("G2316"));
        assert_eq!(g("G2316").as_deref(), Some("G2316"));
        assert_eq!(g("g02316").as_deref(), Some("G2316"));
        assert_eq!(g("1722 1537").as_deref(), Some("G1722"));
        assert_eq!(g("H430").as_deref(), Some("H430"));
        assert_eq!(g("0"), None);
        assert_eq!(g("  "), None);
        assert_eq!(g("C-12"), None);
    }

    #[test]
    fn reingesting_is_identical() {
        let doc = parse_zefania(FIXTURE.as_bytes(), Testament::New).unwrap();
        let a = assign_custom_keys(&doc, &mut CustomKeyTable::new()).unwrap();
        let doc2 = parse_zefania(FIXTURE.as_bytes(), Testament::New).unwrap();
        let b = assign_custom_keys(&doc2, &mut CustomKeyTable::new()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_serializes_as_surface_list() {
        let mut t = CustomKeyTable::new();
        t.key_for("α");
        t.key_for("β");
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"["α","β"]"#);
        let back: CustomKeyTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back.get("β"), Some(TokenKey::custom(2)));
    }
}
