//! Token keys, tokens and per-testament corpora.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::canon::{BookId, Testament};
use crate::error::CorpusError;

const CUSTOM_PREFIX: &str = "C-";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyKind {
    Real,
    Custom,
}

/// Canonical word identity: a Strong's number such as `G2316`, or a
/// `C-<n>` key standing in for a word that carried no annotation.
///
/// Real and custom keys live in disjoint string spaces, so plain string
/// equality is the match relation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TokenKey(Box<str>);

impl TokenKey {
    pub fn real(value: &str) -> Result<TokenKey, CorpusError> {
        if value.is_empty() || value.starts_with(CUSTOM_PREFIX) {
            return Err(CorpusError::InvalidKey(value.to_string()));
        }
        Ok(TokenKey(value.into()))
    }

    pub fn custom(sequence: u32) -> TokenKey {
        TokenKey(format!("{CUSTOM_PREFIX}{sequence}").into())
    }

    pub fn kind(&self) -> KeyKind {
        if self.0.starts_with(CUSTOM_PREFIX) {
            KeyKind::Custom
        } else {
            KeyKind::Real
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TokenKey {
    type Error = CorpusError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        match s.strip_prefix(CUSTOM_PREFIX) {
            Some(seq) if !seq.is_empty() => Ok(TokenKey(s.into())),
            Some(_) => Err(CorpusError::InvalidKey(s)),
            None => TokenKey::real(&s),
        }
    }
}

impl From<TokenKey> for String {
    fn from(k: TokenKey) -> Self {
        k.0.into()
    }
}

impl fmt::Display for TokenKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One word of a book. Its offset within the book is its index in
/// [`Book::tokens`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TokenRepr", into = "TokenRepr")]
pub struct Token {
    pub key: TokenKey,
    pub surface: String,
    pub chapter: u32,
    pub verse: u32,
}

// Serialized as a compact [key, surface, chapter, verse] tuple.
#[derive(Serialize, Deserialize)]
struct TokenRepr(TokenKey, String, u32, u32);

impl From<TokenRepr> for Token {
    fn from(TokenRepr(key, surface, chapter, verse): TokenRepr) -> Self {
        Token {
            key,
            surface,
            chapter,
            verse,
        }
    }
}

impl From<Token> for TokenRepr {
    fn from(t: Token) -> Self {
        TokenRepr(t.key, t.surface, t.chapter, t.verse)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Book {
    pub id: BookId,
    pub tokens: Vec<Token>,
}

impl Book {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &TokenKey> + '_ {
        self.tokens.iter().map(|t| &t.key)
    }

    /// "chapter:verse" of the token at `offset`.
    pub fn reference(&self, offset: usize) -> Option<String> {
        self.tokens
            .get(offset)
            .map(|t| format!("{}:{}", t.chapter, t.verse))
    }
}

/// All canon books of one testament, in canon order. Books missing from the
/// source are present with no tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CorpusRepr", into = "CorpusRepr")]
pub struct Corpus {
    testament: Testament,
    books: Vec<Book>,
}

#[derive(Serialize, Deserialize)]
struct CorpusRepr {
    testament: Testament,
    books: Vec<Book>,
}

impl TryFrom<CorpusRepr> for Corpus {
    type Error = CorpusError;

    fn try_from(r: CorpusRepr) -> Result<Self, Self::Error> {
        Corpus::new(r.testament, r.books)
    }
}

impl From<Corpus> for CorpusRepr {
    fn from(c: Corpus) -> Self {
        CorpusRepr {
            testament: c.testament,
            books: c.books,
        }
    }
}

impl Corpus {
    /// Builds a corpus from books given in any order. Each canon book may
    /// appear at most once; absent books are filled in empty.
    pub fn new(testament: Testament, books: Vec<Book>) -> Result<Corpus, CorpusError> {
        let mut slots: Vec<Option<Book>> = vec![None; testament.book_count()];
        for book in books {
            if book.id.testament() != testament {
                return Err(CorpusError::WrongTestament {
                    book: book.id.name(),
                    expected: testament,
                });
            }
            let slot = &mut slots[book.id.canon_index()];
            if slot.is_some() {
                return Err(CorpusError::DuplicateBook(book.id.name()));
            }
            *slot = Some(book);
        }
        let books = testament
            .books()
            .zip(slots)
            .map(|(id, slot)| {
                slot.unwrap_or(Book {
                    id,
                    tokens: Vec::new(),
                })
            })
            .collect();
        Ok(Corpus { testament, books })
    }

    pub fn empty(testament: Testament) -> Corpus {
        Corpus::new(testament, Vec::new()).expect("empty corpus is valid")
    }

    pub fn testament(&self) -> Testament {
        self.testament
    }

    pub fn books(&self) -> &[Book] {
        &self.books
    }

    pub fn book(&self, id: BookId) -> Result<&Book, CorpusError> {
        self.check_member(id)?;
        Ok(&self.books[id.canon_index()])
    }

    pub fn book_word_count(&self, id: BookId) -> Result<usize, CorpusError> {
        self.book(id).map(Book::len)
    }

    pub fn total_words(&self) -> usize {
        self.books.iter().map(Book::len).sum()
    }

    /// Offsets `start..start + length` of a span, checked against the book.
    pub fn span_positions(
        &self,
        id: BookId,
        start: usize,
        length: usize,
    ) -> Result<Range<usize>, CorpusError> {
        let book = self.book(id)?;
        let end = start.checked_add(length);
        match end {
            Some(end) if length >= 1 && end <= book.len() => Ok(start..end),
            _ => Err(CorpusError::SpanOutOfBounds {
                book: id.name(),
                start,
                length,
                book_len: book.len(),
            }),
        }
    }

    /// Every token with its book and offset, in canon then document order.
    pub fn tokens(&self) -> impl Iterator<Item = (BookId, usize, &Token)> + '_ {
        self.books
            .iter()
            .flat_map(|b| b.tokens.iter().enumerate().map(move |(i, t)| (b.id, i, t)))
    }

    fn check_member(&self, id: BookId) -> Result<(), CorpusError> {
        if id.testament() == self.testament {
            Ok(())
        } else {
            Err(CorpusError::WrongTestament {
                book: id.name(),
                expected: self.testament,
            })
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn tok(key: &str) -> Token {
        Token {
            key: TokenKey::try_from(key.to_string()).unwrap(),
            surface: key.to_lowercase(),
            chapter: 1,
            verse: 1,
        }
    }

    fn book(name: &str, keys: &[&str]) -> Book {
        Book {
            id: BookId::from_name(name).unwrap(),
            tokens: keys.iter().map(|k| tok(k)).collect(),
        }
    }

    #[test]
    fn key_kinds_are_disjoint() {
        assert_eq!(TokenKey::real("G2316").unwrap().kind(), KeyKind::Real);
        assert_eq!(TokenKey::custom(7).kind(), KeyKind::Custom);
        assert_eq!(TokenKey::custom(7).as_str(), "C-7");
        assert!(TokenKey::real("C-7").is_err());
        assert!(TokenKey::real("").is_err());
        assert!(TokenKey::try_from("C-".to_string()).is_err());
        assert_ne!(TokenKey::real("G1").unwrap(), TokenKey::custom(1));
    }

    #[test]
    fn word_counts() {
        let john = BookId::from_name("John").unwrap();
        let c = Corpus::new(Testament::New, vec![book("John", &["G1"; 17])]).unwrap();
        assert_eq!(c.book_word_count(john).unwrap(), 17);
        let jude = BookId::from_name("Jude").unwrap();
        assert_eq!(c.book_word_count(jude).unwrap(), 0);
        let gen = BookId::from_name("Genesis").unwrap();
        assert!(matches!(
            c.book_word_count(gen),
            Err(CorpusError::WrongTestament { .. })
        ));
        assert_eq!(c.total_words(), 17);
    }

    #[test]
    fn books_are_placed_in_canon_order() {
        let c = Corpus::new(
            Testament::Old,
            vec![book("Malachi", &["G2"]), book("Genesis", &["G1"])],
        )
        .unwrap();
        assert_eq!(c.books().len(), 39);
        assert_eq!(c.books()[0].tokens[0].key.as_str(), "G1");
        assert_eq!(c.books()[38].tokens[0].key.as_str(), "G2");
        let dup = Corpus::new(
            Testament::Old,
            vec![book("Genesis", &["G1"]), book("Genesis", &["G1"])],
        );
        assert!(matches!(dup, Err(CorpusError::DuplicateBook(_))));
        let wrong = Corpus::new(Testament::Old, vec![book("Mark", &["G1"])]);
        assert!(matches!(wrong, Err(CorpusError::WrongTestament { .. })));
    }

    #[test]
    fn spans() {
        let mark = BookId::from_name("Mark").unwrap();
        let c = Corpus::new(Testament::New, vec![book("Mark", &["G1"; 12])]).unwrap();
        assert_eq!(c.span_positions(mark, 0, 5).unwrap(), 0..5);
        assert_eq!(c.span_positions(mark, 10, 1).unwrap().collect::<Vec<_>>(), vec![10]);
        assert_eq!(c.span_positions(mark, 3, 7).unwrap(), 3..10);
        assert!(c.span_positions(mark, 8, 5).is_err());
        assert!(c.span_positions(mark, 0, 0).is_err());
        assert!(c.span_positions(mark, usize::MAX, 2).is_err());
    }

    #[test]
    fn token_iteration_follows_document_order() {
        let c = Corpus::new(
            Testament::New,
            vec![book("Mark", &["G1", "G2"]), book("Matthew", &["G3"])],
        )
        .unwrap();
        let seen: Vec<_> = c
            .tokens()
            .map(|(b, i, t)| (b.canon_index(), i, t.key.to_string()))
            .collect();
        assert_eq!(
            seen,
            vec![
                (0, 0, "G3".to_string()),
                (1, 0, "G1".to_string()),
                (1, 1, "G2".to_string())
            ]
        );
    }

    #[test]
    fn serde_round_trip_validates() {
        let c = Corpus::new(Testament::New, vec![book("Mark", &["G1", "C-3"])]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: Corpus = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let bad = json.replacen("\"NT\"", "\"OT\"", 1);
        assert!(serde_json::from_str::<Corpus>(&bad).is_err());
    }
}
