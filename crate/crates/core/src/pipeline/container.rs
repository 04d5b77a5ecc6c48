//! The ingested-corpus container written by the `ingest` stage.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canon::Testament;
use crate::corpus::Corpus;
use crate::error::IngestError;
use crate::ingest::{assign_custom_keys, parse_zefania, CustomKeyTable, DropRecord, ExcludedBook};

pub const FORMAT: &str = "intertext-corpus";
pub const VERSION: u32 = 1;

/// Provenance of one testament's input file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub testament: Testament,
    /// File name only, so the container does not depend on where inputs live.
    pub file: String,
    pub sha256: String,
    /// Canon words kept after normalization.
    pub word_count: usize,
    /// Word tokens seen in the XML, including dropped and excluded ones.
    pub tokens: usize,
    pub drops: Vec<DropRecord>,
    pub excluded_books: Vec<ExcludedBook>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub format: String,
    pub version: u32,
    pub custom_keys: CustomKeyTable,
    pub sources: Vec<SourceInfo>,
    pub ot: Corpus,
    pub nt: Corpus,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl CorpusFile {
    /// Parses both XML documents and keys them with one shared custom-key
    /// table, OT first.
    pub fn from_xml(
        ot_name: &str,
        ot_xml: &[u8],
        nt_name: &str,
        nt_xml: &[u8],
    ) -> Result<CorpusFile, IngestError> {
        let mut table = CustomKeyTable::new();
        let mut sources = Vec::with_capacity(2);
        let mut corpora = Vec::with_capacity(2);
        for (testament, name, xml) in [
            (Testament::Old, ot_name, ot_xml),
            (Testament::New, nt_name, nt_xml),
        ] {
            let doc = parse_zefania(xml, testament)?;
            let ingested = assign_custom_keys(&doc, &mut table)?;
            sources.push(SourceInfo {
                testament,
                file: name.to_string(),
                sha256: sha256_hex(xml),
                word_count: ingested.corpus.total_words(),
                tokens: doc.word_count(),
                drops: ingested.drops,
                excluded_books: ingested.excluded,
            });
            corpora.push(ingested.corpus);
        }
        let nt = corpora.pop().expect("two corpora");
        let ot = corpora.pop().expect("two corpora");
        Ok(CorpusFile {
            format: FORMAT.to_string(),
            version: VERSION,
            custom_keys: table,
            sources,
            ot,
            nt,
        })
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("corpus serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<CorpusFile, IngestError> {
        let file: CorpusFile =
            serde_json::from_slice(bytes).map_err(|e| IngestError::Container(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(IngestError::Container(format!(
                "expected {FORMAT} version {VERSION}, got {} version {}",
                file.format, file.version
            )));
        }
        if file.ot.testament() != Testament::Old || file.nt.testament() != Testament::New {
            return Err(IngestError::Container("testaments are swapped".into()));
        }
        Ok(file)
    }

    pub fn source(&self, testament: Testament) -> Option<&SourceInfo> {
        self.sources.iter().find(|s| s.testament == testament)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OT: &str = r#"<XMLBIBLE><BIBLEBOOK bnumber="1" bname="Genesis"><CHAPTER cnumber="1">
        <VERS vnumber="1"><gr str="1722">ἐν</gr> ἀρχῇ <gr str="2316">θεός</gr></VERS>
        </CHAPTER></BIBLEBOOK>
        <BIBLEBOOK bnumber="70" bname="Tobit"><CHAPTER cnumber="1"><VERS vnumber="1">λόγοι</VERS></CHAPTER></BIBLEBOOK>
        </XMLBIBLE>"#;
    const NT: &str = r#"<XMLBIBLE><BIBLEBOOK bnumber="43" bname="John"><CHAPTER cnumber="1">
        <VERS vnumber="1"><gr str="1722">Ἐν</gr> ἀρχῇ ἦν</VERS>
        </CHAPTER></BIBLEBOOK></XMLBIBLE>"#;

    #[test]
    fn builds_and_round_trips() {
        let c = CorpusFile::from_xml("lxx.xml", OT.as_bytes(), "nt.xml", NT.as_bytes()).unwrap();
        assert_eq!(c.custom_keys.len(), 2); // ἀρχῇ shared, ἦν new
        let ot = c.source(Testament::Old).unwrap();
        assert_eq!(ot.word_count, 3);
        assert_eq!(ot.tokens, 4);
        assert_eq!(ot.excluded_books.len(), 1);
        assert_eq!(ot.sha256.len(), 64);
        let john = &c.nt.books()[3];
        assert_eq!(john.tokens[1].key.as_str(), "C-1");
        assert_eq!(john.tokens[2].key.as_str(), "C-2");

        let back = CorpusFile::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn rejects_foreign_json() {
        assert!(CorpusFile::from_json(b"{}").is_err());
        let c = CorpusFile::from_xml("a", OT.as_bytes(), "b", NT.as_bytes()).unwrap();
        let text = String::from_utf8(c.to_json()).unwrap().replacen("\"version\":1", "\"version\":9", 1);
        assert!(matches!(
            CorpusFile::from_json(text.as_bytes()),
            Err(IngestError::Container(_))
        ));
    }

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
