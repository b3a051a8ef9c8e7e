//! JSON file formats.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use situ_core::hypergraph::HypergraphDoc;
use situ_core::ontology::RawVocabulary;
use situ_core::qagen::QuestionTemplate;
use situ_core::{QAItem, SituationHypergraph, Vocabulary};

use crate::error::{Error, Result};

/// Vocabulary shipped with the crate.
pub const BUNDLED_VOCABULARY: &str = include_str!("../data/vocabulary.json");
/// Template library shipped with the crate.
pub const BUNDLED_TEMPLATES: &str = include_str!("../data/templates.json");

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

/// Pretty-printed, newline-terminated.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let io = |source| Error::Io {
        path: path.into(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

pub fn parse_vocabulary(text: &str, origin: &Path) -> Result<Vocabulary> {
    let raw: RawVocabulary = serde_json::from_str(text).map_err(|source| Error::Json {
        path: origin.into(),
        source,
    })?;
    Vocabulary::from_raw(raw).map_err(|e| Error::data(origin, e))
}

pub fn load_vocabulary(path: Option<&Path>) -> Result<Vocabulary> {
    match path {
        Some(p) => {
            let raw: RawVocabulary = read_json(p)?;
            Vocabulary::from_raw(raw).map_err(|e| Error::data(p, e))
        }
        None => parse_vocabulary(BUNDLED_VOCABULARY, Path::new("<bundled vocabulary>")),
    }
}

pub fn load_templates(path: Option<&Path>) -> Result<Vec<QuestionTemplate>> {
    match path {
        Some(p) => read_json(p),
        None => serde_json::from_str(BUNDLED_TEMPLATES).map_err(|source| Error::Json {
            path: "<bundled templates>".into(),
            source,
        }),
    }
}

pub fn load_situations(path: &Path, voc: &Vocabulary) -> Result<Vec<SituationHypergraph>> {
    let docs: Vec<HypergraphDoc> = read_json(path)?;
    docs.into_iter()
        .map(|d| {
            let id = d.id.clone();
            SituationHypergraph::from_doc(d, voc).map_err(|e| Error::data(path, format!("situation {id}: {e}")))
        })
        .collect()
}

pub fn save_situations<'a>(path: &Path, graphs: impl IntoIterator<Item = &'a SituationHypergraph>) -> Result<()> {
    let docs: Vec<HypergraphDoc> = graphs.into_iter().map(SituationHypergraph::to_doc).collect();
    write_json(path, &docs)
}

pub fn load_items(path: &Path) -> Result<Vec<QAItem>> {
    read_json(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub choice: usize,
}

pub fn load_predictions(path: &Path) -> Result<BTreeMap<String, usize>> {
    let records: Vec<Prediction> = read_json(path)?;
    Ok(records.into_iter().map(|p| (p.id, p.choice)).collect())
}

/// File names inside a generation output directory.
pub mod layout {
    pub const ITEMS: &str = "qa.json";
    pub const GROUND_TRUTH: &str = "ground_truth.json";
    pub const SHIPPED: &str = "shipped.json";
}
