//! The closed vocabulary: verbs, object classes, relationship predicates and
//! the legal verb-object action predicates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Marker class used for person nodes. Never a member of `objects`.
pub const PERSON: &str = "person";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Spatial,
    Temporal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticleClass {
    #[default]
    The,
    A,
    An,
    None,
}

impl ArticleClass {
    pub fn word(self) -> Option<&'static str> {
        match self {
            ArticleClass::The => Some("the"),
            ArticleClass::A => Some("a"),
            ArticleClass::An => Some("an"),
            ArticleClass::None => None,
        }
    }
}

/// English rendering of one identifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceForm {
    pub lemma: String,
    /// Past tense for verbs. Defaults to `lemma + "ed"` on the head word.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub past: Option<String>,
    #[serde(default)]
    pub article: ArticleClass,
    #[serde(default = "default_true")]
    pub transitive: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRelationship {
    pub id: String,
    pub kind: RelationKind,
}

/// Vocabulary document as written on disk, before validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVocabulary {
    pub verbs: Vec<String>,
    pub objects: Vec<String>,
    pub relationships: Vec<RawRelationship>,
    pub action_predicates: Vec<(String, String)>,
    pub surface_forms: BTreeMap<String, SurfaceForm>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VocabularyError {
    #[error("empty category: {0}")]
    EmptyCategory(&'static str),
    #[error("duplicate identifier `{id}` in {category}")]
    Duplicate { category: &'static str, id: String },
    #[error("malformed identifier `{0}` (expected lowercase snake_case ascii)")]
    MalformedId(String),
    #[error("action predicate ({verb}, {object}) references unknown {missing}")]
    DanglingComposition {
        verb: String,
        object: String,
        missing: &'static str,
    },
    #[error("missing surface form for `{0}`")]
    MissingSurfaceForm(String),
    #[error("surface form given for unknown identifier `{0}`")]
    OrphanSurfaceForm(String),
    #[error("unknown verb `{0}`")]
    UnknownVerb(String),
}

/// Validated, immutable vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    verbs: BTreeSet<String>,
    objects: BTreeSet<String>,
    relationships: BTreeMap<String, RelationKind>,
    action_predicates: BTreeSet<(String, String)>,
    surface_forms: BTreeMap<String, SurfaceForm>,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Vocabulary {
    pub fn from_raw(raw: RawVocabulary) -> Result<Self, VocabularyError> {
        if raw.verbs.is_empty() {
            return Err(VocabularyError::EmptyCategory("verbs"));
        }
        if raw.objects.is_empty() {
            return Err(VocabularyError::EmptyCategory("objects"));
        }
        if raw.relationships.is_empty() {
            return Err(VocabularyError::EmptyCategory("relationships"));
        }
        if raw.action_predicates.is_empty() {
            return Err(VocabularyError::EmptyCategory("action_predicates"));
        }

        // Identifiers share one surface-form namespace, so they must be unique
        // across categories as well as within them.
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut claim = |category: &'static str, id: &str| -> Result<(), VocabularyError> {
            if !is_identifier(id) || id == PERSON {
                return Err(VocabularyError::MalformedId(id.to_string()));
            }
            if !seen.insert(id.to_string()) {
                return Err(VocabularyError::Duplicate {
                    category,
                    id: id.to_string(),
                });
            }
            Ok(())
        };
        for v in &raw.verbs {
            claim("verbs", v)?;
        }
        for o in &raw.objects {
            claim("objects", o)?;
        }
        for r in &raw.relationships {
            claim("relationships", &r.id)?;
        }

        let verbs: BTreeSet<String> = raw.verbs.into_iter().collect();
        let objects: BTreeSet<String> = raw.objects.into_iter().collect();
        let relationships: BTreeMap<String, RelationKind> =
            raw.relationships.into_iter().map(|r| (r.id, r.kind)).collect();

        let mut action_predicates = BTreeSet::new();
        for (verb, object) in raw.action_predicates {
            let missing = if !verbs.contains(&verb) {
                Some("verb")
            } else if !objects.contains(&object) {
                Some("object")
            } else {
                None
            };
            if let Some(missing) = missing {
                return Err(VocabularyError::DanglingComposition {
                    verb,
                    object,
                    missing,
                });
            }
            if !action_predicates.insert((verb.clone(), object.clone())) {
                return Err(VocabularyError::Duplicate {
                    category: "action_predicates",
                    id: alloc::format!("{verb}/{object}"),
                });
            }
        }

        let all_ids = verbs
            .iter()
            .chain(objects.iter())
            .chain(relationships.keys());
        for id in all_ids {
            if !raw.surface_forms.contains_key(id) {
                return Err(VocabularyError::MissingSurfaceForm(id.clone()));
            }
        }
        for id in raw.surface_forms.keys() {
            if !verbs.contains(id) && !objects.contains(id) && !relationships.contains_key(id) {
                return Err(VocabularyError::OrphanSurfaceForm(id.clone()));
            }
        }

        Ok(Self {
            verbs,
            objects,
            relationships,
            action_predicates,
            surface_forms: raw.surface_forms,
        })
    }

    pub fn to_raw(&self) -> RawVocabulary {
        RawVocabulary {
            verbs: self.verbs.iter().cloned().collect(),
            objects: self.objects.iter().cloned().collect(),
            relationships: self
                .relationships
                .iter()
                .map(|(id, kind)| RawRelationship {
                    id: id.clone(),
                    kind: *kind,
                })
                .collect(),
            action_predicates: self.action_predicates.iter().cloned().collect(),
            surface_forms: self.surface_forms.clone(),
        }
    }

    pub fn verbs(&self) -> &BTreeSet<String> {
        &self.verbs
    }

    pub fn objects(&self) -> &BTreeSet<String> {
        &self.objects
    }

    pub fn relationships(&self) -> &BTreeMap<String, RelationKind> {
        &self.relationships
    }

    pub fn action_predicates(&self) -> &BTreeSet<(String, String)> {
        &self.action_predicates
    }

    pub fn surface_form(&self, id: &str) -> Option<&SurfaceForm> {
        self.surface_forms.get(id)
    }

    pub fn surface_forms(&self) -> &BTreeMap<String, SurfaceForm> {
        &self.surface_forms
    }

    pub fn is_verb(&self, id: &str) -> bool {
        self.verbs.contains(id)
    }

    pub fn is_object(&self, id: &str) -> bool {
        self.objects.contains(id)
    }

    pub fn relation_kind(&self, id: &str) -> Option<RelationKind> {
        self.relationships.get(id).copied()
    }

    /// True iff `(verb, object)` is a legal action predicate. Unknown ids are
    /// simply not legal.
    pub fn validate_composition(&self, verb: &str, object: &str) -> bool {
        // BTreeSet<(String, String)> cannot be probed with borrowed strs, so
        // walk the verb's range instead.
        self.compositions_iter(verb).any(|o| o == object)
    }

    pub fn compositions_of(&self, verb: &str) -> Result<BTreeSet<String>, VocabularyError> {
        if !self.verbs.contains(verb) {
            return Err(VocabularyError::UnknownVerb(verb.to_string()));
        }
        Ok(self.compositions_iter(verb).map(ToString::to_string).collect())
    }

    /// Verbs that compose with `object`.
    pub fn verbs_of(&self, object: &str) -> BTreeSet<String> {
        self.action_predicates
            .iter()
            .filter(|(_, o)| o == object)
            .map(|(v, _)| v.clone())
            .collect()
    }

    fn compositions_iter<'a>(&'a self, verb: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let start = (verb.to_string(), String::new());
        self.action_predicates
            .range(start..)
            .take_while(move |(v, _)| v == verb)
            .map(|(_, o)| o.as_str())
    }

    /// Lemma of `id`, falling back to the id with underscores as spaces.
    pub fn lemma(&self, id: &str) -> String {
        match self.surface_forms.get(id) {
            Some(sf) => sf.lemma.clone(),
            None => id.replace('_', " "),
        }
    }

    pub fn past_tense(&self, verb: &str) -> String {
        let sf = self.surface_forms.get(verb);
        if let Some(past) = sf.and_then(|sf| sf.past.clone()) {
            return past;
        }
        let lemma = self.lemma(verb);
        let mut words = lemma.splitn(2, ' ');
        let head = words.next().unwrap_or_default();
        let rest = words.next();
        let head_past = if head.ends_with('e') {
            alloc::format!("{head}d")
        } else {
            alloc::format!("{head}ed")
        };
        match rest {
            Some(rest) => alloc::format!("{head_past} {rest}"),
            None => head_past,
        }
    }

    pub fn article(&self, object: &str) -> ArticleClass {
        self.surface_forms
            .get(object)
            .map(|sf| sf.article)
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sf(lemma: &str) -> SurfaceForm {
        SurfaceForm {
            lemma: lemma.into(),
            past: None,
            article: ArticleClass::The,
            transitive: true,
        }
    }

    fn tiny() -> RawVocabulary {
        let mut surface_forms = BTreeMap::new();
        for id in ["grasp", "take", "doorknob", "cup", "on"] {
            surface_forms.insert(id.to_string(), sf(id));
        }
        RawVocabulary {
            verbs: vec!["grasp".into(), "take".into()],
            objects: vec!["doorknob".into(), "cup".into()],
            relationships: vec![RawRelationship {
                id: "on".into(),
                kind: RelationKind::Spatial,
            }],
            action_predicates: vec![
                ("grasp".into(), "doorknob".into()),
                ("take".into(), "cup".into()),
            ],
            surface_forms,
        }
    }

    #[test]
    fn loads_tiny() {
        let voc = Vocabulary::from_raw(tiny()).unwrap();
        assert!(voc.validate_composition("grasp", "doorknob"));
        assert!(!voc.validate_composition("grasp", "cup"));
        assert!(!voc.validate_composition("fly", "cup"));
        assert_eq!(
            voc.compositions_of("grasp").unwrap(),
            ["doorknob".to_string()].into_iter().collect()
        );
        assert!(matches!(
            voc.compositions_of("fly"),
            Err(VocabularyError::UnknownVerb(_))
        ));
    }

    #[test]
    fn empty_verbs() {
        let mut raw = tiny();
        raw.verbs.clear();
        let err = Vocabulary::from_raw(raw).unwrap_err();
        assert_eq!(err.to_string(), "empty category: verbs");
    }

    #[test]
    fn dangling_composition() {
        let mut raw = tiny();
        raw.objects.retain(|o| o != "doorknob");
        raw.surface_forms.remove("doorknob");
        assert!(matches!(
            Vocabulary::from_raw(raw),
            Err(VocabularyError::DanglingComposition { missing: "object", .. })
        ));
    }

    #[test]
    fn duplicates_rejected() {
        let mut raw = tiny();
        raw.objects.push("cup".into());
        assert!(matches!(
            Vocabulary::from_raw(raw),
            Err(VocabularyError::Duplicate { category: "objects", .. })
        ));

        let mut raw = tiny();
        raw.objects.push("take".into());
        assert!(matches!(
            Vocabulary::from_raw(raw),
            Err(VocabularyError::Duplicate { .. })
        ));
    }

    #[test]
    fn surface_form_coverage() {
        let mut raw = tiny();
        raw.surface_forms.remove("cup");
        assert_eq!(
            Vocabulary::from_raw(raw).unwrap_err(),
            VocabularyError::MissingSurfaceForm("cup".into())
        );
        let mut raw = tiny();
        raw.surface_forms.insert("ghost".into(), sf("ghost"));
        assert!(matches!(
            Vocabulary::from_raw(raw),
            Err(VocabularyError::OrphanSurfaceForm(_))
        ));
    }

    #[test]
    fn regular_past_tense() {
        let mut raw = tiny();
        raw.surface_forms.get_mut("take").unwrap().past = Some("took".into());
        let voc = Vocabulary::from_raw(raw).unwrap();
        assert_eq!(voc.past_tense("take"), "took");
        assert_eq!(voc.past_tense("grasp"), "grasped");
    }
}
