use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::ontology::{ArticleClass, RawRelationship, RawVocabulary, RelationKind, SurfaceForm, Vocabulary};

const VERBS: &[(&str, &str, &str)] = &[
    ("take", "take", "took"),
    ("put_down", "put down", "put down"),
    ("tidy", "tidy up", "tidied up"),
    ("eat", "eat", "ate"),
    ("open", "open", "opened"),
    ("close", "close", "closed"),
    ("hold", "hold", "held"),
    ("wear", "wear", "wore"),
    ("grasp", "grasp", "grasped"),
    ("wash", "wash", "washed"),
    ("sit_on", "sit on", "sat on"),
];

const OBJECTS: &[&str] = &[
    "cup", "book", "table", "food", "door", "clothes", "doorknob", "chair", "sofa", "dish",
];

const RELATIONS: &[(&str, &str, RelationKind)] = &[
    ("on", "on", RelationKind::Spatial),
    ("holding", "holding", RelationKind::Spatial),
    ("touching", "touching", RelationKind::Spatial),
    ("sitting_on", "sitting on", RelationKind::Spatial),
    ("lying_on", "lying on", RelationKind::Spatial),
    ("left_of", "on the left of", RelationKind::Spatial),
    ("right_of", "on the right of", RelationKind::Spatial),
    ("in_front_of", "in front of", RelationKind::Spatial),
    ("behind", "behind", RelationKind::Spatial),
    ("on_the_side_of", "on the side of", RelationKind::Spatial),
    ("above", "above", RelationKind::Spatial),
    ("beneath", "beneath", RelationKind::Spatial),
    ("before", "before", RelationKind::Temporal),
    ("after", "after", RelationKind::Temporal),
    ("while", "while", RelationKind::Temporal),
];

const PREDICATES: &[(&str, &[&str])] = &[
    ("take", &["cup", "book", "food", "clothes", "dish"]),
    ("put_down", &["cup", "book", "food", "clothes", "dish"]),
    ("tidy", &["table", "clothes"]),
    ("eat", &["food"]),
    ("open", &["door", "book"]),
    ("close", &["door", "book"]),
    ("hold", &["cup", "book", "dish"]),
    ("wear", &["clothes"]),
    ("grasp", &["doorknob"]),
    ("wash", &["cup", "dish", "table"]),
    ("sit_on", &["chair", "sofa"]),
];

pub(crate) fn raw_vocab() -> RawVocabulary {
    let mut surface_forms = BTreeMap::new();
    let form = |lemma: &str, past: Option<&str>| SurfaceForm {
        lemma: lemma.to_string(),
        past: past.map(ToString::to_string),
        article: ArticleClass::The,
        transitive: true,
    };
    for (id, lemma, past) in VERBS {
        surface_forms.insert(id.to_string(), form(lemma, Some(past)));
    }
    for id in OBJECTS {
        surface_forms.insert(id.to_string(), form(id, None));
    }
    for (id, lemma, _) in RELATIONS {
        surface_forms.insert(id.to_string(), form(lemma, None));
    }
    RawVocabulary {
        verbs: VERBS.iter().map(|v| v.0.to_string()).collect(),
        objects: OBJECTS.iter().map(|o| o.to_string()).collect(),
        relationships: RELATIONS
            .iter()
            .map(|(id, _, kind)| RawRelationship { id: id.to_string(), kind: *kind })
            .collect(),
        action_predicates: PREDICATES
            .iter()
            .flat_map(|(v, os)| os.iter().map(move |o| (v.to_string(), o.to_string())))
            .collect::<Vec<_>>(),
        surface_forms,
    }
}

pub(crate) fn vocab() -> Vocabulary {
    Vocabulary::from_raw(raw_vocab()).unwrap()
}
