use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Fact, QuestionType, Tense};
use crate::ontology::Vocabulary;

/// Object with its article: `the cup`.
pub fn noun_phrase(voc: &Vocabulary, object: &str) -> String {
    let lemma = voc.lemma(object);
    match voc.article(object).word() {
        Some(a) => alloc::format!("{a} {lemma}"),
        None => lemma,
    }
}

pub fn verb_form(voc: &Vocabulary, verb: &str, tense: Tense) -> String {
    match tense {
        Tense::Past => voc.past_tense(verb),
        Tense::Base => voc.lemma(verb),
    }
}

/// `took the cup` (past) or `take the cup` (base).
pub fn render_action(voc: &Vocabulary, verb: &str, object: &str, tense: Tense) -> String {
    alloc::format!("{} {}", verb_form(voc, verb, tense), noun_phrase(voc, object))
}

pub fn render_fact(voc: &Vocabulary, fact: &Fact, tense: Tense) -> String {
    match fact {
        Fact::Action { verb, object } => render_action(voc, verb, object, tense),
        Fact::Object(o) => noun_phrase(voc, o),
    }
}

/// Inverse of [`render_fact`] over the whole vocabulary.
#[derive(Clone, Debug)]
pub struct Phrasebook {
    past: BTreeMap<String, Fact>,
    base: BTreeMap<String, Fact>,
}

impl Phrasebook {
    pub fn new(voc: &Vocabulary) -> Self {
        let mut past = BTreeMap::new();
        let mut base = BTreeMap::new();
        for o in voc.objects() {
            let f = Fact::Object(o.clone());
            past.insert(noun_phrase(voc, o), f.clone());
            base.insert(noun_phrase(voc, o), f);
        }
        for (v, o) in voc.action_predicates() {
            let f = Fact::action(v, o);
            past.insert(render_action(voc, v, o, Tense::Past), f.clone());
            base.insert(render_action(voc, v, o, Tense::Base), f);
        }
        Self { past, base }
    }

    pub fn parse(&self, phrase: &str, tense: Tense) -> Option<&Fact> {
        match tense {
            Tense::Past => self.past.get(phrase),
            Tense::Base => self.base.get(phrase),
        }
    }
}

fn is_article(w: &str) -> bool {
    matches!(w, "the" | "a" | "an")
}

/// Word sequences of every lemma of one category, longest first.
fn lemma_table<'a>(voc: &Vocabulary, ids: impl Iterator<Item = &'a String>) -> Vec<(Vec<String>, String)> {
    let mut out: Vec<(Vec<String>, String)> = ids
        .map(|id| (voc.lemma(id).split(' ').map(String::from).collect(), id.clone()))
        .collect();
    out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

struct Word<'a> {
    text: &'a str,
    /// Trailing punctuation split off the word.
    punct: &'a str,
}

fn words(raw: &str) -> Vec<Word<'_>> {
    raw.split_whitespace()
        .map(|w| {
            let cut = w.trim_end_matches(['?', '.', ',', '!']).len();
            Word {
                text: &w[..cut],
                punct: &w[cut..],
            }
        })
        .collect()
}

/// Length of the lemma in `table` matching `ws` from the start, if any. Only
/// the last matched word may carry punctuation.
fn match_at<'t>(ws: &[Word<'_>], table: &'t [(Vec<String>, String)]) -> Option<(usize, &'t str)> {
    table.iter().find_map(|(lemma, id)| {
        let n = lemma.len();
        let hit = ws.len() >= n
            && ws.iter().zip(lemma).all(|(w, l)| w.text == l)
            && ws[..n - 1].iter().all(|w| w.punct.is_empty());
        hit.then_some((n, id.as_str()))
    })
}

/// Morphology pass over an instantiated question. A verb lemma directly
/// followed by a bare object lemma is put in the question type's tense, and
/// every bare object lemma receives its article. Applying it twice changes
/// nothing.
pub fn expand_language(raw: &str, voc: &Vocabulary, qtype: QuestionType) -> String {
    let verbs = lemma_table(voc, voc.verbs().iter());
    let objects = lemma_table(voc, voc.objects().iter());
    let ws = words(raw);
    let mut out: Vec<String> = Vec::with_capacity(ws.len() + 4);
    let mut i = 0;
    while i < ws.len() {
        if let Some((nv, verb)) = match_at(&ws[i..], &verbs) {
            let verb_punct = ws[i + nv - 1].punct;
            if verb_punct.is_empty() {
                if let Some((no, object)) = match_at(&ws[i + nv..], &objects) {
                    let last = &ws[i + nv + no - 1];
                    out.push(verb_form(voc, verb, qtype.tense()));
                    out.push(alloc::format!("{}{}", noun_phrase(voc, object), last.punct));
                    i += nv + no;
                    continue;
                }
            }
        }
        if let Some((no, object)) = match_at(&ws[i..], &objects) {
            let preceded = out.last().is_some_and(|w| is_article(w));
            if !preceded {
                let last = &ws[i + no - 1];
                out.push(alloc::format!("{}{}", noun_phrase(voc, object), last.punct));
                i += no;
                continue;
            }
        }
        out.push(alloc::format!("{}{}", ws[i].text, ws[i].punct));
        i += 1;
    }
    out.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::vocab;

    #[test]
    fn tense_and_article() {
        let voc = vocab();
        assert_eq!(expand_language("take cup", &voc, QuestionType::Interaction), "took the cup");
        assert_eq!(expand_language("take cup", &voc, QuestionType::Prediction), "take the cup");
        assert_eq!(
            expand_language("What did the person do after they put down book?", &voc, QuestionType::Sequence),
            "What did the person do after they put down the book?"
        );
        assert_eq!(
            expand_language("Which object did the person take after they tidy up table?", &voc, QuestionType::Sequence),
            "Which object did the person take after they tidied up the table?"
        );
        assert_eq!(
            expand_language("What did the person do while they were on the left of sofa?", &voc, QuestionType::Interaction),
            "What did the person do while they were on the left of the sofa?"
        );
    }

    #[test]
    fn idempotent() {
        let voc = vocab();
        for raw in [
            "took the cup",
            "What did the person do with cup?",
            "What will the person do next after they put down dish?",
            "Which object is the person able to sit on when they are holding cup?",
        ] {
            for qt in QuestionType::ALL {
                let once = expand_language(raw, &voc, qt);
                assert_eq!(expand_language(&once, &voc, qt), once);
            }
        }
    }

    #[test]
    fn phrasebook_inverts_rendering() {
        let voc = vocab();
        let book = Phrasebook::new(&voc);
        for (v, o) in voc.action_predicates() {
            for tense in [Tense::Past, Tense::Base] {
                let s = render_action(&voc, v, o, tense);
                assert_eq!(book.parse(&s, tense), Some(&Fact::action(v, o)));
            }
        }
        assert_eq!(book.parse("the cup", Tense::Past), Some(&Fact::Object("cup".into())));
        assert_eq!(render_action(&voc, "tidy", "table", Tense::Past), "tidied up the table");
    }
}
