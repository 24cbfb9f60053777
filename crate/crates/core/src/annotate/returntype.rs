use super::entities::{default_property, eo_property, is_a, is_numeric_property};
use super::{AnnotationSet, MentionKind, QuestionForm, ReturnType};
use crate::kgstore::{vocab, Iri, Ontology};
use crate::nlp::{DepGraph, Pos};

const ASK_OPENERS: &[&str] = &[
    "is", "are", "does", "do", "was", "were", "can", "has", "have", "did",
];
const LOCATION_WORDS: &[&str] = &["coordinates", "coordinate", "location", "geometry", "footprint"];

/// Decides the question form and the expected answer types.
pub trait ReturnTypeClassifier: Send + Sync {
    fn classify(&self, g: &DepGraph, ontology: &Ontology, set: &AnnotationSet) -> (QuestionForm, Vec<ReturnType>);
}

/// Keyword and mention-order rules.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicClassifier;

impl ReturnTypeClassifier for HeuristicClassifier {
    fn classify(&self, g: &DepGraph, ontology: &Ontology, set: &AnnotationSet) -> (QuestionForm, Vec<ReturnType>) {
        let words: Vec<String> = g.tokens.iter().map(|t| t.surface.to_lowercase()).collect();
        let first = words.first().map(String::as_str).unwrap_or("");
        if ASK_OPENERS.contains(&first) {
            return (QuestionForm::Ask, vec![ReturnType::Name]);
        }
        let pair = |a: &str, b: &str| words.windows(2).any(|w| w[0] == a && w[1] == b);
        let explicit_property = set.mentions.iter().any(|m| m.kind == MentionKind::Property && !m.synthetic);
        let count_word = words.iter().any(|w| w == "count" || w == "number") && !explicit_property;
        if pair("how", "many") || count_word {
            return (QuestionForm::Select, vec![ReturnType::NumberCount]);
        }
        let how_adj = words
            .iter()
            .position(|w| w == "how")
            .is_some_and(|i| g.tokens.get(i + 1).is_some_and(|t| t.pos == Pos::Adj || words[i + 1] == "much"));
        if how_adj {
            return (QuestionForm::Select, vec![ReturnType::NumberProperty]);
        }
        if first == "where" || words.iter().any(|w| LOCATION_WORDS.contains(&w.as_str())) {
            return (QuestionForm::Select, vec![ReturnType::Coordinates]);
        }
        let ordered = set.mentions_in_order();
        if let Some(m) = ordered.first() {
            if m.kind == MentionKind::Property && !m.synthetic && is_numeric_property(ontology, &m.target) {
                return (QuestionForm::Select, vec![ReturnType::NumberProperty]);
            }
        }
        let first_concept = ordered.iter().find(|m| m.is_geo());
        if first_concept.is_some_and(|m| is_a(ontology, m.class.as_ref(), "Image")) {
            return (QuestionForm::Select, vec![ReturnType::Image]);
        }
        (QuestionForm::Select, vec![ReturnType::Name])
    }
}

fn how_property(word: &str) -> Option<&'static str> {
    Some(match word {
        "long" | "short" => "length",
        "big" | "large" | "small" | "wide" => "area",
        "populous" | "populated" => "population",
        "cloudy" => "cloudCover",
        "snowy" => "snowCover",
        "recent" | "old" | "new" => "timestamp",
        _ => return None,
    })
}

/// Runs the classifier and adds the synthetic properties the chosen
/// return type projects.
pub(crate) fn identify_return_type(
    g: &DepGraph,
    ontology: &Ontology,
    classifier: &dyn ReturnTypeClassifier,
    set: &mut AnnotationSet,
) {
    let (form, types) = classifier.classify(g, ontology, set);
    set.form = form;
    set.return_types = types.clone();
    let first_geo = set.mentions_in_order().into_iter().find(|m| m.is_geo()).map(|m| (m.id, m.head, m.class.clone()));
    match types.first() {
        Some(ReturnType::Image) => {
            if let Some((id, head, _)) = first_geo {
                set.ensure_property(id, &Iri::from_static(vocab::EO_LINK), head);
            }
        }
        Some(ReturnType::NumberProperty) => {
            let explicit = set.mentions.iter().any(|m| m.kind == MentionKind::Property && !m.synthetic);
            if explicit {
                return;
            }
            let Some((id, head, Some(class))) = first_geo else {
                set.note("returntype", "no feature to read a number from");
                return;
            };
            let adj = g
                .tokens
                .iter()
                .position(|t| t.surface.eq_ignore_ascii_case("how"))
                .and_then(|i| g.tokens.get(i + 1))
                .and_then(|t| how_property(&t.surface.to_lowercase()));
            let prop = adj
                .and_then(|p| eo_property(ontology, p))
                .filter(|p| ontology.properties_of(&class).iter().any(|q| &q.iri == p))
                .or_else(|| default_property(ontology, &class));
            match prop {
                Some(p) => {
                    set.ensure_property(id, &p, head);
                }
                None => set.note("returntype", "no numeric property to return"),
            }
        }
        _ => {}
    }
}
