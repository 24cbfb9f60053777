mod common;

use chrono::{TimeZone, Utc};

use eoqa::annotate::{annotate, Comparator, HeuristicClassifier, LinkOrigin, MentionKind, SpatialFunction};
use eoqa::kgstore::Iri;
use eoqa::nlp::{parse_dependencies, tokenize_and_tag, Pos};

use common::{engine, eo, eor, RUNNING_EXAMPLE};

fn annotated(q: &str) -> eoqa::annotate::AnnotationSet {
    let g = parse_dependencies(&tokenize_and_tag(q).unwrap());
    annotate(q, &g, engine().kg(), &HeuristicClassifier)
}

#[test]
fn units_and_percent_split_from_numbers() {
    let toks = tokenize_and_tag("less than 2km away, under 10%").unwrap();
    let pairs: Vec<(&str, Pos)> = toks.iter().map(|t| (t.surface.as_str(), t.pos)).collect();
    assert_eq!(&pairs[..4], &[("less", Pos::Adv), ("than", Pos::Adp), ("2", Pos::Num), ("km", Pos::Noun)]);
    assert_eq!(pairs[pairs.len() - 2].0, "10");
    assert_eq!(pairs[pairs.len() - 1].0, "%");
}

#[test]
fn emilia_romagna_is_the_top_label_hit() {
    let hits = engine().kg().store.lookup_label("Emilia Romagna", 3);
    assert_eq!(hits[0].iri, eor("Emilia-Romagna"));
    assert!(hits.windows(2).all(|w| w[0].score >= w[1].score));
}

#[test]
fn running_example_mentions() {
    let set = annotated(RUNNING_EXAMPLE);
    let instances: Vec<&Iri> = set
        .mentions
        .iter()
        .filter(|m| m.kind == MentionKind::Instance)
        .map(|m| &m.target)
        .collect();
    assert_eq!(instances, vec![&eor("Emilia-Romagna")]);
    let concepts: Vec<Iri> = set
        .mentions
        .iter()
        .filter(|m| m.kind == MentionKind::Concept)
        .map(|m| m.target.clone())
        .collect();
    for c in ["Image", "River", "Town", "Forest"] {
        assert!(concepts.contains(&eo(c)), "{c} missing from {concepts:?}");
    }
    // "region" merged into the instance rather than kept as a concept.
    assert!(!concepts.contains(&eo("Region")));
}

#[test]
fn running_example_relations_and_constraints() {
    let set = annotated(RUNNING_EXAMPLE);
    let target_of = |id: usize| set.mentions.iter().find(|m| m.id == id).unwrap().target.clone();
    let distances: Vec<_> = set
        .spatial_links
        .iter()
        .filter(|l| l.function == SpatialFunction::Distance)
        .collect();
    assert_eq!(distances.len(), 2);
    for l in &distances {
        let d = l.distance.unwrap();
        assert_eq!((d.comparator, d.metres), (Comparator::Lt, 2000.0));
        assert_eq!(target_of(l.arg1), eo("River"));
    }
    let within_region = set
        .spatial_links
        .iter()
        .filter(|l| l.function == SpatialFunction::Within && target_of(l.arg2) == eor("Emilia-Romagna"))
        .count();
    assert_eq!(within_region, 3);
    assert!(set.spatial_links.iter().any(|l| l.origin == LinkOrigin::ImageLinkage));

    let cloud = set.numeric.iter().find(|n| n.value == 10.0).unwrap();
    assert_eq!(cloud.comparator, Comparator::Lt);
    let t = &set.temporal[0];
    assert_eq!(t.start, Some(Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap()));
    assert_eq!(t.end, Some(Utc.with_ymd_and_hms(2021, 2, 1, 0, 0, 0).unwrap()));
    assert!(set.validate().is_ok());
}

#[test]
fn annotation_serializes_deterministically() {
    let a = serde_json::to_string(&annotated(RUNNING_EXAMPLE)).unwrap();
    let b = serde_json::to_string(&annotated(RUNNING_EXAMPLE)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_words_produce_no_instances() {
    let set = annotated("Which qwzx are in Blorptania?");
    assert!(set.mentions.iter().all(|m| m.kind != MentionKind::Instance));
}
