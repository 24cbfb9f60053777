use chrono::{DateTime, NaiveDate, Utc};

use super::{score, AnnotationSet, TemporalConstraint};
use crate::kgstore::{vocab, Iri, Ontology};
use crate::nlp::{is_iso_date, is_unit, month_number, DepGraph, Pos, Token};

/// A recognized calendar period: `[start, end)` in whole days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateSpan {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub tokens: usize,
}

fn midnight(d: NaiveDate) -> DateTime<Utc> {
    d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

fn ymd(y: i32, m: u32, d: u32) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(y, m, d)
}

fn month_span(y: i32, m: u32) -> Option<(NaiveDate, NaiveDate)> {
    let start = ymd(y, m, 1)?;
    let end = if m == 12 { ymd(y + 1, 1, 1)? } else { ymd(y, m + 1, 1)? };
    Some((start, end))
}

fn year_of(t: &Token) -> Option<i32> {
    if t.pos != Pos::Num || t.surface.len() != 4 {
        return None;
    }
    t.surface.parse::<i32>().ok().filter(|y| (1900..=2100).contains(y))
}

fn month_of(t: &Token) -> Option<u32> {
    let full = crate::nlp::MONTHS.contains(&t.surface.to_lowercase().as_str());
    if t.pos == Pos::Propn || full {
        month_number(&t.surface)
    } else {
        None
    }
}

fn day_of(t: &Token) -> Option<u32> {
    if t.pos != Pos::Num || t.surface.len() > 2 {
        return None;
    }
    t.surface.parse::<u32>().ok().filter(|d| (1..=31).contains(d))
}

fn season(word: &str, y: i32) -> Option<(NaiveDate, NaiveDate)> {
    match word {
        "spring" => Some((ymd(y, 3, 1)?, ymd(y, 6, 1)?)),
        "summer" => Some((ymd(y, 6, 1)?, ymd(y, 9, 1)?)),
        "autumn" | "fall" => Some((ymd(y, 9, 1)?, ymd(y, 12, 1)?)),
        "winter" => Some((ymd(y, 12, 1)?, ymd(y + 1, 3, 1)?)),
        _ => None,
    }
}

/// The calendar expression starting at token `i`, if any.
pub fn date_at(toks: &[Token], i: usize) -> Option<DateSpan> {
    let t = toks.get(i)?;
    let at = |k: usize| toks.get(k);
    let span = |(start, end): (NaiveDate, NaiveDate), tokens: usize| DateSpan { start, end, tokens };
    if is_iso_date(&t.surface) {
        let y: i32 = t.surface[0..4].parse().ok()?;
        let m: u32 = t.surface[5..7].parse().ok()?;
        if t.surface.len() == 10 {
            let d = ymd(y, m, t.surface[8..10].parse().ok()?)?;
            return Some(span((d, d.succ_opt()?), 1));
        }
        return Some(span(month_span(y, m)?, 1));
    }
    if let (Some(d), Some(m), Some(y)) = (
        day_of(t),
        at(i + 1).and_then(month_of),
        at(i + 2).and_then(year_of),
    ) {
        let day = ymd(y, m, d)?;
        return Some(span((day, day.succ_opt()?), 3));
    }
    if let Some(m) = month_of(t) {
        if let Some(d) = at(i + 1).and_then(day_of) {
            let comma = at(i + 2).is_some_and(|c| c.surface == ",");
            let yi = if comma { i + 3 } else { i + 2 };
            if let Some(y) = at(yi).and_then(year_of) {
                let day = ymd(y, m, d)?;
                return Some(span((day, day.succ_opt()?), yi - i + 1));
            }
        }
        if let Some(y) = at(i + 1).and_then(year_of) {
            return Some(span(month_span(y, m)?, 2));
        }
        return None;
    }
    if let Some(y) = at(i + 1).and_then(year_of) {
        if let Some(s) = season(&t.surface.to_lowercase(), y) {
            return Some(span(s, 2));
        }
    }
    if let Some(y) = year_of(t) {
        if at(i + 1).is_some_and(|n| is_unit(&n.surface)) {
            return None;
        }
        return Some(span((ymd(y, 1, 1)?, ymd(y + 1, 1, 1)?), 1));
    }
    None
}

/// Rule-based recognition of dates, months, seasons, years and
/// `between`/`before`/`after`/`since`/`until` ranges.
pub fn identify_temporal(g: &DepGraph, set: &mut AnnotationSet) -> Vec<TemporalConstraint> {
    let toks = &g.tokens;
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let word = toks[i].surface.to_lowercase();
        let text = |a: usize, b: usize| {
            toks[a..=b]
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let range = |first: usize| -> Option<(DateSpan, usize, DateSpan)> {
            let a = date_at(toks, first)?;
            let joiner = first + a.tokens;
            let b = date_at(toks, joiner + 1)?;
            Some((a, joiner, b))
        };
        let found = match word.as_str() {
            "between" | "from" => range(i + 1).and_then(|(a, joiner, b)| {
                let j = toks[joiner].surface.to_lowercase();
                let ok = if word == "between" {
                    j == "and"
                } else {
                    matches!(j.as_str(), "to" | "until" | "till")
                };
                ok.then(|| (Some(a.start), Some(b.end), joiner + b.tokens - i))
            }),
            _ => None,
        };
        let found = found.or_else(|| match word.as_str() {
            "before" => date_at(toks, i + 1).map(|d| (None, Some(d.start), d.tokens)),
            "after" => date_at(toks, i + 1).map(|d| (Some(d.end), None, d.tokens)),
            "since" | "from" => date_at(toks, i + 1).map(|d| (Some(d.start), None, d.tokens)),
            "until" | "till" => date_at(toks, i + 1).map(|d| (None, Some(d.end), d.tokens)),
            _ => None,
        });
        if let Some((start, end, len)) = found {
            let last = i + len;
            out.push(TemporalConstraint {
                text: text(i, last),
                span: (i, last),
                start: start.map(midnight),
                end: end.map(midnight),
                target: None,
            });
            i = last + 1;
            continue;
        }
        if let Some(d) = date_at(toks, i) {
            let last = i + d.tokens - 1;
            out.push(TemporalConstraint {
                text: text(i, last),
                span: (i, last),
                start: Some(midnight(d.start)),
                end: Some(midnight(d.end)),
                target: None,
            });
            i = last + 1;
            continue;
        }
        if month_of(&toks[i]).is_some() {
            set.note("temporal", format!("month {:?} without a year ignored", toks[i].surface));
        }
        i += 1;
    }
    out
}

/// Attaches each interval to the timestamp of the closest image mention.
pub fn attach_temporal(
    g: &DepGraph,
    ontology: &Ontology,
    dates: Vec<TemporalConstraint>,
    set: &mut AnnotationSet,
) {
    let image = Iri::from_static(vocab::EO_IMAGE);
    let timestamp = Iri::from_static(vocab::EO_TIMESTAMP);
    for mut date in dates {
        let owner = set
            .mentions
            .iter()
            .filter(|m| m.is_geo())
            .filter(|m| m.class.as_ref().is_some_and(|c| ontology.is_subclass_of(c, &image)))
            .min_by_key(|m| (score(g, m.head, date.span.0), m.id))
            .map(|m| m.id);
        match owner {
            Some(owner) => date.target = Some(set.ensure_property(owner, &timestamp, date.span.0)),
            None => set.note(
                "temporal",
                format!("{:?} has no image to restrict; ignored", date.text),
            ),
        }
        set.temporal.push(date);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{parse_dependencies, tokenize_and_tag};

    fn dates(q: &str) -> Vec<(Option<String>, Option<String>)> {
        let g = parse_dependencies(&tokenize_and_tag(q).unwrap());
        let mut set = AnnotationSet::new(q);
        identify_temporal(&g, &mut set)
            .into_iter()
            .map(|t| {
                let f = |d: Option<DateTime<Utc>>| d.map(|d| d.format("%Y-%m-%d").to_string());
                (f(t.start), f(t.end))
            })
            .collect()
    }

    fn closed(a: &str, b: &str) -> (Option<String>, Option<String>) {
        (Some(a.into()), Some(b.into()))
    }

    #[test]
    fn month_year() {
        assert_eq!(dates("images taken in January 2021"), vec![closed("2021-01-01", "2021-02-01")]);
        assert_eq!(dates("images from December 2020"), vec![(Some("2020-12-01".into()), None)]);
    }

    #[test]
    fn year_and_day_forms() {
        assert_eq!(dates("in 2020"), vec![closed("2020-01-01", "2021-01-01")]);
        assert_eq!(dates("on 14 January 2021"), vec![closed("2021-01-14", "2021-01-15")]);
        assert_eq!(dates("on January 14, 2021"), vec![closed("2021-01-14", "2021-01-15")]);
        assert_eq!(dates("on 2021-01-14"), vec![closed("2021-01-14", "2021-01-15")]);
        assert_eq!(dates("in winter 2020"), vec![closed("2020-12-01", "2021-03-01")]);
    }

    #[test]
    fn open_ranges() {
        assert_eq!(dates("taken before March 2021"), vec![(None, Some("2021-03-01".into()))]);
        assert_eq!(dates("taken after March 2021"), vec![(Some("2021-04-01".into()), None)]);
        assert_eq!(
            dates("between January 2021 and March 2021"),
            vec![closed("2021-01-01", "2021-04-01")]
        );
        assert_eq!(
            dates("images taken between 1 January 2021 and 15 January 2021 over Attica"),
            vec![closed("2021-01-01", "2021-01-16")]
        );
    }

    #[test]
    fn measures_and_bare_months_are_not_dates() {
        assert!(dates("within 2000 m of Athens").is_empty());
        assert!(dates("images in January").is_empty());
    }
}
