use super::tokenize::{is_iso_date, is_unit, month_number, AUXILIARIES};
use super::{DepGraph, Pos, Token};

const SEASONS: &[&str] = &["spring", "summer", "autumn", "fall", "winter"];
const COMPARATIVE_ADJ: &[&str] = &[
    "larger", "bigger", "longer", "smaller", "shorter", "higher", "lower", "greater", "wider",
    "newer", "older", "later", "earlier", "deeper",
];
const LEAD_COMPARATORS: &[&str] = &["less", "more", "fewer"];
const SINGLE_COMPARATORS: &[&str] = &[
    "exactly", "about", "around", "approximately", "roughly", "over", "under", "above", "below",
];
const DISTANCE_ADVERBS: &[&str] = &["away", "far", "close"];
const RELATIVE_PRONOUNS: &[&str] = &["that", "which", "who", "whose"];

#[derive(Debug, Clone)]
struct Chunk {
    start: usize,
    end: usize,
    head: usize,
    measure: bool,
    temporal: bool,
}

struct Builder<'a> {
    toks: &'a [Token],
    heads: Vec<Option<(usize, &'static str)>>,
    root: usize,
}

impl Builder<'_> {
    fn lower(&self, i: usize) -> String {
        self.toks[i].surface.to_lowercase()
    }

    fn pos(&self, i: usize) -> Pos {
        self.toks[i].pos
    }

    fn attached(&self, i: usize) -> bool {
        i == self.root || self.heads[i].is_some()
    }

    fn attach(&mut self, dep: usize, head: usize, label: &'static str) {
        if dep != head && !self.attached(dep) {
            self.heads[dep] = Some((head, label));
        }
    }

    fn is_aux(&self, i: usize) -> bool {
        self.pos(i) == Pos::Verb && AUXILIARIES.contains(&self.lower(i).as_str())
    }
}

fn is_temporal_word(t: &Token) -> bool {
    let w = t.surface.to_lowercase();
    if month_number(&w).is_some() && t.pos == Pos::Propn {
        return true;
    }
    if SEASONS.contains(&w.as_str()) || is_iso_date(&t.surface) {
        return true;
    }
    t.pos == Pos::Num && t.surface.len() == 4 && t.surface.parse::<u32>().is_ok_and(|y| (1900..=2100).contains(&y))
}

fn chunks(toks: &[Token]) -> Vec<Chunk> {
    let mut out: Vec<Chunk> = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if !matches!(toks[i].pos, Pos::Det | Pos::Adj | Pos::Num | Pos::Noun | Pos::Propn) {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i;
        let mut seen_nominal = false;
        let mut last_month = false;
        while j < toks.len() {
            let t = &toks[j];
            let ok = match t.pos {
                Pos::Det => !seen_nominal && j == start,
                Pos::Adj => !seen_nominal,
                Pos::Num => !seen_nominal || last_month,
                Pos::Noun | Pos::Propn => true,
                _ => false,
            };
            if !ok {
                break;
            }
            if t.pos.is_nominal() {
                seen_nominal = true;
                last_month = t.pos == Pos::Propn && month_number(&t.surface).is_some();
            } else {
                last_month = false;
            }
            j += 1;
            if is_unit(&t.surface) && j - start > 1 {
                break;
            }
        }
        let span = start..j;
        let head = span
            .clone()
            .rev()
            .find(|&k| toks[k].pos.is_nominal() && !(is_unit(&toks[k].surface) && k == start))
            .or_else(|| span.clone().rev().find(|&k| toks[k].pos == Pos::Num));
        match head {
            Some(head) => {
                let measure = is_unit(&toks[head].surface);
                let temporal = is_temporal_word(&toks[head]);
                out.push(Chunk {
                    start,
                    end: j,
                    head,
                    measure,
                    temporal,
                });
            }
            None => {}
        }
        i = j.max(i + 1);
    }
    out
}

/// Deterministic rule-cascade dependency parser for domain questions.
pub fn parse_dependencies(toks: &[Token]) -> DepGraph {
    let n = toks.len();
    let mut chunks = chunks(toks);
    let chunk_of_head = |chunks: &[Chunk], k: usize| chunks.iter().position(|c| c.head == k);

    let in_relative = |i: usize| {
        i >= 2
            && RELATIVE_PRONOUNS.contains(&toks[i - 1].surface.to_lowercase().as_str())
            && toks[i - 2].pos.is_nominal()
    };
    let root = (0..n)
        .find(|&i| {
            toks[i].pos == Pos::Verb
                && !AUXILIARIES.contains(&toks[i].surface.to_lowercase().as_str())
                && !in_relative(i)
        })
        .or_else(|| (0..n).find(|&i| toks[i].pos == Pos::Verb && !in_relative(i)))
        .or_else(|| (0..n).find(|&i| toks[i].pos == Pos::Verb))
        .or_else(|| chunks.first().map(|c| c.head))
        .or_else(|| (0..n).find(|&i| toks[i].pos != Pos::Punct))
        .unwrap_or(0);
    let mut b = Builder {
        toks,
        heads: vec![None; n],
        root,
    };

    // Chunk-internal structure.
    for c in &chunks {
        for k in c.start..c.end {
            if k == c.head {
                continue;
            }
            let label = match toks[k].pos {
                Pos::Det => "det",
                Pos::Num => "nummod",
                Pos::Adj => "amod",
                _ => "compound",
            };
            b.attach(k, c.head, label);
        }
    }

    // A measure phrase directly before a noun phrase modifies it.
    let mut merged = vec![false; chunks.len()];
    for ci in 0..chunks.len().saturating_sub(1) {
        let (m, next) = (&chunks[ci], &chunks[ci + 1]);
        if m.measure && !next.measure && next.start == m.end && toks[next.head].pos.is_nominal() {
            let (mh, nh) = (m.head, next.head);
            b.attach(mh, nh, "nmod:npmod");
            chunks[ci + 1].start = chunks[ci].start;
            merged[ci] = true;
        }
    }
    let chunks: Vec<Chunk> = chunks
        .into_iter()
        .zip(merged)
        .filter(|(_, m)| !m)
        .map(|(c, _)| c)
        .collect();

    // Comparator phrases before numbers.
    let mut consumed = vec![false; n];
    for x in 0..n {
        if toks[x].pos != Pos::Num {
            continue;
        }
        let w = |k: usize| b.lower(k);
        if x >= 2 && LEAD_COMPARATORS.contains(&w(x - 2).as_str()) && w(x - 1) == "than" {
            b.attach(x - 2, x, "advmod");
            b.attach(x - 1, x - 2, "fixed");
            consumed[x - 2] = true;
            consumed[x - 1] = true;
        } else if x >= 2 && w(x - 2) == "at" && (w(x - 1) == "least" || w(x - 1) == "most") {
            b.attach(x - 2, x, "advmod");
            b.attach(x - 1, x - 2, "fixed");
            consumed[x - 2] = true;
            consumed[x - 1] = true;
        } else if x >= 1 && SINGLE_COMPARATORS.contains(&w(x - 1).as_str()) {
            b.attach(x - 1, x, "advmod");
            consumed[x - 1] = true;
        }
    }

    // "coverage less than 10%": a bare measure right after a noun phrase.
    for ci in 1..chunks.len() {
        let (p, m) = (&chunks[ci - 1], &chunks[ci]);
        let numeric = m.measure || toks[m.head].pos == Pos::Num;
        let before_adverb = toks
            .get(m.end)
            .is_some_and(|t| DISTANCE_ADVERBS.contains(&t.surface.to_lowercase().as_str()));
        if !numeric || m.temporal || before_adverb || p.measure || p.temporal {
            continue;
        }
        if toks[p.head].pos.is_nominal() && (p.end..m.start).all(|k| consumed[k]) {
            b.attach(m.head, p.head, "nmod");
        }
    }

    // Relative clauses: the pronoun after a noun phrase, and a copula right
    // after it, are never attachment sites.
    let mut relative: Vec<Option<usize>> = vec![None; n];
    for k in 1..n {
        if !RELATIVE_PRONOUNS.contains(&b.lower(k).as_str()) {
            continue;
        }
        let antecedent = chunks
            .iter()
            .find(|c| c.end == k && !c.temporal && !c.measure && toks[c.head].pos.is_nominal())
            .map(|c| c.head);
        if let Some(a) = antecedent {
            relative[k] = Some(a);
            if k + 1 < n && b.is_aux(k + 1) {
                relative[k + 1] = Some(a);
            }
        }
    }

    let is_site = |b: &Builder, k: usize| -> bool {
        if relative[k].is_some() {
            return false;
        }
        if let Some(ci) = chunk_of_head(&chunks, k) {
            return !chunks[ci].temporal;
        }
        let w = b.lower(k);
        b.pos(k) == Pos::Verb
            || (b.pos(k) == Pos::Adv && DISTANCE_ADVERBS.contains(&w.as_str()))
            || (b.pos(k) == Pos::Adj && COMPARATIVE_ADJ.contains(&w.as_str()))
    };
    let site_label = |b: &Builder, k: usize| {
        if b.pos(k).is_nominal() || b.pos(k) == Pos::Num {
            "nmod"
        } else {
            "obl"
        }
    };
    // The chunk whose (possibly merged) span starts after `from`, with only
    // determiners, adjectives and comparator words in between.
    let next_chunk = |from: usize, consumed: &[bool]| -> Option<usize> {
        let ci = chunks.iter().position(|c| c.start > from)?;
        let ok = (from + 1..chunks[ci].start).all(|k| consumed[k] || matches!(toks[k].pos, Pos::Det | Pos::Adj));
        ok.then_some(ci)
    };

    // Measure phrases before "away"/"far", and the adverb's own attachment.
    for a in 0..n {
        let w = b.lower(a);
        if !(b.pos(a) == Pos::Adv && DISTANCE_ADVERBS.contains(&w.as_str())) {
            continue;
        }
        if let Some(m) = chunks.iter().find(|c| c.end == a && c.measure) {
            b.attach(m.head, a, "obl:npmod");
        }
        let site = (0..a).rev().find(|&k| {
            chunk_of_head(&chunks, k).is_some_and(|ci| !chunks[ci].measure && !chunks[ci].temporal)
                || (b.pos(k) == Pos::Verb && relative[k].is_none())
        });
        if let Some(s) = site {
            b.attach(a, s, "advmod");
        }
    }

    // Adpositions: case marker on the following noun phrase, which hangs off
    // the nearest preceding site.
    for a in 0..n {
        if b.pos(a) != Pos::Adp || consumed[a] {
            continue;
        }
        let Some(ci) = next_chunk(a, &consumed) else {
            continue;
        };
        let h = chunks[ci].head;
        b.attach(a, h, "case");
        consumed[a] = true;
        if let Some(s) = (0..a).rev().find(|&k| is_site(&b, k)) {
            let label = site_label(&b, s);
            b.attach(h, s, label);
        }
    }

    // Coordination.
    for c in 0..n {
        if b.pos(c) != Pos::Conj {
            continue;
        }
        let label = if b.lower(c) == "or" { "conj:or" } else { "conj:and" };
        if c + 1 < n && b.pos(c + 1) == Pos::Verb {
            if let Some(v) = (0..c).rev().find(|&k| b.pos(k) == Pos::Verb) {
                b.attach(c + 1, v, label);
                b.attach(c, c + 1, "cc");
            }
            continue;
        }
        let Some(ci) = next_chunk(c, &consumed) else {
            continue;
        };
        let y = &chunks[ci];
        let numeric = y.measure || b.pos(y.head) == Pos::Num;
        let x = chunks[..ci].iter().rev().find(|x| {
            x.end <= c
                && if numeric {
                    x.measure || b.pos(x.head) == Pos::Num
                } else {
                    !x.measure && !x.temporal && b.pos(x.head).is_nominal()
                }
        });
        if let Some(x) = x {
            b.attach(y.head, x.head, label);
            b.attach(c, y.head, "cc");
        }
    }

    // Verbs.
    for v in 0..n {
        if b.pos(v) != Pos::Verb || b.attached(v) {
            continue;
        }
        if let (Some(a), true) = (relative[v], b.is_aux(v)) {
            let predicate = (v + 1..n).find(|&k| {
                b.pos(k) == Pos::Adj
                    || (b.pos(k) == Pos::Adv && DISTANCE_ADVERBS.contains(&b.lower(k).as_str()))
                    || chunk_of_head(&chunks, k).is_some_and(|ci| !chunks[ci].measure)
            });
            match predicate {
                Some(p) => b.attach(v, p, "cop"),
                None => b.attach(v, a, "acl:relcl"),
            }
            continue;
        }
        if b.is_aux(v) {
            let main = (v + 1..n).find(|&k| b.pos(k) == Pos::Verb && !b.is_aux(k));
            match main {
                Some(m) => b.attach(v, m, "aux"),
                None => b.attach(v, root, "cop"),
            }
            continue;
        }
        let prev = chunks.iter().rev().find(|c| c.head < v && !c.temporal).map(|c| c.head);
        let label = if v > 0 && relative[v - 1].is_some() { "acl:relcl" } else { "acl" };
        match prev {
            Some(h) => b.attach(v, h, label),
            None => b.attach(v, root, "dep"),
        }
    }

    for k in 0..n {
        if relative[k].is_none() || b.is_aux(k) {
            continue;
        }
        let clause = match b.heads.get(k + 1).copied().flatten() {
            Some((h, "cop")) => Some(h),
            _ if k + 1 < n && b.pos(k + 1) == Pos::Verb => Some(k + 1),
            _ => None,
        };
        if let Some(h) = clause {
            b.attach(k, h, "nsubj");
        }
    }

    // Pronouns before the core arguments so that "me" is the indirect object.
    for p in 0..n {
        if b.pos(p) != Pos::Other || b.attached(p) {
            continue;
        }
        let w = b.lower(p);
        if (w == "what" || w == "whose") && next_chunk(p, &consumed).is_some_and(|ci| chunks[ci].start == p + 1) {
            let h = chunks[next_chunk(p, &consumed).expect("checked")].head;
            b.attach(p, h, "det");
            continue;
        }
        let prev_verb = (0..p).rev().find(|&k| b.pos(k) == Pos::Verb);
        let next_verb = (p + 1..n).find(|&k| b.pos(k) == Pos::Verb);
        match (prev_verb, next_verb) {
            (Some(v), _) if p == v + 1 && next_chunk(p, &consumed).is_some() => b.attach(p, v, "iobj"),
            (Some(v), _) => b.attach(p, v, "obj"),
            (None, Some(v)) => b.attach(p, v, "nsubj"),
            _ => b.attach(p, root, "dep"),
        }
    }

    // Remaining noun phrases are subjects or objects.
    for c in &chunks {
        let h = c.head;
        if b.attached(h) {
            continue;
        }
        let prev_verb = (0..c.start).rev().find(|&k| b.pos(k) == Pos::Verb);
        let next_verb = (c.end..n).find(|&k| b.pos(k) == Pos::Verb && !in_relative(k));
        match (prev_verb, next_verb) {
            (Some(v), _) if b.is_aux(v) && v == root => b.attach(h, v, "nsubj"),
            (Some(v), _) => b.attach(h, v, "obj"),
            (None, Some(v)) => b.attach(h, v, "nsubj"),
            _ => b.attach(h, root, "dep"),
        }
    }

    // Everything else.
    for i in 0..n {
        if b.attached(i) {
            continue;
        }
        let w = b.lower(i);
        match b.pos(i) {
            Pos::Punct => b.attach(i, root, "punct"),
            Pos::Adv => {
                let target = if w == "how" && i + 1 < n && matches!(b.pos(i + 1), Pos::Adj | Pos::Adv) {
                    i + 1
                } else if b.pos(root) == Pos::Verb {
                    root
                } else {
                    (i + 1..n).find(|&k| b.pos(k) == Pos::Verb).unwrap_or(root)
                };
                b.attach(i, target, "advmod");
            }
            Pos::Adj => {
                let prev = chunks.iter().find(|c| c.end == i).map(|c| c.head);
                match prev {
                    Some(h) => b.attach(i, h, "amod"),
                    None => b.attach(i, root, "dep"),
                }
            }
            Pos::Det => match next_chunk(i, &consumed) {
                Some(ci) => b.attach(i, chunks[ci].head, "det"),
                None => b.attach(i, root, "dep"),
            },
            _ => b.attach(i, root, "dep"),
        }
    }

    // Break any cycle by hanging the offending token off the root.
    loop {
        let mut changed = false;
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some((h, _)) = b.heads[cur] {
                cur = h;
                steps += 1;
                if steps > n {
                    break;
                }
            }
            if steps > n {
                b.heads[start] = Some((root, "dep"));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    b.heads[root] = None;

    let heads = b
        .heads
        .into_iter()
        .map(|h| h.map(|(head, label)| (head, label.to_string())))
        .collect();
    DepGraph::from_heads(toks.to_vec(), heads).expect("parser output is a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::tokenize_and_tag;

    fn parse(q: &str) -> DepGraph {
        parse_dependencies(&tokenize_and_tag(q).unwrap())
    }

    fn edge(g: &DepGraph, head: &str, dep: &str) -> Option<String> {
        let find = |s: &str| g.tokens.iter().position(|t| t.surface == s).unwrap();
        let (h, d) = (find(head), find(dep));
        (g.head(d) == Some(h)).then(|| g.label(d).unwrap().to_string())
    }

    #[test]
    fn coordination_emits_conj_and() {
        let g = parse("towns and forests");
        assert_eq!(edge(&g, "towns", "forests").as_deref(), Some("conj:and"));
        assert_eq!(edge(&g, "forests", "and").as_deref(), Some("cc"));
    }

    #[test]
    fn preposition_attaches_to_preceding_noun() {
        let g = parse("rivers in France");
        assert_eq!(edge(&g, "rivers", "France").as_deref(), Some("nmod"));
        assert_eq!(edge(&g, "France", "in").as_deref(), Some("case"));
    }

    #[test]
    fn running_example_shape() {
        let g = parse("Show me all images taken in January 2021 with rivers less than 2km away from towns and forests in the Emilia Romagna region, having cloud coverage less than 10%");
        assert_eq!(g.tokens[g.root].surface, "Show");
        assert_eq!(edge(&g, "Show", "images").as_deref(), Some("obj"));
        assert_eq!(edge(&g, "away", "km").as_deref(), Some("obl:npmod"));
        assert_eq!(edge(&g, "rivers", "away").as_deref(), Some("advmod"));
        assert_eq!(edge(&g, "away", "towns").as_deref(), Some("obl"));
        assert_eq!(edge(&g, "towns", "forests").as_deref(), Some("conj:and"));
        assert_eq!(edge(&g, "forests", "region").as_deref(), Some("nmod"));
        assert_eq!(edge(&g, "taken", "January").as_deref(), Some("obl"));
        assert_eq!(edge(&g, "January", "2021").as_deref(), Some("nummod"));
        assert_eq!(edge(&g, "coverage", "cloud").as_deref(), Some("compound"));
    }

    #[test]
    fn comparators_attach_to_numbers() {
        let g = parse("rivers less than 2km away");
        assert_eq!(edge(&g, "2", "less").as_deref(), Some("advmod"));
        assert_eq!(edge(&g, "less", "than").as_deref(), Some("fixed"));
        assert_eq!(edge(&g, "km", "2").as_deref(), Some("nummod"));
    }

    #[test]
    fn measure_before_noun_modifies_it() {
        let g = parse("images with less than 20% snow coverage and more than 10% cloud coverage");
        let pct: Vec<usize> = g.tokens.iter().filter(|t| t.surface == "%").map(|t| t.index).collect();
        let cov: Vec<usize> = g.tokens.iter().filter(|t| t.surface == "coverage").map(|t| t.index).collect();
        assert_eq!(g.head(pct[0]), Some(cov[0]));
        assert_eq!(g.head(pct[1]), Some(cov[1]));
        assert_eq!(g.head(cov[1]), Some(cov[0]));
        assert_eq!(g.label(cov[1]), Some("conj:and"));
    }

    #[test]
    fn copular_questions() {
        let g = parse("How many lakes are in Greece?");
        assert_eq!(g.tokens[g.root].surface, "are");
        assert_eq!(edge(&g, "are", "lakes").as_deref(), Some("nsubj"));
        assert_eq!(edge(&g, "are", "Greece").as_deref(), Some("obl"));
        assert_eq!(edge(&g, "many", "How").as_deref(), Some("advmod"));
        let g = parse("Where is the Tagus river located?");
        assert_eq!(g.tokens[g.root].surface, "located");
        assert_eq!(edge(&g, "located", "is").as_deref(), Some("aux"));
    }

    #[test]
    fn relative_clauses_keep_their_antecedent() {
        let g = parse("Show me images of rivers that are less than 2 km away from towns");
        assert_eq!(edge(&g, "rivers", "away").as_deref(), Some("advmod"));
        assert_eq!(edge(&g, "away", "are").as_deref(), Some("cop"));
        assert_eq!(edge(&g, "away", "that").as_deref(), Some("nsubj"));
        let g = parse("Find rivers which flow through Spain");
        assert_eq!(edge(&g, "rivers", "flow").as_deref(), Some("acl:relcl"));
        assert_eq!(edge(&g, "flow", "which").as_deref(), Some("nsubj"));
        assert_eq!(edge(&g, "flow", "Spain").as_deref(), Some("obl"));
    }
}
