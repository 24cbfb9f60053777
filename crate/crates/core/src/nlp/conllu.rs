use std::fmt::Write as _;

use super::{tag, DepGraph, NlpError, Pos, Token};

fn upos(p: Pos) -> &'static str {
    match p {
        Pos::Conj => "CCONJ",
        Pos::Other => "X",
        other => other.as_str(),
    }
}

fn from_upos(s: &str, form: &str) -> Option<Pos> {
    Some(match s {
        "NOUN" => Pos::Noun,
        "PROPN" => Pos::Propn,
        "VERB" | "AUX" => Pos::Verb,
        "ADJ" => Pos::Adj,
        "ADV" => Pos::Adv,
        "ADP" => Pos::Adp,
        "NUM" => Pos::Num,
        "DET" => Pos::Det,
        "CCONJ" | "SCONJ" | "CONJ" => Pos::Conj,
        "PUNCT" => Pos::Punct,
        "PRON" | "PART" | "INTJ" | "X" | "OTHER" => Pos::Other,
        "SYM" => {
            if tag(form) == Pos::Noun {
                Pos::Noun
            } else {
                Pos::Punct
            }
        }
        "_" => tag(form),
        _ => return None,
    })
}

/// Reads one sentence in CoNLL-U. Multiword ranges and empty nodes are
/// skipped; character spans are recovered from the `# text =` comment when
/// present.
pub fn ingest_conllu(text: &str) -> Result<DepGraph, NlpError> {
    let mut sentence: Option<String> = None;
    let mut rows: Vec<(String, String, Pos, usize, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let err = |message: String| NlpError::Conllu {
            line: line_no,
            message,
        };
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !rows.is_empty() {
                break;
            }
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(t) = c.trim_start().strip_prefix("text =") {
                sentence = Some(t.trim().to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0].parse().map_err(|_| err(format!("bad token id {:?}", cols[0])))?;
        if id != rows.len() + 1 {
            return Err(err(format!("token id {id} out of sequence")));
        }
        let form = cols[1].to_string();
        let pos = from_upos(cols[3], &form).ok_or_else(|| err(format!("unknown UPOS {:?}", cols[3])))?;
        let head: usize = cols[6].parse().map_err(|_| err(format!("bad head {:?}", cols[6])))?;
        let lemma = if cols[2] == "_" { form.to_lowercase() } else { cols[2].to_string() };
        rows.push((form, lemma, pos, head, cols[7].to_string()));
    }
    if rows.is_empty() {
        return Err(NlpError::Conllu {
            line: text.lines().count(),
            message: "no tokens".into(),
        });
    }
    let text = sentence.unwrap_or_else(|| rows.iter().map(|r| r.0.as_str()).collect::<Vec<_>>().join(" "));
    let mut cursor = 0;
    let mut tokens = Vec::with_capacity(rows.len());
    for (index, (form, lemma, pos, _, _)) in rows.iter().enumerate() {
        let start = text[cursor..]
            .find(form.as_str())
            .map(|o| cursor + o)
            .ok_or_else(|| NlpError::Conllu {
                line: 0,
                message: format!("token {form:?} not found in sentence text"),
            })?;
        cursor = start + form.len();
        tokens.push(Token {
            index,
            surface: form.clone(),
            lemma: lemma.clone(),
            pos: *pos,
            span: (start, cursor),
        });
    }
    let n = rows.len();
    let mut heads = Vec::with_capacity(n);
    for (form, _, _, head, label) in &rows {
        if *head > n {
            return Err(NlpError::Conllu {
                line: 0,
                message: format!("head {head} of {form:?} out of range"),
            });
        }
        heads.push((*head > 0).then(|| (head - 1, label.clone())));
    }
    DepGraph::from_heads(tokens, heads)
}

/// Canonical CoNLL-U: a `# text =` line, then ten columns with XPOS, FEATS,
/// DEPS and MISC left empty.
pub fn export_conllu(g: &DepGraph, text: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# text = {text}");
    for t in &g.tokens {
        let (head, label) = match g.head(t.index) {
            Some(h) => (h + 1, g.label(t.index).unwrap_or("dep")),
            None => (0, "root"),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
            t.index + 1,
            t.surface,
            t.lemma,
            upos(t.pos),
            head,
            label
        );
    }
    out
}
