use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Glossary;
use crate::ltl::CmpOp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessedSentence {
    pub tokens: Vec<String>,
    /// Encoded token to the original text it replaced.
    pub arith_decode: BTreeMap<String, String>,
}

impl PreprocessedSentence {
    pub fn text(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            if !out.is_empty() && !matches!(t.as_str(), "," | ".") {
                out.push(' ');
            }
            out.push_str(t);
        }
        out
    }
}

const COMPARATORS: &[(&[&str], &str)] = &[
    (&["is", "greater", "than", "or", "equal", "to"], "dominates"),
    (&["is", "less", "than", "or", "equal", "to"], "CMP_LE"),
    (&["is", "greater", "than"], "CMP_GT"),
    (&["is", "less", "than"], "CMP_LT"),
];

pub fn comparator_op(token: &str) -> Option<CmpOp> {
    match token {
        "CMP_LT" => Some(CmpOp::Lt),
        "CMP_GT" => Some(CmpOp::Gt),
        "CMP_LE" => Some(CmpOp::Le),
        "dominates" => Some(CmpOp::Ge),
        _ => None,
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "if", "the", "a", "an", "of", "and", "or", "equals", "equal", "is", "set", "to", "shall",
    "be", "initialized", "not", "anything", "but", "always", "eventually", "never", "then",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    KEYWORDS.contains(&lower.as_str()) || comparator_op(word).is_some()
}

fn is_determiner(word: &str) -> bool {
    matches!(word.to_ascii_lowercase().as_str(), "the" | "a" | "an")
}

struct Tok {
    text: String,
    /// Produced by merging; never merged again.
    fixed: bool,
}

fn arith_name(expr: &str) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, parts: &mut Vec<String>| {
        if !word.is_empty() {
            parts.push(std::mem::take(word));
        }
    };
    for c in expr.chars() {
        let op = match c {
            '+' => Some("PLUS"),
            '-' => Some("MINUS"),
            '*' => Some("TIMES"),
            '/' => Some("DIV"),
            '%' => Some("MOD"),
            '(' => Some("LPAR"),
            ')' => Some("RPAR"),
            '.' => Some("DOT"),
            _ => None,
        };
        if let Some(op) = op {
            flush(&mut word, &mut parts);
            parts.push(op.to_string());
        } else if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word, &mut parts);
        }
    }
    flush(&mut word, &mut parts);
    format!("ARITH_{}", parts.join("_"))
}

fn split_raw(text: &str, decode: &mut BTreeMap<String, String>) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(open) = rest.find('[') {
            let (before, after) = rest.split_at(open);
            split_plain(before, &mut toks);
            match after.find(']') {
                Some(close) => {
                    let expr = after[1..close].trim();
                    if expr.is_empty() {
                        toks.push(Tok { text: "[]".into(), fixed: true });
                    } else {
                        let base = arith_name(expr);
                        let mut name = base.clone();
                        let mut n = 2;
                        while decode.get(&name).is_some_and(|d| d != expr) {
                            name = format!("{base}_{n}");
                            n += 1;
                        }
                        decode.insert(name.clone(), expr.to_string());
                        toks.push(Tok { text: name, fixed: true });
                    }
                    rest = &after[close + 1..];
                }
                None => {
                    split_plain(after, &mut toks);
                    rest = "";
                }
            }
        } else {
            split_plain(rest, &mut toks);
            rest = "";
        }
    }
    toks
}

fn split_plain(text: &str, toks: &mut Vec<Tok>) {
    for raw in text.split_whitespace() {
        let mut core = raw;
        let mut tail = Vec::new();
        while let Some(stripped) = core.strip_suffix([',', '.', ';', ':']) {
            tail.push(&core[stripped.len()..]);
            core = stripped;
        }
        if !core.is_empty() {
            toks.push(Tok { text: core.to_string(), fixed: false });
        }
        for t in tail.into_iter().rev() {
            toks.push(Tok { text: t.to_string(), fixed: true });
        }
    }
}

fn merge_comparators(toks: Vec<Tok>, decode: &mut BTreeMap<String, String>) -> Vec<Tok> {
    let mut out = Vec::with_capacity(toks.len());
    let mut i = 0;
    let word = |k: usize, w: &str| toks.get(k).is_some_and(|t| !t.fixed && t.text.eq_ignore_ascii_case(w));
    while i < toks.len() {
        // "is not less than" keeps the negation in front of the comparator.
        let negated = word(i, "is") && word(i + 1, "not");
        let skip = if negated { 1 } else { 0 };
        let hit = COMPARATORS.iter().find(|(phrase, _)| {
            i + skip + phrase.len() <= toks.len()
                && word(i, phrase[0])
                && phrase[1..].iter().enumerate().all(|(k, p)| word(i + skip + 1 + k, p))
        });
        match hit {
            Some((phrase, token)) => {
                let original: Vec<&str> = std::iter::once(&toks[i])
                    .chain(&toks[i + skip + 1..i + skip + phrase.len()])
                    .map(|t| t.text.as_str())
                    .collect();
                decode.insert(token.to_string(), original.join(" "));
                if negated {
                    out.push(Tok { text: toks[i + 1].text.clone(), fixed: false });
                }
                out.push(Tok { text: token.to_string(), fixed: true });
                i += skip + phrase.len();
            }
            None => {
                out.push(Tok { text: toks[i].text.clone(), fixed: toks[i].fixed });
                i += 1;
            }
        }
    }
    out
}

fn merge_glossary(toks: Vec<Tok>, glossary: &Glossary) -> Vec<Tok> {
    let words: Vec<&str> = toks.iter().map(|t| if t.fixed { "" } else { t.text.as_str() }).collect();
    let mut out = Vec::with_capacity(toks.len());
    let mut i = 0;
    while i < toks.len() {
        match glossary.match_at(&words, i) {
            Some(e) => {
                out.push(Tok { text: e.term.clone(), fixed: true });
                i += e.phrase.len();
            }
            None => {
                out.push(Tok { text: toks[i].text.clone(), fixed: toks[i].fixed });
                i += 1;
            }
        }
    }
    out
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(|c| c.is_uppercase())
        && word.chars().any(|c| c.is_lowercase())
        && word.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// Joins runs of two or more capitalized non-keyword words with `_`.
fn merge_capitalized(toks: Vec<Tok>) -> Vec<Tok> {
    let mergeable = |t: &Tok| !t.fixed && is_capitalized(&t.text) && !is_keyword(&t.text);
    let mut out = Vec::with_capacity(toks.len());
    let mut i = 0;
    while i < toks.len() {
        let mut j = i;
        while j < toks.len() && mergeable(&toks[j]) {
            j += 1;
        }
        if j - i >= 2 {
            let joined: Vec<&str> = toks[i..j].iter().map(|t| t.text.as_str()).collect();
            out.push(Tok { text: joined.join("_"), fixed: true });
            i = j;
        } else {
            out.push(Tok { text: toks[i].text.clone(), fixed: toks[i].fixed });
            i += 1;
        }
    }
    out
}

/// Start index of the noun phrase ending right before `end`.
fn np_start(tokens: &[String], end: usize) -> usize {
    let mut j = end;
    loop {
        if j == 0 {
            return 0;
        }
        j -= 1;
        if j > 0 && is_determiner(&tokens[j - 1]) {
            j -= 1;
        }
        if j >= 2 && tokens[j - 1].eq_ignore_ascii_case("of") && !is_keyword(&tokens[j - 2]) {
            j -= 1;
            continue;
        }
        return j;
    }
}

fn insert_missing_commas(tokens: &mut Vec<String>) {
    let Some(shall) = tokens.iter().position(|t| t.eq_ignore_ascii_case("shall")) else {
        return;
    };
    if tokens.first().is_some_and(|t| t.eq_ignore_ascii_case("if")) && shall >= 2 {
        let start = np_start(tokens, shall);
        if start > 1 && tokens[start - 1] != "," {
            tokens.insert(start, ",".into());
        }
    } else if let Some(k) = tokens.iter().skip(shall).position(|t| t.eq_ignore_ascii_case("if")) {
        let k = k + shall;
        if tokens[k - 1] != "," {
            tokens.insert(k, ",".into());
        }
    }
}

pub fn preprocess(text: &str, glossary: &Glossary) -> PreprocessedSentence {
    let mut decode = BTreeMap::new();
    let toks = split_raw(text, &mut decode);
    let toks = merge_comparators(toks, &mut decode);
    let toks = merge_glossary(toks, glossary);
    let toks = merge_capitalized(toks);
    let mut tokens: Vec<String> = toks.into_iter().map(|t| t.text).collect();
    insert_missing_commas(&mut tokens);
    PreprocessedSentence { tokens, arith_decode: decode }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gloss() -> Glossary {
        Glossary::new(
            [
                ("Lower Desired Temperature", "Lower_Desired_Temperature"),
                ("Status attribute", "Status_attribute"),
            ]
            .map(|(a, b)| (a.to_string(), b.to_string())),
        )
        .unwrap()
    }

    #[test]
    fn glossary_phrase_is_one_token() {
        let p = preprocess("If the Lower Desired Temperature is Invalid, x shall be set to y.", &gloss());
        assert!(p.tokens.contains(&"Lower_Desired_Temperature".to_string()));
        assert_eq!(p.tokens[2], "Lower_Desired_Temperature");
    }

    #[test]
    fn arithmetic_is_encoded() {
        let p = preprocess("the Limit shall be set to [x + 5].", &Glossary::default());
        assert!(p.tokens.contains(&"ARITH_x_PLUS_5".to_string()));
        assert_eq!(p.arith_decode["ARITH_x_PLUS_5"], "x + 5");
    }

    #[test]
    fn comparator_phrases() {
        let p = preprocess("If a is greater than or equal to b, c shall be set to d.", &Glossary::default());
        assert_eq!(p.tokens[2], "dominates");
        assert_eq!(p.arith_decode["dominates"], "is greater than or equal to");
        let p = preprocess("If a is less than b, c shall be set to d.", &Glossary::default());
        assert_eq!(p.tokens[2], "CMP_LT");
    }

    #[test]
    fn missing_comma_is_inserted() {
        let p = preprocess("If the Mode equals INIT the Status attribute of the Heater shall be set to On.", &gloss());
        assert_eq!(p.text(), "If the Mode equals INIT, the Status_attribute of the Heater shall be set to On.");
        let p = preprocess("The Mode shall be set to On if the Timer equals Done.", &gloss());
        assert_eq!(p.text(), "The Mode shall be set to On, if the Timer equals Done.");
    }

    #[test]
    fn capitalized_runs_merge_without_glossary() {
        let p = preprocess("If the Regulator Mode equals INIT, the Heat Control shall be set to Control Off.", &Glossary::default());
        assert_eq!(
            p.text(),
            "If the Regulator_Mode equals INIT, the Heat_Control shall be set to Control_Off."
        );
    }

    #[test]
    fn colliding_arithmetic_gets_fresh_token() {
        let p = preprocess("x shall be set to [a+1] and [a + 1]", &Glossary::default());
        assert_eq!(p.arith_decode["ARITH_a_PLUS_1"], "a+1");
        assert_eq!(p.arith_decode["ARITH_a_PLUS_1_2"], "a + 1");
    }
}
