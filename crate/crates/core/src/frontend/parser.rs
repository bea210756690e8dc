use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::preprocess::{comparator_op, is_keyword, PreprocessedSentence};
use super::{Mention, TypedDependency};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("parse error at {}-{} near {token:?}: expected {expected}", span.0, span.1)]
pub struct ParseError {
    /// 1-based token positions, inclusive.
    pub span: (usize, usize),
    pub token: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyParse {
    pub tds: Vec<TypedDependency>,
    pub root: Mention,
    pub warnings: Vec<String>,
}

struct NounPhrase {
    head: usize,
}

struct Parser<'a> {
    toks: &'a [String],
    at: usize,
    tds: Vec<TypedDependency>,
    warnings: Vec<String>,
}

fn lemma(word: &str) -> String {
    match word {
        "initialized" | "Initialized" => "initialize".into(),
        _ => word.to_string(),
    }
}

fn is_det(word: &str) -> bool {
    matches!(word.to_ascii_lowercase().as_str(), "the" | "a" | "an")
}

fn is_punct(word: &str) -> bool {
    matches!(word, "," | "." | ";" | ":")
}

impl<'a> Parser<'a> {
    fn mention(&self, i: usize) -> Mention {
        Mention::new(lemma(&self.toks[i]), i + 1)
    }

    fn td(&mut self, rel: &str, gov: usize, dep: usize) {
        let td = TypedDependency::new(rel, self.mention(gov), self.mention(dep));
        self.tds.push(td);
    }

    /// A determiner followed by a content word ("A" alone may be a value).
    fn det_here(&self) -> bool {
        self.peek().is_some_and(is_det)
            && self.toks.get(self.at + 1).is_some_and(|t| !is_keyword(t) && !is_punct(t))
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.at).map(String::as_str)
    }

    fn peek_is(&self, word: &str) -> bool {
        self.peek().is_some_and(|t| t.eq_ignore_ascii_case(word))
    }

    fn peek2_is(&self, word: &str) -> bool {
        self.toks.get(self.at + 1).is_some_and(|t| t.eq_ignore_ascii_case(word))
    }

    fn error(&self, expected: &str) -> ParseError {
        let pos = self.at.min(self.toks.len());
        ParseError {
            span: (pos + 1, pos + 1),
            token: self.toks.get(pos).cloned().unwrap_or_else(|| "<end>".into()),
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, word: &str) -> Result<usize, ParseError> {
        if self.peek_is(word) {
            self.at += 1;
            Ok(self.at - 1)
        } else {
            Err(self.error(&format!("{word:?}")))
        }
    }

    fn content_word(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.peek() {
            Some(t) if (!is_keyword(t) || is_det(t)) && !is_punct(t) => {
                self.at += 1;
                Ok(self.at - 1)
            }
            _ => Err(self.error(what)),
        }
    }

    /// `[det] Noun ["of" [det] Noun (("and"|"or") [det] Noun)*]`
    fn noun_phrase(&mut self) -> Result<NounPhrase, ParseError> {
        let det = self.det_here().then_some(self.at);
        if det.is_some() {
            self.at += 1;
        }
        let head = self.content_word("a noun phrase")?;
        if let Some(d) = det {
            self.td("det", head, d);
        }
        let mut owners = Vec::new();
        if self.peek_is("of") {
            self.at += 1;
            let first = self.determined_noun()?;
            self.td("prep_of", head, first);
            owners.push(first);
            while (self.peek_is("and") || self.peek_is("or"))
                && self.toks.get(self.at + 1).is_some_and(|t| is_det(t) || !is_keyword(t) && !is_punct(t))
                && self.owner_follows()
            {
                let conj = self.toks[self.at].to_ascii_lowercase();
                self.at += 1;
                let next = self.determined_noun()?;
                self.td("prep_of", head, next);
                let prev = *owners.last().unwrap();
                self.td(&format!("conj_{conj}"), prev, next);
                owners.push(next);
            }
        }
        Ok(NounPhrase { head })
    }

    /// After `and|or`, a coordinated owner is a noun directly followed by a
    /// predicate, another coordinator, or `shall`; otherwise the coordinator
    /// starts a new clause.
    fn owner_follows(&self) -> bool {
        let mut k = self.at + 1;
        if self.toks.get(k).is_some_and(|t| is_det(t)) {
            k += 1;
        }
        let Some(noun) = self.toks.get(k) else { return false };
        if is_keyword(noun) || is_punct(noun) {
            return false;
        }
        match self.toks.get(k + 1) {
            Some(next) => {
                let n = next.to_ascii_lowercase();
                matches!(n.as_str(), "equals" | "is" | "and" | "or" | "shall") || comparator_op(next).is_some()
            }
            None => false,
        }
    }

    fn determined_noun(&mut self) -> Result<usize, ParseError> {
        let det = self.det_here().then_some(self.at);
        if det.is_some() {
            self.at += 1;
        }
        let n = self.content_word("a noun")?;
        if let Some(d) = det {
            self.td("det", n, d);
        }
        Ok(n)
    }

    fn attach_subject(&mut self, rel: &str, head: usize, np: &NounPhrase) {
        self.td(rel, head, np.head);
    }

    /// `NP (equals V | is [not] [set to] V | is anything but V | [not] Cmp NP)`
    fn clause(&mut self) -> Result<usize, ParseError> {
        let np = self.noun_phrase()?;
        let Some(verb) = self.peek().map(str::to_string) else {
            return Err(self.error("a predicate"));
        };
        if verb.eq_ignore_ascii_case("equals") {
            let head = self.at;
            self.at += 1;
            self.attach_subject("nsubj", head, &np);
            let v = self.value()?;
            self.td("dobj", head, v);
            return Ok(head);
        }
        let neg_cmp = verb.eq_ignore_ascii_case("not") && self.toks.get(self.at + 1).is_some_and(|t| comparator_op(t).is_some());
        if comparator_op(&verb).is_some() || neg_cmp {
            if neg_cmp {
                self.at += 1;
            }
            let head = self.at;
            self.at += 1;
            self.attach_subject("nsubj", head, &np);
            if neg_cmp {
                self.td("neg", head, head - 1);
            }
            let rhs = self.noun_phrase()?;
            self.td("dobj", head, rhs.head);
            return Ok(head);
        }
        if verb.eq_ignore_ascii_case("is") {
            let is = self.at;
            self.at += 1;
            let neg = if self.peek_is("not") {
                self.at += 1;
                Some(self.at - 1)
            } else {
                None
            };
            if self.peek_is("set") && self.peek2_is("to") {
                let set = self.at;
                self.at += 2;
                self.attach_subject("nsubjpass", set, &np);
                self.td("auxpass", set, is);
                if let Some(n) = neg {
                    self.td("neg", set, n);
                }
                let v = self.value()?;
                self.td("prep_to", set, v);
                return Ok(set);
            }
            self.attach_subject("nsubj", is, &np);
            if let Some(n) = neg {
                self.td("neg", is, n);
            } else if self.peek_is("anything") && self.peek2_is("but") {
                self.td("neg", is, self.at);
                self.at += 2;
            }
            let v = self.value()?;
            self.td("dobj", is, v);
            return Ok(is);
        }
        Err(self.error("\"equals\", \"is\" or a comparator"))
    }

    fn value(&mut self) -> Result<usize, ParseError> {
        let det = self.det_here().then_some(self.at);
        if det.is_some() {
            self.at += 1;
        }
        let v = self.content_word("a value")?;
        if let Some(d) = det {
            self.td("det", v, d);
        }
        Ok(v)
    }

    /// `"if" Clause ([","] ("and"|"or") Clause)*`, returning (mark, first head).
    fn condition(&mut self) -> Result<(usize, usize), ParseError> {
        let mark = self.expect("if")?;
        let first = self.clause()?;
        let mut prev = first;
        loop {
            let save = self.at;
            if self.peek() == Some(",") {
                self.at += 1;
            }
            let conj = match self.peek().map(str::to_ascii_lowercase) {
                Some(c) if c == "and" || c == "or" => c,
                _ => {
                    self.at = save;
                    break;
                }
            };
            self.at += 1;
            let cur = self.clause()?;
            self.td(&format!("conj_{conj}"), prev, cur);
            prev = cur;
        }
        Ok((mark, first))
    }

    /// `NP "shall" [adverb] [not] ("be" ("set"|"initialized") "to" V | "equal" V)`
    fn main_clause(&mut self) -> Result<usize, ParseError> {
        let np = self.noun_phrase()?;
        let shall = self.expect("shall")?;
        let adverb = match self.peek().map(str::to_ascii_lowercase).as_deref() {
            Some("always" | "eventually" | "never") => {
                self.at += 1;
                Some(self.at - 1)
            }
            _ => None,
        };
        let neg = if self.peek_is("not") {
            self.at += 1;
            Some(self.at - 1)
        } else {
            None
        };
        let head = if self.peek_is("be") {
            let be = self.at;
            self.at += 1;
            let verb = match self.peek().map(str::to_ascii_lowercase).as_deref() {
                Some("set" | "initialized") => self.at,
                _ => return Err(self.error("\"set to\" or \"initialized to\"")),
            };
            self.at += 1;
            self.expect("to")?;
            self.attach_subject("nsubjpass", verb, &np);
            self.td("aux", verb, shall);
            self.td("auxpass", verb, be);
            let v = self.value()?;
            self.td("prep_to", verb, v);
            self.warnings.push(format!(
                "style: passive voice at {}; active voice is preferred",
                self.mention(verb)
            ));
            verb
        } else if self.peek_is("equal") {
            let verb = self.at;
            self.at += 1;
            self.attach_subject("nsubj", verb, &np);
            self.td("aux", verb, shall);
            let v = self.value()?;
            self.td("dobj", verb, v);
            verb
        } else {
            return Err(self.error("\"be\" or \"equal\""));
        };
        if let Some(a) = adverb {
            self.td("advmod", head, a);
        }
        if let Some(n) = neg {
            self.td("neg", head, n);
        }
        Ok(head)
    }

    /// A bare clause list with no main clause, e.g. `X equals A and Y equals B`.
    fn clause_group(&mut self) -> Result<usize, ParseError> {
        let first = self.clause()?;
        let mut prev = first;
        while let Some(c) = self.peek().map(str::to_ascii_lowercase).filter(|c| c == "and" || c == "or") {
            self.at += 1;
            let cur = self.clause()?;
            self.td(&format!("conj_{c}"), prev, cur);
            prev = cur;
        }
        Ok(first)
    }

    fn sentence(&mut self) -> Result<usize, ParseError> {
        let has_shall = self.toks.iter().any(|t| t.eq_ignore_ascii_case("shall"));
        let root = if self.peek_is("if") {
            let (mark, cond) = self.condition()?;
            self.expect(",")?;
            let main = self.main_clause()?;
            self.td("advcl", main, cond);
            self.td("mark", cond, mark);
            main
        } else if has_shall {
            let main = self.main_clause()?;
            if self.peek() == Some(",") && self.peek2_is("if") {
                self.at += 1;
                let (mark, cond) = self.condition()?;
                self.td("advcl", main, cond);
                self.td("mark", cond, mark);
            }
            main
        } else {
            self.clause_group()?
        };
        if self.peek() == Some(".") {
            self.at += 1;
        }
        if self.at < self.toks.len() {
            return Err(self.error("end of sentence"));
        }
        Ok(root)
    }
}

/// Parses one preprocessed sentence into typed dependencies.
pub fn parse_dependencies(sentence: &PreprocessedSentence) -> Result<DependencyParse, ParseError> {
    let mut p = Parser { toks: &sentence.tokens, at: 0, tds: Vec::new(), warnings: Vec::new() };
    if p.toks.is_empty() {
        return Err(p.error("a sentence"));
    }
    let root = p.sentence()?;
    let root = p.mention(root);
    Ok(DependencyParse { tds: p.tds, root, warnings: p.warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Glossary;
    use crate::frontend::preprocess;

    fn parse(text: &str) -> DependencyParse {
        parse_dependencies(&preprocess(text, &Glossary::default())).unwrap()
    }

    fn has(p: &DependencyParse, td: &str) -> bool {
        p.tds.iter().any(|t| t.to_string() == td)
    }

    #[test]
    fn conditional_passive() {
        let p = parse("If the Status_attribute of the Lower_Desired_Temperature is Invalid, the Regulator_Interface_Failure shall be set to True.");
        assert!(has(&p, "prep_of(Status_attribute-3, Lower_Desired_Temperature-6)"));
        assert!(has(&p, "nsubjpass(set-14, Regulator_Interface_Failure-11)"));
        assert!(has(&p, "prep_to(set-14, True-16)"));
        assert!(has(&p, "advcl(set-14, is-7)"));
        assert_eq!(p.root, Mention::new("set", 14));
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn initialization() {
        let p = parse("The Regulator_Mode shall be initialized to INIT.");
        assert_eq!(p.root.lemma, "initialize");
        assert!(has(&p, "prep_to(initialize-5, INIT-7)"));
    }

    #[test]
    fn clause_conjunction() {
        let p = parse("X equals A and Y equals B");
        assert!(has(&p, "conj_and(equals-2, equals-6)"));
    }

    #[test]
    fn coordinated_owners() {
        let p = parse("If the Status of the Lower or the Upper equals Invalid, the Failure shall be set to True.");
        assert!(has(&p, "prep_of(Status-3, Lower-6)"));
        assert!(has(&p, "prep_of(Status-3, Upper-9)"));
        assert!(has(&p, "conj_or(Lower-6, Upper-9)"));
        assert!(has(&p, "nsubj(equals-10, Status-3)"));
    }

    #[test]
    fn negated_condition() {
        let p = parse("If the Status is not set to Valid, the Failure shall be set to True.");
        assert!(has(&p, "neg(set-6, not-5)"));
        let p = parse("If the Status is anything but Valid, the Failure shall be set to True.");
        assert!(has(&p, "neg(is-4, anything-5)"));
        assert!(has(&p, "dobj(is-4, Valid-7)"));
    }

    #[test]
    fn trailing_condition() {
        let p = parse("The Failure shall be set to True, if the Status equals Invalid.");
        assert!(has(&p, "advcl(set-5, equals-12)"));
        assert!(has(&p, "mark(equals-12, if-9)"));
    }

    #[test]
    fn active_main_clause() {
        let p = parse("The Heat shall always equal On.");
        assert!(p.warnings.is_empty());
        assert!(has(&p, "advmod(equal-5, always-4)"));
    }

    #[test]
    fn rejects_function_application() {
        let pre = preprocess("The Display shall be set to the Temperature rounded to the nearest integer.", &Glossary::default());
        let err = parse_dependencies(&pre).unwrap_err();
        assert_eq!(err.token, "rounded");
        assert_eq!(err.span, (9, 9));
    }
}
