use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ltl::{parse_with_vars, Ltl, Style, VarRef};

use super::{Assignment, Definition, GuardedCommand, Role, TransitionModel, TypeDecl, TypeDef, VarDecl, PLACEHOLDER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("model text line {line}: {message}")]
pub struct SalParseError {
    pub line: usize,
    pub message: String,
}

fn sal(f: &Ltl) -> String {
    f.to_styled(Style::Sal)
}

fn assignment(a: &Assignment, primed: bool) -> String {
    format!("{}{} = {}", a.var, if primed { "'" } else { "" }, a.value)
}

pub(super) fn print(m: &TransitionModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} : CONTEXT =\nBEGIN", m.name);
    for t in &m.types {
        let body = match &t.def {
            TypeDef::Enum(vs) => format!("{{{}}}", vs.join(", ")),
            TypeDef::Record(fs) => {
                let fields: Vec<String> = fs.iter().map(|(n, ty)| format!("{n} : {ty}")).collect();
                format!("[# {} #]", fields.join(", "))
            }
        };
        let _ = writeln!(out, "  {} : TYPE = {body};", t.name);
    }
    out.push_str("\n  main : MODULE =\n  BEGIN\n");
    for v in &m.vars {
        let _ = writeln!(out, "    {} {} : {}", v.role.keyword(), v.name, v.ty);
    }
    if !m.initializations.is_empty() {
        out.push_str("    INITIALIZATION\n");
        for a in &m.initializations {
            let _ = writeln!(out, "      {};", assignment(a, false));
        }
    }
    if !m.definitions.is_empty() {
        out.push_str("    DEFINITION\n");
        for d in &m.definitions {
            let body = match d.constraints.as_slice() {
                [one] => sal(one),
                many => many.iter().map(|c| format!("({})", sal(c))).collect::<Vec<_>>().join(" AND "),
            };
            let _ = writeln!(out, "      {} IN {{{PLACEHOLDER} : {} | {body}}};", d.wire, d.ty);
        }
    }
    if !m.transitions.is_empty() {
        out.push_str("    TRANSITION\n    [\n");
        for c in &m.transitions {
            let cmds: Vec<String> = c.assigns.iter().map(|a| assignment(a, true)).collect();
            let _ = writeln!(out, "      {} --> {}\n    []", sal(&c.guard), cmds.join("; "));
        }
        out.push_str("      ELSE -->\n    ]\n");
    }
    out.push_str("  END;\n");
    for (i, t) in m.theorems.iter().enumerate() {
        let _ = writeln!(out, "\n  theorem_{} : THEOREM main |- {};", i + 1, t);
    }
    out.push_str("END\n");
    out
}

struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|(_, l)| *l)
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).map(|(n, _)| *n).unwrap_or(self.lines.last().map_or(0, |(n, _)| *n))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SalParseError> {
        Err(SalParseError { line: self.line_no(), message: message.into() })
    }

    fn expect(&mut self, text: &str) -> Result<(), SalParseError> {
        if self.peek() == Some(text) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{text}`"))
        }
    }

    /// Joins lines until one satisfies `end`.
    fn statement(&mut self, end: impl Fn(&str) -> bool) -> Result<String, SalParseError> {
        let mut parts = Vec::new();
        while let Some(l) = self.peek() {
            self.pos += 1;
            parts.push(l);
            if end(l) {
                return Ok(parts.join(" "));
            }
        }
        self.err("unterminated statement")
    }
}

fn is_section(l: &str) -> bool {
    matches!(l, "INITIALIZATION" | "DEFINITION" | "TRANSITION" | "END;")
}

fn parse_type(text: &str) -> Option<TypeDecl> {
    let (name, rest) = text.split_once(" : TYPE = ")?;
    let body = rest.strip_suffix(';')?.trim();
    let def = if let Some(inner) = body.strip_prefix('{').and_then(|b| b.strip_suffix('}')) {
        TypeDef::Enum(inner.split(',').map(|s| s.trim().to_string()).collect())
    } else {
        let inner = body.strip_prefix("[#")?.strip_suffix("#]")?;
        let mut fields = Vec::new();
        for f in inner.split(',') {
            let (n, t) = f.split_once(':')?;
            fields.push((n.trim().to_string(), t.trim().to_string()));
        }
        TypeDef::Record(fields)
    };
    Some(TypeDecl { name: name.trim().to_string(), def })
}

fn parse_assignment(text: &str, vars: &BTreeSet<String>) -> Option<Assignment> {
    let (lhs, rhs) = text.split_once('=')?;
    let lhs = lhs.trim().trim_end_matches('\'');
    match parse_with_vars(&format!("{lhs} = {}", rhs.trim()), vars).ok()? {
        Ltl::Atom(a) => Some(Assignment { var: a.lhs, value: a.rhs }),
        _ => None,
    }
}

/// Parses text produced by [`TransitionModel::to_sal`]. Line breaks inside
/// definitions are tolerated.
pub fn parse_model(text: &str) -> Result<TransitionModel, SalParseError> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut r = Reader { lines, pos: 0 };
    let name = match r.peek().and_then(|l| l.strip_suffix(" : CONTEXT =")) {
        Some(n) => n.trim().to_string(),
        None => return r.err("expected `<name> : CONTEXT =`"),
    };
    r.pos += 1;
    r.expect("BEGIN")?;
    let mut types = Vec::new();
    while let Some(l) = r.peek() {
        if l.ends_with(": MODULE =") {
            break;
        }
        match parse_type(l) {
            Some(t) => types.push(t),
            None => return r.err("expected a type declaration"),
        }
        r.pos += 1;
    }
    r.pos += 1;
    r.expect("BEGIN")?;
    let mut vars = Vec::new();
    while let Some(l) = r.peek() {
        let role = match l.split_whitespace().next() {
            Some("INPUT") => Role::Input,
            Some("OUTPUT") => Role::Output,
            Some("LOCAL") => Role::Local,
            _ => break,
        };
        let Some((n, t)) = l[role.keyword().len()..].split_once(':') else {
            return r.err("expected `<name> : <type>`");
        };
        vars.push(VarDecl { role, name: n.trim().to_string(), ty: t.trim().to_string() });
        r.pos += 1;
    }
    let mut known: BTreeSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    known.insert(PLACEHOLDER.to_string());
    let mut m = TransitionModel {
        name,
        types,
        vars,
        definitions: Vec::new(),
        initializations: Vec::new(),
        transitions: Vec::new(),
        theorems: Vec::new(),
    };
    loop {
        match r.peek() {
            Some("INITIALIZATION") => {
                r.pos += 1;
                while r.peek().is_some_and(|l| !is_section(l)) {
                    let s = r.statement(|l| l.ends_with(';'))?;
                    match parse_assignment(s.trim_end_matches(';'), &known) {
                        Some(a) => m.initializations.push(a),
                        None => return r.err("bad initialization"),
                    }
                }
            }
            Some("DEFINITION") => {
                r.pos += 1;
                while r.peek().is_some_and(|l| !is_section(l)) {
                    let s = r.statement(|l| l.ends_with(';'))?;
                    let def = parse_definition(s.trim_end_matches(';'), &known);
                    match def {
                        Some(d) => m.definitions.push(d),
                        None => return r.err("bad definition"),
                    }
                }
            }
            Some("TRANSITION") => {
                r.pos += 1;
                let s = r.statement(|l| l == "]")?;
                let body = s.trim().strip_prefix('[').and_then(|b| b.strip_suffix(']'));
                let Some(body) = body else { return r.err("expected `[ ... ]`") };
                for cmd in body.split("[]") {
                    let Some((g, c)) = cmd.split_once("-->") else { return r.err("expected `-->`") };
                    if g.trim() == "ELSE" {
                        continue;
                    }
                    let guard = parse_with_vars(g.trim(), &known).map_err(|e| SalParseError {
                        line: r.line_no(),
                        message: e.to_string(),
                    })?;
                    let mut assigns = Vec::new();
                    for a in c.split(';').map(str::trim).filter(|a| !a.is_empty()) {
                        match parse_assignment(a, &known) {
                            Some(a) => assigns.push(a),
                            None => return r.err("bad assignment"),
                        }
                    }
                    m.transitions.push(GuardedCommand { guard, assigns });
                }
            }
            Some("END;") => {
                r.pos += 1;
                break;
            }
            _ => return r.err("expected a section or `END;`"),
        }
    }
    while let Some(l) = r.peek() {
        if l == "END" {
            return Ok(m);
        }
        let s = r.statement(|l| l.ends_with(';'))?;
        let Some((_, f)) = s.split_once("|-") else { return r.err("expected a theorem") };
        let f = parse_with_vars(f.trim().trim_end_matches(';'), &known)
            .map_err(|e| SalParseError { line: r.line_no(), message: e.to_string() })?;
        m.theorems.push(f);
    }
    r.err("missing final `END`")
}

fn parse_definition(text: &str, known: &BTreeSet<String>) -> Option<Definition> {
    let (wire, rest) = text.split_once(" IN ")?;
    let inner = rest.trim().strip_prefix('{')?.strip_suffix('}')?;
    let (head, body) = inner.split_once('|')?;
    let (_, ty) = head.split_once(':')?;
    let f = parse_with_vars(body.trim(), known).ok()?;
    let constraints = match f {
        Ltl::And(cs) if body.trim().starts_with('(') => cs,
        other => vec![other],
    };
    Some(Definition { wire: VarRef::dotted(wire.trim()), ty: ty.trim().to_string(), constraints })
}

