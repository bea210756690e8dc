use super::{Ltl, Operand, Value};

/// Output syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// `G((a = v) => X(b = w))`, `AND`, `OR`, `NOT(..)`, `TRUE`/`FALSE`.
    /// Also valid SAL expression syntax.
    Surface,
    /// `G !(a=true & b=true)`, `->`, `|`, lower-case booleans.
    Compact,
    /// Surface syntax without parentheses around atoms in implications,
    /// as used inside model text.
    Sal,
}

pub(super) fn render(f: &Ltl, style: Style) -> String {
    let mut out = String::new();
    write(f, style, &mut out);
    out
}

fn is_binary(f: &Ltl) -> bool {
    matches!(f, Ltl::And(_) | Ltl::Or(_) | Ltl::Implies(..))
}

fn value_text(v: &Value, style: Style) -> String {
    match (v, style) {
        (Value::Bool(b), Style::Compact) => b.to_string(),
        _ => v.to_string(),
    }
}

fn write(f: &Ltl, style: Style, out: &mut String) {
    match f {
        Ltl::True => out.push_str(if style != Style::Compact { "TRUE" } else { "true" }),
        Ltl::False => out.push_str(if style != Style::Compact { "FALSE" } else { "false" }),
        Ltl::Prop(p) => out.push_str(p),
        Ltl::Atom(a) => {
            let gap = if style == Style::Compact { "" } else { " " };
            out.push_str(&a.lhs.to_string());
            out.push_str(gap);
            out.push_str(a.op.symbol());
            out.push_str(gap);
            match &a.rhs {
                Operand::Var(v) => out.push_str(&v.to_string()),
                Operand::Value(v) => out.push_str(&value_text(v, style)),
            }
        }
        Ltl::Not(inner) => match style {
            Style::Surface | Style::Sal => unary("NOT", inner, style, out),
            Style::Compact => {
                out.push('!');
                if matches!(**inner, Ltl::Prop(_) | Ltl::True | Ltl::False) {
                    write(inner, style, out);
                } else {
                    paren(inner, style, out);
                }
            }
        },
        Ltl::Next(inner) => unary("X", inner, style, out),
        Ltl::Globally(inner) => unary("G", inner, style, out),
        Ltl::Finally(inner) => unary("F", inner, style, out),
        Ltl::And(cs) | Ltl::Or(cs) => {
            let sep = match (f, style) {
                (Ltl::And(_), Style::Compact) => " & ",
                (Ltl::And(_), _) => " AND ",
                (_, Style::Compact) => " | ",
                (_, _) => " OR ",
            };
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                if is_binary(c) {
                    paren(c, style, out);
                } else {
                    write(c, style, out);
                }
            }
        }
        Ltl::Implies(a, b) => {
            let arrow = if style != Style::Compact { " => " } else { " -> " };
            for (i, side) in [a, b].into_iter().enumerate() {
                if i == 1 {
                    out.push_str(arrow);
                }
                let wrap = match style {
                    Style::Surface => is_binary(side) || matches!(**side, Ltl::Atom(_)),
                    Style::Compact | Style::Sal => is_binary(side),
                };
                if wrap {
                    paren(side, style, out);
                } else {
                    write(side, style, out);
                }
            }
        }
    }
}

fn paren(f: &Ltl, style: Style, out: &mut String) {
    out.push('(');
    write(f, style, out);
    out.push(')');
}

fn unary(op: &str, inner: &Ltl, style: Style, out: &mut String) {
    out.push_str(op);
    match style {
        Style::Surface | Style::Sal => paren(inner, style, out),
        Style::Compact => {
            out.push(' ');
            if is_binary(inner) || matches!(inner, Ltl::Atom(_)) {
                paren(inner, style, out);
            } else {
                write(inner, style, out);
            }
        }
    }
}
