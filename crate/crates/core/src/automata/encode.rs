use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ltl::{Atom, CmpOp, Ltl, Operand, Value, VarRef};
use crate::model::{TransitionModel, TypeDef};
use crate::types::{SymbolTable, VarType};

use super::prop::Valuation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Bool,
    Enum(Vec<String>),
    Numeric,
}

pub fn domains_from_symbols(symbols: &SymbolTable) -> BTreeMap<VarRef, Domain> {
    symbols
        .variables()
        .filter_map(|v| {
            let d = match symbols.type_of(v) {
                VarType::Bool => Domain::Bool,
                VarType::Enum { values } => Domain::Enum(values.clone()),
                VarType::Numeric => Domain::Numeric,
                VarType::Record { .. } | VarType::Unknown => return None,
            };
            Some((v.clone(), d))
        })
        .collect()
}

fn domain_of_type(m: &TransitionModel, base: &VarRef, ty: &str, out: &mut BTreeMap<VarRef, Domain>) {
    match ty {
        "BOOLEAN" => {
            out.insert(base.clone(), Domain::Bool);
        }
        "INTEGER" => {
            out.insert(base.clone(), Domain::Numeric);
        }
        other => match m.type_decl(other).map(|t| &t.def) {
            Some(TypeDef::Enum(vs)) => {
                out.insert(base.clone(), Domain::Enum(vs.clone()));
            }
            Some(TypeDef::Record(fields)) => {
                for (f, fty) in fields {
                    domain_of_type(m, &VarRef::field(base, f.clone()), fty, out);
                }
            }
            None => {}
        },
    }
}

pub fn domains_from_model(m: &TransitionModel) -> BTreeMap<VarRef, Domain> {
    let mut out = BTreeMap::new();
    for v in &m.vars {
        domain_of_type(m, &VarRef::new(v.name.clone()), &v.ty, &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumBits {
    /// Least significant first.
    pub bits: Vec<String>,
    pub values: Vec<String>,
}

impl EnumBits {
    pub fn width(n: usize) -> usize {
        let mut k = 0;
        while (1usize << k) < n {
            k += 1;
        }
        k
    }

    pub fn pattern(&self, index: usize) -> Vec<(String, bool)> {
        self.bits.iter().enumerate().map(|(j, b)| (b.clone(), index >> j & 1 == 1)).collect()
    }

    pub fn invalid_codes(&self) -> std::ops::Range<usize> {
        self.values.len()..(1 << self.bits.len())
    }
}

fn literal(name: &str, val: bool) -> Ltl {
    if val {
        Ltl::prop(name)
    } else {
        Ltl::not(Ltl::prop(name))
    }
}

fn pattern_formula(p: &[(String, bool)]) -> Ltl {
    Ltl::and(p.iter().map(|(b, v)| literal(b, *v)).collect())
}

fn iff(a: Ltl, b: Ltl) -> Ltl {
    Ltl::or(vec![Ltl::and(vec![a.clone(), b.clone()]), Ltl::and(vec![Ltl::not(a), Ltl::not(b)])])
}

fn abbreviation(v: &VarRef) -> String {
    v.path
        .iter()
        .flat_map(|p| p.split('_'))
        .filter_map(|w| w.chars().next())
        .map(|c| c.to_ascii_uppercase())
        .collect()
}

fn operand_tag(o: &Operand, ordering: bool) -> String {
    match o {
        Operand::Var(v) => abbreviation(v),
        Operand::Value(Value::Named(n)) if ordering => abbreviation(&VarRef::dotted(n)),
        Operand::Value(Value::Int(n)) if *n < 0 => format!("M{}", -n),
        Operand::Value(v) => v.to_string().chars().filter(|c| c.is_ascii_alphanumeric()).collect(),
    }
}

/// Boolean encoding of typed atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitEncoding {
    pub domains: BTreeMap<VarRef, Domain>,
    pub enums: BTreeMap<VarRef, EnumBits>,
    /// Comparison atoms and their fresh names, in registration order.
    pub comparisons: Vec<(Atom, String)>,
    pub exclusive_comparisons: bool,
}

impl BitEncoding {
    pub fn new(domains: BTreeMap<VarRef, Domain>, exclusive_comparisons: bool) -> Self {
        let mut enums = BTreeMap::new();
        for (v, d) in &domains {
            if let Domain::Enum(values) = d {
                let stem = v.path.join("_");
                let bits = (0..EnumBits::width(values.len())).map(|j| format!("{stem}_bit{j}")).collect();
                enums.insert(v.clone(), EnumBits { bits, values: values.clone() });
            }
        }
        BitEncoding { domains, enums, comparisons: Vec::new(), exclusive_comparisons }
    }

    pub fn bool_name(v: &VarRef) -> String {
        v.to_string()
    }

    /// Propositions standing for `v` (bits, the boolean itself, or none).
    pub fn props_of(&self, v: &VarRef) -> Vec<String> {
        match self.domains.get(v) {
            Some(Domain::Bool) => vec![Self::bool_name(v)],
            Some(Domain::Enum(_)) => self.enums[v].bits.clone(),
            _ => Vec::new(),
        }
    }

    pub fn comparison_name(&mut self, a: &Atom) -> String {
        if let Some((_, n)) = self.comparisons.iter().find(|(b, _)| b == a) {
            return n.clone();
        }
        let base = format!("CMP_{}_{}_{}", abbreviation(&a.lhs), a.op.mnemonic(), operand_tag(&a.rhs, a.op.is_ordering()));
        let mut name = base.clone();
        let mut k = 2;
        while self.comparisons.iter().any(|(_, n)| *n == name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.comparisons.push((a.clone(), name.clone()));
        name
    }

    /// Formula for `v = value`, `None` when `v` has no finite encoding.
    pub fn value_formula(&self, v: &VarRef, value: &Value) -> Option<Ltl> {
        match (self.domains.get(v)?, value) {
            (Domain::Bool, Value::Bool(b)) => Some(literal(&Self::bool_name(v), *b)),
            (Domain::Enum(values), Value::Named(c)) => Some(match values.iter().position(|x| x == c) {
                Some(i) => pattern_formula(&self.enums[v].pattern(i)),
                None => Ltl::False,
            }),
            (Domain::Bool | Domain::Enum(_), _) => Some(Ltl::False),
            (Domain::Numeric, _) => None,
        }
    }

    /// Bit values for `v = value`.
    pub fn value_bits(&self, v: &VarRef, value: &Value) -> Option<Vec<(String, bool)>> {
        match (self.domains.get(v)?, value) {
            (Domain::Bool, Value::Bool(b)) => Some(vec![(Self::bool_name(v), *b)]),
            (Domain::Enum(values), Value::Named(c)) => {
                values.iter().position(|x| x == c).map(|i| self.enums[v].pattern(i))
            }
            _ => None,
        }
    }

    pub fn encode_atom(&mut self, a: &Atom) -> Ltl {
        if a.op == CmpOp::Eq {
            match &a.rhs {
                Operand::Value(val) => {
                    if let Some(f) = self.value_formula(&a.lhs, val) {
                        return f;
                    }
                }
                Operand::Var(other) => match (self.domains.get(&a.lhs).cloned(), self.domains.get(other).cloned()) {
                    (Some(Domain::Bool), Some(Domain::Bool)) => {
                        return iff(Ltl::prop(Self::bool_name(&a.lhs)), Ltl::prop(Self::bool_name(other)))
                    }
                    (Some(Domain::Enum(xs)), Some(Domain::Enum(ys))) => {
                        let common: Vec<Ltl> = xs
                            .iter()
                            .filter(|x| ys.contains(x))
                            .map(|c| {
                                let c = Value::Named(c.clone());
                                Ltl::and(vec![
                                    self.value_formula(&a.lhs, &c).unwrap(),
                                    self.value_formula(other, &c).unwrap(),
                                ])
                            })
                            .collect();
                        return Ltl::or(common);
                    }
                    _ => {}
                },
            }
        }
        Ltl::prop(self.comparison_name(a))
    }

    pub fn encode(&mut self, f: &Ltl) -> Ltl {
        f.map_leaves(&mut |leaf| match leaf {
            Ltl::Atom(a) => self.encode_atom(a),
            Ltl::Prop(p) => Ltl::prop(p.clone()),
            other => other.clone(),
        })
    }

    /// State invariants: invalid enum codes and exclusive comparison pairs.
    pub fn constraints(&self) -> Vec<Ltl> {
        let mut out = Vec::new();
        for e in self.enums.values() {
            for code in e.invalid_codes() {
                out.push(Ltl::not(pattern_formula(&e.pattern(code))));
            }
        }
        for (i, (a, na)) in self.comparisons.iter().enumerate() {
            for (b, nb) in &self.comparisons[i + 1..] {
                if a.lhs != b.lhs {
                    continue;
                }
                let lower = |o: CmpOp| matches!(o, CmpOp::Lt | CmpOp::Le);
                let upper = |o: CmpOp| matches!(o, CmpOp::Gt | CmpOp::Ge);
                let opposite = (lower(a.op) && upper(b.op)) || (upper(a.op) && lower(b.op));
                let strict = a.op != CmpOp::Le && a.op != CmpOp::Ge || b.op != CmpOp::Le && b.op != CmpOp::Ge;
                let same_bound = a.rhs == b.rhs;
                if opposite && ((same_bound && strict) || (!same_bound && self.exclusive_comparisons)) {
                    out.push(Ltl::not(Ltl::and(vec![Ltl::prop(na.clone()), Ltl::prop(nb.clone())])));
                }
            }
        }
        out
    }

    pub fn invariant(&self) -> Ltl {
        Ltl::and(self.constraints())
    }

    /// All propositions of the encoding, enum bits first.
    pub fn props(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (v, d) in &self.domains {
            match d {
                Domain::Enum(_) => out.extend(self.enums[v].bits.iter().cloned()),
                Domain::Bool => out.push(Self::bool_name(v)),
                Domain::Numeric => {}
            }
        }
        out.extend(self.comparisons.iter().map(|(_, n)| n.clone()));
        out
    }

    /// Typed reading of a valuation; unknown bits show as `?`.
    pub fn decode(&self, val: &Valuation) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (v, d) in &self.domains {
            let text = match d {
                Domain::Bool => match val.get(&Self::bool_name(v)) {
                    Some(true) => "TRUE".to_string(),
                    Some(false) => "FALSE".to_string(),
                    None => continue,
                },
                Domain::Enum(values) => {
                    let e = &self.enums[v];
                    let mut index = 0;
                    let mut known = true;
                    for (j, b) in e.bits.iter().enumerate() {
                        match val.get(b) {
                            Some(true) => index |= 1 << j,
                            Some(false) => {}
                            None => known = false,
                        }
                    }
                    if !known {
                        continue;
                    }
                    values.get(index).cloned().unwrap_or_else(|| format!("<invalid {index}>"))
                }
                Domain::Numeric => continue,
            };
            out.push((v.to_string(), text));
        }
        for (a, n) in &self.comparisons {
            if let Some(b) = val.get(n) {
                out.push((a.to_string(), if *b { "TRUE" } else { "FALSE" }.to_string()));
            }
        }
        out
    }

    /// Propositions referenced by `vars`, including comparison atoms over them.
    pub fn props_for(&self, vars: &BTreeSet<VarRef>) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = vars.iter().flat_map(|v| self.props_of(v)).collect();
        for (a, n) in &self.comparisons {
            if a.vars().any(|v| vars.contains(v)) {
                out.insert(n.clone());
            }
        }
        out
    }
}

/// Encodes one formula against the symbol table.
pub fn propositionalize(f: &Ltl, symbols: &SymbolTable, exclusive_comparisons: bool) -> (Ltl, BitEncoding) {
    let mut enc = BitEncoding::new(domains_from_symbols(symbols), exclusive_comparisons);
    let g = enc.encode(f);
    (g, enc)
}
