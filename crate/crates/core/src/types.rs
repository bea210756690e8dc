//! Type evidence, union-find merging into equivalence classes, and variable
//! categories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::VariablePartition;
use crate::ltl::{Ltl, Operand, Value, VarRef};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EvidenceKind {
    IsNumber,
    HasEnumValue(String),
    SameTypeAs(VarRef),
    IsBool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeEvidence {
    pub subject: VarRef,
    pub kind: EvidenceKind,
    /// `(formula index, atom index)`; fixes enum member order.
    pub origin: (usize, usize),
}

fn value_kind(v: &Value) -> EvidenceKind {
    match v {
        Value::Bool(_) => EvidenceKind::IsBool,
        Value::Int(_) | Value::Arith(_) => EvidenceKind::IsNumber,
        Value::Named(n) => EvidenceKind::HasEnumValue(n.clone()),
    }
}

pub fn gather_evidence(formulas: &[Ltl]) -> Vec<TypeEvidence> {
    let mut out = Vec::new();
    for (fi, f) in formulas.iter().enumerate() {
        let mut k = 0;
        let mut push = |subject: VarRef, kind: EvidenceKind, k: &mut usize| {
            out.push(TypeEvidence { subject, kind, origin: (fi, *k) });
            *k += 1;
        };
        for sub in f.subtrees() {
            match sub {
                Ltl::Prop(p) => push(VarRef::dotted(p), EvidenceKind::IsBool, &mut k),
                Ltl::Atom(a) if a.op.is_ordering() => {
                    push(a.lhs.clone(), EvidenceKind::IsNumber, &mut k);
                    match &a.rhs {
                        Operand::Var(v) => push(v.clone(), EvidenceKind::IsNumber, &mut k),
                        Operand::Value(Value::Named(n)) => push(VarRef::dotted(n), EvidenceKind::IsNumber, &mut k),
                        Operand::Value(_) => {}
                    }
                }
                Ltl::Atom(a) => match &a.rhs {
                    Operand::Var(v) => push(a.lhs.clone(), EvidenceKind::SameTypeAs(v.clone()), &mut k),
                    Operand::Value(v) => push(a.lhs.clone(), value_kind(v), &mut k),
                },
                _ => {}
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Input,
    StateOnly,
    StateAndOutput,
    OutputOnly,
    Wire,
}

impl Category {
    pub fn is_state(self) -> bool {
        matches!(self, Category::StateOnly | Category::StateAndOutput)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Input => "input",
            Category::StateOnly => "state_only",
            Category::StateAndOutput => "state_and_output",
            Category::OutputOnly => "output_only",
            Category::Wire => "wire",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VarType {
    Numeric,
    Bool,
    Enum { values: Vec<String> },
    Record { fields: BTreeMap<String, usize> },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeClass {
    pub members: BTreeSet<VarRef>,
    pub ty: VarType,
    /// Every annotation seen, kept when they conflict.
    pub annotations: BTreeSet<String>,
    pub conflict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    pub classes: Vec<TypeClass>,
    pub class_of: BTreeMap<VarRef, usize>,
    /// Keyed by root variable name.
    pub category: BTreeMap<String, Category>,
}

impl SymbolTable {
    pub fn type_of(&self, v: &VarRef) -> &VarType {
        self.class_of.get(v).map(|c| &self.classes[*c].ty).unwrap_or(&VarType::Unknown)
    }

    pub fn category_of(&self, name: &str) -> Category {
        self.category.get(name).copied().unwrap_or(Category::Wire)
    }

    pub fn variables(&self) -> impl Iterator<Item = &VarRef> {
        self.class_of.keys()
    }

    /// Enum members of `v`, empty for other types.
    pub fn enum_values(&self, v: &VarRef) -> &[String] {
        match self.type_of(v) {
            VarType::Enum { values } => values,
            _ => &[],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vars: Vec<serde_json::Value> = self
            .class_of
            .iter()
            .map(|(v, c)| {
                serde_json::json!({
                    "name": v.to_string(),
                    "class": c,
                    "type": self.classes[*c].ty,
                    "category": self.category_of(v.root()).to_string(),
                    "conflict": self.classes[*c].conflict,
                })
            })
            .collect();
        let categories: BTreeMap<String, String> =
            self.category.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        serde_json::json!({ "variables": vars, "classes": self.classes, "categories": categories })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    /// The smaller index becomes the representative, so the result does not
    /// depend on union order.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub fn merge_types(evidence: &[TypeEvidence], partition: &VariablePartition) -> (SymbolTable, Vec<String>) {
    let mut vars: BTreeSet<VarRef> = BTreeSet::new();
    for e in evidence {
        vars.insert(e.subject.clone());
        if let EvidenceKind::SameTypeAs(o) = &e.kind {
            vars.insert(o.clone());
        }
    }
    let roots_with_fields: BTreeSet<VarRef> =
        vars.iter().filter(|v| v.is_record_access()).map(|v| VarRef::new(v.root())).collect();
    vars.extend(roots_with_fields);
    let index: BTreeMap<VarRef, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let mut uf = UnionFind::new(vars.len());
    for e in evidence {
        if let EvidenceKind::SameTypeAs(o) = &e.kind {
            uf.union(index[&e.subject], index[o]);
        }
    }
    let mut rep_to_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut class_of = BTreeMap::new();
    for (v, i) in &index {
        let rep = uf.find(*i);
        let next = rep_to_class.len();
        let c = *rep_to_class.entry(rep).or_insert(next);
        class_of.insert(v.clone(), c);
    }
    let n = rep_to_class.len();
    let mut members = vec![BTreeSet::new(); n];
    for (v, c) in &class_of {
        members[*c].insert(v.clone());
    }
    let mut numeric = vec![false; n];
    let mut boolean = vec![false; n];
    let mut values: Vec<BTreeMap<String, (usize, usize)>> = vec![BTreeMap::new(); n];
    for e in evidence {
        let c = class_of[&e.subject];
        match &e.kind {
            EvidenceKind::IsNumber => numeric[c] = true,
            EvidenceKind::IsBool => boolean[c] = true,
            EvidenceKind::HasEnumValue(val) => {
                let slot = values[c].entry(val.clone()).or_insert(e.origin);
                *slot = (*slot).min(e.origin);
            }
            EvidenceKind::SameTypeAs(_) => {}
        }
    }
    let mut fields: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); n];
    for (v, c) in &class_of {
        if v.is_record_access() {
            let root = class_of[&VarRef::new(v.root())];
            fields[root].insert(v.path[1..].join("."), *c);
        }
    }
    let mut warnings = Vec::new();
    let mut classes = Vec::with_capacity(n);
    for c in 0..n {
        let mut annotations = BTreeSet::new();
        if numeric[c] {
            annotations.insert("numeric".to_string());
        }
        if boolean[c] {
            annotations.insert("bool".to_string());
        }
        if !values[c].is_empty() {
            annotations.insert("enum".to_string());
        }
        if !fields[c].is_empty() {
            annotations.insert("record".to_string());
        }
        let conflict = annotations.len() > 1;
        let names: Vec<String> = members[c].iter().map(VarRef::to_string).collect();
        if conflict {
            let list: Vec<&str> = annotations.iter().map(String::as_str).collect();
            warnings.push(format!("type conflict for {}: {}", names.join(", "), list.join(" vs ")));
        }
        let ty = if !fields[c].is_empty() {
            VarType::Record { fields: fields[c].clone() }
        } else if !values[c].is_empty() {
            let mut ordered: Vec<(&(usize, usize), &String)> = values[c].iter().map(|(v, o)| (o, v)).collect();
            ordered.sort();
            VarType::Enum { values: ordered.into_iter().map(|(_, v)| v.clone()).collect() }
        } else if boolean[c] {
            VarType::Bool
        } else if numeric[c] {
            VarType::Numeric
        } else {
            warnings.push(format!("no type evidence for {}", names.join(", ")));
            VarType::Unknown
        };
        classes.push(TypeClass { members: members[c].clone(), ty, annotations, conflict });
    }
    let mut category = BTreeMap::new();
    for v in class_of.keys() {
        category.insert(v.root().to_string(), Category::Wire);
    }
    let given = [
        (&partition.inputs, Category::Input),
        (&partition.state_only, Category::StateOnly),
        (&partition.state_and_output, Category::StateAndOutput),
        (&partition.pure_output, Category::OutputOnly),
    ];
    for (set, cat) in given {
        for name in set {
            category.insert(name.clone(), cat);
        }
    }
    (SymbolTable { classes, class_of, category }, warnings)
}

/// Variables a formula assigns: the consequent of a (globally) guarded
/// implication, or the whole body otherwise. The flag marks next-state use.
pub fn assignments(f: &Ltl) -> Vec<(VarRef, Operand, bool)> {
    fn body(f: &Ltl) -> &Ltl {
        match f {
            Ltl::Globally(inner) => body(inner),
            Ltl::Implies(_, cons) => cons,
            other => other,
        }
    }
    fn collect(f: &Ltl, next: bool, out: &mut Vec<(VarRef, Operand, bool)>) {
        match f {
            Ltl::Atom(a) if a.op == crate::ltl::CmpOp::Eq => out.push((a.lhs.clone(), a.rhs.clone(), next)),
            Ltl::Prop(p) => out.push((VarRef::dotted(p), Operand::Value(Value::Bool(true)), next)),
            Ltl::And(cs) => cs.iter().for_each(|c| collect(c, next, out)),
            Ltl::Next(inner) => collect(inner, true, out),
            _ => {}
        }
    }
    let mut out = Vec::new();
    collect(body(f), false, &mut out);
    out
}

/// Inputs that some formula assigns are demoted to wires.
pub fn reconcile_categories(symbols: &mut SymbolTable, formulas: &[Ltl]) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut demoted = BTreeSet::new();
    for f in formulas {
        for (v, _, _) in assignments(f) {
            let root = v.root().to_string();
            if symbols.category_of(&root) == Category::Input && demoted.insert(root.clone()) {
                warnings.push(format!("{root} is declared as input but assigned by a requirement; treated as wire"));
            }
        }
    }
    for name in demoted {
        symbols.category.insert(name, Category::Wire);
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;

    fn table(src: &[&str]) -> (SymbolTable, Vec<String>) {
        let fs: Vec<Ltl> = src.iter().map(|s| parse(s).unwrap()).collect();
        merge_types(&gather_evidence(&fs), &VariablePartition::default())
    }

    #[test]
    fn evidence_kinds() {
        let f = parse("G((Mode = INIT AND Ready = TRUE AND a < b) => X(Mode = NORMAL))").unwrap();
        let ev = gather_evidence(&[f]);
        let kinds: Vec<(String, EvidenceKind)> = ev.iter().map(|e| (e.subject.to_string(), e.kind.clone())).collect();
        assert!(kinds.contains(&("Mode".into(), EvidenceKind::HasEnumValue("INIT".into()))));
        assert!(kinds.contains(&("Ready".into(), EvidenceKind::IsBool)));
        assert!(kinds.contains(&("a".into(), EvidenceKind::IsNumber)));
        assert!(kinds.contains(&("b".into(), EvidenceKind::IsNumber)));
    }

    #[test]
    fn enum_order_is_first_occurrence() {
        let (t, w) = table(&["Mode = INIT", "G(Mode = NORMAL => X(Mode = FAILED))"]);
        assert!(w.is_empty());
        assert_eq!(
            t.type_of(&VarRef::new("Mode")),
            &VarType::Enum { values: vec!["INIT".into(), "NORMAL".into(), "FAILED".into()] }
        );
    }

    #[test]
    fn same_type_merges_classes() {
        let known = BTreeSet::from(["b".to_string()]);
        let fs = [crate::ltl::parse_with_vars("G(a = b)", &known).unwrap(), parse("G(b = On)").unwrap()];
        let (t, _) = merge_types(&gather_evidence(&fs), &VariablePartition::default());
        assert_eq!(t.class_of[&VarRef::new("a")], t.class_of[&VarRef::new("b")]);
        assert_eq!(t.enum_values(&VarRef::new("a")), &["On".to_string()]);
    }

    #[test]
    fn conflict_is_flagged() {
        let (t, w) = table(&["G(X = 5)", "G(X = INIT)"]);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("X"));
        assert!(t.classes[t.class_of[&VarRef::new("X")]].conflict);
    }

    #[test]
    fn records_get_fields() {
        let (t, _) = table(&["G(Lower.Status = Invalid => Failure = TRUE)"]);
        match t.type_of(&VarRef::new("Lower")) {
            VarType::Record { fields } => assert!(fields.contains_key("Status")),
            other => panic!("{other:?}"),
        }
        assert_eq!(t.category_of("Lower"), Category::Wire);
    }

    #[test]
    fn assigned_inputs_become_wires() {
        let f = parse("G(a = On => b = TRUE)").unwrap();
        let partition = VariablePartition {
            inputs: ["a".to_string(), "b".to_string()].into(),
            ..Default::default()
        };
        let (mut t, _) = merge_types(&gather_evidence(std::slice::from_ref(&f)), &partition);
        let w = reconcile_categories(&mut t, &[f]);
        assert_eq!(w.len(), 1);
        assert_eq!(t.category_of("b"), Category::Wire);
        assert_eq!(t.category_of("a"), Category::Input);
    }
}
