//! Annotated domains: STRIPS schemas with certain and possible conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::sexpr::{read_all, Pos, Sexpr};
use crate::error::ParseError;

pub const OBJECT: &str = "object";

/// A predicate applied to terms. Lifted atoms carry `?variables`, ground
/// atoms carry object names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| !a.starts_with('?'))
    }

    /// Substitutes variables through `binding`; unbound terms are kept.
    pub fn substitute(&self, binding: &BTreeMap<&str, &str>) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|a| {
                    binding
                        .get(a.as_str())
                        .map_or_else(|| a.clone(), |s| s.to_string())
                })
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// Which part of an action a possible condition belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Pre,
    Add,
    Del,
}

impl Slot {
    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Pre => "pre",
            Slot::Add => "add",
            Slot::Del => "del",
        }
    }

    /// The value of a condition in this slot that admits more plans:
    /// preconditions and deletes relax when absent, adds when present.
    pub fn relaxing_presence(self) -> bool {
        matches!(self, Slot::Add)
    }

    pub fn parse(s: &str) -> Option<Slot> {
        match s {
            "pre" => Some(Slot::Pre),
            "add" => Some(Slot::Add),
            "del" => Some(Slot::Del),
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One annotated slot of one lifted schema: the unit being elicited.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PossibleCondition {
    pub schema: String,
    pub slot: Slot,
    pub atom: Atom,
}

impl fmt::Display for PossibleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.schema, self.slot, self.atom)
    }
}

impl std::str::FromStr for PossibleCondition {
    type Err = String;

    /// Parses the `schema:slot:(atom args)` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("malformed condition `{s}`, expected schema:slot:(atom ...)");
        let (schema, rest) = s.split_once(':').ok_or_else(bad)?;
        let (slot, atom) = rest.split_once(':').ok_or_else(bad)?;
        let slot = Slot::parse(slot.trim()).ok_or_else(bad)?;
        let inner = atom
            .trim()
            .strip_prefix('(')
            .and_then(|a| a.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut parts = inner.split_whitespace().map(|t| t.to_lowercase());
        let predicate = parts.next().ok_or_else(bad)?;
        Ok(PossibleCondition {
            schema: schema.trim().to_lowercase(),
            slot,
            atom: Atom {
                predicate,
                args: parts.collect(),
            },
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: BTreeSet<Atom>,
    pub add: BTreeSet<Atom>,
    pub del: BTreeSet<Atom>,
    pub poss_pre: BTreeSet<Atom>,
    pub poss_add: BTreeSet<Atom>,
    pub poss_del: BTreeSet<Atom>,
}

impl ActionSchema {
    pub fn possible(&self, slot: Slot) -> &BTreeSet<Atom> {
        match slot {
            Slot::Pre => &self.poss_pre,
            Slot::Add => &self.poss_add,
            Slot::Del => &self.poss_del,
        }
    }

    pub fn possible_mut(&mut self, slot: Slot) -> &mut BTreeSet<Atom> {
        match slot {
            Slot::Pre => &mut self.poss_pre,
            Slot::Add => &mut self.poss_add,
            Slot::Del => &mut self.poss_del,
        }
    }

    pub fn certain(&self, slot: Slot) -> &BTreeSet<Atom> {
        match slot {
            Slot::Pre => &self.pre,
            Slot::Add => &self.add,
            Slot::Del => &self.del,
        }
    }

    pub fn certain_mut(&mut self, slot: Slot) -> &mut BTreeSet<Atom> {
        match slot {
            Slot::Pre => &mut self.pre,
            Slot::Add => &mut self.add,
            Slot::Del => &mut self.del,
        }
    }

    pub fn param_type(&self, var: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|p| p.name == var)
            .map(|p| p.ty.as_str())
    }

    /// Checks the slot-disjointness invariants.
    pub fn check_overlaps(&self) -> Result<(), ParseError> {
        let pairs: [(&BTreeSet<Atom>, &'static str, &BTreeSet<Atom>, &'static str); 5] = [
            (
                &self.pre,
                "a precondition",
                &self.poss_pre,
                "a possible precondition",
            ),
            (
                &self.add,
                "an add effect",
                &self.poss_add,
                "a possible add effect",
            ),
            (
                &self.del,
                "a delete effect",
                &self.poss_del,
                "a possible delete effect",
            ),
            (&self.add, "an add effect", &self.del, "a delete effect"),
            (
                &self.poss_add,
                "a possible add effect",
                &self.poss_del,
                "a possible delete effect",
            ),
        ];
        for (a, an, b, bn) in pairs {
            if let Some(atom) = a.intersection(b).next() {
                return Err(ParseError::Overlap {
                    action: self.name.clone(),
                    atom: atom.to_string(),
                    first: an,
                    second: bn,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent; `object` is implicit.
    pub types: BTreeMap<String, String>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub schemas: Vec<ActionSchema>,
}

impl Domain {
    /// All possible conditions in canonical (sorted) order.
    pub fn conditions(&self) -> Vec<PossibleCondition> {
        let mut out = Vec::new();
        for s in &self.schemas {
            for slot in [Slot::Pre, Slot::Add, Slot::Del] {
                for atom in s.possible(slot) {
                    out.push(PossibleCondition {
                        schema: s.name.clone(),
                        slot,
                        atom: atom.clone(),
                    });
                }
            }
        }
        out.sort();
        out
    }

    /// Number of possible-condition slots, so the candidate space has 2^n models.
    pub fn n(&self) -> usize {
        self.schemas
            .iter()
            .map(|s| s.poss_pre.len() + s.poss_add.len() + s.poss_del.len())
            .sum()
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        ty == OBJECT || self.types.contains_key(ty)
    }

    /// True when `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == OBJECT {
            return true;
        }
        let mut cur = ty;
        // bounded walk guards against cyclic declarations
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.get(cur) {
                Some(parent) if parent != cur => cur = parent,
                _ => return false,
            }
        }
        false
    }

    /// The same domain with every possible condition dropped.
    pub fn without_annotations(&self) -> Domain {
        let mut d = self.clone();
        for s in &mut d.schemas {
            s.poss_pre.clear();
            s.poss_add.clear();
            s.poss_del.clear();
        }
        d
    }
}

pub(crate) fn parse_typed_list(items: &[Sexpr]) -> Result<Vec<(String, String, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = items[i].expect_sym("a name")?;
        if sym == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| ParseError::syntax(items[i].pos(), "missing type after '-'"))?
                .expect_sym("a type name")?;
            if pending.is_empty() {
                return Err(ParseError::syntax(items[i].pos(), "type without names"));
            }
            for (n, p) in pending.drain(..) {
                out.push((n, ty.to_string(), p));
            }
            i += 2;
        } else {
            pending.push((sym.to_string(), items[i].pos()));
            i += 1;
        }
    }
    for (n, p) in pending {
        out.push((n, OBJECT.to_string(), p));
    }
    Ok(out)
}

/// A parsed literal before validation.
pub(crate) struct RawLiteral {
    pub atom: Atom,
    pub negated: bool,
    pub pos: Pos,
}

pub(crate) fn parse_atom(e: &Sexpr) -> Result<Atom, ParseError> {
    let items = e.expect_list("an atom")?;
    let predicate = items
        .first()
        .ok_or_else(|| ParseError::syntax(e.pos(), "empty atom"))?
        .expect_sym("a predicate name")?;
    if matches!(
        predicate,
        "and" | "not" | "or" | "forall" | "exists" | "when" | "imply"
    ) {
        return Err(ParseError::syntax(
            e.pos(),
            format!("unexpected `{predicate}`, expected an atom"),
        ));
    }
    let args = items[1..]
        .iter()
        .map(|a| a.expect_sym("a term").map(str::to_string))
        .collect::<Result<_, _>>()?;
    Ok(Atom {
        predicate: predicate.to_string(),
        args,
    })
}

/// Flattens `()`, a single literal, or `(and lit...)` into literals.
pub(crate) fn parse_conjunction(e: &Sexpr) -> Result<Vec<RawLiteral>, ParseError> {
    let items = e.expect_list("a condition")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    match e.head() {
        Some("and") => {
            let mut out = Vec::new();
            for c in &items[1..] {
                out.extend(parse_conjunction(c)?);
            }
            Ok(out)
        }
        Some("not") => {
            if items.len() != 2 {
                return Err(ParseError::syntax(e.pos(), "`not` takes exactly one atom"));
            }
            Ok(vec![RawLiteral {
                atom: parse_atom(&items[1])?,
                negated: true,
                pos: e.pos(),
            }])
        }
        _ => Ok(vec![RawLiteral {
            atom: parse_atom(e)?,
            negated: false,
            pos: e.pos(),
        }]),
    }
}

fn check_atom(
    domain: &Domain,
    schema: &ActionSchema,
    atom: &Atom,
    pos: Pos,
    constants: &BTreeMap<String, String>,
) -> Result<(), ParseError> {
    let decl =
        domain
            .predicate(&atom.predicate)
            .ok_or_else(|| ParseError::UndeclaredPredicate {
                pos,
                name: atom.predicate.clone(),
            })?;
    if decl.params.len() != atom.args.len() {
        return Err(ParseError::Arity {
            pos,
            predicate: atom.predicate.clone(),
            expected: decl.params.len(),
            found: atom.args.len(),
        });
    }
    for (arg, p) in atom.args.iter().zip(&decl.params) {
        let ty = if arg.starts_with('?') {
            schema
                .param_type(arg)
                .ok_or_else(|| ParseError::UnknownParameter {
                    pos,
                    name: arg.clone(),
                })?
        } else {
            constants
                .get(arg)
                .map(String::as_str)
                .ok_or_else(|| ParseError::UnknownObject {
                    pos,
                    name: arg.clone(),
                })?
        };
        if !domain.is_subtype(ty, &p.ty) {
            return Err(ParseError::TypeMismatch {
                pos,
                predicate: atom.predicate.clone(),
                arg: arg.clone(),
                expected: p.ty.clone(),
                found: ty.to_string(),
            });
        }
    }
    Ok(())
}

fn parse_action(domain: &Domain, items: &[Sexpr], pos: Pos) -> Result<ActionSchema, ParseError> {
    let name = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(pos, "action without a name"))?
        .expect_sym("an action name")?;
    let mut schema = ActionSchema {
        name: name.to_string(),
        ..Default::default()
    };
    let constants: BTreeMap<String, String> = domain
        .constants
        .iter()
        .map(|c| (c.name.clone(), c.ty.clone()))
        .collect();
    let mut sections: Vec<(&str, &Sexpr)> = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = items[i].expect_sym("an action keyword")?;
        let value = items.get(i + 1).ok_or_else(|| {
            ParseError::syntax(items[i].pos(), format!("missing value for {key}"))
        })?;
        sections.push((key, value));
        i += 2;
    }
    // parameters first so that conditions can be checked against them
    for (key, value) in &sections {
        if matches!(*key, ":parameters" | ":parameter") {
            for (n, ty, p) in parse_typed_list(value.expect_list("a parameter list")?)? {
                if !n.starts_with('?') {
                    return Err(ParseError::syntax(
                        p,
                        format!("parameter `{n}` must start with '?'"),
                    ));
                }
                if !domain.has_type(&ty) {
                    return Err(ParseError::UndeclaredType { pos: p, name: ty });
                }
                if schema.param_type(&n).is_some() {
                    return Err(ParseError::Duplicate {
                        what: "parameter",
                        name: n,
                    });
                }
                schema.params.push(TypedName { name: n, ty });
            }
        }
    }
    for (key, value) in &sections {
        let possible = match *key {
            ":parameters" | ":parameter" => continue,
            ":precondition" | ":possible-precondition" => {
                let possible = *key == ":possible-precondition";
                for lit in parse_conjunction(value)? {
                    if lit.negated {
                        return Err(ParseError::NegativePrecondition { pos: lit.pos });
                    }
                    check_atom(domain, &schema, &lit.atom, lit.pos, &constants)?;
                    let set = if possible {
                        &mut schema.poss_pre
                    } else {
                        &mut schema.pre
                    };
                    set.insert(lit.atom);
                }
                continue;
            }
            ":effect" => false,
            ":possible-effect" => true,
            other => {
                return Err(ParseError::syntax(
                    value.pos(),
                    format!("unsupported action section `{other}`"),
                ))
            }
        };
        for lit in parse_conjunction(value)? {
            check_atom(domain, &schema, &lit.atom, lit.pos, &constants)?;
            let set = match (possible, lit.negated) {
                (false, false) => &mut schema.add,
                (false, true) => &mut schema.del,
                (true, false) => &mut schema.poss_add,
                (true, true) => &mut schema.poss_del,
            };
            set.insert(lit.atom);
        }
    }
    schema.check_overlaps()?;
    Ok(schema)
}

/// Parses an annotated PDDL domain.
pub fn parse_domain(text: &str) -> Result<Domain, ParseError> {
    let top = read_all(text)?;
    let root = match top.as_slice() {
        [root] => root,
        [] => {
            return Err(ParseError::syntax(
                Pos { line: 1, column: 1 },
                "empty input",
            ))
        }
        [_, extra, ..] => {
            return Err(ParseError::syntax(
                extra.pos(),
                "trailing input after domain",
            ))
        }
    };
    let items = root.expect_list("(define ...)")?;
    if root.head() != Some("define") {
        return Err(ParseError::syntax(
            root.pos(),
            "expected (define (domain ...) ...)",
        ));
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(root.pos(), "missing (domain <name>)"))?;
    let mut domain = Domain::default();
    match header.expect_list("(domain <name>)")? {
        [kw, name] if kw.as_sym() == Some("domain") => {
            domain.name = name.expect_sym("a domain name")?.into()
        }
        _ => return Err(ParseError::syntax(header.pos(), "expected (domain <name>)")),
    }
    let mut actions = Vec::new();
    for section in &items[2..] {
        let body = section.expect_list("a domain section")?;
        match section.head() {
            Some(":requirements") => {
                for r in &body[1..] {
                    domain
                        .requirements
                        .push(r.expect_sym("a requirement")?.to_string());
                }
            }
            Some(":types") => {
                for (n, parent, _) in parse_typed_list(&body[1..])? {
                    domain.types.insert(n, parent);
                }
                // parents only named after '-' are implicitly objects
                let parents: Vec<String> = domain.types.values().cloned().collect();
                for p in parents {
                    if !domain.has_type(&p) {
                        domain.types.insert(p, OBJECT.to_string());
                    }
                }
            }
            Some(":constants") => {
                for (n, ty, p) in parse_typed_list(&body[1..])? {
                    if !domain.has_type(&ty) {
                        return Err(ParseError::UndeclaredType { pos: p, name: ty });
                    }
                    domain.constants.push(TypedName { name: n, ty });
                }
            }
            Some(":predicates") => {
                for decl in &body[1..] {
                    let parts = decl.expect_list("a predicate declaration")?;
                    let name = parts
                        .first()
                        .ok_or_else(|| {
                            ParseError::syntax(decl.pos(), "empty predicate declaration")
                        })?
                        .expect_sym("a predicate name")?;
                    let mut params = Vec::new();
                    for (n, ty, p) in parse_typed_list(&parts[1..])? {
                        if !domain.has_type(&ty) {
                            return Err(ParseError::UndeclaredType { pos: p, name: ty });
                        }
                        params.push(TypedName { name: n, ty });
                    }
                    if domain.predicate(name).is_some() {
                        return Err(ParseError::Duplicate {
                            what: "predicate",
                            name: name.into(),
                        });
                    }
                    domain.predicates.push(PredicateDecl {
                        name: name.to_string(),
                        params,
                    });
                }
            }
            Some(":action") => actions.push(section),
            Some(other) => {
                return Err(ParseError::syntax(
                    section.pos(),
                    format!("unsupported domain section `{other}`"),
                ))
            }
            None => {
                return Err(ParseError::syntax(
                    section.pos(),
                    "expected a keyword section",
                ))
            }
        }
    }
    for a in actions {
        let schema = parse_action(&domain, a.as_list().expect("checked above"), a.pos())?;
        if domain.schema(&schema.name).is_some() {
            return Err(ParseError::Duplicate {
                what: "action",
                name: schema.name,
            });
        }
        domain.schemas.push(schema);
    }
    Ok(domain)
}

fn write_typed(f: &mut fmt::Formatter<'_>, names: &[TypedName]) -> fmt::Result {
    for (i, t) in names.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{} - {}", t.name, t.ty)?;
    }
    Ok(())
}

fn write_conj<'a>(
    f: &mut fmt::Formatter<'_>,
    pos: impl Iterator<Item = &'a Atom>,
    neg: impl Iterator<Item = &'a Atom>,
) -> fmt::Result {
    let lits: Vec<String> = pos
        .map(|a| a.to_string())
        .chain(neg.map(|a| format!("(not {a})")))
        .collect();
    if lits.is_empty() {
        write!(f, "()")
    } else {
        write!(f, "(and {})", lits.join(" "))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            let decls: Vec<String> = self
                .types
                .iter()
                .map(|(t, p)| format!("{t} - {p}"))
                .collect();
            writeln!(f, "  (:types {})", decls.join(" "))?;
        }
        if !self.constants.is_empty() {
            write!(f, "  (:constants ")?;
            write_typed(f, &self.constants)?;
            writeln!(f, ")")?;
        }
        write!(f, "  (:predicates")?;
        for p in &self.predicates {
            write!(f, " ({}", p.name)?;
            if !p.params.is_empty() {
                write!(f, " ")?;
                write_typed(f, &p.params)?;
            }
            write!(f, ")")?;
        }
        writeln!(f, ")")?;
        for s in &self.schemas {
            writeln!(f, "  (:action {}", s.name)?;
            write!(f, "    :parameters (")?;
            write_typed(f, &s.params)?;
            writeln!(f, ")")?;
            write!(f, "    :precondition ")?;
            write_conj(f, s.pre.iter(), std::iter::empty())?;
            write!(f, "\n    :possible-precondition ")?;
            write_conj(f, s.poss_pre.iter(), std::iter::empty())?;
            write!(f, "\n    :effect ")?;
            write_conj(f, s.add.iter(), s.del.iter())?;
            write!(f, "\n    :possible-effect ")?;
            write_conj(f, s.poss_add.iter(), s.poss_del.iter())?;
            writeln!(f, ")")?;
        }
        writeln!(f, ")")
    }
}
