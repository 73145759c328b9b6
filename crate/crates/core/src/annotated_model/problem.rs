use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::domain::{parse_atom, parse_conjunction, parse_typed_list, Atom, Domain, TypedName};
use super::sexpr::{read_all, Pos, Sexpr};
use crate::error::ParseError;

/// Objects, the fully specified environment state, and an optional goal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    /// Declared objects plus the domain's constants.
    pub objects: Vec<TypedName>,
    pub init: BTreeSet<Atom>,
    pub goal: BTreeSet<Atom>,
}

impl Problem {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.ty.as_str())
    }

    /// Objects whose type is `ty` or one of its subtypes, in declaration order.
    pub fn objects_of<'a>(
        &'a self,
        domain: &'a Domain,
        ty: &'a str,
    ) -> impl Iterator<Item = &'a str> + 'a {
        self.objects
            .iter()
            .filter(move |o| domain.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
    }
}

fn check_ground(
    domain: &Domain,
    objects: &BTreeMap<String, String>,
    atom: &Atom,
    pos: Pos,
) -> Result<(), ParseError> {
    let decl =
        domain
            .predicate(&atom.predicate)
            .ok_or_else(|| ParseError::UndeclaredPredicate {
                pos,
                name: atom.predicate.clone(),
            })?;
    if !atom.is_ground() {
        return Err(ParseError::NonGround {
            pos,
            atom: atom.to_string(),
        });
    }
    if decl.params.len() != atom.args.len() {
        return Err(ParseError::Arity {
            pos,
            predicate: atom.predicate.clone(),
            expected: decl.params.len(),
            found: atom.args.len(),
        });
    }
    for (arg, p) in atom.args.iter().zip(&decl.params) {
        let ty = objects.get(arg).ok_or_else(|| ParseError::UnknownObject {
            pos,
            name: arg.clone(),
        })?;
        if !domain.is_subtype(ty, &p.ty) {
            return Err(ParseError::TypeMismatch {
                pos,
                predicate: atom.predicate.clone(),
                arg: arg.clone(),
                expected: p.ty.clone(),
                found: ty.clone(),
            });
        }
    }
    Ok(())
}

/// Parses a problem file against an already parsed domain.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, ParseError> {
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
                "trailing input after problem",
            ))
        }
    };
    if root.head() != Some("define") {
        return Err(ParseError::syntax(
            root.pos(),
            "expected (define (problem ...) ...)",
        ));
    }
    let items = root.expect_list("(define ...)")?;
    let mut problem = Problem {
        objects: domain.constants.clone(),
        ..Default::default()
    };
    match items
        .get(1)
        .map(|h| h.expect_list("(problem <name>)"))
        .transpose()?
    {
        Some([kw, name]) if kw.as_sym() == Some("problem") => {
            problem.name = name.expect_sym("a problem name")?.to_string()
        }
        _ => return Err(ParseError::syntax(root.pos(), "expected (problem <name>)")),
    }
    let mut init_section: Option<&Sexpr> = None;
    let mut goal_section: Option<&Sexpr> = None;
    for section in &items[2..] {
        let body = section.expect_list("a problem section")?;
        match section.head() {
            Some(":domain") => {
                problem.domain = body
                    .get(1)
                    .ok_or_else(|| ParseError::syntax(section.pos(), "missing domain name"))?
                    .expect_sym("a domain name")?
                    .to_string()
            }
            Some(":objects") => {
                for (n, ty, p) in parse_typed_list(&body[1..])? {
                    if !domain.has_type(&ty) {
                        return Err(ParseError::UndeclaredType { pos: p, name: ty });
                    }
                    if problem.object_type(&n).is_some() {
                        return Err(ParseError::Duplicate {
                            what: "object",
                            name: n,
                        });
                    }
                    problem.objects.push(TypedName { name: n, ty });
                }
            }
            Some(":init") => init_section = Some(section),
            Some(":goal") => goal_section = Some(section),
            Some(":requirements") => {}
            Some(other) => {
                return Err(ParseError::syntax(
                    section.pos(),
                    format!("unsupported problem section `{other}`"),
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
    let objects: BTreeMap<String, String> = problem
        .objects
        .iter()
        .map(|o| (o.name.clone(), o.ty.clone()))
        .collect();
    if let Some(init) = init_section {
        for fact in &init.as_list().expect("checked")[1..] {
            let atom = parse_atom(fact)?;
            check_ground(domain, &objects, &atom, fact.pos())?;
            problem.init.insert(atom);
        }
    }
    if let Some(goal) = goal_section {
        let body = &goal.as_list().expect("checked")[1..];
        if body.len() > 1 {
            return Err(ParseError::syntax(
                goal.pos(),
                "goal must be a single conjunction",
            ));
        }
        if let Some(g) = body.first() {
            for lit in parse_conjunction(g)? {
                if lit.negated {
                    return Err(ParseError::syntax(
                        lit.pos,
                        "negative goals are not supported in problem files",
                    ));
                }
                check_ground(domain, &objects, &lit.atom, lit.pos)?;
                problem.goal.insert(lit.atom);
            }
        }
    }
    Ok(problem)
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain)?;
        let objs: Vec<String> = self
            .objects
            .iter()
            .map(|o| format!("{} - {}", o.name, o.ty))
            .collect();
        writeln!(f, "  (:objects {})", objs.join(" "))?;
        let init: Vec<String> = self.init.iter().map(Atom::to_string).collect();
        writeln!(f, "  (:init {})", init.join(" "))?;
        let goal: Vec<String> = self.goal.iter().map(Atom::to_string).collect();
        writeln!(f, "  (:goal (and {})))", goal.join(" "))
    }
}
