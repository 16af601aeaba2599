use std::collections::{BTreeMap, BTreeSet};

use super::domain::{
    err, expect_list, expect_symbol, parse_requirements, parse_typed_list, split_define,
};
use super::sexpr::{self, syntax, SExpr};
use super::{Atom, DomainModel, ProblemModel, Requirement, TypedName};
use crate::error::{GroundError, ParseError, ParseErrorKind};

type Result<T> = std::result::Result<T, ParseError>;

fn ground_atom(
    e: &SExpr,
    domain: &DomainModel,
    objects: &BTreeMap<String, String>,
) -> Result<Atom> {
    let items = expect_list(e, "atom")?;
    let head = items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
    let name = expect_symbol(head, "predicate name")?;
    if name == "=" {
        return Err(err(
            e.pos(),
            ParseErrorKind::Unsupported("= in problem".into()),
        ));
    }
    let pred = domain.predicate(name).ok_or_else(|| {
        err(
            head.pos(),
            ParseErrorKind::UndeclaredPredicate(name.to_string()),
        )
    })?;
    let args = &items[1..];
    if args.len() != pred.params.len() {
        return Err(err(
            e.pos(),
            ParseErrorKind::PredicateArity {
                name: name.to_string(),
                expected: pred.params.len(),
                found: args.len(),
            },
        ));
    }
    let mut out = Vec::with_capacity(args.len());
    for (a, param) in args.iter().zip(&pred.params) {
        let o = expect_symbol(a, "object")?;
        let ty = objects
            .get(o)
            .ok_or_else(|| err(a.pos(), GroundError::UnknownConstant(o.to_string()).into()))?;
        if !domain.types.is_subtype(ty, &param.ty) {
            return Err(err(
                a.pos(),
                GroundError::TypeMismatch {
                    object: o.to_string(),
                    actual: ty.clone(),
                    expected: param.ty.clone(),
                }
                .into(),
            ));
        }
        out.push(o.to_string());
    }
    Ok(Atom {
        predicate: name.to_string(),
        args: out,
    })
}

fn goal_atoms(
    e: &SExpr,
    domain: &DomainModel,
    objects: &BTreeMap<String, String>,
    out: &mut Vec<Atom>,
) -> Result<()> {
    let items = expect_list(e, "goal")?;
    let Some(head) = items.first() else {
        return Ok(());
    };
    match expect_symbol(head, "connective or predicate")? {
        "and" => {
            for g in &items[1..] {
                goal_atoms(g, domain, objects, out)?;
            }
        }
        h @ ("not" | "or" | "imply" | "exists" | "forall" | "=" | "preference") => {
            return Err(err(e.pos(), ParseErrorKind::UnsupportedGoal(h.to_string())));
        }
        _ => {
            let a = ground_atom(e, domain, objects)?;
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    Ok(())
}

/// Parses a PDDL problem file against an already parsed domain.
pub fn parse_problem(text: &str, domain: &DomainModel) -> Result<ProblemModel> {
    let root = sexpr::parse_one(text)?;
    let (name, sections) = split_define(&root, "problem")?;

    let mut found: BTreeMap<&str, &SExpr> = BTreeMap::new();
    for sec in sections {
        let head = sec
            .head()
            .ok_or_else(|| syntax(sec.pos(), "expected a problem section"))?;
        match head {
            ":domain" | ":requirements" | ":objects" | ":init" | ":goal" => {
                if found.insert(head, sec).is_some() {
                    return Err(err(
                        sec.pos(),
                        ParseErrorKind::Duplicate {
                            what: "section",
                            name: head.to_string(),
                        },
                    ));
                }
            }
            other => {
                return Err(err(
                    sec.pos(),
                    ParseErrorKind::Unsupported(other.to_string()),
                ))
            }
        }
    }
    let body = |e: &SExpr| e.as_list().unwrap()[1..].to_vec();

    let dom_sec = found
        .get(":domain")
        .ok_or_else(|| syntax(root.pos(), "missing (:domain <name>)"))?;
    let dom_items = body(dom_sec);
    if dom_items.len() != 1 {
        return Err(syntax(dom_sec.pos(), "expected (:domain <name>)"));
    }
    let domain_name = expect_symbol(&dom_items[0], "domain name")?.to_string();
    if domain_name != domain.name {
        return Err(err(
            dom_items[0].pos(),
            ParseErrorKind::DomainMismatch {
                expected: domain.name.clone(),
                found: domain_name,
            },
        ));
    }

    let mut typing = domain.has_requirement(Requirement::Typing);
    if let Some(r) = found.get(":requirements") {
        typing |= parse_requirements(&body(r))?.contains(&Requirement::Typing);
    }

    let mut table: BTreeMap<String, String> = domain
        .constants
        .iter()
        .map(|c| (c.name.clone(), c.ty.clone()))
        .collect();
    let mut objects = Vec::new();
    if let Some(o) = found.get(":objects") {
        for (name, ty, pos) in parse_typed_list(&body(o), typing)? {
            if !domain.types.contains(&ty) {
                return Err(err(pos, ParseErrorKind::UndeclaredType(ty)));
            }
            if table.insert(name.clone(), ty.clone()).is_some() {
                return Err(err(
                    pos,
                    ParseErrorKind::Duplicate {
                        what: "object",
                        name,
                    },
                ));
            }
            objects.push(TypedName { name, ty });
        }
    }

    let mut init = BTreeSet::new();
    if let Some(i) = found.get(":init") {
        for a in body(i) {
            init.insert(ground_atom(&a, domain, &table)?);
        }
    }

    let goal_sec = found
        .get(":goal")
        .ok_or_else(|| syntax(root.pos(), "missing (:goal ...)"))?;
    let goal_body = body(goal_sec);
    if goal_body.len() != 1 {
        return Err(syntax(goal_sec.pos(), "expected exactly one goal formula"));
    }
    let mut goal = Vec::new();
    goal_atoms(&goal_body[0], domain, &table, &mut goal)?;

    Ok(ProblemModel {
        name,
        domain_name,
        objects,
        init,
        goal,
    })
}
