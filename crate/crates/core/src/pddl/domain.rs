use std::collections::{BTreeMap, BTreeSet};

use super::sexpr::{self, syntax, Pos, SExpr};
use super::{
    ActionSchema, AtomSchema, Condition, DomainModel, PredicateDef, Requirement, Term,
    TypeHierarchy, TypedName, OBJECT_TYPE,
};
use crate::error::{GroundError, ParseError, ParseErrorKind};

type Result<T> = std::result::Result<T, ParseError>;

pub(super) fn err(pos: Pos, kind: ParseErrorKind) -> ParseError {
    ParseError::new(pos, kind)
}

pub(super) fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}, found symbol")))
}

pub(super) fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.as_symbol()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}, found list")))
}

/// Splits a `define` form into its name and its keyword sections.
pub(super) fn split_define<'a>(root: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr])> {
    let items = expect_list(root, "(define ...)")?;
    match items.first().and_then(SExpr::as_symbol) {
        Some("define") => {}
        _ => return Err(syntax(root.pos(), "expected (define ...)")),
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(root.pos(), format!("missing ({kind} <name>)")))?;
    let h = expect_list(header, &format!("({kind} <name>)"))?;
    if h.len() != 2 || h[0].as_symbol() != Some(kind) {
        return Err(syntax(header.pos(), format!("expected ({kind} <name>)")));
    }
    let name = expect_symbol(&h[1], "name")?.to_string();
    Ok((name, &items[2..]))
}

pub(super) fn parse_requirements(items: &[SExpr]) -> Result<Vec<Requirement>> {
    let mut reqs = Vec::new();
    for it in items {
        let s = expect_symbol(it, "requirement keyword")?;
        let r = Requirement::parse(s).ok_or_else(|| {
            err(
                it.pos(),
                ParseErrorKind::UnsupportedRequirement(s.to_string()),
            )
        })?;
        if !reqs.contains(&r) {
            reqs.push(r);
        }
    }
    Ok(reqs)
}

/// Parses `a b - t c` style lists. Untyped names get type `object`.
pub(super) fn parse_typed_list(
    items: &[SExpr],
    typing: bool,
) -> Result<Vec<(String, String, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        let s = expect_symbol(it, "name")?;
        if s == "-" {
            if !typing {
                return Err(err(
                    it.pos(),
                    ParseErrorKind::MissingRequirement {
                        construct: "typed list".into(),
                        requirement: ":typing",
                    },
                ));
            }
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| syntax(it.pos(), "missing type after '-'"))?;
            if ty_expr.head() == Some("either") {
                return Err(err(
                    ty_expr.pos(),
                    ParseErrorKind::Unsupported("either".into()),
                ));
            }
            let ty = expect_symbol(ty_expr, "type name")?;
            if pending.is_empty() {
                return Err(syntax(it.pos(), "'-' without preceding names"));
            }
            out.extend(pending.drain(..).map(|(n, p)| (n, ty.to_string(), p)));
            i += 2;
        } else {
            pending.push((s.to_string(), it.pos()));
            i += 1;
        }
    }
    out.extend(
        pending
            .into_iter()
            .map(|(n, p)| (n, OBJECT_TYPE.to_string(), p)),
    );
    Ok(out)
}

fn parse_types(items: &[SExpr], typing: bool, pos: Pos) -> Result<TypeHierarchy> {
    if !typing {
        return Err(err(
            pos,
            ParseErrorKind::MissingRequirement {
                construct: ":types".into(),
                requirement: ":typing",
            },
        ));
    }
    let list = parse_typed_list(items, true)?;
    let mut parents: BTreeMap<String, String> = BTreeMap::new();
    for (name, parent, p) in &list {
        if name == OBJECT_TYPE {
            continue;
        }
        if parents.insert(name.clone(), parent.clone()).is_some() {
            return Err(err(
                *p,
                ParseErrorKind::Duplicate {
                    what: "type",
                    name: name.clone(),
                },
            ));
        }
    }
    // a parent named only after '-' is declared by that mention
    for (_, parent, _) in &list {
        if parent != OBJECT_TYPE && !parents.contains_key(parent) {
            parents.insert(parent.clone(), OBJECT_TYPE.to_string());
        }
    }
    for (name, _, p) in &list {
        let mut seen = BTreeSet::new();
        let mut cur = name.as_str();
        while let Some(next) = parents.get(cur) {
            if !seen.insert(cur) {
                return Err(syntax(*p, format!("cyclic type hierarchy at {name}")));
            }
            cur = next;
        }
    }
    Ok(TypeHierarchy { parents })
}

fn check_type(types: &TypeHierarchy, ty: &str, pos: Pos) -> Result<()> {
    if types.contains(ty) {
        Ok(())
    } else {
        Err(err(pos, ParseErrorKind::UndeclaredType(ty.to_string())))
    }
}

struct SchemaScope<'a> {
    domain: &'a DomainModel,
    vars: &'a [TypedName],
}

impl SchemaScope<'_> {
    fn term(&self, e: &SExpr) -> Result<(Term, String)> {
        let s = expect_symbol(e, "term")?;
        if s.starts_with('?') {
            let v =
                self.vars.iter().find(|v| v.name == s).ok_or_else(|| {
                    err(e.pos(), ParseErrorKind::UndeclaredVariable(s.to_string()))
                })?;
            Ok((Term::Var(s.to_string()), v.ty.clone()))
        } else {
            let c = self
                .domain
                .constants
                .iter()
                .find(|c| c.name == s)
                .ok_or_else(|| err(e.pos(), GroundError::UnknownConstant(s.to_string()).into()))?;
            Ok((Term::Const(s.to_string()), c.ty.clone()))
        }
    }

    fn atom(&self, e: &SExpr) -> Result<AtomSchema> {
        let items = expect_list(e, "atom")?;
        let head = items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
        let name = expect_symbol(head, "predicate name")?;
        let pred = self.domain.predicate(name).ok_or_else(|| {
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
        let mut terms = Vec::with_capacity(args.len());
        for (a, param) in args.iter().zip(&pred.params) {
            let (t, ty) = self.term(a)?;
            if !self.domain.types.compatible(&ty, &param.ty) {
                return Err(err(
                    a.pos(),
                    GroundError::TypeMismatch {
                        object: t.to_string(),
                        actual: ty,
                        expected: param.ty.clone(),
                    }
                    .into(),
                ));
            }
            terms.push(t);
        }
        Ok(AtomSchema {
            predicate: name.to_string(),
            terms,
        })
    }

    fn require(&self, r: Requirement, construct: &str, pos: Pos) -> Result<()> {
        if self.domain.has_requirement(r) {
            Ok(())
        } else {
            Err(err(
                pos,
                ParseErrorKind::MissingRequirement {
                    construct: construct.to_string(),
                    requirement: r.keyword(),
                },
            ))
        }
    }

    fn equality(&self, items: &[SExpr], pos: Pos, positive: bool) -> Result<Condition> {
        self.require(Requirement::Equality, "=", pos)?;
        if items.len() != 3 {
            return Err(syntax(pos, "(= a b) takes exactly two terms"));
        }
        let (left, _) = self.term(&items[1])?;
        let (right, _) = self.term(&items[2])?;
        Ok(Condition::Equality {
            left,
            right,
            positive,
        })
    }

    fn condition(&self, e: &SExpr, out: &mut Vec<Condition>) -> Result<()> {
        let items = expect_list(e, "precondition")?;
        let Some(head) = items.first() else {
            return Ok(());
        };
        match expect_symbol(head, "connective or predicate")? {
            "and" => {
                for c in &items[1..] {
                    self.condition(c, out)?;
                }
            }
            "not" => {
                if items.len() != 2 {
                    return Err(syntax(e.pos(), "(not ...) takes exactly one argument"));
                }
                let inner = expect_list(&items[1], "negated atom")?;
                let c = if items[1].head() == Some("=") {
                    self.equality(inner, items[1].pos(), false)?
                } else {
                    self.require(
                        Requirement::NegativePreconditions,
                        "negative precondition",
                        e.pos(),
                    )?;
                    Condition::Atom {
                        atom: self.atom(&items[1])?,
                        positive: false,
                    }
                };
                out.push(c);
            }
            "=" => out.push(self.equality(items, e.pos(), true)?),
            h @ ("or" | "imply" | "exists" | "forall" | "when" | "preference") => {
                return Err(err(
                    e.pos(),
                    ParseErrorKind::Unsupported(format!("{h} in precondition")),
                ));
            }
            _ => out.push(Condition::Atom {
                atom: self.atom(e)?,
                positive: true,
            }),
        }
        Ok(())
    }

    fn effect(
        &self,
        e: &SExpr,
        add: &mut Vec<AtomSchema>,
        del: &mut Vec<AtomSchema>,
    ) -> Result<()> {
        let items = expect_list(e, "effect")?;
        let Some(head) = items.first() else {
            return Ok(());
        };
        match expect_symbol(head, "connective or predicate")? {
            "and" => {
                for c in &items[1..] {
                    self.effect(c, add, del)?;
                }
            }
            "not" => {
                if items.len() != 2 {
                    return Err(syntax(e.pos(), "(not ...) takes exactly one argument"));
                }
                if items[1].head() == Some("=") {
                    return Err(err(
                        e.pos(),
                        ParseErrorKind::Unsupported("= in effect".into()),
                    ));
                }
                del.push(self.atom(&items[1])?);
            }
            h @ ("=" | "forall" | "when" | "increase" | "decrease" | "assign" | "scale-up"
            | "scale-down") => {
                return Err(err(
                    e.pos(),
                    ParseErrorKind::Unsupported(format!("{h} in effect")),
                ));
            }
            _ => add.push(self.atom(e)?),
        }
        Ok(())
    }
}

fn dedup<T: PartialEq>(v: &mut Vec<T>) {
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for x in v.drain(..) {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    *v = out;
}

fn parse_action(e: &SExpr, domain: &DomainModel) -> Result<ActionSchema> {
    let items = expect_list(e, "action")?;
    let name_expr = items
        .get(1)
        .ok_or_else(|| syntax(e.pos(), "action without a name"))?;
    let name = expect_symbol(name_expr, "action name")?.to_string();

    let mut parameters = None;
    let mut precondition = None;
    let mut effect = None;
    let mut rest = &items[2..];
    while !rest.is_empty() {
        let key = expect_symbol(&rest[0], "action keyword")?;
        let val = rest
            .get(1)
            .ok_or_else(|| syntax(rest[0].pos(), format!("missing value for {key}")))?;
        let slot = match key {
            ":parameters" => &mut parameters,
            ":precondition" => &mut precondition,
            ":effect" => &mut effect,
            other => {
                return Err(err(
                    rest[0].pos(),
                    ParseErrorKind::Unsupported(other.to_string()),
                ))
            }
        };
        if slot.replace(val).is_some() {
            return Err(err(
                rest[0].pos(),
                ParseErrorKind::Duplicate {
                    what: "action keyword",
                    name: key.to_string(),
                },
            ));
        }
        rest = &rest[2..];
    }

    let mut params = Vec::new();
    if let Some(p) = parameters {
        let list = expect_list(p, "parameter list")?;
        for (var, ty, pos) in parse_typed_list(list, domain.has_requirement(Requirement::Typing))? {
            if !var.starts_with('?') {
                return Err(syntax(pos, format!("parameter {var} must start with '?'")));
            }
            check_type(&domain.types, &ty, pos)?;
            if params.iter().any(|p: &TypedName| p.name == var) {
                return Err(err(
                    pos,
                    ParseErrorKind::Duplicate {
                        what: "parameter",
                        name: var,
                    },
                ));
            }
            params.push(TypedName { name: var, ty });
        }
    }

    let scope = SchemaScope {
        domain,
        vars: &params,
    };
    let mut precond = Vec::new();
    if let Some(p) = precondition {
        scope.condition(p, &mut precond)?;
    }
    let (mut add, mut del) = (Vec::new(), Vec::new());
    if let Some(eff) = effect {
        scope.effect(eff, &mut add, &mut del)?;
    }
    dedup(&mut precond);
    dedup(&mut add);
    dedup(&mut del);
    del.retain(|d| !add.contains(d));
    Ok(ActionSchema {
        name,
        params,
        precond,
        add,
        del,
    })
}

/// Parses a PDDL domain file.
pub fn parse_domain(text: &str) -> Result<DomainModel> {
    let root = sexpr::parse_one(text)?;
    let (name, sections) = split_define(&root, "domain")?;

    let mut found: BTreeMap<&str, &SExpr> = BTreeMap::new();
    let mut actions = Vec::new();
    for sec in sections {
        let head = sec
            .head()
            .ok_or_else(|| syntax(sec.pos(), "expected a domain section"))?;
        match head {
            ":action" => actions.push(sec),
            ":requirements" | ":types" | ":constants" | ":predicates" => {
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
    fn body<'a>(e: &&'a SExpr) -> &'a [SExpr] {
        &e.as_list().unwrap()[1..]
    }

    let requirements = match found.get(":requirements") {
        Some(e) => parse_requirements(body(e))?,
        None => vec![Requirement::Strips],
    };
    let typing = requirements.contains(&Requirement::Typing);

    let mut domain = DomainModel {
        name,
        requirements,
        types: TypeHierarchy::default(),
        constants: Vec::new(),
        predicates: Vec::new(),
        schemas: Vec::new(),
    };

    if let Some(e) = found.get(":types") {
        domain.types = parse_types(body(e), typing, e.pos())?;
    }

    if let Some(e) = found.get(":constants") {
        for (c, ty, pos) in parse_typed_list(body(e), typing)? {
            check_type(&domain.types, &ty, pos)?;
            if domain.constants.iter().any(|k| k.name == c) {
                return Err(err(
                    pos,
                    ParseErrorKind::Duplicate {
                        what: "constant",
                        name: c,
                    },
                ));
            }
            domain.constants.push(TypedName { name: c, ty });
        }
    }

    if let Some(e) = found.get(":predicates") {
        for p in body(e) {
            let items = expect_list(p, "predicate declaration")?;
            let head = items
                .first()
                .ok_or_else(|| syntax(p.pos(), "empty predicate declaration"))?;
            let name = expect_symbol(head, "predicate name")?.to_string();
            if name == "=" {
                return Err(syntax(head.pos(), "= is a built-in predicate"));
            }
            if domain.predicate(&name).is_some() {
                return Err(err(
                    head.pos(),
                    ParseErrorKind::Duplicate {
                        what: "predicate",
                        name,
                    },
                ));
            }
            let mut params = Vec::new();
            for (var, ty, pos) in parse_typed_list(&items[1..], typing)? {
                check_type(&domain.types, &ty, pos)?;
                params.push(TypedName { name: var, ty });
            }
            domain.predicates.push(PredicateDef { name, params });
        }
    }

    for a in actions {
        let schema = parse_action(a, &domain)?;
        if domain.schema(&schema.name).is_some() {
            return Err(err(
                a.pos(),
                ParseErrorKind::Duplicate {
                    what: "action",
                    name: schema.name,
                },
            ));
        }
        domain.schemas.push(schema);
    }
    Ok(domain)
}
