use super::sexpr::{self, syntax, Pos, SExpr};
use super::{DomainModel, Plan, PlanStep, Task};
use crate::error::{GroundError, ParseError};

/// One parsed plan line: action name, arguments, argument positions and the
/// position of the step itself.
struct RawStep {
    name: String,
    args: Vec<String>,
    arg_pos: Vec<Pos>,
    pos: Pos,
}

fn parse_line(line_no: usize, line: &str) -> Result<Option<RawStep>, ParseError> {
    let shift = |p: Pos| Pos {
        line: line_no,
        column: p.column,
    };
    let exprs = sexpr::parse_all(line).map_err(|e| ParseError { line: line_no, ..e })?;
    let mut it = exprs.into_iter();
    let Some(expr) = it.next() else {
        return Ok(None);
    };
    if let Some(extra) = it.next() {
        return Err(syntax(shift(extra.pos()), "expected one action per line"));
    }
    let pos = shift(expr.pos());
    let items = match &expr {
        SExpr::List(items, _) => items,
        SExpr::Symbol(..) => return Err(syntax(pos, "expected (action args...)")),
    };
    let mut syms = Vec::with_capacity(items.len());
    let mut positions = Vec::with_capacity(items.len());
    for i in items {
        let s = i
            .as_symbol()
            .ok_or_else(|| syntax(shift(i.pos()), "nested list in plan step"))?;
        syms.push(s.to_string());
        positions.push(shift(i.pos()));
    }
    if syms.is_empty() {
        return Err(syntax(pos, "empty plan step"));
    }
    let name = syms.remove(0);
    positions.remove(0);
    Ok(Some(RawStep {
        name,
        args: syms,
        arg_pos: positions,
        pos,
    }))
}

fn parse_with(
    text: &str,
    dom: &DomainModel,
    mut check_arg: impl FnMut(&str, &str) -> Result<(), GroundError>,
) -> Result<Plan, ParseError> {
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(RawStep {
            name,
            args,
            arg_pos,
            pos,
        }) = parse_line(i + 1, line)?
        else {
            continue;
        };
        let schema = dom
            .schema(&name)
            .ok_or_else(|| ParseError::new(pos, GroundError::UnknownAction(name.clone()).into()))?;
        if schema.params.len() != args.len() {
            return Err(ParseError::new(
                pos,
                GroundError::Arity {
                    name,
                    expected: schema.params.len(),
                    found: args.len(),
                }
                .into(),
            ));
        }
        for ((a, p), param) in args.iter().zip(&arg_pos).zip(&schema.params) {
            check_arg(a, &param.ty).map_err(|e| ParseError::new(*p, e.into()))?;
        }
        steps.push(PlanStep {
            index: steps.len(),
            name,
            args,
        });
    }
    Ok(Plan {
        steps,
        source: None,
    })
}

/// Parses an IPC-format plan: one `(action arg...)` per line, `;` comments.
///
/// Action names and arities are checked against `dom`; object names are
/// checked only by [`parse_plan_for_task`] or at grounding time, since the
/// domain alone does not know the problem's objects.
pub fn parse_plan(text: &str, dom: &DomainModel) -> Result<Plan, ParseError> {
    parse_with(text, dom, |_, _| Ok(()))
}

/// Like [`parse_plan`], but also checks every argument is a known,
/// well-typed object of the task.
pub fn parse_plan_for_task(text: &str, task: &Task) -> Result<Plan, ParseError> {
    parse_with(text, &task.domain, |o, ty| task.check_argument(o, ty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    fn dom() -> DomainModel {
        parse_domain(
            "(define (domain d) (:predicates (at ?x ?y))
               (:action drive :parameters (?t ?a ?b) :precondition (at ?t ?a)
                 :effect (and (at ?t ?b) (not (at ?t ?a)))))",
        )
        .unwrap()
    }

    #[test]
    fn comments_are_ignored() {
        let p = parse_plan(
            "(drive truck0 depot0 distributor1)\n; cost = 1 (unit cost)",
            &dom(),
        )
        .unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.steps[0].args, vec!["truck0", "depot0", "distributor1"]);
        assert_eq!(p.steps[0].index, 0);
    }

    #[test]
    fn empty_file_is_empty_plan() {
        assert!(parse_plan("", &dom()).unwrap().is_empty());
        assert!(parse_plan("\n  \n; nothing\n", &dom()).unwrap().is_empty());
    }

    #[test]
    fn unknown_action_and_arity() {
        let e = parse_plan("(fly plane1 city0 city1)", &dom()).unwrap_err();
        assert_eq!(e.to_string(), "line 1, column 1: unknown action fly");
        let e = parse_plan("\n(DRIVE t a)", &dom()).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.to_string().contains("expects 3 arguments, got 2"));
    }

    #[test]
    fn case_insensitive_identifiers() {
        let p = parse_plan("(Drive Truck0 A B) ; trailing", &dom()).unwrap();
        assert_eq!(p.steps[0].name, "drive");
        assert_eq!(p.steps[0].args[0], "truck0");
    }

    #[test]
    fn round_trip() {
        let p = parse_plan("(drive t a b)\n(drive t b a)\n", &dom()).unwrap();
        assert_eq!(parse_plan(&p.to_ipc(), &dom()).unwrap(), p);
    }
}
