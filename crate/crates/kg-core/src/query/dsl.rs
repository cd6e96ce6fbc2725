//! Query DSL: s-expressions over `?var` terms and quoted constants.
//!
//! ```text
//! (bgp (s p o) ...)            (project (?a ?b) e)        (filter cond e)
//! (join e1 e2 ...)             (union e1 e2 ...)          (minus e1 e2)
//! (antijoin e1 e2)             (optional e1 e2)           (path x pexpr y)
//! cond  ::= (= t1 t2) | (and c ...) | (or c ...) | (not c)
//! pexpr ::= "label" | (inv p) | (star p) | (seq p ...) | (alt p ...)
//! ```

use super::{AlgebraExpr, Condition, PathExpr, Pattern, QueryError, Rpq, Term, TriplePattern};
use crate::sexpr::{parse_one, Sexp, SexpError};

pub fn parse_query(text: &str) -> Result<AlgebraExpr, QueryError> {
    Ok(parse_expr(&parse_one(text)?)?)
}

pub fn parse_term(e: &Sexp) -> Result<Term, SexpError> {
    match e {
        Sexp::Str(s, _) if s.is_empty() => Err(e.error("constants must be non-empty")),
        Sexp::Str(s, _) => Ok(Term::Const(s.clone())),
        Sexp::Symbol(s, _) if s.len() > 1 && s.starts_with('?') => Ok(Term::Var(s[1..].to_string())),
        _ => Err(e.error(format!("expected `?var` or a quoted constant, found `{e}`"))),
    }
}

fn parse_var(e: &Sexp) -> Result<String, SexpError> {
    match parse_term(e)? {
        Term::Var(v) => Ok(v),
        Term::Const(_) => Err(e.error("expected a variable")),
    }
}

/// `(bgp (s p o) ...)`.
pub fn parse_bgp(e: &Sexp) -> Result<Pattern, SexpError> {
    match e.as_form() {
        Some(("bgp", triples)) => triples
            .iter()
            .map(|t| match t.as_list() {
                Some([s, p, o]) => Ok(TriplePattern::new(parse_term(s)?, parse_term(p)?, parse_term(o)?)),
                _ => Err(t.error("expected a triple `(s p o)`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Pattern::new),
        _ => Err(e.error("expected `(bgp ...)`")),
    }
}

fn arity<'a>(e: &Sexp, args: &'a [Sexp], n: usize, form: &str) -> Result<&'a [Sexp], SexpError> {
    if args.len() == n {
        Ok(args)
    } else {
        Err(e.error(format!("`{form}` takes {n} arguments, found {}", args.len())))
    }
}

fn fold<T>(
    e: &Sexp,
    args: &[Sexp],
    form: &str,
    parse: impl Fn(&Sexp) -> Result<T, SexpError>,
    combine: impl Fn(T, T) -> T,
) -> Result<T, SexpError> {
    if args.len() < 2 {
        return Err(e.error(format!("`{form}` takes at least 2 arguments")));
    }
    let mut it = args.iter();
    let first = parse(it.next().unwrap())?;
    it.try_fold(first, |acc, a| Ok(combine(acc, parse(a)?)))
}

fn parse_expr(e: &Sexp) -> Result<AlgebraExpr, SexpError> {
    use AlgebraExpr as A;
    let (head, args) = e.as_form().ok_or_else(|| e.error("expected a query form `(op ...)`"))?;
    let bin = |ctor: fn(Box<A>, Box<A>) -> A| -> Result<A, SexpError> {
        let a = arity(e, args, 2, head)?;
        Ok(ctor(Box::new(parse_expr(&a[0])?), Box::new(parse_expr(&a[1])?)))
    };
    match head {
        "bgp" => Ok(A::Base(parse_bgp(e)?)),
        "project" => {
            let a = arity(e, args, 2, head)?;
            let vars = a[0]
                .as_list()
                .ok_or_else(|| a[0].error("expected a variable list"))?
                .iter()
                .map(parse_var)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(A::Project(vars, Box::new(parse_expr(&a[1])?)))
        }
        "filter" => {
            let a = arity(e, args, 2, head)?;
            Ok(A::Select(parse_condition(&a[0])?, Box::new(parse_expr(&a[1])?)))
        }
        "join" => fold(e, args, head, parse_expr, |a, b| A::Join(Box::new(a), Box::new(b))),
        "union" => fold(e, args, head, parse_expr, |a, b| A::Union(Box::new(a), Box::new(b))),
        "minus" => bin(A::Minus),
        "antijoin" => bin(A::AntiJoin),
        "optional" => bin(A::LeftJoin),
        "path" => {
            let a = arity(e, args, 3, head)?;
            Ok(A::PathAtom(Rpq {
                x: parse_term(&a[0])?,
                r: parse_path_expr(&a[1])?,
                y: parse_term(&a[2])?,
            }))
        }
        other => Err(e.error(format!("unknown query form `{other}`"))),
    }
}

pub fn parse_condition(e: &Sexp) -> Result<Condition, SexpError> {
    let (head, args) = e.as_form().ok_or_else(|| e.error("expected a condition"))?;
    match head {
        "=" => {
            let a = arity(e, args, 2, head)?;
            Ok(Condition::Eq(parse_term(&a[0])?, parse_term(&a[1])?))
        }
        "and" => fold(e, args, head, parse_condition, |a, b| Condition::And(Box::new(a), Box::new(b))),
        "or" => fold(e, args, head, parse_condition, |a, b| Condition::Or(Box::new(a), Box::new(b))),
        "not" => Ok(Condition::Not(Box::new(parse_condition(&arity(e, args, 1, head)?[0])?))),
        other => Err(e.error(format!("unknown condition `{other}`"))),
    }
}

pub fn parse_path_expr(e: &Sexp) -> Result<PathExpr, SexpError> {
    if let Sexp::Str(l, _) = e {
        return Ok(PathExpr::Label(l.clone()));
    }
    let (head, args) = e.as_form().ok_or_else(|| e.error("expected a path expression"))?;
    match head {
        "inv" => Ok(parse_path_expr(&arity(e, args, 1, head)?[0])?.inv()),
        "star" => Ok(parse_path_expr(&arity(e, args, 1, head)?[0])?.star()),
        "seq" => fold(e, args, head, parse_path_expr, PathExpr::then),
        "alt" => fold(e, args, head, parse_path_expr, PathExpr::or),
        other => Err(e.error(format!("unknown path operator `{other}`"))),
    }
}

/// Renders a pattern back as `(bgp ...)`.
pub fn pattern_to_dsl(p: &Pattern) -> String {
    let mut out = String::from("(bgp");
    for t in &p.triples {
        out.push_str(&format!(" ({} {} {})", t.s, t.p, t.o));
    }
    out.push(')');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        let q = r#"(optional
            (antijoin (union (bgp (?e "type" "A")) (bgp (?e "type" "B")))
                      (project (?e) (filter (or (= ?v "x") (not (= ?v "y"))) (bgp (?e "venue" ?v)))))
            (join (bgp (?e "name" ?n)) (path ?e (seq (inv "p") (alt "q" (star "r"))) "Z")))"#;
        let e = parse_query(q).unwrap();
        assert_eq!(e.vars(), vec!["e", "n"]);
        assert!(e.check().is_ok());
    }

    #[test]
    fn rejects_bare_constants_and_bad_arity() {
        assert!(parse_query("(bgp (a \"p\" ?x))").is_err());
        assert!(parse_query("(minus (bgp))").is_err());
        assert!(parse_query("(frobnicate)").is_err());
        assert!(parse_query("(path ?x (star) ?y)").is_err());
    }

    #[test]
    fn pattern_round_trips() {
        let src = r#"(bgp (?x "a \"b\"" ?y) ("c" ?p ?x))"#;
        let p = parse_bgp(&parse_one(src).unwrap()).unwrap();
        assert_eq!(pattern_to_dsl(&p), src);
    }
}
