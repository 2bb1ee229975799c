//! Canonical s-expression syntax.
//!
//! ```text
//! sentence := atom | (not s) | (and s+) | (forall (v sort) s) | (exists (v sort) s)
//!           | (count n (v sort) s) | (iota c (v) s)
//! atom     := (visit t t) | (taller t t) | (astall t t) | (eq t t)
//! ```
//!
//! A term is a bound variable if one of that name is in scope, otherwise a
//! constant. Constants carry no sort annotation, so their sort is resolved
//! in this order:
//!
//! 1. position: the agent of `visit`, both sides of `taller`/`astall` and
//!    the subject of `iota` are people; `eq` against a typed term copies its sort;
//! 2. naming convention: `x<digits>` is a person and `p<digits>` is a place
//!    (the generator only emits such ids);
//! 3. otherwise place.
//!
//! A position that contradicts the convention, or two positions that
//! disagree, is a sort error. [`parse_formulas`] resolves sorts jointly over
//! several sentences, which is how premises and hypotheses are read back.

use std::collections::BTreeMap;

use super::{Constant, Formula, LogicError, Sort, Term, Variable};

#[derive(Debug)]
enum SExpr {
    Atom { text: String, offset: usize },
    List { items: Vec<SExpr>, offset: usize },
}

impl SExpr {
    fn offset(&self) -> usize {
        match self {
            SExpr::Atom { offset, .. } | SExpr::List { offset, .. } => *offset,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> LogicError {
    LogicError::Syntax {
        offset,
        message: message.into(),
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Offset reported when input ends early: the last byte that was read.
    fn eof_offset(&self) -> usize {
        self.src.len().saturating_sub(1)
    }

    fn read(&mut self) -> Result<SExpr, LogicError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            None => Err(syntax(self.eof_offset(), "unexpected end of input")),
            Some(b')') => Err(syntax(start, "unexpected `)`")),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        None => {
                            return Err(syntax(self.eof_offset(), "unexpected end of input, expected `)`"))
                        }
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(SExpr::List {
                                items,
                                offset: start,
                            });
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                while self.pos < self.src.len() {
                    let b = self.src[self.pos];
                    if b.is_ascii_whitespace() || b == b'(' || b == b')' {
                        break;
                    }
                    if !(b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
                        return Err(syntax(self.pos, format!("unexpected character `{}`", b as char)));
                    }
                    self.pos += 1;
                }
                let text = String::from_utf8(self.src[start..self.pos].to_vec())
                    .expect("ascii checked above");
                Ok(SExpr::Atom {
                    text,
                    offset: start,
                })
            }
        }
    }
}

fn read_sentence(text: &str) -> Result<SExpr, LogicError> {
    if let Some((i, c)) = text.char_indices().find(|(_, c)| !c.is_ascii()) {
        return Err(syntax(i, format!("unexpected character `{c}`")));
    }
    let mut reader = Reader {
        src: text.as_bytes(),
        pos: 0,
    };
    let expr = reader.read()?;
    reader.skip_ws();
    if reader.pos < reader.src.len() {
        return Err(syntax(reader.pos, "trailing input after sentence"));
    }
    Ok(expr)
}

fn conventional_sort(id: &str) -> Option<Sort> {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if let Some(rest) = id.strip_prefix('x') {
        if digits(rest) {
            return Some(Sort::Person);
        }
    }
    if let Some(rest) = id.strip_prefix('p') {
        if digits(rest) {
            return Some(Sort::Place);
        }
    }
    None
}

fn parse_sort(e: &SExpr) -> Result<Sort, LogicError> {
    match e.atom() {
        Some("person") => Ok(Sort::Person),
        Some("place") => Ok(Sort::Place),
        _ => Err(syntax(e.offset(), "expected `person` or `place`")),
    }
}

fn identifier(e: &SExpr, what: &str) -> Result<String, LogicError> {
    match e.atom() {
        Some(t) if super::is_identifier(t) => Ok(t.to_string()),
        _ => Err(syntax(e.offset(), format!("expected {what}"))),
    }
}

/// Sort evidence gathered for constants before building the AST.
#[derive(Default)]
struct SortTable {
    forced: BTreeMap<String, (Sort, &'static str)>,
    links: Vec<(String, String)>,
    seen: Vec<String>,
}

impl SortTable {
    fn force(&mut self, id: &str, sort: Sort, constructor: &'static str) -> Result<(), LogicError> {
        if let Some(conv) = conventional_sort(id) {
            if conv != sort {
                return Err(LogicError::Sort {
                    constructor,
                    message: format!("`{id}` is a {conv} but is used as a {sort}"),
                });
            }
        }
        match self.forced.get(id) {
            Some((prev, _)) if *prev != sort => Err(LogicError::Sort {
                constructor,
                message: format!("`{id}` is used both as a {prev} and as a {sort}"),
            }),
            Some(_) => Ok(()),
            None => {
                self.forced.insert(id.to_string(), (sort, constructor));
                Ok(())
            }
        }
    }

    fn resolve(mut self) -> Result<BTreeMap<String, Sort>, LogicError> {
        for id in &self.seen {
            if !self.forced.contains_key(id) {
                if let Some(conv) = conventional_sort(id) {
                    self.forced.insert(id.clone(), (conv, "convention"));
                }
            }
        }
        let links = std::mem::take(&mut self.links);
        loop {
            let mut changed = false;
            for (a, b) in &links {
                let sa = self.forced.get(a).map(|s| s.0);
                let sb = self.forced.get(b).map(|s| s.0);
                match (sa, sb) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(LogicError::Sort {
                            constructor: "eq",
                            message: format!("`{a}` and `{b}` have different sorts"),
                        })
                    }
                    (Some(x), None) => {
                        self.force(b, x, "eq")?;
                        changed = true;
                    }
                    (None, Some(y)) => {
                        self.force(a, y, "eq")?;
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        Ok(self
            .seen
            .iter()
            .map(|id| {
                let sort = self.forced.get(id).map_or(Sort::Place, |s| s.0);
                (id.clone(), sort)
            })
            .collect())
    }
}

/// Scope entries are (variable name, sort).
type Scope = Vec<(String, Sort)>;

fn lookup(scope: &Scope, name: &str) -> Option<Sort> {
    scope.iter().rev().find(|(n, _)| n == name).map(|(_, s)| *s)
}

fn binder_parts(e: &SExpr, with_sort: bool) -> Result<(String, Option<Sort>), LogicError> {
    match e {
        SExpr::List { items, offset } => {
            let expected = if with_sort { 2 } else { 1 };
            if items.len() != expected {
                return Err(syntax(*offset, "malformed variable binder"));
            }
            let name = identifier(&items[0], "a variable name")?;
            let sort = if with_sort {
                Some(parse_sort(&items[1])?)
            } else {
                None
            };
            Ok((name, sort))
        }
        SExpr::Atom { offset, .. } => Err(syntax(*offset, "expected `(` for variable binder")),
    }
}

/// First pass: check the shape and collect sort evidence for constants.
fn collect(e: &SExpr, scope: &mut Scope, table: &mut SortTable) -> Result<(), LogicError> {
    let (items, offset) = match e {
        SExpr::List { items, offset } => (items, *offset),
        SExpr::Atom { offset, .. } => return Err(syntax(*offset, "expected `(`")),
    };
    let head = items
        .first()
        .and_then(SExpr::atom)
        .ok_or_else(|| syntax(offset, "expected an operator"))?;
    let arity = |n: usize| {
        if items.len() == n + 1 {
            Ok(())
        } else {
            Err(syntax(offset, format!("`{head}` takes {n} arguments")))
        }
    };
    let term = |e: &SExpr, scope: &Scope, table: &mut SortTable| -> Result<TermRef, LogicError> {
        let name = identifier(e, "a term")?;
        match lookup(scope, &name) {
            Some(sort) => Ok(TermRef::Var(sort)),
            None => {
                if !table.seen.contains(&name) {
                    table.seen.push(name.clone());
                }
                Ok(TermRef::Const(name))
            }
        }
    };
    match head {
        "visit" | "taller" | "astall" | "eq" => {
            arity(2)?;
            let a = term(&items[1], scope, table)?;
            let b = term(&items[2], scope, table)?;
            let constructor: &'static str = match head {
                "visit" => "visit",
                "taller" => "taller",
                "astall" => "astall",
                _ => "eq",
            };
            match constructor {
                "visit" => {
                    if let TermRef::Const(id) = &a {
                        table.force(id, Sort::Person, "visit")?;
                    }
                }
                "taller" | "astall" => {
                    for t in [&a, &b] {
                        if let TermRef::Const(id) = t {
                            table.force(id, Sort::Person, constructor)?;
                        }
                    }
                }
                _ => match (&a, &b) {
                    (TermRef::Const(x), TermRef::Var(s)) | (TermRef::Var(s), TermRef::Const(x)) => {
                        table.force(x, *s, "eq")?
                    }
                    (TermRef::Const(x), TermRef::Const(y)) => {
                        table.links.push((x.clone(), y.clone()))
                    }
                    _ => {}
                },
            }
            Ok(())
        }
        "not" => {
            arity(1)?;
            collect(&items[1], scope, table)
        }
        "and" => {
            if items.len() < 2 {
                return Err(syntax(offset, "`and` takes at least one argument"));
            }
            items[1..].iter().try_for_each(|i| collect(i, scope, table))
        }
        "forall" | "exists" => {
            arity(2)?;
            let (name, sort) = binder_parts(&items[1], true)?;
            scope.push((name, sort.expect("sorted binder")));
            let r = collect(&items[2], scope, table);
            scope.pop();
            r
        }
        "count" => {
            arity(3)?;
            parse_count(&items[1])?;
            let (name, sort) = binder_parts(&items[2], true)?;
            scope.push((name, sort.expect("sorted binder")));
            let r = collect(&items[3], scope, table);
            scope.pop();
            r
        }
        "iota" => {
            arity(3)?;
            let subject = identifier(&items[1], "a constant")?;
            if lookup(scope, &subject).is_some() {
                return Err(syntax(items[1].offset(), "`iota` subject must be a constant"));
            }
            if !table.seen.contains(&subject) {
                table.seen.push(subject.clone());
            }
            table.force(&subject, Sort::Person, "iota")?;
            let (name, _) = binder_parts(&items[2], false)?;
            scope.push((name, Sort::Person));
            let r = collect(&items[3], scope, table);
            scope.pop();
            r
        }
        other => Err(syntax(items[0].offset(), format!("unknown operator `{other}`"))),
    }
}

enum TermRef {
    Var(Sort),
    Const(String),
}

fn parse_count(e: &SExpr) -> Result<u32, LogicError> {
    e.atom()
        .filter(|t| t.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| syntax(e.offset(), "expected a count"))
}

/// Second pass: build the AST with resolved constant sorts.
fn build(e: &SExpr, scope: &mut Vec<Variable>, sorts: &BTreeMap<String, Sort>) -> Result<Formula, LogicError> {
    let SExpr::List { items, .. } = e else {
        unreachable!("shape checked in the first pass")
    };
    let head = items[0].atom().expect("shape checked");
    let term = |e: &SExpr, scope: &[Variable]| -> Result<Term, LogicError> {
        let name = e.atom().expect("shape checked");
        if let Some(v) = scope.iter().rev().find(|v| v.name() == name) {
            return Ok(Term::Var(v.clone()));
        }
        Ok(Term::Const(Constant::new(name, sorts[name])?))
    };
    match head {
        "visit" => Formula::visit(term(&items[1], scope)?, term(&items[2], scope)?),
        "taller" => Formula::taller(term(&items[1], scope)?, term(&items[2], scope)?),
        "astall" => Formula::as_tall(term(&items[1], scope)?, term(&items[2], scope)?),
        "eq" => Formula::eq(term(&items[1], scope)?, term(&items[2], scope)?),
        "not" => Ok(Formula::not(build(&items[1], scope, sorts)?)),
        "and" => {
            let parts = items[1..]
                .iter()
                .map(|i| build(i, scope, sorts))
                .collect::<Result<Vec<_>, _>>()?;
            Formula::and(parts)
        }
        "forall" | "exists" | "count" => {
            let binder_at = if head == "count" { 2 } else { 1 };
            let (name, sort) = binder_parts(&items[binder_at], true)?;
            let v = Variable::new(name, sort.expect("sorted binder"))?;
            scope.push(v.clone());
            let body = build(&items[binder_at + 1], scope, sorts);
            scope.pop();
            let body = body?;
            match head {
                "forall" => Formula::forall(v, body),
                "exists" => Formula::exists(v, body),
                _ => Formula::count(parse_count(&items[1])?, v, body),
            }
        }
        "iota" => {
            let subject_name = items[1].atom().expect("shape checked");
            let subject = Constant::new(subject_name, sorts[subject_name])?;
            let (name, _) = binder_parts(&items[2], false)?;
            let v = Variable::new(name, Sort::Person)?;
            scope.push(v.clone());
            let body = build(&items[3], scope, sorts);
            scope.pop();
            Formula::iota(subject, v, body?)
        }
        _ => unreachable!("operators checked in the first pass"),
    }
}

/// Parses several sentences that share one constant vocabulary.
pub fn parse_formulas<S: AsRef<str>>(texts: &[S]) -> Result<Vec<Formula>, LogicError> {
    let exprs = texts
        .iter()
        .map(|t| read_sentence(t.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = SortTable::default();
    for e in &exprs {
        collect(e, &mut Vec::new(), &mut table)?;
    }
    let sorts = table.resolve()?;
    exprs
        .iter()
        .map(|e| {
            let f = build(e, &mut Vec::new(), &sorts)?;
            f.check_sentence()?;
            Ok(f)
        })
        .collect()
}

pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    Ok(parse_formulas(&[text])?.remove(0))
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    out.push_str(t.name());
}

fn write_formula(f: &Formula, out: &mut String) {
    let atom = |name: &str, a: &Term, b: &Term, out: &mut String| {
        out.push('(');
        out.push_str(name);
        out.push(' ');
        write_term(a, out);
        out.push(' ');
        write_term(b, out);
        out.push(')');
    };
    match f {
        Formula::Visit(a, b) => atom("visit", a, b, out),
        Formula::Taller(a, b) => atom("taller", a, b, out),
        Formula::AsTall(a, b) => atom("astall", a, b, out),
        Formula::Eq(a, b) => atom("eq", a, b, out),
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(g, out);
            out.push(')');
        }
        Formula::And(gs) => {
            out.push_str("(and");
            for g in gs {
                out.push(' ');
                write_formula(g, out);
            }
            out.push(')');
        }
        Formula::ForAll(v, g) | Formula::Exists(v, g) => {
            let q = if matches!(f, Formula::ForAll(..)) {
                "forall"
            } else {
                "exists"
            };
            out.push_str(&format!("({q} ({} {}) ", v.name(), v.sort()));
            write_formula(g, out);
            out.push(')');
        }
        Formula::Count(n, v, g) => {
            out.push_str(&format!("(count {n} ({} {}) ", v.name(), v.sort()));
            write_formula(g, out);
            out.push(')');
        }
        Formula::Iota(c, v, g) => {
            out.push_str(&format!("(iota {} ({}) ", c.id(), v.name()));
            write_formula(g, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe(id: &str) -> Constant {
        Constant::new(id, Sort::Person).unwrap()
    }

    fn pl(id: &str) -> Constant {
        Constant::new(id, Sort::Place).unwrap()
    }

    #[test]
    fn parses_negated_visit() {
        let f = parse_formula("(not (visit charles chile))").unwrap();
        assert_eq!(f, Formula::not(Formula::visit(pe("charles"), pl("chile")).unwrap()));
    }

    #[test]
    fn parses_everyone_visited_every_place() {
        let f = parse_formula("(forall (x person) (forall (p place) (visit x p)))").unwrap();
        let x = Variable::new("x", Sort::Person).unwrap();
        let p = Variable::new("p", Sort::Place).unwrap();
        let expected = Formula::forall(
            x.clone(),
            Formula::forall(p.clone(), Formula::visit(&x, &p).unwrap()).unwrap(),
        )
        .unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn unbalanced_parenthesis_reports_offset() {
        let err = parse_formula("(visit charles charles").unwrap_err();
        assert!(matches!(err, LogicError::Syntax { offset: 21, .. }), "{err:?}");
    }

    #[test]
    fn syntax_errors_point_at_token() {
        let err = parse_formula("(visit charles chile) x").unwrap_err();
        assert!(matches!(err, LogicError::Syntax { offset: 22, .. }), "{err:?}");
        let err = parse_formula("(frobnicate a b)").unwrap_err();
        assert!(matches!(err, LogicError::Syntax { offset: 1, .. }), "{err:?}");
        assert!(parse_formula("").is_err());
        assert!(parse_formula("(visit Charles chile)").is_err());
    }

    #[test]
    fn sort_errors_name_constructor() {
        let err = parse_formula("(forall (p place) (taller p charles))").unwrap_err();
        assert!(matches!(err, LogicError::Sort { constructor: "taller", .. }), "{err:?}");
        let err = parse_formula("(visit p1 x1)").unwrap_err();
        assert!(matches!(err, LogicError::Sort { constructor: "visit", .. }), "{err:?}");
        let err = parse_formula("(forall (p place) (visit p chile))").unwrap_err();
        assert!(matches!(err, LogicError::Sort { constructor: "visit", .. }), "{err:?}");
    }

    #[test]
    fn joint_parsing_shares_sorts() {
        let fs = parse_formulas(&["(visit carlos john)", "(taller john carlos)"]).unwrap();
        assert_eq!(fs[0], Formula::visit(pe("carlos"), pe("john")).unwrap());
        // alone, an unconstrained target defaults to a place
        assert_eq!(
            parse_formula("(visit carlos john)").unwrap(),
            Formula::visit(pe("carlos"), pl("john")).unwrap()
        );
        // conventional ids keep their sort anywhere
        assert_eq!(
            parse_formula("(not (visit x1 x2))").unwrap(),
            Formula::not(Formula::visit(Constant::person(1), Constant::person(2)).unwrap())
        );
    }

    #[test]
    fn prints_canonical_text() {
        let f = Formula::not(Formula::visit(pe("joe"), pl("japan")).unwrap());
        assert_eq!(print_formula(&f), "(not (visit joe japan))");
        let p = Variable::new("p", Sort::Place).unwrap();
        let c = Formula::count(3, p.clone(), Formula::visit(pe("philip"), &p).unwrap()).unwrap();
        assert_eq!(print_formula(&c), "(count 3 (p place) (visit philip p))");
    }

    #[test]
    fn iota_round_trip() {
        let text = "(iota x1 (y) (forall (p place) (visit y p)))";
        let f = parse_formula(text).unwrap();
        assert_eq!(print_formula(&f), text);
        assert!(matches!(f, Formula::Iota(..)));
    }
}
