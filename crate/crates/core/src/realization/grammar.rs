//! Formula shapes to clauses, clauses to strings.

use std::collections::BTreeMap;

use crate::logic::{Constant, Formula, Sort, Term, Variable};

use super::{RealizeError, Templates};

#[derive(Debug, PartialEq)]
enum Subject {
    Name(Constant),
    List(Vec<Constant>),
    Everyone,
    Someone,
    Nobody,
}

#[derive(Debug, PartialEq)]
enum Object {
    Name(Constant),
    List(Vec<Constant>),
    Every(Sort),
    Some(Sort),
}

#[derive(Debug, PartialEq)]
enum Predicate {
    Visit { negated: bool, object: Object },
    Counts(Vec<(u32, Sort)>),
    Taller(Constant),
    AsTall(Constant),
    ThePersonThat(Box<Predicate>),
}

fn unsupported(f: &Formula) -> RealizeError {
    RealizeError::Unsupported(f.to_string())
}

fn is_var(t: &Term, v: &Variable) -> bool {
    matches!(t, Term::Var(w) if w == v)
}

/// `f` read as a property of `subject`.
fn predicate(f: &Formula, subject: &Term) -> Option<Predicate> {
    match f {
        Formula::Visit(s, Term::Const(o)) if s == subject => Some(Predicate::Visit {
            negated: false,
            object: Object::Name(o.clone()),
        }),
        Formula::Not(g) => match &**g {
            Formula::Visit(s, Term::Const(o)) if s == subject => Some(Predicate::Visit {
                negated: true,
                object: Object::Name(o.clone()),
            }),
            _ => None,
        },
        Formula::ForAll(v, g) | Formula::Exists(v, g) => match &**g {
            Formula::Visit(s, o) if s == subject && is_var(o, v) => {
                let object = if matches!(f, Formula::ForAll(..)) {
                    Object::Every(v.sort())
                } else {
                    Object::Some(v.sort())
                };
                Some(Predicate::Visit {
                    negated: false,
                    object,
                })
            }
            _ => None,
        },
        Formula::Count(n, v, g) => match &**g {
            Formula::Visit(s, o) if s == subject && is_var(o, v) => {
                Some(Predicate::Counts(vec![(*n, v.sort())]))
            }
            _ => None,
        },
        Formula::Taller(s, Term::Const(o)) if s == subject => Some(Predicate::Taller(o.clone())),
        Formula::AsTall(s, Term::Const(o)) if s == subject => Some(Predicate::AsTall(o.clone())),
        Formula::And(gs) => {
            let parts: Vec<Predicate> = gs
                .iter()
                .map(|g| predicate(g, subject))
                .collect::<Option<_>>()?;
            let mut names = Vec::new();
            let mut counts = Vec::new();
            for p in parts {
                match p {
                    Predicate::Visit {
                        negated: false,
                        object: Object::Name(c),
                    } => names.push(c),
                    Predicate::Counts(cs) => counts.extend(cs),
                    _ => return None,
                }
            }
            match (names.is_empty(), counts.is_empty()) {
                (false, true) => Some(Predicate::Visit {
                    negated: false,
                    object: Object::List(names),
                }),
                (true, false) => Some(Predicate::Counts(counts)),
                _ => None,
            }
        }
        _ => None,
    }
}

fn agent(f: &Formula) -> Option<&Term> {
    match f {
        Formula::Visit(a, _) | Formula::Taller(a, _) | Formula::AsTall(a, _) => Some(a),
        Formula::Not(g)
        | Formula::ForAll(_, g)
        | Formula::Exists(_, g)
        | Formula::Count(_, _, g) => agent(g),
        Formula::And(gs) => gs.first().and_then(agent),
        Formula::Eq(..) | Formula::Iota(..) => None,
    }
}

fn clause(f: &Formula) -> Result<(Subject, Predicate), RealizeError> {
    let fail = || unsupported(f);
    match f {
        Formula::Iota(c, v, g) => {
            let p = predicate(g, &Term::Var(v.clone())).ok_or_else(fail)?;
            return Ok((Subject::Name(c.clone()), Predicate::ThePersonThat(Box::new(p))));
        }
        Formula::ForAll(v, g) | Formula::Exists(v, g)
            if v.sort() == Sort::Person && agent(g).is_some_and(|a| is_var(a, v)) =>
        {
            let p = predicate(g, &Term::Var(v.clone())).ok_or_else(fail)?;
            let s = if matches!(f, Formula::ForAll(..)) {
                Subject::Everyone
            } else {
                Subject::Someone
            };
            return Ok((s, p));
        }
        Formula::Not(g) => {
            if let Formula::Exists(v, h) = &**g {
                if v.sort() == Sort::Person {
                    if let Some(p @ Predicate::Visit { negated: false, .. }) =
                        predicate(h, &Term::Var(v.clone()))
                    {
                        return Ok((Subject::Nobody, p));
                    }
                }
            }
        }
        Formula::And(gs) => {
            // several agents sharing one visited object
            let mut agents = Vec::new();
            let mut object = None;
            for g in gs {
                match g {
                    Formula::Visit(Term::Const(a), Term::Const(o))
                        if object.is_none_or(|prev| prev == o) =>
                    {
                        agents.push(a.clone());
                        object = Some(o);
                    }
                    _ => {
                        agents.clear();
                        break;
                    }
                }
            }
            let distinct = agents.windows(2).any(|w| w[0] != w[1]);
            if let (Some(o), true) = (object, distinct) {
                return Ok((
                    Subject::List(agents),
                    Predicate::Visit {
                        negated: false,
                        object: Object::Name(o.clone()),
                    },
                ));
            }
        }
        _ => {}
    }
    let subject = match agent(f) {
        Some(t @ Term::Const(c)) => predicate(f, t).map(|p| (Subject::Name(c.clone()), p)),
        _ => None,
    };
    subject.ok_or_else(fail)
}

pub(crate) struct Renderer<'a> {
    pub templates: &'a Templates,
    pub binding: &'a BTreeMap<Constant, String>,
}

impl Renderer<'_> {
    fn name(&self, c: &Constant) -> Result<&str, RealizeError> {
        self.binding
            .get(c)
            .map(String::as_str)
            .ok_or_else(|| RealizeError::Unbound(c.id().to_string()))
    }

    fn list(&self, items: Vec<&str>) -> String {
        let t = self.templates;
        match items.len() {
            0 => String::new(),
            1 => items[0].to_string(),
            2 => format!("{} {} {}", items[0], t.list_conjunction, items[1]),
            n => {
                let head = items[..n - 1].join(", ");
                let comma = if t.serial_comma { "," } else { "" };
                format!("{head}{comma} {} {}", t.list_conjunction, items[n - 1])
            }
        }
    }

    fn names(&self, cs: &[Constant]) -> Result<String, RealizeError> {
        let names = cs.iter().map(|c| self.name(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.list(names))
    }

    fn count_phrase(&self, n: u32, sort: Sort) -> Result<String, RealizeError> {
        let t = self.templates;
        let (numbers, one, many) = match sort {
            Sort::Place => (&t.numbers_place, &t.place, &t.places),
            Sort::Person => (&t.numbers_person, &t.person, &t.people),
        };
        let word = numbers
            .get((n as usize).wrapping_sub(1))
            .ok_or(RealizeError::NoNumberWord(n))?;
        let noun = if n == 1 { one } else { many };
        Ok(format!("{} {word} {noun}", t.only))
    }

    fn predicate(&self, p: &Predicate, plural: bool) -> Result<String, RealizeError> {
        let t = self.templates;
        Ok(match p {
            Predicate::Visit { negated, object } => {
                let verb = match (negated, plural) {
                    (true, _) => &t.did_not_visit,
                    (false, true) => &t.have_visited,
                    (false, false) => &t.has_visited,
                };
                let object = match object {
                    Object::Name(c) => self.name(c)?.to_string(),
                    Object::List(cs) => self.names(cs)?,
                    Object::Every(Sort::Place) => t.every_place.clone(),
                    Object::Every(Sort::Person) => t.everyone_object.clone(),
                    Object::Some(Sort::Place) => t.some_place.clone(),
                    Object::Some(Sort::Person) => t.someone_object.clone(),
                };
                format!("{verb} {object}")
            }
            Predicate::Counts(cs) => {
                let parts = cs
                    .iter()
                    .map(|(n, s)| self.count_phrase(*n, *s))
                    .collect::<Result<Vec<_>, _>>()?;
                let parts: Vec<&str> = parts.iter().map(String::as_str).collect();
                format!("{} {}", t.has_visited, self.list(parts))
            }
            Predicate::Taller(o) => format!("{} {}", t.taller, self.name(o)?),
            Predicate::AsTall(o) => format!("{} {}", t.as_tall, self.name(o)?),
            Predicate::ThePersonThat(inner) => {
                format!("{} {}", t.the_person_that, self.predicate(inner, false)?)
            }
        })
    }

    pub fn sentence(&self, f: &Formula) -> Result<String, RealizeError> {
        let t = self.templates;
        let (subject, p) = clause(f)?;
        let plural = matches!(subject, Subject::List(_));
        let subject = match &subject {
            Subject::Name(c) => self.name(c)?.to_string(),
            Subject::List(cs) => self.names(cs)?,
            Subject::Everyone => t.everyone.clone(),
            Subject::Someone => t.someone.clone(),
            Subject::Nobody => t.nobody.clone(),
        };
        Ok(format!("{subject} {}", self.predicate(&p, plural)?))
    }
}
