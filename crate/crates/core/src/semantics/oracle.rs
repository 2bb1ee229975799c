//! Ground-truth satisfiability by model enumeration.
//!
//! Enumerates every model over the closed universe: all visit relations on
//! people x (people + places) and all height assignments with levels
//! `1..=people`. Branches are cut as soon as some formula is definitely false
//! under the partial model (Kleene three-valued evaluation), and the search
//! stops as soon as every formula is definitely true. Both cuts are exact, so
//! the answer equals that of a plain enumeration.

use std::collections::HashMap;

use crate::logic::{Constant, Formula, Sort, Term};

use super::{check_sentences, SemanticsError, Universe, UniverseBounds};

/// Largest universe (per sort) the oracle accepts.
pub const ENUMERATION_GUARD: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Elem(usize),
    Var(usize),
}

#[derive(Debug)]
enum Node {
    Visit(Slot, Slot),
    Taller(Slot, Slot),
    AsTall(Slot, Slot),
    Eq(Slot, Slot),
    Not(Box<Node>),
    And(Vec<Node>),
    ForAll(usize, Sort, Box<Node>),
    Exists(usize, Sort, Box<Node>),
    Count(u32, usize, Sort, Box<Node>),
    Iota(usize, usize, Box<Node>),
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Visit(usize),
    Height(usize),
}

struct Search {
    people: usize,
    places: usize,
    visits: Vec<Option<bool>>,
    heights: Vec<Option<u8>>,
}

impl Search {
    fn elems(&self, sort: Sort) -> std::ops::Range<usize> {
        match sort {
            Sort::Person => 0..self.people,
            Sort::Place => self.people..self.people + self.places,
        }
    }

    fn visit_index(&self, agent: usize, target: usize) -> usize {
        agent * (self.people + self.places) + target
    }

    fn eval(&self, node: &Node, env: &mut Vec<usize>, pending: &mut Option<Pending>) -> Tri {
        let get = |s: Slot, env: &Vec<usize>| match s {
            Slot::Elem(e) => e,
            Slot::Var(v) => env[v],
        };
        match node {
            Node::Visit(a, b) => {
                let i = self.visit_index(get(*a, env), get(*b, env));
                match self.visits[i] {
                    Some(true) => Tri::True,
                    Some(false) => Tri::False,
                    None => {
                        pending.get_or_insert(Pending::Visit(i));
                        Tri::Unknown
                    }
                }
            }
            Node::Taller(a, b) | Node::AsTall(a, b) => {
                let (a, b) = (get(*a, env), get(*b, env));
                match (self.heights[a], self.heights[b]) {
                    (Some(ha), Some(hb)) => {
                        let holds = if matches!(node, Node::Taller(..)) {
                            ha > hb
                        } else {
                            ha >= hb
                        };
                        if holds {
                            Tri::True
                        } else {
                            Tri::False
                        }
                    }
                    (None, _) => {
                        pending.get_or_insert(Pending::Height(a));
                        Tri::Unknown
                    }
                    (_, None) => {
                        pending.get_or_insert(Pending::Height(b));
                        Tri::Unknown
                    }
                }
            }
            Node::Eq(a, b) => {
                if get(*a, env) == get(*b, env) {
                    Tri::True
                } else {
                    Tri::False
                }
            }
            Node::Not(g) => self.eval(g, env, pending).not(),
            Node::And(gs) => {
                let mut out = Tri::True;
                for g in gs {
                    match self.eval(g, env, pending) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                out
            }
            Node::ForAll(v, sort, g) | Node::Exists(v, sort, g) => {
                let universal = matches!(node, Node::ForAll(..));
                let mut out = if universal { Tri::True } else { Tri::False };
                for e in self.elems(*sort) {
                    env[*v] = e;
                    match (self.eval(g, env, pending), universal) {
                        (Tri::False, true) => return Tri::False,
                        (Tri::True, false) => return Tri::True,
                        (Tri::Unknown, _) => out = Tri::Unknown,
                        _ => {}
                    }
                }
                out
            }
            Node::Count(n, v, sort, g) => {
                let (mut yes, mut unknown) = (0u32, 0u32);
                for e in self.elems(*sort) {
                    env[*v] = e;
                    match self.eval(g, env, pending) {
                        Tri::True => yes += 1,
                        Tri::Unknown => unknown += 1,
                        Tri::False => {}
                    }
                }
                if yes > *n || yes + unknown < *n {
                    Tri::False
                } else if unknown == 0 {
                    Tri::True
                } else {
                    Tri::Unknown
                }
            }
            Node::Iota(subject, v, g) => {
                let mut out = Tri::True;
                for e in self.elems(Sort::Person) {
                    env[*v] = e;
                    let mut t = self.eval(g, env, pending);
                    if e != *subject {
                        t = t.not();
                    }
                    match t {
                        Tri::False => return Tri::False,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                out
            }
        }
    }

    fn solve(&mut self, nodes: &[Node], env: &mut Vec<usize>) -> bool {
        let mut next = None;
        for node in nodes {
            let mut pending = None;
            match self.eval(node, env, &mut pending) {
                Tri::False => return false,
                Tri::True => {}
                Tri::Unknown => {
                    if next.is_none() {
                        next = pending;
                    }
                }
            }
        }
        match next {
            None => true,
            Some(Pending::Visit(i)) => {
                for value in [true, false] {
                    self.visits[i] = Some(value);
                    if self.solve(nodes, env) {
                        return true;
                    }
                }
                self.visits[i] = None;
                false
            }
            Some(Pending::Height(p)) => {
                for level in 1..=self.people as u8 {
                    self.heights[p] = Some(level);
                    if self.solve(nodes, env) {
                        return true;
                    }
                }
                self.heights[p] = None;
                false
            }
        }
    }
}

struct Compiler<'a> {
    index: &'a HashMap<Constant, usize>,
    vars: Vec<(String, usize)>,
    next_var: usize,
}

impl Compiler<'_> {
    fn slot(&self, t: &Term) -> Slot {
        match t {
            Term::Const(c) => Slot::Elem(self.index[c]),
            Term::Var(v) => Slot::Var(
                self.vars
                    .iter()
                    .rev()
                    .find(|(n, _)| n == v.name())
                    .map(|(_, i)| *i)
                    .expect("sentences are closed"),
            ),
        }
    }

    fn bind<T>(&mut self, name: &str, f: impl FnOnce(&mut Self, usize) -> T) -> T {
        let id = self.next_var;
        self.next_var += 1;
        self.vars.push((name.to_string(), id));
        let out = f(self, id);
        self.vars.pop();
        out
    }

    fn compile(&mut self, f: &Formula) -> Node {
        match f {
            Formula::Visit(a, b) => Node::Visit(self.slot(a), self.slot(b)),
            Formula::Taller(a, b) => Node::Taller(self.slot(a), self.slot(b)),
            Formula::AsTall(a, b) => Node::AsTall(self.slot(a), self.slot(b)),
            Formula::Eq(a, b) => Node::Eq(self.slot(a), self.slot(b)),
            Formula::Not(g) => Node::Not(Box::new(self.compile(g))),
            Formula::And(gs) => Node::And(gs.iter().map(|g| self.compile(g)).collect()),
            Formula::ForAll(v, g) => {
                self.bind(v.name(), |c, id| Node::ForAll(id, v.sort(), Box::new(c.compile(g))))
            }
            Formula::Exists(v, g) => {
                self.bind(v.name(), |c, id| Node::Exists(id, v.sort(), Box::new(c.compile(g))))
            }
            Formula::Count(n, v, g) => self.bind(v.name(), |c, id| {
                Node::Count(*n, id, v.sort(), Box::new(c.compile(g)))
            }),
            Formula::Iota(s, v, g) => {
                let subject = self.index[s];
                self.bind(v.name(), |c, id| Node::Iota(subject, id, Box::new(c.compile(g))))
            }
        }
    }
}

/// True iff some model over the bounded universe satisfies every formula.
pub fn brute_force_consistent(
    fs: &[Formula],
    bounds: UniverseBounds,
) -> Result<bool, SemanticsError> {
    check_sentences(fs)?;
    let universe = Universe::for_formulas(fs, bounds);
    let (people, places) = (universe.people.len(), universe.places.len());
    if people > ENUMERATION_GUARD || places > ENUMERATION_GUARD {
        return Err(SemanticsError::GuardExceeded {
            people,
            places,
            guard: ENUMERATION_GUARD,
        });
    }
    let index: HashMap<Constant, usize> = universe
        .people
        .iter()
        .chain(universe.places.iter())
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let mut compiler = Compiler {
        index: &index,
        vars: Vec::new(),
        next_var: 0,
    };
    let nodes: Vec<Node> = fs.iter().map(|f| compiler.compile(f)).collect();
    let mut env = vec![0; compiler.next_var];
    let mut search = Search {
        people,
        places,
        visits: vec![None; people * (people + places)],
        heights: vec![None; people],
    };
    Ok(search.solve(&nodes, &mut env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formulas;

    fn sat(texts: &[&str]) -> bool {
        brute_force_consistent(&parse_formulas(texts).unwrap(), UniverseBounds::default()).unwrap()
    }

    #[test]
    fn syntactic_contradiction() {
        assert!(!sat(&["(visit joe japan)", "(not (visit joe japan))"]));
    }

    #[test]
    fn strict_cycle_is_unsatisfiable() {
        assert!(!sat(&[
            "(taller francis joe)",
            "(taller joe ryan)",
            "(taller ryan francis)"
        ]));
        assert!(sat(&["(astall francis joe)", "(astall joe francis)"]));
    }

    #[test]
    fn universal_does_not_reach_people_as_places() {
        assert!(sat(&[
            "(forall (x person) (forall (p place) (visit x p)))",
            "(not (visit timothy x2))"
        ]));
        assert!(!sat(&[
            "(forall (x person) (forall (p place) (visit x p)))",
            "(not (visit timothy elsalvador))"
        ]));
    }

    #[test]
    fn guard_is_enforced() {
        let fs = parse_formulas(&["(and (visit a b) (visit c d) (visit e f) (visit g h) (visit i j) (visit k l) (visit m n))"]).unwrap();
        assert!(matches!(
            brute_force_consistent(&fs, UniverseBounds::default()),
            Err(SemanticsError::GuardExceeded { .. })
        ));
    }
}
