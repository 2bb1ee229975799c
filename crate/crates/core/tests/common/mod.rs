#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use contra_forge::logic::{Constant, Formula, Sort, Term, Variable};
use contra_forge::semantics::Model;
use proptest::prelude::*;

/// Formula skeleton; terms are picked at build time from whatever is in scope.
#[derive(Debug, Clone)]
pub enum Shape {
    Atom(u8, u8, u8),
    Not(Box<Shape>),
    And(Vec<Shape>),
    Quant(u8, bool, u8, Box<Shape>),
    Iota(u8, Box<Shape>),
}

pub fn shape(depth: u32) -> impl Strategy<Value = Shape> {
    let leaf = (0u8..4, any::<u8>(), any::<u8>()).prop_map(|(k, a, b)| Shape::Atom(k, a, b));
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Shape::Not(Box::new(s))),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Shape::And),
            (0u8..3, any::<bool>(), 1u8..4, inner.clone())
                .prop_map(|(k, person, n, s)| Shape::Quant(k, person, n, Box::new(s))),
            (any::<u8>(), inner).prop_map(|(c, s)| Shape::Iota(c, Box::new(s))),
        ]
    })
}

/// Builds sentences over people `x0..x{people}` and places `p0..p{places}`.
pub struct Builder {
    pub people: usize,
    pub places: usize,
    pub max_count: u32,
}

impl Builder {
    fn term(&self, sort: Sort, pick: u8, scope: &[Variable]) -> Term {
        let n = match sort {
            Sort::Person => self.people,
            Sort::Place => self.places,
        };
        let vars: Vec<&Variable> = scope.iter().filter(|v| v.sort() == sort).collect();
        let k = pick as usize % (n + vars.len());
        if k < vars.len() {
            Term::Var(vars[k].clone())
        } else {
            let i = k - vars.len();
            Term::Const(match sort {
                Sort::Person => Constant::person(i),
                Sort::Place => Constant::place(i),
            })
        }
    }

    pub fn build(&self, s: &Shape, scope: &mut Vec<Variable>) -> Formula {
        match s {
            Shape::Atom(kind, a, b) => {
                let a_term = self.term(Sort::Person, *a, scope);
                match kind {
                    0 => {
                        let sort = if b % 2 == 0 { Sort::Person } else { Sort::Place };
                        Formula::visit(a_term, self.term(sort, b / 2, scope)).unwrap()
                    }
                    1 => Formula::taller(a_term, self.term(Sort::Person, *b, scope)).unwrap(),
                    2 => Formula::as_tall(a_term, self.term(Sort::Person, *b, scope)).unwrap(),
                    _ => {
                        let sort = if b % 2 == 0 { Sort::Person } else { Sort::Place };
                        Formula::eq(self.term(sort, *a, scope), self.term(sort, b / 2, scope)).unwrap()
                    }
                }
            }
            Shape::Not(g) => Formula::not(self.build(g, scope)),
            Shape::And(gs) => Formula::and(gs.iter().map(|g| self.build(g, scope))).unwrap(),
            Shape::Quant(kind, person, n, g) => {
                let sort = if *person { Sort::Person } else { Sort::Place };
                let v = Variable::new(format!("v{}", scope.len()), sort).unwrap();
                scope.push(v.clone());
                let body = self.build(g, scope);
                scope.pop();
                match kind {
                    0 => Formula::forall(v, body).unwrap(),
                    1 => Formula::exists(v, body).unwrap(),
                    _ => Formula::count((*n as u32 - 1) % self.max_count + 1, v, body).unwrap(),
                }
            }
            Shape::Iota(c, g) => {
                let v = Variable::new(format!("v{}", scope.len()), Sort::Person).unwrap();
                scope.push(v.clone());
                let body = self.build(g, scope);
                scope.pop();
                Formula::iota(Constant::person(*c as usize % self.people), v, body).unwrap()
            }
        }
    }
}

pub fn sentence(b: Builder, depth: u32) -> impl Strategy<Value = Formula> {
    shape(depth).prop_map(move |s| b.build(&s, &mut Vec::new()))
}

/// Sentences of the shapes the task generators produce, over `people`
/// and `places` constants.
pub fn fragment_sentence(people: usize, places: usize, max_count: u32) -> impl Strategy<Value = Formula> {
    let pe = move |i: usize| Constant::person(i % people);
    let pl = move |i: usize| Constant::place(i % places);
    let x = || Variable::new("x", Sort::Person).unwrap();
    let p = || Variable::new("p", Sort::Place).unwrap();
    (0u8..16, 0usize..8, 0usize..8, 1u32..=max_count).prop_map(move |(kind, i, j, n)| {
        let target = |j: usize| -> Term {
            if j % 2 == 0 {
                pl(j / 2).into()
            } else {
                pe(j / 2).into()
            }
        };
        match kind {
            0 | 1 => Formula::visit(pe(i), target(j)).unwrap(),
            2 | 3 => Formula::not(Formula::visit(pe(i), target(j)).unwrap()),
            4 => Formula::forall(x(), Formula::visit(x(), target(j)).unwrap()).unwrap(),
            5 => Formula::forall(p(), Formula::visit(pe(i), p()).unwrap()).unwrap(),
            6 => Formula::forall(x(), Formula::forall(p(), Formula::visit(x(), p()).unwrap()).unwrap()).unwrap(),
            7 => Formula::exists(x(), Formula::visit(x(), target(j)).unwrap()).unwrap(),
            8 => Formula::exists(x(), Formula::not(Formula::visit(x(), target(j)).unwrap())).unwrap(),
            9 => Formula::not(Formula::exists(x(), Formula::visit(x(), target(j)).unwrap()).unwrap()),
            10 => Formula::count(n, p(), Formula::visit(pe(i), p()).unwrap()).unwrap(),
            11 => Formula::count(n, x(), Formula::visit(pe(i), x()).unwrap()).unwrap(),
            12 => Formula::taller(pe(i), pe(j)).unwrap(),
            13 => Formula::as_tall(pe(i), pe(j)).unwrap(),
            14 => Formula::not(Formula::taller(pe(i), pe(j)).unwrap()),
            _ => Formula::iota(pe(i), x(), Formula::visit(x(), pl(j)).unwrap()).unwrap(),
        }
    })
}

/// Random model over `x0..` and `p0..`.
pub fn model(people: usize, places: usize) -> impl Strategy<Value = Model> {
    let cells = people * (people + places);
    (
        prop::collection::vec(any::<bool>(), cells),
        prop::collection::vec(0i64..4, people),
    )
        .prop_map(move |(visits, heights)| {
            let pe: Vec<Constant> = (0..people).map(Constant::person).collect();
            let pl: Vec<Constant> = (0..places).map(Constant::place).collect();
            let targets: Vec<&Constant> = pe.iter().chain(&pl).collect();
            let mut v = BTreeSet::new();
            for (k, on) in visits.into_iter().enumerate() {
                if on {
                    v.insert((pe[k / targets.len()].clone(), targets[k % targets.len()].clone()));
                }
            }
            Model {
                people: pe.iter().cloned().collect(),
                places: pl.iter().cloned().collect(),
                visits: v,
                heights: pe.iter().cloned().zip(heights).collect::<BTreeMap<_, _>>(),
            }
        })
}
