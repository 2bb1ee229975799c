//! Decision procedure for the task fragment.
//!
//! Formulas are grounded over the closed universe into four kinds of
//! constraints, each handled by its own procedure:
//!
//! * visit literals (from facts, universals and descriptions), propagated
//!   into a partial assignment; a clash is inconsistent;
//! * choices (from existentials and negated universals), each a disjunction
//!   of literal conjunctions, settled by a witness search over the
//!   propagated assignment;
//! * counting claims `exactly n` over one agent's visit row, checked against
//!   the forced-true and forced-false entries of that row;
//! * height atoms, as a graph of `>` and `>=` edges, inconsistent exactly
//!   when some cycle contains a strict edge.
//!
//! Combinations that no task produces (choices over order atoms, negated
//! counts, counts sharing a row with a choice, ...) are rejected with
//! [`SemanticsError::OutsideFragment`].

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::logic::{Constant, Formula, Sort, Term};

use super::{check_sentences, SemanticsError, Universe, UniverseBounds};

type Atom = (Constant, Constant);
type Literal = (Atom, bool);

struct CountClaim {
    agent: Constant,
    sort: Sort,
    n: u32,
}

/// `from` is at least as tall as `to`; strictly taller when `strict`.
struct OrderEdge {
    from: Constant,
    to: Constant,
    strict: bool,
}

#[derive(Default)]
struct Ground {
    literals: Vec<Literal>,
    /// Each choice needs one of its options; an option is a conjunction.
    choices: Vec<Vec<Vec<Literal>>>,
    counts: Vec<CountClaim>,
    order: Vec<OrderEdge>,
    falsum: bool,
}

fn outside(what: impl Into<String>) -> SemanticsError {
    SemanticsError::OutsideFragment(what.into())
}

fn ground_term(t: &Term) -> Result<Constant, SemanticsError> {
    t.as_constant()
        .cloned()
        .ok_or_else(|| outside("unbound variable in atom"))
}

struct Grounder<'a> {
    universe: &'a Universe,
}

impl Grounder<'_> {
    /// Grounds `f` asserted with the given polarity.
    fn ground(&self, f: &Formula, positive: bool, out: &mut Ground) -> Result<(), SemanticsError> {
        match f {
            Formula::Visit(a, b) => {
                out.literals
                    .push(((ground_term(a)?, ground_term(b)?), positive));
            }
            Formula::Taller(a, b) | Formula::AsTall(a, b) => {
                let (a, b) = (ground_term(a)?, ground_term(b)?);
                let strict = matches!(f, Formula::Taller(..));
                // not (a > b) is b >= a; not (a >= b) is b > a
                let edge = if positive {
                    OrderEdge { from: a, to: b, strict }
                } else {
                    OrderEdge {
                        from: b,
                        to: a,
                        strict: !strict,
                    }
                };
                out.order.push(edge);
            }
            Formula::Eq(a, b) => {
                if (ground_term(a)? == ground_term(b)?) != positive {
                    out.falsum = true;
                }
            }
            Formula::Not(g) => self.ground(g, !positive, out)?,
            Formula::And(gs) if positive => {
                for g in gs {
                    self.ground(g, true, out)?;
                }
            }
            Formula::And(gs) => {
                let options = gs.iter().map(|g| self.pure(g, false)).collect();
                self.push_choice(options, out)?;
            }
            Formula::ForAll(v, g) | Formula::Exists(v, g) => {
                let universal = matches!(f, Formula::ForAll(..)) == positive;
                let instances = self.universe.of_sort(v.sort()).iter().map(|c| g.substitute(v, c));
                if universal {
                    for inst in instances {
                        self.ground(&inst, positive, out)?;
                    }
                } else {
                    let options = instances.map(|inst| self.pure(&inst, positive)).collect();
                    self.push_choice(options, out)?;
                }
            }
            Formula::Count(n, v, g) => {
                if !positive {
                    return Err(outside("negated counting quantifier"));
                }
                match &**g {
                    Formula::Visit(Term::Const(agent), Term::Var(w)) if w == v => {
                        out.counts.push(CountClaim {
                            agent: agent.clone(),
                            sort: v.sort(),
                            n: *n,
                        });
                    }
                    _ => return Err(outside("counting body other than a visit row")),
                }
            }
            Formula::Iota(subject, v, g) => {
                if !positive {
                    return Err(outside("negated definite description"));
                }
                for c in &self.universe.people {
                    let inst = g.substitute(v, c);
                    self.ground(&inst, c == subject, out)?;
                }
            }
        }
        Ok(())
    }

    fn push_choice(
        &self,
        options: Vec<Result<Option<Vec<Literal>>, SemanticsError>>,
        out: &mut Ground,
    ) -> Result<(), SemanticsError> {
        let mut live = Vec::new();
        for o in options {
            if let Some(lits) = o? {
                live.push(lits);
            }
        }
        if live.is_empty() {
            out.falsum = true;
        } else if live.iter().any(Vec::is_empty) {
            // an option that is already true satisfies the choice
        } else {
            out.choices.push(live);
        }
        Ok(())
    }

    /// Grounds a choice option, which must reduce to a conjunction of visit
    /// literals. `None` means the option is false outright.
    fn pure(&self, f: &Formula, positive: bool) -> Result<Option<Vec<Literal>>, SemanticsError> {
        let mut g = Ground::default();
        self.ground(f, positive, &mut g)?;
        if !g.choices.is_empty() || !g.counts.is_empty() || !g.order.is_empty() {
            return Err(outside("nested choice or non-visit atom under an existential"));
        }
        if g.falsum {
            return Ok(None);
        }
        let mut seen: HashMap<&Atom, bool> = HashMap::new();
        for (atom, v) in &g.literals {
            if seen.insert(atom, *v).is_some_and(|prev| prev != *v) {
                return Ok(None);
            }
        }
        Ok(Some(g.literals))
    }
}

/// Some cycle in the height graph contains a strict edge.
fn order_inconsistent(edges: &[OrderEdge]) -> bool {
    let mut adj: HashMap<&Constant, Vec<&Constant>> = HashMap::new();
    for e in edges {
        adj.entry(&e.from).or_default().push(&e.to);
    }
    let reaches = |start: &Constant, goal: &Constant| {
        let mut seen = HashSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if n == goal {
                return true;
            }
            if seen.insert(n) {
                if let Some(next) = adj.get(n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        false
    };
    edges.iter().filter(|e| e.strict).any(|e| reaches(&e.to, &e.from))
}

fn viable(option: &[Literal], assignment: &HashMap<Atom, bool>) -> bool {
    option
        .iter()
        .all(|(atom, v)| assignment.get(atom).is_none_or(|cur| cur == v))
}

fn choose(
    choices: &[Vec<Vec<Literal>>],
    done: &mut Vec<bool>,
    assignment: &mut HashMap<Atom, bool>,
) -> bool {
    // most constrained choice first
    let next = (0..choices.len())
        .filter(|&i| !done[i])
        .min_by_key(|&i| choices[i].iter().filter(|o| viable(o, assignment)).count());
    let Some(i) = next else {
        return true;
    };
    done[i] = true;
    for option in &choices[i] {
        if !viable(option, assignment) {
            continue;
        }
        let added: Vec<Atom> = option
            .iter()
            .filter(|(atom, _)| !assignment.contains_key(atom))
            .map(|(atom, _)| atom.clone())
            .collect();
        for (atom, v) in option {
            assignment.insert(atom.clone(), *v);
        }
        if choose(choices, done, assignment) {
            return true;
        }
        for atom in added {
            assignment.remove(&atom);
        }
    }
    done[i] = false;
    false
}

/// [`consistent_with`] under the default universe bounds.
pub fn consistent(fs: &[Formula]) -> Result<bool, SemanticsError> {
    consistent_with(fs, UniverseBounds::default())
}

/// Decides satisfiability of `fs` over the bounded universe.
pub fn consistent_with(fs: &[Formula], bounds: UniverseBounds) -> Result<bool, SemanticsError> {
    check_sentences(fs)?;
    let universe = Universe::for_formulas(fs, bounds);
    let grounder = Grounder {
        universe: &universe,
    };
    let mut g = Ground::default();
    for f in fs {
        grounder.ground(f, true, &mut g)?;
    }
    if g.falsum {
        return Ok(false);
    }

    if order_inconsistent(&g.order) {
        return Ok(false);
    }

    let mut assignment: HashMap<Atom, bool> = HashMap::new();
    for (atom, v) in &g.literals {
        if let Some(prev) = assignment.insert(atom.clone(), *v) {
            if prev != *v {
                return Ok(false);
            }
        }
    }

    let mut rows: BTreeMap<(Constant, Sort), u32> = BTreeMap::new();
    for claim in &g.counts {
        match rows.insert((claim.agent.clone(), claim.sort), claim.n) {
            Some(prev) if prev != claim.n => return Ok(false),
            _ => {}
        }
    }
    for ((agent, sort), n) in &rows {
        let row = universe.of_sort(*sort);
        let (mut yes, mut no) = (0u32, 0u32);
        for target in row {
            match assignment.get(&(agent.clone(), target.clone())) {
                Some(true) => yes += 1,
                Some(false) => no += 1,
                None => {}
            }
        }
        if yes > *n || (row.len() as u32 - no) < *n {
            return Ok(false);
        }
    }
    let counted = |atom: &Atom| rows.contains_key(&(atom.0.clone(), atom.1.sort()));
    if g
        .choices
        .iter()
        .flatten()
        .flatten()
        .any(|(atom, _)| counted(atom))
    {
        return Err(outside("existential over a counted visit row"));
    }

    let mut done = vec![false; g.choices.len()];
    Ok(choose(&g.choices, &mut done, &mut assignment))
}
