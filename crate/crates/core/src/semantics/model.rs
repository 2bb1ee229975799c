use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{Constant, Formula, Sort, Term, Variable};

use super::SemanticsError;

/// A finite interpretation.
///
/// `Taller(a, b)` holds iff `heights[a] > heights[b]`; `AsTall(a, b)` iff
/// `heights[a] >= heights[b]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub people: BTreeSet<Constant>,
    pub places: BTreeSet<Constant>,
    pub visits: BTreeSet<(Constant, Constant)>,
    pub heights: BTreeMap<Constant, i64>,
}

impl Model {
    /// Checks the structural invariants: sorted carriers, visits inside
    /// people x (people + places), heights total on people.
    pub fn validate(&self) -> Result<(), SemanticsError> {
        let bad = |m: String| Err(SemanticsError::InvalidModel(m));
        if let Some(c) = self.people.iter().find(|c| c.sort() != Sort::Person) {
            return bad(format!("`{c}` in people is not a person"));
        }
        if let Some(c) = self.places.iter().find(|c| c.sort() != Sort::Place) {
            return bad(format!("`{c}` in places is not a place"));
        }
        for (a, b) in &self.visits {
            if !self.people.contains(a) || !(self.people.contains(b) || self.places.contains(b)) {
                return bad(format!("visit ({a}, {b}) leaves the domain"));
            }
        }
        if let Some(c) = self.people.iter().find(|c| !self.heights.contains_key(c)) {
            return bad(format!("no height for `{c}`"));
        }
        Ok(())
    }

    fn domain(&self, sort: Sort) -> &BTreeSet<Constant> {
        match sort {
            Sort::Person => &self.people,
            Sort::Place => &self.places,
        }
    }

    fn contains(&self, c: &Constant) -> bool {
        self.domain(c.sort()).contains(c)
    }

    fn height(&self, c: &Constant) -> Result<i64, SemanticsError> {
        self.heights
            .get(c)
            .copied()
            .ok_or_else(|| SemanticsError::UnknownConstant(c.id().to_string()))
    }
}

/// Truth of a sentence in a model.
pub fn eval(m: &Model, f: &Formula) -> Result<bool, SemanticsError> {
    f.check_sentence()?;
    let mut missing = None;
    f.for_each_constant(&mut |c| {
        if missing.is_none() && !m.contains(c) {
            missing = Some(c.id().to_string());
        }
    });
    if let Some(id) = missing {
        return Err(SemanticsError::UnknownConstant(id));
    }
    eval_in(m, f, &mut Vec::new())
}

type Env = Vec<(Variable, Constant)>;

fn resolve(t: &Term, env: &Env) -> Constant {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(w, _)| w == v)
            .map(|(_, c)| c.clone())
            .expect("sentences have no free variables"),
    }
}

fn with_binding<T>(env: &mut Env, v: &Variable, c: &Constant, f: impl FnOnce(&mut Env) -> T) -> T {
    env.push((v.clone(), c.clone()));
    let out = f(env);
    env.pop();
    out
}

fn eval_in(m: &Model, f: &Formula, env: &mut Env) -> Result<bool, SemanticsError> {
    Ok(match f {
        Formula::Visit(a, b) => m.visits.contains(&(resolve(a, env), resolve(b, env))),
        Formula::Taller(a, b) => m.height(&resolve(a, env))? > m.height(&resolve(b, env))?,
        Formula::AsTall(a, b) => m.height(&resolve(a, env))? >= m.height(&resolve(b, env))?,
        Formula::Eq(a, b) => resolve(a, env) == resolve(b, env),
        Formula::Not(g) => !eval_in(m, g, env)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_in(m, g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::ForAll(v, g) => {
            for c in m.domain(v.sort()) {
                if !with_binding(env, v, c, |env| eval_in(m, g, env))? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Exists(v, g) => {
            for c in m.domain(v.sort()) {
                if with_binding(env, v, c, |env| eval_in(m, g, env))? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Count(n, v, g) => {
            let mut hits = 0u32;
            for c in m.domain(v.sort()) {
                if with_binding(env, v, c, |env| eval_in(m, g, env))? {
                    hits += 1;
                }
            }
            hits == *n
        }
        Formula::Iota(subject, v, g) => {
            for c in &m.people {
                let holds = with_binding(env, v, c, |env| eval_in(m, g, env))?;
                if holds != (c == subject) {
                    return Ok(false);
                }
            }
            true
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, parse_formulas};

    fn pe(id: &str) -> Constant {
        Constant::new(id, Sort::Person).unwrap()
    }

    fn pl(id: &str) -> Constant {
        Constant::new(id, Sort::Place).unwrap()
    }

    fn model(people: &[&str], places: &[&str], visits: &[(Constant, Constant)]) -> Model {
        Model {
            people: people.iter().map(|p| pe(p)).collect(),
            places: places.iter().map(|p| pl(p)).collect(),
            visits: visits.iter().cloned().collect(),
            heights: people.iter().map(|p| (pe(p), 0)).collect(),
        }
    }

    #[test]
    fn single_visit() {
        let m = model(&["charles"], &["chile"], &[(pe("charles"), pl("chile"))]);
        m.validate().unwrap();
        assert!(eval(&m, &parse_formula("(visit charles chile)").unwrap()).unwrap());
    }

    #[test]
    fn person_place_distinction() {
        let people = ["timothy", "anthony"];
        let mut visits = Vec::new();
        for a in people {
            for b in people {
                visits.push((pe(a), pe(b)));
            }
            visits.push((pe(a), pl("elsalvador")));
        }
        let full = model(&people, &["elsalvador"], &visits);
        let everyone = parse_formula("(forall (x person) (forall (p place) (visit x p)))").unwrap();
        let fs = parse_formulas(&["(not (visit timothy anthony))", "(taller timothy anthony)"]).unwrap();
        let trap = &fs[0];
        assert!(eval(&full, &everyone).unwrap());
        assert!(!eval(&full, trap).unwrap());

        let mut reduced = full.clone();
        reduced.visits.remove(&(pe("timothy"), pe("anthony")));
        assert!(eval(&reduced, &everyone).unwrap());
        assert!(eval(&reduced, trap).unwrap());
    }

    #[test]
    fn heights_order() {
        let mut m = model(&["francis", "joe", "ryan"], &[], &[]);
        m.heights = BTreeMap::from([(pe("francis"), 3), (pe("joe"), 2), (pe("ryan"), 1)]);
        let f = parse_formula("(taller francis ryan)").unwrap();
        assert!(eval(&m, &f).unwrap());
        assert!(!eval(&m, &parse_formula("(taller ryan francis)").unwrap()).unwrap());
        assert!(eval(&m, &parse_formula("(astall joe joe)").unwrap()).unwrap());
    }

    #[test]
    fn counting_and_description() {
        let visits = [
            (pe("philip"), pl("a")),
            (pe("philip"), pl("b")),
            (pe("carlos"), pl("a")),
            (pe("carlos"), pl("b")),
            (pe("carlos"), pl("c")),
        ];
        let m = model(&["philip", "carlos"], &["a", "b", "c"], &visits);
        let two = parse_formula("(count 2 (p place) (visit philip p))").unwrap();
        let three = parse_formula("(count 3 (p place) (visit philip p))").unwrap();
        assert!(eval(&m, &two).unwrap());
        assert!(!eval(&m, &three).unwrap());
        let desc = parse_formula("(iota carlos (y) (forall (p place) (visit y p)))").unwrap();
        assert!(eval(&m, &desc).unwrap());
        let wrong = parse_formula("(iota philip (y) (forall (p place) (visit y p)))").unwrap();
        assert!(!eval(&m, &wrong).unwrap());
    }

    #[test]
    fn unknown_constant_is_reported() {
        let m = model(&["charles"], &["chile"], &[]);
        let f = parse_formula("(visit joe chile)").unwrap();
        assert_eq!(eval(&m, &f), Err(SemanticsError::UnknownConstant("joe".into())));
    }
}
