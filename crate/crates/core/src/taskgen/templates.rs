//! Per-task pair templates.
//!
//! Every sampler receives the label it must produce and builds a premise and
//! hypothesis for it; the caller re-checks the label with the semantics.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::logic::{Constant, Formula, Label, Sort, TaskId, Variable};

use super::{ConstantPool, CountForms, GenError, IntRange, TaskConfig};

pub(super) struct Draft {
    pub premise: Vec<Formula>,
    pub hypothesis: Formula,
    pub template_id: String,
}

/// Hands out unused constants from the pool.
struct Alloc<'a> {
    pool: &'a ConstantPool,
    people: usize,
    places: usize,
}

impl Alloc<'_> {
    fn take(&mut self, sort: Sort) -> Result<Constant, GenError> {
        let (next, limit) = match sort {
            Sort::Person => (&mut self.people, self.pool.people),
            Sort::Place => (&mut self.places, self.pool.places),
        };
        if *next >= limit {
            return Err(GenError::PoolExhausted { sort, available: limit });
        }
        *next += 1;
        Ok(match sort {
            Sort::Person => Constant::person(*next - 1),
            Sort::Place => Constant::place(*next - 1),
        })
    }

    fn person(&mut self) -> Result<Constant, GenError> {
        self.take(Sort::Person)
    }

    fn place(&mut self) -> Result<Constant, GenError> {
        self.take(Sort::Place)
    }

    fn many(&mut self, sort: Sort, n: usize) -> Result<Vec<Constant>, GenError> {
        (0..n).map(|_| self.take(sort)).collect()
    }
}

fn var(name: &str, sort: Sort) -> Variable {
    Variable::new(name, sort).expect("fixed variable names are valid")
}

fn visit(a: &Constant, b: &Constant) -> Formula {
    Formula::visit(a, b).expect("agents are people")
}

fn not_visit(a: &Constant, b: &Constant) -> Formula {
    Formula::not(visit(a, b))
}

fn conj(fs: Vec<Formula>) -> Formula {
    if fs.len() == 1 {
        return fs.into_iter().next().expect("one conjunct");
    }
    Formula::and(fs).expect("conjuncts are atoms")
}

/// "Someone didn't visit `b`".
fn someone_missed(b: &Constant) -> Formula {
    let x = var("x", Sort::Person);
    Formula::exists(x.clone(), Formula::not(Formula::visit(&x, b).expect("x is a person"))).expect("closed")
}

/// "Nobody has visited `b`".
fn nobody_visited(b: &Constant) -> Formula {
    let x = var("x", Sort::Person);
    Formula::not(Formula::exists(x.clone(), Formula::visit(&x, b).expect("x is a person")).expect("closed"))
}

/// `a` visited every individual of `sort`.
fn visited_all(a: &Constant, sort: Sort) -> Formula {
    let v = var(if sort == Sort::Place { "p" } else { "x" }, sort);
    Formula::forall(v.clone(), Formula::visit(a, &v).expect("a is a person")).expect("closed")
}

fn count(n: u32, a: &Constant, sort: Sort) -> Formula {
    let v = var(if sort == Sort::Place { "p" } else { "x" }, sort);
    Formula::count(n, v.clone(), Formula::visit(a, &v).expect("a is a person")).expect("n in range")
}

fn distractors(alloc: &mut Alloc, n: u32) -> Result<Vec<Formula>, GenError> {
    (0..n)
        .map(|_| Ok(visit(&alloc.person()?, &alloc.place()?)))
        .collect()
}

fn draft(premise: Vec<Formula>, hypothesis: Formula, id: &str) -> Draft {
    Draft {
        premise,
        hypothesis,
        template_id: id.to_string(),
    }
}

pub(super) fn sample(
    task: TaskId,
    label: Label,
    cfg: &TaskConfig,
    pool: &ConstantPool,
    rng: &mut ChaCha8Rng,
) -> Result<Draft, GenError> {
    let mut alloc = Alloc {
        pool,
        people: 0,
        places: 0,
    };
    let contra = label == Label::Contradiction;
    match task.number() {
        1 => simple_negation(contra, cfg, &mut alloc, rng),
        2 => coordination(contra, cfg, &mut alloc, rng),
        3 => quantification(contra, cfg, &mut alloc, rng),
        4 => description(contra, &mut alloc, rng),
        5 => comparatives(contra, cfg, &mut alloc, rng),
        6 => counting(contra, cfg, &mut alloc, rng),
        _ => Err(GenError::Config(format!("task {task} has no templates of its own"))),
    }
}

fn simple_negation(contra: bool, cfg: &TaskConfig, alloc: &mut Alloc, rng: &mut ChaCha8Rng) -> Result<Draft, GenError> {
    let k = cfg.facts_range.sample(rng) as usize;
    let people = alloc.many(Sort::Person, k)?;
    let places = alloc.many(Sort::Place, k)?;
    let premise: Vec<Formula> = people.iter().zip(&places).map(|(a, b)| visit(a, b)).collect();
    let j = rng.gen_range(0..k);
    Ok(if contra {
        draft(premise, not_visit(&people[j], &places[j]), "t1/negate-fact")
    } else if rng.gen_bool(0.5) {
        let h = not_visit(&alloc.person()?, &places[j]);
        draft(premise, h, "t1/fresh-agent")
    } else {
        let h = not_visit(&alloc.person()?, &alloc.place()?);
        draft(premise, h, "t1/fresh-fact")
    })
}

fn coordination(contra: bool, cfg: &TaskConfig, alloc: &mut Alloc, rng: &mut ChaCha8Rng) -> Result<Draft, GenError> {
    let m = cfg.sentences_range.sample(rng) as usize;
    let mut groups = Vec::with_capacity(m);
    for _ in 0..m {
        let w = cfg.coordination_range.sample(rng) as usize;
        groups.push((alloc.many(Sort::Person, w)?, alloc.place()?));
    }
    let premise = groups
        .iter()
        .map(|(agents, p)| conj(agents.iter().map(|a| visit(a, p)).collect()))
        .collect();
    let (agents, p) = groups.choose(rng).expect("at least one sentence");
    Ok(if contra {
        let a = agents.choose(rng).expect("nonempty coordination");
        draft(premise, not_visit(a, p), "t2/negate-member")
    } else if rng.gen_bool(0.5) {
        draft(premise, not_visit(&alloc.person()?, p), "t2/fresh-agent")
    } else {
        let h = not_visit(&alloc.person()?, &alloc.place()?);
        draft(premise, h, "t2/fresh-fact")
    })
}

fn quantification(contra: bool, cfg: &TaskConfig, alloc: &mut Alloc, rng: &mut ChaCha8Rng) -> Result<Draft, GenError> {
    let x = var("x", Sort::Person);
    let p = var("p", Sort::Place);
    let family = rng.gen_range(1..=5);
    let (premise, hypothesis, id) = match family {
        // everyone has visited every place
        1 => {
            let all = Formula::forall(
                x.clone(),
                Formula::forall(p.clone(), Formula::visit(&x, &p)?)?,
            )?;
            let a = alloc.person()?;
            let target = if contra { alloc.place()? } else { alloc.person()? };
            let (h, shape) = match rng.gen_range(0..3) {
                0 => (not_visit(&a, &target), "named"),
                1 => (someone_missed(&target), "someone"),
                _ => (nobody_visited(&target), "nobody"),
            };
            let kind = if contra { "place" } else { "person" };
            (all, h, format!("t3/everyone-every-place/{shape}-{kind}"))
        }
        // c has visited every place
        2 => {
            let c = alloc.person()?;
            let premise = visited_all(&c, Sort::Place);
            let pl = alloc.place()?;
            let (h, shape) = if contra {
                match rng.gen_range(0..2) {
                    0 => (not_visit(&c, &pl), "same-agent"),
                    _ => (nobody_visited(&pl), "nobody"),
                }
            } else {
                match rng.gen_range(0..3) {
                    0 => (not_visit(&alloc.person()?, &pl), "other-agent"),
                    1 => (not_visit(&c, &alloc.person()?), "person-object"),
                    _ => (someone_missed(&pl), "someone"),
                }
            };
            (premise, h, format!("t3/agent-every-place/{shape}"))
        }
        // everyone has visited pl
        3 => {
            let pl = alloc.place()?;
            let premise = Formula::forall(x.clone(), Formula::visit(&x, &pl)?)?;
            let target = if contra { pl } else { alloc.place()? };
            let (h, shape) = match rng.gen_range(0..3) {
                0 => (not_visit(&alloc.person()?, &target), "named"),
                1 => (someone_missed(&target), "someone"),
                _ => (nobody_visited(&target), "nobody"),
            };
            let kind = if contra { "same-place" } else { "other-place" };
            (premise, h, format!("t3/everyone-place/{shape}-{kind}"))
        }
        // someone has visited every place
        4 => {
            let premise = Formula::exists(
                x.clone(),
                Formula::forall(p.clone(), Formula::visit(&x, &p)?)?,
            )?;
            let pl = alloc.place()?;
            let (h, shape) = if contra {
                (nobody_visited(&pl), "nobody")
            } else {
                match rng.gen_range(0..2) {
                    0 => (not_visit(&alloc.person()?, &pl), "named"),
                    _ => (someone_missed(&pl), "someone"),
                }
            };
            (premise, h, format!("t3/someone-every-place/{shape}"))
        }
        // someone has visited pl
        _ => {
            let pl = alloc.place()?;
            let premise = Formula::exists(x.clone(), Formula::visit(&x, &pl)?)?;
            let (h, shape) = if contra {
                (nobody_visited(&pl), "nobody")
            } else {
                match rng.gen_range(0..2) {
                    0 => (not_visit(&alloc.person()?, &pl), "named"),
                    _ => (nobody_visited(&alloc.place()?), "nobody-other-place"),
                }
            };
            (premise, h, format!("t3/someone-place/{shape}"))
        }
    };
    // "someone has visited every place" names nobody, so without another
    // person in the premise the domain has a single person and "someone
    // didn't visit pl" would clash; both labels get the extra fact
    let least = u32::from(family == 4);
    let mut facts = vec![premise];
    facts.extend(distractors(alloc, cfg.distractor_range.sample(rng).max(least))?);
    facts.shuffle(rng);
    Ok(Draft {
        premise: facts,
        hypothesis,
        template_id: id,
    })
}

fn description(contra: bool, alloc: &mut Alloc, rng: &mut ChaCha8Rng) -> Result<Draft, GenError> {
    let y = var("y", Sort::Person);
    let c = alloc.person()?;
    let d = alloc.person()?;
    let group = rng.gen_range(0..3);
    let (property, id) = match group {
        0 => (visited_all_var(&y, Sort::Place), "every-place"),
        1 => (visited_all_var(&y, Sort::Person), "everyone"),
        _ => (Formula::visit(&y, &alloc.place()?)?, "one-place"),
    };
    let described = Formula::iota(c.clone(), y.clone(), property)?;
    let premise = vec![described, visit(&c, &d)];
    let second = rng.gen_bool(0.5);
    let (h, shape) = match (group, contra, second) {
        // property "visited every place" / "visited everyone"
        (0 | 1, _, false) => {
            let sort = if group == 0 { Sort::Place } else { Sort::Person };
            let target = alloc.take(sort)?;
            let who = if contra { &c } else { &d };
            (not_visit(who, &target), "negated-visit")
        }
        (0 | 1, _, true) => {
            let sort = if group == 0 { Sort::Place } else { Sort::Person };
            let who = if contra { &d } else { &c };
            (visited_all(who, sort), "property")
        }
        // property "visited pl"
        (_, true, false) => (visit(&d, premise_place(&premise[0])), "other-has-property"),
        (_, true, true) => (not_visit(&c, premise_place(&premise[0])), "negated-property"),
        (_, false, false) => (visit(&d, &alloc.place()?), "other-place"),
        (_, false, true) => (not_visit(&d, premise_place(&premise[0])), "other-lacks-property"),
    };
    Ok(draft(premise, h, &format!("t4/{id}/{shape}")))
}

fn visited_all_var(y: &Variable, sort: Sort) -> Formula {
    let v = var(if sort == Sort::Place { "p" } else { "x" }, sort);
    Formula::forall(v.clone(), Formula::visit(y, &v).expect("y is a person")).expect("y bound by the caller")
}

fn premise_place(described: &Formula) -> &Constant {
    match described {
        Formula::Iota(_, _, body) => match &**body {
            Formula::Visit(_, t) => t.as_constant().expect("described place is a constant"),
            _ => unreachable!("one-place property"),
        },
        _ => unreachable!("description first"),
    }
}

fn comparatives(contra: bool, cfg: &TaskConfig, alloc: &mut Alloc, rng: &mut ChaCha8Rng) -> Result<Draft, GenError> {
    let k = cfg.facts_range.sample(rng) as usize;
    let people = alloc.many(Sort::Person, k + 1)?;
    let mut strict: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.7)).collect();
    if !strict.contains(&true) {
        let e = rng.gen_range(0..k);
        strict[e] = true;
    }
    let edge = |i: usize| {
        if strict[i] {
            Formula::taller(&people[i], &people[i + 1])
        } else {
            Formula::as_tall(&people[i], &people[i + 1])
        }
        .expect("people")
    };
    let mut premise: Vec<Formula> = (0..k).map(edge).collect();
    premise.shuffle(rng);
    let ordered = |rng: &mut ChaCha8Rng| {
        let i = rng.gen_range(0..k);
        let j = rng.gen_range(i + 1..=k);
        (i, j)
    };
    let use_strict = rng.gen_bool(0.5);
    let (h, id) = if use_strict {
        let (i, j) = ordered(rng);
        if contra {
            (Formula::taller(&people[j], &people[i])?, "t5/taller/reversed")
        } else {
            (Formula::taller(&people[i], &people[j])?, "t5/taller/forward")
        }
    } else if contra {
        // any span that crosses a strict edge
        let strict_edges: Vec<usize> = (0..k).filter(|&e| strict[e]).collect();
        let e = *strict_edges.choose(rng).expect("at least one strict edge");
        let i = rng.gen_range(0..=e);
        let j = rng.gen_range(e + 1..=k);
        (Formula::as_tall(&people[j], &people[i])?, "t5/as-tall/reversed-strict")
    } else {
        let weak_edges: Vec<usize> = (0..k).filter(|&e| !strict[e]).collect();
        if !weak_edges.is_empty() && rng.gen_bool(0.5) {
            // a span made only of weak edges
            let e = *weak_edges.choose(rng).expect("nonempty");
            let mut i = e;
            while i > 0 && !strict[i - 1] {
                i -= 1;
            }
            let mut j = e + 1;
            while j < k && !strict[j] {
                j += 1;
            }
            let i = rng.gen_range(i..=e);
            let j = rng.gen_range(e + 1..=j);
            (Formula::as_tall(&people[j], &people[i])?, "t5/as-tall/reversed-weak")
        } else {
            let (i, j) = ordered(rng);
            (Formula::as_tall(&people[i], &people[j])?, "t5/as-tall/forward")
        }
    };
    Ok(draft(premise, h, id))
}

fn counting(contra: bool, cfg: &TaskConfig, alloc: &mut Alloc, rng: &mut ChaCha8Rng) -> Result<Draft, GenError> {
    let agent = alloc.person()?;
    let conjoined = match cfg.count_forms {
        CountForms::Conjoined => true,
        CountForms::Single => false,
        CountForms::Both => rng.gen_bool(0.5),
    };
    let n_place = cfg.count_range.sample(rng);
    let n_person = cfg.count_range.sample(rng);
    let (claim, sort, n) = if conjoined {
        let claim = Formula::and([count(n_place, &agent, Sort::Place), count(n_person, &agent, Sort::Person)])?;
        if rng.gen_bool(0.5) {
            (claim, Sort::Place, n_place)
        } else {
            (claim, Sort::Person, n_person)
        }
    } else if rng.gen_bool(0.5) {
        (count(n_place, &agent, Sort::Place), Sort::Place, n_place)
    } else {
        (count(n_person, &agent, Sort::Person), Sort::Person, n_person)
    };
    let f = IntRange::new(0, 2.min(n - 1)).sample(rng);
    let mut others: Vec<Formula> = alloc
        .many(sort, f as usize)?
        .iter()
        .map(|e| visit(&agent, e))
        .collect();
    others.extend(distractors(alloc, cfg.distractor_range.sample(rng))?);
    others.shuffle(rng);
    let mut premise = vec![claim];
    premise.extend(others);

    let kind = if conjoined { "conjoined" } else { "single" };
    let sort_name = if sort == Sort::Place { "places" } else { "people" };
    let alternatives: Vec<u32> = (cfg.count_range.min..=cfg.count_range.max).filter(|&k| k != n).collect();
    let recount = !alternatives.is_empty() && rng.gen_bool(0.5);
    let (h, shape) = if !recount {
        let listed = if contra {
            n + 1 - f
        } else {
            IntRange::new(1, 3.min(n - f)).sample(rng)
        };
        let targets = alloc.many(sort, listed as usize)?;
        let h = conj(targets.iter().map(|e| visit(&agent, e)).collect());
        (h, if contra { "list-exceeds" } else { "list-within" })
    } else if contra {
        let k = *alternatives.choose(rng).expect("nonempty");
        (count(k, &agent, sort), "recount-differs")
    } else if rng.gen_bool(0.5) {
        let k = cfg.count_range.sample(rng);
        (count(k, &alloc.person()?, sort), "recount-other-agent")
    } else {
        (count(n, &agent, sort), "recount-same")
    };
    Ok(draft(premise, h, &format!("t6/{kind}/{sort_name}/{shape}")))
}
