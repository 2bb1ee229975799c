use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use contra_forge::dataset::{read_split, Example};
use contra_forge::logic::Label;
use contra_forge::semantics::{brute_force_consistent, label_pair, SemanticsError, UniverseBounds};
use contra_forge::taskgen::check_hierarchy;
use rayon::prelude::*;

#[derive(Args)]
pub struct VerifyArgs {
    /// JSONL split to check.
    input: PathBuf,
    /// Also compare against exhaustive model enumeration wherever the
    /// universe is small enough.
    #[arg(long)]
    oracle: bool,
}

enum Outcome {
    Ok { oracle: Option<bool> },
    Mismatch { computed: String },
}

fn oracle_label(e: &Example) -> Result<Option<Label>, SemanticsError> {
    let s = &e.pair.symbolic;
    let mut all = s.premise.clone();
    all.push(s.hypothesis.clone());
    match brute_force_consistent(&all, UniverseBounds::default()) {
        Ok(true) => Ok(Some(Label::NonContradiction)),
        Ok(false) => Ok(Some(Label::Contradiction)),
        Err(SemanticsError::GuardExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check(e: &Example, oracle: bool) -> Outcome {
    let s = &e.pair.symbolic;
    let stored = s.label;
    let computed = match label_pair(&s.premise, &s.hypothesis) {
        Ok(l) => l,
        Err(err) => return Outcome::Mismatch { computed: format!("error: {err}") },
    };
    if computed != stored {
        return Outcome::Mismatch {
            computed: computed.to_string(),
        };
    }
    if let Err(err) = check_hierarchy(s.task, s) {
        return Outcome::Mismatch {
            computed: format!("error: {err}"),
        };
    }
    if !oracle {
        return Outcome::Ok { oracle: None };
    }
    match oracle_label(e) {
        Ok(None) => Outcome::Ok { oracle: None },
        Ok(Some(l)) if l == stored => Outcome::Ok { oracle: Some(true) },
        Ok(Some(l)) => Outcome::Mismatch {
            computed: format!("oracle: {l}"),
        },
        Err(err) => Outcome::Mismatch {
            computed: format!("oracle error: {err}"),
        },
    }
}

/// Returns whether every example checked out.
pub fn run(args: VerifyArgs) -> Result<bool> {
    let split = read_split(&args.input)?;
    let outcomes: Vec<Outcome> = split.examples.par_iter().map(|e| check(e, args.oracle)).collect();
    let mut mismatches = 0;
    let mut oracle_checked = 0;
    for (e, o) in split.examples.iter().zip(&outcomes) {
        match o {
            Outcome::Ok { oracle } => oracle_checked += usize::from(oracle.is_some()),
            Outcome::Mismatch { computed } => {
                mismatches += 1;
                println!("MISMATCH\t{}\tstored={}\tcomputed={}", e.id, e.pair.label(), computed);
            }
        }
    }
    println!("{}: {} examples, {} mismatches", args.input.display(), split.len(), mismatches);
    if args.oracle {
        println!("oracle compared on {oracle_checked} examples (others exceed the enumeration guard)");
    }
    Ok(mismatches == 0)
}
