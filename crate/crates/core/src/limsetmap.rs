//! Witness search against limset maps.
//!
//! If the identity of `G` extends continuously from `G ∪ ∂X₁` to
//! `G ∪ ∂X₂`, any two sequences with a common limit in `∂X₁` have a common
//! limit in `∂X₂`. A pair of families violating this is an obstruction.
//! Finding none over a finite suite is evidence, not proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::ActionSpec;
use crate::error::{Error, Result};
use crate::freegroup::{Ambient, GroupElement, Letter};
use crate::sequences::{
    classify, compare_traced, trace_elements, LimitConfig, LimitReport, LimitStatus, Point,
    SameLimitReport, SequenceFamily, Target,
};
use crate::syntax::parse_family_file;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionWitness {
    pub fam1: String,
    pub fam2: String,
    /// Same limit under the first target.
    pub under_first: SameLimitReport,
    /// Different limits under the second target.
    pub under_second: SameLimitReport,
}

struct Evaluated {
    label: String,
    first: (LimitReport, Vec<Point>),
    second: (LimitReport, Vec<Point>),
}

fn evaluate_all(
    t1: &Target,
    t2: &Target,
    candidates: &[SequenceFamily],
    cfg: &LimitConfig,
) -> Result<Vec<Evaluated>> {
    cfg.validate()?;
    for t in [t1, t2] {
        if let Some(f) = candidates.iter().find(|f| f.ambient() != t.ambient()) {
            let (x, y) = (t.ambient(), f.ambient());
            return Err(Error::AmbientMismatch {
                m1: x.m,
                d1: x.d,
                m2: y.m,
                d2: y.d,
            });
        }
    }
    candidates
        .par_iter()
        .map(|fam| {
            let elements: Vec<GroupElement> = cfg
                .schedule
                .iter()
                .map(|&n| fam.evaluate(n))
                .collect::<Result<_>>()?;
            let p1 = trace_elements(t1, &cfg.schedule, elements.clone())?;
            let p2 = trace_elements(t2, &cfg.schedule, elements)?;
            let r1 = classify(fam.label(), t1, &p1, cfg);
            let r2 = classify(fam.label(), t2, &p2, cfg);
            for r in [&r1, &r2] {
                if r.status == LimitStatus::NotCauchy {
                    return Err(Error::Inconclusive(fam.label().to_string()));
                }
            }
            Ok(Evaluated {
                label: fam.label().to_string(),
                first: (r1, p1),
                second: (r2, p2),
            })
        })
        .collect()
}

fn same_report(
    a: &(LimitReport, Vec<Point>),
    b: &(LimitReport, Vec<Point>),
    cfg: &LimitConfig,
) -> Result<SameLimitReport> {
    let (same, agreement) = compare_traced(&a.0, &a.1, &b.0, &b.1, cfg)?;
    Ok(SameLimitReport {
        same,
        prefix_agreement: agreement.iter().map(ToString::to_string).collect(),
        first: a.0.clone(),
        second: b.0.clone(),
    })
}

/// First pair `(i, j)`, `i < j` in input order, with a common limit under
/// `t1` but distinct limits under `t2`.
pub fn find_obstruction(
    t1: &Target,
    t2: &Target,
    candidates: &[SequenceFamily],
    cfg: &LimitConfig,
) -> Result<Option<ObstructionWitness>> {
    let evaluated = evaluate_all(t1, t2, candidates, cfg)?;
    for i in 0..evaluated.len() {
        for j in i + 1..evaluated.len() {
            let (x, y) = (&evaluated[i], &evaluated[j]);
            let first = same_report(&x.first, &y.first, cfg)?;
            if !first.same {
                continue;
            }
            let second = same_report(&x.second, &y.second, cfg)?;
            if !second.same {
                return Ok(Some(ObstructionWitness {
                    fam1: x.label.clone(),
                    fam2: y.label.clone(),
                    under_first: first,
                    under_second: second,
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquatorReport {
    /// No obstruction was found among the candidates.
    pub map_exists: bool,
    pub candidates: Vec<String>,
    pub witness: Option<ObstructionWitness>,
}

/// Runs [`find_obstruction`] on the horizontal factors alone.
pub fn equator_restriction_check(
    a1: &ActionSpec,
    a2: &ActionSpec,
    candidates: &[SequenceFamily],
    cfg: &LimitConfig,
) -> Result<EquatorReport> {
    let projected = candidates
        .iter()
        .map(SequenceFamily::horizontal_projection)
        .collect::<Result<Vec<_>>>()?;
    let t1 = Target::Single(a1.horizontal_projection());
    let t2 = Target::Single(a2.horizontal_projection());
    let witness = find_obstruction(&t1, &t2, &projected, cfg)?;
    Ok(EquatorReport {
        map_exists: witness.is_none(),
        candidates: candidates.iter().map(|f| f.label().to_string()).collect(),
        witness,
    })
}

const BASES: [&str; 6] = [
    "a^n",
    "b^n",
    "a^n b^{n^2}",
    "a^n b^{-n^2}",
    "a^n (ab)^{n^2}",
    "a^{n+n^2} b^{n^2}",
];

/// The standard candidates: six `F_2` families, each also multiplied by
/// `z^n`, `z^{n²}` and `z^{2n²}` for the first abelian generator `z` when
/// `d ≥ 1`.
pub fn standard_suite(ambient: Ambient) -> Result<Vec<SequenceFamily>> {
    if ambient.m < 2 {
        return Err(Error::RequiresTwoGenerators);
    }
    let mut lines: Vec<String> = BASES.iter().map(ToString::to_string).collect();
    if ambient.d >= 1 {
        let z = Letter::gen(ambient.m + 1).to_char();
        for p in ["n", "{n^2}", "{2n^2}"] {
            lines.extend(BASES.iter().map(|b| format!("{b} {z}^{p}")));
        }
    }
    parse_family_file(&lines.join("\n"), ambient)
}
