//! The diagonal action of `G` on `X₁ × X₂`: sampled schmear points in the
//! coordinates `(η, m₁, m₂, 1/ν)`, the averaging construction, and dyadic
//! convexity of fibers.

use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{check_radius, pair_functionals, ActionSpec};
use crate::error::{Error, Result};
use crate::exactnum::QuadExt;
use crate::freegroup::{ball_words, lattice_ball, straighten, Ambient, GroupElement, Word};
use crate::sequences::{
    classify, prefix_grows, prefix_lengths, trace, ElementSequence, LimitConfig, LimitReport,
    LimitStatus, SharedSequence, Target,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmearPoint {
    pub eta_prefix: String,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub nu_inv: f64,
    /// `M = d₂/d₁`.
    pub slope: f64,
    pub source: String,
}

/// Orbit points `g^Δ·x₀` for `g` in the ball `l(w) + |z|₁ ≤ radius`, in
/// shortlex order of `w` then lexicographic order of `z`. Elements with
/// trivial word are skipped.
pub fn sample_schmear(
    a1: &ActionSpec,
    a2: &ActionSpec,
    radius: usize,
) -> Result<Vec<SchmearPoint>> {
    let amb = a1.ambient();
    if amb != a2.ambient() {
        let b = a2.ambient();
        return Err(Error::AmbientMismatch {
            m1: amb.m,
            d1: amb.d,
            m2: b.m,
            d2: b.d,
        });
    }
    check_radius(amb.m, radius)?;
    let words = ball_words(amb.m, radius);
    let chunks: Vec<Vec<SchmearPoint>> = words
        .par_iter()
        .skip(1)
        .map(|letters| {
            let word = Word::from_letters(letters.iter().copied());
            let eta = word.to_string();
            lattice_ball(amb.d, radius - letters.len())
                .into_iter()
                .map(|z| {
                    let z = z.into_iter().map(BigInt::from).collect();
                    let g = GroupElement::new(amb, word.clone(), z)?;
                    let p = pair_functionals(a1, a2, &g)?;
                    Ok(SchmearPoint {
                        eta_prefix: eta.clone(),
                        m1: p.m1.iter().map(QuadExt::to_f64).collect(),
                        m2: p.m2.iter().map(QuadExt::to_f64).collect(),
                        nu_inv: p.nu.recip()?.to_f64(),
                        slope: p.m_sq.to_f64().sqrt(),
                        source: g.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Writes points as CSV: `eta_prefix, m1_1…, m2_1…, nu_inv, source`.
pub fn write_schmear_csv<W: Write>(points: &[SchmearPoint], d: usize, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["eta_prefix".to_string()];
    header.extend((1..=d).map(|i| format!("m1_{i}")));
    header.extend((1..=d).map(|i| format!("m2_{i}")));
    header.push("nu_inv".into());
    header.push("source".into());
    wtr.write_record(&header)?;
    for p in points {
        let mut row = vec![p.eta_prefix.clone()];
        row.extend(p.m1.iter().map(f64::to_string));
        row.extend(p.m2.iter().map(f64::to_string));
        row.push(p.nu_inv.to_string());
        row.push(p.source.clone());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeBounds {
    /// `max(M, 1/M)` over the sample.
    pub lambda_est: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub points: usize,
}

pub fn slope_bounds(points: &[SchmearPoint]) -> Result<SlopeBounds> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty schmear sample".into()));
    }
    let fold = |f: fn(&SchmearPoint) -> f64| {
        points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    };
    let (slope_min, slope_max) = fold(|p| p.slope);
    let (nu_min, nu_max) = fold(|p| 1.0 / p.nu_inv);
    Ok(SlopeBounds {
        lambda_est: slope_max.max(1.0 / slope_min),
        slope_min,
        slope_max,
        nu_min,
        nu_max,
        points: points.len(),
    })
}

/// `c_n = g_n^{s_n} h_n^{t_n}` built from two sequences after straightening,
/// with `s_n = ⌊H₂(w_n)⌋`, `t_n = ⌊H₂(v_n)⌋` for `g_n = ⟨v_n, ρ_n⟩`,
/// `h_n = ⟨w_n, σ_n⟩`.
pub struct AveragedFamily {
    a2: ActionSpec,
    first: SharedSequence,
    second: SharedSequence,
    label: String,
}

/// The three sequences `a_n = g_n^{s_n}`, `b_n = h_n^{t_n}`, `c_n = a_n b_n`.
pub struct AveragingComponents {
    pub a: GroupElement,
    pub b: GroupElement,
    pub c: GroupElement,
}

impl AveragedFamily {
    pub fn new(
        first: SharedSequence,
        second: SharedSequence,
        a2: ActionSpec,
    ) -> Result<AveragedFamily> {
        for s in [&first, &second] {
            if s.ambient() != a2.ambient() {
                let (x, y) = (a2.ambient(), s.ambient());
                return Err(Error::AmbientMismatch {
                    m1: x.m,
                    d1: x.d,
                    m2: y.m,
                    d2: y.d,
                });
            }
        }
        let label = format!("avg({}, {})", first.label(), second.label());
        Ok(AveragedFamily {
            a2,
            first,
            second,
            label,
        })
    }

    pub fn components(&self, n: u64) -> Result<AveragingComponents> {
        let m = self.a2.ambient().m;
        let g = self.first.element(n)?;
        let h = self.second.element(n)?;
        let g = g.with_word(straighten(g.word(), m)?);
        let h = h.with_word(straighten(h.word(), m)?);
        let s = self.a2.horizontal().distance(h.word())?.floor();
        let t = self.a2.horizontal().distance(g.word())?.floor();
        let a = g.pow(&s);
        let b = h.pow(&t);
        let c = a.compose(&b)?;
        Ok(AveragingComponents { a, b, c })
    }
}

impl ElementSequence for AveragedFamily {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn ambient(&self) -> Ambient {
        self.a2.ambient()
    }

    fn element(&self, n: u64) -> Result<GroupElement> {
        Ok(self.components(n)?.c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingCheck {
    pub id: u8,
    pub name: String,
    pub measured: Vec<f64>,
    pub expected: Vec<f64>,
    /// Largest `|measured − expected| / max(1, |expected|)`.
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingReport {
    pub fam_a: String,
    pub fam_b: String,
    pub fam_c: String,
    pub n: u64,
    pub tol: f64,
    pub checks: Vec<AveragingCheck>,
    pub seed_a: LimitReport,
    pub seed_b: LimitReport,
    pub c_limit: LimitReport,
    pub pass: bool,
}

pub struct AveragingOutcome {
    pub family: Arc<AveragedFamily>,
    pub report: AveragingReport,
}

fn deviation(measured: &[f64], expected: &[f64]) -> f64 {
    measured
        .iter()
        .zip(expected)
        .map(|(m, e)| (m - e).abs() / e.abs().max(1.0))
        .fold(0.0, f64::max)
}

fn check(id: u8, name: &str, measured: Vec<f64>, expected: Vec<f64>, tol: f64) -> AveragingCheck {
    let dev = deviation(&measured, &expected);
    AveragingCheck {
        id,
        name: name.to_string(),
        measured,
        expected,
        deviation: dev,
        pass: dev < tol,
    }
}

fn ratio(x: &QuadExt, y: &QuadExt) -> Result<f64> {
    Ok(x.checked_div(y)?.to_f64())
}

/// Limits of several sequences under the diagonal target, checked to lie in
/// one fiber: converged, a common tree direction, and equal `m₁`.
fn fiber_limits(
    seqs: &[SharedSequence],
    target: &Target,
    cfg: &LimitConfig,
) -> Result<Vec<(LimitReport, Vec<Word>)>> {
    let out = seqs
        .iter()
        .map(|s| {
            let points = trace(s.as_ref(), target, &cfg.schedule)?;
            let report = classify(&s.label(), target, &points, cfg);
            if report.status != LimitStatus::Converged {
                return Err(Error::Inconclusive(report.family));
            }
            Ok((
                report,
                points
                    .into_iter()
                    .map(|p| p.element.word().clone())
                    .collect::<Vec<Word>>(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (base, base_words) = &out[0];
    for (r, words) in &out[1..] {
        let agreement: Vec<_> = base_words
            .iter()
            .zip(words)
            .map(|(x, y)| x.common_prefix_length(y))
            .collect();
        if !prefix_grows(&agreement, cfg.last()) {
            return Err(Error::NotInCommonFiber(format!(
                "`{}` and `{}` have different tree directions",
                base.family, r.family
            )));
        }
        if deviation(&r.m_limit, &base.m_limit) >= cfg.tol {
            return Err(Error::NotInCommonFiber(format!(
                "m₁ limits differ: {:?} for `{}` vs {:?} for `{}`",
                base.m_limit, base.family, r.m_limit, r.family
            )));
        }
    }
    Ok(out)
}

/// Builds the averaged family of two seeds and measures the seven
/// conclusions of the averaging construction at the last schedule point.
pub fn average_families(
    fam_a: SharedSequence,
    fam_b: SharedSequence,
    a1: &ActionSpec,
    a2: &ActionSpec,
    cfg: &LimitConfig,
    check_tol: f64,
) -> Result<AveragingOutcome> {
    cfg.validate()?;
    let target = Target::diagonal(a1.clone(), a2.clone())?;
    let seeds = fiber_limits(&[fam_a.clone(), fam_b.clone()], &target, cfg)?;
    let (ra, rb) = (&seeds[0].0, &seeds[1].0);

    let family = Arc::new(AveragedFamily::new(
        fam_a.clone(),
        fam_b.clone(),
        a2.clone(),
    )?);
    let n = cfg.last();
    let comps = family.components(n)?;
    let (a, b, c) = (&comps.a, &comps.b, &comps.c);
    let h = |act: &ActionSpec, g: &GroupElement| act.horizontal().distance(g.word());
    let (h1a, h1b, h1c) = (h(a1, a)?, h(a1, b)?, h(a1, c)?);
    let (h2a, h2b, h2c) = (h(a2, a)?, h(a2, b)?, h(a2, c)?);
    let pc = pair_functionals(a1, a2, c)?;

    let c_points = trace(family.as_ref(), &target, &cfg.schedule)?;
    let c_limit = classify(&family.label(), &target, &c_points, cfg);
    let c_prefixes = prefix_lengths(&c_points);
    let along_a = c
        .word()
        .common_prefix_length(&seeds[0].1[cfg.schedule.len() - 1]);
    let prefix_ok = prefix_grows(&c_prefixes, cfg.schedule[cfg.schedule.len() - 2])
        && along_a.clone() * 2u32 >= n.into();

    let ma2 = ra.m2_limit.clone().unwrap_or_default();
    let mb2 = rb.m2_limit.clone().unwrap_or_default();
    let mid = |x: &[f64], y: &[f64]| -> Vec<f64> {
        x.iter().zip(y).map(|(p, q)| (p + q) / 2.0).collect()
    };
    let nu_mid = (ra.nu_inv_limit.unwrap() + rb.nu_inv_limit.unwrap()) / 2.0;

    let to_f = |v: &[QuadExt]| v.iter().map(QuadExt::to_f64).collect::<Vec<_>>();
    let last_prefix = c_prefixes.last().map(|p| p.to_string()).unwrap_or_default();
    let checks = vec![
        AveragingCheck {
            id: 0,
            name: format!("c_n stays in the tree direction (prefix with next {last_prefix}, with seed {along_a})"),
            measured: vec![f64::from(u8::from(prefix_ok))],
            expected: vec![1.0],
            deviation: if prefix_ok { 0.0 } else { 1.0 },
            pass: prefix_ok,
        },
        check(1, "(H1(a)+H1(b))/H1(c) -> 1", vec![ratio(&(&h1a + &h1b), &h1c)?], vec![1.0], check_tol),
        check(2, "(H2(a)+H2(b))/H2(c) -> 1", vec![ratio(&(&h2a + &h2b), &h2c)?], vec![1.0], check_tol),
        check(3, "H2(a)/H2(b) -> 1", vec![ratio(&h2a, &h2b)?], vec![1.0], check_tol),
        check(4, "m1(c) -> m1(zeta)", to_f(&pc.m1), ra.m_limit.clone(), check_tol),
        check(5, "m2(c) -> midpoint of m2", to_f(&pc.m2), mid(&ma2, &mb2), check_tol),
        check(6, "1/nu(c) -> midpoint of 1/nu", vec![pc.nu.recip()?.to_f64()], vec![nu_mid], check_tol),
    ];
    let pass = checks.iter().all(|c| c.pass);
    let report = AveragingReport {
        fam_a: fam_a.label(),
        fam_b: fam_b.label(),
        fam_c: family.label(),
        n,
        tol: check_tol,
        checks,
        seed_a: ra.clone(),
        seed_b: rb.clone(),
        c_limit,
        pass,
    };
    Ok(AveragingOutcome { family, report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub label: String,
    /// Position `k / 2^rounds` along the segment between two seeds.
    pub seeds: (usize, usize),
    pub weight: f64,
    pub expected: Vec<f64>,
    /// `(m₂, 1/ν)` of the limit.
    pub measured: Vec<f64>,
    pub deviation: f64,
    pub m1_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub seeds: Vec<String>,
    pub rounds: u32,
    pub tol: f64,
    pub fiber_m1: Vec<f64>,
    pub seed_points: Vec<Vec<f64>>,
    pub points: Vec<FiberPoint>,
    pub max_deviation: f64,
    pub max_m1_deviation: f64,
    /// Affine dimension of the seed limits in `(m₂, 1/ν)`.
    pub hull_dimension: usize,
    pub pass: bool,
}

fn fiber_coords(r: &LimitReport) -> Vec<f64> {
    let mut v = r.m2_limit.clone().unwrap_or_default();
    v.push(r.nu_inv_limit.unwrap_or(f64::NAN));
    v
}

/// Affine dimension of a point set, with `eps` as the rank threshold.
pub fn affine_dimension(points: &[Vec<f64>], eps: f64) -> usize {
    let Some(origin) = points.first() else {
        return 0;
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut v: Vec<f64> = p.iter().zip(origin).map(|(x, o)| x - o).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > eps {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    basis.len()
}

/// Dyadic subdivision of every segment between seeds, `rounds` deep; each
/// new point is the averaged family of its two neighbours.
pub fn fiber_convexity_check(
    a1: &ActionSpec,
    a2: &ActionSpec,
    seeds: &[SharedSequence],
    rounds: u32,
    cfg: &LimitConfig,
    tol: f64,
) -> Result<ConvexityReport> {
    cfg.validate()?;
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seed families".into()));
    }
    if rounds > 6 {
        return Err(Error::InvalidArgument(format!(
            "rounds = {rounds} exceeds 6"
        )));
    }
    let target = Target::diagonal(a1.clone(), a2.clone())?;
    let limits = fiber_limits(seeds, &target, cfg)?;
    let seed_points: Vec<Vec<f64>> = limits.iter().map(|(r, _)| fiber_coords(r)).collect();
    let fiber_m1 = limits[0].0.m_limit.clone();

    let mut jobs: Vec<(usize, usize, u32, SharedSequence)> = Vec::new();
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            // chain[k] sits at weight k / 2^r
            let mut chain: Vec<SharedSequence> = vec![seeds[i].clone(), seeds[j].clone()];
            for _ in 0..rounds {
                let mut next = Vec::with_capacity(2 * chain.len() - 1);
                for w in chain.windows(2) {
                    next.push(w[0].clone());
                    let mid: SharedSequence =
                        Arc::new(AveragedFamily::new(w[0].clone(), w[1].clone(), a2.clone())?);
                    next.push(mid);
                }
                next.push(chain.last().unwrap().clone());
                chain = next;
            }
            let last = chain.len() - 1;
            for (k, fam) in chain.into_iter().enumerate().take(last).skip(1) {
                jobs.push((i, j, k as u32, fam));
            }
        }
    }
    let denom = f64::from(1u32 << rounds);
    let points = jobs
        .par_iter()
        .map(|(i, j, k, fam)| {
            let pts = trace(fam.as_ref(), &target, &cfg.schedule)?;
            let r = classify(&fam.label(), &target, &pts, cfg);
            if r.status != LimitStatus::Converged {
                return Err(Error::Inconclusive(r.family));
            }
            let w = f64::from(*k) / denom;
            let expected: Vec<f64> = seed_points[*i]
                .iter()
                .zip(&seed_points[*j])
                .map(|(p, q)| (1.0 - w) * p + w * q)
                .collect();
            let measured = fiber_coords(&r);
            Ok(FiberPoint {
                label: r.family.clone(),
                seeds: (*i, *j),
                weight: w,
                deviation: deviation(&measured, &expected),
                m1_deviation: deviation(&r.m_limit, &fiber_m1),
                expected,
                measured,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_deviation = points.iter().map(|p| p.deviation).fold(0.0, f64::max);
    let max_m1_deviation = points.iter().map(|p| p.m1_deviation).fold(0.0, f64::max);
    Ok(ConvexityReport {
        seeds: seeds.iter().map(|s| s.label()).collect(),
        rounds,
        tol,
        fiber_m1,
        hull_dimension: affine_dimension(&seed_points, tol),
        seed_points,
        points,
        max_deviation,
        max_m1_deviation,
        pass: max_deviation < tol && max_m1_deviation < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_family;

    fn seq(s: &str, d: usize) -> SharedSequence {
        Arc::new(parse_family(s, Ambient::new(2, d).unwrap()).unwrap())
    }

    #[test]
    fn identical_actions_give_unit_nu() {
        let pts = sample_schmear(&fixtures::gamma(), &fixtures::gamma(), 4).unwrap();
        assert_eq!(pts.len(), 160);
        assert!(pts.iter().all(|p| p.nu_inv == 1.0));
        assert_eq!(slope_bounds(&pts).unwrap().lambda_est, 1.0);
    }

    #[test]
    fn stretched_sample_range() {
        let pts = sample_schmear(&fixtures::gamma(), &fixtures::gamma_prime(), 6).unwrap();
        let b = slope_bounds(&pts).unwrap();
        assert_eq!((b.nu_min, b.nu_max), (1.0, 2.0));
        assert!(pts.iter().all(|p| (0.5..=1.0).contains(&p.nu_inv)));
        assert!(slope_bounds(&[]).is_err());
    }

    #[test]
    fn csv_layout() {
        let pts = sample_schmear(&fixtures::product(), &fixtures::star(), 1).unwrap();
        let mut buf = Vec::new();
        write_schmear_csv(&pts, 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("eta_prefix,m1_1,m2_1,nu_inv,source"));
        assert_eq!(lines.next(), Some("a,0,0,0.5,a"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn averaging_midpoint() {
        let cfg = LimitConfig::default();
        let out = average_families(
            seq("a^n b^{n^2}", 1),
            seq("a^n b^{-n^2}", 1),
            &fixtures::product(),
            &fixtures::star(),
            &cfg,
            0.02,
        )
        .unwrap();
        assert!(out.report.pass, "{:#?}", out.report.checks);
        assert!(out.report.c_limit.m2_limit.as_ref().unwrap()[0].abs() < 1e-3);
    }

    #[test]
    fn averaging_rejects_different_fibers() {
        let cfg = LimitConfig::default();
        let err = average_families(
            seq("a^n c^n", 1),
            seq("a^n", 1),
            &fixtures::product(),
            &fixtures::star(),
            &cfg,
            0.02,
        )
        .err()
        .unwrap();
        assert!(matches!(err, Error::NotInCommonFiber(_)), "{err}");
        let err = average_families(
            seq("a^n", 1),
            seq("b^n", 1),
            &fixtures::product(),
            &fixtures::star(),
            &cfg,
            0.02,
        )
        .err()
        .unwrap();
        assert!(matches!(err, Error::NotInCommonFiber(_)), "{err}");
    }

    #[test]
    fn single_seed_is_trivially_convex() {
        let cfg = LimitConfig::default();
        let r = fiber_convexity_check(
            &fixtures::gamma(),
            &fixtures::gamma_prime(),
            &[seq("a^n", 0)],
            3,
            &cfg,
            1e-2,
        )
        .unwrap();
        assert!(r.points.is_empty() && r.pass);
        assert_eq!(r.hull_dimension, 0);
    }

    #[test]
    fn affine_dimensions() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert_eq!(affine_dimension(&pts, 1e-9), 1);
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(affine_dimension(&pts, 1e-9), 2);
    }
}
