//! Sequence families `g_n` with polynomial exponents and the detection of
//! their limits in the visual boundary.
//!
//! A limit is read off at a finite schedule of `n` values. Coordinates are
//! computed exactly at each point, extrapolated exactly under the ansatz
//! `x(n) = L + c/n + O(1/n²)`, and accepted when successive extrapolants
//! agree to a relative tolerance.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{displacement, pair_functionals, ActionSpec};
use crate::error::{Error, Result};
use crate::exactnum::QuadExt;
use crate::freegroup::{Ambient, GroupElement, Word};

/// Integer polynomial in `n` used as an exponent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentPoly {
    /// `coeffs[k]` multiplies `n^k`; no trailing zeros.
    coeffs: Vec<i64>,
}

impl ExponentPoly {
    pub const MAX_DEGREE: usize = 4;

    /// Panics if the degree exceeds [`ExponentPoly::MAX_DEGREE`].
    pub fn from_coeffs(coeffs: &[i64]) -> ExponentPoly {
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        assert!(
            coeffs.len() <= Self::MAX_DEGREE + 1,
            "exponent degree above {}",
            Self::MAX_DEGREE
        );
        ExponentPoly { coeffs }
    }

    pub fn constant(c: i64) -> ExponentPoly {
        ExponentPoly::from_coeffs(&[c])
    }

    pub fn n() -> ExponentPoly {
        ExponentPoly::from_coeffs(&[0, 1])
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn negate(&self) -> ExponentPoly {
        ExponentPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn as_constant(&self) -> Option<i64> {
        match self.coeffs.len() {
            0 => Some(0),
            1 => Some(self.coeffs[0]),
            _ => None,
        }
    }

    pub fn eval(&self, n: u64) -> BigInt {
        let n = BigInt::from(n);
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &c| acc * &n + BigInt::from(c))
    }
}

impl fmt::Display for ExponentPoly {
    /// Ascending powers, e.g. `n+n^2`, `-1+2n^2`, `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 {
                "-"
            } else if wrote {
                "+"
            } else {
                ""
            };
            let mag = c.unsigned_abs();
            let body = match (k, mag) {
                (0, _) => mag.to_string(),
                (1, 1) => "n".to_string(),
                (1, _) => format!("{mag}n"),
                (_, 1) => format!("n^{k}"),
                _ => format!("{mag}n^{k}"),
            };
            write!(f, "{sign}{body}")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Something that produces a group element for each `n`.
pub trait ElementSequence: Send + Sync {
    fn label(&self) -> String;
    fn ambient(&self) -> Ambient;
    fn element(&self, n: u64) -> Result<GroupElement>;
}

/// `n ↦ Π_i pattern_i^{p_i(n)}`, reduced.
#[derive(Clone, Debug)]
pub struct SequenceFamily {
    ambient: Ambient,
    blocks: Vec<(GroupElement, ExponentPoly)>,
    n0: u64,
    label: String,
}

impl SequenceFamily {
    pub fn new(
        ambient: Ambient,
        blocks: Vec<(GroupElement, ExponentPoly)>,
    ) -> Result<SequenceFamily> {
        if let Some((g, _)) = blocks.iter().find(|(g, _)| g.ambient() != ambient) {
            return Err(Error::AmbientMismatch {
                m1: ambient.m,
                d1: ambient.d,
                m2: g.ambient().m,
                d2: g.ambient().d,
            });
        }
        let mut fam = SequenceFamily {
            ambient,
            blocks,
            n0: 1,
            label: String::new(),
        };
        fam.label = fam.to_string();
        Ok(fam)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> SequenceFamily {
        self.label = label.into();
        self
    }

    pub fn with_n0(mut self, n0: u64) -> SequenceFamily {
        self.n0 = n0;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn blocks(&self) -> &[(GroupElement, ExponentPoly)] {
        &self.blocks
    }

    /// True when no block carries an abelian part.
    pub fn is_pure_free(&self) -> bool {
        self.blocks
            .iter()
            .all(|(g, _)| g.z().iter().all(Zero::is_zero))
    }

    pub fn evaluate(&self, n: u64) -> Result<GroupElement> {
        if n < self.n0 {
            return Err(Error::BelowThreshold { n, n0: self.n0 });
        }
        let mut acc = GroupElement::identity(self.ambient);
        for (pattern, poly) in &self.blocks {
            acc = acc.compose(&pattern.pow(&poly.eval(n)))?;
        }
        Ok(acc)
    }

    /// Same blocks over `F_m` alone; fails if a pattern has an abelian part.
    pub fn horizontal_projection(&self) -> Result<SequenceFamily> {
        if !self.is_pure_free() {
            return Err(Error::NonzeroAbelianPart(self.label.clone()));
        }
        let amb = Ambient {
            m: self.ambient.m,
            d: 0,
        };
        let blocks = self
            .blocks
            .iter()
            .map(|(g, p)| Ok((GroupElement::from_word(amb, g.word().clone())?, p.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(SequenceFamily {
            ambient: amb,
            blocks,
            n0: self.n0,
            label: self.label.clone(),
        })
    }
}

impl fmt::Display for SequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "1");
        }
        for (i, (g, p)) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let base = g.to_string();
            if base.chars().count() == 1 {
                write!(f, "{base}")?;
            } else {
                write!(f, "({base})")?;
            }
            match p.as_constant() {
                Some(1) => {}
                Some(k) => write!(f, "^{k}")?,
                None if *p == ExponentPoly::n() => write!(f, "^n")?,
                None => write!(f, "^{{{p}}}")?,
            }
        }
        Ok(())
    }
}

impl ElementSequence for SequenceFamily {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn ambient(&self) -> Ambient {
        self.ambient
    }

    fn element(&self, n: u64) -> Result<GroupElement> {
        self.evaluate(n)
    }
}

pub fn evaluate(fam: &SequenceFamily, n: u64) -> Result<GroupElement> {
    fam.evaluate(n)
}

/// Where limits are taken: one action, or the diagonal action on a product
/// of two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Single(ActionSpec),
    Diagonal(ActionSpec, ActionSpec),
}

impl Target {
    pub fn ambient(&self) -> Ambient {
        match self {
            Target::Single(a) | Target::Diagonal(a, _) => a.ambient(),
        }
    }

    /// Accepts a plain action spec or `{"diagonal": [spec1, spec2]}`.
    pub fn from_json(text: &str) -> Result<Target> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Diag {
            diagonal: (ActionSpec, ActionSpec),
        }
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("diagonal").is_some() {
            let Diag { diagonal: (a1, a2) } = serde_json::from_str(text)?;
            Target::diagonal(a1, a2)
        } else {
            Ok(Target::Single(ActionSpec::from_json(text)?))
        }
    }

    pub fn diagonal(a1: ActionSpec, a2: ActionSpec) -> Result<Target> {
        if a1.ambient() != a2.ambient() {
            let (x, y) = (a1.ambient(), a2.ambient());
            return Err(Error::AmbientMismatch {
                m1: x.m,
                d1: x.d,
                m2: y.m,
                d2: y.d,
            });
        }
        Ok(Target::Diagonal(a1, a2))
    }

    pub fn to_json(&self) -> String {
        let v = match self {
            Target::Single(a) => serde_json::to_value(a),
            Target::Diagonal(a1, a2) => {
                serde_json::to_value(serde_json::json!({ "diagonal": [a1, a2] }))
            }
        };
        serde_json::to_string_pretty(&v.expect("targets serialize")).expect("targets serialize")
    }
}

/// Exact data of one element under a target.
#[derive(Clone, Debug)]
pub(crate) struct Point {
    pub n: u64,
    pub element: GroupElement,
    /// Horizontal displacement (in the first factor for diagonals).
    pub horizontal: QuadExt,
    /// `|T|²`, summed over both factors for diagonals.
    pub vertical_sq: QuadExt,
    /// Concatenated vertical translations.
    pub vertical: Vec<QuadExt>,
    /// Single: `m`. Diagonal: `m₁, m₂, 1/ν, M²`.
    pub coords: Vec<QuadExt>,
}

pub(crate) fn point(target: &Target, n: u64, element: GroupElement) -> Result<Point> {
    match target {
        Target::Single(a) => {
            let x = displacement(a, &element)?;
            Ok(Point {
                n,
                horizontal: x.horizontal.clone(),
                vertical_sq: x.vertical_norm_sq(),
                coords: x.slope_vector(),
                vertical: x.vertical,
                element,
            })
        }
        Target::Diagonal(a1, a2) => {
            let x1 = displacement(a1, &element)?;
            let x2 = displacement(a2, &element)?;
            let mut vertical = x1.vertical.clone();
            vertical.extend(x2.vertical.iter().cloned());
            let vertical_sq = x1.vertical_norm_sq() + x2.vertical_norm_sq();
            let coords = if element.word().is_empty() {
                // ν is undefined; these points only feed the ∂E branch.
                Vec::new()
            } else {
                let p = pair_functionals(a1, a2, &element)?;
                let mut c = p.m1;
                c.extend(p.m2);
                c.push(p.nu.recip()?);
                c.push(p.m_sq);
                c
            };
            Ok(Point {
                n,
                element,
                horizontal: x1.horizontal,
                vertical_sq,
                vertical,
                coords,
            })
        }
    }
}

pub(crate) fn trace(
    seq: &dyn ElementSequence,
    target: &Target,
    schedule: &[u64],
) -> Result<Vec<Point>> {
    if seq.ambient() != target.ambient() {
        let (x, y) = (target.ambient(), seq.ambient());
        return Err(Error::AmbientMismatch {
            m1: x.m,
            d1: x.d,
            m2: y.m,
            d2: y.d,
        });
    }
    let elements = schedule
        .par_iter()
        .map(|&n| seq.element(n))
        .collect::<Result<Vec<_>>>()?;
    trace_elements(target, schedule, elements)
}

pub(crate) fn trace_elements(
    target: &Target,
    schedule: &[u64],
    elements: Vec<GroupElement>,
) -> Result<Vec<Point>> {
    schedule
        .par_iter()
        .zip(elements)
        .map(|(&n, g)| point(target, n, g))
        .collect()
}

/// Schedule and tolerance for limit detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub schedule: Vec<u64>,
    pub tol: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            schedule: (4..=12).map(|k| 1u64 << k).collect(),
            tol: 1e-4,
        }
    }
}

impl LimitConfig {
    /// `2^lo, …, 2^hi`.
    pub fn powers_of_two(lo: u32, hi: u32, tol: f64) -> LimitConfig {
        LimitConfig {
            schedule: (lo..=hi).map(|k| 1u64 << k).collect(),
            tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.len() < 4 {
            return Err(Error::InvalidSchedule(format!(
                "need at least 4 points, got {}",
                self.schedule.len()
            )));
        }
        if self.schedule[0] == 0 || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule(
                "points must be positive and strictly increasing".into(),
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn last(&self) -> u64 {
        *self.schedule.last().expect("validated schedule")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "diverged_to_dE")]
    DivergedToDE,
    #[serde(rename = "not_cauchy")]
    NotCauchy,
}

/// Data recorded at one schedule point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: u64,
    pub element: String,
    pub word_length: String,
    /// Common prefix length with the word at the next schedule point.
    pub prefix_with_next: Option<String>,
    pub horizontal: f64,
    pub vertical_norm: f64,
    pub coords: Vec<f64>,
    /// Extrapolated coordinates from this point and the previous one.
    pub extrapolated: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub family: String,
    pub status: LimitStatus,
    /// Common prefix of the words at the last two schedule points.
    pub eta_prefix: String,
    pub eta_prefix_length: String,
    /// Slope vector limit (`m₁` for diagonal targets).
    pub m_limit: Vec<f64>,
    pub m2_limit: Option<Vec<f64>>,
    pub nu_limit: Option<f64>,
    pub nu_inv_limit: Option<f64>,
    /// `|m|` for a single action; `M = d₂/d₁` for a diagonal.
    pub slope_limit: Option<f64>,
    /// `1/M` for a diagonal.
    pub slope_inv_limit: Option<f64>,
    /// Unit vertical direction for limits in `∂E`.
    pub direction: Option<Vec<f64>>,
    /// Why the status is `not_cauchy`.
    pub reason: Option<String>,
    pub evidence: Vec<Sample>,
}

impl LimitReport {
    pub fn is_converged(&self) -> bool {
        self.status == LimitStatus::Converged
    }

    /// Coordinates compared by [`same_limit`]: `m` or `(m₁, m₂, 1/ν)`.
    pub fn limit_coords(&self) -> Vec<f64> {
        let mut v = self.m_limit.clone();
        if let Some(m2) = &self.m2_limit {
            v.extend(m2);
        }
        if let Some(x) = self.nu_inv_limit {
            v.push(x);
        }
        v
    }
}

/// `(n_K x_K − n_{K−1} x_{K−1}) / (n_K − n_{K−1})`: cancels the `1/n` term.
pub fn richardson(n0: u64, x0: &QuadExt, n1: u64, x1: &QuadExt) -> QuadExt {
    let num = x1.scale(&BigInt::from(n1)) - x0.scale(&BigInt::from(n0));
    num.checked_div(&QuadExt::from_integer((n1 - n0) as i64))
        .expect("strictly increasing schedule")
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() < tol * x.abs().max(y.abs()).max(1.0)
}

/// Growth exponent of `H/|T|` needed to call a sequence vertical.
const VERTICAL_GROWTH: f64 = 0.5;

fn vertical_dominance(points: &[Point]) -> bool {
    let k = points.len();
    let tail = &points[k - 3..];
    if tail.iter().all(|p| p.vertical_sq.is_zero()) {
        return false;
    }
    let last_two = &points[k - 2..];
    if last_two
        .iter()
        .all(|p| p.horizontal.is_zero() && !p.vertical_sq.is_zero())
    {
        return true;
    }
    if tail.iter().any(|p| p.vertical_sq.is_zero()) {
        return false;
    }
    let t: Vec<f64> = tail.iter().map(|p| p.vertical_sq.to_f64().sqrt()).collect();
    let r: Vec<f64> = tail
        .iter()
        .zip(&t)
        .map(|(p, t)| p.horizontal.to_f64() / t)
        .collect();
    let increasing = t.windows(2).all(|w| w[1] > w[0]);
    let exponent = |i: usize| {
        let ratio = (tail[i + 1].n as f64 / tail[i].n as f64).ln();
        if r[i + 1] == 0.0 {
            f64::INFINITY
        } else {
            (r[i] / r[i + 1]).ln() / ratio
        }
    };
    increasing && exponent(0) >= VERTICAL_GROWTH && exponent(1) >= VERTICAL_GROWTH
}

fn unit(v: &[QuadExt]) -> Vec<f64> {
    let norm = v
        .iter()
        .map(QuadExt::square)
        .sum::<QuadExt>()
        .to_f64()
        .sqrt();
    v.iter().map(|x| x.to_f64() / norm).collect()
}

pub(crate) fn prefix_lengths(points: &[Point]) -> Vec<BigUint> {
    points
        .windows(2)
        .map(|w| {
            w[0].element
                .word()
                .common_prefix_length(w[1].element.word())
        })
        .collect()
}

/// Prefix growth rule: nondecreasing, and at least half the earlier
/// schedule value at the end.
pub(crate) fn prefix_grows(lengths: &[BigUint], reference_n: u64) -> bool {
    let monotone = lengths.windows(2).all(|w| w[0] <= w[1]);
    let last = lengths.last().cloned().unwrap_or_default();
    monotone && last * 2u32 >= BigUint::from(reference_n)
}

pub(crate) fn classify(
    label: &str,
    target: &Target,
    points: &[Point],
    cfg: &LimitConfig,
) -> LimitReport {
    let k = points.len();
    let prefixes = prefix_lengths(points);
    let last_word = points[k - 1].element.word();
    let eta_len = prefixes.last().cloned().unwrap_or_default();
    let eta = last_word.prefix(&eta_len);

    let extrapolated: Vec<Option<Vec<QuadExt>>> = (0..k)
        .map(|i| {
            if i == 0 || points[i].coords.len() != points[i - 1].coords.len() {
                return None;
            }
            let (p, q) = (&points[i - 1], &points[i]);
            Some(
                p.coords
                    .iter()
                    .zip(&q.coords)
                    .map(|(x, y)| richardson(p.n, x, q.n, y))
                    .collect(),
            )
        })
        .collect();

    let evidence = points
        .iter()
        .enumerate()
        .map(|(i, p)| Sample {
            n: p.n,
            element: p.element.to_string(),
            word_length: p.element.word().len().to_string(),
            prefix_with_next: prefixes.get(i).map(ToString::to_string),
            horizontal: p.horizontal.to_f64(),
            vertical_norm: p.vertical_sq.to_f64().sqrt(),
            coords: p.coords.iter().map(QuadExt::to_f64).collect(),
            extrapolated: extrapolated[i]
                .as_ref()
                .map(|v| v.iter().map(QuadExt::to_f64).collect()),
        })
        .collect();

    let mut report = LimitReport {
        family: label.to_string(),
        status: LimitStatus::NotCauchy,
        eta_prefix: eta.to_string(),
        eta_prefix_length: eta_len.to_string(),
        m_limit: Vec::new(),
        m2_limit: None,
        nu_limit: None,
        nu_inv_limit: None,
        slope_limit: None,
        slope_inv_limit: None,
        direction: None,
        reason: None,
        evidence,
    };

    if vertical_dominance(points) {
        let dirs: Vec<Vec<f64>> = points[k - 3..].iter().map(|p| unit(&p.vertical)).collect();
        // Extrapolate the direction the same way as the coordinates.
        let n: Vec<f64> = points[k - 3..].iter().map(|p| p.n as f64).collect();
        let rich = |i: usize| -> Vec<f64> {
            dirs[i]
                .iter()
                .zip(&dirs[i + 1])
                .map(|(x, y)| (n[i + 1] * y - n[i] * x) / (n[i + 1] - n[i]))
                .collect()
        };
        let (r0, r1) = (rich(0), rich(1));
        if r0.iter().zip(&r1).all(|(x, y)| rel_close(*x, *y, cfg.tol)) {
            report.status = LimitStatus::DivergedToDE;
            let norm = r1.iter().map(|x| x * x).sum::<f64>().sqrt();
            report.direction = Some(r1.iter().map(|x| x / norm).collect());
        } else {
            report.reason = Some("vertical direction does not settle".into());
        }
        return report;
    }

    if !prefix_grows(&prefixes, cfg.schedule[k - 2]) {
        report.reason = Some(format!(
            "tree direction not detected: common prefix lengths {:?}",
            prefixes.iter().map(ToString::to_string).collect::<Vec<_>>()
        ));
        return report;
    }

    let (Some(prev), Some(last)) = (&extrapolated[k - 2], &extrapolated[k - 1]) else {
        report.reason = Some("coordinates undefined at the end of the schedule".into());
        return report;
    };
    let prev_f: Vec<f64> = prev.iter().map(QuadExt::to_f64).collect();
    let last_f: Vec<f64> = last.iter().map(QuadExt::to_f64).collect();
    if let Some(i) = (0..last_f.len()).find(|&i| !rel_close(prev_f[i], last_f[i], cfg.tol)) {
        report.reason = Some(format!(
            "coordinate {i} not Cauchy: {} vs {}",
            prev_f[i], last_f[i]
        ));
        return report;
    }

    report.status = LimitStatus::Converged;
    match target {
        Target::Single(a) => {
            let d = a.ambient().d;
            report.m_limit = last_f[..d].to_vec();
            report.slope_limit = Some(last_f.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        Target::Diagonal(a, _) => {
            let d = a.ambient().d;
            report.m_limit = last_f[..d].to_vec();
            report.m2_limit = Some(last_f[d..2 * d].to_vec());
            let nu_inv = last_f[2 * d];
            report.nu_inv_limit = Some(nu_inv);
            report.nu_limit = Some(1.0 / nu_inv);
            let m = last_f[2 * d + 1].max(0.0).sqrt();
            report.slope_limit = Some(m);
            report.slope_inv_limit = Some(1.0 / m);
        }
    }
    report
}

/// Classifies the limit of `g_n·x₀` along the schedule.
pub fn limit_in_boundary(
    seq: &dyn ElementSequence,
    target: &Target,
    cfg: &LimitConfig,
) -> Result<LimitReport> {
    cfg.validate()?;
    let points = trace(seq, target, &cfg.schedule)?;
    Ok(classify(&seq.label(), target, &points, cfg))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SameLimitReport {
    pub same: bool,
    /// Common prefix lengths of the two families' words at each point.
    pub prefix_agreement: Vec<String>,
    pub first: LimitReport,
    pub second: LimitReport,
}

pub(crate) fn compare_traced(
    r1: &LimitReport,
    p1: &[Point],
    r2: &LimitReport,
    p2: &[Point],
    cfg: &LimitConfig,
) -> Result<(bool, Vec<BigUint>)> {
    for r in [r1, r2] {
        if r.status == LimitStatus::NotCauchy {
            return Err(Error::Inconclusive(r.family.clone()));
        }
    }
    let agreement: Vec<BigUint> = p1
        .iter()
        .zip(p2)
        .map(|(x, y)| x.element.word().common_prefix_length(y.element.word()))
        .collect();
    let same = match (r1.status, r2.status) {
        (LimitStatus::Converged, LimitStatus::Converged) => {
            prefix_grows(&agreement, cfg.last())
                && r1
                    .limit_coords()
                    .iter()
                    .zip(r2.limit_coords())
                    .all(|(x, y)| rel_close(*x, y, cfg.tol))
        }
        (LimitStatus::DivergedToDE, LimitStatus::DivergedToDE) => {
            let (d1, d2) = (
                r1.direction.as_ref().unwrap(),
                r2.direction.as_ref().unwrap(),
            );
            d1.iter().zip(d2).all(|(x, y)| (x - y).abs() < cfg.tol)
        }
        _ => false,
    };
    Ok((same, agreement))
}

/// Decides whether two families converge to the same boundary point.
pub fn same_limit(
    f1: &dyn ElementSequence,
    f2: &dyn ElementSequence,
    target: &Target,
    cfg: &LimitConfig,
) -> Result<SameLimitReport> {
    cfg.validate()?;
    let p1 = trace(f1, target, &cfg.schedule)?;
    let p2 = trace(f2, target, &cfg.schedule)?;
    let r1 = classify(&f1.label(), target, &p1, cfg);
    let r2 = classify(&f2.label(), target, &p2, cfg);
    let (same, agreement) = compare_traced(&r1, &p1, &r2, &p2, cfg)?;
    Ok(SameLimitReport {
        same,
        prefix_agreement: agreement.iter().map(ToString::to_string).collect(),
        first: r1,
        second: r2,
    })
}

/// `d(x₀, g^k·x₀) / (k·d(x₀, g·x₀))`.
pub fn power_ratio(action: &ActionSpec, g: &GroupElement, k: u64) -> Result<f64> {
    let d1 = displacement(action, g)?.dist_sq();
    let dk = displacement(action, &g.pow(&BigInt::from(k)))?.dist_sq();
    let denom = d1.scale(&(BigInt::from(k) * BigInt::from(k)));
    Ok(dk.checked_div(&denom)?.to_f64().sqrt())
}

/// `d(x₀, ⟨1, c_n⟩·x₀) / d(x₀, ⟨w_n, 0⟩·x₀)` for `g_n = ⟨w_n, c_n⟩`.
pub fn abelian_domination_ratio(action: &ActionSpec, g: &GroupElement) -> Result<f64> {
    let amb = g.ambient();
    let vertical = GroupElement::new(amb, Word::empty(), g.z().to_vec())?;
    let horizontal = GroupElement::from_word(amb, g.word().clone())?;
    let num = displacement(action, &vertical)?.dist_sq();
    let den = displacement(action, &horizontal)?.dist_sq();
    Ok(num.checked_div(&den)?.to_f64().sqrt())
}

/// Shares an [`ElementSequence`] between threads.
pub type SharedSequence = Arc<dyn ElementSequence>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_family;

    fn fam(s: &str, d: usize) -> SequenceFamily {
        parse_family(s, Ambient::new(2, d).unwrap()).unwrap()
    }

    #[test]
    fn poly_eval_and_display() {
        let p = ExponentPoly::from_coeffs(&[0, 1, 1]);
        assert_eq!(p.eval(3), BigInt::from(12));
        assert_eq!(p.to_string(), "n+n^2");
        assert_eq!(
            ExponentPoly::from_coeffs(&[-1, 0, 2]).to_string(),
            "-1+2n^2"
        );
        assert_eq!(ExponentPoly::from_coeffs(&[0, 0, -1]).to_string(), "-n^2");
        assert_eq!(ExponentPoly::constant(0).to_string(), "0");
    }

    #[test]
    fn evaluate_examples() {
        let f = fam("a^n b^{n^2}", 0);
        assert_eq!(f.evaluate(3).unwrap().to_string(), "a^3 b^9");
        let f = fam("a^n (ab)^{n^2}", 0);
        let g = f.evaluate(2).unwrap();
        assert_eq!(g.word().to_signed_vec(), vec![1, 1, 1, 2, 1, 2, 1, 2, 1, 2]);
        let f = fam("a^n b^{n^2} c^{n^2}", 1);
        assert_eq!(f.evaluate(2).unwrap().to_string(), "a^2 b^4 c^4");
        let f = f.with_n0(3);
        assert!(matches!(
            f.evaluate(2),
            Err(Error::BelowThreshold { n: 2, n0: 3 })
        ));
    }

    #[test]
    fn family_display_round_trips() {
        for s in [
            "a^n b^{n^2} c^{2n^2}",
            "a^{n+n^2} b^{-n^2}",
            "a^n (ab)^{n^2}",
            "(aB)^3 c^n",
        ] {
            let f = fam(s, 1);
            assert_eq!(
                SequenceFamily::new(f.ambient(), f.blocks().to_vec())
                    .unwrap()
                    .label(),
                s
            );
        }
    }

    #[test]
    fn twisted_limit() {
        let cfg = LimitConfig::default();
        let r = limit_in_boundary(
            &fam("a^n b^{n^2}", 1),
            &Target::Single(fixtures::twisted()),
            &cfg,
        )
        .unwrap();
        assert_eq!(r.status, LimitStatus::Converged, "{r:?}");
        assert!((r.m_limit[0] - 1.0).abs() < 1e-6);
        assert_eq!(r.eta_prefix, "a^2048");
    }

    #[test]
    fn product_limit() {
        let cfg = LimitConfig::default();
        let r =
            limit_in_boundary(&fam("a^n", 1), &Target::Single(fixtures::product()), &cfg).unwrap();
        assert_eq!(r.status, LimitStatus::Converged);
        assert_eq!(r.m_limit, vec![0.0]);
    }

    #[test]
    fn vertical_limit() {
        let cfg = LimitConfig::default();
        for a in [fixtures::product(), fixtures::twisted(), fixtures::star()] {
            let r = limit_in_boundary(&fam("c^n", 1), &Target::Single(a.clone()), &cfg).unwrap();
            assert_eq!(r.status, LimitStatus::DivergedToDE);
            assert_eq!(r.direction, Some(vec![1.0]));
            let r = limit_in_boundary(&fam("a^n C^{n^2}", 1), &Target::Single(a), &cfg).unwrap();
            assert_eq!(r.status, LimitStatus::DivergedToDE);
            assert_eq!(r.direction, Some(vec![-1.0]));
        }
    }

    #[test]
    fn bounded_family_is_not_cauchy() {
        let cfg = LimitConfig::default();
        let r =
            limit_in_boundary(&fam("ab", 1), &Target::Single(fixtures::product()), &cfg).unwrap();
        assert_eq!(r.status, LimitStatus::NotCauchy);
        let err = same_limit(
            &fam("ab", 1),
            &fam("a^n", 1),
            &Target::Single(fixtures::product()),
            &cfg,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("inconclusive"));
    }

    #[test]
    fn same_limit_examples() {
        let cfg = LimitConfig::default();
        let (x, y) = (fam("a^n", 1), fam("a^n b^{n^2}", 1));
        assert!(
            same_limit(&x, &y, &Target::Single(fixtures::product()), &cfg)
                .unwrap()
                .same
        );
        assert!(
            !same_limit(&x, &y, &Target::Single(fixtures::twisted()), &cfg)
                .unwrap()
                .same
        );
        let (x, y) = (fam("a^n c^n", 1), fam("a^n b^{n^2} c^{n^2}", 1));
        assert!(
            same_limit(&x, &y, &Target::Single(fixtures::product()), &cfg)
                .unwrap()
                .same
        );
        assert!(
            !same_limit(
                &x,
                &fam("b^n", 1),
                &Target::Single(fixtures::product()),
                &cfg
            )
            .unwrap()
            .same
        );
    }

    #[test]
    fn schedule_validation() {
        let t = Target::Single(fixtures::product());
        let f = fam("a^n", 1);
        let short = LimitConfig {
            schedule: vec![1, 2, 3],
            tol: 1e-4,
        };
        assert!(matches!(
            limit_in_boundary(&f, &t, &short),
            Err(Error::InvalidSchedule(_))
        ));
        let unsorted = LimitConfig {
            schedule: vec![1, 2, 4, 3],
            tol: 1e-4,
        };
        assert!(limit_in_boundary(&f, &t, &unsorted).is_err());
        let zero_tol = LimitConfig {
            tol: 0.0,
            ..LimitConfig::default()
        };
        assert!(limit_in_boundary(&f, &t, &zero_tol).is_err());
    }

    #[test]
    fn target_json() {
        let t = Target::diagonal(fixtures::gamma(), fixtures::gamma_prime()).unwrap();
        assert_eq!(Target::from_json(&t.to_json()).unwrap(), t);
        let s = Target::Single(fixtures::star());
        assert_eq!(Target::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn power_and_domination() {
        let a = fixtures::diamond_f2();
        let g = parse_family("aab", a.ambient())
            .unwrap()
            .evaluate(1)
            .unwrap();
        // d((aab)^4) = 2 + 2·4 + 7√2 against 4·(4 + √2)
        let r = power_ratio(&a, &g, 4).unwrap();
        let expected = (10.0 + 7.0 * 2f64.sqrt()) / (4.0 * (4.0 + 2f64.sqrt()));
        assert!((r - expected).abs() < 1e-12);
        let tw = fixtures::twisted();
        let g = fam("a^n c^{n^2}", 1).evaluate(64).unwrap();
        assert!((abelian_domination_ratio(&tw, &g).unwrap() - 64.0).abs() < 1e-9);
    }
}
