//! Actions of `F_m × Z^d` on `Y × E^d` and the displacement functionals.
//!
//! Free generators translate the model space `Y` and shift `E^d` by a fixed
//! vector; `Z^d` acts on `E^d` alone. So for `g = ⟨w, z⟩`
//!
//! ```text
//! H(g) = d_Y(y₀, w·y₀)
//! T(g) = Σ_i net_i(w)·f_i + Σ_j z_j·e_j
//! d(x₀, g·x₀)² = H² + |T|²
//! ```

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{rank, QuadExt};
use crate::freegroup::{ball_size, ball_words, lattice_ball, Ambient, GroupElement, Word};
use crate::spaces::{Horizontal, TreeSpace};

/// Largest radius accepted by ball enumerations.
pub const MAX_RADIUS: usize = 12;

/// Largest number of reduced words a ball enumeration may visit.
pub const MAX_BALL_WORDS: u128 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAction")]
pub struct ActionSpec {
    m: usize,
    d: usize,
    horizontal: Horizontal,
    vertical_f: Vec<Vec<QuadExt>>,
    vertical_z: Vec<Vec<QuadExt>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    m: usize,
    d: usize,
    horizontal: Horizontal,
    #[serde(default)]
    vertical_f: Option<Vec<Vec<QuadExt>>>,
    #[serde(default)]
    vertical_z: Option<Vec<Vec<QuadExt>>>,
}

impl TryFrom<RawAction> for ActionSpec {
    type Error = Error;

    fn try_from(raw: RawAction) -> Result<ActionSpec> {
        let vf = raw
            .vertical_f
            .unwrap_or_else(|| vec![vec![QuadExt::zero(); raw.d]; raw.m]);
        let vz = match raw.vertical_z {
            Some(vz) => vz,
            None => (0..raw.d)
                .map(|i| {
                    (0..raw.d)
                        .map(|j| QuadExt::from_integer((i == j) as i64))
                        .collect()
                })
                .collect(),
        };
        ActionSpec::new(raw.m, raw.d, raw.horizontal, vf, vz)
    }
}

impl ActionSpec {
    pub fn new(
        m: usize,
        d: usize,
        horizontal: Horizontal,
        vertical_f: Vec<Vec<QuadExt>>,
        vertical_z: Vec<Vec<QuadExt>>,
    ) -> Result<ActionSpec> {
        Ambient::new(m, d).map_err(|e| Error::InvalidAction(e.to_string()))?;
        horizontal.validate()?;
        if horizontal.generators() != m {
            return Err(Error::InvalidAction(format!(
                "horizontal space has {} generators but m = {m}",
                horizontal.generators()
            )));
        }
        if vertical_f.len() != m || vertical_f.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidAction(format!(
                "vertical_f must be {m} vectors of length {d}"
            )));
        }
        if vertical_z.len() != d || vertical_z.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidAction(format!(
                "vertical_z must be {d} vectors of length {d}"
            )));
        }
        if rank(&vertical_z) != d {
            return Err(Error::InvalidAction(
                "vertical_z vectors must be linearly independent".into(),
            ));
        }
        Ok(ActionSpec {
            m,
            d,
            horizontal,
            vertical_f,
            vertical_z,
        })
    }

    pub fn from_json(text: &str) -> Result<ActionSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("action specs serialize")
    }

    pub fn ambient(&self) -> Ambient {
        Ambient {
            m: self.m,
            d: self.d,
        }
    }

    pub fn horizontal(&self) -> &Horizontal {
        &self.horizontal
    }

    pub fn vertical_f(&self) -> &[Vec<QuadExt>] {
        &self.vertical_f
    }

    pub fn vertical_z(&self) -> &[Vec<QuadExt>] {
        &self.vertical_z
    }

    /// The same horizontal space with the Euclidean factor dropped.
    pub fn horizontal_projection(&self) -> ActionSpec {
        ActionSpec {
            m: self.m,
            d: 0,
            horizontal: self.horizontal.clone(),
            vertical_f: vec![Vec::new(); self.m],
            vertical_z: Vec::new(),
        }
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        let amb = g.ambient();
        if amb != self.ambient() {
            return Err(Error::AmbientMismatch {
                m1: self.m,
                d1: self.d,
                m2: amb.m,
                d2: amb.d,
            });
        }
        Ok(())
    }

    /// Vertical translation contributed by the word part.
    pub fn word_translation(&self, w: &Word) -> Vec<QuadExt> {
        let mut t = vec![QuadExt::zero(); self.d];
        for g in 1..=self.m {
            let k = w.net_exponent(g);
            if k.is_zero() {
                continue;
            }
            for (tj, fj) in t.iter_mut().zip(&self.vertical_f[g - 1]) {
                *tj = &*tj + &fj.scale(&k);
            }
        }
        t
    }

    /// Vertical translation contributed by the abelian part.
    pub fn abelian_translation(&self, z: &[BigInt]) -> Vec<QuadExt> {
        let mut t = vec![QuadExt::zero(); self.d];
        for (zj, ej) in z.iter().zip(&self.vertical_z) {
            if zj.is_zero() {
                continue;
            }
            for (ti, eji) in t.iter_mut().zip(ej) {
                *ti = &*ti + &eji.scale(zj);
            }
        }
        t
    }

    /// `Mλ + 1`, where `M` bounds the vertical translation of a generator
    /// and `l(w)/λ` bounds the horizontal displacement from below.
    pub fn slope_bound(&self) -> f64 {
        let m = self
            .vertical_f
            .iter()
            .map(|v| norm_sq(v).to_f64().sqrt())
            .fold(0.0, f64::max);
        let min_letter = match &self.horizontal {
            Horizontal::Tree(t) => t.edge_lengths.iter().min().map_or(1.0, QuadExt::to_f64),
            Horizontal::Diamond => 1.0,
        };
        m / min_letter + 1.0
    }
}

fn norm_sq(v: &[QuadExt]) -> QuadExt {
    v.iter().map(QuadExt::square).sum()
}

fn add_vec(x: &[QuadExt], y: &[QuadExt]) -> Vec<QuadExt> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Horizontal displacement `H` and vertical translation `T` of an element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Displacement {
    pub horizontal: QuadExt,
    pub vertical: Vec<QuadExt>,
}

impl Displacement {
    /// `d(x₀, g·x₀)²`.
    pub fn dist_sq(&self) -> QuadExt {
        self.horizontal.square() + norm_sq(&self.vertical)
    }

    pub fn vertical_norm_sq(&self) -> QuadExt {
        norm_sq(&self.vertical)
    }

    /// `T/H`, or the zero vector when `H = 0`.
    pub fn slope_vector(&self) -> Vec<QuadExt> {
        match self.horizontal.recip() {
            Ok(inv) => self.vertical.iter().map(|t| t * &inv).collect(),
            Err(_) => vec![QuadExt::zero(); self.vertical.len()],
        }
    }
}

pub fn displacement(action: &ActionSpec, g: &GroupElement) -> Result<Displacement> {
    action.check(g)?;
    let horizontal = action.horizontal.distance(g.word())?;
    let vertical = add_vec(
        &action.word_translation(g.word()),
        &action.abelian_translation(g.z()),
    );
    Ok(Displacement {
        horizontal,
        vertical,
    })
}

pub fn slope_vector(action: &ActionSpec, g: &GroupElement) -> Result<Vec<QuadExt>> {
    Ok(displacement(action, g)?.slope_vector())
}

/// Functionals of `g` under the diagonal action on `X₁ × X₂`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFunctionals {
    /// `H₂/H₁`.
    pub nu: QuadExt,
    /// `d₂²/d₁²`.
    pub m_sq: QuadExt,
    pub m1: Vec<QuadExt>,
    pub m2: Vec<QuadExt>,
    pub d1_sq: QuadExt,
    pub d2_sq: QuadExt,
}

pub fn pair_functionals(
    a1: &ActionSpec,
    a2: &ActionSpec,
    g: &GroupElement,
) -> Result<PairFunctionals> {
    a2.check(g)?;
    let x1 = displacement(a1, g)?;
    let x2 = displacement(a2, g)?;
    if g.word().is_empty() {
        return Err(Error::NuUndefined);
    }
    let nu = x2.horizontal.checked_div(&x1.horizontal)?;
    let (d1_sq, d2_sq) = (x1.dist_sq(), x2.dist_sq());
    Ok(PairFunctionals {
        nu,
        m_sq: d2_sq.checked_div(&d1_sq)?,
        m1: x1.slope_vector(),
        m2: x2.slope_vector(),
        d1_sq,
        d2_sq,
    })
}

/// Which elements a distortion check ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QieScope {
    /// `⟨w, 0⟩` only.
    FreeFactor,
    /// All `⟨w, z⟩` with `l(w) + |z|₁` within the radius.
    Full,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QieReport {
    pub radius: usize,
    pub scope: QieScope,
    pub elements: u64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    /// Exact squares of the extreme ratios.
    pub low_sq: QuadExt,
    pub high_sq: QuadExt,
    pub low_witness: String,
    pub high_witness: String,
}

pub(crate) fn check_radius(m: usize, radius: usize) -> Result<()> {
    if radius > MAX_RADIUS {
        return Err(Error::RadiusTooLarge {
            radius,
            max: MAX_RADIUS,
        });
    }
    if ball_size(m, radius) > MAX_BALL_WORDS {
        let max = (0..=radius)
            .rev()
            .find(|&r| ball_size(m, r) <= MAX_BALL_WORDS)
            .unwrap_or(0);
        return Err(Error::RadiusTooLarge { radius, max });
    }
    Ok(())
}

/// Extreme values of `d(x₀, g·x₀) / (l(w) + |z|₁)` over a ball, identity
/// excluded. Ratios are compared exactly.
pub fn qie_bounds_check(action: &ActionSpec, radius: usize, scope: QieScope) -> Result<QieReport> {
    check_radius(action.m, radius)?;
    let amb = action.ambient();
    let words = ball_words(action.m, radius);
    type Extreme = Option<(QuadExt, String)>;
    let per_word: Vec<(u64, Extreme, Extreme)> = words
        .par_iter()
        .map(|letters| {
            let word = Word::from_letters(letters.iter().copied());
            let h_sq = action
                .horizontal
                .distance(&word)
                .expect("ball words fit the action")
                .square();
            let tw = action.word_translation(&word);
            let budget = radius - letters.len();
            let zs = match scope {
                QieScope::FreeFactor => vec![vec![0; amb.d]],
                QieScope::Full => lattice_ball(amb.d, budget),
            };
            let (mut count, mut low, mut high): (u64, Extreme, Extreme) = (0, None, None);
            for z in zs {
                let zn: usize = z.iter().map(|x| x.unsigned_abs() as usize).sum();
                let len = letters.len() + zn;
                if len == 0 {
                    continue;
                }
                let z: Vec<BigInt> = z.into_iter().map(BigInt::from).collect();
                let t = add_vec(&tw, &action.abelian_translation(&z));
                let d_sq = &h_sq + &norm_sq(&t);
                let ratio_sq = d_sq
                    .checked_div(&QuadExt::from_integer((len * len) as i64))
                    .expect("nonzero length");
                count += 1;
                let name = || {
                    GroupElement::new(amb, word.clone(), z.clone())
                        .unwrap()
                        .to_string()
                };
                if low.as_ref().is_none_or(|(r, _)| ratio_sq < *r) {
                    low = Some((ratio_sq.clone(), name()));
                }
                if high.as_ref().is_none_or(|(r, _)| ratio_sq > *r) {
                    high = Some((ratio_sq, name()));
                }
            }
            (count, low, high)
        })
        .collect();

    let mut elements = 0;
    let (mut low, mut high): (Extreme, Extreme) = (None, None);
    for (count, l, h) in per_word {
        elements += count;
        if let Some((r, n)) = l {
            if low.as_ref().is_none_or(|(best, _)| r < *best) {
                low = Some((r, n));
            }
        }
        if let Some((r, n)) = h {
            if high.as_ref().is_none_or(|(best, _)| r > *best) {
                high = Some((r, n));
            }
        }
    }
    let (Some((low_sq, low_witness)), Some((high_sq, high_witness))) = (low, high) else {
        return Err(Error::InvalidArgument(
            "ball contains no nontrivial element".into(),
        ));
    };
    Ok(QieReport {
        radius,
        scope,
        elements,
        lambda_low: low_sq.to_f64().sqrt(),
        lambda_high: high_sq.to_f64().sqrt(),
        low_sq,
        high_sq,
        low_witness,
        high_witness,
    })
}

/// Convenience constructor for a tree action.
pub fn tree_action(
    edge_lengths: Vec<QuadExt>,
    vertical_f: Vec<Vec<QuadExt>>,
    vertical_z: Vec<Vec<QuadExt>>,
) -> Result<ActionSpec> {
    let m = edge_lengths.len();
    let d = vertical_z.len();
    ActionSpec::new(
        m,
        d,
        Horizontal::Tree(TreeSpace::new(edge_lengths)?),
        vertical_f,
        vertical_z,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_element;

    fn q(s: &str) -> QuadExt {
        s.parse().unwrap()
    }

    fn el(a: &ActionSpec, s: &str) -> GroupElement {
        parse_element(s, a.ambient()).unwrap()
    }

    #[test]
    fn displacement_examples() {
        let tw = fixtures::twisted();
        let x = displacement(&tw, &el(&tw, "a^3 b^9")).unwrap();
        assert_eq!(x.horizontal, q("12"));
        assert_eq!(x.vertical, vec![q("9")]);
        assert_eq!(x.dist_sq(), q("225"));

        let pr = fixtures::product();
        let x = displacement(&pr, &el(&pr, "b")).unwrap();
        assert_eq!((x.horizontal, x.vertical), (q("1"), vec![q("0")]));

        let x = displacement(&tw, &el(&tw, "c^-3")).unwrap();
        assert_eq!((x.horizontal, x.vertical), (q("0"), vec![q("-3")]));

        let g = parse_element("a", Ambient::new(2, 0).unwrap()).unwrap();
        assert!(matches!(
            displacement(&tw, &g),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn slope_examples() {
        let tw = fixtures::twisted();
        assert_eq!(
            slope_vector(&tw, &el(&tw, "a^4 b^16")).unwrap(),
            vec![q("4/5")]
        );
        let pr = fixtures::product();
        assert_eq!(
            slope_vector(&pr, &el(&pr, "a^3 B^7 a c^0")).unwrap(),
            vec![q("0")]
        );
        assert_eq!(slope_vector(&pr, &el(&pr, "c^5")).unwrap(), vec![q("0")]);
    }

    #[test]
    fn pair_examples() {
        let (g1, g2) = (fixtures::gamma(), fixtures::gamma_prime());
        let p = pair_functionals(&g1, &g2, &el(&g1, "a^5 b^25")).unwrap();
        assert_eq!(p.nu, q("11/6"));
        assert_eq!(p.m_sq, p.nu.square());

        let p = pair_functionals(&g1, &g1, &el(&g1, "a b A b^3")).unwrap();
        assert_eq!((p.nu, p.m_sq), (q("1"), q("1")));

        let dm = fixtures::diamond_f2();
        let p = pair_functionals(&g1, &dm, &el(&g1, "(ab)^6")).unwrap();
        assert_eq!(p.nu, q("2 + 11 r2") * q("1/12"));

        let err = pair_functionals(&g1, &g2, &el(&g1, "1")).unwrap_err();
        assert!(err.to_string().starts_with("ν undefined"));
    }

    #[test]
    fn m_sq_matches_slope_identity() {
        let (a1, a2) = (fixtures::product(), fixtures::star());
        for s in ["a^3 b^9 c^2", "(ab)^4 C", "a B^2 a^3 c^7"] {
            let p = pair_functionals(&a1, &a2, &el(&a1, s)).unwrap();
            let one = QuadExt::one();
            let rhs = p.nu.square()
                * (norm_sq(&p.m2) + one.clone())
                    .checked_div(&(norm_sq(&p.m1) + one))
                    .unwrap();
            assert_eq!(p.m_sq, rhs, "{s}");
        }
    }

    #[test]
    fn qie_examples() {
        let r = qie_bounds_check(&fixtures::twisted(), 8, QieScope::FreeFactor).unwrap();
        assert!(r.low_sq >= q("1") && r.high_sq <= q("2"));
        let r = qie_bounds_check(&fixtures::product(), 8, QieScope::Full).unwrap();
        assert!(r.low_sq >= q("1/2") && r.high_sq <= q("1"), "{r:?}");
        assert_eq!(r.low_sq, q("1/2"));
        assert!(matches!(
            qie_bounds_check(&fixtures::product(), 13, QieScope::Full),
            Err(Error::RadiusTooLarge { max: 12, .. })
        ));
    }

    #[test]
    fn action_json() {
        let spec = r#"{"m":2,"d":1,"horizontal":{"type":"tree","edge_lengths":["1","1"]},
                       "vertical_f":[["0"],["1"]],"vertical_z":[["1"]]}"#;
        let a = ActionSpec::from_json(spec).unwrap();
        assert_eq!(a, fixtures::twisted());
        assert_eq!(ActionSpec::from_json(&a.to_json()).unwrap(), a);
        let bad = r#"{"m":2,"d":1,"horizontal":{"type":"tree","edge_lengths":["1","1"]},"vertical_z":[["0"]]}"#;
        assert!(ActionSpec::from_json(bad).is_err());
        let bad = r#"{"m":3,"d":0,"horizontal":{"type":"diamond"}}"#;
        assert!(ActionSpec::from_json(bad).is_err());
    }
}
