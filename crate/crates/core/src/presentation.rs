//! Symbolic Schottky generators over the series ring.
//!
//! Generator `i` has attracting fixed point `x_i`, repelling fixed point
//! `x_{-i}` and multiplier `y_i`:
//!
//! ```text
//! M_i = [[x_i - x_{-i} y_i, -x_i x_{-i} (1 - y_i)], [1 - y_i, x_i y_i - x_{-i}]]
//! ```
//!
//! acting by `z ↦ (az + b)/(cz + d)`. Points are kept homogeneous so that a
//! fixed point at infinity needs no special casing. In normalized form
//! `x_1 = 0`, `x_{-1} = ∞`, `x_2 = 1`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::RationalCoefficient;
use crate::series::{RingRef, SeriesRing, YExp, YSeries};
use crate::word::GroupWord;

/// A point of the projective line as a pair `(num : den)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomPoint {
    pub num: YSeries,
    pub den: YSeries,
}

impl HomPoint {
    pub fn finite(v: YSeries) -> Self {
        let den = YSeries::one(v.ring());
        HomPoint { num: v, den }
    }

    pub fn infinity(ring: &RingRef) -> Self {
        HomPoint { num: YSeries::one(ring), den: YSeries::zero(ring) }
    }

    pub fn is_infinity(&self) -> bool {
        self.den.is_zero()
    }

    /// The affine coordinate `num / den`; fails if `den` is not invertible.
    pub fn affine(&self) -> Result<YSeries> {
        if self.den.is_zero() {
            return Err(Error::Specialization("point at infinity has no affine coordinate".into()));
        }
        self.num.try_mul(&self.den.try_inv()?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    pub a: YSeries,
    pub b: YSeries,
    pub c: YSeries,
    pub d: YSeries,
}

impl SeriesMatrix {
    pub fn identity(ring: &RingRef) -> Self {
        SeriesMatrix { a: YSeries::one(ring), b: YSeries::zero(ring), c: YSeries::zero(ring), d: YSeries::one(ring) }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(SeriesMatrix {
            a: self.a.try_mul(&o.a)?.try_add(&self.b.try_mul(&o.c)?)?,
            b: self.a.try_mul(&o.b)?.try_add(&self.b.try_mul(&o.d)?)?,
            c: self.c.try_mul(&o.a)?.try_add(&self.d.try_mul(&o.c)?)?,
            d: self.c.try_mul(&o.b)?.try_add(&self.d.try_mul(&o.d)?)?,
        })
    }

    pub fn adjugate(&self) -> Self {
        SeriesMatrix { a: self.d.clone(), b: self.b.neg(), c: self.c.neg(), d: self.a.clone() }
    }

    pub fn trace(&self) -> YSeries {
        &self.a + &self.d
    }

    pub fn det(&self) -> Result<YSeries> {
        self.a.try_mul(&self.d)?.try_sub(&self.b.try_mul(&self.c)?)
    }

    pub fn apply(&self, p: &HomPoint) -> Result<HomPoint> {
        Ok(HomPoint {
            num: self.a.try_mul(&p.num)?.try_add(&self.b.try_mul(&p.den)?)?,
            den: self.c.try_mul(&p.num)?.try_add(&self.d.try_mul(&p.den)?)?,
        })
    }

    /// `(az + b)/(cz + d)` for a finite series value `z`.
    pub fn apply_affine(&self, z: &YSeries) -> Result<YSeries> {
        self.apply(&HomPoint::finite(z.clone()))?.affine()
    }
}

/// Generators of the universal Schottky group over the series ring.
#[derive(Clone, Debug)]
pub struct SymbolicPresentation {
    ring: RingRef,
    normalized: bool,
    /// Fixed points indexed by `2(i-1)` (attracting) and `2(i-1)+1` (repelling).
    fixed: Vec<HomPoint>,
    gens: Vec<SeriesMatrix>,
    inv_gens: Vec<SeriesMatrix>,
    /// `det M_i`
    dets: Vec<YSeries>,
}

/// Variable names of the general layout: `x[1], x[-1], x[2], x[-2], ...`.
pub fn general_xnames(g: usize) -> Vec<String> {
    (1..=g as i32).flat_map(|i| [format!("x[{i}]"), format!("x[{}]", -i)]).collect()
}

/// Variable names once `x_1`, `x_{-1}`, `x_2` are fixed.
pub fn normalized_xnames(g: usize) -> Vec<String> {
    let mut names = Vec::new();
    if g >= 2 {
        names.push("x[-2]".to_string());
    }
    for i in 3..=g as i32 {
        names.push(format!("x[{i}]"));
        names.push(format!("x[{}]", -i));
    }
    names
}

/// Position of `x_s` in the general layout.
pub fn general_index(s: i32) -> usize {
    let i = s.unsigned_abs() as usize - 1;
    2 * i + usize::from(s < 0)
}

impl SymbolicPresentation {
    /// Generic fixed points, all distinct indeterminates.
    pub fn general(g: usize, truncation: i32) -> Self {
        Self::general_with_bound(g, truncation, truncation)
    }

    pub fn general_with_bound(g: usize, truncation: i32, bound: i32) -> Self {
        let ring = SeriesRing::with_bound(g, truncation, bound, general_xnames(g));
        let n = ring.nvars();
        let fixed = (0..2 * g)
            .map(|k| HomPoint::finite(YSeries::constant(&ring, RationalCoefficient::var(n, k))))
            .collect();
        Self::build(ring, false, fixed)
    }

    /// `x_1 = 0`, `x_{-1} = ∞`, `x_2 = 1`, remaining fixed points free.
    pub fn normalized(g: usize, truncation: i32) -> Self {
        Self::normalized_with_bound(g, truncation, truncation)
    }

    pub fn normalized_with_bound(g: usize, truncation: i32, bound: i32) -> Self {
        let ring = SeriesRing::with_bound(g, truncation, bound, normalized_xnames(g));
        let n = ring.nvars();
        let konst = |k: i64| HomPoint::finite(YSeries::from_int(&ring, k));
        let var = |v: usize| HomPoint::finite(YSeries::constant(&ring, RationalCoefficient::var(n, v)));
        let mut fixed = vec![konst(0), HomPoint::infinity(&ring)];
        if g >= 2 {
            fixed.push(konst(1));
            fixed.push(var(0));
        }
        for k in 4..2 * g {
            fixed.push(var(k - 3));
        }
        Self::build(ring, true, fixed)
    }

    /// `x_1`, `x_{-1}`, `x_2` pinned to the given distinct integers, so every
    /// fixed point stays finite with `2g − 3` free variables.
    pub fn pinned(g: usize, truncation: i32, pins: [i64; 3]) -> Self {
        assert!(g >= 2, "pinning needs genus at least 2");
        assert!(pins[0] != pins[1] && pins[0] != pins[2] && pins[1] != pins[2], "pins must be distinct");
        let ring = SeriesRing::with_bound(g, truncation, truncation, normalized_xnames(g));
        let n = ring.nvars();
        let mut fixed: Vec<HomPoint> = pins.iter().map(|&k| HomPoint::finite(YSeries::from_int(&ring, k))).collect();
        for v in 0..n {
            fixed.push(HomPoint::finite(YSeries::constant(&ring, RationalCoefficient::var(n, v))));
        }
        Self::build(ring, false, fixed)
    }

    fn build(ring: RingRef, normalized: bool, fixed: Vec<HomPoint>) -> Self {
        let g = ring.genus();
        let mut gens = Vec::with_capacity(g);
        let mut dets = Vec::with_capacity(g);
        for i in 0..g {
            let (att, rep) = (&fixed[2 * i], &fixed[2 * i + 1]);
            let y = YSeries::y(&ring, i);
            let one_minus_y = &YSeries::one(&ring) - &y;
            let (an, ad, bn, bd) = (&att.num, &att.den, &rep.num, &rep.den);
            let m = SeriesMatrix {
                a: &(an * bd) - &(&(ad * bn) * &y),
                b: (&(an * bn) * &one_minus_y).neg(),
                c: &(ad * bd) * &one_minus_y,
                d: &(&(an * bd) * &y) - &(ad * bn),
            };
            let delta = &(an * bd) - &(bn * ad);
            dets.push(&(&delta * &delta) * &y);
            gens.push(m);
        }
        let inv_gens = gens.iter().map(SeriesMatrix::adjugate).collect();
        SymbolicPresentation { ring, normalized, fixed, gens, inv_gens, dets }
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn genus(&self) -> usize {
        self.ring.genus()
    }

    pub fn truncation(&self) -> i32 {
        self.ring.truncation()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Fixed point `x_s` for `s ∈ ±1..=±g`.
    pub fn fixed_point(&self, s: i32) -> &HomPoint {
        &self.fixed[general_index(s)]
    }

    pub fn letter_matrix(&self, l: i8) -> &SeriesMatrix {
        let i = l.unsigned_abs() as usize - 1;
        if l > 0 {
            &self.gens[i]
        } else {
            &self.inv_gens[i]
        }
    }

    pub fn word_matrix(&self, w: &GroupWord) -> Result<SeriesMatrix> {
        let mut m = SeriesMatrix::identity(&self.ring);
        for &l in w.letters() {
            m = m.mul(self.letter_matrix(l))?;
        }
        Ok(m)
    }

    pub fn word_det(&self, w: &GroupWord) -> Result<YSeries> {
        let mut d = YSeries::one(&self.ring);
        for &l in w.letters() {
            d = d.try_mul(&self.dets[l.unsigned_abs() as usize - 1])?;
        }
        Ok(d)
    }

    /// `w(x_s)` as a homogeneous point.
    pub fn image_of_fixed_point(&self, w: &GroupWord, s: i32) -> Result<HomPoint> {
        let mut p = self.fixed_point(s).clone();
        for &l in w.letters().iter().rev() {
            p = self.letter_matrix(l).apply(&p)?;
        }
        Ok(p)
    }

    /// Images `w(x_s)` for every word of `words` (which must be closed under
    /// dropping the first letter), computed by prefixing one letter at a time.
    pub fn images_of_fixed_point(&self, words: &[GroupWord], s: i32) -> Result<HashMap<GroupWord, HomPoint>> {
        let mut out: HashMap<GroupWord, HomPoint> = HashMap::with_capacity(words.len());
        let mut sorted: Vec<&GroupWord> = words.iter().collect();
        sorted.sort_by_key(|w| w.len());
        for w in sorted {
            let p = match w.first() {
                None => self.fixed_point(s).clone(),
                Some(l) => {
                    let tail = GroupWord::reduce(
                        &w.letters()[1..].iter().map(|&x| x as i32).collect::<Vec<_>>(),
                        self.genus(),
                    )?;
                    let base = match out.get(&tail) {
                        Some(p) => p.clone(),
                        None => self.image_of_fixed_point(&tail, s)?,
                    };
                    self.letter_matrix(l).apply(&base)?
                }
            };
            out.insert(w.clone(), p);
        }
        Ok(out)
    }

    /// Multiplier of a non-trivial element: the root of
    /// `q + 1/q + 2 = tr(M)^2 / det(M)` with positive valuation, found by
    /// iterating `q ← det (1 + q²) / (tr² − 2 det)` from `q = 0`.
    pub fn multiplier(&self, w: &GroupWord) -> Result<YSeries> {
        let (_, core) = w.cyclic_reduce();
        if core.is_empty() {
            return Err(Error::Input("the identity has no multiplier".into()));
        }
        let m = self.word_matrix(&core)?;
        let tr = m.trace();
        let det = self.word_det(&core)?;
        if tr.try_mul(&tr)?.try_sub(&det.scale_int(2))?.valuation() != Some(0) {
            return Err(Error::Pipeline(format!("trace of {core} vanishes modulo the ideal")));
        }
        self.matrix_multiplier(&m, &det).map_err(|e| Error::Pipeline(format!("{core}: {e}")))
    }

    /// Multiplier of a matrix with the given determinant, with no word-level
    /// simplification. A matrix that is a scalar multiple `c y^e` of a
    /// cyclically reduced one loses `2|e|` orders of precision.
    pub fn matrix_multiplier(&self, m: &SeriesMatrix, det: &YSeries) -> Result<YSeries> {
        let tr = m.trace();
        let s = tr.try_mul(&tr)?.try_sub(&det.scale_int(2))?;
        if s.is_zero() {
            return Err(Error::Pipeline("trace vanishes to truncation order".into()));
        }
        let s_inv = s.try_inv()?;
        let factor = det.try_mul(&s_inv)?.settle_floor();
        let one = YSeries::one(&self.ring);
        let mut q = YSeries::zero(&self.ring);
        for _ in 0..=self.truncation() + 1 {
            let next = factor.try_mul(&one.try_add(&q.try_mul(&q)?)?)?;
            if next == q {
                return Ok(q);
            }
            q = next;
        }
        Err(Error::Pipeline("multiplier iteration did not stabilise".into()))
    }

    /// Image of a rational coefficient in general variables under the
    /// normalization `x_1 = 0`, `x_{-1} → ∞`, `x_2 = 1`.
    pub fn normalize_coefficient(c: &RationalCoefficient, g: usize) -> Result<RationalCoefficient> {
        let n = 2 * g;
        assert_eq!(c.nvars(), n);
        let lim = c.limit_at_infinity(general_index(-1))?.remove_var(general_index(-1));
        // remaining order: x1, x2, x-2, x3, x-3, ...
        let target = n - 3;
        let mut images = Vec::with_capacity(n - 1);
        images.push(RationalCoefficient::zero(target));
        if g >= 2 {
            images.push(RationalCoefficient::one(target));
            for v in 0..n - 3 {
                images.push(RationalCoefficient::var(target, v));
            }
        }
        lim.compose(&images, target)
    }

    /// Normalizes every coefficient of a general-variable series.
    pub fn normalize_series(s: &YSeries) -> Result<YSeries> {
        let g = s.ring().genus();
        let ring = s.ring().with_xnames(normalized_xnames(g));
        s.map_coefficients(&ring, |c| Self::normalize_coefficient(c, g))
    }

    /// `y^e` with unit coefficient, convenient for building expectations.
    pub fn y_monomial(&self, e: &[i16]) -> YSeries {
        YSeries::monomial(&self.ring, YExp::from_slice(e), RationalCoefficient::one(self.ring.nvars()))
    }
}
