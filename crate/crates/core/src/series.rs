//! Truncated multivariate Laurent series in `y_1..y_g` with rational-function
//! coefficients.
//!
//! Truncation is by total y-degree: a series in a ring with truncation `N`
//! stores only terms of total degree `<= N`. Individual exponents may be
//! negative; the total degree of every term is bounded below by the series'
//! valuation floor, which may not go under `-V` for the ring's bound `V`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_integer::Integer;
use num_traits::{Float, One, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::poly::Int;
use crate::rational::RationalCoefficient;

/// Parameters shared by all series of one computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesRing {
    genus: usize,
    truncation: i32,
    bound: i32,
    xnames: Vec<String>,
}

pub type RingRef = Arc<SeriesRing>;

impl SeriesRing {
    /// Ring with the default valuation bound `V = N`.
    pub fn new(genus: usize, truncation: i32, xnames: Vec<String>) -> RingRef {
        Self::with_bound(genus, truncation, truncation, xnames)
    }

    pub fn with_bound(genus: usize, truncation: i32, bound: i32, xnames: Vec<String>) -> RingRef {
        assert!(genus >= 1, "genus must be positive");
        assert!(truncation >= 0, "truncation degree must be non-negative");
        assert!(bound >= 0, "valuation bound must be non-negative");
        Arc::new(SeriesRing { genus, truncation, bound, xnames })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn truncation(&self) -> i32 {
        self.truncation
    }

    pub fn bound(&self) -> i32 {
        self.bound
    }

    pub fn xnames(&self) -> &[String] {
        &self.xnames
    }

    pub fn nvars(&self) -> usize {
        self.xnames.len()
    }

    /// Same variables with a different truncation (and bound).
    pub fn retruncated(&self, truncation: i32, bound: i32) -> RingRef {
        Self::with_bound(self.genus, truncation, bound, self.xnames.clone())
    }

    /// Same genus and truncation over another set of x-variables.
    pub fn with_xnames(&self, xnames: Vec<String>) -> RingRef {
        Self::with_bound(self.genus, self.truncation, self.bound, xnames)
    }
}

/// Exponent vector in the y-variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct YExp(pub SmallVec<[i16; 4]>);

impl YExp {
    pub fn zero(g: usize) -> Self {
        YExp(SmallVec::from_elem(0, g))
    }

    pub fn unit(g: usize, i: usize) -> Self {
        let mut e = Self::zero(g);
        e.0[i] = 1;
        e
    }

    pub fn from_slice(e: &[i16]) -> Self {
        YExp(SmallVec::from_slice(e))
    }

    pub fn degree(&self) -> i32 {
        self.0.iter().map(|&e| e as i32).sum()
    }

    pub fn add(&self, o: &YExp) -> YExp {
        YExp(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &YExp) -> YExp {
        YExp(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i16) -> YExp {
        YExp(self.0.iter().map(|a| a * k).collect())
    }
}

/// Graded order: lower total degree first, then `y_1` before `y_2` etc.
impl Ord for YExp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for YExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
pub struct YSeries {
    ring: RingRef,
    floor: i32,
    terms: BTreeMap<YExp, RationalCoefficient>,
}

/// Result of an integer-content check on the lowest-degree part of a series.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitivityReport {
    /// gcd of the numerator coefficients of the lowest-degree part.
    pub content: Int,
    /// False when some coefficient of that part has a non-trivial integer denominator.
    pub integral: bool,
    /// `(p, primitive at p)` for each requested prime.
    pub primes: Vec<(u64, bool)>,
}

impl PartialEq for YSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ring.genus == other.ring.genus
            && self.ring.truncation == other.ring.truncation
            && self.ring.xnames == other.ring.xnames
            && self.terms == other.terms
    }
}

impl YSeries {
    pub fn zero(ring: &RingRef) -> Self {
        YSeries { ring: ring.clone(), floor: 0, terms: BTreeMap::new() }
    }

    pub fn one(ring: &RingRef) -> Self {
        Self::constant(ring, RationalCoefficient::one(ring.nvars()))
    }

    pub fn constant(ring: &RingRef, c: RationalCoefficient) -> Self {
        Self::monomial(ring, YExp::zero(ring.genus), c)
    }

    pub fn from_int(ring: &RingRef, k: i64) -> Self {
        Self::constant(ring, RationalCoefficient::from_int(ring.nvars(), k))
    }

    /// `c * y^e`, dropped if beyond the truncation.
    pub fn monomial(ring: &RingRef, e: YExp, c: RationalCoefficient) -> Self {
        assert_eq!(e.0.len(), ring.genus, "exponent arity mismatch");
        assert_eq!(c.nvars(), ring.nvars(), "coefficient arity mismatch");
        let d = e.degree();
        let mut s = YSeries { ring: ring.clone(), floor: d.min(0), terms: BTreeMap::new() };
        if !c.is_zero() && d <= ring.truncation {
            s.terms.insert(e, c);
        }
        s
    }

    /// The variable `y_{i+1}` (zero-based index).
    pub fn y(ring: &RingRef, i: usize) -> Self {
        Self::monomial(ring, YExp::unit(ring.genus, i), RationalCoefficient::one(ring.nvars()))
    }

    /// Builds a series from terms, validating degrees against the floor.
    pub fn from_terms(
        ring: &RingRef,
        floor: i32,
        terms: impl IntoIterator<Item = (YExp, RationalCoefficient)>,
    ) -> Result<Self> {
        if floor < -ring.bound {
            return Err(Error::Valuation { floor, bound: -ring.bound });
        }
        let mut s = YSeries { ring: ring.clone(), floor, terms: BTreeMap::new() };
        for (e, c) in terms {
            if e.0.len() != ring.genus || c.nvars() != ring.nvars() {
                return Err(Error::Config("term does not belong to the series ring".into()));
            }
            let d = e.degree();
            if d < floor {
                return Err(Error::Input(format!("term of degree {d} below floor {floor}")));
            }
            if d <= ring.truncation && !c.is_zero() {
                s.terms.insert(e, c);
            }
        }
        Ok(s)
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn floor(&self) -> i32 {
        self.floor
    }

    pub fn terms(&self) -> &BTreeMap<YExp, RationalCoefficient> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &YExp) -> RationalCoefficient {
        self.terms.get(e).cloned().unwrap_or_else(|| RationalCoefficient::zero(self.ring.nvars()))
    }

    pub fn constant_term(&self) -> RationalCoefficient {
        self.coefficient(&YExp::zero(self.ring.genus))
    }

    /// Lowest total degree present, `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        self.terms.keys().next().map(|e| e.degree())
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "series rings differ (genus {} / {}, truncation {} / {})",
                self.ring.genus, other.ring.genus, self.ring.truncation, other.ring.truncation
            )))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            match terms.get_mut(e) {
                Some(t) => {
                    *t = t.add(c);
                    if t.is_zero() {
                        terms.remove(e);
                    }
                }
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        Ok(YSeries { ring: self.ring.clone(), floor: self.floor.min(other.floor), terms })
    }

    /// Sum of many series, adding each coefficient over one common denominator.
    pub fn sum<'a>(ring: &RingRef, items: impl IntoIterator<Item = &'a YSeries>) -> Result<Self> {
        let mut floor = 0;
        let mut groups: BTreeMap<YExp, Vec<&RationalCoefficient>> = BTreeMap::new();
        for s in items {
            if !(Arc::ptr_eq(&s.ring, ring) || *s.ring == **ring) {
                return Err(Error::Config("series rings differ in sum".into()));
            }
            floor = floor.min(s.floor);
            for (e, c) in &s.terms {
                groups.entry(e.clone()).or_default().push(c);
            }
        }
        let nv = ring.nvars();
        let groups: Vec<_> = groups.into_iter().collect();
        let terms: BTreeMap<YExp, RationalCoefficient> = groups
            .into_par_iter()
            .map(|(e, cs)| (e, RationalCoefficient::sum(nv, cs.into_iter())))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Ok(YSeries { ring: ring.clone(), floor, terms })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        YSeries {
            ring: self.ring.clone(),
            floor: self.floor,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, k: &RationalCoefficient) -> Self {
        if k.is_zero() {
            return YSeries { terms: BTreeMap::new(), ..self.clone() };
        }
        YSeries {
            ring: self.ring.clone(),
            floor: self.floor,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.mul(k))).collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&RationalCoefficient::from_int(self.ring.nvars(), k))
    }

    /// Multiplies by `y^e` (shifting degrees), truncating above `N`.
    pub fn shift(&self, e: &YExp) -> Result<Self> {
        let floor = self.floor + e.degree();
        if floor < -self.ring.bound {
            return Err(Error::Valuation { floor, bound: -self.ring.bound });
        }
        let n = self.ring.truncation;
        Ok(YSeries {
            ring: self.ring.clone(),
            floor,
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (f.add(e), c.clone()))
                .filter(|(f, _)| f.degree() <= n)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let floor = self.floor + other.floor;
        if floor < -self.ring.bound {
            return Err(Error::Valuation { floor, bound: -self.ring.bound });
        }
        let terms = convolve(&self.terms, &other.terms, self.ring.truncation, self.ring.nvars());
        Ok(YSeries { ring: self.ring.clone(), floor, terms })
    }

    /// Same terms with the floor raised to the actual valuation (at most 0),
    /// for callers that have already budgeted the precision a Laurent step lost.
    pub fn settle_floor(&self) -> Self {
        YSeries { ring: self.ring.clone(), floor: self.valuation().unwrap_or(0).min(0), terms: self.terms.clone() }
    }

    /// Drops all terms of total degree `>= k` (reduction modulo `I^k`).
    pub fn leading_part_mod_ideal(&self, k: i32) -> Self {
        YSeries {
            ring: self.ring.clone(),
            floor: self.floor,
            terms: self.terms.iter().filter(|(e, _)| e.degree() < k).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// The homogeneous part of lowest total degree.
    pub fn min_degree_part(&self) -> Self {
        match self.valuation() {
            None => self.clone(),
            Some(v) => YSeries {
                ring: self.ring.clone(),
                floor: self.floor,
                terms: self.terms.iter().filter(|(e, _)| e.degree() == v).map(|(e, c)| (e.clone(), c.clone())).collect(),
            },
        }
    }

    /// Re-expresses the series in a ring with the same variables but a
    /// different truncation, dropping terms above the new truncation.
    pub fn in_ring(&self, ring: &RingRef) -> Result<Self> {
        if ring.genus != self.ring.genus || ring.xnames != self.ring.xnames {
            return Err(Error::Config("incompatible ring for truncation change".into()));
        }
        Self::from_terms(ring, self.floor.max(-ring.bound), self.terms.clone())
    }

    /// Truncates to total degree `<= n` in a ring with truncation `n`.
    pub fn truncate(&self, n: i32) -> Result<Self> {
        let ring = self.ring.retruncated(n, n.max(-self.floor));
        self.in_ring(&ring)
    }

    pub fn try_inv(&self) -> Result<Self> {
        let lead = self.min_degree_part();
        if lead.terms.len() != 1 {
            return Err(Error::NotInvertible(format!(
                "lowest-degree part has {} terms",
                lead.terms.len()
            )));
        }
        let (alpha, c) = lead.terms.iter().next().unwrap();
        let v = alpha.degree();
        let floor = -v;
        if floor < -self.ring.bound {
            return Err(Error::Valuation { floor, bound: -self.ring.bound });
        }
        let cinv = c.inv()?;
        let n = self.ring.truncation;
        let inner = (n + v).max(0);
        // h = a / (c y^alpha) - 1, homogeneous parts of degree 1..=inner
        let mut h: Vec<Vec<(YExp, RationalCoefficient)>> = vec![Vec::new(); inner as usize + 1];
        for (e, coef) in self.terms.iter().skip(1) {
            let d = e.degree() - v;
            if d <= inner {
                h[d as usize].push((e.sub(alpha), coef.mul(&cinv)));
            }
        }
        let nv = self.ring.nvars();
        let mut b: Vec<Vec<(YExp, RationalCoefficient)>> = vec![vec![(YExp::zero(self.ring.genus), RationalCoefficient::one(nv))]];
        for d in 1..=inner as usize {
            let mut acc: FxHashMap<YExp, Vec<RationalCoefficient>> = FxHashMap::default();
            for k in 1..=d {
                for (eh, ch) in &h[k] {
                    for (eb, cb) in &b[d - k] {
                        acc.entry(eh.add(eb)).or_default().push(ch.mul(cb).neg());
                    }
                }
            }
            let mut part: Vec<(YExp, RationalCoefficient)> = acc
                .into_iter()
                .map(|(e, cs)| (e, RationalCoefficient::sum(nv, cs.iter())))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            part.sort_by(|a, b| a.0.cmp(&b.0));
            b.push(part);
        }
        let neg_alpha = alpha.scale(-1);
        let terms = b
            .into_iter()
            .flatten()
            .map(|(e, c)| (e.add(&neg_alpha), c.mul(&cinv)))
            .filter(|(e, _)| e.degree() <= n);
        Self::from_terms(&self.ring, floor, terms)
    }

    pub fn try_pow(&self, e: i32) -> Result<Self> {
        let mut base = if e < 0 { self.try_inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Self::one(&self.ring);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.try_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Evaluates at complex values of all x- and y-variables.
    pub fn eval<T: Float + Send + Sync>(&self, x: &[Complex<T>], y: &[Complex<T>]) -> Result<Complex<T>> {
        if x.len() != self.ring.nvars() || y.len() != self.ring.genus {
            return Err(Error::Input("numeric assignment does not cover all variables".into()));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (e, c) in &self.terms {
            let mut t = c.eval(x)?;
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if y[i].norm() == T::zero() && k < 0 {
                    return Err(Error::Specialization(format!("negative power of y[{}] at zero", i + 1)));
                }
                t = t * y[i].powi(k as i32);
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Applies `f` to every coefficient, landing in `ring` (same genus).
    pub fn map_coefficients(
        &self,
        ring: &RingRef,
        f: impl Fn(&RationalCoefficient) -> Result<RationalCoefficient> + Sync,
    ) -> Result<Self> {
        if ring.genus != self.ring.genus {
            return Err(Error::Config("coefficient map cannot change the genus".into()));
        }
        let mapped: Vec<(YExp, Result<RationalCoefficient>)> =
            self.terms.par_iter().map(|(e, c)| (e.clone(), f(c))).collect();
        let mut terms = Vec::with_capacity(mapped.len());
        for (e, c) in mapped {
            terms.push((e, c?));
        }
        Self::from_terms(ring, self.floor.max(-ring.bound), terms)
    }

    /// Substitutes `y_i := images[i]`, a ring homomorphism into the images' ring.
    pub fn compose_y(&self, images: &[YSeries]) -> Result<Self> {
        if images.len() != self.ring.genus {
            return Err(Error::Input("y-substitution does not cover all variables".into()));
        }
        let ring = images[0].ring.clone();
        let mut out = Self::zero(&ring);
        for (e, c) in &self.terms {
            let mut t = Self::constant(&ring, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k != 0 {
                    t = t.try_mul(&images[i].try_pow(k as i32)?)?;
                }
            }
            out = out.try_add(&t)?;
        }
        Ok(out)
    }

    /// Integer content of the lowest-degree part and primitivity at each prime.
    pub fn content_and_primitivity(&self, primes: &[u64]) -> Result<PrimitivityReport> {
        if self.is_zero() {
            return Err(Error::Input("zero series has no content".into()));
        }
        let lead = self.min_degree_part();
        let mut content = Int::zero();
        let mut integral = true;
        for c in lead.terms.values() {
            content = content.gcd(&c.numerator().content());
            integral &= c.denominator_int().is_one();
        }
        let primes = primes
            .iter()
            .map(|&p| (p, !content.is_multiple_of(&Int::from(p))))
            .collect();
        Ok(PrimitivityReport { content, integral, primes })
    }
}

fn convolve(
    a: &BTreeMap<YExp, RationalCoefficient>,
    b: &BTreeMap<YExp, RationalCoefficient>,
    n: i32,
    nvars: usize,
) -> BTreeMap<YExp, RationalCoefficient> {
    let mut groups: FxHashMap<YExp, Vec<(&RationalCoefficient, &RationalCoefficient)>> = FxHashMap::default();
    for (ea, ca) in a {
        let da = ea.degree();
        for (eb, cb) in b {
            if da + eb.degree() > n {
                // b is sorted by degree
                break;
            }
            groups.entry(ea.add(eb)).or_default().push((ca, cb));
        }
    }
    let groups: Vec<_> = groups.into_iter().collect();
    groups
        .into_par_iter()
        .map(|(e, pairs)| {
            let prods: Vec<RationalCoefficient> = pairs.iter().map(|(x, y)| x.mul(y)).collect();
            (e, RationalCoefficient::sum(nvars, prods.iter()))
        })
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

impl std::ops::Add for &YSeries {
    type Output = YSeries;
    fn add(self, rhs: &YSeries) -> YSeries {
        self.try_add(rhs).expect("series addition")
    }
}

impl std::ops::Sub for &YSeries {
    type Output = YSeries;
    fn sub(self, rhs: &YSeries) -> YSeries {
        self.try_sub(rhs).expect("series subtraction")
    }
}

impl std::ops::Mul for &YSeries {
    type Output = YSeries;
    fn mul(self, rhs: &YSeries) -> YSeries {
        self.try_mul(rhs).expect("series multiplication")
    }
}

impl std::ops::Neg for &YSeries {
    type Output = YSeries;
    fn neg(self) -> YSeries {
        YSeries::neg(self)
    }
}

impl fmt::Display for YSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = self.ring.xnames();
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let (num, den) = c.format(names);
            if den == "1" {
                write!(f, "({num})")?;
            } else {
                write!(f, "({num})/({den})")?;
            }
            for (i, &k) in e.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*y{}", i + 1)?,
                    _ => write!(f, "*y{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}
