//! Sparse multivariate polynomials over the integers.
//!
//! Terms are kept sorted by descending graded-lexicographic order of their
//! exponent vectors, with no zero coefficients, so structural equality is
//! mathematical equality. Variable `0` is the lexicographically largest.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Int = BigInt;

/// Largest number of variables a monomial can carry.
pub const MAX_VARS: usize = 14;
/// Largest exponent of a single variable.
pub const MAX_EXPONENT: u16 = 255;

const DEGREE_SHIFT: u32 = 112;
const FIELD_MASK: u128 = 0xff;
/// Lowest bit of every field, where an overflowing neighbour would carry into.
const CARRY_MASK: u128 = {
    let mut m = 0u128;
    let mut v = 0;
    while v < MAX_VARS {
        m |= 1u128 << (DEGREE_SHIFT - 8 * v as u32);
        v += 1;
    }
    m
};

/// Exponent vector packed into one word: total degree in the top 16 bits,
/// then 8 bits per variable with variable `0` highest, so integer order is
/// graded-lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Monomial(u128);

impl Monomial {
    fn shift(v: usize) -> u32 {
        DEGREE_SHIFT - 8 * (v as u32 + 1)
    }

    pub fn one(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        Monomial(0)
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        let mut m = Self::one(nvars);
        m.set_exp(v, 1);
        m
    }

    pub fn from_exponents(e: &[u16]) -> Self {
        let mut m = Self::one(e.len());
        for (v, &k) in e.iter().enumerate() {
            m.set_exp(v, k);
        }
        m
    }

    pub fn exp(&self, v: usize) -> u16 {
        ((self.0 >> Self::shift(v)) & FIELD_MASK) as u16
    }

    pub fn set_exp(&mut self, v: usize, e: u16) {
        assert!(v < MAX_VARS, "variable index {v} exceeds the packed width");
        assert!(e <= MAX_EXPONENT, "exponent {e} exceeds {MAX_EXPONENT}");
        let old = self.exp(v) as u128;
        let d = self.degree() as u128 - old + e as u128;
        let sh = Self::shift(v);
        self.0 = (self.0 & !(FIELD_MASK << sh) & !(0xffffu128 << DEGREE_SHIFT)) | ((e as u128) << sh) | (d << DEGREE_SHIFT);
    }

    /// The first `nvars` exponents.
    pub fn exponents(&self, nvars: usize) -> impl Iterator<Item = u16> + '_ {
        (0..nvars).map(move |v| self.exp(v))
    }

    pub fn degree(&self) -> u32 {
        (self.0 >> DEGREE_SHIFT) as u32
    }

    pub fn is_one(&self) -> bool {
        self.0 == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let sum = self.0.wrapping_add(other.0);
        if (self.0 ^ other.0 ^ sum) & CARRY_MASK != 0 || sum < self.0 {
            panic!("monomial exponent exceeds {MAX_EXPONENT}");
        }
        Monomial(sum)
    }

    /// `self / other` when every exponent of `other` is at most that of `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        for v in 0..MAX_VARS {
            if self.exp(v) < other.exp(v) {
                return None;
            }
        }
        Some(Monomial(self.0 - other.0))
    }

    /// Drops variable `v` (which must have exponent zero), shifting later ones down.
    pub fn remove_var(&self, v: usize, nvars: usize) -> Monomial {
        assert_eq!(self.exp(v), 0, "variable still occurs");
        let e: SmallVec<[u16; 8]> = (0..nvars).filter(|&w| w != v).map(|w| self.exp(w)).collect();
        Monomial::from_exponents(&e)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntegerPolynomial {
    nvars: usize,
    terms: Vec<(Monomial, Int)>,
}

impl IntegerPolynomial {
    pub fn zero(nvars: usize) -> Self {
        IntegerPolynomial { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Int::one())
    }

    pub fn constant(nvars: usize, c: impl Into<Int>) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero(nvars);
        }
        IntegerPolynomial { nvars, terms: vec![(Monomial::one(nvars), c)] }
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        assert!(v < nvars, "variable index {v} out of range for arity {nvars}");
        IntegerPolynomial { nvars, terms: vec![(Monomial::var(nvars, v), Int::one())] }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Int)>) -> Self {
        let mut acc: FxHashMap<Monomial, Int> = FxHashMap::default();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(Int::zero) += c;
        }
        Self::from_map(nvars, acc)
    }

    fn from_map(nvars: usize, acc: FxHashMap<Monomial, Int>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        IntegerPolynomial { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Monomial, Int)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Int> {
        match self.terms.as_slice() {
            [] => Some(Int::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Int)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.first().map(|(m, _)| m.degree())
    }

    pub fn degree_in(&self, v: usize) -> Option<u16> {
        self.terms.iter().map(|(m, _)| m.exp(v)).max()
    }

    /// Non-negative gcd of the integer coefficients (zero for the zero polynomial).
    pub fn content(&self) -> Int {
        let mut g = Int::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn neg(&self) -> Self {
        IntegerPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Int) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        IntegerPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Exact division of every coefficient by `k`; panics if inexact.
    pub fn div_int_exact(&self, k: &Int) -> Self {
        IntegerPolynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let (q, r) = c.div_rem(k);
                    assert!(r.is_zero(), "inexact integer division");
                    (m.clone(), q)
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let ord = if i == a.len() {
                Ordering::Less
            } else if j == b.len() {
                Ordering::Greater
            } else {
                a[i].0.cmp(&b[j].0)
            };
            match ord {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        IntegerPolynomial { nvars: self.nvars, terms: out }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars);
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        let mut acc: FxHashMap<Monomial, Int> =
            FxHashMap::with_capacity_and_hasher(self.len() * other.len(), Default::default());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                match acc.get_mut(&m) {
                    Some(e) => *e += ca * cb,
                    None => {
                        acc.insert(m, ca * cb);
                    }
                }
            }
        }
        Self::from_map(self.nvars, acc)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        assert_eq!(self.nvars, d.nvars, "polynomial arity mismatch");
        let (dm, dc) = d.leading().expect("division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero(self.nvars));
        }
        if let Some(c) = d.constant_value() {
            if self.terms.iter().all(|(_, x)| x.is_multiple_of(&c)) {
                return Some(self.div_int_exact(&c));
            }
            return None;
        }
        let mut rem: BTreeMap<Monomial, Int> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m.checked_div(dm)?;
            let (qc, r) = c.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            for (tm, tc) in d.terms.iter().skip(1) {
                let pm = tm.mul(&qm);
                let delta = tc * &qc;
                let entry = rem.entry(pm).or_insert_with(Int::zero);
                *entry -= delta;
                if entry.is_zero() {
                    // removal keeps the leading-term scan honest
                    let key = tm.mul(&qm);
                    rem.remove(&key);
                }
            }
            quot.push((qm, qc));
        }
        // quotient terms were produced in descending order
        Some(IntegerPolynomial { nvars: self.nvars, terms: quot })
    }

    /// Substitutes `x_v = value` for one variable (exponent of `v` becomes zero).
    pub fn substitute_int(&self, v: usize, value: &Int) -> Self {
        let mut acc: FxHashMap<Monomial, Int> = FxHashMap::default();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            let mut mm = *m;
            mm.set_exp(v, 0);
            let coef = if e == 0 { c.clone() } else { c * num_traits::pow(value.clone(), e as usize) };
            *acc.entry(mm).or_insert_with(Int::zero) += coef;
        }
        Self::from_map(self.nvars, acc)
    }

    /// Substitutes `x_v = x_w` (used for fast divisibility tests by `x_v - x_w`).
    pub fn identify_vars(&self, v: usize, w: usize) -> Self {
        let mut acc: FxHashMap<Monomial, Int> = FxHashMap::default();
        for (m, c) in &self.terms {
            let mut mm = *m;
            mm.set_exp(w, m.exp(w) + m.exp(v));
            mm.set_exp(v, 0);
            *acc.entry(mm).or_insert_with(Int::zero) += c;
        }
        Self::from_map(self.nvars, acc)
    }

    /// Writes the polynomial as `sum_k c_k x_v^k` with `c_k` free of `x_v`.
    pub fn coefficients_in(&self, v: usize) -> BTreeMap<u16, IntegerPolynomial> {
        let mut parts: BTreeMap<u16, Vec<(Monomial, Int)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut mm = *m;
            let e = m.exp(v);
            mm.set_exp(v, 0);
            parts.entry(e).or_default().push((mm, c.clone()));
        }
        parts
            .into_iter()
            .map(|(e, ts)| (e, IntegerPolynomial::from_terms(self.nvars, ts)))
            .collect()
    }

    /// Re-expresses the polynomial in a new variable set; `images[v]` is the
    /// image of variable `v`, already living in the target arity.
    pub fn compose(&self, images: &[IntegerPolynomial], target_nvars: usize) -> Self {
        assert_eq!(images.len(), self.nvars);
        let mut cache: Vec<Vec<IntegerPolynomial>> = images
            .iter()
            .map(|p| vec![IntegerPolynomial::one(target_nvars), p.clone()])
            .collect();
        let mut out = IntegerPolynomial::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut t = IntegerPolynomial::constant(target_nvars, c.clone());
            for (v, e) in m.exponents(self.nvars).enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[v].len() <= e as usize {
                    let next = cache[v].last().unwrap().mul(&images[v]);
                    cache[v].push(next);
                }
                t = t.mul(&cache[v][e as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    /// Drops variable `v` (which must not occur) and shrinks the arity by one.
    pub fn remove_var(&self, v: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                (m.remove_var(v, self.nvars), c.clone())
            })
            .collect();
        // removing a zero column preserves the relative grlex order
        IntegerPolynomial { nvars: self.nvars - 1, terms }
    }

    pub fn eval<T: Float>(&self, point: &[Complex<T>]) -> Complex<T> {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (m, c) in &self.terms {
            let mut t = Complex::new(int_to_float::<T>(c), T::zero());
            for (v, e) in m.exponents(self.nvars).enumerate() {
                if e > 0 {
                    t = t * point[v].powu(e as u32);
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn format(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars, "name list arity mismatch");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k == 0 {
                if c.is_negative() {
                    s.push('-');
                }
            } else if c.is_negative() {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            write!(s, "{}", c.abs()).unwrap();
            for (v, e) in m.exponents(self.nvars).enumerate() {
                if e == 0 {
                    continue;
                }
                s.push('*');
                s.push_str(&names[v]);
                if e > 1 {
                    write!(s, "^{e}").unwrap();
                }
            }
        }
        s
    }

    /// Parses sums of products of integers and named variables, e.g.
    /// `3*x[1]^2*x[-2] - 1*x[2] + 5`.
    pub fn parse(src: &str, names: &[String]) -> Result<Self> {
        Parser::new(src, names).parse()
    }
}

impl Ord for IntegerPolynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nvars
            .cmp(&other.nvars)
            .then_with(|| self.terms.len().cmp(&other.terms.len()))
            .then_with(|| {
                for ((ma, ca), (mb, cb)) in self.terms.iter().zip(&other.terms) {
                    let o = ma.cmp(mb).then_with(|| ca.cmp(cb));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for IntegerPolynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn int_to_float<T: Float>(c: &Int) -> T {
    match c.to_i64() {
        Some(v) if v.unsigned_abs() < (1u64 << 53) => T::from(v).unwrap(),
        _ => {
            // split into 2^52-sized limbs to keep double-double precision
            let base = Int::from(1u64 << 52);
            let (mut q, mut digits) = (c.abs(), Vec::new());
            while !q.is_zero() {
                let (nq, r) = q.div_rem(&base);
                digits.push(r.to_u64().unwrap());
                q = nq;
            }
            let b = T::from(1u64 << 52).unwrap();
            let mut acc = T::zero();
            for d in digits.iter().rev() {
                acc = acc * b + T::from(*d).unwrap();
            }
            if c.is_negative() {
                -acc
            } else {
                acc
            }
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(src: &str, names: &'a [String]) -> Self {
        Parser { chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, names }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: 0, msg: format!("{} (column {})", msg.into(), self.pos) }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<IntegerPolynomial> {
        let n = self.names.len();
        if self.chars.is_empty() {
            return Err(self.err("empty polynomial"));
        }
        let mut terms = Vec::new();
        let mut sign = Int::one();
        match self.peek() {
            Some('-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        loop {
            let (m, c) = self.term()?;
            terms.push((m, c * &sign));
            match self.peek() {
                None => break,
                Some('+') => sign = Int::one(),
                Some('-') => sign = -Int::one(),
                Some(c) => return Err(self.err(format!("unexpected '{c}'"))),
            }
            self.pos += 1;
        }
        Ok(IntegerPolynomial::from_terms(n, terms))
    }

    fn term(&mut self) -> Result<(Monomial, Int)> {
        let mut m = Monomial::one(self.names.len());
        let mut c = Int::one();
        loop {
            match self.peek() {
                Some(ch) if ch.is_ascii_digit() => c *= self.integer()?,
                Some(_) => {
                    let v = self.variable()?;
                    let mut e = 1u16;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        e = self
                            .integer()?
                            .to_u16()
                            .ok_or_else(|| self.err("exponent out of range"))?;
                    }
                    let total = m.exp(v) + e;
                    if total > MAX_EXPONENT {
                        return Err(self.err("exponent out of range"));
                    }
                    m.set_exp(v, total);
                }
                None => return Err(self.err("unexpected end of input")),
            }
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                return Ok((m, c));
            }
        }
    }

    fn integer(&mut self) -> Result<Int> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse::<Int>().map_err(|_| self.err("expected integer"))
    }

    fn variable(&mut self) -> Result<usize> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += 1;
            } else if c == '[' {
                while self.peek().is_some_and(|c| c != ']') {
                    self.pos += 1;
                }
                self.pos += 1;
                break;
            } else {
                break;
            }
        }
        let name: String = self.chars[start..self.pos.min(self.chars.len())].iter().collect();
        self.names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| self.err(format!("unknown variable '{name}'")))
    }
}
