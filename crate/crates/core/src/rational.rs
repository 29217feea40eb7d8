//! Rational functions in the fixed-point variables.
//!
//! Denominators are stored factored: a positive integer times a product of
//! powers of primitive polynomials ("atoms") with positive leading
//! coefficient. Numerators are expanded. The representation is canonical as
//! long as atoms are irreducible: no atom divides the numerator and the
//! numerator content is coprime to the integer part of the denominator.
//!
//! New atoms are found by trial division with the linear forms `x_a - x_b`,
//! `x_a` and `x_a ∓ 1`; any remaining primitive factor of a denominator is
//! kept whole as a single atom (irreducibility is assumed, not checked).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::poly::{int_to_float, Int, IntegerPolynomial, Monomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Shape {
    /// `x_a - x_b`
    Diff(usize, usize),
    /// `x_a - c`
    Shift(usize, i64),
    General,
}

/// A primitive, non-constant denominator factor with positive leading coefficient.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    poly: IntegerPolynomial,
    shape: Shape,
}

impl Atom {
    fn new(poly: IntegerPolynomial) -> Atom {
        let shape = classify(&poly);
        Atom { poly, shape }
    }

    pub fn poly(&self) -> &IntegerPolynomial {
        &self.poly
    }

    /// True for atoms of the form `x_a - x_b`.
    pub fn is_difference(&self) -> bool {
        matches!(self.shape, Shape::Diff(..))
    }

    fn divides(&self, p: &IntegerPolynomial) -> bool {
        match self.shape {
            Shape::Diff(a, b) => p.identify_vars(a, b).is_zero(),
            Shape::Shift(a, c) => p.substitute_int(a, &Int::from(c)).is_zero(),
            Shape::General => p.div_exact(&self.poly).is_some(),
        }
    }

    fn divide(&self, p: &IntegerPolynomial) -> IntegerPolynomial {
        p.div_exact(&self.poly).expect("atom divisibility was established")
    }
}

fn classify(p: &IntegerPolynomial) -> Shape {
    let t = p.terms();
    let linear_var = |m: &Monomial| -> Option<usize> {
        if m.degree() == 1 {
            (0..super::poly::MAX_VARS).position(|v| m.exp(v) == 1)
        } else {
            None
        }
    };
    match t {
        [(m, c)] if c.is_one() => linear_var(m).map_or(Shape::General, |a| Shape::Shift(a, 0)),
        [(m1, c1), (m2, c2)] => {
            let (v1, v2) = (linear_var(m1), linear_var(m2));
            if let (Some(a), Some(b), true, true) = (v1, v2, c1.is_one(), *c2 == -Int::one()) {
                return Shape::Diff(a, b);
            }
            if let (Some(a), true, true) = (v1, m2.is_one(), c1.is_one()) {
                if let Some(c) = (-c2).to_i64() {
                    return Shape::Shift(a, c);
                }
            }
            Shape::General
        }
        _ => Shape::General,
    }
}

type AtomList = Vec<(Arc<Atom>, u32)>;

fn candidate_atoms(nvars: usize) -> Arc<Vec<Arc<Atom>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Arc<Atom>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap();
    guard
        .entry(nvars)
        .or_insert_with(|| {
            let mut out = Vec::new();
            for a in 0..nvars {
                let xa = IntegerPolynomial::var(nvars, a);
                for b in a + 1..nvars {
                    out.push(Arc::new(Atom::new(xa.sub(&IntegerPolynomial::var(nvars, b)))));
                }
                out.push(Arc::new(Atom::new(xa.clone())));
                for c in [1, -1] {
                    out.push(Arc::new(Atom::new(xa.sub(&IntegerPolynomial::constant(nvars, c)))));
                }
            }
            Arc::new(out)
        })
        .clone()
}

fn shared_atom(poly: IntegerPolynomial) -> Arc<Atom> {
    let cands = candidate_atoms(poly.nvars());
    cands
        .iter()
        .find(|a| a.poly == poly)
        .cloned()
        .unwrap_or_else(|| Arc::new(Atom::new(poly)))
}

/// Splits `p` into `unit * ∏ atom^e`, where `unit` is an integer (sign and content).
fn factor(p: &IntegerPolynomial) -> (Int, AtomList) {
    assert!(!p.is_zero());
    let n = p.nvars();
    let content = p.content();
    let mut rest = p.div_int_exact(&content);
    let mut unit = content;
    let mut found: AtomList = Vec::new();
    if !rest.is_constant() {
        for atom in candidate_atoms(n).iter() {
            let occurs = match atom.shape {
                Shape::Diff(a, b) => {
                    rest.degree_in(a).unwrap_or(0) > 0 && rest.degree_in(b).unwrap_or(0) > 0
                }
                Shape::Shift(a, _) => rest.degree_in(a).unwrap_or(0) > 0,
                Shape::General => true,
            };
            if !occurs {
                continue;
            }
            let mut e = 0;
            while !rest.is_constant() && atom.divides(&rest) {
                rest = atom.divide(&rest);
                e += 1;
            }
            if e > 0 {
                found.push((atom.clone(), e));
            }
            if rest.is_constant() {
                break;
            }
        }
    }
    if rest.is_constant() {
        unit *= rest.constant_value().unwrap();
    } else {
        if rest.leading().unwrap().1.is_negative() {
            rest = rest.neg();
            unit = -unit;
        }
        found.push((shared_atom(rest), 1));
    }
    sort_atoms(&mut found);
    (unit, found)
}

fn sort_atoms(atoms: &mut AtomList) {
    atoms.sort_by(|a, b| a.0.poly.cmp(&b.0.poly));
    let mut merged: AtomList = Vec::with_capacity(atoms.len());
    for (a, e) in atoms.drain(..) {
        match merged.last_mut() {
            Some((b, f)) if b.poly == a.poly => *f += e,
            _ => merged.push((a, e)),
        }
    }
    *atoms = merged;
}

/// Exponent-wise maximum of two sorted atom lists.
fn lcm_atoms(a: &AtomList, b: &AtomList) -> AtomList {
    let mut out = a.clone();
    for (atom, e) in b {
        match out.iter_mut().find(|(x, _)| x.poly == atom.poly) {
            Some((_, f)) => *f = (*f).max(*e),
            None => out.push((atom.clone(), *e)),
        }
    }
    sort_atoms(&mut out);
    out
}

fn exponent_of(list: &AtomList, atom: &Atom) -> u32 {
    list.iter().find(|(x, _)| x.poly == atom.poly).map_or(0, |(_, e)| *e)
}

fn atom_product(nvars: usize, list: &AtomList, skip: &AtomList) -> IntegerPolynomial {
    let mut acc = IntegerPolynomial::one(nvars);
    for (atom, e) in list {
        let k = e - exponent_of(skip, atom);
        if k > 0 {
            acc = acc.mul(&atom.poly.pow(k));
        }
    }
    acc
}

/// An element of the field of rational functions in the x-variables.
#[derive(Clone, Debug)]
pub struct RationalCoefficient {
    num: IntegerPolynomial,
    den: Int,
    atoms: AtomList,
}

impl PartialEq for RationalCoefficient {
    fn eq(&self, other: &Self) -> bool {
        if self.num == other.num
            && self.den == other.den
            && self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(a, b)| a.0.poly == b.0.poly && a.1 == b.1)
        {
            return true;
        }
        if self.num.nvars() != other.num.nvars() || self.num.is_zero() || other.num.is_zero() {
            return false;
        }
        let l = lcm_atoms(&self.atoms, &other.atoms);
        let n = self.num.nvars();
        let lhs = self
            .num
            .mul(&atom_product(n, &l, &self.atoms))
            .scale(&other.den);
        let rhs = other
            .num
            .mul(&atom_product(n, &l, &other.atoms))
            .scale(&self.den);
        lhs == rhs
    }
}

impl RationalCoefficient {
    pub fn zero(nvars: usize) -> Self {
        RationalCoefficient { num: IntegerPolynomial::zero(nvars), den: Int::one(), atoms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::from_int(nvars, 1)
    }

    pub fn from_int(nvars: usize, k: impl Into<Int>) -> Self {
        Self::from_poly(IntegerPolynomial::constant(nvars, k))
    }

    pub fn from_poly(p: IntegerPolynomial) -> Self {
        RationalCoefficient { num: p, den: Int::one(), atoms: Vec::new() }
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        Self::from_poly(IntegerPolynomial::var(nvars, v))
    }

    /// `num / den` for arbitrary nonzero `den`.
    pub fn from_num_den(num: IntegerPolynomial, den: IntegerPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Input("zero denominator".into()));
        }
        if num.nvars() != den.nvars() {
            return Err(Error::Config("numerator and denominator arity differ".into()));
        }
        Ok(Self::from_poly(num).mul(&Self::from_poly(den).inv()?))
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.den.is_one() && self.num.is_one()
    }

    pub fn numerator(&self) -> &IntegerPolynomial {
        &self.num
    }

    /// Integer part of the denominator (always positive).
    pub fn denominator_int(&self) -> &Int {
        &self.den
    }

    pub fn denominator_atoms(&self) -> impl Iterator<Item = (&Atom, u32)> {
        self.atoms.iter().map(|(a, e)| (a.as_ref(), *e))
    }

    pub fn denominator(&self) -> IntegerPolynomial {
        atom_product(self.nvars(), &self.atoms, &Vec::new()).scale(&self.den)
    }

    /// The value as an integer, when it is one.
    pub fn to_int(&self) -> Option<Int> {
        if self.atoms.is_empty() && self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    fn reduce(mut num: IntegerPolynomial, mut den: Int, atoms: AtomList) -> Self {
        let n = num.nvars();
        if num.is_zero() {
            return Self::zero(n);
        }
        let mut kept = Vec::with_capacity(atoms.len());
        for (atom, mut e) in atoms {
            while e > 0 && atom.divides(&num) {
                num = atom.divide(&num);
                e -= 1;
            }
            if e > 0 {
                kept.push((atom, e));
            }
        }
        let g = num.content().gcd(&den);
        if !g.is_one() {
            num = num.div_int_exact(&g);
            den /= g;
        }
        RationalCoefficient { num, den, atoms: kept }
    }

    pub fn neg(&self) -> Self {
        RationalCoefficient { num: self.num.neg(), den: self.den.clone(), atoms: self.atoms.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::sum(self.nvars(), [self, other])
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Sums many fractions over one common denominator, reducing once.
    pub fn sum<'a>(nvars: usize, items: impl IntoIterator<Item = &'a RationalCoefficient>) -> Self {
        let mut groups: FxHashMap<(Int, Vec<(IntegerPolynomial, u32)>), (AtomList, IntegerPolynomial)> =
            FxHashMap::default();
        for it in items {
            assert_eq!(it.nvars(), nvars, "coefficient arity mismatch");
            if it.is_zero() {
                continue;
            }
            let key = (it.den.clone(), it.atoms.iter().map(|(a, e)| (a.poly.clone(), *e)).collect());
            match groups.get_mut(&key) {
                Some((_, acc)) => *acc = acc.add(&it.num),
                None => {
                    groups.insert(key, (it.atoms.clone(), it.num.clone()));
                }
            }
        }
        let mut groups: Vec<_> = groups.into_iter().filter(|(_, (_, p))| !p.is_zero()).collect();
        match groups.len() {
            0 => return Self::zero(nvars),
            1 => {
                let ((den, _), (atoms, num)) = groups.pop().unwrap();
                return Self::reduce(num, den, atoms);
            }
            _ => {}
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        let mut lden = Int::one();
        let mut latoms: AtomList = Vec::new();
        for ((den, _), (atoms, _)) in &groups {
            lden = lden.lcm(den);
            latoms = lcm_atoms(&latoms, atoms);
        }
        let mut num = IntegerPolynomial::zero(nvars);
        for ((den, _), (atoms, p)) in &groups {
            let scale = &lden / den;
            num = num.add(&p.mul(&atom_product(nvars, &latoms, atoms)).scale(&scale));
        }
        Self::reduce(num, lden, latoms)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars(), other.nvars(), "coefficient arity mismatch");
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars());
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (mut an, mut bn) = (self.num.clone(), other.num.clone());
        let mut atoms: AtomList = Vec::with_capacity(self.atoms.len() + other.atoms.len());
        for (atom, e) in &other.atoms {
            let mut e = *e;
            while e > 0 && atom.divides(&an) {
                an = atom.divide(&an);
                e -= 1;
            }
            if e > 0 {
                atoms.push((atom.clone(), e));
            }
        }
        for (atom, e) in &self.atoms {
            let mut e = *e;
            while e > 0 && atom.divides(&bn) {
                bn = atom.divide(&bn);
                e -= 1;
            }
            if e > 0 {
                atoms.push((atom.clone(), e));
            }
        }
        sort_atoms(&mut atoms);
        let g1 = an.content().gcd(&other.den);
        let g2 = bn.content().gcd(&self.den);
        if !g1.is_one() {
            an = an.div_int_exact(&g1);
        }
        if !g2.is_one() {
            bn = bn.div_int_exact(&g2);
        }
        let den = (&self.den / &g2) * (&other.den / &g1);
        RationalCoefficient { num: an.mul(&bn), den, atoms }
    }

    pub fn scale_int(&self, k: &Int) -> Self {
        self.mul(&Self::from_int(self.nvars(), k.clone()))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero coefficient".into()));
        }
        let n = self.nvars();
        let (unit, atoms) = factor(&self.num);
        let mut num = atom_product(n, &self.atoms, &Vec::new()).scale(&self.den);
        let mut den = unit;
        if den.is_negative() {
            den = -den;
            num = num.neg();
        }
        Ok(RationalCoefficient { num, den, atoms })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i32) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.nvars());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn eval<T: Float>(&self, point: &[Complex<T>]) -> Result<Complex<T>> {
        let mut den = Complex::new(int_to_float::<T>(&self.den), T::zero());
        for (atom, e) in &self.atoms {
            let v = atom.poly.eval(point);
            if v.norm() == T::zero() {
                return Err(Error::Specialization(format!(
                    "denominator factor vanishes (atom with {} terms)",
                    atom.poly.len()
                )));
            }
            den = den * v.powu(*e);
        }
        Ok(self.num.eval(point) / den)
    }

    /// Substitutes `x_v := images[v]` (images live in arity `target`).
    pub fn compose(&self, images: &[RationalCoefficient], target: usize) -> Result<Self> {
        assert_eq!(images.len(), self.nvars());
        let eval_poly = |p: &IntegerPolynomial| -> Self {
            let mut terms = Vec::with_capacity(p.len());
            for (m, c) in p.terms() {
                let mut t = Self::from_int(target, c.clone());
                for (v, e) in m.exponents(self.nvars()).enumerate() {
                    for _ in 0..e {
                        t = t.mul(&images[v]);
                    }
                }
                terms.push(t);
            }
            Self::sum(target, terms.iter())
        };
        let num = eval_poly(&self.num);
        let mut den = Self::from_int(target, self.den.clone());
        for (atom, e) in &self.atoms {
            let a = eval_poly(&atom.poly);
            if a.is_zero() {
                return Err(Error::Specialization("denominator factor vanishes under substitution".into()));
            }
            den = den.mul(&a.pow(*e as i32)?);
        }
        num.div(&den)
    }

    /// Limit as `x_v → ∞`; the result no longer depends on `x_v`.
    pub fn limit_at_infinity(&self, v: usize) -> Result<Self> {
        let n = self.nvars();
        if self.is_zero() {
            return Ok(self.clone());
        }
        let num_parts = self.num.coefficients_in(v);
        let (&num_deg, num_lc) = num_parts.iter().next_back().unwrap();
        let mut den_deg = 0u32;
        let mut den = Self::from_int(n, self.den.clone());
        for (atom, e) in &self.atoms {
            let parts = atom.poly.coefficients_in(v);
            let (&d, lc) = parts.iter().next_back().unwrap();
            den_deg += d as u32 * e;
            den = den.mul(&Self::from_poly(lc.clone()).pow(*e as i32)?);
        }
        match (num_deg as u32).cmp(&den_deg) {
            std::cmp::Ordering::Less => Ok(Self::zero(n)),
            std::cmp::Ordering::Equal => Self::from_poly(num_lc.clone()).div(&den),
            std::cmp::Ordering::Greater => Err(Error::Specialization(format!(
                "coefficient diverges as variable {v} tends to infinity"
            ))),
        }
    }

    /// Drops a variable that no longer occurs, shrinking the arity.
    pub fn remove_var(&self, v: usize) -> Self {
        let mut atoms: AtomList = self
            .atoms
            .iter()
            .map(|(a, e)| (shared_atom(a.poly.remove_var(v)), *e))
            .collect();
        sort_atoms(&mut atoms);
        RationalCoefficient { num: self.num.remove_var(v), den: self.den.clone(), atoms }
    }

    /// Canonical strings for the expanded numerator and denominator.
    pub fn format(&self, names: &[String]) -> (String, String) {
        (self.num.format(names), self.denominator().format(names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x[{i}]")).collect()
    }

    fn p(s: &str) -> IntegerPolynomial {
        IntegerPolynomial::parse(s, &names(3)).unwrap()
    }

    fn r(num: &str, den: &str) -> RationalCoefficient {
        RationalCoefficient::from_num_den(p(num), p(den)).unwrap()
    }

    #[test]
    fn reduces_common_factors() {
        let a = r("x[0]^2 - x[1]^2", "2*x[0] - 2*x[1]");
        assert_eq!(a.numerator(), &p("x[0] + x[1]"));
        assert_eq!(a.denominator(), p("2"));
        assert!(r("x[1] - x[0]", "x[0] - x[1]") == RationalCoefficient::from_int(3, -1));
    }

    #[test]
    fn field_operations() {
        let a = r("1", "x[0] - x[1]");
        let b = r("1", "x[0] - x[2]");
        let s = a.add(&b);
        assert_eq!(s, r("2*x[0] - x[1] - x[2]", "x[0]^2 - x[0]*x[2] - x[0]*x[1] + x[1]*x[2]"));
        let prod = s.mul(&s.inv().unwrap());
        assert!(prod.is_one());
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn inverse_finds_linear_atoms() {
        let a = RationalCoefficient::from_poly(p("x[0]^2*x[2] - x[0]^2 - x[0]*x[1]*x[2] + x[0]*x[1]"));
        let inv = a.inv().unwrap();
        let shapes: Vec<_> = inv.denominator_atoms().map(|(a, _)| a.shape).collect();
        assert_eq!(shapes.len(), 3);
        assert!(shapes.iter().all(|s| *s != Shape::General));
    }

    #[test]
    fn limit_and_evaluation() {
        // (x0 - x1)(x2 - x1) / ((x0 - x2) x1) as x0 → ∞ is (x2 - x1)/x1
        let a = r("x[0]*x[2] - x[0]*x[1] - x[1]*x[2] + x[1]^2", "x[0]*x[1] - x[1]*x[2]");
        let lim = a.limit_at_infinity(0).unwrap();
        assert_eq!(lim, r("x[2] - x[1]", "x[1]"));
        let pt = [Complex::new(0.0, 0.0), Complex::new(2.0, 0.0), Complex::new(5.0, 0.0)];
        assert!((lim.eval(&pt).unwrap() - Complex::new(1.5, 0.0)).norm() < 1e-15);
        let bad = [Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(5.0, 0.0)];
        assert!(matches!(lim.eval(&bad), Err(Error::Specialization(_))));
    }
}
