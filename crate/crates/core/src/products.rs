//! Truncated infinite products over primitive conjugacy classes.
//!
//! `F_1 = ∏_{γ} ∏_{m≥0} (1 − q_γ^{1+m})` and
//! `F_2 = (1 − q_1)^2 (1 − q_2) ∏_{γ} ∏_{m≥0} (1 − q_γ^{2+m})`.
//! A class with multiplier valuation `v` keeps the factor `1 − q^e` only
//! while `v·e <= N`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::presentation::SymbolicPresentation;
use crate::series::YSeries;
use crate::word::{enumerate_primitive_classes, PrimitiveClass};

/// `d_k = 6k² − 6k + 1`.
pub fn d_k(k: i64) -> i64 {
    6 * k * k - 6 * k + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    F1,
    F2,
}

impl ProductKind {
    /// Smallest exponent in the class factors.
    pub fn start(self) -> u32 {
        match self {
            ProductKind::F1 => 1,
            ProductKind::F2 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductSpec {
    pub kind: ProductKind,
    /// Longest class word taken into the product.
    pub class_bound: usize,
    pub identify_inverses: bool,
}

impl ProductSpec {
    pub fn for_truncation(kind: ProductKind, n: i32, identify_inverses: bool) -> Self {
        ProductSpec { kind, class_bound: n.max(0) as usize, identify_inverses }
    }
}

/// `∏_m (1 − q^{start+m})` for one class, truncated by valuation.
fn class_factor(pres: &SymbolicPresentation, class: &PrimitiveClass, start: u32) -> Result<YSeries> {
    let ring = pres.ring();
    let n = pres.truncation();
    let q = pres.multiplier(&class.word)?;
    let v = q.valuation().unwrap_or(i32::MAX);
    if v <= 0 {
        return Err(Error::Pipeline(format!("multiplier of {} is not in the ideal", class.word)));
    }
    let one = YSeries::one(ring);
    let mut acc = one.clone();
    let mut e = start as i32;
    let mut qe = q.try_pow(e)?;
    while v.saturating_mul(e) <= n {
        acc = acc.try_mul(&one.try_sub(&qe)?)?;
        qe = qe.try_mul(&q)?;
        e += 1;
    }
    Ok(acc)
}

/// The class part `∏_{γ} ∏_m (1 − q_γ^{start+m})`.
pub fn class_product(pres: &SymbolicPresentation, spec: &ProductSpec) -> Result<YSeries> {
    let classes = enumerate_primitive_classes(pres.genus(), spec.class_bound, spec.identify_inverses);
    let start = spec.kind.start();
    let factors: Vec<Result<YSeries>> = classes.par_iter().map(|c| class_factor(pres, c, start)).collect();
    let mut acc = YSeries::one(pres.ring());
    for f in factors {
        acc = acc.try_mul(&f?)?;
    }
    Ok(acc)
}

pub fn product(pres: &SymbolicPresentation, spec: &ProductSpec) -> Result<YSeries> {
    let classes = class_product(pres, spec)?;
    match spec.kind {
        ProductKind::F1 => Ok(classes),
        ProductKind::F2 => {
            if pres.genus() < 2 {
                return Err(Error::Input("F2 needs genus at least 2".into()));
            }
            let ring = pres.ring();
            let one = YSeries::one(ring);
            let a = one.try_sub(&YSeries::y(ring, 0))?;
            let b = one.try_sub(&YSeries::y(ring, 1))?;
            a.try_mul(&a)?.try_mul(&b)?.try_mul(&classes)
        }
    }
}

/// Zograf product `F_1` truncated at the ring's order.
pub fn zograf_f1(pres: &SymbolicPresentation, identify_inverses: bool) -> Result<YSeries> {
    product(pres, &ProductSpec::for_truncation(ProductKind::F1, pres.truncation(), identify_inverses))
}

/// McIntyre–Takhtajan product `F_2` truncated at the ring's order.
pub fn mcintyre_takhtajan_f2(pres: &SymbolicPresentation, identify_inverses: bool) -> Result<YSeries> {
    product(pres, &ProductSpec::for_truncation(ProductKind::F2, pres.truncation(), identify_inverses))
}

/// `F_1^d / F_2`.
pub fn product_ratio_power(f1: &YSeries, f2: &YSeries, d: i32) -> Result<YSeries> {
    if f1.valuation() != Some(0) || f2.valuation() != Some(0) {
        return Err(Error::NotInvertible("product ratio needs two units".into()));
    }
    f1.try_pow(d)?.try_mul(&f2.try_inv()?)
}
