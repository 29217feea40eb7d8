//! Assembly of `μ_{g,2} = ± det(Λ) F_1^{13} / F_2` and its structural checks.

use sha2::{Digest, Sha256};

use crate::differentials::{EichlerMatrix, PairingContext};
use crate::error::{Error, Result};
use crate::presentation::{general_index, general_xnames, SymbolicPresentation};
use crate::products::{d_k, mcintyre_takhtajan_f2, product_ratio_power, zograf_f1};
use crate::rational::RationalCoefficient;
use crate::series::{PrimitivityReport, SeriesRing, YExp, YSeries};
use crate::Int;

/// Content hashes of the factors entering an assembled series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub det_lambda: String,
    pub f1: String,
    pub f2: String,
}

#[derive(Clone, Debug)]
pub struct MumfordExpansion {
    pub genus: usize,
    pub truncation: i32,
    pub word_bound: usize,
    pub identify_inverses: bool,
    /// `det(Λ) F_1^{13} / F_2`; the form itself is only defined up to sign.
    pub series: YSeries,
    pub lambda: EichlerMatrix,
    pub det_lambda: YSeries,
    pub f1: YSeries,
    pub f2: YSeries,
    pub provenance: Provenance,
}

impl MumfordExpansion {
    /// The series under the given overall sign.
    pub fn with_sign(&self, sign: i8) -> YSeries {
        if sign < 0 {
            self.series.neg()
        } else {
            self.series.clone()
        }
    }
}

/// Hex SHA-256 of the canonical text of a series.
pub fn series_hash(s: &YSeries) -> String {
    let digest = Sha256::digest(s.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs the full pipeline on `pres` with coset words of length `<= word_bound`.
pub fn assemble_mu2(pres: &SymbolicPresentation, word_bound: usize, identify_inverses: bool) -> Result<MumfordExpansion> {
    let g = pres.genus();
    if g < 2 {
        return Err(Error::Input("the Mumford form assembly needs genus at least 2".into()));
    }
    let ctx = PairingContext::new(pres, word_bound)?;
    let lambda = ctx.lambda()?;
    let det_lambda = lambda.det()?;
    let f1 = zograf_f1(pres, identify_inverses)?;
    let f2 = mcintyre_takhtajan_f2(pres, identify_inverses)?;
    let ratio = product_ratio_power(&f1, &f2, d_k(2) as i32)?;
    let series = det_lambda.try_mul(&ratio)?;
    if series.valuation().is_some_and(|v| v < 0) {
        return Err(Error::Pipeline("assembled series has a negative valuation".into()));
    }
    let provenance = Provenance { det_lambda: series_hash(&det_lambda), f1: series_hash(&f1), f2: series_hash(&f2) };
    Ok(MumfordExpansion {
        genus: g,
        truncation: pres.truncation(),
        word_bound,
        identify_inverses,
        series,
        lambda,
        det_lambda,
        f1,
        f2,
        provenance,
    })
}

/// Leading-term factors `τ_2, …, τ_g` in the general variables.
pub fn tau_factors(g: usize, truncation: i32) -> Result<Vec<YSeries>> {
    if g < 2 {
        return Err(Error::Input("τ factors need genus at least 2".into()));
    }
    let ring = SeriesRing::new(g, truncation.max(1), general_xnames(g));
    let n = 2 * g;
    let x = |s: i32| RationalCoefficient::var(n, general_index(s));
    let d = |a: i32, b: i32| x(a).sub(&x(b));
    let frac = |num: RationalCoefficient, den: RationalCoefficient| num.div(&den);
    let mut out = Vec::with_capacity(g - 1);
    let tau2 = frac(d(1, -1).mul(&d(2, -2).pow(2)?), d(1, -2).mul(&d(-1, -2)))?;
    out.push(YSeries::monomial(&ring, YExp::unit(g, 1), tau2));
    for i in 3..=g as i32 {
        let first = frac(RationalCoefficient::one(n), d(-i, 1).mul(&d(-i, -1)))?;
        let second = frac(
            d(i, 2).mul(&d(i, -2)),
            d(-i, 2).mul(&d(-i, -2)).mul(&d(i, 1)).mul(&d(i, -1)),
        )?;
        let bracket = first.sub(&second);
        let outer = frac(d(1, -1).mul(&d(2, -2)).mul(&d(i, -i).pow(2)?), d(i, 2).mul(&d(i, -2)))?;
        out.push(YSeries::monomial(&ring, YExp::unit(g, i as usize - 1), bracket.mul(&outer)));
    }
    Ok(out)
}

/// `τ_i` after `x_1 = 0`, `x_{-1} → ∞`, `x_2 = 1`.
pub fn tau_factors_normalized(g: usize, truncation: i32) -> Result<Vec<YSeries>> {
    tau_factors(g, truncation)?.iter().map(SymbolicPresentation::normalize_series).collect()
}

/// `∏ τ_i` in the variables of `pres`.
pub fn tau_product(pres: &SymbolicPresentation) -> Result<YSeries> {
    let g = pres.genus();
    let taus = if pres.is_normalized() {
        tau_factors_normalized(g, pres.truncation())?
    } else {
        tau_factors(g, pres.truncation())?
    };
    let mut acc = YSeries::one(pres.ring());
    for t in taus {
        acc = acc.try_mul(&t.in_ring(pres.ring())?)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct LeadingTermReport {
    pub genus: usize,
    pub truncation: i32,
    pub det_leading: YSeries,
    pub tau_product: YSeries,
    pub plus_matches: bool,
    pub minus_matches: bool,
}

impl LeadingTermReport {
    pub fn passed(&self) -> bool {
        self.plus_matches || self.minus_matches
    }

    /// `+1`, `−1`, or `0` when neither sign matches.
    pub fn matched_sign(&self) -> i8 {
        if self.plus_matches {
            1
        } else if self.minus_matches {
            -1
        } else {
            0
        }
    }
}

/// Compares the lowest-degree part of `det(Λ)` with `±∏ τ_i`.
pub fn verify_leading_term(pres: &SymbolicPresentation, det_lambda: &YSeries) -> Result<LeadingTermReport> {
    let det_leading = det_lambda.min_degree_part();
    let tau_product = tau_product(pres)?;
    Ok(LeadingTermReport {
        genus: pres.genus(),
        truncation: pres.truncation(),
        plus_matches: det_leading == tau_product,
        minus_matches: det_leading == tau_product.neg(),
        det_leading,
        tau_product,
    })
}

/// Truncation needed for the leading term of `det(Λ)`, which sits in degree `g − 1`.
pub fn leading_term_truncation(g: usize, n: i32) -> i32 {
    n.max(g as i32 - 1)
}

/// Builds `Λ`, its determinant and the leading-term comparison in one go.
pub fn run_leading_term_check(
    g: usize,
    truncation: i32,
    word_bound: usize,
    normalized: bool,
) -> Result<(EichlerMatrix, LeadingTermReport)> {
    let n = leading_term_truncation(g, truncation);
    let pres = if normalized { SymbolicPresentation::normalized(g, n) } else { SymbolicPresentation::general(g, n) };
    let ctx = PairingContext::new(&pres, word_bound.max(n as usize))?;
    let lambda = ctx.lambda()?;
    let det = lambda.det()?;
    let report = verify_leading_term(&pres, &det)?;
    Ok((lambda, report))
}

/// Content and primitivity of the leading part of the assembled series.
pub fn primitivity(e: &MumfordExpansion, primes: &[u64]) -> Result<PrimitivityReport> {
    e.series.content_and_primitivity(primes)
}

/// Coefficients of `q ∏_{n≥1} (1 − q^n)^{24}` for `q^1..=q^N`, computed as
/// `y F_1^{12}` in genus one with inverse classes counted separately.
pub fn genus1_delta(n: i32) -> Result<Vec<Int>> {
    if n < 1 {
        return Err(Error::Input("delta expansion needs N >= 1".into()));
    }
    let pres = SymbolicPresentation::normalized(1, n);
    let f1 = zograf_f1(&pres, false)?;
    let delta = YSeries::y(pres.ring(), 0).try_mul(&f1.try_pow(12)?)?;
    (1..=n)
        .map(|k| {
            delta
                .coefficient(&YExp::from_slice(&[k as i16]))
                .to_int()
                .ok_or_else(|| Error::Pipeline(format!("non-integral coefficient at q^{k}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_first_coefficients() {
        let c = genus1_delta(6).unwrap();
        let expected: Vec<Int> = [1, -24, 252, -1472, 4830, -6048].iter().map(|&v| Int::from(v)).collect();
        assert_eq!(c, expected);
    }

    #[test]
    fn genus_two_leading_term() {
        for normalized in [false, true] {
            let (_, report) = run_leading_term_check(2, 1, 1, normalized).unwrap();
            assert!(report.passed(), "normalized={normalized}: {} vs {}", report.det_leading, report.tau_product);
        }
    }

    #[test]
    fn normalized_tau2_closed_form() {
        let t = tau_factors_normalized(2, 1).unwrap();
        let n = 1;
        let x = RationalCoefficient::var(n, 0);
        let one = RationalCoefficient::one(n);
        let expected = one.sub(&x).pow(2).unwrap().div(&x).unwrap();
        assert_eq!(t[0].coefficient(&YExp::unit(2, 1)), expected);
    }

    #[test]
    fn corrupted_det_fails() {
        let pres = SymbolicPresentation::general(2, 1);
        let ctx = PairingContext::new(&pres, 1).unwrap();
        let mut lambda = ctx.lambda().unwrap();
        lambda.entries[0].swap(0, 1);
        let report = verify_leading_term(&pres, &lambda.det().unwrap()).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn assembled_genus_two() {
        let pres = SymbolicPresentation::normalized(2, 1);
        let e = assemble_mu2(&pres, 1, false).unwrap();
        let report = verify_leading_term(&pres, &e.series).unwrap();
        assert!(report.passed());
        assert_eq!(e.with_sign(-1), e.series.neg());
        assert_eq!(e.provenance.det_lambda.len(), 64);
    }
}
