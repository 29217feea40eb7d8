//! Ring axioms and naive oracles for polynomials, coefficients and series.

use std::collections::BTreeMap;

use mumford_core::io::{read_series, write_series};
use mumford_core::{Int, IntegerPolynomial, Monomial, RationalCoefficient, RingRef, SeriesRing, YExp, YSeries};
use proptest::prelude::*;

type Dense = BTreeMap<(u16, u16), i128>;

fn poly2(terms: &[(u16, u16, i64)]) -> IntegerPolynomial {
    IntegerPolynomial::from_terms(2, terms.iter().map(|&(a, b, k)| (Monomial::from_exponents(&[a, b]), Int::from(k))))
}

fn dense(terms: &[(u16, u16, i64)]) -> Dense {
    let mut d = Dense::new();
    for &(a, b, k) in terms {
        *d.entry((a, b)).or_default() += k as i128;
    }
    d.retain(|_, v| *v != 0);
    d
}

fn dense_mul(p: &Dense, q: &Dense) -> Dense {
    let mut d = Dense::new();
    for (&(a, b), u) in p {
        for (&(c, e), v) in q {
            *d.entry((a + c, b + e)).or_default() += u * v;
        }
    }
    d.retain(|_, v| *v != 0);
    d
}

fn to_dense(p: &IntegerPolynomial) -> Dense {
    p.terms().iter().map(|(m, k)| ((m.exp(0), m.exp(1)), i128::try_from(k).unwrap())).collect()
}

fn poly_terms() -> impl Strategy<Value = Vec<(u16, u16, i64)>> {
    prop::collection::vec((0u16..4, 0u16..4, -20i64..20), 0..8)
}

fn ring() -> RingRef {
    SeriesRing::new(2, 3, vec!["x".into()])
}

/// `(a + b x) / (x − c)^k` with `c` drawn from a small set of integers.
fn coefficient(a: i64, b: i64, c: i64, k: u32) -> RationalCoefficient {
    let num = IntegerPolynomial::constant(1, a).add(&IntegerPolynomial::var(1, 0).scale(&Int::from(b)));
    let den = IntegerPolynomial::var(1, 0).sub(&IntegerPolynomial::constant(1, c)).pow(k);
    RationalCoefficient::from_num_den(num, den).unwrap()
}

type SeriesTerms = Vec<(i16, i16, i64, i64, i64, u32)>;

fn series_terms() -> impl Strategy<Value = SeriesTerms> {
    prop::collection::vec((0i16..3, 0i16..3, -5i64..5, -3i64..3, prop::sample::select(vec![1i64, -2, 3]), 0u32..2), 0..6)
}

fn series(terms: &SeriesTerms) -> YSeries {
    let r = ring();
    let parts: Vec<YSeries> = terms
        .iter()
        .map(|&(e0, e1, a, b, c, k)| YSeries::monomial(&r, YExp::from_slice(&[e0, e1]), coefficient(a, b, c, k)))
        .collect();
    YSeries::sum(&r, parts.iter()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packed_monomial_order_is_graded_lex(a in prop::array::uniform4(0u16..60), b in prop::array::uniform4(0u16..60)) {
        let (ma, mb) = (Monomial::from_exponents(&a), Monomial::from_exponents(&b));
        let key = |e: &[u16; 4]| (e.iter().map(|&v| v as u32).sum::<u32>(), *e);
        prop_assert_eq!(ma.cmp(&mb), key(&a).cmp(&key(&b)));
        let prod = ma.mul(&mb);
        for v in 0..4 {
            prop_assert_eq!(prod.exp(v), a[v] + b[v]);
        }
        prop_assert_eq!(prod.checked_div(&mb), Some(ma));
    }

    #[test]
    fn polynomial_product_matches_dense_oracle(p in poly_terms(), q in poly_terms()) {
        let prod = poly2(&p).mul(&poly2(&q));
        prop_assert_eq!(to_dense(&prod), dense_mul(&dense(&p), &dense(&q)));
        prop_assert_eq!(to_dense(&poly2(&p).add(&poly2(&q))), {
            let mut d = dense(&p);
            for (k, v) in dense(&q) {
                *d.entry(k).or_default() += v;
            }
            d.retain(|_, v| *v != 0);
            d
        });
    }

    #[test]
    fn exact_division_undoes_multiplication(p in poly_terms(), q in poly_terms()) {
        let (p, q) = (poly2(&p), poly2(&q));
        prop_assume!(!q.is_zero());
        prop_assert_eq!(p.mul(&q).div_exact(&q), Some(p));
    }

    #[test]
    fn polynomial_text_round_trips(p in poly_terms()) {
        let names = vec!["a".to_string(), "b".to_string()];
        let p = poly2(&p);
        let back = IntegerPolynomial::parse(&p.format(&names), &names).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn coefficient_field_laws(
        a in (-6i64..6, -6i64..6, prop::sample::select(vec![1i64, -2, 3]), 0u32..3),
        b in (-6i64..6, -6i64..6, prop::sample::select(vec![1i64, -2, 3]), 0u32..3),
    ) {
        let x = coefficient(a.0, a.1, a.2, a.3);
        let y = coefficient(b.0, b.1, b.2, b.3);
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert!(x.sub(&x).is_zero());
        prop_assume!(!y.is_zero());
        prop_assert_eq!(x.div(&y).unwrap().mul(&y), x);
    }

    #[test]
    fn series_ring_axioms(a in series_terms(), b in series_terms(), c in series_terms()) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn series_sum_matches_coefficient_merge(a in series_terms(), b in series_terms()) {
        let (sa, sb) = (series(&a), series(&b));
        let mut merged: BTreeMap<YExp, RationalCoefficient> = sa.terms().clone();
        for (e, c) in sb.terms() {
            let sum = merged.get(e).map_or_else(|| c.clone(), |d| d.add(c));
            merged.insert(e.clone(), sum);
        }
        merged.retain(|_, c| !c.is_zero());
        let sum = sa.try_add(&sb).unwrap();
        prop_assert_eq!(sum.terms(), &merged);
    }

    #[test]
    fn units_invert(a in series_terms(), k in 1i64..5) {
        let u = &YSeries::from_int(&ring(), k) + &series(&a).truncate(3).unwrap();
        let u = &u - &YSeries::constant(&ring(), series(&a).constant_term());
        let inv = u.try_inv().unwrap();
        prop_assert_eq!(u.try_mul(&inv).unwrap(), YSeries::one(&ring()));
    }

    #[test]
    fn series_text_round_trips(a in series_terms()) {
        let s = series(&a);
        let back = read_series(&write_series(&s)).unwrap();
        prop_assert_eq!(back.terms(), s.terms());
        prop_assert_eq!(back.floor(), s.floor());
    }
}
