//! Truncated Poincaré-series differentials and their residue pairings.
//!
//! `ω_i = Σ_φ (1/(z − φ(x_i)) − 1/(z − φ(x_{-i}))) dz`, summed over coset
//! representatives of `Γ/⟨γ_i⟩` of length `<= L`, is stored as a list of
//! simple poles. A pole `φ(x_s)` lies inside the circle of the first letter of
//! `φ` (or inside `C_s` when `φ` is the identity).
//!
//! Pairings are residue sums over the poles inside one circle. Around the
//! circle's centre `c`, with `u = z − c`, the poles inside give
//! `Σ_n M_n u^{-n-1}` (`M_n = Σ r_t (p_t − c)^n`) and the poles outside give
//! `Σ_n P_n u^n` (`P_n = −Σ r_t (p_t − c)^{-n-1}`). Since `M_n` has y-valuation
//! at least `n`, the residue of a product of two such forms against a
//! polynomial in `u` is a finite sum of products of moments.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::presentation::{HomPoint, SymbolicPresentation};
use crate::rational::RationalCoefficient;
use crate::series::{RingRef, YSeries};
use crate::word::{enumerate_coset_reps, GroupWord};

#[derive(Clone, Debug)]
pub struct PoleDatum {
    pub word: GroupWord,
    /// Signed index `±m` of the fixed point `x_{±m}` that `word` moves.
    pub base: i32,
    pub location: HomPoint,
    /// `+1` when `base > 0`, `−1` otherwise.
    pub residue: i8,
}

impl PoleDatum {
    /// Signed index of the circle containing this pole.
    pub fn enclosing_circle(&self) -> i32 {
        match self.word.first() {
            Some(l) => l as i32,
            None => self.base,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DifferentialForm {
    pub index: usize,
    pub poles: Vec<PoleDatum>,
    pub word_bound: usize,
    pub truncation: i32,
}

/// `ζ_{i,j}(γ_l) = δ_{il} (z − x_i)^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ZetaCocycle {
    pub circle: usize,
    pub power: u32,
}

impl std::fmt::Display for ZetaCocycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "zeta[{},{}]", self.circle, self.power)
    }
}

/// Builds `ω_i` from coset representatives of length `<= word_bound`.
pub fn build_omega(pres: &SymbolicPresentation, i: usize, word_bound: usize) -> Result<DifferentialForm> {
    let g = pres.genus();
    if i == 0 || i > g {
        return Err(Error::Input(format!("differential index {i} outside 1..={g}")));
    }
    let reps = enumerate_coset_reps(g, i, word_bound);
    let mut poles = Vec::with_capacity(2 * reps.len());
    for s in [i as i32, -(i as i32)] {
        let images = pres.images_of_fixed_point(&reps, s)?;
        for w in &reps {
            poles.push(PoleDatum {
                word: w.clone(),
                base: s,
                location: images[w].clone(),
                residue: if s > 0 { 1 } else { -1 },
            });
        }
    }
    // order poles by representative, + before −
    poles.sort_by(|a, b| {
        let ka = reps.iter().position(|w| *w == a.word);
        let kb = reps.iter().position(|w| *w == b.word);
        ka.cmp(&kb).then(b.base.cmp(&a.base))
    });
    Ok(DifferentialForm { index: i, poles, word_bound, truncation: pres.truncation() })
}

/// `{ω_l² (1 ≤ l ≤ g), ω_1ω_l (2 ≤ l ≤ g), ω_2ω_l (3 ≤ l ≤ g)}` in that order.
pub fn omega2_basis(g: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (1..=g).map(|l| (l, l)).collect();
    out.extend((2..=g).map(|l| (1, l)));
    out.extend((3..=g).map(|l| (2, l)));
    out
}

/// `ζ_{1,1}, ζ_{2,1}, ζ_{2,2}`, then `ζ_{i,0}, ζ_{i,1}, ζ_{i,2}` for `3 ≤ i ≤ g`.
pub fn lambda_columns(g: usize) -> Vec<ZetaCocycle> {
    let mut out = vec![
        ZetaCocycle { circle: 1, power: 1 },
        ZetaCocycle { circle: 2, power: 1 },
        ZetaCocycle { circle: 2, power: 2 },
    ];
    for i in 3..=g {
        for power in 0..=2 {
            out.push(ZetaCocycle { circle: i, power });
        }
    }
    out
}

/// Laurent data of one differential around one circle.
#[derive(Clone, Debug)]
pub struct CircleExpansion {
    pub circle: i32,
    /// `M_0..=M_N` from poles inside the circle.
    pub inside: Vec<YSeries>,
    /// `P_0..=P_N` from poles outside.
    pub outside: Vec<YSeries>,
}

fn residue_coefficient(ring: &RingRef, r: i8) -> RationalCoefficient {
    RationalCoefficient::from_int(ring.nvars(), r as i64)
}

/// Moments of `form` around the centre `x_s` of circle `C_s`.
pub fn circle_expansion(pres: &SymbolicPresentation, form: &DifferentialForm, s: i32) -> Result<CircleExpansion> {
    let ring = pres.ring().clone();
    let n = pres.truncation().max(0) as usize;
    let centre = pres.fixed_point(s);
    if centre.is_infinity() {
        return Err(Error::Input(format!("circle {s} is centred at infinity")));
    }
    let xs = centre.affine()?;
    let contributions: Vec<Result<(bool, Vec<YSeries>)>> = form
        .poles
        .par_iter()
        .map(|p| -> Result<(bool, Vec<YSeries>)> {
            let c = residue_coefficient(&ring, p.residue);
            let loc = &p.location;
            if p.enclosing_circle() == s {
                // d = p − x_s, small
                let d = loc.num.try_sub(&xs.try_mul(&loc.den)?)?.try_mul(&loc.den.try_inv()?)?;
                let mut pw = YSeries::constant(&ring, c);
                let mut out = Vec::with_capacity(n + 1);
                for _ in 0..=n {
                    out.push(pw.clone());
                    pw = pw.try_mul(&d)?;
                }
                Ok((true, out))
            } else {
                if loc.is_infinity() {
                    return Ok((false, Vec::new()));
                }
                let diff = loc.num.try_sub(&xs.try_mul(&loc.den)?)?;
                if diff.valuation() != Some(0) {
                    return Err(Error::Pipeline(format!(
                        "pole {}(x[{}]) is not separated from circle {s}",
                        p.word, p.base
                    )));
                }
                let e_inv = loc.den.try_mul(&diff.try_inv()?)?;
                let mut pw = e_inv.scale(&c.neg());
                let mut out = Vec::with_capacity(n + 1);
                for _ in 0..=n {
                    out.push(pw.clone());
                    pw = pw.try_mul(&e_inv)?;
                }
                Ok((false, out))
            }
        })
        .collect();
    let mut ins: Vec<Vec<YSeries>> = vec![Vec::new(); n + 1];
    let mut outs: Vec<Vec<YSeries>> = vec![Vec::new(); n + 1];
    for r in contributions {
        let (inside, v) = r?;
        let target = if inside { &mut ins } else { &mut outs };
        for (k, s) in v.into_iter().enumerate() {
            target[k].push(s);
        }
    }
    let sum_all = |v: &Vec<Vec<YSeries>>| -> Result<Vec<YSeries>> {
        v.iter().map(|parts| YSeries::sum(&ring, parts.iter())).collect()
    };
    Ok(CircleExpansion { circle: s, inside: sum_all(&ins)?, outside: sum_all(&outs)? })
}

/// Residue inside the circle of `ω_a ω_b f(u)`, `f = Σ f_k u^k`.
pub fn cluster_residue(
    ring: &RingRef,
    a: &CircleExpansion,
    b: &CircleExpansion,
    f: &[YSeries],
) -> Result<YSeries> {
    let g = cluster_moments(ring, a, b, f.len().saturating_sub(1))?;
    combine_moments(ring, &g, f)
}

/// `G_k`, the residue of `u^k ω_a ω_b` on the annulus, for `k ≤ kmax`.
pub fn cluster_moments(ring: &RingRef, a: &CircleExpansion, b: &CircleExpansion, kmax: usize) -> Result<Vec<YSeries>> {
    let n = a.inside.len() - 1;
    (0..=kmax)
        .map(|k| {
            let mut inner = Vec::new();
            for x in 0..k {
                let y = k - 1 - x;
                if x <= n && y <= n {
                    inner.push(a.inside[x].try_mul(&b.inside[y])?);
                }
            }
            for m in 0..=n {
                if m + k > n {
                    break;
                }
                inner.push(a.inside[m + k].try_mul(&b.outside[m])?);
                inner.push(a.outside[m].try_mul(&b.inside[m + k])?);
            }
            YSeries::sum(ring, inner.iter())
        })
        .collect()
}

/// `Σ_k f_k G_k`.
pub fn combine_moments(ring: &RingRef, g: &[YSeries], f: &[YSeries]) -> Result<YSeries> {
    let mut parts = Vec::new();
    for (fk, gk) in f.iter().zip(g) {
        if !fk.is_zero() {
            parts.push(gk.try_mul(fk)?);
        }
    }
    YSeries::sum(ring, parts.iter())
}

/// Coefficients of `(u + x_s − x_i)^j` in powers of `u`.
pub fn shifted_power(pres: &SymbolicPresentation, s: i32, i: usize, j: u32) -> Result<Vec<YSeries>> {
    let shift = pres.fixed_point(s).affine()?.try_sub(&pres.fixed_point(i as i32).affine()?)?;
    let mut out = Vec::with_capacity(j as usize + 1);
    let mut binom = 1i64;
    for k in 0..=j {
        let pw = shift.try_pow((j - k) as i32)?;
        out.push(pw.scale_int(binom));
        binom = binom * (j - k) as i64 / (k + 1) as i64;
    }
    Ok(out)
}

/// `u^j` as a coefficient list.
fn monomial_power(ring: &RingRef, j: u32) -> Vec<YSeries> {
    let mut f = vec![YSeries::zero(ring); j as usize + 1];
    f[j as usize] = YSeries::one(ring);
    f
}

/// All `ω_1..ω_g` with their expansions around the circles `C_1..C_g`.
pub struct PairingContext<'a> {
    pres: &'a SymbolicPresentation,
    forms: Vec<DifferentialForm>,
    /// `expansions[l-1][i-1]`: `ω_l` around `C_i`.
    expansions: Vec<Vec<CircleExpansion>>,
}

impl<'a> PairingContext<'a> {
    pub fn new(pres: &'a SymbolicPresentation, word_bound: usize) -> Result<Self> {
        let g = pres.genus();
        let forms: Vec<DifferentialForm> =
            (1..=g).map(|i| build_omega(pres, i, word_bound)).collect::<Result<_>>()?;
        let jobs: Vec<(usize, usize)> = (0..g).flat_map(|l| (0..g).map(move |i| (l, i))).collect();
        let flat: Vec<Result<CircleExpansion>> = jobs
            .par_iter()
            .map(|&(l, i)| circle_expansion(pres, &forms[l], i as i32 + 1))
            .collect();
        let mut expansions: Vec<Vec<CircleExpansion>> = vec![Vec::with_capacity(g); g];
        for ((l, _), e) in jobs.into_iter().zip(flat) {
            expansions[l].push(e?);
        }
        Ok(PairingContext { pres, forms, expansions })
    }

    pub fn forms(&self) -> &[DifferentialForm] {
        &self.forms
    }

    /// `Ψ(ω_l ω_m, ζ_{i,j})`: residues of `ω_l ω_m (z − x_i)^j` inside `C_i`.
    pub fn psi(&self, l: usize, m: usize, zeta: ZetaCocycle) -> Result<YSeries> {
        let ring = self.pres.ring();
        let i = zeta.circle;
        cluster_residue(
            ring,
            &self.expansions[l - 1][i - 1],
            &self.expansions[m - 1][i - 1],
            &monomial_power(ring, zeta.power),
        )
    }

    pub fn lambda(&self) -> Result<EichlerMatrix> {
        let g = self.pres.genus();
        if g < 2 {
            return Err(Error::Input("the pairing matrix needs genus at least 2".into()));
        }
        let rows = omega2_basis(g);
        let cols = lambda_columns(g);
        let cells: Vec<(usize, usize)> = (0..rows.len()).flat_map(|r| (0..cols.len()).map(move |c| (r, c))).collect();
        let values: Vec<Result<YSeries>> = cells
            .par_iter()
            .map(|&(r, c)| self.psi(rows[r].0, rows[r].1, cols[c]))
            .collect();
        let mut entries = vec![Vec::with_capacity(cols.len()); rows.len()];
        for ((r, _), v) in cells.into_iter().zip(values) {
            entries[r].push(v?);
        }
        Ok(EichlerMatrix { rows, cols, entries })
    }
}

/// The residue of `ω_l ω_m (z − x_i)^j` summed over the clusters of all `2g`
/// circles, for every `l ≤ m`, `1 ≤ i ≤ g`, `0 ≤ j ≤ 2`.
pub fn global_residue_sums(
    pres: &SymbolicPresentation,
    word_bound: usize,
) -> Result<Vec<((usize, usize, usize, u32), YSeries)>> {
    let g = pres.genus();
    let ring = pres.ring();
    let forms: Vec<DifferentialForm> = (1..=g).map(|i| build_omega(pres, i, word_bound)).collect::<Result<_>>()?;
    let circles: Vec<i32> = (1..=g as i32).flat_map(|i| [i, -i]).collect();
    let mut exp: Vec<Vec<CircleExpansion>> = Vec::with_capacity(g);
    for f in &forms {
        exp.push(circles.iter().map(|&s| circle_expansion(pres, f, s)).collect::<Result<_>>()?);
    }
    let nc = circles.len();
    let pairs: Vec<(usize, usize, usize)> =
        (0..g).flat_map(|l| (l..g).flat_map(move |m| (0..nc).map(move |k| (l, m, k)))).collect();
    let moments: Vec<Vec<YSeries>> = pairs
        .par_iter()
        .map(|&(l, m, k)| cluster_moments(ring, &exp[l][k], &exp[m][k], 2))
        .collect::<Result<_>>()?;
    // global residues of z^k ω_l ω_m, with z^k = Σ C(k,t) x_s^(k−t) u^t around C_s
    let centres: Vec<YSeries> = circles.iter().map(|&s| pres.fixed_point(s).affine()).collect::<Result<_>>()?;
    let binom = |n: u32, k: u32| -> i64 { (0..k).fold(1i64, |acc, t| acc * (n - t) as i64 / (t + 1) as i64) };
    let mut global: Vec<Vec<YSeries>> = Vec::with_capacity(g * g);
    for l in 0..g {
        for m in l..g {
            let mut t_k = Vec::with_capacity(3);
            for k in 0..=2u32 {
                let mut parts = Vec::with_capacity(nc);
                for s in 0..nc {
                    let idx = pairs.iter().position(|&p| p == (l, m, s)).expect("pair listed");
                    let f: Vec<YSeries> =
                        (0..=k).map(|t| Ok(centres[s].try_pow((k - t) as i32)?.scale_int(binom(k, t)))).collect::<Result<_>>()?;
                    parts.push(combine_moments(ring, &moments[idx], &f)?);
                }
                t_k.push(YSeries::sum(ring, parts.iter())?);
            }
            global.push(t_k);
        }
    }
    let mut out = Vec::new();
    let mut pair = 0;
    for l in 1..=g {
        for m in l..=g {
            for i in 1..=g {
                let minus_xi = centres[2 * (i - 1)].neg();
                for j in 0..=2u32 {
                    // (z − x_i)^j = Σ C(j,k) (−x_i)^(j−k) z^k
                    let f: Vec<YSeries> =
                        (0..=j).map(|k| Ok(minus_xi.try_pow((j - k) as i32)?.scale_int(binom(j, k)))).collect::<Result<_>>()?;
                    out.push(((l, m, i, j), combine_moments(ring, &global[pair], &f)?));
                }
            }
            pair += 1;
        }
    }
    Ok(out)
}

/// Residue sum computed pole by pole from affine pole locations, inverting
/// differences of nearby poles as Laurent series. Needs a presentation whose
/// truncation and valuation bound leave room for the precision this loses.
pub fn psi_direct(
    pres: &SymbolicPresentation,
    forms: &[DifferentialForm],
    l: usize,
    m: usize,
    zeta: ZetaCocycle,
) -> Result<YSeries> {
    let ring = pres.ring().clone();
    let xi = pres.fixed_point(zeta.circle as i32).affine()?;
    let affine = |f: &DifferentialForm| -> Result<Vec<(i8, i32, Option<YSeries>)>> {
        f.poles
            .iter()
            .map(|p| {
                let loc = if p.location.is_infinity() { None } else { Some(p.location.affine()?) };
                Ok((p.residue, p.enclosing_circle(), loc))
            })
            .collect()
    };
    let pl = affine(&forms[l - 1])?;
    let pm = affine(&forms[m - 1])?;
    let j = zeta.power as i32;
    let target = zeta.circle as i32;
    // Σ_t r_t / (p − p_t), skipping index `skip`
    let value_at = |p: &YSeries, poles: &[(i8, i32, Option<YSeries>)], skip: Option<usize>| -> Result<YSeries> {
        let mut parts = Vec::with_capacity(poles.len());
        for (k, (r, _, q)) in poles.iter().enumerate() {
            if Some(k) == skip {
                continue;
            }
            if let Some(q) = q {
                parts.push(p.try_sub(q)?.try_inv()?.scale_int(*r as i64));
            }
        }
        YSeries::sum(&ring, parts.iter())
    };
    let mut parts = Vec::new();
    if l == m {
        for (s, (r, circle, p)) in pl.iter().enumerate() {
            let Some(p) = p else { continue };
            if *circle != target {
                continue;
            }
            let du = p.try_sub(&xi)?;
            let other = value_at(p, &pl, Some(s))?;
            parts.push(other.try_mul(&du.try_pow(j)?)?.scale_int(2 * *r as i64));
            if j > 0 {
                parts.push(du.try_pow(j - 1)?.scale_int(j as i64));
            }
        }
    } else {
        for (own, other) in [(&pl, &pm), (&pm, &pl)] {
            for (r, circle, p) in own.iter() {
                let Some(p) = p else { continue };
                if *circle != target {
                    continue;
                }
                let du = p.try_sub(&xi)?;
                parts.push(value_at(p, other, None)?.try_mul(&du.try_pow(j)?)?.scale_int(*r as i64));
            }
        }
    }
    YSeries::sum(&ring, parts.iter())
}

/// The matrix `Λ` of pairings between the quadratic differentials `ω_l ω_m`
/// and the cocycles `ζ_{i,j}`.
#[derive(Clone, Debug)]
pub struct EichlerMatrix {
    pub rows: Vec<(usize, usize)>,
    pub cols: Vec<ZetaCocycle>,
    pub entries: Vec<Vec<YSeries>>,
}

impl EichlerMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row_label(&self, r: usize) -> String {
        let (l, m) = self.rows[r];
        if l == m {
            format!("omega[{l}]^2")
        } else {
            format!("omega[{l}]*omega[{m}]")
        }
    }

    pub fn det(&self) -> Result<YSeries> {
        det(&self.entries)
    }
}

/// Determinant by Laplace expansion along rows, memoized over column subsets
/// (no divisions).
pub fn det(m: &[Vec<YSeries>]) -> Result<YSeries> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Input("empty matrix".into()));
    }
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Input("matrix is not square".into()));
    }
    if n > 20 {
        return Err(Error::Input("matrix too large for subset expansion".into()));
    }
    let ring = m[0][0].ring().clone();
    // minors[mask] = det of rows 0..popcount(mask) against the columns in mask
    let mut minors: Vec<Option<YSeries>> = vec![None; 1 << n];
    minors[0] = Some(YSeries::one(&ring));
    for size in 1..=n {
        let row = size - 1;
        let masks: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() as usize == size).collect();
        let computed: Vec<(usize, Result<YSeries>)> = masks
            .par_iter()
            .map(|&mask| {
                let mut parts = Vec::with_capacity(size);
                let mut sign_pos = 0;
                for c in 0..n {
                    if mask & (1 << c) == 0 {
                        continue;
                    }
                    let sub = minors[mask & !(1 << c)].as_ref().unwrap();
                    // sign from the position of c among the chosen columns
                    let sign = if (size - 1 - sign_pos) % 2 == 0 { 1 } else { -1 };
                    sign_pos += 1;
                    if sub.is_zero() || m[row][c].is_zero() {
                        continue;
                    }
                    match m[row][c].try_mul(sub) {
                        Ok(t) => parts.push(t.scale_int(sign)),
                        Err(e) => return (mask, Err(e)),
                    }
                }
                (mask, YSeries::sum(&ring, parts.iter()))
            })
            .collect();
        for (mask, v) in computed {
            minors[mask] = Some(v?);
        }
    }
    Ok(minors[(1 << n) - 1].take().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_and_columns() {
        assert_eq!(omega2_basis(2), vec![(1, 1), (2, 2), (1, 2)]);
        assert_eq!(omega2_basis(3).len(), 6);
        assert_eq!(
            omega2_basis(4),
            vec![(1, 1), (2, 2), (3, 3), (4, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4)]
        );
        assert_eq!(lambda_columns(3).len(), 6);
    }

    #[test]
    fn omega_pole_count_and_rule() {
        let p = SymbolicPresentation::general(2, 1);
        let w = build_omega(&p, 1, 1).unwrap();
        assert_eq!(w.poles.len(), 6);
        assert_eq!(w.poles[0].enclosing_circle(), 1);
        assert_eq!(w.poles[1].enclosing_circle(), -1);
        let total: i32 = w.poles.iter().map(|p| p.residue as i32).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn diagonal_pairing_is_one_mod_ideal() {
        let p = SymbolicPresentation::general(2, 1);
        let ctx = PairingContext::new(&p, 1).unwrap();
        for i in 1..=2 {
            let v = ctx.psi(i, i, ZetaCocycle { circle: i, power: 1 }).unwrap();
            assert_eq!(v.leading_part_mod_ideal(1), YSeries::one(p.ring()));
        }
    }
}
