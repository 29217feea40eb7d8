//! Floating-point evaluation on concrete Schottky groups.
//!
//! Everything is generic over the real type, so the same code runs in double
//! precision (`f64`) and in double-double precision (`twofloat::TwoFloat`).
//! Pairings are contour integrals over the circles `C_i`, computed with the
//! trapezoidal rule.

use std::fmt::Debug;

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rayon::prelude::*;

use crate::differentials::{lambda_columns, omega2_basis, ZetaCocycle};
use crate::error::{Error, Result};
use crate::mumford::assemble_mu2;
use crate::presentation::SymbolicPresentation;
use crate::products::d_k;
use crate::series::YSeries;
use crate::word::{enumerate_coset_reps, enumerate_primitive_classes, enumerate_reduced_words, GroupWord};

pub trait Real: Float + FloatConst + Send + Sync + Debug + 'static {}
impl<T: Float + FloatConst + Send + Sync + Debug + 'static> Real for T {}

pub type C<T> = Complex<T>;

fn re<T: Real>(v: f64) -> T {
    T::from(v).expect("representable constant")
}

fn cx<T: Real>(re_: f64, im: f64) -> C<T> {
    Complex::new(re(re_), re(im))
}

/// Distance below which a sample point counts as sitting on a pole.
pub const NEAR_POLE: f64 = 1e-8;
/// Largest multiplier modulus accepted by the comparison policy.
pub const MAX_MULTIPLIER: f64 = 1e-2;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NumPoint<T> {
    Finite(C<T>),
    Infinity,
}

impl<T: Real> NumPoint<T> {
    fn homogeneous(&self) -> (C<T>, C<T>) {
        match *self {
            NumPoint::Finite(z) => (z, C::new(T::one(), T::zero())),
            NumPoint::Infinity => (C::new(T::one(), T::zero()), C::new(T::zero(), T::zero())),
        }
    }

    fn from_homogeneous(num: C<T>, den: C<T>) -> Self {
        if den.norm() <= num.norm() * T::epsilon() * re(16.0) {
            NumPoint::Infinity
        } else {
            NumPoint::Finite(num / den)
        }
    }

    pub fn finite(&self) -> Option<C<T>> {
        match *self {
            NumPoint::Finite(z) => Some(z),
            NumPoint::Infinity => None,
        }
    }
}

/// `[[a, b], [c, d]]`
pub type Mat<T> = [C<T>; 4];

fn mat_mul<T: Real>(x: &Mat<T>, y: &Mat<T>) -> Mat<T> {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

/// A circle, or with `exterior` the disc `|z − centre| > radius` around `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle<T> {
    pub centre: C<T>,
    pub radius: T,
    pub exterior: bool,
}

impl<T: Real> Circle<T> {
    /// Whether `p` lies in the disc bounded by this circle.
    pub fn contains(&self, p: &NumPoint<T>) -> bool {
        match p {
            NumPoint::Infinity => self.exterior,
            NumPoint::Finite(z) => ((*z - self.centre).norm() < self.radius) != self.exterior,
        }
    }

    fn disjoint(&self, o: &Self) -> bool {
        let d = (self.centre - o.centre).norm();
        match (self.exterior, o.exterior) {
            (false, false) => d > self.radius + o.radius,
            (false, true) => d + self.radius < o.radius,
            (true, false) => d + o.radius < self.radius,
            (true, true) => false,
        }
    }
}

/// A marked Schottky group given by fixed points and multipliers.
#[derive(Clone, Debug)]
pub struct NumericSchottkyGroup<T> {
    attracting: Vec<NumPoint<T>>,
    repelling: Vec<NumPoint<T>>,
    multipliers: Vec<C<T>>,
    gens: Vec<Mat<T>>,
    inv_gens: Vec<Mat<T>>,
}

/// Multiplier of a loxodromic matrix with determinant `det`, without any
/// word-level simplification.
pub fn matrix_multiplier<T: Real>(m: &Mat<T>, det: C<T>) -> Result<C<T>> {
    let tr = m[0] + m[3];
    let disc = (tr * tr - det * re::<T>(4.0)).sqrt();
    let two: T = re(2.0);
    let l1 = (tr + disc) / two;
    let l2 = (tr - disc) / two;
    let big = if l1.norm() >= l2.norm() { l1 } else { l2 };
    let q = det / (big * big);
    if (T::one() - q.norm()).abs() < re(1e-12) {
        return Err(Error::Degenerate("matrix is not loxodromic".into()));
    }
    Ok(q)
}

impl<T: Real> NumericSchottkyGroup<T> {
    pub fn new(attracting: Vec<NumPoint<T>>, repelling: Vec<NumPoint<T>>, multipliers: Vec<C<T>>) -> Result<Self> {
        let g = multipliers.len();
        if attracting.len() != g || repelling.len() != g || g == 0 {
            return Err(Error::Input("group needs one attracting point, repelling point and multiplier per generator".into()));
        }
        let mut gens = Vec::with_capacity(g);
        for i in 0..g {
            let q = multipliers[i];
            if q.norm() >= T::one() || q.norm() == T::zero() {
                return Err(Error::Input(format!("multiplier {} must satisfy 0 < |q| < 1", i + 1)));
            }
            if attracting[i] == repelling[i] {
                return Err(Error::Input(format!("generator {} has coinciding fixed points", i + 1)));
            }
            let (an, ad) = attracting[i].homogeneous();
            let (bn, bd) = repelling[i].homogeneous();
            let one = C::new(T::one(), T::zero());
            gens.push([
                an * bd - q * ad * bn,
                -(an * bn) * (one - q),
                ad * bd * (one - q),
                q * an * bd - ad * bn,
            ]);
        }
        let inv_gens = gens.iter().map(|m| [m[3], -m[1], -m[2], m[0]]).collect();
        Ok(NumericSchottkyGroup { attracting, repelling, multipliers, gens, inv_gens })
    }

    /// Fixed points `0, ∞, 1, −1` with multipliers `10^{-3}` and `2·10^{-3}`.
    pub fn reference() -> Self {
        Self::new(
            vec![NumPoint::Finite(cx(0.0, 0.0)), NumPoint::Finite(cx(1.0, 0.0))],
            vec![NumPoint::Infinity, NumPoint::Finite(cx(-1.0, 0.0))],
            vec![cx(1e-3, 0.0), cx(2e-3, 0.0)],
        )
        .expect("reference group")
    }

    pub fn genus(&self) -> usize {
        self.multipliers.len()
    }

    pub fn multipliers(&self) -> &[C<T>] {
        &self.multipliers
    }

    /// `x_s`: attracting point for `s > 0`, repelling for `s < 0`.
    pub fn fixed_point(&self, s: i32) -> NumPoint<T> {
        let i = s.unsigned_abs() as usize - 1;
        if s > 0 {
            self.attracting[i]
        } else {
            self.repelling[i]
        }
    }

    /// `x_1 = 0`, `x_{-1} = ∞` and (for `g ≥ 2`) `x_2 = 1`.
    pub fn is_normalized(&self) -> bool {
        let zero = NumPoint::Finite(C::new(T::zero(), T::zero()));
        let one = NumPoint::Finite(C::new(T::one(), T::zero()));
        self.attracting[0] == zero
            && self.repelling[0] == NumPoint::Infinity
            && (self.genus() < 2 || self.attracting[1] == one)
    }

    fn letter(&self, l: i8) -> &Mat<T> {
        let i = l.unsigned_abs() as usize - 1;
        if l > 0 {
            &self.gens[i]
        } else {
            &self.inv_gens[i]
        }
    }

    pub fn word_matrix(&self, w: &GroupWord) -> Mat<T> {
        let one = C::new(T::one(), T::zero());
        let zero = C::new(T::zero(), T::zero());
        w.letters().iter().fold([one, zero, zero, one], |acc, &l| mat_mul(&acc, self.letter(l)))
    }

    /// Product of the letter determinants, which avoids the cancellation in
    /// `ad − bc` of a long word.
    pub fn word_det(&self, w: &GroupWord) -> C<T> {
        let one = C::new(T::one(), T::zero());
        w.letters().iter().fold(one, |acc, &l| {
            let m = self.letter(l);
            acc * (m[0] * m[3] - m[1] * m[2])
        })
    }

    pub fn apply(&self, w: &GroupWord, p: NumPoint<T>) -> NumPoint<T> {
        let m = self.word_matrix(w);
        let (n, d) = p.homogeneous();
        NumPoint::from_homogeneous(m[0] * n + m[1] * d, m[2] * n + m[3] * d)
    }

    /// Multiplier of a non-trivial element: the eigenvalue ratio of modulus
    /// below one, taken from the cyclically reduced core of `w`.
    pub fn multiplier(&self, w: &GroupWord) -> Result<C<T>> {
        let (_, core) = w.cyclic_reduce();
        if core.is_empty() {
            return Err(Error::Input("the identity has no multiplier".into()));
        }
        matrix_multiplier(&self.word_matrix(&core), self.word_det(&core)).map_err(|_| Error::Degenerate(format!("element {w} is not loxodromic")))
    }

    /// Circles `C_1, C_{-1}, …, C_g, C_{-g}`: isometric circles, or concentric
    /// circles of radii `√|q|` and `1/√|q|` when a generator fixes `∞`.
    pub fn circles(&self) -> Vec<Circle<T>> {
        let mut out = Vec::with_capacity(2 * self.genus());
        for i in 0..self.genus() {
            let m = &self.gens[i];
            let det = m[0] * m[3] - m[1] * m[2];
            let rq = self.multipliers[i].norm().sqrt();
            match (self.attracting[i], self.repelling[i]) {
                (NumPoint::Finite(a), NumPoint::Infinity) => {
                    out.push(Circle { centre: a, radius: rq, exterior: false });
                    out.push(Circle { centre: a, radius: T::one() / rq, exterior: true });
                }
                (NumPoint::Infinity, NumPoint::Finite(b)) => {
                    out.push(Circle { centre: b, radius: T::one() / rq, exterior: true });
                    out.push(Circle { centre: b, radius: rq, exterior: false });
                }
                _ => {
                    let r = det.norm().sqrt() / m[2].norm();
                    out.push(Circle { centre: m[0] / m[2], radius: r, exterior: false });
                    out.push(Circle { centre: -m[3] / m[2], radius: r, exterior: false });
                }
            }
        }
        out
    }

    /// Circle `C_s`.
    pub fn circle(&self, s: i32) -> Circle<T> {
        let i = s.unsigned_abs() as usize - 1;
        self.circles()[2 * i + usize::from(s < 0)]
    }

    /// Checks that the circles are disjoint and enclose the matching fixed points.
    pub fn validate_circles(&self) -> Result<()> {
        let circles = self.circles();
        for a in 0..circles.len() {
            for b in a + 1..circles.len() {
                if !circles[a].disjoint(&circles[b]) {
                    return Err(Error::Input(format!("circles {a} and {b} of the Schottky configuration intersect")));
                }
            }
        }
        for i in 1..=self.genus() as i32 {
            for s in [i, -i] {
                if !self.circle(s).contains(&self.fixed_point(s)) {
                    return Err(Error::Input(format!("fixed point x[{s}] lies outside its circle")));
                }
            }
        }
        Ok(())
    }

    /// Rejects groups outside the small-multiplier regime.
    pub fn check_policy(&self, bound: f64) -> Result<()> {
        let worst = self.multipliers.iter().map(|q| q.norm().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        if worst > bound {
            return Err(Error::Policy(format!("max |q| = {worst:e} exceeds {bound:e}")));
        }
        Ok(())
    }
}

/// Finite poles `(location, residue)` of a truncated `ω_i`.
#[derive(Clone, Debug)]
pub struct NumericForm<T> {
    pub index: usize,
    pub poles: Vec<(C<T>, T)>,
}

pub fn numeric_form<T: Real>(group: &NumericSchottkyGroup<T>, i: usize, word_bound: usize) -> NumericForm<T> {
    let reps = enumerate_coset_reps(group.genus(), i, word_bound);
    let mut poles = Vec::with_capacity(2 * reps.len());
    for w in &reps {
        for (s, r) in [(i as i32, T::one()), (-(i as i32), -T::one())] {
            if let NumPoint::Finite(p) = group.apply(w, group.fixed_point(s)) {
                poles.push((p, r));
            }
        }
    }
    NumericForm { index: i, poles }
}

/// `ω_i(z)` as a partial Poincaré sum.
pub fn numeric_omega<T: Real>(form: &NumericForm<T>, z: C<T>) -> Result<C<T>> {
    let tol: T = re(NEAR_POLE);
    let mut acc = C::new(T::zero(), T::zero());
    for &(p, r) in &form.poles {
        let d = z - p;
        if d.norm() < tol {
            return Err(Error::NearPole(format!("{:?} (omega[{}])", to_c64(z), form.index)));
        }
        acc = acc + C::new(r, T::zero()) / d;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Power of two, at least 256.
    pub nodes: usize,
    pub word_bound: usize,
    pub class_bound: usize,
    pub tolerance: f64,
    /// Largest accepted change when the node count is halved.
    pub doubling_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 2048, word_bound: 4, class_bound: 6, tolerance: 1e-6, doubling_tolerance: 1e-10 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 256 || !self.nodes.is_power_of_two() {
            return Err(Error::Config(format!("node count {} must be a power of two >= 256", self.nodes)));
        }
        if self.tolerance <= f64::EPSILON {
            return Err(Error::Config("comparison tolerance must exceed machine epsilon".into()));
        }
        Ok(())
    }
}

/// A trapezoid-rule contour integral.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: C<T>,
    /// The same rule on every other node.
    pub half: C<T>,
    /// Mean modulus of the weighted integrand.
    pub magnitude: T,
}

impl<T: Real> Quadrature<T> {
    /// Change under node doubling, relative to the larger of the value and
    /// the integrand magnitude.
    pub fn doubling_change(&self) -> f64 {
        let scale = self.value.norm().max(self.magnitude);
        if scale == T::zero() {
            return 0.0;
        }
        ((self.value - self.half).norm() / scale).to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `(1/2πi) ∮_{C} f(z) dz` with `n` trapezoid nodes.
pub fn circle_integral<T: Real>(
    circle: &Circle<T>,
    n: usize,
    f: impl Fn(C<T>) -> Result<C<T>>,
) -> Result<Quadrature<T>> {
    if circle.exterior {
        return Err(Error::Input("contour around infinity is not supported".into()));
    }
    let mut full = C::new(T::zero(), T::zero());
    let mut half = C::new(T::zero(), T::zero());
    let mut l1 = T::zero();
    let step = T::TAU() / T::from(n).unwrap();
    for k in 0..n {
        let (s, c) = (step * T::from(k).unwrap()).sin_cos();
        let u = C::new(c, s) * circle.radius;
        let v = f(circle.centre + u)? * u;
        full = full + v;
        l1 = l1 + v.norm();
        if k % 2 == 0 {
            half = half + v;
        }
    }
    let nn = T::from(n).unwrap();
    Ok(Quadrature { value: full / nn, half: half / T::from(n / 2).unwrap(), magnitude: l1 / nn })
}

/// `Ψ(ω_l ω_m, ζ_{i,j})` by quadrature over `C_i`.
pub fn numeric_psi<T: Real>(
    group: &NumericSchottkyGroup<T>,
    forms: &[NumericForm<T>],
    l: usize,
    m: usize,
    zeta: ZetaCocycle,
    spec: &QuadratureSpec,
) -> Result<C<T>> {
    let i = zeta.circle;
    let xi = group
        .fixed_point(i as i32)
        .finite()
        .ok_or_else(|| Error::Input(format!("x[{i}] is at infinity")))?;
    let circle = group.circle(i as i32);
    let quad = circle_integral(&circle, spec.nodes, |z| {
        Ok(numeric_omega(&forms[l - 1], z)? * numeric_omega(&forms[m - 1], z)? * (z - xi).powu(zeta.power))
    })?;
    let change = quad.doubling_change();
    if change > spec.doubling_tolerance {
        return Err(Error::Resolution(format!(
            "quadrature for omega[{l}]*omega[{m}] against {zeta} moved by {change:e} under node doubling"
        )));
    }
    Ok(quad.value)
}

/// Numeric `Λ` in the same row and column order as the symbolic matrix.
pub fn numeric_lambda<T: Real>(group: &NumericSchottkyGroup<T>, spec: &QuadratureSpec) -> Result<Vec<Vec<C<T>>>> {
    let g = group.genus();
    let forms: Vec<NumericForm<T>> = (1..=g).map(|i| numeric_form(group, i, spec.word_bound)).collect();
    let rows = omega2_basis(g);
    let cols = lambda_columns(g);
    rows.par_iter()
        .map(|&(l, m)| cols.iter().map(|&z| numeric_psi(group, &forms, l, m, z, spec)).collect())
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn complex_det<T: Real>(m: &[Vec<C<T>>]) -> C<T> {
    let n = m.len();
    let mut a: Vec<Vec<C<T>>> = m.to_vec();
    let mut det = C::new(T::one(), T::zero());
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[x][k].norm().partial_cmp(&a[y][k].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if a[p][k].norm() == T::zero() {
            return C::new(T::zero(), T::zero());
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det = det * a[k][k];
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            for c in k..n {
                let t = a[k][c];
                a[r][c] = a[r][c] - f * t;
            }
        }
    }
    det
}

/// `∏_{e ≥ start} (1 − q^e)` until the factors are below working precision.
fn numeric_factor<T: Real>(q: C<T>, start: i32) -> C<T> {
    let one = C::new(T::one(), T::zero());
    let mut acc = one;
    let mut qe = q.powi(start);
    let eps = T::epsilon() * re(1e-3);
    while qe.norm() > eps {
        acc = acc * (one - qe);
        qe = qe * q;
    }
    acc
}

fn numeric_class_product<T: Real>(group: &NumericSchottkyGroup<T>, class_bound: usize, identify: bool, start: i32) -> Result<C<T>> {
    let classes = enumerate_primitive_classes(group.genus(), class_bound, identify);
    let mut acc = C::new(T::one(), T::zero());
    for c in &classes {
        acc = acc * numeric_factor(group.multiplier(&c.word)?, start);
    }
    Ok(acc)
}

pub fn numeric_f1<T: Real>(group: &NumericSchottkyGroup<T>, class_bound: usize, identify: bool) -> Result<C<T>> {
    numeric_class_product(group, class_bound, identify, 1)
}

pub fn numeric_f2<T: Real>(group: &NumericSchottkyGroup<T>, class_bound: usize, identify: bool) -> Result<C<T>> {
    if group.genus() < 2 {
        return Err(Error::Input("F2 needs genus at least 2".into()));
    }
    let one = C::new(T::one(), T::zero());
    let q = group.multipliers();
    let pre = (one - q[0]) * (one - q[0]) * (one - q[1]);
    Ok(pre * numeric_class_product(group, class_bound, identify, 2)?)
}

/// Winding number of `C_s` (counter-clockwise) around `p`.
pub fn winding_number<T: Real>(circle: &Circle<T>, p: C<T>, nodes: usize) -> Result<i64> {
    let plain = Circle { exterior: false, ..*circle };
    let w = circle_integral(&plain, nodes, |z| Ok(C::new(T::one(), T::zero()) / (z - p)))?.value;
    Ok(w.re.round().to_i64().unwrap_or(i64::MAX))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindingReport {
    pub checked: usize,
    /// `(word, base point, predicted circle)` for each disagreement.
    pub mismatches: Vec<(GroupWord, i32, i32)>,
}

/// Checks that every sampled pole lies inside the circle predicted by its first
/// letter and inside no other circle.
pub fn validate_enclosing_circles<T: Real>(
    group: &NumericSchottkyGroup<T>,
    max_len: usize,
    samples: usize,
    nodes: usize,
) -> Result<WindingReport> {
    let g = group.genus();
    let words = enumerate_reduced_words(g, max_len);
    let mut candidates = Vec::new();
    for w in &words {
        for s in (1..=g as i32).flat_map(|i| [i, -i]) {
            if w.last().is_some_and(|l| l.unsigned_abs() as i32 == s.abs()) {
                continue;
            }
            candidates.push((w.clone(), s));
        }
    }
    let stride = (candidates.len() / samples.max(1)).max(1);
    let mut report = WindingReport { checked: 0, mismatches: Vec::new() };
    for (w, s) in candidates.into_iter().step_by(stride).take(samples) {
        let predicted = w.first().map_or(s, |l| l as i32);
        let p = group.apply(&w, group.fixed_point(s));
        let mut ok = true;
        for c in (1..=g as i32).flat_map(|i| [i, -i]) {
            let circle = group.circle(c);
            let inside = match p {
                NumPoint::Infinity => circle.exterior,
                NumPoint::Finite(z) => {
                    let wn = winding_number(&circle, z, nodes)?;
                    (wn == 1) != circle.exterior
                }
            };
            if inside != (c == predicted) {
                ok = false;
            }
        }
        report.checked += 1;
        if !ok {
            report.mismatches.push((w, s, predicted));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonEntry {
    pub name: String,
    pub symbolic: Complex<f64>,
    pub numeric: Complex<f64>,
    pub rel_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub genus: usize,
    pub truncation: i32,
    pub word_bound: usize,
    pub nodes: usize,
    pub tolerance: f64,
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn worst(&self) -> Option<&ComparisonEntry> {
        self.entries.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    }
}

pub fn to_c64<T: Real>(z: C<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// Relative error against the numeric value. Values below `1e-12 · scale`
/// are measured against `scale` instead.
pub fn relative_error<T: Real>(symbolic: C<T>, numeric: C<T>, scale: T) -> f64 {
    let d = (symbolic - numeric).norm();
    let s = numeric.norm();
    let denom = if s < scale * re(1e-12) { scale } else { s };
    let e = if denom == T::zero() { d } else { d / denom };
    e.to_f64().unwrap_or(f64::INFINITY)
}

/// Symbolic presentation matching the group's layout together with the values
/// of its x-variables.
pub fn matching_presentation<T: Real>(
    group: &NumericSchottkyGroup<T>,
    n: i32,
) -> Result<(SymbolicPresentation, Vec<C<T>>)> {
    let g = group.genus();
    if group.is_normalized() {
        let mut x = Vec::new();
        if g >= 2 {
            x.push(group.fixed_point(-2));
        }
        for i in 3..=g as i32 {
            x.push(group.fixed_point(i));
            x.push(group.fixed_point(-i));
        }
        let x = x
            .into_iter()
            .map(|p| p.finite().ok_or_else(|| Error::Input("only x[-1] may sit at infinity".into())))
            .collect::<Result<_>>()?;
        Ok((SymbolicPresentation::normalized(g, n), x))
    } else {
        let x = (1..=g as i32)
            .flat_map(|i| [i, -i])
            .map(|s| {
                group.fixed_point(s).finite().ok_or_else(|| Error::Input("fixed points at infinity need the normalized layout".into()))
            })
            .collect::<Result<_>>()?;
        Ok((SymbolicPresentation::general(g, n), x))
    }
}

/// Compares every `Λ` entry, `det Λ`, `F_1`, `F_2` and the assembled series
/// between quadrature and the specialized symbolic expansion.
pub fn compare_all<T: Real>(
    group: &NumericSchottkyGroup<T>,
    n: i32,
    spec: &QuadratureSpec,
    identify_inverses: bool,
) -> Result<ComparisonReport> {
    spec.validate()?;
    group.check_policy(MAX_MULTIPLIER)?;
    group.validate_circles()?;
    let g = group.genus();
    let (pres, x) = matching_presentation(group, n)?;
    let e = assemble_mu2(&pres, spec.word_bound, identify_inverses)?;
    let y: Vec<C<T>> = group.multipliers().to_vec();
    let special = |s: &YSeries| s.eval(&x, &y);

    let lam = numeric_lambda(group, spec)?;
    let det = complex_det(&lam);
    let f1 = numeric_f1(group, spec.class_bound, identify_inverses)?;
    let f2 = numeric_f2(group, spec.class_bound, identify_inverses)?;
    let mu = det * f1.powi(d_k(2) as i32) / f2;

    let mut entries = Vec::new();
    let mut push = |name: String, s: C<T>, v: C<T>, scale: T| {
        let rel_error = relative_error(s, v, scale);
        entries.push(ComparisonEntry {
            name,
            symbolic: to_c64(s),
            numeric: to_c64(v),
            rel_error,
            passed: rel_error <= spec.tolerance,
        });
    };
    for (r, row) in lam.iter().enumerate() {
        let row_scale = row.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        for (c, v) in row.iter().enumerate() {
            let name = format!("lambda[{}, {}]", e.lambda.row_label(r), e.lambda.cols[c]);
            push(name, special(&e.lambda.entries[r][c])?, *v, row_scale);
        }
    }
    push("det_lambda".into(), special(&e.det_lambda)?, det, det.norm());
    push("f1".into(), special(&e.f1)?, f1, f1.norm());
    push("f2".into(), special(&e.f2)?, f2, f2.norm());
    push("mu2".into(), special(&e.series)?, mu, mu.norm());
    Ok(ComparisonReport { genus: g, truncation: n, word_bound: spec.word_bound, nodes: spec.nodes, tolerance: spec.tolerance, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use twofloat::TwoFloat;

    fn w(v: &[i32]) -> GroupWord {
        GroupWord::reduce(v, 2).unwrap()
    }

    #[test]
    fn generator_multipliers() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        for i in 1..=2 {
            let q = grp.multiplier(&w(&[i])).unwrap();
            assert!((q - grp.multipliers()[i as usize - 1]).norm() < 1e-15);
            let qi = grp.multiplier(&w(&[-i])).unwrap();
            assert!((qi - q).norm() < 1e-15);
        }
    }

    #[test]
    fn fixed_points_are_fixed() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        let p = grp.apply(&w(&[2]), grp.fixed_point(2)).finite().unwrap();
        assert!((p - Complex::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(grp.apply(&w(&[1]), NumPoint::Infinity), NumPoint::Infinity);
    }

    #[test]
    fn reference_circles_are_valid() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        grp.validate_circles().unwrap();
        let report = validate_enclosing_circles(&grp, 3, 200, 512).unwrap();
        assert!(report.mismatches.is_empty(), "{:?}", report.mismatches);
        assert!(report.checked > 50);
    }

    #[test]
    fn residue_of_omega_at_attracting_point() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        let form = numeric_form(&grp, 2, 3);
        let small = Circle { centre: Complex::new(1.0, 0.0), radius: 1e-4, exterior: false };
        let r = circle_integral(&small, 256, |z| numeric_omega(&form, z)).unwrap().value;
        assert!((r - Complex::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn total_residue_vanishes() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        let form = numeric_form(&grp, 2, 3);
        let big = Circle { centre: Complex::new(0.0, 0.0), radius: 10.0, exterior: false };
        let r = circle_integral(&big, 4096, |z| numeric_omega(&form, z)).unwrap().value;
        assert!(r.norm() < 1e-6);
    }

    #[test]
    fn near_pole_is_rejected() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        let form = numeric_form(&grp, 1, 1);
        assert!(matches!(numeric_omega(&form, Complex::new(1e-10, 0.0)), Err(Error::NearPole(_))));
    }

    #[test]
    fn policy_gate() {
        let grp = NumericSchottkyGroup::<f64>::new(
            vec![NumPoint::Finite(cx(0.0, 0.0)), NumPoint::Finite(cx(1.0, 0.0))],
            vec![NumPoint::Infinity, NumPoint::Finite(cx(-1.0, 0.0))],
            vec![cx(0.5, 0.0), cx(2e-3, 0.0)],
        )
        .unwrap();
        assert!(matches!(grp.check_policy(MAX_MULTIPLIER), Err(Error::Policy(_))));
        assert!(matches!(compare_all(&grp, 1, &QuadratureSpec::default(), false), Err(Error::Policy(_))));
    }

    #[test]
    fn diagonal_pairing_is_one_to_leading_order() {
        let grp = NumericSchottkyGroup::<f64>::reference();
        let spec = QuadratureSpec { word_bound: 2, ..Default::default() };
        let forms: Vec<_> = (1..=2).map(|i| numeric_form(&grp, i, 2)).collect();
        let v = numeric_psi(&grp, &forms, 2, 2, ZetaCocycle { circle: 2, power: 1 }, &spec).unwrap();
        assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-2);
    }

    #[test]
    fn double_double_agrees_with_double() {
        let g64 = NumericSchottkyGroup::<f64>::reference();
        let g128 = NumericSchottkyGroup::<TwoFloat>::reference();
        let a = numeric_f1(&g64, 4, false).unwrap();
        let b = numeric_f1(&g128, 4, false).unwrap();
        assert!((a.re - b.re.hi()).abs() < 1e-14);
    }

    #[test]
    fn complex_det_small() {
        let m = vec![vec![cx::<f64>(1.0, 0.0), cx(2.0, 0.0)], vec![cx(3.0, 0.0), cx(4.0, 0.0)]];
        assert!((complex_det(&m) - Complex::new(-2.0, 0.0)).norm() < 1e-14);
    }
}
