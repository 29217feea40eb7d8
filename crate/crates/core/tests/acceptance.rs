//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::collections::HashSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mumford_core::differentials::{global_residue_sums, PairingContext};
use mumford_core::mumford::{assemble_mu2, genus1_delta, verify_leading_term};
use mumford_core::numeric::{compare_all, matrix_multiplier, to_c64};
use mumford_core::presentation::general_index;
use mumford_core::word::{enumerate_primitive_classes, enumerate_reduced_words};
use mumford_core::{
    GroupWord, Int, NumericSchottkyGroup, QuadratureSpec, RationalCoefficient, SymbolicPresentation, YExp, YSeries,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    if e <= limit {
        Ok(e)
    } else {
        Err(format!("took {e:.1?}, limit {limit:?}"))
    }
}

// ---- 1, 2: leading-term table and det(Λ) leading term ----

struct Table {
    n: usize,
}

impl Table {
    fn x(&self, s: i32) -> RationalCoefficient {
        RationalCoefficient::var(self.n, general_index(s))
    }

    fn d(&self, a: i32, b: i32) -> RationalCoefficient {
        self.x(a).sub(&self.x(b))
    }

    /// `(x_b − x_{−b}) / ((x_i − x_b)(x_i − x_{−b}))`
    fn zeta0(&self, i: i32, b: i32) -> RationalCoefficient {
        self.d(b, -b).div(&self.d(i, b).mul(&self.d(i, -b))).unwrap()
    }

    /// `(x_b − x_{−b})(x_i − x_{−i})² / ((x_b − x_{−i})(x_{−b} − x_{−i}))`
    fn zeta2(&self, i: i32, b: i32) -> RationalCoefficient {
        let num = self.d(b, -b).mul(&self.d(i, -i).pow(2).unwrap());
        num.div(&self.d(b, -i).mul(&self.d(-b, -i))).unwrap()
    }
}

/// Expected part of the entry in row `ω_a ω_b`, column `ζ_{i,j}`, with the
/// ideal power it is stated modulo; `None` where the table says nothing.
fn table_entry(t: &Table, pres: &SymbolicPresentation, a: usize, b: usize, i: usize, j: u32) -> Option<(YSeries, i32)> {
    let ring = pres.ring();
    let g = ring.genus();
    let (ai, bi, ii) = (a as i32, b as i32, i as i32);
    let zero = YSeries::zero(ring);
    let y_times = |c: RationalCoefficient| YSeries::monomial(ring, YExp::unit(g, i - 1), c);
    match j {
        1 => Some((if a == b && a == i { YSeries::one(ring) } else { zero }, 1)),
        0 if a != b => {
            let v = if b == i { YSeries::constant(ring, t.zeta0(ii, ai)) } else { zero };
            Some((v, 1))
        }
        2 if a != b => {
            let v = if a == 2 && i == 2 {
                y_times(t.zeta2(2, bi))
            } else if b == i {
                y_times(t.zeta2(ii, ai))
            } else {
                zero
            };
            Some((v, 2))
        }
        _ => None,
    }
}

fn leading_table_and_det(g: usize) -> Result<(usize, bool, Duration), String> {
    let t0 = Instant::now();
    let pres = SymbolicPresentation::general(g, 2);
    let ctx = PairingContext::new(&pres, 2).map_err(|e| e.to_string())?;
    let lam = ctx.lambda().map_err(|e| e.to_string())?;
    let t = Table { n: pres.ring().nvars() };
    let mut checked = 0;
    for (r, &(a, b)) in lam.rows.iter().enumerate() {
        for (c, z) in lam.cols.iter().enumerate() {
            if let Some((expected, k)) = table_entry(&t, &pres, a, b, z.circle, z.power) {
                let got = lam.entries[r][c].leading_part_mod_ideal(k);
                if got != expected {
                    return Err(format!(
                        "g={g}: {} vs zeta[{},{}] mod I^{k}: got {got}, expected {expected}",
                        lam.row_label(r),
                        z.circle,
                        z.power
                    ));
                }
                checked += 1;
            }
        }
    }
    let elapsed = t0.elapsed();
    let det = lam.det().map_err(|e| e.to_string())?;
    let lead = verify_leading_term(&pres, &det).map_err(|e| e.to_string())?;
    Ok((checked, lead.passed(), elapsed))
}

// ---- 3: global residue sums ----

fn residues() -> Outcome {
    let mut details = Vec::new();
    for (g, pres) in [(2, SymbolicPresentation::general(2, 3)), (3, SymbolicPresentation::pinned(3, 3, [0, 1, -1]))] {
        let t0 = Instant::now();
        let sums = global_residue_sums(&pres, 3).map_err(|e| e.to_string())?;
        let expected = g * (g + 1) / 2 * g * 3;
        if sums.len() != expected {
            return Err(format!("g={g}: {} sums, expected {expected}", sums.len()));
        }
        if let Some(((l, m, i, j), s)) = sums.iter().find(|(_, s)| !s.is_zero()) {
            return Err(format!("g={g}: (l,m,i,j)=({l},{m},{i},{j}) sums to {s}"));
        }
        details.push(format!("g={g}: {} sums zero in {:.1?}", sums.len(), t0.elapsed()));
    }
    Ok(details.join("; "))
}

// ---- 4: primitivity ----

fn primitivity() -> Outcome {
    let pres = SymbolicPresentation::normalized(2, 2);
    let e = assemble_mu2(&pres, 2, false).map_err(|e| e.to_string())?;
    let val = e.series.valuation().unwrap_or(i32::MAX);
    let rep = e.series.content_and_primitivity(&[2, 3, 5]).map_err(|e| e.to_string())?;
    let ok = val >= 0 && rep.integral && rep.content == Int::from(1) && rep.primes.iter().all(|(_, p)| *p);
    check(
        ok,
        format!("valuation {val}, content {}, integral {}, primes {:?}", rep.content, rep.integral, rep.primes),
    )
}

// ---- 5: genus-one Δ ----

fn naive_delta(n: usize) -> Vec<i128> {
    // q ∏ (1 − q^k)^24 by repeated multiplication of dense polynomials
    let mut p = vec![0i128; n + 1];
    p[1] = 1;
    for k in 1..=n {
        for _ in 0..24 {
            for d in (k..=n).rev() {
                p[d] -= p[d - k];
            }
        }
    }
    p[1..].to_vec()
}

fn delta() -> Outcome {
    let t0 = Instant::now();
    let got = genus1_delta(12).map_err(|e| e.to_string())?;
    let elapsed = within(t0, Duration::from_secs(1))?;
    let expected: Vec<Int> = naive_delta(12).into_iter().map(Int::from).collect();
    check(got == expected, format!("q^1..q^12 in {elapsed:.1?}: {:?}", got.iter().map(|c| c.to_string()).collect::<Vec<_>>()))
}

// ---- 6: numeric versus symbolic ----

fn dual_path() -> Outcome {
    let t0 = Instant::now();
    let group = NumericSchottkyGroup::<f64>::reference();
    let spec = QuadratureSpec { nodes: 2048, word_bound: 4, tolerance: 1e-6, ..Default::default() };
    let rep = compare_all(&group, 4, &spec, false).map_err(|e| e.to_string())?;
    let elapsed = within(t0, Duration::from_secs(300))?;
    let worst = rep.worst().map(|w| format!("{} {:.2e}", w.name, w.rel_error)).unwrap_or_default();
    check(rep.passed(), format!("{} entries, worst {worst}, {elapsed:.1?}", rep.entries.len()))
}

// ---- 7: multiplier laws ----

fn random_word(rng: &mut ChaCha8Rng, g: usize, min: usize, max: usize) -> GroupWord {
    loop {
        let len = rng.gen_range(min..=max);
        let letters: Vec<i32> = (0..len)
            .map(|_| {
                let i = rng.gen_range(1..=g as i32);
                if rng.gen_bool(0.5) {
                    i
                } else {
                    -i
                }
            })
            .collect();
        let w = GroupWord::reduce(&letters, g).unwrap();
        if w.len() >= min {
            return w;
        }
    }
}

fn join(parts: &[&GroupWord], g: usize) -> GroupWord {
    let letters: Vec<i32> = parts.iter().flat_map(|w| w.letters().iter().map(|&l| l as i32)).collect();
    GroupWord::reduce(&letters, g).unwrap()
}

/// Conjugates, rotations, inverse and powers of `w` paired with the power of `q_w` they should have.
fn law_cases(rng: &mut ChaCha8Rng, w: &GroupWord, g: usize) -> Vec<(&'static str, GroupWord, i32)> {
    let v = random_word(rng, g, 1, 2);
    let (_, core) = w.cyclic_reduce();
    let k = rng.gen_range(0..core.len());
    vec![
        ("conjugation", join(&[&v, w, &v.inverse()], g), 1),
        ("rotation", core.rotate(k), 1),
        ("inverse", w.inverse(), 1),
        ("square", w.pow(2), 2),
        ("cube", w.pow(3), 3),
    ]
}

fn multiplier_laws() -> Outcome {
    let g = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words: Vec<GroupWord> = (0..50).map(|_| random_word(&mut rng, g, 1, 4)).collect();
    const N: i32 = 6;
    let pres = SymbolicPresentation::normalized(g, N);
    let group = NumericSchottkyGroup::<f64>::reference();
    // uncancelled conjugates are ill-conditioned, so they are evaluated in double-double
    let wide = NumericSchottkyGroup::<TwoFloat>::reference();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for w in &words {
        let qw = pres.multiplier(w).map_err(|e| e.to_string())?;
        let nq = group.multiplier(w).map_err(|e| e.to_string())?;
        for (law, u, p) in law_cases(&mut rng, w, g) {
            // conjugates go through the full word matrix p c p^-1, which carries an
            // extra factor det(p) of y-degree len(p), so they get 2 len(p) orders of headroom
            let qu = if law == "conjugation" {
                let k = (u.len() - u.cyclic_reduce().1.len()) as i32 / 2;
                let wide_pres = SymbolicPresentation::normalized_with_bound(g, N + 2 * k, 2 * (N + 2 * k));
                let m = wide_pres.word_matrix(&u).map_err(|e| e.to_string())?;
                let det = wide_pres.word_det(&u).map_err(|e| e.to_string())?;
                wide_pres.matrix_multiplier(&m, &det).and_then(|q| q.truncate(N))
            } else {
                pres.multiplier(&u)
            }
            .map_err(|e| format!("{law} of {w} -> {u}: {e}"))?;
            let want = qw.try_pow(p).map_err(|e| e.to_string())?;
            if qu != want {
                return Err(format!("{law} fails symbolically for {w} -> {u}"));
            }
            let nu = if law == "conjugation" {
                matrix_multiplier(&wide.word_matrix(&u), wide.word_det(&u)).map(to_c64)
            } else {
                group.multiplier(&u)
            }
            .map_err(|e| e.to_string())?;
            let nwant: Complex64 = nq.powi(p);
            let rel = (nu - nwant).norm() / nwant.norm();
            worst = worst.max(rel);
            if rel > 1e-10 {
                return Err(format!("{law} fails numerically for {w} -> {u}: rel {rel:.2e}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{} words, {cases} law instances, worst numeric rel {worst:.2e}", words.len()))
}

// ---- 8: truncation stability ----

fn truncation_stability() -> Outcome {
    let mut details = Vec::new();
    for n in 1..=3 {
        let lo = assemble_mu2(&SymbolicPresentation::normalized(2, n), n as usize, false).map_err(|e| e.to_string())?;
        let hi =
            assemble_mu2(&SymbolicPresentation::normalized(2, n + 1), n as usize + 1, false).map_err(|e| e.to_string())?;
        let cut = |s: &YSeries| s.truncate(n).map_err(|e| e.to_string());
        let pairs = [("mu", &hi.series, &lo.series), ("det", &hi.det_lambda, &lo.det_lambda), ("f1", &hi.f1, &lo.f1), ("f2", &hi.f2, &lo.f2)];
        for (name, h, l) in pairs {
            if cut(h)? != *l {
                return Err(format!("N={n}: {name} changes"));
            }
        }
        for (r, row) in hi.lambda.entries.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                if cut(e)? != lo.lambda.entries[r][c] {
                    return Err(format!("N={n}: lambda entry ({r},{c}) changes"));
                }
            }
        }
        details.push(format!("N={n}"));
    }
    Ok(format!("{} stable for lambda, det, f1, f2, mu", details.join(", ")))
}

// ---- 9: combinatorics ----

fn all_sequences(g: usize, len: usize) -> Vec<Vec<i8>> {
    let alphabet: Vec<i8> = (1..=g as i8).flat_map(|i| [i, -i]).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|s| alphabet.iter().map(move |&l| [s.clone(), vec![l]].concat())).collect();
    }
    out
}

fn brute_primitive_classes(g: usize, len: usize, identify: bool) -> usize {
    let mut orbits: HashSet<Vec<i8>> = HashSet::new();
    for s in all_sequences(g, len) {
        let cyclic_reduced = (0..len).all(|k| s[(k + 1) % len] != -s[k]);
        // a proper power has a rotation period smaller than its length
        let power = (1..len).any(|d| len % d == 0 && (0..len).all(|k| s[k] == s[(k + d) % len]));
        if !cyclic_reduced || power {
            continue;
        }
        let rotations = |w: &[i8]| -> Vec<Vec<i8>> { (0..len).map(|k| [&w[k..], &w[..k]].concat()).collect() };
        let mut orbit = rotations(&s);
        if identify {
            let inv: Vec<i8> = s.iter().rev().map(|l| -l).collect();
            orbit.extend(rotations(&inv));
        }
        orbits.insert(orbit.into_iter().min().unwrap());
    }
    orbits.len()
}

fn combinatorics() -> Outcome {
    for g in 1..=3 {
        let words = enumerate_reduced_words(g, 5);
        for l in 1..=5usize {
            let count = words.iter().filter(|w| w.len() == l).count();
            let formula = 2 * g * (2 * g - 1).pow(l as u32 - 1);
            let brute = all_sequences(g, l).iter().filter(|s| s.windows(2).all(|p| p[1] != -p[0])).count();
            if count != formula || count != brute {
                return Err(format!("g={g} l={l}: words {count}, formula {formula}, brute force {brute}"));
            }
        }
        for identify in [false, true] {
            let classes = enumerate_primitive_classes(g, 5, identify);
            for l in 1..=5 {
                let count = classes.iter().filter(|c| c.len() == l).count();
                let brute = brute_primitive_classes(g, l, identify);
                if count != brute {
                    return Err(format!("g={g} l={l} identify={identify}: classes {count}, brute force {brute}"));
                }
            }
        }
    }
    Ok("g<=3, l<=5: word counts and primitive classes (both inverse conventions) agree".into())
}

fn leading_table() -> Outcome {
    let mut details = Vec::new();
    for g in [2, 3] {
        let t0 = Instant::now();
        let (checked, _, _) = leading_table_and_det(g)?;
        let limit = if g == 3 { Duration::from_secs(120) } else { Duration::from_secs(60) };
        let elapsed = within(t0, limit)?;
        details.push(format!("g={g}: {checked} entries in {elapsed:.1?}"));
    }
    Ok(details.join("; "))
}

fn det_leading() -> Outcome {
    let mut details = Vec::new();
    for g in [2, 3] {
        let (_, passed, _) = leading_table_and_det(g)?;
        if !passed {
            return Err(format!("g={g}: leading term differs from both signs of the tau product"));
        }
        details.push(format!("g={g} matches"));
    }
    Ok(details.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("leading-term table", leading_table),
        ("det leading term", det_leading),
        ("global residue sums", residues),
        ("primitivity and integrality", primitivity),
        ("genus-one delta", delta),
        ("numeric versus symbolic", dual_path),
        ("multiplier laws", multiplier_laws),
        ("truncation stability", truncation_stability),
        ("word and class counts", combinatorics),
    ];
    let mut out = std::io::stdout();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (tag, detail) = match res {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        writeln!(out, "acceptance {}: {tag} {name} [{:.1?}] {detail}", k + 1, t0.elapsed()).unwrap();
    }
    writeln!(out, "acceptance summary: {} of {} passed", criteria.len() - failed, criteria.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
