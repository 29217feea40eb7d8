//! One function per subcommand. Each returns whether its checks passed.

use std::time::{SystemTime, UNIX_EPOCH};

use mumford_core::differentials::PairingContext;
use mumford_core::io::{write_file, write_matrix, write_series, GroupFile, Report};
use mumford_core::mumford::{
    assemble_mu2, genus1_delta, leading_term_truncation, run_leading_term_check, verify_leading_term,
    LeadingTermReport,
};
use mumford_core::numeric::{compare_all, ComparisonReport, NumericSchottkyGroup, QuadratureSpec, Real};
use mumford_core::products::{mcintyre_takhtajan_f2, zograf_f1};
use mumford_core::{PrimitivityReport, Result, SymbolicPresentation, YSeries};
use twofloat::TwoFloat;

use crate::settings::Settings;
use crate::Command;

pub fn run(command: Command, s: &Settings) -> Result<bool> {
    match command {
        Command::ExpandF1 => expand_product(s, "f1"),
        Command::ExpandF2 => expand_product(s, "f2"),
        Command::ExpandDetLambda => expand_det_lambda(s),
        Command::ExpandMu2 => expand_mu2(s),
        Command::VerifyLeading => verify_leading(s),
        Command::Genus1Delta => delta(s),
        Command::CompareNumeric => compare_numeric(s),
    }
}

fn presentation(s: &Settings, n: i32) -> SymbolicPresentation {
    if s.normalized {
        SymbolicPresentation::normalized(s.genus, n)
    } else {
        SymbolicPresentation::general(s.genus, n)
    }
}

/// Writes an artifact into the output directory, or prints it under `--stdout`.
fn emit(s: &Settings, name: &str, contents: &str) -> Result<()> {
    if s.stdout {
        println!("==> {name} <==");
        print!("{contents}");
        Ok(())
    } else {
        write_file(&s.out.join(name), contents)
    }
}

fn report(command: &str, s: &Settings, n: i32) -> Report {
    let mut r = Report::new();
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    r.timestamp = Some(secs.to_string());
    r.set("parameters", "command", command);
    r.set("parameters", "genus", s.genus);
    r.set("parameters", "truncation", s.trunc);
    r.set("parameters", "effective_truncation", n);
    r.set("parameters", "word_bound", s.wordlen.max(n as usize));
    r.set("parameters", "identify_inverses", s.identify_inverses);
    r.set("parameters", "normalized", s.normalized);
    r
}

fn leading_sections(r: &mut Report, lead: &LeadingTermReport) {
    r.set("det-leading-term", "value", &lead.det_leading);
    r.set("tau-product", "value", &lead.tau_product);
    r.set("sign-match", "plus", lead.plus_matches);
    r.set("sign-match", "minus", lead.minus_matches);
    r.set("sign-match", "matched", lead.matched_sign());
    r.set("sign-match", "result", if lead.passed() { "PASS" } else { "FAIL" });
}

fn primitivity_section(r: &mut Report, p: &PrimitivityReport) -> bool {
    r.set("primitivity", "content", &p.content);
    r.set("primitivity", "integral", p.integral);
    for (prime, ok) in &p.primes {
        r.set("primitivity", &format!("p{prime}"), ok);
    }
    let ok = p.content == mumford_core::Int::from(1) && p.integral && p.primes.iter().all(|(_, ok)| *ok);
    r.set("primitivity", "result", if ok { "PASS" } else { "FAIL" });
    ok
}

fn emit_series(s: &Settings, r: &mut Report, key: &str, series: &YSeries) -> Result<()> {
    let file = format!("{key}.series");
    emit(s, &file, &write_series(series))?;
    r.set("series-files", key, file);
    Ok(())
}

fn expand_product(s: &Settings, which: &str) -> Result<bool> {
    let pres = presentation(s, s.trunc);
    let series = if which == "f1" {
        zograf_f1(&pres, s.identify_inverses)?
    } else {
        mcintyre_takhtajan_f2(&pres, s.identify_inverses)?
    };
    let mut r = report(&format!("expand-{which}"), s, s.trunc);
    let unit = series.constant_term().is_one();
    r.set("checks", "unit", if unit { "PASS" } else { "FAIL" });
    emit_series(s, &mut r, which, &series)?;
    emit(s, &format!("{which}.report"), &r.render())?;
    Ok(unit)
}

fn expand_det_lambda(s: &Settings) -> Result<bool> {
    let n = leading_term_truncation(s.genus, s.trunc);
    let pres = presentation(s, n);
    let ctx = PairingContext::new(&pres, s.wordlen.max(n as usize))?;
    let lambda = ctx.lambda()?;
    let det = lambda.det()?;
    let lead = verify_leading_term(&pres, &det)?;
    let mut r = report("expand-det-lambda", s, n);
    leading_sections(&mut r, &lead);
    emit(s, "lambda.matrix", &write_matrix(&lambda)?)?;
    r.set("series-files", "lambda", "lambda.matrix");
    emit_series(s, &mut r, "det_lambda", &det)?;
    emit(s, "det_lambda.report", &r.render())?;
    Ok(lead.passed())
}

fn expand_mu2(s: &Settings) -> Result<bool> {
    let n = leading_term_truncation(s.genus, s.trunc);
    let pres = presentation(s, n);
    let e = assemble_mu2(&pres, s.wordlen.max(n as usize), s.identify_inverses)?;
    let lead = verify_leading_term(&pres, &e.det_lambda)?;
    let mut r = report("expand-mu2", s, n);
    r.notes.push("the form is defined up to an overall sign; both signs are listed".into());
    r.notes.push("named constants a(g) and zeta_Q'(-1) belong to the analytic normalization and are not computed".into());
    leading_sections(&mut r, &lead);
    let prim = primitivity_section(&mut r, &e.series.content_and_primitivity(&s.primes)?);
    r.set("provenance", "det_lambda_sha256", &e.provenance.det_lambda);
    r.set("provenance", "f1_sha256", &e.provenance.f1);
    r.set("provenance", "f2_sha256", &e.provenance.f2);
    emit_series(s, &mut r, "mu2", &e.series)?;
    emit_series(s, &mut r, "mu2_negated", &e.with_sign(-1))?;
    emit_series(s, &mut r, "det_lambda", &e.det_lambda)?;
    emit_series(s, &mut r, "f1", &e.f1)?;
    emit_series(s, &mut r, "f2", &e.f2)?;
    emit(s, "mu2.report", &r.render())?;
    Ok(lead.passed() && prim)
}

fn verify_leading(s: &Settings) -> Result<bool> {
    let n = leading_term_truncation(s.genus, s.trunc);
    let (_, lead) = run_leading_term_check(s.genus, n, s.wordlen, s.normalized)?;
    let mut r = report("verify-leading", s, n);
    leading_sections(&mut r, &lead);
    emit(s, "verify-leading.report", &r.render())?;
    println!("leading term: {}", if lead.passed() { "PASS" } else { "FAIL" });
    Ok(lead.passed())
}

fn delta(s: &Settings) -> Result<bool> {
    let coeffs = genus1_delta(s.trunc)?;
    for c in &coeffs {
        println!("{c}");
    }
    Ok(true)
}

fn load_group<T: Real>(s: &Settings) -> Result<NumericSchottkyGroup<T>> {
    match &s.group_file {
        Some(p) => GroupFile::load(p)?.to_group(),
        None => Ok(NumericSchottkyGroup::reference()),
    }
}

fn compare_numeric(s: &Settings) -> Result<bool> {
    let spec = QuadratureSpec {
        nodes: s.nodes,
        word_bound: s.wordlen,
        class_bound: (s.trunc as usize + 2).max(6),
        ..Default::default()
    };
    let cmp = if s.precision == 106 {
        compare_all(&load_group::<TwoFloat>(s)?, s.trunc, &spec, s.identify_inverses)?
    } else {
        compare_all(&load_group::<f64>(s)?, s.trunc, &spec, s.identify_inverses)?
    };
    let mut r = report("compare-numeric", s, s.trunc);
    comparison_sections(&mut r, &cmp, s);
    emit(s, "compare-numeric.report", &r.render())?;
    for e in &cmp.entries {
        println!("{} {} rel_error={:.3e}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.rel_error);
    }
    Ok(cmp.passed())
}

fn comparison_sections(r: &mut Report, cmp: &ComparisonReport, s: &Settings) {
    r.set("quadrature", "nodes", cmp.nodes);
    r.set("quadrature", "tolerance", format!("{:e}", cmp.tolerance));
    r.set("quadrature", "precision", s.precision);
    for e in &cmp.entries {
        r.set(
            "comparison",
            &e.name,
            format!(
                "{} rel_error={:e} symbolic={:e}{:+e}i numeric={:e}{:+e}i",
                if e.passed { "PASS" } else { "FAIL" },
                e.rel_error,
                e.symbolic.re,
                e.symbolic.im,
                e.numeric.re,
                e.numeric.im
            ),
        );
    }
    if let Some(w) = cmp.worst() {
        r.set("summary", "worst", format!("{} rel_error={:e}", w.name, w.rel_error));
    }
    r.set("summary", "result", if cmp.passed() { "PASS" } else { "FAIL" });
}
