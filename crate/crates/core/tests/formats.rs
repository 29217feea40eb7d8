//! Artifact files: round trips and rejection of damaged input.

use mumford_core::differentials::PairingContext;
use mumford_core::io::{read_matrix, read_series, write_matrix, write_series, Report};
use mumford_core::{Error, GroupWord, SymbolicPresentation};

#[test]
fn lambda_matrix_round_trips() {
    let pres = SymbolicPresentation::normalized(2, 2);
    let lambda = PairingContext::new(&pres, 2).unwrap().lambda().unwrap();
    let back = read_matrix(&write_matrix(&lambda).unwrap()).unwrap();
    assert_eq!(back.len(), lambda.size());
    for (r, row) in back.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            assert_eq!(v.terms(), lambda.entries[r][c].terms(), "entry {r},{c}");
        }
    }
}

#[test]
fn damaged_series_files_are_rejected() {
    let pres = SymbolicPresentation::normalized(2, 2);
    let text = write_series(&pres.multiplier(&GroupWord::letter(1).concat(&GroupWord::letter(2))).unwrap());

    let newer = text.replacen("v1", "v9", 1);
    assert!(matches!(read_series(&newer), Err(Error::Version { .. })));

    let garbage = text.replacen("term [", "term {", 1);
    assert!(matches!(read_series(&garbage), Err(Error::Parse { line, .. }) if line > 1));

    let truncated: String = text.lines().take(2).collect::<Vec<_>>().join("\n");
    assert!(matches!(read_series(&truncated), Err(Error::Parse { .. })));

    assert!(matches!(read_series(""), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(read_matrix(&text), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn reports_round_trip() {
    let mut r = Report::new();
    r.timestamp = Some("0".into());
    r.set("parameters", "genus", 2);
    r.set("checks", "unit", "PASS");
    let back = Report::parse(&r.render()).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.get("checks", "unit"), Some("PASS"));
}
