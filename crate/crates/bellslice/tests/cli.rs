use std::path::Path;
use std::process::{Command, Output};

use bellslice::formats::{read_classes, read_inequalities, read_vertices};

fn bellslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellslice")).args(args).output().expect("run bellslice")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn vertex_files() {
    for (s, n) in [("2,2,2,2", 16), ("3,3,2,2", 64)] {
        let text = stdout(&bellslice(&["vertices", "--scenario", s]));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("#CG {}", s.replace(',', " ")));
        assert_eq!(lines.count(), n);
        assert_eq!(read_vertices(&text).unwrap().1.len(), n);
    }
}

#[test]
fn enumerate_then_classify_is_byte_equal() {
    let dir = tempfile::tempdir().unwrap();
    for s in ["2,2,2,2", "3,2,2,2", "2,2,3,2"] {
        let out = dir.path().join(s.replace(',', ""));
        let o = out.to_str().unwrap();
        stdout(&bellslice(&["enumerate", "--scenario", s, "--out", o]));
        let classes = std::fs::read_to_string(out.join("classes.txt")).unwrap();
        let facets = out.join("facets.txt");
        let again = stdout(&bellslice(&["classify", "--input", facets.to_str().unwrap()]));
        assert_eq!(classes, again, "{s}");
        // classifying the representatives alone gives the same classes
        let reps = dir.path().join(format!("{}.reps", s.replace(',', "")));
        std::fs::write(&reps, &classes).unwrap();
        let (_, from_reps) = read_classes(&stdout(&bellslice(&["classify", "--input", reps.to_str().unwrap()]))).unwrap();
        let (_, orig) = read_classes(&classes).unwrap();
        assert_eq!(from_reps, orig);
    }
    let text = std::fs::read_to_string(dir.path().join("2222/facets.txt")).unwrap();
    assert_eq!(read_inequalities(&text).unwrap().1.len(), 24);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "#INEQ 2 2 2 2\n1 1 1\n");
    assert_eq!(bellslice(&["classify", "--input", &bad]).status.code(), Some(3));
    let bad_header = write(dir.path(), "hdr.txt", "#WHAT 2 2 2 2\n");
    assert_eq!(bellslice(&["classify", "--input", &bad_header]).status.code(), Some(3));
    assert_eq!(bellslice(&["vertices", "--scenario", "2,2"]).status.code(), Some(3));
    let o = bellslice(&["enumerate", "--scenario", "3,3,2,2", "--time-budget", "1e-9"]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("#CLASSES 3 3 2 2\n# partial"), "{text}");
    // outputs never replace inputs
    let chsh = write(dir.path(), "classes.txt", "#INEQ 2 2 2 2\n1 1 1 -1 -1 0 -1 0 0\n");
    let d = dir.path().to_str().unwrap();
    assert_eq!(bellslice(&["classify", "--input", &chsh, "--out", d]).status.code(), Some(1));
}

#[test]
fn lift_and_slice_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let chsh = write(dir.path(), "chsh.txt", "#INEQ 2 2 2 2\n1 1 1 -1 -1 0 -1 0 0\n");
    let lifted = stdout(&bellslice(&["lift", "--input", &chsh, "--scenario", "2,2,3,3"]));
    let (s, l) = read_inequalities(&lifted).unwrap();
    assert_eq!(s.cg_dimension(), 24);
    assert!(l.len() >= 2);
    write(dir.path(), "campaign.conf", "# CHSH into (3,3,2,2)\nscenario = 3,3,2,2\nseeds = chsh.txt\nn_slices = 5\nvertex_budget = 5000\n");
    let out = dir.path().join("run");
    let conf = dir.path().join("campaign.conf");
    stdout(&bellslice(&["slice", "--config", conf.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"]));
    let (_, classes) = read_classes(&std::fs::read_to_string(out.join("classes.txt")).unwrap()).unwrap();
    let orbits: Vec<u128> = classes.iter().map(|c| c.orbit_size).collect();
    assert_eq!(orbits, vec![576, 72, 36]);
    let report = std::fs::read_to_string(out.join("campaign.tsv")).unwrap();
    assert!(report.starts_with("id\tsource\tcut"));
    // a flag overrides the configured slice count
    let o = stdout(&bellslice(&["slice", "--config", conf.to_str().unwrap(), "--slices", "1"]));
    assert_eq!(o.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn analysis_is_deterministic_and_flags_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.txt", "#INEQ 2 2 2 2\n1 1 1 -1 -1 0 -1 0 0\n0 0 0 0 0 0 0 0 0\n");
    let args = ["analyze", "--input", &input, "--dims", "2", "--level", "1", "--restarts", "3", "--seed", "11"];
    let a = stdout(&bellslice(&args));
    let b = stdout(&bellslice(&[&args[..], &["--jobs", "1"]].concat()));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "# seed 11 npa-level 1");
    assert_eq!(lines[2], "Name\tScenario\tL\tQ\tQ_NPA\tλ\tη_min\tC");
    assert_eq!(lines[3], "CHSH\t(2,2,2,2)\t0\t0.2071\t0.2071\t0.7071\t0.8284\t1.0000");
    let zero: Vec<&str> = lines[4].split('\t').collect();
    assert_eq!(zero[0], "#2");
    assert_eq!(&zero[3..7], &["0.0000", "0.0000", "-", "-"]);

    let aliases = write(dir.path(), "aliases.txt", "Zero 2,2,2,2 0 0 0 0 0 0 0 0 0\n");
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    stdout(&bellslice(&["analyze", "--input", &input, "--dims", "2,3", "--level", "none", "--restarts", "2", "--aliases", &aliases, "--out", o]));
    let tsv = std::fs::read_to_string(out.join("analysis.tsv")).unwrap();
    assert!(tsv.contains("\nZero\t(2,2,2,2)\t0\t0.0000\t\t-\t-\t"));
    // C is blank beyond qubits
    let d3 = tsv.split("# d=3\n").nth(1).unwrap();
    assert!(d3.lines().skip(1).all(|l| l.ends_with('\t')));

    stdout(&bellslice(&["enumerate", "--scenario", "2,2,2,2", "--out", o]));
    let classes = out.join("classes.txt");
    let md = stdout(&bellslice(&["report", "--input", classes.to_str().unwrap(), "--analysis", out.join("analysis.tsv").to_str().unwrap()]));
    assert!(md.contains("2 classes, 24 facets."));
    assert!(md.contains("| 1 | CHSH | 8 | 0 |"));
    assert!(md.contains("## d = 3"));
}
