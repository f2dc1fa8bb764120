use std::path::Path;
use std::process::Command;

use proptest::prelude::*;

fn subreg(args: &[&str], out_dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_subreg"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_spec(text: &str, extra: &[&str]) -> (i32, String, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, text).unwrap();
    let out = dir.path().join("out");
    let mut args = vec!["run", spec.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, stdout, _) = subreg(&args, &out);
    (code, stdout, dir)
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|r| r.unwrap()).collect()
}

#[test]
fn estimate_sqrt_abs() {
    let (code, stdout, dir) = run_spec("kind = \"estimate\"\nmap = \"sqrt-abs\"\nq = 2\nradius = 1\n", &[]);
    assert_eq!(code, 0, "{stdout}");
    let rows = read_csv(&dir.path().join("out/estimate.csv"));
    let max = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!((max - 1.0).abs() <= 1e-9, "{max}");
    let header = csv::Reader::from_path(dir.path().join("out/estimate.csv")).unwrap().headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), ["x", "numerator", "denominator", "ratio"]);
}

#[test]
fn solve_example_trace() {
    let text = "kind = \"solve\"\nequation = \"example-5-2\"\nschedule = \"example-5-2\"\nx0 = 0.5\n";
    let (code, stdout, dir) = run_spec(text, &[]);
    assert_eq!(code, 0, "{stdout}");
    let rows = read_csv(&dir.path().join("out/solve.csv"));
    let x4 = rows.iter().find(|r| &r[0] == "4").unwrap()[1].parse::<f64>().unwrap();
    assert_eq!(x4, 2f64.powi(-24));
    let q3 = rows.iter().find(|r| &r[0] == "3").unwrap()[4].parse::<f64>().unwrap();
    assert_eq!(q3, 4.0);
}

#[test]
fn pairwise_violation_exits_one() {
    let text = "kind = \"growth-check\"\nmap = \"subdiff-sqrt\"\nvariant = \"pairwise\"\nbeta = 1\neta = 1\n";
    let (code, stdout, dir) = run_spec(text, &[]);
    assert_eq!(code, 1, "{stdout}");
    let rows = read_csv(&dir.path().join("out/growth-check.csv"));
    assert_eq!(&rows[0][0], "violation");
    assert!(rows[0][4].parse::<f64>().unwrap() < 0.0);
}

#[test]
fn order_scan_table_and_json() {
    let text = r#"
kind = "order-scan"
name = "scan"
map = "sqrt-abs"
q_list = [1.0, 2.0, 2.5]
radii = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
[grid]
points_per_decade = 20
decades = 4
"#;
    let (code, _, dir) = run_spec(text, &[]);
    assert_eq!(code, 0);
    let rows = read_csv(&dir.path().join("out/scan.csv"));
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().filter(|r| &r[0] == "2.5000000000000000e0").all(|r| &r[3] == "blow-up"));

    let (code, _, dir) = run_spec(text, &["--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/scan.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["truncation_active"], false);
    assert_eq!(v["tool"], "subreg-cli");
}

#[test]
fn other_kinds_run() {
    let specs = [
        ("kind = \"mr-probe\"\nmap = \"identity\"\n[grid]\npoints_per_decade = 4\ndecades = 4\n", 0),
        ("kind = \"mr-probe\"\nmap = \"subdiff-plateau\"\n[grid]\npoints_per_decade = 4\ndecades = 4\n", 1),
        ("kind = \"perturb-check\"\nmap = \"sqrt-abs\"\nq = 2\nradius = 1\nperturbation = [0.0, 0.1]\nlambda = 0.1\n", 0),
        (
            "kind = \"param-check\"\nmap = \"sqrt-abs\"\nq = 2\nradius = 0.1\nperturbation = [0.0, 0.0, 1.0]\ntarget = 1.3\nu_radius = 0.1\nu_count = 21\n",
            0,
        ),
        ("kind = \"growth-check\"\nmap = \"subdiff-plateau\"\nvariant = \"lower\"\nalpha = 1\neta = 0.5\n", 0),
        ("kind = \"solve\"\nequation = \"newton-quadratic\"\nschedule = \"chord\"\nb0 = 4\nx0 = 2\n", 0),
        ("kind = \"estimate\"\nmap = \"zero-map\"\nq = 1\nradius = 1\n", 1),
    ];
    for (text, expected) in specs {
        let (code, stdout, _) = run_spec(text, &[]);
        assert_eq!(code, expected, "{text}\n{stdout}");
    }
}

#[test]
fn inline_map_estimate() {
    let text = r#"
kind = "estimate"
q = 1
radius = 0.5
search_window = [-1.0, 1.0]
modulus = "plain"
[map]
label = "abs"
pieces = [ { lo = -2.0, hi = 0.0, slope = -1.0 }, { lo = 0.0, hi = 2.0, slope = 1.0 } ]
"#;
    let (code, stdout, _) = run_spec(text, &[]);
    assert_eq!(code, 0, "{stdout}");
}

#[test]
fn csv_output_is_byte_deterministic() {
    let text = "kind = \"estimate\"\nmap = \"subdiff-sqrt\"\nq = 2\nradius = 0.5\n";
    let (_, _, a) = run_spec(text, &["--threads", "1"]);
    let (_, _, b) = run_spec(text, &["--threads", "3"]);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("out/estimate.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn replicate_matrix_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (code, stdout, _) = subreg(&["replicate-all"], &a);
    subreg(&["replicate-all"], &b);
    assert!(stdout.contains("Ex3.3-strong-2-subreg") && stdout.contains("Thm4.1-bound"));
    // the honest decade-growth failure makes the matrix exit 1
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL  Ex3.2-decade-growth"));
    let read = |d: &Path| std::fs::read(d.join("replicate_matrix.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn catalog_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = subreg(&["catalog", "list"], dir.path());
    assert_eq!(code, 0);
    for id in subreg_core::catalog::CATALOG_IDS {
        assert!(stdout.contains(id), "{id}");
    }
    assert!(stdout.contains("example-5-2"));
    let (code, stdout, _) = subreg(&["catalog", "describe", "S-map"], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("base point"));
    let (code, _, stderr) = subreg(&["catalog", "describe", "T-map"], dir.path());
    assert_eq!(code, 2);
    assert!(stderr.contains("T-map"));
}

#[test]
fn errors_name_their_location() {
    let (code, _, dir) = run_spec("kind = \"estimate\"\nmap = \"sqrt-abs\"\nq = -1\nradius = 1\n", &[]);
    assert_eq!(code, 2);
    drop(dir);
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    std::fs::write(&spec, "kind = \"estimate\"\nmap = \"nope\"\nq = 2\nradius = 1\n").unwrap();
    let (code, _, stderr) = subreg(&["run", spec.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(stderr.contains("field `map`"), "{stderr}");
}

/// Lines of a valid estimate spec; mutations below break exactly one.
const VALID: [&str; 4] = ["kind = \"estimate\"", "map = \"sqrt-abs\"", "q = 2.0", "radius = 0.5"];

fn malformed() -> impl Strategy<Value = String> {
    let bad_line = prop_oneof![
        Just("kind = \"integrate\"".to_string()),
        Just("map = \"no-such-map\"".to_string()),
        Just("q = \"two\"".to_string()),
        Just("q = -2.0".to_string()),
        Just("q = nan".to_string()),
        Just("radius = 0.0".to_string()),
        Just("radius = [1, 2]".to_string()),
        Just("map = 3".to_string()),
        "[a-z]{3,8}".prop_map(|k| format!("{k}_extra = 1")),
        "[a-z =\"\\[]{1,12}".prop_map(|s| format!("{s} = = {s}")),
    ];
    (0..VALID.len(), bad_line, any::<bool>()).prop_map(|(i, bad, drop_instead)| {
        let mut lines: Vec<String> = VALID.iter().map(|s| s.to_string()).collect();
        if drop_instead {
            lines.remove(i);
        } else {
            // replace the line with the same key when there is one
            let key = bad.split('=').next().unwrap().trim().to_string();
            match lines.iter().position(|l| l.starts_with(&format!("{key} "))) {
                Some(j) => lines[j] = bad,
                None => lines.push(bad),
            }
        }
        lines.join("\n")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn malformed_specs_exit_two(text in malformed()) {
        let (code, stdout, _) = run_spec(&text, &[]);
        prop_assert_eq!(code, 2, "{}\n{}", text, stdout);
    }

    #[test]
    fn valid_specs_never_exit_two(q in 0.5f64..3.0, radius in 0.01f64..1.0, id in 0usize..8) {
        let map = subreg_core::catalog::CATALOG_IDS[id];
        let text = format!("kind = \"estimate\"\nmap = \"{map}\"\nq = {q}\nradius = {radius}\n[grid]\npoints_per_decade = 10\ndecades = 3\n");
        let (code, stdout, _) = run_spec(&text, &[]);
        prop_assert!(code == 0 || code == 1, "{}\n{}", text, stdout);
    }
}

#[test]
fn shipped_specs_run() {
    let specs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs");
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(&specs).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let expected = if text.contains("exit 1") { 1 } else { 0 };
        let (code, stdout, stderr) = subreg(&["run", path.to_str().unwrap()], dir.path());
        assert_eq!(code, expected, "{}\n{stdout}{stderr}", path.display());
        seen += 1;
    }
    assert!(seen >= 5);
}
