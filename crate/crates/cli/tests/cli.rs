use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use leakycav::output::{read_manifest, MANIFEST};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_leakycav"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

const POLES: &str = "kind = poles\npotential.V0 = 10 natural\npotential.l = 1 natural\npotential.w = 0.5 natural\n";

const URANIUM: &str = "kind = gamow\nnucleus.E_alpha = 4.27 MeV\nnucleus.Z_daughter = 90\nnucleus.A_daughter = 234\n\
                       nucleus.r0 = 1.2 fm\nscan.points = 8\nstaircase.steps = 16\n";

#[test]
fn validate_reports_missing_key_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "a.scn", "# no height\nkind = poles\npotential.l = 1 natural\npotential.w = 0.5 natural\n");
    let o = bin().arg("validate").arg(&f).output().unwrap();
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("potential.V0") && err.contains("line 2"), "{err}");
}

#[test]
fn validate_accepts_and_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "a.scn", POLES);
    let o = bin().arg("validate").arg(&f).output().unwrap();
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("search.k_re_max") && out.contains("(default)"), "{out}");
}

#[test]
fn unreadable_file_is_an_io_error() {
    let o = bin().args(["validate", "/nonexistent/leakycav.scn"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // 30 MeV is above the Coulomb barrier top, so there is nothing to tunnel through
    let f = write(dir.path(), "hot.scn", &URANIUM.replace("4.27 MeV", "30 MeV"));
    let o = bin().arg("run").arg(&f).arg("--output").arg(dir.path().join("out")).output().unwrap();
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("gamow_semiclassical"));
}

#[test]
fn gamow_run_echoes_radius() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "u.scn", URANIUM);
    let out = dir.path().join("u");
    let o = bin().arg("run").arg(&f).arg("--output").arg(&out).output().unwrap();
    // the Geiger-Nuttall fit passes; the 1.2 fm rate misses the reference by decades
    assert_eq!(code(&o), 3);
    let m = read_manifest(&out.join(MANIFEST)).unwrap();
    let r0 = 1.2 * (234f64.cbrt() + 4f64.cbrt());
    assert!((m.derived["R0"].value - r0).abs() < 1e-12);
    assert_eq!(m.derived["R0"].unit, "fm");
    assert!(String::from_utf8_lossy(&o.stdout).contains("R0"));
    assert!(m.checks.iter().any(|c| c.name == "gn_r_squared" && c.passed));
    assert!(m.checks.iter().any(|c| c.name == "ratio_gamow_to_reference" && !c.passed));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "poles.scn", POLES);
    let b = write(dir.path(), "coh.scn", "kind = coherent\nstate.kind = fock\nstate.n = 3\nspace.n_max = 6\n");
    let runs = [dir.path().join("r1"), dir.path().join("r2")];
    for r in &runs {
        let o = bin().arg("run").arg(&a).arg(&b).arg("--output").arg(r).args(["--jobs", "2"]).output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    for sub in ["poles", "coh"] {
        let m = read_manifest(&runs[0].join(sub).join(MANIFEST)).unwrap();
        let mut files: Vec<String> = m.outputs.iter().map(|o| o.file.clone()).collect();
        files.push(MANIFEST.into());
        let listed: Vec<_> = fs::read_dir(runs[0].join(sub)).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(listed.len(), files.len(), "every file is in the manifest");
        for f in files {
            let x = fs::read(runs[0].join(sub).join(&f)).unwrap();
            let y = fs::read(runs[1].join(sub).join(&f)).unwrap();
            assert!(x == y, "{sub}/{f} differs between runs");
        }
    }
}

#[test]
fn manifest_records_every_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.scn", POLES);
    let out = dir.path().join("p");
    assert_eq!(code(&bin().arg("run").arg(&f).arg("-o").arg(&out).output().unwrap()), 0);
    let m = read_manifest(&out.join(MANIFEST)).unwrap();
    assert_eq!(m.format, "leakycav-run/1");
    assert_eq!(m.parameters["potential.V0"].source, "file");
    assert_eq!(m.parameters["potential.V0"].given.as_deref(), Some("10 natural"));
    assert_eq!(m.parameters["search.k_re_max"].source, "default");
    assert_eq!(m.parameters["seed"].source, "default");
    assert_eq!(m.outputs[0].file, "poles.csv");
    assert_eq!(m.outputs[0].rows, 4);
    let csv = fs::read_to_string(out.join("poles.csv")).unwrap();
    assert!(csv.starts_with("re_k,im_k,re_E,im_E,gamma,lifetime,residual\n"));
    assert!(!csv.contains('\r'));
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let re_k: f64 = first[0].parse().unwrap();
    assert!((re_k - 1.27527).abs() < 1e-5, "{re_k}");
    // 15 significant digits
    assert_eq!(first[0].split('e').next().unwrap().replace(['-', '.'], "").len(), 15);
}

#[test]
fn colliding_output_directories_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("x")).unwrap();
    let a = write(dir.path(), "same.scn", POLES);
    let b = write(&dir.path().join("x"), "same.scn", POLES);
    let o = bin().arg("run").arg(&a).arg(&b).arg("--output").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("o").exists());
}

#[test]
fn report_renders_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.scn", POLES);
    let out = dir.path().join("p");
    assert_eq!(code(&bin().arg("run").arg(&f).arg("-o").arg(&out).output().unwrap()), 0);
    let o = bin().arg("report").arg(out.join(MANIFEST)).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("gamma_narrowest") && text.contains("PASS"));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("section,name,value,unit,lower,upper,passed\n"));
    assert!(summary.contains("check,max_relative_residual,"));
    let o = bin().arg("report").arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(code(&o), 1);
}
