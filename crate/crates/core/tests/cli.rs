use std::process::Command;

fn slowclt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_slowclt")).args(args).output().expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn stable_eval_cauchy_at_zero() {
    let out = slowclt(&["stable-eval", "--alpha", "1", "--gamma", "1", "--x", "0", "--deriv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_rows(&text);
    let density: f64 = rows[0][1].parse().unwrap();
    assert!((density - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
    assert_eq!(rows[0].len(), 4);
}

#[test]
fn prop_check_settles_near_half_log2() {
    let out = slowclt(&["prop-check", "--scaling", "powerlog:r=0.5", "--eps", "0", "--kmax", "40"]);
    assert!(out.status.success());
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert_eq!(rows.last().unwrap()[0], "40");
    assert!((last - 0.346_574).abs() < 0.01, "{last}");
}

#[test]
fn sweep_is_byte_deterministic_with_full_header() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = slowclt(&[
            "sweep", "--family", "cubic:A=1", "--scaling", "kk", "--n-min", "1e4", "--n-max", "1e12", "--per-decade", "2",
            "--out", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    for key in ["# family: cubic:A=1", "# scaling: kk", "# gamma: 7.0710678118654757e-1", "# C: "] {
        assert!(text.contains(key), "missing {key}");
    }
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("n,a_n,kolmogorov,sup_density,thm1_rhs,thm2_rhs,gap,lognorm_kolmogorov,"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 17);
    let lognorm: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    let (lo, hi) = lognorm.iter().fold((f64::INFINITY, 0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(lo > 0.0 && hi < 2.0 * lo, "{lognorm:?}");
    for r in &rows {
        let k: f64 = r[2].parse().unwrap();
        let s: f64 = r[3].parse().unwrap();
        assert!(k >= 0.0 && s >= 0.0);
        // 17 significant digits
        assert_eq!(r[2].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
}

#[test]
fn json_lines_mirror_csv() {
    let args = ["bound-check", "--theorem", "1", "--family", "cubic:A=1", "--scaling", "powerlog:r=0.5", "--n-list", "1e4,1e6"];
    let csv = String::from_utf8(slowclt(&args).stdout).unwrap();
    let mut jargs = args.to_vec();
    jargs.push("--json");
    let out = slowclt(&jargs);
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["config"]["theorem"], "1");
    let rows = data_rows(&csv);
    assert_eq!(lines.len(), rows.len() + 1);
    for (j, r) in lines[1..].iter().zip(&rows) {
        // serde_json's default float parser may be one ulp off
        let (a, b) = (j["margin"].as_f64().unwrap(), r[5].parse::<f64>().unwrap());
        assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
        assert_eq!(j["asserted"], true);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(slowclt(&["stable-eval", "--alpha", "1", "--gamma", "1", "--x", "0", "--nope"]).status.code(), Some(2));
    let bad = slowclt(&["stable-eval", "--alpha", "2.5", "--gamma", "1", "--x", "0"]);
    assert_eq!(bad.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(record["error"], "invalid_parameter");
    let control = slowclt(&[
        "mc-check", "--family", "cubic:A=1", "--scaling", "natural", "--n", "100", "--m", "20000", "--seed", "3", "--scale-factor", "1.5",
    ]);
    assert_eq!(control.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&control.stderr).unwrap();
    assert_eq!(record["error"], "dkw_band_exceeded");
    // C = 1 is outside (0, 1)
    let c1 = slowclt(&["bound-check", "--theorem", "2", "--family", "cubic:A=1", "--scaling", "kk", "--C", "1", "--n-list", "1e4"]);
    assert_eq!(c1.status.code(), Some(1));
}
