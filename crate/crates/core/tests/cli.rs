use std::process::{Command, Output};

fn explab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_explab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn curve_has_a_row_per_rate() {
    let o = explab(&["curve", "--channel", "bsc:0.1", "--R-grid", "0:0.35:0.01"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "R,E_r,rho_star");
    assert_eq!(lines.len(), 37);
    let rows: Vec<Vec<f64>> = lines[1..].iter().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert!((rows[35][0] - 0.35).abs() < 1e-12);
    // capacity of BSC(0.1) is about 0.368 nats, so the whole curve is positive
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] && w[1][1] > 0.0));
}

#[test]
fn exit_codes() {
    let o = explab(&["exponent", "--R", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("channel"));

    assert_eq!(explab(&["exponent", "--channel", "bsc:2", "--R", "0.1"]).status.code(), Some(2));
    assert_eq!(explab(&["exponent", "--channel", "bsc:0.1", "--bogus"]).status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_explab"))
        .args(["primal-check", "--channel", "bsc:0.1", "--R", "0.1", "--grid", "500"])
        .env("EXPLAB_MAX_CELLS", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sidecar_and_headers() {
    let dir = tempfile::tempdir().unwrap();
    let meta = dir.path().join("meta.json");
    let o = explab(&[
        "jscc-exponent",
        "--channel",
        "bsc:0.1",
        "--source",
        "0.2,0.8",
        "--k",
        "4",
        "--n",
        "8",
        "--json-meta",
        meta.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("class_index,rho_star,E_class,E_s_at_rho,overall_min,overall_logsum\n"));
    assert_eq!(text.lines().count(), 6);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(meta).unwrap()).unwrap();
    for key in ["tool", "version", "prng", "seed", "config_hash", "wall_time_s"] {
        assert!(v.get(key).is_some(), "{key}");
    }

    let o = explab(&["primal-check", "--channel", "bsc:0.1", "--R", "0.1", "--grid", "200"]);
    assert!(stdout(&o).starts_with("R,E_dual,E_primal,abs_diff,grid\n"));
    let o = explab(&["simulate", "--channel", "bsc:0.1", "--M", "4", "--n", "6", "--trials", "100"]);
    assert!(stdout(&o).starts_with("n,M,trials,errors,p_hat,ci_lo,ci_hi\n6,4,100,"));
}
