use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use pamdp::harness::{run_seed, ExperimentConfig};
use pamdp_ffi::*;

const CFG: &str = r#"{
    "instance": {"generator": "partial_adversarial", "S": 2, "A": 2, "H": 3, "adv_steps": [1], "adversary": "oblivious_random"},
    "learner": {"algo": "com_omd"},
    "K": 30,
    "seeds": [4, 9]
}"#;

fn last_error() -> String {
    let p = pamdp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn session_matches_library_run() {
    let cfg = CString::new(CFG).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pamdp_session_new(cfg.as_ptr(), 4, &mut s) }, PAMDP_OK);
    let want = run_seed(&ExperimentConfig::parse(CFG).unwrap(), 4).unwrap();
    let mut ep = PamdpEpisode::default();
    for row in &want.rows {
        assert_eq!(unsafe { pamdp_session_step(s, &mut ep) }, PAMDP_OK);
        assert_eq!(ep.k, row.k);
        assert_eq!(ep.learner_value, row.learner_value);
        assert_eq!(ep.regret, row.regret);
    }
    assert_eq!(unsafe { pamdp_session_step(s, &mut ep) }, PAMDP_DONE);
    let mut n = 0;
    assert_eq!(unsafe { pamdp_session_episodes(s, &mut n) }, PAMDP_OK);
    assert_eq!(n, 30);
    unsafe { pamdp_session_free(s) };
}

#[test]
fn record_accessors() {
    let cfg = CString::new(CFG).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { pamdp_run(cfg.as_ptr(), &mut r) }, PAMDP_OK);
    let (mut seeds, mut eps) = (0, 0);
    assert_eq!(unsafe { pamdp_record_dims(r, &mut seeds, &mut eps) }, PAMDP_OK);
    assert_eq!((seeds, eps), (2, 30));

    let mut buf = vec![0.0; 30];
    assert_eq!(unsafe { pamdp_record_regret(r, 1, buf.as_mut_ptr(), buf.len()) }, PAMDP_OK);
    let want = run_seed(&ExperimentConfig::parse(CFG).unwrap(), 9).unwrap();
    assert_eq!(buf, want.rows.iter().map(|x| x.regret).collect::<Vec<_>>());
    assert_eq!(unsafe { pamdp_record_regret(r, 2, buf.as_mut_ptr(), buf.len()) }, PAMDP_ERR_RANGE);
    assert_eq!(unsafe { pamdp_record_regret(r, 0, buf.as_mut_ptr(), 5) }, PAMDP_ERR_RANGE);
    assert!(last_error().contains("need 30"));

    let (mut m, mut w) = (0.0, 0.0);
    assert_eq!(unsafe { pamdp_record_final_regret(r, &mut m, &mut w) }, PAMDP_OK);
    assert!(m.is_finite() && w >= 0.0);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("x.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { pamdp_record_write_csv(r, path.as_ptr()) }, PAMDP_OK);
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert!(text.starts_with("run_id,seed,algo,k,episode_loss,cum_loss,benchmark_cum,regret\n"));
    assert_eq!(text.lines().count(), 61);
    unsafe { pamdp_record_free(r) };
}

#[test]
fn error_codes_and_messages() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pamdp_session_new(ptr::null(), 0, &mut s) }, PAMDP_ERR_NULL);
    assert!(last_error().contains("config_json"));

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { pamdp_session_new(bad.as_ptr(), 0, &mut s) }, PAMDP_ERR_JSON);

    let hedge = CString::new(CFG.replace("com_omd", "hedge_ff")).unwrap();
    assert_eq!(unsafe { pamdp_session_new(hedge.as_ptr(), 0, &mut s) }, PAMDP_ERR_CONFIG);
    assert!(last_error().contains("loss_full_info"));
    assert!(s.is_null());

    let cfg = CString::new(CFG).unwrap();
    assert_eq!(unsafe { pamdp_session_new(cfg.as_ptr(), 0, ptr::null_mut()) }, PAMDP_ERR_NULL);
    assert_eq!(unsafe { pamdp_session_step(ptr::null_mut(), ptr::null_mut()) }, PAMDP_ERR_NULL);
    unsafe { pamdp_session_free(ptr::null_mut()) };
    unsafe { pamdp_record_free(ptr::null_mut()) };
}

#[test]
fn slope_through_the_abi() {
    let r: Vec<f64> = (1..=50).map(|k| 2.0 * (k as f64).sqrt()).collect();
    let mut out = 0.0;
    assert_eq!(unsafe { pamdp_slope(r.as_ptr(), r.len(), 1, &mut out) }, PAMDP_OK);
    assert!((out - 0.5).abs() < 1e-9);
    assert_eq!(unsafe { pamdp_slope(r.as_ptr(), 5, 1, &mut out) }, PAMDP_ERR_CONFIG);
}

#[test]
fn header_declares_the_abi_and_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/pamdp.h")).unwrap();
    for f in ["pamdp_session_new", "pamdp_session_step", "pamdp_run", "pamdp_record_regret", "pamdp_last_error", "pamdp_slope"] {
        assert!(header.contains(f), "{f} missing from header");
    }
    assert!(header.contains("typedef struct PamdpSession PamdpSession;"));
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"pamdp.h\"\nint main(void) { PamdpEpisode e; PamdpSession *s = 0; (void)e; return pamdp_session_step(s, &e) == PAMDP_ERR_NULL ? 0 : 1; }\n",
    )
    .unwrap();
    match std::process::Command::new(&cc).arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(dir.join("include")).arg(&src).status() {
        Ok(st) => assert!(st.success(), "header failed to compile"),
        Err(e) => eprintln!("skipping C compile check: {e}"),
    }
}
