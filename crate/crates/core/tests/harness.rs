use std::path::{Path, PathBuf};
use std::process::Command;

use pamdp::harness::{self, ExperimentConfig};
use pamdp::mdp::json::EpisodeJson;
use pamdp::mdp::{regret_report, MdpShape};

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

fn com_config(k: usize, seeds: &str, adversary: &str) -> String {
    format!(
        r#"{{
        "run_id": "com",
        "instance": {{"generator": "partial_adversarial", "S": 2, "A": 2, "H": 3, "adv_steps": [1], "adversary": "{adversary}"}},
        "learner": {{"algo": "com_omd"}},
        "K": {k},
        "seeds": {seeds}
    }}"#
    )
}

/// Two actions everywhere; action 0 is free, action 1 costs one.
fn dominated_config(k: usize, extra: &str) -> String {
    let kernel = "[[[[0.3,0.7],[0.6,0.4]],[[0.5,0.5],[0.9,0.1]]]]";
    let losses = "[[[0,1],[0,1]],[[0,1],[0,1]]]";
    let eps = vec![format!(r#"{{"kernel": {kernel}, "losses": {losses}}}"#); k].join(",");
    format!(
        r#"{{
        "run_id": "fixed",
        "instance": {{"generator": "explicit",
            "instance": {{"S": 2, "A": 2, "H": 2, "stationary_kernel": {kernel}}},
            "episodes": [{eps}]}},
        "learner": {{"algo": "fixed_policy", "actions": [[0, 0], [0, 0]]}},
        "K": {k}{extra}
    }}"#
    )
}

fn csv_bytes(rec: &harness::ExperimentRecord) -> Vec<u8> {
    let mut out = Vec::new();
    rec.write_csv(&mut out).unwrap();
    out
}

#[test]
fn zero_episodes_write_only_the_header() {
    let rec = harness::run(&cfg(&com_config(0, "[0]", "oblivious_random"))).unwrap();
    let text = String::from_utf8(csv_bytes(&rec)).unwrap();
    assert_eq!(text, "run_id,seed,algo,k,episode_loss,cum_loss,benchmark_cum,regret\n");
}

#[test]
fn reruns_are_byte_identical() {
    let c = cfg(&com_config(40, "[3, 4]", "adaptive_greedy"));
    let a = csv_bytes(&harness::run(&c).unwrap());
    let b = csv_bytes(&harness::run(&c).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 81);
}

#[test]
fn benchmark_policy_has_zero_regret() {
    let rec = harness::run(&cfg(&dominated_config(30, ""))).unwrap();
    for s in &rec.seeds {
        assert!(s.rows.iter().all(|r| r.regret == 0.0 && r.learner_value == 0.0));
    }
    assert!(rec.summary.passed);
}

#[test]
fn csv_regret_matches_recomputation_from_dumped_episodes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(&com_config(50, "[1, 2]", "adaptive_greedy"));
    c.dump_episodes = Some(50);
    let rec = harness::run(&c).unwrap();
    let csv = rec.write_outputs(dir.path()).unwrap();
    let rows = harness::read_csv(&csv).unwrap();
    let jsonl = std::fs::read_to_string(dir.path().join("com.episodes.jsonl")).unwrap();
    let sh = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
    for seed in [1u64, 2] {
        let reals: Vec<_> = jsonl
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .filter(|v| v["seed"] == seed)
            .map(|v| serde_json::from_value::<EpisodeJson>(v["episode"].clone()).unwrap().into_realization(&sh).unwrap())
            .collect();
        let mine: Vec<_> = rows.iter().filter(|r| r.seed == seed).collect();
        assert_eq!(reals.len(), 50);
        let values: Vec<f64> = mine.iter().map(|r| r.episode_loss).collect();
        let curve = regret_report(&sh, &reals, &values).unwrap();
        for (row, r) in mine.iter().zip(&curve.regret) {
            assert!((row.regret - r).abs() <= 1e-12, "seed {seed} k {}: {} vs {r}", row.k, row.regret);
        }
    }
}

fn write_configs(dir: &Path, n: usize) -> Vec<PathBuf> {
    (0..n)
        .map(|i| {
            let p = dir.join(format!("cfg{i}.json"));
            let text = com_config(30, &format!("[{i}, {}]", i + 10), "oblivious_random").replace(r#""run_id": "com","#, "");
            std::fs::write(&p, text).unwrap();
            p
        })
        .collect()
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_configs(dir.path(), 3);
    let (one, two) = (dir.path().join("serial"), dir.path().join("parallel"));
    harness::sweep(&paths, &one, Some(1)).unwrap();
    harness::sweep(&paths, &two, Some(3)).unwrap();
    for name in ["cfg0.csv", "cfg1.csv", "cfg2.csv", "summary.csv"] {
        assert_eq!(std::fs::read(one.join(name)).unwrap(), std::fs::read(two.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn sweep_summary_equals_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = com_config(25, "[5]", "oblivious_worstcase_switching").replace(r#""run_id": "com","#, "");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    std::fs::write(&a, &text).unwrap();
    std::fs::write(&b, &text).unwrap();
    let entries = harness::sweep(&[a.clone(), b], &dir.path().join("out"), None).unwrap();
    let direct = harness::run(&ExperimentConfig::from_path(&a).unwrap()).unwrap().summary;
    let sa = &entries[0].outcome.as_ref().unwrap().0;
    let mut sb = entries[1].outcome.as_ref().unwrap().0.clone();
    assert_eq!(sa, &direct);
    sb.run_id = sa.run_id.clone();
    assert_eq!(sa, &sb);
}

#[test]
fn sweep_isolates_failing_configs() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = write_configs(dir.path(), 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"instance": {}, "K": 1}"#).unwrap();
    paths.push(bad);
    let entries = harness::sweep(&paths, &dir.path().join("out"), None).unwrap();
    assert!(entries[0].outcome.is_ok());
    assert!(entries[1].outcome.is_err());
    let summary = std::fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn ci_halves_when_seeds_quadruple() {
    // mean half-width over independent replications, to average out the
    // noise in each sample standard deviation
    let reps = 25;
    let (mut small, mut large) = (0.0, 0.0);
    for rep in 0..reps {
        let base = rep * 50;
        let seeds = |n: usize| format!("{:?}", (base..base + n).collect::<Vec<_>>());
        let text = |n: usize| {
            format!(
                r#"{{
                "instance": {{"generator": "partial_adversarial", "S": 2, "A": 2, "H": 2, "adversary": "oblivious_random"}},
                "learner": {{"algo": "fixed_policy", "actions": [[0, 1], [1, 0]]}},
                "K": 20,
                "seeds": {}
            }}"#,
                seeds(n)
            )
        };
        small += harness::run(&cfg(&text(10))).unwrap().summary.ci95;
        large += harness::run(&cfg(&text(40))).unwrap().summary.ci95;
    }
    let ratio = large / small;
    assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
}

fn pamdp(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_pamdp")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let write = |name: &str, text: String| {
        let p = dir.path().join(name);
        std::fs::write(&p, text.replace(r#""run_id": "fixed","#, "")).unwrap();
        p.to_str().unwrap().to_string()
    };
    let ok = write("ok.json", dominated_config(12, r#", "assertions": {"max_abs_regret": 0.0}"#));
    let fails = write("fails.json", dominated_config(12, r#", "assertions": {"max_mean_final_regret": -1.0}"#));
    let broken = write("broken.json", "{\"K\": 3}".into());
    assert_eq!(pamdp(&["run", "--config", &ok, "--out", out]), 0);
    assert_eq!(pamdp(&["run", "--config", &fails, "--out", out]), 1);
    assert_eq!(pamdp(&["run", "--config", &broken, "--out", out]), 2);
    let csv = format!("{out}/ok.csv");
    assert!(Path::new(&csv).exists());
    // twelve points of zero regret: the floored curve is flat
    assert_eq!(pamdp(&["slope", "--csv", &csv, "--kmin", "1"]), 0);
    assert_eq!(pamdp(&["slope", "--csv", &csv, "--kmin", "5"]), 2);
    let sweep_out = format!("{out}/sweep");
    assert_eq!(pamdp(&["sweep", "--glob", &format!("{}/ok.json", dir.path().display()), "--out", &sweep_out]), 0);
    assert_eq!(pamdp(&["sweep", "--glob", &format!("{}/*.json", dir.path().display()), "--out", &sweep_out]), 1);
}
