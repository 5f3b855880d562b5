//! The `itinera` binary end to end.

use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use itinera_core::datagen::{demo_inventory, demo_request};
use itinera_core::model::serialize_request;

fn itinera(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itinera"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?} stderr {:?}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_is_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = itinera(&["gen", "--seed", "7", "--count", "10", "--out", out], d);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = std::fs::read(d.join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.jsonl")).unwrap());
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 10);

    // The flag beats the config file, which beats the default.
    std::fs::write(d.join("cfg.toml"), "seed = 3\n").unwrap();
    let o = itinera(
        &[
            "--config", "cfg.toml", "gen", "--seed", "7", "--count", "10", "--out", "c.jsonl",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(a, std::fs::read(d.join("c.jsonl")).unwrap());
    let o = itinera(
        &[
            "--config", "cfg.toml", "gen", "--count", "10", "--out", "e.jsonl",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(a, std::fs::read(d.join("e.jsonl")).unwrap());
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = itinera(
        &["gen", "--count", "1", "--out", "x.jsonl", "--frobnicate"],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(itinera(&["fly"], d).status.code(), Some(2));
    assert_eq!(itinera(&["gen"], d).status.code(), Some(2));

    std::fs::write(d.join("bad.toml"), "[solver]\ntime_limit_ms = \"soon\"\n").unwrap();
    let o = itinera(
        &[
            "--config", "bad.toml", "gen", "--count", "1", "--out", "x.jsonl",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("solver.time_limit_ms"),
        "{}",
        stderr(&o)
    );

    std::fs::write(d.join("bad2.toml"), "[gen]\none_way_fraction = 2.0\n").unwrap();
    let o = itinera(
        &[
            "--json",
            "--config",
            "bad2.toml",
            "gen",
            "--count",
            "1",
            "--out",
            "x",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
    let body = json_out(&o);
    assert!(body["error"]
        .as_str()
        .unwrap()
        .starts_with("gen.one_way_fraction"));
    assert!(!d.join("x").exists());
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = itinera(&["solve", "--instance", "missing.json"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));
    std::fs::write(d.join("broken.jsonl"), "{\"id\": 1}\n").unwrap();
    let o = itinera(&["eval", "--data", "broken.jsonl"], d);
    assert_eq!(o.status.code(), Some(1));
    let o = itinera(
        &[
            "eval",
            "--data",
            "broken.jsonl",
            "--backend",
            "carrier-pigeon",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_of_generated_corpus_is_exact_with_templates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = itinera(
        &["gen", "--seed", "11", "--count", "40", "--out", "d.jsonl"],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let o = itinera(
        &[
            "--json",
            "eval",
            "--data",
            "d.jsonl",
            "--backend",
            "template",
            "--subsets",
            "8",
            "--out",
            "report.json",
            "--emit-markdown",
            "report.md",
            "--profile",
            "3",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = json_out(&o);
    assert_eq!(summary["em_accuracy"], 1.0);
    assert_eq!(summary["valid_output_rate"], 1.0);
    assert_eq!(summary["score_mean"], 1.0);
    assert!(summary.get("records").is_none());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["count"], 40);
    assert_eq!(report["records"].as_array().unwrap().len(), 40);
    assert_eq!(report["timings"]["repetitions"], 3);
    let md = std::fs::read_to_string(d.join("report.md")).unwrap();
    assert!(md.contains("| cities |"));

    let o = itinera(
        &[
            "--json",
            "eval",
            "--data",
            "d.jsonl",
            "--corrupt-rate",
            "0.5",
            "--seed",
            "2",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let noisy = json_out(&o);
    assert!(noisy["em_accuracy"].as_f64().unwrap() < 1.0);

    let o = itinera(
        &[
            "--json",
            "roundtrip",
            "--in",
            "d.jsonl",
            "--report",
            "rt.json",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let rt = json_out(&o);
    assert_eq!(rt["checks"], 200);
    assert_eq!(rt["em_accuracy"], 1.0);
    assert!(d.join("rt.json").exists());
}

#[test]
fn noisy_texts_fail_the_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = itinera(
        &[
            "gen",
            "--seed",
            "5",
            "--count",
            "60",
            "--out",
            "n.jsonl",
            "--simulate-noise",
            "1.0",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let o = itinera(&["--json", "roundtrip", "--in", "n.jsonl"], d);
    let rt = json_out(&o);
    let failures = rt["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["source"] == "stored"));
}

#[test]
fn solve_reports_a_verified_plan() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let instance = json!({
        "request": serde_json::from_str::<Value>(&serialize_request(&demo_request())).unwrap(),
        "inventory": demo_inventory(0),
    });
    std::fs::write(d.join("demo.json"), instance.to_string()).unwrap();
    for mode in ["min_cost", "better_hotel", "better_flight"] {
        let o = itinera(
            &[
                "--json",
                "solve",
                "--instance",
                "demo.json",
                "--mode",
                mode,
                "--dump-stats",
            ],
            d,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v = json_out(&o);
        assert_eq!(v["status"], "optimal");
        assert_eq!(v["verified"], true);
        assert_eq!(
            v["itinerary"]["chosen_flights"].as_array().unwrap().len(),
            3
        );
        assert!(v["stats"]["nodes"].as_u64().unwrap() > 0);
    }
    let o = itinera(
        &["solve", "--instance", "demo.json", "--mode", "fastest"],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
    let o = itinera(&["solve", "--instance", "demo.json"], d);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("status: Optimal"), "{text}");
    assert_eq!(text.matches("leg ").count(), 3);
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}

#[test]
fn serve_answers_plan_requests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = itinera(
        &["gen", "--seed", "1", "--count", "5", "--out", "d.jsonl"],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
    let port = free_port();
    std::fs::write(
        d.join("serve.toml"),
        format!("[serve]\nport = {port}\ndataset_path = \"d.jsonl\"\n"),
    )
    .unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_itinera"))
        .args([
            "--config",
            "serve.toml",
            "serve",
            "--session-log",
            "s.jsonl",
        ])
        .current_dir(d)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .build()
        .into();
    let base = format!("http://127.0.0.1:{port}");
    let deadline = Instant::now() + Duration::from_secs(30);
    let health = loop {
        if let Ok(mut r) = agent.get(format!("{base}/health")).call() {
            let h: Value = r.body_mut().read_json().unwrap();
            if h["status"] == "ok" {
                break h;
            }
        }
        assert!(Instant::now() < deadline, "server did not come up");
        std::thread::sleep(Duration::from_millis(50));
    };
    assert!(health["flights"].as_u64().unwrap() > 0);

    // The first record's own text plans against the merged inventory.
    let first = std::fs::read_to_string(d.join("d.jsonl")).unwrap();
    let first: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    let mut r = agent
        .post(format!("{base}/plan"))
        .send_json(json!({ "text": first["nl_text"] }))
        .unwrap();
    let status = r.status().as_u16();
    let body: Value = r.body_mut().read_json().unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["request_echo"], first["request"]);
    assert_eq!(body["options"]["min_cost"]["status"], "optimal");
    assert!(d.join("s.jsonl").exists());
}

#[test]
fn serve_refuses_a_missing_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = itinera(&["serve", "--dataset", "nowhere.jsonl", "--port", "0"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere.jsonl"), "{}", stderr(&o));
    let o = itinera(&["serve", "--port", "0"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dataset_path"), "{}", stderr(&o));
}
