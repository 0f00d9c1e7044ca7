use std::path::Path;
use std::process::{Command, Output};

fn qptopo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qptopo")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn label_of_vertical_direction_is_closed() {
    let dir = tempfile::tempdir().unwrap();
    let o = qptopo(&["label", "--model", "c3", "--level", "0", "--dir", "0,0,1", "--res", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["label"]["kind"], "AllClosed");
    assert!(listing(dir.path()).is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qptopo(&["label", "--model", "nosuch", "--dir", "0,0,1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("unknown_model") && err.contains("--help"));
    assert_eq!(qptopo(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(qptopo(&["scan", "--model", "c3", "--grid", "0"], dir.path()).status.code(), Some(2));
    // Computation failure: the map has no boundary cells to measure.
    std::fs::write(
        dir.path().join("flat.csv"),
        "# field=c3\n# mode=full\n# level=0\n# resolution=32\n# cells_per_unit=2\n# window=0,0,2,2\n# rule=common_denominator\n\
         bx_num,bx_den,by_num,by_den,label_or_status\n1,3,1,3,closed\n2,3,1,3,closed\n1,3,2,3,closed\n2,3,2,3,closed\n",
    )
    .unwrap();
    let o = qptopo(&["dim", "--map", "flat.csv", "--scales", "4"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let line = String::from_utf8_lossy(&o.stderr).lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["error"]["kind"], "degenerate_fit");
}

#[test]
fn model_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/noble_like.model");
    let o = qptopo(&["model", "check", model], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["terms"], 9);
    let o = qptopo(&["model", "show", model], dir.path());
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(dir.path().join("bad.model"), "dim = 3\n1 0 amplitude\n").unwrap();
    assert_eq!(qptopo(&["model", "check", "bad.model"], dir.path()).status.code(), Some(2));
}

#[test]
fn mesh_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = qptopo(&["mesh", "extract", "--model", "c3", "--res", "16", "--out", "s.obj", "--copies", "2,1,1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(dir.path()), ["s.obj", "s.obj.manifest.json"]);
    let obj = std::fs::read_to_string(dir.path().join("s.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")) && obj.lines().any(|l| l.starts_with("f ")));
    let o = qptopo(&["mesh", "report", "--model", "c3", "--res", "32"], dir.path());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "component,triangles,vertices,edges,euler,genus,rank"));
    assert!(text.lines().last().unwrap().ends_with(",-4,3,3"));
    let o = qptopo(&["homology", "basis", "--model", "c3", "--res", "16"], dir.path());
    assert!(stdout(&o).contains("# push_forward"));
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan", "--model", "c3", "--grid", "4", "--res", "24", "--out", "m.csv", "--png", "m.ppm", "--svg", "m.svg",
    ];
    assert_eq!(qptopo(&args, dir.path()).status.code(), Some(0));
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    let before = [read("m.csv"), read("m.ppm"), read("m.svg")];
    let o = qptopo(&["replay", "m.csv.manifest.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!([read("m.csv"), read("m.ppm"), read("m.svg")], before);

    let mut threaded = vec!["--threads", "1"];
    threaded.extend_from_slice(&args);
    threaded[10] = "t.csv";
    threaded[12] = "t.ppm";
    threaded[14] = "t.svg";
    assert_eq!(qptopo(&threaded, dir.path()).status.code(), Some(0));
    assert_eq!(read("t.csv"), before[0]);
    assert_eq!(read("t.ppm"), before[1]);

    let o = qptopo(&["dim", "--map", "m.csv", "--scales", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = qptopo(&["render", "--map", "m.csv", "--out", "r.svg"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read("r.svg"), before[2]);
    let manifest: serde_json::Value = serde_json::from_slice(&read("r.svg.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "render");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn trace_writes_polyline_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = qptopo(
        &[
            "trace", "--model", "c3", "--normal", "1,2,5", "--offset", "0.1,0.2,0.3", "--start", "0.3,0.1", "--max-arc",
            "50", "--out", "o.csv", "--plot", "o.svg",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y"));
    assert_eq!(csv.lines().count() - 1, v["points"].as_u64().unwrap() as usize);
    let o = qptopo(&["trace", "--model", "c3", "--normal", "0,0,0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
