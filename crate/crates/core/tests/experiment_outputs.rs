use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use semsim::experiment::{parse_config, run_experiment, ExperimentSpec};

fn small_spec(out: &Path) -> ExperimentSpec {
    let text = "\
# a reduced grid
actors = 10
concepts = 80
instances = 80
cap = 3000
stop = 40
algo = indegree, pagerank
ue_sa = 1.0, 2.0
seeds = 1-3
scan = never
";
    let overrides = vec![("out".to_string(), out.display().to_string())];
    parse_config(Some(text), &overrides).unwrap()
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn field(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        Some(s.parse().unwrap())
    }
}

#[test]
fn files_medians_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let spec = small_spec(&out);
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.cells.len(), 12);
    assert!(report.scan.is_none());

    let files = read_dir(&out);
    let traces: Vec<_> = files
        .keys()
        .filter(|k| k.ends_with(".csv") && k.contains("_seed"))
        .collect();
    assert_eq!(traces.len(), 12);
    assert!(files.contains_key("pagerank_ue2.0_seed3.json"));
    assert!(files.contains_key("aggregate.csv"));

    // Recompute the aggregate from the per-cell files.
    let aggregate = String::from_utf8(files["aggregate.csv"].clone()).unwrap();
    let mut lines = aggregate.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let mut rows = 0;
    for line in lines {
        rows += 1;
        let f: Vec<&str> = line.split(',').collect();
        let (algo, level) = (f[col("algorithm")], f[col("ue_sa")]);
        let (mut entropy, mut top1, mut top10, mut rate) = (vec![], vec![], vec![], vec![]);
        let mut stopped = 0;
        for seed in 1..=3 {
            let stem = format!("{algo}_ue{level}_seed{seed}");
            let trace = String::from_utf8(files[&format!("{stem}.csv")].clone()).unwrap();
            let last: Vec<&str> = trace.lines().last().unwrap().split(',').collect();
            if last[0] != "sa_index" {
                entropy.extend(field(last[2]));
                top1.extend(field(last[3]));
                top10.extend(field(last[4]));
            }
            let json: serde_json::Value =
                serde_json::from_slice(&files[&format!("{stem}.json")]).unwrap();
            if let Some(r) = json["execution_rates"]["semantic_annotation"].as_f64() {
                rate.push(r);
            }
            if json["termination"] == "stop_reached" {
                stopped += 1;
            }
        }
        assert_eq!(f[col("runs")], "3");
        assert_eq!(f[col("stop_reached")], stopped.to_string());
        assert_eq!(field(f[col("median_final_entropy")]), median(entropy));
        assert_eq!(field(f[col("median_top1_quality")]), median(top1));
        assert_eq!(field(f[col("median_top10_quality")]), median(top10));
        assert_eq!(field(f[col("median_sa_rate")]), median(rate));
    }
    assert_eq!(rows, 4);

    // A second run into a fresh directory is byte-identical, apart from the
    // recorded output path.
    let out_b = tmp.path().join("b");
    run_experiment(&small_spec(&out_b)).unwrap();
    let again = read_dir(&out_b);
    assert_eq!(files.len(), again.len());
    for (name, bytes) in &files {
        if name != "experiment.json" {
            assert_eq!(bytes, &again[name], "{name}");
        }
    }
}

#[test]
fn optional_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("dumps");
    let mut spec = small_spec(&out);
    spec.algorithms.truncate(1);
    spec.ue_sa.truncate(1);
    spec.seeds = vec![9];
    spec.write_events = true;
    spec.dump_pools = true;
    spec.base.snapshot_interval = Some(100);
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.aggregate.len(), 1);
    let stem = "indegree_ue1.0_seed9";
    let events = fs::read_to_string(out.join(format!("{stem}_events.csv"))).unwrap();
    assert_eq!(
        events.lines().count() as u64,
        report.cells[0].summary.iterations + 1
    );
    let pools = fs::read_to_string(out.join(format!("{stem}_pools.csv"))).unwrap();
    assert_eq!(pools.lines().count(), 1 + 10 + 80 + 80);
    let rankings = out.join(format!("{stem}_rankings"));
    assert!(rankings.join("iter100.csv").exists());
}

#[test]
fn unwritable_output_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let spec = small_spec(&blocker.join("sub"));
    assert!(run_experiment(&spec).is_err());
}
