use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxgraph")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const QUERY_FLAGS: &[&str] = &[
    "--data", "base.fvecs", "--index", "idx.pxg", "--queries", "q.fvecs", "--gt", "gt.ivecs", "--gt-dists", "gt.fvecs",
];

fn pipeline(dir: &Path) -> (Vec<u8>, Vec<String>) {
    ok(dir, &["gen", "--out", "base.fvecs", "--n", "2000", "--d", "8", "--seed", "5"]);
    ok(dir, &["gen", "--out", "q.fvecs", "--n", "25", "--noise-from", "base.fvecs", "--sigma2", "0.001", "--seed", "6"]);
    ok(dir, &["gt", "--data", "base.fvecs", "--queries", "q.fvecs", "--k", "10", "--out-ids", "gt.ivecs", "--out-dists", "gt.fvecs"]);
    std::fs::write(dir.join("run.cfg"), "# shared settings\nR=12\nLbuild=32\nss=kd:trees=2,visits=64\nk=10\nL=10,20,40\nreps=3\ntrim=1\n").unwrap();
    let stats = ok(dir, &["--config", "run.cfg", "build", "--data", "base.fvecs", "--out", "idx.pxg"]);
    assert!(stats.starts_with("builder,n,d,R,Lbuild,nd,ss,dist_calcs,wall_ms,peak_mem_bytes\n"));
    assert!(stats.contains("ii,2000,8,12,32,rnd,"));
    let mut args = vec!["--config", "run.cfg", "bench"];
    args.extend_from_slice(QUERY_FLAGS);
    let csv = ok(dir, &args);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dataset,n,d,builder,nd,ss,R,L_build,k,L,nprobe,recall,dist_calcs,hops,qps,wall_ms_total,seed");
    assert_eq!(lines.len(), 4);
    // recall and dist_calcs columns, located from the right because ss may be quoted
    let cols = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.rsplitn(7, ',').collect();
            format!("{} {}", f[5], f[4])
        })
        .collect();
    (std::fs::read(dir.join("idx.pxg")).unwrap(), cols)
}

#[test]
fn pipeline_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ia, ca) = pipeline(a.path());
    let (ib, cb) = pipeline(b.path());
    assert_eq!(ia, ib);
    assert_eq!(ca, cb);

    let mut args = vec!["search", "--L", "40"];
    args.extend_from_slice(QUERY_FLAGS);
    let per_query = ok(a.path(), &args);
    assert!(per_query.starts_with("query,recall,dist_calcs,hops,wall_ns\n"));
    assert_eq!(per_query.lines().count(), 26);

    let stats = ok(a.path(), &["stats", "--data", "base.fvecs", "--queries", "q.fvecs", "--k", "10", "--dataset", "toy"]);
    assert!(stats.starts_with("dataset,k,mean_lid,mean_lrc,excluded\ntoy,10,"));
}

#[test]
fn every_builder_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--out", "base.fvecs", "--n", "800", "--d", "6", "--clusters", "4", "--std-dev", "0.05"]);
    ok(d, &["gen", "--out", "q.fvecs", "--n", "10", "--noise-from", "base.fvecs"]);
    ok(d, &["gt", "--data", "base.fvecs", "--queries", "q.fvecs", "--k", "10", "--out-ids", "gt.ivecs", "--out-dists", "gt.fvecs"]);
    for (builder, extra) in [("np", "--iters=5"), ("dc", "--partitions=3"), ("vamana2r", "--nd=rrnd:alpha=1.2"), ("ii", "--ss=sn:M=8")] {
        ok(d, &["build", "--data", "base.fvecs", "--out", "idx.pxg", "--builder", builder, "--R", "10", "--Lbuild", "30", extra]);
        let mut args = vec!["bench", "--L", "20,80", "--nprobe", "1,2", "--reps", "1", "--trim", "0"];
        args.extend_from_slice(QUERY_FLAGS);
        let csv = ok(d, &args);
        assert!(csv.lines().nth(1).unwrap().contains(&format!(",{builder},")), "{csv}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--out", "base.fvecs", "--n", "100", "--d", "4"]);
    ok(d, &["gen", "--out", "raw.f32", "--n", "10", "--d", "4", "--raw-n", "10", "--raw-d", "4"]);
    assert_eq!(std::fs::metadata(d.join("raw.f32")).unwrap().len(), 160);
    ok(d, &["stats", "--data", "raw.f32", "--queries", "raw.f32", "--raw-n", "10", "--raw-d", "4", "--k", "3"]);

    let code = |args: &[&str]| run(d, args).status.code().unwrap();
    assert_eq!(code(&["build", "--data", "base.fvecs", "--out", "x", "--R", "1"]), 2);
    assert_eq!(code(&["build", "--data", "base.fvecs", "--out", "x", "--nd", "mond:theta=30"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["build", "--data", "missing.fvecs", "--out", "x"]), 3);
    std::fs::write(d.join("short.fvecs"), [4u8, 0, 0, 0, 1, 2]).unwrap();
    assert_eq!(code(&["stats", "--data", "short.fvecs", "--queries", "base.fvecs"]), 3);
    std::fs::write(d.join("bad.cfg"), "nonsense=1\n").unwrap();
    assert_eq!(code(&["--config", "bad.cfg", "stats", "--data", "base.fvecs", "--queries", "base.fvecs"]), 2);
}
