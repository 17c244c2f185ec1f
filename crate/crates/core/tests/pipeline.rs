use std::fs;

use nbpolar::config::{load_construction, CodeConfig};
use nbpolar::construction::mc_construct;
use nbpolar::fastnodes::{classify, ClassifyOptions, NodeKind, SpcMode};
use nbpolar::latency::ledger;
use nbpolar::lnbsc::{Arith, CnMode};
use nbpolar::sim::{run_simulation, DecoderOptions, SimConfig, WORKERS_ENV};

const TEMPLATE: &str = r#"
length = 64
k = 32
construction = "c64.json"

[field]
p = 4
poly = "10011"

[kernel]
gamma = "a^4"
"#;

#[test]
fn construct_then_load_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CodeConfig::from_toml(TEMPLATE).unwrap();
    let template = cfg.template().unwrap();
    let res = mc_construct(&template, 32, 1.0, 1000, 9, Arith::float(CnMode::Ems)).unwrap();
    assert_eq!(res.info_set.len(), 32);
    assert_eq!(res.errors.len(), 64);
    fs::write(dir.path().join("c64.json"), serde_json::to_string(&res).unwrap()).unwrap();
    fs::write(dir.path().join("code.toml"), TEMPLATE).unwrap();

    let (cfg, base) = CodeConfig::load(&dir.path().join("code.toml")).unwrap();
    let code = cfg.build(&base).unwrap();
    assert_eq!(code.info_set(), res.info_set.as_slice());
    assert_eq!(load_construction(&dir.path().join("c64.json")).unwrap(), res);

    let wrong_k = TEMPLATE.replace("k = 32", "k = 31");
    assert!(CodeConfig::from_toml(&wrong_k).unwrap().build(&base).is_err());
}

#[test]
fn fast_ledger_is_cheaper_than_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CodeConfig::from_toml(TEMPLATE).unwrap();
    let res = mc_construct(&cfg.template().unwrap(), 32, 1.0, 500, 2, Arith::float(CnMode::Ems)).unwrap();
    fs::write(dir.path().join("c64.json"), serde_json::to_string(&res).unwrap()).unwrap();
    let code = cfg.build(dir.path()).unwrap();
    let plan = classify(&code, &ClassifyOptions::default());
    assert_eq!(plan.kind(nbpolar::NodeId::root(6)).map(|k| k == NodeKind::Generic), Some(true));
    let full = ledger(&code, &plan, SpcMode::Full);
    let simple = ledger(&code, &plan, SpcMode::Simplified);
    assert!(full.total_steps < full.baseline_steps);
    assert!(simple.total_steps <= full.total_steps);
    assert!(full.total_min_steps <= full.total_steps);
    assert_eq!(full.baseline_steps, 4 * 64 - 4);
}

#[test]
fn simulation_does_not_depend_on_worker_count() {
    let cfg = CodeConfig::from_toml(&TEMPLATE.replace("construction = \"c64.json\"", "info_set = [15, 23, 27, 29, 30, 31, 39, 43, 45, 46, 47, 51, 53, 54, 55, 56, 57, 58, 59, 60, 61, 62, 63, 28, 44, 52, 26, 42, 50, 22, 38, 14]")).unwrap();
    let code = cfg.build(std::path::Path::new(".")).unwrap();
    let sim = SimConfig {
        snr_db: vec![0.0, 1.5],
        decoder: DecoderOptions::default(),
        min_frame_errors: 40,
        max_frames: 3000,
        seed: 11,
    };
    std::env::set_var(WORKERS_ENV, "1");
    let one = run_simulation(&code, &sim).unwrap();
    std::env::set_var(WORKERS_ENV, "3");
    let three = run_simulation(&code, &sim).unwrap();
    std::env::remove_var(WORKERS_ENV);
    let key = |r: &nbpolar::sim::SimResult| r.points.iter().map(|p| (p.frames, p.frame_errors, p.bit_errors)).collect::<Vec<_>>();
    assert_eq!(key(&one), key(&three));
    assert_eq!(one.config_hash, three.config_hash);
    assert!(one.points[0].fer >= one.points[1].fer);
}
