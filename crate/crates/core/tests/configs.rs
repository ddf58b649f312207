use std::path::Path;

use dot_admm::config::{load_scenario, parse_scenario, render_scenario};
use dot_admm::experiment::{run_scenario, PreparedScenario};
use dot_admm::report::{read_curve_csv, write_curve_csv};

fn shipped() -> Vec<std::path::PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    paths
}

#[test]
fn shipped_configs_load_and_round_trip() {
    let paths = shipped();
    assert!(paths.len() >= 5);
    for path in paths {
        let scenario = load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            parse_scenario(&render_scenario(&scenario)).unwrap(),
            scenario,
            "{}",
            path.display()
        );
        PreparedScenario::new(scenario).unwrap();
    }
}

#[test]
fn curve_csv_of_a_real_run_parses_back_losslessly() {
    let mut scenario = load_scenario(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/ring.cfg")).unwrap();
    scenario.horizon = 30;
    scenario.trials = 2;
    let result = run_scenario(&scenario).unwrap();
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &result).unwrap();
    let rows = read_curve_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), 30 * 3);
    for (row, tick) in rows.iter().zip(result.trials[0].ticks.iter()) {
        assert_eq!(row.tracking_error, tick.tracking_error);
        assert_eq!(row.consensus_error, tick.consensus_error);
    }
    let mut again = Vec::new();
    write_curve_csv(&mut again, &result).unwrap();
    assert_eq!(buf, again);
}
