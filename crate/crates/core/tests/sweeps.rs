use ids_bandit::experiments::{
    delta_r_cell, ids_regret, max_regret_vs_theta, optimal_regret, run_manifest, ExperimentKind, ParamList,
    SweepManifest, SweepSettings,
};
use ids_bandit::{BanditSpec, DiscountedProblem};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn regret_curves_vanish_at_one_half_and_peak_earlier_for_longer_horizons() {
    let settings = SweepSettings::new(401, 1e-10).unwrap();
    let thetas = linspace(0.5, 1.0, 51);
    let rows = max_regret_vs_theta(&[0.9, 0.99], &thetas, true, 0.0, &settings);
    assert!(rows.iter().all(|r| r.is_ok()));
    let curve = |gamma: f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.params[1] == gamma)
            .map(|r| (r.params[0], r.metric(0).unwrap()))
            .collect()
    };
    let mut peaks = Vec::new();
    for gamma in [0.9, 0.99] {
        let c = curve(gamma);
        let err = 1e-10 * gamma / (1.0 - gamma) + 1e-12;
        assert!(c[0].1.abs() < err, "theta = 1/2 gives {}", c[0].1);
        assert!((c.last().unwrap().1 - 0.5).abs() < err, "theta = 1 gives {}", c.last().unwrap().1);
        peaks.push(c.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0);
    }
    assert!(peaks[1] < peaks[0], "peaks {peaks:?}");

    let fair = max_regret_vs_theta(&[0.9, 0.99], &[0.5], false, 0.0, &settings);
    assert!(fair.iter().all(|r| r.metric(0).unwrap().abs() < 1e-7));
}

#[test]
fn ids_never_beats_the_optimum() {
    let settings = SweepSettings::new(401, 1e-11).unwrap();
    for (tm, tp) in [(0.6, 0.8), (0.9, 0.55), (0.7, 0.7)] {
        let prob = DiscountedProblem::new(BanditSpec::new(tm, tp).unwrap(), 0.95).unwrap();
        let opt = optimal_regret(&prob, &settings).unwrap();
        for alpha in [0.0, 0.5, 1.0] {
            let ids = ids_regret(&prob, alpha, &settings).unwrap();
            for (ro, ri) in opt.regret.values().iter().zip(ids.regret.values()) {
                assert!(ri >= &(ro - 1e-8));
            }
        }
    }
}

#[test]
fn diagonal_cells_have_no_gap() {
    let settings = SweepSettings::new(401, 1e-11).unwrap();
    for t in [0.55, 0.75, 0.95] {
        let (gaps, _) = delta_r_cell(BanditSpec::symmetric(t).unwrap(), 0.99, &[0.0, 0.5, 1.0], &settings).unwrap();
        for g in gaps {
            assert!(g.abs() < 1e-4, "theta={t}: {g}");
        }
    }
}

fn manifest(dir: &std::path::Path) -> SweepManifest {
    SweepManifest {
        kind: ExperimentKind::Heatmap,
        theta_minus: Some(ParamList::Linspace { start: 0.6, stop: 0.9, count: 3 }),
        theta_plus: ParamList::Values(vec![0.6, 0.8]),
        gammas: ParamList::Values(vec![0.9]),
        alphas: None,
        symmetric: false,
        beta0: 0.0,
        grid_points: Some(201),
        tol: None,
        max_sweeps: None,
        output_dir: dir.to_path_buf(),
    }
}

#[test]
fn manifests_produce_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path());
    let a = run_manifest(&m, Some(3)).unwrap();
    let first = std::fs::read(&a.csv_path).unwrap();
    let b = run_manifest(&m, Some(1)).unwrap();
    assert_eq!(a.csv_path, b.csv_path);
    assert_eq!(first, std::fs::read(&b.csv_path).unwrap());

    let name = a.csv_path.file_name().unwrap().to_str().unwrap();
    assert_eq!(name, format!("heatmap_{}.csv", m.hash()));
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_minus,theta_plus,alpha,delta_R"));
    assert_eq!(lines.count(), 3 * 2 * 2);

    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(&a.json_path).unwrap()).unwrap();
    assert_eq!(summary["manifest"]["kind"], "heatmap");
    assert_eq!(summary["rows"].as_array().unwrap().len(), 12);
    assert_eq!(summary["rows"][0]["status"], "ok");
    assert!(summary["provenance"]["wall_time_secs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn failed_rows_are_flushed_with_markers() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = manifest(dir.path());
    m.kind = ExperimentKind::MaxRegretCurve;
    m.theta_minus = None;
    m.symmetric = true;
    m.tol = Some(1e-12);
    m.max_sweeps = Some(5);
    let out = run_manifest(&m, Some(2)).unwrap();
    assert_eq!(out.result.provenance.failed_rows, 2);
    let text = std::fs::read_to_string(&out.csv_path).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",failed")));
    let summary = std::fs::read_to_string(&out.json_path).unwrap();
    assert!(summary.contains("\"failed\""));
}

#[test]
fn scaling_sweep_fits_a_logarithm() {
    let dir = tempfile::tempdir().unwrap();
    let m = SweepManifest::from_json(&format!(
        r#"{{"kind": "regret_scaling", "theta_minus": [0.5], "theta_plus": [0.7],
            "gammas": [0.8, 0.9, 0.95, 0.98], "grid_points": 401, "output_dir": {:?}}}"#,
        dir.path()
    ))
    .unwrap();
    let out = run_manifest(&m, None).unwrap();
    let fit = out.result.fit_opt.as_ref().unwrap();
    assert!(fit.c2 < 0.0);
    let rows = &out.result.rows;
    // longer horizons cost more regret, and IDS(0) is never better
    for w in rows.windows(2) {
        assert!(w[1].metric(0).unwrap() > w[0].metric(0).unwrap());
    }
    for r in rows {
        assert!(r.metric(1).unwrap() >= r.metric(0).unwrap() - 1e-8);
    }
}

#[test]
fn alpha_search_reports_the_minimizer() {
    let dir = tempfile::tempdir().unwrap();
    let m = SweepManifest::from_json(&format!(
        r#"{{"kind": "optimal_alpha", "theta_minus": [0.6], "theta_plus": [0.8], "gammas": [0.9],
            "alphas": {{"start": 0.0, "stop": 1.0, "count": 5}}, "grid_points": 201, "output_dir": {:?}}}"#,
        dir.path()
    ))
    .unwrap();
    let out = run_manifest(&m, None).unwrap();
    let best = out.result.best_alpha.unwrap();
    let min = out.result.rows.iter().map(|r| r.metric(0).unwrap()).fold(f64::INFINITY, f64::min);
    let at_best = out.result.rows.iter().find(|r| r.params[0] == best).unwrap().metric(0).unwrap();
    assert_eq!(at_best, min);
}
