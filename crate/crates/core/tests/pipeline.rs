use scramblab::analytic::{avg_purity_approx, avg_purity_exact, pure_bound, BoundCurve, PartitionDims};
use scramblab::ensembles::EnsembleKind;
use scramblab::io::{self, CurveMetadata};
use scramblab::ramp::{classify, validate_against_theory, ClassifyMode};
use scramblab::scrambling::{run_experiment, ExperimentConfig, SubsetStrategy};
use scramblab::Rational;

fn config(n: usize, samples: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(n, 0, EnsembleKind::Haar, samples, SubsetStrategy::All, seed).unwrap()
}

#[test]
fn curve_survives_csv_round_trip_and_classifies() {
    let cfg = config(8, 40, 3);
    let out = run_experiment::<f64>(&cfg).unwrap();
    let dir = std::env::temp_dir().join(format!("scramblab-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    io::write_curve(&path, &out.curve, &CurveMetadata::for_config(&cfg)).unwrap();
    let (back, meta) = io::read_curve(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(meta.unwrap().config.unwrap(), cfg);
    assert_eq!(back.rows.len(), 9);
    for (a, b) in out.curve.rows.iter().zip(&back.rows) {
        assert_eq!((a.l, a.subsets, a.samples), (b.l, b.subsets, b.samples));
        assert!((a.mean_i - b.mean_i).abs() <= 1e-11 * a.mean_i.abs().max(1e-300));
    }
    let p = classify(&back, 0.05, 0.05, 2.0, ClassifyMode::Mean).unwrap();
    let q = classify(&out.curve, 0.05, 0.05, 2.0, ClassifyMode::Mean).unwrap();
    assert_eq!((p.b, p.g), (q.b, q.g));
    assert!(p.b < 4 && p.g > 4);
    let report = validate_against_theory(&p, p.epsilon_search.unwrap()).unwrap();
    assert_eq!(report.measured.b, p.b);
}

#[test]
fn single_precision_tracks_double() {
    let cfg = config(6, 20, 11);
    let a = run_experiment::<f64>(&cfg).unwrap().curve;
    let b = run_experiment::<f32>(&cfg).unwrap().curve;
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.mean_i - y.mean_i).abs() < 1e-3, "ℓ={}: {} vs {}", x.l, x.mean_i, y.mean_i);
    }
}

#[test]
fn haar_curve_sits_under_pure_bound() {
    let curve = run_experiment::<f64>(&config(8, 60, 5)).unwrap().curve;
    for row in &curve.rows {
        let bound = pure_bound(8.0, row.l as f64).min(2.0);
        assert!(row.mean_i <= bound + 3.0 * row.std_error + 1e-9, "ℓ={}", row.l);
    }
    let bounds = BoundCurve::new(8, 0).unwrap();
    assert_eq!(bounds.points.len(), 9);
}

#[test]
fn exact_and_float_purity_agree() {
    for (m, a, c) in [(2u32, 1u32, 1u32), (3, 1, 2), (4, 2, 2)] {
        let dims = PartitionDims::qubits(m, a, c).unwrap();
        let r: Rational = avg_purity_exact(&dims);
        let f: f64 = avg_purity_exact(&dims);
        assert!((*r.numer() as f64 / *r.denom() as f64 - f).abs() < 1e-14);
        let approx: f64 = avg_purity_approx(&dims);
        assert!((approx - f).abs() < 0.1);
    }
}
