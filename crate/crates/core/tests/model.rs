use std::fs;

use proptest::prelude::*;
use richards_cem::mesh::StructuredGrid;
use richards_cem::model::{
    builtin_experiment, default_data_dir, eval_conductivity, eval_transfer, load_field_raster, ExperimentId,
    Nonlinearity, Transfer, TransferLaw,
};
use richards_cem::Error;

#[test]
fn conductivity_examples() {
    let g = Nonlinearity::Gardner { alpha: 0.1 };
    assert_eq!(eval_conductivity(&g, 1.0, 0.0), 1.0);
    assert!((eval_conductivity(&g, 1.0, 10.0) - 0.367879).abs() < 1e-6);
    assert_eq!(eval_conductivity(&Nonlinearity::InverseShift, 10.0, 1.0), 5.0);
    assert_eq!(eval_conductivity(&Nonlinearity::Exponential, 2.0, 0.0), 2.0);
}

#[test]
fn transfer_examples() {
    let t10 = Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta: 10.0 });
    assert_eq!(eval_transfer(&t10, 0, 1, 0.0, 3.0), 10.0);
    let t100 = Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta: 100.0 });
    assert_eq!(eval_transfer(&t100, 0, 1, 1.0, 0.0), 50.0);
    assert_eq!(eval_transfer(&Transfer::none(2), 0, 1, 1.0, 0.0), 0.0);
}

#[test]
fn builtin_experiment_shapes() {
    let data = default_data_dir();
    let e2 = builtin_experiment(ExperimentId::E2, &data, 64).unwrap();
    assert_eq!(e2.time.unwrap().steps, 20);
    assert!((e2.tau().unwrap() - 0.1).abs() < 1e-15);
    let e3 = builtin_experiment(ExperimentId::E3, &data, 64).unwrap();
    assert_eq!(e3.n_continua(), 2);
    let e1 = builtin_experiment(ExperimentId::E1, &data, 128).unwrap();
    assert_eq!(e1.n_continua(), 1);
    assert!(e1.transfer.is_zero());
    let levels: std::collections::BTreeSet<u64> = e1.continua[0].field.values().iter().map(|v| v.to_bits()).collect();
    assert_eq!(levels.len(), 2);
    assert_eq!((e1.continua[0].field.min(), e1.continua[0].field.max()), (10.0, 1000.0));
    let e4 = builtin_experiment(ExperimentId::E4, &data, 128).unwrap();
    assert_eq!((e4.continua[0].field.min(), e4.continua[0].field.max()), (10.0, 1e4));
    assert_eq!((e4.continua[1].field.min(), e4.continua[1].field.max()), (1.0, 10.0));

    let empty = tempfile::tempdir().unwrap();
    assert!(builtin_experiment(ExperimentId::E1, empty.path(), 32).is_err());
}

#[test]
fn raster_ingestion() {
    let dir = tempfile::tempdir().unwrap();
    let grid = StructuredGrid::new(2).unwrap();
    let ok = dir.path().join("ok.txt");
    fs::write(&ok, "2 2\n1 1\n1 1\n").unwrap();
    let f = load_field_raster(&ok, &grid).unwrap();
    assert!(f.values().iter().all(|v| *v == 1.0));

    let zero = dir.path().join("zero.txt");
    fs::write(&zero, "2 2\n1 1\n0 1\n").unwrap();
    let err = load_field_raster(&zero, &grid).unwrap_err().to_string();
    assert!(err.contains("(0, 1)"), "{err}");

    let big = dir.path().join("big.txt");
    fs::write(&big, "3 3\n1 1 1\n1 1 1\n1 1 1\n").unwrap();
    assert!(matches!(load_field_raster(&big, &grid), Err(Error::RasterDimensions { .. })));

    let junk = dir.path().join("junk.txt");
    fs::write(&junk, "2 2\n1 x\n1 1\n").unwrap();
    assert!(load_field_raster(&junk, &grid).is_err());
}

proptest! {
    #[test]
    fn bounded_laws_never_exceed_the_field(kappa in 1e-3f64..1e4, p in -1e3f64..1e3, alpha in 0.01f64..1.0) {
        for nl in [Nonlinearity::InverseShift, Nonlinearity::Gardner { alpha }] {
            let v = eval_conductivity(&nl, kappa, p);
            prop_assert!(v >= 0.0 && v <= kappa);
        }
        let e = eval_conductivity(&Nonlinearity::Exponential, kappa, p.clamp(-50.0, 50.0));
        prop_assert!((e - kappa * p.clamp(-50.0, 50.0).exp()).abs() <= 1e-12 * e);
    }

    #[test]
    fn transfer_is_bounded_by_beta(beta in 1e-3f64..1e3, pi in -1e6f64..1e6, pl in -1e6f64..1e6) {
        let t = Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta });
        let q = eval_transfer(&t, 0, 1, pi, pl);
        prop_assert!(q > 0.0 && q <= beta);
    }
}
