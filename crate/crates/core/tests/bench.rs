use vfold_core::cli::to_markdown;
use vfold_core::experiments::{benchmark, run_replication, Bench};
use vfold_core::histogram::ModelShape;
use vfold_core::selectors::parse_selector_list;

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) }
}

#[test]
fn selector_order_does_not_change_rows() {
    let bench = Bench::preset("S1").unwrap();
    let a = benchmark(&bench, &parse_selector_list("mal,2fcv,pen5f+,epenid").unwrap(), 6, 11, Some(1)).unwrap();
    let b = benchmark(&bench, &parse_selector_list("epenid,pen5f+,mal,2fcv").unwrap(), 6, 11, Some(1)).unwrap();
    for ra in &a.rows {
        let rb = b.rows.iter().find(|r| r.selector == ra.selector).unwrap();
        assert_eq!(ra.c_or.to_bits(), rb.c_or.to_bits(), "{}", ra.selector);
        assert_eq!(ra.c_path_or.to_bits(), rb.c_path_or.to_bits(), "{}", ra.selector);
        assert_eq!(ra.drops, rb.drops, "{}", ra.selector);
    }
}

#[test]
fn oracle_selector_is_never_beaten() {
    let bench = Bench::preset("S1").unwrap();
    let specs = parse_selector_list("oracle,mal,loo").unwrap();
    for rep in 0..5 {
        let r = run_replication(&bench, &specs, 3, rep).unwrap();
        assert!((r.selectors[0].loss - r.oracle_loss).abs() <= 1e-15 * r.oracle_loss);
        for s in &r.selectors[1..] {
            assert!(s.loss >= r.oracle_loss);
        }
    }
}

#[test]
fn noiseless_half_gets_finer_cells() {
    let bench = Bench::preset("Svar2").unwrap();
    let specs = parse_selector_list("oracle,epenid,penloo+,10fcv").unwrap();
    let reps: Vec<_> = (0..40).map(|rep| run_replication(&bench, &specs, 5, rep).unwrap()).collect();
    for (s, spec) in specs.iter().enumerate() {
        let (d1, d2): (Vec<f64>, Vec<f64>) = reps
            .iter()
            .map(|r| match bench.collection.models[r.selectors[s].chosen].shape {
                ModelShape::TwoBin(a, b) => (a as f64, b as f64),
                _ => (1.0, 1.0),
            })
            .unzip();
        // sigma vanishes on [0, 1/2), so cells there only reduce bias
        assert!(median(d1) > median(d2), "{spec}");
    }
}

#[test]
fn s1_markdown_matches_golden() {
    let bench = Bench::preset("S1").unwrap();
    let specs = parse_selector_list(vfold_core::cli::DEFAULT_SELECTORS).unwrap();
    let table = benchmark(&bench, &specs, 10, 1, Some(2)).unwrap();
    let got = to_markdown(std::slice::from_ref(&table));
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/s1_n10_seed1.md");
    if std::env::var_os("VFOLD_BLESS").is_some() {
        std::fs::write(path, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(path).unwrap());
}

#[test]
fn every_preset_builds_its_oracle() {
    for name in vfold_core::experiments::PRESET_NAMES {
        let bench = Bench::preset(name).unwrap();
        assert_eq!(bench.scenario.name, name);
    }
}
