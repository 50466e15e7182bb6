mod common;

use pauli_est::channel::{ChannelSpec, NoiseConfig, PauliChannel, ProbeBatch, ProbeFamily, ProbeRecord};
use pauli_est::fixtures;
use pauli_est::fourier::{
    collect_extended_batch, eigenvalue_samples, eigenvalue_table_text, estimate_eigenvalue, exact_eigenvalue,
    fourier_table, gl_coefficient, gl_marginal, gl_recover, gl_recover_batch, gl_term, rates_from_fourier,
};
use pauli_est::learner::{population_recover_fast, LearnerParams};
use pauli_est::pauli::{BitString, PauliString};
use pauli_est::rng::{seeded, substream};
use pauli_est::Error;

use common::{all_strings, random_rational_spec, random_sparse_spec};

fn p(s: &str) -> PauliString {
    s.parse().unwrap()
}

/// `A·C` from the bit pairs of each symbol.
fn dot_symbols(a: &[u8], c: &[u8]) -> u32 {
    a.iter()
        .zip(c)
        .map(|(&x, &y)| ((x & y) as u32).count_ones())
        .sum::<u32>()
        % 2
}

/// Every sent string paired with every atom, atom `i` repeated `w_i` times.
fn complete_extended_batch(spec: &ChannelSpec, weights: &[u32]) -> ProbeBatch {
    let n = spec.num_qubits();
    let mut batch = ProbeBatch::new(n, ProbeFamily::Extended);
    for sent in all_strings(n) {
        let sent = PauliString::from_symbols(&sent).unwrap();
        for ((c, _), &w) in spec.atoms().iter().zip(weights) {
            let rec = ProbeRecord {
                readout: sent.star(c).unwrap(),
                probe: sent.clone(),
                failed: BitString::zeros(n),
            };
            for _ in 0..w {
                batch.push(&rec).unwrap();
            }
        }
    }
    batch
}

#[test]
fn exact_eigenvalue_matches_symbol_formula() {
    let spec = fixtures::example_spec();
    for a in all_strings(5).into_iter().step_by(7) {
        let want: f64 = spec
            .atoms()
            .iter()
            .map(|(c, pc)| {
                let cs: Vec<u8> = c.symbols().collect();
                if dot_symbols(&a, &cs) == 0 {
                    *pc
                } else {
                    -*pc
                }
            })
            .sum();
        let got = exact_eigenvalue(&spec, &PauliString::from_symbols(&a).unwrap()).unwrap();
        assert!((got - want).abs() < 1e-15);
    }
    // X errors: eigenvalue +1 at σ_X (A = Ā of X), −1 at σ_Y and σ_Z.
    let x = ChannelSpec::point_mass(p("1"));
    assert_eq!(exact_eigenvalue(&x, &p("2")).unwrap(), 1.0);
    assert_eq!(exact_eigenvalue(&x, &p("1")).unwrap(), -1.0);
    assert_eq!(exact_eigenvalue(&x, &p("3")).unwrap(), -1.0);
}

#[test]
fn eigenvalue_estimates_converge() {
    let spec = fixtures::example_spec();
    let m = eigenvalue_samples(0.02, 0.01).unwrap();
    let mut rows = Vec::new();
    for (i, a) in ["00000", "12312", "30000", "11111", "02030"].iter().enumerate() {
        let est = estimate_eigenvalue(&spec, &p(a), m, &mut substream(1, i as u64)).unwrap();
        assert!(
            (est.value - exact_eigenvalue(&spec, &p(a)).unwrap()).abs() < 0.02,
            "{a}"
        );
        assert_eq!(est.samples, m);
        rows.push(est);
    }
    let text = eigenvalue_table_text(&rows);
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("00000 1 "));
}

#[test]
fn complete_extended_batch_gives_exact_coefficients() {
    let mut rng = seeded(2);
    for n in 1..=3 {
        let (spec, weights) = random_rational_spec(n, 3, &mut rng);
        let batch = complete_extended_batch(&spec, &weights);
        for b in all_strings(n) {
            let b = PauliString::from_symbols(&b).unwrap();
            let got = gl_coefficient(&batch, &b).unwrap();
            assert!((got - spec.probability(&b)).abs() < 1e-12, "{b}: {got}");
            let direct: f64 =
                batch.records().map(|r| gl_term(&r, &b).unwrap()).sum::<f64>() / batch.len() as f64;
            assert!((got - direct).abs() < 1e-12);
            for len in 1..=n {
                let prefix = b.prefix(len).unwrap();
                let got = gl_marginal(&batch, &prefix).unwrap();
                assert!((got - spec.marginal(&prefix).unwrap()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn fourier_path_is_additive_path_at_half_crossover() {
    let spec = random_sparse_spec(12, 4, 0.1, &mut seeded(3));
    let channel = PauliChannel::noiseless(spec.clone());
    let params = LearnerParams::new(0.2, 0.1).unwrap();
    let m = params.sample_count(12).unwrap();
    let batch = collect_extended_batch(&channel, m, &mut seeded(4)).unwrap();
    let gl = gl_recover_batch(&batch, &params).unwrap();
    let add = population_recover_fast(&batch, &params.with_r(0.5).unwrap()).unwrap();
    assert_eq!(gl, add);
    assert!(gl.hypothesis.max_error(&spec) < 0.2);
}

#[test]
fn fourier_recovery_finds_example_atoms() {
    let spec = fixtures::example_spec();
    let params = LearnerParams::new(0.1, 0.1).unwrap();
    let rec = gl_recover(&PauliChannel::noiseless(spec.clone()), &params, &mut seeded(5)).unwrap();
    assert_eq!(rec.hypothesis.len(), 4);
    assert!(rec.hypothesis.max_error(&spec) < 0.1);
}

#[test]
fn fourier_path_rejects_bad_batches() {
    let spec = fixtures::example_spec();
    let params = LearnerParams::new(0.1, 0.1).unwrap();
    let noisy = PauliChannel::new(spec.clone(), NoiseConfig::new(0.1).unwrap());
    assert!(matches!(
        gl_recover(&noisy, &params, &mut seeded(6)),
        Err(Error::NoisyBatch)
    ));
    let batch = pauli_est::channel::probe_batch(&spec, 10, NoiseConfig::noiseless(), &mut seeded(7)).unwrap();
    assert!(matches!(
        gl_coefficient(&batch, &p("00000")),
        Err(Error::WrongProbeFamily { .. })
    ));
}

#[test]
fn transform_round_trip() {
    let mut rng = seeded(8);
    for n in 1..=4 {
        let spec = random_sparse_spec(n, 5, 0.0, &mut rng);
        let table = fourier_table(&spec).unwrap();
        for (i, &f) in table.iter().enumerate() {
            let a = PauliString::from_index(n, i as u64);
            assert!((f - exact_eigenvalue(&spec, &a).unwrap()).abs() < 1e-12);
        }
        let rates = rates_from_fourier(&table).unwrap();
        for (i, &r) in rates.iter().enumerate() {
            let c = PauliString::from_index(n, i as u64);
            assert!((r - spec.probability(&c)).abs() < 1e-12);
        }
    }
    let big = ChannelSpec::point_mass(PauliString::identity(9));
    assert!(matches!(
        fourier_table(&big),
        Err(Error::TooManyQubits { n: 9, .. })
    ));
    assert!(rates_from_fourier(&[0.0; 8]).is_err());
}
