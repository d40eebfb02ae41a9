use super::*;
use num_complex::Complex64;
use proptest::prelude::*;

const EPS: f64 = DEFAULT_EPS;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dm(label: &str) -> DensityOperator {
    outer(&ket(label).unwrap())
}

#[test]
fn ket_basis_labels() {
    let zero = ket("0").unwrap();
    assert_eq!(zero.amp(0), c(1.0, 0.0));
    assert_eq!(zero.amp(1), c(0.0, 0.0));

    let plus = ket("+").unwrap();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    assert!((plus.amp(0) - c(s2, 0.0)).norm() < EPS);
    assert!((plus.amp(1) - c(s2, 0.0)).norm() < EPS);

    let zz = ket("00").unwrap();
    assert_eq!(zz.dim(), 4);
    assert_eq!(zz.amp(0), c(1.0, 0.0));
    for i in 1..4 {
        assert_eq!(zz.amp(i), c(0.0, 0.0));
    }

    let mi = ket("-i").unwrap();
    assert!((mi.amp(1) - c(0.0, -s2)).norm() < EPS);
    // greedy: "-i0" is (-i) tensor 0, a two-qubit label
    assert_eq!(ket("-i0").unwrap().n_qubits(), 2);

    assert!(ket("2").is_err());
    assert!(ket("").is_err());
}

#[test]
fn ket_labels_are_unit_vectors() {
    for label in ["0", "1", "+", "-", "i", "-i", "PhiPlus", "01", "+-", "0i1"] {
        let v = ket(label).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < EPS, "norm of |{label}>");
    }
}

#[test]
fn outer_products() {
    let z = dm("0");
    assert!(z.matrix().approx_eq(
        &CMatrix::from_rows(&[vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 0.0)]]),
        EPS
    ));

    let p = dm("+");
    let half = CMatrix::from_rows(&[vec![(0.5, 0.0), (0.5, 0.0)], vec![(0.5, 0.0), (0.5, 0.0)]]);
    assert!(p.matrix().approx_eq(&half, EPS));

    let bell = dm("PhiPlus");
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        assert!((bell.matrix().get(i, j) - c(0.5, 0.0)).norm() < EPS);
    }
    assert!((bell.trace() - 1.0).abs() < EPS);
    assert!((bell.matrix().get(1, 1)).norm() < EPS);
}

#[test]
fn tensor_products() {
    let id4 = CMatrix::identity(2).kron(&CMatrix::identity(2));
    assert!(id4.approx_eq(&CMatrix::identity(4), EPS));

    let zo = tensor(&dm("0"), &dm("1"));
    assert!(approx_eq(&zo, &dm("01"), EPS).unwrap());

    let mixed = tensor(&DensityOperator::maximally_mixed(1), &dm("0"));
    assert!((mixed.trace() - 1.0).abs() < EPS);
    for (i, expect) in [(0, 0.5), (1, 0.0), (2, 0.5), (3, 0.0)] {
        assert!((mixed.matrix().get(i, i).re - expect).abs() < EPS);
    }
}

#[test]
fn apply_superoperators() {
    let h = builtin_superoperator("H", EPS).unwrap();
    let plus = apply(&h, &dm("0")).unwrap();
    assert!(approx_eq(&plus, &dm("+"), EPS).unwrap());

    let id = builtin_superoperator("I", EPS).unwrap();
    let rho = dm("i");
    assert!(approx_eq(&apply(&id, &rho).unwrap(), &rho, EPS).unwrap());

    // single-Kraus projector on |+><+| keeps half the trace
    let proj =
        Superoperator::new(vec![dm("0").matrix().clone()], EPS).unwrap();
    let out = apply(&proj, &dm("+")).unwrap();
    assert!((out.trace() - 0.5).abs() < EPS);
    assert!(approx_eq(&out, &dm("0").scale(0.5), EPS).unwrap());
    assert!(!proj.is_trace_preserving());
}

#[test]
fn gate_table_identities() {
    let sh = builtin_superoperator("SH", EPS).unwrap();
    assert!(approx_eq(&apply(&sh, &dm("i")).unwrap(), &dm("0"), EPS).unwrap());
    assert!(approx_eq(&apply(&sh, &dm("-i")).unwrap(), &dm("1"), EPS).unwrap());

    let zx = builtin_superoperator("ZX", EPS).unwrap();
    // ZX|0> = Z|1> = -|1>, projector equal to |1><1|
    assert!(approx_eq(&apply(&zx, &dm("0")).unwrap(), &dm("1"), EPS).unwrap());

    let set = builtin_superoperator("SetHalfI", EPS).unwrap();
    for label in ["0", "1", "+", "i"] {
        let out = apply(&set, &dm(label)).unwrap();
        assert!(approx_eq(&out, &DensityOperator::maximally_mixed(1), EPS).unwrap());
    }
    assert!(set.is_trace_preserving());

    let z = builtin_superoperator("Z", EPS).unwrap();
    assert!(approx_eq(&apply(&z, &dm("+")).unwrap(), &dm("-"), EPS).unwrap());
    let x = builtin_superoperator("X", EPS).unwrap();
    assert!(approx_eq(&apply(&x, &dm("0")).unwrap(), &dm("1"), EPS).unwrap());

    let cnot = builtin_superoperator("CNOT", EPS).unwrap();
    assert!(approx_eq(&apply(&cnot, &dm("10")).unwrap(), &dm("11"), EPS).unwrap());
    assert!(approx_eq(&apply(&cnot, &dm("0+")).unwrap(), &dm("0+"), EPS).unwrap());

    let swap = builtin_superoperator("SWAP", EPS).unwrap();
    assert!(approx_eq(&apply(&swap, &dm("01")).unwrap(), &dm("10"), EPS).unwrap());
}

/// Brute-force padded Kraus operator with explicit index bookkeeping:
/// `K'[r][c] = K[r|positions][c|positions]` when row and column agree on all
/// other qubits, zero otherwise. Independent of the SWAP-network route.
fn oracle_pad_kraus(k: &CMatrix, positions: &[usize], total: usize) -> CMatrix {
    let dim = 1usize << total;
    let kbits = positions.len();
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for cidx in 0..dim {
            let mut agree = true;
            for q in 0..total {
                if positions.contains(&q) {
                    continue;
                }
                if ((r >> (total - 1 - q)) & 1) != ((cidx >> (total - 1 - q)) & 1) {
                    agree = false;
                    break;
                }
            }
            if !agree {
                continue;
            }
            let mut kr = 0usize;
            let mut kc = 0usize;
            for (j, &q) in positions.iter().enumerate() {
                kr |= ((r >> (total - 1 - q)) & 1) << (kbits - 1 - j);
                kc |= ((cidx >> (total - 1 - q)) & 1) << (kbits - 1 - j);
            }
            out.set(r, cidx, k.get(kr, kc));
        }
    }
    out
}

#[test]
fn pad_examples() {
    let x = builtin_superoperator("X", EPS).unwrap();
    let padded = pad(&x, &[1], 2).unwrap();
    let out = apply(&padded, &dm("00")).unwrap();
    assert!(approx_eq(&out, &dm("01"), EPS).unwrap());

    let cnot = builtin_superoperator("CNOT", EPS).unwrap();
    let same = pad(&cnot, &[0, 1], 2).unwrap();
    assert!(same.kraus()[0].approx_eq(&cnot.kraus()[0], EPS));

    let h = builtin_superoperator("H", EPS).unwrap();
    let h1 = pad(&h, &[0], 1).unwrap();
    assert!(h1.kraus()[0].approx_eq(&h.kraus()[0], EPS));

    assert!(pad(&x, &[2], 2).is_err());
    assert!(pad(&cnot, &[1, 1], 2).is_err());
    assert!(pad(&cnot, &[0], 2).is_err());
}

#[test]
fn pad_matches_index_bookkeeping_oracle() {
    let singles = ["H", "X", "Z", "SH"];
    for name in singles {
        let e = builtin_superoperator(name, EPS).unwrap();
        for total in 1..=3usize {
            for pos in 0..total {
                let padded = pad(&e, &[pos], total).unwrap();
                let expect = oracle_pad_kraus(&e.kraus()[0], &[pos], total);
                assert!(
                    padded.kraus()[0].approx_eq(&expect, EPS),
                    "pad({name}, [{pos}], {total})"
                );
            }
        }
    }
    let cnot = builtin_superoperator("CNOT", EPS).unwrap();
    for total in 2..=3usize {
        for a in 0..total {
            for b in 0..total {
                if a == b {
                    continue;
                }
                let padded = pad(&cnot, &[a, b], total).unwrap();
                let expect = oracle_pad_kraus(&cnot.kraus()[0], &[a, b], total);
                assert!(
                    padded.kraus()[0].approx_eq(&expect, EPS),
                    "pad(CNOT, [{a},{b}], {total})"
                );
            }
        }
    }
    // multi-Kraus channel padded entrywise
    let set = builtin_superoperator("SetHalfI", EPS).unwrap();
    let padded = pad(&set, &[1], 3).unwrap();
    for (k, kp) in set.kraus().iter().zip(padded.kraus()) {
        assert!(kp.approx_eq(&oracle_pad_kraus(k, &[1], 3), EPS));
    }
}

#[test]
fn partial_trace_examples() {
    let reduced = partial_trace(&dm("01"), &[1], TraceMode::Drop).unwrap();
    assert!(approx_eq(&reduced, &dm("0"), EPS).unwrap());

    let bell_half = partial_trace(&dm("PhiPlus"), &[0], TraceMode::Drop).unwrap();
    assert!(approx_eq(&bell_half, &DensityOperator::maximally_mixed(1), EPS).unwrap());

    let all = partial_trace(&dm("PhiPlus"), &[0, 1], TraceMode::Drop).unwrap();
    assert_eq!(all.n_qubits(), 0);
    assert!((all.matrix().get(0, 0).re - 1.0).abs() < EPS);

    let kept = partial_trace(&dm("01"), &[0], TraceMode::Keep).unwrap();
    assert!(approx_eq(&kept, &dm("0"), EPS).unwrap());

    assert!(partial_trace(&dm("0"), &[3], TraceMode::Drop).is_err());
}

#[test]
fn measure_examples() {
    let m01 = builtin_measurement("M01", EPS).unwrap();
    let branches = measure(&m01, &dm("+"), &[0], EPS).unwrap();
    assert_eq!(branches.len(), 2);
    assert!((branches[0].weight - 0.5).abs() < EPS);
    assert!((branches[1].weight - 0.5).abs() < EPS);
    assert!(approx_eq(&branches[0].post, &dm("0"), EPS).unwrap());
    assert!(approx_eq(&branches[1].post, &dm("1"), EPS).unwrap());

    let certain = measure(&m01, &dm("0"), &[0], EPS).unwrap();
    assert_eq!(certain.len(), 1);
    assert_eq!(certain[0].outcome, 0);
    assert!((certain[0].weight - 1.0).abs() < EPS);

    let coin = coin_measurement(0.75, EPS).unwrap();
    let flips = measure(&coin, &DensityOperator::scalar(1.0), &[], EPS).unwrap();
    assert_eq!(flips.len(), 2);
    assert!((flips[0].weight - 0.75).abs() < EPS);
    assert!((flips[1].weight - 0.25).abs() < EPS);
    assert!((flips[0].post.matrix().get(0, 0).re - 1.0).abs() < EPS);

    assert!(measure(&m01, &dm("00"), &[0, 1], EPS).is_err());
}

#[test]
fn measure_on_second_qubit_of_bell_pair() {
    let m01 = builtin_measurement("M01", EPS).unwrap();
    let branches = measure(&m01, &dm("PhiPlus"), &[1], EPS).unwrap();
    assert_eq!(branches.len(), 2);
    assert!(approx_eq(&branches[0].post, &dm("00"), EPS).unwrap());
    assert!(approx_eq(&branches[1].post, &dm("11"), EPS).unwrap());
}

#[test]
fn approx_eq_examples() {
    let rho = dm("i");
    assert!(approx_eq(&rho, &rho, 1e-9).unwrap());

    let comp = dm("0").scale(0.5).add(&dm("1").scale(0.5));
    let had = dm("+").scale(0.5).add(&dm("-").scale(0.5));
    assert!(approx_eq(&comp, &had, 1e-9).unwrap());

    assert!(!approx_eq(&dm("0"), &dm("1"), 1e-9).unwrap());
    assert!(approx_eq(&dm("0"), &dm("PhiPlus"), 1e-9).is_err());
}

#[test]
fn two_qubit_measurement_is_complete() {
    let m = builtin_measurement("M01_2", EPS).unwrap();
    assert_eq!(m.arity(), 2);
    assert_eq!(m.n_outcomes(), 4);
    let branches = measure(&m, &dm("PhiPlus"), &[0, 1], EPS).unwrap();
    assert_eq!(branches.len(), 2); // only |00> and |11> have support
    assert_eq!(branches[0].outcome, 0);
    assert_eq!(branches[1].outcome, 3);
}

#[test]
fn rejects_trace_increasing_kraus() {
    let big = CMatrix::identity(2).scale(1.5);
    assert!(matches!(
        Superoperator::new(vec![big], EPS),
        Err(QmathError::TraceIncreasing(_))
    ));
    let half = CMatrix::identity(2).scale(0.5);
    let e = Superoperator::new(vec![half], EPS).unwrap();
    assert!(!e.is_trace_preserving());
}

#[test]
fn rejects_incomplete_measurement() {
    let m0 = dm("0").matrix().clone();
    assert!(matches!(
        Measurement::new(vec![m0], EPS),
        Err(QmathError::IncompleteMeasurement(_))
    ));
}

// -- randomized invariants ---------------------------------------------------

fn random_density(seed: &[f64], n_qubits: usize) -> DensityOperator {
    let dim = 1 << n_qubits;
    let mut a = CMatrix::zeros(dim, dim);
    let mut it = seed.iter().cycle();
    for i in 0..dim {
        for j in 0..dim {
            let re = *it.next().unwrap();
            let im = *it.next().unwrap();
            a.set(i, j, c(re, im));
        }
    }
    let aa = a.mul(&a.dagger());
    let tr = aa.trace().re;
    let mat = if tr > 1e-9 { aa.scale(1.0 / tr) } else { outer(&ket("0").unwrap()).matrix().clone() };
    DensityOperator::from_matrix(mat).unwrap()
}

fn random_tni_superop(seed: &[f64], n_qubits: usize, n_kraus: usize) -> Superoperator {
    let dim = 1 << n_qubits;
    let mut kraus = Vec::new();
    let mut it = seed.iter().cycle();
    for _ in 0..n_kraus {
        let mut k = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                k.set(i, j, c(*it.next().unwrap(), *it.next().unwrap()));
            }
        }
        kraus.push(k);
    }
    let mut sum = CMatrix::zeros(dim, dim);
    for k in &kraus {
        sum = sum.add(&k.dagger().mul(k));
    }
    // a PSD matrix with unit trace has all eigenvalues below one
    let tr = sum.trace().re.max(1e-6);
    let kraus = kraus.into_iter().map(|k| k.scale(1.0 / tr.sqrt())).collect();
    Superoperator::new(kraus, EPS).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn apply_preserves_hermiticity_and_psd(
        seed in proptest::collection::vec(-1.0f64..1.0, 32),
        kseed in proptest::collection::vec(-1.0f64..1.0, 32),
        nq in 1usize..3,
    ) {
        let rho = random_density(&seed, nq);
        let e = random_tni_superop(&kseed, nq, 2);
        let out = apply(&e, &rho).unwrap();
        prop_assert!(out.matrix().is_hermitian(1e-7));
        prop_assert!(out.matrix().is_psd(1e-7));
        prop_assert!(out.trace() <= rho.trace() + EPS);
    }

    #[test]
    fn trace_preserving_superops_preserve_trace(
        seed in proptest::collection::vec(-1.0f64..1.0, 32),
    ) {
        let rho = random_density(&seed, 1);
        for name in ["H", "X", "Z", "I", "SetHalfI"] {
            let e = builtin_superoperator(name, EPS).unwrap();
            let out = apply(&e, &rho).unwrap();
            prop_assert!((out.trace() - rho.trace()).abs() < EPS, "{name}");
        }
    }

    #[test]
    fn measure_weights_sum_to_trace(
        seed in proptest::collection::vec(-1.0f64..1.0, 32),
        p in 0.05f64..0.95,
    ) {
        let rho = random_density(&seed, 1);
        for name in ["M01", "Mpm", "Mpmi"] {
            let m = builtin_measurement(name, EPS).unwrap();
            let total: f64 = measure(&m, &rho, &[0], EPS).unwrap().iter().map(|b| b.weight).sum();
            prop_assert!((total - rho.trace()).abs() < EPS, "{name}");
        }
        let coin = coin_measurement(p, EPS).unwrap();
        let total: f64 = measure(&coin, &DensityOperator::scalar(1.0), &[], EPS).unwrap()
            .iter().map(|b| b.weight).sum();
        prop_assert!((total - 1.0).abs() < EPS);
    }

    #[test]
    fn partial_trace_splits_tensor_products(
        sa in proptest::collection::vec(-1.0f64..1.0, 16),
        sb in proptest::collection::vec(-1.0f64..1.0, 16),
    ) {
        let a = random_density(&sa, 1);
        let b = random_density(&sb, 1).scale(0.7);
        let ab = tensor(&a, &b);
        let reduced = partial_trace(&ab, &[1], TraceMode::Drop).unwrap();
        prop_assert!(approx_eq(&reduced, &a.scale(b.trace()), 1e-7).unwrap());
        let reduced_b = partial_trace(&ab, &[0], TraceMode::Drop).unwrap();
        prop_assert!(approx_eq(&reduced_b, &b.scale(a.trace()), 1e-7).unwrap());
    }
}
