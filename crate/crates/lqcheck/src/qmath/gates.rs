//! Built-in unitaries and measurements used by the calculus.

use super::{ket, outer, CMatrix, Measurement, Result, Superoperator};
use num_complex::Complex64;

const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn hadamard() -> CMatrix {
    CMatrix::from_rows(&[vec![(S2, 0.0), (S2, 0.0)], vec![(S2, 0.0), (-S2, 0.0)]])
}

fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (-1.0, 0.0)]])
}

fn cnot() -> CMatrix {
    CMatrix::from_rows(&[
        vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)],
    ])
}

fn swap() -> CMatrix {
    CMatrix::from_rows(&[
        vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)],
        vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
        vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
    ])
}

/// Basis-change unitary mapping `|i>` to `|0>` and `|-i>` to `|1>`.
fn sh() -> CMatrix {
    CMatrix::from_rows(&[vec![(S2, 0.0), (0.0, -S2)], vec![(S2, 0.0), (0.0, S2)]])
}

/// The constant channel sending every single-qubit state to `I/2`.
fn set_half_i_kraus() -> Vec<CMatrix> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let mut k = CMatrix::zeros(2, 2);
            k.set(i, j, Complex64::new(S2, 0.0));
            out.push(k);
        }
    }
    out
}

/// Resolves a built-in superoperator name. `ZX` applies `X` then `Z`.
pub fn builtin_superoperator(name: &str, eps: f64) -> Option<Superoperator> {
    let mat = match name {
        "H" => hadamard(),
        "X" => pauli_x(),
        "Z" => pauli_z(),
        "I" => CMatrix::identity(2),
        "CNOT" => cnot(),
        "SWAP" => swap(),
        "ZX" => pauli_z().mul(&pauli_x()),
        "SH" => sh(),
        "SetHalfI" => return Superoperator::new(set_half_i_kraus(), eps).ok(),
        _ => return None,
    };
    Superoperator::from_unitary(mat, eps).ok()
}

fn projector(label: &str) -> CMatrix {
    outer(&ket(label).expect("builtin ket label")).matrix().clone()
}

/// Resolves a built-in measurement name.
pub fn builtin_measurement(name: &str, eps: f64) -> Option<Measurement> {
    let outcomes = match name {
        "M01" => vec![projector("0"), projector("1")],
        "Mpm" => vec![projector("+"), projector("-")],
        "Mpmi" => vec![projector("i"), projector("-i")],
        "M01_2" => vec![projector("00"), projector("01"), projector("10"), projector("11")],
        _ => return None,
    };
    Measurement::new(outcomes, eps).ok()
}

/// The measurement on no qubits returning `0` with probability `p` and `1`
/// with probability `1 - p`.
pub fn coin_measurement(p: f64, eps: f64) -> Result<Measurement> {
    let mut m0 = CMatrix::zeros(1, 1);
    m0.set(0, 0, Complex64::new(p.sqrt(), 0.0));
    let mut m1 = CMatrix::zeros(1, 1);
    m1.set(0, 0, Complex64::new((1.0 - p).sqrt(), 0.0));
    Measurement::new(vec![m0, m1], eps)
}
