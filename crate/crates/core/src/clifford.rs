//! Conjugation of Pauli operators by the Clifford gate set.

use crate::circuit::{GateEvent, GateKind};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Returns `U P U†` (phase dropped) for a unitary event.
pub fn conjugate(pauli: &PauliString, gate: &GateEvent) -> Result<PauliString> {
    if !gate.kind.is_unitary() {
        return Err(Error::NotUnitary(gate.kind));
    }
    for &q in gate.targets() {
        if q >= pauli.n_qubits() {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: pauli.n_qubits(),
            });
        }
    }
    let mut out = pauli.clone();
    conjugate_in_place(&mut out, gate.kind, gate.qubits[0], gate.qubits[1]);
    Ok(out)
}

/// Unchecked in-place conjugation; non-unitary kinds are ignored.
#[inline]
pub fn conjugate_in_place(p: &mut PauliString, kind: GateKind, a: usize, b: usize) {
    match kind {
        GateKind::H => {
            let (x, z) = (p.x(a), p.z(a));
            p.set_x(a, z);
            p.set_z(a, x);
        }
        GateKind::S => {
            if p.x(a) {
                p.flip_z(a);
            }
        }
        GateKind::Cnot => {
            if p.x(a) {
                p.flip_x(b);
            }
            if p.z(b) {
                p.flip_z(a);
            }
        }
        GateKind::Cz => {
            let (xa, xb) = (p.x(a), p.x(b));
            if xb {
                p.flip_z(a);
            }
            if xa {
                p.flip_z(b);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn all_two_qubit() -> Vec<PauliString> {
        let mut v = Vec::new();
        for a in Letter::ALL {
            for b in Letter::ALL {
                v.push(PauliString::from_letters(&[a, b]));
            }
        }
        v
    }

    fn gates() -> Vec<GateEvent> {
        vec![
            GateEvent::one(GateKind::H, 0),
            GateEvent::one(GateKind::H, 1),
            GateEvent::one(GateKind::S, 0),
            GateEvent::one(GateKind::S, 1),
            GateEvent::two(GateKind::Cnot, 0, 1),
            GateEvent::two(GateKind::Cnot, 1, 0),
            GateEvent::two(GateKind::Cz, 0, 1),
        ]
    }

    #[test]
    fn textbook_images() {
        assert_eq!(
            conjugate(&p("XI"), &GateEvent::two(GateKind::Cnot, 0, 1)).unwrap(),
            p("XX")
        );
        assert_eq!(
            conjugate(&p("IZ"), &GateEvent::two(GateKind::Cnot, 0, 1)).unwrap(),
            p("ZZ")
        );
        assert_eq!(
            conjugate(&p("XI"), &GateEvent::two(GateKind::Cz, 0, 1)).unwrap(),
            p("XZ")
        );
        assert_eq!(
            conjugate(&p("X"), &GateEvent::one(GateKind::H, 0)).unwrap(),
            p("Z")
        );
        assert_eq!(
            conjugate(&p("X"), &GateEvent::one(GateKind::S, 0)).unwrap(),
            p("Y")
        );
        assert_eq!(
            conjugate(&p("Z"), &GateEvent::one(GateKind::S, 0)).unwrap(),
            p("Z")
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            conjugate(&p("X"), &GateEvent::one(GateKind::MeasX, 0)),
            Err(Error::NotUnitary(_))
        ));
        assert!(matches!(
            conjugate(&p("X"), &GateEvent::two(GateKind::Cz, 0, 3)),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn self_inverse_gates_are_involutions() {
        for g in gates().into_iter().filter(|g| g.kind != GateKind::S) {
            for a in all_two_qubit() {
                assert_eq!(conjugate(&conjugate(&a, &g).unwrap(), &g).unwrap(), a);
            }
        }
    }

    #[test]
    fn commutation_preserved_exhaustively() {
        for g in gates() {
            for a in all_two_qubit() {
                for b in all_two_qubit() {
                    let before = a.commutes(&b).unwrap();
                    let after = conjugate(&a, &g)
                        .unwrap()
                        .commutes(&conjugate(&b, &g).unwrap())
                        .unwrap();
                    assert_eq!(before, after, "{a} {b} {:?}", g.kind);
                }
            }
        }
    }

    #[test]
    fn untouched_qubits_unchanged() {
        let a = p("YXZ");
        let out = conjugate(&a, &GateEvent::two(GateKind::Cz, 0, 1)).unwrap();
        assert_eq!(out.letter(2), Letter::Z);
    }
}
