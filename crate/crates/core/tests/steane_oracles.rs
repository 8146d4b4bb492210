//! Brute-force checks of the 7-qubit code, written against the check
//! matrix directly rather than the library's decoder tables.

use vcluster::analytic::f_steane;
use vcluster::steane::{decode_measurement, Basis, CHECK_ROWS, LOGICAL_MASK};

fn parity(w: u8) -> bool {
    w.count_ones() % 2 == 1
}

fn in_kernel(w: u8) -> bool {
    CHECK_ROWS.iter().all(|&r| !parity(w & r))
}

fn is_stabilizer(w: u8) -> bool {
    (0u8..8).any(|g| {
        (0..3)
            .filter(|r| g >> r & 1 == 1)
            .fold(0u8, |acc, r| acc ^ CHECK_ROWS[r])
            == w
    })
}

#[test]
fn distance_is_three() {
    // Kernel words that are not stabilizers are logical operators.
    let d = (1u8..128)
        .filter(|&w| in_kernel(w) && !is_stabilizer(w))
        .map(|w| w.count_ones())
        .min();
    assert_eq!(d, Some(3));
    assert!(in_kernel(LOGICAL_MASK) && !is_stabilizer(LOGICAL_MASK));
}

#[test]
fn every_single_flip_is_corrected() {
    for i in 0..7 {
        let d = decode_measurement(1 << i, Basis::X);
        assert!(!d.logical);
        assert_eq!(d.corrected, 0);
    }
}

#[test]
fn all_twenty_one_double_flips_are_miscorrected() {
    let pairs: Vec<u8> = (0u8..128).filter(|w| w.count_ones() == 2).collect();
    assert_eq!(pairs.len(), 21);
    for w in pairs {
        for base in [0u8, LOGICAL_MASK] {
            let d = decode_measurement(base ^ w, Basis::X);
            assert_ne!(d.logical, parity(base & LOGICAL_MASK), "pattern {w:07b}");
        }
    }
}

#[test]
fn f_matches_enumeration() {
    // The decoder recovers the exact pattern iff it has weight <= 1.
    for x in [0.0, 0.001, 0.0046667, 0.01, 0.05, 0.3, 1.0] {
        let mut fail = 0.0;
        for w in 0u8..128 {
            let d = decode_measurement(w, Basis::X);
            if d.corrected != 0 || (w != 0 && w.count_ones() != 1) {
                let k = w.count_ones() as i32;
                fail += f64::powi(x, k) * f64::powi(1.0 - x, 7 - k);
            }
        }
        assert!(
            (fail - f_steane(x)).abs() < 1e-12,
            "x = {x}: {fail} vs {}",
            f_steane(x)
        );
    }
}

#[test]
fn logical_failure_is_below_f() {
    // Some weight-3 patterns sit next to a weight-4 stabilizer and decode
    // correctly, so the logical failure rate is a little under f.
    let x: f64 = 0.05;
    let logical: f64 = (0u8..128)
        .filter(|&w| decode_measurement(w, Basis::X).logical)
        .map(|w| x.powi(w.count_ones() as i32) * (1.0 - x).powi(7 - w.count_ones() as i32))
        .sum();
    assert!(logical < f_steane(x));
    assert!(logical > 21.0 * x * x * (1.0 - x).powi(5));
}
