//! Output-transformerless (OTL) push-pull circuit: midpoint voltage in volts.
//!
//! Inputs, in order, with their physical ranges:
//!
//! | input | meaning                            | range        |
//! |-------|------------------------------------|--------------|
//! | Rb1   | resistance b1 (kOhm)               | [50, 150]    |
//! | Rb2   | resistance b2 (kOhm)               | [25, 70]     |
//! | Rf    | resistance f (kOhm)                | [0.5, 3]     |
//! | Rc1   | resistance c1 (kOhm)               | [1.2, 2.5]   |
//! | Rc2   | resistance c2 (kOhm)               | [0.25, 1.2]  |
//! | beta  | current gain (amperes)             | [50, 300]    |
//!
//! ```text
//! Vb1 = 12 Rb2 / (Rb1 + Rb2)
//! Vm  = (Vb1 + 0.74) beta (Rc2 + 9) / (beta (Rc2 + 9) + Rf)
//!     + 11.35 Rf / (beta (Rc2 + 9) + Rf)
//!     + 0.74 Rf beta (Rc2 + 9) / ((beta (Rc2 + 9) + Rf) Rc1)
//! ```
//!
//! Formula and ranges follow the Virtual Library of Simulation Experiments
//! (Surjanovic and Bingham, Simon Fraser University), `otlcircuit`.

pub const DIM: usize = 6;

pub const RANGES: [(f64, f64); DIM] = [
    (50.0, 150.0),
    (25.0, 70.0),
    (0.5, 3.0),
    (1.2, 2.5),
    (0.25, 1.2),
    (50.0, 300.0),
];

/// Midpoint voltage at physical inputs `[Rb1, Rb2, Rf, Rc1, Rc2, beta]`.
pub fn midpoint_voltage(v: &[f64; DIM]) -> f64 {
    let [rb1, rb2, rf, rc1, rc2, beta] = *v;
    let vb1 = 12.0 * rb2 / (rb1 + rb2);
    let g = beta * (rc2 + 9.0);
    let den = g + rf;
    (vb1 + 0.74) * g / den + 11.35 * rf / den + 0.74 * rf * g / (den * rc1)
}

/// Midpoint voltage at a point of the unit cube, mapped affinely onto [`RANGES`].
pub fn eval_unit(x: &[f64]) -> f64 {
    let mut v = [0.0; DIM];
    for ((out, &u), &(lo, hi)) in v.iter_mut().zip(x).zip(&RANGES) {
        *out = lo + (hi - lo) * u;
    }
    midpoint_voltage(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_are_finite_and_positive() {
        for mask in 0..1u32 << DIM {
            let x: Vec<f64> = (0..DIM).map(|j| ((mask >> j) & 1) as f64).collect();
            let v = eval_unit(&x);
            assert!(v.is_finite() && v > 0.0 && v < 12.0, "{x:?} -> {v}");
        }
    }

    #[test]
    fn large_gain_limit() {
        // beta -> inf leaves Vb1 + 0.74 + 0.74 Rf / Rc1
        let v = midpoint_voltage(&[100.0, 50.0, 1.0, 2.0, 0.5, 1e12]);
        assert!((v - (4.0 + 0.74 + 0.37)).abs() < 1e-9);
    }
}
