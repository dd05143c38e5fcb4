//! Brute-force multiplier oracle shared by the property and acceptance suites.

use dynkit::spectrum::{SpectrumClass, TatjerCase, DEFAULT_TOL};
use num_complex::Complex64;

pub struct Oracle {
    pub unstable_index: usize,
    pub dissipative: bool,
    pub sectionally_dissipative: bool,
    pub satisfies_eq1: bool,
    pub tatjer_case: TatjerCase,
}

/// Flags by exhaustive enumeration of products and orderings.
pub fn oracle(v: &[Complex64]) -> Oracle {
    let m: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let n = m.len();
    let unstable: Vec<usize> = (0..n).filter(|&i| m[i] > 1.0).collect();
    let mut prod = 1.0;
    for &x in &m {
        prod *= x;
    }
    let mut sect = true;
    for i in 0..n {
        for j in 0..n {
            if i != j && m[i] * m[j] >= 1.0 {
                sect = false;
            }
        }
    }
    if n == 1 {
        sect = prod < 1.0;
    }

    let mut focus = false;
    if unstable.len() == 1 {
        let g = m[unstable[0]];
        for i in 0..n {
            for j in 0..n {
                if i == j || m[i] >= 1.0 {
                    continue;
                }
                let pair = v[i].im > DEFAULT_TOL
                    && (v[i] - v[j].conj()).norm() <= DEFAULT_TOL
                    && (m[i] - m[j]).abs() <= DEFAULT_TOL;
                let rest_below = (0..n).filter(|&k| k != i && k != j && m[k] < 1.0).all(|k| m[k] < m[i]);
                let arg = v[i].arg().abs();
                if pair && rest_below && arg > DEFAULT_TOL && std::f64::consts::PI - arg > DEFAULT_TOL {
                    focus = focus || (m[i] * m[i] * g < 1.0 && m[i] * g > 1.0);
                }
            }
        }
    }

    let mut tatjer = TatjerCase::NotApplicable;
    if n == 3 {
        for (s, c, u) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
            let (s, c, u) = (m[s], m[c], m[u]);
            if s < c && c < u && s < 1.0 && u > 1.0 && s * c * u < 1.0 {
                if c < 1.0 && c * u > 1.0 {
                    tatjer = TatjerCase::CaseA;
                } else if c > 1.0 {
                    tatjer = TatjerCase::CaseB;
                }
            }
        }
    }
    Oracle {
        unstable_index: unstable.len(),
        dissipative: prod < 1.0,
        sectionally_dissipative: sect,
        satisfies_eq1: focus,
        tatjer_case: tatjer,
    }
}

pub fn agrees(c: &SpectrumClass, o: &Oracle) -> bool {
    c.unstable_index == o.unstable_index
        && c.dissipative == o.dissipative
        && c.sectionally_dissipative == o.sectionally_dissipative
        && c.satisfies_eq1 == o.satisfies_eq1
        && c.tatjer_case == o.tatjer_case
}
