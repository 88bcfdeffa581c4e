//! The canonical smooth partition-of-unity transition.
//!
//! `smooth_transition(s)` is C-infinity, nonincreasing, equal to 1 for
//! `s <= 1/2` and to 0 for `s >= 1`. Cutoff families and compactly
//! supported initial profiles are built from it.

fn psi(r: f64) -> f64 {
    if r > 0.0 {
        (-1.0 / r).exp()
    } else {
        0.0
    }
}

/// 1 on (-inf, 1/2], 0 on [1, inf), smooth monotone glue in between.
pub fn smooth_transition(s: f64) -> f64 {
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = psi(1.0 - s);
        let b = psi(s - 0.5);
        a / (a + b)
    }
}
