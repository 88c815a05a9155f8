//! Three-point Gauss–Legendre rule on the unit reference element.
//!
//! Exact for polynomials up to degree 5, which covers every P1 integrand
//! in this crate (`Y³φ`, `Y²φφ`, `Y⁴` are all degree 4).

/// `(s, w)` pairs on `[0, 1]`; `Σ w = 1`.
pub fn gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6_f64).sqrt();
    [
        (0.5 - d, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + d, 5.0 / 18.0),
    ]
}

/// Integrates `f` over `[a, b]` with the three-point rule.
pub fn integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = b - a;
    gauss3().iter().map(|&(s, w)| w * f(a + s * h)).sum::<f64>() * h
}
