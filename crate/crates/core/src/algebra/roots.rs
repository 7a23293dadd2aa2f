use num_complex::Complex64 as Complex;

use super::CoefSeq;

/// All roots of `f` (trailing zero coefficients ignored), by Aberth-Ehrlich iteration.
pub fn polynomial_roots(f: &CoefSeq) -> Vec<Complex> {
    let a = &f.coeffs()[..=f.effective_degree()];
    let n = a.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = a[n];
    let monic: Vec<Complex> = a.iter().map(|c| c / lead).collect();

    // initial guesses on a circle of radius from the Cauchy bound
    let radius = 1.0
        + monic[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .min(1e6);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            Complex::from_polar(
                0.5 * radius,
                std::f64::consts::TAU * (k as f64 + 0.25) / n as f64,
            )
        })
        .collect();

    let horner = |x: Complex| -> (Complex, Complex) {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for c in monic.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };

    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(z[i]);
            if p == Complex::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}
