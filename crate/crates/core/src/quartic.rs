//! Real roots of polynomials up to degree four.
//!
//! Closed forms (Cardano / trigonometric for the cubic, Ferrari's
//! factorization for the quartic) give starting values; every root is then
//! polished with a few Newton steps on the original polynomial.

/// Up to four real roots in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Roots {
    values: [f64; 4],
    len: usize,
}

impl Roots {
    fn push(&mut self, x: f64) {
        if x.is_finite() && self.len < 4 {
            self.values[self.len] = x;
            self.len += 1;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn finish(mut self, coeffs: &[f64]) -> Self {
        for x in &mut self.values[..self.len] {
            *x = polish(coeffs, *x);
        }
        self.values[..self.len].sort_by(f64::total_cmp);
        self
    }
}

/// Evaluates `c[0]·x^n + … + c[n]` (highest degree first).
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(coeffs, x);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let next = x - p / dp;
        // Newton can only be trusted while it reduces the residual.
        if libm::fabs(eval_poly(coeffs, next)) >= libm::fabs(p) {
            break;
        }
        x = next;
    }
    x
}

/// Real roots of `a·x² + b·x + c`.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Roots {
    let mut roots = Roots::default();
    if a == 0.0 {
        if b != 0.0 {
            roots.push(-c / b);
        }
        return roots;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return roots;
    }
    // Citardauq form avoids cancellation.
    let q = -0.5 * (b + libm::copysign(libm::sqrt(disc), b));
    if q == 0.0 {
        roots.push(0.0);
        roots.push(0.0);
    } else {
        roots.push(q / a);
        roots.push(c / q);
    }
    roots.finish(&[a, b, c])
}

/// Real roots of `a·x³ + b·x² + c·x + d`.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> Roots {
    if a == 0.0 {
        return solve_quadratic(b, c, d);
    }
    let (b, c, d) = (b / a, c / a, d / a);
    // x = t − b/3 gives t³ + p·t + q.
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let mut roots = Roots::default();
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if p == 0.0 && q == 0.0 {
        roots.push(-shift);
    } else if disc > 0.0 {
        let s = libm::sqrt(disc);
        let u = libm::cbrt(-q / 2.0 + s);
        let v = libm::cbrt(-q / 2.0 - s);
        roots.push(u + v - shift);
    } else {
        // Three real roots (or a repeated one): trigonometric form.
        let m = 2.0 * libm::sqrt(-p / 3.0);
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = libm::acos(arg) / 3.0;
        for k in 0..3 {
            roots.push(m * libm::cos(theta - 2.0 * core::f64::consts::PI * k as f64 / 3.0) - shift);
        }
    }
    roots.finish(&[1.0, b, c, d])
}

/// Real roots of `a·x⁴ + b·x³ + c·x² + d·x + e`.
pub fn solve_quartic(a: f64, b: f64, c: f64, d: f64, e: f64) -> Roots {
    if a == 0.0 {
        return solve_cubic(b, c, d, e);
    }
    let coeffs = [1.0, b / a, c / a, d / a, e / a];
    let (b, c, d, e) = (coeffs[1], coeffs[2], coeffs[3], coeffs[4]);
    // x = y − b/4 gives y⁴ + p·y² + q·y + r.
    let shift = b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let mut roots = Roots::default();
    let scale = 1.0 + libm::fabs(p) + libm::fabs(r);
    if libm::fabs(q) <= 1e-14 * scale {
        // Biquadratic in y².
        for z in solve_quadratic(1.0, p, r).as_slice() {
            if *z >= 0.0 {
                let y = libm::sqrt(*z);
                roots.push(y - shift);
                roots.push(-y - shift);
            }
        }
        return roots.finish(&coeffs);
    }

    // (y² + p/2 + m)² = 2m·(y − q/(4m))² when m solves the resolvent
    // m³ + p·m² + (p²/4 − r)·m − q²/8 = 0; a positive root always exists.
    let resolvent = solve_cubic(1.0, p, p * p / 4.0 - r, -q * q / 8.0);
    let m = resolvent.as_slice().iter().copied().fold(f64::NAN, f64::max);
    if m.is_nan() || m <= 0.0 {
        return roots;
    }
    let s = libm::sqrt(2.0 * m);
    let k = q / (2.0 * s);
    for (sign_s, sign_k) in [(-1.0, 1.0), (1.0, -1.0)] {
        for y in solve_quadratic(1.0, sign_s * s, p / 2.0 + m + sign_k * k).as_slice() {
            roots.push(y - shift);
        }
    }
    roots.finish(&coeffs)
}
