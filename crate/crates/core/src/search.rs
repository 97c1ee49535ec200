//! One-dimensional maximization on an interval.

/// Coarse-scan points used to locate the best basin.
const SCAN_POINTS: usize = 24;
/// Golden-section stops once the bracket is this narrow.
const GOLDEN_WIDTH: f64 = 1e-6;
/// Final bracket width for the derivative bisection.
const BISECT_WIDTH: f64 = 1e-11;
/// Central-difference step for the derivative.
const DIFF_STEP: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes `f` over `[lo, hi] ⊆ [domain_lo, domain_hi]`.
///
/// A uniform scan plus the caller's `seeds` picks the best starting point;
/// golden-section search narrows the neighbouring cell, and bisection on the
/// sign of a central-difference derivative refines the stationary point.
/// `f` may be evaluated anywhere inside the domain.
pub(crate) fn maximize<F>(f: F, lo: f64, hi: f64, domain: (f64, f64), seeds: &[f64]) -> Maximum
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo < hi && domain.0 <= lo && hi <= domain.1);
    let spacing = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let scan = (0..SCAN_POINTS).map(|k| lo + k as f64 * spacing);
    let seeds = seeds.iter().copied().filter(|s| (lo..=hi).contains(s));
    let mut best = Maximum { x: lo, value: f(lo) };
    for x in scan.chain(seeds) {
        let value = f(x);
        if value > best.value {
            best = Maximum { x, value };
        }
    }

    let mut left = (best.x - spacing).max(lo);
    let mut right = (best.x + spacing).min(hi);
    let golden = golden_section(&f, &mut left, &mut right);
    if golden.value > best.value {
        best = golden;
    }

    let slope = |x: f64| {
        let a = (x - DIFF_STEP).max(domain.0);
        let b = (x + DIFF_STEP).min(domain.1);
        (f(b) - f(a)) / (b - a)
    };
    let mut left = (best.x - GOLDEN_WIDTH).max(lo);
    let mut right = (best.x + GOLDEN_WIDTH).min(hi);
    if slope(left) > 0.0 && slope(right) < 0.0 {
        while right - left > BISECT_WIDTH {
            let mid = 0.5 * (left + right);
            if slope(mid) > 0.0 {
                left = mid;
            } else {
                right = mid;
            }
        }
        let x = 0.5 * (left + right);
        let value = f(x);
        if value >= best.value {
            best = Maximum { x, value };
        }
    }
    best
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, left: &mut f64, right: &mut f64) -> Maximum {
    let mut x1 = *right - INV_PHI * (*right - *left);
    let mut x2 = *left + INV_PHI * (*right - *left);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while *right - *left > GOLDEN_WIDTH {
        if f1 < f2 {
            *left = x1;
            x1 = x2;
            f1 = f2;
            x2 = *left + INV_PHI * (*right - *left);
            f2 = f(x2);
        } else {
            *right = x2;
            x2 = x1;
            f2 = f1;
            x1 = *right - INV_PHI * (*right - *left);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        Maximum { x: x1, value: f1 }
    } else {
        Maximum { x: x2, value: f2 }
    }
}
