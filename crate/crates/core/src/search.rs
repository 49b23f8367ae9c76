//! One-dimensional search and grid helpers shared by the bound minimizer and
//! the key-rate optimizer.

/// Golden-section minimization of `f` on the bracket `[a, b]`.
///
/// Narrows the bracket until its width drops below `tol` (absolute) or
/// `max_iter` interior evaluations have been spent, then returns the best
/// probed point as `(x, f(x))`. The function is assumed unimodal on the
/// bracket; on non-unimodal input the result is still a valid probe, just not
/// necessarily the global bracket minimum.
pub fn golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9; // 1/phi = (sqrt(5) - 1) / 2

    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    for _ in 0..max_iter {
        if (b - a) <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }

    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `n` points spaced linearly over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// `n` points spaced geometrically over `[lo, hi]`, endpoints included.
/// Requires `lo > 0` and `hi > 0`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = hi / lo;
            let denom = (n - 1) as f64;
            (0..n).map(|i| lo * ratio.powf(i as f64 / denom)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_min_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 2.0) * (x - 2.0) + 1.0, 0.0, 5.0, 1e-12, 200);
        assert!((x - 2.0).abs() < 1e-6, "x = {x}");
        assert!((fx - 1.0).abs() < 1e-12, "fx = {fx}");
    }

    #[test]
    fn golden_min_handles_swapped_bracket() {
        let (x, _) = golden_min(|x| x * x, 3.0, -1.0, 1e-12, 200);
        assert!(x.abs() < 1e-6);
    }

    #[test]
    fn golden_min_minimum_at_edge() {
        // Monotone increasing: the minimum sits on the left edge of the bracket.
        let (x, _) = golden_min(|x| x, 0.0, 1.0, 1e-14, 300);
        assert!(x < 1e-9, "x = {x}");
    }

    #[test]
    fn linspace_endpoints_and_count() {
        let g = linspace(0.0, 0.5, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 0.5);
        assert!((g[1] - 0.005).abs() < 1e-15);
    }

    #[test]
    fn logspace_endpoints_and_growth() {
        let g = logspace(1e-6, 1e6, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-6).abs() < 1e-18);
        assert!((g[199] - 1e6).abs() < 1e-4);
        let r0 = g[1] / g[0];
        let r1 = g[101] / g[100];
        assert!((r0 - r1).abs() < 1e-9, "log spacing must be uniform");
    }
}
