//! One-dimensional search primitives: golden-section minimization, a
//! bracket-expanding convex minimizer and a bisection-safeguarded Newton
//! root finder.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// Final bracket `[lo, hi]` containing `x`.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `width` or after `max_iter` reductions.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, width: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;

    while hi - lo > width && iterations < max_iter {
        iterations += 1;
        // Ties keep the left part so that the smaller abscissa wins.
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }

    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Minimum {
        x,
        value,
        lo,
        hi,
        iterations,
    }
}

/// Minimizes a convex function over the whole real line. The initial bracket
/// `[-1, 1]` is doubled until both endpoints rise above the midpoint value,
/// then golden-section reduces it to `width`.
pub fn minimize_convex<F>(mut f: F, width: f64) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let mut half = 1.0;
    let mut expansions = 0;
    loop {
        let mid = f(0.0);
        let left = f(-half);
        let right = f(half);
        if (left >= mid && right >= mid) || expansions >= 200 {
            break;
        }
        half *= 2.0;
        expansions += 1;
    }
    let mut m = golden_section(&mut f, -half, half, width, 400);
    m.iterations += expansions;
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    /// Size of the last accepted step.
    pub last_step: f64,
}

/// Newton iteration on `g` inside the sign-change bracket `[lo, hi]`
/// (`g(lo) < 0 < g(hi)`), falling back to bisection whenever an iterate leaves
/// the bracket or the derivative is unusable.
pub fn safeguarded_newton<G, D>(
    mut g: G,
    mut dg: D,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol: f64,
    max_steps: usize,
) -> Root
where
    G: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut x = x0.clamp(lo, hi);
    let mut last_step = hi - lo;
    let mut iterations = 0;

    while iterations < max_steps {
        iterations += 1;
        let gx = g(x);
        if gx == 0.0 {
            lo = x;
            hi = x;
            last_step = 0.0;
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = dg(x);
        let newton = x - gx / slope;
        let next = if slope.is_finite() && slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_step = (next - x).abs();
        x = next;
        if last_step <= tol * x.abs().max(1.0) || hi - lo <= tol {
            break;
        }
    }

    Root {
        x,
        lo,
        hi,
        iterations,
        last_step,
    }
}
