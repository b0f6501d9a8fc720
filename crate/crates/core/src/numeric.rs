//! Small numerical helpers: exactly rounded summation and Lagrange interpolation.

/// Correctly rounded floating-point sum (Shewchuk's partials algorithm).
///
/// The result depends only on the multiset of summands, never on their
/// order, which makes it suitable for bitwise conservation checks.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials to a single double, guarding half-way cases.
    let n = partials.len();
    if n == 0 {
        return 0.0;
    }
    let mut k = n - 1;
    let mut hi = partials[k];
    let mut lo = 0.0;
    while k > 0 {
        k -= 1;
        let x = hi;
        let y = partials[k];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if k > 0 && ((lo < 0.0 && partials[k - 1] < 0.0) || (lo > 0.0 && partials[k - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Lagrange interpolation through arbitrary nodes, evaluated at `x`.
pub fn lagrange(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for (i, (&xi, &yi)) in nodes.iter().zip(values).enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                w *= (x - xj) / (xi - xj);
            }
        }
        acc += w * yi;
    }
    acc
}

/// Piecewise-cubic interpolation on sorted `nodes`, using the four nodes
/// nearest to `x` (clamped at the ends).
pub fn cubic_at(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if n < 4 {
        return lagrange(nodes, values, x);
    }
    let idx = nodes.partition_point(|&xi| xi < x);
    let start = idx.saturating_sub(2).min(n - 4);
    lagrange(&nodes[start..start + 4], &values[start..start + 4], x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sum_is_order_independent() {
        let v = vec![1e16, 1.0, -1e16, 3.0, 1e-3, 0.1, 0.2];
        let mut w = v.clone();
        w.reverse();
        assert_eq!(exact_sum(v.iter().copied()), exact_sum(w));
        assert_eq!(exact_sum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(exact_sum([0.1, 0.2, 0.3]), 0.6);
    }

    #[test]
    fn cubic_reproduces_cubics() {
        let xs: Vec<f64> = (0..10).map(|i| 0.1 * i as f64 + 0.03 * (i % 3) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + x * x * x).collect();
        for &x in &[0.0, 0.37, 0.91, 1.05] {
            assert!((cubic_at(&xs, &ys, x) - (1.0 - 2.0 * x + x * x * x)).abs() < 1e-12);
        }
    }
}
