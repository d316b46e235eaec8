//! Dense vector helpers on `&[f64]`.

pub type Point = Vec<f64>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn scaled(t: f64, a: &[f64]) -> Point {
    a.iter().map(|x| t * x).collect()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// 2-D cross product `a.x * b.y - a.y * b.x`.
#[inline]
pub fn cross2(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Sum of `weights[i] * points[i]`.
pub fn combination(weights: &[f64], points: &[Point]) -> Point {
    let dim = points[0].len();
    let mut out = vec![0.0; dim];
    for (w, p) in weights.iter().zip(points) {
        for (o, x) in out.iter_mut().zip(p) {
            *o += w * x;
        }
    }
    out
}

/// All weak compositions of `total` into `parts` nonnegative integers, in
/// lexicographic order of the first coordinate.
pub fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(parts - 1, total - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_count_matches_binomial() {
        assert_eq!(compositions(2, 3).len(), 4);
        assert_eq!(compositions(3, 2).len(), 6);
        assert_eq!(compositions(4, 4).len(), 35);
        assert_eq!(compositions(1, 5), vec![vec![5]]);
    }

    #[test]
    fn compositions_are_ordered_by_first_part() {
        let c = compositions(2, 2);
        assert_eq!(c, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }
}
