/// Simplex-lattice weight vectors: every `m`-vector of multiples of `1/h`
/// summing to one, `C(h + m - 1, m - 1)` in total, in lexicographic order.
pub fn weight_vectors(h: usize, m: usize) -> Vec<Vec<f64>> {
    assert!(h >= 1 && m >= 1, "lattice needs h >= 1 and m >= 1");
    let mut out = Vec::new();
    let mut parts = vec![0usize; m];
    compositions(h, 0, &mut parts, &mut out, h);
    out
}

fn compositions(remaining: usize, pos: usize, parts: &mut [usize], out: &mut Vec<Vec<f64>>, h: usize) {
    if pos == parts.len() - 1 {
        parts[pos] = remaining;
        out.push(parts.iter().map(|&p| p as f64 / h as f64).collect());
        return;
    }
    for k in (0..=remaining).rev() {
        parts[pos] = k;
        compositions(remaining - k, pos + 1, parts, out, h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
    }

    #[test]
    fn corners() {
        let w = weight_vectors(1, 3);
        assert_eq!(w, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    }

    #[test]
    fn h3_contains_centroid() {
        let w = weight_vectors(3, 3);
        assert_eq!(w.len(), 10);
        let third = 1.0 / 3.0;
        assert!(w.iter().any(|v| v.iter().all(|x| (x - third).abs() < 1e-15)));
    }

    #[test]
    fn counts_and_sums() {
        for h in 1..=20 {
            let w = weight_vectors(h, 3);
            assert_eq!(w.len(), binomial(h + 2, 2));
            for v in &w {
                assert!(v.iter().all(|&x| x >= 0.0));
                assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
        assert_eq!(weight_vectors(13, 3).len(), 105);
    }
}
