const LEAF: usize = 16;

/// Pairwise summation with a fixed tree shape, so the result depends only on
/// the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub(crate) fn pairwise_sum_by<T>(items: &[T], f: impl Fn(&T) -> f64 + Copy) -> f64 {
    if items.len() <= LEAF {
        return items.iter().map(f).sum();
    }
    let mid = items.len() / 2;
    pairwise_sum_by(&items[..mid], f) + pairwise_sum_by(&items[mid..], f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_small_input() {
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.5]), 6.5);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn forty_units() {
        let v = vec![1.0; 40];
        assert_eq!(pairwise_sum(&v), 40.0);
    }

    #[test]
    fn less_drift_than_naive_loop() {
        let v = vec![0.1; 1 << 20];
        let exact = 0.1 * (1 << 20) as f64;
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - exact).abs() <= (naive - exact).abs());
    }
}
