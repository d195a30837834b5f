/// Probability that an episode sampled from `sigma^tau` at iteration `t`
/// has a best-responding player. `horizon` is the configured iteration count.
pub fn pr_br(tau: usize, t: usize, horizon: usize) -> f64 {
    if t == 0 || tau + 1 != t {
        return 0.0;
    }
    if t == 1 {
        return 1.0;
    }
    (t as f64 / horizon.max(1) as f64).clamp(0.2, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        assert_eq!(pr_br(0, 1, 10), 1.0);
        assert!((pr_br(2, 3, 10) - 0.3).abs() < 1e-15);
        assert_eq!(pr_br(1, 3, 10), 0.0);
        assert_eq!(pr_br(0, 5, 10), 0.0);
        assert_eq!(pr_br(1, 2, 100), 0.2);
        assert_eq!(pr_br(8, 9, 10), 0.5);
    }
}
