/// First death, half the network dead and last death as indices into
/// `alive_series` (alive count after each round). Unreached metrics are
/// `None`. An empty series with `n == 0` reports all three at round 0.
pub fn lifetime_metrics(alive_series: &[u32], n: u32) -> (Option<u32>, Option<u32>, Option<u32>) {
    if n == 0 {
        return (Some(0), Some(0), Some(0));
    }
    let first = |pred: &dyn Fn(u32) -> bool| {
        alive_series.iter().position(|&a| pred(a)).map(|i| i as u32)
    };
    let fnd = first(&|a| a < n);
    let hna = first(&|a| 2 * a <= n);
    let lnd = first(&|a| a == 0);
    (fnd, hna, lnd)
}
