/// Indicative price of one CPU-hour in dollars.
pub const CPU_HOUR_RATE: f64 = 0.05;

/// Forecast value added, the percentage improvement of `complex` over
/// `simple` (positive when `complex` is lower).
pub fn fva(simple: f64, complex: f64) -> f64 {
    100.0 * (simple - complex) / simple
}

/// Computational cost reduction of `complex` relative to `simple`, in percent.
pub fn ccr(cost_simple: f64, cost_complex: f64) -> f64 {
    100.0 * (cost_simple - cost_complex) / cost_simple
}

/// Money spent on `cpu_seconds` of compute at `rate_per_cpu_hour`.
pub fn monetize(cpu_seconds: f64, rate_per_cpu_hour: f64) -> f64 {
    cpu_seconds / 3600.0 * rate_per_cpu_hour
}
