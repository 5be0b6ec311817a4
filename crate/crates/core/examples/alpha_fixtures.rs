//! Regenerates `tests/fixtures/alpha.json`:
//!
//! ```text
//! cargo run --release -p critforest --example alpha_fixtures > crates/core/tests/fixtures/alpha.json
//! ```
//!
//! Each point carries `α` for one weight from the adaptive quadrature and
//! from a composite Simpson rule in `a` on a fine fixed grid.

use critforest::drift::{eval_alpha, AlphaWeight, DriftEvalConfig};
use critforest::stable_density::shared_cache;
use serde_json::json;

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let h = (hi - lo) / steps as f64;
    let inner: f64 = (1..steps).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h)).sum();
    h / 3.0 * (f(lo) + inner + f(hi))
}

fn simpson_alpha(weight: AlphaWeight, b: f64, lambda: f64) -> f64 {
    let cache = shared_cache();
    let cubic = if weight == AlphaWeight::Cubic { 1.0 / 6.0 } else { 0.0 };
    let ln_w = |a: f64| cache.ln_g(lambda - a) + cubic * (lambda - a).powi(3) - b * b / (2.0 * a);
    let hi = 40.0 + lambda.max(0.0);
    let top = (1..=4000).map(|i| ln_w(hi * i as f64 / 4000.0) - 0.5 * (hi * i as f64 / 4000.0).ln()).fold(f64::NEG_INFINITY, f64::max);
    let j = |k: f64| {
        let f = |a: f64| if a == 0.0 { 0.0 } else { (ln_w(a) - 0.5 * k * a.ln() - top).exp() };
        simpson(f, 0.0, 1.0, 400_000) + simpson(f, 1.0, hi, 400_000)
    };
    j(1.0) / j(3.0)
}

fn main() {
    let mut points = Vec::new();
    for weight in [AlphaWeight::Plain, AlphaWeight::Cubic] {
        let cfg = DriftEvalConfig { weight, ..Default::default() };
        for lambda in [-6.0, -2.0, 0.0, 2.0, 5.0] {
            for b in [0.25, 0.5, 1.0, 2.0, 4.0] {
                points.push(json!({
                    "weight": weight,
                    "b": b,
                    "lambda": lambda,
                    "alpha_quadrature": eval_alpha(b, lambda, &cfg).expect("alpha"),
                    "alpha_simpson": simpson_alpha(weight, b, lambda),
                }));
            }
        }
    }
    let doc = json!({ "schema_version": 1, "points": points });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}
