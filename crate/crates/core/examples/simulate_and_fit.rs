//! Generate one synthetic spatial Weibull dataset, fit the Gibbs sampler,
//! and print posterior summaries next to the generating values.
//!
//! ```text
//! cargo run --release --example simulate_and_fit -- [n] [k] [n_iter] [n_burn] [seed]
//! ```

use std::time::Instant;

use spatweib::diagnostics::{cpo_estimate, posterior_summary};
use spatweib::model::run_chain;
use spatweib::rng::rng_from_seed;
use spatweib::simstudy::{generate_dataset, SimDesign};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(200, |a| a.parse().expect("n"));
    let k: f64 = args.get(1).map_or(0.5, |a| a.parse().expect("k"));
    let n_iter: usize = args.get(2).map_or(5000, |a| a.parse().expect("n_iter"));
    let n_burn: usize = args.get(3).map_or(2000, |a| a.parse().expect("n_burn"));
    let seed: u64 = args.get(4).map_or(42, |a| a.parse().expect("seed"));

    let design = SimDesign::new(n, k);
    let mut rng = rng_from_seed(seed);
    let (data, truth) = generate_dataset(&design, &mut rng).expect("generate dataset");
    let hyper = design.fitting_hyper();

    let t0 = Instant::now();
    let draws = run_chain(&data, &hyper, n_iter, n_burn, seed ^ 0x5eed).expect("fit chain");
    let fit_time = t0.elapsed();

    let summary = posterior_summary(&draws, 0.95).expect("summarize");
    println!(
        "n = {n}, k = {k}, sweeps = {n_iter} (burn {n_burn}), fit time = {:.1}s",
        fit_time.as_secs_f64()
    );
    println!(
        "acceptance: log_sigma {:.2}, log_sigma_w {:.2}",
        draws.meta().acc_log_sigma,
        draws.meta().acc_log_sigma_w
    );
    println!("{:<12} {:>10} {:>10} {:>10} {:>22}", "name", "truth", "mean", "sd", "95% interval");
    let p = data.p();
    for (j, row) in summary.iter().take(p).enumerate() {
        println!(
            "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            row.name, truth.beta[j], row.mean, row.sd, row.eq_lo, row.eq_hi
        );
    }
    for row in summary.iter().skip(p + data.n()) {
        let truth_v = match row.name.as_str() {
            "log_sigma" => truth.log_sigma,
            "log_sigma_w" => truth.log_sigma_w,
            _ => truth.phi,
        };
        println!(
            "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            row.name, truth_v, row.mean, row.sd, row.eq_lo, row.eq_hi
        );
    }

    let t1 = Instant::now();
    let cpo = cpo_estimate(&draws, &data, k).expect("cpo");
    println!(
        "lpml = {:.3} (computed in {:.2}s, max log spread {:.1})",
        cpo.lpml(),
        t1.elapsed().as_secs_f64(),
        cpo.max_log_spread()
    );
}
