//! Run a replicated simulation study (generate → fit → score) and print
//! bias, SD, MSE, and coverage for the regression coefficients.
//!
//! ```text
//! cargo run --release --example replicate_study -- [n] [k] [reps] [n_iter] [n_burn] [seed] [sigma_w] [side]
//! ```
//!
//! The trailing optional arguments override the latent-field scale and the
//! square domain side, which is handy for separating shrinkage effects from
//! spatial confounding when reading the bias column.

use std::time::Instant;

use spatweib::simstudy::{run_study, SimDesign};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(200, |a| a.parse().expect("n"));
    let k: f64 = args.get(1).map_or(0.5, |a| a.parse().expect("k"));
    let reps: usize = args.get(2).map_or(20, |a| a.parse().expect("reps"));
    let n_iter: usize = args.get(3).map_or(5000, |a| a.parse().expect("n_iter"));
    let n_burn: usize = args.get(4).map_or(2000, |a| a.parse().expect("n_burn"));
    let seed: u64 = args.get(5).map_or(0, |a| a.parse().expect("seed"));

    let mut design = SimDesign::new(n, k);
    design.n_replicates = reps;
    design.n_iter = n_iter;
    design.n_burn = n_burn;
    design.seed = seed;
    if let Some(a) = args.get(6) {
        design.sigma_w_true = a.parse().expect("sigma_w");
    }
    if let Some(a) = args.get(7) {
        design.domain_side = a.parse().expect("side");
    }

    let t0 = Instant::now();
    let metrics = run_study(&design).expect("study");
    println!(
        "n = {n}, k = {k}, replicates = {} used / {} failed, {:.1}s total",
        metrics.n_used,
        metrics.n_failed,
        t0.elapsed().as_secs_f64()
    );
    println!("{:<8} {:>8} {:>9} {:>8} {:>8} {:>6}", "name", "truth", "bias", "sd", "mse", "cr");
    for row in &metrics.rows {
        println!(
            "{:<8} {:>8.3} {:>9.4} {:>8.4} {:>8.4} {:>6.3}",
            row.name, row.truth, row.bias, row.sd, row.mse, row.cr
        );
    }
}
