// Empirical W0 over seeded runs; run r uses seed ^ r.
use lattice_dp::experiments::{montecarlo, ExperimentOptions, Mechanism, MonteCarloConfig};
use lattice_dp::{input_distribution, InputKind};

fn main() -> lattice_dp::Result<()> {
    let x = input_distribution(InputKind::Poisson { gamma: 5.0 }, 1.0, 1e-12)?;
    let cfg = MonteCarloConfig {
        mechanisms: vec![Mechanism::Optimal, Mechanism::parse("laplacian")?, Mechanism::PointMass],
        epsilon: 2.0,
        m: 5.0,
        runs: 20,
        n_draws: 5_000,
        seed: 42,
        options: ExperimentOptions::default(),
    };
    let rep = montecarlo(&x, &cfg)?;
    for s in &rep.summary {
        println!(
            "{:<10} mean {:.4} ± {:.4}  [{:.4}, {:.4}]",
            s.mechanism, s.mean, s.std_err, s.min, s.max
        );
    }
    Ok(())
}
