// Epsilon sweep: optimum against calibrated baselines, as CSV.
use lattice_dp::experiments::{sweep, sweep_csv, Axis, ExperimentOptions, Mechanism, SweepConfig};
use lattice_dp::{input_distribution, InputKind};

fn main() -> lattice_dp::Result<()> {
    let x = input_distribution(InputKind::Poisson { gamma: 5.0 }, 1.0, 1e-12)?;
    let cfg = SweepConfig {
        axis: Axis::Epsilon,
        grid: vec![1.0, 2.0, 4.0],
        epsilon: 2.0,
        m: 5.0,
        baselines: ["laplacian", "staircase:a=5"]
            .iter()
            .map(|s| Mechanism::parse(s))
            .collect::<lattice_dp::Result<_>>()?,
        options: ExperimentOptions::default(),
    };
    print!("{}", sweep_csv(&sweep(&x, &cfg)?));
    Ok(())
}
