// Seeded draws and the empirical PMF they build.
use lattice_dp::{empirical_pmf, sample, staircase_noise, wasserstein_w0};

fn main() -> lattice_dp::Result<()> {
    let p = staircase_noise(3, 0.4, 1.0, 1e-12)?;
    for n in [100, 10_000, 1_000_000] {
        let idx: Vec<i64> = sample(&p, 7, n)?.iter().map(|v| v.round() as i64).collect();
        let e = empirical_pmf(1.0, &idx)?;
        println!("n = {n:>7}: W0(empirical, true) = {:.5}", wasserstein_w0(&e, &p)?);
    }
    Ok(())
}
