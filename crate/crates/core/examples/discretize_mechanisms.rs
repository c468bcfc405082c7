// Every noise family on the integer lattice, truncated at tau = 1e-12.
use lattice_dp::{exponential_noise, gaussian_noise, laplacian_noise, staircase_noise, uniform_noise, DEFAULT_TAU};

fn main() -> lattice_dp::Result<()> {
    let family = [
        ("gaussian(0, 10)", gaussian_noise(0.0, 10.0, 1.0, DEFAULT_TAU)?),
        ("laplacian(0, 8)", laplacian_noise(0.0, 8.0, 1.0, DEFAULT_TAU)?),
        ("staircase(5, 0.5)", staircase_noise(5, 0.5, 1.0, DEFAULT_TAU)?),
        ("uniform[0, 9]", uniform_noise(0.0, 9.0, 1.0)?),
        ("exponential(0.2)", exponential_noise(0.2, 1.0, DEFAULT_TAU)?),
    ];
    for (name, p) in &family {
        let g = p.grid();
        println!(
            "{name:<18} cells {:>4}  window [{}, {}]  p(0) = {:.6}  tail = {:.2e}",
            p.len(),
            g.value(0),
            g.value(p.len() - 1),
            p.prob_at(0),
            p.tail_mass()
        );
    }
    // the exponential starts at one step
    println!("exponential p(1) = {:.6}", family[4].1.prob_at(1));
    Ok(())
}
