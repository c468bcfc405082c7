// Output distribution and the three utility measures for one input.
use lattice_dp::experiments::utility;
use lattice_dp::{convolve, input_distribution, laplacian_noise, wasserstein_w0, InputKind};

fn main() -> lattice_dp::Result<()> {
    let x = input_distribution(InputKind::Poisson { gamma: 5.0 }, 1.0, 1e-12)?;
    let noise = laplacian_noise(0.0, 4.0, 1.0, 1e-12)?;
    let y = convolve(&x, &noise)?;
    println!("input cells {}, output cells {}", x.len(), y.len());
    println!("W0 direct      = {}", wasserstein_w0(&x, &y)?);
    let (w0, w1, w2) = utility(&x, &noise)?;
    println!("W0 / W1 / W2   = {w0} / {w1} / {w2}");
    // W2 = E|θ| for any input
    println!("mean |θ| steps = {}", noise.mean_abs_steps());
    Ok(())
}
