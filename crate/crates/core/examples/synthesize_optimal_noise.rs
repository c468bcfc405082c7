// Solve for the W2-optimal 2-DP noise at m = 15 and show its stairs.
use lattice_dp::optimizer::{solve_p2, OptimizationRequest};
use lattice_dp::{input_distribution, AdjacencySpec, InputKind};

fn main() -> lattice_dp::Result<()> {
    let x = input_distribution(InputKind::DiscretizedGaussian { mu: 0.0, sigma: 10.0 }, 1.0, 1e-12)?;
    let req = OptimizationRequest::new(x, 2.0, AdjacencySpec::new(15.0, 1.0)?)?;
    let r = solve_p2(&req)?;
    println!("{:?}", r.lp_status);
    println!("W0 {} W1 {} W2 {}", r.w0, r.w1, r.w2);
    println!("audited eps {:?}", r.privacy_check.epsilon());
    for s in r
        .staircase_segments
        .iter()
        .filter(|s| s.cells(1.0) >= 2 && s.level > 1e-4)
    {
        println!("  [{:>4}, {:>4}]  {:.6}", s.start, s.end, s.level);
    }
    Ok(())
}
