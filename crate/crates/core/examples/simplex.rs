// The in-house simplex on a small LP, through both routes.
use lattice_dp::lp::{solve_lp, solve_lp_dual, LpProblem};

fn main() -> lattice_dp::Result<()> {
    // min -x - 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x, y >= 0
    let p = LpProblem::dense(
        vec![-1.0, -2.0],
        &[vec![1.0, 1.0], vec![1.0, 3.0]],
        vec![4.0, 6.0],
        &[],
        vec![],
        None,
    )?;
    let primal = solve_lp(&p, 100)?;
    let dual = solve_lp_dual(&p, 100)?;
    println!("primal {:?} x {:?} obj {:?}", primal.status, primal.x, primal.objective);
    println!("dual   {:?} x {:?} obj {:?}", dual.status, dual.x, dual.objective);
    println!("row duals {:?}", primal.duals_ub);
    // obj -5 at (3, 1)
    Ok(())
}
