// Baseline parameters that hit a target epsilon.
use lattice_dp::{calibrate, AdjacencySpec, CalibrationFamily};

fn main() -> lattice_dp::Result<()> {
    let m = AdjacencySpec::new(15.0, 1.0)?;
    for fam in [
        CalibrationFamily::Laplacian { mu: 0.0 },
        CalibrationFamily::Staircase { a: 5 },
        CalibrationFamily::Staircase { a: 20 },
        CalibrationFamily::Exponential,
    ] {
        println!("{:?}", calibrate(fam, 2.0, &m)?.family);
    }
    println!("{}", calibrate(CalibrationFamily::Gaussian, 2.0, &m).unwrap_err());
    Ok(())
}
