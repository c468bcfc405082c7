// Gaussian noise fails the pure check; a band |θ| < M recovers (ε, δ).
use lattice_dp::{audit, AdjacencySpec, AuditOptions, AuditSubject, Family, MechanismSpec};

fn main() -> lattice_dp::Result<()> {
    let g = MechanismSpec::new(Family::Gaussian { mu: 0.0, sigma: 10.0 }, 1.0)?;
    let m = AdjacencySpec::new(1.0, 1.0)?;

    let found = audit(&AuditSubject::Spec(g), &m, &AuditOptions::default())?;
    println!("pure witness: {:?}", found.pure_witness);
    // without a boundary the search settles on the smallest workable band, M = m
    println!("searched band: eps {:?} delta {:?}", found.epsilon(), found.delta());

    let opts = AuditOptions {
        boundary_m: Some(50.0),
        ..AuditOptions::default()
    };
    let r = audit(&AuditSubject::Spec(g), &m, &opts)?;
    println!("{}", r.to_json());
    Ok(())
}
