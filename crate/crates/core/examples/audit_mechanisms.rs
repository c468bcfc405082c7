// Numeric audit of each family next to its closed form.
use lattice_dp::{audit, AdjacencySpec, AuditOptions, AuditSubject, Family, MechanismSpec};

fn main() -> lattice_dp::Result<()> {
    let m = AdjacencySpec::new(15.0, 1.0)?;
    let specs = [
        Family::Laplacian { mu: 0.0, lambda: 8.0 },
        Family::Staircase {
            a: 5,
            rho: (-2.0f64 / 3.0).exp(),
        },
        Family::Exponential { eta: 0.2 },
        Family::Uniform { lo: 0.0, hi: 99.0 },
    ];
    for fam in specs {
        let spec = MechanismSpec::new(fam, 1.0)?;
        let r = audit(&AuditSubject::Spec(spec), &m, &AuditOptions::default())?;
        let cf = r.closed_form.as_ref().expect("specs carry a closed form");
        println!(
            "{:<12} numeric eps {:<20} delta {:<8} | closed eps {:<20} delta {:<8} agrees {}",
            spec.name(),
            r.epsilon().unwrap(),
            r.delta().unwrap(),
            cf.report.epsilon().unwrap(),
            cf.report.delta().unwrap(),
            cf.agrees
        );
    }
    // laplacian: the exact sup is e^{m/λ}, below the closed-form bound
    Ok(())
}
