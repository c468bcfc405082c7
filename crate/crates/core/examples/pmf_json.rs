// PMF and report JSON round trips.
use lattice_dp::privacy::ratio_sup;
use lattice_dp::{AdjacencySpec, DiscretePmf, Grid};

fn main() -> lattice_dp::Result<()> {
    let p = DiscretePmf::new(Grid::symmetric(0.5, 2)?, vec![0.1, 0.2, 0.4, 0.2, 0.1], 0.0)?;
    let text = p.to_json();
    println!("{text}");
    assert_eq!(DiscretePmf::from_json(&text)?, p);
    // zero cells outside the window make this structurally unbounded
    println!("{:?}", ratio_sup(&p, &AdjacencySpec::new(0.5, 0.5)?, 1e-300)?);
    let bad = r#"{"delta":1,"origin":0,"probs":[0.5,-0.5,1.0],"tail_mass":0}"#;
    println!("{}", DiscretePmf::from_json(bad).unwrap_err());
    Ok(())
}
