//! The Carlitz period series Omega and its difference equation
//! Omega^(-1) = (t - theta) Omega in the Tate algebra.

use ffpolylog::tate::{check_diff_eq, omega_trunc};
use ffpolylog::text::parse_tpoly;
use ffpolylog::FieldTower;

fn main() -> ffpolylog::Result<()> {
    let t = FieldTower::for_q(3)?;
    let omega = omega_trunc(&t, 20, 6, 40);
    println!("Omega = {omega}");
    let rep = check_diff_eq(&[vec![parse_tpoly(&t, "t-th")?]], &[vec![omega.clone()]])?;
    println!("residual q^({}) against floor q^({}): pass = {}", rep.residual, rep.floor, rep.passes());
    println!("Omega(theta) undefined: {}", omega.eval_at_theta().is_err());
    Ok(())
}
