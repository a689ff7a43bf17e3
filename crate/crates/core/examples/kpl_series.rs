//! Kochubei polylogarithms inside the disc of convergence, by the series and
//! by specializing the t-deformation at t = theta.

use ffpolylog::kochubei::{kmpl_eval, kpl_eval, tdeform};
use ffpolylog::poly::TPoly;
use ffpolylog::series::{exp, CInftyElem};
use ffpolylog::text::{parse_ratfunc, parse_series};
use ffpolylog::FieldTower;

fn main() -> ffpolylog::Result<()> {
    let t = FieldTower::for_q(3)?;
    let target = exp(-30);
    for n in 1..=3 {
        let v = kpl_eval(n, &CInftyElem::one(&t), target)?;
        println!("Li_{n}(1) = {v}");
    }

    let u = parse_ratfunc(&t, "th+2")?;
    let l = tdeform(&TPoly::constant(u.clone()), 2, 12, target)?;
    let at_theta = l.eval_at_theta()?;
    let direct = kpl_eval(2, &parse_series(&t, "th+2")?, target)?;
    println!("L_(u,2)(theta) = {at_theta}");
    println!("Li_2(u)        = {direct}");

    let one = CInftyElem::one(&t);
    println!("Li_(1,1)(1,1) = {}", kmpl_eval(&[1, 1], &[one.clone(), one], target)?);
    Ok(())
}
