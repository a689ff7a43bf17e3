//! The difference system of Li_(1,1): canonical solutions, the monodromy
//! lattice, and continued values reduced modulo it.

use ffpolylog::kochubei::{continue_kmpl, kmpl_eval, kpl_eval, monodromy_basis, reduce_mod_monodromy};
use ffpolylog::series::{exp, CInftyElem};
use ffpolylog::tate::TateElem;
use ffpolylog::wp::WpConfig;
use ffpolylog::FieldTower;

fn main() -> ffpolylog::Result<()> {
    let t = FieldTower::for_q(3)?;
    let cfg = WpConfig::default();
    let target = exp(-25);
    let one = CInftyElem::one(&t);

    let m = monodromy_basis(&t, &[1], &[TateElem::one(&t)], 14, target, &cfg)?;
    println!("basis:\n  [1, 0]\n  [{}, 1]", m.entry(1, 0));

    let w = continue_kmpl(&[1, 1], &one, std::slice::from_ref(&one), 14, target, &cfg)?;
    let direct = vec![kpl_eval(1, &one, target)?, kmpl_eval(&[1, 1], &[one.clone(), one.clone()], target)?];
    let d: Vec<_> = w.iter().zip(&direct).map(|(a, b)| a.sub(b)).collect();
    for (x, r) in w.iter().zip(reduce_mod_monodromy(&d, &m)?) {
        println!("continued {x}\n  minus series, reduced: {r}");
    }

    // outside the polydisc only the continuation exists
    let th = CInftyElem::theta(&t);
    let big = continue_kmpl(&[1, 1], &th.mul(&th)?, std::slice::from_ref(&one), 14, target, &cfg)?;
    println!("Li_(1,1)(th^2, 1) = {} mod lattice", big[1]);
    Ok(())
}
