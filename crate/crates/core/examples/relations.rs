//! F_q[t]-relations among points of the extension module, lifted to
//! relations among polylogarithm values and written out as certificates.

use ffpolylog::ext::{lift_relation, relation_search, RelationCertificate};
use ffpolylog::series::exp;
use ffpolylog::text::parse_ratfunc;
use ffpolylog::wp::WpConfig;
use ffpolylog::FieldTower;

fn main() -> ffpolylog::Result<()> {
    let t = FieldTower::for_q(3)?;
    let cfg = WpConfig::default();
    let parse = |xs: &[&str]| xs.iter().map(|s| parse_ratfunc(&t, s)).collect::<ffpolylog::Result<Vec<_>>>();

    let free = relation_search(&parse(&["1", "th"])?, 2, 6)?;
    println!("[1, th], n = 2: {} relations up to degree 6", free.len());

    let us = parse(&["th^2", "-1", "2*th"])?;
    for rel in relation_search(&us, 2, 3)? {
        let lifted = lift_relation(&rel.coefficients, &rel.u_list, 2, 3, exp(-30), &cfg)?;
        let cert = RelationCertificate::from_relation(&lifted);
        println!("{}", serde_json::to_string(&cert).expect("certificates serialize"));
    }
    Ok(())
}
