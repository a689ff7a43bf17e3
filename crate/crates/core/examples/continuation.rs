//! Li_2(theta^2) over F_3, outside the disc of convergence: the small
//! generator, the F_27 correction and the agreement of both continuation routes.

use ffpolylog::ext::{continue_kpl, continue_kpl_wp_route, wp_route_t_prec};
use ffpolylog::kochubei::{delta_check, Residual};
use ffpolylog::series::exp;
use ffpolylog::text::parse_ratfunc;
use ffpolylog::wp::WpConfig;
use ffpolylog::FieldTower;

fn main() -> ffpolylog::Result<()> {
    let t = FieldTower::for_q(3)?;
    let cfg = WpConfig::default();
    let target = exp(-30);
    let u = parse_ratfunc(&t, "th^2")?;

    let c = continue_kpl(2, &u, target, &cfg)?;
    println!("ell = {}, g = {}", c.ell, c.g);
    println!("B = {} over F_{}", c.b, c.b.tower().size());
    println!("Li_2(th^2) = {} mod A", c.value);

    let w = continue_kpl_wp_route(2, &u, wp_route_t_prec(3, 2, 2, target), target, &cfg)?;
    let r = Residual::of(&c.value.sub(&w).reduce_mod_a());
    println!("routes differ by q^({}) at floor q^({})", r.residual, r.floor);

    let d = delta_check(2, &u, target, &cfg)?;
    println!("Li_2(th^3) - th Li_2(th^2) - Li_1(th^2): residual q^({}), pass = {}", d.residual, d.passes());
    Ok(())
}
