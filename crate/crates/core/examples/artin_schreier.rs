//! Artin-Schreier equations over C_infinity and the inverse of
//! wp(F) = F^(-1) - F on the Tate algebra.

use ffpolylog::series::exp;
use ffpolylog::tate::TateElem;
use ffpolylog::text::{parse_series, parse_series_poly};
use ffpolylog::wp::{as_solve_series, wp, wp_inverse, WpConfig};
use ffpolylog::FieldTower;

fn main() -> ffpolylog::Result<()> {
    let t = FieldTower::for_q(3)?;
    let cfg = WpConfig::default();
    for c in ["th^-1", "1", "th", "th^2+th^-2"] {
        let y = as_solve_series(&parse_series(&t, c)?, exp(-30), &cfg)?;
        println!("y^3 - y = {c}:  y = {}  (constants in F_{})", y.value, y.tower().size());
    }

    let g = TateElem::from_series_poly(&t, parse_series_poly(&t, "th^-1 + th*t + 2*t^2")?);
    let f = wp_inverse(&g, exp(-20), &cfg)?;
    println!("F = {f}");
    println!("wp(F) - g = {}", wp(&f)?.sub(&g)?);
    Ok(())
}
