//! Exact forms, sphere moments, and the JSON polynomial file format.
//!
//!     cargo run --example forms_and_moments

use conelab::metrics::{integral_ip, project_to_m, sphere_integral};
use conelab::poly::{r_power, sphere_moment_exps, Form, PolyFile};
use conelab::scalar::{rational, Rational};

fn main() -> conelab::Result<()> {
    // x1^4 in three variables and its projection to the mean-zero hyperplane
    let x14 = Form::<Rational>::monomial(&[4, 0, 0], rational(1, 1));
    println!("∫ x1^4 dσ       = {}", sphere_integral(&x14));
    println!("∫ x1^2 x2^2 dσ  = {}", sphere_moment_exps(&[2, 2, 0]));
    let f = project_to_m(&x14)?;
    println!("x1^4 − mean     = {}", serde_json::to_string(&PolyFile::from_rational(&f)).unwrap());
    println!("∫ f dσ          = {}", sphere_integral(&f));
    println!("‖f‖₂²           = {}", integral_ip(&f, &f)?);

    // r^{2k} is identically one on the sphere
    let r4 = r_power::<f64>(3, 2);
    println!("r^4 at (0.6, 0, 0.8) = {}", r4.eval(&[0.6, 0.0, 0.8]));

    // round trip through the file format
    let file = PolyFile::from_rational(&f);
    let back = PolyFile::from_json(&file.to_json())?.to_rational()?;
    assert_eq!(back, f);
    println!("file round trip ok ({} terms)", file.terms.len());
    Ok(())
}
