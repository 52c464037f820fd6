//! Sum-of-squares feasibility: a Gram certificate for a form with PSD apolar
//! catalecticant and a separating functional for the Motzkin form.
//!
//!     cargo run --release --example sos_certificates

use conelab::cones::{gram_to_form, random_dual_sos_form, sos_feasible, SosOutcome};
use conelab::poly::Form;
use rand::SeedableRng;

fn main() -> conelab::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let f = random_dual_sos_form(3, 4, &mut rng)?;
    match sos_feasible(&f, 1e-8)? {
        SosOutcome::Feasible(cert) => {
            let back = gram_to_form(3, 2, &cert.matrix())?;
            println!(
                "feasible: Gram {}x{}, λmin {:.3e}, residual {:.1e}, reconstruction error {:.1e}",
                cert.gram.len(),
                cert.gram.len(),
                cert.min_eigenvalue,
                cert.residual,
                back.try_sub(&f)?.norm_coeffs()
            );
        }
        other => println!("unexpected: {other:?}"),
    }

    let motzkin = Form::<f64>::from_terms(
        3,
        6,
        &[(vec![4, 2, 0], 1.0), (vec![2, 4, 0], 1.0), (vec![0, 0, 6], 1.0), (vec![2, 2, 2], -3.0)],
    )?;
    match sos_feasible(&motzkin, 1e-8)? {
        SosOutcome::Infeasible(w) => println!(
            "Motzkin: not a sum of squares; functional pairs to {:.3e} while its moment matrix has λmin {:.3e}",
            w.pairing, w.min_eigenvalue
        ),
        other => println!("Motzkin: {other:?}"),
    }
    Ok(())
}
