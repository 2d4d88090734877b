//! The block companion matrix of a p-step linear iteration on a bilinear
//! game has the same spectral radius as the scalar polynomial `q² + ν²r²`.

use monotone_play::dynamics::SCLICoefficients;
use monotone_play::scli::{bilinear_nu_matrix, build_companion, char_identity};

fn main() -> monotone_play::Result<()> {
    let og = SCLICoefficients::og(0.1);
    let sys = build_companion(&og, &bilinear_nu_matrix(1.0, 2))?;
    println!(
        "companion matrix of the optimistic iteration:\n{:.3}",
        sys.c_of_a
    );

    for nu in [0.01, 0.1, 0.5, 1.0] {
        let (m, q) = char_identity(&og, nu, 4)?;
        println!("nu = {nu:<5} rho(C(A)) = {m:.15}  maxroot = {q:.15}");
    }
    Ok(())
}
