//! Hard bilinear instances for stationary linear iterations: the optimistic
//! method's last-iterate gradient norm cannot beat `ℓD/√T`, while other
//! coefficient sets fall into one of the non-convergent cases.

use monotone_play::diagnostics::rate_fit;
use monotone_play::dynamics::SCLICoefficients;
use monotone_play::scli::lowerbound_experiment;

fn main() -> monotone_play::Result<()> {
    let og = SCLICoefficients::og(1.0 / 150.0);
    let rep = lowerbound_experiment(&og, 1.0, 1.0, &[100, 1_000, 10_000], 4, 10_000)?;
    println!("optimistic coefficients: case {}", rep.case.label());
    for r in &rep.rows {
        println!(
            "T = {:>6}  nu = {:.5}  max ||F|| = {:.4e}  ratio = {:.4}",
            r.horizon, r.nu, r.max_gradgap, r.ratio
        );
    }
    let series: Vec<(f64, f64)> = rep
        .rows
        .iter()
        .map(|r| (r.horizon as f64, r.max_gradgap))
        .collect();
    println!("fitted slope: {:.4}", rate_fit(&series, Some(0))?.slope);

    let others = [
        ("identity map", SCLICoefficients::identity()),
        ("gradient descent", SCLICoefficients::gd(0.1)),
        (
            "damped step",
            SCLICoefficients::new(vec![-0.1], vec![0.5], 0.0, -0.1)?,
        ),
    ];
    for (name, c) in others {
        let rep = lowerbound_experiment(&c, 1.0, 1.0, &[100, 1_000], 4, 1_000)?;
        let last = rep.rows.last().expect("two horizons");
        println!(
            "{name}: case {}, max ||F|| at T = 1000: {:.4e}",
            rep.case.label(),
            last.max_gradgap
        );
    }
    Ok(())
}
