//! Backward moments, both defects and the ball test on a small plane instance.

use sound_ranging::problem::{geometric_weights, DefectKind, GroundTruth, SrpInstance};
use sound_ranging::space::{LpSpace, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = LpSpace::new(2, 3.0)?;
    let sensors = vec![
        Point::new(vec![-1.0, 0.0])?,
        Point::new(vec![1.0, 0.0])?,
        Point::new(vec![0.0, 1.0])?,
        Point::new(vec![0.0, -1.0])?,
    ];
    let truth = GroundTruth::new(Point::new(vec![0.2, 0.3])?, 1.0);
    let inst = SrpInstance::from_ground_truth(space, sensors, &truth)?;
    let weighted = inst.clone().with_weights(geometric_weights(4))?.with_defect_kind(DefectKind::Sum);

    for x in [truth.source.clone(), Point::new(vec![0.0, 0.0])?, Point::new(vec![0.5, -0.5])?] {
        let moments: Vec<f64> = (0..inst.len()).map(|i| inst.backward_moment(i, &x)).collect::<Result<_, _>>()?;
        println!("x = {x}");
        println!("  moments      {moments:.6?}");
        println!("  D_sup        {:.6}", inst.defect_sup(&x)?);
        println!("  D_sum        {:.6}", inst.defect_sum(&x)?);
        println!("  D_sum (geom) {:.6}", weighted.defect(&x)?);
        for r in [0.05, 0.2, 0.5] {
            println!("  ball test r = {r}: {}", if inst.ball_test(&x, r)? { "keep" } else { "exclude" });
        }
    }
    Ok(())
}
