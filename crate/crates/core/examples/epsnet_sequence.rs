//! Refining ε-neighborhood-covers over K_n = B[θ; 1] ∩ span(e₁..e_n).

use sound_ranging::epsnet::{run_sequence, CompactFamily, SequenceBudget};
use sound_ranging::problem::{GroundTruth, SrpInstance};
use sound_ranging::space::{LpSpace, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = LpSpace::euclidean(2);
    let sensors = [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        .iter()
        .map(|c| Point::new(c.to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let family = CompactFamily::coordinate_balls(space, 1.0, 2)?;

    for source in [vec![0.4, 0.0], vec![0.0, 0.5]] {
        let source = Point::new(source)?;
        let inst = SrpInstance::from_ground_truth(space, sensors.clone(), &GroundTruth::new(source.clone(), 0.0))?;
        let state = run_sequence(&inst, &family, SequenceBudget { max_steps: 10_000, max_depth: 24 })?;
        println!("source {source}");
        for step in state.trace.iter().take(12) {
            println!("  n {} k {:2} r_k {:.4e} survivors {}", step.n, step.k, step.radius, step.survivors);
        }
        println!("  ... {} steps, exit {:?}, μ = {:?}", state.steps, state.exit, state.mu);
        let last = state.last().ok_or("nothing emitted")?;
        println!("  x_{} = {last}  error {:.3e}  (2·r_k = {:.3e})", state.xs.len(), space.distance(last, &source)?, 2.0 * state.depth_radius);
    }
    Ok(())
}
