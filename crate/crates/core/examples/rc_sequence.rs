//! The non-halting RC variant: pivots c_k drifting onto the source.

use sound_ranging::cover::Coverand;
use sound_ranging::problem::{GroundTruth, SrpInstance};
use sound_ranging::rc::{rc_sequence, RcConfig};
use sound_ranging::rng::SplitMix;
use sound_ranging::space::{LpSpace, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = LpSpace::new(2, 2.5)?;
    let mut rng = SplitMix::new(17);
    let sensors = (0..32).map(|_| rng.point_in_box(&[-3.0, -3.0], &[3.0, 3.0])).collect();
    let source = Point::new(vec![0.7, -1.1])?;
    let inst = SrpInstance::from_ground_truth(space, sensors, &GroundTruth::new(source.clone(), 0.0))?;
    let cfg = RcConfig::new(1e-9, Coverand::ball(space, space.origin(), 4.0)?)?.with_max_level(24);

    for item in rc_sequence(&inst, &cfg)? {
        let item = item?;
        println!(
            "level {:2}  r_k {:.3e}  survivors {:3}  pivot {}  error {:.3e}",
            item.level,
            item.radius,
            item.survivors,
            item.pivot,
            space.distance(&item.pivot, &source)?
        );
    }
    Ok(())
}
