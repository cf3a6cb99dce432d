//! Every point of the unit sphere is a sensor: closed form inside, ray search outside.

use sound_ranging::space::{LpSpace, Point};
use sound_ranging::sphere::{solve_dense_sphere, SphereOptions, UnitSphereArrivals};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SphereOptions { bound: 5.0, delta: 1e-4, ..SphereOptions::default() };
    for (dim, p, coords) in [(2, 2.0, vec![0.3, 0.0]), (2, 4.0, vec![1e-3, 0.6]), (3, 3.0, vec![0.2, -0.1, 0.4]), (2, 4.0, vec![2.5, -1.0])] {
        let space = LpSpace::new(dim, p)?;
        let gen = UnitSphereArrivals::new(space, Point::new(coords)?, 0.25)?;
        let sol = solve_dense_sphere(&space, |r| gen.arrival(r), &opts)?;
        println!(
            "p = {p}  s = {}  region {:?}  t_w - t_b = {:.9}  recovered {}  error {:.2e}",
            gen.source,
            sol.region,
            sol.arrivals.spread(),
            sol.approx,
            space.distance(&sol.approx, &gen.source)?
        );
        if let Some(ray) = &sol.ray {
            println!("  ray search: {} levels, halt {:?}", ray.levels.len(), ray.halt);
        }
    }
    Ok(())
}
