//! INI scenario files.
//!
//! ```ini
//! [space]
//! dim = 2
//! p = 5.6789
//!
//! [sensors]
//! kind = random_box
//! lower = -10, -10
//! upper = 10, 10
//! count = 64
//! seed = 1
//!
//! [source]
//! kind = random_box
//! lower = -10, -10
//! upper = 10, 10
//! seed = 2
//! emit_time = 0
//!
//! [solver]
//! algorithm = rc
//! delta = 0.1
//! defect = sup
//! ```
//!
//! Sensor kinds are random_box, canonical_l2, explicit and unit_sphere; source
//! kinds are random_box and explicit; algorithms are rc, sphere and epsnet;
//! defects are sup and sum. Comments take whole lines starting with `;` or `#`.
//! Explicit point lists separate points with `|` and coordinates with `,`.
//! Optional sections: `[initial]` (center, radius), `[epsnet]` (radius, n_max,
//! max_steps, max_depth), `[sphere]` (samples, bound, classify_tol); `[solver]`
//! also takes workers, max_level and max_family.

use std::path::Path;
use std::str::FromStr;

use ini::{Ini, Properties};

use super::{Algorithm, InitialSpec, Scenario, SensorSpec, SourceSpec};
use crate::error::{Error, Result};
use crate::problem::DefectKind;
use crate::space::{LpSpace, Point};

const KEYS: &[(&str, &[&str])] = &[
    ("space", &["dim", "p"]),
    ("sensors", &["kind", "lower", "upper", "count", "seed", "points"]),
    ("source", &["kind", "lower", "upper", "seed", "point", "emit_time"]),
    ("solver", &["algorithm", "delta", "defect", "workers", "max_level", "max_family"]),
    ("initial", &["center", "radius"]),
    ("epsnet", &["radius", "n_max", "max_steps", "max_depth"]),
    ("sphere", &["samples", "bound", "classify_tol"]),
];

fn err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

struct Section<'a> {
    name: &'a str,
    props: Option<&'a Properties>,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn required(&self, key: &str) -> Result<&'a str> {
        self.raw(key).ok_or_else(|| err(format!("[{}] is missing `{key}`", self.name)))
    }

    fn parse<T: FromStr>(&self, key: &str, text: &str) -> Result<T> {
        text.parse().map_err(|_| err(format!("[{}] {key} = {text:?} is not valid", self.name)))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key, self.required(key)?)
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.raw(key).map_or(Ok(default), |v| self.parse(key, v))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        list(self.required(key)?).map_err(|_| err(format!("[{}] {key} is not a comma-separated list of numbers", self.name)))
    }

    fn point(&self, key: &str) -> Result<Point> {
        Point::new(self.list(key)?).map_err(|e| err(format!("[{}] {key}: {e}", self.name)))
    }
}

fn list(text: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    text.split(',').map(|t| t.trim().parse::<f64>()).collect()
}

pub fn read_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Scenario> {
    let ini = Ini::load_from_str_noescape(text).map_err(|e| err(format!("parse error: {e}")))?;
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if props.is_empty() {
                continue;
            }
            return Err(err("keys must appear inside a [section]"));
        };
        let Some((_, keys)) = KEYS.iter().find(|(n, _)| *n == name) else {
            return Err(err(format!("unknown section [{name}]")));
        };
        if let Some((k, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
            return Err(err(format!("unknown key `{k}` in [{name}]")));
        }
    }
    let section = |name| Section { name, props: ini.section(Some(name)) };

    let space = section("space");
    let space = LpSpace::new(space.get("dim")?, space.get_or("p", 2.0)?).map_err(|e| err(e.to_string()))?;

    let sensors = section("sensors");
    let sensors = match sensors.required("kind")? {
        "random_box" => SensorSpec::RandomBox {
            lower: sensors.list("lower")?,
            upper: sensors.list("upper")?,
            count: sensors.get("count")?,
            seed: sensors.get("seed")?,
        },
        "canonical_l2" => SensorSpec::CanonicalL2,
        "explicit" => {
            let pts = sensors
                .required("points")?
                .split('|')
                .map(|chunk| {
                    let coords = list(chunk).map_err(|_| err(format!("[sensors] bad point {:?}", chunk.trim())))?;
                    Point::new(coords).map_err(|e| err(format!("[sensors] {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            SensorSpec::Explicit(pts)
        }
        "unit_sphere" => SensorSpec::UnitSphere,
        other => return Err(err(format!("[sensors] unknown kind {other:?}"))),
    };

    let source_sec = section("source");
    let source = match source_sec.required("kind")? {
        "explicit" => SourceSpec::Explicit(source_sec.point("point")?),
        "random_box" => SourceSpec::RandomBox {
            lower: source_sec.list("lower")?,
            upper: source_sec.list("upper")?,
            seed: source_sec.get("seed")?,
        },
        other => return Err(err(format!("[source] unknown kind {other:?}"))),
    };

    let solver = section("solver");
    let mut sc = Scenario::new(space, sensors, source, solver.get("delta")?);
    sc.emit_time = source_sec.get_or("emit_time", 0.0)?;
    sc.algorithm = match solver.raw("algorithm").unwrap_or("rc") {
        "rc" => Algorithm::Rc,
        "sphere" => Algorithm::Sphere,
        "epsnet" => Algorithm::Epsnet,
        other => return Err(err(format!("[solver] unknown algorithm {other:?}"))),
    };
    sc.defect_kind = match solver.raw("defect").unwrap_or("sup") {
        "sup" => DefectKind::Sup,
        "sum" => DefectKind::Sum,
        other => return Err(err(format!("[solver] unknown defect {other:?}"))),
    };
    sc.workers = solver.raw("workers").map(|w| solver.parse("workers", w)).transpose()?;
    if sc.workers == Some(0) {
        return Err(err("[solver] workers must be at least 1"));
    }
    sc.rc.max_level = solver.get_or("max_level", sc.rc.max_level)?;
    sc.rc.max_family = solver.get_or("max_family", sc.rc.max_family)?;
    if !(sc.delta > 0.0 && sc.delta.is_finite()) {
        return Err(err("[solver] delta must be positive"));
    }

    let initial = section("initial");
    if initial.props.is_some() {
        sc.initial = InitialSpec::Ball { center: initial.point("center")?, radius: initial.get("radius")? };
    }

    let eps = section("epsnet");
    sc.epsnet.radius = eps.get_or("radius", sc.epsnet.radius)?;
    sc.epsnet.n_max = eps.get_or("n_max", sc.epsnet.n_max)?;
    sc.epsnet.max_steps = eps.get_or("max_steps", sc.epsnet.max_steps)?;
    sc.epsnet.max_depth = eps.get_or("max_depth", sc.epsnet.max_depth)?;

    let sph = section("sphere");
    sc.sphere.samples = sph.get_or("samples", sc.sphere.samples)?;
    sc.sphere.bound = sph.get_or("bound", sc.sphere.bound)?;
    sc.sphere.classify_tol = sph.get_or("classify_tol", sc.sphere.classify_tol)?;

    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPENDIX: &str = "
[space]
dim = 2
p = 5.6789

[sensors]
kind = random_box
lower = -10, -10
upper = 10, 10
count = 64
seed = 7

[source]
kind = random_box
lower = -10, -10
upper = 10, 10
seed = 8

[solver]
algorithm = rc
delta = 0.1
";

    #[test]
    fn appendix_file_matches_constructor() {
        assert_eq!(parse_config(APPENDIX).unwrap(), Scenario::appendix(7, 8));
    }

    #[test]
    fn explicit_points() {
        let text = "[space]\ndim = 1\n[sensors]\nkind = explicit\npoints = 0 | 1\n[source]\nkind = explicit\npoint = 0.5\nemit_time = 0.25\n[solver]\ndelta = 0.001\ndefect = sum\nworkers = 2\n[initial]\ncenter = 0.5\nradius = 0.5\n";
        let sc = parse_config(text).unwrap();
        assert_eq!(sc.sensors, SensorSpec::Explicit(vec![Point::new(vec![0.0]).unwrap(), Point::new(vec![1.0]).unwrap()]));
        assert_eq!(sc.emit_time, 0.25);
        assert_eq!(sc.defect_kind, DefectKind::Sum);
        assert_eq!(sc.workers, Some(2));
        assert!(matches!(sc.initial, InitialSpec::Ball { radius, .. } if radius == 0.5));
    }

    #[test]
    fn bad_files() {
        for text in [
            "",
            "[space]\ndim = 2\n",
            "[space]\ndim = two\n",
            "stray = 1\n[space]\ndim = 2\n",
            &APPENDIX.replace("delta = 0.1", "delta = -1"),
            &APPENDIX.replace("algorithm = rc", "algorithm = magic"),
            &APPENDIX.replace("[solver]", "[solver]\ncolour = red"),
            &APPENDIX.replace("[solver]", "[extra]\n[solver]"),
            &APPENDIX.replace("lower = -10, -10\nupper = 10, 10\ncount", "lower = -10, x\nupper = 10, 10\ncount"),
            &APPENDIX.replace("p = 5.6789", "p = 0.5"),
        ] {
            assert!(matches!(parse_config(text), Err(Error::Config(_))), "accepted {text:?}");
        }
    }
}
