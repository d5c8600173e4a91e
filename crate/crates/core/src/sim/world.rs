use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::edc::{Point2, RegionId, RegionLabeling};
use crate::measurement::LandmarkId;

/// Landmarks and the ordered imaging positions of one simulated traverse.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub side: f64,
    pub landmarks: Vec<(LandmarkId, Point2)>,
    pub waypoints: Vec<Point2>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldConfig {
    pub landmarks: usize,
    pub images: usize,
    pub side: f64,
    /// Minimum distance, as a fraction of `side`, from every landmark to
    /// every EDC boundary locus of every triple it belongs to.
    pub boundary_margin: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            landmarks: 30,
            images: 50,
            side: 100.0,
            boundary_margin: 1e-3,
        }
    }
}

/// Distances from `c` to the six boundary loci of `ab:c`: line `AB`, the
/// perpendiculars at `A` and `B`, the bisector, and the circles of radius
/// `|AB|` about `A` and `B`.
pub fn locus_distances(a: Point2, b: Point2, c: Point2) -> [f64; 6] {
    let ab = b.sub(a);
    let len = ab.norm_sq().sqrt();
    let ac = c.sub(a);
    let bc = c.sub(b);
    [
        ab.cross(ac).abs() / len,
        ab.dot(ac).abs() / len,
        ab.dot(bc).abs() / len,
        (bc.norm_sq() - ac.norm_sq()).abs() / (2.0 * len),
        (ac.norm_sq().sqrt() - len).abs(),
        (bc.norm_sq().sqrt() - len).abs(),
    ]
}

fn clear_of_loci(placed: &[Point2], p: Point2, margin: f64) -> bool {
    if placed.iter().any(|q| q.dist(p) < margin) {
        return false;
    }
    let ok =
        |a: Point2, b: Point2, c: Point2| locus_distances(a, b, c).iter().all(|&d| d >= margin);
    for (x, &q) in placed.iter().enumerate() {
        for &r in &placed[x + 1..] {
            // p as C, and p as A or B with the others as C
            let fine = ok(q, r, p)
                && ok(r, q, p)
                && ok(p, q, r)
                && ok(q, p, r)
                && ok(p, r, q)
                && ok(r, p, q);
            if !fine {
                return false;
            }
        }
    }
    true
}

/// No two landmarks at nearly equal range and no two nearly in line with
/// the camera.
fn clear_view(landmarks: &[(LandmarkId, Point2)], w: Point2, margin: f64) -> bool {
    for (x, &(_, p)) in landmarks.iter().enumerate() {
        for &(_, q) in &landmarks[x + 1..] {
            let (dp, dq) = (p.dist(w), q.dist(w));
            if (dp - dq).abs() < margin {
                return false;
            }
            let sin = p.sub(w).cross(q.sub(w)) / (dp * dq);
            if sin.abs() < 1e-6 {
                return false;
            }
        }
    }
    true
}

const PLACEMENT_TRIES: usize = 2_000;

/// Uniform landmarks and imaging positions in `[0, side]^2`.
///
/// Landmarks are placed one at a time and redrawn while they come within
/// the boundary margin of a locus; if one cannot be placed within a fixed
/// number of draws the margin is halved, which only happens for dense maps.
pub fn gen_world(cfg: &WorldConfig, seed: u64) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = cfg.side;
    let draw =
        |rng: &mut ChaCha8Rng| Point2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
    let mut margin = cfg.boundary_margin * side;
    let mut placed: Vec<Point2> = Vec::with_capacity(cfg.landmarks);
    while placed.len() < cfg.landmarks {
        let mut tries = 0;
        let p = loop {
            let p = draw(&mut rng);
            if clear_of_loci(&placed, p, margin) {
                break Some(p);
            }
            tries += 1;
            if tries == PLACEMENT_TRIES {
                break None;
            }
        };
        match p {
            Some(p) => placed.push(p),
            None => margin *= 0.5,
        }
    }
    let landmarks: Vec<(LandmarkId, Point2)> = placed
        .into_iter()
        .enumerate()
        .map(|(i, p)| (i as LandmarkId + 1, p))
        .collect();
    let view_margin = 1e-6 * side;
    let waypoints = (0..cfg.images)
        .map(|_| loop {
            let w = draw(&mut rng);
            if clear_view(&landmarks, w, view_margin) {
                break w;
            }
        })
        .collect();
    World {
        side,
        landmarks,
        waypoints,
    }
}

impl World {
    pub fn position(&self, id: LandmarkId) -> Option<Point2> {
        self.landmarks.iter().find(|l| l.0 == id).map(|l| l.1)
    }

    /// True region of the ordered relation `ab:c`.
    pub fn truth(
        &self,
        labeling: &RegionLabeling,
        rel: [LandmarkId; 3],
    ) -> Result<RegionId, SimError> {
        let p = |id| self.position(id).ok_or(SimError::UnknownLandmark(id));
        Ok(labeling.region_of_points(p(rel[0])?, p(rel[1])?, p(rel[2])?)?)
    }

    /// `# side`, then `L id x y` and `W x y` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("# side {}\n", self.side);
        for (id, p) in &self.landmarks {
            let _ = writeln!(s, "L {id} {} {}", p.x, p.y);
        }
        for p in &self.waypoints {
            let _ = writeln!(s, "W {} {}", p.x, p.y);
        }
        s
    }

    pub fn parse(text: &str) -> Result<World, SimError> {
        let mut w = World {
            side: 0.0,
            landmarks: Vec::new(),
            waypoints: Vec::new(),
        };
        let mut side = None;
        for (n, line) in text.lines().enumerate() {
            let err = |reason: &str| SimError::WorldFile {
                line: n + 1,
                reason: reason.into(),
            };
            let num = |t: &str| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err("bad number"))
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                ["#", "side", s] => side = Some(num(s)?),
                [t, ..] if t.starts_with('#') => {}
                ["L", id, x, y] => {
                    let id: LandmarkId = id.parse().map_err(|_| err("bad landmark id"))?;
                    if w.position(id).is_some() {
                        return Err(err("duplicate landmark id"));
                    }
                    w.landmarks.push((id, Point2::new(num(x)?, num(y)?)));
                }
                ["W", x, y] => w.waypoints.push(Point2::new(num(x)?, num(y)?)),
                _ => return Err(err("expected `L id x y` or `W x y`")),
            }
        }
        w.side = side.unwrap_or_else(|| {
            w.landmarks
                .iter()
                .map(|l| l.1)
                .chain(w.waypoints.iter().copied())
                .fold(0.0, |m, p| m.max(p.x).max(p.y))
        });
        Ok(w)
    }
}

/// A rover loop through a cluttered yard: 30 rocks in a 20 m square and
/// imaging points every few metres on a closed rounded-square path.
pub fn mars_yard() -> World {
    let cfg = WorldConfig {
        landmarks: 30,
        images: 0,
        side: 20.0,
        boundary_margin: 1e-3,
    };
    let mut w = gen_world(&cfg, 0x4d41_5253);
    let corners = [(4.0, 4.0), (16.0, 4.0), (16.0, 16.0), (4.0, 16.0)];
    for (i, &(x0, y0)) in corners.iter().enumerate() {
        let (x1, y1) = corners[(i + 1) % 4];
        for k in 0..12 {
            let t = k as f64 / 12.0;
            w.waypoints.push(Point2::new(
                x0 + t * (x1 - x0) + 0.37 * (k as f64).sin(),
                y0 + t * (y1 - y0) + 0.29 * (k as f64).cos(),
            ));
        }
    }
    w
}
