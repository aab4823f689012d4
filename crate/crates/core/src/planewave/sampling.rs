//! Uniform interior and boundary samples on boxes.

use rand::Rng;

use crate::field::Point;
use crate::geometry::Domain;

/// Sample points with the measures that turn sample means into integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub interior: Vec<Point>,
    pub boundary: Vec<(Point, Point)>,
    pub interior_measure: f64,
    pub boundary_measure: f64,
}

/// Uniform points in the box, and boundary points that pick a face with
/// probability proportional to its measure and then a uniform point on it.
pub fn draw_samples<R: Rng>(domain: &Domain, n_interior: usize, n_boundary: usize, rng: &mut R) -> Samples {
    let dim = domain.dim();
    let b = domain.bounds();
    let interior = (0..n_interior)
        .map(|_| {
            let mut x = [0.0; 3];
            for a in 0..dim {
                x[a] = b[a].0 + (b[a].1 - b[a].0) * rng.random::<f64>();
            }
            x
        })
        .collect();
    // face (axis, upper) with measure Π_{other axes} extent
    let faces: Vec<(usize, bool, f64)> = (0..dim)
        .flat_map(|a| {
            let m: f64 = (0..dim).filter(|&o| o != a).map(|o| domain.extent(o)).product();
            [(a, false, m), (a, true, m)]
        })
        .collect();
    let total: f64 = faces.iter().map(|f| f.2).sum();
    let boundary = (0..n_boundary)
        .map(|_| {
            let mut t = rng.random::<f64>() * total;
            let mut face = faces[faces.len() - 1];
            for f in &faces {
                if t < f.2 {
                    face = *f;
                    break;
                }
                t -= f.2;
            }
            let (axis, upper, _) = face;
            let mut x = [0.0; 3];
            let mut n = [0.0; 3];
            for a in 0..dim {
                x[a] = if a == axis {
                    if upper {
                        b[a].1
                    } else {
                        b[a].0
                    }
                } else {
                    b[a].0 + (b[a].1 - b[a].0) * rng.random::<f64>()
                };
            }
            n[axis] = if upper { 1.0 } else { -1.0 };
            (x, n)
        })
        .collect();
    Samples {
        interior,
        boundary,
        interior_measure: domain.measure(),
        boundary_measure: domain.boundary_measure(),
    }
}
