//! Reference shape functions: quintic Hermite on an interval (value, first and
//! second derivative per node) and Bogner–Fox–Schmit bicubics on a rectangle
//! (value, both first derivatives and the mixed derivative per node).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    QuinticHermite1d,
    BognerFoxSchmit2d,
}

impl ElementKind {
    pub fn dim(&self) -> usize {
        match self {
            Self::QuinticHermite1d => 1,
            Self::BognerFoxSchmit2d => 2,
        }
    }

    pub fn dofs_per_node(&self) -> usize {
        match self {
            Self::QuinticHermite1d => 3,
            Self::BognerFoxSchmit2d => 4,
        }
    }

    pub fn local_dofs(&self) -> usize {
        self.dofs_per_node() << self.dim()
    }

    /// Highest polynomial degree per axis.
    pub fn degree(&self) -> usize {
        match self {
            Self::QuinticHermite1d => 5,
            Self::BognerFoxSchmit2d => 3,
        }
    }

    /// Gauss points per axis exact for products of shape functions, plus two.
    pub fn default_quad_order(&self) -> usize {
        self.degree() + 1 + 2
    }

    pub fn for_dim(dim: usize) -> Option<Self> {
        match dim {
            1 => Some(Self::QuinticHermite1d),
            2 => Some(Self::BognerFoxSchmit2d),
            _ => None,
        }
    }
}

/// Value and physical derivatives of one real shape function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShapeJet {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
    pub dxy: f64,
}

impl ShapeJet {
    pub fn lap(&self) -> f64 {
        self.dxx + self.dyy
    }
}

/// `(p, p', p'')` of the six quintic Hermite functions at `t ∈ [0, 1]`.
/// Order: value, slope, curvature at `t = 0`, then the same at `t = 1`.
pub fn quintic_hermite(t: f64) -> [[f64; 3]; 6] {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    [
        [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            -60.0 * t + 180.0 * t2 - 120.0 * t3,
        ],
        [
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
        ],
        [
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
        ],
        [
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            60.0 * t - 180.0 * t2 + 120.0 * t3,
        ],
        [
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
        ],
        [
            0.5 * (t3 - 2.0 * t4 + t5),
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
            0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        ],
    ]
}

/// `(p, p', p'')` of the cubic Hermite functions: value at 0, value at 1,
/// slope at 0, slope at 1.
pub fn cubic_hermite(t: f64) -> [[f64; 3]; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        [1.0 - 3.0 * t2 + 2.0 * t3, -6.0 * t + 6.0 * t2, -6.0 + 12.0 * t],
        [3.0 * t2 - 2.0 * t3, 6.0 * t - 6.0 * t2, 6.0 - 12.0 * t],
        [t - 2.0 * t2 + t3, 1.0 - 4.0 * t + 3.0 * t2, -4.0 + 6.0 * t],
        [-t2 + t3, -2.0 * t + 3.0 * t2, -2.0 + 6.0 * t],
    ]
}

/// Physical shape jets at reference point `(t, s)` of a cell with sides
/// `(hx, hy)`, in local DOF order.
pub fn shape_jets(kind: ElementKind, t: f64, s: f64, hx: f64, hy: f64) -> Vec<ShapeJet> {
    match kind {
        ElementKind::QuinticHermite1d => {
            let b = quintic_hermite(t);
            let scale = [1.0, hx, hx * hx];
            (0..6)
                .map(|i| {
                    let c = scale[i % 3];
                    ShapeJet {
                        v: c * b[i][0],
                        dx: c * b[i][1] / hx,
                        dxx: c * b[i][2] / (hx * hx),
                        ..ShapeJet::default()
                    }
                })
                .collect()
        }
        ElementKind::BognerFoxSchmit2d => {
            let bt = cubic_hermite(t);
            let bs = cubic_hermite(s);
            let mut out = Vec::with_capacity(16);
            for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                // value and slope functions attached to the corner
                let (vt, st) = (bt[a], bt[2 + a]);
                let (vs, ss) = (bs[b], bs[2 + b]);
                for (ft, fs, c) in [
                    (vt, vs, 1.0),
                    (st, vs, hx),
                    (vt, ss, hy),
                    (st, ss, hx * hy),
                ] {
                    out.push(ShapeJet {
                        v: c * ft[0] * fs[0],
                        dx: c * ft[1] * fs[0] / hx,
                        dy: c * ft[0] * fs[1] / hy,
                        dxx: c * ft[2] * fs[0] / (hx * hx),
                        dyy: c * ft[0] * fs[2] / (hy * hy),
                        dxy: c * ft[1] * fs[1] / (hx * hy),
                    });
                }
            }
            out
        }
    }
}
