//! Polyline paths in the spectral plane and the crossing count that decides
//! which residues a continuation picks up.

use num_complex::Complex64;

use crate::error::PathError;

/// Perturbation applied to the ray anchor when a vertex sits on the ray.
pub const TIE_TOLERANCE: f64 = 1e-14;
pub const TIE_SHIFT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PolylinePath {
    vertices: Vec<Complex64>,
}

impl PolylinePath {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self, PathError> {
        if vertices.len() < 2 {
            return Err(PathError::TooFewVertices);
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PathError::NonFinite);
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(PathError::RepeatedVertex(i));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }
}

/// Four-vertex path `B → B+iε → Re z+iε → z`.
pub fn gamma0_path(base: f64, z: Complex64, epsilon: f64) -> Result<PolylinePath, PathError> {
    if !(epsilon > 0.0) {
        return Err(PathError::NonPositiveEpsilon);
    }
    let up = Complex64::new(base, epsilon);
    PolylinePath::new(vec![Complex64::new(base, 0.0), up, Complex64::new(z.re, epsilon), z])
}

/// Signed number of times `path` crosses the horizontal ray `c + ℝ⁺`:
/// a downward crossing counts +1, an upward one −1.
pub fn crossings_of_shifted_ray(path: &PolylinePath, c: Complex64) -> Result<i32, PathError> {
    let touches = |y: f64| {
        path.vertices
            .iter()
            .any(|v| (v.im - y).abs() <= TIE_TOLERANCE && v.re >= c.re - TIE_TOLERANCE)
    };
    let y = if touches(c.im) { c.im - TIE_SHIFT } else { c.im };
    if touches(y) {
        let i = path.vertices.iter().position(|v| (v.im - y).abs() <= TIE_TOLERANCE).unwrap_or(0);
        return Err(PathError::Collinear(i));
    }
    let mut count = 0;
    for w in path.vertices.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (above_p, above_q) = (p.im > y, q.im > y);
        if above_p == above_q {
            continue;
        }
        let x = p.re + (y - p.im) * (q.re - p.re) / (q.im - p.im);
        if x > c.re {
            count += if above_p { 1 } else { -1 };
        }
    }
    Ok(count)
}
