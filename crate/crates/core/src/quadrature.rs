//! Sobol low-discrepancy points on the unit hypercube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const BITS: usize = 32;

/// Number of dimensions covered by the built-in direction table.
pub const MAX_DIMENSION: usize = 16;

/// (primitive polynomial, degree, initial direction integers), Joe-Kuo table.
const DIRECTIONS: [(u32, usize, &[u32]); MAX_DIMENSION] = [
    (1, 0, &[1]),
    (3, 1, &[1]),
    (7, 2, &[1, 3]),
    (11, 3, &[1, 3, 1]),
    (13, 3, &[1, 1, 1]),
    (19, 4, &[1, 1, 3, 3]),
    (25, 4, &[1, 3, 5, 13]),
    (37, 5, &[1, 1, 5, 5, 17]),
    (41, 5, &[1, 1, 5, 5, 5]),
    (47, 5, &[1, 1, 7, 11, 19]),
    (55, 5, &[1, 1, 5, 1, 1]),
    (59, 5, &[1, 1, 1, 3, 11]),
    (61, 5, &[1, 3, 5, 5, 31]),
    (67, 6, &[1, 3, 3, 9, 7, 49]),
    (91, 6, &[1, 1, 1, 15, 21, 21]),
    (97, 6, &[1, 3, 1, 13, 27, 49]),
];

fn direction_vectors(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (poly, degree, initial) = DIRECTIONS[dim];
    let mut m = [0u64; BITS];
    m[..degree].copy_from_slice(&initial.iter().map(|&x| x as u64).collect::<Vec<_>>());
    for k in degree..BITS {
        let mut next = (m[k - degree] << degree) ^ m[k - degree];
        for l in 1..degree {
            if (poly >> (degree - l)) & 1 == 1 {
                next ^= m[k - l] << l;
            }
        }
        m[k] = next;
    }
    for k in 0..BITS {
        v[k] = (m[k] << (BITS - 1 - k)) as u32;
    }
    v
}

/// Raw 32-bit Sobol integers in Gray-code order, row-major `count × dimension`.
fn sobol_integers(dimension: usize, count: usize) -> Vec<u32> {
    let vectors: Vec<[u32; BITS]> = (0..dimension).map(direction_vectors).collect();
    let mut out = vec![0u32; count * dimension];
    let mut state = vec![0u32; dimension];
    for i in 1..count {
        let bit = i.trailing_zeros() as usize;
        for (j, s) in state.iter_mut().enumerate() {
            *s ^= vectors[j][bit];
        }
        out[i * dimension..(i + 1) * dimension].copy_from_slice(&state);
    }
    out
}

fn check_request(dimension: usize, count: usize) -> Result<()> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("quadrature dimension must be positive".into()));
    }
    if dimension > MAX_DIMENSION {
        return Err(Error::DimensionBudget {
            dimension,
            max: MAX_DIMENSION,
        });
    }
    if count == 0 || count as u64 > 1u64 << BITS {
        return Err(Error::InvalidArgument(format!("invalid point count {count}")));
    }
    Ok(())
}

/// Unscrambled Sobol points, row-major. The first point is the origin.
pub fn sobol_points(dimension: usize, count: usize) -> Result<Vec<f64>> {
    check_request(dimension, count)?;
    let scale = (1u64 << BITS) as f64;
    Ok(sobol_integers(dimension, count)
        .into_iter()
        .map(|x| x as f64 / scale)
        .collect())
}

/// A fixed point set with equal weights, every coordinate strictly inside (0, 1).
#[derive(Debug, Clone)]
pub struct Quadrature {
    dimension: usize,
    points: Vec<f64>,
}

impl Quadrature {
    /// Sobol points with a seeded digital shift, centred within their 2^-32 cell.
    pub fn sobol(dimension: usize, count: usize, seed: u64) -> Result<Self> {
        check_request(dimension, count)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shifts: Vec<u32> = (0..dimension).map(|_| rng.random()).collect();
        let scale = (1u64 << BITS) as f64;
        let raw = sobol_integers(dimension, count);
        let points = raw
            .chunks_exact(dimension)
            .flat_map(|row| {
                row.iter()
                    .zip(&shifts)
                    .map(|(&x, &s)| ((x ^ s) as f64 + 0.5) / scale)
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(Self { dimension, points })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dimension)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference rows produced by an independent Sobol implementation with the
    // same direction numbers, unscrambled.
    #[test]
    fn first_points_match_reference() {
        let pts = sobol_points(4, 8).unwrap();
        let expected = [
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.25],
            [0.25, 0.75, 0.75, 0.75],
            [0.375, 0.375, 0.625, 0.875],
            [0.875, 0.875, 0.125, 0.375],
            [0.625, 0.125, 0.875, 0.625],
            [0.125, 0.625, 0.375, 0.125],
        ];
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(&pts[i * 4..i * 4 + 4], row, "point {i}");
        }
    }

    #[test]
    fn higher_dimensions_match_reference() {
        let pts = sobol_points(12, 64).unwrap();
        let cases: [(usize, [f64; 12]); 3] = [
            (
                5,
                [0.875, 0.875, 0.125, 0.375, 0.875, 0.625, 0.875, 0.375, 0.375, 0.125, 0.375, 0.875],
            ),
            (
                17,
                [
                    0.59375, 0.96875, 0.96875, 0.15625, 0.78125, 0.46875, 0.03125, 0.34375,
                    0.96875, 0.65625, 0.59375, 0.90625,
                ],
            ),
            (
                63,
                [
                    0.015625, 0.796875, 0.359375, 0.453125, 0.859375, 0.140625, 0.578125,
                    0.140625, 0.828125, 0.578125, 0.421875, 0.671875,
                ],
            ),
        ];
        for (i, row) in cases {
            assert_eq!(&pts[i * 12..i * 12 + 12], &row, "point {i}");
        }
    }

    #[test]
    fn shifted_points_are_interior_and_seeded() {
        let a = Quadrature::sobol(3, 1024, 7).unwrap();
        let b = Quadrature::sobol(3, 1024, 7).unwrap();
        let c = Quadrature::sobol(3, 1024, 8).unwrap();
        assert_eq!(a.points, b.points);
        assert_ne!(a.points, c.points);
        assert!(a.points.iter().all(|&x| x > 0.0 && x < 1.0));
        assert_eq!(a.len(), 1024);
    }

    #[test]
    fn each_coordinate_is_stratified() {
        // every dyadic interval of width 1/64 holds exactly 16 of 1024 points
        let q = Quadrature::sobol(MAX_DIMENSION, 1024, 3).unwrap();
        for j in 0..MAX_DIMENSION {
            let mut counts = [0usize; 64];
            for row in q.rows() {
                counts[(row[j] * 64.0) as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == 16), "dimension {j}");
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(
            sobol_points(MAX_DIMENSION + 1, 8),
            Err(Error::DimensionBudget { .. })
        ));
        assert!(sobol_points(0, 8).is_err());
        assert!(sobol_points(2, 0).is_err());
    }
}
