//! Rank transform into the unit hypercube and the statistics used by the
//! maximum-entropy solver.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{average_ranks, normal_quantile};

/// Rank-transformed rows; every cell lies strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaSample {
    columns: Vec<Vec<f64>>,
    source_columns: Vec<String>,
    n: usize,
}

impl CopulaSample {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn source_columns(&self) -> &[String] {
        &self.source_columns
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Keeps the listed coordinates, in that order.
    pub fn project(&self, coords: &[usize]) -> CopulaSample {
        CopulaSample {
            columns: coords.iter().map(|&j| self.columns[j].clone()).collect(),
            source_columns: coords.iter().map(|&j| self.source_columns[j].clone()).collect(),
            n: self.n,
        }
    }
}

/// Ranks of `values` divided by `n + 1`, ties sharing their average rank.
pub fn rank_transform(values: &[f64]) -> Vec<f64> {
    let scale = (values.len() + 1) as f64;
    average_ranks(values).into_iter().map(|r| r / scale).collect()
}

/// Rank-transforms each named column. Constant columns are rejected.
pub fn to_copula<S: AsRef<str>>(columns: &[(S, &[f64])]) -> Result<CopulaSample> {
    let n = columns.first().map(|(_, v)| v.len()).unwrap_or(0);
    let mut out = Vec::with_capacity(columns.len());
    for (name, values) in columns {
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("copula input"));
        }
        if values.windows(2).all(|w| w[0] == w[1]) {
            return Err(Error::ConstantColumn(name.as_ref().to_string()));
        }
        out.push(rank_transform(values));
    }
    Ok(CopulaSample {
        columns: out,
        source_columns: columns.iter().map(|(s, _)| s.as_ref().to_string()).collect(),
        n,
    })
}

/// Family of statistics whose expectations the max-entropy model matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureKind {
    /// Every `u_i` and every product `u_i u_j` with `i < j`.
    PairwiseProducts,
    /// As above plus every `(1 - u_i)(1 - u_j)` with `i < j`.
    PairwiseProductsPlusTails,
    /// Monomials of total degree `1..=degree` in the normal scores `Φ⁻¹(u_i)`.
    NormalScores { degree: u32 },
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureKind::PairwiseProducts => f.write_str("pairwise"),
            FeatureKind::PairwiseProductsPlusTails => f.write_str("pairwise_tails"),
            FeatureKind::NormalScores { degree } => write!(f, "normal_scores:{degree}"),
        }
    }
}

impl FeatureKind {
    /// Normal-score degree for copulas of up to `dimension` coordinates.
    pub fn auto(dimension: usize) -> Self {
        let degree = match dimension {
            0..=4 => 4,
            5..=6 => 3,
            _ => 2,
        };
        FeatureKind::NormalScores { degree }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMapSpec {
    kind: FeatureKind,
    dimension: usize,
    /// Each monomial as a list of coordinate indices, repeated by power.
    monomials: Vec<Vec<usize>>,
}

impl FeatureMapSpec {
    pub fn new(kind: FeatureKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("feature map needs at least one coordinate".into()));
        }
        let monomials = match kind {
            FeatureKind::NormalScores { degree } => {
                if degree == 0 {
                    return Err(Error::InvalidArgument("normal-score degree must be positive".into()));
                }
                let mut all = Vec::new();
                for total in 1..=degree as usize {
                    let mut combo = vec![0usize; total];
                    loop {
                        all.push(combo.clone());
                        if !next_multiset(&mut combo, dimension) {
                            break;
                        }
                    }
                }
                all
            }
            _ => Vec::new(),
        };
        Ok(Self {
            kind,
            dimension,
            monomials,
        })
    }

    /// Default map for a dimension: richer polynomials where they stay affordable.
    pub fn auto(dimension: usize) -> Result<Self> {
        Self::new(FeatureKind::auto(dimension), dimension)
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of statistics `m`.
    pub fn feature_count(&self) -> usize {
        let d = self.dimension;
        match self.kind {
            FeatureKind::PairwiseProducts => d + d * (d - 1) / 2,
            FeatureKind::PairwiseProductsPlusTails => d + d * (d - 1),
            FeatureKind::NormalScores { .. } => self.monomials.len(),
        }
    }

    /// Writes the statistics of one point `u` into `out` (length `m`).
    pub fn evaluate(&self, u: &[f64], out: &mut [f64]) {
        let d = self.dimension;
        match self.kind {
            FeatureKind::PairwiseProducts | FeatureKind::PairwiseProductsPlusTails => {
                out[..d].copy_from_slice(u);
                let mut k = d;
                for i in 0..d {
                    for j in i + 1..d {
                        out[k] = u[i] * u[j];
                        k += 1;
                    }
                }
                if self.kind == FeatureKind::PairwiseProductsPlusTails {
                    for i in 0..d {
                        for j in i + 1..d {
                            out[k] = (1.0 - u[i]) * (1.0 - u[j]);
                            k += 1;
                        }
                    }
                }
            }
            FeatureKind::NormalScores { .. } => {
                let z: Vec<f64> = u.iter().map(|&p| normal_quantile(p)).collect();
                for (slot, mono) in out.iter_mut().zip(&self.monomials) {
                    *slot = mono.iter().map(|&i| z[i]).product();
                }
            }
        }
    }
}

/// Advances a non-decreasing index combination; false once exhausted.
fn next_multiset(combo: &mut [usize], dimension: usize) -> bool {
    let len = combo.len();
    for pos in (0..len).rev() {
        if combo[pos] + 1 < dimension {
            let v = combo[pos] + 1;
            for slot in &mut combo[pos..] {
                *slot = v;
            }
            return true;
        }
    }
    false
}

/// Sample mean of the statistics over the rows of `sample`.
pub fn feature_moments(sample: &CopulaSample, spec: &FeatureMapSpec) -> Result<Vec<f64>> {
    if spec.dimension() != sample.dimension() {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension(),
            found: sample.dimension(),
        });
    }
    let m = spec.feature_count();
    let mut sums = vec![0.0; m];
    let mut buf = vec![0.0; m];
    let mut row = vec![0.0; sample.dimension()];
    for i in 0..sample.n() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = sample.columns[j][i];
        }
        spec.evaluate(&row, &mut buf);
        for (s, b) in sums.iter_mut().zip(&buf) {
            *s += b;
        }
    }
    let n = sample.n() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(cols: &[&[f64]]) -> CopulaSample {
        let named: Vec<(String, &[f64])> =
            cols.iter().enumerate().map(|(i, c)| (format!("c{i}"), *c)).collect();
        to_copula(&named).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_transform(&[3.0, 1.0, 2.0]), vec![0.75, 0.25, 0.5]);
        assert_eq!(rank_transform(&[5.0, 5.0, 1.0]), vec![0.625, 0.625, 0.25]);
    }

    #[test]
    fn constant_column_rejected() {
        let err = to_copula(&[("flat", &[1.0, 1.0, 1.0][..])]).unwrap_err();
        assert!(matches!(err, Error::ConstantColumn(name) if name == "flat"));
    }

    #[test]
    fn feature_counts() {
        for d in 1..6 {
            let pp = FeatureMapSpec::new(FeatureKind::PairwiseProducts, d).unwrap();
            assert_eq!(pp.feature_count(), d + d * (d - 1) / 2);
            let pt = FeatureMapSpec::new(FeatureKind::PairwiseProductsPlusTails, d).unwrap();
            assert_eq!(pt.feature_count(), d + d * (d - 1));
        }
        // C(d + k, k) - 1 monomials of degree 1..=k
        let ns = FeatureMapSpec::new(FeatureKind::NormalScores { degree: 4 }, 3).unwrap();
        assert_eq!(ns.feature_count(), 34);
        let ns = FeatureMapSpec::new(FeatureKind::NormalScores { degree: 2 }, 10).unwrap();
        assert_eq!(ns.feature_count(), 65);
    }

    #[test]
    fn moments_match_row_wise_oracle() {
        let s = sample(&[&[0.3, 2.0, 1.1], &[5.0, 4.0, 9.0], &[1.0, 0.0, 2.0]]);
        for kind in [
            FeatureKind::PairwiseProducts,
            FeatureKind::PairwiseProductsPlusTails,
            FeatureKind::NormalScores { degree: 3 },
        ] {
            let spec = FeatureMapSpec::new(kind, 3).unwrap();
            let got = feature_moments(&s, &spec).unwrap();
            // brute force: evaluate each row directly, then average
            let mut want = vec![0.0; spec.feature_count()];
            for i in 0..3 {
                let u = s.row(i);
                let mut phi = Vec::new();
                match kind {
                    FeatureKind::NormalScores { .. } => {
                        let z: Vec<f64> = u.iter().map(|&p| normal_quantile(p)).collect();
                        // degree 1, 2, 3 monomials in lexicographic multiset order
                        phi.extend_from_slice(&z);
                        for a in 0..3 {
                            for b in a..3 {
                                phi.push(z[a] * z[b]);
                            }
                        }
                        for a in 0..3 {
                            for b in a..3 {
                                for c in b..3 {
                                    phi.push(z[a] * z[b] * z[c]);
                                }
                            }
                        }
                    }
                    _ => {
                        phi.extend_from_slice(&u);
                        for a in 0..3 {
                            for b in a + 1..3 {
                                phi.push(u[a] * u[b]);
                            }
                        }
                        if kind == FeatureKind::PairwiseProductsPlusTails {
                            for a in 0..3 {
                                for b in a + 1..3 {
                                    phi.push((1.0 - u[a]) * (1.0 - u[b]));
                                }
                            }
                        }
                    }
                }
                for (w, p) in want.iter_mut().zip(phi) {
                    *w += p / 3.0;
                }
            }
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "{kind:?}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn independent_uniform_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        let spec = FeatureMapSpec::new(FeatureKind::PairwiseProducts, 2).unwrap();
        let m = feature_moments(&sample(&[&a, &b]), &spec).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-3);
        assert!((m[1] - 0.5).abs() < 1e-3);
        assert!((m[2] - 0.25).abs() < 0.01);
    }

    #[test]
    fn comonotone_product_moment() {
        let a: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let spec = FeatureMapSpec::new(FeatureKind::PairwiseProducts, 2).unwrap();
        let m = feature_moments(&sample(&[&a, &a]), &spec).unwrap();
        assert!((m[2] - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn dimension_mismatch() {
        let s = sample(&[&[1.0, 2.0]]);
        let spec = FeatureMapSpec::new(FeatureKind::PairwiseProducts, 2).unwrap();
        assert!(matches!(feature_moments(&s, &spec), Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn monotone_maps_leave_ranks_unchanged(values in prop::collection::vec(-1e3f64..1e3, 3..60)) {
            let mapped: Vec<f64> = values.iter().map(|v| (v / 100.0).exp() * 3.0 + 1.0).collect();
            prop_assert_eq!(rank_transform(&values), rank_transform(&mapped));
        }

        #[test]
        fn ranks_form_the_interior_grid(values in prop::collection::vec(-1e3f64..1e3, 3..60)) {
            let n = values.len();
            let r = rank_transform(&values);
            prop_assert!(r.iter().all(|&u| u > 0.0 && u < 1.0));
            // ranks always sum to n(n+1)/2, ties or not
            let total: f64 = r.iter().sum::<f64>() * (n + 1) as f64;
            prop_assert!((total - (n * (n + 1)) as f64 / 2.0).abs() < 1e-6);
        }

        #[test]
        fn product_moments_stay_in_unit_interval(
            a in prop::collection::vec(-50f64..50.0, 3..40),
            shift in 0usize..40,
        ) {
            let b: Vec<f64> = a.iter().cycle().skip(shift % a.len()).take(a.len()).copied().collect();
            prop_assume!(a.windows(2).any(|w| w[0] != w[1]));
            let s = sample(&[&a, &b]);
            for kind in [FeatureKind::PairwiseProducts, FeatureKind::PairwiseProductsPlusTails] {
                let spec = FeatureMapSpec::new(kind, 2).unwrap();
                for m in feature_moments(&s, &spec).unwrap() {
                    prop_assert!(m > 0.0 && m < 1.0);
                }
            }
        }

        #[test]
        fn moments_ignore_row_order(a in prop::collection::vec(-50f64..50.0, 4..30), seed in 0u64..1000) {
            prop_assume!(a.windows(2).any(|w| w[0] != w[1]));
            let b: Vec<f64> = a.iter().map(|v| (v * 1.7).sin()).collect();
            prop_assume!(b.windows(2).any(|w| w[0] != w[1]));
            let mut order: Vec<usize> = (0..a.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            let pa: Vec<f64> = order.iter().map(|&i| a[i]).collect();
            let pb: Vec<f64> = order.iter().map(|&i| b[i]).collect();
            let spec = FeatureMapSpec::new(FeatureKind::NormalScores { degree: 2 }, 2).unwrap();
            let m1 = feature_moments(&sample(&[&a, &b]), &spec).unwrap();
            let m2 = feature_moments(&sample(&[&pa, &pb]), &spec).unwrap();
            for (x, y) in m1.iter().zip(&m2) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
