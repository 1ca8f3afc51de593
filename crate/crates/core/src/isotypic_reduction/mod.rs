//! Isotypic decomposition of `M(k, k)` under the diagonal action of
//! `S_p x S_q` (with `q = 0` meaning all of `S_k`), explicit representative
//! matrices for every isotypic component, and reduction of an equivariant
//! operator to one small block per component.
//!
//! Indices `0..p` form the first block and `p..k` the second.

mod reduce;

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub use reduce::{
    direct_xy_eigenvalues, project_operator, reduced_block, reduced_blocks, reduced_spectrum,
    reduced_spectrum_padded, Projection, ReducedBlock, SpectralLine, SpectrumWithMultiplicity,
    EQUIVARIANCE_TOL,
};

/// Irreducible representation class of a symmetric group or a product of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IrrepClass {
    Trivial,
    /// Standard representation of `S_m`.
    Standard(usize),
    /// Exterior square of the standard representation of `S_m`.
    ExteriorSquare(usize),
    /// Irrep of `S_m` for the partition `(m - 2, 2)`.
    PartitionK2(usize),
    /// Outer tensor product of the standard representations of `S_p` and `S_q`.
    ExteriorTensor(usize, usize),
}

impl IrrepClass {
    pub fn degree(self) -> usize {
        match self {
            IrrepClass::Trivial => 1,
            IrrepClass::Standard(m) => m - 1,
            IrrepClass::ExteriorSquare(m) => (m - 1) * (m - 2) / 2,
            IrrepClass::PartitionK2(m) => m * (m - 3) / 2,
            IrrepClass::ExteriorTensor(p, q) => (p - 1) * (q - 1),
        }
    }

    /// Short label: `t`, `s6`, `x6`, `y6`, `s5*s2`.
    pub fn label(self) -> String {
        match self {
            IrrepClass::Trivial => "t".into(),
            IrrepClass::Standard(m) => format!("s{m}"),
            IrrepClass::ExteriorSquare(m) => format!("x{m}"),
            IrrepClass::PartitionK2(m) => format!("y{m}"),
            IrrepClass::ExteriorTensor(p, q) => format!("s{p}*s{q}"),
        }
    }
}

impl fmt::Display for IrrepClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One isotypic component with as many representatives as its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotypicComponent {
    pub irrep: IrrepClass,
    pub multiplicity: usize,
    pub representatives: Vec<DMatrix<f64>>,
}

fn check_shape(k: usize, p: usize, q: usize) -> Result<()> {
    let ok = p + q == k
        && match q {
            0 => k >= 4,
            1 => k >= 5,
            _ => k >= 4 + q && 2 * p > k,
        };
    if ok {
        Ok(())
    } else {
        Err(Error::UnsupportedShape { k, p, q })
    }
}

/// Multiplicities of every irrep in `M(k, k)`, in the order
/// `t, s_p, s_q, x_p, y_p, x_q, y_q, s_p*s_q`, zero multiplicities dropped.
///
/// Supported: `q = 0` with `k >= 4`; `q = 1` with `k >= 5`; `q >= 2` with
/// `k >= q + 4` and `p > k / 2`.
pub fn isotypic_decomposition(k: usize, p: usize, q: usize) -> Result<Vec<(IrrepClass, usize)>> {
    check_shape(k, p, q)?;
    use IrrepClass::*;
    let list = match q {
        0 => vec![(Trivial, 2), (Standard(k), 3), (ExteriorSquare(k), 1), (PartitionK2(k), 1)],
        1 => vec![(Trivial, 5), (Standard(p), 5), (ExteriorSquare(p), 1), (PartitionK2(p), 1)],
        _ => vec![
            (Trivial, 6),
            (Standard(p), 5),
            (Standard(q), if q == 2 { 4 } else { 5 }),
            (ExteriorSquare(p), 1),
            (PartitionK2(p), 1),
            (ExteriorSquare(q), (q >= 3) as usize),
            (PartitionK2(q), (q >= 4) as usize),
            (ExteriorTensor(p, q), 2),
        ],
    };
    Ok(list.into_iter().filter(|&(_, m)| m > 0).collect())
}

/// Vectors generating the standard-representation copies. Each must be
/// nonzero with zero sum; `second` is only used when `q >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generators {
    pub first: Vec<f64>,
    pub second: Option<Vec<f64>>,
}

impl Generators {
    /// `(1, -1, 0, ..., 0)` in both blocks.
    pub fn canonical(p: usize, q: usize) -> Self {
        let unit = |m: usize| {
            let mut u = vec![0.0; m];
            u[0] = 1.0;
            u[1] = -1.0;
            u
        };
        Self { first: unit(p), second: (q >= 2).then(|| unit(q)) }
    }
}

fn check_generator(u: &[f64], m: usize) -> Result<()> {
    let sum: f64 = u.iter().sum();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if u.len() != m || norm == 0.0 || sum.abs() > 1e-12 * norm.max(1.0) {
        return Err(Error::Config(format!("generator must be a nonzero zero-sum vector of length {m}")));
    }
    Ok(())
}

/// Representative matrices of the single-group constructions on an `m x m` block.
pub mod blocks {
    use nalgebra::DMatrix;

    pub fn identity(m: usize) -> DMatrix<f64> {
        DMatrix::identity(m, m)
    }

    /// All ones off the diagonal.
    pub fn off_diagonal_ones(m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    /// `diag(u)`.
    pub fn diag(u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(u.len(), u.len(), |i, j| if i == j { u[i] } else { 0.0 })
    }

    /// `u_i - u_j`.
    pub fn difference(u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(u.len(), u.len(), |i, j| u[i] - u[j])
    }

    /// `u_i + u_j` off the diagonal.
    pub fn sum_off_diagonal(u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(u.len(), u.len(), |i, j| if i == j { 0.0 } else { u[i] + u[j] })
    }

    /// Antisymmetric, zero row and column sums, supported on the first and last rows and columns.
    pub fn exterior_square(m: usize) -> DMatrix<f64> {
        let last = m - 1;
        let top = (m - 2) as f64;
        DMatrix::from_fn(m, m, |i, j| match (i, j) {
            _ if i == j => 0.0,
            (0, j) if j == last => -top,
            (i, 0) if i == last => top,
            (0, _) => 1.0,
            (_, 0) => -1.0,
            (i, j) if j == last && i != 0 => 1.0,
            (i, _) if i == last => -1.0,
            _ => 0.0,
        })
    }

    /// Symmetric, zero diagonal, zero row and column sums.
    pub fn partition_two(m: usize) -> DMatrix<f64> {
        let a = m as f64 - 3.0;
        DMatrix::from_fn(m, m, |i, j| {
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            match (lo, hi) {
                _ if i == j => 0.0,
                (0, 1) => a,
                (0, 2) => -a,
                (1, h) if h >= 3 => -1.0,
                (2, h) if h >= 3 => 1.0,
                _ => 0.0,
            }
        })
    }
}

/// Places `block` at `(row, col)` in a `k x k` zero matrix.
fn place(k: usize, row: usize, col: usize, block: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    m.view_mut((row, col), block.shape()).copy_from(block);
    m
}

/// Representatives built from `(1, -1, 0, ..., 0)`.
pub fn representative_set(k: usize, p: usize, q: usize) -> Result<Vec<IsotypicComponent>> {
    representative_set_with(k, p, q, &Generators::canonical(p, q))
}

/// Representatives built from caller-chosen generators.
pub fn representative_set_with(k: usize, p: usize, q: usize, gens: &Generators) -> Result<Vec<IsotypicComponent>> {
    let decomposition = isotypic_decomposition(k, p, q)?;
    check_generator(&gens.first, p)?;
    let u = &gens.first;
    let ones_p = DMatrix::from_element(p, 1, 1.0);
    let ones_q = DMatrix::from_element(q, 1, 1.0);
    let col = |x: &[f64]| DMatrix::from_column_slice(x.len(), 1, x);

    let v: Vec<f64> = if q >= 2 {
        let v = gens.second.clone().ok_or_else(|| Error::Config("second generator required".into()))?;
        check_generator(&v, q)?;
        v
    } else {
        Vec::new()
    };

    let reps_for = |irrep: IrrepClass| -> Vec<DMatrix<f64>> {
        use IrrepClass::*;
        match irrep {
            Trivial => {
                let mut r = vec![place(k, 0, 0, &blocks::identity(p)), place(k, 0, 0, &blocks::off_diagonal_ones(p))];
                if q >= 1 {
                    r.push(place(k, p, p, &blocks::identity(q)));
                    if q >= 2 {
                        r.push(place(k, p, p, &blocks::off_diagonal_ones(q)));
                    }
                    r.push(place(k, 0, p, &DMatrix::from_element(p, q, 1.0)));
                    r.push(place(k, p, 0, &DMatrix::from_element(q, p, 1.0)));
                }
                r
            }
            Standard(m) if m == p => {
                let mut r = vec![
                    place(k, 0, 0, &blocks::diag(u)),
                    place(k, 0, 0, &blocks::difference(u)),
                    place(k, 0, 0, &blocks::sum_off_diagonal(u)),
                ];
                if q >= 1 {
                    r.push(place(k, 0, p, &(col(u) * ones_q.transpose())));
                    r.push(place(k, p, 0, &(ones_q.clone() * col(u).transpose())));
                }
                r
            }
            Standard(_) => {
                let mut r = vec![place(k, p, p, &blocks::diag(&v)), place(k, p, p, &blocks::difference(&v))];
                if q >= 3 {
                    r.push(place(k, p, p, &blocks::sum_off_diagonal(&v)));
                }
                r.push(place(k, 0, p, &(ones_p.clone() * col(&v).transpose())));
                r.push(place(k, p, 0, &(col(&v) * ones_p.transpose())));
                r
            }
            ExteriorSquare(m) if m == p => vec![place(k, 0, 0, &blocks::exterior_square(p))],
            ExteriorSquare(_) => vec![place(k, p, p, &blocks::exterior_square(q))],
            PartitionK2(m) if m == p => vec![place(k, 0, 0, &blocks::partition_two(p))],
            PartitionK2(_) => vec![place(k, p, p, &blocks::partition_two(q))],
            ExteriorTensor(..) => vec![
                place(k, 0, p, &(col(u) * col(&v).transpose())),
                place(k, p, 0, &(col(&v) * col(u).transpose())),
            ],
        }
    };

    Ok(decomposition
        .into_iter()
        .map(|(irrep, multiplicity)| {
            let representatives = reps_for(irrep);
            debug_assert_eq!(representatives.len(), multiplicity, "{irrep}");
            IsotypicComponent { irrep, multiplicity, representatives }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supported() -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for k in 4..=12 {
            for q in 0..k {
                let p = k - q;
                if check_shape(k, p, q).is_ok() {
                    out.push((k, p, q));
                }
            }
        }
        out
    }

    #[test]
    fn dimensions_add_up() {
        for (k, p, q) in supported() {
            let total: usize = isotypic_decomposition(k, p, q).unwrap().iter().map(|(c, m)| c.degree() * m).sum();
            assert_eq!(total, k * k, "k={k} p={p} q={q}");
        }
    }

    #[test]
    fn known_decompositions() {
        use IrrepClass::*;
        assert_eq!(
            isotypic_decomposition(6, 6, 0).unwrap(),
            vec![(Trivial, 2), (Standard(6), 3), (ExteriorSquare(6), 1), (PartitionK2(6), 1)]
        );
        assert_eq!(
            isotypic_decomposition(7, 6, 1).unwrap(),
            vec![(Trivial, 5), (Standard(6), 5), (ExteriorSquare(6), 1), (PartitionK2(6), 1)]
        );
        let q2 = isotypic_decomposition(8, 6, 2).unwrap();
        assert!(q2.contains(&(Standard(2), 4)));
        assert!(!q2.iter().any(|(c, _)| matches!(c, ExteriorSquare(2) | PartitionK2(2))));
        assert!(isotypic_decomposition(7, 3, 4).is_err());
        assert!(isotypic_decomposition(4, 3, 1).is_err());
    }

    #[test]
    fn exterior_square_shape() {
        let x = blocks::exterior_square(5);
        for i in 0..5 {
            assert_eq!(x.row(i).sum(), 0.0);
            assert_eq!(x.column(i).sum(), 0.0);
            for j in 0..5 {
                assert_eq!(x[(i, j)], -x[(j, i)]);
                if x[(i, j)] != 0.0 {
                    assert!(i == 0 || j == 0 || i == 4 || j == 4);
                }
            }
        }
        assert_eq!(x[(0, 1)], 1.0);
    }

    #[test]
    fn partition_two_shape() {
        let y = blocks::partition_two(6);
        assert_eq!(y, y.transpose());
        for i in 0..6 {
            assert_eq!(y[(i, i)], 0.0);
            assert_eq!(y.row(i).sum(), 0.0);
        }
        assert_eq!(y[(0, 1)], 3.0);
    }

    #[test]
    fn representatives_are_independent_and_orthogonal_across_irreps() {
        for (k, p, q) in supported() {
            let comps = representative_set(k, p, q).unwrap();
            assert_eq!(comps.iter().map(|c| c.representatives.len()).sum::<usize>(),
                comps.iter().map(|c| c.multiplicity).sum::<usize>());
            for (a, ca) in comps.iter().enumerate() {
                let gram = DMatrix::from_fn(ca.multiplicity, ca.multiplicity, |i, j| {
                    ca.representatives[i].dot(&ca.representatives[j])
                });
                assert!(gram.determinant().abs() > 1e-9, "{} at ({k},{p},{q})", ca.irrep);
                for cb in &comps[a + 1..] {
                    for ra in &ca.representatives {
                        for rb in &cb.representatives {
                            assert!(ra.dot(rb).abs() < 1e-12, "{} vs {}", ca.irrep, cb.irrep);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_group_count() {
        let comps = representative_set(7, 7, 0).unwrap();
        assert_eq!(comps.iter().map(|c| c.representatives.len()).sum::<usize>(), 7);
    }

    #[test]
    fn bad_generators_are_rejected() {
        let gens = Generators { first: vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0], second: None };
        assert!(representative_set_with(7, 6, 1, &gens).is_err());
    }
}
