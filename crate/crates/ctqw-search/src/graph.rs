//! Graph family generators and walk-Hamiltonian normalization.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::{Error, Result};

/// Maximum number of rejection-resampling attempts for Erdős–Rényi graphs.
pub const ER_RETRY_CAP: usize = 100;

/// A graph family together with its parameters. Equal specs (including the
/// seed) always reproduce a bit-identical adjacency matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete { n: usize },
    CompleteBipartite { n1: usize, n2: usize },
    Hypercube { dim: u32 },
    Lattice { sides: Vec<usize>, periodic: bool },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
    JoinedComplete { n: usize },
    BridgedComplete { n: usize },
    Rook { n1: usize, n2: usize },
}

impl GraphSpec {
    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        match self {
            GraphSpec::Complete { n } => *n,
            GraphSpec::CompleteBipartite { n1, n2 } => n1 + n2,
            GraphSpec::Hypercube { dim } => 1usize << dim,
            GraphSpec::Lattice { sides, .. } => sides.iter().product(),
            GraphSpec::ErdosRenyi { n, .. } => *n,
            GraphSpec::JoinedComplete { n } | GraphSpec::BridgedComplete { n } => *n,
            GraphSpec::Rook { n1, n2 } => n1 * n2,
        }
    }

    /// Whether every node has the same degree (known per family without
    /// building the matrix).
    pub fn is_regular(&self) -> bool {
        match self {
            GraphSpec::Complete { .. }
            | GraphSpec::Hypercube { .. }
            | GraphSpec::BridgedComplete { .. }
            | GraphSpec::Rook { .. } => true,
            GraphSpec::CompleteBipartite { n1, n2 } => n1 == n2,
            GraphSpec::Lattice { periodic, .. } => *periodic,
            GraphSpec::ErdosRenyi { .. } | GraphSpec::JoinedComplete { .. } => false,
        }
    }

    /// Default normalization: degree division for regular families,
    /// spectral-norm division otherwise.
    pub fn default_normalization(&self) -> Normalization {
        if self.is_regular() {
            Normalization::Degree
        } else {
            Normalization::SpectralNorm
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidGraph(msg));
        match self {
            GraphSpec::Complete { n } if *n < 1 => fail("complete requires n >= 1".into()),
            GraphSpec::CompleteBipartite { n1, n2 } if *n1 < 1 || *n2 < 1 => {
                fail("complete_bipartite requires n1, n2 >= 1".into())
            }
            GraphSpec::Hypercube { dim } if *dim < 1 || *dim > 24 => {
                fail("hypercube requires 1 <= dim <= 24".into())
            }
            GraphSpec::Lattice { sides, .. }
                if sides.is_empty() || sides.iter().any(|&s| s < 1) =>
            {
                fail("lattice requires nonempty sides, each >= 1".into())
            }
            GraphSpec::ErdosRenyi { n, p, .. } if *n < 2 || !(0.0..=1.0).contains(p) => {
                fail("erdos_renyi requires n >= 2 and p in [0, 1]".into())
            }
            GraphSpec::JoinedComplete { n } | GraphSpec::BridgedComplete { n }
                if *n < 4 || n % 2 != 0 =>
            {
                fail("joined/bridged complete require even n >= 4".into())
            }
            GraphSpec::Rook { n1, n2 } if *n1 < 1 || *n2 < 1 => {
                fail("rook requires n1, n2 >= 1".into())
            }
            _ => Ok(()),
        }
    }
}

/// How an adjacency matrix was turned into a walk Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by the common degree (regular graphs only).
    Degree,
    /// Divide by the largest-magnitude eigenvalue.
    SpectralNorm,
    /// `I - D^{-1/2} (D - A) D^{-1/2}`.
    IdentityMinusNormalizedLaplacian,
    /// Affine map of the spectrum onto [0, 1] with the maximum at 1.
    AffineToUnitInterval,
}

/// Record of the scale/shift that was applied: `H = scale * A' + shift * I`,
/// where `A'` is the (possibly degree-rescaled) input.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub mode: Normalization,
    pub scale: f64,
    pub shift: f64,
}

/// A walk Hamiltonian: dense, real symmetric, with top eigenvalue 1.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub matrix: DMatrix<f64>,
    pub normalization: NormalizationRecord,
    pub n: usize,
}

/// Build the 0/1 adjacency matrix of `spec`. Deterministic for equal specs.
pub fn build_graph(spec: &GraphSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let adj = match spec {
        GraphSpec::Complete { n } => complete(*n),
        GraphSpec::CompleteBipartite { n1, n2 } => complete_bipartite(*n1, *n2),
        GraphSpec::Hypercube { dim } => hypercube(*dim),
        GraphSpec::Lattice { sides, periodic } => lattice(sides, *periodic),
        GraphSpec::ErdosRenyi { n, p, seed } => erdos_renyi(*n, *p, *seed)?,
        GraphSpec::JoinedComplete { n } => joined_complete(*n),
        // The bridged-complete graph is the Rook's graph with n1 = 2.
        GraphSpec::BridgedComplete { n } => rook(2, n / 2),
        GraphSpec::Rook { n1, n2 } => rook(*n1, *n2),
    };
    Ok(adj)
}

fn complete(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i != j { 1.0 } else { 0.0 })
}

fn complete_bipartite(n1: usize, n2: usize) -> DMatrix<f64> {
    let n = n1 + n2;
    DMatrix::from_fn(n, n, |i, j| if (i < n1) != (j < n1) { 1.0 } else { 0.0 })
}

fn hypercube(dim: u32) -> DMatrix<f64> {
    let n = 1usize << dim;
    let mut a = DMatrix::zeros(n, n);
    for u in 0..n {
        for b in 0..dim {
            let v = u ^ (1usize << b);
            a[(u, v)] = 1.0;
        }
    }
    a
}

fn lattice(sides: &[usize], periodic: bool) -> DMatrix<f64> {
    let n: usize = sides.iter().product();
    let mut a = DMatrix::zeros(n, n);
    // Mixed-radix index: coordinate d varies fastest for larger d.
    let mut strides = vec![1usize; sides.len()];
    for d in (0..sides.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * sides[d + 1];
    }
    for u in 0..n {
        for (d, &side) in sides.iter().enumerate() {
            if side == 1 {
                continue;
            }
            let coord = (u / strides[d]) % side;
            let base = u - coord * strides[d];
            let mut link = |c: usize| {
                let v = base + c * strides[d];
                a[(u, v)] = 1.0;
                a[(v, u)] = 1.0;
            };
            if coord + 1 < side {
                link(coord + 1);
            } else if periodic && side > 2 {
                link(0);
            }
            if coord == 0 && periodic && side > 2 {
                link(side - 1);
            }
        }
    }
    a
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ER_RETRY_CAP {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p {
                    a[(i, j)] = 1.0;
                    a[(j, i)] = 1.0;
                }
            }
        }
        if is_connected(&a) {
            return Ok(a);
        }
    }
    Err(Error::DisconnectedSample {
        attempts: ER_RETRY_CAP,
    })
}

fn joined_complete(n: usize) -> DMatrix<f64> {
    let half = n / 2;
    let mut a = DMatrix::zeros(n, n);
    for b in 0..2 {
        let off = b * half;
        for i in 0..half {
            for j in 0..half {
                if i != j {
                    a[(off + i, off + j)] = 1.0;
                }
            }
        }
    }
    // single bridge between node 0 of each block
    a[(0, half)] = 1.0;
    a[(half, 0)] = 1.0;
    a
}

/// Kronecker-sum adjacency `A_{K_{n1}} (x) I_{n2} + I_{n1} (x) A_{K_{n2}}`;
/// node (i, j) maps to index `i * n2 + j`.
fn rook(n1: usize, n2: usize) -> DMatrix<f64> {
    let n = n1 * n2;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n1 {
        for j in 0..n2 {
            let u = i * n2 + j;
            for i2 in 0..n1 {
                if i2 != i {
                    a[(u, i2 * n2 + j)] = 1.0;
                }
            }
            for j2 in 0..n2 {
                if j2 != j {
                    a[(u, i * n2 + j2)] = 1.0;
                }
            }
        }
    }
    a
}

/// Connectivity via breadth-first search.
pub fn is_connected(adj: &DMatrix<f64>) -> bool {
    let n = adj.nrows();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if adj[(u, v)] != 0.0 && !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

fn degrees(adj: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(adj.nrows(), adj.column_iter().map(|c| c.sum()))
}

fn common_degree(adj: &DMatrix<f64>) -> Option<f64> {
    let d = degrees(adj);
    let d0 = d[0];
    if d.iter().all(|&x| x == d0) {
        Some(d0)
    } else {
        None
    }
}

/// Normalize an adjacency matrix into a walk Hamiltonian with top eigenvalue
/// pinned to 1.
pub fn normalize(adj: &DMatrix<f64>, mode: Normalization) -> Result<Hamiltonian> {
    let n = adj.nrows();
    if n == 0 || adj.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidHamiltonian("zero or empty matrix".into()));
    }
    if (adj - adj.transpose()).amax() > 1e-12 {
        return Err(Error::InvalidHamiltonian("adjacency not symmetric".into()));
    }

    let (mut matrix, record) = match mode {
        Normalization::Degree => {
            let d = common_degree(adj).ok_or(Error::NotRegular)?;
            (
                adj / d,
                NormalizationRecord {
                    mode,
                    scale: 1.0 / d,
                    shift: 0.0,
                },
            )
        }
        Normalization::IdentityMinusNormalizedLaplacian => {
            // I - D^{-1/2} (D - A) D^{-1/2} = D^{-1/2} A D^{-1/2}
            let d = degrees(adj);
            if d.iter().any(|&x| x == 0.0) {
                return Err(Error::InvalidHamiltonian("isolated node".into()));
            }
            let inv_sqrt: Vec<f64> = d.iter().map(|&x| 1.0 / x.sqrt()).collect();
            let m = DMatrix::from_fn(n, n, |i, j| adj[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
            (
                m,
                NormalizationRecord {
                    mode,
                    scale: f64::NAN, // entrywise degree scaling, no single factor
                    shift: 0.0,
                },
            )
        }
        Normalization::SpectralNorm => {
            let (lo, hi) = extreme_eigenvalues(adj)?;
            let norm = lo.abs().max(hi.abs());
            (
                adj / norm,
                NormalizationRecord {
                    mode,
                    scale: 1.0 / norm,
                    shift: 0.0,
                },
            )
        }
        Normalization::AffineToUnitInterval => {
            let (lo, hi) = extreme_eigenvalues(adj)?;
            let span = hi - lo;
            if span <= 0.0 {
                return Err(Error::InvalidHamiltonian(
                    "degenerate spectrum, affine map undefined".into(),
                ));
            }
            let scale = 1.0 / span;
            let shift = -lo / span;
            let mut m = adj * scale;
            for i in 0..n {
                m[(i, i)] += shift;
            }
            (m, NormalizationRecord { mode, scale, shift })
        }
    };

    // Pin the top eigenvalue to 1 exactly (a no-op up to rounding for the
    // degree and Laplacian modes on regular graphs).
    let (_, top) = extreme_eigenvalues(&matrix)?;
    if (top - 1.0).abs() > 1e-10 {
        match mode {
            Normalization::AffineToUnitInterval => {
                // rescale around the affine image is not shape-preserving;
                // the affine map itself pins the top, so this is a defect.
                return Err(Error::InvalidHamiltonian(format!(
                    "affine normalization missed the top eigenvalue: {top}"
                )));
            }
            _ => matrix /= top,
        }
    }
    // enforce exact symmetry after the arithmetic above
    let sym = (&matrix + matrix.transpose()) * 0.5;
    Ok(Hamiltonian {
        matrix: sym,
        normalization: record,
        n,
    })
}

fn extreme_eigenvalues(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    let eig = m.clone().symmetric_eigenvalues();
    if eig.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver(
            "symmetric eigenvalue iteration produced non-finite values".into(),
        ));
    }
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Textual edge-list export: one "u v" pair per line, 0-indexed, ascending.
pub fn edge_list(adj: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let n = adj.nrows();
    for u in 0..n {
        for v in (u + 1)..n {
            if adj[(u, v)] != 0.0 {
                writeln!(out, "{u} {v}").unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eigvals(m: &DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn smallest_complete_graph() {
        let a = build_graph(&GraphSpec::Complete { n: 2 }).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn rook_2x2_is_a_4_cycle() {
        // Kronecker-sum entries enumerated by hand: every node has degree 2
        // and opposite corners are not adjacent.
        let a = build_graph(&GraphSpec::Rook { n1: 2, n2: 2 }).unwrap();
        for u in 0..4 {
            assert_eq!(a.column(u).sum(), 2.0);
        }
        assert_eq!(a[(0, 3)], 0.0);
        assert_eq!(a[(1, 2)], 0.0);
    }

    #[test]
    fn bridged_complete_is_rook_n1_2() {
        for n in [4usize, 8, 12] {
            let b = build_graph(&GraphSpec::BridgedComplete { n }).unwrap();
            let r = build_graph(&GraphSpec::Rook { n1: 2, n2: n / 2 }).unwrap();
            assert_eq!(b, r);
        }
    }

    #[test]
    fn build_graph_is_deterministic() {
        let spec = GraphSpec::ErdosRenyi {
            n: 40,
            p: 0.2,
            seed: 7,
        };
        let a = build_graph(&spec).unwrap();
        let b = build_graph(&spec).unwrap();
        assert_eq!(a, b);
        assert!(is_connected(&a));
    }

    #[test]
    fn disconnected_sample_errors() {
        let err = build_graph(&GraphSpec::ErdosRenyi {
            n: 30,
            p: 0.0,
            seed: 1,
        })
        .unwrap_err();
        assert!(matches!(err, Error::DisconnectedSample { .. }));
    }

    #[test]
    fn k4_degree_spectrum() {
        // direct 4x4 diagonalization: eigenvalues {1, -1/3 (x3)}
        let a = build_graph(&GraphSpec::Complete { n: 4 }).unwrap();
        let h = normalize(&a, Normalization::Degree).unwrap();
        let ev = eigvals(&h.matrix);
        for &e in &ev[..3] {
            assert!((e + 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((ev[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_equals_laplacian_mode_on_regular_graphs() {
        let a = build_graph(&GraphSpec::Hypercube { dim: 4 }).unwrap();
        let h1 = normalize(&a, Normalization::Degree).unwrap();
        let h2 = normalize(&a, Normalization::IdentityMinusNormalizedLaplacian).unwrap();
        assert!((&h1.matrix - &h2.matrix).amax() < 1e-14);
    }

    #[test]
    fn degree_mode_rejects_irregular_graphs() {
        let a = build_graph(&GraphSpec::JoinedComplete { n: 8 }).unwrap();
        assert!(matches!(
            normalize(&a, Normalization::Degree),
            Err(Error::NotRegular)
        ));
    }

    #[test]
    fn top_eigenvalue_pinned_in_every_mode() {
        let a = build_graph(&GraphSpec::JoinedComplete { n: 16 }).unwrap();
        for mode in [
            Normalization::SpectralNorm,
            Normalization::IdentityMinusNormalizedLaplacian,
            Normalization::AffineToUnitInterval,
        ] {
            let h = normalize(&a, mode).unwrap();
            let ev = eigvals(&h.matrix);
            assert!(
                (ev.last().unwrap() - 1.0).abs() < 1e-10,
                "mode {mode:?}: top {}",
                ev.last().unwrap()
            );
        }
    }

    #[test]
    fn uniform_vector_is_top_eigenvector_for_regular_families() {
        for spec in [
            GraphSpec::Complete { n: 9 },
            GraphSpec::Hypercube { dim: 3 },
            GraphSpec::Rook { n1: 3, n2: 5 },
            GraphSpec::Lattice {
                sides: vec![4, 4],
                periodic: true,
            },
        ] {
            let a = build_graph(&spec).unwrap();
            let h = normalize(&a, Normalization::Degree).unwrap();
            let n = h.n;
            let v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
            let resid = (&h.matrix * &v - &v).norm();
            assert!(resid <= 1e-10 * (n as f64).sqrt(), "{spec:?}: {resid}");
        }
    }

    #[test]
    fn lattice_open_vs_periodic_degrees() {
        let open = build_graph(&GraphSpec::Lattice {
            sides: vec![4, 3],
            periodic: false,
        })
        .unwrap();
        assert_eq!(open.column(0).sum(), 2.0); // corner
        let per = build_graph(&GraphSpec::Lattice {
            sides: vec![4, 3],
            periodic: true,
        })
        .unwrap();
        for u in 0..12 {
            assert_eq!(per.column(u).sum(), 4.0);
        }
    }

    #[test]
    fn edge_list_roundtrip_shape() {
        let a = build_graph(&GraphSpec::Complete { n: 3 }).unwrap();
        assert_eq!(edge_list(&a), "0 1\n0 2\n1 2\n");
    }
}
