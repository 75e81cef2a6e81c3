//! Eigendecomposition of walk Hamiltonians, grouped spectra, the weighted
//! spectral sums s_k, and quasi-degenerate subspace bookkeeping.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::Hamiltonian;
use crate::{Error, Result};

/// Default relative tolerance for merging nearly equal eigenvalues.
pub const GROUP_TOL: f64 = 1e-9;

/// Spectral weights below this are treated as exact zeros.
pub const WEIGHT_FLOOR: f64 = 1e-14;

/// Distinct eigenvalues of H (ascending, last = 1) with multiplicities and
/// the marked node's aggregated squared overlap per eigenspace.
#[derive(Debug, Clone, Serialize)]
pub struct GroupedSpectrum {
    pub values: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub weights: Vec<f64>,
    /// Eigenvector matrix (columns ascending by eigenvalue); absent when the
    /// spectrum was assembled from a closed form.
    #[serde(skip)]
    pub full_basis: Option<DMatrix<f64>>,
    #[serde(skip)]
    pub marked: Option<usize>,
}

impl GroupedSpectrum {
    /// Assemble from already-grouped data (closed-form constructions).
    pub fn from_grouped(
        values: Vec<f64>,
        multiplicities: Vec<usize>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let gs = GroupedSpectrum {
            values,
            multiplicities,
            weights,
            full_basis: None,
            marked: None,
        };
        gs.validate()?;
        Ok(gs)
    }

    pub fn n(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn group_count(&self) -> usize {
        self.values.len()
    }

    fn validate(&self) -> Result<()> {
        let g = self.values.len();
        if g == 0 || self.multiplicities.len() != g || self.weights.len() != g {
            return Err(Error::InvalidSpectrum("mismatched group arrays".into()));
        }
        for w in self.values.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSpectrum(format!(
                    "values not strictly ascending: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if (self.values[g - 1] - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidSpectrum(format!(
                "top eigenvalue {} != 1",
                self.values[g - 1]
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Diagonalize `h`, project the marked basis vector onto each eigenspace, and
/// merge eigenvalues closer than `group_tol` (relative).
pub fn decompose(h: &Hamiltonian, marked: usize, group_tol: f64) -> Result<GroupedSpectrum> {
    let n = h.n;
    if marked >= n {
        return Err(Error::InvalidSpectrum(format!(
            "marked index {marked} out of range for n = {n}"
        )));
    }
    let eig = h.matrix.clone().symmetric_eigen();

    // sort eigenpairs ascending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut lambdas = Vec::with_capacity(n);
    let mut basis = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        lambdas.push(eig.eigenvalues[src]);
        basis.set_column(col, &eig.eigenvectors.column(src));
    }

    // residual check on the retained eigenpairs (the eigensolver's backward
    // error grows with the spectrum spread; 1e-8 sqrt(n) leaves headroom for
    // dense irregular graphs while still catching real failures)
    let tol = 1e-8 * (n as f64).sqrt();
    for i in [0, n / 2, n - 1] {
        let v = basis.column(i);
        let resid = (&h.matrix * v - v * lambdas[i]).norm();
        if resid > tol {
            return Err(Error::Eigensolver(format!(
                "residual {resid:.3e} at eigenvalue {} exceeds {tol:.3e}",
                lambdas[i]
            )));
        }
    }

    // group adjacent eigenvalues within relative tolerance
    let mut values = Vec::new();
    let mut multiplicities = Vec::new();
    let mut weights = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (lambdas[j] - lambdas[j - 1]).abs() <= group_tol * (1.0 + lambdas[j].abs()) {
            j += 1;
        }
        let m = j - i;
        let mean = lambdas[i..j].iter().sum::<f64>() / m as f64;
        let w: f64 = (i..j).map(|k| basis[(marked, k)].powi(2)).sum();
        values.push(mean);
        multiplicities.push(m);
        weights.push(w);
        i = j;
    }
    // pin the top group to exactly 1
    let last = values.len() - 1;
    values[last] = 1.0;
    // weights that are zero up to rounding (marked node orthogonal to the
    // group by symmetry) stay exactly zero; keeping 1e-30-size weights as
    // active poles would put secular roots within a machine epsilon of them
    for w in weights.iter_mut() {
        if *w < WEIGHT_FLOOR {
            *w = 0.0;
        }
    }
    // wash rounding out of the weight sum
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }

    let gs = GroupedSpectrum {
        values,
        multiplicities,
        weights,
        full_basis: Some(basis),
        marked: Some(marked),
    };
    gs.validate()?;
    Ok(gs)
}

/// Weighted spectral sums and gaps for a given number of excluded top levels.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SParams {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// number of excluded top eigenvalues, counted with multiplicity
    pub d: usize,
    /// squared overlap of the initial state with the marked node
    pub epsilon: f64,
    /// total marked-node weight of the excluded subspace
    pub epsilon_d: f64,
    /// 1 minus the smallest excluded eigenvalue
    pub gap_d: f64,
    /// 1 minus the largest retained eigenvalue
    pub gap: f64,
    /// 1 minus the smallest eigenvalue (the full spectral spread)
    pub delta_max: f64,
}

impl SParams {
    /// s1/sqrt(s2): the predicted peak amplitude scale.
    pub fn ratio(&self) -> f64 {
        self.s1 / self.s2.sqrt()
    }
}

/// Index of the first group in the excluded suffix covering exactly `d`
/// eigenvalues with multiplicity.
pub(crate) fn suffix_start(spec: &GroupedSpectrum, d: usize) -> Result<usize> {
    let n = spec.n();
    if d == 0 || d >= n {
        return Err(Error::InvalidSpectrum(format!(
            "excluded count {d} out of range for n = {n}"
        )));
    }
    let mut acc = 0;
    for g in (0..spec.group_count()).rev() {
        acc += spec.multiplicities[g];
        if acc == d {
            return Ok(g);
        }
        if acc > d {
            return Err(Error::SplitsGroup { d });
        }
    }
    unreachable!("d < n so the suffix terminates inside the group list")
}

/// Compute s_k for k = 1..=3 plus gaps, excluding the top `d` eigenvalues.
/// `epsilon` defaults to the top-eigenvector overlap; see [`rotated_overlap`].
pub fn s_params(spec: &GroupedSpectrum, d: usize) -> Result<SParams> {
    let (epsilon, _) = rotated_overlap(spec, d, InitialStatePolicy::TopEigenvector)?;
    s_params_with_epsilon(spec, d, epsilon)
}

pub fn s_params_with_epsilon(spec: &GroupedSpectrum, d: usize, epsilon: f64) -> Result<SParams> {
    let cut = suffix_start(spec, d)?;
    let epsilon_d: f64 = spec.weights[cut..].iter().sum();
    let mut s = [0.0f64; 3];
    for g in 0..cut {
        let lam = spec.values[g];
        if 1.0 - lam <= 0.0 {
            return Err(Error::DegenerateTopNotExcluded);
        }
        let mut term = spec.weights[g];
        for sk in s.iter_mut() {
            term /= 1.0 - lam;
            *sk += term;
        }
    }
    Ok(SParams {
        s1: s[0],
        s2: s[1],
        s3: s[2],
        d,
        epsilon,
        epsilon_d,
        gap_d: 1.0 - spec.values[cut],
        gap: if cut > 0 {
            1.0 - spec.values[cut - 1]
        } else {
            1.0
        },
        delta_max: 1.0 - spec.values[0],
    })
}

/// Diagnostic s_k for any 1 <= k <= 6.
pub fn s_k(spec: &GroupedSpectrum, d: usize, k: u32) -> Result<f64> {
    assert!((1..=6).contains(&k), "s_k supported for k in 1..=6");
    let cut = suffix_start(spec, d)?;
    Ok((0..cut)
        .map(|g| spec.weights[g] / (1.0 - spec.values[g]).powi(k as i32))
        .sum())
}

/// How to pick the number of excluded top levels.
#[derive(Debug, Clone, Copy)]
pub enum DPolicy {
    Explicit(usize),
    Auto {
        theta_near: f64,
        theta_far: f64,
        d_max: usize,
    },
}

impl Default for DPolicy {
    fn default() -> Self {
        DPolicy::Auto {
            theta_near: 0.1,
            theta_far: 0.1,
            d_max: 32,
        }
    }
}

/// Pick D. The automatic policy returns the smallest group-aligned D >= 1
/// with gap_d <= theta_near * sqrt(epsilon_d) and gap >= theta_far, falling
/// back to the top group's multiplicity capped at 1 when none qualifies.
pub fn detect_quasi_degenerate(spec: &GroupedSpectrum, policy: DPolicy) -> Result<usize> {
    match policy {
        DPolicy::Explicit(d) => {
            suffix_start(spec, d)?;
            Ok(d)
        }
        DPolicy::Auto {
            theta_near,
            theta_far,
            d_max,
        } => {
            let n = spec.n();
            let mut d = 0;
            for g in (0..spec.group_count()).rev() {
                d += spec.multiplicities[g];
                if d > d_max || d >= n {
                    break;
                }
                let epsilon_d: f64 = spec.weights[g..].iter().sum();
                let gap_d = 1.0 - spec.values[g];
                let gap = 1.0 - spec.values[g - 1];
                if gap_d <= theta_near * epsilon_d.sqrt() && gap >= theta_far {
                    return Ok(d);
                }
            }
            Ok(1)
        }
    }
}

/// How the initial state is chosen inside the excluded subspace.
#[derive(Debug, Clone, Copy)]
pub enum InitialStatePolicy {
    /// The eigensolver's top eigenvector (default).
    TopEigenvector,
    /// A Haar-random unit vector in the excluded subspace.
    UniformInD { seed: u64 },
}

/// (epsilon, epsilon_d): the initial state's squared overlap with the marked
/// node and the marked node's total weight in the excluded subspace.
pub fn rotated_overlap(
    spec: &GroupedSpectrum,
    d: usize,
    policy: InitialStatePolicy,
) -> Result<(f64, f64)> {
    let cut = suffix_start(spec, d)?;
    let epsilon_d: f64 = spec.weights[cut..].iter().sum();
    if epsilon_d <= 0.0 {
        return Err(Error::OrthogonalMarkedNode);
    }
    if d == 1 {
        return Ok((epsilon_d, epsilon_d));
    }
    let epsilon = match policy {
        InitialStatePolicy::TopEigenvector => {
            let top_group = spec.group_count() - 1;
            if spec.multiplicities[top_group] == 1 {
                spec.weights[top_group]
            } else if let (Some(basis), Some(marked)) = (&spec.full_basis, spec.marked) {
                basis[(marked, spec.n() - 1)].powi(2)
            } else {
                return Err(Error::InvalidSpectrum(
                    "degenerate top group without an eigenvector basis".into(),
                ));
            }
        }
        InitialStatePolicy::UniformInD { seed } => {
            // The marked node's projection onto the subspace has norm
            // sqrt(epsilon_d); rotation invariance makes epsilon distributed
            // as epsilon_d times the squared first coordinate of a Haar
            // vector, independent of any basis.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gauss: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
            let norm2: f64 = gauss.iter().map(|x| x * x).sum();
            epsilon_d * gauss[0] * gauss[0] / norm2
        }
    };
    Ok((epsilon, epsilon_d))
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Closed-form grouped spectrum of the degree-normalized complete graph K_n
/// for a marked node (vertex-transitive: every weight is 1/n).
pub fn complete_grouped(n: usize) -> Result<GroupedSpectrum> {
    assert!(n >= 2);
    let nf = n as f64;
    GroupedSpectrum::from_grouped(
        vec![-1.0 / (nf - 1.0), 1.0],
        vec![n - 1, 1],
        vec![(nf - 1.0) / nf, 1.0 / nf],
    )
}

/// Closed-form grouped spectrum of the degree-normalized Rook's graph
/// K_{n1} x K_{n2} (vertex-transitive). Handles n1 = n2 (three groups) and
/// n1 = 1 (falls back to K_{n2}).
pub fn rook_grouped(n1: usize, n2: usize) -> Result<GroupedSpectrum> {
    let (n1, n2) = (n1.min(n2), n1.max(n2));
    if n1 == 1 {
        return complete_grouped(n2);
    }
    let n = (n1 * n2) as f64;
    let deg = (n1 + n2 - 2) as f64;
    let lam_min = -2.0 / deg;
    let lam_a = (n1 as f64 - 2.0) / deg;
    let lam_b = (n2 as f64 - 2.0) / deg;
    let m_min = (n1 - 1) * (n2 - 1);
    if n1 == n2 {
        GroupedSpectrum::from_grouped(
            vec![lam_min, lam_a, 1.0],
            vec![m_min, 2 * (n1 - 1), 1],
            vec![m_min as f64 / n, 2.0 * (n1 - 1) as f64 / n, 1.0 / n],
        )
    } else {
        GroupedSpectrum::from_grouped(
            vec![lam_min, lam_a, lam_b, 1.0],
            vec![m_min, n2 - 1, n1 - 1, 1],
            vec![
                m_min as f64 / n,
                (n2 - 1) as f64 / n,
                (n1 - 1) as f64 / n,
                1.0 / n,
            ],
        )
    }
}
