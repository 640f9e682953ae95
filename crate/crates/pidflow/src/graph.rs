//! Undirected weighted graphs, Laplacians, and spectral data.
//!
//! The dynamics and the gain-condition checker consume a [`LaplacianBundle`]:
//! the Laplacian `L`, its extreme eigenvalues, the centering projector
//! `Π = I − (1/N)·11ᵀ`, and a symmetric positive-definite matrix `Γ`
//! satisfying `LΓ = ΓL = Π`. `Γ` is realized as the Moore–Penrose
//! pseudoinverse of `L` plus `(1/N)·11ᵀ`; the rank-one term acts on the
//! nullspace of `L` and makes the result positive definite.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues at or below this threshold are treated as the Laplacian's
/// zero mode; the same threshold decides connectivity via the Fiedler value.
const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// One undirected weighted edge, stored with `i < j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected connected graph on `n_agents` vertices.
///
/// Constructors reject self-loops, non-positive weights, and disconnected
/// topologies, so every `Graph` value admits a valid [`LaplacianBundle`].
#[derive(Debug, Clone)]
pub struct Graph {
    n_agents: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Cycle graph on `n` vertices with unit weights. Requires `n >= 3`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidTopology(format!(
                "ring requires at least 3 vertices, got {n}"
            )));
        }
        let edges = (0..n)
            .map(|k| Edge {
                i: k.min((k + 1) % n),
                j: k.max((k + 1) % n),
                weight: 1.0,
            })
            .collect();
        Ok(Self { n_agents: n, edges })
    }

    /// Builds a graph from 1-based weighted vertex pairs.
    ///
    /// Duplicate pairs (in either orientation) collapse to the last weight
    /// given. A single vertex with no edges is accepted as trivially
    /// connected.
    pub fn from_edges(n_agents: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidTopology(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut dedup = std::collections::BTreeMap::new();
        for &(a, b, w) in edges {
            if a == 0 || b == 0 || a > n_agents || b > n_agents {
                return Err(Error::InvalidEdge(format!(
                    "endpoint out of range in ({a}, {b}): vertices are 1..={n_agents}"
                )));
            }
            if a == b {
                return Err(Error::InvalidEdge(format!("self-loop at vertex {a}")));
            }
            if !(w > 0.0) {
                return Err(Error::InvalidEdge(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            dedup.insert((a.min(b) - 1, a.max(b) - 1), w);
        }
        let graph = Self {
            n_agents,
            edges: dedup
                .into_iter()
                .map(|((i, j), weight)| Edge { i, j, weight })
                .collect(),
        };
        graph.check_connected()?;
        Ok(graph)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Dense Laplacian `L = D − A` (degree minus adjacency).
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n_agents;
        let mut l = DMatrix::zeros(n, n);
        for e in &self.edges {
            l[(e.i, e.j)] -= e.weight;
            l[(e.j, e.i)] -= e.weight;
            l[(e.i, e.i)] += e.weight;
            l[(e.j, e.j)] += e.weight;
        }
        l
    }

    fn check_connected(&self) -> Result<()> {
        if self.n_agents == 1 {
            return Ok(());
        }
        let eigs = sorted_eigenvalues(&self.laplacian());
        if eigs[1] <= ZERO_EIGENVALUE_TOL {
            return Err(Error::NotConnected(format!(
                "Fiedler value {:.3e} is not positive",
                eigs[1]
            )));
        }
        Ok(())
    }

    /// Assembles the Laplacian together with its spectral companions.
    pub fn laplacian_bundle(&self) -> Result<LaplacianBundle> {
        LaplacianBundle::assemble(self)
    }
}

/// Laplacian plus the spectral quantities used by the dynamics, the
/// Lyapunov diagnostics, and the gain-condition checker.
#[derive(Debug, Clone)]
pub struct LaplacianBundle {
    /// Laplacian `L`.
    pub l: DMatrix<f64>,
    /// Largest eigenvalue of `L`.
    pub lambda_max_l: f64,
    /// Largest eigenvalue of `LᵀL`, computed from `LᵀL` itself.
    pub lambda_max_ltl: f64,
    /// Second-smallest eigenvalue of `L` (`+∞` for a single vertex).
    pub fiedler: f64,
    /// Positive-definite `Γ` with `LΓ = ΓL = Π`.
    pub gamma: DMatrix<f64>,
    /// Centering projector `Π = I − (1/N)·11ᵀ`.
    pub pi: DMatrix<f64>,
}

impl LaplacianBundle {
    fn assemble(graph: &Graph) -> Result<Self> {
        let n = graph.n_agents();
        let l = graph.laplacian();

        let eigen = SymmetricEigen::new(l.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));

        let min_eig = eigen.eigenvalues[order[0]];
        let lambda_max_l = eigen.eigenvalues[order[n - 1]];
        let fiedler = if n >= 2 {
            eigen.eigenvalues[order[1]]
        } else {
            f64::INFINITY
        };
        if n >= 2 && fiedler <= ZERO_EIGENVALUE_TOL {
            return Err(Error::NotConnected(format!(
                "Fiedler value {fiedler:.3e} is not positive"
            )));
        }

        // Pseudoinverse from the eigendecomposition: invert every eigenvalue
        // above the zero-mode threshold.
        let mut pinv = DMatrix::zeros(n, n);
        for &k in &order {
            let lam = eigen.eigenvalues[k];
            if lam > ZERO_EIGENVALUE_TOL {
                let v = eigen.eigenvectors.column(k);
                pinv += v * v.transpose() / lam;
            }
        }

        let ones_over_n = DMatrix::from_element(n, n, 1.0 / n as f64);
        let gamma = &pinv + &ones_over_n;
        let pi = DMatrix::identity(n, n) - &ones_over_n;

        let ltl = &l * &l;
        let lambda_max_ltl = sorted_eigenvalues(&ltl)[n - 1];

        let bundle = Self {
            l,
            lambda_max_l,
            lambda_max_ltl,
            fiedler,
            gamma,
            pi,
        };
        bundle.validate(min_eig)?;
        Ok(bundle)
    }

    pub fn n_agents(&self) -> usize {
        self.l.nrows()
    }

    fn validate(&self, min_eig: f64) -> Result<()> {
        let n = self.n_agents();
        let ones = DVector::from_element(n, 1.0);

        let nullspace = (&self.l * &ones).amax();
        if nullspace > 1e-12 {
            return Err(Error::Numerical(format!(
                "Laplacian does not annihilate the all-ones vector: |L·1|∞ = {nullspace:.3e}"
            )));
        }
        if min_eig < -1e-10 {
            return Err(Error::Numerical(format!(
                "Laplacian has negative eigenvalue {min_eig:.3e}"
            )));
        }

        let lg = (&self.l * &self.gamma - &self.pi).norm();
        let gl = (&self.gamma * &self.l - &self.pi).norm();
        if lg > 1e-10 || gl > 1e-10 {
            return Err(Error::Numerical(format!(
                "companion identity violated: |LΓ−Π|F = {lg:.3e}, |ΓL−Π|F = {gl:.3e}"
            )));
        }

        let gamma_min = sorted_eigenvalues(&self.gamma)[0];
        if gamma_min <= 0.0 {
            return Err(Error::Numerical(format!(
                "Γ is not positive definite (min eigenvalue {gamma_min:.3e})"
            )));
        }

        let pl = (&self.pi * &self.l - &self.l).norm();
        if pl > 1e-10 {
            return Err(Error::Numerical(format!(
                "|ΠL − L|F = {pl:.3e} exceeds tolerance"
            )));
        }
        // Π's spectrum is {0, 1, …, 1}; for a single vertex it is the zero
        // matrix and the radius check does not apply.
        if n >= 2 {
            let pi_eigs = sorted_eigenvalues(&self.pi);
            let radius = pi_eigs[n - 1].abs().max(pi_eigs[0].abs());
            if (radius - 1.0).abs() > 1e-10 {
                return Err(Error::Numerical(format!(
                    "spectral radius of Π is {radius} instead of 1"
                )));
            }
        }

        let sq = self.lambda_max_l * self.lambda_max_l;
        if (self.lambda_max_ltl - sq).abs() > 1e-8 * sq.max(1.0) {
            return Err(Error::Numerical(format!(
                "λmax(LᵀL) = {} differs from λmax(L)² = {}",
                self.lambda_max_ltl, sq
            )));
        }
        Ok(())
    }
}

/// Applies `(M ⊗ I_dim)` to a stacked vector without materializing the
/// Kronecker product: output block `i` is `Σ_j M_ij · x_j`.
pub fn kron_apply(m: &DMatrix<f64>, dim: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!(
            "kron_apply needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if x.len() != n * dim {
        return Err(Error::Shape(format!(
            "stacked vector has length {}, expected {} blocks of {}",
            x.len(),
            n,
            dim
        )));
    }
    let mut out = DVector::zeros(n * dim);
    for i in 0..n {
        for j in 0..n {
            let w = m[(i, j)];
            if w != 0.0 {
                let src = x.rows(j * dim, dim);
                let mut dst = out.rows_mut(i * dim, dim);
                dst.axpy(w, &src, 1.0);
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub(crate) fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut eigs: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}
