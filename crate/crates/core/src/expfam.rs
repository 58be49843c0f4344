//! Exact Ising/Boltzmann models on small hypergraphs by full state
//! enumeration: log-partition function, moments, and the Fisher information
//! matrix of the edge-coupling parameters.
//!
//! States are enumerated as n-bit integers with bit `i` holding spin `i`
//! (set bit = +1). Enumeration is capped at 20 nodes (2^20 states).

use serde::Serialize;

use crate::hypergraph::{catalog_graph, Hypergraph, TopologyId};
use crate::spectral::{eig_sym, Matrix};
use crate::{Error, Result};

/// Hard enumeration bound: 2^20 states.
pub const MAX_NODES: usize = 20;

/// An exponential-family model p(σ) ∝ exp(Σ_e J_e Π_{i∈e} σ_i + Σ_i h_i σ_i)
/// over spins σ ∈ {−1,+1}^n.
///
/// Per-node field parameters exist but are frozen at zero and excluded from
/// the sufficient statistics unless explicitly enabled; the catalog
/// experiments use edge couplings only.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamilyModel {
    host: Hypergraph,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    fields_enabled: bool,
}

impl ExpFamilyModel {
    /// Edge-coupling model with fields frozen at zero.
    pub fn new(host: Hypergraph, couplings: Vec<f64>) -> Result<Self> {
        let fields = vec![0.0; host.node_count()];
        Self::build(host, couplings, fields, false)
    }

    /// Model with explicit per-node fields; node statistics are appended to
    /// the sufficient-statistic vector.
    pub fn with_fields(host: Hypergraph, couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        Self::build(host, couplings, fields, true)
    }

    /// Catalog model with one uniform coupling on every edge.
    pub fn uniform(id: &TopologyId, j: f64) -> Result<Self> {
        let graph = catalog_graph(id);
        let couplings = vec![j; graph.edge_count()];
        Self::new(graph, couplings)
    }

    fn build(
        host: Hypergraph,
        couplings: Vec<f64>,
        fields: Vec<f64>,
        fields_enabled: bool,
    ) -> Result<Self> {
        if host.node_count() > MAX_NODES {
            return Err(Error::Resource(format!(
                "{} nodes exceeds the enumeration bound of {MAX_NODES}",
                host.node_count()
            )));
        }
        if couplings.len() != host.edge_count() {
            return Err(Error::Dimension(format!(
                "{} couplings for {} edges",
                couplings.len(),
                host.edge_count()
            )));
        }
        if fields.len() != host.node_count() {
            return Err(Error::Dimension(format!(
                "{} fields for {} nodes",
                fields.len(),
                host.node_count()
            )));
        }
        if couplings.iter().chain(fields.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("couplings and fields must be finite".into()));
        }
        Ok(Self { host, couplings, fields, fields_enabled })
    }

    pub fn host(&self) -> &Hypergraph {
        &self.host
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Dimension of the sufficient-statistic vector.
    pub fn stat_dim(&self) -> usize {
        self.host.edge_count()
            + if self.fields_enabled { self.host.node_count() } else { 0 }
    }

    /// Number of enumerated spin states (2^n).
    pub fn state_count(&self) -> usize {
        1usize << self.host.node_count()
    }

    /// Sufficient statistics of one spin state: edge products
    /// s_e = Π_{i∈e} σ_i in edge order, node spins appended only when field
    /// parameters are enabled.
    pub fn sufficient_statistics(&self, state: &[i8]) -> Result<Vec<f64>> {
        if state.len() != self.host.node_count() {
            return Err(Error::Domain(format!(
                "state length {} does not match node count {}",
                state.len(),
                self.host.node_count()
            )));
        }
        if state.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("spin entries must be +1 or -1".into()));
        }
        let mut bits = 0usize;
        for (i, &s) in state.iter().enumerate() {
            if s == 1 {
                bits |= 1 << i;
            }
        }
        let mut out = vec![0.0; self.stat_dim()];
        self.stats_of_bits(bits, &mut out);
        Ok(out)
    }

    /// Statistics of the state encoded as bits (bit i set means σ_i = +1).
    fn stats_of_bits(&self, bits: usize, out: &mut [f64]) {
        for (e, edge) in self.host.edges().iter().enumerate() {
            let negations = edge.iter().filter(|&&i| bits >> i & 1 == 0).count();
            out[e] = if negations % 2 == 0 { 1.0 } else { -1.0 };
        }
        if self.fields_enabled {
            let base = self.host.edge_count();
            for i in 0..self.host.node_count() {
                out[base + i] = if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
            }
        }
    }

    fn energy_of_bits(&self, bits: usize, stats: &mut [f64]) -> f64 {
        self.stats_of_bits(bits, stats);
        let mut e = 0.0;
        for (s, j) in stats[..self.host.edge_count()].iter().zip(&self.couplings) {
            e += s * j;
        }
        for i in 0..self.host.node_count() {
            let spin = if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
            e += self.fields[i] * spin;
        }
        e
    }

    /// ln Σ_σ exp(Σ_e J_e s_e(σ) + Σ_i h_i σ_i), max-shifted for overflow
    /// safety. Enumeration order is fixed, so the result is deterministic.
    pub fn log_partition(&self) -> f64 {
        let mut stats = vec![0.0; self.stat_dim()];
        let mut max_energy = f64::NEG_INFINITY;
        for bits in 0..self.state_count() {
            max_energy = max_energy.max(self.energy_of_bits(bits, &mut stats));
        }
        let mut total = 0.0;
        for bits in 0..self.state_count() {
            total += (self.energy_of_bits(bits, &mut stats) - max_energy).exp();
        }
        max_energy + total.ln()
    }

    /// Fisher information matrix F = Cov_p[s, s] of the sufficient
    /// statistics under the Boltzmann distribution, by exact enumeration.
    pub fn fisher(&self) -> Result<FisherMatrix> {
        let d = self.stat_dim();
        let mut stats = vec![0.0; d];
        let mut max_energy = f64::NEG_INFINITY;
        for bits in 0..self.state_count() {
            max_energy = max_energy.max(self.energy_of_bits(bits, &mut stats));
        }

        let mut weight_sum = 0.0;
        let mut first = vec![0.0; d];
        let mut second = vec![0.0; d * d]; // upper triangle accumulated
        for bits in 0..self.state_count() {
            let w = (self.energy_of_bits(bits, &mut stats) - max_energy).exp();
            weight_sum += w;
            for a in 0..d {
                first[a] += w * stats[a];
                for b in a..d {
                    second[a * d + b] += w * stats[a] * stats[b];
                }
            }
        }

        let mut m = Matrix::zeros(d);
        for a in 0..d {
            let mean_a = first[a] / weight_sum;
            for b in a..d {
                let mean_b = first[b] / weight_sum;
                let cov = second[a * d + b] / weight_sum - mean_a * mean_b;
                m.set(a, b, cov);
                m.set(b, a, cov);
            }
        }
        FisherMatrix::new(m)
    }
}

/// Symmetric positive-semidefinite covariance matrix of sufficient
/// statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherMatrix {
    matrix: Matrix,
}

impl FisherMatrix {
    /// Validates symmetry (1e-12 relative) and positive semidefiniteness
    /// (eigenvalues ≥ −1e-10·trace).
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_symmetric(1e-12) {
            return Err(Error::Domain(format!(
                "Fisher matrix asymmetry {:.3e} exceeds tolerance",
                matrix.asymmetry()
            )));
        }
        let trace: f64 = (0..matrix.dim()).map(|i| matrix.get(i, i)).sum();
        let spectrum = eig_sym(&matrix)?;
        if spectrum.lambda_min() < -1e-10 * trace.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Domain(format!(
                "Fisher matrix is not positive semidefinite: lambda_min = {:.3e}",
                spectrum.lambda_min()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}
