//! Hypergraphs, the 13-topology observer catalog, and observer boundaries.
//!
//! A [`Hypergraph`] is a node set plus a list of hyperedges; an [`Observer`]
//! is a subset of nodes of a host graph. The [`TopologyId`] catalog fixes the
//! 13 small graphs (chains, stars, cycles, complete graphs) used by the
//! verification sweep.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// A node set `{0..node_count-1}` plus an ordered list of hyperedges.
///
/// Each edge is stored as a sorted list of at least two distinct node
/// indices; the edge list contains no duplicate sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    node_count: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Validates and builds a hypergraph. Edge members are sorted on entry;
    /// the edge list order is preserved.
    pub fn new(node_count: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Domain("node_count must be positive".into()));
        }
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut canonical = Vec::with_capacity(edges.len());
        for edge in edges {
            let members: BTreeSet<usize> = edge.iter().copied().collect();
            if members.len() < 2 {
                return Err(Error::Domain(format!(
                    "edge {edge:?} must contain at least two distinct nodes"
                )));
            }
            if members.len() != edge.len() {
                return Err(Error::Domain(format!("edge {edge:?} repeats a node")));
            }
            if let Some(&bad) = members.iter().find(|&&i| i >= node_count) {
                return Err(Error::Domain(format!(
                    "edge {edge:?} references node {bad} >= node_count {node_count}"
                )));
            }
            let sorted: Vec<usize> = members.into_iter().collect();
            if !seen.insert(sorted.clone()) {
                return Err(Error::Domain(format!("duplicate edge {sorted:?}")));
            }
            canonical.push(sorted);
        }
        Ok(Self { node_count, edges: canonical })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in construction order, each sorted ascending.
    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }
}

/// A subset of the nodes of a host hypergraph (its "interior").
///
/// Empty and full interiors are both legal; their boundaries are empty.
#[derive(Debug, Clone)]
pub struct Observer<'g> {
    host: &'g Hypergraph,
    interior: BTreeSet<usize>,
}

impl<'g> Observer<'g> {
    pub fn new(host: &'g Hypergraph, interior: impl IntoIterator<Item = usize>) -> Result<Self> {
        let interior: BTreeSet<usize> = interior.into_iter().collect();
        if let Some(&bad) = interior.iter().find(|&&i| i >= host.node_count()) {
            return Err(Error::Domain(format!(
                "interior node {bad} >= node_count {}",
                host.node_count()
            )));
        }
        Ok(Self { host, interior })
    }

    pub fn host(&self) -> &'g Hypergraph {
        self.host
    }

    pub fn interior(&self) -> &BTreeSet<usize> {
        &self.interior
    }

    /// The observer on the same host whose interior is the complement.
    pub fn complement(&self) -> Observer<'g> {
        let interior = (0..self.host.node_count())
            .filter(|i| !self.interior.contains(i))
            .collect();
        Observer { host: self.host, interior }
    }
}

/// Edges crossing between the observer's interior and exterior, in host
/// edge order.
pub fn boundary(observer: &Observer<'_>) -> Vec<Vec<usize>> {
    observer
        .host()
        .edges()
        .iter()
        .filter(|edge| {
            let inside = edge.iter().filter(|n| observer.interior.contains(n)).count();
            inside > 0 && inside < edge.len()
        })
        .cloned()
        .collect()
}

/// Prediction error in nats for an event of probability `prob`.
pub fn surprise(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(Error::Domain(format!("probability {prob} outside (0, 1]")));
    }
    Ok(-prob.ln())
}

/// Long-run average of a surprise series (arithmetic mean).
pub fn persistence_score(surprise_series: &[f64]) -> Result<f64> {
    if surprise_series.is_empty() {
        return Err(Error::Domain("empty surprise series".into()));
    }
    if let Some(&bad) = surprise_series.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Domain(format!("surprise value {bad} is not a non-negative real")));
    }
    Ok(surprise_series.iter().sum::<f64>() / surprise_series.len() as f64)
}

/// Topology families available in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Chain,
    Star,
    Cycle,
    Complete,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::Chain => 'P',
            Family::Star => 'S',
            Family::Cycle => 'C',
            Family::Complete => 'K',
        }
    }

    fn size_range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Family::Chain => 3..=6,
            Family::Star => 4..=6,
            Family::Cycle => 4..=6,
            Family::Complete => 3..=5,
        }
    }
}

/// One of the 13 catalog topologies: P3–P6, S4–S6, C4–C6, K3–K5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TopologyId {
    family: Family,
    size: usize,
}

impl TopologyId {
    pub fn new(family: Family, size: usize) -> Result<Self> {
        if !family.size_range().contains(&size) {
            return Err(Error::UnknownTopology(format!(
                "{}{size} is not in the catalog",
                family.letter()
            )));
        }
        Ok(Self { family, size })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// All 13 catalog entries in canonical order: chains, stars, cycles,
    /// complete graphs, each ascending in size.
    pub fn catalog() -> Vec<TopologyId> {
        let families = [Family::Chain, Family::Star, Family::Cycle, Family::Complete];
        families
            .iter()
            .flat_map(|&family| {
                family.size_range().map(move |size| TopologyId { family, size })
            })
            .collect()
    }
}

impl fmt::Display for TopologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.size)
    }
}

impl FromStr for TopologyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::UnknownTopology(s.to_string());
        let mut chars = s.chars();
        let family = match chars.next().ok_or_else(err)? {
            'P' => Family::Chain,
            'S' => Family::Star,
            'C' => Family::Cycle,
            'K' => Family::Complete,
            _ => return Err(err()),
        };
        let size: usize = chars.as_str().parse().map_err(|_| err())?;
        TopologyId::new(family, size).map_err(|_| err())
    }
}

/// Builds the concrete graph for a catalog entry with lexicographically
/// ordered edges.
pub fn catalog_graph(id: &TopologyId) -> Hypergraph {
    let n = id.size;
    let mut edges: Vec<Vec<usize>> = match id.family {
        Family::Chain => (0..n - 1).map(|i| vec![i, i + 1]).collect(),
        Family::Star => (1..n).map(|i| vec![0, i]).collect(),
        Family::Cycle => {
            let mut es: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
            es.push(vec![0, n - 1]);
            es
        }
        Family::Complete => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| vec![i, j]))
            .collect(),
    };
    edges.sort();
    // Catalog sizes and edge arities always validate.
    Hypergraph::new(n, edges).expect("catalog graphs are valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[&[usize]], n: usize) -> Hypergraph {
        Hypergraph::new(n, edges.iter().map(|e| e.to_vec()).collect()).unwrap()
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(Hypergraph::new(0, vec![]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![1, 1]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::new(3, vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn boundary_of_trivial_interiors_is_empty() {
        let g = graph(&[&[0, 1], &[1, 2]], 3);
        let empty = Observer::new(&g, []).unwrap();
        let full = Observer::new(&g, 0..3).unwrap();
        assert!(boundary(&empty).is_empty());
        assert!(boundary(&full).is_empty());
    }

    #[test]
    fn boundary_extracts_crossing_edges() {
        let g = graph(&[&[0, 1], &[1, 2]], 3);
        let o = Observer::new(&g, [0, 1]).unwrap();
        assert_eq!(boundary(&o), vec![vec![1, 2]]);
    }

    #[test]
    fn boundary_is_symmetric_under_complement() {
        let g = graph(&[&[0, 1], &[1, 2], &[0, 2, 3]], 4);
        for bits in 0..16usize {
            let interior = (0..4).filter(|i| bits >> i & 1 == 1);
            let o = Observer::new(&g, interior).unwrap();
            let mut direct = boundary(&o);
            let mut complement = boundary(&o.complement());
            direct.sort();
            complement.sort();
            assert_eq!(direct, complement);
        }
    }

    #[test]
    fn surprise_matches_log_rules() {
        assert_eq!(surprise(1.0).unwrap(), 0.0);
        assert!((surprise((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        assert!((surprise(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(surprise(0.0).is_err());
        assert!(surprise(1.5).is_err());
        assert!(surprise(f64::NAN).is_err());
    }

    #[test]
    fn persistence_score_is_the_mean() {
        assert_eq!(persistence_score(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(persistence_score(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert!((persistence_score(&[0.25, 0.75]).unwrap() - 0.5).abs() < 1e-12);
        assert!(persistence_score(&[]).is_err());
        assert!(persistence_score(&[-0.1]).is_err());
    }

    #[test]
    fn catalog_has_13_entries_with_expected_edge_counts() {
        let catalog = TopologyId::catalog();
        assert_eq!(catalog.len(), 13);
        for id in &catalog {
            let g = catalog_graph(id);
            let n = id.size();
            let expected = match id.family() {
                Family::Chain | Family::Star => n - 1,
                Family::Cycle => n,
                Family::Complete => n * (n - 1) / 2,
            };
            assert_eq!(g.node_count(), n, "{id}");
            assert_eq!(g.edge_count(), expected, "{id}");
        }
    }

    #[test]
    fn catalog_graphs_match_definitions() {
        let k3 = catalog_graph(&"K3".parse().unwrap());
        assert_eq!(k3.edges(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        let p3 = catalog_graph(&"P3".parse().unwrap());
        assert_eq!(p3.edges(), &[vec![0, 1], vec![1, 2]]);
        let s4 = catalog_graph(&"S4".parse().unwrap());
        assert_eq!(s4.edges(), &[vec![0, 1], vec![0, 2], vec![0, 3]]);
        let c4 = catalog_graph(&"C4".parse().unwrap());
        assert_eq!(c4.edges(), &[vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn topology_ids_round_trip_through_strings() {
        for id in TopologyId::catalog() {
            let s = id.to_string();
            let parsed: TopologyId = s.parse().unwrap();
            assert_eq!(parsed, id);
        }
        assert!("P2".parse::<TopologyId>().is_err());
        assert!("K6".parse::<TopologyId>().is_err());
        assert!("X4".parse::<TopologyId>().is_err());
        assert!("".parse::<TopologyId>().is_err());
    }

    #[test]
    fn adding_an_edge_never_removes_boundary_edges() {
        let g = graph(&[&[0, 1], &[1, 2]], 4);
        let o = Observer::new(&g, [0, 1]).unwrap();
        let before = boundary(&o);
        let g2 = graph(&[&[0, 1], &[1, 2], &[2, 3]], 4);
        let o2 = Observer::new(&g2, [0, 1]).unwrap();
        let after = boundary(&o2);
        for edge in &before {
            assert!(after.contains(edge));
        }
    }
}
