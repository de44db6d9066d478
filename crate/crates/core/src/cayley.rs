//! Cayley multigraphs `G_i` of `K_i` for the generators `v0^{±1}, v1^{±1}`,
//! the covering tower `G_i -> G_{i-1}`, and its refinement into 2-fold
//! covers.
//!
//! Degree is 4 at every vertex. A vertex `u` has one dart per generator to
//! `u * s`; the adjacency multiplicity `A(u, v)` counts darts, so a pair of
//! involution darts gives a double edge and a fixed point `u * s = u` (only
//! at level 0) gives one loop of degree 2 for `s, s^{-1}` together.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf2::{SBlock, Subspace27};
use crate::quotient::{QuotientError, QuotientGroup};

pub const DEGREE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CayleyError {
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error("the tower cannot be refined below level 1")]
    LevelZero,
    #[error("levels {upper} and {lower} are not consecutive")]
    NotConsecutive { upper: usize, lower: usize },
    #[error("unknown export format {0:?}")]
    UnknownFormat(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    // darts[4u + s] = u * s for s in (v0, v0^-1, v1, v1^-1)
    darts: Vec<u32>,
    // per vertex, sorted (neighbour, multiplicity)
    adjacency: Vec<Vec<(u32, u32)>>,
}

fn merge(darts: &[u32]) -> Vec<(u32, u32)> {
    let mut d: Vec<u32> = darts.to_vec();
    d.sort_unstable();
    let mut out: Vec<(u32, u32)> = Vec::with_capacity(DEGREE);
    for v in d {
        match out.last_mut() {
            Some((w, m)) if *w == v => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

impl Multigraph {
    pub fn from_darts(n: usize, darts: Vec<u32>) -> Multigraph {
        assert_eq!(darts.len(), DEGREE * n);
        let adjacency = darts.par_chunks(DEGREE).map(merge).collect();
        Multigraph {
            n,
            darts,
            adjacency,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn darts(&self) -> &[u32] {
        &self.darts
    }

    /// Neighbours of `u` in generator order `v0, v0^-1, v1, v1^-1`.
    pub fn neighbours(&self, u: u32) -> &[u32] {
        let u = u as usize;
        &self.darts[DEGREE * u..DEGREE * (u + 1)]
    }

    pub fn adjacency(&self, u: u32) -> &[(u32, u32)] {
        &self.adjacency[u as usize]
    }

    pub fn multiplicity(&self, u: u32, v: u32) -> u32 {
        let row = &self.adjacency[u as usize];
        row.binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self, u: u32) -> u32 {
        self.adjacency(u).iter().map(|&(_, m)| m).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n as u32).into_par_iter().all(|u| {
            self.adjacency(u)
                .iter()
                .all(|&(v, m)| self.multiplicity(v, u) == m)
        })
    }

    /// Loops, each contributing 2 to the degree.
    pub fn loop_count(&self) -> u64 {
        (0..self.n as u32)
            .map(|u| u64::from(self.multiplicity(u, u)) / 2)
            .sum()
    }

    /// `trace(A^2) = sum_{u, v} A(u, v)^2`.
    pub fn closed_two_walks(&self) -> u64 {
        self.adjacency
            .iter()
            .flat_map(|row| row.iter().map(|&(_, m)| u64::from(m) * u64::from(m)))
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbours(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// A proper 2-colouring, or `None` if some cycle (or loop) is odd.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let mut colour = vec![u8::MAX; self.n];
        for start in 0..self.n {
            if colour[start] != u8::MAX {
                continue;
            }
            colour[start] = 0;
            let mut queue = std::collections::VecDeque::from([start as u32]);
            while let Some(u) = queue.pop_front() {
                let c = colour[u as usize];
                for &v in self.neighbours(u) {
                    let cv = &mut colour[v as usize];
                    if *cv == u8::MAX {
                        *cv = 1 - c;
                        queue.push_back(v);
                    } else if *cv == c {
                        return None;
                    }
                }
            }
        }
        Some(colour)
    }

    /// Undirected edge records `(u, v, multiplicity)` with `u <= v`, sorted;
    /// for `u == v` the multiplicity is the number of loops.
    pub fn edge_records(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n as u32 {
            for &(v, m) in self.adjacency(u) {
                if u < v {
                    out.push((u, v, m));
                } else if u == v {
                    out.push((u, u, m / 2));
                }
            }
        }
        out
    }

    /// Number of undirected edges counting multiplicity; `2n` for degree 4.
    pub fn edge_count(&self) -> u64 {
        self.edge_records()
            .iter()
            .map(|&(_, _, m)| u64::from(m))
            .sum()
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n");
        for u in 0..self.n {
            let _ = writeln!(s, "  {u};");
        }
        for (u, v, m) in self.edge_records() {
            for _ in 0..m {
                let _ = writeln!(s, "  {u} -- {v};");
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v, m) in self.edge_records() {
            let _ = writeln!(s, "{u} {v} {m}");
        }
        s
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            vertices: self.n,
            edges: self.edge_count(),
            edge_records: self.edge_records().len(),
            loops: self.loop_count(),
            regular_degree: (0..self.n as u32)
                .all(|u| self.degree(u) == DEGREE as u32)
                .then_some(DEGREE),
            connected: self.is_connected(),
            bipartite: self.bipartition().is_some(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: u64,
    pub edge_records: usize,
    pub loops: u64,
    pub regular_degree: Option<usize>,
    pub connected: bool,
    pub bipartite: bool,
}

pub fn build_cayley(q: &QuotientGroup) -> Multigraph {
    let gens = q.generator_ordinals();
    let darts: Vec<u32> = (0..q.order() as u32)
        .into_par_iter()
        .flat_map_iter(|u| gens.map(|s| q.mul(u, s)))
        .collect();
    Multigraph::from_darts(q.order(), darts)
}

/// Exports a graph as `dot`, `edges` or `json`.
pub fn export(g: &Multigraph, level: usize, format: &str) -> Result<String, CayleyError> {
    match format {
        "dot" => Ok(g.to_dot(&format!("G{level}"))),
        "edges" => Ok(g.to_edge_list()),
        "json" => {
            #[derive(Serialize)]
            struct Export {
                level: usize,
                summary: GraphSummary,
                edges: Vec<(u32, u32, u32)>,
            }
            let e = Export {
                level,
                summary: g.summary(),
                edges: g.edge_records(),
            };
            Ok(serde_json::to_string_pretty(&e).expect("serializable") + "\n")
        }
        other => Err(CayleyError::UnknownFormat(other.to_string())),
    }
}

/// Whether `map` sends the neighbour multiset of every vertex of `upper`
/// onto the neighbour multiset of its image in `lower`.
pub fn is_covering_map(upper: &Multigraph, lower: &Multigraph, map: &[u32]) -> bool {
    map.len() == upper.n()
        && (0..upper.n() as u32).into_par_iter().all(|u| {
            let mut a: Vec<u32> = upper
                .neighbours(u)
                .iter()
                .map(|&v| map[v as usize])
                .collect();
            let mut b: Vec<u32> = lower.neighbours(map[u as usize]).to_vec();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        })
}

/// Whether every fibre of `map` onto `lower_n` vertices has size `index`.
pub fn fibres_have_size(map: &[u32], lower_n: usize, index: usize) -> bool {
    let mut counts = vec![0usize; lower_n];
    for &m in map {
        match counts.get_mut(m as usize) {
            Some(c) => *c += 1,
            None => return false,
        }
    }
    counts.iter().all(|&c| c == index)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerLevel {
    pub level: usize,
    pub order: usize,
    /// `|K_i| / |K_{i-1}|`; 1 at level 0.
    pub covering_index: usize,
    /// Truncation to the previous level is a covering map of the graphs.
    pub covers_previous: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerReport {
    pub levels: Vec<TowerLevel>,
}

impl TowerReport {
    pub fn indices(&self) -> Vec<usize> {
        self.levels.iter().skip(1).map(|l| l.covering_index).collect()
    }
}

/// Covering indices for consecutive enumerated levels `0, 1, ..., m`.
pub fn covering_indices(groups: &[QuotientGroup]) -> Result<TowerReport, CayleyError> {
    let graphs: Vec<Multigraph> = groups.iter().map(build_cayley).collect();
    covering_indices_with(groups, &graphs)
}

pub fn covering_indices_with(
    groups: &[QuotientGroup],
    graphs: &[Multigraph],
) -> Result<TowerReport, CayleyError> {
    let mut levels = Vec::with_capacity(groups.len());
    for (t, q) in groups.iter().enumerate() {
        if t == 0 {
            levels.push(TowerLevel {
                level: q.level(),
                order: q.order(),
                covering_index: 1,
                covers_previous: true,
            });
            continue;
        }
        let p = &groups[t - 1];
        if p.level() + 1 != q.level() {
            return Err(CayleyError::NotConsecutive {
                upper: q.level(),
                lower: p.level(),
            });
        }
        let map = q.truncation_hom(p)?;
        levels.push(TowerLevel {
            level: q.level(),
            order: q.order(),
            covering_index: q.order() / p.order(),
            covers_previous: is_covering_map(&graphs[t], &graphs[t - 1], &map),
        });
    }
    Ok(TowerReport { levels })
}

/// The covers between `G_{i-1}` and `G_i` obtained from a chain of
/// hyperplanes in the central kernel of `K_i -> K_{i-1}`.
#[derive(Clone, Debug)]
pub struct RefinedStep {
    pub level: usize,
    pub covering_index: usize,
    /// `G_i`, the intermediate graphs, `G_{i-1}`; each covers the next.
    pub chain: Vec<Multigraph>,
    /// `maps[t]` sends vertices of `chain[t]` to `chain[t + 1]`.
    pub maps: Vec<Vec<u32>>,
    pub kernel_basis: Vec<SBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefinedStepReport {
    pub level: usize,
    pub covering_index: usize,
    pub intermediate_orders: Vec<usize>,
    pub all_two_fold_covers: bool,
    pub all_regular: bool,
    pub composition_is_truncation: bool,
}

impl RefinedStep {
    pub fn intermediates(&self) -> &[Multigraph] {
        &self.chain[1..self.chain.len() - 1]
    }

    pub fn report(&self, truncation: &[u32]) -> RefinedStepReport {
        let two_fold = self.maps.iter().enumerate().all(|(t, m)| {
            is_covering_map(&self.chain[t], &self.chain[t + 1], m)
                && fibres_have_size(m, self.chain[t + 1].n(), 2)
        });
        let regular = self
            .chain
            .iter()
            .all(|g| (0..g.n() as u32).all(|u| g.degree(u) == DEGREE as u32));
        let mut composed: Vec<u32> = (0..self.chain[0].n() as u32).collect();
        for m in &self.maps {
            for c in composed.iter_mut() {
                *c = m[*c as usize];
            }
        }
        RefinedStepReport {
            level: self.level,
            covering_index: self.covering_index,
            intermediate_orders: self.intermediates().iter().map(|g| g.n()).collect(),
            all_two_fold_covers: two_fold,
            all_regular: regular,
            composition_is_truncation: composed == truncation,
        }
    }
}

/// Refines `G_i -> G_{i-1}`. The kernel `V` consists of elements
/// `M_{i-1}(z)`, determined by `z` in the last diagonal; with the echelon
/// basis `e_1 > ... > e_d` of these `z`, set `Z_t = span(e_{t+1}, ..., e_d)`
/// and take the quotients `K_i / Z_t` for `t = d-1, ..., 1`.
pub fn refine_tower(upper: &QuotientGroup, lower: &QuotientGroup) -> Result<RefinedStep, CayleyError> {
    let i = upper.level();
    if i == 0 {
        return Err(CayleyError::LevelZero);
    }
    if lower.level() + 1 != i {
        return Err(CayleyError::NotConsecutive {
            upper: i,
            lower: lower.level(),
        });
    }
    let truncation = upper.truncation_hom(lower)?;
    let kernel = upper.kernel_range(i - 1)?;
    let mut v = Subspace27::zero();
    for n in kernel {
        v.insert(upper.element(n)[i - 1]);
    }
    let basis: Vec<SBlock> = v.basis().to_vec();
    let d = basis.len();
    let g_upper = build_cayley(upper);
    let g_lower = build_cayley(lower);

    let mut chain = vec![g_upper.clone()];
    // labels of the current top graph for each vertex of K_i
    let mut labels_prev: Vec<u32> = (0..upper.order() as u32).collect();
    let mut maps = Vec::new();
    for t in (1..d).rev() {
        let z = crate::gf2::span(basis[t..].iter().copied());
        let keys: Vec<(Vec<u32>, u32)> = (0..upper.order() as u32)
            .into_par_iter()
            .map(|n| {
                let x = upper.element(n);
                let prefix: Vec<u32> = x[..i - 1].iter().map(|b| b.bits()).collect();
                (prefix, z.reduce(x[i - 1]).bits())
            })
            .collect();
        let mut index: BTreeMap<&(Vec<u32>, u32), u32> = BTreeMap::new();
        for k in &keys {
            index.insert(k, 0);
        }
        for (n, slot) in index.values_mut().enumerate() {
            *slot = n as u32;
        }
        let label: Vec<u32> = keys.iter().map(|k| index[k]).collect();
        let m = index.len();
        let mut darts = vec![0u32; DEGREE * m];
        for (n, &l) in label.iter().enumerate() {
            for (s, &w) in g_upper.neighbours(n as u32).iter().enumerate() {
                darts[DEGREE * l as usize + s] = label[w as usize];
            }
        }
        let graph = Multigraph::from_darts(m, darts);
        let mut map = vec![0u32; chain.last().unwrap().n()];
        for (n, &l) in label.iter().enumerate() {
            map[labels_prev[n] as usize] = l;
        }
        maps.push(map);
        chain.push(graph);
        labels_prev = label;
    }
    let mut map = vec![0u32; chain.last().unwrap().n()];
    for (n, &l) in labels_prev.iter().enumerate() {
        map[l as usize] = truncation[n];
    }
    maps.push(map);
    chain.push(g_lower);
    Ok(RefinedStep {
        level: i,
        covering_index: upper.order() / lower.order(),
        chain,
        maps,
        kernel_basis: basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(level: usize) -> (QuotientGroup, Multigraph) {
        let q = QuotientGroup::enumerate(level).unwrap();
        let g = build_cayley(&q);
        (q, g)
    }

    #[test]
    fn level_zero_is_a_bouquet() {
        let (_, g) = graph(0);
        assert_eq!(g.n(), 1);
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.edge_records(), vec![(0, 0, 2)]);
        assert_eq!(g.loop_count(), 2);
        assert!(g.bipartition().is_none());
    }

    #[test]
    fn level_one_has_double_edges() {
        let (_, g) = graph(1);
        assert_eq!(g.n(), 4);
        let rec = g.edge_records();
        assert_eq!(rec.len(), 4);
        assert!(rec.iter().all(|&(u, v, m)| u != v && m == 2));
        assert!(g.bipartition().is_some());
    }

    #[test]
    fn level_two_is_simple_and_regular() {
        let (_, g) = graph(2);
        assert_eq!(g.edge_records().len(), 64);
        assert_eq!(g.edge_count(), 64);
        assert!(g.is_symmetric());
        assert!(g.is_connected());
        assert!(g.bipartition().is_some());
    }

    #[test]
    fn tower_to_level_four() {
        let qs: Vec<QuotientGroup> = (0..=4).map(|l| QuotientGroup::enumerate(l).unwrap()).collect();
        let t = covering_indices(&qs).unwrap();
        assert_eq!(t.indices(), vec![4, 8, 4, 8]);
        assert!(t.levels.iter().all(|l| l.covers_previous));
    }

    #[test]
    fn refinement_between_one_and_two() {
        let (a, b) = (
            QuotientGroup::enumerate(2).unwrap(),
            QuotientGroup::enumerate(1).unwrap(),
        );
        let step = refine_tower(&a, &b).unwrap();
        let rep = step.report(&a.truncation_hom(&b).unwrap());
        assert_eq!(rep.intermediate_orders, vec![16, 8]);
        assert!(rep.all_two_fold_covers && rep.all_regular && rep.composition_is_truncation);
    }

    #[test]
    fn export_formats() {
        let (_, g) = graph(1);
        let dot = export(&g, 1, "dot").unwrap();
        assert_eq!(dot.matches("--").count(), 8);
        assert!(export(&g, 1, "svg").is_err());
        assert_eq!(export(&g, 1, "edges").unwrap().lines().count(), 4);
    }
}
