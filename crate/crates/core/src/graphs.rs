//! Instance generators for every benchmark family.
//!
//! All generators are pure functions of `(family, n, seed)`: the same triple
//! always yields a bit-identical [`ProblemInstance`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::seed::{self, Rng};
use crate::{Error, ProblemInstance, Result, Sense, Source};

/// The benchmark families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    /// Complete graph with `±1` couplings of equal probability.
    Sk,
    /// Random 3-regular graph, unit weights.
    Reg3,
    /// Ring lattice with `k = 4` nearest neighbors, each edge rewired with
    /// probability 1/2, then uniform `[0, 1)` weights.
    Nws,
    /// Barabási–Albert growth from a star, standard-normal weights.
    Ba,
    Ring,
    /// Ring plus next-nearest-neighbor edges.
    RingNnn,
    /// Periodic honeycomb lattice with `L × L` two-site unit cells (`n = 2L²`).
    HoneycombPeriodic,
    /// Finite Cayley tree: every non-leaf vertex has `degree` neighbors,
    /// leaves sit at distance `depth` from the root.
    BetheFinite { degree: usize, depth: usize },
    /// Random geometric graph in the unit square with radius `sqrt(rho / n)`.
    Geometric { rho: f64 },
    /// Complete graph, unit weights.
    Complete,
}

impl GraphFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::Sk => "SK",
            GraphFamily::Reg3 => "REG3",
            GraphFamily::Nws => "NWS",
            GraphFamily::Ba => "BA",
            GraphFamily::Ring => "RING",
            GraphFamily::RingNnn => "RING_NNN",
            GraphFamily::HoneycombPeriodic => "HONEYCOMB",
            GraphFamily::BetheFinite { .. } => "BETHE",
            GraphFamily::Geometric { .. } => "GEOMETRIC",
            GraphFamily::Complete => "COMPLETE",
        }
    }

    /// Whether every nonzero weight is exactly 1.
    pub fn unit_weight(&self) -> bool {
        !matches!(self, GraphFamily::Sk | GraphFamily::Nws | GraphFamily::Ba)
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::BetheFinite { degree, depth } => write!(f, "BETHE({degree},{depth})"),
            GraphFamily::Geometric { rho } => write!(f, "GEOMETRIC({rho})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    /// Accepts the [`Display`](fmt::Display) forms, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let upper: String = s.trim().chars().map(|c| c.to_ascii_uppercase()).collect();
        let (head, args) = match upper.find('(') {
            Some(open) if upper.ends_with(')') => (&upper[..open], Some(&upper[open + 1..upper.len() - 1])),
            Some(_) => return Err(Error::InvalidParameter("unbalanced family parameters")),
            None => (upper.as_str(), None),
        };
        let bad = Error::InvalidParameter("unknown graph family");
        let family = match (head, args) {
            ("SK", None) => GraphFamily::Sk,
            ("REG3" | "3REG", None) => GraphFamily::Reg3,
            ("NWS", None) => GraphFamily::Nws,
            ("BA", None) => GraphFamily::Ba,
            ("RING", None) => GraphFamily::Ring,
            ("RING_NNN", None) => GraphFamily::RingNnn,
            ("HONEYCOMB" | "HONEYCOMB_PERIODIC", None) => GraphFamily::HoneycombPeriodic,
            ("COMPLETE", None) => GraphFamily::Complete,
            ("GEOMETRIC", Some(a)) => GraphFamily::Geometric {
                rho: a.trim().parse().map_err(|_| Error::InvalidParameter("GEOMETRIC(rho) needs a number"))?,
            },
            ("GEOMETRIC", None) => GraphFamily::Geometric { rho: 7.0 },
            ("BETHE" | "BETHE_FINITE", Some(a)) => {
                let mut it = a.split(',').map(|x| x.trim().parse::<usize>());
                match (it.next(), it.next(), it.next()) {
                    (Some(Ok(degree)), Some(Ok(depth)), None) => GraphFamily::BetheFinite { degree, depth },
                    _ => return Err(Error::InvalidParameter("BETHE(d,depth) needs two integers")),
                }
            }
            _ => return Err(bad),
        };
        Ok(family)
    }
}

fn size_error(family: &GraphFamily, n: usize, reason: &'static str) -> Error {
    Error::InvalidFamilySize {
        family: family.name(),
        n,
        reason,
    }
}

/// Vertex count of a finite Cayley tree.
pub fn bethe_size(degree: usize, depth: usize) -> usize {
    let mut total = 1;
    let mut layer = degree;
    for _ in 0..depth {
        total += layer;
        layer *= degree.saturating_sub(1);
    }
    total
}

/// Generates an instance of `family` with `n` vertices.
pub fn generate(family: GraphFamily, n: usize, seed: u64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::TooFewVariables(n));
    }
    let mut rng = seed::rng(seed);
    let edges = match family {
        GraphFamily::Sk => sk_edges(n, &mut rng),
        GraphFamily::Reg3 => {
            if n % 2 == 1 || n < 4 {
                return Err(size_error(&family, n, "3-regular graphs need an even n >= 4"));
            }
            regular_edges(n, 3, &mut rng)
        }
        GraphFamily::Nws => {
            if n < 5 {
                return Err(size_error(&family, n, "the k=4 ring lattice needs n >= 5"));
            }
            nws_edges(n, &mut rng)
        }
        GraphFamily::Ba => {
            if n < 4 {
                return Err(size_error(&family, n, "Barabási–Albert growth needs n >= 4"));
            }
            ba_edges(n, &mut rng)
        }
        GraphFamily::Ring => {
            if n < 3 {
                return Err(size_error(&family, n, "a simple ring needs n >= 3"));
            }
            circulant_edges(n, &[1])
        }
        GraphFamily::RingNnn => {
            if n < 5 {
                return Err(size_error(&family, n, "a simple ring with next-nearest edges needs n >= 5"));
            }
            circulant_edges(n, &[1, 2])
        }
        GraphFamily::HoneycombPeriodic => {
            let l = integer_sqrt(n / 2);
            if n % 2 == 1 || 2 * l * l != n || l < 3 {
                return Err(size_error(&family, n, "periodic honeycomb needs n = 2L^2 with L >= 3"));
            }
            honeycomb_edges(l)
        }
        GraphFamily::BetheFinite { degree, depth } => {
            if degree < 2 || depth < 1 {
                return Err(size_error(&family, n, "tree needs degree >= 2 and depth >= 1"));
            }
            if bethe_size(degree, depth) != n {
                return Err(size_error(&family, n, "n must equal the tree size for (degree, depth)"));
            }
            bethe_tree(degree, depth).0
        }
        GraphFamily::Geometric { rho } => {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::InvalidParameter("geometric density rho must be positive"));
            }
            geometric_edges(&random_points(n, &mut rng), rho)
        }
        GraphFamily::Complete => circulant_edges(n, &(1..=n / 2).collect::<Vec<_>>()),
    };
    Ok(ProblemInstance::from_edges(n, &edges, Sense::Minimize)?.with_source(Source::Generated { family, seed }))
}

/// A random geometric graph together with its vertex positions.
pub fn geometric(n: usize, rho: f64, seed: u64) -> Result<(ProblemInstance, Vec<[f64; 2]>)> {
    let family = GraphFamily::Geometric { rho };
    let inst = generate(family, n, seed)?;
    // Same stream as `generate`, which draws the positions first.
    let points = random_points(n, &mut seed::rng(seed));
    Ok((inst, points))
}

/// Weighted maximum-independent-set instance on a random geometric graph.
///
/// The objective is `J Σ_{i<j} W_ij z_i z_j + Σ_i [J deg(i) − 2 u_i] z_i`
/// with `u_i` uniform in `[0, 1]`; `z_i = +1` marks membership. Quadratic
/// weights are stored as `J W_ij / 2` so the ordered-pair evaluator yields the
/// same value.
pub fn mis_instance(n: usize, rho: f64, penalty: f64, seed: u64) -> Result<ProblemInstance> {
    if penalty.is_nan() || penalty <= 1.0 {
        return Err(Error::InvalidParameter("MIS penalty J must exceed 1"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter("geometric density rho must be positive"));
    }
    if n < 2 {
        return Err(Error::TooFewVariables(n));
    }
    let mut rng = seed::rng(seed);
    let points = random_points(n, &mut rng);
    let edges = geometric_edges(&points, rho);
    let vertex_weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut adjacency = DMatrix::zeros(n, n);
    for (i, j, _) in edges {
        adjacency[(i, j)] = 1.0;
        adjacency[(j, i)] = 1.0;
    }
    Ok(mis_from_parts(&adjacency, &vertex_weights, penalty)?.with_source(Source::Mis { rho, penalty, seed }))
}

/// MIS objective for an explicit 0/1 adjacency matrix and vertex weights.
pub fn mis_from_parts(adjacency: &DMatrix<f64>, vertex_weights: &[f64], penalty: f64) -> Result<ProblemInstance> {
    let n = adjacency.nrows();
    if vertex_weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: vertex_weights.len(),
        });
    }
    let weights = adjacency * (penalty / 2.0);
    let linear = (0..n)
        .map(|i| {
            let deg = adjacency.column(i).iter().filter(|&&w| w != 0.0).count() as f64;
            penalty * deg - 2.0 * vertex_weights[i]
        })
        .collect();
    ProblemInstance::new(weights, Some(linear), Sense::Minimize)
}

/// Edge list and vertex depths of a finite Cayley tree, built breadth-first
/// from root 0.
pub fn bethe_tree(degree: usize, depth: usize) -> (Vec<(usize, usize, f64)>, Vec<usize>) {
    let mut edges = Vec::new();
    let mut depths = vec![0usize];
    let mut frontier = vec![0usize];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let children = if parent == 0 { degree } else { degree - 1 };
            for _ in 0..children {
                let child = depths.len();
                depths.push(level);
                edges.push((parent, child, 1.0));
                next.push(child);
            }
        }
        frontier = next;
    }
    (edges, depths)
}

fn integer_sqrt(x: usize) -> usize {
    let mut r = crate::math::sqrt(x as f64) as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

fn sk_edges(n: usize, rng: &mut Rng) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, if rng.random::<bool>() { 1.0 } else { -1.0 }));
        }
    }
    edges
}

fn circulant_edges(n: usize, offsets: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for &k in offsets {
            let j = (i + k) % n;
            if j != i {
                w[(i, j)] = 1.0;
                w[(j, i)] = 1.0;
            }
        }
    }
    upper_edges(&w)
}

fn upper_edges(w: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let n = w.nrows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] != 0.0 {
                edges.push((i, j, w[(i, j)]));
            }
        }
    }
    edges
}

/// Pairing-model random regular graph, resampled until simple.
fn regular_edges(n: usize, degree: usize, rng: &mut Rng) -> Vec<(usize, usize, f64)> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, degree)).collect();
    'retry: loop {
        stubs.shuffle(rng);
        let mut adj = vec![false; n * n];
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || adj[a * n + b] {
                continue 'retry;
            }
            adj[a * n + b] = true;
            adj[b * n + a] = true;
        }
        let mut edges = Vec::with_capacity(n * degree / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                if adj[i * n + j] {
                    edges.push((i, j, 1.0));
                }
            }
        }
        return edges;
    }
}

fn nws_edges(n: usize, rng: &mut Rng) -> Vec<(usize, usize, f64)> {
    let mut adj = vec![false; n * n];
    let mut lattice = Vec::with_capacity(2 * n);
    for i in 0..n {
        for k in 1..=2 {
            let j = (i + k) % n;
            adj[i * n + j] = true;
            adj[j * n + i] = true;
            lattice.push((i, j));
        }
    }
    for (i, j) in lattice {
        if !rng.random_bool(0.5) {
            continue;
        }
        let degree = (0..n).filter(|&v| adj[i * n + v]).count();
        if degree >= n - 1 {
            continue;
        }
        let k = loop {
            let k = rng.random_range(0..n);
            if k != i && !adj[i * n + k] {
                break k;
            }
        };
        adj[i * n + j] = false;
        adj[j * n + i] = false;
        adj[i * n + k] = true;
        adj[k * n + i] = true;
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i * n + j] {
                edges.push((i, j, rng.random::<f64>()));
            }
        }
    }
    edges
}

fn ba_edges(n: usize, rng: &mut Rng) -> Vec<(usize, usize, f64)> {
    let m = n / 4;
    let mut adj = vec![false; n * n];
    // Every edge endpoint is recorded, so uniform draws from `repeated` are
    // degree-proportional.
    let mut repeated = Vec::new();
    for leaf in 1..=m {
        adj[leaf] = true;
        adj[leaf * n] = true;
        repeated.push(0);
        repeated.push(leaf);
    }
    for v in (m + 1)..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = repeated[rng.random_range(0..repeated.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            adj[v * n + t] = true;
            adj[t * n + v] = true;
            repeated.push(t);
            repeated.push(v);
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if adj[i * n + j] {
                let w: f64 = StandardNormal.sample(rng);
                edges.push((i, j, w));
            }
        }
    }
    edges
}

fn honeycomb_edges(l: usize) -> Vec<(usize, usize, f64)> {
    let n = 2 * l * l;
    let site = |x: usize, y: usize, b: usize| 2 * ((x % l) + l * (y % l)) + b;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for y in 0..l {
        for x in 0..l {
            let a = site(x, y, 0);
            for b in [site(x, y, 1), site(x + l - 1, y, 1), site(x, y + l - 1, 1)] {
                w[(a, b)] = 1.0;
                w[(b, a)] = 1.0;
            }
        }
    }
    upper_edges(&w)
}

fn random_points(n: usize, rng: &mut Rng) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

fn geometric_edges(points: &[[f64; 2]], rho: f64) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let r2 = rho / n as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            if dx * dx + dy * dy <= r2 {
                edges.push((i, j, 1.0));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(inst: &ProblemInstance) -> Vec<usize> {
        inst.degrees()
    }

    #[test]
    fn ring_six() {
        let inst = generate(GraphFamily::Ring, 6, 1).unwrap();
        assert_eq!(inst.edges().len(), 6);
        assert!(degrees(&inst).iter().all(|&d| d == 2));
        assert!(inst.edges().iter().all(|e| e.2 == 1.0));
    }

    #[test]
    fn sk_four_is_complete_pm_one() {
        let inst = generate(GraphFamily::Sk, 4, 11).unwrap();
        let e = inst.edges();
        assert_eq!(e.len(), 6);
        assert!(e.iter().all(|&(_, _, w)| w == 1.0 || w == -1.0));
    }

    #[test]
    fn reg3_eight() {
        for seed in 0..20 {
            let inst = generate(GraphFamily::Reg3, 8, seed).unwrap();
            assert_eq!(inst.edges().len(), 12);
            assert!(degrees(&inst).iter().all(|&d| d == 3));
        }
        assert!(matches!(
            generate(GraphFamily::Reg3, 7, 0),
            Err(Error::InvalidFamilySize { .. })
        ));
        assert!(matches!(generate(GraphFamily::Sk, 1, 0), Err(Error::TooFewVariables(1))));
    }

    #[test]
    fn geometric_edges_respect_radius() {
        let (inst, pts) = geometric(20, 7.0, 5).unwrap();
        let r = (7.0f64 / 20.0).sqrt();
        assert!(!inst.edges().is_empty());
        for (i, j, w) in inst.edges() {
            assert_eq!(w, 1.0);
            let d = ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt();
            assert!(d <= r + 1e-15);
        }
        // and every close pair is an edge
        for i in 0..20 {
            for j in (i + 1)..20 {
                let d2 = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
                assert_eq!(d2 <= 7.0 / 20.0, inst.weights()[(i, j)] == 1.0);
            }
        }
    }

    #[test]
    fn nws_structure() {
        let inst = generate(GraphFamily::Nws, 16, 3).unwrap();
        // rewiring preserves the edge count of the k=4 lattice
        assert_eq!(inst.edges().len(), 32);
        assert!(inst.edges().iter().all(|&(_, _, w)| (0.0..1.0).contains(&w)));
    }

    #[test]
    fn ba_structure() {
        let n = 16;
        let inst = generate(GraphFamily::Ba, n, 9).unwrap();
        let m = n / 4;
        assert_eq!(inst.edges().len(), m + (3 * n / 4 - 1) * m);
        // late vertices attach with exactly m edges to earlier ones
        for v in (m + 1)..n {
            let back = (0..v).filter(|&u| inst.weights()[(u, v)] != 0.0).count();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn lattices() {
        let h = generate(GraphFamily::HoneycombPeriodic, 18, 0).unwrap();
        assert!(degrees(&h).iter().all(|&d| d == 3));
        assert_eq!(h.edges().len(), 27);
        assert!(generate(GraphFamily::HoneycombPeriodic, 8, 0).is_err());

        let nnn = generate(GraphFamily::RingNnn, 10, 0).unwrap();
        assert!(degrees(&nnn).iter().all(|&d| d == 4));

        let fam = GraphFamily::BetheFinite { degree: 3, depth: 3 };
        let n = bethe_size(3, 3);
        assert_eq!(n, 1 + 3 + 6 + 12);
        let t = generate(fam, n, 0).unwrap();
        assert_eq!(t.edges().len(), n - 1);
        assert!(generate(fam, n + 1, 0).is_err());

        let k = generate(GraphFamily::Complete, 7, 0).unwrap();
        assert_eq!(k.edges().len(), 21);
    }

    #[test]
    fn generation_is_reproducible_and_well_formed() {
        let families = [
            (GraphFamily::Sk, 12),
            (GraphFamily::Reg3, 12),
            (GraphFamily::Nws, 12),
            (GraphFamily::Ba, 12),
            (GraphFamily::Ring, 9),
            (GraphFamily::RingNnn, 9),
            (GraphFamily::HoneycombPeriodic, 32),
            (GraphFamily::Geometric { rho: 7.0 }, 15),
            (GraphFamily::Complete, 6),
        ];
        for (fam, n) in families {
            for seed in [0u64, 1, u64::MAX] {
                let a = generate(fam, n, seed).unwrap();
                let b = generate(fam, n, seed).unwrap();
                assert_eq!(a, b);
                let w = a.weights();
                assert_eq!(w, &w.transpose());
                assert!((0..n).all(|i| w[(i, i)] == 0.0));
                if fam.unit_weight() {
                    assert!(w.iter().all(|&x| x == 0.0 || x == 1.0));
                }
            }
        }
    }

    #[test]
    fn family_names_parse_back() {
        for fam in [
            GraphFamily::Sk,
            GraphFamily::Reg3,
            GraphFamily::Nws,
            GraphFamily::Ba,
            GraphFamily::Ring,
            GraphFamily::RingNnn,
            GraphFamily::HoneycombPeriodic,
            GraphFamily::BetheFinite { degree: 3, depth: 4 },
            GraphFamily::Geometric { rho: 7.5 },
            GraphFamily::Complete,
        ] {
            let s = alloc::format!("{fam}");
            assert_eq!(s.parse::<GraphFamily>().unwrap(), fam);
        }
        assert!("PETERSEN".parse::<GraphFamily>().is_err());
    }

    #[test]
    fn mis_linear_terms() {
        let adj = DMatrix::zeros(4, 4);
        let inst = mis_from_parts(&adj, &[0.5; 4], 2.0).unwrap();
        assert!(inst.linear().iter().all(|&h| h == -1.0));
        let best = crate::exact::brute_force(&inst).unwrap();
        assert!(best.best.as_slice().iter().all(|&s| s == 1));

        assert!(mis_instance(10, 7.0, 1.0, 0).is_err());
    }

    #[test]
    fn mis_single_edge_picks_one_endpoint() {
        let mut adj = DMatrix::zeros(2, 2);
        adj[(0, 1)] = 1.0;
        adj[(1, 0)] = 1.0;
        let inst = mis_from_parts(&adj, &[1.0, 1.0], 2.0).unwrap();
        // enumerate the four assignments directly
        let mut values = Vec::new();
        for b in 0..4u64 {
            let z = crate::Spins::from_index(b, 2);
            let (z0, z1) = (z.as_slice()[0] as f64, z.as_slice()[1] as f64);
            let direct = 2.0 * z0 * z1 + (2.0 - 2.0) * z0 + (2.0 - 2.0) * z1;
            assert_eq!(inst.objective_value(&z).unwrap(), direct);
            values.push((direct, z));
        }
        let min = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        for (v, z) in values {
            if v == min {
                assert_eq!(z.as_slice().iter().filter(|&&s| s == 1).count(), 1);
            }
        }
    }
}
