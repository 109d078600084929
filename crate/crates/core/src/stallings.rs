//! Folded core graphs of finitely generated subgroups of free groups.
//!
//! A `CoreGraph` is the folded, trimmed Stallings graph of a subgroup: the
//! base-point loops spell exactly the subgroup elements, the first Betti
//! number `E - V + 1` is the subgroup rank, and the graph being a complete
//! cover detects finite index. All outputs are canonical: vertices are
//! renumbered breadth-first from the base along lexicographically ordered
//! labels, so equal subgroups produce identical graphs.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Alphabet, FreeMap, Letter, Word};

/// A directed labeled edge of a core graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub label: usize,
}

/// Folded Stallings graph of a finitely generated subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGraph {
    alphabet: Arc<Alphabet>,
    vertex_count: usize,
    base: usize,
    edges: Vec<GraphEdge>,
}

/// Index of a subgroup in the ambient free group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupIndex {
    Finite(usize),
    Infinite,
}

/// Outcome of tracing a word through a core graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberResult {
    /// The word lies in the subgroup; the payload expresses it over the
    /// computed `SubgroupBasis` (spanning-tree rewriting).
    Member(Word),
    NotAMember,
}

/// A free basis of the subgroup read off a spanning tree.
#[derive(Debug, Clone)]
pub struct SubgroupBasis {
    /// Basis elements as words in the ambient free group.
    pub generators: Vec<Word>,
    /// The canonical alphabet naming the basis (x, y, z, ...).
    pub alphabet: Arc<Alphabet>,
    /// Indices into the graph's edge list forming the spanning tree witness.
    pub tree_edges: Vec<usize>,
}

impl CoreGraph {
    /// Folds the wedge of the generator loops into the core graph of the
    /// subgroup they generate. An empty generator list yields the one-vertex
    /// graph of the trivial subgroup.
    pub fn fold(alphabet: &Arc<Alphabet>, generators: &[Word]) -> Result<CoreGraph> {
        for w in generators {
            if w.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch(
                    "subgroup generator over a different alphabet".into(),
                ));
            }
        }
        let edges = wedge_edges(generators);
        Ok(Self::fold_edges(alphabet, edges))
    }

    /// Folds an explicit edge list (vertex 0 is the base). Exposed for
    /// callers that build graphs directly; `fold` is the usual entry point.
    fn fold_edges(alphabet: &Arc<Alphabet>, raw_edges: Vec<GraphEdge>) -> CoreGraph {
        let vertex_count = raw_edges
            .iter()
            .flat_map(|e| [e.source, e.target])
            .max()
            .map_or(1, |m| m + 1);
        let mut dsu = Dsu::new(vertex_count);
        let mut edges = raw_edges;
        // Fold until no vertex has two equally labeled edges in the same
        // direction. Each pass either merges two vertices or terminates.
        loop {
            for e in &mut edges {
                e.source = dsu.find(e.source);
                e.target = dsu.find(e.target);
            }
            let mut conflict: Option<(usize, usize)> = None;
            'scan: for (i, a) in edges.iter().enumerate() {
                for b in &edges[i + 1..] {
                    if a.label != b.label {
                        continue;
                    }
                    if a.source == b.source && a.target != b.target {
                        conflict = Some((a.target, b.target));
                        break 'scan;
                    }
                    if a.target == b.target && a.source != b.source {
                        conflict = Some((a.source, b.source));
                        break 'scan;
                    }
                }
            }
            match conflict {
                Some((x, y)) => dsu.union(x, y),
                None => break,
            }
        }
        edges.sort();
        edges.dedup();
        let base = dsu.find(0);
        let (vertex_count, base, edges) = trim_and_renumber(alphabet.rank(), base, edges);
        CoreGraph { alphabet: alphabet.clone(), vertex_count, base, edges }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// First Betti number `E - V + 1`, the rank of the subgroup.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    fn out_edge(&self, vertex: usize, label: usize) -> Option<(usize, usize)> {
        self.edges
            .iter()
            .position(|e| e.source == vertex && e.label == label)
            .map(|i| (i, self.edges[i].target))
    }

    fn in_edge(&self, vertex: usize, label: usize) -> Option<(usize, usize)> {
        self.edges
            .iter()
            .position(|e| e.target == vertex && e.label == label)
            .map(|i| (i, self.edges[i].source))
    }

    /// True when the word traces a base-to-base loop.
    pub fn contains(&self, w: &Word) -> Result<bool> {
        Ok(matches!(self.member_and_rewrite(w)?, MemberResult::Member(_)))
    }

    /// Traces `w` from the base. On success the result expresses `w` over
    /// the subgroup basis; expanding that expression through the basis
    /// recovers `w` exactly.
    pub fn member_and_rewrite(&self, w: &Word) -> Result<MemberResult> {
        if w.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch("word over a different alphabet".into()));
        }
        let basis = self.subgroup_basis();
        let mut basis_index = vec![None; self.edges.len()];
        let mut next = 0;
        for (i, _) in self.edges.iter().enumerate() {
            if !basis.tree_edges.contains(&i) {
                basis_index[i] = Some(next);
                next += 1;
            }
        }
        let mut at = self.base;
        let mut expr = Vec::new();
        for &letter in w.letters() {
            let hop = if letter.inverse {
                self.in_edge(at, letter.gen)
            } else {
                self.out_edge(at, letter.gen)
            };
            let Some((edge_id, to)) = hop else {
                return Ok(MemberResult::NotAMember);
            };
            if let Some(idx) = basis_index[edge_id] {
                expr.push(Letter::new(idx, letter.inverse));
            }
            at = to;
        }
        if at != self.base {
            return Ok(MemberResult::NotAMember);
        }
        Ok(MemberResult::Member(Word::reduce_from(&basis.alphabet, expr)?))
    }

    /// Finite iff the graph is a complete cover: every vertex carries one
    /// incident edge per label and direction. The trivial subgroup of a
    /// nontrivial free group therefore reports infinite.
    pub fn subgroup_index(&self) -> SubgroupIndex {
        for v in 0..self.vertex_count {
            for label in 0..self.alphabet.rank() {
                if self.out_edge(v, label).is_none() || self.in_edge(v, label).is_none() {
                    return SubgroupIndex::Infinite;
                }
            }
        }
        SubgroupIndex::Finite(self.vertex_count)
    }

    /// Reads a free basis off the breadth-first spanning tree. Non-tree
    /// edges are ordered by (source, target, label); the basis element of a
    /// non-tree edge (u, v, g) is path(base->u) * g * path(base->v)^-1.
    pub fn subgroup_basis(&self) -> SubgroupBasis {
        let (tree_edges, paths) = self.spanning_tree();
        let mut non_tree: Vec<usize> = (0..self.edges.len())
            .filter(|i| !tree_edges.contains(i))
            .collect();
        non_tree.sort_by_key(|&i| (self.edges[i].source, self.edges[i].target, self.edges[i].label));
        let generators: Vec<Word> = non_tree
            .iter()
            .map(|&i| {
                let e = self.edges[i];
                let g = Word::reduce_from(&self.alphabet, [Letter::new(e.label, false)])
                    .expect("label in range");
                paths[e.source]
                    .mul(&g)
                    .and_then(|w| w.mul(&paths[e.target].inverse()))
                    .expect("same alphabet")
            })
            .collect();
        let alphabet = Alphabet::canonical(generators.len());
        SubgroupBasis { generators, alphabet, tree_edges }
    }

    /// Expands a basis expression back into the ambient free group.
    pub fn expand(&self, basis: &SubgroupBasis, expr: &Word) -> Result<Word> {
        let map = FreeMap::new(&basis.alphabet, &self.alphabet, basis.generators.clone())?;
        map.apply(expr)
    }

    /// Breadth-first spanning tree in canonical order; returns tree edge ids
    /// and, per vertex, the tree path word from the base.
    fn spanning_tree(&self) -> (Vec<usize>, Vec<Word>) {
        let mut tree = Vec::new();
        let mut paths = vec![Word::identity(&self.alphabet); self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        seen[self.base] = true;
        let mut queue = VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for label in 0..self.alphabet.rank() {
                if let Some((edge_id, to)) = self.out_edge(v, label) {
                    if !seen[to] {
                        seen[to] = true;
                        tree.push(edge_id);
                        paths[to] = paths[v]
                            .mul(&Word::reduce_from(&self.alphabet, [Letter::new(label, false)]).unwrap())
                            .unwrap();
                        queue.push_back(to);
                    }
                }
                if let Some((edge_id, from)) = self.in_edge(v, label) {
                    if !seen[from] {
                        seen[from] = true;
                        tree.push(edge_id);
                        paths[from] = paths[v]
                            .mul(&Word::reduce_from(&self.alphabet, [Letter::new(label, true)]).unwrap())
                            .unwrap();
                        queue.push_back(from);
                    }
                }
            }
        }
        (tree, paths)
    }
}

/// True iff the free map is injective: by the Hopf property this holds
/// exactly when the folded graph of the images has rank equal to the domain
/// rank.
pub fn hom_injectivity(m: &FreeMap) -> Result<bool> {
    let graph = CoreGraph::fold(m.target(), m.images())?;
    Ok(graph.rank() == m.domain().rank())
}

fn wedge_edges(generators: &[Word]) -> Vec<GraphEdge> {
    let mut edges = Vec::new();
    let mut next_vertex = 1;
    for w in generators {
        if w.is_empty() {
            continue;
        }
        let n = w.len();
        let mut at = 0;
        for (i, &letter) in w.letters().iter().enumerate() {
            let to = if i + 1 == n { 0 } else { next_vertex + i };
            let (source, target) = if letter.inverse { (to, at) } else { (at, to) };
            edges.push(GraphEdge { source, target, label: letter.gen });
            at = to;
        }
        next_vertex += n - 1;
    }
    edges
}

/// Removes hanging trees (non-base vertices of total degree < 2), then
/// renumbers breadth-first from the base, exploring labels in order and
/// outgoing before incoming.
fn trim_and_renumber(
    rank: usize,
    base: usize,
    mut edges: Vec<GraphEdge>,
) -> (usize, usize, Vec<GraphEdge>) {
    loop {
        let mut degree = std::collections::HashMap::<usize, usize>::new();
        for e in &edges {
            *degree.entry(e.source).or_default() += 1;
            *degree.entry(e.target).or_default() += 1;
        }
        let victim = degree
            .iter()
            .find(|&(&v, &d)| v != base && d < 2)
            .map(|(&v, _)| v);
        match victim {
            Some(v) => edges.retain(|e| e.source != v && e.target != v),
            None => break,
        }
    }
    // Canonical breadth-first renumbering.
    let mut renumber = std::collections::HashMap::<usize, usize>::new();
    renumber.insert(base, 0);
    let mut queue = VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for label in 0..rank {
            let out = edges.iter().find(|e| e.source == v && e.label == label).map(|e| e.target);
            let inc = edges.iter().find(|e| e.target == v && e.label == label).map(|e| e.source);
            for w in [out, inc].into_iter().flatten() {
                if !renumber.contains_key(&w) {
                    renumber.insert(w, renumber.len());
                    queue.push_back(w);
                }
            }
        }
    }
    let mut new_edges: Vec<GraphEdge> = edges
        .iter()
        .map(|e| GraphEdge { source: renumber[&e.source], target: renumber[&e.target], label: e.label })
        .collect();
    new_edges.sort();
    (renumber.len(), 0, new_edges)
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<Alphabet> {
        Alphabet::new(vec!["a", "b"]).unwrap()
    }

    fn w(alphabet: &Arc<Alphabet>, text: &str) -> Word {
        Word::parse(alphabet, text).unwrap()
    }

    fn footnote_subgroup() -> CoreGraph {
        let f = f2();
        let gens = vec![w(&f, "a"), w(&f, "b^2"), w(&f, "b a b^-1")];
        CoreGraph::fold(&f, &gens).unwrap()
    }

    #[test]
    fn whole_group_folds_to_a_rose() {
        let f = f2();
        let g = CoreGraph::fold(&f, &[w(&f, "a"), w(&f, "b")]).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.subgroup_index(), SubgroupIndex::Finite(1));
        let basis = g.subgroup_basis();
        assert_eq!(basis.generators, vec![w(&f, "a"), w(&f, "b")]);
    }

    #[test]
    fn empty_generators_fold_to_a_point() {
        let f = f2();
        let g = CoreGraph::fold(&f, &[]).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert!(g.edges().is_empty());
        assert_eq!(g.rank(), 0);
        assert!(g.subgroup_basis().generators.is_empty());
        // Index of the trivial subgroup in F_2 is infinite.
        assert_eq!(g.subgroup_index(), SubgroupIndex::Infinite);
    }

    #[test]
    fn footnote_subgroup_has_two_vertices_and_index_two() {
        let g = footnote_subgroup();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.rank(), 3);
        assert_eq!(g.subgroup_index(), SubgroupIndex::Finite(2));
    }

    #[test]
    fn footnote_basis_is_a_bb_bab() {
        let f = f2();
        let g = footnote_subgroup();
        let basis = g.subgroup_basis();
        assert_eq!(
            basis.generators,
            vec![w(&f, "a"), w(&f, "b^2"), w(&f, "b a b^-1")]
        );
        // Folding the basis back gives an isomorphic (here: equal) graph.
        let refolded = CoreGraph::fold(&f, &basis.generators).unwrap();
        assert_eq!(refolded, g);
    }

    #[test]
    fn footnote_membership_and_rewriting() {
        let f = f2();
        let g = footnote_subgroup();
        let word_g = w(&f, "a^2 b^2 a^-2 b^-1");
        assert_eq!(g.member_and_rewrite(&word_g).unwrap(), MemberResult::NotAMember);

        let gg = word_g.mul(&word_g).unwrap();
        let MemberResult::Member(expr) = g.member_and_rewrite(&gg).unwrap() else {
            panic!("g^2 must be a member");
        };
        assert_eq!(expr.to_string(), "x^2 y x^-2 y^-1 z^2 y z^-2");
        // Round trip: expanding the expression recovers g^2.
        let basis = g.subgroup_basis();
        assert_eq!(g.expand(&basis, &expr).unwrap(), gg);
    }

    #[test]
    fn empty_word_rewrites_to_the_empty_expression() {
        let f = f2();
        let g = footnote_subgroup();
        let MemberResult::Member(expr) = g.member_and_rewrite(&Word::identity(&f)).unwrap() else {
            panic!("identity is always a member");
        };
        assert!(expr.is_empty());
    }

    #[test]
    fn cyclic_subgroup_has_infinite_index() {
        let f = f2();
        let g = CoreGraph::fold(&f, &[w(&f, "a")]).unwrap();
        assert_eq!(g.subgroup_index(), SubgroupIndex::Infinite);
    }

    #[test]
    fn hom_injectivity_examples() {
        let f = f2();
        assert!(hom_injectivity(&FreeMap::identity(&f)).unwrap());

        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let collapse = FreeMap::new(&f, &x, vec![w(&x, "x"), w(&x, "x")]).unwrap();
        assert!(!hom_injectivity(&collapse).unwrap());

        let powers = FreeMap::new(&f, &x, vec![w(&x, "x^2"), w(&x, "y^3")]).unwrap();
        assert!(hom_injectivity(&powers).unwrap());
    }

    #[test]
    fn folding_is_confluent_under_randomized_edge_orders() {
        let f = f2();
        let gens = vec![w(&f, "a"), w(&f, "b^2"), w(&f, "b a b^-1")];
        let reference = CoreGraph::fold(&f, &gens).unwrap();
        let mut edges = wedge_edges(&gens);
        let mut state = 0x2545f4914f6cdd1du64;
        for _ in 0..20 {
            // xorshift shuffle of the edge list changes which fold fires first.
            for i in (1..edges.len()).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let j = (state % (i as u64 + 1)) as usize;
                edges.swap(i, j);
            }
            let shuffled = CoreGraph::fold_edges(&f, edges.clone());
            assert_eq!(shuffled, reference);
        }
    }

    /// Positive-membership oracle: all reduced products of at most
    /// `max_factors` subgroup generators and inverses.
    fn product_ball(gens: &[Word], max_factors: usize) -> Vec<Word> {
        let alphabet = gens[0].alphabet().clone();
        let mut ball = vec![Word::identity(&alphabet)];
        let mut frontier = ball.clone();
        let factors: Vec<Word> = gens
            .iter()
            .flat_map(|g| [g.clone(), g.inverse()])
            .collect();
        for _ in 0..max_factors {
            let mut next = Vec::new();
            for p in &frontier {
                for f in &factors {
                    let q = p.mul(f).unwrap();
                    if !ball.contains(&q) {
                        ball.push(q.clone());
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        ball
    }

    #[test]
    fn membership_agrees_with_the_product_ball_oracle() {
        let f = f2();
        let cases: Vec<Vec<Word>> = vec![
            vec![w(&f, "a"), w(&f, "b^2"), w(&f, "b a b^-1")],
            vec![w(&f, "a b"), w(&f, "b a")],
            vec![w(&f, "a^2"), w(&f, "b")],
        ];
        for gens in cases {
            let graph = CoreGraph::fold(&f, &gens).unwrap();
            let basis = graph.subgroup_basis();
            for element in product_ball(&gens, 4) {
                let result = graph.member_and_rewrite(&element).unwrap();
                let MemberResult::Member(expr) = result else {
                    panic!("oracle element {element} must be a member of <{gens:?}>");
                };
                assert_eq!(graph.expand(&basis, &expr).unwrap(), element);
            }
        }
    }

    /// Coset-table oracle: breadth-first coset enumeration where coset
    /// equality is decided by the bounded product ball. Sound on examples
    /// small enough that the ball witnesses every identification.
    fn index_oracle(gens: &[Word], cap: usize) -> Option<usize> {
        let alphabet = gens[0].alphabet().clone();
        let ball = product_ball(gens, 4);
        let mut reps: Vec<Word> = vec![Word::identity(&alphabet)];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in 0..alphabet.rank() {
                for inverse in [false, true] {
                    let step = Word::reduce_from(&alphabet, [Letter::new(g, inverse)]).unwrap();
                    let moved = reps[i].mul(&step).unwrap();
                    let known = reps.iter().any(|r| {
                        let diff = moved.mul(&r.inverse()).unwrap();
                        ball.contains(&diff)
                    });
                    if !known {
                        reps.push(moved);
                        queue.push_back(reps.len() - 1);
                        if reps.len() > cap {
                            return None;
                        }
                    }
                }
            }
        }
        Some(reps.len())
    }

    #[test]
    fn finite_index_agrees_with_coset_enumeration() {
        let f = f2();
        let cases: Vec<(Vec<Word>, SubgroupIndex)> = vec![
            (vec![w(&f, "a"), w(&f, "b")], SubgroupIndex::Finite(1)),
            (vec![w(&f, "a"), w(&f, "b^2"), w(&f, "b a b^-1")], SubgroupIndex::Finite(2)),
            (vec![w(&f, "a^2"), w(&f, "b"), w(&f, "a b a^-1")], SubgroupIndex::Finite(2)),
            (vec![w(&f, "a")], SubgroupIndex::Infinite),
        ];
        for (gens, expected) in cases {
            let graph = CoreGraph::fold(&f, &gens).unwrap();
            assert_eq!(graph.subgroup_index(), expected);
            match expected {
                SubgroupIndex::Finite(n) => assert_eq!(index_oracle(&gens, 40), Some(n)),
                SubgroupIndex::Infinite => assert_eq!(index_oracle(&gens, 40), None),
            }
        }
    }
}
