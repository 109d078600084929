//! Makanin-Razborov diagrams as rooted quotient trees, branch-witness
//! verification, and bounded modular searches.
//!
//! Searches are deterministic: composition words over the ordered twist
//! list are enumerated shortlex-first, and conjugators likewise, so the
//! returned witness is the least successful candidate. A "none" answer is
//! always relative to the stated bounds, never a nonexistence claim.

use crate::error::{Error, Result};
use crate::presentations::{
    abelianization_properness, certify_properness, factors_through, GroupHom, Presentation,
    Properness, QuotientMap,
};
use crate::splittings::TwistAutomorphism;
use crate::words::{FreeMap, Letter, Word};

/// An edge of an MR diagram: the child presents the parent modulo the added
/// relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramEdge {
    pub parent: usize,
    pub child: usize,
    pub added: Vec<Word>,
}

/// A rooted tree of quotients terminating in recognizably free leaves.
///
/// Leaves must be recognizably free: either the relator list is empty or the
/// presentation is visibly abelian, torsion-free, and of rank at most one.
/// The root carries a caller-declared limit-group flag; when it is false,
/// branch witnesses must use the identity automorphism at the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MrDiagram {
    nodes: Vec<Presentation>,
    root: usize,
    edges: Vec<DiagramEdge>,
    root_is_limit: bool,
}

impl MrDiagram {
    pub fn new(
        nodes: Vec<Presentation>,
        root: usize,
        edges: Vec<DiagramEdge>,
        root_is_limit: bool,
    ) -> Result<MrDiagram> {
        if root >= nodes.len() {
            return Err(Error::Invalid("root index out of range".into()));
        }
        let mut parent_count = vec![0usize; nodes.len()];
        for e in &edges {
            if e.parent >= nodes.len() || e.child >= nodes.len() {
                return Err(Error::Invalid("edge endpoint out of range".into()));
            }
            parent_count[e.child] += 1;
            let q = QuotientMap::new(nodes[e.parent].clone(), e.added.clone())?;
            if q.codomain() != nodes[e.child] {
                return Err(Error::Invalid(format!(
                    "node {} is not the parent node plus the added relators",
                    e.child
                )));
            }
        }
        if parent_count[root] != 0 {
            return Err(Error::Invalid("root must not have a parent".into()));
        }
        for (i, &c) in parent_count.iter().enumerate() {
            if i != root && c != 1 {
                return Err(Error::Invalid(format!("node {i} must have exactly one parent")));
            }
        }
        let mut reached = vec![false; nodes.len()];
        reached[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for e in &edges {
                if e.parent == v && !reached[e.child] {
                    reached[e.child] = true;
                    stack.push(e.child);
                }
            }
        }
        if !reached.iter().all(|&r| r) {
            return Err(Error::Invalid("diagram is not connected".into()));
        }
        let diagram = MrDiagram { nodes, root, edges, root_is_limit };
        for leaf in diagram.leaves() {
            if !diagram.nodes[leaf].is_recognizably_free() {
                return Err(Error::Invalid(format!("leaf node {leaf} is not recognizably free")));
            }
        }
        Ok(diagram)
    }

    pub fn nodes(&self) -> &[Presentation] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn edges(&self) -> &[DiagramEdge] {
        &self.edges
    }

    pub fn root_is_limit(&self) -> bool {
        self.root_is_limit
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.edges.iter().any(|e| e.parent == i))
            .collect()
    }

    fn edge_between(&self, parent: usize, child: usize) -> Option<&DiagramEdge> {
        self.edges.iter().find(|e| e.parent == parent && e.child == child)
    }
}

/// Witness data for MR-factoring a hom along a branch: one automorphism per
/// non-leaf node and a terminal hom from the leaf into the free target.
#[derive(Debug, Clone)]
pub struct BranchWitness {
    pub branch: Vec<usize>,
    pub automorphisms: Vec<FreeMap>,
    pub terminal: GroupHom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub node: usize,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct MrVerification {
    pub ok: bool,
    pub stages: Vec<StageReport>,
}

/// Verifies `f = terminal . q_(m-1) . alpha_(m-1) ... q . alpha` stage by
/// stage: every automorphism must be a homomorphism of its node, the branch
/// must follow diagram edges from the root to a leaf, and the composed
/// images must match `f` generator by generator as reduced words.
pub fn verify_mr_factoring(
    f: &GroupHom,
    diagram: &MrDiagram,
    witness: &BranchWitness,
) -> Result<MrVerification> {
    if !f.is_verified() {
        return Err(Error::Precondition("MR verification requires a verified hom".into()));
    }
    if !f.target().is_free() {
        return Err(Error::Precondition("MR verification requires a free target".into()));
    }
    if f.domain() != &diagram.nodes[diagram.root] {
        return Err(Error::Precondition("hom domain is not the diagram root".into()));
    }
    let branch = &witness.branch;
    if branch.first() != Some(&diagram.root) {
        return Err(Error::Invalid("branch must start at the root".into()));
    }
    let Some(&leaf) = branch.last() else {
        return Err(Error::Invalid("branch must be nonempty".into()));
    };
    if !diagram.leaves().contains(&leaf) {
        return Err(Error::Invalid("branch must end at a leaf".into()));
    }
    if witness.automorphisms.len() + 1 != branch.len() {
        return Err(Error::Arity { expected: branch.len() - 1, got: witness.automorphisms.len() });
    }
    for pair in branch.windows(2) {
        if diagram.edge_between(pair[0], pair[1]).is_none() {
            return Err(Error::Invalid(format!("no diagram edge from {} to {}", pair[0], pair[1])));
        }
    }
    let mut stages = Vec::new();
    let mut all_ok = true;
    // Stage homs: each automorphism is an endomorphism table of its node.
    for (step, (&node, alpha)) in branch.iter().zip(&witness.automorphisms).enumerate() {
        let pres = &diagram.nodes[node];
        if alpha.domain() != pres.generators() || alpha.target() != pres.generators() {
            return Err(Error::AlphabetMismatch(format!(
                "automorphism at branch step {step} is not an endomorphism table of node {node}"
            )));
        }
        if step == 0 && !diagram.root_is_limit && !alpha.is_identity() {
            stages.push(StageReport {
                node,
                ok: false,
                detail: "root is declared non-limit, so its automorphism must be the identity"
                    .into(),
            });
            all_ok = false;
            continue;
        }
        let mut ok = true;
        let mut detail = String::from("stage map kills every node relator");
        for relator in pres.relators() {
            let image = alpha.apply(relator)?;
            match pres.is_trivial(&image)? {
                Some(true) => {}
                Some(false) => {
                    ok = false;
                    detail = format!("relator `{relator}` is not killed by the stage map");
                    break;
                }
                None => {
                    return Err(Error::Undecidable(format!(
                        "stage hom at node {node} cannot be verified"
                    )));
                }
            }
        }
        stages.push(StageReport { node, ok, detail });
        all_ok &= ok;
    }
    if witness.terminal.domain() != &diagram.nodes[leaf] {
        return Err(Error::Invalid("terminal hom domain is not the leaf node".into()));
    }
    if !witness.terminal.is_verified() {
        return Err(Error::Precondition("terminal hom must be verified".into()));
    }
    if witness.terminal.target() != f.target() {
        return Err(Error::AlphabetMismatch("terminal hom target differs from f's".into()));
    }
    stages.push(StageReport {
        node: leaf,
        ok: true,
        detail: "terminal hom verified against the leaf".into(),
    });
    // Composite equality, generator by generator. Quotient maps keep the
    // generators, so words pass between nodes unchanged.
    let root_pres = &diagram.nodes[diagram.root];
    let mut matches = true;
    let mut mismatch = String::new();
    for g in 0..root_pres.generators().rank() {
        let mut word = Word::generator(root_pres.generators(), g)?;
        for alpha in &witness.automorphisms {
            word = alpha.apply(&word)?;
        }
        let through = witness.terminal.apply(&word)?;
        let direct = &f.images()[g];
        if &through != direct {
            matches = false;
            mismatch = format!(
                "generator `{}` maps to `{through}` through the branch but to `{direct}` under f",
                root_pres.generators().name(g)
            );
            break;
        }
    }
    stages.push(StageReport {
        node: leaf,
        ok: matches,
        detail: if matches { "composite matches f on every generator".into() } else { mismatch },
    });
    Ok(MrVerification { ok: all_ok && matches, stages })
}

/// A named member of a factor set with its properness certificate.
#[derive(Debug, Clone)]
pub struct FactorMember {
    pub name: String,
    pub map: QuotientMap,
    pub properness: Properness,
}

/// A finite collection of quotient maps from a common domain, led by the
/// torsion-free abelianization quotient.
#[derive(Debug, Clone)]
pub struct FactorSet {
    pub domain: Presentation,
    pub members: Vec<FactorMember>,
}

impl FactorSet {
    /// Members that are usable factoring targets: proper epimorphisms
    /// (certified or asserted).
    pub fn proper_members(&self) -> impl Iterator<Item = (usize, &FactorMember)> {
        self.members.iter().enumerate().filter(|(_, m)| m.properness != Properness::NotProper)
    }
}

/// Builds `{G -> Ab(G)}` united with `{G -> G/<<k>>}` for the given kernel
/// words. The abelianization member adds all pairwise commutators plus
/// words spanning the saturation of the relator lattice, so its codomain is
/// the torsion-free abelianization presented on the same generators.
pub fn assemble_factor_set(domain: &Presentation, kernel_words: &[Word]) -> Result<FactorSet> {
    for k in kernel_words {
        if k.is_empty() {
            return Err(Error::EmptyWord);
        }
        if k.alphabet() != domain.generators() {
            return Err(Error::AlphabetMismatch("kernel word over a different alphabet".into()));
        }
    }
    let gens = domain.generators();
    let mut ab_added = Vec::new();
    for i in 0..gens.rank() {
        for j in i + 1..gens.rank() {
            ab_added.push(Word::generator(gens, i)?.commutator(&Word::generator(gens, j)?)?);
        }
    }
    let sat = crate::intlinalg::saturation(&domain.relator_lattice());
    for v in &sat.basis {
        let mut word = Word::identity(gens);
        for (g, e) in v.iter().enumerate() {
            let exp: i64 = e.try_into().map_err(|_| {
                Error::Invalid("saturation coordinate too large for a word exponent".into())
            })?;
            word = word.mul(&Word::generator(gens, g)?.pow(exp))?;
        }
        if !word.is_empty() {
            ab_added.push(word);
        }
    }
    let ab_map = QuotientMap::new(domain.clone(), ab_added)?;
    let mut members = vec![FactorMember {
        name: "abelianization".into(),
        map: ab_map,
        properness: abelianization_properness(domain)?,
    }];
    for (i, k) in kernel_words.iter().enumerate() {
        let map = QuotientMap::new(domain.clone(), vec![k.clone()])?;
        let properness = certify_properness(&map)?;
        members.push(FactorMember { name: format!("quotient[{i}] by `{k}`"), map, properness });
    }
    Ok(FactorSet { domain: domain.clone(), members })
}

/// One symbol of a composition word over the twist list.
pub type TwistSymbol = (usize, bool);

/// A successful modular factorization: the twist composition word, its
/// composed table, the factor-set member it factors through, and the
/// verified witness hom on that member's codomain.
#[derive(Debug, Clone)]
pub struct ModularWitness {
    pub twist_word: Vec<TwistSymbol>,
    pub alpha: FreeMap,
    pub member: usize,
    pub witness: GroupHom,
}

fn compose_then_f(f: &GroupHom, alpha: &FreeMap) -> Result<GroupHom> {
    let alphabet = f.domain().generators();
    let images = (0..alphabet.rank())
        .map(|g| f.apply(&alpha.apply(&Word::generator(alphabet, g)?)?))
        .collect::<Result<Vec<_>>>()?;
    GroupHom::verified(f.domain().clone(), f.target().clone(), images)
}

/// The symbol list over a twist set: plain before inverted, by twist index,
/// paired with the table each symbol applies.
fn twist_symbols(modgens: &[TwistAutomorphism]) -> Vec<(TwistSymbol, FreeMap)> {
    modgens
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            [((i, false), t.table.clone()), ((i, true), t.inverse_table.clone())]
        })
        .collect()
}

/// Depth-first enumeration of composition words of each exact length in
/// symbol order, keeping the composed prefix on the recursion stack.
fn search_words<T>(
    symbols: &[(TwistSymbol, FreeMap)],
    identity: &FreeMap,
    depth: usize,
    test: &mut dyn FnMut(&[TwistSymbol], &FreeMap) -> Result<Option<T>>,
) -> Result<Option<T>> {
    fn descend<T>(
        word: &mut Vec<TwistSymbol>,
        prefix: &FreeMap,
        remaining: usize,
        symbols: &[(TwistSymbol, FreeMap)],
        test: &mut dyn FnMut(&[TwistSymbol], &FreeMap) -> Result<Option<T>>,
    ) -> Result<Option<T>> {
        if remaining == 0 {
            return test(word, prefix);
        }
        for (symbol, table) in symbols {
            word.push(*symbol);
            let composed = prefix.compose(table)?;
            if let Some(found) = descend(word, &composed, remaining - 1, symbols, test)? {
                return Ok(Some(found));
            }
            word.pop();
        }
        Ok(None)
    }
    for length in 0..=depth {
        let mut word = Vec::new();
        if let Some(found) = descend(&mut word, identity, length, symbols, test)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Enumerates composition words over `modgens` and their inverses in
/// shortlex order (symbols ordered by twist index, plain before inverted)
/// up to the depth bound, returning the first composition `alpha` such that
/// `f . alpha` factors through some proper member of the factor set.
///
/// The composition word `[s1, ..., sj]` denotes `s1 . s2 . ... . sj` with
/// the rightmost symbol applied first.
pub fn search_modular_factorization(
    f: &GroupHom,
    fs: &FactorSet,
    modgens: &[TwistAutomorphism],
    depth: usize,
) -> Result<Option<ModularWitness>> {
    if !f.is_verified() {
        return Err(Error::Precondition("search requires a verified hom".into()));
    }
    if f.domain() != &fs.domain {
        return Err(Error::Precondition("hom and factor set have different domains".into()));
    }
    let alphabet = f.domain().generators();
    for (i, t) in modgens.iter().enumerate() {
        if t.table.domain() != alphabet || t.table.target() != alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "twist {i} is not an endomorphism table of the domain"
            )));
        }
    }
    let symbols = twist_symbols(modgens);
    let mut test = |word: &[TwistSymbol], alpha: &FreeMap| -> Result<Option<ModularWitness>> {
        let candidate = compose_then_f(f, alpha)?;
        for (idx, member) in fs.proper_members() {
            if let Some(witness) = factors_through(&candidate, &member.map)? {
                return Ok(Some(ModularWitness {
                    twist_word: word.to_vec(),
                    alpha: alpha.clone(),
                    member: idx,
                    witness,
                }));
            }
        }
        Ok(None)
    };
    search_words(&symbols, &FreeMap::identity(alphabet), depth, &mut test)
}

/// Outcome of a shortening search.
#[derive(Debug, Clone)]
pub enum ShortenOutcome {
    Shorter {
        hom: GroupHom,
        conjugator: Word,
        twist_word: Vec<TwistSymbol>,
        length: usize,
    },
    /// No equivalent hom in the searched ball is strictly shorter; the ball
    /// is named by its bounds.
    LocallyShort { length: usize, conjugator_bound: usize, twist_depth: usize },
}

/// Searches the equivalence class `i_c . f . alpha` for a strictly shorter
/// hom: twist words in shortlex order (outer), conjugators over the target
/// in shortlex order (inner, up to length `2 |f|`); the first improvement
/// wins.
pub fn shorten_hom(
    f: &GroupHom,
    modgens: &[TwistAutomorphism],
    depth: usize,
) -> Result<ShortenOutcome> {
    if !f.is_verified() {
        return Err(Error::Precondition("shortening requires a verified hom".into()));
    }
    if !f.target().is_free() {
        return Err(Error::Precondition("shortening requires a free target".into()));
    }
    let current = f.length()?;
    let conjugator_bound = 2 * current;
    if current == 0 {
        return Ok(ShortenOutcome::LocallyShort { length: 0, conjugator_bound, twist_depth: depth });
    }
    let domain_alphabet = f.domain().generators();
    let target_alphabet = f.target().generators();
    let conjugators = shortlex_words(target_alphabet, conjugator_bound);
    let symbols = twist_symbols(modgens);
    let mut test = |word: &[TwistSymbol], alpha: &FreeMap| -> Result<Option<ShortenOutcome>> {
        let twisted = (0..domain_alphabet.rank())
            .map(|g| f.apply(&alpha.apply(&Word::generator(domain_alphabet, g)?)?))
            .collect::<Result<Vec<_>>>()?;
        for c in &conjugators {
            let conjugated =
                twisted.iter().map(|w| w.conjugate_by(c)).collect::<Result<Vec<_>>>()?;
            let length = conjugated.iter().map(Word::len).max().unwrap_or(0);
            if length < current {
                let hom = GroupHom::verified(f.domain().clone(), f.target().clone(), conjugated)?;
                return Ok(Some(ShortenOutcome::Shorter {
                    hom,
                    conjugator: c.clone(),
                    twist_word: word.to_vec(),
                    length,
                }));
            }
        }
        Ok(None)
    };
    match search_words(&symbols, &FreeMap::identity(domain_alphabet), depth, &mut test)? {
        Some(outcome) => Ok(outcome),
        None => Ok(ShortenOutcome::LocallyShort { length: current, conjugator_bound, twist_depth: depth }),
    }
}

/// All reduced words over `alphabet` of length at most `max_len`, in
/// shortlex order.
pub fn shortlex_words(
    alphabet: &std::sync::Arc<crate::words::Alphabet>,
    max_len: usize,
) -> Vec<Word> {
    let mut out = vec![Word::identity(alphabet)];
    let mut frontier = out.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            for g in 0..alphabet.rank() {
                for inv in [false, true] {
                    let q = p
                        .mul(&Word::reduce_from(alphabet, [Letter::new(g, inv)]).unwrap())
                        .unwrap();
                    if q.len() > p.len() {
                        next.push(q);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::{bigints, IntMatrix};
    use crate::presentations::{abelian_factorization, HomStatus};
    use crate::splittings::{generalized_dehn_twist, AbelianVertexSplitting};
    use crate::words::Alphabet;
    use std::sync::Arc;

    fn f2() -> Arc<Alphabet> {
        Alphabet::new(vec!["a", "b"]).unwrap()
    }

    fn xy() -> Arc<Alphabet> {
        Alphabet::new(vec!["x", "y"]).unwrap()
    }

    fn w(alphabet: &Arc<Alphabet>, text: &str) -> Word {
        Word::parse(alphabet, text).unwrap()
    }

    fn z2() -> Presentation {
        Presentation::free_abelian(&f2()).unwrap()
    }

    /// Root Z^2, one child adding the relator b (so the child presents Z).
    fn z2_diagram() -> MrDiagram {
        let root = z2();
        let child = QuotientMap::new(root.clone(), vec![w(&f2(), "b")]).unwrap().codomain();
        MrDiagram::new(
            vec![root, child],
            0,
            vec![DiagramEdge { parent: 0, child: 1, added: vec![w(&f2(), "b")] }],
            true,
        )
        .unwrap()
    }

    fn transvection_twists() -> Vec<TwistAutomorphism> {
        let total = z2();
        let line_a =
            AbelianVertexSplitting::new(total.clone(), vec![0, 1], vec![], vec![bigints(&[1, 0])])
                .unwrap();
        let line_b =
            AbelianVertexSplitting::new(total, vec![0, 1], vec![], vec![bigints(&[0, 1])]).unwrap();
        // a -> a, b -> a b   and   a -> a b, b -> b (as column actions).
        let t1 =
            generalized_dehn_twist(&line_a, &IntMatrix::from_i64_rows(&[&[1, 1], &[0, 1]])).unwrap();
        let t2 =
            generalized_dehn_twist(&line_b, &IntMatrix::from_i64_rows(&[&[1, 0], &[1, 1]])).unwrap();
        vec![t1, t2]
    }

    fn matrix_to_endo(pres: &Presentation, m: &IntMatrix) -> FreeMap {
        let alphabet = pres.generators();
        let images = (0..alphabet.rank())
            .map(|j| {
                let mut acc = Word::identity(alphabet);
                for i in 0..alphabet.rank() {
                    let e: i64 = m.get(i, j).clone().try_into().unwrap();
                    acc = acc.mul(&Word::generator(alphabet, i).unwrap().pow(e)).unwrap();
                }
                acc
            })
            .collect();
        FreeMap::new(alphabet, alphabet, images).unwrap()
    }

    #[test]
    fn trivial_diagram_verifies_with_identity_witness() {
        let free = Presentation::free(&f2());
        let diagram = MrDiagram::new(vec![free.clone()], 0, vec![], true).unwrap();
        let target = Presentation::free(&xy());
        let f =
            GroupHom::verified(free, target, vec![w(&xy(), "x"), w(&xy(), "y x")]).unwrap();
        let witness =
            BranchWitness { branch: vec![0], automorphisms: vec![], terminal: f.clone() };
        assert!(verify_mr_factoring(&f, &diagram, &witness).unwrap().ok);
    }

    #[test]
    fn z2_pipeline_verifies_with_the_inverse_factorization_matrix() {
        let diagram = z2_diagram();
        let root = diagram.nodes()[0].clone();
        let leaf = diagram.nodes()[1].clone();
        let target = Presentation::free(&xy());
        let root_word = w(&xy(), "x y");
        let f = GroupHom::verified(
            root.clone(),
            target.clone(),
            vec![root_word.pow(3), root_word.pow(5)],
        )
        .unwrap();
        let fact = abelian_factorization(&f).unwrap();
        // f . alpha = terminal . q, so the branch automorphism is alpha^-1.
        let alpha_inv = fact.alpha.inverse_unimodular().unwrap();
        let terminal =
            GroupHom::verified(leaf, target, vec![root_word, Word::identity(&xy())]).unwrap();
        let witness = BranchWitness {
            branch: vec![0, 1],
            automorphisms: vec![matrix_to_endo(&root, &alpha_inv)],
            terminal,
        };
        let report = verify_mr_factoring(&f, &diagram, &witness).unwrap();
        assert!(report.ok, "stages: {:?}", report.stages);
    }

    #[test]
    fn z2_pipeline_fails_with_the_identity_automorphism() {
        let diagram = z2_diagram();
        let root = diagram.nodes()[0].clone();
        let leaf = diagram.nodes()[1].clone();
        let target = Presentation::free(&xy());
        let root_word = w(&xy(), "x y");
        let f = GroupHom::verified(
            root.clone(),
            target.clone(),
            vec![root_word.pow(3), root_word.pow(5)],
        )
        .unwrap();
        let terminal =
            GroupHom::verified(leaf, target, vec![root_word, Word::identity(&xy())]).unwrap();
        let witness = BranchWitness {
            branch: vec![0, 1],
            automorphisms: vec![FreeMap::identity(root.generators())],
            terminal,
        };
        assert!(!verify_mr_factoring(&f, &diagram, &witness).unwrap().ok);
    }

    #[test]
    fn non_limit_roots_require_identity_automorphisms() {
        let root = z2();
        let child = QuotientMap::new(root.clone(), vec![w(&f2(), "b")]).unwrap().codomain();
        let diagram = MrDiagram::new(
            vec![root.clone(), child.clone()],
            0,
            vec![DiagramEdge { parent: 0, child: 1, added: vec![w(&f2(), "b")] }],
            false,
        )
        .unwrap();
        let target = Presentation::free(&xy());
        let f = GroupHom::verified(
            root.clone(),
            target.clone(),
            vec![w(&xy(), "x"), Word::identity(&xy())],
        )
        .unwrap();
        let terminal =
            GroupHom::verified(child, target, vec![w(&xy(), "x"), Word::identity(&xy())])
                .unwrap();
        let twist = FreeMap::new(
            root.generators(),
            root.generators(),
            vec![w(&f2(), "a b"), w(&f2(), "b")],
        )
        .unwrap();
        let witness = BranchWitness {
            branch: vec![0, 1],
            automorphisms: vec![twist],
            terminal: terminal.clone(),
        };
        assert!(!verify_mr_factoring(&f, &diagram, &witness).unwrap().ok);
        let witness = BranchWitness {
            branch: vec![0, 1],
            automorphisms: vec![FreeMap::identity(root.generators())],
            terminal,
        };
        assert!(verify_mr_factoring(&f, &diagram, &witness).unwrap().ok);
    }

    #[test]
    fn diagram_rejects_non_free_leaves() {
        assert!(MrDiagram::new(vec![z2()], 0, vec![], true).is_err());
    }

    #[test]
    fn factor_set_assembly() {
        let free = Presentation::free(&f2());
        let fs = assemble_factor_set(&free, &[w(&f2(), "a b a^-1 b^-1")]).unwrap();
        assert_eq!(fs.members.len(), 2);
        assert_eq!(fs.members[0].name, "abelianization");
        assert!(matches!(fs.members[0].properness, Properness::Certified { .. }));
        assert!(matches!(fs.members[1].properness, Properness::Certified { .. }));

        // For Z^2 the abelianization member is an isomorphism, hence not a
        // proper candidate.
        let fs = assemble_factor_set(&z2(), &[]).unwrap();
        assert_eq!(fs.members.len(), 1);
        assert_eq!(fs.members[0].properness, Properness::NotProper);
        assert_eq!(fs.proper_members().count(), 0);

        assert!(assemble_factor_set(&z2(), &[Word::identity(&f2())]).is_err());
    }

    #[test]
    fn factor_set_for_surface_group() {
        let surface = crate::presentations::surface_family(2, true).unwrap().0;
        let a1 = Word::generator(surface.generators(), 0).unwrap();
        let fs = assemble_factor_set(&surface, &[a1]).unwrap();
        assert_eq!(fs.members.len(), 2);
        // Properness of the one-relator quotient is undecidable there.
        assert!(matches!(fs.members[1].properness, Properness::Asserted { .. }));
    }

    #[test]
    fn modular_search_finds_the_euclidean_descent() {
        let domain = z2();
        let target = Presentation::free(&xy());
        let root = w(&xy(), "x y");
        let f =
            GroupHom::verified(domain.clone(), target, vec![root.pow(3), root.pow(5)]).unwrap();
        let fs = assemble_factor_set(&domain, &[w(&f2(), "b")]).unwrap();
        let twists = transvection_twists();
        let found = search_modular_factorization(&f, &fs, &twists, 8).unwrap().unwrap();
        assert!(found.twist_word.len() <= 8);
        assert_eq!(fs.members[found.member].name, "quotient[0] by `b`");
        // Soundness: recomposition kills b and factors through the member.
        let candidate = compose_then_f(&f, &found.alpha).unwrap();
        assert!(candidate.apply(&w(&f2(), "b")).unwrap().is_empty());
        assert!(factors_through(&candidate, &fs.members[found.member].map).unwrap().is_some());
        assert_eq!(found.witness.status(), HomStatus::Verified);
        // Determinism: a second run returns the identical witness.
        let again = search_modular_factorization(&f, &fs, &twists, 8).unwrap().unwrap();
        assert_eq!(again.twist_word, found.twist_word);
        assert_eq!(again.member, found.member);
    }

    #[test]
    fn modular_search_depth_zero_hit() {
        let domain = z2();
        let target = Presentation::free(&xy());
        let f = GroupHom::verified(
            domain.clone(),
            target,
            vec![w(&xy(), "x"), Word::identity(&xy())],
        )
        .unwrap();
        let fs = assemble_factor_set(&domain, &[w(&f2(), "b")]).unwrap();
        let found =
            search_modular_factorization(&f, &fs, &transvection_twists(), 4).unwrap().unwrap();
        assert!(found.twist_word.is_empty());
    }

    #[test]
    fn modular_search_exhausts_on_unkillable_relators() {
        let domain = Presentation::free(&f2());
        let target = Presentation::free(&xy());
        let f =
            GroupHom::verified(domain.clone(), target, vec![w(&xy(), "x"), w(&xy(), "y")]).unwrap();
        // The identity twist fixes a, f(a) = x never dies; and f's images do
        // not commute, so the abelianization member never matches either.
        let fs = assemble_factor_set(&domain, &[w(&f2(), "a")]).unwrap();
        let identity_only =
            vec![crate::splittings::inner_twist(&domain, &Word::identity(&f2())).unwrap()];
        assert!(search_modular_factorization(&f, &fs, &identity_only, 3).unwrap().is_none());
    }

    #[test]
    fn shorten_strips_a_common_conjugator() {
        let domain = Presentation::free(&f2());
        let target = Presentation::free(&xy());
        let f = GroupHom::verified(
            domain,
            target,
            vec![w(&xy(), "x y x^-1"), w(&xy(), "x y^-1 x^-1")],
        )
        .unwrap();
        let ShortenOutcome::Shorter { hom, conjugator, length, .. } =
            shorten_hom(&f, &[], 0).unwrap()
        else {
            panic!("conjugation by x^-1 must shorten");
        };
        assert_eq!(length, 1);
        assert_eq!(conjugator, w(&xy(), "x^-1"));
        assert_eq!(hom.images(), &[w(&xy(), "y"), w(&xy(), "y^-1")]);
    }

    #[test]
    fn shorten_reports_locally_short_on_length_one_images() {
        let domain = Presentation::free(&f2());
        let target = Presentation::free(&xy());
        let f = GroupHom::verified(domain, target, vec![w(&xy(), "x"), w(&xy(), "y")]).unwrap();
        let ShortenOutcome::LocallyShort { length, conjugator_bound, twist_depth } =
            shorten_hom(&f, &[], 2).unwrap()
        else {
            panic!("length-1 images cannot shrink");
        };
        assert_eq!(length, 1);
        assert_eq!(conjugator_bound, 2);
        assert_eq!(twist_depth, 2);
    }

    #[test]
    fn shorten_untwists_a_double_twist() {
        // Images of c, d conjugated by the amalgam word: the inverse twist
        // recovers the short retraction.
        let f2 = f2();
        let word = w(&f2, "a b a^-1 b^-1");
        let double =
            crate::splittings::FreeDouble::new(&f2, vec!["c".into(), "d".into()], &word).unwrap();
        let twist =
            double.dehn_twist(double.amalgam_word(crate::splittings::Side::Left)).unwrap();
        let retraction = double.retraction().unwrap();
        let total = double.total().generators();
        let twisted_images = (0..4)
            .map(|g| {
                retraction
                    .apply(&twist.apply(&Word::generator(total, g).unwrap()).unwrap())
                    .unwrap()
            })
            .collect::<Vec<_>>();
        let f = GroupHom::verified(
            double.total().clone(),
            retraction.target().clone(),
            twisted_images,
        )
        .unwrap();
        let before = f.length().unwrap();
        assert!(before > 1);
        let ShortenOutcome::Shorter { length, .. } = shorten_hom(&f, &[twist], 2).unwrap() else {
            panic!("untwisting must shorten");
        };
        assert!(length < before);
    }

    #[test]
    fn shorten_never_returns_longer_and_iteration_terminates() {
        let domain = Presentation::free(&f2());
        let target = Presentation::free(&xy());
        let mut f = GroupHom::verified(
            domain,
            target,
            vec![w(&xy(), "y x y x^-1 y^-1"), w(&xy(), "y x^2 y^-1")],
        )
        .unwrap();
        let mut last = f.length().unwrap();
        loop {
            match shorten_hom(&f, &[], 1).unwrap() {
                ShortenOutcome::Shorter { hom, length, .. } => {
                    assert!(length < last);
                    last = length;
                    f = hom;
                }
                ShortenOutcome::LocallyShort { length, .. } => {
                    assert_eq!(length, last);
                    break;
                }
            }
        }
    }

    #[test]
    fn corrupting_any_single_stage_fails_verification() {
        let diagram = z2_diagram();
        let root = diagram.nodes()[0].clone();
        let leaf = diagram.nodes()[1].clone();
        let target = Presentation::free(&xy());
        let root_word = w(&xy(), "x y");
        let f = GroupHom::verified(
            root.clone(),
            target.clone(),
            vec![root_word.pow(3), root_word.pow(5)],
        )
        .unwrap();
        let fact = abelian_factorization(&f).unwrap();
        let alpha_inv = fact.alpha.inverse_unimodular().unwrap();
        let terminal = GroupHom::verified(
            leaf.clone(),
            target.clone(),
            vec![root_word.clone(), Word::identity(&xy())],
        )
        .unwrap();
        // Corrupt the branch automorphism image of `a`.
        let alpha_map = matrix_to_endo(&root, &alpha_inv);
        let mut bad_images = alpha_map.images().to_vec();
        bad_images[0] = bad_images[0].mul(&w(&f2(), "b")).unwrap();
        let bad_alpha = FreeMap::new(root.generators(), root.generators(), bad_images).unwrap();
        let witness = BranchWitness {
            branch: vec![0, 1],
            automorphisms: vec![bad_alpha],
            terminal: terminal.clone(),
        };
        assert!(!verify_mr_factoring(&f, &diagram, &witness).unwrap().ok);
        // Corrupt the terminal image of `a`.
        let bad_terminal = GroupHom::verified(
            leaf,
            target,
            vec![root_word.mul(&w(&xy(), "x")).unwrap(), Word::identity(&xy())],
        )
        .unwrap();
        let witness = BranchWitness {
            branch: vec![0, 1],
            automorphisms: vec![matrix_to_endo(&root, &alpha_inv)],
            terminal: bad_terminal,
        };
        assert!(!verify_mr_factoring(&f, &diagram, &witness).unwrap().ok);
    }
}
