//! Graph-of-groups decompositions with abelian edge groups, Dehn twist
//! automorphisms, and exact normal forms in doubles of free groups.
//!
//! A `Gad` is anchored to a concrete total presentation: vertex and edge
//! data are markings into it. One-edged splittings (amalgam or HNN) carry
//! the data needed to build Dehn twists; abelian-vertex splittings support
//! the unimodular twists that fix the peripheral subgroup.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::intlinalg::{saturation, IntMatrix, Lattice, Saturation};
use crate::presentations::{HomStatus, Presentation};
use crate::words::{cyclically_equal, Alphabet, FreeMap, Word};

/// Vertex kinds of a GAD.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexKind {
    /// Surface vertex; must satisfy chi <= -2 or be a once-punctured torus.
    Qh { genus: u32, boundary: u32, orientable: bool },
    /// Non-cyclic abelian vertex of the given rank.
    Abelian { rank: usize },
    Rigid,
}

impl VertexKind {
    pub fn euler_characteristic(&self) -> Option<i64> {
        match *self {
            VertexKind::Qh { genus, boundary, orientable } => Some(if orientable {
                2 - 2 * genus as i64 - boundary as i64
            } else {
                2 - genus as i64 - boundary as i64
            }),
            _ => None,
        }
    }
}

/// A vertex group with its marking into the total group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadVertex {
    pub name: String,
    pub kind: VertexKind,
    /// Abstract generator names of the vertex group.
    pub generators: Vec<String>,
    /// One total-group word per abstract generator.
    pub marking: Vec<Word>,
}

impl GadVertex {
    /// The abstract alphabet of this vertex group.
    pub fn alphabet(&self) -> Result<Arc<Alphabet>> {
        Alphabet::new(self.generators.clone())
    }
}

/// Image of an edge generator inside an endpoint vertex group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeImage {
    /// A word over the endpoint's abstract generators (QH or rigid).
    Word(Word),
    /// An integer tuple into an abelian endpoint.
    Tuple(Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadEdge {
    pub from: usize,
    pub to: usize,
    pub generators: Vec<String>,
    /// One total-group word per edge generator.
    pub marking: Vec<Word>,
    pub into_from: Vec<EdgeImage>,
    pub into_to: Vec<EdgeImage>,
}

/// A graph-of-groups decomposition with abelian edge groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gad {
    pub total: Presentation,
    pub vertices: Vec<GadVertex>,
    pub edges: Vec<GadEdge>,
}

impl Gad {
    pub fn new(total: Presentation, vertices: Vec<GadVertex>, edges: Vec<GadEdge>) -> Result<Gad> {
        let gad = Gad { total, vertices, edges };
        gad.validate()?;
        Ok(gad)
    }

    fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::Invalid("a GAD needs at least one vertex".into()));
        }
        for v in &self.vertices {
            if v.marking.len() != v.generators.len() {
                return Err(Error::Arity { expected: v.generators.len(), got: v.marking.len() });
            }
            for w in &v.marking {
                if w.alphabet() != self.total.generators() {
                    return Err(Error::AlphabetMismatch(format!(
                        "marking of vertex {} is not over the total group",
                        v.name
                    )));
                }
            }
            match v.kind {
                VertexKind::Abelian { rank } => {
                    if rank < 2 {
                        return Err(Error::Invalid(format!(
                            "abelian vertex {} must be non-cyclic (rank >= 2)",
                            v.name
                        )));
                    }
                    if v.generators.len() != rank {
                        return Err(Error::Arity { expected: rank, got: v.generators.len() });
                    }
                }
                VertexKind::Qh { genus, boundary, orientable } => {
                    let chi = v.kind.euler_characteristic().unwrap();
                    let punctured_torus = orientable && genus == 1 && boundary == 1;
                    if chi > -2 && !punctured_torus {
                        return Err(Error::Invalid(format!(
                            "QH vertex {} must have chi <= -2 or be a once-punctured torus",
                            v.name
                        )));
                    }
                }
                VertexKind::Rigid => {}
            }
        }
        for e in &self.edges {
            if e.from >= self.vertices.len() || e.to >= self.vertices.len() {
                return Err(Error::Invalid("edge endpoint out of range".into()));
            }
            if e.marking.len() != e.generators.len() {
                return Err(Error::Arity { expected: e.generators.len(), got: e.marking.len() });
            }
            for w in &e.marking {
                if w.alphabet() != self.total.generators() {
                    return Err(Error::AlphabetMismatch("edge marking not over the total group".into()));
                }
            }
            let both_abelian = matches!(self.vertices[e.from].kind, VertexKind::Abelian { .. })
                && matches!(self.vertices[e.to].kind, VertexKind::Abelian { .. });
            if e.generators.len() != 1 && !both_abelian {
                return Err(Error::Invalid(
                    "multi-generator edges require abelian vertices on both ends".into(),
                ));
            }
            for (inclusions, vertex) in [(&e.into_from, e.from), (&e.into_to, e.to)] {
                if inclusions.len() != e.generators.len() {
                    return Err(Error::Arity { expected: e.generators.len(), got: inclusions.len() });
                }
                for image in inclusions {
                    match (&self.vertices[vertex].kind, image) {
                        (VertexKind::Abelian { rank }, EdgeImage::Tuple(t)) => {
                            if t.len() != *rank {
                                return Err(Error::Arity { expected: *rank, got: t.len() });
                            }
                        }
                        (VertexKind::Abelian { .. }, EdgeImage::Word(_)) => {
                            return Err(Error::Invalid(
                                "edge image into an abelian vertex must be a tuple".into(),
                            ));
                        }
                        (_, EdgeImage::Word(w)) => {
                            let vertex_alphabet = self.vertices[vertex].alphabet()?;
                            if w.alphabet() != &vertex_alphabet {
                                return Err(Error::AlphabetMismatch(
                                    "edge image not over the endpoint's generators".into(),
                                ));
                            }
                        }
                        (_, EdgeImage::Tuple(_)) => {
                            return Err(Error::Invalid(
                                "tuple edge image into a non-abelian vertex".into(),
                            ));
                        }
                    }
                }
            }
        }
        // QH boundary components correspond to incident edge ends.
        for (vi, v) in self.vertices.iter().enumerate() {
            if let VertexKind::Qh { boundary, .. } = v.kind {
                let ends: usize = self
                    .edges
                    .iter()
                    .map(|e| usize::from(e.from == vi) + usize::from(e.to == vi))
                    .sum();
                if ends != boundary as usize {
                    return Err(Error::Invalid(format!(
                        "QH vertex {} has {ends} incident edge ends but {boundary} boundary components",
                        v.name
                    )));
                }
            }
        }
        // Connectivity.
        let mut reached = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (x, y) in [(e.from, e.to), (e.to, e.from)] {
                    if x == v && !reached[y] {
                        reached[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        if !reached.iter().all(|&r| r) {
            return Err(Error::Invalid("GAD graph is not connected".into()));
        }
        Ok(())
    }

    /// Incident edge tuples at an abelian vertex (loops contribute both
    /// ends); this is the generating set of `P(A)`.
    pub fn incident_tuples(&self, vertex: usize) -> Result<Vec<Vec<BigInt>>> {
        let VertexKind::Abelian { .. } = self.vertices[vertex].kind else {
            return Err(Error::Precondition("vertex is not abelian".into()));
        };
        let mut tuples = Vec::new();
        for e in &self.edges {
            if e.from == vertex {
                for image in &e.into_from {
                    if let EdgeImage::Tuple(t) = image {
                        tuples.push(t.clone());
                    }
                }
            }
            if e.to == vertex {
                for image in &e.into_to {
                    if let EdgeImage::Tuple(t) = image {
                        tuples.push(t.clone());
                    }
                }
            }
        }
        Ok(tuples)
    }

    /// The peripheral subgroup of an abelian vertex: saturation of the span
    /// of incident edge tuples, with the finite index of that span inside it.
    pub fn peripheral_closure(&self, vertex: usize) -> Result<Saturation> {
        let VertexKind::Abelian { rank } = self.vertices[vertex].kind else {
            return Err(Error::Precondition("peripheral closure needs an abelian vertex".into()));
        };
        let tuples = self.incident_tuples(vertex)?;
        let lattice = Lattice::new(rank, tuples)?;
        Ok(saturation(&lattice))
    }
}

/// One-edged splittings: amalgams and HNN extensions over a cyclic edge
/// group, anchored to a total presentation carrying the defining relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OneEdgeSplitting {
    Amalgam(Amalgam),
    Hnn(Hnn),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam {
    pub total: Presentation,
    pub left_gens: Vec<usize>,
    pub right_gens: Vec<usize>,
    /// Edge word in the left side.
    pub edge_left: Word,
    /// The identified edge word in the right side.
    pub edge_right: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hnn {
    pub total: Presentation,
    pub base_gens: Vec<usize>,
    pub stable: usize,
    pub edge: Word,
    /// The partner `phi(edge)`, so the relation reads `t edge t^-1 = partner`.
    pub partner: Word,
}

impl OneEdgeSplitting {
    pub fn amalgam(
        total: Presentation,
        left_gens: Vec<usize>,
        right_gens: Vec<usize>,
        edge_left: Word,
        edge_right: Word,
    ) -> Result<OneEdgeSplitting> {
        let n = total.generators().rank();
        let mut seen = vec![false; n];
        for &g in left_gens.iter().chain(&right_gens) {
            if g >= n || seen[g] {
                return Err(Error::Invalid("sides must partition the generators".into()));
            }
            seen[g] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Invalid("sides must cover every generator".into()));
        }
        if edge_left.is_empty() || edge_right.is_empty() {
            return Err(Error::Invalid("edge words must be nontrivial".into()));
        }
        if !edge_left.supported_on(&left_gens) || !edge_right.supported_on(&right_gens) {
            return Err(Error::Invalid("edge words must live on their own sides".into()));
        }
        let relation = edge_left.mul(&edge_right.inverse())?;
        if !total.relators().iter().any(|r| cyclically_equal(r, &relation)) {
            return Err(Error::Invalid(
                "the identification relation is not among the total group's relators".into(),
            ));
        }
        Ok(OneEdgeSplitting::Amalgam(Amalgam { total, left_gens, right_gens, edge_left, edge_right }))
    }

    pub fn hnn(
        total: Presentation,
        base_gens: Vec<usize>,
        stable: usize,
        edge: Word,
        partner: Word,
    ) -> Result<OneEdgeSplitting> {
        let n = total.generators().rank();
        let mut seen = vec![false; n];
        for &g in base_gens.iter().chain([&stable]) {
            if g >= n || seen[g] {
                return Err(Error::Invalid(
                    "base and stable letter must partition the generators".into(),
                ));
            }
            seen[g] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Invalid("base plus stable letter must cover every generator".into()));
        }
        if edge.is_empty() || partner.is_empty() {
            return Err(Error::Invalid("edge words must be nontrivial".into()));
        }
        if !edge.supported_on(&base_gens) || !partner.supported_on(&base_gens) {
            return Err(Error::Invalid("edge and partner must be supported on the base".into()));
        }
        let t = Word::generator(total.generators(), stable)?;
        let relation = t.mul(&edge)?.mul(&t.inverse())?.mul(&partner.inverse())?;
        if !total.relators().iter().any(|r| cyclically_equal(r, &relation)) {
            return Err(Error::Invalid(
                "the HNN relation is not among the total group's relators".into(),
            ));
        }
        Ok(OneEdgeSplitting::Hnn(Hnn { total, base_gens, stable, edge, partner }))
    }

    pub fn total(&self) -> &Presentation {
        match self {
            OneEdgeSplitting::Amalgam(a) => &a.total,
            OneEdgeSplitting::Hnn(h) => &h.total,
        }
    }
}

/// A side of a splitting is marked free when no relator of the total group
/// is fully supported on it.
fn side_is_free(total: &Presentation, side: &[usize]) -> bool {
    !total.relators().iter().any(|r| r.supported_on(side))
}

/// A side is visibly abelian when every pairwise commutator of its
/// generators appears among the total relators.
fn side_is_visibly_abelian(total: &Presentation, side: &[usize]) -> bool {
    let gens = total.generators();
    for (i, &a) in side.iter().enumerate() {
        for &b in &side[i + 1..] {
            let comm = Word::generator(gens, a)
                .and_then(|ga| Word::generator(gens, b).and_then(|gb| ga.commutator(&gb)))
                .expect("indices in range");
            if !total.relators().iter().any(|r| cyclically_equal(r, &comm)) {
                return false;
            }
        }
    }
    true
}

/// Exponent `k` with `z = e^k`, if one exists.
pub fn power_exponent(z: &Word, e: &Word) -> Option<i64> {
    if z.is_empty() {
        return Some(0);
    }
    if e.is_empty() {
        return None;
    }
    for k in 1..=(z.len() as i64) {
        for sign in [k, -k] {
            if &e.pow(sign) == z {
                return Some(sign);
            }
        }
        if e.pow(k).len() > z.len() {
            break;
        }
    }
    None
}

/// What kind of modular move a twist automorphism realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistKind {
    Amalgam,
    Hnn,
    Inner,
    Unimodular,
}

/// An automorphism of the total group given by its generator-image table,
/// together with the table of its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistAutomorphism {
    pub kind: TwistKind,
    pub twisting: Word,
    pub table: FreeMap,
    pub inverse_table: FreeMap,
    pub status: HomStatus,
}

impl TwistAutomorphism {
    pub fn apply(&self, w: &Word) -> Result<Word> {
        self.table.apply(w)
    }

    pub fn inverse(&self) -> TwistAutomorphism {
        TwistAutomorphism {
            kind: self.kind,
            twisting: self.twisting.inverse(),
            table: self.inverse_table.clone(),
            inverse_table: self.table.clone(),
            status: self.status,
        }
    }
}

/// The inner automorphism `g -> c g c^-1` with its full generator table.
pub fn inner_twist(total: &Presentation, c: &Word) -> Result<TwistAutomorphism> {
    let alphabet = total.generators();
    if c.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch("conjugator not over the total group".into()));
    }
    let conj_table = |z: &Word| -> Result<FreeMap> {
        let images = (0..alphabet.rank())
            .map(|g| Word::generator(alphabet, g).and_then(|w| w.conjugate_by(z)))
            .collect::<Result<Vec<_>>>()?;
        FreeMap::new(alphabet, alphabet, images)
    };
    Ok(TwistAutomorphism {
        kind: TwistKind::Inner,
        twisting: c.clone(),
        table: conj_table(c)?,
        inverse_table: conj_table(&c.inverse())?,
        status: HomStatus::Verified,
    })
}

/// Builds the Dehn twist in `z` along a one-edged splitting.
///
/// Amalgam: generators of the left side are fixed and the right side is
/// conjugated by `z`; `z` must centralize the edge group on the right. HNN:
/// the base is fixed and the stable letter maps to `t z`; `z` must lie in
/// the base and centralize the edge word. Centralizer membership is exact
/// when `z` is a power of the edge word or the relevant side is marked free
/// or visibly abelian; otherwise the necessary abelianized check runs and
/// the twist is recorded as asserted.
pub fn dehn_twist(splitting: &OneEdgeSplitting, z: &Word) -> Result<TwistAutomorphism> {
    let total = splitting.total();
    let alphabet = total.generators();
    if z.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch("twisting element not over the total group".into()));
    }
    match splitting {
        OneEdgeSplitting::Amalgam(a) => {
            let status = centralizer_status(total, z, &a.edge_left, &a.edge_right, &a.right_gens)?;
            let build = |zz: &Word| -> Result<FreeMap> {
                let images = (0..alphabet.rank())
                    .map(|g| {
                        let gen = Word::generator(alphabet, g)?;
                        if a.right_gens.contains(&g) {
                            gen.conjugate_by(zz)
                        } else {
                            Ok(gen)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                FreeMap::new(alphabet, alphabet, images)
            };
            Ok(TwistAutomorphism {
                kind: TwistKind::Amalgam,
                twisting: z.clone(),
                table: build(z)?,
                inverse_table: build(&z.inverse())?,
                status,
            })
        }
        OneEdgeSplitting::Hnn(h) => {
            if !z.supported_on(&h.base_gens) {
                return Err(Error::Precondition(
                    "HNN twisting element must lie in the base group".into(),
                ));
            }
            let status = centralizer_status(total, z, &h.edge, &h.edge, &h.base_gens)?;
            let build = |zz: &Word| -> Result<FreeMap> {
                let images = (0..alphabet.rank())
                    .map(|g| {
                        let gen = Word::generator(alphabet, g)?;
                        if g == h.stable {
                            gen.mul(zz)
                        } else {
                            Ok(gen)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                FreeMap::new(alphabet, alphabet, images)
            };
            Ok(TwistAutomorphism {
                kind: TwistKind::Hnn,
                twisting: z.clone(),
                table: build(z)?,
                inverse_table: build(&z.inverse())?,
                status,
            })
        }
    }
}

/// Decides how strongly `z` is known to centralize the edge group.
fn centralizer_status(
    total: &Presentation,
    z: &Word,
    edge_left: &Word,
    edge_side: &Word,
    side: &[usize],
) -> Result<HomStatus> {
    // Powers of the identified edge word centralize the edge group in any
    // quotient.
    if power_exponent(z, edge_left).is_some() || power_exponent(z, edge_side).is_some() {
        return Ok(HomStatus::Verified);
    }
    if !z.supported_on(side) {
        return Err(Error::Precondition(
            "twisting element must lie on the conjugated side or be a power of the edge word".into(),
        ));
    }
    if side_is_free(total, side) {
        if z.commutator(edge_side)?.is_empty() {
            Ok(HomStatus::Verified)
        } else {
            Err(Error::Precondition(format!(
                "`{z}` does not centralize the edge word `{edge_side}` in the free side"
            )))
        }
    } else if side_is_visibly_abelian(total, side) {
        Ok(HomStatus::Verified)
    } else {
        // Necessary condition in the abelianization; commutators die there,
        // so this cannot refute. Record the twist as asserted.
        if !z.commutator(edge_side)?.abelianizes_to_zero() {
            return Err(Error::Precondition("abelianized centralizer check failed".into()));
        }
        Ok(HomStatus::Asserted)
    }
}

/// A one-edged splitting collapsed at an abelian vertex: the abelian side,
/// the fixed side, and the incident edge tuples generating `P(A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianVertexSplitting {
    pub total: Presentation,
    pub abelian_gens: Vec<usize>,
    pub other_gens: Vec<usize>,
    pub edge_tuples: Vec<Vec<BigInt>>,
}

impl AbelianVertexSplitting {
    pub fn new(
        total: Presentation,
        abelian_gens: Vec<usize>,
        other_gens: Vec<usize>,
        edge_tuples: Vec<Vec<BigInt>>,
    ) -> Result<AbelianVertexSplitting> {
        let n = total.generators().rank();
        let mut seen = vec![false; n];
        for &g in abelian_gens.iter().chain(&other_gens) {
            if g >= n || seen[g] {
                return Err(Error::Invalid("sides must partition the generators".into()));
            }
            seen[g] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Invalid("sides must cover every generator".into()));
        }
        if !side_is_visibly_abelian(&total, &abelian_gens) {
            return Err(Error::Invalid(
                "the abelian side must commute visibly in the total presentation".into(),
            ));
        }
        for t in &edge_tuples {
            if t.len() != abelian_gens.len() {
                return Err(Error::Arity { expected: abelian_gens.len(), got: t.len() });
            }
        }
        Ok(AbelianVertexSplitting { total, abelian_gens, other_gens, edge_tuples })
    }

    pub fn peripheral_closure(&self) -> Result<Saturation> {
        let lattice = Lattice::new(self.abelian_gens.len(), self.edge_tuples.clone())?;
        Ok(saturation(&lattice))
    }
}

/// A generalized Dehn twist: the abelian side is transformed by `m`, which
/// must fix the peripheral subgroup pointwise and induce a determinant-1
/// automorphism of the quotient; everything else is fixed. The inverse is
/// the twist by the inverse matrix.
pub fn generalized_dehn_twist(
    splitting: &AbelianVertexSplitting,
    m: &IntMatrix,
) -> Result<TwistAutomorphism> {
    let r = splitting.abelian_gens.len();
    if m.nrows() != r || m.ncols() != r {
        return Err(Error::Arity { expected: r, got: m.nrows() });
    }
    let sat = splitting.peripheral_closure()?;
    for b in &sat.basis {
        if &m.mul_vec(b)? != b {
            return Err(Error::Precondition(
                "matrix must fix the peripheral subgroup pointwise".into(),
            ));
        }
    }
    // Change basis to (peripheral basis | complement); the induced matrix on
    // the quotient is the lower-right block.
    let s = sat.basis.len();
    let mut t = IntMatrix::zero(r, r);
    for (j, col) in sat.basis.iter().chain(&sat.complement).enumerate() {
        for i in 0..r {
            t.set(i, j, col[i].clone());
        }
    }
    let t_inv = t
        .inverse_unimodular()
        .ok_or_else(|| Error::Invalid("saturation basis is not unimodular".into()))?;
    let m_prime = t_inv.mul(m)?.mul(&t)?;
    let mut quotient = IntMatrix::identity(r - s);
    for i in s..r {
        for j in s..r {
            quotient.set(i - s, j - s, m_prime.get(i, j).clone());
        }
    }
    if r > s && quotient.det()? != BigInt::one() {
        return Err(Error::Precondition(
            "induced automorphism of the quotient must have determinant 1".into(),
        ));
    }
    let inverse = m
        .inverse_unimodular()
        .ok_or_else(|| Error::Precondition("matrix is not unimodular".into()))?;
    let alphabet = splitting.total.generators().clone();
    let build = |mat: &IntMatrix| -> Result<FreeMap> {
        let images = (0..alphabet.rank())
            .map(|g| match splitting.abelian_gens.iter().position(|&a| a == g) {
                Some(j) => {
                    let mut acc = Word::identity(&alphabet);
                    for (i, &gen) in splitting.abelian_gens.iter().enumerate() {
                        let e: i64 = mat.get(i, j).clone().try_into().map_err(|_| {
                            Error::Invalid("matrix entry too large for a word exponent".into())
                        })?;
                        acc = acc.mul(&Word::generator(&alphabet, gen)?.pow(e))?;
                    }
                    Ok(acc)
                }
                None => Word::generator(&alphabet, g),
            })
            .collect::<Result<Vec<_>>>()?;
        FreeMap::new(&alphabet, &alphabet, images)
    };
    Ok(TwistAutomorphism {
        kind: TwistKind::Unimodular,
        twisting: Word::identity(&alphabet),
        table: build(m)?,
        inverse_table: build(&inverse)?,
        status: HomStatus::Verified,
    })
}

/// Which factor of a double a syllable lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The double of a free group along the cyclic subgroup of a primitive word:
/// `F *_<w> F` with presentation `< L, R | w(L) w(R)^-1 >`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeDouble {
    total: Presentation,
    left_gens: Vec<usize>,
    right_gens: Vec<usize>,
    w_left: Word,
    w_right: Word,
}

impl FreeDouble {
    /// Builds the double of the free group on `left` along `w`. The right
    /// copy uses `right_names` (same rank); `w` must be primitive.
    pub fn new(left: &Arc<Alphabet>, right_names: Vec<String>, w: &Word) -> Result<FreeDouble> {
        if right_names.len() != left.rank() {
            return Err(Error::Arity { expected: left.rank(), got: right_names.len() });
        }
        if w.alphabet() != left {
            return Err(Error::AlphabetMismatch("amalgam word not over the left factor".into()));
        }
        if w.is_empty() {
            return Err(Error::EmptyWord);
        }
        let (_, exponent) = w.primitive_root()?;
        if exponent != 1 {
            return Err(Error::Precondition(format!(
                "amalgam word `{w}` is a proper power (exponent {exponent})"
            )));
        }
        let rank = left.rank();
        let mut names: Vec<String> = left.names().to_vec();
        names.extend(right_names);
        let total_alphabet = Alphabet::new(names)?;
        let embed = |shift: usize, word: &Word| -> Result<Word> {
            Word::reduce_from(
                &total_alphabet,
                word.letters().iter().map(|l| crate::words::Letter::new(l.gen + shift, l.inverse)),
            )
        };
        let w_left = embed(0, w)?;
        let w_right = embed(rank, w)?;
        let relator = w_left.mul(&w_right.inverse())?;
        let total = Presentation::new(&total_alphabet, vec![relator])?;
        Ok(FreeDouble {
            total,
            left_gens: (0..rank).collect(),
            right_gens: (rank..2 * rank).collect(),
            w_left,
            w_right,
        })
    }

    pub fn total(&self) -> &Presentation {
        &self.total
    }

    pub fn amalgam_word(&self, side: Side) -> &Word {
        match side {
            Side::Left => &self.w_left,
            Side::Right => &self.w_right,
        }
    }

    /// The underlying one-edged amalgam splitting.
    pub fn splitting(&self) -> Result<OneEdgeSplitting> {
        OneEdgeSplitting::amalgam(
            self.total.clone(),
            self.left_gens.clone(),
            self.right_gens.clone(),
            self.w_left.clone(),
            self.w_right.clone(),
        )
    }

    /// Dehn twist along the amalgamating cyclic subgroup.
    pub fn dehn_twist(&self, z: &Word) -> Result<TwistAutomorphism> {
        dehn_twist(&self.splitting()?, z)
    }

    /// The retraction identifying the right copy with the left one, landing
    /// in the free group on the left generator names.
    pub fn retraction(&self) -> Result<crate::presentations::GroupHom> {
        let rank = self.left_gens.len();
        let left_names: Vec<String> = self
            .left_gens
            .iter()
            .map(|&g| self.total.generators().name(g).to_string())
            .collect();
        let target_alphabet = Alphabet::new(left_names)?;
        let target = Presentation::free(&target_alphabet);
        let mut images = Vec::new();
        for i in 0..2 * rank {
            images.push(Word::generator(&target_alphabet, i % rank)?);
        }
        crate::presentations::GroupHom::verified(self.total.clone(), target, images)
    }

    fn side_of(&self, gen: usize) -> Side {
        if self.left_gens.contains(&gen) {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Rewrites `u` as an alternating product of nontrivial syllables,
    /// pinching syllables that lie in the amalgamated cyclic subgroup to the
    /// other side until none remains. `u = 1` in the double iff the
    /// resulting syllable list is empty; this is sound and complete for
    /// amalgams of free groups over a common cyclic subgroup.
    pub fn normal_form(&self, u: &Word) -> Result<NormalForm> {
        if u.alphabet() != self.total.generators() {
            return Err(Error::AlphabetMismatch("word not over the double".into()));
        }
        let mut syllables: Vec<(Side, Word)> = Vec::new();
        for &letter in u.letters() {
            let side = self.side_of(letter.gen);
            let piece = Word::reduce_from(self.total.generators(), [letter])?;
            match syllables.last_mut() {
                Some((s, word)) if *s == side => *word = word.mul(&piece)?,
                _ => syllables.push((side, piece)),
            }
        }
        loop {
            // Drop empty syllables and re-merge same-side neighbours until
            // stable; a merge that cancels to nothing exposes new neighbours.
            loop {
                let before = syllables.len();
                let mut merged: Vec<(Side, Word)> = Vec::new();
                for (side, word) in syllables.into_iter().filter(|(_, w)| !w.is_empty()) {
                    match merged.last_mut() {
                        Some((s, acc)) if *s == side => *acc = acc.mul(&word)?,
                        _ => merged.push((side, word)),
                    }
                }
                merged.retain(|(_, w)| !w.is_empty());
                syllables = merged;
                if syllables.len() == before {
                    break;
                }
            }
            if syllables.len() < 2 {
                break;
            }
            let pinch = syllables.iter().position(|(side, w)| {
                power_exponent(w, self.amalgam_word(*side)).is_some()
            });
            match pinch {
                Some(i) => {
                    let (side, word) = syllables[i].clone();
                    let k = power_exponent(&word, self.amalgam_word(side)).unwrap();
                    let other = match side {
                        Side::Left => Side::Right,
                        Side::Right => Side::Left,
                    };
                    syllables[i] = (other, self.amalgam_word(other).pow(k));
                }
                None => break,
            }
        }
        Ok(NormalForm { syllables })
    }

    /// Exact equality in the double.
    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool> {
        Ok(self.normal_form(&u.mul(&v.inverse())?)?.is_trivial())
    }
}

/// Alternating normal form in a double.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub syllables: Vec<(Side, Word)>,
}

impl NormalForm {
    pub fn is_trivial(&self) -> bool {
        self.syllables.is_empty()
    }
}
