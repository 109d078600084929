//! Finite presentations and homomorphisms with verifiable well-definedness.
//!
//! The word problem is decided in two situations: free presentations (empty
//! relator list) and visibly abelian ones (every pairwise commutator of
//! generators appears among the relators), where triviality reduces to
//! membership in the relator exponent lattice. Homs into anything else carry
//! `status = asserted`, and consumers state which status they require.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlinalg::{smith_normal_form, unimodular_extend, IntMatrix, Lattice};
use crate::words::{cyclically_equal, Alphabet, Word};

/// A finite presentation. Relators are stored freely and cyclically reduced;
/// trivial relators are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Arc<Alphabet>,
    relators: Vec<Word>,
}

/// How far the word problem of a presentation is decidable here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordProblem {
    /// No relators: free reduction decides everything.
    Free,
    /// All pairwise commutators are relators: triviality is membership of
    /// the exponent vector in the relator lattice.
    VisiblyAbelian,
    Undecidable,
}

impl Presentation {
    pub fn new(generators: &Arc<Alphabet>, relators: Vec<Word>) -> Result<Presentation> {
        let mut stored = Vec::new();
        for r in relators {
            if r.alphabet() != generators {
                return Err(Error::AlphabetMismatch(
                    "relator over a different alphabet".into(),
                ));
            }
            let (core, _) = r.cyclic_reduce();
            if !core.is_empty() {
                stored.push(core);
            }
        }
        Ok(Presentation { generators: generators.clone(), relators: stored })
    }

    /// The free presentation on the given alphabet.
    pub fn free(generators: &Arc<Alphabet>) -> Presentation {
        Presentation { generators: generators.clone(), relators: Vec::new() }
    }

    /// The trivial group, presented with no generators.
    pub fn trivial() -> Presentation {
        Presentation::free(&Alphabet::canonical(0))
    }

    /// `Z^n` on the given alphabet: all pairwise commutators as relators.
    pub fn free_abelian(generators: &Arc<Alphabet>) -> Result<Presentation> {
        let n = generators.rank();
        let mut relators = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let gi = Word::generator(generators, i)?;
                let gj = Word::generator(generators, j)?;
                relators.push(gi.commutator(&gj)?);
            }
        }
        Presentation::new(generators, relators)
    }

    pub fn generators(&self) -> &Arc<Alphabet> {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn is_free(&self) -> bool {
        self.relators.is_empty()
    }

    /// True when every pairwise commutator of generators appears among the
    /// relators up to cyclic rotation and inversion.
    pub fn is_visibly_abelian(&self) -> bool {
        let n = self.generators.rank();
        for i in 0..n {
            for j in i + 1..n {
                let gi = Word::generator(&self.generators, i).unwrap();
                let gj = Word::generator(&self.generators, j).unwrap();
                let comm = gi.commutator(&gj).unwrap();
                if !self.relators.iter().any(|r| cyclically_equal(r, &comm)) {
                    return false;
                }
            }
        }
        true
    }

    /// Visibly abelian with every relator abelianizing to zero, i.e. the
    /// presentation is exactly `Z^n`.
    pub fn is_free_abelian(&self) -> bool {
        self.is_visibly_abelian() && self.relators.iter().all(Word::abelianizes_to_zero)
    }

    pub fn word_problem(&self) -> WordProblem {
        if self.is_free() {
            WordProblem::Free
        } else if self.is_visibly_abelian() {
            WordProblem::VisiblyAbelian
        } else {
            WordProblem::Undecidable
        }
    }

    /// Decides triviality of a word where possible.
    pub fn is_trivial(&self, w: &Word) -> Result<Option<bool>> {
        if w.alphabet() != &self.generators {
            return Err(Error::AlphabetMismatch("word over a different alphabet".into()));
        }
        match self.word_problem() {
            WordProblem::Free => Ok(Some(w.is_empty())),
            WordProblem::VisiblyAbelian => {
                let lattice = self.relator_lattice();
                let v: Vec<BigInt> = w.exponent_vector().iter().map(|&e| BigInt::from(e)).collect();
                Ok(Some(lattice.contains(&v)?))
            }
            WordProblem::Undecidable => Ok(None),
        }
    }

    /// The lattice spanned by the relator exponent vectors.
    pub fn relator_lattice(&self) -> Lattice {
        let rows: Vec<Vec<BigInt>> = self
            .relators
            .iter()
            .map(|r| r.exponent_vector().iter().map(|&e| BigInt::from(e)).collect())
            .collect();
        Lattice::new(self.generators.rank(), rows).expect("exponent vectors have full length")
    }

    /// The relator exponent matrix (one row per relator).
    pub fn relator_matrix(&self) -> IntMatrix {
        let n = self.generators.rank();
        let mut m = IntMatrix::zero(self.relators.len(), n);
        for (i, r) in self.relators.iter().enumerate() {
            for (j, e) in r.exponent_vector().into_iter().enumerate() {
                m.set(i, j, BigInt::from(e));
            }
        }
        m
    }

    /// A presentation is recognizably free here when its relator list is
    /// empty, or when it is visibly abelian, torsion-free, and of rank at
    /// most one (so the group is trivial or Z).
    pub fn is_recognizably_free(&self) -> bool {
        if self.is_free() {
            return true;
        }
        if !self.is_visibly_abelian() {
            return false;
        }
        let ab = abelianization_quotient(self);
        ab.torsion.is_empty() && ab.rank <= 1
    }
}

/// Verification status of a homomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomStatus {
    Verified,
    Asserted,
}

/// A homomorphism given by generator images into a target presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    domain: Presentation,
    target: Presentation,
    images: Vec<Word>,
    status: HomStatus,
}

/// Outcome of `validate_hom_to_free`.
#[derive(Debug, Clone)]
pub enum HomValidation {
    Verified(GroupHom),
    /// Indices of domain relators whose images fail to die in the target.
    Violations(Vec<usize>),
}

impl GroupHom {
    /// Builds and verifies a hom; fails with `Undecidable` when the target's
    /// word problem is out of reach, and `Precondition` when a relator
    /// survives.
    pub fn verified(domain: Presentation, target: Presentation, images: Vec<Word>) -> Result<GroupHom> {
        let hom = GroupHom::asserted(domain, target, images)?;
        match hom.check_relators()? {
            Some(violations) if violations.is_empty() => Ok(GroupHom { status: HomStatus::Verified, ..hom }),
            Some(violations) => Err(Error::Precondition(format!(
                "relators {violations:?} do not map to the identity"
            ))),
            None => Err(Error::Undecidable(
                "target word problem is not decidable; use an asserted hom".into(),
            )),
        }
    }

    /// Builds a hom with only arity and alphabet checks.
    pub fn asserted(domain: Presentation, target: Presentation, images: Vec<Word>) -> Result<GroupHom> {
        if images.len() != domain.generators().rank() {
            return Err(Error::Arity { expected: domain.generators().rank(), got: images.len() });
        }
        for image in &images {
            if image.alphabet() != target.generators() {
                return Err(Error::AlphabetMismatch(
                    "hom image over a different alphabet than the target".into(),
                ));
            }
        }
        Ok(GroupHom { domain, target, images, status: HomStatus::Asserted })
    }

    /// Checks every domain relator; `None` when the target cannot decide.
    fn check_relators(&self) -> Result<Option<Vec<usize>>> {
        let mut violations = Vec::new();
        for (i, relator) in self.domain.relators().iter().enumerate() {
            let image = self.apply(relator)?;
            match self.target.is_trivial(&image)? {
                Some(true) => {}
                Some(false) => violations.push(i),
                None => return Ok(None),
            }
        }
        Ok(Some(violations))
    }

    pub fn domain(&self) -> &Presentation {
        &self.domain
    }

    pub fn target(&self) -> &Presentation {
        &self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn status(&self) -> HomStatus {
        self.status
    }

    pub fn is_verified(&self) -> bool {
        self.status == HomStatus::Verified
    }

    /// Image of a word, freely reduced over the target generators. This is
    /// a normal form only when the target is free.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.alphabet() != self.domain.generators() {
            return Err(Error::AlphabetMismatch("word over a different alphabet".into()));
        }
        let mut acc = Word::identity(self.target.generators());
        for letter in w.letters() {
            let img = &self.images[letter.gen];
            acc = if letter.inverse { acc.mul(&img.inverse())? } else { acc.mul(img)? };
        }
        Ok(acc)
    }

    /// `max_g |f(g)|` over the generating set. Requires a verified hom with
    /// a free target.
    pub fn length(&self) -> Result<usize> {
        if !self.is_verified() {
            return Err(Error::Precondition("hom length requires a verified hom".into()));
        }
        if !self.target.is_free() {
            return Err(Error::Precondition("hom length requires a free target".into()));
        }
        Ok(self.images.iter().map(Word::len).max().unwrap_or(0))
    }
}

/// Checks whether the images define a hom into the free group on the target
/// alphabet, reporting the violated relators otherwise.
pub fn validate_hom_to_free(
    p: &Presentation,
    target: &Arc<Alphabet>,
    images: Vec<Word>,
) -> Result<HomValidation> {
    let hom = GroupHom::asserted(p.clone(), Presentation::free(target), images)?;
    let violations = hom
        .check_relators()?
        .expect("free targets always decide");
    if violations.is_empty() {
        Ok(HomValidation::Verified(GroupHom { status: HomStatus::Verified, ..hom }))
    } else {
        Ok(HomValidation::Violations(violations))
    }
}

/// A quotient map: same generators, extra relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    pub domain: Presentation,
    pub added: Vec<Word>,
}

impl QuotientMap {
    pub fn new(domain: Presentation, added: Vec<Word>) -> Result<QuotientMap> {
        for w in &added {
            if w.alphabet() != domain.generators() {
                return Err(Error::AlphabetMismatch(
                    "added relator over a different alphabet".into(),
                ));
            }
        }
        Ok(QuotientMap { domain, added })
    }

    pub fn codomain(&self) -> Presentation {
        let mut relators = self.domain.relators().to_vec();
        relators.extend(self.added.iter().cloned());
        Presentation::new(self.domain.generators(), relators).expect("same alphabet")
    }
}

/// The torsion-free abelianization `G -> Z^rank` together with the torsion
/// divisors discarded along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abelianization {
    pub rank: usize,
    /// Elementary divisors greater than 1.
    pub torsion: Vec<BigInt>,
    /// Image tuple per generator.
    pub images: Vec<Vec<BigInt>>,
}

impl Abelianization {
    /// Image of an arbitrary word under `G -> Z^rank`.
    pub fn apply(&self, w: &Word) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.rank];
        for (g, e) in w.exponent_vector().into_iter().enumerate() {
            for (slot, coord) in acc.iter_mut().zip(&self.images[g]) {
                *slot += coord * BigInt::from(e);
            }
        }
        acc
    }
}

/// Smith normal form of the relator exponent matrix: the divisors report
/// torsion, the quotient by the image lattice is `Z^rank`, and every relator
/// maps to zero.
pub fn abelianization_quotient(p: &Presentation) -> Abelianization {
    let n = p.generators().rank();
    if p.relators().is_empty() {
        let images = (0..n)
            .map(|j| (0..n).map(|i| if i == j { BigInt::from(1) } else { BigInt::zero() }).collect())
            .collect();
        return Abelianization { rank: n, torsion: Vec::new(), images };
    }
    let e = p.relator_matrix();
    let snf = smith_normal_form(&e);
    let divisors = snf.divisors();
    let s = divisors.len();
    let rank = n - s;
    let torsion: Vec<BigInt> = divisors.into_iter().filter(|d| d > &BigInt::from(1)).collect();
    // Row vector x maps to the trailing coordinates of x * V^-1.
    let images = (0..n)
        .map(|j| {
            let row: Vec<BigInt> = (s..n).map(|c| snf.v_inv.get(j, c).clone()).collect();
            row
        })
        .collect();
    Abelianization { rank, torsion, images }
}

/// If `f` kills every added relator of `q`, returns the witness hom on the
/// codomain (same images), verified there; otherwise `None`.
pub fn factors_through(f: &GroupHom, q: &QuotientMap) -> Result<Option<GroupHom>> {
    if !f.is_verified() {
        return Err(Error::Precondition("factors_through requires a verified hom".into()));
    }
    if f.domain() != &q.domain {
        return Err(Error::Precondition("hom and quotient have different domains".into()));
    }
    if !f.target.is_free() {
        return Err(Error::Precondition("factors_through requires a free target".into()));
    }
    for relator in &q.added {
        if !f.apply(relator)?.is_empty() {
            return Ok(None);
        }
    }
    let witness = GroupHom::verified(q.codomain(), f.target.clone(), f.images.clone())?;
    Ok(Some(witness))
}

/// Result of factoring a commuting-image hom through the first-coordinate
/// projection.
#[derive(Debug, Clone)]
pub struct AbelianFactorization {
    pub alpha: IntMatrix,
    pub root: Word,
    pub exponent: BigInt,
    /// All images trivial: `alpha` is the identity and the exponent is 0.
    pub degenerate: bool,
}

/// For a verified hom `Z^n -> F` with pairwise commuting images, produces
/// `alpha` in `GL_n(Z)` such that the composite sends the first basis vector
/// to `root^exponent` (exponent = gcd of the exponent tuple) and every other
/// basis vector to the identity.
pub fn abelian_factorization(f: &GroupHom) -> Result<AbelianFactorization> {
    if !f.is_verified() {
        return Err(Error::Precondition("abelian factorization requires a verified hom".into()));
    }
    if !f.domain().is_free_abelian() {
        return Err(Error::Precondition("domain must be a free abelian presentation".into()));
    }
    if !f.target().is_free() {
        return Err(Error::Precondition("target must be free".into()));
    }
    let images = f.images();
    for (i, u) in images.iter().enumerate() {
        for v in &images[i + 1..] {
            if !u.commutator(v)?.is_empty() {
                return Err(Error::Precondition(format!(
                    "images `{u}` and `{v}` do not commute"
                )));
            }
        }
    }
    let n = images.len();
    let Some(first) = images.iter().find(|u| !u.is_empty()) else {
        return Ok(AbelianFactorization {
            alpha: IntMatrix::identity(n),
            root: Word::identity(f.target().generators()),
            exponent: BigInt::zero(),
            degenerate: true,
        });
    };
    let (root, _) = first.primitive_root()?;
    let mut k = Vec::with_capacity(n);
    for u in images {
        if u.is_empty() {
            k.push(BigInt::zero());
            continue;
        }
        let (r, e) = u.primitive_root()?;
        if r == root {
            k.push(BigInt::from(e));
        } else if r == root.inverse() {
            k.push(-BigInt::from(e));
        } else {
            // Commuting nontrivial elements of a free group share a
            // primitive root, so this contradicts the commutation check.
            return Err(Error::Precondition(format!(
                "image `{u}` is not a power of the common root `{root}`"
            )));
        }
    }
    let (alpha, d) = unimodular_extend(&k)?;
    Ok(AbelianFactorization { alpha, root, exponent: d, degenerate: false })
}

/// Applies a `GL_n(Z)` matrix to a free-abelian-domain hom: generator `e_j`
/// maps through the j-th column of the matrix.
pub fn compose_with_matrix(f: &GroupHom, alpha: &IntMatrix) -> Result<GroupHom> {
    let n = f.domain().generators().rank();
    if alpha.nrows() != n || alpha.ncols() != n {
        return Err(Error::Arity { expected: n, got: alpha.nrows() });
    }
    let mut images = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Word::identity(f.target().generators());
        for i in 0..n {
            let e: i64 = alpha.get(i, j).try_into().map_err(|_| {
                Error::Invalid("matrix entry too large for word exponent".into())
            })?;
            acc = acc.mul(&f.images()[i].pow(e))?;
        }
        images.push(acc);
    }
    GroupHom::verified(f.domain().clone(), f.target().clone(), images)
}

/// The matrix of an endomorphism of a free abelian presentation, columns
/// indexed by generators.
pub fn endomorphism_matrix(domain: &Presentation, images: &[Word]) -> Result<IntMatrix> {
    let n = domain.generators().rank();
    if images.len() != n {
        return Err(Error::Arity { expected: n, got: images.len() });
    }
    let mut m = IntMatrix::zero(n, n);
    for (j, w) in images.iter().enumerate() {
        for (i, e) in w.exponent_vector().into_iter().enumerate() {
            m.set(i, j, BigInt::from(e));
        }
    }
    Ok(m)
}

/// Surface group presentations with their free retractions.
///
/// Orientable genus `g >= 2`: generators `a1, b1, ..., ag, bg`, one relator
/// `prod [ai, bi]`, and the verified retraction `ai -> xi`, `bi -> 1` onto
/// the free group of rank `g`. Non-orientable genus `g >= 1`: generators
/// `a1..ag` with relator `a1^2 ... ag^2` and no retraction (none is exposed
/// here).
pub fn surface_family(genus: u32, orientable: bool) -> Result<(Presentation, Option<GroupHom>)> {
    if orientable {
        if genus < 2 {
            return Err(Error::Invalid(
                "orientable surface retractions require genus >= 2".into(),
            ));
        }
        let mut names = Vec::new();
        for i in 1..=genus {
            names.push(format!("a{i}"));
            names.push(format!("b{i}"));
        }
        let gens = Alphabet::new(names)?;
        let mut relator = Word::identity(&gens);
        for i in 0..genus as usize {
            let a = Word::generator(&gens, 2 * i)?;
            let b = Word::generator(&gens, 2 * i + 1)?;
            relator = relator.mul(&a.commutator(&b)?)?;
        }
        let pres = Presentation::new(&gens, vec![relator])?;
        let target = Alphabet::canonical(genus as usize);
        let mut images = Vec::new();
        for i in 0..genus as usize {
            images.push(Word::generator(&target, i)?);
            images.push(Word::identity(&target));
        }
        let mu = GroupHom::verified(pres.clone(), Presentation::free(&target), images)?;
        Ok((pres, Some(mu)))
    } else {
        if genus < 1 {
            return Err(Error::Invalid("non-orientable genus must be >= 1".into()));
        }
        let names: Vec<String> = (1..=genus).map(|i| format!("a{i}")).collect();
        let gens = Alphabet::new(names)?;
        let mut relator = Word::identity(&gens);
        for i in 0..genus as usize {
            relator = relator.mul(&Word::generator(&gens, i)?.pow(2))?;
        }
        let pres = Presentation::new(&gens, vec![relator])?;
        Ok((pres, None))
    }
}

/// Evidence that an epimorphism is proper (has nontrivial kernel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Properness {
    /// A domain word killed by the map and known nontrivial in the domain.
    Certified { witness: Word },
    /// A witness is supplied but domain nontriviality is not decidable.
    Asserted { witness: Word },
    /// The map is an isomorphism onto its presentation (not proper).
    NotProper,
}

/// Attaches a properness certificate to a quotient map: the witness is the
/// first added relator that is nontrivial in the domain when that is
/// decidable, and asserted otherwise.
pub fn certify_properness(q: &QuotientMap) -> Result<Properness> {
    for w in &q.added {
        let (core, _) = w.cyclic_reduce();
        if core.is_empty() {
            continue;
        }
        match q.domain.is_trivial(&core)? {
            Some(false) => return Ok(Properness::Certified { witness: core }),
            Some(true) => continue,
            None => return Ok(Properness::Asserted { witness: core }),
        }
    }
    Ok(Properness::NotProper)
}

/// Properness of the torsion-free abelianization map, decided where the
/// domain's word problem allows it.
pub fn abelianization_properness(p: &Presentation) -> Result<Properness> {
    let ab = abelianization_quotient(p);
    let gens = p.generators();
    // Any commutator of generators is killed by the abelianization.
    for i in 0..gens.rank() {
        for j in i + 1..gens.rank() {
            let comm = Word::generator(gens, i)?.commutator(&Word::generator(gens, j)?)?;
            match p.is_trivial(&comm)? {
                Some(false) => return Ok(Properness::Certified { witness: comm }),
                Some(true) => continue,
                None => return Ok(Properness::Asserted { witness: comm }),
            }
        }
    }
    // Abelian domain: the map is proper exactly when torsion is discarded.
    if !ab.torsion.is_empty() {
        for r in p.relators() {
            if let Some(false) = p.is_trivial(r)? {
                return Ok(Properness::Certified { witness: r.clone() });
            }
        }
        // Torsion exists, so some relator is a nontrivial kernel element
        // even if we cannot name one; report asserted with the first.
        if let Some(r) = p.relators().first() {
            return Ok(Properness::Asserted { witness: r.clone() });
        }
    }
    Ok(Properness::NotProper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlinalg::bigints;

    fn f2() -> Arc<Alphabet> {
        Alphabet::new(vec!["a", "b"]).unwrap()
    }

    fn w(alphabet: &Arc<Alphabet>, text: &str) -> Word {
        Word::parse(alphabet, text).unwrap()
    }

    fn z2() -> Presentation {
        Presentation::free_abelian(&f2()).unwrap()
    }

    #[test]
    fn relators_are_stored_cyclically_reduced_and_nonempty() {
        let f = f2();
        let p = Presentation::new(
            &f,
            vec![w(&f, "a b a^-1"), w(&f, "a a^-1"), w(&f, "b")],
        )
        .unwrap();
        assert_eq!(p.relators(), &[w(&f, "b"), w(&f, "b")]);
    }

    #[test]
    fn word_problem_classification() {
        let f = f2();
        assert_eq!(Presentation::free(&f).word_problem(), WordProblem::Free);
        assert_eq!(z2().word_problem(), WordProblem::VisiblyAbelian);
        let surface = surface_family(2, true).unwrap().0;
        assert_eq!(surface.word_problem(), WordProblem::Undecidable);
    }

    #[test]
    fn visibly_abelian_triviality_is_lattice_membership() {
        let q = QuotientMap::new(z2(), vec![w(&f2(), "b")]).unwrap();
        let z = q.codomain();
        assert_eq!(z.is_trivial(&w(&f2(), "b")).unwrap(), Some(true));
        assert_eq!(z.is_trivial(&w(&f2(), "a b")).unwrap(), Some(false));
        assert_eq!(z.is_trivial(&w(&f2(), "b^5")).unwrap(), Some(true));
        assert_eq!(z.is_trivial(&w(&f2(), "a")).unwrap(), Some(false));
    }

    #[test]
    fn genus_two_retraction_verifies() {
        let (pres, mu) = surface_family(2, true).unwrap();
        let mu = mu.unwrap();
        assert_eq!(pres.generators().rank(), 4);
        assert_eq!(pres.relators().len(), 1);
        assert!(mu.is_verified());
        assert!(mu.apply(&pres.relators()[0]).unwrap().is_empty());
    }

    #[test]
    fn z2_identity_images_fail_validation() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let result =
            validate_hom_to_free(&p, &x, vec![w(&x, "x"), w(&x, "y")]).unwrap();
        let HomValidation::Violations(bad) = result else {
            panic!("x, y do not commute, validation must fail");
        };
        assert_eq!(bad, vec![0]);
    }

    #[test]
    fn everything_to_identity_validates() {
        let surface = surface_family(3, true).unwrap().0;
        let x = Alphabet::new(vec!["x"]).unwrap();
        let images = vec![Word::identity(&x); 6];
        let result = validate_hom_to_free(&surface, &x, images).unwrap();
        assert!(matches!(result, HomValidation::Verified(_)));
    }

    #[test]
    fn hom_length_examples() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let target = Presentation::free(&x);
        let zero = GroupHom::verified(
            p.clone(),
            target.clone(),
            vec![Word::identity(&x), Word::identity(&x)],
        )
        .unwrap();
        assert_eq!(zero.length().unwrap(), 0);

        let f = GroupHom::verified(
            p,
            target,
            vec![w(&x, "x y").pow(3), w(&x, "x y").pow(5)],
        )
        .unwrap();
        assert_eq!(f.length().unwrap(), 10);
    }

    #[test]
    fn abelianization_examples() {
        let free = Presentation::free(&f2());
        let ab = abelianization_quotient(&free);
        assert_eq!(ab.rank, 2);
        assert!(ab.torsion.is_empty());

        let a = Alphabet::new(vec!["a"]).unwrap();
        let z_mod_2 = Presentation::new(&a, vec![w(&a, "a^2")]).unwrap();
        let ab = abelianization_quotient(&z_mod_2);
        assert_eq!(ab.rank, 0);
        assert_eq!(ab.torsion, bigints(&[2]));

        let surface = surface_family(2, true).unwrap().0;
        let ab = abelianization_quotient(&surface);
        assert_eq!(ab.rank, 4);
        assert!(ab.torsion.is_empty());
        // The relator maps to zero.
        assert!(ab.apply(&surface.relators()[0]).iter().all(BigInt::is_zero));
    }

    #[test]
    fn factors_through_examples() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let target = Presentation::free(&x);
        let kills_b = GroupHom::verified(
            p.clone(),
            target.clone(),
            vec![w(&x, "x"), Word::identity(&x)],
        )
        .unwrap();
        let q = QuotientMap::new(p.clone(), vec![w(&f2(), "b")]).unwrap();
        let witness = factors_through(&kills_b, &q).unwrap().unwrap();
        assert!(witness.is_verified());
        assert_eq!(witness.images(), kills_b.images());

        let keeps_b = GroupHom::verified(
            p.clone(),
            target.clone(),
            vec![w(&x, "x"), w(&x, "x")],
        )
        .unwrap();
        assert!(factors_through(&keeps_b, &q).unwrap().is_none());

        // a -> w, b -> w^3 kills a^3 b^-1.
        let word = w(&x, "x y");
        let f = GroupHom::verified(p.clone(), target, vec![word.clone(), word.pow(3)]).unwrap();
        let q = QuotientMap::new(p, vec![w(&f2(), "a^3 b^-1")]).unwrap();
        assert!(factors_through(&f, &q).unwrap().is_some());
    }

    #[test]
    fn abelian_factorization_frozen_example() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let root = w(&x, "x y");
        let f = GroupHom::verified(
            p,
            Presentation::free(&x),
            vec![root.pow(3), root.pow(5)],
        )
        .unwrap();
        let fact = abelian_factorization(&f).unwrap();
        assert_eq!(fact.root, root);
        assert_eq!(fact.exponent, BigInt::from(1));
        assert_eq!(fact.alpha, IntMatrix::from_i64_rows(&[&[2, 5], &[-1, -3]]));
        let composed = compose_with_matrix(&f, &fact.alpha).unwrap();
        assert_eq!(composed.images()[0], root);
        assert!(composed.images()[1].is_empty());
    }

    #[test]
    fn abelian_factorization_gcd_example() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let f = GroupHom::verified(
            p,
            Presentation::free(&x),
            vec![w(&x, "x^2"), w(&x, "x^4")],
        )
        .unwrap();
        let fact = abelian_factorization(&f).unwrap();
        assert_eq!(fact.root, w(&x, "x"));
        assert_eq!(fact.exponent, BigInt::from(2));
        let composed = compose_with_matrix(&f, &fact.alpha).unwrap();
        assert_eq!(composed.images()[0], w(&x, "x^2"));
        assert!(composed.images()[1].is_empty());
    }

    #[test]
    fn abelian_factorization_trivial_second_image() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let f = GroupHom::verified(
            p,
            Presentation::free(&x),
            vec![w(&x, "x y x^-1"), Word::identity(&x)],
        )
        .unwrap();
        let fact = abelian_factorization(&f).unwrap();
        assert!(fact.alpha.is_identity());
        assert_eq!(fact.exponent, BigInt::from(1));
        assert!(!fact.degenerate);
    }

    #[test]
    fn abelian_factorization_degenerate_case() {
        let p = z2();
        let x = Alphabet::new(vec!["x", "y"]).unwrap();
        let f = GroupHom::verified(
            p,
            Presentation::free(&x),
            vec![Word::identity(&x), Word::identity(&x)],
        )
        .unwrap();
        let fact = abelian_factorization(&f).unwrap();
        assert!(fact.degenerate);
        assert!(fact.alpha.is_identity());
    }

    #[test]
    fn surface_family_rejects_the_torus() {
        assert!(surface_family(1, true).is_err());
        let (klein, mu) = surface_family(2, false).unwrap();
        assert_eq!(klein.generators().rank(), 2);
        assert!(mu.is_none());
    }

    #[test]
    fn properness_certificates() {
        let free = Presentation::free(&f2());
        let q = QuotientMap::new(free.clone(), vec![w(&f2(), "a")]).unwrap();
        assert_eq!(
            certify_properness(&q).unwrap(),
            Properness::Certified { witness: w(&f2(), "a") }
        );
        // The abelianization of F_2 is proper (kills [a, b]).
        match abelianization_properness(&free).unwrap() {
            Properness::Certified { witness } => {
                assert_eq!(witness, w(&f2(), "a b a^-1 b^-1"));
            }
            other => panic!("expected certified, got {other:?}"),
        }
        // The abelianization of Z^2 is an isomorphism.
        assert_eq!(abelianization_properness(&z2()).unwrap(), Properness::NotProper);
    }

    #[test]
    fn recognizably_free_presentations() {
        assert!(Presentation::free(&f2()).is_recognizably_free());
        assert!(Presentation::trivial().is_recognizably_free());
        let q = QuotientMap::new(z2(), vec![w(&f2(), "b")]).unwrap();
        assert!(q.codomain().is_recognizably_free());
        assert!(!z2().is_recognizably_free());
        let a = Alphabet::new(vec!["a"]).unwrap();
        let torsion = Presentation::new(&a, vec![w(&a, "a^2")]).unwrap();
        assert!(!torsion.is_recognizably_free());
    }
}
