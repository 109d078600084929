//! Bounded witness searches: separating homs for finite subsets,
//! nontriviality witnesses, and stable-kernel probes along twist families.
//!
//! Every search enumerates candidate image tuples in a fixed order: total
//! image length first, then compositions of that length lexicographically,
//! then per-slot words in letter order with the last slot fastest. The
//! returned witness is therefore the shortlex-least one, identical runs
//! return identical witnesses, and enlarging the budget never loses a
//! previously found witness. A none-in-budget answer is a statement about
//! the searched ball only.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presentations::{GroupHom, Presentation};
use crate::splittings::TwistAutomorphism;
use crate::words::{Alphabet, Letter, Word};

/// A finite set of pairwise distinct reduced words over a presentation's
/// generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubset {
    elements: Vec<Word>,
}

impl FiniteSubset {
    pub fn new(elements: Vec<Word>) -> Result<FiniteSubset> {
        for (i, w) in elements.iter().enumerate() {
            if elements[..i].contains(w) {
                return Err(Error::Invalid(format!("duplicate element `{w}` in finite subset")));
            }
        }
        Ok(FiniteSubset { elements })
    }

    pub fn elements(&self) -> &[Word] {
        &self.elements
    }
}

/// Bounds for the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum total image length (summed over generators).
    pub max_total_length: usize,
    /// Rank of the free target; 2 is enough for every fg free group.
    pub target_rank: usize,
    /// Cap on examined candidates.
    pub node_cap: u64,
}

impl Default for SearchBudget {
    fn default() -> SearchBudget {
        SearchBudget { max_total_length: 8, target_rank: 2, node_cap: 50_000_000 }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.target_rank == 0 || self.node_cap == 0 {
            return Err(Error::Invalid("search budget bounds must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a witness search.
#[derive(Debug, Clone)]
pub enum WitnessOutcome {
    Found { hom: GroupHom, candidates: u64 },
    NoneInBudget { candidates: u64 },
}

impl WitnessOutcome {
    pub fn found(&self) -> Option<&GroupHom> {
        match self {
            WitnessOutcome::Found { hom, .. } => Some(hom),
            WitnessOutcome::NoneInBudget { .. } => None,
        }
    }
}

/// Reduced words of exact length `len` over `alphabet`, in letter order.
fn words_of_exact_length(alphabet: &Arc<Alphabet>, len: usize) -> Vec<Word> {
    let mut current = vec![Word::identity(alphabet)];
    for _ in 0..len {
        let mut next = Vec::new();
        for p in &current {
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
        current = next;
    }
    current
}

/// Enumerates image tuples in the documented order and returns the first
/// tuple accepted by `test`, as a verified hom.
fn enumerate_homs(
    p: &Presentation,
    budget: &SearchBudget,
    mut test: impl FnMut(&GroupHom) -> Result<bool>,
) -> Result<WitnessOutcome> {
    budget.validate()?;
    let n = p.generators().rank();
    let target_alphabet = Alphabet::canonical(budget.target_rank);
    let target = Presentation::free(&target_alphabet);
    let by_length: Vec<Vec<Word>> = (0..=budget.max_total_length)
        .map(|l| words_of_exact_length(&target_alphabet, l))
        .collect();
    let mut candidates = 0u64;
    if n == 0 {
        // The empty tuple is the only candidate.
        let hom = GroupHom::verified(p.clone(), target, Vec::new())?;
        return if test(&hom)? {
            Ok(WitnessOutcome::Found { hom, candidates: 1 })
        } else {
            Ok(WitnessOutcome::NoneInBudget { candidates: 1 })
        };
    }
    for total in 0..=budget.max_total_length {
        let mut composition = vec![0usize; n];
        loop {
            // Fill the composition to sum to `total` (lexicographic walk).
            let assigned: usize = composition[..n - 1].iter().sum();
            if assigned <= total {
                composition[n - 1] = total - assigned;
                // Odometer over word choices, last slot fastest.
                let lists: Vec<&[Word]> =
                    composition.iter().map(|&l| by_length[l].as_slice()).collect();
                if lists.iter().all(|l| !l.is_empty()) {
                    let mut index = vec![0usize; n];
                    'tuples: loop {
                        candidates += 1;
                        if candidates > budget.node_cap {
                            return Ok(WitnessOutcome::NoneInBudget { candidates });
                        }
                        let images: Vec<Word> =
                            index.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
                        // Relators must die in the free target.
                        let hom =
                            GroupHom::asserted(p.clone(), target.clone(), images)?;
                        let mut is_hom = true;
                        for relator in p.relators() {
                            if !hom.apply(relator)?.is_empty() {
                                is_hom = false;
                                break;
                            }
                        }
                        if is_hom {
                            let verified = GroupHom::verified(
                                p.clone(),
                                target.clone(),
                                hom.images().to_vec(),
                            )?;
                            if test(&verified)? {
                                return Ok(WitnessOutcome::Found { hom: verified, candidates });
                            }
                        }
                        // Advance the odometer.
                        let mut slot = n;
                        loop {
                            if slot == 0 {
                                break 'tuples;
                            }
                            slot -= 1;
                            index[slot] += 1;
                            if index[slot] < lists[slot].len() {
                                break;
                            }
                            index[slot] = 0;
                        }
                    }
                }
            }
            // Advance the composition in lexicographic order over the first
            // n-1 slots (the last slot is determined).
            let mut slot = n - 1;
            loop {
                if slot == 0 {
                    break;
                }
                slot -= 1;
                composition[slot] += 1;
                if composition[slot..n - 1].iter().sum::<usize>()
                    + composition[..slot].iter().sum::<usize>()
                    <= total
                {
                    break;
                }
                composition[slot] = 0;
            }
            if composition[..n - 1].iter().all(|&l| l == 0) {
                break;
            }
        }
    }
    Ok(WitnessOutcome::NoneInBudget { candidates })
}

/// Searches for a verified hom injective on the finite subset: the first
/// enumerated hom whose images of the subset elements are pairwise distinct
/// reduced words.
pub fn orf_witness_search(
    p: &Presentation,
    subset: &FiniteSubset,
    budget: &SearchBudget,
) -> Result<WitnessOutcome> {
    for x in subset.elements() {
        if x.alphabet() != p.generators() {
            return Err(Error::AlphabetMismatch("subset element over a different alphabet".into()));
        }
    }
    enumerate_homs(p, budget, |hom| {
        let images = subset
            .elements()
            .iter()
            .map(|x| hom.apply(x))
            .collect::<Result<Vec<_>>>()?;
        for (i, u) in images.iter().enumerate() {
            for v in &images[i + 1..] {
                if u == v {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })
}

/// Searches for a verified hom with `f(g) != 1`.
pub fn residually_free_probe(
    p: &Presentation,
    g: &Word,
    budget: &SearchBudget,
) -> Result<WitnessOutcome> {
    if g.is_empty() {
        return Err(Error::EmptyWord);
    }
    if g.alphabet() != p.generators() {
        return Err(Error::AlphabetMismatch("probe word over a different alphabet".into()));
    }
    enumerate_homs(p, budget, |hom| Ok(!hom.apply(g)?.is_empty()))
}

/// A family `f_i = f . alpha^i` realizing a stable sequence of homs.
#[derive(Debug, Clone)]
pub struct TwistFamily {
    pub base: GroupHom,
    pub twist: TwistAutomorphism,
    /// Inclusive index range `0..=range`.
    pub range: usize,
}

impl TwistFamily {
    pub fn new(base: GroupHom, twist: TwistAutomorphism, range: usize) -> Result<TwistFamily> {
        if !base.is_verified() {
            return Err(Error::Precondition("twist family needs a verified base hom".into()));
        }
        if !base.target().is_free() {
            return Err(Error::Precondition("twist family needs a free target".into()));
        }
        if twist.table.domain() != base.domain().generators() {
            return Err(Error::AlphabetMismatch(
                "twist is not an endomorphism table of the base hom's domain".into(),
            ));
        }
        Ok(TwistFamily { base, twist, range })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSample {
    pub index: usize,
    pub trivial: bool,
    pub image: Word,
}

/// Classification of the verdict sequence over the finite range. The
/// classification describes the computed range only and is never
/// extrapolated to the genuine infinite sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StableClassification {
    AllTrivialInRange,
    AllNontrivialInRange,
    /// The verdicts are constant from this index on (and not before), with
    /// at least two samples in the constant tail.
    EventuallyConstantFrom(usize),
    /// Only the final sample differs from its predecessor; no stabilization
    /// evidence.
    Mixed,
}

#[derive(Debug, Clone)]
pub struct StableProbe {
    pub samples: Vec<StableSample>,
    pub classification: StableClassification,
}

/// Evaluates `f(alpha^i(g))` for every `i` in `0..=range` and classifies
/// the triviality pattern.
pub fn stable_kernel_probe(family: &TwistFamily, g: &Word) -> Result<StableProbe> {
    if g.alphabet() != family.base.domain().generators() {
        return Err(Error::AlphabetMismatch("probe word over a different alphabet".into()));
    }
    let mut samples = Vec::with_capacity(family.range + 1);
    let mut current = g.clone();
    for index in 0..=family.range {
        let image = family.base.apply(&current)?;
        samples.push(StableSample { index, trivial: image.is_empty(), image });
        if index < family.range {
            current = family.twist.apply(&current)?;
        }
    }
    let verdicts: Vec<bool> = samples.iter().map(|s| s.trivial).collect();
    let classification = classify(&verdicts);
    Ok(StableProbe { samples, classification })
}

fn classify(verdicts: &[bool]) -> StableClassification {
    let last = *verdicts.last().expect("range is inclusive of zero");
    if verdicts.iter().all(|&v| v) {
        return StableClassification::AllTrivialInRange;
    }
    if verdicts.iter().all(|&v| !v) {
        return StableClassification::AllNontrivialInRange;
    }
    let mut start = verdicts.len() - 1;
    while start > 0 && verdicts[start - 1] == last {
        start -= 1;
    }
    if start == verdicts.len() - 1 {
        StableClassification::Mixed
    } else {
        StableClassification::EventuallyConstantFrom(start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splittings::{FreeDouble, Side};

    fn f2() -> Arc<Alphabet> {
        Alphabet::new(vec!["a", "b"]).unwrap()
    }

    fn w(alphabet: &Arc<Alphabet>, text: &str) -> Word {
        Word::parse(alphabet, text).unwrap()
    }

    fn z2() -> Presentation {
        Presentation::free_abelian(&f2()).unwrap()
    }

    fn subset_abab() -> FiniteSubset {
        FiniteSubset::new(vec![w(&f2(), "a"), w(&f2(), "b"), w(&f2(), "a b")]).unwrap()
    }

    #[test]
    fn free_group_subsets_separate_immediately() {
        let p = Presentation::free(&f2());
        let budget = SearchBudget { max_total_length: 4, ..Default::default() };
        let outcome = orf_witness_search(&p, &subset_abab(), &budget).unwrap();
        let hom = outcome.found().expect("free groups separate everything");
        // Witness at total image length 2 (one slot can stay trivial only
        // if the subset still separates).
        assert!(hom.length().unwrap() <= 2);
    }

    #[test]
    fn z2_subset_is_separated_within_the_budget() {
        let budget = SearchBudget { max_total_length: 8, ..Default::default() };
        let outcome = orf_witness_search(&z2(), &subset_abab(), &budget).unwrap();
        let hom = outcome.found().expect("Z^2 separates {a, b, ab}");
        let images: Vec<Word> = subset_abab()
            .elements()
            .iter()
            .map(|x| hom.apply(x).unwrap())
            .collect();
        assert_ne!(images[0], images[1]);
        assert_ne!(images[0], images[2]);
        assert_ne!(images[1], images[2]);
        // Soundness: the witness is a verified hom killing the commutator.
        assert!(hom.is_verified());
    }

    #[test]
    fn search_is_deterministic_and_budget_monotone() {
        let budget = SearchBudget { max_total_length: 8, ..Default::default() };
        let first = orf_witness_search(&z2(), &subset_abab(), &budget).unwrap();
        let second = orf_witness_search(&z2(), &subset_abab(), &budget).unwrap();
        assert_eq!(first.found().unwrap().images(), second.found().unwrap().images());
        let bigger = SearchBudget { max_total_length: 10, ..Default::default() };
        let third = orf_witness_search(&z2(), &subset_abab(), &bigger).unwrap();
        assert_eq!(first.found().unwrap().images(), third.found().unwrap().images());
    }

    #[test]
    fn torsion_kills_residual_freeness_probes() {
        let a = Alphabet::new(vec!["a"]).unwrap();
        let p = Presentation::new(&a, vec![w(&a, "a^2")]).unwrap();
        for max in [4, 8, 12] {
            let budget = SearchBudget { max_total_length: max, ..Default::default() };
            let outcome = residually_free_probe(&p, &w(&a, "a"), &budget).unwrap();
            assert!(outcome.found().is_none(), "torsion cannot map nontrivially");
        }
    }

    #[test]
    fn free_group_probe_finds_a_generator_witness() {
        let p = Presentation::free(&f2());
        let budget = SearchBudget { max_total_length: 4, ..Default::default() };
        let outcome = residually_free_probe(&p, &w(&f2(), "a"), &budget).unwrap();
        let hom = outcome.found().unwrap();
        assert!(!hom.apply(&w(&f2(), "a")).unwrap().is_empty());
    }

    #[test]
    fn surface_generator_survives_the_retraction() {
        let (surface, mu) = crate::presentations::surface_family(2, true).unwrap();
        let mu = mu.unwrap();
        let a1 = Word::generator(surface.generators(), 0).unwrap();
        assert!(!mu.apply(&a1).unwrap().is_empty());
        // The probe finds some witness too (possibly a different one).
        let budget = SearchBudget { max_total_length: 2, ..Default::default() };
        let outcome = residually_free_probe(&surface, &a1, &budget).unwrap();
        assert!(outcome.found().is_some());
    }

    fn double_family(range: usize) -> (FreeDouble, TwistFamily) {
        let f = f2();
        let word = w(&f, "a b a^-1 b^-1");
        let double = FreeDouble::new(&f, vec!["c".into(), "d".into()], &word).unwrap();
        let twist = double.dehn_twist(double.amalgam_word(Side::Left)).unwrap();
        let retraction = double.retraction().unwrap();
        let family = TwistFamily::new(retraction, twist, range).unwrap();
        (double, family)
    }

    #[test]
    fn identity_probe_is_all_trivial() {
        let (double, family) = double_family(6);
        let e = Word::identity(double.total().generators());
        let probe = stable_kernel_probe(&family, &e).unwrap();
        assert_eq!(probe.classification, StableClassification::AllTrivialInRange);
    }

    #[test]
    fn relator_probe_is_all_trivial() {
        let (double, family) = double_family(6);
        let relator = double.total().relators()[0].clone();
        let probe = stable_kernel_probe(&family, &relator).unwrap();
        assert_eq!(probe.classification, StableClassification::AllTrivialInRange);
    }

    #[test]
    fn cross_commutator_stabilizes_from_one() {
        let (double, family) = double_family(10);
        let total = double.total().generators();
        let g = w(total, "a").commutator(&w(total, "c")).unwrap();
        let probe = stable_kernel_probe(&family, &g).unwrap();
        assert_eq!(probe.classification, StableClassification::EventuallyConstantFrom(1));
        assert!(probe.samples[0].trivial);
        for s in &probe.samples[1..] {
            assert!(!s.trivial, "index {} should be nontrivial", s.index);
        }
    }

    #[test]
    fn separation_growth_on_the_double() {
        // Minimal i >= 1 where f(alpha^i(x)) separates {c, d, cd}.
        let (double, family) = double_family(10);
        let total = double.total().generators();
        let xs = [w(total, "c"), w(total, "d"), w(total, "c d")];
        let mut found = None;
        let mut words: Vec<Word> = xs.to_vec();
        for i in 0..=family.range {
            if i > 0 {
                words = words.iter().map(|x| family.twist.apply(x).unwrap()).collect();
                let images: Vec<Word> =
                    words.iter().map(|x| family.base.apply(x).unwrap()).collect();
                let distinct = images[0] != images[1]
                    && images[0] != images[2]
                    && images[1] != images[2];
                if distinct {
                    found = Some(i);
                    break;
                }
            }
        }
        assert_eq!(found, Some(1));
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[true, true]), StableClassification::AllTrivialInRange);
        assert_eq!(classify(&[false, false]), StableClassification::AllNontrivialInRange);
        assert_eq!(
            classify(&[true, false, false, false]),
            StableClassification::EventuallyConstantFrom(1)
        );
        assert_eq!(
            classify(&[false, true, false, false]),
            StableClassification::EventuallyConstantFrom(2)
        );
        assert_eq!(classify(&[true, false, true]), StableClassification::Mixed);
    }

    #[test]
    fn duplicate_subset_elements_are_rejected() {
        assert!(FiniteSubset::new(vec![w(&f2(), "a"), w(&f2(), "a")]).is_err());
    }

    #[test]
    fn trivial_probe_words_are_rejected() {
        let p = Presentation::free(&f2());
        let budget = SearchBudget::default();
        assert!(residually_free_probe(&p, &Word::identity(&f2()), &budget).is_err());
    }
}
