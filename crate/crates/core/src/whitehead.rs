//! Whitehead automorphisms and greedy length minimization.
//!
//! The classical generating family of `Aut(F)` in its two types: type I
//! moves permute and invert the basis, type II moves are determined by a
//! multiplier letter `a` and a cut set `A` containing `a` but not `a^-1`.
//! Greedy descent over the family minimizes cyclic length; enumeration cost
//! grows exponentially with rank, so rank <= 6 is the supported envelope
//! for exhaustive move enumeration.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::words::{Alphabet, FreeMap, Letter, Word};

/// Membership flags of a generator and its inverse in the cut set of a
/// type II move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CutFlags {
    pub plus: bool,
    pub minus: bool,
}

/// One Whitehead automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WhiteheadMove {
    /// Type I: generator `i` maps to the letter `images[i]`; the images form
    /// a signed permutation of the basis.
    Relabel { images: Vec<Letter> },
    /// Type II: the move `(A, a)` with multiplier `a`. `cut[g]` records
    /// whether `g` and `g^-1` lie in `A`; the entry for the multiplier's own
    /// generator is ignored.
    Multiplier { multiplier: Letter, cut: Vec<CutFlags> },
}

impl WhiteheadMove {
    /// The generator-image table of this move over `alphabet`.
    pub fn to_map(&self, alphabet: &Arc<Alphabet>) -> FreeMap {
        match self {
            WhiteheadMove::Relabel { images } => {
                let words = images
                    .iter()
                    .map(|&l| Word::reduce_from(alphabet, [l]).expect("letter in range"))
                    .collect();
                FreeMap::new(alphabet, alphabet, words).expect("arity matches")
            }
            WhiteheadMove::Multiplier { multiplier, cut } => {
                let a = *multiplier;
                let words = (0..alphabet.rank())
                    .map(|g| {
                        if g == a.gen {
                            return Word::reduce_from(alphabet, [Letter::new(g, false)]).unwrap();
                        }
                        let flags = cut[g];
                        let mut letters = Vec::with_capacity(3);
                        if flags.minus {
                            letters.push(a.inverted());
                        }
                        letters.push(Letter::new(g, false));
                        if flags.plus {
                            letters.push(a);
                        }
                        Word::reduce_from(alphabet, letters).unwrap()
                    })
                    .collect();
                FreeMap::new(alphabet, alphabet, words).expect("arity matches")
            }
        }
    }

    /// The inverse move: for type II, `(A, a)^-1 = (A - a + a^-1, a^-1)`.
    pub fn inverse(&self) -> WhiteheadMove {
        match self {
            WhiteheadMove::Relabel { images } => {
                let mut inv = vec![Letter::new(0, false); images.len()];
                for (g, &l) in images.iter().enumerate() {
                    inv[l.gen] = Letter::new(g, l.inverse);
                }
                WhiteheadMove::Relabel { images: inv }
            }
            WhiteheadMove::Multiplier { multiplier, cut } => WhiteheadMove::Multiplier {
                multiplier: multiplier.inverted(),
                cut: cut.clone(),
            },
        }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> MoveDisplay<'a> {
        MoveDisplay { mv: self, alphabet }
    }
}

pub struct MoveDisplay<'a> {
    mv: &'a WhiteheadMove,
    alphabet: &'a Alphabet,
}

impl fmt::Display for MoveDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = |l: Letter| {
            if l.inverse {
                format!("{}^-1", self.alphabet.name(l.gen))
            } else {
                self.alphabet.name(l.gen).to_string()
            }
        };
        match self.mv {
            WhiteheadMove::Relabel { images } => {
                write!(f, "relabel[")?;
                for (g, &l) in images.iter().enumerate() {
                    if g > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}->{}", self.alphabet.name(g), letter(l))?;
                }
                write!(f, "]")
            }
            WhiteheadMove::Multiplier { multiplier, cut } => {
                write!(f, "cut[{{")?;
                let mut first = true;
                for (g, flags) in cut.iter().enumerate() {
                    if g == multiplier.gen {
                        continue;
                    }
                    for (present, inv) in [(flags.plus, false), (flags.minus, true)] {
                        if present {
                            if !first {
                                write!(f, ", ")?;
                            }
                            write!(f, "{}", letter(Letter::new(g, inv)))?;
                            first = false;
                        }
                    }
                }
                if !first {
                    write!(f, ", ")?;
                }
                write!(f, "{}}}; {}]", letter(*multiplier), letter(*multiplier))
            }
        }
    }
}

/// Enumerates every Whitehead automorphism of the given rank in the fixed
/// deterministic order: type I first (permutations in lexicographic order,
/// then inversion patterns in binary order), then type II ordered by
/// multiplier letter and cut set.
pub fn enumerate_moves(rank: usize) -> Vec<WhiteheadMove> {
    let mut moves = Vec::new();
    for perm in permutations(rank) {
        for mask in 0u32..(1 << rank) {
            let images = perm
                .iter()
                .enumerate()
                .map(|(i, &p)| Letter::new(p, mask & (1 << i) != 0))
                .collect();
            moves.push(WhiteheadMove::Relabel { images });
        }
    }
    for gen in 0..rank {
        for inverse in [false, true] {
            let multiplier = Letter::new(gen, inverse);
            let others: Vec<usize> = (0..rank).filter(|&g| g != gen).collect();
            let combos = 4usize.pow(others.len() as u32);
            for code in 0..combos {
                let mut cut = vec![CutFlags { plus: false, minus: false }; rank];
                let mut c = code;
                for &g in &others {
                    cut[g] = CutFlags { plus: c & 1 != 0, minus: c & 2 != 0 };
                    c >>= 2;
                }
                moves.push(WhiteheadMove::Multiplier { multiplier, cut });
            }
        }
    }
    moves
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        result.push(current.clone());
        // next_permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    if n == 0 {
        result.push(Vec::new());
    }
    result
}

/// Result of greedy Whitehead minimization.
#[derive(Debug, Clone)]
pub struct Minimization {
    pub minimal: Word,
    pub moves: Vec<WhiteheadMove>,
}

/// Greedy steepest descent over all Whitehead automorphisms.
///
/// The descent measure is the pair (cyclic length, word length) ordered
/// lexicographically: a move is taken only when it strictly decreases the
/// pair, with ties among equally steep moves broken by the enumeration
/// order. Applying the returned moves to the input, in order, yields
/// `minimal`. Running the function on its own output returns zero moves.
pub fn whitehead_minimize(w: &Word) -> Result<Minimization> {
    let alphabet = w.alphabet().clone();
    let moves_table = enumerate_moves(alphabet.rank());
    let mut current = w.clone();
    let mut taken = Vec::new();
    loop {
        let current_key = (current.cyclic_len(), current.len());
        let mut best: Option<((usize, usize), &WhiteheadMove, Word)> = None;
        for mv in &moves_table {
            let image = mv.to_map(&alphabet).apply(&current)?;
            let key = (image.cyclic_len(), image.len());
            if key < current_key && best.as_ref().map_or(true, |(bk, _, _)| key < *bk) {
                best = Some((key, mv, image));
            }
        }
        match best {
            Some((_, mv, image)) => {
                taken.push(mv.clone());
                current = image;
            }
            None => break,
        }
    }
    Ok(Minimization { minimal: current, moves: taken })
}

/// A word is Whitehead reduced iff no single Whitehead automorphism strictly
/// decreases its cyclic length. The check is exhaustive over both types.
pub fn is_whitehead_reduced(w: &Word) -> Result<bool> {
    let alphabet = w.alphabet().clone();
    let target = w.cyclic_len();
    for mv in enumerate_moves(alphabet.rank()) {
        let image = mv.to_map(&alphabet).apply(w)?;
        if image.cyclic_len() < target {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alpha(names: &[&str]) -> Arc<Alphabet> {
        Alphabet::new(names.to_vec()).unwrap()
    }

    #[test]
    fn move_counts_match_the_type_formulas() {
        // rank n: n! * 2^n type I, 2n * 4^(n-1) type II.
        for rank in 1..=3usize {
            let all = enumerate_moves(rank);
            let type1 = all
                .iter()
                .filter(|m| matches!(m, WhiteheadMove::Relabel { .. }))
                .count();
            let type2 = all.len() - type1;
            let fact: usize = (1..=rank).product();
            assert_eq!(type1, fact << rank);
            assert_eq!(type2, 2 * rank * 4usize.pow(rank as u32 - 1));
        }
    }

    #[test]
    fn primitive_generator_is_already_minimal() {
        let f = alpha(&["a", "b"]);
        let w = Word::parse(&f, "a").unwrap();
        let min = whitehead_minimize(&w).unwrap();
        assert_eq!(min.minimal, w);
        assert!(min.moves.is_empty());
        assert_eq!(min.minimal.cyclic_len(), 1);
    }

    #[test]
    fn conjugate_of_generator_minimizes_to_the_generator() {
        let f = alpha(&["a", "b"]);
        let w = Word::parse(&f, "a b a^-1").unwrap();
        let min = whitehead_minimize(&w).unwrap();
        assert_eq!(min.minimal, Word::parse(&f, "b").unwrap());
        assert_eq!(min.minimal.cyclic_len(), 1);
        // Applying the recorded moves to the input reproduces the output.
        let mut image = w;
        for mv in &min.moves {
            image = mv.to_map(&f).apply(&image).unwrap();
        }
        assert_eq!(image, min.minimal);
    }

    #[test]
    fn footnote_word_is_whitehead_reduced_in_rank_3() {
        let f = alpha(&["x", "y", "z"]);
        let w = Word::parse(&f, "x^2 y x^-2 y^-1 z^2 y z^-2").unwrap();
        assert!(is_whitehead_reduced(&w).unwrap());
        // Contrast: a conjugate of a shorter word is not reduced.
        let not_reduced = Word::parse(&f, "x y x^-1 z").unwrap();
        assert!(!is_whitehead_reduced(&not_reduced).unwrap());
    }

    #[test]
    fn minimization_is_stable_on_its_own_output() {
        let f = alpha(&["a", "b"]);
        for text in ["a b a^-1", "a^2 b^2 a^-2 b^-1", "b a b^-1 a b"] {
            let w = Word::parse(&f, text).unwrap();
            let first = whitehead_minimize(&w).unwrap();
            let second = whitehead_minimize(&first.minimal).unwrap();
            assert_eq!(second.minimal, first.minimal);
            assert!(second.moves.is_empty());
        }
    }

    proptest! {
        #[test]
        fn moves_compose_with_their_inverses_to_the_identity(idx in 0usize..1000) {
            let f = alpha(&["a", "b", "c"]);
            let all = enumerate_moves(3);
            let mv = &all[idx % all.len()];
            let composed = mv.inverse().to_map(&f).compose(&mv.to_map(&f)).unwrap();
            prop_assert!(composed.is_identity());
        }

        #[test]
        fn descent_never_increases_cyclic_length(raw in prop::collection::vec((0usize..2, any::<bool>()), 0..10)) {
            let f = alpha(&["a", "b"]);
            let letters: Vec<Letter> = raw.into_iter().map(|(g, i)| Letter::new(g, i)).collect();
            let w = Word::reduce_from(&f, letters).unwrap();
            let min = whitehead_minimize(&w).unwrap();
            prop_assert!(min.minimal.cyclic_len() <= w.cyclic_len());
        }
    }
}
