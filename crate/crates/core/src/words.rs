//! Freely reduced words over a ranked generator alphabet.
//!
//! `Word` is the universal currency of the crate: every value is freely
//! reduced at construction time, so equality of group elements in a free
//! group is plain sequence equality. Alphabets are immutable and shared
//! through `Arc`, which keeps word construction cheap in inner loops.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered list of distinct generator names. The order is fixed and
/// defines all lexicographic comparisons made by the crate.
///
/// Rank 0 is allowed: the free group of rank 0 is the trivial group, which
/// shows up as the target `<0>` of quotient certificates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    /// Builds an alphabet from generator names. Names must be distinct and
    /// match `[a-zA-Z][a-zA-Z0-9_]*`.
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Arc<Alphabet>> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for name in &names {
            if !valid_generator_name(name) {
                return Err(Error::Parse(format!("invalid generator name `{name}`")));
            }
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::Parse(format!("duplicate generator name `{a}`")));
            }
        }
        Ok(Arc::new(Alphabet { names }))
    }

    /// The canonical rank-`n` alphabet used for computed bases and search
    /// targets: `x, y, z, u, v, w`, then `x7, x8, ...`.
    pub fn canonical(rank: usize) -> Arc<Alphabet> {
        const SHORT: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
        let names: Vec<String> = (0..rank)
            .map(|i| {
                if i < SHORT.len() {
                    SHORT[i].to_string()
                } else {
                    format!("x{}", i + 1)
                }
            })
            .collect();
        Arc::new(Alphabet { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn valid_generator_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A single signed letter: generator index plus orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Letter {
        Letter { gen, inverse }
    }

    pub fn inverted(self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }
}

/// A freely reduced word over a fixed alphabet. The empty sequence denotes
/// the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    letters: Vec<Letter>,
}

impl std::hash::Hash for Word {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        // Equal words have equal letters; skipping the alphabet keeps
        // hashing cheap in enumeration-heavy tests.
        self.letters.hash(state);
    }
}

impl Word {
    /// The identity word.
    pub fn identity(alphabet: &Arc<Alphabet>) -> Word {
        Word { alphabet: alphabet.clone(), letters: Vec::new() }
    }

    /// Freely reduces a raw letter sequence. Fails if a letter references a
    /// generator outside the alphabet.
    pub fn reduce_from(alphabet: &Arc<Alphabet>, raw: impl IntoIterator<Item = Letter>) -> Result<Word> {
        let mut letters: Vec<Letter> = Vec::new();
        for letter in raw {
            if letter.gen >= alphabet.rank() {
                return Err(Error::UnknownGenerator(format!("index {}", letter.gen)));
            }
            push_reduced(&mut letters, letter);
        }
        Ok(Word { alphabet: alphabet.clone(), letters })
    }

    /// A single-generator word.
    pub fn generator(alphabet: &Arc<Alphabet>, gen: usize) -> Result<Word> {
        Word::reduce_from(alphabet, [Letter::new(gen, false)])
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation followed by free reduction.
    pub fn mul(&self, rhs: &Word) -> Result<Word> {
        self.check_same_alphabet(rhs)?;
        let mut letters = self.letters.clone();
        for &l in &rhs.letters {
            push_reduced(&mut letters, l);
        }
        Ok(Word { alphabet: self.alphabet.clone(), letters })
    }

    pub fn inverse(&self) -> Word {
        let letters = self.letters.iter().rev().map(|l| l.inverted()).collect();
        Word { alphabet: self.alphabet.clone(), letters }
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut letters: Vec<Letter> = Vec::new();
        for _ in 0..n.unsigned_abs() {
            for &l in &base.letters {
                push_reduced(&mut letters, l);
            }
        }
        Word { alphabet: self.alphabet.clone(), letters }
    }

    /// Conjugate `self` by `c`: returns `c * self * c^-1`.
    pub fn conjugate_by(&self, c: &Word) -> Result<Word> {
        c.mul(self)?.mul(&c.inverse())
    }

    /// Commutator `[self, rhs] = self * rhs * self^-1 * rhs^-1`.
    pub fn commutator(&self, rhs: &Word) -> Result<Word> {
        self.mul(rhs)?.mul(&self.inverse())?.mul(&rhs.inverse())
    }

    /// Splits off the maximal conjugating prefix: returns `(core, conjugator)`
    /// with `self = conjugator * core * conjugator^-1` and `core` cyclically
    /// reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut lo = 0;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo].cancels(self.letters[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        let core = Word {
            alphabet: self.alphabet.clone(),
            letters: self.letters[lo..hi].to_vec(),
        };
        let conjugator = Word {
            alphabet: self.alphabet.clone(),
            letters: self.letters[..lo].to_vec(),
        };
        (core, conjugator)
    }

    /// Length after cyclic reduction, the quantity minimized by the
    /// Whitehead algorithm.
    pub fn cyclic_len(&self) -> usize {
        self.cyclic_reduce().0.len()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let n = self.letters.len();
        n < 2 || !self.letters[0].cancels(self.letters[n - 1])
    }

    /// The maximal root: returns `(root, exponent)` with
    /// `self = root^exponent` and the exponent as large as possible.
    /// `self` is primitive iff the exponent is 1.
    pub fn primitive_root(&self) -> Result<(Word, u32)> {
        if self.is_empty() {
            return Err(Error::EmptyWord);
        }
        let (core, conj) = self.cyclic_reduce();
        let n = core.len();
        for len in 1..=n {
            if n % len != 0 {
                continue;
            }
            let exp = n / len;
            let candidate = &core.letters[..len];
            if core.letters.chunks(len).all(|chunk| chunk == candidate) {
                let root_core = Word {
                    alphabet: self.alphabet.clone(),
                    letters: candidate.to_vec(),
                };
                let root = root_core.conjugate_by(&conj)?;
                return Ok((root, exp as u32));
            }
        }
        unreachable!("len == n always matches");
    }

    /// Number of letters equal to the named generator or its inverse.
    pub fn occurrence_count(&self, gen_name: &str) -> Result<usize> {
        let gen = self
            .alphabet
            .index_of(gen_name)
            .ok_or_else(|| Error::UnknownGenerator(gen_name.to_string()))?;
        Ok(self.letters.iter().filter(|l| l.gen == gen).count())
    }

    /// Exponent sum per generator (the abelianized image).
    pub fn exponent_vector(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.alphabet.rank()];
        for l in &self.letters {
            v[l.gen] += if l.inverse { -1 } else { 1 };
        }
        v
    }

    /// True when the exponent vector is zero.
    pub fn abelianizes_to_zero(&self) -> bool {
        self.exponent_vector().iter().all(|&e| e == 0)
    }

    /// Whether every letter is drawn from the given generator set.
    pub fn supported_on(&self, gens: &[usize]) -> bool {
        self.letters.iter().all(|l| gens.contains(&l.gen))
    }

    fn check_same_alphabet(&self, other: &Word) -> Result<()> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.alphabet.names(),
                other.alphabet.names()
            )))
        }
    }

    /// Parses the whitespace-separated token syntax: each token is `g` or
    /// `g^n` with integer `n`. Round-trips exactly with `Display`.
    pub fn parse(alphabet: &Arc<Alphabet>, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            let (name, exp) = match token.split_once('^') {
                Some((name, exp_str)) => {
                    let exp: i64 = exp_str
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in token `{token}`")))?;
                    (name, exp)
                }
                None => (token, 1),
            };
            let gen = alphabet
                .index_of(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            let letter = Letter::new(gen, exp < 0);
            for _ in 0..exp.unsigned_abs() {
                push_reduced(&mut letters, letter);
            }
        }
        Ok(Word { alphabet: alphabet.clone(), letters })
    }

    /// Shortlex-orders two words over the same alphabet: by length, then by
    /// letter sequence with `g < g^-1 < h < h^-1 < ...`.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            let exp: i64 = if l.inverse { -(run as i64) } else { run as i64 };
            if !first {
                write!(f, " ")?;
            }
            if exp == 1 {
                write!(f, "{}", self.alphabet.name(l.gen))?;
            } else {
                write!(f, "{}^{}", self.alphabet.name(l.gen), exp)?;
            }
            first = false;
            i += run;
        }
        Ok(())
    }
}

/// Equality of cyclic words up to rotation and inversion.
pub fn cyclically_equal(a: &Word, b: &Word) -> bool {
    let (ca, _) = a.cyclic_reduce();
    let (cb, _) = b.cyclic_reduce();
    if ca.len() != cb.len() {
        return false;
    }
    if ca.is_empty() {
        return true;
    }
    let target = cb.letters();
    let rotations_match = |w: &Word| {
        let l = w.letters();
        (0..l.len()).any(|i| {
            l[i..].iter().chain(&l[..i]).copied().collect::<Vec<_>>() == target
        })
    };
    rotations_match(&ca) || rotations_match(&ca.inverse())
}

fn push_reduced(letters: &mut Vec<Letter>, letter: Letter) {
    match letters.last() {
        Some(&last) if last.cancels(letter) => {
            letters.pop();
        }
        _ => letters.push(letter),
    }
}

/// A homomorphism between free groups, given by one image word per domain
/// generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeMap {
    domain: Arc<Alphabet>,
    target: Arc<Alphabet>,
    images: Vec<Word>,
}

impl FreeMap {
    pub fn new(domain: &Arc<Alphabet>, target: &Arc<Alphabet>, images: Vec<Word>) -> Result<FreeMap> {
        if images.len() != domain.rank() {
            return Err(Error::Arity { expected: domain.rank(), got: images.len() });
        }
        for image in &images {
            if image.alphabet() != target {
                return Err(Error::AlphabetMismatch(format!(
                    "image `{image}` is not over the target alphabet"
                )));
            }
        }
        Ok(FreeMap { domain: domain.clone(), target: target.clone(), images })
    }

    pub fn identity(alphabet: &Arc<Alphabet>) -> FreeMap {
        let images = (0..alphabet.rank())
            .map(|g| Word::generator(alphabet, g).expect("in range"))
            .collect();
        FreeMap { domain: alphabet.clone(), target: alphabet.clone(), images }
    }

    pub fn domain(&self) -> &Arc<Alphabet> {
        &self.domain
    }

    pub fn target(&self) -> &Arc<Alphabet> {
        &self.target
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, gen: usize) -> &Word {
        &self.images[gen]
    }

    /// Substitutes images and freely reduces.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.alphabet() != &self.domain {
            return Err(Error::AlphabetMismatch(
                "word is not over the map's domain alphabet".into(),
            ));
        }
        let mut letters = Vec::new();
        for l in w.letters() {
            let image = &self.images[l.gen];
            if l.inverse {
                for im in image.letters().iter().rev() {
                    push_reduced(&mut letters, im.inverted());
                }
            } else {
                for &im in image.letters() {
                    push_reduced(&mut letters, im);
                }
            }
        }
        Ok(Word { alphabet: self.target.clone(), letters })
    }

    /// Composition `self . inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &FreeMap) -> Result<FreeMap> {
        if inner.target != self.domain {
            return Err(Error::AlphabetMismatch(
                "composition: inner target differs from outer domain".into(),
            ));
        }
        let images = inner
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>>>()?;
        FreeMap::new(&inner.domain, &self.target, images)
    }

    /// True when this endomorphism fixes every generator.
    pub fn is_identity(&self) -> bool {
        self.domain == self.target
            && self.images.iter().enumerate().all(|(g, w)| {
                w.letters() == [Letter::new(g, false)]
            })
    }
}
