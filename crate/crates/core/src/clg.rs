//! Recursive constructibility certificates and their checker.
//!
//! A certificate witnesses membership in the hierarchy built from free
//! groups by free products and quotient steps `(rho, GAD)`. The checker
//! recurses children first and grades each condition as verified, sampled
//! (bounded evidence only), unverifiable, or failed; the overall status is
//! the worst one encountered.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::intlinalg::{saturation, Lattice};
use crate::presentations::{GroupHom, Presentation};
use crate::splittings::{EdgeImage, Gad, VertexKind};
use crate::stallings::{hom_injectivity, CoreGraph};
use crate::words::{Alphabet, FreeMap, Letter, Word};

/// A constructibility certificate node.
#[derive(Debug, Clone)]
pub enum ClgCertificate {
    /// A finitely generated free group (level 0). Rank 0 is the trivial
    /// group.
    Free { generators: Arc<Alphabet> },
    /// A free product of two certified groups on disjoint generator names.
    FreeProduct { left: Box<ClgCertificate>, right: Box<ClgCertificate> },
    /// A quotient step: `rho` maps the group to the lower node's group and
    /// the GAD carries the splitting data the conditions refer to.
    Step(StepData),
}

#[derive(Debug, Clone)]
pub struct StepData {
    pub group: Presentation,
    pub rho: GroupHom,
    pub gad: Gad,
    pub lower: Box<ClgCertificate>,
    /// Ball radius for sampled checks.
    pub sample_radius: usize,
    /// Verification hom pushing checks into a free group when the lower
    /// node is not free; every check run through it is downgraded to
    /// sampled.
    pub lower_to_free: Option<GroupHom>,
}

impl ClgCertificate {
    /// The presented group this certificate claims constructible.
    pub fn group(&self) -> Result<Presentation> {
        match self {
            ClgCertificate::Free { generators } => Ok(Presentation::free(generators)),
            ClgCertificate::FreeProduct { left, right } => {
                let l = left.group()?;
                let r = right.group()?;
                let mut names: Vec<String> = l.generators().names().to_vec();
                for n in r.generators().names() {
                    if names.contains(n) {
                        return Err(Error::Invalid(format!(
                            "free product factors share the generator name `{n}`"
                        )));
                    }
                    names.push(n.clone());
                }
                let combined = Alphabet::new(names)?;
                let shift = l.generators().rank();
                let mut relators = Vec::new();
                for rel in l.relators() {
                    relators.push(Word::reduce_from(&combined, rel.letters().iter().copied())?);
                }
                for rel in r.relators() {
                    relators.push(Word::reduce_from(
                        &combined,
                        rel.letters().iter().map(|l| Letter::new(l.gen + shift, l.inverse)),
                    )?);
                }
                Presentation::new(&combined, relators)
            }
            ClgCertificate::Step(step) => Ok(step.group.clone()),
        }
    }

    /// Hierarchy level: 0 for free nodes, one more than the children
    /// otherwise.
    pub fn level(&self) -> usize {
        match self {
            ClgCertificate::Free { .. } => 0,
            ClgCertificate::FreeProduct { left, right } => 1 + left.level().max(right.level()),
            ClgCertificate::Step(step) => 1 + step.lower.level(),
        }
    }
}

/// Status of one checked condition, ordered from best to worst.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Verified,
    Sampled { radius: usize },
    Unverifiable,
    Failed { reason: String },
}

impl CheckStatus {
    fn severity(&self) -> u8 {
        match self {
            CheckStatus::Verified => 0,
            CheckStatus::Sampled { .. } => 1,
            CheckStatus::Unverifiable => 2,
            CheckStatus::Failed { .. } => 3,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, CheckStatus::Failed { .. })
    }

    fn worst(a: CheckStatus, b: &CheckStatus) -> CheckStatus {
        if b.severity() > a.severity() {
            b.clone()
        } else {
            a
        }
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Verified => write!(f, "verified"),
            CheckStatus::Sampled { radius } => write!(f, "sampled(radius {radius})"),
            CheckStatus::Unverifiable => write!(f, "unverifiable"),
            CheckStatus::Failed { reason } => write!(f, "failed: {reason}"),
        }
    }
}

/// The four step conditions plus structural bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClgCondition {
    PeripheralInjectivity,
    EdgeInjectivity,
    QhNonAbelian,
    EnvelopeInjectivity,
    Structure,
}

impl fmt::Display for ClgCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ClgCondition::PeripheralInjectivity => "peripheral-injectivity",
            ClgCondition::EdgeInjectivity => "edge-injectivity",
            ClgCondition::QhNonAbelian => "qh-nonabelian",
            ClgCondition::EnvelopeInjectivity => "envelope-injectivity",
            ClgCondition::Structure => "structure",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: ClgCondition,
    pub item: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ClgReport {
    pub node: String,
    pub level: usize,
    pub status: CheckStatus,
    pub conditions: Vec<ConditionReport>,
    pub children: Vec<ClgReport>,
}

impl ClgReport {
    /// Flattened failed conditions of this node and all children.
    pub fn failed_conditions(&self) -> Vec<(ClgCondition, String)> {
        let mut out: Vec<(ClgCondition, String)> = self
            .conditions
            .iter()
            .filter(|c| c.status.is_failed())
            .map(|c| (c.condition, c.item.clone()))
            .collect();
        for child in &self.children {
            out.extend(child.failed_conditions());
        }
        out
    }
}

/// Checks a certificate recursively, children first.
pub fn check_clg(cert: &ClgCertificate) -> Result<ClgReport> {
    match cert {
        ClgCertificate::Free { generators } => Ok(ClgReport {
            node: format!("free(rank {})", generators.rank()),
            level: 0,
            status: CheckStatus::Verified,
            conditions: vec![ConditionReport {
                condition: ClgCondition::Structure,
                item: "free".into(),
                status: CheckStatus::Verified,
                detail: "level-0 free group".into(),
            }],
            children: Vec::new(),
        }),
        ClgCertificate::FreeProduct { left, right } => {
            let l = check_clg(left)?;
            let r = check_clg(right)?;
            // group() validates generator-name disjointness.
            let structure = match cert.group() {
                Ok(_) => ConditionReport {
                    condition: ClgCondition::Structure,
                    item: "free product".into(),
                    status: CheckStatus::Verified,
                    detail: "factors combine on disjoint generators".into(),
                },
                Err(e) => ConditionReport {
                    condition: ClgCondition::Structure,
                    item: "free product".into(),
                    status: CheckStatus::Failed { reason: e.to_string() },
                    detail: e.to_string(),
                },
            };
            let mut status = structure.status.clone();
            status = CheckStatus::worst(status, &l.status);
            status = CheckStatus::worst(status, &r.status);
            Ok(ClgReport {
                node: "free-product".into(),
                level: cert.level(),
                status,
                conditions: vec![structure],
                children: vec![l, r],
            })
        }
        ClgCertificate::Step(step) => check_step(step, cert.level()),
    }
}

fn check_step(step: &StepData, level: usize) -> Result<ClgReport> {
    let child_report = check_clg(&step.lower)?;
    let lower_group = step.lower.group()?;
    let mut conditions = Vec::new();

    // Structural wiring of rho and the GAD.
    if step.rho.domain() != &step.group {
        return Err(Error::Invalid("rho's domain is not the certified group".into()));
    }
    if step.gad.total != step.group {
        return Err(Error::Invalid("the GAD is not anchored to the certified group".into()));
    }
    if step.rho.target() != &lower_group {
        return Err(Error::Invalid("rho's target is not the lower node's group".into()));
    }
    conditions.push(ConditionReport {
        condition: ClgCondition::Structure,
        item: "rho".into(),
        status: if step.rho.is_verified() {
            CheckStatus::Verified
        } else {
            CheckStatus::Sampled { radius: step.sample_radius }
        },
        detail: "rho anchored to the group, GAD, and lower node".into(),
    });

    // Effective images into a free group: direct when the lower node is
    // free, through the supplied verification hom otherwise.
    enum Path<'a> {
        Direct,
        Through(&'a GroupHom),
        None,
    }
    let path = if lower_group.is_free() {
        Path::Direct
    } else if let Some(vh) = &step.lower_to_free {
        if vh.domain() != &lower_group || !vh.target().is_free() {
            return Err(Error::Invalid(
                "verification hom must map the lower group to a free group".into(),
            ));
        }
        Path::Through(vh)
    } else {
        Path::None
    };
    let downgrade = matches!(path, Path::Through(_));
    let eff = |w: &Word| -> Result<Option<Word>> {
        match &path {
            Path::Direct => Ok(Some(step.rho.apply(w)?)),
            Path::Through(vh) => Ok(Some(vh.apply(&step.rho.apply(w)?)?)),
            Path::None => Ok(None),
        }
    };
    let grade = |status: CheckStatus| -> CheckStatus {
        if downgrade && status == CheckStatus::Verified {
            CheckStatus::Sampled { radius: step.sample_radius }
        } else {
            status
        }
    };

    if matches!(path, Path::None) {
        for (condition, item) in [
            (ClgCondition::PeripheralInjectivity, "all abelian vertices"),
            (ClgCondition::EdgeInjectivity, "all edges"),
            (ClgCondition::QhNonAbelian, "all QH vertices"),
            (ClgCondition::EnvelopeInjectivity, "all rigid vertices"),
        ] {
            conditions.push(ConditionReport {
                condition,
                item: item.into(),
                status: CheckStatus::Unverifiable,
                detail: "lower node is not free and no verification hom was supplied".into(),
            });
        }
    } else {
        check_peripheral(step, &eff, &grade, &mut conditions)?;
        check_edges(step, &eff, &grade, &mut conditions)?;
        check_qh(step, &eff, &grade, &mut conditions)?;
        check_envelopes(step, &eff, &grade, &mut conditions)?;
    }

    let mut status = child_report.status.clone();
    for c in &conditions {
        status = CheckStatus::worst(status, &c.status);
    }
    Ok(ClgReport {
        node: format!("step(level {level})"),
        level,
        status,
        conditions,
        children: vec![child_report],
    })
}

/// Common primitive root and exponents of commuting free-group elements;
/// `None` when some pair fails to commute.
fn common_root_exponents(images: &[Word]) -> Result<Option<(Word, Vec<BigInt>)>> {
    for (i, u) in images.iter().enumerate() {
        for v in &images[i + 1..] {
            if !u.commutator(v)?.is_empty() {
                return Ok(None);
            }
        }
    }
    let Some(first) = images.iter().find(|u| !u.is_empty()) else {
        let alphabet = images
            .first()
            .map(|w| w.alphabet().clone())
            .unwrap_or_else(|| Alphabet::canonical(0));
        return Ok(Some((Word::identity(&alphabet), vec![BigInt::zero(); images.len()])));
    };
    let (root, _) = first.primitive_root()?;
    let mut exponents = Vec::with_capacity(images.len());
    for u in images {
        if u.is_empty() {
            exponents.push(BigInt::zero());
            continue;
        }
        let (r, e) = u.primitive_root()?;
        if r == root {
            exponents.push(BigInt::from(e));
        } else if r == root.inverse() {
            exponents.push(-BigInt::from(e));
        } else {
            return Ok(None);
        }
    }
    Ok(Some((root, exponents)))
}

/// Condition (i): rho is injective on the peripheral subgroup of each
/// abelian vertex. Into a free group this needs the peripheral rank to be
/// at most 1 with a nontrivial image (rank 0 is vacuous).
fn check_peripheral(
    step: &StepData,
    eff: &dyn Fn(&Word) -> Result<Option<Word>>,
    grade: &dyn Fn(CheckStatus) -> CheckStatus,
    out: &mut Vec<ConditionReport>,
) -> Result<()> {
    for (vi, v) in step.gad.vertices.iter().enumerate() {
        let VertexKind::Abelian { .. } = v.kind else { continue };
        let sat = step.gad.peripheral_closure(vi)?;
        let (status, detail) = if sat.basis.is_empty() {
            (CheckStatus::Verified, "peripheral subgroup is trivial".to_string())
        } else if sat.basis.len() >= 2 {
            (
                CheckStatus::Failed {
                    reason: format!(
                        "peripheral subgroup has rank {}, which cannot embed in a maximal cyclic subgroup",
                        sat.basis.len()
                    ),
                },
                format!("peripheral rank {} into a free target", sat.basis.len()),
            )
        } else {
            let images = v
                .marking
                .iter()
                .map(|m| eff(m).map(|o| o.expect("path checked")))
                .collect::<Result<Vec<_>>>()?;
            match common_root_exponents(&images)? {
                None => (
                    CheckStatus::Failed {
                        reason: "abelian vertex images do not commute in the target".into(),
                    },
                    "inconsistent certificate data".into(),
                ),
                Some((_, exponents)) => {
                    let pairing: BigInt =
                        exponents.iter().zip(&sat.basis[0]).map(|(k, b)| k * b).sum();
                    if pairing.is_zero() {
                        (
                            CheckStatus::Failed {
                                reason: "the peripheral generator maps to the identity".into(),
                            },
                            "rank-1 peripheral subgroup dies".into(),
                        )
                    } else {
                        (grade(CheckStatus::Verified), format!("peripheral generator maps with exponent {pairing}"))
                    }
                }
            }
        };
        out.push(ConditionReport {
            condition: ClgCondition::PeripheralInjectivity,
            item: v.name.clone(),
            status,
            detail,
        });
    }
    Ok(())
}

/// Condition (ii): rho is injective on each edge group, and at least one
/// edge image is maximal abelian in its side. Injectivity into a free group
/// requires nontrivial cyclic images (rank >= 2 edge groups cannot embed);
/// maximality is graded per endpoint: primitive image word for non-abelian
/// hosts, saturation of the edge tuples for abelian hosts.
fn check_edges(
    step: &StepData,
    eff: &dyn Fn(&Word) -> Result<Option<Word>>,
    grade: &dyn Fn(CheckStatus) -> CheckStatus,
    out: &mut Vec<ConditionReport>,
) -> Result<()> {
    for (ei, e) in step.gad.edges.iter().enumerate() {
        let item = format!("edge {ei}");
        let images = e
            .marking
            .iter()
            .map(|m| eff(m).map(|o| o.expect("path checked")))
            .collect::<Result<Vec<_>>>()?;
        // Injectivity of the edge group.
        let injectivity = if e.generators.len() >= 2 {
            CheckStatus::Failed {
                reason: format!(
                    "edge group of rank {} cannot embed in a free group through a cyclic image",
                    e.generators.len()
                ),
            }
        } else if images.iter().any(Word::is_empty) {
            CheckStatus::Failed { reason: "edge generator image is trivial".into() }
        } else {
            grade(CheckStatus::Verified)
        };
        // Maximal-abelian grading per endpoint.
        let mut side_status: Vec<CheckStatus> = Vec::new();
        for vertex in [e.from, e.to] {
            let host = &step.gad.vertices[vertex];
            match host.kind {
                VertexKind::Abelian { rank } => {
                    let tuples: Vec<Vec<BigInt>> = edge_tuples_into(e, vertex);
                    let lattice = Lattice::new(rank, tuples)?;
                    let sat = saturation(&lattice);
                    if sat.index != BigInt::from(1) {
                        side_status.push(CheckStatus::Failed {
                            reason: format!(
                                "edge image has index {} in its saturation",
                                sat.index
                            ),
                        });
                    } else if sat.basis.len() == rank {
                        side_status.push(grade(CheckStatus::Verified));
                    } else {
                        side_status.push(CheckStatus::Sampled { radius: step.sample_radius });
                    }
                }
                _ => {
                    // Image of the edge word must not be a proper power.
                    let mut ok = true;
                    for img in &images {
                        if img.is_empty() {
                            ok = false;
                            break;
                        }
                        let (_, exp) = img.primitive_root()?;
                        if exp != 1 {
                            ok = false;
                            break;
                        }
                    }
                    side_status.push(if ok {
                        grade(CheckStatus::Verified)
                    } else {
                        CheckStatus::Failed {
                            reason: "edge image is trivial or a proper power".into(),
                        }
                    });
                }
            }
        }
        let maximality = side_status
            .iter()
            .min_by_key(|s| s.severity())
            .cloned()
            .unwrap_or(CheckStatus::Unverifiable);
        let combined = CheckStatus::worst(injectivity, &maximality);
        let detail = match &combined {
            CheckStatus::Verified => "edge group embeds with a maximal-abelian image".into(),
            other => other.to_string(),
        };
        out.push(ConditionReport {
            condition: ClgCondition::EdgeInjectivity,
            item,
            status: combined,
            detail,
        });
    }
    Ok(())
}

fn edge_tuples_into(e: &crate::splittings::GadEdge, vertex: usize) -> Vec<Vec<BigInt>> {
    let mut tuples = Vec::new();
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
    tuples
}

/// Condition (iii): the image of each QH vertex group is non-abelian; some
/// pair of generator images must fail to commute.
fn check_qh(
    step: &StepData,
    eff: &dyn Fn(&Word) -> Result<Option<Word>>,
    grade: &dyn Fn(CheckStatus) -> CheckStatus,
    out: &mut Vec<ConditionReport>,
) -> Result<()> {
    for v in &step.gad.vertices {
        let VertexKind::Qh { .. } = v.kind else { continue };
        let images = v
            .marking
            .iter()
            .map(|m| eff(m).map(|o| o.expect("path checked")))
            .collect::<Result<Vec<_>>>()?;
        let mut witness = None;
        'pairs: for i in 0..images.len() {
            for j in i + 1..images.len() {
                if !images[i].commutator(&images[j])?.is_empty() {
                    witness = Some((i, j));
                    break 'pairs;
                }
            }
        }
        let (status, detail) = match witness {
            Some((i, j)) => (
                grade(CheckStatus::Verified),
                format!(
                    "images of `{}` and `{}` do not commute",
                    v.generators[i], v.generators[j]
                ),
            ),
            None => (
                CheckStatus::Failed { reason: "QH vertex image is abelian".into() },
                "every pair of generator images commutes".into(),
            ),
        };
        out.push(ConditionReport {
            condition: ClgCondition::QhNonAbelian,
            item: v.name.clone(),
            status,
            detail,
        });
    }
    Ok(())
}

/// Condition (iv): rho is injective on the envelope of each rigid vertex.
/// Envelope generators are the vertex marking, the incident edge markings,
/// and the peripheral-subgroup words of adjacent abelian vertices. When the
/// envelope support is free in the total group, injectivity is decided via
/// a Stallings basis and image-graph ranks; otherwise a ball of envelope
/// words is sampled.
fn check_envelopes(
    step: &StepData,
    eff: &dyn Fn(&Word) -> Result<Option<Word>>,
    grade: &dyn Fn(CheckStatus) -> CheckStatus,
    out: &mut Vec<ConditionReport>,
) -> Result<()> {
    for (vi, v) in step.gad.vertices.iter().enumerate() {
        let VertexKind::Rigid = v.kind else { continue };
        let mut envelope: Vec<Word> = v.marking.clone();
        for e in &step.gad.edges {
            if e.from != vi && e.to != vi {
                continue;
            }
            envelope.extend(e.marking.iter().cloned());
            // Peripheral words of abelian vertices across the edge.
            let other = if e.from == vi { e.to } else { e.from };
            let host = &step.gad.vertices[other];
            if let VertexKind::Abelian { .. } = host.kind {
                let sat = step.gad.peripheral_closure(other)?;
                for b in &sat.basis {
                    let mut word = Word::identity(step.group.generators());
                    for (g, coeff) in host.marking.iter().zip(b) {
                        let exp: i64 = coeff.try_into().map_err(|_| {
                            Error::Invalid("peripheral coordinate too large".into())
                        })?;
                        word = word.mul(&g.pow(exp))?;
                    }
                    envelope.push(word);
                }
            }
        }
        envelope.retain(|w| !w.is_empty());
        if envelope.is_empty() {
            out.push(ConditionReport {
                condition: ClgCondition::EnvelopeInjectivity,
                item: v.name.clone(),
                status: grade(CheckStatus::Verified),
                detail: "empty envelope".into(),
            });
            continue;
        }
        let support: Vec<usize> = {
            let mut s: Vec<usize> = envelope
                .iter()
                .flat_map(|w| w.letters().iter().map(|l| l.gen))
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let support_free =
            !step.group.relators().iter().any(|r| r.supported_on(&support));
        let (status, detail) = if support_free {
            // The envelope subgroup is free on the support side; decide
            // injectivity on a Stallings basis via image-graph rank.
            let graph = CoreGraph::fold(step.group.generators(), &envelope)?;
            let basis = graph.subgroup_basis();
            let rank = basis.generators.len();
            let images = basis
                .generators
                .iter()
                .map(|b| eff(b).map(|o| o.expect("path checked")))
                .collect::<Result<Vec<_>>>()?;
            let target_alphabet = images
                .first()
                .map(|w| w.alphabet().clone())
                .unwrap_or_else(|| Alphabet::canonical(0));
            let map = FreeMap::new(&basis.alphabet, &target_alphabet, images)?;
            if hom_injectivity(&map)? {
                (
                    grade(CheckStatus::Verified),
                    format!("envelope of rank {rank} keeps its rank in the image"),
                )
            } else {
                (
                    CheckStatus::Failed {
                        reason: format!("envelope of rank {rank} loses rank under rho"),
                    },
                    "image graph rank drops".into(),
                )
            }
        } else {
            // Sampled: freely nontrivial products of envelope generators up
            // to the radius must have nontrivial images.
            let symbol_alphabet = Alphabet::canonical(envelope.len());
            let expand = FreeMap::new(&symbol_alphabet, step.group.generators(), envelope.clone())?;
            let mut bad = None;
            for symbol_word in crate::diagrams::shortlex_words(&symbol_alphabet, step.sample_radius)
            {
                let expanded = expand.apply(&symbol_word)?;
                if expanded.is_empty() {
                    continue;
                }
                let image = eff(&expanded)?.expect("path checked");
                if image.is_empty() {
                    bad = Some(expanded);
                    break;
                }
            }
            match bad {
                Some(word) => (
                    CheckStatus::Failed {
                        reason: format!("freely nontrivial envelope word `{word}` dies under rho"),
                    },
                    "sampled refutation".into(),
                ),
                None => (
                    CheckStatus::Sampled { radius: step.sample_radius },
                    "all sampled envelope words survive".into(),
                ),
            }
        };
        out.push(ConditionReport {
            condition: ClgCondition::EnvelopeInjectivity,
            item: v.name.clone(),
            status,
            detail,
        });
    }
    Ok(())
}
