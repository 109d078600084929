//! JSON mirrors of the domain types: the wire formats used by the CLI and
//! documented in `docs/schemas.md`.
//!
//! Words travel as their text syntax (whitespace-separated `g` / `g^n`
//! tokens), matrices as row-major nested integer arrays, and image tables
//! as name-keyed maps in sorted order. The in-memory computation is
//! arbitrary precision; the JSON layer carries integers up to 64 bits.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::clg::{ClgCertificate, StepData};
use crate::diagrams::{BranchWitness, DiagramEdge, FactorSet, MrDiagram};
use crate::error::{Error, Result};
use crate::intlinalg::{IntMatrix, Lattice};
use crate::presentations::{GroupHom, HomStatus, Presentation, Properness};
use crate::splittings::{
    EdgeImage, FreeDouble, Gad, GadEdge, GadVertex, OneEdgeSplitting, TwistAutomorphism,
    TwistKind, VertexKind,
};
use crate::stallings::CoreGraph;
use crate::words::{Alphabet, FreeMap, Word};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PresentationJson {
    pub generators: Vec<String>,
    #[serde(default)]
    pub relators: Vec<String>,
}

impl PresentationJson {
    pub fn to_presentation(&self) -> Result<Presentation> {
        let alphabet = Alphabet::new(self.generators.clone())?;
        let relators = self
            .relators
            .iter()
            .map(|r| Word::parse(&alphabet, r))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(&alphabet, relators)
    }

    pub fn from_presentation(p: &Presentation) -> PresentationJson {
        PresentationJson {
            generators: p.generators().names().to_vec(),
            relators: p.relators().iter().map(|r| r.to_string()).collect(),
        }
    }
}

/// Hom targets: a full presentation or a free-abelian rank (rendered as
/// `Z^n` on generators `a1..an`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetJson {
    FreeAbelian { free_abelian: usize },
    Presented(PresentationJson),
}

impl TargetJson {
    pub fn to_presentation(&self) -> Result<Presentation> {
        match self {
            TargetJson::Presented(p) => p.to_presentation(),
            TargetJson::FreeAbelian { free_abelian } => {
                let names: Vec<String> = (1..=*free_abelian).map(|i| format!("a{i}")).collect();
                Presentation::free_abelian(&Alphabet::new(names)?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupHomJson {
    pub domain: PresentationJson,
    pub target: TargetJson,
    pub images: BTreeMap<String, String>,
    #[serde(default)]
    pub status: Option<HomStatus>,
}

pub fn images_by_name(
    domain: &Arc<Alphabet>,
    target: &Arc<Alphabet>,
    images: &BTreeMap<String, String>,
) -> Result<Vec<Word>> {
    let mut out = Vec::with_capacity(domain.rank());
    for name in domain.names() {
        let text = images
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("missing image for generator `{name}`")))?;
        out.push(Word::parse(target, text)?);
    }
    Ok(out)
}

impl GroupHomJson {
    pub fn to_hom(&self) -> Result<GroupHom> {
        let domain = self.domain.to_presentation()?;
        let target = self.target.to_presentation()?;
        let images = images_by_name(domain.generators(), target.generators(), &self.images)?;
        match self.status {
            Some(HomStatus::Asserted) => GroupHom::asserted(domain, target, images),
            _ => GroupHom::verified(domain, target, images),
        }
    }

    pub fn from_hom(hom: &GroupHom) -> GroupHomJson {
        let images = hom
            .domain()
            .generators()
            .names()
            .iter()
            .zip(hom.images())
            .map(|(n, w)| (n.clone(), w.to_string()))
            .collect();
        GroupHomJson {
            domain: PresentationJson::from_presentation(hom.domain()),
            target: TargetJson::Presented(PresentationJson::from_presentation(hom.target())),
            images,
            status: Some(hom.status()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreGraphJson {
    pub vertices: usize,
    pub base: usize,
    /// Edge triples `[source, label, target]`.
    pub edges: Vec<(usize, String, usize)>,
    pub alphabet: Vec<String>,
}

impl CoreGraphJson {
    pub fn from_graph(g: &CoreGraph) -> CoreGraphJson {
        CoreGraphJson {
            vertices: g.vertex_count(),
            base: g.base(),
            edges: g
                .edges()
                .iter()
                .map(|e| (e.source, g.alphabet().name(e.label).to_string(), e.target))
                .collect(),
            alphabet: g.alphabet().names().to_vec(),
        }
    }
}

pub fn matrix_to_json(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    m.get(i, j).try_into().map_err(|_| {
                        Error::Invalid("matrix entry exceeds the 64-bit JSON range".into())
                    })
                })
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<i64>]) -> Result<IntMatrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Invalid("matrix JSON must have positive dimensions".into()));
    }
    IntMatrix::from_rows(
        rows.iter().map(|r| r.iter().map(|&e| BigInt::from(e)).collect()).collect(),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    pub ambient: usize,
    #[serde(default)]
    pub generators: Vec<Vec<i64>>,
}

impl LatticeJson {
    pub fn to_lattice(&self) -> Result<Lattice> {
        Lattice::new(
            self.ambient,
            self.generators
                .iter()
                .map(|g| g.iter().map(|&e| BigInt::from(e)).collect())
                .collect(),
        )
    }
}

pub fn tuple_to_json(t: &[BigInt]) -> Result<Vec<i64>> {
    t.iter()
        .map(|e| {
            e.try_into()
                .map_err(|_| Error::Invalid("tuple entry exceeds the 64-bit JSON range".into()))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum VertexKindJson {
    Qh { genus: u32, boundary: u32, orientable: bool },
    Abelian { rank: usize },
    Rigid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadVertexJson {
    pub name: String,
    pub kind: VertexKindJson,
    pub generators: Vec<String>,
    pub marking: Vec<String>,
}

/// Edge images: `{ "word": "..." }` into QH/rigid endpoints, `{ "tuple":
/// [..] }` into abelian ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeImageJson {
    Word { word: String },
    Tuple { tuple: Vec<i64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadEdgeJson {
    pub from: usize,
    pub to: usize,
    pub generators: Vec<String>,
    pub marking: Vec<String>,
    pub into_from: Vec<EdgeImageJson>,
    pub into_to: Vec<EdgeImageJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadJson {
    pub total: PresentationJson,
    pub vertices: Vec<GadVertexJson>,
    #[serde(default)]
    pub edges: Vec<GadEdgeJson>,
}

impl GadJson {
    pub fn to_gad(&self) -> Result<Gad> {
        let total = self.total.to_presentation()?;
        let total_alphabet = total.generators().clone();
        let mut vertices = Vec::new();
        for v in &self.vertices {
            let kind = match v.kind {
                VertexKindJson::Qh { genus, boundary, orientable } => {
                    VertexKind::Qh { genus, boundary, orientable }
                }
                VertexKindJson::Abelian { rank } => VertexKind::Abelian { rank },
                VertexKindJson::Rigid => VertexKind::Rigid,
            };
            let marking = v
                .marking
                .iter()
                .map(|m| Word::parse(&total_alphabet, m))
                .collect::<Result<Vec<_>>>()?;
            vertices.push(GadVertex { name: v.name.clone(), kind, generators: v.generators.clone(), marking });
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            let marking = e
                .marking
                .iter()
                .map(|m| Word::parse(&total_alphabet, m))
                .collect::<Result<Vec<_>>>()?;
            let convert = |images: &[EdgeImageJson], endpoint: usize| -> Result<Vec<EdgeImage>> {
                images
                    .iter()
                    .map(|img| match img {
                        EdgeImageJson::Tuple { tuple } => Ok(EdgeImage::Tuple(
                            tuple.iter().map(|&x| BigInt::from(x)).collect(),
                        )),
                        EdgeImageJson::Word { word } => {
                            let vertex = self
                                .vertices
                                .get(endpoint)
                                .ok_or_else(|| Error::Invalid("edge endpoint out of range".into()))?;
                            let alphabet = Alphabet::new(vertex.generators.clone())?;
                            Ok(EdgeImage::Word(Word::parse(&alphabet, word)?))
                        }
                    })
                    .collect()
            };
            edges.push(GadEdge {
                from: e.from,
                to: e.to,
                generators: e.generators.clone(),
                marking,
                into_from: convert(&e.into_from, e.from)?,
                into_to: convert(&e.into_to, e.to)?,
            });
        }
        Gad::new(total, vertices, edges)
    }

    pub fn from_gad(gad: &Gad) -> Result<GadJson> {
        let vertices = gad
            .vertices
            .iter()
            .map(|v| GadVertexJson {
                name: v.name.clone(),
                kind: match v.kind {
                    VertexKind::Qh { genus, boundary, orientable } => {
                        VertexKindJson::Qh { genus, boundary, orientable }
                    }
                    VertexKind::Abelian { rank } => VertexKindJson::Abelian { rank },
                    VertexKind::Rigid => VertexKindJson::Rigid,
                },
                generators: v.generators.clone(),
                marking: v.marking.iter().map(|m| m.to_string()).collect(),
            })
            .collect();
        let mut edges = Vec::new();
        for e in &gad.edges {
            let convert = |images: &[EdgeImage]| -> Result<Vec<EdgeImageJson>> {
                images
                    .iter()
                    .map(|img| match img {
                        EdgeImage::Word(w) => Ok(EdgeImageJson::Word { word: w.to_string() }),
                        EdgeImage::Tuple(t) => Ok(EdgeImageJson::Tuple { tuple: tuple_to_json(t)? }),
                    })
                    .collect()
            };
            edges.push(GadEdgeJson {
                from: e.from,
                to: e.to,
                generators: e.generators.clone(),
                marking: e.marking.iter().map(|m| m.to_string()).collect(),
                into_from: convert(&e.into_from)?,
                into_to: convert(&e.into_to)?,
            });
        }
        Ok(GadJson { total: PresentationJson::from_presentation(&gad.total), vertices, edges })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SplittingJson {
    Amalgam {
        total: PresentationJson,
        left: Vec<String>,
        right: Vec<String>,
        edge_left: String,
        edge_right: String,
    },
    Hnn {
        total: PresentationJson,
        base: Vec<String>,
        stable: String,
        edge: String,
        partner: String,
    },
}

impl SplittingJson {
    pub fn to_splitting(&self) -> Result<OneEdgeSplitting> {
        match self {
            SplittingJson::Amalgam { total, left, right, edge_left, edge_right } => {
                let total = total.to_presentation()?;
                let alphabet = total.generators().clone();
                let resolve = |names: &[String]| -> Result<Vec<usize>> {
                    names
                        .iter()
                        .map(|n| {
                            alphabet
                                .index_of(n)
                                .ok_or_else(|| Error::UnknownGenerator(n.clone()))
                        })
                        .collect()
                };
                OneEdgeSplitting::amalgam(
                    total.clone(),
                    resolve(left)?,
                    resolve(right)?,
                    Word::parse(&alphabet, edge_left)?,
                    Word::parse(&alphabet, edge_right)?,
                )
            }
            SplittingJson::Hnn { total, base, stable, edge, partner } => {
                let total = total.to_presentation()?;
                let alphabet = total.generators().clone();
                let base = base
                    .iter()
                    .map(|n| {
                        alphabet.index_of(n).ok_or_else(|| Error::UnknownGenerator(n.clone()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let stable = alphabet
                    .index_of(stable)
                    .ok_or_else(|| Error::UnknownGenerator(stable.clone()))?;
                OneEdgeSplitting::hnn(
                    total.clone(),
                    base,
                    stable,
                    Word::parse(&alphabet, edge)?,
                    Word::parse(&alphabet, partner)?,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoubleJson {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub word: String,
}

impl DoubleJson {
    pub fn to_double(&self) -> Result<FreeDouble> {
        let left = Alphabet::new(self.left.clone())?;
        let word = Word::parse(&left, &self.word)?;
        FreeDouble::new(&left, self.right.clone(), &word)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistJson {
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub twisting: Option<String>,
    pub generators: Vec<String>,
    pub images: BTreeMap<String, String>,
    pub inverse_images: BTreeMap<String, String>,
    #[serde(default)]
    pub status: Option<HomStatus>,
}

impl TwistJson {
    /// Rebuilds the twist. The two tables must compose to the identity,
    /// checked by free reduction or, failing that, in a visibly abelian
    /// domain.
    pub fn to_twist(&self, total: &Presentation) -> Result<TwistAutomorphism> {
        let alphabet = total.generators().clone();
        if self.generators != alphabet.names() {
            return Err(Error::AlphabetMismatch(
                "twist generators do not match the total group".into(),
            ));
        }
        let table = FreeMap::new(
            &alphabet,
            &alphabet,
            images_by_name(&alphabet, &alphabet, &self.images)?,
        )?;
        let inverse_table = FreeMap::new(
            &alphabet,
            &alphabet,
            images_by_name(&alphabet, &alphabet, &self.inverse_images)?,
        )?;
        let round = table.compose(&inverse_table)?;
        if !round.is_identity() {
            let vouched = total.is_visibly_abelian()
                && (0..alphabet.rank()).all(|g| {
                    let image = round.image(g);
                    let mut expected = vec![0i64; alphabet.rank()];
                    expected[g] = 1;
                    image.exponent_vector() == expected
                });
            if !vouched {
                return Err(Error::Invalid(
                    "twist tables do not compose to the identity".into(),
                ));
            }
        }
        let twisting = match &self.twisting {
            Some(text) => Word::parse(&alphabet, text)?,
            None => Word::identity(&alphabet),
        };
        Ok(TwistAutomorphism {
            kind: match self.kind.as_deref() {
                Some("hnn") => TwistKind::Hnn,
                Some("inner") => TwistKind::Inner,
                Some("unimodular") => TwistKind::Unimodular,
                _ => TwistKind::Amalgam,
            },
            twisting,
            table,
            inverse_table,
            status: self.status.unwrap_or(HomStatus::Asserted),
        })
    }

    pub fn from_twist(twist: &TwistAutomorphism) -> TwistJson {
        let alphabet = twist.table.domain();
        let to_map = |m: &FreeMap| {
            alphabet
                .names()
                .iter()
                .enumerate()
                .map(|(g, n)| (n.clone(), m.image(g).to_string()))
                .collect()
        };
        TwistJson {
            kind: Some(
                match twist.kind {
                    TwistKind::Amalgam => "amalgam",
                    TwistKind::Hnn => "hnn",
                    TwistKind::Inner => "inner",
                    TwistKind::Unimodular => "unimodular",
                }
                .to_string(),
            ),
            twisting: Some(twist.twisting.to_string()),
            generators: alphabet.names().to_vec(),
            images: to_map(&twist.table),
            inverse_images: to_map(&twist.inverse_table),
            status: Some(twist.status),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagramEdgeJson {
    pub parent: usize,
    pub child: usize,
    pub added: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MrDiagramJson {
    pub nodes: Vec<PresentationJson>,
    pub root: usize,
    pub edges: Vec<DiagramEdgeJson>,
    #[serde(default = "default_true")]
    pub root_is_limit: bool,
}

fn default_true() -> bool {
    true
}

impl MrDiagramJson {
    pub fn to_diagram(&self) -> Result<MrDiagram> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| n.to_presentation())
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let parent_alphabet = nodes
                    .get(e.parent)
                    .ok_or_else(|| Error::Invalid("edge parent out of range".into()))?
                    .generators()
                    .clone();
                let added = e
                    .added
                    .iter()
                    .map(|w| Word::parse(&parent_alphabet, w))
                    .collect::<Result<Vec<_>>>()?;
                Ok(DiagramEdge { parent: e.parent, child: e.child, added })
            })
            .collect::<Result<Vec<_>>>()?;
        MrDiagram::new(nodes, self.root, edges, self.root_is_limit)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchWitnessJson {
    pub branch: Vec<usize>,
    /// One generator-image table per non-leaf branch node.
    pub automorphisms: Vec<BTreeMap<String, String>>,
    pub terminal: GroupHomJson,
}

impl BranchWitnessJson {
    pub fn to_witness(&self, diagram: &MrDiagram) -> Result<BranchWitness> {
        let mut automorphisms = Vec::new();
        for (step, table) in self.automorphisms.iter().enumerate() {
            let node = *self
                .branch
                .get(step)
                .ok_or_else(|| Error::Invalid("more automorphisms than branch nodes".into()))?;
            let alphabet = diagram
                .nodes()
                .get(node)
                .ok_or_else(|| Error::Invalid("branch node out of range".into()))?
                .generators()
                .clone();
            let images = images_by_name(&alphabet, &alphabet, table)?;
            automorphisms.push(FreeMap::new(&alphabet, &alphabet, images)?);
        }
        Ok(BranchWitness { branch: self.branch.clone(), automorphisms, terminal: self.terminal.to_hom()? })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClgCertificateJson {
    Free {
        generators: Vec<String>,
    },
    FreeProduct {
        left: Box<ClgCertificateJson>,
        right: Box<ClgCertificateJson>,
    },
    Step {
        group: PresentationJson,
        rho: GroupHomJson,
        gad: GadJson,
        lower: Box<ClgCertificateJson>,
        #[serde(default = "default_radius")]
        sample_radius: usize,
        #[serde(default)]
        lower_to_free: Option<GroupHomJson>,
    },
}

fn default_radius() -> usize {
    3
}

impl ClgCertificateJson {
    pub fn to_certificate(&self) -> Result<ClgCertificate> {
        match self {
            ClgCertificateJson::Free { generators } => Ok(ClgCertificate::Free {
                generators: Alphabet::new(generators.clone())?,
            }),
            ClgCertificateJson::FreeProduct { left, right } => Ok(ClgCertificate::FreeProduct {
                left: Box::new(left.to_certificate()?),
                right: Box::new(right.to_certificate()?),
            }),
            ClgCertificateJson::Step { group, rho, gad, lower, sample_radius, lower_to_free } => {
                Ok(ClgCertificate::Step(StepData {
                    group: group.to_presentation()?,
                    rho: rho.to_hom()?,
                    gad: gad.to_gad()?,
                    lower: Box::new(lower.to_certificate()?),
                    sample_radius: *sample_radius,
                    lower_to_free: lower_to_free.as_ref().map(|h| h.to_hom()).transpose()?,
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropernessJson {
    pub status: String,
    #[serde(default)]
    pub witness: Option<String>,
}

pub fn properness_to_json(p: &Properness) -> PropernessJson {
    match p {
        Properness::Certified { witness } => {
            PropernessJson { status: "certified".into(), witness: Some(witness.to_string()) }
        }
        Properness::Asserted { witness } => {
            PropernessJson { status: "asserted".into(), witness: Some(witness.to_string()) }
        }
        Properness::NotProper => PropernessJson { status: "not_proper".into(), witness: None },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorMemberJson {
    pub name: String,
    pub added: Vec<String>,
    pub properness: PropernessJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorSetJson {
    pub domain: PresentationJson,
    pub members: Vec<FactorMemberJson>,
}

impl FactorSetJson {
    pub fn from_factor_set(fs: &FactorSet) -> FactorSetJson {
        FactorSetJson {
            domain: PresentationJson::from_presentation(&fs.domain),
            members: fs
                .members
                .iter()
                .map(|m| FactorMemberJson {
                    name: m.name.clone(),
                    added: m.map.added.iter().map(|w| w.to_string()).collect(),
                    properness: properness_to_json(&m.properness),
                })
                .collect(),
        }
    }
}

/// Input form of a factor set: the domain plus kernel words; the
/// abelianization member is always synthesized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorSetInputJson {
    pub domain: PresentationJson,
    #[serde(default)]
    pub kernel_words: Vec<String>,
}

impl FactorSetInputJson {
    pub fn to_factor_set(&self) -> Result<FactorSet> {
        let domain = self.domain.to_presentation()?;
        let words = self
            .kernel_words
            .iter()
            .map(|w| Word::parse(domain.generators(), w))
            .collect::<Result<Vec<_>>>()?;
        crate::diagrams::assemble_factor_set(&domain, &words)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistFamilyJson {
    pub base: GroupHomJson,
    pub twist: TwistJson,
}
