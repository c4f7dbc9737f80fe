//! Problem inputs: ambient space, surjective factor maps, exponent
//! reciprocals, and the mode that selects which finiteness theorem applies.
//!
//! Exponents are carried as reciprocals `t_j = 1/p_j` throughout, with
//! `t_j = 0` encoding `p_j = ∞`; every feasibility condition downstream is
//! written in `t`-form so the infinite-exponent case needs no special
//! handling.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ratlin::{
    image, kernel, parse_rat, rat_to_string, IntMatrix, Rat, RatMatrix, Subspace,
};
use num_bigint::BigInt;
use num_traits::{One, Signed};

/// Which inequality variant a datum asks about.
///
/// `Local` is the variant with the whole domain confined to a ball, `Gut`
/// confines only the coordinates seen by the carried map, and `Global` leaves
/// everything free; `Local` behaves like `Gut` with the identity map and
/// `Global` like `Gut` with the zero map. `Discrete` is the finitely
/// generated abelian group variant and `Amalgam` the mixed-norm variant; both
/// drop the homogeneity constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Global,
    Local,
    Gut(RatMatrix),
    Discrete,
    Amalgam,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Global => "global",
            Mode::Local => "local",
            Mode::Gut(_) => "gut",
            Mode::Discrete => "discrete",
            Mode::Amalgam => "amalgam",
        }
    }

    /// Continuum modes reject exponents outside `[0, 1]`; discrete-flavored
    /// modes clamp them instead.
    pub fn clamps_exponents(&self) -> bool {
        matches!(self, Mode::Discrete | Mode::Amalgam)
    }
}

/// Exponent reciprocals, one per factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector {
    t: Vec<Rat>,
}

impl ExponentVector {
    pub fn new(t: Vec<Rat>) -> Self {
        ExponentVector { t }
    }

    pub fn from_i64_pairs(pairs: &[(i64, i64)]) -> Self {
        ExponentVector {
            t: pairs
                .iter()
                .map(|&(n, d)| Rat::new(BigInt::from(n), BigInt::from(d)))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn get(&self, j: usize) -> &Rat {
        &self.t[j]
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.t
    }

    pub fn sum(&self) -> Rat {
        self.t.iter().sum()
    }
}

/// One factor: a target dimension and the map onto it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub target_dim: usize,
    pub map: RatMatrix,
}

/// A full problem instance before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BLDatum {
    pub ambient_dim: usize,
    pub factors: Vec<Factor>,
    pub exponents: ExponentVector,
    pub mode: Mode,
}

impl BLDatum {
    pub fn new(
        ambient_dim: usize,
        maps: Vec<RatMatrix>,
        exponents: ExponentVector,
        mode: Mode,
    ) -> Self {
        let factors = maps
            .into_iter()
            .map(|map| Factor {
                target_dim: map.rows(),
                map,
            })
            .collect();
        BLDatum {
            ambient_dim,
            factors,
            exponents,
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("factor {0} is not surjective onto its target")]
    NonSurjectiveFactor(usize),
    #[error("exponent t_{0} is outside [0, 1]")]
    ExponentOutOfRange(usize),
    #[error("factor {0} has a zero-dimensional target")]
    ZeroDimensionalFactor(usize),
    #[error("ambient dimension must be positive")]
    ZeroAmbientDimension,
    #[error("datum has no factors")]
    NoFactors,
    #[error("factor {0}: map shape does not match (target_dim x ambient_dim)")]
    MapShapeMismatch(usize),
    #[error("exponent count {got} does not match factor count {want}")]
    ExponentCountMismatch { got: usize, want: usize },
    #[error("the bounded-coordinates map must have {want} columns, found {got}")]
    Ell0ShapeMismatch { got: usize, want: usize },
    #[error("discrete factor {0}: homomorphism does not have full row rank")]
    DeficientHomomorphism(usize),
    #[error("product datum: {0}")]
    BadProductDatum(String),
}

/// A datum whose invariants have been verified, with normalized exponents
/// and the kernel of the effective bounded-coordinates map precomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedDatum {
    datum: BLDatum,
    kernel0: Subspace,
}

impl CheckedDatum {
    pub fn datum(&self) -> &BLDatum {
        &self.datum
    }

    pub fn mode(&self) -> &Mode {
        &self.datum.mode
    }

    pub fn ambient_dim(&self) -> usize {
        self.datum.ambient_dim
    }

    pub fn factor_count(&self) -> usize {
        self.datum.factors.len()
    }

    pub fn map(&self, j: usize) -> &RatMatrix {
        &self.datum.factors[j].map
    }

    pub fn maps(&self) -> Vec<&RatMatrix> {
        self.datum.factors.iter().map(|f| &f.map).collect()
    }

    pub fn target_dim(&self, j: usize) -> usize {
        self.datum.factors[j].target_dim
    }

    pub fn exponents(&self) -> &ExponentVector {
        &self.datum.exponents
    }

    pub fn t(&self, j: usize) -> &Rat {
        self.datum.exponents.get(j)
    }

    /// Kernel of the effective bounded-coordinates map: the whole space in
    /// global/discrete/amalgam modes, zero in local mode, and the actual
    /// kernel in gut mode.
    pub fn kernel0(&self) -> &Subspace {
        &self.kernel0
    }

    /// `c = n − Σ_j t_j n_j`. Zero is the scaling balance required for the
    /// global inequality.
    pub fn homogeneity_gap(&self) -> Rat {
        let weighted: Rat = self
            .datum
            .factors
            .iter()
            .zip(self.datum.exponents.as_slice())
            .map(|(f, t)| t * Rat::from_integer(BigInt::from(f.target_dim)))
            .sum();
        Rat::from_integer(BigInt::from(self.datum.ambient_dim)) - weighted
    }

    /// Same maps, different exponents. Used when walking the exponent
    /// polytope.
    pub fn with_exponents(&self, t: Vec<Rat>) -> Result<CheckedDatum, ValidationError> {
        let mut datum = self.datum.clone();
        datum.exponents = ExponentVector::new(t);
        validate(datum)
    }

    /// Same ambient space and exponents minus one factor.
    pub fn drop_factor(&self, i: usize) -> Result<CheckedDatum, ValidationError> {
        let mut datum = self.datum.clone();
        datum.factors.remove(i);
        let mut t = datum.exponents.as_slice().to_vec();
        t.remove(i);
        datum.exponents = ExponentVector::new(t);
        validate(datum)
    }
}

/// Check every datum invariant and normalize exponents.
///
/// Surjectivity of each factor map is verified by exact rank computation.
/// Discrete and amalgam modes clamp `t_j > 1` down to `1` (a larger exponent
/// is implied by the clamped one in those settings); continuum modes reject
/// out-of-range exponents outright.
pub fn validate(mut datum: BLDatum) -> Result<CheckedDatum, ValidationError> {
    if datum.ambient_dim == 0 {
        return Err(ValidationError::ZeroAmbientDimension);
    }
    if datum.factors.is_empty() {
        return Err(ValidationError::NoFactors);
    }
    if datum.exponents.len() != datum.factors.len() {
        return Err(ValidationError::ExponentCountMismatch {
            got: datum.exponents.len(),
            want: datum.factors.len(),
        });
    }

    let clamp = datum.mode.clamps_exponents();
    let mut t = datum.exponents.as_slice().to_vec();
    for (j, tj) in t.iter_mut().enumerate() {
        if tj.is_negative() {
            return Err(ValidationError::ExponentOutOfRange(j));
        }
        if *tj > Rat::one() {
            if clamp {
                *tj = Rat::one();
            } else {
                return Err(ValidationError::ExponentOutOfRange(j));
            }
        }
    }
    datum.exponents = ExponentVector::new(t);

    for (j, factor) in datum.factors.iter().enumerate() {
        if factor.target_dim == 0 {
            return Err(ValidationError::ZeroDimensionalFactor(j));
        }
        if factor.map.rows() != factor.target_dim || factor.map.cols() != datum.ambient_dim {
            return Err(ValidationError::MapShapeMismatch(j));
        }
        if factor.map.rank() != factor.target_dim {
            return Err(ValidationError::NonSurjectiveFactor(j));
        }
    }

    let kernel0 = match &datum.mode {
        Mode::Global | Mode::Discrete | Mode::Amalgam => Subspace::full(datum.ambient_dim),
        Mode::Local => Subspace::zero(datum.ambient_dim),
        Mode::Gut(map0) => {
            if map0.cols() != datum.ambient_dim {
                return Err(ValidationError::Ell0ShapeMismatch {
                    got: map0.cols(),
                    want: datum.ambient_dim,
                });
            }
            // No rank constraint on the bounded-coordinates map.
            kernel(map0)
        }
    };

    Ok(CheckedDatum { datum, kernel0 })
}

/// Range of the joint map `y ↦ (ℓ_1 y, …, ℓ_m y)` inside the direct sum of
/// the targets, together with the coordinate projections back onto each
/// block. The feasibility conditions can be evaluated on subspaces of this
/// range instead of subspaces of the ambient space.
pub fn subspace_form(datum: &CheckedDatum) -> (Subspace, Vec<RatMatrix>) {
    let total: usize = (0..datum.factor_count()).map(|j| datum.target_dim(j)).sum();
    let mut stacked = RatMatrix::zero(total, datum.ambient_dim());
    let mut offset = 0;
    let mut projections = Vec::with_capacity(datum.factor_count());
    for j in 0..datum.factor_count() {
        let nj = datum.target_dim(j);
        let map = datum.map(j);
        for r in 0..nj {
            for c in 0..datum.ambient_dim() {
                stacked.set(offset + r, c, map.get(r, c).clone());
            }
        }
        let mut proj = RatMatrix::zero(nj, total);
        for r in 0..nj {
            proj.set(r, offset + r, Rat::one());
        }
        projections.push(proj);
        offset += nj;
    }
    let sigma = image(&stacked, &Subspace::full(datum.ambient_dim()))
        .expect("stacked map has the ambient space as domain");
    (sigma, projections)
}

// ---------------------------------------------------------------------------
// Product-structure data
// ---------------------------------------------------------------------------

/// Measure-class label of one product coordinate: finite-measure coordinates
/// need only an upper per-index bound, atomic ones only a lower bound, and
/// general ones exact balance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum IndexClass {
    /// Finite measure space (bounded side).
    Bounded,
    /// Atomic measure space (counting-measure side).
    Atomic,
    /// Arbitrary measure space.
    General,
}

impl IndexClass {
    pub fn name(&self) -> &'static str {
        match self {
            IndexClass::Bounded => "bounded",
            IndexClass::Atomic => "atomic",
            IndexClass::General => "general",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinnerIndex {
    pub id: String,
    pub class: IndexClass,
}

/// Product-structure datum: factor `j` sees the coordinates in `supports[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinnerDatum {
    pub indices: Vec<FinnerIndex>,
    pub supports: Vec<BTreeSet<usize>>,
    pub exponents: ExponentVector,
}

impl FinnerDatum {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.indices.is_empty() {
            return Err(ValidationError::BadProductDatum(
                "index set is empty".into(),
            ));
        }
        if self.supports.is_empty() {
            return Err(ValidationError::BadProductDatum(
                "factor set is empty".into(),
            ));
        }
        if self.exponents.len() != self.supports.len() {
            return Err(ValidationError::ExponentCountMismatch {
                got: self.exponents.len(),
                want: self.supports.len(),
            });
        }
        for (j, s) in self.supports.iter().enumerate() {
            if s.is_empty() {
                return Err(ValidationError::BadProductDatum(format!(
                    "support of factor {j} is empty"
                )));
            }
            if s.iter().any(|&i| i >= self.indices.len()) {
                return Err(ValidationError::BadProductDatum(format!(
                    "support of factor {j} references an unknown index"
                )));
            }
        }
        for (j, t) in self.exponents.as_slice().iter().enumerate() {
            if t.is_negative() || *t > Rat::one() {
                return Err(ValidationError::ExponentOutOfRange(j));
            }
        }
        Ok(())
    }

    pub fn class_members(&self, class: IndexClass) -> Vec<usize> {
        (0..self.indices.len())
            .filter(|&i| self.indices[i].class == class)
            .collect()
    }
}

/// Translate a product datum into linear-algebraic form: one ambient
/// coordinate per index, coordinate-selection maps for the factors, and a
/// mode read off the class labels. Bounded coordinates become the target of
/// the bounded-coordinates map (gut mode); otherwise any atomic coordinate
/// selects amalgam mode, and a purely general datum is global.
pub fn finner_to_continuum(f: &FinnerDatum) -> BLDatum {
    let n = f.indices.len();
    let maps: Vec<RatMatrix> = f
        .supports
        .iter()
        .map(|s| {
            let coords: Vec<usize> = s.iter().copied().collect();
            let mut m = RatMatrix::zero(coords.len(), n);
            for (r, &c) in coords.iter().enumerate() {
                m.set(r, c, Rat::one());
            }
            m
        })
        .collect();
    let bounded = f.class_members(IndexClass::Bounded);
    let atomic = f.class_members(IndexClass::Atomic);
    let mode = if !bounded.is_empty() {
        let mut ell0 = RatMatrix::zero(bounded.len(), n);
        for (r, &c) in bounded.iter().enumerate() {
            ell0.set(r, c, Rat::one());
        }
        Mode::Gut(ell0)
    } else if !atomic.is_empty() {
        Mode::Amalgam
    } else {
        Mode::Global
    };
    BLDatum::new(n, maps, f.exponents.clone(), mode)
}

// ---------------------------------------------------------------------------
// Discrete-group data
// ---------------------------------------------------------------------------

/// One homomorphism out of the source group, acting on free parts, with the
/// torsion invariants of its target recorded but never consulted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteFactor {
    pub hom: IntMatrix,
    pub torsion: Vec<u64>,
}

/// Finitely generated abelian source group of free rank `free_rank`, with
/// torsion invariants carried as metadata only: the finiteness verdict
/// depends only on ranks, while torsion affects just the constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteDatum {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
    pub factors: Vec<DiscreteFactor>,
    pub exponents: ExponentVector,
}

impl DiscreteDatum {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.free_rank == 0 {
            return Err(ValidationError::ZeroAmbientDimension);
        }
        if self.factors.is_empty() {
            return Err(ValidationError::NoFactors);
        }
        if self.exponents.len() != self.factors.len() {
            return Err(ValidationError::ExponentCountMismatch {
                got: self.exponents.len(),
                want: self.factors.len(),
            });
        }
        for (j, f) in self.factors.iter().enumerate() {
            if f.hom.cols() != self.free_rank {
                return Err(ValidationError::MapShapeMismatch(j));
            }
            // Range of finite index means full row rank over Q.
            if f.hom.to_rational().rank() != f.hom.rows() {
                return Err(ValidationError::DeficientHomomorphism(j));
            }
        }
        Ok(())
    }
}

/// View a discrete-group datum as a rational one. Ranks of subgroups and of
/// their images depend only on rational spans, so the verdict of the engine
/// on the result is the discrete verdict.
pub fn discrete_to_rational(d: &DiscreteDatum) -> BLDatum {
    let maps = d.factors.iter().map(|f| f.hom.to_rational()).collect();
    BLDatum::new(d.free_rank, maps, d.exponents.clone(), Mode::Discrete)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// On-disk datum. All rationals are exact strings (`"a/b"` or `"a"`); no
/// floating-point numbers appear anywhere in the format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumFile {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell0: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finner: Option<FinnerDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_g: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
    pub t: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinnerDto {
    pub indices: Vec<FinnerIndexDto>,
    pub supports: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinnerIndexDto {
    pub id: String,
    pub class: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DatumFileError {
    #[error("malformed datum file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

fn field_err(field: &str, message: impl Into<String>) -> DatumFileError {
    DatumFileError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

/// A parsed datum file, before validation.
#[derive(Clone, Debug)]
pub enum ParsedDatum {
    Continuum(BLDatum),
    Discrete(DiscreteDatum),
    Finner(FinnerDatum),
}

impl ParsedDatum {
    /// The datum the engine should decide: discrete data pass through the
    /// rank translation, product data through the coordinate translation.
    pub fn to_continuum(&self) -> BLDatum {
        match self {
            ParsedDatum::Continuum(d) => d.clone(),
            ParsedDatum::Discrete(d) => discrete_to_rational(d),
            ParsedDatum::Finner(f) => finner_to_continuum(f),
        }
    }
}

fn parse_matrix(
    field: &str,
    rows: &[Vec<String>],
    want_rows: usize,
    want_cols: usize,
) -> Result<RatMatrix, DatumFileError> {
    if rows.len() != want_rows {
        return Err(field_err(
            field,
            format!("expected {want_rows} rows, found {}", rows.len()),
        ));
    }
    let mut out = RatMatrix::zero(want_rows, want_cols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != want_cols {
            return Err(field_err(
                field,
                format!("row {r}: expected {want_cols} entries, found {}", row.len()),
            ));
        }
        for (c, text) in row.iter().enumerate() {
            let value = parse_rat(text)
                .map_err(|e| field_err(field, format!("row {r}, column {c}: {e}")))?;
            out.set(r, c, value);
        }
    }
    Ok(out)
}

pub fn parse_datum_str(text: &str) -> Result<ParsedDatum, DatumFileError> {
    let file: DatumFile = serde_json::from_str(text)?;
    parse_datum_file(&file)
}

pub fn parse_datum_file(file: &DatumFile) -> Result<ParsedDatum, DatumFileError> {
    match file.mode.as_str() {
        "finner" => {
            let finner = file
                .finner
                .as_ref()
                .ok_or_else(|| field_err("finner", "required for mode \"finner\""))?;
            let factors = file
                .factors
                .as_ref()
                .ok_or_else(|| field_err("factors", "required (carries the exponents)"))?;
            if factors.len() != finner.supports.len() {
                return Err(field_err(
                    "finner.supports",
                    format!(
                        "{} supports for {} factors",
                        finner.supports.len(),
                        factors.len()
                    ),
                ));
            }
            let mut indices = Vec::new();
            for ix in &finner.indices {
                let class = match ix.class.as_str() {
                    "bounded" => IndexClass::Bounded,
                    "atomic" => IndexClass::Atomic,
                    "general" => IndexClass::General,
                    other => {
                        return Err(field_err(
                            "finner.indices.class",
                            format!("unknown class `{other}`"),
                        ))
                    }
                };
                indices.push(FinnerIndex {
                    id: ix.id.clone(),
                    class,
                });
            }
            let position = |id: &str| indices.iter().position(|ix| ix.id == id);
            let mut supports = Vec::new();
            for (j, support) in finner.supports.iter().enumerate() {
                let mut set = BTreeSet::new();
                for id in support {
                    let Some(pos) = position(id) else {
                        return Err(field_err(
                            "finner.supports",
                            format!("factor {j}: unknown index id `{id}`"),
                        ));
                    };
                    set.insert(pos);
                }
                supports.push(set);
            }
            let exponents = parse_exponents(factors)?;
            let datum = FinnerDatum {
                indices,
                supports,
                exponents,
            };
            datum.validate()?;
            Ok(ParsedDatum::Finner(datum))
        }
        "discrete" => {
            let (n, factors) = continuum_fields(file)?;
            let mut discrete_factors = Vec::new();
            for (j, f) in factors.iter().enumerate() {
                let rows = f
                    .matrix
                    .as_ref()
                    .ok_or_else(|| field_err("factors.matrix", format!("missing in factor {j}")))?;
                let target = f.target_dim.unwrap_or(rows.len());
                let rational = parse_matrix(&format!("factors[{j}].matrix"), rows, target, n)?;
                let mut hom = IntMatrix::zero(target, n);
                for r in 0..target {
                    for c in 0..n {
                        let e = rational.get(r, c);
                        if !e.is_integer() {
                            return Err(field_err(
                                "factors.matrix",
                                format!("factor {j}: entry ({r},{c}) is not an integer"),
                            ));
                        }
                        hom.set(r, c, e.numer().clone());
                    }
                }
                discrete_factors.push(DiscreteFactor {
                    hom,
                    torsion: f.torsion.clone().unwrap_or_default(),
                });
            }
            let datum = DiscreteDatum {
                free_rank: n,
                torsion: file.torsion_g.clone().unwrap_or_default(),
                factors: discrete_factors,
                exponents: parse_exponents(factors)?,
            };
            datum.validate()?;
            Ok(ParsedDatum::Discrete(datum))
        }
        "global" | "local" | "gut" | "amalgam" => {
            let (n, factors) = continuum_fields(file)?;
            let mut maps = Vec::new();
            for (j, f) in factors.iter().enumerate() {
                let rows = f
                    .matrix
                    .as_ref()
                    .ok_or_else(|| field_err("factors.matrix", format!("missing in factor {j}")))?;
                let target = f.target_dim.unwrap_or(rows.len());
                maps.push(parse_matrix(
                    &format!("factors[{j}].matrix"),
                    rows,
                    target,
                    n,
                )?);
            }
            let mode = match file.mode.as_str() {
                "global" => Mode::Global,
                "local" => Mode::Local,
                "amalgam" => Mode::Amalgam,
                "gut" => {
                    let rows = file
                        .ell0
                        .as_ref()
                        .ok_or_else(|| field_err("ell0", "required for mode \"gut\""))?;
                    Mode::Gut(parse_matrix("ell0", rows, rows.len(), n)?)
                }
                _ => unreachable!(),
            };
            Ok(ParsedDatum::Continuum(BLDatum::new(
                n,
                maps,
                parse_exponents(factors)?,
                mode,
            )))
        }
        other => Err(field_err("mode", format!("unknown mode `{other}`"))),
    }
}

fn continuum_fields(file: &DatumFile) -> Result<(usize, &Vec<FactorDto>), DatumFileError> {
    let n = file
        .n
        .ok_or_else(|| field_err("n", "required for this mode"))?;
    let factors = file
        .factors
        .as_ref()
        .ok_or_else(|| field_err("factors", "required for this mode"))?;
    Ok((n, factors))
}

fn parse_exponents(factors: &[FactorDto]) -> Result<ExponentVector, DatumFileError> {
    let mut t = Vec::with_capacity(factors.len());
    for (j, f) in factors.iter().enumerate() {
        t.push(
            parse_rat(&f.t).map_err(|e| field_err("factors.t", format!("factor {j}: {e}")))?,
        );
    }
    Ok(ExponentVector::new(t))
}

fn matrix_to_strings(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(rat_to_string).collect())
        .collect()
}

/// Serialize a continuum datum back into the file structure.
pub fn datum_to_file(datum: &BLDatum) -> DatumFile {
    let factors = datum
        .factors
        .iter()
        .zip(datum.exponents.as_slice())
        .map(|(f, t)| FactorDto {
            target_dim: Some(f.target_dim),
            matrix: Some(matrix_to_strings(&f.map)),
            t: rat_to_string(t),
            torsion: None,
        })
        .collect();
    DatumFile {
        mode: datum.mode.name().to_string(),
        n: Some(datum.ambient_dim),
        factors: Some(factors),
        ell0: match &datum.mode {
            Mode::Gut(m0) => Some(matrix_to_strings(m0)),
            _ => None,
        },
        finner: None,
        torsion_g: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::{rat, rat_int, rat_one, rat_zero};

    pub(crate) fn lw3(t: &[(i64, i64)]) -> BLDatum {
        BLDatum::new(
            3,
            vec![
                RatMatrix::from_i64_rows(&[&[0, 1, 0], &[0, 0, 1]]),
                RatMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 0, 1]]),
                RatMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0]]),
            ],
            ExponentVector::from_i64_pairs(t),
            Mode::Global,
        )
    }

    fn young(t: &[(i64, i64)], mode: Mode) -> BLDatum {
        BLDatum::new(
            2,
            vec![
                RatMatrix::from_i64_rows(&[&[1, 0]]),
                RatMatrix::from_i64_rows(&[&[0, 1]]),
                RatMatrix::from_i64_rows(&[&[1, -1]]),
            ],
            ExponentVector::from_i64_pairs(t),
            mode,
        )
    }

    #[test]
    fn loomis_whitney_is_valid() {
        let checked = validate(lw3(&[(1, 2), (1, 2), (1, 2)])).unwrap();
        assert_eq!(checked.ambient_dim(), 3);
        assert!(checked.kernel0().is_full());
    }

    #[test]
    fn rank_deficient_factor_is_rejected() {
        let mut d = lw3(&[(1, 2), (1, 2), (1, 2)]);
        d.factors[1].map = RatMatrix::from_i64_rows(&[&[1, 0, 0], &[2, 0, 0]]);
        assert_eq!(validate(d), Err(ValidationError::NonSurjectiveFactor(1)));
    }

    #[test]
    fn exponent_out_of_range_in_global_mode() {
        let d = lw3(&[(3, 2), (1, 2), (1, 2)]);
        assert_eq!(validate(d), Err(ValidationError::ExponentOutOfRange(0)));
    }

    #[test]
    fn discrete_mode_clamps_large_exponents() {
        let mut d = young(&[(3, 2), (1, 1), (1, 1)], Mode::Discrete);
        d.mode = Mode::Discrete;
        let checked = validate(d).unwrap();
        assert_eq!(checked.t(0), &rat_one());
    }

    #[test]
    fn validate_is_idempotent() {
        let checked = validate(young(&[(1, 2), (1, 2), (1, 1)], Mode::Global)).unwrap();
        let again = validate(checked.datum().clone()).unwrap();
        assert_eq!(checked, again);
    }

    #[test]
    fn homogeneity_gap_examples() {
        let lw = validate(lw3(&[(1, 2), (1, 2), (1, 2)])).unwrap();
        assert_eq!(lw.homogeneity_gap(), rat_zero());

        let y = validate(young(&[(1, 1), (1, 1), (1, 1)], Mode::Global)).unwrap();
        assert_eq!(y.homogeneity_gap(), rat_int(-1));

        let single = validate(BLDatum::new(
            2,
            vec![RatMatrix::identity(2)],
            ExponentVector::from_i64_pairs(&[(1, 1)]),
            Mode::Global,
        ))
        .unwrap();
        assert_eq!(single.homogeneity_gap(), rat_zero());
    }

    #[test]
    fn local_and_gut_kernels() {
        let local = validate(young(&[(1, 2), (1, 2), (1, 1)], Mode::Local)).unwrap();
        assert!(local.kernel0().is_zero());

        let gut = validate(young(
            &[(1, 2), (1, 2), (1, 1)],
            Mode::Gut(RatMatrix::from_i64_rows(&[&[1, 0]])),
        ))
        .unwrap();
        assert_eq!(gut.kernel0(), &Subspace::coordinate_axis(2, 1));
    }

    fn lw_finner() -> FinnerDatum {
        FinnerDatum {
            indices: ["x", "y", "z"]
                .iter()
                .map(|id| FinnerIndex {
                    id: id.to_string(),
                    class: IndexClass::General,
                })
                .collect(),
            supports: vec![
                BTreeSet::from([1, 2]),
                BTreeSet::from([0, 2]),
                BTreeSet::from([0, 1]),
            ],
            exponents: ExponentVector::from_i64_pairs(&[(1, 2), (1, 2), (1, 2)]),
        }
    }

    #[test]
    fn finner_to_continuum_recovers_loomis_whitney() {
        let f = lw_finner();
        f.validate().unwrap();
        let d = finner_to_continuum(&f);
        assert_eq!(d, lw3(&[(1, 2), (1, 2), (1, 2)]));
    }

    #[test]
    fn finner_single_index_single_factor() {
        let f = FinnerDatum {
            indices: vec![FinnerIndex {
                id: "i".into(),
                class: IndexClass::General,
            }],
            supports: vec![BTreeSet::from([0])],
            exponents: ExponentVector::from_i64_pairs(&[(1, 1)]),
        };
        let d = finner_to_continuum(&f);
        assert_eq!(d.ambient_dim, 1);
        assert_eq!(d.factors[0].map, RatMatrix::identity(1));
        assert_eq!(d.mode, Mode::Global);
    }

    #[test]
    fn finner_augmented_instance_shape() {
        // A new bounded index joined to the first support only: one 3x4 map,
        // two 2x4 maps, gut mode projecting onto the new coordinate.
        let mut f = lw_finner();
        f.indices.push(FinnerIndex {
            id: "w".into(),
            class: IndexClass::Bounded,
        });
        f.supports[0].insert(3);
        let d = finner_to_continuum(&f);
        assert_eq!(d.ambient_dim, 4);
        assert_eq!(d.factors[0].target_dim, 3);
        assert_eq!(d.factors[1].target_dim, 2);
        assert_eq!(d.factors[2].target_dim, 2);
        match &d.mode {
            Mode::Gut(ell0) => {
                assert_eq!(ell0, &RatMatrix::from_i64_rows(&[&[0, 0, 0, 1]]));
            }
            other => panic!("expected gut mode, found {other:?}"),
        }
    }

    #[test]
    fn discrete_translation_examples() {
        let d = DiscreteDatum {
            free_rank: 2,
            torsion: vec![],
            factors: vec![
                DiscreteFactor {
                    hom: IntMatrix::from_i64_rows(&[&[1, 0]]),
                    torsion: vec![],
                },
                DiscreteFactor {
                    hom: IntMatrix::from_i64_rows(&[&[0, 1]]),
                    torsion: vec![],
                },
                DiscreteFactor {
                    hom: IntMatrix::from_i64_rows(&[&[1, -1]]),
                    torsion: vec![],
                },
            ],
            exponents: ExponentVector::from_i64_pairs(&[(1, 1), (1, 1), (1, 1)]),
        };
        d.validate().unwrap();
        let translated = discrete_to_rational(&d);
        assert_eq!(translated.mode, Mode::Discrete);
        assert_eq!(
            translated.factors[2].map,
            RatMatrix::from_i64_rows(&[&[1, -1]])
        );

        let doubling = DiscreteDatum {
            free_rank: 1,
            torsion: vec![],
            factors: vec![DiscreteFactor {
                hom: IntMatrix::from_i64_rows(&[&[2]]),
                torsion: vec![],
            }],
            exponents: ExponentVector::from_i64_pairs(&[(1, 1)]),
        };
        doubling.validate().unwrap();
        let translated = discrete_to_rational(&doubling);
        assert_eq!(translated.factors[0].map, RatMatrix::from_i64_rows(&[&[2]]));
    }

    #[test]
    fn torsion_is_recorded_but_not_translated() {
        let d = DiscreteDatum {
            free_rank: 1,
            torsion: vec![6],
            factors: vec![DiscreteFactor {
                hom: IntMatrix::from_i64_rows(&[&[1]]),
                torsion: vec![2],
            }],
            exponents: ExponentVector::from_i64_pairs(&[(1, 1)]),
        };
        d.validate().unwrap();
        assert_eq!(d.torsion, vec![6]);
        let translated = discrete_to_rational(&d);
        assert_eq!(translated.ambient_dim, 1);
    }

    #[test]
    fn subspace_form_examples() {
        // Two identity factors on Q^1: the joint range is the diagonal line.
        let holder2 = validate(BLDatum::new(
            1,
            vec![RatMatrix::identity(1), RatMatrix::identity(1)],
            ExponentVector::from_i64_pairs(&[(1, 2), (1, 2)]),
            Mode::Global,
        ))
        .unwrap();
        let (sigma, projections) = subspace_form(&holder2);
        assert_eq!(sigma, Subspace::from_i64_rows(2, &[&[1, 1]]));
        assert_eq!(projections.len(), 2);

        let y = validate(young(&[(1, 2), (1, 2), (1, 1)], Mode::Global)).unwrap();
        let (sigma, _) = subspace_form(&y);
        assert_eq!(sigma, Subspace::from_i64_rows(3, &[&[1, 0, 1], &[0, 1, -1]]));
        assert_eq!(sigma.dim(), 2);

        // All maps kill e2, so the joint range is a line.
        let degenerate = validate(BLDatum::new(
            2,
            vec![
                RatMatrix::from_i64_rows(&[&[1, 0]]),
                RatMatrix::from_i64_rows(&[&[2, 0]]),
            ],
            ExponentVector::from_i64_pairs(&[(1, 2), (1, 2)]),
            Mode::Global,
        ))
        .unwrap();
        let (sigma, _) = subspace_form(&degenerate);
        assert_eq!(sigma.dim(), 1);
    }

    #[test]
    fn datum_file_round_trip() {
        let datum = young(&[(1, 2), (1, 2), (1, 1)], Mode::Global);
        let file = datum_to_file(&datum);
        let text = serde_json::to_string_pretty(&file).unwrap();
        match parse_datum_str(&text).unwrap() {
            ParsedDatum::Continuum(parsed) => assert_eq!(parsed, datum),
            other => panic!("expected continuum datum, found {other:?}"),
        }
    }

    #[test]
    fn datum_file_rejects_bad_rational() {
        let text = r#"{
            "mode": "global",
            "n": 1,
            "factors": [{ "target_dim": 1, "matrix": [["1"]], "t": "0.5" }]
        }"#;
        let err = parse_datum_str(text).unwrap_err();
        assert!(matches!(err, DatumFileError::Field { .. }), "{err}");
    }

    #[test]
    fn datum_file_parses_finner_block() {
        let text = r#"{
            "mode": "finner",
            "factors": [{ "t": "1/2" }, { "t": "1/2" }, { "t": "1/2" }],
            "finner": {
                "indices": [
                    {"id": "x", "class": "general"},
                    {"id": "y", "class": "general"},
                    {"id": "z", "class": "general"}
                ],
                "supports": [["y", "z"], ["x", "z"], ["x", "y"]]
            }
        }"#;
        match parse_datum_str(text).unwrap() {
            ParsedDatum::Finner(f) => {
                assert_eq!(f.supports[0], BTreeSet::from([1, 2]));
                assert_eq!(finner_to_continuum(&f).ambient_dim, 3);
            }
            other => panic!("expected finner datum, found {other:?}"),
        }
    }
}
