//! Direct combinatorial checker for product-structure data.
//!
//! When every factor map is a coordinate projection of a product measure
//! space, feasibility is a per-index condition on the exponent sums
//! `σ_i = Σ_{j : i ∈ S_j} t_j`: finite-measure coordinates need `σ_i ≤ 1`,
//! atomic coordinates `σ_i ≥ 1`, and general coordinates exact balance.
//! This module evaluates those conditions directly, cross-checks them with
//! the subset form, and generates the augmented stress instances that
//! separate the bounded-coordinate conditions from the balanced ones.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::datum::{FinnerDatum, FinnerIndex, IndexClass};
use crate::ratlin::{rat_to_string, Rat};

/// Verdict for one index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexReport {
    pub id: String,
    pub class: IndexClass,
    pub sigma: Rat,
    pub satisfied: bool,
}

/// Per-index sums with the class verdicts. The overall verdict is
/// recomputable from the sums and classes alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinnerReport {
    pub per_index: Vec<IndexReport>,
    pub sufficient: bool,
}

impl FinnerReport {
    pub fn violating_indices(&self) -> Vec<&IndexReport> {
        self.per_index.iter().filter(|r| !r.satisfied).collect()
    }

    /// Table with one row per index: id, class, sigma, status.
    pub fn to_table(&self) -> String {
        let mut out = String::from("index\tclass\tsigma\tstatus\n");
        for row in &self.per_index {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.id,
                row.class.name(),
                rat_to_string(&row.sigma),
                if row.satisfied { "pass" } else { "fail" }
            ));
        }
        out.push_str(&format!(
            "overall\t\t\t{}\n",
            if self.sufficient { "sufficient" } else { "violated" }
        ));
        out
    }
}

/// Evaluate the per-index conditions.
pub fn check(f: &FinnerDatum) -> FinnerReport {
    let per_index: Vec<IndexReport> = f
        .indices
        .iter()
        .enumerate()
        .map(|(i, ix)| {
            let sigma: Rat = f
                .supports
                .iter()
                .zip(f.exponents.as_slice())
                .filter(|(s, _)| s.contains(&i))
                .map(|(_, t)| t.clone())
                .sum();
            let satisfied = match ix.class {
                IndexClass::Bounded => sigma <= Rat::one(),
                IndexClass::Atomic => sigma >= Rat::one(),
                IndexClass::General => sigma.is_one(),
            };
            IndexReport {
                id: ix.id.clone(),
                class: ix.class,
                sigma,
                satisfied,
            }
        })
        .collect();
    let sufficient = per_index.iter().all(|r| r.satisfied);
    FinnerReport {
        per_index,
        sufficient,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FinnerError {
    #[error("index set of size {0} exceeds the subset-enumeration limit {1}")]
    SetTooLarge(usize, usize),
}

const MAX_SUBSET_INDICES: usize = 20;

/// For every subset `K` of the index set, the value
/// `|K| − Σ_j t_j·|S_j ∩ K|`: the subset analogue of criticality. All
/// values vanish exactly when every per-index sum is one.
pub fn subset_criticality(f: &FinnerDatum) -> Result<Vec<(Vec<usize>, Rat)>, FinnerError> {
    let n = f.indices.len();
    if n > MAX_SUBSET_INDICES {
        return Err(FinnerError::SetTooLarge(n, MAX_SUBSET_INDICES));
    }
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let weighted: Rat = f
            .supports
            .iter()
            .zip(f.exponents.as_slice())
            .map(|(s, t)| {
                let overlap = members.iter().filter(|i| s.contains(i)).count();
                t * Rat::from_integer(overlap.into())
            })
            .sum();
        let value = Rat::from_integer(members.len().into()) - weighted;
        out.push((members, value));
    }
    Ok(out)
}

/// Augment the index set by one fresh bounded index attached to the support
/// of factor `j_prime` only. Starting from an instance where every index is
/// balanced with all `t_j < 1`, the result satisfies the bounded-coordinate
/// conditions while no coordinatewise-dominating exponent vector satisfies
/// the balanced ones.
pub fn make_augmented_instance(base: &FinnerDatum, j_prime: usize) -> FinnerDatum {
    let mut out = base.clone();
    let fresh = out.indices.len();
    let mut id = format!("aug{fresh}");
    while out.indices.iter().any(|ix| ix.id == id) {
        id.push('_');
    }
    out.indices.push(FinnerIndex {
        id,
        class: IndexClass::Bounded,
    });
    out.supports[j_prime].insert(fresh);
    out
}

/// Serializable form of the report for machine output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinnerReportDto {
    pub per_index: Vec<IndexReportDto>,
    pub sufficient: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexReportDto {
    pub id: String,
    pub class: String,
    pub sigma: String,
    pub satisfied: bool,
}

pub fn report_to_dto(r: &FinnerReport) -> FinnerReportDto {
    FinnerReportDto {
        per_index: r
            .per_index
            .iter()
            .map(|row| IndexReportDto {
                id: row.id.clone(),
                class: row.class.name().to_string(),
                sigma: rat_to_string(&row.sigma),
                satisfied: row.satisfied,
            })
            .collect(),
        sufficient: r.sufficient,
    }
}

#[cfg(test)]
mod tests;
