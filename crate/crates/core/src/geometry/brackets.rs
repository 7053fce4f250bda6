//! Iterated commutators of the tangent basis and the Bloom-Graham type.
//!
//! A bracket of tangent fields stays inside the complexified tangent bundle
//! of the hypersurface, and it leaves the complex tangent subbundle exactly
//! when its contraction against `dbar rho` is nonzero (the quotient is one
//! dimensional). The type at a point is therefore the smallest bracket
//! length whose contraction does not vanish there.
//!
//! Brackets are enumerated as left-nested words over the generator set
//! `{S_1..S_{n-1}, Sb_1..Sb_{n-1}}`; length-2 words are deduplicated by
//! antisymmetry and structurally identical fields are dropped. The symbolic
//! tables depend only on the pivot, so they are cached per pivot, built one
//! level at a time, and shared across grid scans.

use super::{format_point, Hypersurface, VectorField};
use crate::error::GeometryError;
use crate::expr::{Evaluator, Expr};
use num_complex::Complex64;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// One generator of the bracket words: a basis field or its conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    /// `S_{j+1}`
    S(usize),
    /// conjugate field `Sb_{j+1}`
    Sb(usize),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::S(j) => write!(f, "S{}", j + 1),
            Gen::Sb(j) => write!(f, "Sb{}", j + 1),
        }
    }
}

fn word_string(word: &[Gen]) -> String {
    let mut s = word[0].to_string();
    for g in &word[1..] {
        s = format!("[{},{}]", s, g);
    }
    s
}

pub(crate) struct BracketEntry {
    pub word: Vec<Gen>,
    pub field: VectorField,
    pub contraction: Expr,
}

/// Per-pivot store of bracket levels; `levels[i]` holds length `i + 2`.
pub(crate) struct LevelStore {
    pub generators: Arc<Vec<(Gen, VectorField)>>,
    pub levels: Vec<Arc<Vec<BracketEntry>>>,
}

/// Outcome of a type computation.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeResult {
    /// Bloom-Graham type
    Finite(u32),
    /// no bracket of length up to the bound left the complex tangent space
    ExceedsMaxOrder(u32),
}

impl fmt::Display for TypeResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeResult::Finite(m) => write!(f, "{}", m),
            TypeResult::ExceedsMaxOrder(max) => write!(f, "exceeds max order {}", max),
        }
    }
}

/// Per-level evidence for a type decision.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LevelWitness {
    pub level: u32,
    /// largest `|<bracket, dbar rho>(p)|` over brackets of this length
    pub max_contraction: f64,
    /// word attaining the maximum
    pub word: String,
}

/// Result of a Bloom-Graham type computation at a point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TypeReport {
    pub point: Vec<(f64, f64)>,
    pub result: TypeResult,
    pub level_witness: Vec<LevelWitness>,
    /// `1 + max` coefficient magnitude encountered while scanning
    pub scale: f64,
}

impl Hypersurface {
    pub(crate) fn generators(&self, pivot: usize) -> Arc<Vec<(Gen, VectorField)>> {
        let mut cache = self.bracket_cache.lock().unwrap();
        let store = cache.entry(pivot).or_insert_with(|| {
            let basis = self.basis_for_pivot(pivot);
            let mut generators = Vec::new();
            for (j, field) in basis.fields().iter().enumerate() {
                generators.push((Gen::S(j), field.clone()));
            }
            for (j, field) in basis.fields().iter().enumerate() {
                generators.push((Gen::Sb(j), field.conjugate()));
            }
            LevelStore {
                generators: Arc::new(generators),
                levels: Vec::new(),
            }
        });
        store.generators.clone()
    }

    /// Left-nested brackets of the given length, built and cached on demand.
    fn level_entries(&self, pivot: usize, length: u32) -> Arc<Vec<BracketEntry>> {
        debug_assert!(length >= 2);
        self.generators(pivot); // ensure the store exists
        let mut cache = self.bracket_cache.lock().unwrap();
        let store = cache.get_mut(&pivot).expect("store initialized above");
        while (store.levels.len() as u32) < length - 1 {
            let next = if store.levels.is_empty() {
                let g = &store.generators;
                let mut out = Vec::new();
                let mut seen: HashSet<(Vec<Expr>, Vec<Expr>)> = HashSet::new();
                for a in 0..g.len() {
                    for b in (a + 1)..g.len() {
                        let field = g[a].1.commutator(&g[b].1);
                        if field.is_structurally_zero() || !seen.insert(key_of(&field)) {
                            continue;
                        }
                        let contraction = self.dbar_contraction(&field);
                        out.push(BracketEntry {
                            word: vec![g[a].0, g[b].0],
                            field,
                            contraction,
                        });
                    }
                }
                out
            } else {
                let prev = store.levels.last().unwrap().clone();
                let mut out = Vec::new();
                let mut seen: HashSet<(Vec<Expr>, Vec<Expr>)> = HashSet::new();
                for entry in prev.iter() {
                    for (gen, gf) in store.generators.iter() {
                        let field = entry.field.commutator(gf);
                        if field.is_structurally_zero() || !seen.insert(key_of(&field)) {
                            continue;
                        }
                        let mut word = entry.word.clone();
                        word.push(*gen);
                        let contraction = self.dbar_contraction(&field);
                        out.push(BracketEntry {
                            word,
                            field,
                            contraction,
                        });
                    }
                }
                out
            };
            store.levels.push(Arc::new(next));
        }
        store.levels[(length - 2) as usize].clone()
    }

    /// Bloom-Graham type at `p`, scanning bracket lengths `2..=max_order`.
    ///
    /// The point must lie on the hypersurface. The decision threshold is
    /// `eps_zero * scale` where `scale` tracks the largest bracket
    /// coefficient magnitude seen so far, so the test is insensitive to the
    /// overall size of the fields.
    pub fn bloom_graham_type(
        &self,
        p: &[Complex64],
        max_order: u32,
    ) -> Result<TypeReport, GeometryError> {
        assert!(max_order >= 2, "max_order must be at least 2");
        self.check_on_surface(p)?;
        let pivot = self.pivot_at(p)?;
        let a = self.assignment(p);
        let tol = self.tolerances();

        let mut ev = Evaluator::new(&a);
        let mut scale = 1.0f64;
        let mut witnesses: Vec<LevelWitness> = Vec::new();
        let mut result = None;

        // length 1: the generators themselves never leave the complex
        // tangent space; they only seed the scale and the witness table.
        let mut gen_witness = 0.0f64;
        let mut gen_word = String::new();
        for (gen, field) in self.generators(pivot).iter() {
            let (holo, anti) = eval_field(&mut ev, field)?;
            for c in holo.iter().chain(&anti) {
                scale = scale.max(1.0 + c.norm());
            }
            let c = ev.eval(&self.dbar_contraction(field))?;
            if c.norm() >= gen_witness {
                gen_witness = c.norm();
                gen_word = gen.to_string();
            }
        }
        witnesses.push(LevelWitness {
            level: 1,
            max_contraction: gen_witness,
            word: gen_word,
        });

        for length in 2..=max_order {
            let entries = self.level_entries(pivot, length);
            let mut max_c = 0.0f64;
            let mut max_word = String::new();
            for entry in entries.iter() {
                let (holo, anti) = eval_field(&mut ev, &entry.field)?;
                for c in holo.iter().chain(&anti) {
                    scale = scale.max(1.0 + c.norm());
                }
                let c = ev.eval(&entry.contraction)?;
                if c.norm() >= max_c {
                    max_c = c.norm();
                    max_word = word_string(&entry.word);
                }
            }
            witnesses.push(LevelWitness {
                level: length,
                max_contraction: max_c,
                word: max_word,
            });
            if max_c > tol.eps_zero * scale {
                result = Some(length);
                break;
            }
        }

        Ok(TypeReport {
            point: p.iter().map(|c| (c.re, c.im)).collect(),
            result: match result {
                Some(m) => TypeResult::Finite(m),
                None => TypeResult::ExceedsMaxOrder(max_order),
            },
            level_witness: witnesses,
            scale,
        })
    }

    /// Singular-point aware wrapper that reports the point on failure.
    pub fn type_at(&self, p: &[Complex64], max_order: u32) -> Result<TypeReport, GeometryError> {
        self.bloom_graham_type(p, max_order).map_err(|e| match e {
            GeometryError::SingularPoint { eps, .. } => GeometryError::SingularPoint {
                point: format_point(p),
                eps,
            },
            other => other,
        })
    }
}

fn key_of(field: &VectorField) -> (Vec<Expr>, Vec<Expr>) {
    let n = field.ambient_dim();
    (
        (0..n).map(|j| field.holo_coeff(j).clone()).collect(),
        (0..n).map(|j| field.anti_coeff(j).clone()).collect(),
    )
}

fn eval_field(
    ev: &mut Evaluator<'_>,
    field: &VectorField,
) -> Result<(Vec<Complex64>, Vec<Complex64>), crate::error::EvalError> {
    let n = field.ambient_dim();
    let mut holo = Vec::with_capacity(n);
    let mut anti = Vec::with_capacity(n);
    for j in 0..n {
        holo.push(ev.eval(field.holo_coeff(j))?);
        anti.push(ev.eval(field.anti_coeff(j))?);
    }
    Ok((holo, anti))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprContext;

    fn quartic_model() -> Hypersurface {
        let rho = ExprContext::ambient(2).parse("abs2(z2)^2 - re(z1)").unwrap();
        Hypersurface::new(2, rho).unwrap()
    }

    #[test]
    fn quartic_model_type_four_at_origin() {
        let hs = quartic_model();
        let p = vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let report = hs.bloom_graham_type(&p, 8).unwrap();
        assert_eq!(report.result, TypeResult::Finite(4));
        // levels below the type stay under threshold
        for w in &report.level_witness[..report.level_witness.len() - 1] {
            assert!(w.max_contraction <= 1e-9 * report.scale, "{w:?}");
        }
        let last = report.level_witness.last().unwrap();
        assert!(last.max_contraction > 1e-9 * report.scale);
        assert_eq!(last.level, 4);
    }

    #[test]
    fn quartic_model_type_two_on_curve() {
        let hs = quartic_model();
        let p = vec![Complex64::new(0.0625, 0.0), Complex64::new(0.5, 0.0)];
        let report = hs.bloom_graham_type(&p, 8).unwrap();
        assert_eq!(report.result, TypeResult::Finite(2));
        // only the length-2 level was needed, so deeper levels are unbuilt
        assert!(hs.bracket_cache.lock().unwrap()[&0].levels.len() <= 3);
    }

    #[test]
    fn off_surface_point_rejected() {
        let hs = quartic_model();
        let p = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(
            hs.bloom_graham_type(&p, 8),
            Err(GeometryError::OffSurface { .. })
        ));
    }

    #[test]
    fn sphere_is_type_two_everywhere() {
        let rho = ExprContext::ambient(2)
            .parse("abs2(z1) + abs2(z2) - 1")
            .unwrap();
        let hs = Hypersurface::new(2, rho).unwrap();
        let p = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let report = hs.bloom_graham_type(&p, 6).unwrap();
        assert_eq!(report.result, TypeResult::Finite(2));
    }
}
