//! Class prototype sets and exact cosine top-k retrieval.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::EmbeddingContainer;

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

pub fn l2_normalize(v: &[f32]) -> Result<Vec<f32>> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: i });
    }
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|&x| (f64::from(x) / n) as f32).collect())
}

pub fn cosine_similarity(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Indices and cosine scores of the `k` database rows closest to `query`,
/// sorted by descending score with ties broken by ascending index.
pub fn top_k_retrieval(
    query: &[f32],
    database: &EmbeddingContainer,
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    if database.rows() == 0 {
        return Err(Error::InvalidArgument("database has no rows".into()));
    }
    if k == 0 || k > database.rows() {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={}, got {k}",
            database.rows()
        )));
    }
    if query.len() != database.cols() {
        return Err(Error::DimensionMismatch {
            left: query.len(),
            right: database.cols(),
        });
    }
    let qn = norm(query);
    if qn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut scored: Vec<(usize, f64)> = (0..database.rows())
        .into_par_iter()
        .map(|i| {
            let row = database.row(i);
            let rn = norm(row);
            if rn == 0.0 {
                Err(Error::InvalidArgument(format!("database row {i} is a zero vector")))
            } else {
                Ok((i, (dot(query, row) / (qn * rn)).clamp(-1.0, 1.0)))
            }
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

/// Per-class set of unit-norm prototype embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    class_name: String,
    embeddings: EmbeddingContainer,
    source_ids: Vec<String>,
}

impl PrototypeSet {
    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn embeddings(&self) -> &EmbeddingContainer {
        &self.embeddings
    }

    pub fn source_ids(&self) -> &[String] {
        &self.source_ids
    }

    pub fn len(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }
}

/// Normalizes every row and wraps them as a prototype set. Duplicate rows are
/// kept; they do not change the max-similarity map.
pub fn build_prototype_set<R: AsRef<[f32]>>(
    class_name: impl Into<String>,
    embeddings: &[R],
    source_ids: Vec<String>,
) -> Result<PrototypeSet> {
    if embeddings.is_empty() {
        return Err(Error::InvalidArgument("prototype set needs at least one embedding".into()));
    }
    if source_ids.len() != embeddings.len() {
        return Err(Error::Shape(format!(
            "{} source ids for {} embeddings",
            source_ids.len(),
            embeddings.len()
        )));
    }
    let dim = embeddings[0].as_ref().len();
    let rows = embeddings
        .iter()
        .map(|e| {
            let e = e.as_ref();
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: e.len(),
                });
            }
            l2_normalize(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrototypeSet {
        class_name: class_name.into(),
        embeddings: EmbeddingContainer::from_rows(&rows, true)?,
        source_ids,
    })
}

/// Prototype set from a container; ids default to row indices.
pub fn prototype_set_from_container(
    class_name: impl Into<String>,
    container: &EmbeddingContainer,
    source_ids: Option<Vec<String>>,
) -> Result<PrototypeSet> {
    let ids = source_ids.unwrap_or_else(|| (0..container.rows()).map(|i| i.to_string()).collect());
    let rows: Vec<&[f32]> = container.iter_rows().collect();
    build_prototype_set(class_name, &rows, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_3_4_5() {
        assert_eq!(l2_normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert_eq!(l2_normalize(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(l2_normalize(&[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(cosine_similarity(&[0.0], &[1.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn cosine_symmetric_and_scale_invariant() {
        let a = [0.3f32, -1.2, 2.0];
        let b = [1.5f32, 0.2, -0.7];
        let ab = cosine_similarity(&a, &b).unwrap();
        assert_eq!(ab, cosine_similarity(&b, &a).unwrap());
        let a4: Vec<f32> = a.iter().map(|x| x * 4.0).collect();
        assert!((cosine_similarity(&a4, &b).unwrap() - ab).abs() < 1e-12);
    }

    #[test]
    fn top_k_hand_example() {
        let h = std::f32::consts::FRAC_1_SQRT_2;
        let db = EmbeddingContainer::from_rows(&[[1.0, 0.0], [0.0, 1.0], [h, h]], false).unwrap();
        let got = top_k_retrieval(&[1.0, 0.0], &db, 2).unwrap();
        assert_eq!(got[0], (0, 1.0));
        assert_eq!(got[1].0, 2);
        assert!((got[1].1 - 0.7071).abs() < 1e-4);
    }

    #[test]
    fn top_k_full_is_permutation() {
        let db = EmbeddingContainer::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 0.0]], false)
            .unwrap();
        let got = top_k_retrieval(&[1.0, 0.2], &db, 4).unwrap();
        let mut idx: Vec<_> = got.iter().map(|g| g.0).collect();
        assert!(got.windows(2).all(|w| w[0].1 >= w[1].1));
        idx.sort();
        assert_eq!(idx, [0, 1, 2, 3]);
    }

    #[test]
    fn top_k_identity_and_ties() {
        let db = EmbeddingContainer::from_rows(&[[0.0, 2.0], [3.0, 1.0], [0.0, 5.0]], false).unwrap();
        let got = top_k_retrieval(&[3.0, 1.0], &db, 1).unwrap();
        assert_eq!(got[0].0, 1);
        assert!((got[0].1 - 1.0).abs() < 1e-12);
        // rows 0 and 2 tie exactly; lower index first
        let got = top_k_retrieval(&[0.0, 1.0], &db, 2).unwrap();
        assert_eq!(got, vec![(0, 1.0), (2, 1.0)]);
    }

    #[test]
    fn top_k_errors() {
        let db = EmbeddingContainer::from_rows(&[[1.0f32, 0.0]], false).unwrap();
        assert!(top_k_retrieval(&[1.0, 0.0], &db, 2).is_err());
        assert!(top_k_retrieval(&[1.0, 0.0], &db, 0).is_err());
        assert!(matches!(top_k_retrieval(&[0.0, 0.0], &db, 1), Err(Error::ZeroVector)));
        let empty = EmbeddingContainer::new(0, 2, vec![], false).unwrap();
        assert!(top_k_retrieval(&[1.0, 0.0], &empty, 1).is_err());
    }

    #[test]
    fn prototype_set_normalizes_rows() {
        let set = build_prototype_set("tumor", &[[3.0f32, 4.0], [3.0, 4.0]], vec!["a".into(), "b".into()])
            .unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.embeddings().row(1), &[0.6, 0.8]);
        assert!(set.embeddings().is_normalized());
    }

    #[test]
    fn prototype_set_errors() {
        assert!(matches!(
            build_prototype_set("x", &[vec![1.0f32, 0.0], vec![1.0]], vec!["a".into(), "b".into()]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_prototype_set("x", &[[0.0f32, 0.0]], vec!["a".into()]),
            Err(Error::ZeroVector)
        ));
        let none: [[f32; 2]; 0] = [];
        assert!(build_prototype_set("x", &none, vec![]).is_err());
    }

    #[test]
    fn single_embedding_set() {
        let set = build_prototype_set("x", &[[0.0f32, 2.0]], vec!["only".into()]).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.source_ids(), ["only"]);
    }
}
