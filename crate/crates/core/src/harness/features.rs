use crate::embedding::EmbeddingMatrix;
use crate::textfeat::TextVector;
use crate::{Error, Result};

/// Shape of a classifier input: text block first, embedding block second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub text_len: usize,
    pub embedding_len: usize,
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        self.text_len + self.embedding_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fingerprint(&self) -> String {
        format!("text[0..{}]+embedding[{}..{}]", self.text_len, self.text_len, self.len())
    }
}

/// `densified text ⊕ embedding row`.
pub fn concat_features(
    text: &TextVector,
    vocab_len: usize,
    embedding: &EmbeddingMatrix,
    row: usize,
) -> Result<Vec<f64>> {
    let emb = embedding.get_row(row).ok_or(Error::NodeOutOfRange {
        node: row,
        node_count: embedding.rows(),
    })?;
    if let Some(&(i, _)) = text.entries.last() {
        if i >= vocab_len {
            return Err(Error::DimensionMismatch {
                expected: vocab_len,
                got: i + 1,
            });
        }
    }
    let mut out = vec![0.0; vocab_len + emb.len()];
    text.densify_into(&mut out[..vocab_len]);
    out[vocab_len..].copy_from_slice(emb);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_block_then_embedding() {
        let tv = TextVector {
            entries: vec![(0, 1), (2, 2)],
        };
        let emb = EmbeddingMatrix::from_vec(1, 2, vec![0.5, -0.5]).unwrap();
        assert_eq!(
            concat_features(&tv, 3, &emb, 0).unwrap(),
            vec![1.0, 0.0, 2.0, 0.5, -0.5]
        );
        assert!(concat_features(&tv, 3, &emb, 1).is_err());
        assert!(concat_features(&tv, 2, &emb, 0).is_err());
    }

    #[test]
    fn empty_text_zero_head() {
        let emb = EmbeddingMatrix::from_vec(1, 128, (0..128).map(|i| i as f64 + 1.0).collect()).unwrap();
        let v = concat_features(&TextVector::default(), 10, &emb, 0).unwrap();
        assert_eq!(v.len(), 138);
        assert!(v[..10].iter().all(|&x| x == 0.0));
        assert!(v[10..].iter().all(|&x| x != 0.0));
    }

    #[test]
    fn layout_fingerprint_pins_block_order() {
        let layout = FeatureLayout {
            text_len: 3,
            embedding_len: 2,
        };
        assert_eq!(layout.fingerprint(), "text[0..3]+embedding[3..5]");
        let swapped = FeatureLayout {
            text_len: 2,
            embedding_len: 3,
        };
        assert_ne!(layout.fingerprint(), swapped.fingerprint());
    }
}
