use crate::error::{Error, Result};

/// Write order for `n_boxes` boxes of `n_fields` fields: every box of field 0,
/// then every box of field 1, and so on. Pairs are `(field, box)`.
pub fn group_order(n_boxes: usize, n_fields: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_fields).flat_map(move |f| (0..n_boxes).map(move |b| (f, b)))
}

/// Reorders per-box field data (`per_box[box][field]`) into field-major
/// order by walking [`group_order`].
pub fn layout_group_fields<T: Clone>(per_box: &[Vec<T>]) -> Vec<T> {
    let n_fields = per_box.first().map_or(0, Vec::len);
    group_order(per_box.len(), n_fields)
        .map(|(f, b)| per_box[b][f].clone())
        .collect()
}

/// Global chunk size for one (level, field): the largest per-rank count.
pub fn select_chunk_elements(per_rank: &[usize]) -> Result<usize> {
    per_rank
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Config("no ranks to size a chunk for".into()))
}
