use std::io::Write;

use super::{EmbeddingBatch, BLOCKS};
use crate::error::Result;

/// Writes `view_id,source,scale,pair_index,composition_id,f0..` rows. View ids
/// continue across batches; `composition_id` is `batch * B + pair`.
pub fn write_embeddings_csv<W: Write>(writer: W, batches: &[EmbeddingBatch]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let dim = batches.first().map_or(0, EmbeddingBatch::dim);
    let mut header: Vec<String> =
        ["view_id", "source", "scale", "pair_index", "composition_id"].iter().map(|s| s.to_string()).collect();
    header.extend((0..dim).map(|k| format!("f{k}")));
    w.write_record(&header)?;
    let mut view_id = 0usize;
    let mut comp_base = 0usize;
    for b in batches {
        for (v, row) in b.rows().enumerate() {
            let (source, scale) = BLOCKS[v / b.pairs()];
            let pair = v % b.pairs();
            let mut rec = vec![
                view_id.to_string(),
                source.number().to_string(),
                scale.name().to_string(),
                pair.to_string(),
                (comp_base + pair).to_string(),
            ];
            rec.extend(row.iter().map(|x| format!("{x}")));
            w.write_record(&rec)?;
            view_id += 1;
        }
        comp_base += b.pairs();
    }
    w.flush().map_err(|e| crate::error::Error::io("<embeddings>", e))?;
    Ok(())
}
