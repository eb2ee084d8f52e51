/// Exhaustive scan: every distance computed, full sort by (distance, id).
pub fn top_k(rows: &[Vec<f64>], ids: &[u64], query: &[f64], k: usize) -> Vec<(u64, f64)> {
    let mut all: Vec<(u64, f64)> = rows
        .iter()
        .zip(ids)
        .map(|(r, &id)| {
            let mut d = 0.0;
            for i in 0..r.len() {
                d += (r[i] - query[i]) * (r[i] - query[i]);
            }
            (id, d)
        })
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}
