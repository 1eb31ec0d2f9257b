//! Contingency tables and maximum-weight one-to-one label matching.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

/// `table[r][c]` counts instances with `rows[i] == r` and `cols[i] == c`.
pub fn contingency(rows: &[usize], k_rows: usize, cols: &[usize], k_cols: usize) -> Vec<Vec<i64>> {
    let mut table = vec![vec![0i64; k_cols]; k_rows];
    for (&r, &c) in rows.iter().zip(cols) {
        table[r][c] += 1;
    }
    table
}

/// Maximum-weight matching on a rectangular table. Returns, for each row,
/// the matched column (`None` for rows left over when there are more rows
/// than columns).
pub fn max_weight_matching(table: &[Vec<i64>]) -> Vec<Option<usize>> {
    let n_rows = table.len();
    let n_cols = table.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return vec![None; n_rows];
    }
    if n_rows <= n_cols {
        let m = Matrix::from_fn(n_rows, n_cols, |(r, c)| table[r][c]);
        let (_, assign) = kuhn_munkres(&m);
        assign.into_iter().map(Some).collect()
    } else {
        let m = Matrix::from_fn(n_cols, n_rows, |(c, r)| table[r][c]);
        let (_, assign) = kuhn_munkres(&m);
        let mut out = vec![None; n_rows];
        for (c, r) in assign.into_iter().enumerate() {
            out[r] = Some(c);
        }
        out
    }
}

/// Sum of the matched entries.
pub fn matched_weight(table: &[Vec<i64>]) -> i64 {
    max_weight_matching(table)
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| table[r][c]))
        .sum()
}
