//! Exact maximum-weight bipartite assignment (Hungarian method with
//! potentials, O(n²m)).

/// Maximum total weight of a one-to-one matching between rows and columns of
/// a rectangular weight matrix, and the column matched to each row. Every row
/// is matched when there are at least as many columns as rows, and vice
/// versa. Weights must be finite.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (0.0, vec![None; rows]);
    }
    debug_assert!(weights.iter().all(|r| r.len() == cols));
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols).map(|c| (0..rows).map(|r| weights[r][c]).collect()).collect();
        let (total, col_to_row) = max_weight_assignment(&transposed);
        let mut row_to_col = vec![None; rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            if let Some(r) = r {
                row_to_col[r] = Some(c);
            }
        }
        return (total, row_to_col);
    }
    let cost = |r: usize, c: usize| -weights[r][c];
    // 1-based potentials; column 0 is the virtual source.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for r in 1..=rows {
        owner[0] = r;
        let mut c0 = 0;
        let mut min_to = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[c0] = true;
            let r0 = owner[c0];
            let mut delta = f64::INFINITY;
            let mut c1 = 0;
            for c in 1..=cols {
                if !used[c] {
                    let reduced = cost(r0 - 1, c - 1) - u[r0] - v[c];
                    if reduced < min_to[c] {
                        min_to[c] = reduced;
                        way[c] = c0;
                    }
                    if min_to[c] < delta {
                        delta = min_to[c];
                        c1 = c;
                    }
                }
            }
            for c in 0..=cols {
                if used[c] {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            c0 = c1;
            if owner[c0] == 0 {
                break;
            }
        }
        loop {
            let c1 = way[c0];
            owner[c0] = owner[c1];
            c0 = c1;
            if c0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![None; rows];
    let mut total = 0.0;
    for c in 1..=cols {
        if owner[c] != 0 {
            row_to_col[owner[c] - 1] = Some(c - 1);
            total += weights[owner[c] - 1][c - 1];
        }
    }
    (total, row_to_col)
}
