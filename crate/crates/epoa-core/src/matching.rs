//! Exact maximum-weight bipartite assignment (Hungarian algorithm with
//! potentials, O(n³)). Matrices here are bidders × slots and tiny, so a
//! straightforward dense implementation is the right tool.

/// Maximum-weight assignment of rows to columns. `weights[r][c]` may be any
/// finite f64; rows and columns not matched (after implicit zero-padding to
/// a square matrix) are left out of the result.
///
/// Returns `(total_weight, col_of_row)`.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map(|r| r.len()).unwrap_or(0);
    if rows == 0 || cols == 0 {
        return (0.0, vec![None; rows]);
    }
    let k = rows.max(cols);
    // Pad to square and negate: the solver minimizes cost.
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            -weights[i][j]
        } else {
            0.0
        }
    };

    // Potentials u (rows), v (cols); p[j] = row matched to column j.
    // 1-indexed with a sentinel at 0, the classic formulation.
    let mut u = vec![0.0f64; k + 1];
    let mut v = vec![0.0f64; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![None; rows];
    let mut total = 0.0;
    for j in 1..=k {
        let i = p[j];
        if i >= 1 && i - 1 < rows && j - 1 < cols {
            col_of_row[i - 1] = Some(j - 1);
            total += weights[i - 1][j - 1];
        }
    }
    (total, col_of_row)
}
