//! Smith normal form over the integers, used to identify finitely presented
//! abelian groups Z^n / rowspan(R): invariant factors plus the column
//! transform needed to express a generator in diagonal coordinates.

/// diag holds d_0 | d_1 | ... (0 = free coordinate, one entry per column);
/// w is the unimodular column transform: rowspan(R * w) = diagonal lattice,
/// so the class of e_j has diagonal coordinates row j of w.
pub struct IntegerSmith {
    pub diag: Vec<i64>,
    pub w: Vec<Vec<i64>>,
}

impl IntegerSmith {
    /// Orders > 1 of the cyclic summands, divisibility order, 0 for Z.
    pub fn invariant_factors(&self) -> Vec<i64> {
        self.diag.iter().copied().filter(|&d| d != 1).collect()
    }

    /// Coordinate i of the class of e_j, before reduction mod diag[i].
    pub fn coord(&self, j: usize, i: usize) -> i64 {
        self.w[j][i]
    }
}

pub fn smith_integer(rows: &[Vec<i64>], n: usize) -> IntegerSmith {
    let mut a: Vec<Vec<i64>> = rows.to_vec();
    for r in &a {
        assert_eq!(r.len(), n);
    }
    let m = a.len();
    let mut w: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let steps = m.min(n);
    loop {
        diagonalize(&mut a, &mut w, n);
        // enforce the divisibility chain by merging adjacent columns;
        // zero pivots already trail every nonzero one
        let mut fixed = true;
        for t in 0..steps.saturating_sub(1) {
            let (x, y) = (a[t][t], a[t + 1][t + 1]);
            if x != 0 && y != 0 && y % x != 0 {
                for row in a.iter_mut() {
                    row[t] += row[t + 1];
                }
                for row in w.iter_mut() {
                    row[t] += row[t + 1];
                }
                fixed = false;
                break;
            }
        }
        if fixed {
            break;
        }
    }
    let mut diag = vec![0i64; n];
    for t in 0..steps {
        diag[t] = a[t][t].abs();
    }
    // zeros sort to the end: a zero pivot means everything after is zero too
    IntegerSmith { diag, w }
}

fn diagonalize(a: &mut [Vec<i64>], w: &mut [Vec<i64>], n: usize) {
    let m = a.len();
    for t in 0..m.min(n) {
        // move a minimal nonzero entry of the trailing block to (t,t)
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if a[i][j] != 0 && pivot.map_or(true, |(pi, pj)| a[i][j].abs() < a[pi][pj].abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { return };
        a.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in w.iter_mut() {
                row.swap(t, pj);
            }
        }
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if a[i][t] != 0 {
                    let q = a[i][t].div_euclid(a[t][t]);
                    for j in 0..n {
                        a[i][j] -= q * a[t][j];
                    }
                    if a[i][t] != 0 {
                        a.swap(t, i);
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }
            for j in t + 1..n {
                if a[t][j] != 0 {
                    let q = a[t][j].div_euclid(a[t][t]);
                    for row in a.iter_mut() {
                        let v = row[t];
                        row[j] -= q * v;
                    }
                    for row in w.iter_mut() {
                        let v = row[t];
                        row[j] -= q * v;
                    }
                    if a[t][j] != 0 {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                        for row in w.iter_mut() {
                            row.swap(t, j);
                        }
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
    }
}
