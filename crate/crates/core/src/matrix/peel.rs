//! Rank-preserving reduction of sparse 0-1 matrices.
//!
//! A row whose only non-zero entry sits in column `j` can clear the rest of
//! column `j` by row operations without touching any other column, so
//! `rank(M) = 1 + rank(M minus that row and column)`. The same holds for a
//! column with a single non-zero entry. Zero lines are dropped. The identity
//! holds over every field, so it commutes with any modular rank as well as
//! the rational one.

use std::collections::VecDeque;

use super::bits::BitMatrix;

pub(crate) struct Peeled {
    pub removed_rank: usize,
    pub core: BitMatrix,
}

#[derive(Clone, Copy)]
enum Line {
    Row(usize),
    Col(usize),
}

pub(crate) fn peel(m: &BitMatrix) -> Peeled {
    let (rows, cols) = (m.rows(), m.cols());
    let mut row_alive = vec![true; rows];
    let mut col_alive = vec![true; cols];
    let mut row_cnt: Vec<usize> = (0..rows).map(|i| m.row_weight(i)).collect();
    let mut col_cnt = m.col_weights();
    let mut queue: VecDeque<Line> = VecDeque::new();
    for (i, &c) in row_cnt.iter().enumerate() {
        if c <= 1 {
            queue.push_back(Line::Row(i));
        }
    }
    for (j, &c) in col_cnt.iter().enumerate() {
        if c <= 1 {
            queue.push_back(Line::Col(j));
        }
    }
    let mut removed_rank = 0;

    while let Some(line) = queue.pop_front() {
        match line {
            Line::Row(i) => {
                if !row_alive[i] || row_cnt[i] > 1 {
                    continue;
                }
                row_alive[i] = false;
                if row_cnt[i] == 0 {
                    continue;
                }
                let j = (0..cols)
                    .find(|&j| col_alive[j] && m.get(i, j))
                    .expect("row count out of sync");
                removed_rank += 1;
                col_alive[j] = false;
                for r in 0..rows {
                    if row_alive[r] && m.get(r, j) {
                        row_cnt[r] -= 1;
                        if row_cnt[r] <= 1 {
                            queue.push_back(Line::Row(r));
                        }
                    }
                }
            }
            Line::Col(j) => {
                if !col_alive[j] || col_cnt[j] > 1 {
                    continue;
                }
                col_alive[j] = false;
                if col_cnt[j] == 0 {
                    continue;
                }
                let i = (0..rows)
                    .find(|&i| row_alive[i] && m.get(i, j))
                    .expect("column count out of sync");
                removed_rank += 1;
                row_alive[i] = false;
                for c in 0..cols {
                    if col_alive[c] && m.get(i, c) {
                        col_cnt[c] -= 1;
                        if col_cnt[c] <= 1 {
                            queue.push_back(Line::Col(c));
                        }
                    }
                }
            }
        }
    }

    let keep_r: Vec<usize> = (0..rows).filter(|&i| row_alive[i]).collect();
    let keep_c: Vec<usize> = (0..cols).filter(|&j| col_alive[j]).collect();
    Peeled {
        removed_rank,
        core: m.select(&keep_r, &keep_c),
    }
}
