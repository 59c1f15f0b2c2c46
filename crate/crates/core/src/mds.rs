//! Vandermonde coefficient matrices whose every maximal square column
//! submatrix is invertible, and the matching encode/recover pair.
//!
//! Positions are 0-based here. A `k x m` matrix sends `k` combinations of `m`
//! symbols; any receiver holding `m - k` of the symbols solves for the rest.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::galois::{FieldElement, GaloisField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<FieldElement>>,
    eval_points: Vec<FieldElement>,
}

impl MdsMatrix {
    /// `k x m` matrix with `entry(i, j) = point_j^i`, points `0, 1, .., m-1`.
    pub fn new(m: usize, k: usize, field: &GaloisField) -> Result<Self> {
        if m > field.order() {
            return Err(Error::FieldCapacity {
                needed: m,
                width: field.spec().width(),
                available: field.order(),
            });
        }
        assert!(k <= m, "row count {k} exceeds column count {m}");
        let eval_points: Vec<FieldElement> = (0..m).map(|p| FieldElement(p as u16)).collect();
        let entries = (0..k)
            .map(|i| {
                eval_points
                    .iter()
                    .map(|&p| field.pow(p, i as u32))
                    .collect()
            })
            .collect();
        Ok(MdsMatrix {
            rows: k,
            cols: m,
            entries,
            eval_points,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.entries[i][j]
    }

    pub fn eval_points(&self) -> &[FieldElement] {
        &self.eval_points
    }

    pub fn encode(&self, field: &GaloisField, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(self
            .entries
            .iter()
            .map(|row| {
                row.iter().zip(x).fold(FieldElement::ZERO, |acc, (&a, &v)| {
                    field.add(acc, field.mul(a, v))
                })
            })
            .collect())
    }

    /// Recover the full symbol vector from `y = A x` and exactly `m - k`
    /// known positions.
    pub fn recover(
        &self,
        field: &GaloisField,
        y: &[FieldElement],
        known: &BTreeMap<usize, FieldElement>,
    ) -> Result<Vec<FieldElement>> {
        if y.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: y.len(),
            });
        }
        if known.len() != self.cols - self.rows {
            return Err(Error::KnownCount {
                expected: self.cols - self.rows,
                got: known.len(),
            });
        }
        if let Some((&p, _)) = known.iter().find(|(&p, _)| p >= self.cols) {
            return Err(Error::KnownPosition(p));
        }
        let unknown: Vec<usize> = (0..self.cols).filter(|p| !known.contains_key(p)).collect();
        let n = unknown.len();

        // augmented system over the unknown columns
        let mut sys: Vec<Vec<FieldElement>> = (0..self.rows)
            .map(|i| {
                let rhs = known.iter().fold(y[i], |acc, (&p, &v)| {
                    field.sub(acc, field.mul(self.entries[i][p], v))
                });
                let mut row: Vec<FieldElement> =
                    unknown.iter().map(|&p| self.entries[i][p]).collect();
                row.push(rhs);
                row
            })
            .collect();

        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !sys[r][col].is_zero())
                .ok_or(Error::Singular)?;
            sys.swap(col, pivot);
            let inv = field.inv(sys[col][col])?;
            for v in sys[col].iter_mut() {
                *v = field.mul(*v, inv);
            }
            let pivot_row = sys[col].clone();
            for (r, row) in sys.iter_mut().enumerate() {
                if r == col || row[col].is_zero() {
                    continue;
                }
                let factor = row[col];
                for (v, &p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *v = field.sub(*v, field.mul(factor, p));
                }
            }
        }

        let mut out = vec![FieldElement::ZERO; self.cols];
        for (&p, &v) in known {
            out[p] = v;
        }
        for (idx, &p) in unknown.iter().enumerate() {
            out[p] = sys[idx][n];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn el(v: u16) -> FieldElement {
        FieldElement(v)
    }

    // GF(4) with x^2 + x + 1, written out by hand.
    const GF4_MUL: [[u16; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];

    fn gf4_det2(a: [[u16; 2]; 2]) -> u16 {
        GF4_MUL[a[0][0] as usize][a[1][1] as usize] ^ GF4_MUL[a[0][1] as usize][a[1][0] as usize]
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn parity_row() {
        let f = GaloisField::with_width(8).unwrap();
        let a = MdsMatrix::new(2, 1, f).unwrap();
        assert_eq!(a.entries, vec![vec![el(1), el(1)]]);
        assert_eq!(a.encode(f, &[el(5), el(9)]).unwrap(), vec![el(5 ^ 9)]);
        let known = BTreeMap::from([(0, el(5))]);
        assert_eq!(
            a.recover(f, &[el(5 ^ 9)], &known).unwrap(),
            vec![el(5), el(9)]
        );
    }

    #[test]
    fn gf4_three_by_two() {
        let f = GaloisField::with_width(2).unwrap();
        let a = MdsMatrix::new(3, 2, f).unwrap();
        assert_eq!(
            a.entries,
            vec![vec![el(1), el(1), el(1)], vec![el(0), el(1), el(2)]]
        );
        for cols in combinations(3, 2) {
            let sub = [
                [a.entry(0, cols[0]).0, a.entry(0, cols[1]).0],
                [a.entry(1, cols[0]).0, a.entry(1, cols[1]).0],
            ];
            assert_ne!(gf4_det2(sub), 0, "columns {cols:?}");
        }
        // (1^2^3, 0*1 + 1*2 + 2*3) by the hand table
        let expected = [1 ^ 2 ^ 3, GF4_MUL[0][1] ^ GF4_MUL[1][2] ^ GF4_MUL[2][3]];
        assert_eq!(expected, [0, 3]);
        let x = [el(1), el(2), el(3)];
        let y = a.encode(f, &x).unwrap();
        assert_eq!(y, vec![el(0), el(3)]);
        let known = BTreeMap::from([(0, el(1))]);
        assert_eq!(a.recover(f, &y, &known).unwrap(), x.to_vec());
    }

    #[test]
    fn zero_vector_and_degenerate_rows() {
        let f = GaloisField::with_width(8).unwrap();
        let a = MdsMatrix::new(4, 2, f).unwrap();
        assert_eq!(a.encode(f, &[el(0); 4]).unwrap(), vec![el(0); 2]);
        let none = MdsMatrix::new(3, 0, f).unwrap();
        let known = BTreeMap::from([(0, el(4)), (1, el(5)), (2, el(6))]);
        assert_eq!(
            none.recover(f, &[], &known).unwrap(),
            vec![el(4), el(5), el(6)]
        );
    }

    #[test]
    fn errors() {
        let f = GaloisField::with_width(2).unwrap();
        assert!(matches!(
            MdsMatrix::new(5, 2, f),
            Err(Error::FieldCapacity { .. })
        ));
        let a = MdsMatrix::new(3, 2, f).unwrap();
        assert!(matches!(
            a.encode(f, &[el(1)]),
            Err(Error::LengthMismatch { .. })
        ));
        let y = [el(0), el(0)];
        assert!(matches!(
            a.recover(f, &y, &BTreeMap::new()),
            Err(Error::KnownCount {
                expected: 1,
                got: 0
            })
        ));
        assert!(matches!(
            a.recover(f, &y, &BTreeMap::from([(7, el(0))])),
            Err(Error::KnownPosition(7))
        ));
    }

    #[test]
    fn square_matrix_recovers_with_nothing_known() {
        let f = GaloisField::with_width(8).unwrap();
        let a = MdsMatrix::new(5, 5, f).unwrap();
        let x: Vec<_> = [3, 1, 4, 1, 5].into_iter().map(el).collect();
        let y = a.encode(f, &x).unwrap();
        assert_eq!(a.recover(f, &y, &BTreeMap::new()).unwrap(), x);
    }

    #[test]
    fn round_trip_every_known_subset() {
        let f = GaloisField::with_width(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=8 {
            for k in 0..=m {
                let a = MdsMatrix::new(m, k, f).unwrap();
                let subsets = combinations(m, m - k);
                for _ in 0..100 {
                    let x: Vec<_> = (0..m).map(|_| el(rng.gen::<u8>() as u16)).collect();
                    let y = a.encode(f, &x).unwrap();
                    for known_pos in &subsets {
                        let known = known_pos.iter().map(|&p| (p, x[p])).collect();
                        assert_eq!(a.recover(f, &y, &known).unwrap(), x, "m={m} k={k}");
                    }
                }
            }
        }
    }
}
