//! Two-phase revised simplex with Bland's rule over exact rationals.
//!
//! Problems are in equality form `A x = b, x >= 0` with integer
//! coefficients, nonnegative rational right-hand sides and integer costs.
//! The basis inverse is kept explicitly. Rows whose constraint matrix
//! contains a unit column start with it in the basis; the other rows get an
//! artificial variable. When phase 1 ends with a positive infeasibility the
//! phase-1 simplex multipliers form a Farkas ray: `y·b > 0` and `y·A_j <= 0`
//! for every column.

use num_rational::BigRational;
use num_traits::Zero;

use super::scalar::{clear_overflow, overflowed, Scalar, Small};

#[derive(Clone, Debug, Default)]
pub(crate) struct LinearProgram {
    pub rows: usize,
    /// Sparse columns as `(row, coefficient)` pairs.
    pub columns: Vec<Vec<(u32, i64)>>,
    pub cost: Vec<i64>,
    pub rhs: Vec<BigRational>,
}

impl LinearProgram {
    pub fn new(rows: usize, rhs: Vec<BigRational>) -> Self {
        assert_eq!(rhs.len(), rows);
        LinearProgram {
            rows,
            columns: Vec::new(),
            cost: Vec::new(),
            rhs,
        }
    }

    pub fn push_column(&mut self, entries: Vec<(u32, i64)>, cost: i64) -> usize {
        self.columns.push(entries);
        self.cost.push(cost);
        self.columns.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpResult {
    Optimal {
        x: Vec<BigRational>,
        objective: BigRational,
    },
    Infeasible {
        ray: Vec<BigRational>,
    },
    Unbounded,
}

/// Solves `lp`. With `optimize == false` only feasibility is decided and
/// the returned point is the phase-1 basic solution.
pub(crate) fn solve(lp: &LinearProgram, optimize: bool) -> LpResult {
    assert!(
        lp.rhs.iter().all(|b| *b >= <BigRational as Zero>::zero()),
        "rhs must be nonnegative"
    );
    clear_overflow();
    if let Some(r) = Solver::<Small>::new(lp).and_then(|s| s.run(optimize)) {
        return r;
    }
    clear_overflow();
    Solver::<BigRational>::new(lp)
        .and_then(|s| s.run(optimize))
        .expect("exact arithmetic cannot overflow")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

enum Status {
    Optimal,
    Unbounded,
}

struct Solver<'a, S> {
    lp: &'a LinearProgram,
    m: usize,
    nstruct: usize,
    art_row: Vec<u32>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<S>>,
    xb: Vec<S>,
}

impl<'a, S: Scalar> Solver<'a, S> {
    fn new(lp: &'a LinearProgram) -> Option<Self> {
        let m = lp.rows;
        let nstruct = lp.columns.len();
        let mut unit: Vec<Option<usize>> = vec![None; m];
        for (j, col) in lp.columns.iter().enumerate() {
            if let [(r, 1)] = col.as_slice() {
                unit[*r as usize].get_or_insert(j);
            }
        }
        let mut art_row = Vec::new();
        let mut basis = Vec::with_capacity(m);
        for (r, u) in unit.iter().enumerate() {
            match u {
                Some(j) => basis.push(*j),
                None => {
                    basis.push(nstruct + art_row.len());
                    art_row.push(r as u32);
                }
            }
        }
        let mut is_basic = vec![false; nstruct + art_row.len()];
        for &j in &basis {
            is_basic[j] = true;
        }
        let binv = (0..m)
            .map(|r| {
                let mut row = vec![S::zero(); m];
                row[r] = S::from_int(1);
                row
            })
            .collect();
        let xb = lp.rhs.iter().map(S::from_big).collect();
        if overflowed() {
            return None;
        }
        Some(Solver {
            lp,
            m,
            nstruct,
            art_row,
            basis,
            is_basic,
            binv,
            xb,
        })
    }

    fn column(&self, j: usize) -> ColumnRef<'_> {
        if j < self.nstruct {
            ColumnRef::Sparse(&self.lp.columns[j])
        } else {
            ColumnRef::Unit(self.art_row[j - self.nstruct])
        }
    }

    fn cost(&self, j: usize, phase: Phase) -> i64 {
        match phase {
            Phase::One => i64::from(j >= self.nstruct),
            Phase::Two if j < self.nstruct => self.lp.cost[j],
            Phase::Two => 0,
        }
    }

    fn multipliers(&self, phase: Phase) -> Vec<S> {
        let mut y = vec![S::zero(); self.m];
        for r in 0..self.m {
            let c = self.cost(self.basis[r], phase);
            if c == 0 {
                continue;
            }
            for (yi, bi) in y.iter_mut().zip(&self.binv[r]) {
                if !bi.is_zero() {
                    *yi = yi.add(&bi.mul_int(c));
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[S], phase: Phase) -> S {
        let mut d = S::from_int(self.cost(j, phase));
        self.column(j).for_each(|i, a| {
            let yi = &y[i as usize];
            if !yi.is_zero() {
                d = d.sub(&yi.mul_int(a));
            }
        });
        d
    }

    /// `B^{-1} A_j`.
    fn direction(&self, j: usize) -> Vec<S> {
        let col = self.column(j);
        (0..self.m)
            .map(|r| {
                let row = &self.binv[r];
                let mut acc = S::zero();
                col.for_each(|i, a| {
                    let b = &row[i as usize];
                    if !b.is_zero() {
                        acc = acc.add(&b.mul_int(a));
                    }
                });
                acc
            })
            .collect()
    }

    fn pivot(&mut self, p: usize, j: usize, u: &[S]) {
        let piv = u[p].clone();
        let prow: Vec<S> = self.binv[p].iter().map(|v| v.div(&piv)).collect();
        let px = self.xb[p].div(&piv);
        for (r, f) in u.iter().enumerate() {
            if r == p || f.is_zero() {
                continue;
            }
            for (dst, src) in self.binv[r].iter_mut().zip(&prow) {
                if !src.is_zero() {
                    *dst = dst.sub(&f.mul(src));
                }
            }
            self.xb[r] = self.xb[r].sub(&f.mul(&px));
        }
        self.binv[p] = prow;
        self.xb[p] = px;
        self.is_basic[self.basis[p]] = false;
        self.basis[p] = j;
        self.is_basic[j] = true;
    }

    /// Runs Bland-rule iterations. `None` signals scalar overflow.
    fn iterate(&mut self, phase: Phase) -> Option<Status> {
        let ncols = match phase {
            Phase::One => self.nstruct + self.art_row.len(),
            Phase::Two => self.nstruct,
        };
        loop {
            let y = self.multipliers(phase);
            let entering = (0..ncols)
                .find(|&j| !self.is_basic[j] && self.reduced_cost(j, &y, phase).is_negative());
            if overflowed() {
                return None;
            }
            let Some(j) = entering else {
                return Some(Status::Optimal);
            };
            let u = self.direction(j);
            let mut leave: Option<(usize, S)> = None;
            for (r, ur) in u.iter().enumerate() {
                if !ur.is_positive() {
                    continue;
                }
                let ratio = self.xb[r].div(ur);
                let better = match &leave {
                    None => true,
                    Some((q, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*q])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((p, _)) = leave else {
                return Some(Status::Unbounded);
            };
            self.pivot(p, j, &u);
            if overflowed() {
                return None;
            }
        }
    }

    fn run(mut self, optimize: bool) -> Option<LpResult> {
        if !self.art_row.is_empty() {
            self.iterate(Phase::One)?;
            let infeasibility = (0..self.m)
                .filter(|&r| self.basis[r] >= self.nstruct)
                .fold(S::zero(), |acc, r| acc.add(&self.xb[r]));
            if infeasibility.is_positive() {
                let ray = self.multipliers(Phase::One).iter().map(S::to_big).collect();
                return if overflowed() {
                    None
                } else {
                    Some(LpResult::Infeasible { ray })
                };
            }
            self.drive_out_artificials();
            if overflowed() {
                return None;
            }
        }
        if optimize {
            match self.iterate(Phase::Two)? {
                Status::Optimal => {}
                Status::Unbounded => return Some(LpResult::Unbounded),
            }
        }
        let mut x = vec![<BigRational as Zero>::zero(); self.nstruct];
        for r in 0..self.m {
            if self.basis[r] < self.nstruct {
                x[self.basis[r]] = self.xb[r].to_big();
            }
        }
        let objective = x
            .iter()
            .zip(&self.lp.cost)
            .filter(|(_, &c)| c != 0)
            .fold(<BigRational as Zero>::zero(), |acc, (v, &c)| {
                acc + v * num_bigint::BigInt::from(c)
            });
        if overflowed() {
            return None;
        }
        Some(LpResult::Optimal { x, objective })
    }

    /// Replaces zero-level basic artificials by structural columns where
    /// possible. Rows where no structural column has a nonzero entry are
    /// redundant; their artificial stays basic at zero and never moves.
    fn drive_out_artificials(&mut self) {
        for p in 0..self.m {
            if self.basis[p] < self.nstruct {
                continue;
            }
            let candidate = (0..self.nstruct).find(|&j| {
                if self.is_basic[j] {
                    return false;
                }
                let mut acc = S::zero();
                self.column(j).for_each(|i, a| {
                    acc = acc.add(&self.binv[p][i as usize].mul_int(a));
                });
                !acc.is_zero()
            });
            if let Some(j) = candidate {
                let u = self.direction(j);
                self.pivot(p, j, &u);
            }
        }
    }
}

enum ColumnRef<'a> {
    Sparse(&'a [(u32, i64)]),
    Unit(u32),
}

impl ColumnRef<'_> {
    fn for_each(&self, mut f: impl FnMut(u32, i64)) {
        match self {
            ColumnRef::Sparse(entries) => entries.iter().for_each(|&(i, a)| f(i, a)),
            ColumnRef::Unit(r) => f(*r, 1),
        }
    }
}
