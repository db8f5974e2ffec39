//! Exact linear feasibility: phase one of the simplex method over rationals
//! with Bland's rule, so it cannot cycle.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

/// Finds `x >= 0` with `row . x (rel) rhs` for every row, or `None` when the
/// system is infeasible.
pub fn solve_feasibility(rows: &[(Vec<Rational>, Relation, Rational)], num_vars: usize) -> Option<Vec<Rational>> {
    let m = rows.len();
    if m == 0 {
        return Some(vec![Rational::zero(); num_vars]);
    }
    let num_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art0 = num_vars + num_slack;
    let width = art0 + m;

    // Tableau rows: coefficients then right-hand side in the last column.
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    let mut basis = Vec::with_capacity(m);
    let mut slack = num_vars;
    for (r, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        assert_eq!(coeffs.len(), num_vars, "row {r} has the wrong width");
        let negate = rhs.is_negative();
        let sign = |v: &Rational| if negate { -v.clone() } else { v.clone() };
        let rel = if negate { rel.flipped() } else { *rel };
        let mut row = vec![Rational::zero(); width + 1];
        for (j, v) in coeffs.iter().enumerate() {
            row[j] = sign(v);
        }
        match rel {
            Relation::Le => {
                row[slack] = Rational::one();
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -Rational::one();
                slack += 1;
            }
            Relation::Eq => {}
        }
        row[art0 + r] = Rational::one();
        row[width] = sign(rhs);
        tab.push(row);
        basis.push(art0 + r);
    }
    // Objective: minimise the sum of artificials, written as reduced costs.
    let mut obj = vec![Rational::zero(); width + 1];
    for row in &tab {
        for j in 0..art0 {
            obj[j] -= &row[j];
        }
        obj[width] -= &row[width];
    }
    tab.push(obj);

    while let Some(enter) = (0..width).find(|&j| tab[m][j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..m {
            let a = &tab[r][enter];
            if !a.is_positive() {
                continue;
            }
            let ratio = &tab[r][width] / a;
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        let (pivot_row, _) = leave.expect("phase one objective is bounded below by zero");
        pivot(&mut tab, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    if !tab[m][width].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); num_vars];
    for (r, &var) in basis.iter().enumerate() {
        if var < num_vars {
            x[var] = tab[r][width].clone();
        }
    }
    Some(x)
}

fn pivot(tab: &mut [Vec<Rational>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        if !v.is_zero() {
            *v = &*v / &p;
        }
    }
    let pivot_row = tab[row].clone();
    for (r, other) in tab.iter_mut().enumerate() {
        if r == row || other[col].is_zero() {
            continue;
        }
        let factor = other[col].clone();
        for (v, pv) in other.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &factor * pv;
            }
        }
    }
}
