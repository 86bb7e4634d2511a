use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::{CocycError, SystemDef};
use crate::poly::{format_rational, monomials_by_degree, Monomial, Poly, Rational, Scalar};

/// Graph `y = h(x)` of a local stable manifold over the stable coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphJet<C> {
    pub stable: Vec<usize>,
    pub unstable: Vec<usize>,
    /// One polynomial per center-unstable coordinate, in the stable variables.
    pub graph: Vec<Poly<C>>,
    /// Largest coefficient of the invariance defect up to the solved degree.
    pub residual: f64,
    pub degree: u32,
}

fn linear_coeff<C: Scalar>(p: &Poly<C>, j: usize) -> C {
    p.coeff(&Monomial::var(p.nvars(), j))
}

/// Substitutes `(x, h(x))` for the coordinates, `x` the stable variables.
fn on_graph<C: Scalar>(components: &[Poly<C>], stable: &[usize], unstable: &[usize], h: &[Poly<C>], deg: u32) -> Vec<Poly<C>> {
    let s = stable.len();
    let mut subs = vec![Poly::zero(s); components.len()];
    for (p, &i) in stable.iter().enumerate() {
        subs[i] = Poly::var(s, p);
    }
    for (q, &i) in unstable.iter().enumerate() {
        subs[i] = h[q].clone();
    }
    components.iter().map(|f| f.compose_truncated(&subs, Some(deg))).collect()
}

/// `f_c(x, h) − h(f_s(x, h))` truncated at `deg`.
fn defect<C: Scalar>(components: &[Poly<C>], stable: &[usize], unstable: &[usize], h: &[Poly<C>], deg: u32) -> Vec<Poly<C>> {
    let img = on_graph(components, stable, unstable, h, deg);
    let fs: Vec<Poly<C>> = stable.iter().map(|&i| img[i].clone()).collect();
    unstable.iter().enumerate().map(|(q, &i)| img[i].sub(&h[q].compose_truncated(&fs, Some(deg)))).collect()
}

/// Gaussian elimination with partial pivoting. Returns the failing column and
/// pivot when every candidate pivot is below `tol`.
fn solve_dense<C: Scalar>(mut m: Vec<Vec<C>>, mut rhs: Vec<C>, tol: f64) -> Result<Vec<C>, (usize, f64)> {
    let n = rhs.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (best, mag) = (col..n).map(|r| (r, m[r][col].magnitude())).fold((col, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if !(mag >= tol) || (C::is_exact() && m[best][col].is_zero()) {
            return Err((perm[col], mag.max(0.0)));
        }
        m.swap(col, best);
        rhs.swap(col, best);
        perm.swap(col, best);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / m[col][col].clone();
            for c in col..n {
                let v = m[r][c].clone() - f.clone() * m[col][c].clone();
                m[r][c] = v;
            }
            let v = rhs[r].clone() - f * rhs[col].clone();
            rhs[r] = v;
        }
    }
    let mut x = vec![C::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            acc = acc - m[r][c].clone() * x[c].clone();
        }
        x[r] = acc / m[r][r].clone();
    }
    Ok(x)
}

/// Solves the invariance equation `B h_n − h_n∘A = known_n` degree by degree.
/// The linear part must not couple the stable and center-unstable coordinates
/// (entries within `tol` of zero are dropped in floating point).
pub fn solve_graph<C: Scalar>(components: &[Poly<C>], stable: &[usize], degree: u32, tol: f64) -> Result<GraphJet<C>, CocycError> {
    let d = components.len();
    if stable.is_empty() || stable.iter().any(|&i| i >= d) {
        return Err(CocycError::Shape("stable coordinates must be a non-empty subset of the coordinates".into()));
    }
    if components.iter().any(|p| p.constant_term().magnitude() > 0.0) {
        return Err(CocycError::Invalid("the fixed point must sit at the origin".into()));
    }
    let unstable: Vec<usize> = (0..d).filter(|i| !stable.contains(i)).collect();
    let s = stable.len();
    let mut comps = components.to_vec();
    for (i, f) in comps.iter_mut().enumerate() {
        let row_stable = stable.contains(&i);
        for j in 0..d {
            if stable.contains(&j) != row_stable {
                let c = linear_coeff(f, j);
                if c.magnitude() > tol || (C::is_exact() && !c.is_zero()) {
                    return Err(CocycError::Invalid(format!("linear part couples coordinate {i} to {j} across the split")));
                }
                f.add_term(Monomial::var(d, j), -c);
            }
        }
    }
    let a: Vec<Poly<C>> = stable
        .iter()
        .map(|&i| Poly::from_terms(s, stable.iter().enumerate().map(|(p, &j)| (Monomial::var(s, p), linear_coeff(&comps[i], j)))))
        .collect();
    let b: Vec<Vec<C>> = unstable.iter().map(|&i| unstable.iter().map(|&j| linear_coeff(&comps[i], j)).collect()).collect();

    let c = unstable.len();
    let mut h = vec![Poly::zero(s); c];
    for n in 2..=degree {
        let known: Vec<Poly<C>> = defect(&comps, stable, &unstable, &h, n).into_iter().map(|p| p.homogeneous(n).neg()).collect();
        let monos = monomials_by_degree(s, n, n);
        let k = monos.len();
        let pulled: Vec<Poly<C>> = monos.iter().map(|m| Poly::monomial(m.clone(), C::one()).compose(&a)).collect();
        let mut mat = vec![vec![C::zero(); c * k]; c * k];
        for q in 0..c {
            for mi in 0..k {
                let col = q * k + mi;
                for (qq, brow) in b.iter().enumerate() {
                    let row = qq * k + mi;
                    mat[row][col] = mat[row][col].clone() + brow[q].clone();
                }
                for (mj, mm) in monos.iter().enumerate() {
                    let row = q * k + mj;
                    mat[row][col] = mat[row][col].clone() - pulled[mi].coeff(mm);
                }
            }
        }
        let rhs: Vec<C> = (0..c).flat_map(|q| monos.iter().map(move |m| (q, m))).map(|(q, m)| known[q].coeff(m)).collect();
        let sol = solve_dense(mat, rhs, tol).map_err(|(col, divisor)| CocycError::SmallDivisor {
            slot: format!("coordinate {} monomial {:?}", unstable[col / k], monos[col % k].exps()),
            divisor,
        })?;
        for q in 0..c {
            for (mi, m) in monos.iter().enumerate() {
                h[q].add_term(m.clone(), sol[q * k + mi].clone());
            }
        }
    }
    let residual = defect(&comps, stable, &unstable, &h, degree).iter().map(Poly::max_abs_coeff).fold(0.0, f64::max);
    Ok(GraphJet { stable: stable.to_vec(), unstable, graph: h, residual, degree })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphTerm {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub value: f64,
    /// Exact coefficient, when solved in rational arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableManifold {
    pub degree: u32,
    pub exact: bool,
    /// Columns: the coordinate frame `(x, y)` in ambient coordinates, stable first.
    pub basis: Vec<Vec<f64>>,
    pub stable_dim: usize,
    pub terms: Vec<GraphTerm>,
    pub residual: f64,
    #[serde(skip)]
    pub exact_graph: Option<Vec<Poly<Rational>>>,
    #[serde(skip)]
    pub graph: Vec<Poly<f64>>,
}

fn coupling_components(l: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let d = l.nrows();
    let mut seen = vec![false; d];
    let mut out = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let i = comp[k];
            for j in 0..d {
                if !seen[j] && (l[(i, j)] != 0.0 || l[(j, i)] != 0.0) {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn moduli(l: &DMatrix<f64>) -> Vec<f64> {
    l.complex_eigenvalues().iter().map(|z| z.norm()).collect()
}

/// Local stable manifold of a fixed point at the origin, as a degree-`degree`
/// jet of the graph over the contracting directions.
///
/// When the linear part already separates contracting from non-contracting
/// coordinates the solve is exact; otherwise the map is moved to a real
/// eigenbasis and solved in floating point.
pub fn local_stable_manifold(sys: &SystemDef, degree: u32, tol: f64) -> Result<StableManifold, CocycError> {
    if degree < 2 {
        return Err(CocycError::Invalid("stable manifold degree must be at least 2".into()));
    }
    let comps = sys.components();
    let d = sys.dim();
    let l = DMatrix::from_fn(d, d, |i, j| linear_coeff(&comps[i], j).to_f64().unwrap_or(f64::NAN));
    let all = moduli(&l);
    if !all.iter().any(|&m| m < 1.0) {
        return Err(CocycError::NotHyperbolic("no contracting direction".into()));
    }
    if all.iter().any(|&m| (m - 1.0).abs() <= tol) && all.iter().filter(|&&m| m < 1.0 - tol).count() == 0 {
        return Err(CocycError::NotHyperbolic("contracting spectrum touches the unit circle".into()));
    }

    let mut stable = Vec::new();
    let mut separable = true;
    for comp in coupling_components(&l) {
        let sub = DMatrix::from_fn(comp.len(), comp.len(), |a, b| l[(comp[a], comp[b])]);
        let m = moduli(&sub);
        if m.iter().all(|&x| x < 1.0) {
            stable.extend(comp);
        } else if m.iter().any(|&x| x < 1.0) {
            separable = false;
        }
    }
    stable.sort_unstable();

    if separable {
        let jet = solve_graph(&comps, &stable, degree, tol)?;
        let unstable = jet.unstable.clone();
        let order: Vec<usize> = stable.iter().chain(&unstable).copied().collect();
        let basis = order.iter().map(|&i| (0..d).map(|r| if r == i { 1.0 } else { 0.0 }).collect()).collect();
        let graph: Vec<Poly<f64>> = jet.graph.iter().map(|p| p.map_coeffs(|c| c.to_f64().unwrap_or(f64::NAN))).collect();
        let terms = jet
            .graph
            .iter()
            .enumerate()
            .flat_map(|(q, p)| {
                p.terms().map(move |(m, c)| GraphTerm {
                    component: q,
                    exponents: m.exps().to_vec(),
                    value: c.to_f64().unwrap_or(f64::NAN),
                    exact: Some(format_rational(c)),
                })
            })
            .collect();
        return Ok(StableManifold {
            degree,
            exact: true,
            basis,
            stable_dim: stable.len(),
            terms,
            residual: jet.residual,
            exact_graph: Some(jet.graph),
            graph,
        });
    }

    // Real eigenbasis, contracting eigenvalues first.
    let eig = l.complex_eigenvalues();
    if eig.iter().any(|z| z.im.abs() > 1e-12) {
        return Err(CocycError::Invalid("mixed stable and unstable directions need a real spectrum".into()));
    }
    let mut vals: Vec<f64> = eig.iter().map(|z| z.re).collect();
    vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if vals.windows(2).any(|w| (w[0] - w[1]).abs() <= 1e-9) {
        return Err(CocycError::Invalid("repeated eigenvalues across a coupled block are not supported".into()));
    }
    let mut p = DMatrix::zeros(d, d);
    for (k, &mu) in vals.iter().enumerate() {
        let shifted = &l - DMatrix::identity(d, d) * mu;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.ok_or_else(|| CocycError::Numeric("eigenvector computation failed".into()))?;
        let idx = svd.singular_values.imin();
        let mut v = vt.row(idx).transpose();
        let lead = v.iter().copied().fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            v.neg_mut();
        }
        p.set_column(k, &v);
    }
    let pinv = p.clone().try_inverse().ok_or_else(|| CocycError::Numeric("eigenbasis is singular".into()))?;
    let fcomps: Vec<Poly<f64>> = comps.iter().map(|c| c.map_coeffs(|x| x.to_f64().unwrap_or(f64::NAN))).collect();
    let subs: Vec<Poly<f64>> =
        (0..d).map(|i| Poly::from_terms(d, (0..d).map(|j| (Monomial::var(d, j), p[(i, j)])))).collect();
    let moved: Vec<Poly<f64>> = fcomps.iter().map(|f| f.compose(&subs)).collect();
    let conj: Vec<Poly<f64>> = (0..d)
        .map(|k| (0..d).fold(Poly::zero(d), |acc, i| acc.add(&moved[i].scale(&pinv[(k, i)]))))
        .map(|f| f.filter(|_, c| c.abs() > 1e-15))
        .collect();
    let ns = vals.iter().filter(|v| v.abs() < 1.0).count();
    let stable: Vec<usize> = (0..ns).collect();
    let jet = solve_graph(&conj, &stable, degree, tol.max(1e-12))?;
    let terms = jet
        .graph
        .iter()
        .enumerate()
        .flat_map(|(q, poly)| {
            poly.terms().map(move |(m, c)| GraphTerm { component: q, exponents: m.exps().to_vec(), value: *c, exact: None })
        })
        .collect();
    Ok(StableManifold {
        degree,
        exact: false,
        basis: (0..d).map(|j| p.column(j).iter().copied().collect()).collect(),
        stable_dim: ns,
        terms,
        residual: jet.residual,
        exact_graph: None,
        graph: jet.graph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn xy() -> (Poly<Rational>, Poly<Rational>) {
        (Poly::var(2, 0), Poly::var(2, 1))
    }

    #[test]
    fn quadratic_example_is_exact() {
        let (x, y) = xy();
        let sys = SystemDef::polynomial(vec![x.scale(&ratio(1, 2)), y.scale(&rat(2)).add(&x.mul(&x))]).unwrap();
        let m = local_stable_manifold(&sys, 5, 1e-9).unwrap();
        assert!(m.exact);
        let g = &m.exact_graph.as_ref().unwrap()[0];
        assert_eq!(*g, Poly::monomial(Monomial(vec![2]), ratio(-4, 7)));
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn linear_system_has_flat_graph() {
        let (x, y) = xy();
        let sys = SystemDef::polynomial(vec![x.scale(&ratio(1, 3)), y.scale(&rat(3))]).unwrap();
        let m = local_stable_manifold(&sys, 4, 1e-9).unwrap();
        assert!(m.terms.is_empty());
    }

    #[test]
    fn cat_map_graph_vanishes_in_eigenbasis() {
        let m = local_stable_manifold(&SystemDef::cat_map(), 4, 1e-9).unwrap();
        assert!(!m.exact);
        assert!(m.terms.iter().all(|t| t.value.abs() < 1e-12));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let v = &m.basis[0];
        // contracting eigenline of [[2,1],[1,1]] is spanned by (1, −φ)
        assert!((v[1] / v[0] + phi).abs() < 1e-12);
    }

    #[test]
    fn resonance_is_reported() {
        let (x, y) = xy();
        // B − A² = 1/4 − (1/2)² = 0 at the x² slot
        let sys = SystemDef::polynomial(vec![x.scale(&ratio(1, 2)), y.scale(&ratio(1, 4)).add(&x.mul(&x))]).unwrap();
        let comps = sys.components();
        assert!(matches!(solve_graph(&comps, &[0], 3, 1e-9), Err(CocycError::SmallDivisor { .. })));
    }
}
