//! Random generators for property batteries. All draws come from [`SplitMix64`].

use num_traits::Zero;

use crate::nilq::{NilAlgebra, SsrVectorField, Subalgebra};
use crate::poly::{monomials_up_to_weight, ratio, Poly, Rational};
use crate::rng::SplitMix64;
use crate::sralg::{PolyMap, WeightedSpace};

/// Probability that an admissible monomial receives a random coefficient.
const DENSITY: f64 = 0.4;

fn coefficient(rng: &mut SplitMix64) -> Rational {
    loop {
        let c = rng.small_rational(5, 4);
        if !c.is_zero() {
            return c;
        }
    }
}

pub fn random_point(rng: &mut SplitMix64, space: &WeightedSpace) -> Vec<Rational> {
    (0..space.dim()).map(|_| rng.small_rational(6, 5)).collect()
}

/// Subresonant self-map with terms of weight strictly below the target weight
/// (`strict`) or at most the target weight, plus an identity or random linear graded part.
fn random_map(rng: &mut SplitMix64, space: &WeightedSpace, strict: bool, graded_identity: bool) -> PolyMap {
    let n = space.dim();
    let w = space.weights();
    let comps = (0..n)
        .map(|k| {
            let mut p = Poly::zero(n);
            for m in monomials_up_to_weight(w, space.weight(k)) {
                let mw = m.weight(w);
                let same_level = &mw == space.weight(k) && m.degree() == 1;
                if same_level {
                    let j = m.linear_index().expect("degree one");
                    let c = if graded_identity {
                        if j == k { ratio(1, 1) } else { Rational::zero() }
                    } else if j == k {
                        coefficient(rng)
                    } else if j < k && rng.bool(DENSITY) {
                        // Lower-triangular blocks keep the graded part invertible.
                        coefficient(rng)
                    } else {
                        Rational::zero()
                    };
                    p.add_term(m, c);
                } else if (!strict || &mw < space.weight(k)) && rng.bool(DENSITY) {
                    p.add_term(m, coefficient(rng));
                }
            }
            p
        })
        .collect();
    PolyMap::new(space.clone(), space.clone(), comps).expect("components match the space")
}

/// Subresonant map with invertible graded differential.
pub fn random_subresonant(rng: &mut SplitMix64, space: &WeightedSpace) -> PolyMap {
    random_map(rng, space, false, false)
}

/// Strictly subresonant map: identity plus terms of negative weight.
pub fn random_ssr(rng: &mut SplitMix64, space: &WeightedSpace) -> PolyMap {
    random_map(rng, space, true, true)
}

pub fn random_field(rng: &mut SplitMix64, space: &WeightedSpace) -> SsrVectorField {
    let alg = NilAlgebra::new(space);
    random_field_in(rng, &alg)
}

pub fn random_field_in(rng: &mut SplitMix64, alg: &NilAlgebra) -> SsrVectorField {
    let coords: Vec<Rational> =
        (0..alg.dim()).map(|_| if rng.bool(0.6) { coefficient(rng) } else { Rational::zero() }).collect();
    alg.field(&coords).expect("coordinates have the algebra dimension")
}

/// Subalgebra generated by one or two sparse random fields.
pub fn random_subalgebra(rng: &mut SplitMix64, space: &WeightedSpace) -> Subalgebra {
    let alg = NilAlgebra::new(space);
    let count = 1 + rng.below(2) as usize;
    let gens: Vec<SsrVectorField> = (0..count)
        .map(|_| {
            let coords: Vec<Rational> =
                (0..alg.dim()).map(|_| if rng.bool(0.3) { coefficient(rng) } else { Rational::zero() }).collect();
            alg.field(&coords).expect("coordinates have the algebra dimension")
        })
        .collect();
    Subalgebra::generated_by(space, &gens).expect("generated span is closed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn generated_maps_have_their_class() {
        let v = WeightedSpace::from_weights(vec![rat(3), rat(2), rat(2), rat(1)]).unwrap();
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let f = random_subresonant(&mut rng, &v);
            assert!(f.is_subresonant());
            assert!(f.has_invertible_graded_differential());
            assert!(random_ssr(&mut rng, &v).is_strictly_subresonant());
        }
    }
}
