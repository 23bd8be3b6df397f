//! Exhaustive search over all `2^n` spin assignments.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, ProblemInstance, Result, Sense, Spins};

/// Largest instance accepted by the enumerators.
pub const MAX_EXACT: usize = 26;

// Full recomputation interval for the running value, bounding float drift.
const RESYNC: u64 = 1 << 16;

/// Global optimum of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub best: Spins,
    pub value: f64,
    /// Number of optimal assignments.
    pub degeneracy: u64,
}

/// Visits every basis index in Gray-code order with its objective value.
///
/// Each step flips one spin and updates the local fields in `O(n)`. Index
/// bit `i` set means `z_i = -1`; the walk starts at index 0 (all up).
pub fn gray_walk(inst: &ProblemInstance, mut visit: impl FnMut(u64, f64)) -> Result<()> {
    let n = inst.n();
    if n > MAX_EXACT {
        return Err(Error::TooLarge { n, max: MAX_EXACT });
    }
    let w: Vec<f64> = inst.weights().as_slice().to_vec();
    let lin = inst.linear();
    let mut z = vec![1.0f64; n];
    let mut field = vec![0.0f64; n];
    let resync = |z: &[f64], field: &mut [f64]| -> f64 {
        let mut value = 0.0;
        for i in 0..n {
            let row = &w[i * n..(i + 1) * n];
            field[i] = row.iter().zip(z).map(|(a, b)| a * b).sum();
            value += z[i] * (field[i] + lin[i]);
        }
        value
    };
    let mut value = resync(&z, &mut field);
    let mut index = 0u64;
    visit(index, value);
    for k in 1..(1u64 << n) {
        let f = k.trailing_zeros() as usize;
        let zf = z[f];
        value -= 2.0 * zf * (2.0 * field[f] + lin[f]);
        let row = &w[f * n..(f + 1) * n];
        let delta = -2.0 * zf;
        for (h, &wf) in field.iter_mut().zip(row) {
            *h += wf * delta;
        }
        z[f] = -zf;
        index ^= 1 << f;
        if k % RESYNC == 0 {
            value = resync(&z, &mut field);
        }
        visit(index, value);
    }
    Ok(())
}

/// `C(b)` for every basis index `b`.
pub fn cost_table(inst: &ProblemInstance) -> Result<Vec<f64>> {
    let n = inst.n();
    if n > MAX_EXACT {
        return Err(Error::TooLarge { n, max: MAX_EXACT });
    }
    let mut table = vec![0.0; 1 << n];
    gray_walk(inst, |b, v| table[b as usize] = v)?;
    Ok(table)
}

/// Exact optimum with respect to `inst.sense()`.
///
/// Values within the tie tolerance (0 for integer data, `1e-9` otherwise)
/// count as degenerate. Among them the lexicographically smallest bit
/// pattern `b_0 b_1 … b_{n−1}` is returned.
pub fn brute_force(inst: &ProblemInstance) -> Result<ExactResult> {
    let tol = if inst.is_integral() { 0.0 } else { 1e-9 };
    let sign = match inst.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let n = inst.n();
    // Lexicographic order on (b_0, b_1, …) is integer order on the reversed index.
    let lex = |b: u64| b.reverse_bits() >> (64 - n);
    let mut best = f64::INFINITY;
    let mut best_index = 0u64;
    let mut degeneracy = 0u64;
    gray_walk(inst, |b, v| {
        let s = sign * v;
        if s < best - tol {
            best = s;
            best_index = b;
            degeneracy = 1;
        } else if s <= best + tol {
            degeneracy += 1;
            best = best.min(s);
            if lex(b) < lex(best_index) {
                best_index = b;
            }
        }
    })?;
    let spins = Spins::from_index(best_index, n);
    let value = inst.objective_value(&spins)?;
    Ok(ExactResult {
        best: spins,
        value,
        degeneracy,
    })
}

/// `C(z) / C(z_opt)`.
pub fn approximation_ratio(inst: &ProblemInstance, z: &Spins, oracle: &ExactResult) -> Result<f64> {
    if oracle.value == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(inst.objective_value(z)? / oracle.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{generate, GraphFamily};
    use proptest::prelude::*;

    #[test]
    fn single_edge() {
        let inst = ProblemInstance::from_edges(2, &[(0, 1, 1.0)], Sense::Minimize).unwrap();
        let r = brute_force(&inst).unwrap();
        assert_eq!(r.value, -2.0);
        assert_eq!(r.degeneracy, 2);
        assert_eq!(r.best.as_slice(), &[1, -1]);
    }

    #[test]
    fn ring_six() {
        let inst = generate(GraphFamily::Ring, 6, 0).unwrap();
        let r = brute_force(&inst).unwrap();
        assert_eq!(r.value, -12.0);
        assert_eq!(r.degeneracy, 2);
        assert_eq!(r.best.as_slice(), &[1, -1, 1, -1, 1, -1]);
        assert_eq!(approximation_ratio(&inst, &r.best, &r).unwrap(), 1.0);
        assert_eq!(approximation_ratio(&inst, &Spins::all_up(6), &r).unwrap(), -1.0);
    }

    #[test]
    fn maximize_sense() {
        let inst = ProblemInstance::from_edges(3, &[(0, 1, 1.0), (1, 2, -1.0)], Sense::Maximize).unwrap();
        let r = brute_force(&inst).unwrap();
        assert_eq!(r.value, 4.0);
        assert_eq!(r.degeneracy, 2);
    }

    #[test]
    fn zero_optimum_has_no_ratio() {
        let inst = ProblemInstance::new(nalgebra::DMatrix::zeros(3, 3), None, Sense::Minimize).unwrap();
        let r = brute_force(&inst).unwrap();
        assert_eq!(r.degeneracy, 8);
        assert_eq!(approximation_ratio(&inst, &r.best, &r), Err(Error::UndefinedRatio));
    }

    #[test]
    fn too_large() {
        let inst = ProblemInstance::new(nalgebra::DMatrix::zeros(27, 27), None, Sense::Minimize).unwrap();
        assert!(matches!(brute_force(&inst), Err(Error::TooLarge { n: 27, .. })));
    }

    #[test]
    fn sk_twelve_matches_reversed_enumeration() {
        let inst = generate(GraphFamily::Sk, 12, 42).unwrap();
        let r = brute_force(&inst).unwrap();
        let n = inst.n();
        let mut best = f64::INFINITY;
        let mut count = 0;
        for b in (0..1u64 << n).rev() {
            let v = inst.objective_value(&Spins::from_index(b, n)).unwrap();
            if v < best {
                best = v;
                count = 1;
            } else if v == best {
                count += 1;
            }
        }
        assert_eq!(r.value, best);
        assert_eq!(r.degeneracy, count);
        assert_eq!(r.degeneracy % 2, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gray_walk_matches_naive(n in 2usize..=12, seed in any::<u64>(), with_linear in any::<bool>()) {
            use rand::Rng;
            let mut rng = crate::seed::rng(seed);
            let mut w = nalgebra::DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    w[(i, j)] = x;
                    w[(j, i)] = x;
                }
            }
            let lin = with_linear.then(|| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
            let inst = ProblemInstance::new(w, lin, Sense::Minimize).unwrap();
            let mut seen = 0u64;
            let mut worst = 0.0f64;
            gray_walk(&inst, |b, v| {
                seen += 1;
                let direct = inst.objective_value(&Spins::from_index(b, n)).unwrap();
                worst = worst.max((direct - v).abs());
            }).unwrap();
            prop_assert_eq!(seen, 1u64 << n);
            prop_assert!(worst < 1e-10);

            let r = brute_force(&inst).unwrap();
            prop_assert!((r.value - inst.objective_value(&r.best).unwrap()).abs() == 0.0);
            prop_assert!(r.degeneracy >= 1);
            for b in 0..1u64 << n {
                prop_assert!(inst.objective_value(&Spins::from_index(b, n)).unwrap() >= r.value - 1e-9);
            }
        }
    }
}
