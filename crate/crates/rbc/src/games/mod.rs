//! Multiplayer games and brute-force classical values.
//!
//! A game is given by per-component input alphabets, a joint input
//! distribution, per-player visible-input sets and a win predicate. The
//! classical value is the maximum winning probability over deterministic
//! strategies, computed exactly (as a rational) by exhaustive enumeration.
//!
//! Strategies are enumerated in lexicographic order of the concatenated
//! response tables; on ties the first witness is kept. The strategy space may
//! be partitioned into disjoint ranges evaluated independently and merged by
//! maximum (smallest index on ties), which yields results identical to the
//! serial scan.

pub mod bounds;

use std::sync::Arc;

use num_rational::Ratio;
use thiserror::Error;

use crate::gf::Gf;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("strategy space of {count} deterministic strategies exceeds budget 2^{budget_log2}")]
    StrategySpace { count: String, budget_log2: u32 },
    #[error("unsupported field order {0}; q must be 2^n for a supported n")]
    UnsupportedOrder(u64),
    #[error("player count must be at least 1")]
    NoPlayers,
    #[error("input distribution must sum to 1")]
    BadDistribution,
}

/// Joint distribution over the input components.
#[derive(Clone)]
pub enum InputDist {
    /// Product of uniform distributions, one per component.
    Uniform,
    /// Explicit weights over the flattened joint input space (must sum to 1).
    Explicit(Vec<Ratio<u64>>),
}

type Predicate = Arc<dyn Fn(&[usize], &[usize]) -> bool + Send + Sync>;

/// Game specification. Input components usually coincide with players, but a
/// game may carry extra shared components (e.g. an unveiling challenge
/// delivered to several players).
#[derive(Clone)]
pub struct GameSpec {
    pub name: String,
    /// Alphabet size of each input component.
    pub input_sizes: Vec<usize>,
    /// Output alphabet size of each player.
    pub output_sizes: Vec<usize>,
    /// Input components visible to each player (sorted).
    pub visibility: Vec<Vec<usize>>,
    pub dist: InputDist,
    pub predicate: Predicate,
}

/// One response table per player, indexed by the player's visible inputs in
/// mixed-radix order (first visible component most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub tables: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn is_all_zero(&self) -> bool {
        self.tables.iter().all(|t| t.iter().all(|&v| v == 0))
    }
}

/// Exact brute-force result with one witness strategy.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub value: Ratio<u64>,
    pub witness: DeterministicStrategy,
    pub strategies_scanned: u128,
}

pub const DEFAULT_BUDGET_LOG2: u32 = 32;

impl GameSpec {
    pub fn players(&self) -> usize {
        self.output_sizes.len()
    }

    fn table_len(&self, player: usize) -> usize {
        self.visibility[player]
            .iter()
            .map(|&c| self.input_sizes[c])
            .product()
    }

    fn joint_inputs(&self) -> usize {
        self.input_sizes.iter().product()
    }

    /// log2 of the number of deterministic strategies.
    pub fn strategy_count_log2(&self) -> f64 {
        (0..self.players())
            .map(|j| self.table_len(j) as f64 * (self.output_sizes[j] as f64).log2())
            .sum()
    }

    fn strategy_count(&self) -> Option<u128> {
        let mut count: u128 = 1;
        for j in 0..self.players() {
            for _ in 0..self.table_len(j) {
                count = count.checked_mul(self.output_sizes[j] as u128)?;
            }
        }
        Some(count)
    }

    /// Winning probability of one strategy, as an exact rational.
    pub fn value_of(&self, strategy: &DeterministicStrategy) -> Ratio<u64> {
        let ctx = EvalContext::new(self);
        ctx.value_of(&flatten(&strategy.tables))
    }

    /// Exact classical value with the default strategy budget (2^32).
    pub fn classical_value_bruteforce(&self) -> Result<BruteForce, GameError> {
        self.classical_value_bruteforce_with_budget(DEFAULT_BUDGET_LOG2)
    }

    pub fn classical_value_bruteforce_with_budget(
        &self,
        budget_log2: u32,
    ) -> Result<BruteForce, GameError> {
        if self.players() == 0 {
            return Err(GameError::NoPlayers);
        }
        if let InputDist::Explicit(w) = &self.dist {
            let total: Ratio<u64> = w.iter().sum();
            if total != Ratio::new(1, 1) || w.len() != self.joint_inputs() {
                return Err(GameError::BadDistribution);
            }
        }
        let count = match self.strategy_count() {
            Some(c) if (c as f64).log2() <= budget_log2 as f64 => c,
            other => {
                let count = other
                    .map(|c| c.to_string())
                    .unwrap_or_else(|| format!("2^{:.1}", self.strategy_count_log2()));
                return Err(GameError::StrategySpace {
                    count,
                    budget_log2,
                });
            }
        };

        let threads = crate::max_threads();
        let chunks = if count < 4096 { 1 } else { (threads as u128).min(64) };
        let chunk_size = count.div_ceil(chunks);
        let ranges: Vec<(u128, u128)> = (0..chunks)
            .map(|i| (i * chunk_size, ((i + 1) * chunk_size).min(count)))
            .filter(|(lo, hi)| lo < hi)
            .collect();

        use rayon::prelude::*;
        let ctx = EvalContext::new(self);
        let mut per_chunk: Vec<(Ratio<u64>, u128, Vec<usize>)> = ranges
            .par_iter()
            .map(|&(lo, hi)| ctx.scan_range(lo, hi))
            .collect();
        // Ordered fold keeps the merge identical to the serial scan.
        let mut best = per_chunk.remove(0);
        for cand in per_chunk {
            if cand.0 > best.0 {
                best = cand;
            }
        }
        let (value, _, digits) = best;
        Ok(BruteForce {
            value,
            witness: self.unflatten(&digits),
            strategies_scanned: count,
        })
    }

    fn unflatten(&self, digits: &[usize]) -> DeterministicStrategy {
        let mut tables = Vec::with_capacity(self.players());
        let mut offset = 0;
        for j in 0..self.players() {
            let len = self.table_len(j);
            tables.push(digits[offset..offset + len].to_vec());
            offset += len;
        }
        DeterministicStrategy { tables }
    }
}

fn flatten(tables: &[Vec<usize>]) -> Vec<usize> {
    tables.iter().flatten().copied().collect()
}

/// Precomputed evaluation tables: joint input tuples and per-player response
/// table indices, so scanning touches no allocation.
struct EvalContext<'a> {
    spec: &'a GameSpec,
    tuples: Vec<Vec<usize>>,
    table_index: Vec<Vec<usize>>, // [input][player]
    digit_base: Vec<usize>,       // flattened table entry bases (output sizes)
    weights: Option<&'a [Ratio<u64>]>,
}

impl<'a> EvalContext<'a> {
    fn new(spec: &'a GameSpec) -> Self {
        let total = spec.joint_inputs();
        let mut tuples = Vec::with_capacity(total);
        let mut cur = vec![0usize; spec.input_sizes.len()];
        for _ in 0..total {
            tuples.push(cur.clone());
            for c in (0..cur.len()).rev() {
                cur[c] += 1;
                if cur[c] < spec.input_sizes[c] {
                    break;
                }
                cur[c] = 0;
            }
        }
        let table_index = tuples
            .iter()
            .map(|tuple| {
                (0..spec.players())
                    .map(|j| {
                        let mut idx = 0;
                        for &c in &spec.visibility[j] {
                            idx = idx * spec.input_sizes[c] + tuple[c];
                        }
                        idx
                    })
                    .collect()
            })
            .collect();
        let mut digit_base = Vec::new();
        for j in 0..spec.players() {
            digit_base.extend(std::iter::repeat(spec.output_sizes[j]).take(spec.table_len(j)));
        }
        let weights = match &spec.dist {
            InputDist::Uniform => None,
            InputDist::Explicit(w) => Some(w.as_slice()),
        };
        EvalContext {
            spec,
            tuples,
            table_index,
            digit_base,
            weights,
        }
    }

    fn table_offsets(&self) -> Vec<usize> {
        let mut offsets = vec![0usize; self.spec.players()];
        let mut acc = 0;
        for j in 0..self.spec.players() {
            offsets[j] = acc;
            acc += self.spec.table_len(j);
        }
        offsets
    }

    fn value_of_digits(&self, digits: &[usize], offsets: &[usize], outputs: &mut [usize]) -> Ratio<u64> {
        let mut wins: u64 = 0;
        let mut weighted = Ratio::new(0, 1);
        for (i, tuple) in self.tuples.iter().enumerate() {
            for j in 0..self.spec.players() {
                outputs[j] = digits[offsets[j] + self.table_index[i][j]];
            }
            if (self.spec.predicate)(tuple, outputs) {
                match self.weights {
                    None => wins += 1,
                    Some(w) => weighted += w[i],
                }
            }
        }
        match self.weights {
            None => Ratio::new(wins, self.tuples.len() as u64),
            Some(_) => weighted,
        }
    }

    fn value_of(&self, digits: &[usize]) -> Ratio<u64> {
        let offsets = self.table_offsets();
        let mut outputs = vec![0usize; self.spec.players()];
        self.value_of_digits(digits, &offsets, &mut outputs)
    }

    /// Scans strategy indices [lo, hi); returns (best value, its index, its digits).
    fn scan_range(&self, lo: u128, hi: u128) -> (Ratio<u64>, u128, Vec<usize>) {
        let offsets = self.table_offsets();
        let mut outputs = vec![0usize; self.spec.players()];
        let mut digits = decode_digits(lo, &self.digit_base);
        let mut best_value = self.value_of_digits(&digits, &offsets, &mut outputs);
        let mut best_index = lo;
        let mut best_digits = digits.clone();
        let mut index = lo;
        loop {
            if index > lo {
                let v = self.value_of_digits(&digits, &offsets, &mut outputs);
                if v > best_value {
                    best_value = v;
                    best_index = index;
                    best_digits = digits.clone();
                }
            }
            index += 1;
            if index >= hi {
                break;
            }
            // odometer: least-significant digit is the last table entry
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < self.digit_base[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        (best_value, best_index, best_digits)
    }
}

fn decode_digits(mut index: u128, bases: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; bases.len()];
    for pos in (0..bases.len()).rev() {
        let base = bases[pos] as u128;
        digits[pos] = (index % base) as usize;
        index /= base;
    }
    digits
}

/// The m-player number-on-the-forehead game over GF(q), q = 2^n: player k
/// sees every input except its own, inputs are uniform, and the players win
/// iff the product of the inputs equals the sum of the outputs.
pub fn product_game(q: u64, m: usize) -> Result<GameSpec, GameError> {
    if m == 0 {
        return Err(GameError::NoPlayers);
    }
    if !q.is_power_of_two() {
        return Err(GameError::UnsupportedOrder(q));
    }
    let n = q.trailing_zeros() as usize;
    let gf = Gf::builtin(n).map_err(|_| GameError::UnsupportedOrder(q))?;
    let mul = small_mul_table(&gf);
    let qs = q as usize;
    let predicate: Predicate = Arc::new(move |inputs: &[usize], outputs: &[usize]| {
        let prod = inputs.iter().fold(1usize, |acc, &x| mul[acc * qs + x]);
        let sum = outputs.iter().fold(0usize, |acc, &y| acc ^ y);
        prod == sum
    });
    Ok(GameSpec {
        name: format!("product(q={q}, m={m})"),
        input_sizes: vec![qs; m],
        output_sizes: vec![qs; m],
        visibility: (0..m)
            .map(|k| (0..m).filter(|&c| c != k).collect())
            .collect(),
        dist: InputDist::Uniform,
        predicate,
    })
}

/// The two-player game underlying the two-round commitment: player 1 gets a
/// uniform n-bit string b, player 2 a uniform bit d, and they win iff
/// x1 XOR x2 = d.b.
pub fn chshn_game(n: usize) -> GameSpec {
    assert!(n >= 1 && n <= 20, "alphabet 2^n must stay addressable");
    let size = 1usize << n;
    let predicate: Predicate = Arc::new(move |inputs: &[usize], outputs: &[usize]| {
        let (b, d) = (inputs[0], inputs[1]);
        let target = if d == 1 { b } else { 0 };
        outputs[0] ^ outputs[1] == target
    });
    GameSpec {
        name: format!("chsh_{n}"),
        input_sizes: vec![size, 2],
        output_sizes: vec![size, size],
        visibility: vec![vec![0], vec![1]],
        dist: InputDist::Uniform,
        predicate,
    }
}

/// Flattened q-by-q multiplication table; q must stay small.
pub fn small_mul_table(gf: &Gf) -> Vec<usize> {
    let n = gf.degree();
    assert!(n <= 10, "multiplication table only built for small fields");
    let q = 1usize << n;
    let mut table = vec![0usize; q * q];
    for a in 0..q {
        for b in 0..q {
            let prod = gf
                .mul(&gf.from_u64(a as u64), &gf.from_u64(b as u64))
                .unwrap();
            table[a * q + b] = prod.bits().as_u64() as usize;
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(spec: &GameSpec) -> Ratio<u64> {
        spec.classical_value_bruteforce().unwrap().value
    }

    #[test]
    fn product_game_small_values() {
        assert_eq!(value(&product_game(2, 1).unwrap()), Ratio::new(1, 2));
        assert_eq!(value(&product_game(2, 2).unwrap()), Ratio::new(3, 4));
        assert_eq!(value(&product_game(4, 1).unwrap()), Ratio::new(1, 4));
    }

    #[test]
    fn chshn_values() {
        assert_eq!(value(&chshn_game(1)), Ratio::new(3, 4));
        // 1/2 + 1/2^(n+1) at n = 2
        assert_eq!(value(&chshn_game(2)), Ratio::new(5, 8));
    }

    #[test]
    fn chshn_all_zero_strategy_saturates() {
        for n in 1..=2usize {
            let g = chshn_game(n);
            let zero = DeterministicStrategy {
                tables: vec![vec![0; 1 << n], vec![0; 2]],
            };
            let expected = Ratio::new(1, 2) + Ratio::new(1, 1 << (n + 1));
            assert_eq!(g.value_of(&zero), expected);
            // and the brute-force maximum coincides with it
            assert_eq!(value(&g), expected);
        }
    }

    #[test]
    fn budget_error_names_count() {
        let g = product_game(2, 2).unwrap();
        let err = g.classical_value_bruteforce_with_budget(2).unwrap_err();
        match err {
            GameError::StrategySpace { count, budget_log2 } => {
                assert_eq!(count, "16");
                assert_eq!(budget_log2, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parallel_matches_serial_scan() {
        let g = product_game(2, 2).unwrap();
        let ctx = EvalContext::new(&g);
        let serial = ctx.scan_range(0, 256);
        let par = g.classical_value_bruteforce().unwrap();
        assert_eq!(par.value, serial.0);
        assert_eq!(flatten(&par.witness.tables), serial.2);

        // two-way split merged by maximum gives the same result
        let a = ctx.scan_range(0, 100);
        let b = ctx.scan_range(100, 256);
        let merged = if b.0 > a.0 { b } else { a };
        assert_eq!(merged.0, serial.0);
        assert_eq!(merged.1, serial.1);
    }

    #[test]
    fn value_invariant_under_player_relabeling() {
        let g = product_game(2, 2).unwrap();
        let base = value(&g);
        let swapped = GameSpec {
            name: "swapped".into(),
            input_sizes: g.input_sizes.clone(),
            output_sizes: g.output_sizes.clone(),
            visibility: vec![g.visibility[1].clone(), g.visibility[0].clone()],
            dist: InputDist::Uniform,
            predicate: {
                let p = g.predicate.clone();
                Arc::new(move |inputs: &[usize], outputs: &[usize]| {
                    p(inputs, &[outputs[1], outputs[0]])
                })
            },
        };
        assert_eq!(value(&swapped), base);
    }

    #[test]
    fn value_invariant_under_input_xor_translation() {
        // translate player 1's alphabet by XOR with 1
        let g = chshn_game(1);
        let base = value(&g);
        let translated = GameSpec {
            name: "translated".into(),
            input_sizes: g.input_sizes.clone(),
            output_sizes: g.output_sizes.clone(),
            visibility: g.visibility.clone(),
            dist: InputDist::Uniform,
            predicate: {
                let p = g.predicate.clone();
                Arc::new(move |inputs: &[usize], outputs: &[usize]| {
                    p(&[inputs[0] ^ 1, inputs[1]], outputs)
                })
            },
        };
        assert_eq!(value(&translated), base);
    }

    #[test]
    fn explicit_distribution_matches_uniform() {
        let g = chshn_game(1);
        let total = g.joint_inputs();
        let weighted = GameSpec {
            dist: InputDist::Explicit(vec![Ratio::new(1, total as u64); total]),
            ..g.clone()
        };
        assert_eq!(value(&weighted), value(&g));
    }

    /// Intersections corollary: conditioning the m-player product game on two
    /// distinct values of the last input wins together with probability at
    /// most the (m-1)-player value.
    #[test]
    fn pairwise_intersections_bounded_by_smaller_game() {
        for m in [2usize, 3] {
            let q = 2usize;
            let gf = Gf::builtin(1).unwrap();
            let mul = small_mul_table(&gf);
            let g = product_game(q as u64, m).unwrap();
            let smaller = value(&product_game(q as u64, m - 1).unwrap());
            let count = g.strategy_count().unwrap();
            let ctx = EvalContext::new(&g);
            let offsets = ctx.table_offsets();
            let mut digits = vec![0usize; ctx.digit_base.len()];
            for _ in 0..count {
                for y in 0..q {
                    for z in 0..q {
                        if y == z {
                            continue;
                        }
                        // Pr over the first m-1 inputs that both F_y and F_z hold
                        let mut both = 0u64;
                        let rest = q.pow(m as u32 - 1);
                        for head in 0..rest {
                            let mut tuple = vec![0usize; m];
                            let mut h = head;
                            for c in 0..m - 1 {
                                tuple[c] = h % q;
                                h /= q;
                            }
                            let mut wins = [false, false];
                            for (slot, &last) in [y, z].iter().enumerate() {
                                tuple[m - 1] = last;
                                let mut outputs = vec![0usize; m];
                                let input_idx = tuple.iter().fold(0, |acc, &v| acc * q + v);
                                for j in 0..m {
                                    outputs[j] = digits[offsets[j] + ctx.table_index[input_idx][j]];
                                }
                                let prod =
                                    tuple.iter().fold(1usize, |acc, &x| mul[acc * q + x]);
                                let sum = outputs.iter().fold(0usize, |acc, &v| acc ^ v);
                                wins[slot] = prod == sum;
                            }
                            if wins[0] && wins[1] {
                                both += 1;
                            }
                        }
                        assert!(Ratio::new(both, rest as u64) <= smaller);
                    }
                }
                for pos in (0..digits.len()).rev() {
                    digits[pos] += 1;
                    if digits[pos] < ctx.digit_base[pos] {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
        }
    }
}
