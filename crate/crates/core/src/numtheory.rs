//! Integer helpers for order finding: gcd, modular powers, brute-force
//! orders, continued-fraction convergents, and the residue-class group that
//! the order induces on exponents.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

/// Largest modulus [`order_brute_force`] will iterate over.
pub const MAX_BRUTE_FORCE_MODULUS: u64 = 1 << 20;

/// Class counts up to this size are checked exhaustively by
/// [`group_axiom_check`]; larger ones use random triples.
pub const EXHAUSTIVE_GROUP_LIMIT: u64 = 512;

const RANDOM_GROUP_TRIPLES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumTheoryError {
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("{base} and {modulus} are not coprime (gcd = {gcd})")]
    NotCoprime { base: u64, modulus: u64, gcd: u64 },
    #[error("modulus {0} must be at least 2")]
    ModulusTooSmall(u64),
    #[error("modulus {modulus} exceeds the brute-force limit {limit}")]
    ModulusTooLarge { modulus: u64, limit: u64 },
    #[error("class count {classes} is outside 1..=2^{index_width}")]
    ClassCountOutOfRange { classes: u64, index_width: u32 },
    #[error("index width {0} is too large")]
    IndexWidthTooLarge(u32),
}

/// Greatest common divisor of two integers, always non-negative.
pub fn gcd(a: i64, b: i64) -> Result<u64, NumTheoryError> {
    if a == 0 && b == 0 {
        return Err(NumTheoryError::GcdOfZeros);
    }
    Ok(gcd_u64(a.unsigned_abs(), b.unsigned_abs()))
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `base^exp mod modulus` by square-and-multiply.
///
/// # Panics
///
/// Panics if `modulus` is zero.
pub fn modpow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    assert!(modulus >= 1, "modulus must be positive");
    if modulus == 1 {
        return 0;
    }
    let m = u128::from(modulus);
    let mut acc: u128 = 1;
    let mut sq = u128::from(base) % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * sq % m;
        }
        sq = sq * sq % m;
        exp >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `base` modulo `modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderResult {
    pub base: u64,
    pub modulus: u64,
    pub order: u64,
}

/// Least `r ≥ 1` with `base^r ≡ 1 (mod modulus)`, found by stepping through
/// successive powers.
pub fn order_brute_force(base: u64, modulus: u64) -> Result<OrderResult, NumTheoryError> {
    if modulus < 2 {
        return Err(NumTheoryError::ModulusTooSmall(modulus));
    }
    if modulus > MAX_BRUTE_FORCE_MODULUS {
        return Err(NumTheoryError::ModulusTooLarge {
            modulus,
            limit: MAX_BRUTE_FORCE_MODULUS,
        });
    }
    ensure_coprime(base, modulus)?;
    let reduced = base % modulus;
    let mut power = reduced;
    let mut order = 1;
    // Coprimality guarantees termination within modulus - 1 steps.
    while power != 1 {
        power = power * reduced % modulus;
        order += 1;
    }
    Ok(OrderResult {
        base,
        modulus,
        order,
    })
}

pub(crate) fn ensure_coprime(base: u64, modulus: u64) -> Result<(), NumTheoryError> {
    let g = gcd_u64(base, modulus);
    if g != 1 {
        return Err(NumTheoryError::NotCoprime {
            base,
            modulus,
            gcd: g,
        });
    }
    Ok(())
}

/// `numerator / denominator` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub numerator: u64,
    pub denominator: u64,
}

/// Every continued-fraction convergent of `numerator / denominator`, with
/// increasing denominators. The last one equals the reduced fraction.
///
/// # Panics
///
/// Panics if `denominator` is zero.
pub fn convergents(numerator: u64, denominator: u64) -> Vec<Convergent> {
    assert!(denominator > 0, "denominator must be positive");
    let mut out = Vec::new();
    let (mut num, mut den) = (u128::from(numerator), u128::from(denominator));
    // (p_{k-2}, p_{k-1}) and (q_{k-2}, q_{k-1})
    let (mut p_prev, mut p) = (0u128, 1u128);
    let (mut q_prev, mut q) = (1u128, 0u128);
    loop {
        let a = num / den;
        let p_next = a * p + p_prev;
        let q_next = a * q + q_prev;
        p_prev = p;
        p = p_next;
        q_prev = q;
        q = q_next;
        out.push(Convergent {
            numerator: p as u64,
            denominator: q as u64,
        });
        let rem = num - a * den;
        if rem == 0 {
            break;
        }
        num = den;
        den = rem;
    }
    out
}

/// Recovers the order of `base` from a measured frequency `outcome` of an
/// `index_width`-qubit register: the smallest convergent denominator `q` of
/// `outcome / 2^index_width` with `q < modulus` and `base^q ≡ 1`.
///
/// Multiples of a failed denominator are not retried.
pub fn extract_order(outcome: u64, index_width: u32, base: u64, modulus: u64) -> Option<u64> {
    if index_width >= 64 || modulus < 2 {
        return None;
    }
    convergents(outcome, 1u64 << index_width)
        .into_iter()
        .map(|c| c.denominator)
        .take_while(|&q| q < modulus)
        .find(|&q| modpow(base, q, modulus) == 1)
}

/// `Z_k = floor((2^n - 1 - k) / r)`: the largest `z` with `z·r + k < 2^n`.
pub fn class_bound(index_width: u32, classes: u64, k: u64) -> u64 {
    ((1u64 << index_width) - 1 - k) / classes
}

/// Number of exponents `0..2^index_width` in each residue class modulo
/// `classes`; entry `k` is `Z_k + 1`.
pub fn class_sizes(index_width: u32, classes: u64) -> Result<Vec<u64>, NumTheoryError> {
    if index_width >= 63 {
        return Err(NumTheoryError::IndexWidthTooLarge(index_width));
    }
    if classes == 0 || classes > (1u64 << index_width) {
        return Err(NumTheoryError::ClassCountOutOfRange {
            classes,
            index_width,
        });
    }
    Ok((0..classes)
        .map(|k| class_bound(index_width, classes, k) + 1)
        .collect())
}

/// Residue classes `[0], …, [r-1]` of exponents under `[T] + [U] = [T + U]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassGroup {
    order: u64,
}

impl ClassGroup {
    /// # Panics
    ///
    /// Panics if `order` is zero.
    pub fn new(order: u64) -> Self {
        assert!(order >= 1, "group order must be positive");
        Self { order }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn combine(&self, a: u64, b: u64) -> u64 {
        ((u128::from(a) + u128::from(b)) % u128::from(self.order)) as u64
    }

    pub fn identity(&self) -> u64 {
        0
    }

    /// `[r - T]`, which is `[0]` again for `T = 0`.
    pub fn inverse(&self, a: u64) -> u64 {
        (self.order - a % self.order) % self.order
    }

    pub fn contains(&self, a: u64) -> bool {
        a < self.order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupAxiom {
    Closure,
    Associativity,
    Commutativity,
    Identity,
    Inverses,
}

/// Elements that broke an axiom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: GroupAxiom,
    pub elements: [u64; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAxiomReport {
    pub order: u64,
    pub exhaustive: bool,
    pub closure: bool,
    pub associativity: bool,
    pub commutativity: bool,
    pub identity: bool,
    pub inverses: bool,
    pub counterexample: Option<AxiomViolation>,
}

impl GroupAxiomReport {
    pub fn all_hold(&self) -> bool {
        self.closure && self.associativity && self.commutativity && self.identity && self.inverses
    }

    fn record(&mut self, axiom: GroupAxiom, elements: [u64; 3]) {
        match axiom {
            GroupAxiom::Closure => self.closure = false,
            GroupAxiom::Associativity => self.associativity = false,
            GroupAxiom::Commutativity => self.commutativity = false,
            GroupAxiom::Identity => self.identity = false,
            GroupAxiom::Inverses => self.inverses = false,
        }
        self.counterexample
            .get_or_insert(AxiomViolation { axiom, elements });
    }
}

/// Checks the abelian-group axioms of [`ClassGroup`] for `order` classes.
/// Exhaustive over all triples up to [`EXHAUSTIVE_GROUP_LIMIT`], seeded
/// random triples beyond it.
pub fn group_axiom_check(order: u64) -> GroupAxiomReport {
    check_group(&ClassGroup::new(order))
}

trait FiniteGroup {
    fn order(&self) -> u64;
    fn combine(&self, a: u64, b: u64) -> u64;
    fn identity(&self) -> u64;
    fn inverse(&self, a: u64) -> u64;
    fn contains(&self, a: u64) -> bool;
}

impl FiniteGroup for ClassGroup {
    fn order(&self) -> u64 {
        self.order
    }
    fn combine(&self, a: u64, b: u64) -> u64 {
        ClassGroup::combine(self, a, b)
    }
    fn identity(&self) -> u64 {
        0
    }
    fn inverse(&self, a: u64) -> u64 {
        ClassGroup::inverse(self, a)
    }
    fn contains(&self, a: u64) -> bool {
        ClassGroup::contains(self, a)
    }
}

fn check_group<G: FiniteGroup>(group: &G) -> GroupAxiomReport {
    let r = group.order();
    let mut report = GroupAxiomReport {
        order: r,
        exhaustive: r <= EXHAUSTIVE_GROUP_LIMIT,
        closure: true,
        associativity: true,
        commutativity: true,
        identity: true,
        inverses: true,
        counterexample: None,
    };

    let check_single = |report: &mut GroupAxiomReport, t: u64| {
        if group.combine(t, group.identity()) != t || group.combine(group.identity(), t) != t {
            report.record(GroupAxiom::Identity, [t, 0, 0]);
        }
        let inv = group.inverse(t);
        if !group.contains(inv) || group.combine(t, inv) != group.identity() {
            report.record(GroupAxiom::Inverses, [t, inv, 0]);
        }
    };
    let check_triple = |report: &mut GroupAxiomReport, t: u64, u: u64, v: u64| {
        let tu = group.combine(t, u);
        if !group.contains(tu) {
            report.record(GroupAxiom::Closure, [t, u, 0]);
        }
        if tu != group.combine(u, t) {
            report.record(GroupAxiom::Commutativity, [t, u, 0]);
        }
        if group.combine(tu, v) != group.combine(t, group.combine(u, v)) {
            report.record(GroupAxiom::Associativity, [t, u, v]);
        }
    };

    if report.exhaustive {
        for t in 0..r {
            check_single(&mut report, t);
            for u in 0..r {
                for v in 0..r {
                    check_triple(&mut report, t, u, v);
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(r);
        for _ in 0..RANDOM_GROUP_TRIPLES {
            let t = rng.next_u64() % r;
            let u = rng.next_u64() % r;
            let v = rng.next_u64() % r;
            check_single(&mut report, t);
            check_triple(&mut report, t, u, v);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(7, 15), Ok(1));
        assert_eq!(gcd(9, 0), Ok(9));
        assert_eq!(gcd(12, 18), Ok(6));
        assert_eq!(gcd(-12, 18), Ok(6));
        assert_eq!(gcd(0, 0), Err(NumTheoryError::GcdOfZeros));
    }

    #[test]
    fn modpow_examples() {
        assert_eq!(modpow(7, 0, 15), 1);
        assert_eq!(modpow(7, 2, 15), 4);
        assert_eq!(modpow(7, 256, 15), 1);
        assert_eq!(modpow(5, 3, 1), 0);
        assert_eq!(modpow(u64::MAX, 2, u64::MAX - 1), 1);
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_brute_force(7, 15).unwrap().order, 4);
        assert_eq!(order_brute_force(1, 9).unwrap().order, 1);
        assert_eq!(order_brute_force(2, 15).unwrap().order, 4);
        assert_eq!(order_brute_force(16, 15).unwrap().order, 1);
    }

    #[test]
    fn order_rejects_bad_inputs() {
        assert_eq!(
            order_brute_force(6, 15),
            Err(NumTheoryError::NotCoprime {
                base: 6,
                modulus: 15,
                gcd: 3
            })
        );
        assert_eq!(
            order_brute_force(3, 1),
            Err(NumTheoryError::ModulusTooSmall(1))
        );
        assert!(matches!(
            order_brute_force(3, MAX_BRUTE_FORCE_MODULUS + 1),
            Err(NumTheoryError::ModulusTooLarge { .. })
        ));
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(
            convergents(0, 256),
            vec![Convergent {
                numerator: 0,
                denominator: 1
            }]
        );
        let quarter = convergents(64, 256);
        assert_eq!(
            quarter.last(),
            Some(&Convergent {
                numerator: 1,
                denominator: 4
            })
        );
        let three_quarters = convergents(192, 256);
        assert_eq!(
            three_quarters.last(),
            Some(&Convergent {
                numerator: 3,
                denominator: 4
            })
        );
    }

    #[test]
    fn convergents_of_irregular_fraction() {
        // 85/256 = [0; 3, 85] -> 0/1, 1/3, 85/256
        let cs: Vec<(u64, u64)> = convergents(85, 256)
            .iter()
            .map(|c| (c.numerator, c.denominator))
            .collect();
        assert_eq!(cs, vec![(0, 1), (1, 3), (85, 256)]);
    }

    #[test]
    fn extract_order_examples() {
        assert_eq!(extract_order(64, 8, 7, 15), Some(4));
        assert_eq!(extract_order(192, 8, 7, 15), Some(4));
        assert_eq!(extract_order(128, 8, 7, 15), None);
        assert_eq!(extract_order(0, 8, 7, 15), None);
    }

    #[test]
    fn class_size_examples() {
        assert_eq!(class_sizes(3, 3).unwrap(), vec![3, 3, 2]);
        assert_eq!(class_sizes(8, 4).unwrap(), vec![64; 4]);
        assert_eq!(class_sizes(5, 1).unwrap(), vec![32]);
        assert!(matches!(
            class_sizes(3, 9),
            Err(NumTheoryError::ClassCountOutOfRange { .. })
        ));
        assert!(class_sizes(3, 0).is_err());
    }

    #[test]
    fn group_examples() {
        assert!(group_axiom_check(1).all_hold());
        let four = group_axiom_check(4);
        assert!(four.all_hold() && four.exhaustive);
        assert_eq!(ClassGroup::new(4).inverse(1), 3);
        assert!(group_axiom_check(5).all_hold());
        let large = group_axiom_check(1000);
        assert!(large.all_hold() && !large.exhaustive);
    }

    /// Subtraction mod r: closed, has a right identity, but is neither
    /// commutative nor associative.
    struct Subtraction(u64);

    impl FiniteGroup for Subtraction {
        fn order(&self) -> u64 {
            self.0
        }
        fn combine(&self, a: u64, b: u64) -> u64 {
            (a + self.0 - b) % self.0
        }
        fn identity(&self) -> u64 {
            0
        }
        fn inverse(&self, a: u64) -> u64 {
            a
        }
        fn contains(&self, a: u64) -> bool {
            a < self.0
        }
    }

    #[test]
    fn broken_operation_yields_counterexample() {
        let report = check_group(&Subtraction(5));
        assert!(!report.all_hold());
        assert!(report.closure && report.inverses);
        assert!(!report.commutativity && !report.associativity && !report.identity);
        assert!(report.counterexample.is_some());
    }
}
