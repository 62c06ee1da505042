use std::hash::{Hash, Hasher};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Env, EvalError, Expr, Opaque};

/// Three-valued answer of a zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Zero,
    NonZero,
    Unknown,
}

impl Verdict {
    /// Aggregate over components: any NonZero wins, then any Unknown.
    pub fn all<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
        let mut out = Verdict::Zero;
        for v in verdicts {
            match v {
                Verdict::NonZero => return Verdict::NonZero,
                Verdict::Unknown => out = Verdict::Unknown,
                Verdict::Zero => {}
            }
        }
        out
    }

    pub fn is_zero(self) -> bool {
        self == Verdict::Zero
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Zero => "Zero",
            Verdict::NonZero => "NonZero",
            Verdict::Unknown => "Unknown",
        })
    }
}

/// Zero test: exact structural check first, then randomized evaluation.
///
/// Opaque function values are drawn independently per distinct application
/// and argument values, i.e. the expression is tested as a function of its
/// jet variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTest {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { tol: 1e-9, samples: 8, seed: 0 }
    }
}

struct SampleEnv<'a> {
    names: &'a [String],
    values: Vec<f64>,
    salt: u64,
}

impl Env for SampleEnv<'_> {
    fn symbol(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    fn opaque(&self, op: &Opaque, args: &[f64]) -> Option<f64> {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        op.name.hash(&mut h);
        op.derivs.hash(&mut h);
        for a in args {
            // quantize so round-off in equal arguments hashes identically
            ((a * 1e9).round() as i64).hash(&mut h);
        }
        self.salt.hash(&mut h);
        let bits = h.finish();
        Some(0.5 + 2.0 * (bits >> 11) as f64 / (1u64 << 53) as f64)
    }
}

impl ZeroTest {
    pub fn with_seed(seed: u64) -> Self {
        ZeroTest { seed, ..Self::default() }
    }

    pub fn check(&self, e: &Expr) -> Verdict {
        if e.is_zero() {
            return Verdict::Zero;
        }
        if e.as_rational().is_some() {
            return Verdict::NonZero;
        }
        let (num, _) = e.together();
        if num.is_zero() {
            return Verdict::Zero;
        }
        let names: Vec<String> = e.free_symbols().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut good = 0;
        let max_attempts = self.samples.max(1) * 16;
        for attempt in 0..max_attempts {
            if good >= self.samples {
                break;
            }
            let values = names.iter().map(|_| rng.gen_range(0.5..2.5)).collect();
            let env = SampleEnv { names: &names, values, salt: attempt as u64 ^ self.seed.rotate_left(17) };
            match e.eval(&env) {
                Ok(v) if v.abs() > self.tol => return Verdict::NonZero,
                Ok(_) => good += 1,
                Err(EvalError::Domain(_)) => continue,
                Err(_) => return Verdict::Unknown,
            }
        }
        Verdict::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, parse_with, ParseContext};

    #[test]
    fn structural_zero() {
        let zt = ZeroTest::default();
        assert_eq!(zt.check(&parse("x*y - y*x").unwrap()), Verdict::Zero);
    }

    #[test]
    fn ideal_gas_curl_is_nonzero() {
        let zt = ZeroTest::default();
        let rt_v = parse("R*T/V").unwrap();
        let cv = parse("c_v").unwrap();
        let curl = &rt_v.diff("T") - &cv.diff("V");
        // symbolic oracle: R/V
        assert_eq!(curl, parse("R/V").unwrap());
        assert_eq!(zt.check(&curl), Verdict::NonZero);
    }

    #[test]
    fn pythagorean_identity_is_not_claimed_nonzero() {
        let zt = ZeroTest::default();
        let v = zt.check(&parse("sin(x)^2 + cos(x)^2 - 1").unwrap());
        assert!(matches!(v, Verdict::Zero | Verdict::Unknown));
    }

    #[test]
    fn domain_errors_resample() {
        let zt = ZeroTest::default();
        // ln(x - 1) is undefined on part of the sampling box
        assert_eq!(zt.check(&parse("ln(x - 1)").unwrap()), Verdict::NonZero);
    }

    #[test]
    fn rational_function_zero_via_common_denominator() {
        let zt = ZeroTest::default();
        assert_eq!(zt.check(&parse("x/(x+y) + y/(x+y) - 1").unwrap()), Verdict::Zero);
    }

    #[test]
    fn opaque_jets_are_independent() {
        let ctx = ParseContext::new().with_function("A", &["x", "y"]);
        let zt = ZeroTest::default();
        assert_eq!(zt.check(&parse_with("A_x - A_y", &ctx).unwrap()), Verdict::NonZero);
        assert_eq!(zt.check(&parse_with("A_x_y - A_y_x", &ctx).unwrap()), Verdict::Zero);
    }

    #[test]
    fn aggregate() {
        use Verdict::*;
        assert_eq!(Verdict::all([Zero, Unknown, Zero]), Unknown);
        assert_eq!(Verdict::all([Unknown, NonZero]), NonZero);
        assert_eq!(Verdict::all([]), Zero);
    }
}
