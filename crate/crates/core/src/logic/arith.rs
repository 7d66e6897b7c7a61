use num_traits::{One, Zero};

use super::{Func, Natural};
use crate::error::{Error, Result};

/// Number of binary digits; `len(0) = 0`.
pub fn bit_length(v: &Natural) -> u64 {
    v.bits()
}

/// Cantor pairing `(x + y)(x + y + 1)/2 + y`.
pub fn cantor_pair(x: &Natural, y: &Natural) -> Natural {
    let s = x + y;
    let t = (&s * (&s + 1u32)) >> 1u32;
    t + y
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(z: &Natural) -> (Natural, Natural) {
    if z.is_zero() {
        return (Natural::zero(), Natural::zero());
    }
    // w = floor((sqrt(8z + 1) - 1) / 2) is the diagonal index.
    let disc = (z << 3u32) + Natural::one();
    let w = (disc.sqrt() - Natural::one()) >> 1u32;
    let t = (&w * (&w + 1u32)) >> 1u32;
    let y = z - t;
    let x = w - &y;
    (x, y)
}

pub fn eval_function(func: Func, args: &[Natural]) -> Result<Natural> {
    if args.len() != func.arity() {
        return Err(Error::Arity {
            symbol: func.name(),
            expected: func.arity(),
            found: args.len(),
        });
    }
    Ok(apply(func, args))
}

/// Arity already checked by construction.
pub(crate) fn apply(func: Func, args: &[Natural]) -> Natural {
    match func {
        Func::Add => &args[0] + &args[1],
        Func::Mul => &args[0] * &args[1],
        Func::Pair => cantor_pair(&args[0], &args[1]),
        Func::Len => Natural::from(bit_length(&args[0])),
        Func::Proj1 => cantor_unpair(&args[0]).0,
        Func::Proj2 => cantor_unpair(&args[0]).1,
    }
}
