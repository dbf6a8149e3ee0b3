//! Closed-form operation counts for computing the LMMSE filter.
//!
//! Counts are additions, multiplications and multiply-and-add operations
//! (MADs) as functions of the antenna count `N` and, for the unknown-covariance
//! variants, the number of observation slots `T`:
//!
//! | method | additions | multiplications | MADs |
//! |---|---|---|---|
//! | swp-known | `N + 2N log₂N` | `N + N log₂N` | `2N + 3N log₂N` |
//! | direct-known | `3/2 N³ - 3/2 N² + N` | `1/2 N³ + 3/2 N²` | `3N³ + N` |
//! | swp-unknown | `TN² + 2N log₂N + (2-T)N + T - 1` | `TN² + N log₂N + N` | `2TN² + 3N log₂N + (3-T)N + T - 1` |
//! | direct-unknown | `(T + 3/2)(N³ - N²) + N` | `(T + 3/2)N³ + 3/2 N²` | `(2T+3)N³ - TN² + N` |
//!
//! The direct-known MADs figure is not the sum of its two operand columns
//! (those add to `2N³ + N`). The MADs value is kept as published since the
//! headline ratios are computed from it; see [`ComplexityProfile::is_consistent`].
//!
//! Everything is evaluated in `i128` and only converted to `f64` for ratios
//! and logarithms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComplexityMethod {
    SwpKnown,
    DirectKnown,
    SwpUnknown,
    DirectUnknown,
}

impl ComplexityMethod {
    pub const ALL: [ComplexityMethod; 4] = [
        ComplexityMethod::SwpKnown,
        ComplexityMethod::DirectKnown,
        ComplexityMethod::SwpUnknown,
        ComplexityMethod::DirectUnknown,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ComplexityMethod::SwpKnown => "swp-known",
            ComplexityMethod::DirectKnown => "direct-known",
            ComplexityMethod::SwpUnknown => "swp-unknown",
            ComplexityMethod::DirectUnknown => "direct-unknown",
        }
    }

    pub fn is_spectral(self) -> bool {
        matches!(self, ComplexityMethod::SwpKnown | ComplexityMethod::SwpUnknown)
    }

    pub fn uses_slots(self) -> bool {
        matches!(self, ComplexityMethod::SwpUnknown | ComplexityMethod::DirectUnknown)
    }
}

impl fmt::Display for ComplexityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ComplexityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ComplexityMethod::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityProfile {
    pub method: ComplexityMethod,
    pub n: u64,
    /// Slot count; ignored by the known-covariance formulas.
    pub t: u64,
    pub additions: u128,
    pub multiplications: u128,
    pub mads: u128,
}

impl ComplexityProfile {
    /// `additions + multiplications == mads`. Holds for every method except
    /// direct-known.
    pub fn is_consistent(&self) -> bool {
        self.additions + self.multiplications == self.mads
    }

    pub fn log10_mads(&self) -> f64 {
        (self.mads as f64).log10()
    }
}

fn to_count(v: i128) -> u128 {
    debug_assert!(v >= 0, "negative operation count");
    v as u128
}

pub fn profile(method: ComplexityMethod, n: u64, t: u64) -> Result<ComplexityProfile> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("antenna count must be at least 2, got {n}")));
    }
    if method.is_spectral() && !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n as usize));
    }
    if method.uses_slots() && t < 1 {
        return Err(Error::InvalidConfig("slot count must be at least 1".into()));
    }

    let big_n = n as i128;
    let big_t = t as i128;
    let n2 = big_n * big_n;
    let n3 = n2 * big_n;
    let log_n = n.trailing_zeros() as i128;

    // Half-integer coefficients are carried as doubled values; the numerators
    // are always even.
    let (additions, multiplications, mads) = match method {
        ComplexityMethod::SwpKnown => (
            big_n + 2 * big_n * log_n,
            big_n + big_n * log_n,
            2 * big_n + 3 * big_n * log_n,
        ),
        ComplexityMethod::DirectKnown => ((3 * n3 - 3 * n2) / 2 + big_n, (n3 + 3 * n2) / 2, 3 * n3 + big_n),
        ComplexityMethod::SwpUnknown => (
            big_t * n2 + 2 * big_n * log_n + (2 - big_t) * big_n + big_t - 1,
            big_t * n2 + big_n * log_n + big_n,
            2 * big_t * n2 + 3 * big_n * log_n + (3 - big_t) * big_n + big_t - 1,
        ),
        ComplexityMethod::DirectUnknown => (
            (2 * big_t + 3) * (n3 - n2) / 2 + big_n,
            ((2 * big_t + 3) * n3 + 3 * n2) / 2,
            (2 * big_t + 3) * n3 - big_t * n2 + big_n,
        ),
    };
    Ok(ComplexityProfile {
        method,
        n,
        t,
        additions: to_count(additions),
        multiplications: to_count(multiplications),
        mads: to_count(mads),
    })
}

/// `a.mads / b.mads`.
pub fn ratio(a: &ComplexityProfile, b: &ComplexityProfile) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::InvalidConfig(format!("profiles for different N ({} vs {})", a.n, b.n)));
    }
    if a.method.uses_slots() && b.method.uses_slots() && a.t != b.t {
        return Err(Error::InvalidConfig(format!("profiles for different T ({} vs {})", a.t, b.t)));
    }
    Ok(a.mads as f64 / b.mads as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadsRow {
    pub profile: ComplexityProfile,
    pub log10_mads: f64,
}

/// One row per `(method, n)`, methods varying fastest within each `n`.
pub fn sweep_mads(methods: &[ComplexityMethod], n_list: &[u64], t: u64) -> Result<Vec<MadsRow>> {
    let mut rows = Vec::with_capacity(methods.len() * n_list.len());
    for &n in n_list {
        for &method in methods {
            let profile = profile(method, n, t)?;
            rows.push(MadsRow {
                profile,
                log10_mads: profile.log10_mads(),
            });
        }
    }
    Ok(rows)
}
