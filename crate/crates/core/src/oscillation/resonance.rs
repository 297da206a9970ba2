//! Exact classification of triads `m = k + l` by the signed lengths `sg(·)|·|`.
//!
//! All lattice vectors are integer multiples of 2π, so every identity is decided on the
//! integer indices: `s₁√a + s₂√b = s₃√c` is settled by squaring with explicit sign bookkeeping.

use crate::error::{Error, Result};
use crate::grid::{sg_nonzero, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resonance {
    Resonant,
    Nonresonant,
}

/// A resonant triad. `k = a·d`, `l = b·d`, `m = (a+b)·d` on the ray of the primitive direction
/// `d` with `sg(d) = 1`; the same-branch products `(+,+) → +` and `(−,−) → −` survive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResonantTriple {
    pub k: Lattice,
    pub l: Lattice,
    pub m: Lattice,
    pub direction: Lattice,
    pub steps: (i64, i64, i64),
}

fn signum(x: i128) -> i64 {
    x.signum() as i64
}

/// Decides `s1·√a + s2·√b = s3·√c` for positive integers `a, b, c` and signs `±1`.
pub fn signed_root_identity(s1: i64, a: i64, s2: i64, b: i64, s3: i64, c: i64) -> bool {
    debug_assert!(a > 0 && b > 0 && c > 0);
    let (a, b, c) = (a as i128, b as i128, c as i128);
    // squaring: a + b + 2 s1 s2 √(ab) = c
    let d = c - a - b;
    if d * d != 4 * a * b || signum(d) != s1 * s2 {
        return false;
    }
    let lhs_sign = if s1 == s2 {
        s1
    } else {
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => s1,
            std::cmp::Ordering::Less => s2,
            std::cmp::Ordering::Equal => 0,
        }
    };
    lhs_sign == s3
}

fn check_triad(k: Lattice, l: Lattice) -> Result<Lattice> {
    let m = k + l;
    if k.is_zero() || l.is_zero() || m.is_zero() {
        return Err(Error::Domain(format!(
            "triad needs k, l, k+l nonzero, got k={k:?}, l={l:?}"
        )));
    }
    Ok(m)
}

/// `sg(k)|k| + sg(l)|l| = sg(m)|m|` with `m = k + l`.
pub fn resonance_check(k: Lattice, l: Lattice) -> Result<Resonance> {
    let m = check_triad(k, l)?;
    let hit = signed_root_identity(
        sg_nonzero(k),
        k.norm2(),
        sg_nonzero(l),
        l.norm2(),
        sg_nonzero(m),
        m.norm2(),
    );
    Ok(if hit {
        Resonance::Resonant
    } else {
        Resonance::Nonresonant
    })
}

/// Co-linear with `l·k = sg(l)sg(k)|l||k|` and `l·m = sg(l)sg(m)|l||m|`.
///
/// For co-linear integer vectors `|l·k| = |l||k|`, so the identities reduce to signs.
pub fn colinear_characterization(k: Lattice, l: Lattice) -> Result<bool> {
    let m = check_triad(k, l)?;
    if k.cross(l) != 0 {
        return Ok(false);
    }
    let (sk, sl, sm) = (sg_nonzero(k), sg_nonzero(l), sg_nonzero(m));
    Ok(signum(l.dot(k) as i128) == sl * sk && signum(l.dot(m) as i128) == sl * sm)
}

/// `sg(k)|k| + sg(l)|l| = −sg(m)|m|`.
pub fn in_reversed_set(k: Lattice, l: Lattice) -> Result<bool> {
    let m = check_triad(k, l)?;
    Ok(signed_root_identity(
        sg_nonzero(k),
        k.norm2(),
        sg_nonzero(l),
        l.norm2(),
        -sg_nonzero(m),
        m.norm2(),
    ))
}

/// `sg(k)|k| − sg(l)|l| = ±sg(m)|m|`.
pub fn in_difference_set(k: Lattice, l: Lattice) -> Result<bool> {
    let m = check_triad(k, l)?;
    let (a, b, c) = (k.norm2(), l.norm2(), m.norm2());
    let (sk, sl, sm) = (sg_nonzero(k), sg_nonzero(l), sg_nonzero(m));
    Ok(signed_root_identity(sk, a, -sl, b, sm, c) || signed_root_identity(sk, a, -sl, b, -sm, c))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Primitive direction `d` with `sg(d) = 1` and the signed step `n` such that `k = n·d`.
pub fn ray_of(k: Lattice) -> Result<(Lattice, i64)> {
    if k.is_zero() {
        return Err(Error::Domain("the zero vector lies on no ray".into()));
    }
    let g = gcd(k.0, k.1);
    let d = Lattice(k.0 / g, k.1 / g);
    let s = sg_nonzero(d);
    Ok((Lattice(d.0 * s, d.1 * s), g * s))
}

/// Nonzero lattice indices with `|k| ≤ k_max` (k_max in wavenumber units).
pub fn lattice_ball(k_max: f64) -> Vec<Lattice> {
    let r = k_max / (2.0 * std::f64::consts::PI);
    let r2 = r * r * (1.0 + 1e-12);
    let n = r.floor() as i64;
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            let k = Lattice(a, b);
            if !k.is_zero() && (k.norm2() as f64) <= r2 {
                out.push(k);
            }
        }
    }
    out
}

/// All resonant triads with `|k|, |l| ≤ k_max` and `k + l ≠ 0`.
pub fn enumerate_resonant(k_max: f64) -> Vec<ResonantTriple> {
    let ball = lattice_ball(k_max);
    let mut out = Vec::new();
    for &k in &ball {
        for &l in &ball {
            if (k + l).is_zero() {
                continue;
            }
            if resonance_check(k, l).expect("nonzero triad") == Resonance::Resonant {
                let m = k + l;
                let (d, a) = ray_of(k).expect("nonzero");
                let (dl, b) = ray_of(l).expect("nonzero");
                debug_assert_eq!(dl, d, "resonant triads share a ray");
                out.push(ResonantTriple {
                    k,
                    l,
                    m,
                    direction: d,
                    steps: (a, b, a + b),
                });
            }
        }
    }
    out
}

/// Counts from an exhaustive sweep over the ball `|k|, |l| ≤ k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResonanceAudit {
    pub pairs: usize,
    pub resonant: usize,
    pub characterization_violations: usize,
    pub reversed_members: usize,
    pub difference_members: usize,
}

pub fn audit(k_max: f64) -> ResonanceAudit {
    let ball = lattice_ball(k_max);
    let mut a = ResonanceAudit::default();
    for &k in &ball {
        for &l in &ball {
            if (k + l).is_zero() {
                continue;
            }
            a.pairs += 1;
            let res = resonance_check(k, l).unwrap() == Resonance::Resonant;
            a.resonant += res as usize;
            if res != colinear_characterization(k, l).unwrap() {
                a.characterization_violations += 1;
            }
            a.reversed_members += in_reversed_set(k, l).unwrap() as usize;
            a.difference_members += in_difference_set(k, l).unwrap() as usize;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Floating point evaluation with a generous margin, used only on small vectors where the
    /// gap between distinct values is far above rounding.
    fn float_signed(k: Lattice) -> f64 {
        sg_nonzero(k) as f64 * (k.norm2() as f64).sqrt()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            resonance_check(Lattice(1, 0), Lattice(2, 0)).unwrap(),
            Resonance::Resonant
        );
        assert_eq!(
            resonance_check(Lattice(1, 0), Lattice(0, 1)).unwrap(),
            Resonance::Nonresonant
        );
        assert_eq!(
            resonance_check(Lattice(1, 0), Lattice(-2, 0)).unwrap(),
            Resonance::Resonant
        );
    }

    #[test]
    fn zero_sum_is_rejected() {
        assert!(resonance_check(Lattice(1, 2), Lattice(-1, -2)).is_err());
        assert!(resonance_check(Lattice(0, 0), Lattice(1, 0)).is_err());
    }

    #[test]
    fn root_identity_matches_floats_on_small_radicands() {
        for a in 1..30 {
            for b in 1..30 {
                for c in 1..60 {
                    for &(s1, s2, s3) in &[
                        (1, 1, 1),
                        (1, -1, 1),
                        (-1, 1, 1),
                        (1, -1, -1),
                        (-1, -1, -1),
                        (1, 1, -1),
                    ] {
                        let lhs = s1 as f64 * (a as f64).sqrt() + s2 as f64 * (b as f64).sqrt();
                        let rhs = s3 as f64 * (c as f64).sqrt();
                        let float = (lhs - rhs).abs() < 1e-9;
                        assert_eq!(
                            signed_root_identity(s1, a, s2, b, s3, c),
                            float,
                            "{s1} {a} {s2} {b} {s3} {c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn exact_check_agrees_with_float_brute_force() {
        for k in lattice_ball(6.0 * std::f64::consts::TAU) {
            for l in lattice_ball(6.0 * std::f64::consts::TAU) {
                if (k + l).is_zero() {
                    continue;
                }
                let f = (float_signed(k) + float_signed(l) - float_signed(k + l)).abs() < 1e-9;
                assert_eq!(resonance_check(k, l).unwrap() == Resonance::Resonant, f);
            }
        }
    }

    #[test]
    fn rays_and_steps() {
        assert_eq!(ray_of(Lattice(-4, -6)).unwrap(), (Lattice(2, 3), -2));
        assert_eq!(ray_of(Lattice(0, -3)).unwrap(), (Lattice(0, 1), -3));
        for t in enumerate_resonant(4.0 * std::f64::consts::TAU) {
            let d = t.direction;
            assert_eq!(Lattice(d.0 * t.steps.0, d.1 * t.steps.0), t.k);
            assert_eq!(Lattice(d.0 * t.steps.1, d.1 * t.steps.1), t.l);
            assert_eq!(Lattice(d.0 * t.steps.2, d.1 * t.steps.2), t.m);
        }
    }

    #[test]
    fn small_audit_is_clean() {
        let a = audit(4.0 * std::f64::consts::TAU);
        assert!(a.pairs > 0 && a.resonant > 0);
        assert_eq!(a.characterization_violations, 0);
        assert_eq!(a.reversed_members, 0);
        assert_eq!(a.difference_members, 0);
    }

    #[test]
    fn one_dimensional_ray_matches_enumeration() {
        let on_axis: Vec<_> = enumerate_resonant(3.0 * std::f64::consts::TAU)
            .into_iter()
            .filter(|t| t.direction == Lattice(1, 0))
            .map(|t| (t.k.0, t.l.0))
            .collect();
        let mut brute = Vec::new();
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                if a != 0 && b != 0 && a + b != 0 {
                    brute.push((a, b));
                }
            }
        }
        assert_eq!(on_axis.len(), brute.len());
        for p in brute {
            assert!(on_axis.contains(&p));
        }
    }
}
