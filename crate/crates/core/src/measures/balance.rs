//! Balance certificates `0 < ν(w) ≤ C·α^{|w|}` and their `(c, ε)` form
//! `ν(w) ≤ 2^{c − ε|w|}`, plus finite-depth diagnostics.

use std::fmt;

use num_traits::One;

use super::{BinaryString, Measure};
use crate::error::{Error, Result};
use crate::numerics::{pow2, Dyadic, DyadicExponent, DyadicInterval, Rounding};

/// Fractional bits kept when rounding `log2 C` and `−log2 α` to dyadics.
pub const LOG_FRACTION_BITS: u32 = 12;

/// Resolution of the α grid searched by [`suggest_balance`].
pub const ALPHA_BITS: u32 = 16;

/// Constants witnessing that a measure is well-balanced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceCertificate {
    pub alpha: DyadicInterval,
    pub cap_c: DyadicInterval,
    /// `log2(C)` rounded up.
    pub c: DyadicExponent,
    /// `−log2(α)` rounded down.
    pub epsilon: DyadicExponent,
}

impl BalanceCertificate {
    /// Derives `(c, ε)` from `(α, C)`; requires `0 < α < 1` and `C > 0`.
    pub fn new(alpha: DyadicInterval, cap_c: DyadicInterval) -> Result<Self> {
        if !alpha.lo().is_positive() || alpha.hi() >= &Dyadic::one() {
            return Err(Error::InvalidArgument(format!(
                "alpha {} must lie in (0, 1)",
                alpha
            )));
        }
        if !cap_c.lo().is_positive() {
            return Err(Error::InvalidArgument(format!(
                "C {} must be positive",
                cap_c
            )));
        }
        let c = DyadicExponent::new(
            scaled_log2(cap_c.hi(), Rounding::Up),
            LOG_FRACTION_BITS,
        );
        let epsilon = DyadicExponent::new(
            -scaled_log2(alpha.hi(), Rounding::Up),
            LOG_FRACTION_BITS,
        );
        if !epsilon.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "alpha {} is too close to 1 for a positive dyadic epsilon",
                alpha
            )));
        }
        Ok(BalanceCertificate {
            alpha,
            cap_c,
            c,
            epsilon,
        })
    }

    /// `(α, C) = (1/2, 1)`, which holds for the uniform measure.
    pub fn uniform() -> Self {
        Self::new(DyadicInterval::pow2(-1), DyadicInterval::one()).expect("valid constants")
    }

    /// `C.lo · α.lo^k`, exact.
    pub fn level_bound(&self, k: usize) -> Dyadic {
        self.cap_c.lo() * &self.alpha.lo().pow(k as u32)
    }

    /// Enclosure of `2^{c − εk}`.
    pub fn exponent_bound(&self, k: usize, prec: u32) -> Result<DyadicInterval> {
        pow2(self.c.sub(self.epsilon.mul_int(k as i64)), prec)
    }
}

impl fmt::Display for BalanceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} C={} c={} epsilon={}",
            self.alpha, self.cap_c, self.c, self.epsilon
        )
    }
}

/// `ceil` or `floor` of `2^q · log2(x)` for `x > 0`, `q = LOG_FRACTION_BITS`.
///
/// Writing `x = A·2^e` with `A` odd, `2^q·log2 x = 2^q·e + log2(A^{2^q})`,
/// and for odd `A > 1` the logarithm of `A^{2^q}` is never an integer, so
/// its ceiling is the bit length.
fn scaled_log2(x: &Dyadic, dir: Rounding) -> i64 {
    assert!(x.is_positive());
    let n = 1i64 << LOG_FRACTION_BITS;
    let base = n * x.exponent();
    let a = x.mantissa();
    if a.is_one() {
        return base;
    }
    let bits = num_traits::pow(a.clone(), n as usize).bits() as i64;
    match dir {
        Rounding::Up => base + bits,
        Rounding::Down => base + bits - 1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositive,
    ExceedsBound { bound: Dyadic },
    ExceedsExponentForm { bound: DyadicInterval },
    Unavailable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceViolation {
    pub word: BinaryString,
    pub value: Option<DyadicInterval>,
    pub kind: ViolationKind,
}

impl fmt::Display for BalanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = self
            .value
            .as_ref()
            .map(|v| v.to_string())
            .unwrap_or_else(|| "?".into());
        match &self.kind {
            ViolationKind::NonPositive => write!(f, "FAIL {} value={} not positive", self.word, value),
            ViolationKind::ExceedsBound { bound } => write!(
                f,
                "FAIL {} value={} exceeds C*alpha^|w|={}",
                self.word, value, bound
            ),
            ViolationKind::ExceedsExponentForm { bound } => write!(
                f,
                "FAIL {} value={} exceeds 2^(c-eps|w|) in {}",
                self.word, value, bound
            ),
            ViolationKind::Unavailable(reason) => {
                write!(f, "FAIL {} unavailable: {}", self.word, reason)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceReport {
    pub certificate: BalanceCertificate,
    pub depth: usize,
    pub violations: Vec<BalanceViolation>,
}

impl BalanceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// First violation in canonical string order.
    pub fn first_violation(&self) -> Option<&BalanceViolation> {
        self.violations.iter().min_by(|a, b| a.word.cmp(&b.word))
    }
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}", v)?;
        }
        writeln!(
            f,
            "balance {} to depth {}: {}",
            self.certificate,
            self.depth,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Checks `0 < ν(w)`, `ν(w).hi ≤ C.lo·α.lo^{|w|}` and
/// `ν(w).hi ≤ 2^{c − ε|w|}` for every `|w| ≤ depth`.
pub fn check_balance(
    nu: &Measure,
    cert: &BalanceCertificate,
    depth: usize,
    prec: u32,
) -> BalanceReport {
    let mut violations = Vec::new();
    let mut bounds = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        match cert.exponent_bound(k, prec) {
            Ok(e) => bounds.push((cert.level_bound(k), e)),
            Err(e) => {
                violations.push(BalanceViolation {
                    word: BinaryString::empty(),
                    value: None,
                    kind: ViolationKind::Unavailable(e.to_string()),
                });
                return BalanceReport {
                    certificate: cert.clone(),
                    depth,
                    violations,
                };
            }
        }
    }
    let walked = nu.walk(depth, prec, |w, v| {
        let (bound, exp_bound) = &bounds[w.len()];
        let mut push = |kind| {
            violations.push(BalanceViolation {
                word: w.clone(),
                value: Some(v.clone()),
                kind,
            })
        };
        if !v.lo().is_positive() {
            push(ViolationKind::NonPositive);
        }
        if v.hi() > bound {
            push(ViolationKind::ExceedsBound {
                bound: bound.clone(),
            });
        }
        if v.hi() > exp_bound.lo() {
            push(ViolationKind::ExceedsExponentForm {
                bound: exp_bound.clone(),
            });
        }
        Ok(())
    });
    if let Err(e) = walked {
        violations.push(BalanceViolation {
            word: BinaryString::empty(),
            value: None,
            kind: ViolationKind::Unavailable(e.to_string()),
        });
    }
    violations.sort_by(|a, b| a.word.cmp(&b.word));
    BalanceReport {
        certificate: cert.clone(),
        depth,
        violations,
    }
}

/// A certificate that holds up to `valid_depth` and is unproven beyond it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceCandidate {
    pub certificate: BalanceCertificate,
    pub valid_depth: usize,
}

impl fmt::Display for BalanceCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "candidate {} (checked to depth {}, unproven beyond)",
            self.certificate, self.valid_depth
        )
    }
}

/// Per-level statistics gathered in one pass over the tree.
struct LevelStats {
    /// `max_{|w|=k} ν(w).hi`.
    max_value: Vec<Dyadic>,
    /// `min` over nodes at level `k ≥ 1` of `ν(w).lo / ν(parent).hi`.
    min_conditional: Vec<Option<Dyadic>>,
}

fn level_stats(nu: &Measure, depth: usize, prec: u32) -> Result<LevelStats> {
    let mut max_value = vec![Dyadic::zero(); depth + 1];
    let mut min_conditional: Vec<Option<Dyadic>> = vec![None; depth + 1];
    nu.walk(depth, prec, |w, v| {
        let k = w.len();
        if v.hi() > &max_value[k] {
            max_value[k] = v.hi().clone();
        }
        if k < depth && v.hi().is_positive() {
            for b in 0..2 {
                let c = nu.child_value(w, v, b, prec)?;
                let ratio = c.lo().div_round(v.hi(), prec, Rounding::Down);
                let slot = &mut min_conditional[k + 1];
                if slot.as_ref().is_none_or(|m| &ratio < m) {
                    *slot = Some(ratio);
                }
            }
        }
        Ok(())
    })?;
    Ok(LevelStats {
        max_value,
        min_conditional,
    })
}

/// Proposes `(α, C)` from the observed decay up to `depth`.
///
/// `α` is the smallest multiple of `2^{-ALPHA_BITS}` with
/// `α^k ≥ max_{|w|=k} ν(w)` at every level `1 ≤ k ≤ depth`, i.e. the
/// largest per-level root `max ν(w)^{1/|w|}` rounded up; `C` is the
/// smallest power of two making the depth-`depth` check pass. The
/// candidate is refused when the required `α` reaches 1, or when the data
/// show the decay degenerating at every level: the per-level root rising
/// and the smallest conditional probability falling all the way down.
pub fn suggest_balance(nu: &Measure, depth: usize, prec: u32) -> Result<BalanceCandidate> {
    if depth < 2 {
        return Err(Error::InvalidArgument(
            "balance suggestion needs depth >= 2".into(),
        ));
    }
    let stats = level_stats(nu, depth, prec)?;
    let m = &stats.max_value;
    let scale = 1u64 << ALPHA_BITS;

    let alpha_ok = |num: u64| {
        let alpha = Dyadic::new(num as i64, -(ALPHA_BITS as i64));
        (1..=depth).all(|k| alpha.pow(k as u32) >= m[k])
    };
    if !alpha_ok(scale - 1) {
        return Err(Error::NoCertificate(format!(
            "observed per-level decay requires alpha >= 1 at depth {}",
            depth
        )));
    }
    let (mut lo, mut hi) = (1u64, scale - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if alpha_ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let alpha = Dyadic::new(lo as i64, -(ALPHA_BITS as i64));

    if depth >= 3 && decay_degenerating(&stats) {
        return Err(Error::NoCertificate(format!(
            "decay rate still rising and minimum conditional probability still falling at depth {} (alpha estimate {} not stable)",
            depth, alpha
        )));
    }

    let mut log_c = 0i64;
    while (0..=depth).any(|k| &Dyadic::pow2(log_c) * &alpha.pow(k as u32) < m[k]) {
        log_c += 1;
    }
    let certificate = BalanceCertificate::new(
        DyadicInterval::point(alpha),
        DyadicInterval::pow2(log_c),
    )
    .map_err(|e| Error::NoCertificate(e.to_string()))?;
    Ok(BalanceCandidate {
        certificate,
        valid_depth: depth,
    })
}

fn decay_degenerating(stats: &LevelStats) -> bool {
    let m = &stats.max_value;
    let depth = m.len() - 1;
    // r_k < r_{k+1} with r_k = m_k^{1/k}  <=>  m_k^{k+1} < m_{k+1}^k.
    let root_rising = (1..depth).all(|k| {
        m[k].pow(k as u32 + 1) < m[k + 1].pow(k as u32)
    });
    let conditional_falling = (1..depth).all(|k| {
        match (&stats.min_conditional[k], &stats.min_conditional[k + 1]) {
            (Some(a), Some(b)) => b < a,
            _ => false,
        }
    });
    root_rising && conditional_falling
}

/// Finite-depth view of `f(w) = 2^{ε|w|}·ν(w)`, the uniform-measure
/// `ε`-gale used to probe weak balance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakBalanceTrace {
    pub epsilon: DyadicExponent,
    pub depth: usize,
    pub max_value: DyadicInterval,
    pub argmax: BinaryString,
    /// First string of full depth along which `f` certainly increases at
    /// every step.
    pub growing_path: Option<BinaryString>,
    /// Whether `f` certainly decreases from every node to both children.
    pub all_paths_decay: bool,
    /// Nodes where the `ε`-gale identity is certainly violated.
    pub gale_violations: Vec<BinaryString>,
}

impl fmt::Display for WeakBalanceTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "weak-balance trace f(w)=2^(eps|w|)nu(w), eps={}, depth {}",
            self.epsilon, self.depth
        )?;
        writeln!(
            f,
            "max f = {} (~{:.6}) at {}",
            self.max_value,
            self.max_value.hi().to_f64(),
            self.argmax
        )?;
        match &self.growing_path {
            Some(p) => writeln!(f, "certainly growing path: {}", p)?,
            None => writeln!(f, "certainly growing path: none to this depth")?,
        }
        writeln!(f, "f decays on every path: {}", self.all_paths_decay)?;
        writeln!(
            f,
            "eps-gale self-check: {}",
            if self.gale_violations.is_empty() {
                "PASS".to_string()
            } else {
                format!("FAIL at {} nodes", self.gale_violations.len())
            }
        )?;
        writeln!(f, "(finite-depth diagnostic; weak balance is not decided)")
    }
}

pub fn weak_balance_trace(
    nu: &Measure,
    epsilon: DyadicExponent,
    depth: usize,
    prec: u32,
) -> Result<WeakBalanceTrace> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let grow: Vec<DyadicInterval> = (0..=depth + 1)
        .map(|k| pow2(epsilon.mul_int(k as i64), prec))
        .collect::<Result<_>>()?;
    let shrink: Vec<DyadicInterval> = (0..=depth + 1)
        .map(|k| pow2(epsilon.mul_int(-(k as i64)), prec))
        .collect::<Result<_>>()?;

    struct State {
        max_value: DyadicInterval,
        argmax: BinaryString,
        growing_path: Option<BinaryString>,
        all_paths_decay: bool,
        gale_violations: Vec<BinaryString>,
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        nu: &Measure,
        w: &BinaryString,
        v: &DyadicInterval,
        f_w: &DyadicInterval,
        growing: bool,
        depth: usize,
        prec: u32,
        grow: &[DyadicInterval],
        shrink: &[DyadicInterval],
        st: &mut State,
    ) -> Result<()> {
        let k = w.len();
        if f_w.hi() > st.max_value.hi() {
            st.max_value = f_w.clone();
            st.argmax = w.clone();
        }
        if k == depth {
            if growing && k > 0 && st.growing_path.is_none() {
                st.growing_path = Some(w.clone());
            }
            return Ok(());
        }
        let mut children = Vec::with_capacity(2);
        for b in 0..2 {
            let cv = nu.child_value(w, v, b, prec)?;
            let cf = cv.mul(&grow[k + 1], prec);
            children.push((cv, cf));
        }
        let lhs = f_w.mul(&shrink[k], prec);
        let rhs = children[0]
            .1
            .add(&children[1].1, prec)
            .mul(&shrink[k + 1], prec);
        if !lhs.intersects(&rhs) {
            st.gale_violations.push(w.clone());
        }
        for (_, cf) in &children {
            if cf.hi() >= f_w.lo() {
                st.all_paths_decay = false;
            }
        }
        for (b, (cv, cf)) in children.iter().enumerate() {
            let still = growing && cf.lo() > f_w.hi();
            go(
                nu,
                &w.child(b as u8),
                cv,
                cf,
                still,
                depth,
                prec,
                grow,
                shrink,
                st,
            )?;
        }
        Ok(())
    }

    let root = BinaryString::empty();
    let v = nu.value(&root, prec)?;
    let mut st = State {
        max_value: v.clone(),
        argmax: root.clone(),
        growing_path: None,
        all_paths_decay: true,
        gale_violations: Vec::new(),
    };
    go(nu, &root, &v, &v, true, depth, prec, &grow, &shrink, &mut st)?;
    Ok(WeakBalanceTrace {
        epsilon,
        depth,
        max_value: st.max_value,
        argmax: st.argmax,
        growing_path: st.growing_path,
        all_paths_decay: st.all_paths_decay,
        gale_violations: st.gale_violations,
    })
}
