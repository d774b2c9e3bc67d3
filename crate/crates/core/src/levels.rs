//! Level arithmetic.
//!
//! A level `l` holds inverse ratios in `[beta^l, beta^(l+1))`. Every power of
//! beta used anywhere comes from one table built by repeated multiplication, so
//! all threshold tests agree with each other bit for bit.

use alloc::vec::Vec;

use crate::Error;

/// Relative slack applied to every `x >= c * beta^j` test. Repeated
/// multiplication drifts by a few ulps (`sqrt(2)^4 = 4.000000000000002`), and
/// without the slack a ratio sitting exactly on a power would land one level
/// too low.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub eps: f64,
    pub beta: f64,
    /// Maximum number of simultaneously active elements.
    pub n_cap: u32,
    /// Ratio between the largest and smallest cost. Costs lie in `[1/C, 1]`.
    pub c_ratio: f64,
}

impl Params {
    pub fn new(eps: f64, n_cap: u32, c_ratio: f64) -> Result<Self, Error> {
        if !(eps > 0.0 && eps < 0.4) {
            return Err(Error::InvalidParams("eps must lie in (0, 0.4)"));
        }
        if n_cap == 0 {
            return Err(Error::InvalidParams("n_cap must be positive"));
        }
        if c_ratio.is_nan() || c_ratio < 1.0 || !c_ratio.is_finite() {
            return Err(Error::InvalidParams("cost ratio must be a finite value >= 1"));
        }
        Ok(Params { eps, beta: 1.0 + eps, n_cap, c_ratio })
    }

    /// Beta given directly. The lower-bound constructions are tuned to
    /// `beta = sqrt(2)`, which sits just outside the eps range accepted by
    /// [`Params::new`], so this only asks for `1 < beta < 2`.
    pub fn with_beta(beta: f64, n_cap: u32, c_ratio: f64) -> Result<Self, Error> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::InvalidParams("beta must lie in (1, 2)"));
        }
        let mut p = Params::new(0.2, n_cap, c_ratio)?;
        p.eps = beta - 1.0;
        p.beta = beta;
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct Levels {
    params: Params,
    span: i32,
    pow: Vec<f64>,
    reset_depth: i32,
}

impl Levels {
    pub fn new(params: Params) -> Self {
        let beta = params.beta;
        let target = params.n_cap as f64 * params.c_ratio;
        let mut k = 0i32;
        let mut x = 1.0f64;
        while x < target {
            x *= beta;
            k += 1;
        }
        let span = k + 4;
        let len = (2 * span + 1) as usize;
        let mut pow = alloc::vec![0.0; len];
        pow[span as usize] = 1.0;
        for i in 1..=span as usize {
            pow[span as usize + i] = pow[span as usize + i - 1] * beta;
            pow[span as usize - i] = pow[span as usize - i + 1] / beta;
        }
        // Smallest d with beta^d >= n_cap^4; the half-critical scan never needs
        // to look further than d levels above the lowest covering level.
        let n4 = libm::pow(params.n_cap as f64, 4.0);
        let mut d = 0i32;
        let mut y = 1.0f64;
        while y < n4 * (1.0 - TIE_TOLERANCE) {
            y *= beta;
            d += 1;
        }
        Levels { params, span, pow, reset_depth: d }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    /// The table covers levels `-span..=span`.
    pub fn span(&self) -> i32 {
        self.span
    }

    /// `ceil(4 log_beta n_cap)`.
    pub fn reset_depth(&self) -> i32 {
        self.reset_depth
    }

    /// `beta^j` from the table. Panics outside the table: that is always a
    /// level arithmetic bug.
    pub fn pow(&self, j: i32) -> f64 {
        match self.try_pow(j) {
            Ok(x) => x,
            Err(_) => panic!("level {j} outside the power table (span {})", self.span),
        }
    }

    pub fn try_pow(&self, j: i32) -> Result<f64, Error> {
        if j < -self.span || j > self.span {
            return Err(Error::LevelOutOfRange(j));
        }
        Ok(self.pow[(j + self.span) as usize])
    }

    /// Whether `x / cost >= beta^j`, up to [`TIE_TOLERANCE`].
    #[inline]
    pub fn reaches(&self, x: f64, cost: f64, j: i32) -> bool {
        x >= cost * self.pow(j) * (1.0 - TIE_TOLERANCE)
    }

    /// The level `l` with `beta^l <= count/cost < beta^(l+1)`.
    pub fn level_of_ratio(&self, count: u64, cost: f64) -> Result<i32, Error> {
        if count == 0 {
            return Err(Error::ZeroCount);
        }
        let x = count as f64;
        let (mut lo, mut hi) = (-self.span, self.span);
        if !self.reaches(x, cost, lo) {
            return Err(Error::LevelOutOfRange(lo - 1));
        }
        if self.reaches(x, cost, hi) {
            return Err(Error::LevelOutOfRange(hi));
        }
        // reaches(lo) holds and reaches(hi) fails.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.reaches(x, cost, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Levels at which a set of this cost can ever be positive dirty:
    /// `j_min = floor(log(1/cost)) - 1` and `j_max = ceil(log(n_cap/cost)) - 1`.
    pub fn relevant_window(&self, cost: f64) -> (i32, i32) {
        let j_min = self.level_of_ratio(1, cost).expect("cost within [1/C, 1] has a level") - 1;
        let n = self.params.n_cap as u64;
        let l = self.level_of_ratio(n, cost).expect("n_cap/cost lies inside the table");
        // ceil: l itself if n/cost sits on beta^l, one more otherwise.
        let ceil = if on_power(self, n as f64, cost, l) { l } else { l + 1 };
        (j_min, ceil - 1)
    }
}

fn on_power(levels: &Levels, x: f64, cost: f64, l: i32) -> bool {
    let p = cost * levels.pow(l);
    (x - p).abs() <= TIE_TOLERANCE * x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(beta: f64, n: u32, c: f64) -> Levels {
        Levels::new(Params::with_beta(beta, n, c).unwrap())
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(Params::new(0.0, 10, 1.0).is_err());
        assert!(Params::new(0.4, 10, 1.0).is_err());
        assert!(Params::new(0.1, 10, 0.5).is_err());
        assert_eq!(Params::new(0.25, 10, 1.0).unwrap().beta, 1.25);
    }

    #[test]
    fn powers() {
        let l = lv(core::f64::consts::SQRT_2, 32, 1.0);
        assert_eq!(l.pow(0), 1.0);
        assert!((l.pow(6) - 8.0).abs() < 1e-12);
        let l = lv(1.5, 100, 2.0);
        assert!((l.pow(3) - 1.5 * 1.5 * 1.5).abs() < 1e-15);
        assert!(l.try_pow(l.span() + 1).is_err());
        assert!(l.try_pow(-l.span()).is_ok());
    }

    #[test]
    #[should_panic]
    fn pow_out_of_range_panics() {
        let l = lv(1.5, 4, 1.0);
        l.pow(l.span() + 1);
    }

    #[test]
    fn ratio_levels() {
        let l = lv(core::f64::consts::SQRT_2, 32, 1.0);
        assert_eq!(l.level_of_ratio(1, 1.0).unwrap(), 0);
        assert_eq!(l.level_of_ratio(4, 1.0).unwrap(), 4);
        assert_eq!(l.level_of_ratio(3, 1.0).unwrap(), 3);
        assert_eq!(l.level_of_ratio(8, 1.0).unwrap(), 6);
        assert_eq!(l.level_of_ratio(0, 1.0), Err(Error::ZeroCount));
        let l = lv(1.5, 100, 1.0);
        assert_eq!(l.level_of_ratio(5, 1.0).unwrap(), 3);
    }

    #[test]
    fn windows() {
        let l = lv(core::f64::consts::SQRT_2, 32, 1.0);
        assert_eq!(l.relevant_window(1.0), (-1, 9));
        let l = lv(1.5, 100, 2.0);
        assert_eq!(l.relevant_window(0.5), (0, 13));
        assert_eq!(l.relevant_window(1.0).0, -1);
    }

    #[test]
    fn reset_depth_matches_log() {
        let l = lv(1.5, 100, 1.0);
        let want = libm::ceil(4.0 * libm::log(100.0) / libm::log(1.5)) as i32;
        assert_eq!(l.reset_depth(), want);
    }
}
