use crate::bitio::{bits_for, BitSink, BitSource};
use crate::error::{Error, Result};
use crate::Symbol;

/// Largest alphabet the block coder accepts.
pub const MAX_SIGMA: u32 = 1 << 16;

const ONE: u64 = 1 << 16;

/// A positive slack `mantissa / 2^exp`; halving is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slack {
    mantissa: u64,
    exp: u32,
}

impl Slack {
    /// Smallest accepted slack, 1/256.
    pub const MIN_FIXED: u32 = 1 << 8;

    /// From a 16.16 fixed-point value.
    pub fn from_fixed(raw: u32) -> Result<Self> {
        if !(Self::MIN_FIXED..=64 << 16).contains(&raw) {
            return Err(Error::InvalidParameter(format!(
                "slack {} outside [1/256, 64]",
                raw as f64 / ONE as f64
            )));
        }
        Ok(Self {
            mantissa: raw as u64,
            exp: 16,
        })
    }

    /// Rounds to the nearest 16.16 value.
    pub fn from_f64(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || mu > 64.0 {
            return Err(Error::InvalidParameter(format!("slack {mu}")));
        }
        Self::from_fixed((mu * ONE as f64).round() as u32)
    }

    /// The 16.16 encoding, if this slack has one.
    pub fn to_fixed(self) -> Option<u32> {
        if self.exp <= 16 {
            u32::try_from(self.mantissa << (16 - self.exp)).ok()
        } else {
            let drop = self.exp - 16;
            (self.mantissa.trailing_zeros() >= drop)
                .then(|| u32::try_from(self.mantissa >> drop).ok())
                .flatten()
        }
    }

    pub fn half(self) -> Self {
        Self {
            mantissa: self.mantissa,
            exp: self.exp + 1,
        }
    }

    pub fn value(self) -> f64 {
        self.mantissa as f64 / (1u64 << self.exp) as f64
    }

    /// `ceil(4 / mu)`.
    pub fn inner_block_len(self) -> usize {
        let num = 4u128 << self.exp;
        num.div_ceil(self.mantissa as u128) as usize
    }

    /// `r = 1 + 1/(2^(mu/2) - 1)` rounded up to 16.16 fixed point.
    pub fn r_fixed(self) -> u64 {
        let r = 1.0 + 1.0 / ((self.value() / 2.0).exp2() - 1.0);
        (r * ONE as f64).ceil() as u64
    }
}

/// A 16.16 fixed-point exponent `lambda >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lambda(u32);

impl Lambda {
    pub fn from_fixed(raw: u32) -> Result<Self> {
        if raw < ONE as u32 || raw > 64 << 16 {
            return Err(Error::InvalidParameter(format!(
                "lambda {} outside [1, 64]",
                raw as f64 / ONE as f64
            )));
        }
        Ok(Self(raw))
    }

    pub fn from_f64(lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0) || lambda > 64.0 {
            return Err(Error::InvalidParameter(format!("lambda {lambda}")));
        }
        Self::from_fixed((lambda * ONE as f64).round() as u32)
    }

    pub fn to_fixed(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / ONE as f64
    }
}

/// Fixed-point approximation `Q` of an empirical distribution.
///
/// Symbols with probability at least `1/(r sigma^(1/lambda))` are heavy and
/// keep a weight `floor(p r^2 sigma)`; heavy symbols share mass `1 - 1/r` in
/// proportion to their weights and every other symbol gets `1/(r(sigma-t))`.
/// Probabilities are `q[i] / 2^w`, floored, so they sum to at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedDistribution {
    sigma: u32,
    r_fixed: u64,
    w: u32,
    heavy: Vec<(Symbol, u64)>,
    q: Vec<u64>,
    cum: Vec<u64>,
}

fn check_sigma(sigma: usize) -> Result<u32> {
    if sigma == 0 || sigma > MAX_SIGMA as usize {
        return Err(Error::InvalidParameter(format!(
            "alphabet size {sigma} outside 1..={MAX_SIGMA}"
        )));
    }
    Ok(sigma as u32)
}

/// `(w, largest storable weight)` for the given `r` and alphabet.
fn precision(r_fixed: u64, sigma: u32) -> (u32, u64) {
    let r2s = (r_fixed as u128) * (r_fixed as u128) * sigma as u128;
    let mut a = 0u32;
    while r2s > 1u128 << (a + 32) {
        a += 1;
    }
    (a + 16, (r2s >> 32) as u64)
}

/// Builds `Q` from symbol counts.
pub fn quantize(counts: &[u64], lambda: Lambda, mu: Slack) -> Result<QuantizedDistribution> {
    let sigma = check_sigma(counts.len())?;
    let r_fixed = mu.r_fixed();
    let n: u64 = counts.iter().sum();
    let r = r_fixed as f64 / ONE as f64;
    let reach = r * (sigma as f64).powf(1.0 / lambda.value());
    let (_, max_weight) = precision(r_fixed, sigma);
    let mut heavy = Vec::new();
    if n > 0 {
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 && c as f64 * reach >= n as f64 {
                let weight = (c as u128 * (r_fixed as u128).pow(2) * sigma as u128
                    / (n as u128 * (1u128 << 32))) as u64;
                heavy.push((i as Symbol, weight.clamp(1, max_weight)));
            }
        }
    }
    QuantizedDistribution::from_heavy(sigma as usize, r_fixed, heavy)
}

impl QuantizedDistribution {
    /// Rebuilds the tables from the heavy list alone, as the decoder does.
    pub fn from_heavy(sigma: usize, r_fixed: u64, heavy: Vec<(Symbol, u64)>) -> Result<Self> {
        let sigma = check_sigma(sigma)?;
        if r_fixed <= ONE || r_fixed >= 1 << 26 {
            return Err(Error::InvalidParameter(format!("r = {r_fixed}/2^16")));
        }
        let (w, max_weight) = precision(r_fixed, sigma);
        if heavy.len() > sigma as usize
            || heavy.windows(2).any(|p| p[0].0 >= p[1].0)
            || heavy
                .iter()
                .any(|&(s, wt)| s >= sigma || wt == 0 || wt > max_weight)
        {
            return Err(Error::corrupt("invalid heavy-symbol table"));
        }
        let t = heavy.len() as u128;
        let total: u128 = heavy.iter().map(|&(_, wt)| wt as u128).sum();
        let scale = 1u128 << w;
        let r = r_fixed as u128;
        let light = if t < sigma as u128 {
            (scale * ONE as u128 / (r * (sigma as u128 - t))) as u64
        } else {
            0
        };
        let mut q = vec![light; sigma as usize];
        for &(s, wt) in &heavy {
            q[s as usize] = (scale * (r - ONE as u128) * wt as u128 / (r * total)) as u64;
        }
        if q.contains(&0) {
            return Err(Error::ZeroProbability);
        }
        let mut cum = Vec::with_capacity(q.len() + 1);
        let mut acc = 0u64;
        cum.push(0);
        for &x in &q {
            acc += x;
            cum.push(acc);
        }
        if acc as u128 > scale {
            return Err(Error::NotNormalized);
        }
        Ok(Self {
            sigma,
            r_fixed,
            w,
            heavy,
            q,
            cum,
        })
    }

    /// A distribution given directly as numerators over `2^w`, with no heavy table.
    pub fn from_table(w: u32, q: Vec<u64>) -> Result<Self> {
        let sigma = check_sigma(q.len())?;
        if w > 62 || q.contains(&0) {
            return Err(Error::ZeroProbability);
        }
        let mut cum = Vec::with_capacity(q.len() + 1);
        cum.push(0u64);
        for &x in &q {
            cum.push(cum.last().unwrap().saturating_add(x));
        }
        if *cum.last().unwrap() > 1 << w {
            return Err(Error::NotNormalized);
        }
        Ok(Self {
            sigma,
            r_fixed: 0,
            w,
            heavy: Vec::new(),
            q,
            cum,
        })
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    /// Fraction bits of every probability.
    pub fn precision_bits(&self) -> u32 {
        self.w
    }

    pub fn r_fixed(&self) -> u64 {
        self.r_fixed
    }

    pub fn heavy(&self) -> &[(Symbol, u64)] {
        &self.heavy
    }

    /// Numerator of `q_i` over `2^w`.
    pub fn q(&self, symbol: Symbol) -> u64 {
        self.q[symbol as usize]
    }

    /// Numerator of `q_0 + ... + q_(i-1)` over `2^w`.
    pub fn cum(&self, symbol: Symbol) -> u64 {
        self.cum[symbol as usize]
    }

    pub fn probability(&self, symbol: Symbol) -> f64 {
        self.q[symbol as usize] as f64 / (self.w as f64).exp2()
    }

    /// Symbol whose interval `[cum, cum + q)` contains `t`, if any.
    pub fn locate(&self, t: u64) -> Option<Symbol> {
        let i = self.cum.partition_point(|&c| c <= t);
        if i == 0 || i > self.sigma as usize {
            return None;
        }
        let s = (i - 1) as Symbol;
        (t < self.cum[i - 1] + self.q[i - 1]).then_some(s)
    }

    /// Bits per stored weight in the header.
    pub fn weight_bits(&self) -> u32 {
        bits_for(precision(self.r_fixed, self.sigma).1 + 1)
    }

    /// `gamma(t+1)`, then each heavy symbol and its weight in fixed width.
    pub fn write_header(&self, sink: &mut BitSink) -> Result<()> {
        let sym_bits = bits_for(self.sigma as u64);
        let wbits = self.weight_bits();
        sink.write_gamma(self.heavy.len() as u64 + 1)?;
        for &(s, wt) in &self.heavy {
            sink.write_fixed(s as u64, sym_bits)?;
            sink.write_fixed(wt, wbits)?;
        }
        Ok(())
    }

    pub fn read_header(src: &mut BitSource<'_>, sigma: usize, r_fixed: u64) -> Result<Self> {
        let sigma32 = check_sigma(sigma)?;
        let t = src.read_gamma()? - 1;
        if t > sigma as u64 {
            return Err(Error::corrupt("heavy-symbol count exceeds the alphabet"));
        }
        let sym_bits = bits_for(sigma as u64);
        let wbits = bits_for(precision(r_fixed, sigma32).1 + 1);
        let mut heavy = Vec::with_capacity(t as usize);
        for _ in 0..t {
            let s = src.read_fixed(sym_bits)? as Symbol;
            let wt = src.read_fixed(wbits)?;
            heavy.push((s, wt));
        }
        Self::from_heavy(sigma, r_fixed, heavy)
    }

    /// `D(P || Q)` in bits for the empirical distribution given by `counts`.
    pub fn relative_entropy(&self, counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return 0.0;
        }
        counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, &c)| {
                let p = c as f64 / n as f64;
                p * (p / self.probability(i as Symbol)).log2()
            })
            .sum()
    }
}
