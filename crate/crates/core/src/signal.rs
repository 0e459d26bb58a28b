//! Finitely supported complex functions on the integers.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// `values[i]` is the value at `offset + i`; zero everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    offset: i64,
    values: Vec<Complex64>,
}

/// Direct convolution is used while `len(f) * len(g)` stays below this.
const DIRECT_CONVOLUTION_LIMIT: usize = 1 << 18;

impl Signal {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Self {
        Self { offset, values }
    }

    pub fn zeros(offset: i64, len: usize) -> Self {
        Self::new(offset, vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn delta(at: i64) -> Self {
        Self::new(at, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Self {
        Self::new(offset, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }
    /// One past the last stored position.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        let i = n - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    /// Adds `v` at `n`; `n` must lie in the stored window.
    #[inline]
    pub fn add_at(&mut self, n: i64, v: Complex64) {
        let i = (n - self.offset) as usize;
        self.values[i] += v;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    /// `[first, last]` positions holding a nonzero value.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.values.iter().position(|v| *v != Complex64::new(0.0, 0.0))?;
        let last = self.values.iter().rposition(|v| *v != Complex64::new(0.0, 0.0))?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// Copy with the stored window shrunk to the support.
    pub fn trimmed(&self) -> Signal {
        match self.support() {
            None => Signal::zeros(self.offset, 0),
            Some((a, b)) => self.window(a, (b - a + 1) as usize),
        }
    }

    /// Values on `[start, start + len)`, zero-filled outside the stored window.
    pub fn window(&self, start: i64, len: usize) -> Signal {
        Signal::new(start, (0..len as i64).map(|i| self.get(start + i)).collect())
    }

    pub fn abs(&self) -> Signal {
        Signal::new(
            self.offset,
            self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal::new(self.offset, self.values.iter().map(|v| v * c).collect())
    }

    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_inf();
        }
        self.values
            .iter()
            .map(|v| v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `⟨f, g⟩ = Σ f(n) conj(g(n))`.
    pub fn inner(&self, g: &Signal) -> Complex64 {
        let lo = self.offset.max(g.offset);
        let hi = self.end().min(g.end());
        (lo..hi.max(lo)).map(|n| self.get(n) * g.get(n).conj()).sum()
    }

    /// Pointwise difference over the union of windows.
    pub fn max_abs_diff(&self, g: &Signal) -> f64 {
        let lo = self.offset.min(g.offset);
        let hi = self.end().max(g.end());
        (lo..hi)
            .map(|n| (self.get(n) - g.get(n)).norm())
            .fold(0.0, f64::max)
    }

    /// `(f ∗ g)(n) = Σ_m f(m) g(n - m)`, by direct summation or FFT depending
    /// on size.
    pub fn convolve(&self, g: &Signal) -> Signal {
        if self.len().saturating_mul(g.len()) <= DIRECT_CONVOLUTION_LIMIT {
            self.convolve_direct(g)
        } else {
            self.convolve_fft(g)
        }
    }

    pub fn convolve_direct(&self, g: &Signal) -> Signal {
        if self.is_empty() || g.is_empty() {
            return Signal::zeros(self.offset + g.offset, 0);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len() + g.len() - 1];
        for (i, &a) in self.values.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in g.values.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Signal::new(self.offset + g.offset, out)
    }

    pub fn convolve_fft(&self, g: &Signal) -> Signal {
        if self.is_empty() || g.is_empty() {
            return Signal::zeros(self.offset + g.offset, 0);
        }
        let len = self.len() + g.len() - 1;
        let n = len.next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut a = self.values.clone();
        a.resize(n, Complex64::new(0.0, 0.0));
        let mut b = g.values.clone();
        b.resize(n, Complex64::new(0.0, 0.0));
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        inv.process(&mut a);
        let scale = 1.0 / n as f64;
        a.truncate(len);
        for v in &mut a {
            *v *= scale;
        }
        Signal::new(self.offset + g.offset, a)
    }

    /// Text record: a line `offset <n>` followed by one `re im` line per value.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "offset {}", self.offset)?;
        for v in &self.values {
            writeln!(out, "{} {}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut offset = None;
        let mut values = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let perr = |reason: String| Error::Parse { line: i + 1, reason };
            if offset.is_none() {
                let rest = t
                    .strip_prefix("offset")
                    .ok_or_else(|| perr("expected `offset <n>`".into()))?;
                offset = Some(
                    rest.trim()
                        .parse::<i64>()
                        .map_err(|e| perr(e.to_string()))?,
                );
                continue;
            }
            let mut it = t.split_whitespace();
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| perr("expected `re im`".into()))?
                    .parse::<f64>()
                    .map_err(|e| perr(e.to_string()))
            };
            let re = next()?;
            let im = next()?;
            values.push(Complex64::new(re, im));
        }
        let offset = offset.ok_or(Error::Parse {
            line: 0,
            reason: "missing offset line".into(),
        })?;
        Ok(Signal::new(offset, values))
    }
}
