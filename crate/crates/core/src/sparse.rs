//! Sparse collections of dyadic intervals and the bilinear sparse form.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// `[position · 2^scale, (position + 1) · 2^scale) ∩ ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    pub scale: u32,
    pub position: i64,
}

impl DyadicInterval {
    pub fn new(scale: u32, position: i64) -> Self {
        assert!(scale < 62, "scale {scale} too large");
        Self { scale, position }
    }

    /// The dyadic interval of the given scale containing `n`.
    pub fn containing(scale: u32, n: i64) -> Self {
        Self::new(scale, n.div_euclid(1i64 << scale))
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> i64 {
        1i64 << self.scale
    }
    pub fn start(&self) -> i64 {
        self.position * self.len()
    }
    /// One past the last element.
    pub fn end(&self) -> i64 {
        self.start() + self.len()
    }
    pub fn contains(&self, n: i64) -> bool {
        (self.start()..self.end()).contains(&n)
    }
    pub fn contains_interval(&self, j: &DyadicInterval) -> bool {
        j.scale <= self.scale && j.position >> (self.scale - j.scale) == self.position
    }
    pub fn children(&self) -> Option<[DyadicInterval; 2]> {
        (self.scale > 0).then(|| {
            let s = self.scale - 1;
            [Self::new(s, 2 * self.position), Self::new(s, 2 * self.position + 1)]
        })
    }
}

/// `⟨f⟩_{I,r} = (|I|^{-1} Σ_{n∈I} |f(n)|^r)^{1/r}` over `[start, start + len)`.
pub fn local_average(f: &Signal, start: i64, len: usize, r: f64) -> f64 {
    assert!(len > 0 && r >= 1.0);
    let s: f64 = (start..start + len as i64).map(|n| f.get(n).norm().powf(r)).sum();
    (s / len as f64).powf(1.0 / r)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseCollection {
    intervals: BTreeMap<DyadicInterval, Vec<i64>>,
}

impl SparseCollection {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `interval` with witness set `witnesses`, replacing any previous
    /// entry for it.
    pub fn insert(&mut self, interval: DyadicInterval, mut witnesses: Vec<i64>) {
        witnesses.sort_unstable();
        witnesses.dedup();
        self.intervals.insert(interval, witnesses);
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = (&DyadicInterval, &Vec<i64>)> {
        self.intervals.iter()
    }
    pub fn witnesses(&self, i: &DyadicInterval) -> Option<&[i64]> {
        self.intervals.get(i).map(Vec::as_slice)
    }

    /// One line per interval: `scale position runs`, where runs are
    /// comma-separated inclusive ranges `a:b`.
    pub fn write_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, w) in &self.intervals {
            let mut runs = Vec::new();
            let mut k = 0;
            while k < w.len() {
                let mut e = k;
                while e + 1 < w.len() && w[e + 1] == w[e] + 1 {
                    e += 1;
                }
                runs.push(format!("{}:{}", w[k], w[e]));
                k = e + 1;
            }
            writeln!(out, "{} {} {}", i.scale, i.position, runs.join(","))?;
        }
        Ok(())
    }

    pub fn read_lines<R: BufRead>(input: R) -> Result<Self> {
        let mut s = Self::new();
        for (ln, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let perr = |reason: String| Error::Parse { line: ln + 1, reason };
            let mut it = t.split_whitespace();
            let scale: u32 = it
                .next()
                .ok_or_else(|| perr("missing scale".into()))?
                .parse()
                .map_err(|e| perr(format!("{e}")))?;
            let position: i64 = it
                .next()
                .ok_or_else(|| perr("missing position".into()))?
                .parse()
                .map_err(|e| perr(format!("{e}")))?;
            if scale >= 62 {
                return Err(perr(format!("scale {scale} too large")));
            }
            let mut w = Vec::new();
            if let Some(runs) = it.next() {
                for run in runs.split(',') {
                    let (a, b) = run
                        .split_once(':')
                        .ok_or_else(|| perr(format!("bad run `{run}`")))?;
                    let a: i64 = a.parse().map_err(|e| perr(format!("{e}")))?;
                    let b: i64 = b.parse().map_err(|e| perr(format!("{e}")))?;
                    w.extend(a..=b);
                }
            }
            s.insert(DyadicInterval::new(scale, position), w);
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    WitnessOutside { interval: DyadicInterval, point: i64 },
    SharedWitness { point: i64, first: DyadicInterval, second: DyadicInterval },
    TooSparse { interval: DyadicInterval, witnesses: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseVerification {
    pub violations: Vec<Violation>,
}

impl SparseVerification {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `E(I) ⊂ I`, pairwise disjointness, and `|E(I)| > |I|/10`.
pub fn verify_sparse(s: &SparseCollection) -> SparseVerification {
    let mut violations = Vec::new();
    let mut owner: HashMap<i64, DyadicInterval> = HashMap::new();
    for (i, w) in s.iter() {
        for &n in w {
            if !i.contains(n) {
                violations.push(Violation::WitnessOutside { interval: *i, point: n });
            }
            if let Some(prev) = owner.insert(n, *i) {
                violations.push(Violation::SharedWitness {
                    point: n,
                    first: prev,
                    second: *i,
                });
            }
        }
        if 10 * w.len() as i64 <= i.len() {
            violations.push(Violation::TooSparse {
                interval: *i,
                witnesses: w.len(),
            });
        }
    }
    SparseVerification { violations }
}

/// `Π_{S,r}(f, g) = Σ_{I∈S} ⟨f⟩_{I,r} ⟨g⟩_{I,r} |I|`; rejects invalid `S`.
pub fn sparse_form(s: &SparseCollection, f: &Signal, g: &Signal, r: f64) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::param("r", "must be at least 1"));
    }
    let v = verify_sparse(s);
    if let Some(first) = v.violations.first() {
        return Err(Error::InvalidSparse(format!("{first:?}")));
    }
    Ok(s.iter()
        .map(|(i, _)| {
            let n = i.len() as usize;
            local_average(f, i.start(), n, r) * local_average(g, i.start(), n, r) * n as f64
        })
        .sum())
}

/// Prefix sums of `|f|^r`, answering window sums in O(1).
struct PowerSums {
    lo: i64,
    prefix: Vec<f64>,
}

impl PowerSums {
    fn new(f: &Signal, lo: i64, hi: i64, r: f64) -> Self {
        let mut prefix = Vec::with_capacity((hi - lo + 2) as usize);
        prefix.push(0.0);
        let mut acc = 0.0;
        for n in lo..=hi {
            acc += f.get(n).norm().powf(r);
            prefix.push(acc);
        }
        Self { lo, prefix }
    }

    fn sum(&self, a: i64, b_excl: i64) -> f64 {
        let clamp = |n: i64| (n - self.lo).clamp(0, self.prefix.len() as i64 - 1) as usize;
        (self.prefix[clamp(b_excl)] - self.prefix[clamp(a)]).max(0.0)
    }

    /// `⟨·⟩^r` on `[a, b)`.
    fn mean(&self, a: i64, b_excl: i64) -> f64 {
        self.sum(a, b_excl) / (b_excl - a) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCertificate {
    pub collection: SparseCollection,
    pub r: f64,
    /// `|⟨Tf, g⟩|`.
    pub pairing: f64,
    /// `Π_{S,r}(f, g)`.
    pub form: f64,
    /// `pairing / form`; `0` when both vanish, `+∞` when only the form does.
    pub constant: f64,
    /// Largest fraction of an interval covered by its stopping children.
    pub max_child_fraction: f64,
    /// Set when the interval budget ran out before the recursion finished.
    pub truncated: bool,
}

/// Upper limit on intervals in one certificate.
pub const MAX_CERTIFICATE_INTERVALS: usize = 1 << 20;

/// Stopping-time construction.
///
/// Roots are the one or two adjacent dyadic intervals of least scale covering
/// both supports. Below each selected `I`, the maximal dyadic `J ⊂ I` with
/// `⟨f⟩_{3J,r} > 4⟨f⟩_{3I,r}` or `⟨g⟩_{J,r} > 4⟨g⟩_{I,r}` are selected in turn;
/// `E(I)` is `I` minus its selected children.
pub fn sparse_certificate<T>(t_eval: T, f: &Signal, g: &Signal, r: f64) -> Result<SparseCertificate>
where
    T: Fn(&Signal) -> Signal,
{
    if !(1.0..2.0).contains(&r) {
        return Err(Error::param("r", format!("{r} not in [1, 2)")));
    }
    let tf = t_eval(f);
    let pairing = tf.inner(g).norm();
    let (lo, hi) = match (f.support(), g.support()) {
        (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        _ => {
            return Ok(SparseCertificate {
                collection: SparseCollection::new(),
                r,
                pairing,
                form: 0.0,
                constant: if pairing == 0.0 { 0.0 } else { f64::INFINITY },
                max_child_fraction: 0.0,
                truncated: false,
            })
        }
    };
    // One root when some dyadic interval holds the hull; across the origin no
    // dyadic interval does, and the two halves [-2^k, 0), [0, 2^k) are used.
    let span = |k: u32| DyadicInterval::containing(k, hi).position - DyadicInterval::containing(k, lo).position;
    let mut k = 0u32;
    if lo < 0 && hi >= 0 {
        while span(k) > 1 {
            k += 1;
        }
    } else {
        while span(k) > 0 {
            k += 1;
        }
    }
    let first = DyadicInterval::containing(k, lo);
    let last = DyadicInterval::containing(k, hi);
    let mut stack: Vec<DyadicInterval> = (first.position..=last.position)
        .map(|p| DyadicInterval::new(k, p))
        .collect();

    let reach = 1i64 << (k + 1);
    let fs = PowerSums::new(f, lo - reach, hi + reach, r);
    let gs = PowerSums::new(g, lo - reach, hi + reach, r);
    let f3 = |i: &DyadicInterval| fs.mean(i.start() - i.len(), i.end() + i.len());
    let g1 = |i: &DyadicInterval| gs.mean(i.start(), i.end());
    let factor = 4f64.powf(r);

    let mut collection = SparseCollection::new();
    let mut max_child_fraction = 0.0f64;
    let mut truncated = false;
    while let Some(i) = stack.pop() {
        if collection.len() >= MAX_CERTIFICATE_INTERVALS {
            truncated = true;
            break;
        }
        let (fi, gi) = (f3(&i), g1(&i));
        let mut children = Vec::new();
        let mut probe: Vec<DyadicInterval> = i.children().map(Vec::from).unwrap_or_default();
        while let Some(j) = probe.pop() {
            let (fj, gj) = (f3(&j), g1(&j));
            if fj > factor * fi || gj > factor * gi {
                children.push(j);
            } else if fs.sum(j.start() - j.len(), j.end() + j.len()) > 0.0 || gs.sum(j.start(), j.end()) > 0.0 {
                if let Some(cs) = j.children() {
                    probe.extend(cs);
                }
            }
        }
        let covered: i64 = children.iter().map(|c| c.len()).sum();
        max_child_fraction = max_child_fraction.max(covered as f64 / i.len() as f64);
        let mut witnesses = Vec::with_capacity((i.len() - covered) as usize);
        children.sort_by_key(DyadicInterval::start);
        let mut cursor = i.start();
        for c in &children {
            witnesses.extend(cursor..c.start());
            cursor = c.end();
        }
        witnesses.extend(cursor..i.end());
        collection.insert(i, witnesses);
        stack.extend(children);
    }
    let form = sparse_form_unchecked(&collection, &fs, &gs, r);
    let constant = if form > 0.0 {
        pairing / form
    } else if pairing == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(SparseCertificate {
        collection,
        r,
        pairing,
        form,
        constant,
        max_child_fraction,
        truncated,
    })
}

fn sparse_form_unchecked(s: &SparseCollection, fs: &PowerSums, gs: &PowerSums, r: f64) -> f64 {
    s.iter()
        .map(|(i, _)| {
            let n = i.len() as f64;
            fs.mean(i.start(), i.end()).powf(1.0 / r) * gs.mean(i.start(), i.end()).powf(1.0 / r) * n
        })
        .sum()
}
