//! Pauli channel simulation: drawing channel outcomes and answering probes.
//!
//! A probe with string `A` returns the readout `R = A ⋆ C` for a freshly drawn
//! outcome `C ∼ p`. Heralded measurement failures are modelled as an
//! independent per-coordinate flag; a failed coordinate carries readout 0 and
//! downstream code must branch on the flag.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::pauli::{pauli_words, star_word, BitString, PauliString, SYMBOLS_PER_WORD};

/// Normalization tolerance accepted by [`ChannelSpec::new`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// A sparse distribution `p` over `{0,1,2,3}ⁿ`: the Pauli error rates.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    n: usize,
    atoms: Vec<(PauliString, f64)>,
    cumulative: Vec<f64>,
}

impl ChannelSpec {
    /// Validates and builds a spec. Probabilities must lie in `[0, 1]` and sum
    /// to 1 within [`NORMALIZATION_TOLERANCE`].
    pub fn new(n: usize, atoms: Vec<(PauliString, f64)>) -> Result<Self> {
        let spec = Self::build(n, atoms, true)?;
        let total = spec.total();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(spec)
    }

    /// Like [`ChannelSpec::new`] but rescales the probabilities to sum to 1.
    pub fn normalized(n: usize, atoms: Vec<(PauliString, f64)>) -> Result<Self> {
        let spec = Self::build(n, atoms, false)?;
        let total = spec.total();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("probabilities sum to 0".into()));
        }
        let atoms = spec.atoms.into_iter().map(|(c, p)| (c, p / total)).collect();
        Self::build(n, atoms, true)
    }

    pub fn point_mass(c: PauliString) -> Self {
        let n = c.len();
        Self::build(n, vec![(c, 1.0)], true).expect("point mass is valid")
    }

    fn build(n: usize, mut atoms: Vec<(PauliString, f64)>, unit: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("channel needs n >= 1".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("channel has no atoms".into()));
        }
        for (c, p) in &atoms {
            check_len(c.len(), n)?;
            if !p.is_finite() || *p < 0.0 || (unit && *p > 1.0 + NORMALIZATION_TOLERANCE) {
                return Err(Error::InvalidParameter(format!(
                    "probability {p} for {c} is outside [0, 1]"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = atoms.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter(format!("duplicate atom {}", w[0].0)));
        }
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|(_, p)| {
                acc += p;
                acc
            })
            .collect();
        Ok(ChannelSpec { n, atoms, cumulative })
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Atoms in lexicographic order.
    pub fn atoms(&self) -> &[(PauliString, f64)] {
        &self.atoms
    }

    pub fn probability(&self, c: &PauliString) -> f64 {
        self.atoms
            .binary_search_by(|(a, _)| a.cmp(c))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    /// `Pr_{C∼p}[C_1..C_ℓ = prefix]`.
    pub fn marginal(&self, prefix: &PauliString) -> Result<f64> {
        if prefix.len() > self.n {
            return Err(Error::LengthMismatch {
                left: prefix.len(),
                right: self.n,
            });
        }
        Ok(self
            .atoms
            .iter()
            .filter(|(c, _)| c.prefix(prefix.len()).map(|q| &q == prefix).unwrap_or(false))
            .map(|(_, p)| p)
            .sum())
    }

    /// Nontrivial error rate `η = 1 − p(0ⁿ)`.
    pub fn eta(&self) -> f64 {
        1.0 - self.probability(&PauliString::identity(self.n))
    }

    /// Index into [`ChannelSpec::atoms`] drawn with probability equal to the atom's mass.
    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.atoms.len() - 1)
    }

    /// Parses the text form: a header line `n=<int>` followed by lines
    /// `<base-4 string> <probability>`. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (lineno, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line n=<int>".into()))?;
        let n = parse_header_value(header, "n", lineno)?;
        let mut atoms = Vec::new();
        for (lineno, line) in lines {
            let mut fields = line.split_whitespace();
            let (Some(s), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected `<string> <probability>`"
                )));
            };
            let c: PauliString = s
                .parse()
                .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
            if c.len() != n {
                return Err(Error::Parse(format!(
                    "line {lineno}: string {s} has length {}, header says {n}",
                    c.len()
                )));
            }
            let p: f64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: bad probability {p:?}")))?;
            atoms.push((c, p));
        }
        ChannelSpec::new(n, atoms)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for (c, p) in &self.atoms {
            let _ = writeln!(out, "{c} {p}");
        }
        out
    }
}

pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn parse_header_value(line: &str, key: &str, lineno: usize) -> Result<usize> {
    let value = line
        .strip_prefix(key)
        .and_then(|rest| rest.trim_start().strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("line {lineno}: expected `{key}=<int>`, found {line:?}")))?;
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {lineno}: bad integer in {line:?}")))
}

/// Heralded measurement failures: each coordinate independently reads `?`
/// with probability `nu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    nu: f64,
}

impl NoiseConfig {
    pub const MAX_NU: f64 = 0.25;

    pub fn new(nu: f64) -> Result<Self> {
        if !(0.0..=Self::MAX_NU).contains(&nu) {
            return Err(Error::InvalidParameter(format!(
                "failure probability {nu} outside [0, 1/4]"
            )));
        }
        Ok(NoiseConfig { nu })
    }

    pub fn noiseless() -> Self {
        NoiseConfig { nu: 0.0 }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Effective erasure probability `r = ν + (1 − ν)/3`.
    pub fn erasure_r(&self) -> f64 {
        self.nu + (1.0 - self.nu) / 3.0
    }

    /// Fills `failed` (spread layout) with fresh failure flags for `n` coordinates.
    /// Draws nothing from `rng` when `ν = 0`.
    #[inline]
    pub fn sample_failures<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, failed: &mut [u64]) {
        failed.fill(0);
        if self.nu == 0.0 {
            return;
        }
        for j in 0..n {
            if rng.random::<f64>() < self.nu {
                failed[j / SYMBOLS_PER_WORD] |= 1u64 << (2 * (j % SYMBOLS_PER_WORD));
            }
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// One probe/readout interaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeRecord {
    pub probe: PauliString,
    pub readout: BitString,
    /// Coordinates whose measurement failed; their readout bit is 0.
    pub failed: BitString,
}

/// Which probe distribution a batch was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeFamily {
    /// Uniform over `{1,2,3}ⁿ`.
    Nontrivial,
    /// Uniform over `{0,1,2,3}ⁿ`. The stored probe is the string actually sent.
    Extended,
}

impl ProbeFamily {
    pub fn name(self) -> &'static str {
        match self {
            ProbeFamily::Nontrivial => "nontrivial",
            ProbeFamily::Extended => "extended",
        }
    }
}

/// Anything that can answer a probe: a simulated Pauli channel, a twirled
/// general channel, or a recorded device.
pub trait ProbeChannel {
    fn num_qubits(&self) -> usize;

    /// Runs one probe with string `probe`, writing the readout and failure
    /// flags in the spread layout (bit `2j` for coordinate `j`). Readout bits
    /// of failed coordinates must be 0.
    fn measure_into<R: Rng + ?Sized>(
        &self,
        probe: &PauliString,
        rng: &mut R,
        readout: &mut [u64],
        failed: &mut [u64],
    ) -> Result<()>;

    fn measure<R: Rng + ?Sized>(&self, probe: &PauliString, rng: &mut R) -> Result<ProbeRecord> {
        let n = self.num_qubits();
        check_len(probe.len(), n)?;
        let words = pauli_words(n);
        let mut readout = vec![0u64; words];
        let mut failed = vec![0u64; words];
        self.measure_into(probe, rng, &mut readout, &mut failed)?;
        Ok(ProbeRecord {
            probe: probe.clone(),
            readout: BitString::from_spread(n, &readout),
            failed: BitString::from_spread(n, &failed),
        })
    }
}

/// A Pauli channel together with the measuring device's failure model.
#[derive(Clone, Debug)]
pub struct PauliChannel {
    pub spec: ChannelSpec,
    pub noise: NoiseConfig,
}

impl PauliChannel {
    pub fn new(spec: ChannelSpec, noise: NoiseConfig) -> Self {
        PauliChannel { spec, noise }
    }

    pub fn noiseless(spec: ChannelSpec) -> Self {
        PauliChannel {
            spec,
            noise: NoiseConfig::noiseless(),
        }
    }
}

impl ProbeChannel for PauliChannel {
    fn num_qubits(&self) -> usize {
        self.spec.n
    }

    #[inline]
    fn measure_into<R: Rng + ?Sized>(
        &self,
        probe: &PauliString,
        rng: &mut R,
        readout: &mut [u64],
        failed: &mut [u64],
    ) -> Result<()> {
        check_len(probe.len(), self.spec.n)?;
        let idx = self.spec.sample_index(rng);
        let c = self.spec.atoms[idx].0.words();
        self.noise.sample_failures(self.spec.n, rng, failed);
        for (w, r) in readout.iter_mut().enumerate() {
            *r = star_word(probe.words()[w], c[w]) & !failed[w];
        }
        Ok(())
    }
}

/// Draws `C ∼ p`.
pub fn sample_outcome<R: Rng + ?Sized>(spec: &ChannelSpec, rng: &mut R) -> PauliString {
    spec.atoms[spec.sample_index(rng)].0.clone()
}

/// A nontrivial probe: `A` must lie in `{1,2,3}ⁿ`.
pub fn probe<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    a: &PauliString,
    noise: NoiseConfig,
    rng: &mut R,
) -> Result<ProbeRecord> {
    check_len(a.len(), spec.n)?;
    if !a.is_nontrivial() {
        return Err(Error::TrivialProbeCoordinate(a.to_string()));
    }
    PauliChannel::new(spec.clone(), noise).measure(a, rng)
}

/// `m` independent probes with uniform nontrivial strings.
pub fn probe_batch<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    m: usize,
    noise: NoiseConfig,
    rng: &mut R,
) -> Result<ProbeBatch> {
    collect_batch(
        &PauliChannel::new(spec.clone(), noise),
        m,
        ProbeFamily::Nontrivial,
        rng,
    )
}

/// `m` independent probes of `channel` with strings drawn uniformly from `family`.
pub fn collect_batch<C: ProbeChannel, R: Rng + ?Sized>(
    channel: &C,
    m: usize,
    family: ProbeFamily,
    rng: &mut R,
) -> Result<ProbeBatch> {
    if m == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    let n = channel.num_qubits();
    let stride = pauli_words(n);
    let mut batch = ProbeBatch::with_capacity(n, family, m);
    let mut a = PauliString::identity(n);
    let mut readout = vec![0u64; stride];
    let mut failed = vec![0u64; stride];
    for _ in 0..m {
        match family {
            ProbeFamily::Nontrivial => a.fill_random_nontrivial(rng),
            ProbeFamily::Extended => a.fill_random(rng),
        }
        channel.measure_into(&a, rng, &mut readout, &mut failed)?;
        batch.push_words(a.words(), &readout, &failed);
    }
    Ok(batch)
}

/// Reinterprets a readout as a probe of the `B`-altered channel:
/// `(A ⋆ B) +₂ R`, which is `A ⋆ (B ⊕ C)`. Failed coordinates read 0.
pub fn reinterpret(record: &ProbeRecord, b: &PauliString) -> Result<BitString> {
    check_len(record.probe.len(), b.len())?;
    check_len(record.readout.len(), b.len())?;
    record
        .probe
        .star(b)?
        .xor(&record.readout)?
        .and_not(&record.failed)
}

/// Borrowed view of one record inside a [`ProbeBatch`], spread layout.
#[derive(Clone, Copy)]
pub(crate) struct RecordView<'a> {
    pub probe: &'a [u64],
    pub readout: &'a [u64],
    pub failed: &'a [u64],
}

/// Probe records stored contiguously, record-major.
///
/// Readouts and failure flags use the spread layout so that they line up
/// word-for-word with the packed probe strings.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeBatch {
    n: usize,
    family: ProbeFamily,
    stride: usize,
    probes: Vec<u64>,
    readouts: Vec<u64>,
    failed: Vec<u64>,
    any_failed: bool,
}

impl ProbeBatch {
    pub fn new(n: usize, family: ProbeFamily) -> Self {
        Self::with_capacity(n, family, 0)
    }

    pub fn with_capacity(n: usize, family: ProbeFamily, m: usize) -> Self {
        let stride = pauli_words(n);
        ProbeBatch {
            n,
            family,
            stride,
            probes: Vec::with_capacity(m * stride),
            readouts: Vec::with_capacity(m * stride),
            failed: Vec::with_capacity(m * stride),
            any_failed: false,
        }
    }

    pub fn from_records<'a>(
        n: usize,
        family: ProbeFamily,
        records: impl IntoIterator<Item = &'a ProbeRecord>,
    ) -> Result<Self> {
        let mut batch = ProbeBatch::new(n, family);
        for r in records {
            batch.push(r)?;
        }
        Ok(batch)
    }

    pub fn push(&mut self, record: &ProbeRecord) -> Result<()> {
        check_len(record.probe.len(), self.n)?;
        check_len(record.readout.len(), self.n)?;
        check_len(record.failed.len(), self.n)?;
        if self.family == ProbeFamily::Nontrivial && !record.probe.is_nontrivial() {
            return Err(Error::TrivialProbeCoordinate(record.probe.to_string()));
        }
        let readout: Vec<u64> = (0..self.stride).map(|w| record.readout.spread_word(w)).collect();
        let failed: Vec<u64> = (0..self.stride).map(|w| record.failed.spread_word(w)).collect();
        self.push_words(record.probe.words(), &readout, &failed);
        Ok(())
    }

    #[inline]
    pub(crate) fn push_words(&mut self, probe: &[u64], readout: &[u64], failed: &[u64]) {
        self.probes.extend_from_slice(probe);
        self.any_failed |= failed.iter().any(|&f| f != 0);
        self.readouts
            .extend(readout.iter().zip(failed).map(|(&r, &f)| r & !f));
        self.failed.extend_from_slice(failed);
    }

    pub fn len(&self) -> usize {
        self.probes.len().checked_div(self.stride).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> ProbeFamily {
        self.family
    }

    /// Whether any coordinate of any record failed.
    pub fn has_failures(&self) -> bool {
        self.any_failed
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }

    /// Probe, readout and failure words, record-major.
    pub(crate) fn raw(&self) -> (&[u64], &[u64], &[u64]) {
        (&self.probes, &self.readouts, &self.failed)
    }

    #[inline]
    pub(crate) fn view(&self, t: usize) -> RecordView<'_> {
        let r = t * self.stride..(t + 1) * self.stride;
        RecordView {
            probe: &self.probes[r.clone()],
            readout: &self.readouts[r.clone()],
            failed: &self.failed[r],
        }
    }

    pub(crate) fn views(&self) -> impl Iterator<Item = RecordView<'_>> + '_ {
        (0..self.len()).map(move |t| self.view(t))
    }

    pub fn record(&self, t: usize) -> ProbeRecord {
        let v = self.view(t);
        ProbeRecord {
            probe: PauliString::from_words(self.n, v.probe).expect("stride matches"),
            readout: BitString::from_spread(self.n, v.readout),
            failed: BitString::from_spread(self.n, v.failed),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = ProbeRecord> + '_ {
        (0..self.len()).map(move |t| self.record(t))
    }

    /// Dump format: a `# n=<n> family=<family>` comment, then one record per
    /// line as `probe readout failedmask` (base-4, binary, binary).
    pub fn to_dump(&self) -> String {
        let mut out = format!("# n={} family={}\n", self.n, self.family.name());
        for rec in self.records() {
            let _ = writeln!(out, "{} {} {}", rec.probe, rec.readout, rec.failed);
        }
        out
    }

    /// Parses [`ProbeBatch::to_dump`] output. Without a family comment the
    /// family is inferred: any probe containing 0 makes the batch extended.
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut family = None;
        for line in text.lines().map(str::trim) {
            if let Some(rest) = line.strip_prefix('#') {
                for token in rest.split_whitespace() {
                    match token {
                        "family=nontrivial" => family = Some(ProbeFamily::Nontrivial),
                        "family=extended" => family = Some(ProbeFamily::Extended),
                        _ => {}
                    }
                }
            }
        }
        let mut records = Vec::new();
        for (lineno, line) in content_lines(text) {
            let mut fields = line.split_whitespace();
            let (Some(a), Some(r), Some(f), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected `probe readout failedmask`"
                )));
            };
            let wrap = |e: Error| Error::Parse(format!("line {lineno}: {e}"));
            let probe: PauliString = a.parse().map_err(wrap)?;
            let readout: BitString = r.parse().map_err(wrap)?;
            let failed: BitString = f.parse().map_err(wrap)?;
            if readout.len() != probe.len() || failed.len() != probe.len() {
                return Err(Error::Parse(format!("line {lineno}: field lengths differ")));
            }
            records.push(ProbeRecord {
                probe,
                readout,
                failed,
            });
        }
        let first = records
            .first()
            .ok_or_else(|| Error::Parse("dump has no records".into()))?;
        let n = first.probe.len();
        let family = family.unwrap_or_else(|| {
            if records.iter().all(|r| r.probe.is_nontrivial()) {
                ProbeFamily::Nontrivial
            } else {
                ProbeFamily::Extended
            }
        });
        let mut batch = ProbeBatch::with_capacity(n, family, records.len());
        for rec in &records {
            batch.push(rec).map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(batch)
    }
}

/// Fraction of coordinates flagged as failed across the batch.
pub fn failure_rate(batch: &ProbeBatch) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let ones: u64 = batch.failed.iter().map(|w| w.count_ones() as u64).sum();
    ones as f64 / (batch.len() * batch.n) as f64
}
