//! Dense ground truth for small general channels.
//!
//! Qubit `j` is the most significant tensor factor: it is bit `n−1−j` of a
//! computational-basis index. Symbols map to `σ_0 = I`, `σ_1 = X`,
//! `σ_2 = Y`, `σ_3 = Z`.

use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix};
use rand::Rng;

use crate::channel::{content_lines, parse_header_value, ChannelSpec, ProbeChannel};
use crate::error::{check_len, Error, Result};
use crate::pauli::{BitString, PauliString, SYMBOLS_PER_WORD};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const MAX_DENSE_QUBITS: usize = 6;
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;
/// Rates below this are dropped from extracted specs.
pub const RATE_FLOOR: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// The 2×2 Pauli matrix for one symbol.
pub fn single_pauli(s: u8) -> CMatrix {
    let e = match s {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("symbol {s} out of range"),
    };
    CMatrix::from_row_slice(2, 2, &e)
}

/// `σ_A` as a dense matrix, built as a Kronecker product.
pub fn pauli_matrix(a: &PauliString) -> CMatrix {
    a.symbols()
        .fold(CMatrix::identity(1, 1), |acc, s| acc.kronecker(&single_pauli(s)))
}

/// `σ_C|x⟩ = phase·|x ⊕ flip⟩`; returns `flip` and the phase for each `x`.
fn pauli_action(c: &PauliString) -> (usize, Vec<C64>) {
    let n = c.len();
    let dim = 1usize << n;
    let mut flip = 0usize;
    for (j, s) in c.symbols().enumerate() {
        if s == 1 || s == 2 {
            flip |= 1 << (n - 1 - j);
        }
    }
    let phases = (0..dim)
        .map(|x| {
            c.symbols().enumerate().fold(ONE, |acc, (j, s)| {
                let bit = (x >> (n - 1 - j)) & 1;
                let sign = if bit == 1 { -ONE } else { ONE };
                match s {
                    2 => acc * I * sign,
                    3 => acc * sign,
                    _ => acc,
                }
            })
        })
        .collect();
    (flip, phases)
}

/// `α_C = 2⁻ⁿ·tr(σ_C† K)`, the coefficient of `σ_C` in `K`.
pub fn pauli_coefficient(k: &CMatrix, c: &PauliString) -> C64 {
    let (flip, phases) = pauli_action(c);
    let dim = k.nrows();
    let mut tr = ZERO;
    for (x, ph) in phases.iter().enumerate() {
        tr += ph.conj() * k[(x ^ flip, x)];
    }
    tr / dim as f64
}

/// A channel given by Kraus operators, `Λρ = Σ_j K_j ρ K_j†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(n: usize, ops: Vec<CMatrix>) -> Result<Self> {
        check_qubits(n)?;
        if ops.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let dim = 1usize << n;
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.nrows().max(k.ncols()),
                });
            }
        }
        let sum = ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let deviation = (sum - CMatrix::identity(dim, dim)).camax();
        if deviation > COMPLETENESS_TOLERANCE {
            return Err(Error::IncompleteChannel(deviation));
        }
        Ok(KrausChannel { n, ops })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        KrausChannel::new(n, vec![CMatrix::identity(dim, dim)])
    }

    /// The mixed-unitary channel with operators `√p(C)·σ_C`.
    pub fn from_pauli_spec(spec: &ChannelSpec) -> Result<Self> {
        let n = spec.num_qubits();
        check_qubits(n)?;
        let ops = spec
            .atoms()
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(c, p)| pauli_matrix(c) * C64::new(p.sqrt(), 0.0))
            .collect();
        KrausChannel::new(n, ops)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// Text form: `n=<int>`, `ops=<k>`, then the `4ⁿ` entries of each
    /// operator in row-major order, one `a+bi` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (l1, h1) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header n=<int>".into()))?;
        let n = parse_header_value(h1, "n", l1)?;
        let (l2, h2) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header ops=<int>".into()))?;
        let k = parse_header_value(h2, "ops", l2)?;
        check_qubits(n).map_err(|e| Error::Parse(e.to_string()))?;
        let dim = 1usize << n;
        let mut entries = Vec::with_capacity(k * dim * dim);
        for (lineno, line) in lines {
            entries.push(parse_complex(line).map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?);
        }
        if entries.len() != k * dim * dim {
            return Err(Error::Parse(format!(
                "expected {} entries for {k} operators, found {}",
                k * dim * dim,
                entries.len()
            )));
        }
        let ops = entries
            .chunks(dim * dim)
            .map(|c| CMatrix::from_row_slice(dim, dim, c))
            .collect();
        KrausChannel::new(n, ops)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\nops={}\n", self.n, self.ops.len());
        for k in &self.ops {
            for i in 0..k.nrows() {
                for j in 0..k.ncols() {
                    let z = k[(i, j)];
                    let sign = if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
                        '-'
                    } else {
                        '+'
                    };
                    let _ = writeln!(out, "{}{}{}i", z.re, sign, z.im.abs());
                }
            }
        }
        out
    }
}

/// Parses `a+bi`, `a-bi`, `a`, or `bi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad complex number {s:?}"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(num(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let im = &body[i..];
            let im = if im == "+" || im == "-" {
                format!("{im}1")
            } else {
                im.to_string()
            };
            Ok(C64::new(num(&body[..i])?, num(&im)?))
        }
        None => {
            let im = match body {
                "" | "+" => "1",
                "-" => "-1",
                other => other,
            };
            Ok(C64::new(0.0, num(im)?))
        }
    }
}

/// Pauli error rates of the channel's twirl: `p(C) = Σ_j |α_{j,C}|²`.
pub fn pauli_error_rates(channel: &KrausChannel) -> Result<ChannelSpec> {
    let n = channel.n;
    let mut atoms = Vec::new();
    let mut total = 0.0;
    for idx in 0..(1u64 << (2 * n)) {
        let c = PauliString::from_index(n, idx);
        let p: f64 = channel
            .ops
            .iter()
            .map(|k| pauli_coefficient(k, &c).norm_sqr())
            .sum();
        total += p;
        if p >= RATE_FLOOR {
            atoms.push((c, p));
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::IncompleteChannel((total - 1.0).abs()));
    }
    ChannelSpec::normalized(n, atoms)
}

/// A density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (1e-10) and positivity
    /// (eigenvalues above −1e-8).
    pub fn new(n: usize, rho: CMatrix) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rho.nrows().max(rho.ncols()),
            });
        }
        let herm = (&rho - rho.adjoint()).camax();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = rho.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-8 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix { n, rho })
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(n: usize, psi: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        DensityMatrix::new(n, &v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        DensityMatrix::new(n, CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }
}

fn apply_ops(ops: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let dim = rho.nrows();
    ops.iter()
        .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k * rho * k.adjoint())
}

pub fn apply_channel(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.n != channel.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << channel.n,
            got: 1 << rho.n,
        });
    }
    DensityMatrix::new(channel.n, apply_ops(&channel.ops, &rho.rho))
}

/// `(I + s·σ_a)/2` with `s = +1` for sign bit 0 and `−1` for sign bit 1.
fn eigenprojector(a: u8, minus: bool) -> CMatrix {
    let s = if minus { -0.5 } else { 0.5 };
    (CMatrix::identity(2, 2) * C64::new(0.5, 0.0)) + single_pauli(a) * C64::new(s, 0.0)
}

/// Product of single-qubit eigenstates of `σ_{A_j}` with sign `(−1)^{signs_j}`.
pub fn prepare_probe_state(a: &PauliString, signs: &BitString) -> Result<DensityMatrix> {
    check_len(a.len(), signs.len())?;
    check_qubits(a.len())?;
    if !a.is_nontrivial() {
        return Err(Error::TrivialProbeCoordinate(a.to_string()));
    }
    let rho = a
        .symbols()
        .zip(signs.bits())
        .fold(CMatrix::identity(1, 1), |acc, (s, minus)| {
            acc.kronecker(&eigenprojector(s, minus))
        });
    DensityMatrix::new(a.len(), rho)
}

/// `op` acting on qubit `j` of `n`, identity elsewhere.
fn embed(op: &CMatrix, j: usize, n: usize) -> CMatrix {
    let left = CMatrix::identity(1 << j, 1 << j);
    let right = CMatrix::identity(1 << (n - 1 - j), 1 << (n - 1 - j));
    left.kronecker(op).kronecker(&right)
}

/// Measures each qubit in turn in the eigenbasis of `σ_{A_j}`, collapsing
/// the state after each outcome. Bit `j` is 1 for the −1 outcome.
fn measure_sequential<R: Rng + ?Sized>(a: &PauliString, mut rho: CMatrix, rng: &mut R) -> Vec<bool> {
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for (j, s) in a.symbols().enumerate() {
        let plus = embed(&eigenprojector(s, false), j, n);
        let p_plus = (&plus * &rho).trace().re.clamp(0.0, 1.0);
        let minus = rng.random::<f64>() >= p_plus;
        let proj = if minus {
            embed(&eigenprojector(s, true), j, n)
        } else {
            plus
        };
        let prob = if minus { 1.0 - p_plus } else { p_plus };
        rho = &proj * rho * &proj / C64::new(prob.max(f64::MIN_POSITIVE), 0.0);
        out.push(minus);
    }
    out
}

/// One twirled probe of a general channel: draw `T` uniformly, prepare the
/// probe state with signs `A ⋆ T`, apply the channel, measure every qubit in
/// its `A` basis, and add `A ⋆ T` to the outcomes.
pub fn twirl_probe<R: Rng + ?Sized>(
    channel: &KrausChannel,
    a: &PauliString,
    rng: &mut R,
) -> Result<crate::channel::ProbeRecord> {
    let n = channel.n;
    check_len(a.len(), n)?;
    let t = PauliString::random(n, rng);
    let signs = a.star(&t)?;
    let rho = prepare_probe_state(a, &signs)?;
    let out = measure_sequential(a, apply_ops(&channel.ops, &rho.rho), rng);
    let outcome = BitString::from_bits(&out);
    Ok(crate::channel::ProbeRecord {
        probe: a.clone(),
        readout: outcome.xor(&signs)?,
        failed: BitString::zeros(n),
    })
}

/// Probe access to a general channel through [`twirl_probe`].
#[derive(Clone, Debug)]
pub struct TwirledChannel {
    pub channel: KrausChannel,
}

impl TwirledChannel {
    pub fn new(channel: KrausChannel) -> Self {
        TwirledChannel { channel }
    }
}

impl ProbeChannel for TwirledChannel {
    fn num_qubits(&self) -> usize {
        self.channel.n
    }

    fn measure_into<R: Rng + ?Sized>(
        &self,
        probe: &PauliString,
        rng: &mut R,
        readout: &mut [u64],
        failed: &mut [u64],
    ) -> Result<()> {
        let rec = twirl_probe(&self.channel, probe, rng)?;
        failed.fill(0);
        readout.fill(0);
        for (j, bit) in rec.readout.bits().enumerate() {
            if bit {
                readout[j / SYMBOLS_PER_WORD] |= 1 << (2 * (j % SYMBOLS_PER_WORD));
            }
        }
        Ok(())
    }
}
