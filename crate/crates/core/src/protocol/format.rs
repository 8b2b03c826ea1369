//! Text file formats for public keys and ciphertexts.
//!
//! A public-key file is a `key=value` header followed by one line per group.
//! Ideal keys store the `2^n` phase bits of each group as `0`/`1` characters.
//! Noisy keys store the `2^n x 2^n` density matrix row-major as `re im`
//! pairs printed with 17 significant digits. Encrypting with a key file
//! rewrites it as a header with `status=spent` and no groups.
//!
//! A ciphertext file is a header followed by hex fields. Each of `i` and `j`
//! packs `N` indices of `n` bits, most significant bit first.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use super::cipher::Ciphertext;
use super::keys::PublicKey;
use crate::bits;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::prf::{GroupFunction, Tag};
use crate::simulator::{Density, GroupState, NoiseChannel};

pub const PK_MAGIC: &str = "QPKE-PK v1";
pub const CT_MAGIC: &str = "QPKE-CT v1";

const PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyMode {
    Ideal,
    Noisy,
}

impl KeyMode {
    pub fn name(self) -> &'static str {
        match self {
            KeyMode::Ideal => "ideal",
            KeyMode::Noisy => "noisy",
        }
    }
}

impl FromStr for KeyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<KeyMode> {
        match s {
            "ideal" => Ok(KeyMode::Ideal),
            "noisy" => Ok(KeyMode::Noisy),
            other => Err(Error::Parse(format!("unknown key mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PkHeader {
    pub params: Params,
    pub tag: Tag,
    pub mode: KeyMode,
    pub spent: bool,
}

impl PkHeader {
    fn write_to(&self, out: &mut String) {
        let p = &self.params;
        out.push_str(PK_MAGIC);
        out.push('\n');
        let _ = writeln!(out, "lambda={}", p.security_bits);
        let _ = writeln!(out, "n={}", p.group_qubits);
        let _ = writeln!(out, "N={}", p.groups);
        let _ = writeln!(out, "p={}", p.tag_bits);
        let _ = writeln!(out, "c={}", p.max_keys);
        let _ = writeln!(out, "ell={}", p.message_bits);
        let _ = writeln!(out, "q={}", p.noise);
        let _ = writeln!(out, "tag={}", self.tag.to_hex());
        let _ = writeln!(out, "mode={}", self.mode.name());
        let _ = writeln!(out, "status={}", if self.spent { "spent" } else { "fresh" });
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_to(&mut s);
        s
    }
}

/// Writes a public key one group at a time; only the group being written
/// is resident. `channel` is applied to each group first, which requires
/// noisy mode unless it is noiseless.
pub fn write_public_key<W: Write + ?Sized>(
    out: &mut W,
    pk: &PublicKey,
    mode: KeyMode,
    channel: &NoiseChannel,
) -> Result<()> {
    if mode == KeyMode::Ideal && !channel.is_noiseless() {
        return Err(Error::Format("ideal key files cannot hold noisy groups".into()));
    }
    let header = PkHeader { params: *pk.params(), tag: pk.tag().clone(), mode, spent: pk.is_spent() };
    out.write_all(header.to_text().as_bytes())?;
    if pk.is_spent() {
        return Ok(());
    }
    let mut line = String::new();
    for state in pk.groups() {
        let state = channel.apply(&state?)?;
        line.clear();
        match mode {
            KeyMode::Ideal => write_phase_line(&mut line, &state)?,
            KeyMode::Noisy => write_density_line(&mut line, &state.density()),
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

fn write_phase_line(out: &mut String, state: &GroupState) -> Result<()> {
    let GroupState::Pure(amps) = state else {
        return Err(Error::Format("ideal key files hold only pure phase states".into()));
    };
    let amp = 1.0 / (amps.len() as f64).sqrt();
    let reference = amps[0] / amp;
    for a in amps {
        let rel = a / amp / reference;
        let bit = if (rel - 1.0).norm() < PHASE_TOL {
            '0'
        } else if (rel + 1.0).norm() < PHASE_TOL {
            '1'
        } else {
            return Err(Error::Format("group is not a phase state".into()));
        };
        out.push(bit);
    }
    Ok(())
}

fn write_density_line(out: &mut String, rho: &Density) {
    let d = rho.nrows();
    for r in 0..d {
        for c in 0..d {
            let z = rho[(r, c)];
            if r + c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.16e} {:.16e}", z.re, z.im);
        }
    }
}

/// Parsed key file: the header plus a lazy iterator over group lines.
pub struct PkReader<R> {
    pub header: PkHeader,
    lines: std::io::Lines<R>,
    next: usize,
}

impl<R: BufRead> PkReader<R> {
    /// Reads the header; fails with [`Error::SpentPublicKey`] on a spent key.
    pub fn open(reader: R) -> Result<PkReader<R>> {
        let header = read_pk_header(reader.lines())?;
        if header.0.spent {
            return Err(Error::SpentPublicKey);
        }
        Ok(PkReader { header: header.0, lines: header.1, next: 0 })
    }

    /// Loads every group into memory.
    pub fn into_public_key(self) -> Result<PublicKey> {
        let params = self.header.params;
        let tag = self.header.tag.clone();
        let states = self.collect::<Result<Vec<_>>>()?;
        PublicKey::from_states(params, tag, states)
    }
}

impl<R: BufRead> Iterator for PkReader<R> {
    type Item = Result<GroupState>;

    fn next(&mut self) -> Option<Result<GroupState>> {
        let n = self.header.params.groups;
        if self.next == n {
            return match self.lines.next() {
                None => None,
                Some(Ok(l)) if l.trim().is_empty() => None,
                Some(Ok(_)) => Some(Err(Error::Format("trailing data after the last group".into()))),
                Some(Err(e)) => Some(Err(e.into())),
            };
        }
        let g = self.next;
        self.next += 1;
        let line = match self.lines.next() {
            None => return Some(Err(Error::Length { what: "group records", expected: n, got: g })),
            Some(Err(e)) => return Some(Err(e.into())),
            Some(Ok(l)) => l,
        };
        Some(parse_group(&line, self.header.params.group_qubits, self.header.mode).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("group {g}: {m}")),
            other => other,
        }))
    }
}

fn parse_group(line: &str, qubits: u32, mode: KeyMode) -> Result<GroupState> {
    let d = 1usize << qubits;
    match mode {
        KeyMode::Ideal => {
            if line.len() != d {
                return Err(Error::Parse(format!("expected {d} phase bits, got {}", line.len())));
            }
            let table = line
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("bad phase bit {ch:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(crate::simulator::make_group_state(&GroupFunction::canonical(&table)))
        }
        KeyMode::Noisy => {
            let nums = line
                .split_ascii_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if nums.len() != 2 * d * d {
                return Err(Error::Parse(format!("expected {} numbers, got {}", 2 * d * d, nums.len())));
            }
            let rho = Density::from_fn(d, d, |r, c| {
                let k = 2 * (r * d + c);
                Complex64::new(nums[k], nums[k + 1])
            });
            let state = GroupState::Mixed(rho);
            state.validate()?;
            Ok(state)
        }
    }
}

fn read_header_lines<I>(lines: &mut I, magic: &str, keys: &[&'static str]) -> Result<Vec<String>>
where
    I: Iterator<Item = std::io::Result<String>>,
{
    match lines.next() {
        Some(Ok(l)) if l == magic => {}
        Some(Ok(l)) => return Err(Error::Parse(format!("expected {magic:?}, found {l:?}"))),
        Some(Err(e)) => return Err(e.into()),
        None => return Err(Error::Parse("empty file".into())),
    }
    let mut values = Vec::with_capacity(keys.len());
    for key in keys {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing field {key}")))??;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| Error::Parse(format!("expected field {key}, found {line:?}")))?;
        values.push(value.to_string());
    }
    Ok(values)
}

fn field<T: FromStr>(name: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Parse(format!("field {name}: {e}")))
}

const PK_FIELDS: [&str; 10] = ["lambda", "n", "N", "p", "c", "ell", "q", "tag", "mode", "status"];

fn read_pk_header<I>(mut lines: I) -> Result<(PkHeader, I)>
where
    I: Iterator<Item = std::io::Result<String>>,
{
    let v = read_header_lines(&mut lines, PK_MAGIC, &PK_FIELDS)?;
    let params = Params {
        security_bits: field("lambda", &v[0])?,
        group_qubits: field("n", &v[1])?,
        groups: field("N", &v[2])?,
        tag_bits: field("p", &v[3])?,
        max_keys: field("c", &v[4])?,
        message_bits: field("ell", &v[5])?,
        noise: field("q", &v[6])?,
    };
    params.validate()?;
    let tag = Tag::from_hex(&v[7], params.tag_bits)?;
    let mode = v[8].parse()?;
    let spent = match v[9].as_str() {
        "fresh" => false,
        "spent" => true,
        other => return Err(Error::Parse(format!("unknown status {other:?}"))),
    };
    Ok((PkHeader { params, tag, mode, spent }, lines))
}

/// Reads only the header of a key file, whatever its status.
pub fn read_pk_header_only<R: BufRead>(reader: R) -> Result<PkHeader> {
    read_pk_header(reader.lines()).map(|(h, _)| h)
}

pub fn public_key_to_string(pk: &PublicKey, mode: KeyMode, channel: &NoiseChannel) -> Result<String> {
    let mut buf = Vec::new();
    write_public_key(&mut buf, pk, mode, channel)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn public_key_from_str(text: &str) -> Result<PublicKey> {
    PkReader::open(text.as_bytes())?.into_public_key()
}

const CT_FIELDS: [&str; 14] =
    ["n", "N", "p", "ell", "q", "secure", "syndrome_bits", "tag", "i", "j", "seed", "syndrome", "masked", "end"];

fn pack_indices(values: &[u32], width: u32) -> String {
    let bits: Vec<bool> = values.iter().flat_map(|&v| bits::bits_of(v as u64, width)).collect();
    bits::to_hex(&bits)
}

fn unpack_indices(hex: &str, count: usize, width: u32) -> Result<Vec<u32>> {
    let bits = bits::from_hex(hex, count * width as usize)?;
    Ok(bits
        .chunks(width.max(1) as usize)
        .map(|c| c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .take(count)
        .collect())
}

impl Ciphertext {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(CT_MAGIC);
        s.push('\n');
        let n = self.group_qubits;
        let _ = writeln!(s, "n={n}");
        let _ = writeln!(s, "N={}", self.groups());
        let _ = writeln!(s, "p={}", self.tag_bits);
        let _ = writeln!(s, "ell={}", self.message_bits);
        let _ = writeln!(s, "q={}", self.noise);
        let _ = writeln!(s, "secure={}", self.secure);
        let _ = writeln!(s, "syndrome_bits={}", self.syndrome.len());
        let _ = writeln!(s, "tag={}", self.tag.to_hex());
        let _ = writeln!(s, "i={}", pack_indices(&self.i, n));
        let _ = writeln!(s, "j={}", pack_indices(&self.j, n));
        let _ = writeln!(s, "seed={}", bits::to_hex(&self.seed));
        let _ = writeln!(s, "syndrome={}", bits::to_hex(&self.syndrome));
        let _ = writeln!(s, "masked={}", bits::to_hex(&self.masked));
        s.push_str("end=\n");
        s
    }

    pub fn parse(text: &str) -> Result<Ciphertext> {
        let mut lines = text.lines().map(|l| Ok(l.to_string()));
        let v = read_header_lines(&mut lines, CT_MAGIC, &CT_FIELDS)?;
        if lines.any(|l: std::io::Result<String>| l.map(|l| !l.trim().is_empty()).unwrap_or(true)) {
            return Err(Error::Format("trailing data after ciphertext".into()));
        }
        let group_qubits: u32 = field("n", &v[0])?;
        if !(1..=crate::params::MAX_GROUP_QUBITS).contains(&group_qubits) {
            return Err(Error::Domain(format!("n = {group_qubits} out of range")));
        }
        let groups: usize = field("N", &v[1])?;
        let tag_bits: u32 = field("p", &v[2])?;
        let message_bits: usize = field("ell", &v[3])?;
        if groups == 0 || message_bits == 0 {
            return Err(Error::Domain("N and ell must be positive".into()));
        }
        let noise: f64 = field("q", &v[4])?;
        let secure: bool = field("secure", &v[5])?;
        let syndrome_bits: usize = field("syndrome_bits", &v[6])?;
        let ct = Ciphertext {
            group_qubits,
            tag_bits,
            message_bits,
            noise,
            secure,
            tag: Tag::from_hex(&v[7], tag_bits)?,
            i: unpack_indices(&v[8], groups, group_qubits)?,
            j: unpack_indices(&v[9], groups, group_qubits)?,
            seed: bits::from_hex(&v[10], groups + message_bits - 1)?,
            syndrome: bits::from_hex(&v[11], syndrome_bits)?,
            masked: bits::from_hex(&v[12], message_bits)?,
        };
        if !v[13].is_empty() {
            return Err(Error::Format("unexpected value on the end marker".into()));
        }
        ct.check()?;
        Ok(ct)
    }
}

/// Replaces `path` with `contents` in one rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    write_atomic_with(path, |w| w.write_all(contents).map_err(Error::from))
}

/// Streams into a temporary file beside `path`, then renames it over `path`.
pub fn write_atomic_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::sk_gen_seeded;
    use crate::protocol::{encrypt, pk_gen};
    use rand::SeedableRng;

    fn params(groups: usize) -> Params {
        Params {
            security_bits: 128,
            group_qubits: 3,
            groups,
            tag_bits: 256,
            max_keys: 100_000,
            message_bits: 8,
            noise: 0.05,
        }
    }

    #[test]
    fn ideal_key_round_trip() {
        let sk = sk_gen_seeded(128, 1).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let pk = pk_gen(&sk, &params(12), &mut rng).unwrap();
        let text = public_key_to_string(&pk, KeyMode::Ideal, &NoiseChannel::None).unwrap();
        assert!(text.starts_with("QPKE-PK v1\n"));
        let back = public_key_from_str(&text).unwrap();
        assert_eq!(back.params(), pk.params());
        assert_eq!(back.tag(), pk.tag());
        for (a, b) in back.groups().zip(pk.groups()) {
            assert_eq!(a.unwrap(), b.unwrap());
        }
        assert_eq!(public_key_to_string(&back, KeyMode::Ideal, &NoiseChannel::None).unwrap(), text);
    }

    #[test]
    fn noisy_key_is_bit_exact() {
        let sk = sk_gen_seeded(128, 2).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2);
        let pk = pk_gen(&sk, &params(4), &mut rng).unwrap();
        let ch = NoiseChannel::Depolarizing(0.1);
        let text = public_key_to_string(&pk, KeyMode::Noisy, &ch).unwrap();
        let back = public_key_from_str(&text).unwrap();
        for (a, b) in back.groups().zip(pk.groups()) {
            assert_eq!(a.unwrap(), ch.apply(&b.unwrap()).unwrap());
        }
        assert_eq!(public_key_to_string(&back, KeyMode::Noisy, &NoiseChannel::None).unwrap(), text);
        assert!(public_key_to_string(&pk, KeyMode::Ideal, &ch).is_err());
    }

    #[test]
    fn spent_header_is_refused() {
        let sk = sk_gen_seeded(128, 3).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let mut pk = pk_gen(&sk, &params(4), &mut rng).unwrap();
        encrypt(&mut pk, &[false; 8], &NoiseChannel::None, &mut rng).unwrap();
        let text = public_key_to_string(&pk, KeyMode::Ideal, &NoiseChannel::None).unwrap();
        assert!(text.contains("status=spent\n"));
        assert_eq!(text.lines().count(), 11);
        assert!(matches!(public_key_from_str(&text), Err(Error::SpentPublicKey)));
        assert!(read_pk_header_only(text.as_bytes()).unwrap().spent);
    }

    #[test]
    fn truncated_and_trailing_keys_fail() {
        let sk = sk_gen_seeded(128, 4).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(4);
        let pk = pk_gen(&sk, &params(3), &mut rng).unwrap();
        let text = public_key_to_string(&pk, KeyMode::Ideal, &NoiseChannel::None).unwrap();
        let short: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
        assert!(public_key_from_str(&short).is_err());
        assert!(public_key_from_str(&format!("{text}01010101\n")).is_err());
        let mut bad: Vec<String> = text.lines().map(String::from).collect();
        bad[11].replace_range(0..1, "x");
        assert!(matches!(public_key_from_str(&(bad.join("\n") + "\n")), Err(Error::Parse(_))));
    }

    #[test]
    fn ciphertext_round_trip() {
        let sk = sk_gen_seeded(128, 5).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let mut pk = pk_gen(&sk, &params(977), &mut rng).unwrap();
        let ct = encrypt(
            &mut pk,
            &[true, false, true, true, false, true, false, false],
            &NoiseChannel::PadFlip(0.05),
            &mut rng,
        )
        .unwrap();
        let text = ct.to_text();
        let back = Ciphertext::parse(&text).unwrap();
        assert_eq!(back, ct);
        assert_eq!(back.to_text(), text);
        assert!(Ciphertext::parse(&format!("{text}x\n")).is_err());
        assert!(Ciphertext::parse(&text.replace("n=3", "n=2")).is_err());
    }

    #[test]
    fn index_packing() {
        let v = vec![0, 7, 3, 5, 1];
        let h = pack_indices(&v, 3);
        assert_eq!(unpack_indices(&h, 5, 3).unwrap(), v);
        assert_eq!(pack_indices(&[1, 2], 3), "28");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
    }
}
