//! Enrollment registries and the condition-code codebook.
//!
//! A trusted third party vets every participant out of band; here enrollment is simply
//! an authorized call that appends the participant's identity key to the registry for
//! its role. Registry order is the ring order used by membership proofs, so an index is
//! stable once assigned.

use std::{collections::HashMap, fmt, fmt::Write as _};

use thiserror::Error;

use crate::{
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    crypto::{get_element, keys_digest, put_element, Digest, Group, Point, Ristretto},
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("key already enrolled in the {role} registry at index {index}")]
    DuplicateKey { role: Role, index: usize },
    #[error("unknown condition code {0:?}")]
    UnknownCondition(String),
    #[error("duplicate condition name {0:?} in codebook")]
    DuplicateCondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Patient,
    Hospital,
    Researcher,
}

impl Role {
    fn tag(self) -> u8 {
        match self {
            Self::Patient => 0,
            Self::Hospital => 1,
            Self::Researcher => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self, DecodeError> {
        match tag {
            0 => Ok(Self::Patient),
            1 => Ok(Self::Hospital),
            2 => Ok(Self::Researcher),
            other => Err(DecodeError::InvalidTag(other)),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Patient => "patient",
            Self::Hospital => "hospital",
            Self::Researcher => "researcher",
        })
    }
}

/// Ordered list of identity public keys for one role.
#[derive(Debug, Clone)]
pub struct Registry {
    role: Role,
    keys: Vec<Point>,
    positions: HashMap<[u8; 32], usize>,
    digest: Digest,
}

impl Registry {
    const MAGIC: [u8; 4] = *b"AEGR";
    const VERSION: u16 = 1;

    pub fn new(role: Role) -> Self {
        Self {
            role,
            keys: Vec::new(),
            positions: HashMap::new(),
            digest: keys_digest::<Ristretto>(&[]),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn keys(&self) -> &[Point] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Digest of the canonical key-list encoding; recomputed on every enrollment.
    pub fn digest(&self) -> Digest {
        self.digest
    }

    pub fn position(&self, key: &Point) -> Option<usize> {
        self.positions
            .get(&Ristretto::element_to_bytes(key))
            .copied()
    }

    pub fn contains(&self, key: &Point) -> bool {
        self.position(key).is_some()
    }

    pub fn enroll(&mut self, key: Point) -> Result<usize, RegistryError> {
        self.enroll_without_digest(key)?;
        self.digest = keys_digest::<Ristretto>(&self.keys);
        Ok(self.keys.len() - 1)
    }

    /// Enrolls a batch and recomputes the digest once.
    pub fn enroll_all(
        &mut self,
        keys: impl IntoIterator<Item = Point>,
    ) -> Result<(), RegistryError> {
        let result = keys
            .into_iter()
            .try_for_each(|key| self.enroll_without_digest(key).map(drop));
        self.digest = keys_digest::<Ristretto>(&self.keys);
        result
    }

    fn enroll_without_digest(&mut self, key: Point) -> Result<usize, RegistryError> {
        let index = self.keys.len();
        let bytes = Ristretto::element_to_bytes(&key);
        if let Some(&existing) = self.positions.get(&bytes) {
            return Err(RegistryError::DuplicateKey {
                role: self.role,
                index: existing,
            });
        }
        self.positions.insert(bytes, index);
        self.keys.push(key);
        Ok(index)
    }

    /// Human-readable listing: one `index  key-hex` line per key.
    pub fn listing(&self) -> String {
        let mut out = format!(
            "{} registry: {} keys, digest {}\n",
            self.role,
            self.keys.len(),
            self.digest
        );
        for (i, key) in self.keys.iter().enumerate() {
            let hex: String = Ristretto::element_to_bytes(key)
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect();
            let _ = writeln!(out, "{i:>8}  {hex}");
        }
        out
    }
}

impl Encode for Registry {
    fn encode(&self, out: &mut Writer) {
        out.header(Self::MAGIC, Self::VERSION).u8(self.role.tag());
        out.len(self.keys.len());
        for key in &self.keys {
            put_element::<Ristretto>(out, key);
        }
    }
}

impl Decode for Registry {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.header(Self::MAGIC, Self::VERSION)?;
        let mut registry = Registry::new(Role::from_tag(input.u8()?)?);
        let len = input.len(32)?;
        let keys = (0..len)
            .map(|_| get_element::<Ristretto>(input))
            .collect::<Result<Vec<_>, _>>()?;
        registry
            .enroll_all(keys)
            .map_err(|_| DecodeError::Invalid("duplicate registry key"))?;
        Ok(registry)
    }
}

/// The three registries miners check proofs and signatures against.
#[derive(Debug, Clone)]
pub struct Registries {
    pub patients: Registry,
    pub hospitals: Registry,
    pub researchers: Registry,
}

impl Registries {
    pub fn new() -> Self {
        Self {
            patients: Registry::new(Role::Patient),
            hospitals: Registry::new(Role::Hospital),
            researchers: Registry::new(Role::Researcher),
        }
    }

    pub fn get(&self, role: Role) -> &Registry {
        match role {
            Role::Patient => &self.patients,
            Role::Hospital => &self.hospitals,
            Role::Researcher => &self.researchers,
        }
    }

    pub fn get_mut(&mut self, role: Role) -> &mut Registry {
        match role {
            Role::Patient => &mut self.patients,
            Role::Hospital => &mut self.hospitals,
            Role::Researcher => &mut self.researchers,
        }
    }
}

impl Default for Registries {
    fn default() -> Self {
        Self::new()
    }
}

/// Fixed-length bit vector of condition codes: lifetime codes first, then visit codes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ConditionBits {
    len: usize,
    bytes: Vec<u8>,
}

impl ConditionBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = Self::zeros(len);
        for i in indices {
            bits.set(i, true);
        }
        bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> bool {
        index < self.len && self.bytes[index / 8] & (0x80 >> (index % 8)) != 0
    }

    /// Panics if `index >= len`.
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(
            index < self.len,
            "bit {index} out of range for {} bits",
            self.len
        );
        let mask = 0x80 >> (index % 8);
        if value {
            self.bytes[index / 8] |= mask;
        } else {
            self.bytes[index / 8] &= !mask;
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

impl fmt::Debug for ConditionBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConditionBits")
            .field("len", &self.len)
            .field("set", &self.ones().collect::<Vec<_>>())
            .finish()
    }
}

impl Encode for ConditionBits {
    fn encode(&self, out: &mut Writer) {
        out.len(self.len).fixed(&self.bytes);
    }
}

impl Decode for ConditionBits {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let len = input.u32()? as usize;
        let bytes = input.take(len.div_ceil(8))?.to_vec();
        let bits = Self { len, bytes };
        // Padding bits past `len` must be zero so the encoding is canonical.
        if len % 8 != 0 && bits.bytes[len / 8] & (0xff >> (len % 8)) != 0 {
            return Err(DecodeError::Invalid("nonzero condition-bit padding"));
        }
        Ok(bits)
    }
}

/// `true` iff every bit set in `mask` is also set in `bits`.
pub fn codes_match(bits: &ConditionBits, mask: &ConditionBits) -> bool {
    bits.len == mask.len && bits.bytes.iter().zip(&mask.bytes).all(|(b, m)| b & m == *m)
}

/// Public mapping from condition names to bit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionCodebook {
    lifetime: Vec<String>,
    visit: Vec<String>,
    positions: HashMap<String, usize>,
}

impl ConditionCodebook {
    const MAGIC: [u8; 4] = *b"AEGK";
    const VERSION: u16 = 1;
    pub const DEFAULT_LIFETIME_CODES: usize = 128;
    pub const DEFAULT_VISIT_CODES: usize = 128;

    pub fn new(lifetime: Vec<String>, visit: Vec<String>) -> Result<Self, RegistryError> {
        let mut positions = HashMap::new();
        for (i, name) in lifetime.iter().chain(&visit).enumerate() {
            if positions.insert(name.clone(), i).is_some() {
                return Err(RegistryError::DuplicateCondition(name.clone()));
            }
        }
        Ok(Self {
            lifetime,
            visit,
            positions,
        })
    }

    /// Codebook with generated names `L000..` and `V000..`.
    pub fn with_sizes(lifetime: usize, visit: usize) -> Self {
        let lifetime = (0..lifetime).map(|i| format!("L{i:03}")).collect();
        let visit = (0..visit).map(|i| format!("V{i:03}")).collect();
        Self::new(lifetime, visit).expect("generated names are unique")
    }

    pub fn lifetime_codes(&self) -> &[String] {
        &self.lifetime
    }

    pub fn visit_codes(&self) -> &[String] {
        &self.visit
    }

    pub fn bit_len(&self) -> usize {
        self.lifetime.len() + self.visit.len()
    }

    /// Encodes the given lifetime and visit conditions. A name must appear in the
    /// matching section of the codebook.
    pub fn encode_codes<S: AsRef<str>>(
        &self,
        lifetime_set: &[S],
        visit_set: &[S],
    ) -> Result<ConditionBits, RegistryError> {
        let mut bits = ConditionBits::zeros(self.bit_len());
        for name in lifetime_set {
            let name = name.as_ref();
            match self.positions.get(name) {
                Some(&i) if i < self.lifetime.len() => bits.set(i, true),
                _ => return Err(RegistryError::UnknownCondition(name.to_owned())),
            }
        }
        for name in visit_set {
            let name = name.as_ref();
            match self.positions.get(name) {
                Some(&i) if i >= self.lifetime.len() => bits.set(i, true),
                _ => return Err(RegistryError::UnknownCondition(name.to_owned())),
            }
        }
        Ok(bits)
    }

    pub fn names_of(&self, bits: &ConditionBits) -> Vec<&str> {
        let all: Vec<&String> = self.lifetime.iter().chain(&self.visit).collect();
        bits.ones()
            .filter_map(|i| all.get(i).map(|s| s.as_str()))
            .collect()
    }
}

impl Default for ConditionCodebook {
    fn default() -> Self {
        Self::with_sizes(Self::DEFAULT_LIFETIME_CODES, Self::DEFAULT_VISIT_CODES)
    }
}

impl Encode for ConditionCodebook {
    fn encode(&self, out: &mut Writer) {
        out.header(Self::MAGIC, Self::VERSION);
        for section in [&self.lifetime, &self.visit] {
            out.len(section.len());
            for name in section {
                out.var(name.as_bytes());
            }
        }
    }
}

impl Decode for ConditionCodebook {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.header(Self::MAGIC, Self::VERSION)?;
        let mut section = || -> Result<Vec<String>, DecodeError> {
            let len = input.len(4)?;
            (0..len)
                .map(|_| {
                    String::from_utf8(input.var()?.to_vec())
                        .map_err(|_| DecodeError::Invalid("condition name is not UTF-8"))
                })
                .collect()
        };
        let lifetime = section()?;
        let visit = section()?;
        Self::new(lifetime, visit).map_err(|_| DecodeError::Invalid("duplicate condition name"))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::crypto::{hash, KeyPair};

    fn key(rng: &mut ChaCha20Rng) -> Point {
        *KeyPair::<Ristretto>::generate(rng).public()
    }

    #[test]
    fn enroll_assigns_stable_indices_and_rejects_duplicates() {
        let mut rng = ChaCha20Rng::seed_from_u64(51);
        let mut reg = Registry::new(Role::Patient);
        let k = key(&mut rng);
        assert_eq!(reg.enroll(k), Ok(0));
        assert_eq!(
            reg.enroll(k),
            Err(RegistryError::DuplicateKey {
                role: Role::Patient,
                index: 0
            })
        );
        assert_eq!(reg.len(), 1);
    }

    #[test]
    fn digest_tracks_every_enrollment() {
        let mut rng = ChaCha20Rng::seed_from_u64(52);
        let mut reg = Registry::new(Role::Hospital);
        let mut encoded = Vec::new();
        let mut previous = reg.digest();
        for i in 0..1000u32 {
            let k = key(&mut rng);
            assert_eq!(reg.enroll(k), Ok(i as usize));
            encoded.extend_from_slice(&Ristretto::element_to_bytes(&k));

            let mut canonical = (i + 1).to_be_bytes().to_vec();
            canonical.extend_from_slice(&encoded);
            assert_eq!(reg.digest(), hash(&canonical));
            assert_ne!(reg.digest(), previous);
            previous = reg.digest();
        }
    }

    #[test]
    fn registry_file_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(53);
        let mut reg = Registry::new(Role::Researcher);
        reg.enroll_all((0..5).map(|_| key(&mut rng))).unwrap();
        let back = Registry::from_bytes(&reg.to_bytes()).unwrap();
        assert_eq!(back.keys(), reg.keys());
        assert_eq!(back.digest(), reg.digest());
        assert_eq!(back.role(), Role::Researcher);
        assert!(reg.listing().lines().count() == 6);
    }

    #[test]
    fn empty_sets_encode_to_zero_and_unknown_names_fail() {
        let book = ConditionCodebook::default();
        let none: [&str; 0] = [];
        let bits = book.encode_codes(&none, &none).unwrap();
        assert_eq!(bits.len(), 256);
        assert_eq!(bits.ones().count(), 0);
        assert!(codes_match(&bits, &bits));

        assert_eq!(
            book.encode_codes(&["L999"], &[]),
            Err(RegistryError::UnknownCondition("L999".into()))
        );
        // Visit codes are not accepted as lifetime codes.
        assert!(book.encode_codes(&["V000"], &[]).is_err());

        let bits = book.encode_codes(&["L003"], &["V001"]).unwrap();
        assert_eq!(bits.ones().collect::<Vec<_>>(), [3, 129]);
        assert_eq!(book.names_of(&bits), ["L003", "V001"]);
    }

    #[test]
    fn match_agrees_with_set_inclusion_over_all_8_bit_pairs() {
        let book = ConditionCodebook::with_sizes(4, 4);
        let names: Vec<String> = book
            .lifetime_codes()
            .iter()
            .chain(book.visit_codes())
            .cloned()
            .collect();
        let encode = |set: u8| {
            let chosen = |range: std::ops::Range<usize>| -> Vec<&str> {
                range
                    .filter(|i| set & (1 << i) != 0)
                    .map(|i| names[i].as_str())
                    .collect()
            };
            book.encode_codes(&chosen(0..4), &chosen(4..8)).unwrap()
        };
        for v in 0..=255u8 {
            let bits = encode(v);
            for m in 0..=255u8 {
                let inclusion = (0..8).all(|i| m & (1 << i) == 0 || v & (1 << i) != 0);
                assert_eq!(
                    codes_match(&bits, &encode(m)),
                    inclusion,
                    "v={v:08b} m={m:08b}"
                );
            }
        }
    }

    #[test]
    fn condition_bits_reject_dirty_padding() {
        let bits = ConditionBits::from_indices(5, [0, 4]);
        let mut bytes = bits.to_bytes();
        assert_eq!(ConditionBits::from_bytes(&bytes).unwrap(), bits);
        *bytes.last_mut().unwrap() |= 0x01;
        assert!(ConditionBits::from_bytes(&bytes).is_err());
    }

    #[test]
    fn codebook_round_trip() {
        let book = ConditionCodebook::new(
            vec!["diabetes".into(), "asthma".into()],
            vec!["fracture".into()],
        )
        .unwrap();
        assert_eq!(
            ConditionCodebook::from_bytes(&book.to_bytes()).unwrap(),
            book
        );
        assert!(ConditionCodebook::new(vec!["a".into()], vec!["a".into()]).is_err());
    }
}
