use std::fmt::Write as _;

use super::AccessError;
use crate::{
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    crypto::{hash, sym_decrypt, Digest, SymmetricKey},
    ledger::{
        compute_bhat, compute_commitment, BlockId, Chain, DataPtr, OffChainStore, PatientSecrets,
    },
};

/// The three per-block items of a disclosure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisclosedBlock {
    pub sym_key: SymmetricKey,
    pub ptr: DataPtr,
    pub data_digest: Digest,
}

/// Secrets for `k` contiguous blocks of a patient's history: `3k + 2` items.
///
/// Per block: symmetric key, data pointer, data digest. Then `H(b̂_f - 1)` for the first
/// block, and the terminal revelation, which is the last block's nonce together with its
/// id. No other block id and no other nonce appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisclosurePackage {
    pub blocks: Vec<DisclosedBlock>,
    pub prefix_hash: Digest,
    pub last_nonce: [u8; 32],
    pub last_block_id: BlockId,
}

/// One counted item of a package.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackageItem {
    SymKey(SymmetricKey),
    DataPtr(DataPtr),
    DataDigest(Digest),
    PrefixHash(Digest),
    TerminalReveal { nonce: [u8; 32], block_id: BlockId },
}

impl DisclosurePackage {
    const MAGIC: [u8; 4] = *b"AEGP";
    const VERSION: u16 = 1;

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn item_count(&self) -> usize {
        self.items().len()
    }

    pub fn items(&self) -> Vec<PackageItem> {
        let mut items: Vec<PackageItem> = self
            .blocks
            .iter()
            .flat_map(|b| {
                [
                    PackageItem::SymKey(b.sym_key),
                    PackageItem::DataPtr(b.ptr),
                    PackageItem::DataDigest(b.data_digest),
                ]
            })
            .collect();
        items.push(PackageItem::PrefixHash(self.prefix_hash));
        items.push(PackageItem::TerminalReveal {
            nonce: self.last_nonce,
            block_id: self.last_block_id,
        });
        items
    }

    /// Text listing of every item, for handing over or auditing a package.
    pub fn manifest(&self) -> String {
        let hex = |b: &[u8]| b.iter().map(|x| format!("{x:02x}")).collect::<String>();
        let mut out = format!(
            "disclosure package: k={} items={}\n",
            self.k(),
            self.item_count()
        );
        for (i, b) in self.blocks.iter().enumerate() {
            let _ = writeln!(out, "block {i}");
            let _ = writeln!(out, "  sym_key      {}", hex(b.sym_key.as_bytes()));
            let _ = writeln!(out, "  data_ptr     {}", hex(&b.ptr.0));
            let _ = writeln!(out, "  data_digest  {}", b.data_digest);
        }
        let _ = writeln!(out, "prefix_hash    {}", self.prefix_hash);
        let _ = writeln!(out, "last_nonce     {}", hex(&self.last_nonce));
        let _ = writeln!(out, "last_block_id  {}", self.last_block_id);
        out
    }
}

impl Encode for DisclosurePackage {
    fn encode(&self, out: &mut Writer) {
        out.header(Self::MAGIC, Self::VERSION)
            .len(self.blocks.len());
        for b in &self.blocks {
            b.sym_key.encode(out);
            b.ptr.encode(out);
            b.data_digest.encode(out);
        }
        self.prefix_hash.encode(out);
        out.fixed(&self.last_nonce);
        self.last_block_id.encode(out);
    }
}

impl Decode for DisclosurePackage {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.header(Self::MAGIC, Self::VERSION)?;
        let k = input.len(96)?;
        let blocks = (0..k)
            .map(|_| {
                Ok(DisclosedBlock {
                    sym_key: SymmetricKey::decode(input)?,
                    ptr: DataPtr::decode(input)?,
                    data_digest: Digest::decode(input)?,
                })
            })
            .collect::<Result<_, DecodeError>>()?;
        Ok(Self {
            blocks,
            prefix_hash: Digest::decode(input)?,
            last_nonce: input.array()?,
            last_block_id: BlockId::decode(input)?,
        })
    }
}

/// Builds the package for `granted`, which must be a non-empty run of consecutive blocks
/// from the patient's sequence, in order.
pub fn build_disclosure_package(
    secrets: &PatientSecrets,
    granted: &[BlockId],
) -> Result<DisclosurePackage, AccessError> {
    let (first_id, last_id) = match granted {
        [] => return Err(AccessError::EmptySelection),
        [first, .., last] => (first, last),
        [only] => (only, only),
    };
    let first = secrets
        .position(first_id)
        .ok_or(AccessError::UnknownBlock(*first_id))?;
    let owned = secrets.blocks();
    for (offset, id) in granted.iter().enumerate() {
        match owned.get(first + offset) {
            Some(b) if b.block_id == *id => {}
            _ if secrets.position(id).is_none() => return Err(AccessError::UnknownBlock(*id)),
            _ => return Err(AccessError::NonContiguous),
        }
    }
    let run = &owned[first..first + granted.len()];
    let last = run.last().expect("non-empty selection");
    debug_assert_eq!(last.block_id, *last_id);
    Ok(DisclosurePackage {
        blocks: run
            .iter()
            .map(|b| DisclosedBlock {
                sym_key: b.sym_key,
                ptr: b.ptr,
                data_digest: b.data_digest,
            })
            .collect(),
        prefix_hash: secrets.predecessor_bhat(first),
        last_nonce: last.nonce,
        last_block_id: last.block_id,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    /// The replayed chain ends in the commitment of the named terminal block.
    pub chain_ok: bool,
    /// Per block: the record decrypts and hashes to the disclosed digest.
    pub data_ok: Vec<bool>,
    /// First block whose data check failed. Chain failures cannot be localized.
    pub failure_index: Option<usize>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.chain_ok && !self.data_ok.is_empty() && self.data_ok.iter().all(|&ok| ok)
    }
}

/// Researcher-side check of a package against the chain and the off-chain store.
pub fn verify_disclosure(
    package: &DisclosurePackage,
    chain: &Chain,
    store: &OffChainStore,
) -> VerificationReport {
    let head = package.blocks.iter().fold(package.prefix_hash, |prev, b| {
        compute_bhat(&b.sym_key, &b.ptr, &b.data_digest, &prev)
    });
    let chain_ok = !package.blocks.is_empty()
        && chain
            .patient_block(&package.last_block_id)
            .is_some_and(|terminal| {
                terminal.body.commitment == compute_commitment(&head, &package.last_nonce)
            });

    let data_ok: Vec<bool> = package
        .blocks
        .iter()
        .map(|b| {
            store
                .get(&b.ptr)
                .and_then(|ct| sym_decrypt(&b.sym_key, ct).ok())
                .is_some_and(|plain| hash(&plain) == b.data_digest)
        })
        .collect();
    let failure_index = data_ok.iter().position(|ok| !ok);
    VerificationReport {
        chain_ok,
        data_ok,
        failure_index,
    }
}
