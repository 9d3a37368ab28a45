use std::collections::HashMap;

use super::{Block, BlockId, LedgerError, PatientBlock};
use crate::{
    codec::{Decode, DecodeError, Encode, Reader, Writer},
    consensus::ConsensusResult,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    pub block: Block,
    pub record: ConsensusResult,
}

/// Append-only sequence of approved blocks.
#[derive(Debug, Clone, Default)]
pub struct Chain {
    entries: Vec<ChainEntry>,
    heights: HashMap<BlockId, usize>,
}

impl Chain {
    const MAGIC: [u8; 4] = *b"AEGC";
    const VERSION: u16 = 1;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends `block` at the next height. Only approved consensus records are accepted.
    pub fn append(&mut self, block: Block, record: ConsensusResult) -> Result<usize, LedgerError> {
        if !record.approved {
            return Err(LedgerError::Unapproved);
        }
        let id = block.id();
        if self.heights.contains_key(&id) {
            return Err(LedgerError::DuplicateBlock(id));
        }
        let height = self.entries.len();
        self.heights.insert(id, height);
        self.entries.push(ChainEntry { block, record });
        Ok(height)
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    pub fn entry(&self, height: usize) -> Option<&ChainEntry> {
        self.entries.get(height)
    }

    pub fn height_of(&self, id: &BlockId) -> Option<usize> {
        self.heights.get(id).copied()
    }

    pub fn get(&self, id: &BlockId) -> Option<&Block> {
        self.height_of(id).map(|h| &self.entries[h].block)
    }

    pub fn patient_block(&self, id: &BlockId) -> Option<&PatientBlock> {
        self.get(id).and_then(Block::as_patient)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.entries.iter().map(|e| &e.block)
    }

    pub fn patient_blocks(&self) -> impl Iterator<Item = &PatientBlock> {
        self.blocks().filter_map(Block::as_patient)
    }

    /// One line per block: height, kind, id prefix, and vote tally.
    pub fn summary(&self) -> String {
        let mut out = format!("chain: {} blocks\n", self.entries.len());
        for (height, entry) in self.entries.iter().enumerate() {
            let detail = match &entry.block {
                Block::Patient(b) => format!(
                    "conditions={:?} commitment={}",
                    b.body.conditions.ones().collect::<Vec<_>>(),
                    &b.body.commitment.to_hex()[..16]
                ),
                Block::Request(b) => format!(
                    "parent={} requested={}",
                    b.parent_ptr.short(),
                    b.requested_range
                ),
                Block::Approval(b) => format!(
                    "parent={} granted={}",
                    b.parent_ptr.short(),
                    b.granted_range
                ),
            };
            out.push_str(&format!(
                "{height:>6}  {:<8} {}  votes {}/{}  {detail}\n",
                entry.block.kind(),
                entry.block.id().short(),
                entry.record.approvals,
                entry.record.approvals + entry.record.rejections,
            ));
        }
        out
    }
}

impl Encode for Chain {
    fn encode(&self, out: &mut Writer) {
        out.header(Self::MAGIC, Self::VERSION)
            .len(self.entries.len());
        for entry in &self.entries {
            out.var(&entry.block.to_bytes());
            out.var(&entry.record.to_bytes());
        }
    }
}

impl Decode for Chain {
    fn decode(input: &mut Reader<'_>) -> Result<Self, DecodeError> {
        input.header(Self::MAGIC, Self::VERSION)?;
        let len = input.len(8)?;
        let mut chain = Chain::new();
        for _ in 0..len {
            let block = Block::from_bytes(input.var()?)?;
            let record = ConsensusResult::from_bytes(input.var()?)?;
            chain
                .append(block, record)
                .map_err(|_| DecodeError::Invalid("unapproved or duplicate chain entry"))?;
        }
        Ok(chain)
    }
}
