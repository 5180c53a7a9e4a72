//! Token dictionary, canonical Huffman code table, and bit-exact
//! encode/decode for sentence transmission.
//!
//! Transmitter and receiver share the dictionary (it is fixed by the
//! signature) and the code table (built from the transmitter's evidence
//! corpus, reported but not charged as per-message cost). Messages are the
//! canonical token streams of sentences, so bit costs are deterministic.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::fol::{render_tokens, FolError, Formula, Signature};

/// Canonical variable names `v0..v{MAX-1}` included in every dictionary;
/// sentences nested deeper than this cannot be encoded.
pub const MAX_QUANTIFIER_DEPTH: u32 = 8;

const STRUCTURAL: [&str; 11] =
    ["(", ")", ",", ".", "~", "&", "|", "->", "<->", "forall", "exists"];

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("token `{0}` is not in the dictionary")]
    UnknownToken(String),
    #[error("token `{0}` does not occur in the code corpus and has no code word")]
    TokenNotCoded(String),
    #[error("cannot build a code table from an empty corpus")]
    EmptyCorpus,
    #[error("empty bit stream (sentences are nonempty)")]
    EmptyBits,
    #[error("bit stream ends inside a code word")]
    DanglingBits,
    #[error("{0}")]
    Fol(#[from] FolError),
}

/// Ordered token alphabet: structural symbols, canonical variables, then
/// the signature's predicates and entities. Deterministic given the
/// signature; name validation there guarantees the map is bijective.
#[derive(Debug, Clone)]
pub struct TokenDictionary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl TokenDictionary {
    pub fn new(sig: &Signature) -> TokenDictionary {
        let mut tokens: Vec<String> = STRUCTURAL.iter().map(|s| s.to_string()).collect();
        tokens.extend((0..MAX_QUANTIFIER_DEPTH).map(|i| format!("v{i}")));
        tokens.extend(sig.predicates().iter().map(|p| p.name.clone()));
        tokens.extend(sig.entities().iter().cloned());
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        TokenDictionary { tokens, ids }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    /// Canonical token-id sequence of a sentence.
    pub fn tokenize(&self, f: &Formula, sig: &Signature) -> Result<Vec<u32>, CodecError> {
        f.canonical_tokens(sig)
            .into_iter()
            .map(|t| self.id(&t).ok_or(CodecError::UnknownToken(t)))
            .collect()
    }

    /// Renders token ids back to sentence text.
    pub fn detokenize(&self, ids: &[u32]) -> String {
        let tokens: Vec<String> =
            ids.iter().map(|&i| self.tokens[i as usize].clone()).collect();
        render_tokens(&tokens)
    }
}

/// A packed bit string, in append order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    pub fn new() -> Bits {
        Bits::default()
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 1 << (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.bytes[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CodeWord {
    len: u8,
    // Bits packed with the first (most significant) code bit at position
    // len-1, canonical-Huffman style.
    code: u32,
}

/// Canonical Huffman code over the tokens that occur in a corpus.
///
/// Code lengths come from a deterministic Huffman merge (ties resolved by
/// insertion rank), code words from the canonical assignment ordered by
/// (length, token id). A one-token corpus gets a single 1-bit code so the
/// degenerate case stays decodable.
#[derive(Debug, Clone)]
pub struct CodeTable {
    words: Vec<Option<CodeWord>>,
    alphabet: usize,
    coded: usize,
}

impl CodeTable {
    /// Builds from explicit `(token id, frequency)` pairs; zero
    /// frequencies are ignored.
    pub fn from_frequencies(
        dict: &TokenDictionary,
        freqs: &[(u32, u64)],
    ) -> Result<CodeTable, CodecError> {
        let mut by_token = vec![0u64; dict.len()];
        for &(id, f) in freqs {
            by_token[id as usize] += f;
        }
        let coded: Vec<(u32, u64)> = by_token
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0)
            .map(|(i, &f)| (i as u32, f))
            .collect();
        if coded.is_empty() {
            return Err(CodecError::EmptyCorpus);
        }
        let lengths = huffman_lengths(&coded);
        // Canonical assignment: sort by (length, token id), then count up,
        // left-shifting at each length increase.
        let mut order: Vec<(u8, u32)> =
            lengths.iter().map(|&(id, len)| (len, id)).collect();
        order.sort();
        let mut words = vec![None; dict.len()];
        let mut code = 0u32;
        let mut prev_len = order[0].0;
        for (i, &(len, id)) in order.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (len - prev_len);
            }
            prev_len = len;
            words[id as usize] = Some(CodeWord { len, code });
        }
        Ok(CodeTable { words, alphabet: dict.len(), coded: order.len() })
    }

    /// Builds from the token streams of a corpus of sentences.
    pub fn from_corpus<'a, I>(dict: &TokenDictionary, corpus: I) -> Result<CodeTable, CodecError>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut freqs: HashMap<u32, u64> = HashMap::new();
        for seq in corpus {
            for &id in seq {
                *freqs.entry(id).or_insert(0) += 1;
            }
        }
        let pairs: Vec<(u32, u64)> = freqs.into_iter().collect();
        CodeTable::from_frequencies(dict, &pairs)
    }

    /// Code length in bits for a token, if it is coded.
    pub fn length_of(&self, id: u32) -> Option<u8> {
        self.words[id as usize].map(|w| w.len)
    }

    /// Number of tokens that have code words.
    pub fn coded_tokens(&self) -> usize {
        self.coded
    }

    /// Σ 2^-len over all code words; prefix codes satisfy ≤ 1.
    pub fn kraft_sum(&self) -> f64 {
        self.words
            .iter()
            .flatten()
            .map(|w| (0.5f64).powi(w.len as i32))
            .sum()
    }

    /// Deterministic size of the serialized table: one (token id, length)
    /// record per coded token. Reported as shared-setup overhead, not
    /// charged per message.
    pub fn table_bits(&self) -> u64 {
        let id_bits = ceil_log2(self.alphabet) as u64;
        self.coded as u64 * (id_bits + 8)
    }

    pub fn encode(&self, ids: &[u32]) -> Result<Bits, CodecError> {
        let mut bits = Bits::new();
        for &id in ids {
            let w = self.words[id as usize]
                .ok_or_else(|| CodecError::TokenNotCoded(format!("#{id}")))?;
            for i in (0..w.len).rev() {
                bits.push(w.code >> i & 1 == 1);
            }
        }
        Ok(bits)
    }

    /// Encoded length without materializing the bits.
    pub fn cost_bits(&self, ids: &[u32]) -> Result<u64, CodecError> {
        ids.iter()
            .map(|&id| {
                self.words[id as usize]
                    .map(|w| w.len as u64)
                    .ok_or_else(|| CodecError::TokenNotCoded(format!("#{id}")))
            })
            .sum()
    }

    pub fn decode(&self, bits: &Bits) -> Result<Vec<u32>, CodecError> {
        if bits.is_empty() {
            return Err(CodecError::EmptyBits);
        }
        // Walk a trie built from the code words. Prefix-freeness makes the
        // first match unambiguous.
        let trie = self.build_trie();
        let mut out = Vec::new();
        let mut node = 0usize;
        for b in bits.iter() {
            node = trie[node].child[b as usize].ok_or(CodecError::DanglingBits)?;
            if let Some(id) = trie[node].token {
                out.push(id);
                node = 0;
            }
        }
        if node != 0 {
            return Err(CodecError::DanglingBits);
        }
        Ok(out)
    }

    fn build_trie(&self) -> Vec<TrieNode> {
        let mut nodes = vec![TrieNode::default()];
        for (id, w) in self.words.iter().enumerate() {
            let Some(w) = w else { continue };
            let mut at = 0usize;
            for i in (0..w.len).rev() {
                let b = (w.code >> i & 1 == 1) as usize;
                at = match nodes[at].child[b] {
                    Some(next) => next,
                    None => {
                        nodes.push(TrieNode::default());
                        let next = nodes.len() - 1;
                        nodes[at].child[b] = Some(next);
                        next
                    }
                };
            }
            nodes[at].token = Some(id as u32);
        }
        nodes
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TrieNode {
    child: [Option<usize>; 2],
    token: Option<u32>,
}

/// Huffman code lengths for positive-frequency tokens. The merge is
/// deterministic: ties on weight resolve toward earlier-created nodes
/// (leaves in token-id order first).
fn huffman_lengths(freqs: &[(u32, u64)]) -> Vec<(u32, u8)> {
    if freqs.len() == 1 {
        return vec![(freqs[0].0, 1)];
    }
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Node {
        weight: u64,
        rank: u64,
        index: usize,
    }
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    // tree[i] = (left, right) for internal nodes; leaves are 0..n.
    let n = freqs.len();
    let mut children: Vec<(usize, usize)> = Vec::new();
    let mut heap: BinaryHeap<Reverse<Node>> = freqs
        .iter()
        .enumerate()
        .map(|(i, &(_, w))| Reverse(Node { weight: w, rank: i as u64, index: i }))
        .collect();
    let mut next_rank = n as u64;
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        children.push((a.index, b.index));
        heap.push(Reverse(Node {
            weight: a.weight + b.weight,
            rank: next_rank,
            index: n + children.len() - 1,
        }));
        next_rank += 1;
    }
    let root = heap.pop().unwrap().0.index;
    let mut lengths = vec![0u8; n];
    let mut stack = vec![(root, 0u8)];
    while let Some((node, depth)) = stack.pop() {
        if node < n {
            lengths[node] = depth;
        } else {
            let (l, r) = children[node - n];
            stack.push((l, depth + 1));
            stack.push((r, depth + 1));
        }
    }
    freqs.iter().zip(&lengths).map(|(&(id, _), &len)| (id, len)).collect()
}

fn ceil_log2(n: usize) -> u32 {
    debug_assert!(n > 0);
    usize::BITS - (n - 1).leading_zeros()
}

/// Fixed-length baseline: every token costs `ceil(log2 |alphabet|)` bits.
pub fn fixed_cost(ids: &[u32], dict: &TokenDictionary) -> u64 {
    ids.len() as u64 * ceil_log2(dict.len()) as u64
}

/// Encodes a sentence to bits via its canonical token stream.
pub fn encode_sentence(
    f: &Formula,
    sig: &Signature,
    dict: &TokenDictionary,
    table: &CodeTable,
) -> Result<Bits, CodecError> {
    table.encode(&dict.tokenize(f, sig)?)
}

/// Decodes bits back to a sentence: Huffman decode, detokenize, reparse.
pub fn decode_sentence(
    bits: &Bits,
    sig: &Signature,
    dict: &TokenDictionary,
    table: &CodeTable,
) -> Result<Formula, CodecError> {
    let ids = table.decode(bits)?;
    let text = dict.detokenize(&ids);
    Ok(crate::fol::parse(&text, sig)?)
}
