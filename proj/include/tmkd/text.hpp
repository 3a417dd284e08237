#pragma once

// Vocabulary, question/passage pair encoding, JSONL dataset I/O, and the
// deterministic synthetic relevance-task generator.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace tmkd {

// Deterministic draws on top of mt19937_64; std::uniform_*_distribution is
// implementation-defined, so we fix the mapping ourselves.
inline std::uint64_t rng_u64(std::mt19937_64& rng) { return rng(); }
inline int rng_int(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}
inline double rng_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  std::vector<std::string> tokens;  // index = id; [0..3] are specials
  std::unordered_map<std::string, int> ids;

  int size() const { return static_cast<int>(tokens.size()); }
  int token_id(const std::string& tok) const {
    auto it = ids.find(tok);
    return it == ids.end() ? kUnk : it->second;
  }
  // FNV-1a over the ordered token list; identifies a vocab across files.
  std::string hash() const;
};

struct TextRecord {
  std::string id;
  std::string question;
  std::string passage;
  std::optional<int> label;
};

struct EncodedPair {
  std::string pair_id;
  std::vector<int> token_ids;
  std::vector<int> segment_ids;
  std::vector<int> position_ids;
  std::optional<int> golden_label;

  int length() const { return static_cast<int>(token_ids.size()); }
  // index of the SEP token == encoded question length + 1
  int sep_index() const;
};

// lowercase + whitespace split
std::vector<std::string> tokenize(const std::string& text);

Vocabulary build_vocab(const std::vector<TextRecord>& corpus, int max_size);

EncodedPair encode_pair(const std::string& q, const std::string& p, const Vocabulary& vocab,
                        int max_seq_len, std::optional<int> label = std::nullopt,
                        const std::string& pair_id = "");

std::vector<EncodedPair> encode_dataset(const std::vector<TextRecord>& records,
                                        const Vocabulary& vocab, int max_seq_len);

struct SyntheticConfig {
  int vocab_size = 5000;
  int q_len = 6;
  int p_len = 20;
  int overlap_threshold = 4;
  double label_noise = 0.1;
  int n_samples = 1000;
  std::uint64_t seed = 0;
  bool labeled = true;
  std::string id_prefix = "syn";
};

// Longest question subsequence present (in order) in the passage; the
// generator's labeling rule is overlap >= threshold. Exposed so tests can
// recompute labels independently of generation.
int overlap_count(const std::vector<std::string>& q_tokens,
                  const std::vector<std::string>& p_tokens);

std::vector<TextRecord> gen_synthetic(const SyntheticConfig& cfg);

// JSONL: {"id": ..., "question": ..., "passage": ..., "label": 0|1 (optional)}
std::vector<TextRecord> load_dataset(const std::string& path);
void save_dataset(const std::vector<TextRecord>& records, const std::string& path);

}  // namespace tmkd
