#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "gnpass/errors.hpp"
#include "gnpass/utf8.hpp"

namespace gnpass::codec {

// Bijection between characters (code points) and indices. chars is sorted by
// code point and contains the padding symbol exactly once; immutable once
// built.
struct Vocabulary {
  std::vector<char32_t> chars;
  std::size_t pad_index = 0;

  static constexpr char32_t kDefaultPad = U'`';

  std::size_t size() const { return chars.size(); }
  char32_t pad_symbol() const { return chars[pad_index]; }
  char32_t char_at(std::size_t index) const;
  std::optional<std::size_t> index_of(char32_t cp) const;  // binary search
};

// Characters occurring in train plus the pad symbol, sorted by code point.
// Throws DataError when the pad symbol occurs in the data, reporting how many
// passwords collide.
Vocabulary build_vocabulary(std::span<const std::string> train, char32_t pad_symbol);
Vocabulary build_vocabulary(const std::unordered_set<std::string>& train, char32_t pad_symbol);

// Password indices right-padded with pad_index to seq_len. Unknown character
// or over-length input throws DataError naming the offender.
std::vector<std::int32_t> encode(std::string_view password, const Vocabulary& vocab,
                                 std::size_t seq_len);

// Fixed-shape batch encoding. one_hot rows of real passwords are exact {0,1}
// with a single unit entry per position.
struct EncodedBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::size_t vocab_size = 0;
  std::vector<std::int32_t> indices;  // batch * seq_len, row-major
  std::vector<float> one_hot;         // batch * seq_len * vocab_size
};

EncodedBatch encode_batch(std::span<const std::string> passwords, const Vocabulary& vocab,
                          std::size_t seq_len);

// Arg-max per position, then map to characters, then strip every padding
// symbol wherever it occurs. Accepts any real-valued activations (softmax
// probabilities, tanh range, logits); only the per-position arg-max matters.
// row must have seq_len * vocab_size entries; anything else is a shape error.
template <typename T>
std::string decode(std::span<const T> row, const Vocabulary& vocab) {
  const std::size_t v = vocab.size();
  if (v == 0 || row.size() % v != 0) {
    throw DataError("decode: row size " + std::to_string(row.size()) +
                    " is not a multiple of vocabulary size " + std::to_string(v));
  }
  const std::size_t seq_len = row.size() / v;
  std::string out;
  for (std::size_t pos = 0; pos < seq_len; ++pos) {
    const T* cell = row.data() + pos * v;
    std::size_t best = 0;
    for (std::size_t k = 1; k < v; ++k) {
      if (cell[k] > cell[best]) best = k;
    }
    if (best != vocab.pad_index) utf8::append(vocab.chars[best], out);
  }
  return out;
}

// Plaintext persistence: header lines, then one code-point-escaped character
// per line in vocabulary order. Byte-identical for identical vocabularies.
void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocabulary(const std::filesystem::path& path);

}  // namespace gnpass::codec
