#include "gnpass/codec.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "gnpass/kv.hpp"

namespace gnpass::codec {

char32_t Vocabulary::char_at(std::size_t index) const {
  if (index >= chars.size()) {
    throw DataError("vocabulary index " + std::to_string(index) + " out of range");
  }
  return chars[index];
}

std::optional<std::size_t> Vocabulary::index_of(char32_t cp) const {
  const auto it = std::lower_bound(chars.begin(), chars.end(), cp);
  if (it == chars.end() || *it != cp) return std::nullopt;
  return static_cast<std::size_t>(it - chars.begin());
}

Vocabulary build_vocabulary(std::span<const std::string> train, char32_t pad_symbol) {
  std::set<char32_t> alphabet;
  std::uint64_t collisions = 0;
  for (const auto& p : train) {
    auto cps = utf8::decode(p);
    if (!cps) throw DataError("training password is not valid UTF-8");
    bool collides = false;
    for (char32_t cp : *cps) {
      alphabet.insert(cp);
      if (cp == pad_symbol) collides = true;
    }
    if (collides) ++collisions;
  }
  if (collisions > 0) {
    throw DataError("padding symbol " + utf8::escape_codepoint(pad_symbol) + " occurs in " +
                    std::to_string(collisions) + " training passwords; pick another pad");
  }
  alphabet.insert(pad_symbol);

  Vocabulary vocab;
  vocab.chars.assign(alphabet.begin(), alphabet.end());
  const auto it = std::lower_bound(vocab.chars.begin(), vocab.chars.end(), pad_symbol);
  vocab.pad_index = static_cast<std::size_t>(it - vocab.chars.begin());
  return vocab;
}

Vocabulary build_vocabulary(const std::unordered_set<std::string>& train, char32_t pad_symbol) {
  std::vector<std::string> v(train.begin(), train.end());
  return build_vocabulary(std::span<const std::string>(v), pad_symbol);
}

std::vector<std::int32_t> encode(std::string_view password, const Vocabulary& vocab,
                                 std::size_t seq_len) {
  auto cps = utf8::decode(password);
  if (!cps) throw DataError("encode: password is not valid UTF-8");
  if (cps->size() > seq_len) {
    throw DataError("encode: password of length " + std::to_string(cps->size()) +
                    " exceeds seq_len " + std::to_string(seq_len));
  }
  std::vector<std::int32_t> out;
  out.reserve(seq_len);
  for (char32_t cp : *cps) {
    auto idx = vocab.index_of(cp);
    if (!idx) {
      throw DataError("encode: character " + utf8::escape_codepoint(cp) +
                      " is not in the vocabulary");
    }
    out.push_back(static_cast<std::int32_t>(*idx));
  }
  out.resize(seq_len, static_cast<std::int32_t>(vocab.pad_index));
  return out;
}

EncodedBatch encode_batch(std::span<const std::string> passwords, const Vocabulary& vocab,
                          std::size_t seq_len) {
  EncodedBatch b;
  b.batch = passwords.size();
  b.seq_len = seq_len;
  b.vocab_size = vocab.size();
  b.indices.reserve(b.batch * seq_len);
  b.one_hot.assign(b.batch * seq_len * b.vocab_size, 0.0f);
  for (std::size_t i = 0; i < passwords.size(); ++i) {
    auto row = encode(passwords[i], vocab, seq_len);
    for (std::size_t pos = 0; pos < seq_len; ++pos) {
      b.indices.push_back(row[pos]);
      b.one_hot[(i * seq_len + pos) * b.vocab_size + static_cast<std::size_t>(row[pos])] = 1.0f;
    }
  }
  return b;
}

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "format=gnpass-vocab-v1\n";
  out << "pad_index=" << vocab.pad_index << '\n';
  out << "size=" << vocab.size() << '\n';
  for (char32_t cp : vocab.chars) out << utf8::escape_codepoint(cp) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "format=gnpass-vocab-v1") {
    throw DataError("unrecognized vocabulary format in " + path.string());
  }
  Vocabulary vocab;
  std::size_t size = 0;
  if (!std::getline(in, line) || line.rfind("pad_index=", 0) != 0) {
    throw DataError("vocabulary missing pad_index header: " + path.string());
  }
  vocab.pad_index = std::stoull(line.substr(10));
  if (!std::getline(in, line) || line.rfind("size=", 0) != 0) {
    throw DataError("vocabulary missing size header: " + path.string());
  }
  size = std::stoull(line.substr(5));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cp = utf8::parse_codepoint(line);
    if (!cp) throw DataError("bad code point escape '" + line + "' in " + path.string());
    vocab.chars.push_back(*cp);
  }
  if (vocab.chars.size() != size || vocab.pad_index >= vocab.chars.size()) {
    throw DataError("vocabulary header disagrees with contents: " + path.string());
  }
  if (!std::is_sorted(vocab.chars.begin(), vocab.chars.end()) ||
      std::adjacent_find(vocab.chars.begin(), vocab.chars.end()) != vocab.chars.end()) {
    throw DataError("vocabulary characters must be sorted and distinct: " + path.string());
  }
  return vocab;
}

}  // namespace gnpass::codec
