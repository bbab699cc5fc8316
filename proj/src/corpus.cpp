#include "gnpass/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gnpass/digest.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/kv.hpp"
#include "gnpass/rng.hpp"
#include "gnpass/utf8.hpp"

namespace gnpass::corpus {

std::string to_string(EncodingPolicy policy) {
  return policy == EncodingPolicy::kStrictUtf8 ? "strict-utf8" : "utf8-with-latin1-fallback";
}

EncodingPolicy encoding_policy_from_string(const std::string& name) {
  if (name == "strict-utf8") return EncodingPolicy::kStrictUtf8;
  if (name == "utf8-with-latin1-fallback" || name == "latin1-fallback") {
    return EncodingPolicy::kUtf8WithLatin1Fallback;
  }
  throw UsageError("unknown encoding policy '" + name + "'");
}

LoadResult load_passwords(const PasswordFile& file) {
  std::ifstream in(file.path, std::ios::binary);
  if (!in) throw DataError("cannot open password file " + file.path.string());

  LoadResult result;
  std::string line;
  while (std::getline(in, line)) {
    ++result.total_lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::decode(line)) {
      result.passwords.push_back(line);
    } else if (file.encoding == EncodingPolicy::kUtf8WithLatin1Fallback) {
      result.passwords.push_back(utf8::encode(utf8::decode_latin1(line)));
    } else {
      ++result.skipped_lines;
    }
  }
  if (in.bad()) throw DataError("read failure on " + file.path.string());
  if (result.passwords.empty()) {
    throw DataError("empty corpus: no decodable lines in " + file.path.string());
  }
  return result;
}

LengthPolicy LengthPolicy::custom(std::size_t min_len, std::size_t max_len) {
  if (min_len == 0 || min_len > max_len) {
    throw UsageError("invalid length policy: need 1 <= min_len <= max_len");
  }
  return {LengthMode::kCustom, min_len, max_len};
}

std::string LengthPolicy::name() const {
  switch (mode) {
    case LengthMode::kChar10:
      return "char10";
    case LengthMode::kChar812:
      return "char812";
    case LengthMode::kCustom:
      return "custom";
  }
  return "custom";
}

LengthPolicy length_policy_from_string(const std::string& name) {
  if (name == "char10") return LengthPolicy::char10();
  if (name == "char812") return LengthPolicy::char812();
  throw UsageError("unknown length policy '" + name + "' (use char10, char812 or custom)");
}

std::size_t password_length(std::string_view password) {
  auto n = utf8::count_codepoints(password);
  return n ? *n : password.size();
}

std::unordered_set<std::string> dedup_and_filter(std::span<const std::string> passwords,
                                                 const LengthPolicy& policy) {
  std::unordered_set<std::string> out;
  out.reserve(passwords.size());
  for (const auto& p : passwords) {
    if (policy.admits(password_length(p))) out.insert(p);
  }
  return out;
}

std::string Ratio::to_string() const {
  return std::to_string(train_part) + ":" + std::to_string(test_part);
}

Ratio Ratio::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw UsageError("ratio must look like '4:1', got '" + text + "'");
  }
  Ratio r;
  try {
    r.train_part = std::stoull(text.substr(0, colon));
    r.test_part = std::stoull(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("ratio must look like '4:1', got '" + text + "'");
  }
  if (r.train_part == 0 || r.test_part == 0) {
    throw UsageError("ratio parts must be positive, got '" + text + "'");
  }
  return r;
}

CorpusSplit split(const std::unordered_set<std::string>& unique, Ratio ratio, std::uint64_t seed,
                  const LengthPolicy& policy) {
  if (unique.size() < 2) {
    throw DataError("insufficient data: need at least 2 unique passwords, have " +
                    std::to_string(unique.size()));
  }
  std::vector<std::string> all(unique.begin(), unique.end());
  std::sort(all.begin(), all.end());  // canonical order before the seeded shuffle
  std::mt19937_64 gen(seed);
  rng::shuffle(all, gen);

  const auto n = all.size();
  auto n_train = static_cast<std::size_t>(
      std::llround(ratio.train_share() * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  CorpusSplit out;
  out.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
  out.policy = policy;
  out.ratio = ratio;
  out.seed = seed;
  return out;
}

bool LengthBin::contains(std::size_t len) const {
  const bool above_lo = lo_inclusive ? len >= lo : len > lo;
  if (!above_lo) return false;
  if (hi_unbounded) return true;
  return hi_inclusive ? len <= hi : len < hi;
}

std::string LengthBin::label() const {
  std::string s;
  s += lo_inclusive ? '[' : '(';
  s += std::to_string(lo);
  s += ',';
  s += hi_unbounded ? "inf" : std::to_string(hi);
  s += hi_unbounded ? ')' : (hi_inclusive ? ']' : ')');
  return s;
}

std::vector<LengthBin> char10_report_bins() {
  return {
      {0, 5, false, true, false},
      {5, 8, false, true, false},
      {8, 10, false, true, false},
      {10, 0, false, false, true},
  };
}

std::vector<LengthBin> corpus_report_bins() {
  // Upper bound of the (10,12] row is inclusive so that 12-character
  // passwords have a bin; the final row is strictly greater than 12.
  return {
      {0, 8, false, false, false},
      {8, 10, true, true, false},
      {10, 12, false, true, false},
      {12, 0, false, false, true},
  };
}

LengthHistogram length_histogram(const std::map<std::size_t, std::uint64_t>& counts_by_length,
                                 std::span<const LengthBin> bins) {
  std::uint64_t total = 0;
  std::vector<std::uint64_t> bin_counts(bins.size(), 0);
  for (const auto& [len, count] : counts_by_length) {
    if (count == 0) continue;
    std::size_t hits = 0;
    std::size_t target = 0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (bins[b].contains(len)) {
        ++hits;
        target = b;
      }
    }
    if (hits == 0) throw DataError("length " + std::to_string(len) + " not covered by any bin");
    if (hits > 1) throw DataError("length " + std::to_string(len) + " covered by multiple bins");
    bin_counts[target] += count;
    total += count;
  }
  if (total == 0) throw DataError("cannot build a length histogram of an empty set");

  LengthHistogram out;
  out.reserve(bins.size());
  for (std::size_t b = 0; b < bins.size(); ++b) {
    out.emplace_back(bins[b],
                     100.0 * static_cast<double>(bin_counts[b]) / static_cast<double>(total));
  }
  return out;
}

LengthHistogram length_histogram(const std::unordered_set<std::string>& passwords,
                                 std::span<const LengthBin> bins) {
  std::map<std::size_t, std::uint64_t> counts;
  for (const auto& p : passwords) ++counts[password_length(p)];
  return length_histogram(counts, bins);
}

namespace {

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

void write_split(const CorpusSplit& split, const std::filesystem::path& dir,
                 const SplitMeta& meta) {
  std::filesystem::create_directories(dir);
  write_lines(dir / "train.txt", split.train);
  write_lines(dir / "test.txt", split.test);

  kv::Record rec;
  rec.set("format", "gnpass-split-v1");
  rec.set("policy", split.policy.name());
  rec.set("min_len", std::to_string(split.policy.min_len));
  rec.set("max_len", std::to_string(split.policy.max_len));
  rec.set("ratio", split.ratio.to_string());
  rec.set("seed", std::to_string(split.seed));
  rec.set("encoding", to_string(meta.encoding));
  rec.set("input_digest", meta.input_digest);
  rec.set("n_input_lines", std::to_string(meta.n_input_lines));
  rec.set("n_skipped_lines", std::to_string(meta.n_skipped_lines));
  rec.set("n_unique_filtered", std::to_string(meta.n_unique_filtered));
  rec.set("n_train", std::to_string(split.train.size()));
  rec.set("n_test", std::to_string(split.test.size()));
  rec.set("train_digest", digest::sha256_file_hex(dir / "train.txt"));
  rec.set("test_digest", digest::sha256_file_hex(dir / "test.txt"));
  kv::write_file(dir / "split.meta", rec);
}

LoadedSplit read_split(const std::filesystem::path& dir) {
  const auto meta_path = dir / "split.meta";
  auto rec = kv::read_file(meta_path);
  if (rec.require("format") != "gnpass-split-v1") {
    throw DataError("unrecognized split format in " + meta_path.string());
  }

  LoadedSplit out;
  const auto policy_name = rec.require("policy");
  const auto min_len = static_cast<std::size_t>(std::stoull(rec.require("min_len")));
  const auto max_len = static_cast<std::size_t>(std::stoull(rec.require("max_len")));
  if (policy_name == "custom") {
    out.policy = LengthPolicy::custom(min_len, max_len);
  } else {
    out.policy = length_policy_from_string(policy_name);
    if (out.policy.min_len != min_len || out.policy.max_len != max_len) {
      throw DataError("split.meta length bounds disagree with policy " + policy_name);
    }
  }
  out.ratio = Ratio::parse(rec.require("ratio"));
  out.seed = std::stoull(rec.require("seed"));
  out.meta.encoding = encoding_policy_from_string(rec.require("encoding"));
  out.meta.input_digest = rec.require("input_digest");
  out.meta.n_input_lines = std::stoull(rec.require("n_input_lines"));
  out.meta.n_skipped_lines = std::stoull(rec.require("n_skipped_lines"));
  out.meta.n_unique_filtered = std::stoull(rec.require("n_unique_filtered"));

  out.train = read_lines(dir / "train.txt");
  out.test = read_lines(dir / "test.txt");
  if (digest::sha256_file_hex(dir / "train.txt") != rec.require("train_digest") ||
      digest::sha256_file_hex(dir / "test.txt") != rec.require("test_digest")) {
    throw DataError("split files in " + dir.string() + " do not match recorded digests");
  }
  return out;
}

}  // namespace gnpass::corpus
