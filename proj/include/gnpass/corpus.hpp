#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace gnpass::corpus {

enum class EncodingPolicy { kStrictUtf8, kUtf8WithLatin1Fallback };

std::string to_string(EncodingPolicy policy);
EncodingPolicy encoding_policy_from_string(const std::string& name);

struct PasswordFile {
  std::filesystem::path path;
  EncodingPolicy encoding = EncodingPolicy::kStrictUtf8;
};

struct LoadResult {
  std::vector<std::string> passwords;  // file order, duplicates preserved
  std::uint64_t total_lines = 0;
  std::uint64_t skipped_lines = 0;  // failed decoding under the policy
};

// One password per newline-delimited line; a '\r' directly before '\n' is
// treated as part of the terminator. All other whitespace is preserved
// verbatim. Throws DataError on a missing file or when no line decodes.
LoadResult load_passwords(const PasswordFile& file);

enum class LengthMode { kChar10, kChar812, kCustom };

// Length bounds in decoded characters, inclusive on both ends.
struct LengthPolicy {
  LengthMode mode = LengthMode::kChar10;
  std::size_t min_len = 1;
  std::size_t max_len = 10;

  static LengthPolicy char10() { return {LengthMode::kChar10, 1, 10}; }
  static LengthPolicy char812() { return {LengthMode::kChar812, 8, 12}; }
  static LengthPolicy custom(std::size_t min_len, std::size_t max_len);

  bool admits(std::size_t len) const { return len >= min_len && len <= max_len; }
  std::string name() const;
};

LengthPolicy length_policy_from_string(const std::string& name);

// Distinct inputs whose character count lies within the policy bounds.
std::unordered_set<std::string> dedup_and_filter(std::span<const std::string> passwords,
                                                 const LengthPolicy& policy);

// Train:test proportions, e.g. 4:1.
struct Ratio {
  std::uint64_t train_part = 4;
  std::uint64_t test_part = 1;

  double train_share() const {
    return static_cast<double>(train_part) / static_cast<double>(train_part + test_part);
  }
  std::string to_string() const;
  static Ratio parse(const std::string& text);  // "4:1"
};

struct CorpusSplit {
  std::vector<std::string> train;  // unique, disjoint from test
  std::vector<std::string> test;
  LengthPolicy policy;
  Ratio ratio;
  std::uint64_t seed = 0;
};

// Canonical order -> seeded shuffle -> cut at round(share * n). Deterministic
// across platforms for a given seed. Throws DataError when |unique| < 2.
CorpusSplit split(const std::unordered_set<std::string>& unique, Ratio ratio, std::uint64_t seed,
                  const LengthPolicy& policy);

// Half-open/closed length range; hi is ignored when unbounded.
struct LengthBin {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool lo_inclusive = false;
  bool hi_inclusive = true;
  bool hi_unbounded = false;

  bool contains(std::size_t len) const;
  std::string label() const;  // e.g. "(0,5]", "[8,10]", "(12,inf)"
};

// Report bins used for generated-password tables: (0,5] (5,8] (8,10] (10,inf).
std::vector<LengthBin> char10_report_bins();
// Report bins used for corpus tables: (0,8) [8,10] (10,12) (12,inf).
std::vector<LengthBin> corpus_report_bins();

using LengthHistogram = std::vector<std::pair<LengthBin, double>>;

// Percentages per bin; sums to 100 within fp rounding. Throws DataError when a
// length is uncovered (naming it), covered twice, or the input is empty.
LengthHistogram length_histogram(const std::map<std::size_t, std::uint64_t>& counts_by_length,
                                 std::span<const LengthBin> bins);
LengthHistogram length_histogram(const std::unordered_set<std::string>& passwords,
                                 std::span<const LengthBin> bins);

// Character count of an already-decoded password (falls back to byte length
// only if the string is not valid UTF-8, which loaders never produce).
std::size_t password_length(std::string_view password);

struct SplitMeta {
  std::string input_digest;
  std::uint64_t n_input_lines = 0;
  std::uint64_t n_skipped_lines = 0;
  std::uint64_t n_unique_filtered = 0;
  EncodingPolicy encoding = EncodingPolicy::kStrictUtf8;
};

// Writes train.txt, test.txt and split.meta into dir.
void write_split(const CorpusSplit& split, const std::filesystem::path& dir,
                 const SplitMeta& meta);

struct LoadedSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  LengthPolicy policy;
  Ratio ratio;
  std::uint64_t seed = 0;
  SplitMeta meta;
};

LoadedSplit read_split(const std::filesystem::path& dir);

}  // namespace gnpass::corpus
