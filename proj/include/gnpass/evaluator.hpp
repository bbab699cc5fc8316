#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "gnpass/corpus.hpp"

namespace gnpass::evaluator {

// Matching accuracy of one generated file against one test set:
//   |set(FG) ∩ set(FT)| / |set(FT)|
// over distinct strings, exact string equality, no normalization.
struct MatchReport {
  std::uint64_t n_generated_total = 0;
  std::uint64_t n_generated_unique = 0;
  std::uint64_t n_test_unique = 0;
  std::uint64_t n_matched = 0;
  double matching_accuracy = 0.0;
  std::uint64_t n_duplicates() const { return n_generated_total - n_generated_unique; }
  double duplicate_ratio() const;

  // Percentages over distinct strings; empty bins stay 0 when nothing matched.
  corpus::LengthHistogram matched_histogram;
  corpus::LengthHistogram generated_histogram;

  std::string test_digest;  // canonical digest of the test set, for comparability
};

// Canonical identity of a test set: sha256 over its sorted distinct members.
std::string test_set_digest(const std::unordered_set<std::string>& test_set);

struct MatchOptions {
  std::vector<corpus::LengthBin> bins = corpus::char10_report_bins();
  std::size_t unique_cap = 20'000'000;       // above this, distinct count spills to disk
  std::filesystem::path spill_dir;           // empty -> system temp dir
};

// Streaming over the generated file; memory is bounded by the test set and the
// distinct counter. Throws DataError on an empty test set.
MatchReport matching_accuracy(const std::filesystem::path& generated_file,
                              const std::unordered_set<std::string>& test_set,
                              const MatchOptions& options = {});

// Same computation over in-memory lines (sweeps sample into memory).
MatchReport matching_accuracy(std::span<const std::string> generated_lines,
                              const std::unordered_set<std::string>& test_set,
                              const MatchOptions& options = {});

// Relative deltas between two reports computed at the same n_generated_total
// against the same test set:
//   matched_uplift       = n_matched_b / n_matched_a - 1
//   duplicate_reduction  = 1 - dup_b / dup_a,  dup = n_total - n_unique
struct ComparisonSummary {
  double matched_uplift = 0.0;
  double duplicate_reduction = 0.0;
  std::uint64_t a_matched = 0, b_matched = 0;
  std::uint64_t a_duplicates = 0, b_duplicates = 0;
  std::uint64_t n_generated_total = 0;
};

ComparisonSummary compare_models(const MatchReport& a, const MatchReport& b);

// Seeded uniform sample of k distinct generated passwords that appear in no
// exclusion set. Throws DataError when fewer than k candidates exist, naming
// the available count.
std::vector<std::string> extract_honeyword_candidates(
    const std::filesystem::path& generated_file,
    std::span<const std::unordered_set<std::string>> exclusion_sets, std::size_t k,
    std::uint64_t seed);

// Report rendering: aligned-column text and machine-readable CSV.
std::string render_match_report_text(const MatchReport& report);
std::string render_match_report_csv(const MatchReport& report);
std::string render_comparison_text(const ComparisonSummary& cmp);
std::string render_comparison_csv(const ComparisonSummary& cmp);

// Loads a test file (dedup, no length filter) for evaluation.
std::unordered_set<std::string> load_test_set(const std::filesystem::path& path,
                                              corpus::EncodingPolicy encoding);

}  // namespace gnpass::evaluator
