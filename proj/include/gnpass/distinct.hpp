#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace gnpass::distinct {

// Exact distinct-line counter. Keeps an in-memory set up to `memory_cap`
// strings; past the cap it spills every line into hash partitions on disk and
// counts each partition with an in-memory set afterwards (two-pass fallback
// for runs whose unique count exceeds casual RAM budgets). Also tallies the
// character-length distribution of the distinct strings, which report tables
// need.
class DistinctCounter {
 public:
  struct Result {
    std::uint64_t n_unique = 0;
    std::map<std::size_t, std::uint64_t> unique_length_counts;
  };

  explicit DistinctCounter(std::size_t memory_cap = kDefaultMemoryCap,
                           std::filesystem::path spill_dir = {});
  ~DistinctCounter();
  DistinctCounter(const DistinctCounter&) = delete;
  DistinctCounter& operator=(const DistinctCounter&) = delete;

  // line must not contain '\n'.
  void add(std::string_view line);

  // Finalizes and releases spill files; call once.
  Result finalize();

  bool spilled() const { return spilled_; }

  static constexpr std::size_t kDefaultMemoryCap = 20'000'000;

 private:
  void spill();

  std::size_t memory_cap_;
  std::filesystem::path spill_dir_;
  std::filesystem::path partition_dir_;
  std::unordered_set<std::string> set_;
  bool spilled_ = false;
  bool finalized_ = false;
  static constexpr std::size_t kPartitions = 64;
  std::vector<std::ofstream> partitions_;
};

}  // namespace gnpass::distinct
