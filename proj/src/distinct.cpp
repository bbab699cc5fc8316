#include "gnpass/distinct.hpp"

#include <unistd.h>

#include <functional>
#include <string>
#include <system_error>

#include "gnpass/errors.hpp"
#include "gnpass/corpus.hpp"

namespace gnpass::distinct {

namespace {

std::size_t partition_of(std::string_view line) {
  // Keep the partition index decoupled from unordered_set's bucket hash so a
  // partition's contents still spread across set buckets in pass two.
  const std::uint64_t h = std::hash<std::string_view>{}(line);
  return static_cast<std::size_t>((h * 0x9e3779b97f4a7c15ULL) >> 58);  // top 6 bits
}

}  // namespace

DistinctCounter::DistinctCounter(std::size_t memory_cap, std::filesystem::path spill_dir)
    : memory_cap_(memory_cap), spill_dir_(std::move(spill_dir)) {
  if (spill_dir_.empty()) spill_dir_ = std::filesystem::temp_directory_path();
}

DistinctCounter::~DistinctCounter() {
  if (spilled_ && !partition_dir_.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(partition_dir_, ec);
  }
}

void DistinctCounter::spill() {
  partition_dir_ = spill_dir_ / ("gnpass-distinct-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(reinterpret_cast<std::uintptr_t>(this)));
  std::filesystem::create_directories(partition_dir_);
  partitions_.resize(kPartitions);
  for (std::size_t p = 0; p < kPartitions; ++p) {
    const auto path = partition_dir_ / ("part" + std::to_string(p));
    partitions_[p].open(path, std::ios::binary | std::ios::trunc);
    if (!partitions_[p]) throw DataError("cannot create spill file " + path.string());
  }
  for (const auto& line : set_) {
    partitions_[partition_of(line)] << line << '\n';
  }
  set_.clear();
  spilled_ = true;
}

void DistinctCounter::add(std::string_view line) {
  if (finalized_) throw DataError("DistinctCounter used after finalize");
  if (!spilled_) {
    set_.emplace(line);
    if (set_.size() > memory_cap_) spill();
    return;
  }
  auto& out = partitions_[partition_of(line)];
  out << line << '\n';
  if (!out) throw DataError("spill write failed (disk full?)");
}

DistinctCounter::Result DistinctCounter::finalize() {
  finalized_ = true;
  Result result;
  if (!spilled_) {
    result.n_unique = set_.size();
    for (const auto& line : set_) ++result.unique_length_counts[corpus::password_length(line)];
    set_.clear();
    return result;
  }

  for (std::size_t p = 0; p < kPartitions; ++p) {
    partitions_[p].close();
    const auto path = partition_dir_ / ("part" + std::to_string(p));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot reopen spill file " + path.string());
    std::unordered_set<std::string> part_set;
    std::string line;
    while (std::getline(in, line)) part_set.insert(line);
    result.n_unique += part_set.size();
    for (const auto& s : part_set) ++result.unique_length_counts[corpus::password_length(s)];
  }
  std::error_code ec;
  std::filesystem::remove_all(partition_dir_, ec);
  partition_dir_.clear();
  return result;
}

}  // namespace gnpass::distinct
