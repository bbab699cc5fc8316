#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gnpass/trainer.hpp"

namespace gnpass::sampler {

struct SampleJob {
  std::filesystem::path run_dir;  // checkpoint store
  std::uint64_t iteration = 0;
  std::uint64_t n_total = 0;
  std::int64_t batch_size = 1024;
  std::filesystem::path output;
  std::uint64_t seed = 1;
  std::size_t unique_cap = 20'000'000;
  std::filesystem::path spill_dir;  // empty -> system temp
};

struct SampleSummary {
  std::uint64_t n_total = 0;
  std::uint64_t n_unique = 0;
  double duplicate_ratio = 0.0;  // 1 - n_unique / n_total
  std::string output_digest;
};

// Streams exactly n_total decoded passwords to job.output (newline-delimited;
// all-pad rows come out as empty lines and still count). Noise for batch i is
// seeded from (seed, i), so output is byte-reproducible for a fixed job and
// independent of any worker scheduling. Writes a key=value sidecar next to
// the output. Mid-stream write failure raises a DataError reporting how many
// lines were written.
SampleSummary sample(const SampleJob& job);

// In-memory variant used by sweeps and tests; same noise schedule.
std::vector<std::string> sample_strings(const trainer::Checkpoint& checkpoint,
                                        const codec::Vocabulary& vocab, std::uint64_t n_total,
                                        std::int64_t batch_size, std::uint64_t seed);

}  // namespace gnpass::sampler
