#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "gnpass/corpus.hpp"
#include "gnpass/trainer.hpp"

// Checkpoint sweep lives with the evaluator interfaces but needs the
// torch-side sampler, so it is declared here and built into the gan library.
namespace gnpass::evaluator {

struct NamedTestSet {
  std::string name;
  std::unordered_set<std::string> entries;
};

struct SweepRow {
  std::uint64_t iteration = 0;
  std::vector<double> accuracies;  // one per test set, in test_names order
};

struct SweepReport {
  std::vector<std::string> test_names;
  std::vector<SweepRow> rows;                 // iterations strictly increasing
  std::vector<std::uint64_t> best_iteration;  // arg-max accuracy per test set
  std::uint64_t n_samples_per_checkpoint = 0;
};

struct SweepOptions {
  std::uint64_t n_samples = 100'000;
  std::int64_t sample_batch = 1024;
  std::uint64_t base_seed = 1;
  std::size_t jobs = 1;
  std::vector<corpus::LengthBin> bins = corpus::char10_report_bins();
};

// For each checkpoint iteration: sample n_samples passwords with a fixed
// per-checkpoint seed schedule and score them against every test set.
// Independent (checkpoint, test set) cells may run on options.jobs threads;
// the report is assembled in iteration order either way. Empty iteration list
// means every checkpoint in the store.
SweepReport sweep(const trainer::CheckpointStore& store, std::vector<std::uint64_t> iterations,
                  const std::vector<NamedTestSet>& test_sets, const SweepOptions& options);

std::string render_sweep_text(const SweepReport& report);
std::string render_sweep_csv(const SweepReport& report);

}  // namespace gnpass::evaluator
