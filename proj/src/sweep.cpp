#include "gnpass/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "gnpass/errors.hpp"
#include "gnpass/evaluator.hpp"
#include "gnpass/rng.hpp"
#include "gnpass/sampler.hpp"

namespace gnpass::evaluator {

SweepReport sweep(const trainer::CheckpointStore& store, std::vector<std::uint64_t> iterations,
                  const std::vector<NamedTestSet>& test_sets, const SweepOptions& options) {
  if (test_sets.empty()) throw UsageError("sweep needs at least one test set");
  if (iterations.empty()) iterations = store.iterations();
  if (iterations.empty()) throw DataError("checkpoint store has no checkpoints to sweep");
  std::sort(iterations.begin(), iterations.end());
  iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());

  // Fail on missing checkpoints before any sampling happens.
  const auto available = store.iterations();
  for (const auto it : iterations) {
    if (std::find(available.begin(), available.end(), it) == available.end()) {
      throw DataError("no checkpoint at iteration " + std::to_string(it) + " to sweep");
    }
  }

  SweepReport report;
  report.n_samples_per_checkpoint = options.n_samples;
  for (const auto& ts : test_sets) {
    if (ts.entries.empty()) throw DataError("test set '" + ts.name + "' is empty");
    report.test_names.push_back(ts.name);
  }
  report.rows.resize(iterations.size());

  MatchOptions match_options;
  match_options.bins = options.bins;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    while (true) {
      const auto idx = next.fetch_add(1);
      if (idx >= iterations.size() || failed.load()) break;
      try {
        const auto iteration = iterations[idx];
        auto checkpoint = store.load(iteration);
        auto samples = sampler::sample_strings(checkpoint, store.vocabulary(), options.n_samples,
                                               options.sample_batch,
                                               rng::derive_seed(options.base_seed, iteration));
        SweepRow row;
        row.iteration = iteration;
        for (const auto& ts : test_sets) {
          row.accuracies.push_back(
              matching_accuracy(samples, ts.entries, match_options).matching_accuracy);
        }
        report.rows[idx] = std::move(row);
      } catch (const std::exception& e) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty()) failure = e.what();
      }
    }
  };

  const auto n_threads = std::max<std::size_t>(1, std::min(options.jobs, iterations.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw DataError("sweep failed: " + failure);

  report.best_iteration.assign(test_sets.size(), iterations.front());
  std::vector<double> best(test_sets.size(), -1.0);
  for (const auto& row : report.rows) {
    for (std::size_t t = 0; t < test_sets.size(); ++t) {
      if (row.accuracies[t] > best[t]) {
        best[t] = row.accuracies[t];
        report.best_iteration[t] = row.iteration;
      }
    }
  }
  return report;
}

std::string render_sweep_text(const SweepReport& report) {
  std::string out = "Matching accuracy per checkpoint (" +
                    std::to_string(report.n_samples_per_checkpoint) + " samples each)\n";
  char buf[64];
  std::string header = "  iteration";
  for (const auto& name : report.test_names) {
    std::snprintf(buf, sizeof(buf), " %14s", name.c_str());
    header += buf;
  }
  out += header + '\n';
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "  %9llu", static_cast<unsigned long long>(row.iteration));
    out += buf;
    for (const auto acc : row.accuracies) {
      std::snprintf(buf, sizeof(buf), " %13.4f%%", 100.0 * acc);
      out += buf;
    }
    out += '\n';
  }
  out += "best:";
  for (std::size_t t = 0; t < report.test_names.size(); ++t) {
    out += " " + report.test_names[t] + "@" + std::to_string(report.best_iteration[t]);
  }
  out += '\n';
  return out;
}

std::string render_sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "iteration";
  for (const auto& name : report.test_names) out << ',' << name;
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.iteration;
    for (const auto acc : row.accuracies) out << ',' << acc;
    out << '\n';
  }
  return out.str();
}

}  // namespace gnpass::evaluator
