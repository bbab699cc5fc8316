#include "gnpass/evaluator.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "gnpass/digest.hpp"
#include "gnpass/distinct.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/rng.hpp"

namespace gnpass::evaluator {

double MatchReport::duplicate_ratio() const {
  if (n_generated_total == 0) return 0.0;
  return 1.0 - static_cast<double>(n_generated_unique) / static_cast<double>(n_generated_total);
}

std::string test_set_digest(const std::unordered_set<std::string>& test_set) {
  std::vector<std::string_view> sorted(test_set.begin(), test_set.end());
  std::sort(sorted.begin(), sorted.end());
  digest::Sha256 h;
  for (const auto& s : sorted) {
    h.update(s);
    h.update("\n");
  }
  return h.hex();
}

namespace {

// Histogram that tolerates an empty count map (all-zero percentages), for the
// matched side of a report where zero matches is a legitimate outcome.
corpus::LengthHistogram histogram_or_zero(const std::map<std::size_t, std::uint64_t>& counts,
                                          std::span<const corpus::LengthBin> bins) {
  std::uint64_t total = 0;
  for (const auto& [len, c] : counts) total += c;
  if (total == 0) {
    corpus::LengthHistogram zero;
    for (const auto& b : bins) zero.emplace_back(b, 0.0);
    return zero;
  }
  return corpus::length_histogram(counts, bins);
}

class MatchAccumulator {
 public:
  MatchAccumulator(const std::unordered_set<std::string>& test_set, const MatchOptions& options)
      : test_set_(test_set),
        counter_(options.unique_cap, options.spill_dir) {
    if (test_set.empty()) throw DataError("matching accuracy needs a non-empty test set");
  }

  void add(const std::string& line) {
    ++n_total_;
    counter_.add(line);
    if (auto it = test_set_.find(line); it != test_set_.end()) {
      matched_.insert(*it);
    }
  }

  MatchReport finish(std::span<const corpus::LengthBin> bins) {
    auto distinct = counter_.finalize();
    MatchReport r;
    r.n_generated_total = n_total_;
    r.n_generated_unique = distinct.n_unique;
    r.n_test_unique = test_set_.size();
    r.n_matched = matched_.size();
    r.matching_accuracy =
        static_cast<double>(r.n_matched) / static_cast<double>(r.n_test_unique);
    std::map<std::size_t, std::uint64_t> matched_counts;
    for (const auto& m : matched_) ++matched_counts[corpus::password_length(m)];
    r.matched_histogram = histogram_or_zero(matched_counts, bins);
    r.generated_histogram = histogram_or_zero(distinct.unique_length_counts, bins);
    r.test_digest = test_set_digest(test_set_);
    return r;
  }

 private:
  const std::unordered_set<std::string>& test_set_;
  std::unordered_set<std::string> matched_;
  distinct::DistinctCounter counter_;
  std::uint64_t n_total_ = 0;
};

}  // namespace

MatchReport matching_accuracy(const std::filesystem::path& generated_file,
                              const std::unordered_set<std::string>& test_set,
                              const MatchOptions& options) {
  std::ifstream in(generated_file, std::ios::binary);
  if (!in) throw DataError("cannot open generated file " + generated_file.string());
  MatchAccumulator acc(test_set, options);
  std::string line;
  while (std::getline(in, line)) acc.add(line);
  if (in.bad()) throw DataError("read failure on " + generated_file.string());
  return acc.finish(options.bins);
}

MatchReport matching_accuracy(std::span<const std::string> generated_lines,
                              const std::unordered_set<std::string>& test_set,
                              const MatchOptions& options) {
  MatchAccumulator acc(test_set, options);
  for (const auto& line : generated_lines) acc.add(line);
  return acc.finish(options.bins);
}

ComparisonSummary compare_models(const MatchReport& a, const MatchReport& b) {
  if (a.n_generated_total != b.n_generated_total) {
    throw DataError("reports are not comparable: generated totals differ (" +
                    std::to_string(a.n_generated_total) + " vs " +
                    std::to_string(b.n_generated_total) + ")");
  }
  if (a.test_digest != b.test_digest) {
    throw DataError("reports are not comparable: different test sets");
  }
  if (a.n_matched == 0) {
    throw DataError("cannot compute matched uplift: baseline report matched 0 passwords");
  }
  if (a.n_duplicates() == 0) {
    throw DataError("cannot compute duplicate reduction: baseline report has 0 duplicates");
  }
  ComparisonSummary cmp;
  cmp.a_matched = a.n_matched;
  cmp.b_matched = b.n_matched;
  cmp.a_duplicates = a.n_duplicates();
  cmp.b_duplicates = b.n_duplicates();
  cmp.n_generated_total = a.n_generated_total;
  cmp.matched_uplift =
      static_cast<double>(b.n_matched) / static_cast<double>(a.n_matched) - 1.0;
  cmp.duplicate_reduction =
      1.0 - static_cast<double>(cmp.b_duplicates) / static_cast<double>(cmp.a_duplicates);
  return cmp;
}

std::vector<std::string> extract_honeyword_candidates(
    const std::filesystem::path& generated_file,
    std::span<const std::unordered_set<std::string>> exclusion_sets, std::size_t k,
    std::uint64_t seed) {
  std::ifstream in(generated_file, std::ios::binary);
  if (!in) throw DataError("cannot open generated file " + generated_file.string());

  std::vector<std::string> eligible;  // first-occurrence order, so deterministic
  std::unordered_set<std::string> seen;
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    any = true;
    bool excluded = false;
    for (const auto& ex : exclusion_sets) {
      if (ex.contains(line)) {
        excluded = true;
        break;
      }
    }
    if (excluded) continue;
    if (!seen.insert(line).second) continue;
    eligible.push_back(line);
  }
  if (!any) throw DataError("generated file is empty: " + generated_file.string());
  if (eligible.size() < k) {
    throw DataError("honeyword shortfall: requested " + std::to_string(k) + " but only " +
                    std::to_string(eligible.size()) + " eligible candidates exist");
  }

  std::mt19937_64 gen(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset in uniform order.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng::bounded(gen, eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(k);
  return eligible;
}

namespace {

std::string histogram_cells_text(const corpus::LengthHistogram& hist) {
  std::string out;
  char buf[64];
  for (const auto& [bin, pct] : hist) {
    std::snprintf(buf, sizeof(buf), "  %-8s %8.3f%%", bin.label().c_str(), pct);
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace

std::string render_match_report_text(const MatchReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 "\n", "Passwords Generated", r.n_generated_total);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 "\n", "Unique Passwords", r.n_generated_unique);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 "\n", "Duplicates", r.n_duplicates());
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %15.6f\n", "Duplicate Ratio", r.duplicate_ratio());
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 "\n", "Test Unique", r.n_test_unique);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %7" PRIu64 " (%.4f%%)\n", "Matched", r.n_matched,
                100.0 * r.matching_accuracy);
  out += buf;
  out += "Length distribution (unique generated):\n";
  out += histogram_cells_text(r.generated_histogram);
  out += "Length distribution (matched):\n";
  out += histogram_cells_text(r.matched_histogram);
  return out;
}

std::string render_match_report_csv(const MatchReport& r) {
  std::ostringstream out;
  out << "key,value\n";
  out << "n_generated_total," << r.n_generated_total << '\n';
  out << "n_generated_unique," << r.n_generated_unique << '\n';
  out << "n_duplicates," << r.n_duplicates() << '\n';
  out << "duplicate_ratio," << r.duplicate_ratio() << '\n';
  out << "n_test_unique," << r.n_test_unique << '\n';
  out << "n_matched," << r.n_matched << '\n';
  out << "matching_accuracy," << r.matching_accuracy << '\n';
  out << "test_digest," << r.test_digest << '\n';
  for (const auto& [bin, pct] : r.generated_histogram) {
    out << "generated_pct_" << bin.label() << ',' << pct << '\n';
  }
  for (const auto& [bin, pct] : r.matched_histogram) {
    out << "matched_pct_" << bin.label() << ',' << pct << '\n';
  }
  return out.str();
}

std::string render_comparison_text(const ComparisonSummary& c) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 "\n", "Passwords Generated", c.n_generated_total);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 " %15" PRIu64 "\n", "Matched (a, b)",
                c.a_matched, c.b_matched);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %15" PRIu64 " %15" PRIu64 "\n", "Duplicates (a, b)",
                c.a_duplicates, c.b_duplicates);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %14.2f%%\n", "Matched uplift", 100.0 * c.matched_uplift);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-22s %14.2f%%\n", "Duplicate reduction",
                100.0 * c.duplicate_reduction);
  out += buf;
  return out;
}

std::string render_comparison_csv(const ComparisonSummary& c) {
  std::ostringstream out;
  out << "key,value\n";
  out << "n_generated_total," << c.n_generated_total << '\n';
  out << "a_matched," << c.a_matched << '\n';
  out << "b_matched," << c.b_matched << '\n';
  out << "a_duplicates," << c.a_duplicates << '\n';
  out << "b_duplicates," << c.b_duplicates << '\n';
  out << "matched_uplift," << c.matched_uplift << '\n';
  out << "duplicate_reduction," << c.duplicate_reduction << '\n';
  return out.str();
}

std::unordered_set<std::string> load_test_set(const std::filesystem::path& path,
                                              corpus::EncodingPolicy encoding) {
  auto loaded = corpus::load_passwords({path, encoding});
  return {loaded.passwords.begin(), loaded.passwords.end()};
}

}  // namespace gnpass::evaluator
