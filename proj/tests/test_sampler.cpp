#include <optional>
#include <set>

#include "gnpass/codec.hpp"
#include "gnpass/kv.hpp"
#include "gnpass/rng.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/evaluator.hpp"
#include "gnpass/sampler.hpp"
#include "gnpass/sweep.hpp"
#include "gnpass/trainer.hpp"
#include "support/tmpdir.hpp"

// torch's c10 logging CHECK aborts the process; doctest's must win in test code.
#undef CHECK
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

using namespace gnpass;
using testing::TempDir;
using trainer::CheckpointStore;

namespace {

// Store with a single random-init checkpoint at iteration 0: the sampling
// surface without any training cost.
struct UntrainedRun {
  explicit UntrainedRun(std::int64_t seq_len = 10) {
    std::vector<std::string> alphabet_carrier = {
        "abcdefghijklmnopqrstuvwxyz", "0123456789", "pass word"};
    vocab = codec::build_vocabulary(alphabet_carrier, U'`');
    model.layer_dim = 12;
    model.noise_dim = 8;
    model.seq_len = seq_len;
    model.vocab_size = static_cast<std::int64_t>(vocab.size());
    model.n_residual_blocks = 2;

    trainer::TrainConfig train_cfg;
    train_cfg.seed = 77;
    torch::manual_seed(123);
    store.emplace(CheckpointStore::create(dir.path(), model, train_cfg, vocab));
    trainer::Checkpoint ckpt;
    ckpt.iteration = 0;
    ckpt.model = model;
    ckpt.generator = gan::Generator(model);
    ckpt.discriminator = gan::Discriminator(model);
    store->save(ckpt);
  }

  TempDir dir;
  codec::Vocabulary vocab;
  gan::ModelConfig model;
  std::optional<CheckpointStore> store;
};

std::vector<std::string> read_all_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("sample writes exactly n_total lines and reports exact uniqueness") {
  UntrainedRun run;
  sampler::SampleJob job;
  job.run_dir = run.dir.path();
  job.iteration = 0;
  job.n_total = 1000;
  job.batch_size = 128;
  job.output = run.dir.file("out.txt");
  job.seed = 5;

  auto summary = sampler::sample(job);
  auto lines = read_all_lines(job.output);
  CHECK(lines.size() == 1000);
  CHECK(summary.n_total == 1000);
  CHECK(summary.n_unique <= 1000);

  // Sort-and-count oracle over the emitted file.
  std::set<std::string> distinct(lines.begin(), lines.end());
  CHECK(summary.n_unique == distinct.size());
  CHECK(summary.duplicate_ratio ==
        doctest::Approx(1.0 - static_cast<double>(distinct.size()) / 1000.0));

  // Random-init checkpoints rarely collide: uniqueness near 1.
  CHECK(static_cast<double>(summary.n_unique) / 1000.0 > 0.95);

  // No padding symbol, and every line respects the length bound.
  for (const auto& line : lines) {
    CHECK(line.find('`') == std::string::npos);
    CHECK(corpus::password_length(line) <= static_cast<std::size_t>(run.model.seq_len));
  }

  // Sidecar echoes the summary.
  auto rec = kv::read_file(job.output.string() + ".summary");
  CHECK(rec.require("n_total") == "1000");
  CHECK(rec.require("n_unique") == std::to_string(summary.n_unique));
  CHECK(rec.require("output_digest") == summary.output_digest);
}

TEST_CASE("same job twice yields byte-identical output") {
  UntrainedRun run;
  sampler::SampleJob job;
  job.run_dir = run.dir.path();
  job.iteration = 0;
  job.n_total = 500;
  job.batch_size = 64;
  job.seed = 9;
  job.output = run.dir.file("a.txt");
  auto s1 = sampler::sample(job);
  job.output = run.dir.file("b.txt");
  auto s2 = sampler::sample(job);
  CHECK(testing::read_bytes(run.dir.file("a.txt")) == testing::read_bytes(run.dir.file("b.txt")));
  CHECK(s1.output_digest == s2.output_digest);
  CHECK(s1.n_unique == s2.n_unique);
}

TEST_CASE("in-memory sampling matches the streamed file") {
  UntrainedRun run;
  sampler::SampleJob job;
  job.run_dir = run.dir.path();
  job.iteration = 0;
  job.n_total = 300;
  job.batch_size = 128;
  job.seed = 31;
  job.output = run.dir.file("file.txt");
  sampler::sample(job);

  auto ckpt = run.store->load(0);
  auto in_memory = sampler::sample_strings(ckpt, run.vocab, 300, 128, 31);
  CHECK(in_memory == read_all_lines(job.output));
}

TEST_CASE("tiny unique cap forces the spill fallback and keeps counts exact") {
  UntrainedRun run(3);  // short sequences collide often
  sampler::SampleJob job;
  job.run_dir = run.dir.path();
  job.iteration = 0;
  job.n_total = 5000;
  job.batch_size = 512;
  job.seed = 13;
  job.unique_cap = 50;
  job.output = run.dir.file("out.txt");
  job.spill_dir = run.dir.path();
  auto summary = sampler::sample(job);
  std::set<std::string> oracle;
  for (const auto& l : read_all_lines(job.output)) oracle.insert(l);
  CHECK(summary.n_unique == oracle.size());
}

TEST_CASE("unwritable output path and bad job parameters fail cleanly") {
  UntrainedRun run;
  sampler::SampleJob job;
  job.run_dir = run.dir.path();
  job.iteration = 0;
  job.n_total = 10;
  job.output = run.dir.path() / "no_such_dir" / "out.txt";
  CHECK_THROWS_AS(sampler::sample(job), DataError);
  job.output = run.dir.file("ok.txt");
  job.n_total = 0;
  CHECK_THROWS_AS(sampler::sample(job), UsageError);
  job.n_total = 10;
  job.batch_size = 0;
  CHECK_THROWS_AS(sampler::sample(job), UsageError);
  job.batch_size = 8;
  job.iteration = 777;  // no such checkpoint
  CHECK_THROWS_AS(sampler::sample(job), DataError);
}

TEST_CASE("sweep scores every checkpoint against every test set") {
  UntrainedRun run(4);
  // Two fabricated test sets: one from actual generator output (guaranteed
  // hits), one disjoint.
  auto ckpt = run.store->load(0);
  auto probe = sampler::sample_strings(ckpt, run.vocab, 2000, 256, rng::derive_seed(1, 0));
  std::unordered_set<std::string> hits;
  for (std::size_t i = 0; i < probe.size() && hits.size() < 50; i += 7) {
    if (!probe[i].empty()) hits.insert(probe[i]);
  }
  REQUIRE(!hits.empty());
  std::unordered_set<std::string> misses = {"@@never1@@", "@@never2@@"};

  std::vector<evaluator::NamedTestSet> sets;
  sets.push_back({"hits", hits});
  sets.push_back({"misses", misses});

  evaluator::SweepOptions options;
  options.n_samples = 2000;
  options.sample_batch = 256;
  options.base_seed = 1;
  auto report = evaluator::sweep(*run.store, {}, sets, options);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].iteration == 0);
  REQUIRE(report.rows[0].accuracies.size() == 2);
  CHECK(report.rows[0].accuracies[0] > 0.0);
  CHECK(report.rows[0].accuracies[1] == doctest::Approx(0.0));
  CHECK(report.best_iteration == std::vector<std::uint64_t>{0, 0});

  auto csv = evaluator::render_sweep_csv(report);
  CHECK(csv.find("iteration,hits,misses") == 0);
  auto text = evaluator::render_sweep_text(report);
  CHECK(text.find("hits") != std::string::npos);
}

TEST_CASE("identical checkpoint files give identical sweep accuracies") {
  // Two stores whose iteration-0 files are literal copies.
  UntrainedRun run;
  TempDir clone_dir;
  std::filesystem::copy(run.dir.path(), clone_dir.path(),
                        std::filesystem::copy_options::recursive |
                            std::filesystem::copy_options::overwrite_existing);
  auto clone = CheckpointStore::open(clone_dir.path());

  auto ckpt = run.store->load(0);
  auto probe = sampler::sample_strings(ckpt, run.vocab, 500, 128, rng::derive_seed(42, 0));
  std::unordered_set<std::string> target;
  for (const auto& s : probe) {
    if (!s.empty()) target.insert(s);
  }
  REQUIRE(!target.empty());
  std::vector<evaluator::NamedTestSet> sets = {{"t", target}};

  evaluator::SweepOptions options;
  options.n_samples = 500;
  options.sample_batch = 128;
  options.base_seed = 42;
  auto r1 = evaluator::sweep(*run.store, {0}, sets, options);
  auto r2 = evaluator::sweep(clone, {0}, sets, options);
  CHECK(r1.rows[0].accuracies[0] == r2.rows[0].accuracies[0]);
}

TEST_CASE("sweep runs its cells on worker threads when asked") {
  UntrainedRun run;
  // Second checkpoint: same store, new tag.
  trainer::Checkpoint extra;
  extra.iteration = 10;
  extra.model = run.model;
  torch::manual_seed(321);
  extra.generator = gan::Generator(run.model);
  extra.discriminator = gan::Discriminator(run.model);
  run.store->save(extra);

  std::unordered_set<std::string> target = {"@@none@@"};
  std::vector<evaluator::NamedTestSet> sets = {{"t", target}};
  evaluator::SweepOptions serial, parallel;
  serial.n_samples = parallel.n_samples = 400;
  serial.sample_batch = parallel.sample_batch = 128;
  serial.base_seed = parallel.base_seed = 3;
  serial.jobs = 1;
  parallel.jobs = 2;
  auto r1 = evaluator::sweep(*run.store, {}, sets, serial);
  auto r2 = evaluator::sweep(*run.store, {}, sets, parallel);
  REQUIRE(r1.rows.size() == 2);
  CHECK(r1.rows[0].iteration == 0);
  CHECK(r1.rows[1].iteration == 10);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].accuracies == r2.rows[i].accuracies);
  }
}

TEST_CASE("sweep rejects missing checkpoints and empty test sets") {
  UntrainedRun run;
  std::vector<evaluator::NamedTestSet> sets = {{"t", {"x"}}};
  CHECK_THROWS_AS(evaluator::sweep(*run.store, {999}, sets, {}), DataError);
  std::vector<evaluator::NamedTestSet> empty_set = {{"t", {}}};
  CHECK_THROWS_AS(evaluator::sweep(*run.store, {0}, empty_set, {}), DataError);
  CHECK_THROWS_AS(evaluator::sweep(*run.store, {0}, {}, {}), UsageError);
}
