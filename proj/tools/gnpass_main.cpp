// gnpass: gradient-normalized GAN password guessing pipeline.
//
// Subcommands: prepare, train, sample, eval, sweep, honeywords.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
// Progress goes to stderr; data goes to files.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gnpass/codec.hpp"
#include "gnpass/config.hpp"
#include "gnpass/corpus.hpp"
#include "gnpass/digest.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/evaluator.hpp"
#include "gnpass/kv.hpp"
#include "gnpass/rng.hpp"
#include "gnpass/sampler.hpp"
#include "gnpass/sweep.hpp"
#include "gnpass/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using gnpass::DataError;
using gnpass::NumericError;
using gnpass::UsageError;
using gnpass::config::RunConfig;
using gnpass::config::Source;

// One CLI option per config key; values flow through RunConfig::apply so the
// file/flag/default precedence and provenance stay in one place.
struct ConfigBinding {
  RunConfig* cfg = nullptr;
  std::vector<std::pair<std::string, std::string>> pending;  // key, raw value

  void bind(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    app->add_option_function<std::string>(
           flag, [this, key](const std::string& value) { pending.emplace_back(key, value); },
           help)
        ->type_name("VALUE");
  }
  void bind_flag(CLI::App* app, const std::string& flag, const std::string& key,
                 const std::string& help) {
    app->add_flag_callback(
        flag, [this, key]() { pending.emplace_back(key, "true"); }, help);
  }
  void commit() {
    for (const auto& [key, value] : pending) cfg->apply(key, value, Source::kFlag);
  }
};

std::string required_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required ") + flag);
  return value;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::vector<gnpass::corpus::LengthBin> bins_for(const RunConfig& cfg) {
  return cfg.bins == "corpus" ? gnpass::corpus::corpus_report_bins()
                              : gnpass::corpus::char10_report_bins();
}

void write_manifest(const fs::path& path, const std::string& command, const RunConfig& cfg,
                    const gnpass::kv::Record& inputs) {
  gnpass::kv::Record rec;
  rec.set("format", "gnpass-manifest-v1");
  rec.set("command", command);
  for (const auto& [k, v] : inputs.items()) rec.set(k, v);
  const auto echo = cfg.echo();
  for (const auto& [k, v] : echo.items()) rec.set("config." + k, v);
  gnpass::kv::write_file(path, rec);
}

void progress(const RunConfig& cfg, const std::string& line) {
  if (cfg.verbose) std::cerr << line << '\n';
}

// --- prepare ---------------------------------------------------------------

int cmd_prepare(RunConfig& cfg) {
  const auto in_path = required_path(cfg.in, "--in");
  const auto out_dir = fs::path(required_path(cfg.out, "--out"));
  const auto policy = cfg.length_policy();  // validates before any I/O
  const auto ratio = cfg.split_ratio();
  const auto encoding = cfg.encoding_policy();

  auto loaded = gnpass::corpus::load_passwords({in_path, encoding});
  progress(cfg, "loaded " + std::to_string(loaded.passwords.size()) + " passwords (" +
                    std::to_string(loaded.skipped_lines) + " skipped)");
  auto unique = gnpass::corpus::dedup_and_filter(loaded.passwords, policy);
  auto split = gnpass::corpus::split(unique, ratio, cfg.seed, policy);

  gnpass::corpus::SplitMeta meta;
  meta.input_digest = gnpass::digest::sha256_file_hex(in_path);
  meta.n_input_lines = loaded.total_lines;
  meta.n_skipped_lines = loaded.skipped_lines;
  meta.n_unique_filtered = unique.size();
  meta.encoding = encoding;
  gnpass::corpus::write_split(split, out_dir, meta);

  gnpass::kv::Record inputs;
  inputs.set("input", in_path);
  inputs.set("input_digest", meta.input_digest);
  inputs.set("n_train", std::to_string(split.train.size()));
  inputs.set("n_test", std::to_string(split.test.size()));
  write_manifest(out_dir / "prepare.manifest", "prepare", cfg, inputs);
  progress(cfg, "wrote split: " + std::to_string(split.train.size()) + " train / " +
                    std::to_string(split.test.size()) + " test");
  return 0;
}

// --- train -----------------------------------------------------------------

int cmd_train(RunConfig& cfg) {
  const auto split_dir = fs::path(required_path(cfg.split, "--split"));
  const auto out_dir = fs::path(required_path(cfg.out, "--out"));
  const auto pad = cfg.pad_symbol();
  gnpass::gan::ModelConfig model;
  model.layer_dim = static_cast<std::int64_t>(cfg.layer_dim);
  model.noise_dim = static_cast<std::int64_t>(cfg.noise_dim);
  model.n_residual_blocks = static_cast<std::int64_t>(cfg.blocks);
  model.objective = gnpass::gan::objective_from_string(cfg.objective);

  gnpass::trainer::TrainConfig train_cfg;
  train_cfg.batch_size = static_cast<std::int64_t>(cfg.batch_size);
  train_cfg.iterations = static_cast<std::int64_t>(cfg.iterations);
  train_cfg.n_critic = static_cast<std::int64_t>(cfg.n_critic);
  train_cfg.adam_lr = cfg.adam_lr;
  train_cfg.adam_beta1 = cfg.adam_beta1;
  train_cfg.adam_beta2 = cfg.adam_beta2;
  train_cfg.checkpoint_every = static_cast<std::int64_t>(cfg.checkpoint_every);
  train_cfg.seed = cfg.seed;
  train_cfg.gp_lambda = cfg.gp_lambda;
  train_cfg.signed_one_hot = cfg.signed_one_hot;
  train_cfg.validate();  // flag combinations rejected before any file I/O

  auto split = gnpass::corpus::read_split(split_dir);
  model.seq_len = cfg.seq_len != 0 ? static_cast<std::int64_t>(cfg.seq_len)
                                   : static_cast<std::int64_t>(split.policy.max_len);
  auto vocab = gnpass::codec::build_vocabulary(split.train, pad);
  model.vocab_size = static_cast<std::int64_t>(vocab.size());

  gnpass::kv::Record extra;
  extra.set("command", "train");
  extra.set("split_dir", split_dir.string());
  extra.set("split_train_digest", gnpass::digest::sha256_file_hex(split_dir / "train.txt"));
  extra.set("split_test_digest", gnpass::digest::sha256_file_hex(split_dir / "test.txt"));
  const auto echo = cfg.echo();
  for (const auto& [k, v] : echo.items()) extra.set("config." + k, v);

  auto store = gnpass::trainer::CheckpointStore::create(out_dir, model, train_cfg, vocab, extra);
  auto result = gnpass::trainer::train(split.train, vocab, model, train_cfg, store,
                                       cfg.verbose ? &std::cerr : nullptr);
  std::cerr << "trained " << result.generator_updates << " generator iterations ("
            << result.discriminator_updates << " discriminator updates), checkpoints: "
            << store.iterations().size() << '\n';
  return 0;
}

// --- sample ----------------------------------------------------------------

int cmd_sample(RunConfig& cfg, std::uint64_t iteration, std::uint64_t n) {
  gnpass::sampler::SampleJob job;
  job.run_dir = required_path(cfg.run, "--run");
  job.iteration = iteration;
  job.n_total = n;
  job.batch_size = static_cast<std::int64_t>(cfg.sample_batch);
  job.output = required_path(cfg.out, "--out");
  job.seed = cfg.seed;
  job.unique_cap = cfg.unique_cap;

  auto summary = gnpass::sampler::sample(job);
  gnpass::kv::Record inputs;
  inputs.set("run_dir", job.run_dir.string());
  inputs.set("iteration", std::to_string(iteration));
  inputs.set("n_total", std::to_string(summary.n_total));
  inputs.set("n_unique", std::to_string(summary.n_unique));
  inputs.set("output", job.output.string());
  inputs.set("output_digest", summary.output_digest);
  write_manifest(job.output.string() + ".manifest", "sample", cfg, inputs);
  std::cerr << "sampled " << summary.n_total << " passwords, " << summary.n_unique
            << " unique (duplicate ratio " << summary.duplicate_ratio << ")\n";
  return 0;
}

// --- eval ------------------------------------------------------------------

int cmd_eval(RunConfig& cfg) {
  const auto generated = fs::path(required_path(cfg.generated, "--generated"));
  const auto test_path = fs::path(required_path(cfg.test, "--test"));
  const auto out_prefix = required_path(cfg.out, "--out");
  const auto bins = bins_for(cfg);

  auto test_set = gnpass::evaluator::load_test_set(test_path, cfg.encoding_policy());
  gnpass::evaluator::MatchOptions options;
  options.bins = bins;
  options.unique_cap = cfg.unique_cap;
  auto report = gnpass::evaluator::matching_accuracy(generated, test_set, options);

  std::ofstream text(out_prefix + ".txt", std::ios::binary | std::ios::trunc);
  text << gnpass::evaluator::render_match_report_text(report);
  std::ofstream csv(out_prefix + ".csv", std::ios::binary | std::ios::trunc);
  csv << gnpass::evaluator::render_match_report_csv(report);
  if (!text || !csv) throw DataError("cannot write report files at prefix " + out_prefix);

  gnpass::kv::Record inputs;
  inputs.set("generated", generated.string());
  inputs.set("generated_digest", gnpass::digest::sha256_file_hex(generated));
  inputs.set("test", test_path.string());
  inputs.set("test_digest", report.test_digest);
  inputs.set("n_matched", std::to_string(report.n_matched));
  inputs.set("matching_accuracy", std::to_string(report.matching_accuracy));
  write_manifest(out_prefix + ".manifest", "eval", cfg, inputs);
  std::cerr << "matched " << report.n_matched << " of " << report.n_test_unique
            << " test passwords (accuracy " << report.matching_accuracy << ")\n";
  return 0;
}

// --- sweep -----------------------------------------------------------------

int cmd_sweep(RunConfig& cfg, const std::vector<std::string>& test_flags,
              const std::string& iterations_csv) {
  const auto run_dir = fs::path(required_path(cfg.run, "--run"));
  const auto out_prefix = required_path(cfg.out, "--out");
  std::vector<std::string> test_paths = test_flags;
  if (test_paths.empty()) test_paths = split_list(cfg.test);
  if (test_paths.empty()) throw UsageError("missing required --test");

  std::vector<std::uint64_t> iterations;
  for (const auto& tok : split_list(iterations_csv)) iterations.push_back(std::stoull(tok));

  std::vector<gnpass::evaluator::NamedTestSet> test_sets;
  gnpass::kv::Record inputs;
  inputs.set("run_dir", run_dir.string());
  for (const auto& p : test_paths) {
    gnpass::evaluator::NamedTestSet ts;
    ts.name = fs::path(p).filename().string();
    ts.entries = gnpass::evaluator::load_test_set(p, cfg.encoding_policy());
    inputs.set("test_digest." + ts.name, gnpass::evaluator::test_set_digest(ts.entries));
    test_sets.push_back(std::move(ts));
  }

  auto store = gnpass::trainer::CheckpointStore::open(run_dir);
  gnpass::evaluator::SweepOptions options;
  options.n_samples = cfg.sweep_samples;
  options.sample_batch = static_cast<std::int64_t>(cfg.sample_batch);
  options.base_seed = cfg.seed;
  options.jobs = cfg.jobs;
  options.bins = bins_for(cfg);
  auto report = gnpass::evaluator::sweep(store, iterations, test_sets, options);

  std::ofstream text(out_prefix + ".txt", std::ios::binary | std::ios::trunc);
  text << gnpass::evaluator::render_sweep_text(report);
  std::ofstream csv(out_prefix + ".csv", std::ios::binary | std::ios::trunc);
  csv << gnpass::evaluator::render_sweep_csv(report);
  if (!text || !csv) throw DataError("cannot write sweep files at prefix " + out_prefix);

  for (std::size_t t = 0; t < report.test_names.size(); ++t) {
    inputs.set("best_iteration." + report.test_names[t],
               std::to_string(report.best_iteration[t]));
  }
  write_manifest(out_prefix + ".manifest", "sweep", cfg, inputs);
  std::cerr << "swept " << report.rows.size() << " checkpoints over " << test_sets.size()
            << " test sets\n";
  return 0;
}

// --- honeywords ------------------------------------------------------------

int cmd_honeywords(RunConfig& cfg, const std::vector<std::string>& exclude_flags) {
  const auto generated = fs::path(required_path(cfg.generated, "--generated"));
  const auto out_path = fs::path(required_path(cfg.out, "--out"));
  std::vector<std::string> exclude_paths = exclude_flags;
  if (exclude_paths.empty()) exclude_paths = split_list(cfg.exclude);

  std::vector<std::unordered_set<std::string>> exclusion;
  gnpass::kv::Record inputs;
  inputs.set("generated", generated.string());
  inputs.set("generated_digest", gnpass::digest::sha256_file_hex(generated));
  for (const auto& p : exclude_paths) {
    exclusion.push_back(gnpass::evaluator::load_test_set(p, cfg.encoding_policy()));
    inputs.set("exclude_digest." + fs::path(p).filename().string(),
               gnpass::evaluator::test_set_digest(exclusion.back()));
  }

  auto picks = gnpass::evaluator::extract_honeyword_candidates(
      generated, exclusion, static_cast<std::size_t>(cfg.k), cfg.seed);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + out_path.string());
  for (const auto& p : picks) out << p << '\n';
  if (!out) throw DataError("write failed: " + out_path.string());

  inputs.set("k", std::to_string(cfg.k));
  inputs.set("output", out_path.string());
  inputs.set("output_digest", gnpass::digest::sha256_file_hex(out_path));
  write_manifest(out_path.string() + ".manifest", "honeywords", cfg, inputs);
  std::cerr << "wrote " << picks.size() << " honeyword candidates\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  ConfigBinding bind;
  bind.cfg = &cfg;

  CLI::App app{"gradient-normalized GAN password guessing pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file")->type_name("FILE");
  bind.bind(&app, "--seed", "seed", "base RNG seed");
  bind.bind(&app, "--jobs", "jobs", "worker threads for sweep cells");
  bind.bind_flag(&app, "--verbose", "verbose", "progress detail on stderr");

  auto* prepare = app.add_subcommand("prepare", "dedup, filter and split a password file");
  bind.bind(prepare, "--in", "in", "raw newline-delimited password file");
  bind.bind(prepare, "--out", "out", "output split directory");
  bind.bind(prepare, "--mode", "mode", "char10 | char812 | custom");
  bind.bind(prepare, "--min-len", "min_len", "minimum length (custom mode)");
  bind.bind(prepare, "--max-len", "max_len", "maximum length (custom mode)");
  bind.bind(prepare, "--ratio", "ratio", "train:test ratio, e.g. 4:1");
  bind.bind(prepare, "--encoding", "encoding", "strict-utf8 | latin1-fallback");

  auto* train = app.add_subcommand("train", "adversarial training with checkpoints");
  bind.bind(train, "--split", "split", "split directory from prepare");
  bind.bind(train, "--out", "out", "run directory (checkpoint store)");
  bind.bind(train, "--objective", "objective", "gn_bce | wgan_gp");
  bind.bind(train, "--iterations", "iterations", "generator iterations");
  bind.bind(train, "--batch-size", "batch_size", "minibatch size");
  bind.bind(train, "--n-critic", "n_critic", "discriminator steps per generator step");
  bind.bind(train, "--layer-dim", "layer_dim", "channel width");
  bind.bind(train, "--noise-dim", "noise_dim", "generator noise width");
  bind.bind(train, "--blocks", "blocks", "residual blocks per network");
  bind.bind(train, "--seq-len", "seq_len", "tensor width (0 = policy max)");
  bind.bind(train, "--lr", "adam_lr", "Adam learning rate");
  bind.bind(train, "--beta1", "adam_beta1", "Adam beta1");
  bind.bind(train, "--beta2", "adam_beta2", "Adam beta2");
  bind.bind(train, "--checkpoint-every", "checkpoint_every", "checkpoint interval");
  bind.bind(train, "--gp-lambda", "gp_lambda", "gradient-penalty weight (wgan_gp)");
  bind.bind(train, "--pad", "pad", "padding character or U+XXXX escape");
  bind.bind_flag(train, "--signed-one-hot", "signed_one_hot", "feed real rows as {-1,1}");

  auto* sample = app.add_subcommand("sample", "generate passwords from a checkpoint");
  std::uint64_t sample_iteration = 0;
  std::uint64_t sample_n = 0;
  bind.bind(sample, "--run", "run", "run directory");
  sample->add_option("--iteration", sample_iteration, "checkpoint iteration")->required();
  sample->add_option("--n", sample_n, "passwords to emit")->required();
  bind.bind(sample, "--out", "out", "output password file");
  bind.bind(sample, "--batch-size", "sample_batch", "generation batch size");
  bind.bind(sample, "--unique-cap", "unique_cap", "in-memory distinct-count cap");

  auto* eval = app.add_subcommand("eval", "matching accuracy of generated vs test");
  bind.bind(eval, "--generated", "generated", "generated password file");
  bind.bind(eval, "--test", "test", "held-out test file");
  bind.bind(eval, "--out", "out", "report path prefix");
  bind.bind(eval, "--bins", "bins", "length bins: char10 | corpus");
  bind.bind(eval, "--unique-cap", "unique_cap", "in-memory distinct-count cap");
  bind.bind(eval, "--encoding", "encoding", "test file encoding policy");

  auto* sweep = app.add_subcommand("sweep", "accuracy per checkpoint");
  std::vector<std::string> sweep_tests;
  std::string sweep_iterations;
  bind.bind(sweep, "--run", "run", "run directory");
  sweep->add_option("--test", sweep_tests, "test file (repeatable)")->type_name("FILE");
  sweep->add_option("--iterations", sweep_iterations, "comma list (default: all checkpoints)");
  bind.bind(sweep, "--n", "sweep_samples", "samples per checkpoint");
  bind.bind(sweep, "--out", "out", "report path prefix");
  bind.bind(sweep, "--bins", "bins", "length bins: char10 | corpus");
  bind.bind(sweep, "--batch-size", "sample_batch", "generation batch size");
  bind.bind(sweep, "--encoding", "encoding", "test file encoding policy");

  auto* honey = app.add_subcommand("honeywords", "sample non-matching generated passwords");
  std::vector<std::string> honey_excludes;
  bind.bind(honey, "--generated", "generated", "generated password file");
  honey->add_option("--exclude", honey_excludes, "exclusion set file (repeatable)")
      ->type_name("FILE");
  bind.bind(honey, "--k", "k", "number of candidates");
  bind.bind(honey, "--out", "out", "output file");
  bind.bind(honey, "--encoding", "encoding", "exclusion file encoding policy");

  // Let --seed/--jobs/--verbose/--config appear after the subcommand too.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough(true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error kind=usage message=\"" << e.what() << "\"\n";
    return static_cast<int>(gnpass::ExitCode::kUsage);
  }

  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    bind.commit();  // flags override the file

    if (app.got_subcommand(prepare)) return cmd_prepare(cfg);
    if (app.got_subcommand(train)) return cmd_train(cfg);
    if (app.got_subcommand(sample)) return cmd_sample(cfg, sample_iteration, sample_n);
    if (app.got_subcommand(eval)) return cmd_eval(cfg);
    if (app.got_subcommand(sweep)) return cmd_sweep(cfg, sweep_tests, sweep_iterations);
    if (app.got_subcommand(honey)) return cmd_honeywords(cfg, honey_excludes);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "error kind=usage message=\"" << e.what() << "\"\n";
    return static_cast<int>(gnpass::ExitCode::kUsage);
  } catch (const NumericError& e) {
    std::cerr << "error kind=numeric message=\"" << e.what() << "\"\n";
    return static_cast<int>(gnpass::ExitCode::kNumeric);
  } catch (const DataError& e) {
    std::cerr << "error kind=data message=\"" << e.what() << "\"\n";
    return static_cast<int>(gnpass::ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error kind=data message=\"" << e.what() << "\"\n";
    return static_cast<int>(gnpass::ExitCode::kData);
  }
}
