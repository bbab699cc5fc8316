#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gnpass/codec.hpp"
#include "gnpass/gan.hpp"
#include "gnpass/kv.hpp"

namespace gnpass::trainer {

struct TrainConfig {
  std::int64_t batch_size = 64;
  std::int64_t iterations = 200'000;
  std::int64_t n_critic = 10;  // discriminator updates per generator update
  double adam_lr = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  std::int64_t checkpoint_every = 10'000;
  std::uint64_t seed = 1;
  double gp_lambda = 10.0;      // gradient-penalty weight (baseline objective)
  bool signed_one_hot = false;  // feed real rows as {-1,1} instead of {0,1}

  void validate() const;
};

// One generator-loss / discriminator-loss pair per generator iteration;
// loss_d is the final critic update of that iteration.
struct LossRow {
  std::int64_t step = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
};

struct Checkpoint {
  std::uint64_t iteration = 0;
  gan::Generator generator{nullptr};
  gan::Discriminator discriminator{nullptr};
  gan::ModelConfig model;
  std::vector<LossRow> metrics_tail;
};

// One directory per run: manifest.txt (config echo, iteration list, content
// digests), vocab.txt, loss_history.csv, and one parameter archive per
// checkpoint. Checkpoint writes are write-temp-then-rename.
class CheckpointStore {
 public:
  static CheckpointStore create(const std::filesystem::path& dir, const gan::ModelConfig& model,
                                const TrainConfig& train, const codec::Vocabulary& vocab,
                                const kv::Record& extra = {});
  static CheckpointStore open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const gan::ModelConfig& model_config() const { return model_; }
  const TrainConfig& train_config() const { return train_; }
  const codec::Vocabulary& vocabulary() const { return vocab_; }
  std::vector<std::uint64_t> iterations() const;

  void save(const Checkpoint& checkpoint);
  // Digest-checked load; unknown iteration -> DataError listing available
  // tags, tampered file -> DataError before any parameter is used.
  Checkpoint load(std::uint64_t iteration) const;

  void append_loss_history(std::span<const LossRow> rows);
  void set_wall_clock_seconds(double seconds);

 private:
  CheckpointStore() = default;
  void write_manifest();
  std::filesystem::path checkpoint_path(std::uint64_t iteration) const;

  std::filesystem::path dir_;
  gan::ModelConfig model_;
  TrainConfig train_;
  codec::Vocabulary vocab_;
  kv::Record manifest_;
  std::vector<std::uint64_t> iterations_;
};

struct TrainResult {
  std::uint64_t discriminator_updates = 0;
  std::uint64_t generator_updates = 0;
  std::uint64_t final_iteration = 0;
  std::vector<LossRow> history;
};

// Adversarial loop: each generator iteration runs n_critic discriminator
// updates on fresh minibatches (sampled with replacement), then one generator
// update. Checkpoints every checkpoint_every iterations plus a final one.
// Deterministic for a fixed seed on fixed hardware. NaN loss aborts with a
// NumericError naming the step.
TrainResult train(std::span<const std::string> train_set, const codec::Vocabulary& vocab,
                  const gan::ModelConfig& model_config, const TrainConfig& train_config,
                  CheckpointStore& store, std::ostream* progress = nullptr);

}  // namespace gnpass::trainer
