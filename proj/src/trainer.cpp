#include "gnpass/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gnpass/digest.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/rng.hpp"

namespace gnpass::trainer {

void TrainConfig::validate() const {
  if (batch_size <= 0 || iterations <= 0 || n_critic <= 0 || checkpoint_every <= 0) {
    throw UsageError("batch_size, iterations, n_critic and checkpoint_every must be positive");
  }
  if (adam_lr <= 0 || adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1) {
    throw UsageError("invalid Adam hyperparameters");
  }
  if (gp_lambda < 0) throw UsageError("gp_lambda must be nonnegative");
}

namespace {

constexpr const char* kManifestName = "manifest.txt";
constexpr const char* kVocabName = "vocab.txt";
constexpr const char* kLossName = "loss_history.csv";

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string iteration_list(const std::vector<std::uint64_t>& iters) {
  std::string out;
  for (std::size_t i = 0; i < iters.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(iters[i]);
  }
  return out;
}

}  // namespace

std::filesystem::path CheckpointStore::checkpoint_path(std::uint64_t iteration) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%09llu.pt", static_cast<unsigned long long>(iteration));
  return dir_ / buf;
}

CheckpointStore CheckpointStore::create(const std::filesystem::path& dir,
                                        const gan::ModelConfig& model, const TrainConfig& train,
                                        const codec::Vocabulary& vocab, const kv::Record& extra) {
  model.validate();
  train.validate();
  if (static_cast<std::int64_t>(vocab.size()) != model.vocab_size) {
    throw DataError("vocabulary size " + std::to_string(vocab.size()) +
                    " disagrees with model vocab_size " + std::to_string(model.vocab_size));
  }
  std::filesystem::create_directories(dir);

  CheckpointStore store;
  store.dir_ = dir;
  store.model_ = model;
  store.train_ = train;
  store.vocab_ = vocab;
  codec::write_vocabulary(vocab, dir / kVocabName);

  kv::Record& m = store.manifest_;
  m.set("format", "gnpass-run-v1");
  m.set("objective", gan::to_string(model.objective));
  m.set("layer_dim", std::to_string(model.layer_dim));
  m.set("noise_dim", std::to_string(model.noise_dim));
  m.set("seq_len", std::to_string(model.seq_len));
  m.set("vocab_size", std::to_string(model.vocab_size));
  m.set("n_residual_blocks", std::to_string(model.n_residual_blocks));
  m.set("batch_size", std::to_string(train.batch_size));
  m.set("iterations", std::to_string(train.iterations));
  m.set("n_critic", std::to_string(train.n_critic));
  m.set("adam_lr", format_double(train.adam_lr));
  m.set("adam_beta1", format_double(train.adam_beta1));
  m.set("adam_beta2", format_double(train.adam_beta2));
  m.set("checkpoint_every", std::to_string(train.checkpoint_every));
  m.set("seed", std::to_string(train.seed));
  m.set("gp_lambda", format_double(train.gp_lambda));
  m.set("signed_one_hot", train.signed_one_hot ? "true" : "false");
  m.set("vocab_digest", digest::sha256_file_hex(dir / kVocabName));
  m.set("checkpoints", "");
  for (const auto& [k, v] : extra.items()) m.set(k, v);
  store.write_manifest();

  std::ofstream loss(dir / kLossName, std::ios::binary | std::ios::trunc);
  loss << "step,loss_d,loss_g\n";
  return store;
}

CheckpointStore CheckpointStore::open(const std::filesystem::path& dir) {
  CheckpointStore store;
  store.dir_ = dir;
  store.manifest_ = kv::read_file(dir / kManifestName);
  const kv::Record& m = store.manifest_;
  if (m.require("format") != "gnpass-run-v1") {
    throw DataError("unrecognized run format in " + dir.string());
  }
  store.vocab_ = codec::read_vocabulary(dir / kVocabName);
  if (digest::sha256_file_hex(dir / kVocabName) != m.require("vocab_digest")) {
    throw DataError("vocabulary file does not match recorded digest in " + dir.string());
  }

  gan::ModelConfig& model = store.model_;
  model.objective = gan::objective_from_string(m.require("objective"));
  model.layer_dim = std::stoll(m.require("layer_dim"));
  model.noise_dim = std::stoll(m.require("noise_dim"));
  model.seq_len = std::stoll(m.require("seq_len"));
  model.vocab_size = std::stoll(m.require("vocab_size"));
  model.n_residual_blocks = std::stoll(m.require("n_residual_blocks"));
  if (static_cast<std::int64_t>(store.vocab_.size()) != model.vocab_size) {
    throw DataError("vocabulary in " + dir.string() + " does not match the run's vocab_size");
  }

  TrainConfig& train = store.train_;
  train.batch_size = std::stoll(m.require("batch_size"));
  train.iterations = std::stoll(m.require("iterations"));
  train.n_critic = std::stoll(m.require("n_critic"));
  train.adam_lr = std::stod(m.require("adam_lr"));
  train.adam_beta1 = std::stod(m.require("adam_beta1"));
  train.adam_beta2 = std::stod(m.require("adam_beta2"));
  train.checkpoint_every = std::stoll(m.require("checkpoint_every"));
  train.seed = std::stoull(m.require("seed"));
  train.gp_lambda = std::stod(m.require("gp_lambda"));
  train.signed_one_hot = m.require("signed_one_hot") == "true";

  const auto list = m.require("checkpoints");
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) store.iterations_.push_back(std::stoull(tok));
  }
  return store;
}

std::vector<std::uint64_t> CheckpointStore::iterations() const { return iterations_; }

void CheckpointStore::write_manifest() {
  manifest_.set("checkpoints", iteration_list(iterations_));
  kv::write_file(dir_ / kManifestName, manifest_);
}

void CheckpointStore::save(const Checkpoint& checkpoint) {
  const auto path = checkpoint_path(checkpoint.iteration);
  const auto tmp = path.string() + ".tmp";

  torch::serialize::OutputArchive archive;
  archive.write("iteration",
                torch::tensor(static_cast<std::int64_t>(checkpoint.iteration), torch::kInt64));
  torch::serialize::OutputArchive g_archive;
  checkpoint.generator->save(g_archive);
  archive.write("generator", g_archive);
  torch::serialize::OutputArchive d_archive;
  checkpoint.discriminator->save(d_archive);
  archive.write("discriminator", d_archive);

  const auto n_tail = static_cast<std::int64_t>(checkpoint.metrics_tail.size());
  auto tail = torch::zeros({n_tail, 3}, torch::kFloat64);
  for (std::int64_t i = 0; i < n_tail; ++i) {
    const auto& row = checkpoint.metrics_tail[static_cast<std::size_t>(i)];
    tail[i][0] = static_cast<double>(row.step);
    tail[i][1] = row.loss_d;
    tail[i][2] = row.loss_g;
  }
  archive.write("metrics_tail", tail);

  archive.save_to(tmp);
  std::filesystem::rename(tmp, path);

  if (std::find(iterations_.begin(), iterations_.end(), checkpoint.iteration) ==
      iterations_.end()) {
    iterations_.push_back(checkpoint.iteration);
    std::sort(iterations_.begin(), iterations_.end());
  }
  manifest_.set("checkpoint_" + std::to_string(checkpoint.iteration),
                digest::sha256_file_hex(path));
  write_manifest();
}

Checkpoint CheckpointStore::load(std::uint64_t iteration) const {
  if (std::find(iterations_.begin(), iterations_.end(), iteration) == iterations_.end()) {
    throw DataError("no checkpoint at iteration " + std::to_string(iteration) +
                    "; available: " + iteration_list(iterations_));
  }
  const auto path = checkpoint_path(iteration);
  const auto recorded = manifest_.require("checkpoint_" + std::to_string(iteration));
  if (digest::sha256_file_hex(path) != recorded) {
    throw DataError("checkpoint " + path.string() + " failed its integrity check");
  }

  Checkpoint out;
  out.iteration = iteration;
  out.model = model_;
  out.generator = gan::Generator(model_);
  out.discriminator = gan::Discriminator(model_);

  torch::serialize::InputArchive archive;
  archive.load_from(path.string());
  torch::Tensor iter_tensor;
  archive.read("iteration", iter_tensor);
  if (iter_tensor.item<std::int64_t>() != static_cast<std::int64_t>(iteration)) {
    throw DataError("checkpoint " + path.string() + " carries a mismatched iteration tag");
  }
  torch::serialize::InputArchive g_archive;
  archive.read("generator", g_archive);
  out.generator->load(g_archive);
  torch::serialize::InputArchive d_archive;
  archive.read("discriminator", d_archive);
  out.discriminator->load(d_archive);

  torch::Tensor tail;
  archive.read("metrics_tail", tail);
  for (std::int64_t i = 0; i < tail.size(0); ++i) {
    out.metrics_tail.push_back({static_cast<std::int64_t>(tail[i][0].item<double>()),
                                tail[i][1].item<double>(), tail[i][2].item<double>()});
  }
  return out;
}

void CheckpointStore::append_loss_history(std::span<const LossRow> rows) {
  std::ofstream out(dir_ / kLossName, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot append to " + (dir_ / kLossName).string());
  for (const auto& row : rows) {
    out << row.step << ',' << format_double(row.loss_d) << ',' << format_double(row.loss_g)
        << '\n';
  }
}

void CheckpointStore::set_wall_clock_seconds(double seconds) {
  manifest_.set("wall_clock_seconds", format_double(seconds));
  write_manifest();
}

namespace {

// Minibatch source: whole train set pre-encoded once as an index matrix;
// batches are drawn with replacement so step cost is corpus-size independent.
class BatchSource {
 public:
  BatchSource(std::span<const std::string> train_set, const codec::Vocabulary& vocab,
              std::int64_t seq_len, std::uint64_t seed)
      : gen_(seed), n_(static_cast<std::int64_t>(train_set.size())) {
    auto all = torch::zeros({n_, seq_len}, torch::kInt32);
    auto acc = all.accessor<std::int32_t, 2>();
    for (std::int64_t i = 0; i < n_; ++i) {
      const auto row = codec::encode(train_set[static_cast<std::size_t>(i)], vocab,
                                     static_cast<std::size_t>(seq_len));
      for (std::int64_t j = 0; j < seq_len; ++j) acc[i][j] = row[static_cast<std::size_t>(j)];
    }
    encoded_ = all;
    vocab_size_ = static_cast<std::int64_t>(vocab.size());
  }

  torch::Tensor next_one_hot(std::int64_t batch_size, bool signed_range) {
    auto picks = torch::zeros({batch_size}, torch::kInt64);
    auto acc = picks.accessor<std::int64_t, 1>();
    for (std::int64_t i = 0; i < batch_size; ++i) {
      acc[i] = static_cast<std::int64_t>(rng::bounded(gen_, static_cast<std::uint64_t>(n_)));
    }
    auto rows = encoded_.index_select(0, picks).to(torch::kInt64);
    auto one_hot = torch::one_hot(rows, vocab_size_).to(torch::kFloat32);
    if (signed_range) one_hot = one_hot * 2.0f - 1.0f;
    return one_hot;
  }

 private:
  std::mt19937_64 gen_;
  std::int64_t n_ = 0;
  std::int64_t vocab_size_ = 0;
  torch::Tensor encoded_;
};

double checked_loss(const torch::Tensor& loss, std::uint64_t iteration, const char* which,
                    std::int64_t critic_step) {
  const double v = loss.item<double>();
  if (!std::isfinite(v)) {
    std::string where = "iteration " + std::to_string(iteration);
    if (critic_step >= 0) where += ", critic step " + std::to_string(critic_step + 1);
    throw NumericError(std::string("non-finite ") + which + " at " + where + " (value " +
                       std::to_string(v) + "); aborting the run");
  }
  return v;
}

}  // namespace

TrainResult train(std::span<const std::string> train_set, const codec::Vocabulary& vocab,
                  const gan::ModelConfig& model_config, const TrainConfig& train_config,
                  CheckpointStore& store, std::ostream* progress) {
  model_config.validate();
  train_config.validate();
  if (train_set.empty()) throw DataError("training set is empty");

  const auto start = std::chrono::steady_clock::now();
  torch::manual_seed(train_config.seed);

  gan::Generator generator(model_config);
  gan::Discriminator discriminator(model_config);

  torch::optim::Adam opt_g(generator->parameters(),
                           torch::optim::AdamOptions(train_config.adam_lr)
                               .betas({train_config.adam_beta1, train_config.adam_beta2}));
  torch::optim::Adam opt_d(discriminator->parameters(),
                           torch::optim::AdamOptions(train_config.adam_lr)
                               .betas({train_config.adam_beta1, train_config.adam_beta2}));

  BatchSource batches(train_set, vocab, model_config.seq_len,
                      rng::derive_seed(train_config.seed, 1));
  auto noise_gen = at::detail::createCPUGenerator(rng::derive_seed(train_config.seed, 2));
  const auto fopts = torch::TensorOptions().dtype(torch::kFloat32);
  const bool use_gn = model_config.objective == gan::Objective::kGradientNormalizedBce;

  auto make_noise = [&](std::int64_t b) {
    return torch::randn({b, model_config.noise_dim}, noise_gen, fopts);
  };

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(train_config.iterations));
  std::size_t flushed_rows = 0;

  auto checkpoint_now = [&](std::uint64_t iteration) {
    Checkpoint ckpt;
    ckpt.iteration = iteration;
    ckpt.generator = generator;
    ckpt.discriminator = discriminator;
    ckpt.model = model_config;
    const std::size_t tail = std::min<std::size_t>(result.history.size(), 100);
    ckpt.metrics_tail.assign(result.history.end() - static_cast<std::ptrdiff_t>(tail),
                             result.history.end());
    store.save(ckpt);
    store.append_loss_history(
        std::span<const LossRow>(result.history).subspan(flushed_rows));
    flushed_rows = result.history.size();
  };

  for (std::uint64_t it = 1; it <= static_cast<std::uint64_t>(train_config.iterations); ++it) {
    double last_loss_d = 0.0;
    for (std::int64_t c = 0; c < train_config.n_critic; ++c) {
      torch::Tensor loss_d;
      try {
        auto real = batches.next_one_hot(train_config.batch_size, train_config.signed_one_hot);
        auto fake = generator->forward(make_noise(train_config.batch_size)).detach();
        if (use_gn) {
          auto d_real = gan::discriminate_gn(discriminator, real, /*create_graph=*/true);
          auto d_fake = gan::discriminate_gn(discriminator, fake, /*create_graph=*/true);
          loss_d = gan::loss_gn_bce(d_real, d_fake).d;
        } else {
          auto d_real = gan::discriminate_raw(discriminator, real);
          auto d_fake = gan::discriminate_raw(discriminator, fake);
          auto eta = torch::rand({train_config.batch_size, 1, 1}, noise_gen, fopts);
          auto gradnorm =
              gan::interpolates_grad_norm(discriminator, real, fake, eta, /*create_graph=*/true);
          loss_d = gan::loss_wgan_gp(d_real, d_fake, gradnorm, train_config.gp_lambda).d;
        }
      } catch (const NumericError& e) {
        throw NumericError("iteration " + std::to_string(it) + ", critic step " +
                           std::to_string(c + 1) + ": " + e.what());
      }
      last_loss_d = checked_loss(loss_d, it, "discriminator loss", c);
      opt_d.zero_grad();
      loss_d.backward();
      opt_d.step();
      ++result.discriminator_updates;
    }

    torch::Tensor loss_g;
    try {
      auto fake = generator->forward(make_noise(train_config.batch_size));
      if (use_gn) {
        auto d_fake = gan::discriminate_gn(discriminator, fake, /*create_graph=*/true);
        loss_g = torch::softplus(-d_fake).mean();
      } else {
        loss_g = -gan::discriminate_raw(discriminator, fake).mean();
      }
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(it) + ", generator step: " + e.what());
    }
    const double loss_g_value = checked_loss(loss_g, it, "generator loss", -1);
    opt_g.zero_grad();
    loss_g.backward();
    opt_g.step();
    ++result.generator_updates;

    result.history.push_back(
        {static_cast<std::int64_t>(it), last_loss_d, loss_g_value});

    if (it % static_cast<std::uint64_t>(train_config.checkpoint_every) == 0) {
      checkpoint_now(it);
    }
    if (progress && (it % 100 == 0 || it == 1)) {
      (*progress) << "iteration " << it << "/" << train_config.iterations
                  << " loss_d=" << last_loss_d << " loss_g=" << loss_g_value << '\n';
    }
    result.final_iteration = it;
  }

  if (result.final_iteration % static_cast<std::uint64_t>(train_config.checkpoint_every) != 0) {
    checkpoint_now(result.final_iteration);
  }
  store.set_wall_clock_seconds(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return result;
}

}  // namespace gnpass::trainer
