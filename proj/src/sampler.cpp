#include "gnpass/sampler.hpp"

#include <fstream>
#include <span>

#include "gnpass/digest.hpp"
#include "gnpass/distinct.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/kv.hpp"
#include "gnpass/rng.hpp"

namespace gnpass::sampler {

namespace {

// Decodes every row of one generated batch; rows are contiguous float32.
void decode_batch(const torch::Tensor& out, const codec::Vocabulary& vocab,
                  std::vector<std::string>& sink) {
  const auto batch = out.size(0);
  const auto row_len = static_cast<std::size_t>(out.size(1) * out.size(2));
  auto flat = out.contiguous();
  const float* data = flat.data_ptr<float>();
  for (std::int64_t i = 0; i < batch; ++i) {
    sink.push_back(codec::decode(std::span<const float>(data + i * row_len, row_len), vocab));
  }
}

torch::Tensor batch_noise(const gan::ModelConfig& model, std::int64_t b, std::uint64_t seed,
                          std::uint64_t batch_index) {
  auto gen = at::detail::createCPUGenerator(rng::derive_seed(seed, batch_index));
  return torch::randn({b, model.noise_dim}, gen, torch::TensorOptions().dtype(torch::kFloat32));
}

}  // namespace

std::vector<std::string> sample_strings(const trainer::Checkpoint& checkpoint,
                                        const codec::Vocabulary& vocab, std::uint64_t n_total,
                                        std::int64_t batch_size, std::uint64_t seed) {
  if (batch_size <= 0) throw UsageError("sample batch_size must be positive");
  torch::NoGradGuard no_grad;
  auto generator = checkpoint.generator;  // shared module handle
  std::vector<std::string> out;
  out.reserve(n_total);
  std::uint64_t batch_index = 0;
  while (out.size() < n_total) {
    const auto want = std::min<std::uint64_t>(static_cast<std::uint64_t>(batch_size),
                                              n_total - out.size());
    auto noise = batch_noise(checkpoint.model, batch_size, seed, batch_index);
    auto generated = gan::generate(generator, noise);
    std::vector<std::string> decoded;
    decode_batch(generated, vocab, decoded);
    decoded.resize(want);
    for (auto& s : decoded) out.push_back(std::move(s));
    ++batch_index;
  }
  return out;
}

SampleSummary sample(const SampleJob& job) {
  if (job.n_total == 0) throw UsageError("n_total must be positive");
  if (job.batch_size <= 0) throw UsageError("sample batch_size must be positive");

  auto store = trainer::CheckpointStore::open(job.run_dir);
  const auto& vocab = store.vocabulary();
  if (static_cast<std::int64_t>(vocab.size()) != store.model_config().vocab_size) {
    throw DataError("checkpoint store vocabulary does not match its model configuration");
  }
  auto checkpoint = store.load(job.iteration);

  std::ofstream out(job.output, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + job.output.string());

  torch::NoGradGuard no_grad;
  distinct::DistinctCounter counter(job.unique_cap, job.spill_dir);
  digest::Sha256 output_digest;

  std::uint64_t written = 0;
  std::uint64_t batch_index = 0;
  std::vector<std::string> decoded;
  while (written < job.n_total) {
    const auto want =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(job.batch_size), job.n_total - written);
    auto noise = batch_noise(checkpoint.model, job.batch_size, job.seed, batch_index);
    auto generated = gan::generate(checkpoint.generator, noise);
    decoded.clear();
    decode_batch(generated, vocab, decoded);
    decoded.resize(want);
    for (const auto& line : decoded) {
      out << line << '\n';
      output_digest.update(line);
      output_digest.update("\n");
      counter.add(line);
    }
    if (!out) {
      throw DataError("partial output: wrote about " + std::to_string(written) + " of " +
                      std::to_string(job.n_total) + " lines to " + job.output.string());
    }
    written += want;
    ++batch_index;
  }
  out.flush();
  if (!out) {
    throw DataError("partial output: flush failed after " + std::to_string(written) +
                    " lines to " + job.output.string());
  }
  out.close();

  auto distinct_result = counter.finalize();
  SampleSummary summary;
  summary.n_total = job.n_total;
  summary.n_unique = distinct_result.n_unique;
  summary.duplicate_ratio =
      1.0 - static_cast<double>(summary.n_unique) / static_cast<double>(summary.n_total);
  summary.output_digest = output_digest.hex();

  kv::Record rec;
  rec.set("format", "gnpass-sample-v1");
  rec.set("run_dir", job.run_dir.string());
  rec.set("iteration", std::to_string(job.iteration));
  rec.set("seed", std::to_string(job.seed));
  rec.set("batch_size", std::to_string(job.batch_size));
  rec.set("n_total", std::to_string(summary.n_total));
  rec.set("n_unique", std::to_string(summary.n_unique));
  {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", summary.duplicate_ratio);
    rec.set("duplicate_ratio", buf);
  }
  rec.set("output_digest", summary.output_digest);
  kv::write_file(job.output.string() + ".summary", rec);
  return summary;
}

}  // namespace gnpass::sampler
