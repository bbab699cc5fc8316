#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gnpass/corpus.hpp"
#include "gnpass/kv.hpp"

namespace gnpass::config {

enum class Source { kDefault, kFile, kFlag };
std::string to_string(Source source);

// Merged run configuration: defaults, overridden by a --config file,
// overridden by flags. Every field's provenance is tracked and echoed into
// the run manifest together with its effective value.
struct RunConfig {
  // corpus
  std::string encoding = "strict-utf8";
  std::string mode = "char10";
  std::uint64_t min_len = 1;   // consulted when mode=custom
  std::uint64_t max_len = 10;  // consulted when mode=custom
  std::string ratio = "4:1";
  // codec
  std::string pad = "U+0060";  // backtick
  std::uint64_t seq_len = 0;   // 0 -> the policy's max length
  bool signed_one_hot = false;
  // model
  std::string objective = "gradient_normalized_bce";
  std::uint64_t layer_dim = 128;
  std::uint64_t noise_dim = 128;
  std::uint64_t blocks = 5;
  // train
  std::uint64_t batch_size = 64;
  std::uint64_t iterations = 200'000;
  std::uint64_t n_critic = 10;
  std::uint64_t checkpoint_every = 10'000;
  double adam_lr = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  double gp_lambda = 10.0;
  // sample / eval
  std::uint64_t sample_batch = 1024;
  std::uint64_t unique_cap = 20'000'000;
  std::string bins = "char10";
  std::uint64_t k = 16;  // honeyword candidates
  std::uint64_t sweep_samples = 100'000;
  // shared
  std::uint64_t seed = 1;
  std::uint64_t jobs = 1;
  bool verbose = false;
  // I/O paths; a config file may set these, resolved relative to its own
  // directory. exclude holds a comma-separated list.
  std::string in, out, split, run, generated, test, exclude;

  // Applies one key=value. Unknown key or unparsable value -> UsageError.
  void apply(const std::string& key, const std::string& value, Source source);
  // Applies every pair in a config file (file-source provenance); relative
  // paths in path-valued keys are resolved against the file's directory.
  void load_file(const std::filesystem::path& config_path);
  static bool is_path_key(const std::string& key);

  Source source_of(const std::string& key) const;
  // Effective values plus one source.<key> line each.
  kv::Record echo() const;
  static const std::vector<std::string>& keys();

  // Typed views over the string-ish fields; validate on access.
  corpus::LengthPolicy length_policy() const;
  corpus::EncodingPolicy encoding_policy() const;
  corpus::Ratio split_ratio() const;
  char32_t pad_symbol() const;
  std::uint64_t effective_seq_len() const;  // seq_len or the policy max

 private:
  std::map<std::string, Source> provenance_;
};

}  // namespace gnpass::config
