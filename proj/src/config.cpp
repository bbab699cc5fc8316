#include "gnpass/config.hpp"

#include <charconv>
#include <sstream>

#include "gnpass/errors.hpp"
#include "gnpass/utf8.hpp"

namespace gnpass::config {

std::string to_string(Source source) {
  switch (source) {
    case Source::kDefault:
      return "default";
    case Source::kFile:
      return "file";
    case Source::kFlag:
      return "flag";
  }
  return "default";
}

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError("config key '" + key + "' expects an unsigned integer, got '" + value + "'");
  }
  return out;
}

double parse_f64(const std::string& key, const std::string& value) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError("config key '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw UsageError("config key '" + key + "' expects true/false, got '" + value + "'");
}

std::string format_f64(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> kKeys = {
      "encoding",   "mode",          "min_len",         "max_len",       "ratio",
      "pad",        "seq_len",       "signed_one_hot",  "objective",     "layer_dim",
      "noise_dim",  "blocks",        "batch_size",      "iterations",    "n_critic",
      "checkpoint_every", "adam_lr", "adam_beta1",      "adam_beta2",    "gp_lambda",
      "sample_batch", "unique_cap",  "bins",            "k",             "sweep_samples",
      "seed",       "jobs",          "verbose",         "in",            "out",
      "split",      "run",           "generated",       "test",          "exclude",
  };
  return kKeys;
}

bool RunConfig::is_path_key(const std::string& key) {
  return key == "in" || key == "out" || key == "split" || key == "run" || key == "generated" ||
         key == "test" || key == "exclude";
}

void RunConfig::apply(const std::string& key, const std::string& value, Source source) {
  if (key == "encoding") {
    corpus::encoding_policy_from_string(value);  // validates
    encoding = value;
  } else if (key == "mode") {
    if (value != "char10" && value != "char812" && value != "custom") {
      throw UsageError("mode must be char10, char812 or custom, got '" + value + "'");
    }
    mode = value;
  } else if (key == "min_len") {
    min_len = parse_u64(key, value);
  } else if (key == "max_len") {
    max_len = parse_u64(key, value);
  } else if (key == "ratio") {
    corpus::Ratio::parse(value);  // validates
    ratio = value;
  } else if (key == "pad") {
    pad = value;
    pad_symbol();  // validates
  } else if (key == "seq_len") {
    seq_len = parse_u64(key, value);
  } else if (key == "signed_one_hot") {
    signed_one_hot = parse_bool(key, value);
  } else if (key == "objective") {
    if (value == "gradient_normalized_bce" || value == "gn_bce") {
      objective = "gradient_normalized_bce";
    } else if (value == "wasserstein_gradient_penalty" || value == "wgan_gp") {
      objective = "wasserstein_gradient_penalty";
    } else {
      throw UsageError("objective must be gradient_normalized_bce or wasserstein_gradient_penalty");
    }
  } else if (key == "layer_dim") {
    layer_dim = parse_u64(key, value);
  } else if (key == "noise_dim") {
    noise_dim = parse_u64(key, value);
  } else if (key == "blocks") {
    blocks = parse_u64(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_u64(key, value);
  } else if (key == "iterations") {
    iterations = parse_u64(key, value);
  } else if (key == "n_critic") {
    n_critic = parse_u64(key, value);
  } else if (key == "checkpoint_every") {
    checkpoint_every = parse_u64(key, value);
  } else if (key == "adam_lr") {
    adam_lr = parse_f64(key, value);
  } else if (key == "adam_beta1") {
    adam_beta1 = parse_f64(key, value);
  } else if (key == "adam_beta2") {
    adam_beta2 = parse_f64(key, value);
  } else if (key == "gp_lambda") {
    gp_lambda = parse_f64(key, value);
  } else if (key == "sample_batch") {
    sample_batch = parse_u64(key, value);
  } else if (key == "unique_cap") {
    unique_cap = parse_u64(key, value);
  } else if (key == "bins") {
    if (value != "char10" && value != "corpus") {
      throw UsageError("bins must be char10 or corpus, got '" + value + "'");
    }
    bins = value;
  } else if (key == "k") {
    k = parse_u64(key, value);
  } else if (key == "sweep_samples") {
    sweep_samples = parse_u64(key, value);
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "jobs") {
    jobs = parse_u64(key, value);
    if (jobs == 0) throw UsageError("jobs must be positive");
  } else if (key == "verbose") {
    verbose = parse_bool(key, value);
  } else if (key == "in") {
    in = value;
  } else if (key == "out") {
    out = value;
  } else if (key == "split") {
    split = value;
  } else if (key == "run") {
    run = value;
  } else if (key == "generated") {
    generated = value;
  } else if (key == "test") {
    test = value;
  } else if (key == "exclude") {
    exclude = value;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
  provenance_[key] = source;
}

namespace {

std::string resolve_relative(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (base / p).lexically_normal().string();
}

}  // namespace

void RunConfig::load_file(const std::filesystem::path& config_path) {
  auto rec = kv::read_file(config_path);
  const auto base = std::filesystem::absolute(config_path).parent_path();
  for (const auto& [key, value] : rec.items()) {
    if (key == "exclude") {
      // Comma-separated list; each entry resolves independently.
      std::string resolved;
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!resolved.empty()) resolved += ',';
        resolved += resolve_relative(base, tok);
      }
      apply(key, resolved, Source::kFile);
    } else if (is_path_key(key)) {
      apply(key, resolve_relative(base, value), Source::kFile);
    } else {
      apply(key, value, Source::kFile);
    }
  }
}

Source RunConfig::source_of(const std::string& key) const {
  const auto it = provenance_.find(key);
  return it == provenance_.end() ? Source::kDefault : it->second;
}

kv::Record RunConfig::echo() const {
  kv::Record rec;
  rec.set("encoding", encoding);
  rec.set("mode", mode);
  rec.set("min_len", std::to_string(min_len));
  rec.set("max_len", std::to_string(max_len));
  rec.set("ratio", ratio);
  rec.set("pad", pad);
  rec.set("seq_len", std::to_string(seq_len));
  rec.set("signed_one_hot", signed_one_hot ? "true" : "false");
  rec.set("objective", objective);
  rec.set("layer_dim", std::to_string(layer_dim));
  rec.set("noise_dim", std::to_string(noise_dim));
  rec.set("blocks", std::to_string(blocks));
  rec.set("batch_size", std::to_string(batch_size));
  rec.set("iterations", std::to_string(iterations));
  rec.set("n_critic", std::to_string(n_critic));
  rec.set("checkpoint_every", std::to_string(checkpoint_every));
  rec.set("adam_lr", format_f64(adam_lr));
  rec.set("adam_beta1", format_f64(adam_beta1));
  rec.set("adam_beta2", format_f64(adam_beta2));
  rec.set("gp_lambda", format_f64(gp_lambda));
  rec.set("sample_batch", std::to_string(sample_batch));
  rec.set("unique_cap", std::to_string(unique_cap));
  rec.set("bins", bins);
  rec.set("k", std::to_string(k));
  rec.set("sweep_samples", std::to_string(sweep_samples));
  rec.set("seed", std::to_string(seed));
  rec.set("jobs", std::to_string(jobs));
  rec.set("verbose", verbose ? "true" : "false");
  rec.set("in", in);
  rec.set("out", out);
  rec.set("split", split);
  rec.set("run", run);
  rec.set("generated", generated);
  rec.set("test", test);
  rec.set("exclude", exclude);
  for (const auto& key : keys()) {
    rec.set("source." + key, to_string(source_of(key)));
  }
  return rec;
}

corpus::LengthPolicy RunConfig::length_policy() const {
  if (mode == "custom") {
    return corpus::LengthPolicy::custom(static_cast<std::size_t>(min_len),
                                        static_cast<std::size_t>(max_len));
  }
  return corpus::length_policy_from_string(mode);
}

corpus::EncodingPolicy RunConfig::encoding_policy() const {
  return corpus::encoding_policy_from_string(encoding);
}

corpus::Ratio RunConfig::split_ratio() const { return corpus::Ratio::parse(ratio); }

char32_t RunConfig::pad_symbol() const {
  if (auto cp = utf8::parse_codepoint(pad)) return *cp;
  auto cps = utf8::decode(pad);
  if (cps && cps->size() == 1) return (*cps)[0];
  throw UsageError("pad must be a single character or a U+XXXX escape, got '" + pad + "'");
}

std::uint64_t RunConfig::effective_seq_len() const {
  if (seq_len != 0) return seq_len;
  return length_policy().max_len;
}

}  // namespace gnpass::config
