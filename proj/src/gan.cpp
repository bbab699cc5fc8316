#include "gnpass/gan.hpp"

#include "gnpass/errors.hpp"

namespace gnpass::gan {

std::string to_string(Objective objective) {
  return objective == Objective::kGradientNormalizedBce ? "gradient_normalized_bce"
                                                        : "wasserstein_gradient_penalty";
}

Objective objective_from_string(const std::string& name) {
  if (name == "gradient_normalized_bce" || name == "gn_bce") {
    return Objective::kGradientNormalizedBce;
  }
  if (name == "wasserstein_gradient_penalty" || name == "wgan_gp") {
    return Objective::kWassersteinGradientPenalty;
  }
  throw UsageError("unknown objective '" + name + "'");
}

void ModelConfig::validate() const {
  if (layer_dim <= 0 || noise_dim <= 0 || n_residual_blocks <= 0) {
    throw UsageError("layer_dim, noise_dim and n_residual_blocks must be positive");
  }
  if (seq_len <= 0) throw UsageError("seq_len must be positive");
  if (vocab_size < 2) throw UsageError("vocab_size must be at least 2 (pad plus one character)");
}

std::int64_t ModelConfig::generator_param_count() const {
  const std::int64_t block = 2 * (5 * layer_dim * layer_dim + layer_dim);
  return noise_dim * seq_len * layer_dim + seq_len * layer_dim +
         n_residual_blocks * block + layer_dim * vocab_size + vocab_size;
}

std::int64_t ModelConfig::discriminator_param_count() const {
  const std::int64_t block = 2 * (5 * layer_dim * layer_dim + layer_dim);
  return vocab_size * layer_dim + layer_dim + n_residual_blocks * block +
         seq_len * layer_dim + 1;
}

ResidualBlock1dImpl::ResidualBlock1dImpl(std::int64_t channels) {
  conv1 = register_module(
      "conv1", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, channels, 5).padding(2)));
  conv2 = register_module(
      "conv2", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, channels, 5).padding(2)));
}

torch::Tensor ResidualBlock1dImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(x);
  h = conv1->forward(h);
  h = torch::relu(h);
  h = conv2->forward(h);
  return x + 0.3 * h;
}

GeneratorImpl::GeneratorImpl(const ModelConfig& config) : config_(config) {
  config_.validate();
  input_projection = register_module(
      "input_projection", torch::nn::Linear(config_.noise_dim, config_.seq_len * config_.layer_dim));
  blocks = register_module("blocks", torch::nn::Sequential());
  for (std::int64_t b = 0; b < config_.n_residual_blocks; ++b) {
    blocks->push_back(ResidualBlock1d(config_.layer_dim));
  }
  output_projection = register_module(
      "output_projection",
      torch::nn::Conv1d(torch::nn::Conv1dOptions(config_.layer_dim, config_.vocab_size, 1)));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& noise) {
  auto h = input_projection->forward(noise);
  h = h.view({noise.size(0), config_.layer_dim, config_.seq_len});
  h = blocks->forward(h);
  h = output_projection->forward(h);  // (B, vocab, seq)
  return torch::tanh(h.transpose(1, 2));
}

DiscriminatorImpl::DiscriminatorImpl(const ModelConfig& config) : config_(config) {
  config_.validate();
  input_projection = register_module(
      "input_projection",
      torch::nn::Conv1d(torch::nn::Conv1dOptions(config_.vocab_size, config_.layer_dim, 1)));
  blocks = register_module("blocks", torch::nn::Sequential());
  for (std::int64_t b = 0; b < config_.n_residual_blocks; ++b) {
    blocks->push_back(ResidualBlock1d(config_.layer_dim));
  }
  head = register_module("head", torch::nn::Linear(config_.seq_len * config_.layer_dim, 1));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& x) {
  auto h = x.transpose(1, 2);  // (B, vocab, seq)
  h = input_projection->forward(h);
  h = blocks->forward(h);
  h = h.reshape({h.size(0), -1});
  return head->forward(h).squeeze(-1);
}

torch::Tensor generate(Generator& generator, const torch::Tensor& noise) {
  const auto& cfg = generator->config();
  if (noise.dim() != 2 || noise.size(1) != cfg.noise_dim) {
    throw DataError("generate: noise must have shape (batch, " + std::to_string(cfg.noise_dim) +
                    ")");
  }
  if (!torch::isfinite(noise).all().item<bool>()) {
    throw NumericError("generate: noise contains non-finite values");
  }
  return generator->forward(noise);
}

namespace {

void check_input_shape(const ModelConfig& cfg, const torch::Tensor& x, const char* what) {
  if (x.dim() != 3 || x.size(1) != cfg.seq_len || x.size(2) != cfg.vocab_size) {
    throw DataError(std::string(what) + ": input must have shape (batch, " +
                    std::to_string(cfg.seq_len) + ", " + std::to_string(cfg.vocab_size) + ")");
  }
}

}  // namespace

torch::Tensor discriminate_raw(Discriminator& discriminator, const torch::Tensor& x) {
  check_input_shape(discriminator->config(), x, "discriminate_raw");
  return discriminator->forward(x);
}

torch::Tensor gradient_normalized(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                                  const torch::Tensor& x, bool create_graph, double eps) {
  torch::Tensor xin = x;
  if (!xin.requires_grad()) {
    xin = x.detach().requires_grad_(true);  // leaf view for real/eval inputs
  }
  auto fx = f(xin);
  if (fx.dim() != 1 || fx.size(0) != xin.size(0)) {
    throw DataError("gradient_normalized: f must return one scalar per sample");
  }
  auto grad = torch::autograd::grad({fx}, {xin}, {torch::ones_like(fx)},
                                    /*retain_graph=*/create_graph,
                                    /*create_graph=*/create_graph)[0];
  auto grad_norm = grad.flatten(1).norm(2, 1);
  auto denominator = grad_norm + fx.abs() + eps;
  if (!torch::isfinite(denominator).all().item<bool>() ||
      denominator.eq(0).any().item<bool>()) {
    throw NumericError("degenerate discriminator: zero or non-finite normalizer");
  }
  return fx / denominator;
}

torch::Tensor discriminate_gn(Discriminator& discriminator, const torch::Tensor& x,
                              bool create_graph, double eps) {
  check_input_shape(discriminator->config(), x, "discriminate_gn");
  return gradient_normalized(
      [&discriminator](const torch::Tensor& xin) { return discriminator->forward(xin); }, x,
      create_graph, eps);
}

namespace {

void check_finite_vector(const torch::Tensor& v, const char* what) {
  if (!torch::isfinite(v).all().item<bool>()) {
    throw NumericError(std::string(what) + ": non-finite discriminator outputs");
  }
}

}  // namespace

LossPair loss_gn_bce(const torch::Tensor& d_real, const torch::Tensor& d_fake) {
  check_finite_vector(d_real, "loss_gn_bce");
  check_finite_vector(d_fake, "loss_gn_bce");
  auto loss_d = torch::softplus(-d_real).mean() + torch::softplus(d_fake).mean();
  auto loss_g = torch::softplus(-d_fake).mean();
  return {loss_d, loss_g};
}

LossPair loss_wgan_gp(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                      const torch::Tensor& interpolates_gradnorm, double lambda) {
  check_finite_vector(d_real, "loss_wgan_gp");
  check_finite_vector(d_fake, "loss_wgan_gp");
  check_finite_vector(interpolates_gradnorm, "loss_wgan_gp");
  auto penalty = (interpolates_gradnorm - 1.0).pow(2).mean();
  auto loss_d = d_fake.mean() - d_real.mean() + lambda * penalty;
  auto loss_g = -d_fake.mean();
  return {loss_d, loss_g};
}

torch::Tensor interpolates_grad_norm(Discriminator& discriminator, const torch::Tensor& real,
                                     const torch::Tensor& fake, const torch::Tensor& eta,
                                     bool create_graph) {
  check_input_shape(discriminator->config(), real, "interpolates_grad_norm");
  check_input_shape(discriminator->config(), fake, "interpolates_grad_norm");
  auto interp = (eta * real + (1.0 - eta) * fake).detach().requires_grad_(true);
  auto pred = discriminator->forward(interp);
  auto grad = torch::autograd::grad({pred}, {interp}, {torch::ones_like(pred)},
                                    /*retain_graph=*/create_graph,
                                    /*create_graph=*/create_graph)[0];
  return grad.flatten(1).norm(2, 1);
}

}  // namespace gnpass::gan
