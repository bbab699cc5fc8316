#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <string>

namespace gnpass::gan {

// Training objective: gradient-normalized discriminator with BCE-in-logits
// losses, or the Wasserstein + gradient-penalty baseline for comparison runs.
enum class Objective { kGradientNormalizedBce, kWassersteinGradientPenalty };

std::string to_string(Objective objective);
Objective objective_from_string(const std::string& name);

struct ModelConfig {
  std::int64_t layer_dim = 128;
  std::int64_t noise_dim = 128;
  std::int64_t seq_len = 0;
  std::int64_t vocab_size = 0;
  std::int64_t n_residual_blocks = 5;
  Objective objective = Objective::kGradientNormalizedBce;

  void validate() const;

  // Closed-form parameter counts for the fixed architecture below:
  //   generator     = noise_dim*seq_len*layer_dim + seq_len*layer_dim
  //                 + n_blocks * 2*(5*layer_dim^2 + layer_dim)
  //                 + layer_dim*vocab_size + vocab_size
  //   discriminator = vocab_size*layer_dim + layer_dim
  //                 + n_blocks * 2*(5*layer_dim^2 + layer_dim)
  //                 + seq_len*layer_dim + 1
  std::int64_t generator_param_count() const;
  std::int64_t discriminator_param_count() const;
};

// Pre-activation residual block over the sequence axis:
//   x + 0.3 * conv5(relu(conv5(relu(x)))), channels = layer_dim throughout.
struct ResidualBlock1dImpl : torch::nn::Module {
  explicit ResidualBlock1dImpl(std::int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv1d conv1{nullptr}, conv2{nullptr};
};
TORCH_MODULE(ResidualBlock1d);

// noise (B, noise_dim) -> tanh activations (B, seq_len, vocab_size).
struct GeneratorImpl : torch::nn::Module {
  explicit GeneratorImpl(const ModelConfig& config);
  torch::Tensor forward(const torch::Tensor& noise);
  const ModelConfig& config() const { return config_; }

  ModelConfig config_;
  torch::nn::Linear input_projection{nullptr};
  torch::nn::Sequential blocks{nullptr};
  torch::nn::Conv1d output_projection{nullptr};
};
TORCH_MODULE(Generator);

// one-hot-like activations (B, seq_len, vocab_size) -> raw scalar per sample.
struct DiscriminatorImpl : torch::nn::Module {
  explicit DiscriminatorImpl(const ModelConfig& config);
  torch::Tensor forward(const torch::Tensor& x);
  const ModelConfig& config() const { return config_; }

  ModelConfig config_;
  torch::nn::Conv1d input_projection{nullptr};
  torch::nn::Sequential blocks{nullptr};
  torch::nn::Linear head{nullptr};
};
TORCH_MODULE(Discriminator);

// Forward with input validation: noise must be (B, noise_dim) and finite.
torch::Tensor generate(Generator& generator, const torch::Tensor& noise);

// Raw scalar head with shape validation: x must be (B, seq_len, vocab_size).
torch::Tensor discriminate_raw(Discriminator& discriminator, const torch::Tensor& x);

inline constexpr double kGnEpsilon = 1e-12;

// Gradient-normalized value of a scalar-per-sample network f at x:
//   f_hat(x) = f(x) / (||grad_x f(x)||_2 + |f(x)| + eps)
// which bounds |f_hat| <= 1 and the input-gradient norm by 1. create_graph
// must be true when the result participates in a backward pass (training);
// the second-order graph is what lets the normalizer train.
torch::Tensor gradient_normalized(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                                  const torch::Tensor& x, bool create_graph,
                                  double eps = kGnEpsilon);

torch::Tensor discriminate_gn(Discriminator& discriminator, const torch::Tensor& x,
                              bool create_graph = false, double eps = kGnEpsilon);

struct LossPair {
  torch::Tensor d;
  torch::Tensor g;
};

// BCE with logits over discriminator outputs, real labeled 1, fake labeled 0:
//   loss_d = mean softplus(-d_real) + mean softplus(d_fake)
//   loss_g = mean softplus(-d_fake)          (non-saturating form)
LossPair loss_gn_bce(const torch::Tensor& d_real, const torch::Tensor& d_fake);

// Wasserstein critic loss with gradient penalty on interpolates:
//   loss_d = mean(d_fake) - mean(d_real) + lambda * mean((||grad|| - 1)^2)
//   loss_g = -mean(d_fake)
LossPair loss_wgan_gp(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                      const torch::Tensor& interpolates_gradnorm, double lambda);

// ||grad_x D(x)|| at uniform real/fake interpolates; eta has shape (B,1,1).
torch::Tensor interpolates_grad_norm(Discriminator& discriminator, const torch::Tensor& real,
                                     const torch::Tensor& fake, const torch::Tensor& eta,
                                     bool create_graph);

}  // namespace gnpass::gan
