#include <cmath>

#include "gnpass/codec.hpp"
#include "gnpass/corpus.hpp"
#include "gnpass/errors.hpp"
#include "gnpass/gan.hpp"
#include "support/fd.hpp"

// torch's c10 logging CHECK aborts the process; doctest's must win in test code.
#undef CHECK
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

using namespace gnpass;
using gan::Discriminator;
using gan::Generator;
using gan::ModelConfig;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.layer_dim = 8;
  cfg.noise_dim = 6;
  cfg.seq_len = 4;
  cfg.vocab_size = 5;
  cfg.n_residual_blocks = 2;
  return cfg;
}

// Pipeline losses as plain doubles, re-running the whole computation; used as
// the target function for finite-difference parameter gradients.
double gn_bce_d_loss_value(Discriminator& d, const torch::Tensor& real,
                           const torch::Tensor& fake) {
  auto d_real = gan::discriminate_gn(d, real, /*create_graph=*/false);
  auto d_fake = gan::discriminate_gn(d, fake, /*create_graph=*/false);
  return gan::loss_gn_bce(d_real, d_fake).d.item<double>();
}

double wgan_gp_d_loss_value(Discriminator& d, const torch::Tensor& real, const torch::Tensor& fake,
                            const torch::Tensor& eta, double lambda) {
  auto d_real = gan::discriminate_raw(d, real);
  auto d_fake = gan::discriminate_raw(d, fake);
  auto gradnorm = gan::interpolates_grad_norm(d, real, fake, eta, /*create_graph=*/false);
  return gan::loss_wgan_gp(d_real, d_fake, gradnorm, lambda).d.item<double>();
}

}  // namespace

TEST_CASE("parameter counts match the documented closed forms") {
  for (const auto& cfg : {tiny_config(), ModelConfig{128, 128, 10, 67, 5}}) {
    torch::manual_seed(1);
    Generator g(cfg);
    Discriminator d(cfg);
    std::int64_t g_count = 0, d_count = 0;
    for (const auto& p : g->parameters()) g_count += p.numel();
    for (const auto& p : d->parameters()) d_count += p.numel();
    CHECK(g_count == cfg.generator_param_count());
    CHECK(d_count == cfg.discriminator_param_count());
  }
}

TEST_CASE("generator output has the right shape, open range and determinism") {
  torch::manual_seed(7);
  auto cfg = tiny_config();
  Generator g(cfg);
  auto noise = torch::randn({64, cfg.noise_dim});
  auto out = gan::generate(g, noise);
  CHECK(out.sizes() == torch::IntArrayRef({64, cfg.seq_len, cfg.vocab_size}));
  CHECK(torch::all(out > -1.0).item<bool>());
  CHECK(torch::all(out < 1.0).item<bool>());
  auto again = gan::generate(g, noise);
  CHECK(torch::equal(out, again));
}

TEST_CASE("zeroed output head forces a constant tanh(bias) grid") {
  torch::manual_seed(7);
  auto cfg = tiny_config();
  Generator g(cfg);
  {
    torch::NoGradGuard no_grad;
    g->output_projection->weight.zero_();
    g->output_projection->bias.fill_(0.3);
  }
  auto out = gan::generate(g, torch::randn({9, cfg.noise_dim}));
  CHECK(torch::allclose(out, torch::full_like(out, std::tanh(0.3)), 1e-6, 1e-6));
}

TEST_CASE("generate validates its noise input") {
  torch::manual_seed(7);
  auto cfg = tiny_config();
  Generator g(cfg);
  CHECK_THROWS_AS(gan::generate(g, torch::randn({4, cfg.noise_dim + 1})), DataError);
  auto bad = torch::randn({4, cfg.noise_dim});
  bad[1][2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(gan::generate(g, bad), NumericError);
  bad[1][2] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(gan::generate(g, bad), NumericError);
}

TEST_CASE("generated batches decode to strings within the length bound") {
  torch::manual_seed(11);
  auto cfg = tiny_config();
  Generator g(cfg);
  std::vector<std::string> train = {"abcd", "dcba"};
  auto vocab = codec::build_vocabulary(train, U'`');
  REQUIRE(static_cast<std::int64_t>(vocab.size()) == cfg.vocab_size);
  auto out = gan::generate(g, torch::randn({64, cfg.noise_dim})).contiguous();
  const auto row_len = static_cast<std::size_t>(cfg.seq_len * cfg.vocab_size);
  const float* data = out.data_ptr<float>();
  for (int i = 0; i < 64; ++i) {
    auto s = codec::decode(std::span<const float>(data + i * row_len, row_len), vocab);
    CHECK(corpus::password_length(s) <= static_cast<std::size_t>(cfg.seq_len));
  }
}

TEST_CASE("discriminate_raw shape checks, purity and finiteness") {
  torch::manual_seed(13);
  auto cfg = tiny_config();
  Discriminator d(cfg);

  auto one = torch::randn({1, cfg.seq_len, cfg.vocab_size});
  CHECK(gan::discriminate_raw(d, one).sizes() == torch::IntArrayRef({1}));

  auto x = torch::randn({3, cfg.seq_len, cfg.vocab_size});
  x[2] = x[0];  // duplicated sample must score identically
  auto scores = gan::discriminate_raw(d, x);
  CHECK(scores[2].item<float>() == scores[0].item<float>());

  CHECK_THROWS_AS(gan::discriminate_raw(d, torch::randn({3, cfg.seq_len, cfg.vocab_size + 1})),
                  DataError);
  CHECK_THROWS_AS(gan::discriminate_raw(d, torch::randn({3, cfg.seq_len})), DataError);

  for (int round = 0; round < 100; ++round) {
    torch::manual_seed(100 + round);
    Discriminator rd(cfg);
    auto rx = torch::randn({4, cfg.seq_len, cfg.vocab_size}) * 3.0;
    CHECK(torch::isfinite(gan::discriminate_raw(rd, rx)).all().item<bool>());
  }
}

TEST_CASE("gradient normalization has closed form for a linear critic") {
  // f(x) = w.x + b  =>  f_hat = f / (||w|| + |f|), strictly inside (-1, 1).
  torch::manual_seed(17);
  auto w = torch::randn({12}, torch::kFloat64);
  auto b = torch::randn({1}, torch::kFloat64);
  auto linear = [&](const torch::Tensor& xin) { return xin.matmul(w) + b; };
  auto x = torch::randn({5, 12}, torch::kFloat64);
  auto got = gan::gradient_normalized(linear, x, /*create_graph=*/false);
  auto f = x.matmul(w) + b;
  auto want = f / (w.norm() + f.abs() + gan::kGnEpsilon);
  CHECK(torch::allclose(got, want, 1e-10, 1e-10));
  CHECK(torch::all(got.abs() < 1.0).item<bool>());
}

TEST_CASE("gradient-normalized output is zero where the raw output is zero") {
  torch::manual_seed(19);
  auto w = torch::randn({6}, torch::kFloat64);
  auto linear = [&](const torch::Tensor& xin) { return xin.matmul(w); };  // f(0) = 0
  auto x = torch::zeros({1, 6}, torch::kFloat64);
  auto got = gan::gradient_normalized(linear, x, false);
  CHECK(got.abs().item<double>() == doctest::Approx(0.0));
}

TEST_CASE("gradient-normalized discriminator is bounded and unit-Lipschitz") {
  torch::manual_seed(23);
  auto cfg = tiny_config();
  Discriminator d(cfg);
  d->to(torch::kFloat64);

  for (int round = 0; round < 20; ++round) {
    auto x = torch::randn({1, cfg.seq_len, cfg.vocab_size}, torch::kFloat64);
    auto value = gan::discriminate_gn(d, x, /*create_graph=*/false);
    CHECK(value.abs().item<double>() <= 1.0);

    // Central-difference estimate of grad_x of the normalized score.
    auto scalar = [&](const torch::Tensor& xin) {
      return gan::discriminate_gn(d, xin.view({1, cfg.seq_len, cfg.vocab_size}), false)
          .item<double>();
    };
    auto fd_grad = testing::finite_difference_input_grad(scalar, x.view(-1), 1e-6);
    CHECK(fd_grad.norm().item<double>() <= 1.0 + 1e-2);
  }
}

TEST_CASE("loss_gn_bce closed-form points") {
  auto zeros = torch::zeros({8}, torch::kFloat64);
  auto at_zero = gan::loss_gn_bce(zeros, zeros);
  CHECK(at_zero.d.item<double>() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(at_zero.g.item<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Saturation: confident-real d_real, confident-fake d_fake drive loss_d to 0.
  auto big = torch::full({8}, 40.0, torch::kFloat64);
  auto saturated = gan::loss_gn_bce(big, -big);
  CHECK(saturated.d.item<double>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("loss_gn_bce equals an elementwise BCE-with-logits oracle") {
  torch::manual_seed(29);
  for (int round = 0; round < 50; ++round) {
    auto d_real = torch::randn({16}, torch::kFloat64) * 3;
    auto d_fake = torch::randn({16}, torch::kFloat64) * 3;
    auto got = gan::loss_gn_bce(d_real, d_fake);

    // Oracle: mean over elements of ln(1+e^{-r}) and ln(1+e^{f}), summed.
    double sum_d = 0, sum_g = 0;
    for (int i = 0; i < 16; ++i) {
      const double r = d_real[i].item<double>();
      const double f = d_fake[i].item<double>();
      sum_d += std::log1p(std::exp(-r)) + std::log1p(std::exp(f));
      sum_g += std::log1p(std::exp(-f));
    }
    CHECK(got.d.item<double>() == doctest::Approx(sum_d / 16).epsilon(1e-10));
    CHECK(got.g.item<double>() == doctest::Approx(sum_g / 16).epsilon(1e-10));
  }
}

TEST_CASE("loss_gn_bce rejects non-finite inputs") {
  auto ok = torch::zeros({4});
  auto bad = torch::zeros({4});
  bad[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(gan::loss_gn_bce(bad, ok), NumericError);
  CHECK_THROWS_AS(gan::loss_gn_bce(ok, bad), NumericError);
}

TEST_CASE("loss_wgan_gp closed-form points and arithmetic oracle") {
  torch::manual_seed(31);
  auto v = torch::randn({8}, torch::kFloat64);
  auto norms = torch::rand({8}, torch::kFloat64) + 0.5;

  // lambda = 0 with d_real = d_fake -> 0.
  auto same = gan::loss_wgan_gp(v, v, norms, 0.0);
  CHECK(same.d.item<double>() == doctest::Approx(0.0).epsilon(1e-12));

  // ||grad|| = 1 everywhere -> penalty contributes nothing.
  auto unit = gan::loss_wgan_gp(v, v, torch::ones({8}, torch::kFloat64), 10.0);
  CHECK(unit.d.item<double>() == doctest::Approx(0.0).epsilon(1e-12));

  for (int round = 0; round < 50; ++round) {
    auto d_real = torch::randn({8}, torch::kFloat64);
    auto d_fake = torch::randn({8}, torch::kFloat64);
    auto gradnorm = torch::rand({8}, torch::kFloat64) * 2;
    const double lambda = 10.0;
    auto got = gan::loss_wgan_gp(d_real, d_fake, gradnorm, lambda);
    double mr = 0, mf = 0, pen = 0;
    for (int i = 0; i < 8; ++i) {
      mr += d_real[i].item<double>() / 8;
      mf += d_fake[i].item<double>() / 8;
      const double n = gradnorm[i].item<double>();
      pen += (n - 1) * (n - 1) / 8;
    }
    CHECK(got.d.item<double>() == doctest::Approx(mf - mr + lambda * pen).epsilon(1e-10));
    CHECK(got.g.item<double>() == doctest::Approx(-mf).epsilon(1e-10));
  }
}

TEST_CASE("analytic discriminator-loss gradients match central differences (gn_bce)") {
  torch::manual_seed(37);
  auto cfg = tiny_config();
  Discriminator d(cfg);
  d->to(torch::kFloat64);
  auto real = torch::randn({6, cfg.seq_len, cfg.vocab_size}, torch::kFloat64);
  auto fake = torch::randn({6, cfg.seq_len, cfg.vocab_size}, torch::kFloat64);

  auto loss = gan::loss_gn_bce(gan::discriminate_gn(d, real, /*create_graph=*/true),
                               gan::discriminate_gn(d, fake, /*create_graph=*/true))
                  .d;
  d->zero_grad();
  loss.backward();
  std::vector<torch::Tensor> analytic;
  for (const auto& p : d->parameters()) analytic.push_back(p.grad().clone());

  auto fd = testing::finite_difference_param_grads(
      d->parameters(), [&]() { return gn_bce_d_loss_value(d, real, fake); }, 1e-6);
  CHECK(testing::max_relative_error(analytic, fd, 1e-6) < 1e-3);
}

TEST_CASE("analytic generator-loss gradients match central differences (gn_bce)") {
  torch::manual_seed(41);
  auto cfg = tiny_config();
  Generator g(cfg);
  Discriminator d(cfg);
  g->to(torch::kFloat64);
  d->to(torch::kFloat64);
  auto noise = torch::randn({6, cfg.noise_dim}, torch::kFloat64);

  auto loss = torch::softplus(-gan::discriminate_gn(d, g->forward(noise), true)).mean();
  g->zero_grad();
  loss.backward();
  std::vector<torch::Tensor> analytic;
  for (const auto& p : g->parameters()) analytic.push_back(p.grad().clone());

  auto loss_value = [&]() {
    return torch::softplus(-gan::discriminate_gn(d, g->forward(noise), false))
        .mean()
        .item<double>();
  };
  auto fd = testing::finite_difference_param_grads(g->parameters(), loss_value, 1e-6);
  CHECK(testing::max_relative_error(analytic, fd, 1e-6) < 1e-3);
}

TEST_CASE("analytic discriminator-loss gradients match central differences (wgan_gp)") {
  torch::manual_seed(43);
  auto cfg = tiny_config();
  Discriminator d(cfg);
  d->to(torch::kFloat64);
  auto real = torch::randn({6, cfg.seq_len, cfg.vocab_size}, torch::kFloat64);
  auto fake = torch::randn({6, cfg.seq_len, cfg.vocab_size}, torch::kFloat64);
  auto eta = torch::rand({6, 1, 1}, torch::kFloat64);
  const double lambda = 10.0;

  auto loss = gan::loss_wgan_gp(gan::discriminate_raw(d, real), gan::discriminate_raw(d, fake),
                                gan::interpolates_grad_norm(d, real, fake, eta, true), lambda)
                  .d;
  d->zero_grad();
  loss.backward();
  std::vector<torch::Tensor> analytic;
  for (const auto& p : d->parameters()) analytic.push_back(p.grad().clone());

  auto fd = testing::finite_difference_param_grads(
      d->parameters(), [&]() { return wgan_gp_d_loss_value(d, real, fake, eta, lambda); }, 1e-6);
  CHECK(testing::max_relative_error(analytic, fd, 1e-6) < 1e-3);
}

TEST_CASE("objective names round trip with aliases") {
  CHECK(gan::to_string(gan::Objective::kGradientNormalizedBce) == "gradient_normalized_bce");
  CHECK(gan::to_string(gan::Objective::kWassersteinGradientPenalty) ==
        "wasserstein_gradient_penalty");
  CHECK(gan::objective_from_string("gn_bce") == gan::Objective::kGradientNormalizedBce);
  CHECK(gan::objective_from_string("wgan_gp") == gan::Objective::kWassersteinGradientPenalty);
  CHECK(gan::objective_from_string("gradient_normalized_bce") ==
        gan::Objective::kGradientNormalizedBce);
  CHECK_THROWS_AS(gan::objective_from_string("hinge"), UsageError);
}

TEST_CASE("model config validation") {
  ModelConfig bad = tiny_config();
  bad.seq_len = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = tiny_config();
  bad.vocab_size = 1;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = tiny_config();
  bad.n_residual_blocks = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}
