#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gnpass/config.hpp"
#include "gnpass/errors.hpp"
#include "support/tmpdir.hpp"

using namespace gnpass;
using config::RunConfig;
using config::Source;
using testing::TempDir;

TEST_CASE("defaults match the published hyperparameter table") {
  RunConfig cfg;
  CHECK(cfg.batch_size == 64);
  CHECK(cfg.iterations == 200'000);
  CHECK(cfg.n_critic == 10);
  CHECK(cfg.layer_dim == 128);
  CHECK(cfg.adam_lr == doctest::Approx(1e-4));
  CHECK(cfg.adam_beta1 == doctest::Approx(0.5));
  CHECK(cfg.adam_beta2 == doctest::Approx(0.9));
  CHECK(cfg.checkpoint_every == 10'000);
  CHECK(cfg.noise_dim == 128);
  CHECK(cfg.blocks == 5);
  CHECK(cfg.objective == "gradient_normalized_bce");

  auto echo = cfg.echo();
  CHECK(echo.require("batch_size") == "64");
  CHECK(echo.require("n_critic") == "10");
  CHECK(echo.require("layer_dim") == "128");
  CHECK(std::stod(echo.require("adam_lr")) == doctest::Approx(1e-4));
  CHECK(std::stod(echo.require("adam_beta1")) == doctest::Approx(0.5));
  CHECK(std::stod(echo.require("adam_beta2")) == doctest::Approx(0.9));
  CHECK(echo.require("checkpoint_every") == "10000");
  CHECK(echo.require("source.batch_size") == "default");
}

TEST_CASE("flag overrides file overrides default") {
  TempDir dir;
  testing::write_text(dir.file("run.conf"),
                      "# comment line\n"
                      "batch_size=32\n"
                      "layer_dim=64\n"
                      "\n"
                      "objective=wgan_gp\n");
  RunConfig cfg;
  cfg.load_file(dir.file("run.conf"));
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.layer_dim == 64);
  CHECK(cfg.objective == "wasserstein_gradient_penalty");
  CHECK(cfg.source_of("batch_size") == Source::kFile);
  CHECK(cfg.source_of("n_critic") == Source::kDefault);

  cfg.apply("batch_size", "16", Source::kFlag);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.source_of("batch_size") == Source::kFlag);

  auto echo = cfg.echo();
  CHECK(echo.require("source.batch_size") == "flag");
  CHECK(echo.require("source.layer_dim") == "file");
  CHECK(echo.require("source.adam_lr") == "default");
}

TEST_CASE("unknown keys and malformed values are usage errors") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.apply("no_such_key", "1", Source::kFlag), UsageError);
  CHECK_THROWS_AS(cfg.apply("batch_size", "sixty-four", Source::kFlag), UsageError);
  CHECK_THROWS_AS(cfg.apply("adam_lr", "fast", Source::kFlag), UsageError);
  CHECK_THROWS_AS(cfg.apply("mode", "char9", Source::kFlag), UsageError);
  CHECK_THROWS_AS(cfg.apply("objective", "hinge", Source::kFlag), UsageError);
  CHECK_THROWS_AS(cfg.apply("ratio", "4", Source::kFlag), UsageError);
  CHECK_THROWS_AS(cfg.apply("verbose", "maybe", Source::kFlag), UsageError);
}

TEST_CASE("typed accessors") {
  RunConfig cfg;
  CHECK(cfg.length_policy().name() == "char10");
  CHECK(cfg.effective_seq_len() == 10);
  cfg.apply("mode", "char812", Source::kFlag);
  CHECK(cfg.effective_seq_len() == 12);
  cfg.apply("seq_len", "16", Source::kFlag);
  CHECK(cfg.effective_seq_len() == 16);

  CHECK(cfg.pad_symbol() == U'`');
  cfg.apply("pad", "U+0020", Source::kFlag);
  CHECK(cfg.pad_symbol() == U' ');
  cfg.apply("pad", "~", Source::kFlag);
  CHECK(cfg.pad_symbol() == U'~');
  CHECK_THROWS_AS(cfg.apply("pad", "two", Source::kFlag), UsageError);

  cfg.apply("mode", "custom", Source::kFlag);
  cfg.apply("min_len", "3", Source::kFlag);
  cfg.apply("max_len", "7", Source::kFlag);
  auto p = cfg.length_policy();
  CHECK(p.min_len == 3);
  CHECK(p.max_len == 7);

  auto r = cfg.split_ratio();
  CHECK(r.train_part == 4);
  CHECK(r.test_part == 1);
}

TEST_CASE("objective aliases normalize to the long names") {
  RunConfig cfg;
  cfg.apply("objective", "gn_bce", Source::kFlag);
  CHECK(cfg.objective == "gradient_normalized_bce");
  cfg.apply("objective", "wasserstein_gradient_penalty", Source::kFlag);
  CHECK(cfg.objective == "wasserstein_gradient_penalty");
}
