#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "xgem/data/idx.hpp"
#include "xgem/error.hpp"
#include "xgem/experiments/bias_audit.hpp"
#include "xgem/experiments/manifolds.hpp"
#include "xgem/experiments/mnist.hpp"
#include "xgem/experiments/parabola.hpp"
#include "xgem/experiments/runner.hpp"
#include "xgem/io/binary.hpp"

namespace xgem {
namespace {

using experiments::ConfidenceManifoldsConfig;
using experiments::MnistXgemConfig;
using nlohmann::json;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("xgem_experiments_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ConfidenceManifoldsConfig small_manifolds() {
  ConfidenceManifoldsConfig c;
  c.data.side = 8;
  c.data.n = 400;
  c.validation_size = 60;
  c.vae = {64, 3, {32}, nn::Activation::relu, nn::DecoderOutput::sigmoid, 1.0};
  c.vae_train = {8, 32, 3e-3};
  c.gate_threshold = 0.3;
  c.architectures = {{"narrow", {{64, 4, 2}, {nn::Activation::relu}, nn::OutputHead::softmax}},
                     {"wide", {{64, 16, 16, 2}, {nn::Activation::relu, nn::Activation::relu}, nn::OutputHead::softmax}}};
  c.classifier_train = {4, 32, 3e-3};
  c.checkpoints = {1, 4};
  c.xgem = {10.0, 0.05, 120, 0.5, 1e-7};
  c.samples = 8;
  return c;
}

// Ten 8x8 "digits": class c lights a 3x3 block at a class-specific spot.
void write_digit_fixture(const std::filesystem::path& dir, std::size_t n) {
  std::filesystem::create_directories(dir);
  data::IdxImages img{n, 8, 8, std::vector<std::uint8_t>(n * 64)};
  std::vector<std::uint8_t> labels(n);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> jitter(0, 30);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 10);
    labels[i] = static_cast<std::uint8_t>(c);
    const int r0 = (c / 4) * 2 + 1, c0 = (c % 4) + 1;
    for (int p = 0; p < 64; ++p) img.pixels[i * 64 + p] = static_cast<std::uint8_t>(jitter(rng));
    for (int r = r0; r < r0 + 3; ++r) {
      for (int col = c0; col < c0 + 3; ++col) img.pixels[i * 64 + r * 8 + col] = static_cast<std::uint8_t>(220 + jitter(rng));
    }
  }
  data::write_idx_images(dir / "images", img);
  data::write_idx_labels(dir / "labels", labels);
}

MnistXgemConfig small_mnist(const std::filesystem::path& dir) {
  MnistXgemConfig c;
  c.images = dir / "images";
  c.labels = dir / "labels";
  c.train_size = 400;
  c.holdout_size = 100;
  c.latent_dim = 4;
  c.vae_hidden = {32};
  c.vae_train = {15, 32, 3e-3};
  c.gate_threshold = 0.3;
  c.classifier_hidden = {16};
  c.classifier_train = {15, 32, 3e-3};
  c.xgem = {10.0, 0.05, 300, 0.5, 1e-7};
  c.pairs = {{0, 5}, {3, 7}};
  c.frames = 4;
  return c;
}

TEST(Runner, ResolvedConfigsRoundTripForEveryExperiment) {
  for (const char* kind : {"parabola_fig1", "bias_audit", "confidence_manifolds", "mnist_xgem"}) {
    const json first = experiments::resolved_config({{"experiment", kind}}, 42);
    EXPECT_EQ(first.at("experiment"), kind);
    EXPECT_EQ(first.at("seed"), 42u);
    EXPECT_EQ(experiments::resolved_config(first), first) << kind;
  }
}

TEST(Runner, RejectsMissingOrUnknownExperiment) {
  EXPECT_THROW(experiments::resolved_config(json::object()), ConfigError);
  EXPECT_THROW(experiments::resolved_config({{"experiment", "celeba"}}), ConfigError);
  EXPECT_THROW(experiments::resolved_config({{"experiment", "bias_audit"}, {"delta", "high"}}), ConfigError);
}

TEST(ConfidenceManifolds, ValidatesCheckpointsAndArchitectures) {
  auto c = small_manifolds();
  c.checkpoints = {5};
  EXPECT_THROW(c.resolve(), ConfigError);
  c = small_manifolds();
  c.architectures[1].name = "narrow";
  EXPECT_THROW(c.resolve(), ConfigError);
  c = small_manifolds();
  c.architectures[0].spec = {{64, 4, 3}, {nn::Activation::relu}, nn::OutputHead::softmax};
  EXPECT_THROW(c.resolve(), ConfigError);
}

TEST(ConfidenceManifolds, MonotoneFractionCountsSmoothedDecreasers) {
  analytics::ConfidenceManifold down, bump;
  for (int i = 0; i < 20; ++i) {
    down.points.push_back({0.1 * i, 1.0 - 0.05 * i});
    bump.points.push_back({0.1 * i, i == 10 ? 1.0 : 0.2});
  }
  EXPECT_DOUBLE_EQ(experiments::monotone_fraction({down}), 1.0);
  EXPECT_DOUBLE_EQ(experiments::monotone_fraction({down, bump}), 0.5);
  EXPECT_DOUBLE_EQ(experiments::monotone_fraction({}), 0.0);
}

TEST(ConfidenceManifolds, SmallRunIsConsistentAndReplays) {
  const auto out = scratch("manifolds");
  const auto r = experiments::run_confidence_manifolds(small_manifolds(), out);
  ASSERT_EQ(r.models.size(), 4u);
  EXPECT_EQ(r.models[0].id(), "narrow_e1");
  EXPECT_EQ(r.models[3].id(), "wide_e4");
  EXPECT_LT(r.max_aligned_x0, 1e-6);
  for (const auto& m : r.models) {
    EXPECT_EQ(m.manifolds.size() + m.failed, 8u);
    EXPECT_EQ(m.fits.size(), m.manifolds.size());
    EXPECT_EQ(m.aligned.size(), m.fits.size() - m.degenerate);
    for (const auto& f : m.aligned_refits) EXPECT_LT(std::abs(f.x0), 1e-6);
    std::size_t counted = 0;
    for (const auto& [stratum, h] : m.histograms) counted += h.total() + h.degenerate;
    EXPECT_LE(counted, m.fits.size());
    EXPECT_EQ(m.reliability.overall.total(), 60u);
  }
  EXPECT_TRUE(std::filesystem::exists(out / "manifolds" / "wide_e4_aligned.svg"));
  EXPECT_TRUE(std::filesystem::exists(out / "histograms" / "narrow_e1.csv"));

  const auto check = experiments::replay_manifest(out, scratch("manifolds_replay"));
  EXPECT_TRUE(check.ok());
  EXPECT_FALSE(check.matched.empty());
}

TEST(BiasAudit, SmallRunIsDeterministic) {
  experiments::BiasAuditConfig c;
  c.data.side = 8;
  c.data.n = 400;
  c.validation_size = 200;
  c.vae = {64, 3, {32}, nn::Activation::relu, nn::DecoderOutput::sigmoid, 1.0};
  c.vae_train = {8, 32, 3e-3};
  c.gate_threshold = 0.3;
  c.classifier = {{64, 8, 2}, {nn::Activation::relu}, nn::OutputHead::softmax};
  c.classifier_train = {6, 32, 3e-3};
  c.oracle = c.classifier;
  c.oracle_train = {6, 32, 3e-3};
  c.recalibration.tau = 0.6;
  c.recalibration.tolerance = 0.05;
  c.xgem = {10.0, 0.05, 100, 0.5, 1e-7};
  c.audit_samples = 10;

  const auto out = scratch("bias");
  const auto a = experiments::run_bias_audit(c, out);
  EXPECT_EQ(a.unbiased_items.size(), 10u);
  EXPECT_EQ(a.biased_items.size(), 10u);
  EXPECT_LE(a.recalibration.after.fpr_gap(), 0.05);
  EXPECT_LE(a.recalibration.after.fnr_gap(), 0.05);
  EXPECT_EQ(a.unbiased.overall.count + a.unbiased.excluded(), 10u);
  EXPECT_TRUE(std::filesystem::exists(out / "confounding.csv"));

  const auto check = experiments::replay_manifest(out, scratch("bias_replay"));
  EXPECT_TRUE(check.ok());
  EXPECT_EQ(check.matched.size(), 3u);  // oracle rates, confounding, items
}

TEST(MnistXgem, RejectsTargetEqualToSource) {
  MnistXgemConfig c;
  c.pairs = {{3, 3}};
  EXPECT_THROW(c.resolve(), ConfigError);
  c.pairs = {{3, 10}};
  EXPECT_THROW(c.resolve(), ConfigError);
}

TEST(MnistXgem, UnavailableWithoutFiles) {
  MnistXgemConfig c;
  c.images = scratch("absent") / "images";
  c.labels = scratch("absent") / "labels";
  EXPECT_FALSE(experiments::mnist_available(c));
  EXPECT_THROW(experiments::run_mnist_xgem(c), FormatError);
}

TEST(MnistXgem, SyntheticDigitsProduceExemplarsAndStrips) {
  const auto dir = scratch("digits");
  write_digit_fixture(dir, 500);
  auto c = small_mnist(dir);
  ASSERT_TRUE(experiments::mnist_available(c));
  const auto out = dir / "run";
  const auto r = experiments::run_mnist_xgem(c, out);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_GT(r.classifier_accuracy, 0.9);
  for (const auto& p : r.pairs) {
    ASSERT_TRUE(p.result.has_value()) << p.error;
    EXPECT_EQ(p.result->trajectory.source_label, p.pair.source);
    EXPECT_EQ(p.result->trajectory.target_label, p.pair.target);
    EXPECT_EQ(p.success, p.exemplar_label == p.pair.target && p.exemplar_confidence >= 0.5);
  }
  EXPECT_TRUE(std::filesystem::exists(out / "strips.svg"));
  EXPECT_TRUE(std::filesystem::exists(out / "trajectories" / "0_to_5.csv"));

  c.train_size = 500;
  EXPECT_THROW(experiments::run_mnist_xgem(c), ConfigError);
}

}  // namespace
}  // namespace xgem
