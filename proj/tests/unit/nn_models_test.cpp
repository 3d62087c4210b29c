#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "xgem/error.hpp"
#include "xgem/nn/classifier.hpp"
#include "xgem/nn/serialize.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"
#include "xgem/random.hpp"

namespace nd = xgem::nd;
namespace nn = xgem::nn;
using nd::Tensor;

namespace {

struct Blobs {
  Tensor x;
  std::vector<int> y;
};

Blobs separable_blobs(std::size_t n, std::uint64_t seed) {
  xgem::Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> data;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double cx = y == 0 ? -2.0 : 2.0;
    data.push_back(cx + noise(rng));
    data.push_back(cx + noise(rng));
    labels.push_back(y);
  }
  return {Tensor({n, 2}, std::move(data)), std::move(labels)};
}

nn::MlpSpec small_spec() { return {{2, 8, 2}, {nn::Activation::relu}, nn::OutputHead::softmax}; }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("xgem_nn_" + name);
}

}  // namespace

TEST(Classifier, SeparableBlobsTrainToHighAccuracy) {
  const auto blobs = separable_blobs(200, 1);
  nn::TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 1e-2;
  cfg.seed = 3;
  const auto trained = nn::train_classifier(blobs.x, blobs.y, small_spec(), cfg);
  ASSERT_EQ(trained.history.size(), 30u);
  EXPECT_GE(trained.history.back().accuracy, 0.99);
}

TEST(Classifier, TrainingIsBitwiseDeterministic) {
  const auto blobs = separable_blobs(64, 2);
  nn::TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 11;
  const auto a = nn::train_classifier(blobs.x, blobs.y, small_spec(), cfg);
  const auto b = nn::train_classifier(blobs.x, blobs.y, small_spec(), cfg);
  EXPECT_EQ(a.model.network().parameters(), b.model.network().parameters());
}

TEST(Classifier, ZeroEpochsReturnsInitializedModel) {
  const auto blobs = separable_blobs(16, 3);
  nn::TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 5;
  const auto trained = nn::train_classifier(blobs.x, blobs.y, small_spec(), cfg);
  xgem::Rng rng(5);
  EXPECT_EQ(trained.model.network().parameters(), nn::Mlp::initialize(small_spec(), rng).parameters());
  EXPECT_TRUE(trained.history.empty());
}

TEST(Classifier, RejectsBadInputs) {
  const auto blobs = separable_blobs(8, 4);
  nn::TrainConfig cfg;
  std::vector<int> bad = blobs.y;
  bad[0] = 2;
  EXPECT_THROW(nn::train_classifier(blobs.x, bad, small_spec(), cfg), xgem::ConfigError);
  EXPECT_THROW(nn::train_classifier(Tensor::zeros({0, 2}), {}, small_spec(), cfg), xgem::Error);
}

TEST(Classifier, UntrainedIsNearUniform) {
  xgem::Rng rng(9);
  const auto clf = nn::Classifier::initialize({{4, 16, 3}, {nn::Activation::tanh}, nn::OutputHead::softmax}, rng);
  const Tensor x = xgem::uniform_tensor({50, 4}, rng, -0.5, 0.5);
  const Tensor p = clf.predict_proba(x);
  for (double v : p.values()) EXPECT_NEAR(v, 1.0 / 3.0, 0.1);
}

TEST(Classifier, RowsSumToOneAndTemperatureKeepsArgmax) {
  xgem::Rng rng(10);
  const auto clf = nn::Classifier::initialize({{3, 10, 4}, {nn::Activation::relu}, nn::OutputHead::softmax}, rng);
  const auto hot = clf.with_logit_scale(2.0);
  const Tensor x = xgem::uniform_tensor({40, 3}, rng, -3, 3);
  const Tensor p = clf.predict_proba(x);
  for (std::size_t r = 0; r < 40; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) s += p.at(r, c);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_EQ(clf.predict(x), hot.predict(x));
  EXPECT_THROW(clf.with_logit_scale(0.0), xgem::ConfigError);
}

TEST(Classifier, SingleVectorPrediction) {
  xgem::Rng rng(12);
  const auto clf = nn::Classifier::initialize(small_spec(), rng);
  const Tensor one = clf.predict_proba(Tensor::vector({0.3, -0.1}));
  EXPECT_EQ(one.shape(), (nd::Shape{2}));
  EXPECT_THROW(clf.predict_proba(Tensor::vector({1, 2, 3})), xgem::ShapeError);
}

TEST(Vae, EncodeIsDeterministicAndOrderPreserving) {
  xgem::Rng rng(13);
  const auto vae = nn::Vae::initialize({4, 2, {8}, nn::Activation::tanh, nn::DecoderOutput::linear, 1.0}, rng);
  const Tensor x = xgem::uniform_tensor({5, 4}, rng, -1, 1);
  const Tensor z = vae.encode(x);
  EXPECT_EQ(z.shape(), (nd::Shape{5, 2}));
  EXPECT_EQ(vae.encode(x), z);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(vae.encode(x.row_at(i)), z.row_at(i));
  EXPECT_EQ(vae.decode(z.row_at(0)), vae.decode(z.row_at(0)));
  EXPECT_THROW(vae.encode(Tensor::vector({1, 2})), xgem::ShapeError);
}

TEST(Vae, LinearGaussianElboImprovesOverFirstEpochs) {
  xgem::Rng rng(14);
  const Tensor data = xgem::normal_tensor({2048, 3}, rng);
  nn::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 2e-3;
  cfg.seed = 15;
  const auto trained = nn::train_vae(data, {3, 3, {}, nn::Activation::identity, nn::DecoderOutput::linear, 1.0}, cfg);
  ASSERT_EQ(trained.history.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LT(trained.history[i].loss, trained.history[i - 1].loss) << "epoch " << i;
}

TEST(Vae, GateRejectsUntrainedGenerator) {
  xgem::Rng rng(16);
  auto vae = std::make_shared<nn::Vae>(nn::Vae::initialize({2, 1, {8}, nn::Activation::tanh, nn::DecoderOutput::linear, 1.0}, rng));
  const Tensor data = xgem::uniform_tensor({20, 2}, rng, 2, 3);
  try {
    nn::CertifiedGenerator::certify(vae, data, 0.05);
    FAIL() << "expected GateError";
  } catch (const xgem::GateError& e) {
    EXPECT_GE(e.measured(), 0.05);
    EXPECT_EQ(e.threshold(), 0.05);
  }
  const auto ok = nn::CertifiedGenerator::certify(vae, data, 1e6);
  EXPECT_LT(ok.measured_error(), 1e6);
}

TEST(Checkpoint, ClassifierRoundTripIsBitExact) {
  const auto blobs = separable_blobs(32, 17);
  nn::TrainConfig cfg;
  cfg.epochs = 2;
  const auto trained = nn::train_classifier(blobs.x, blobs.y, small_spec(), cfg);
  const auto path = temp_path("clf.ckpt");
  nn::save_model(path, trained.model);
  const auto back = nn::load_classifier(path);
  EXPECT_EQ(back.network().parameters(), trained.model.network().parameters());
  EXPECT_EQ(back.network().spec(), trained.model.network().spec());
  EXPECT_EQ(back.predict_proba(blobs.x), trained.model.predict_proba(blobs.x));
  EXPECT_TRUE(std::holds_alternative<nn::Classifier>(nn::load_model(path)));
  EXPECT_THROW(nn::load_vae(path), xgem::FormatError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, VaeRoundTripIsBitExact) {
  xgem::Rng rng(18);
  const auto vae = nn::Vae::initialize({6, 2, {5, 4}, nn::Activation::relu, nn::DecoderOutput::sigmoid, 0.3}, rng);
  const auto path = temp_path("vae.ckpt");
  nn::save_model(path, vae);
  const auto back = nn::load_vae(path);
  EXPECT_EQ(back.parameters(), vae.parameters());
  EXPECT_EQ(back.spec(), vae.spec());
  std::filesystem::remove(path);
}

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

xgem::FormatError::Kind load_failure(const std::filesystem::path& p) {
  try {
    nn::load_model(p);
  } catch (const xgem::FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load succeeded on a corrupted file";
  return xgem::FormatError::Kind::io;
}

}  // namespace

TEST(Checkpoint, CorruptionYieldsTypedErrors) {
  xgem::Rng rng(19);
  const auto clf = nn::Classifier::initialize(small_spec(), rng);
  const auto path = temp_path("corrupt.ckpt");
  nn::save_model(path, clf);
  const auto good = read_bytes(path);

  auto header = good;
  header[0] = 'Y';
  write_bytes(path, header);
  EXPECT_EQ(load_failure(path), xgem::FormatError::Kind::version_mismatch);

  auto version = good;
  version[8] = 7;
  write_bytes(path, version);
  EXPECT_EQ(load_failure(path), xgem::FormatError::Kind::version_mismatch);

  write_bytes(path, std::vector<unsigned char>(good.begin(), good.end() - 5));
  EXPECT_EQ(load_failure(path), xgem::FormatError::Kind::truncated);

  auto trailing = good;
  trailing.push_back(0);
  write_bytes(path, trailing);
  EXPECT_EQ(load_failure(path), xgem::FormatError::Kind::inconsistent);

  std::filesystem::remove(path);
  EXPECT_EQ(load_failure(path), xgem::FormatError::Kind::io);
}
