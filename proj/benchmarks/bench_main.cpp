#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "xgem/analytics/manifold.hpp"
#include "xgem/audit/oracle.hpp"
#include "xgem/exemplar/xgem.hpp"
#include "xgem/nd/graph.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace {

using namespace xgem;

nd::Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(r * c);
  for (auto& x : v) x = n(rng);
  return {{r, c}, std::move(v)};
}

void BM_MatmulForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 256, 1), b = random_matrix(256, 64, 2);
  for (auto _ : state) {
    nd::Graph g;
    const auto va = g.parameter(a), vb = g.parameter(b);
    g.backward(nd::sum(nd::matmul(va, vb)));
    benchmark::DoNotOptimize(g.grad(vb));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(1)->Arg(32)->Arg(128);

// Untrained models are enough to time one traversal step.
void BM_XgemSteps(benchmark::State& state) {
  Rng rng(3);
  auto vae = std::make_shared<const nn::Vae>(
      nn::Vae::initialize({256, 4, {128}, nn::Activation::relu, nn::DecoderOutput::sigmoid, 1.0}, rng));
  const auto clf = nn::Classifier::initialize({{256, 32, 2}, {nn::Activation::relu}, nn::OutputHead::softmax}, rng);
  const nd::Tensor x = vae->decode(nd::Tensor::vector({0.1, -0.2, 0.3, 0.0}));
  const auto gen = nn::CertifiedGenerator::certify(vae, x.reshaped({1, 256}), 1.0);
  exemplar::XGemConfig cfg{1.0, 0.01, static_cast<std::size_t>(state.range(0)), 0.5, 0.0};
  const int y = clf.predict(x).front();
  for (auto _ : state) {
    // A zero convergence tolerance runs until max_iters unless a step stalls.
    benchmark::DoNotOptimize(exemplar::find_xgem(x, y, 1 - y, gen, clf, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_XgemSteps)->Arg(50);

void BM_FitSigmoid(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = 3.0 * static_cast<double>(i) / static_cast<double>(n);
    ys[i] = 1.0 / (1.0 + std::exp(-4.0 * (xs[i] - 1.2))) + noise(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(analytics::fit_sigmoid(xs, ys));
}
BENCHMARK(BM_FitSigmoid)->Arg(50)->Arg(300)->Arg(2000);

// Scores sigmoid(x) for a one-column feature, groups with shifted scores.
void BM_Recalibration(benchmark::State& state) {
  const nn::Classifier base(nn::Mlp({{1, 2}, {}, nn::OutputHead::softmax},
                                    {nd::Tensor::matrix({{0.0, 1.0}}), nd::Tensor::matrix({{0.0, 0.0}})}));
  const auto per_cell = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  data::Dataset val;
  std::vector<double> f;
  for (int y = 0; y < 2; ++y) {
    for (int a = 0; a < 2; ++a) {
      std::normal_distribution<double> s((a ? 0.75 : 0.25) + (y ? 0.05 : -0.05), 0.12);
      for (std::size_t i = 0; i < per_cell; ++i) {
        const double p = std::clamp(s(rng), 0.001, 0.999);
        f.push_back(std::log(p / (1.0 - p)));
        val.labels.push_back(y);
        val.attributes.push_back(a);
      }
    }
  }
  const std::size_t rows = f.size();
  val.features = nd::Tensor({rows, 1}, std::move(f));
  audit::RecalibrationConfig cfg;
  cfg.tau = 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(audit::recalibrate_equalized_odds(base, val, cfg));
}
BENCHMARK(BM_Recalibration)->Arg(250)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
