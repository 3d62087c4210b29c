// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "xgem/analytics/manifold.hpp"
#include "xgem/analytics/reliability.hpp"
#include "xgem/audit/oracle.hpp"
#include "xgem/data/attributed.hpp"
#include "xgem/data/idx.hpp"
#include "xgem/data/parabola.hpp"
#include "xgem/error.hpp"
#include "xgem/experiments/bias_audit.hpp"
#include "xgem/experiments/manifolds.hpp"
#include "xgem/experiments/mnist.hpp"
#include "xgem/experiments/parabola.hpp"
#include "xgem/experiments/runner.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/nd/graph.hpp"
#include "xgem/random.hpp"

namespace {

using namespace xgem;
namespace fs = std::filesystem;
using nd::Tensor;
using nd::Var;
using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradAbsTol = 1e-6;
constexpr double kGradSeconds = 30.0;
constexpr std::size_t kFig1MinPairs = 20;
constexpr double kFig1OnManifold = 0.15;
constexpr double kFig1AdversarialFraction = 0.90;
constexpr double kFig1Seconds = 120.0;
constexpr std::size_t kAlg1Starts = 50;
constexpr std::size_t kAlg1Grid = 2001;
constexpr double kAlg1Fraction = 0.95;
constexpr double kOddsTolerance = 0.005;
constexpr double kOddsTau = 0.95;
constexpr double kBiasRatio = 2.0;
constexpr double kStratumRatio = 5.0;
constexpr double kBiasSeconds = 300.0;
constexpr std::size_t kFitManifolds = 200;
constexpr double kFitNoise = 0.02;
constexpr double kFitResidualSlack = 1e-3;
constexpr double kFitRecovery = 1e-6;
constexpr double kAlignX0 = 1e-6;
constexpr std::size_t kMnistPairs = 10;
constexpr std::size_t kMnistMinSuccess = 9;
constexpr double kMnistSeconds = 600.0;

struct Outcome {
  enum class State { pass, fail, skip } state = State::fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::State::pass : Outcome::State::fail, std::move(detail)}; }

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "xgem_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Shared parabola world (criteria 3 and 7).
const experiments::ParabolaFig1Config& parabola_cfg() {
  static const experiments::ParabolaFig1Config c = [] {
    experiments::ParabolaFig1Config x;
    x.resolve();
    return x;
  }();
  return c;
}

const experiments::ParabolaWorld& parabola_world() {
  static const experiments::ParabolaWorld w = experiments::build_parabola_world(parabola_cfg());
  return w;
}

// ---------------------------------------------------------------------------
// 1. Gradients against central differences.

Var weighted(Var v, std::uint64_t seed) {
  Rng rng(seed);
  return nd::sum(v * v.graph->constant(uniform_tensor(v.graph->value(v).shape(), rng, -1.0, 1.0)));
}

Outcome gradients() {
  const auto t0 = Clock::now();
  Rng rng(20240601);
  auto m = [&](std::size_t r, std::size_t c, double lo = -2.0, double hi = 2.0) {
    return uniform_tensor({r, c}, rng, lo, hi);
  };
  const int labels[] = {0, 2, 1};
  Tensor target;  // soft targets are constants, redrawn with each input
  using Make = std::function<std::vector<Tensor>()>;
  struct Case {
    const char* op;
    testing::ScalarFn fn;
    Make inputs;
  };
  const std::vector<Case> cases{
      {"add", [](auto v) { return weighted(v[0] + v[1], 1); }, [&] { return std::vector{m(2, 3), m(2, 3)}; }},
      {"sub", [](auto v) { return weighted(v[0] - v[1], 2); }, [&] { return std::vector{m(2, 3), m(2, 3)}; }},
      {"mul", [](auto v) { return weighted(v[0] * v[1], 3); }, [&] { return std::vector{m(2, 3), m(2, 3)}; }},
      {"mul_scalar", [](auto v) { return weighted(v[0] * v[1], 4); }, [&] { return std::vector{m(2, 3), m(1, 1)}; }},
      {"scale", [](auto v) { return weighted(v[0] * -1.7, 5); }, [&] { return std::vector{m(2, 3)}; }},
      {"shift", [](auto v) { return weighted(v[0] + 0.3, 6); }, [&] { return std::vector{m(2, 3)}; }},
      {"neg", [](auto v) { return weighted(-v[0], 7); }, [&] { return std::vector{m(2, 3)}; }},
      {"relu", [](auto v) { return weighted(nd::relu(v[0]), 8); }, [&] { return std::vector{m(3, 2)}; }},
      {"sigmoid", [](auto v) { return weighted(nd::sigmoid(v[0]), 9); }, [&] { return std::vector{m(3, 2)}; }},
      {"tanh", [](auto v) { return weighted(nd::tanh(v[0]), 10); }, [&] { return std::vector{m(3, 2)}; }},
      {"exp", [](auto v) { return weighted(nd::exp(v[0]), 11); }, [&] { return std::vector{m(3, 2)}; }},
      {"log", [](auto v) { return weighted(nd::log(v[0]), 12); }, [&] { return std::vector{m(3, 2, 0.1, 3.0)}; }},
      {"matmul", [](auto v) { return weighted(nd::matmul(v[0], v[1]), 13); },
       [&] { return std::vector{m(3, 4), m(4, 2)}; }},
      {"sum", [](auto v) { return nd::sum(v[0]); }, [&] { return std::vector{m(2, 2)}; }},
      {"softmax", [](auto v) { return weighted(nd::softmax(v[0]), 14); }, [&] { return std::vector{m(3, 3, -4, 4)}; }},
      {"softmax_cross_entropy", [&](auto v) { return nd::softmax_cross_entropy(v[0], labels); },
       [&] { return std::vector{m(3, 3, -4, 4)}; }},
      {"cross_entropy_labels", [&](auto v) { return nd::cross_entropy(nd::softmax(v[0]), labels); },
       [&] { return std::vector{m(3, 3, -4, 4)}; }},
      {"cross_entropy_soft", [&](auto v) { return nd::cross_entropy(nd::softmax(v[0]), target); },
       [&] {
         target = m(3, 3, 0.0, 1.0);
         return std::vector{m(3, 3, -4, 4)};
       }},
      {"squared_error", [](auto v) { return nd::squared_error(v[0], v[1]); }, [&] { return std::vector{m(3, 3), m(3, 3)}; }},
      {"bce", [&](auto v) { return nd::bce(nd::sigmoid(v[0]), target); },
       [&] {
         target = m(3, 3, 0.0, 1.0);
         return std::vector{m(3, 3, -4, 4)};
       }},
      {"gaussian_kl", [](auto v) { return nd::gaussian_kl(v[0], v[1]); }, [&] { return std::vector{m(2, 3), m(2, 3)}; }},
  };
  std::size_t failures = 0, checked = 0;
  double worst = 0.0;
  std::string first;
  for (const auto& c : cases) {
    for (int t = 0; t < 100; ++t) {
      const auto r = testing::check_gradients(c.fn, c.inputs(), 1e-5, kGradRelTol, kGradAbsTol);
      checked += r.checked;
      worst = std::max(worst, r.worst_relative);
      if (!r.ok()) {
        failures += r.failures;
        if (first.empty()) first = std::string(c.op) + ": " + r.first_failure;
      }
    }
  }
  const double secs = seconds_since(t0);
  return verdict(failures == 0 && secs < kGradSeconds,
                 std::to_string(cases.size()) + " ops x 100 inputs, " + std::to_string(checked) + " entries, " +
                     std::to_string(failures) + " failures, worst rel " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s" +
                     (first.empty() ? "" : "; " + first));
}

// ---------------------------------------------------------------------------
// 2. Parabola: xGEMs stay on the curve, PGD leaves it.

Outcome parabola() {
  const auto t0 = Clock::now();
  experiments::ParabolaFig1Config cfg;
  const auto r = experiments::run_parabola_fig1(cfg, work_dir() / "parabola");
  const double secs = seconds_since(t0);
  const bool ok = r.pairs.size() >= kFig1MinPairs && r.max_xgem_distance <= kFig1OnManifold &&
                  r.fraction_adversarial_farther >= kFig1AdversarialFraction && secs < kFig1Seconds;
  return verdict(ok, std::to_string(r.pairs.size()) + " pairs, max xGEM distance " + fmt(r.max_xgem_distance) +
                         ", adversarial farther in " + fmt(100.0 * r.fraction_adversarial_farther) + "%, " +
                         fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------
// 3. Converged traversal vs dense latent grid.

Outcome alg1_grid() {
  const auto& cfg = parabola_cfg();
  const auto& w = parabola_world();
  const double span = w.latent_max - w.latent_min;
  const double lo = w.latent_min - 0.25 * span, hi = w.latent_max + 0.25 * span;
  const double h = (hi - lo) / static_cast<double>(kAlg1Grid - 1);
  exemplar::XGemConfig xc = cfg.xgem;
  xc.result_mode = exemplar::ResultMode::converged;
  xc.convergence_tol = 1e-13;
  xc.max_iters = 20000;

  std::mt19937_64 rng(experiments::derive_seed(cfg.seed, "alg1_starts"));
  std::uniform_int_distribution<std::size_t> pick(0, w.data.size() - 1);
  std::size_t matched = 0;
  double worst = 0.0;
  for (std::size_t s = 0; s < kAlg1Starts; ++s) {
    const std::size_t i = pick(rng);
    const Tensor x = w.data.sample(i);
    const int y = w.data.labels[i];
    const auto r = exemplar::find_xgem(x, y, 1 - y, w.generator, w.classifier, xc);
    double best = std::numeric_limits<double>::infinity(), z_best = 0.0;
    for (std::size_t k = 0; k < kAlg1Grid; ++k) {
      const double z = lo + h * static_cast<double>(k);
      const double o = exemplar::xgem_objective(Tensor::vector({z}), x, 1 - y, w.generator.generator(), w.classifier,
                                                xc.lambda);
      if (o < best) {
        best = o;
        z_best = z;
      }
    }
    const double gap = std::abs(r.exemplar_latent[0] - z_best);
    worst = std::max(worst, gap);
    if (gap <= h) ++matched;
  }
  const double frac = static_cast<double>(matched) / static_cast<double>(kAlg1Starts);
  return verdict(frac >= kAlg1Fraction, std::to_string(matched) + "/" + std::to_string(kAlg1Starts) +
                                            " within one grid spacing (" + fmt(h, 3) + "), worst gap " + fmt(worst, 3));
}

// ---------------------------------------------------------------------------
// 4. Equalized odds vs an exhaustive grid over thresholds and flip rates.

// Best accuracy over per-group thresholds (step 0.01) and flip probabilities
// (step 0.05) whose rate gaps are within tol; rates counted record by record.
double brute_force_accuracy(const std::vector<double>& score, const data::Dataset& val, double tol) {
  struct Point {
    double fpr, tpr, correct;
  };
  std::array<std::vector<Point>, 2> pts;
  for (int g = 0; g < 2; ++g) {
    for (int ti = 0; ti <= 100; ++ti) {
      const double t = ti / 100.0;
      double pos = 0, neg = 0, hard_pos = 0, hard_neg = 0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        if (val.labels[i] != g) continue;
        const bool hard = score[i] >= t;
        if (val.attributes[i] == 1) {
          pos += 1;
          hard_pos += hard;
        } else {
          neg += 1;
          hard_neg += hard;
        }
      }
      for (int ui = 0; ui <= 20; ++ui) {
        for (int qi = 0; qi <= 20; ++qi) {
          const double u = ui / 20.0, q = qi / 20.0;  // P(1 | hard), P(1 | not hard)
          const double says_pos = u * hard_pos + q * (pos - hard_pos);
          const double says_neg = u * hard_neg + q * (neg - hard_neg);
          pts[g].push_back({says_neg / neg, says_pos / pos, says_pos + (neg - says_neg)});
        }
      }
    }
  }
  // Bucket group 1 by (fpr, tpr) so the pairing only looks at neighbours.
  const double cell = tol;
  std::map<std::pair<long, long>, std::vector<Point>> buckets;
  for (const auto& p : pts[1]) buckets[{std::lround(p.fpr / cell), std::lround(p.tpr / cell)}].push_back(p);
  double best = -1.0;
  for (const auto& a : pts[0]) {
    const long fx = std::lround(a.fpr / cell), fy = std::lround(a.tpr / cell);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        const auto it = buckets.find({fx + dx, fy + dy});
        if (it == buckets.end()) continue;
        for (const auto& b : it->second) {
          if (std::abs(a.fpr - b.fpr) <= tol && std::abs(a.tpr - b.tpr) <= tol) {
            best = std::max(best, a.correct + b.correct);
          }
        }
      }
    }
  }
  return best / static_cast<double>(val.size());
}

Outcome equalized_odds() {
  // Two oracles on the same attributed validation split: a well trained one
  // and a deliberately weak one (few rows, noisy renders) that needs real
  // threshold moves and label flips.
  struct Setup {
    const char* name;
    std::size_t train_rows;
    std::size_t epochs;
    double noise;
  };
  const Setup setups[] = {{"trained", 2000, 20, 0.05}, {"weak", 80, 2, 0.3}};
  bool ok = true;
  std::string detail;
  for (const auto& s : setups) {
    data::AttributedConfig dc;
    dc.noise = s.noise;
    dc.n = 1000;
    dc.seed = experiments::derive_seed(1, "odds_validation");
    const data::Dataset val = data::gen_attributed(dc);
    dc.n = s.train_rows;
    dc.seed = experiments::derive_seed(1, "odds_train");
    const data::Dataset train = data::gen_attributed(dc);
    nn::TrainConfig tc{s.epochs, 16, 1e-3};
    tc.seed = experiments::derive_seed(1, "odds_oracle");
    const nn::MlpSpec spec{{256, 32, 2}, {nn::Activation::relu}, nn::OutputHead::softmax};
    const auto base = nn::train_classifier(train.features, train.attributes, spec, tc).model;

    audit::RecalibrationConfig rc;
    rc.tau = kOddsTau;
    rc.tolerance = kOddsTolerance;
    rc.seed = 3;
    try {
      const auto r = audit::recalibrate_equalized_odds(base, val, rc);
      const Tensor p = base.predict_proba(val.features);
      std::vector<double> score(val.size());
      for (std::size_t i = 0; i < val.size(); ++i) score[i] = p.at(i, 1);
      const double brute = brute_force_accuracy(score, val, kOddsTolerance);
      const bool good = r.after.fpr_gap() <= kOddsTolerance && r.after.fnr_gap() <= kOddsTolerance &&
                        r.after.accuracy > kOddsTau && r.after.accuracy >= brute - 1e-9;
      ok = ok && good;
      detail += std::string(detail.empty() ? "" : "; ") + s.name + ": FPR gap " + fmt(r.after.fpr_gap(), 3) +
                ", FNR gap " + fmt(r.after.fnr_gap(), 3) + ", accuracy " + fmt(r.after.accuracy) + " (before " +
                fmt(r.before.accuracy) + ", grid best " + fmt(brute) + ")" + (r.identity ? ", identity" : ", adjusted");
    } catch (const InfeasibleError& e) {
      ok = false;
      detail += std::string(detail.empty() ? "" : "; ") + s.name + ": infeasible: " + e.what();
    }
  }
  return verdict(ok, detail);
}

// ---------------------------------------------------------------------------
// 5. Bias detection contrast.

experiments::BiasAuditReport& bias_report() {
  static experiments::BiasAuditReport r = experiments::run_bias_audit({}, work_dir() / "bias_audit");
  return r;
}

Outcome bias_contrast() {
  const auto t0 = Clock::now();
  const auto& r = bias_report();
  const double secs = seconds_since(t0);
  const double m1 = r.unbiased.overall.fraction().value_or(0.0);
  const double m2 = r.biased.overall.fraction().value_or(0.0);
  // Most affected stratum under the biased classifier.
  int by = 0, ba = 0;
  double worst = -1.0;
  for (int y = 0; y < 2; ++y) {
    for (int a = 0; a < 2; ++a) {
      const auto f = r.biased.by_label_attribute[y][a].fraction();
      if (f && *f > worst) {
        worst = *f;
        by = y;
        ba = a;
      }
    }
  }
  const double s1 = r.unbiased.by_label_attribute[by][ba].fraction().value_or(0.0);
  const bool ratio_ok = m2 >= kBiasRatio * m1 && m2 > 0.0;
  const bool stratum_ok = worst >= kStratumRatio * s1 && worst > 0.0;
  return verdict(ratio_ok && stratum_ok && secs < kBiasSeconds,
                 "metric f2 " + fmt(m2) + " vs f1 " + fmt(m1) + ", stratum y=" + std::to_string(by) +
                     " a=" + std::to_string(ba) + " " + fmt(worst) + " vs " + fmt(s1) + ", " + fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------
// 6. Logistic fit vs exhaustive grid.

double logistic(double k, double x0, double x) { return 1.0 / (1.0 + std::exp(-k * (x - x0))); }

double grid_residual(const std::vector<double>& xs, const std::vector<double>& ys, double k, double x0) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -100; i <= 100; ++i) {
    for (int j = -60; j <= 60; ++j) {
      const double kk = k + 0.01 * i, xx = x0 + 0.005 * j;
      double s = 0.0;
      for (std::size_t n = 0; n < xs.size(); ++n) {
        const double d = logistic(kk, xx, xs[n]) - ys[n];
        s += d * d;
      }
      best = std::min(best, s);
    }
  }
  return best;
}

Outcome logistic_fits() {
  std::mt19937_64 rng(experiments::derive_seed(1, "logistic_fits"));
  std::uniform_real_distribution<double> kd(1.0, 12.0), xd(0.5, 2.5);
  std::normal_distribution<double> noise(0.0, kFitNoise);
  std::vector<double> xs(60);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 3.0 * static_cast<double>(i) / 59.0;
  std::size_t over = 0, off = 0;
  double worst_excess = -std::numeric_limits<double>::infinity(), worst_recovery = 0.0;
  for (std::size_t m = 0; m < kFitManifolds; ++m) {
    const double k = kd(rng), x0 = xd(rng);
    std::vector<double> clean(xs.size()), noisy(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      clean[i] = logistic(k, x0, xs[i]);
      noisy[i] = clean[i] + noise(rng);
    }
    const auto fit = analytics::fit_sigmoid(xs, noisy);
    const double excess = fit.residual - grid_residual(xs, noisy, k, x0);
    worst_excess = std::max(worst_excess, excess);
    if (excess > kFitResidualSlack) ++over;

    const auto exact = analytics::fit_sigmoid(xs, clean);
    const double rec = std::max(std::abs(exact.k - k), std::abs(exact.x0 - x0));
    worst_recovery = std::max(worst_recovery, rec);
    if (rec > kFitRecovery) ++off;
  }
  return verdict(over == 0 && off == 0, std::to_string(kFitManifolds) + " noisy fits, worst residual - grid " +
                                            fmt(worst_excess, 3) + "; noiseless recovery worst " +
                                            fmt(worst_recovery, 3) + " (" + std::to_string(off) + " off)");
}

// ---------------------------------------------------------------------------
// 7. Shift alignment on real trajectories and synthetic curves.

Outcome alignment() {
  const auto& w = parabola_world();
  std::vector<analytics::ConfidenceManifold> ms;
  std::vector<analytics::LogisticFit> fits;
  exemplar::XGemConfig xc = parabola_cfg().xgem;
  xc.result_mode = exemplar::ResultMode::converged;
  for (std::size_t i = 0; i < w.data.size() && ms.size() < 30; i += 7) {
    const int y = w.data.labels[i];
    const auto r = exemplar::find_xgem(w.data.sample(i), y, 1 - y, w.generator, w.classifier, xc);
    auto m = analytics::confidence_manifold(r.trajectory, w.classifier);
    const auto f = analytics::fit_logistic(m);
    if (f.degenerate) continue;
    ms.push_back(std::move(m));
    fits.push_back(f);
  }
  std::mt19937_64 rng(experiments::derive_seed(1, "alignment"));
  std::uniform_real_distribution<double> kd(1.0, 10.0), xd(0.3, 2.7);
  for (int s = 0; s < 30; ++s) {
    analytics::ConfidenceManifold m;
    const double k = kd(rng), x0 = xd(rng);
    for (int i = 0; i < 50; ++i) {
      const double d = analytics::quantize(3.0 * i / 49.0);
      m.points.push_back({d, 1.0 - logistic(k, x0, d)});
    }
    fits.push_back(analytics::fit_logistic(m));
    ms.push_back(std::move(m));
  }
  const auto aligned = analytics::shift_align(ms, fits);
  double worst = 0.0;
  bool bitwise = true;
  for (std::size_t j = 0; j < ms.size(); ++j) {
    worst = std::max(worst, std::abs(analytics::fit_logistic(aligned[j]).x0));
    const auto a = ms[j].distances(), b = aligned[j].distances();
    for (std::size_t p = 0; p < a.size(); ++p) {
      for (std::size_t q = p + 1; q < a.size(); ++q) bitwise = bitwise && (a[q] - a[p]) == (b[q] - b[p]);
    }
  }
  return verdict(worst < kAlignX0 && bitwise, std::to_string(ms.size()) + " manifolds, worst refit |x0| " +
                                                  fmt(worst, 3) + ", pairwise distances " +
                                                  (bitwise ? "bitwise equal" : "changed"));
}

// ---------------------------------------------------------------------------
// 8. Reliability diagram sanity.

Outcome reliability() {
  std::mt19937_64 rng(experiments::derive_seed(1, "reliability"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 100000;
  std::vector<double> conf(n);
  std::vector<bool> correct(n);
  for (std::size_t i = 0; i < n; ++i) {
    conf[i] = u(rng);
    correct[i] = u(rng) < conf[i];
  }
  const auto d = analytics::reliability_from_predictions(conf, correct, 10);
  std::size_t min_count = n;
  double worst = 0.0;
  for (const auto& b : d.bins) {
    if (b.count == 0) continue;
    min_count = std::min(min_count, b.count);
    worst = std::max(worst, std::abs(*b.accuracy - *b.mean_confidence));
  }
  const double bound = 2.0 / std::sqrt(static_cast<double>(min_count));

  std::vector<double> half(1000, 0.5);
  std::vector<bool> alternating(1000);
  for (std::size_t i = 0; i < alternating.size(); ++i) alternating[i] = i % 2 == 0;
  const auto c = analytics::reliability_from_predictions(half, alternating, 10);
  std::size_t filled = 0;
  bool exact = true;
  for (const auto& b : c.bins) {
    if (b.count == 0) continue;
    ++filled;
    exact = exact && *b.mean_confidence == 0.5 && *b.accuracy == 0.5;
  }
  return verdict(worst < bound && filled == 1 && exact,
                 "calibrated: max deviation " + fmt(worst, 3) + " < " + fmt(bound, 3) + "; constant 0.5: " +
                     std::to_string(filled) + " bin" + (exact ? " at (0.5, 0.5)" : " off (0.5, 0.5)"));
}

// ---------------------------------------------------------------------------
// 9. MNIST transitions (needs the IDX files).

fs::path mnist_dir() {
  if (const char* env = std::getenv("XGEM_MNIST_DIR")) return env;
  return fs::path(XGEM_SOURCE_DIR) / "data" / "mnist";
}

// Default config on the files in mnist_dir(). A file with fewer records than
// train + holdout (e.g. a 5000-image subset) keeps the holdout and trains on
// the rest.
experiments::MnistXgemConfig mnist_config() {
  experiments::MnistXgemConfig cfg;
  cfg.images = mnist_dir() / "train-images-idx3-ubyte";
  cfg.labels = mnist_dir() / "train-labels-idx1-ubyte";
  if (!experiments::mnist_available(cfg)) return cfg;
  const std::size_t n = data::read_idx_labels(cfg.labels).size();
  if (n < cfg.train_size + cfg.holdout_size && n > 2 * cfg.holdout_size) cfg.train_size = n - cfg.holdout_size;
  return cfg;
}

Outcome mnist() {
  const auto cfg = mnist_config();
  if (!experiments::mnist_available(cfg)) {
    return {Outcome::State::skip, "IDX files not found under " + mnist_dir().string() + " (set XGEM_MNIST_DIR)"};
  }
  const auto t0 = Clock::now();
  const auto r = experiments::run_mnist_xgem(cfg, work_dir() / "mnist");
  const double secs = seconds_since(t0);
  return verdict(r.pairs.size() == kMnistPairs && r.successes >= kMnistMinSuccess && secs < kMnistSeconds,
                 std::to_string(r.successes) + "/" + std::to_string(r.pairs.size()) +
                     " pairs reach the target at confidence >= 0.5, " + std::to_string(cfg.train_size) +
                     " training images, classifier accuracy " +
                     fmt(r.classifier_accuracy) + ", " + fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------------------
// 10. Every experiment replays bitwise from its manifest.

void write_digit_fixture(const fs::path& dir) {
  fs::create_directories(dir);
  const std::size_t n = 500;
  data::IdxImages img{n, 8, 8, std::vector<std::uint8_t>(n * 64)};
  std::vector<std::uint8_t> labels(n);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> jitter(0, 30);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 10);
    labels[i] = static_cast<std::uint8_t>(c);
    for (int p = 0; p < 64; ++p) img.pixels[i * 64 + p] = static_cast<std::uint8_t>(jitter(rng));
    for (int r = (c / 4) * 2 + 1, r1 = r + 3; r < r1; ++r) {
      for (int col = c % 4 + 1; col < c % 4 + 4; ++col) {
        img.pixels[i * 64 + r * 8 + col] = static_cast<std::uint8_t>(220 + jitter(rng));
      }
    }
  }
  data::write_idx_images(dir / "images", img);
  data::write_idx_labels(dir / "labels", labels);
}

Outcome determinism() {
  // parabola and bias_audit reuse the runs of criteria 2 and 5.
  bias_report();
  if (!fs::exists(work_dir() / "parabola" / experiments::kManifestName)) {
    experiments::run_parabola_fig1({}, work_dir() / "parabola");
  }
  experiments::run_confidence_manifolds({}, work_dir() / "manifolds");

  // The digit experiment replays on real files when present, otherwise on a
  // small generated IDX pair.
  auto mc = mnist_config();
  std::string mnist_source = "IDX files";
  if (!experiments::mnist_available(mc)) {
    write_digit_fixture(work_dir() / "digits");
    mc.images = work_dir() / "digits" / "images";
    mc.labels = work_dir() / "digits" / "labels";
    mc.train_size = 400;
    mc.holdout_size = 100;
    mc.latent_dim = 4;
    mc.vae_hidden = {32};
    mc.vae_train = {15, 32, 3e-3};
    mc.gate_threshold = 0.3;
    mc.classifier_hidden = {16};
    mc.classifier_train = {15, 32, 3e-3};
    mnist_source = "generated IDX";
  }
  if (!fs::exists(work_dir() / "mnist" / experiments::kManifestName)) {
    experiments::run_mnist_xgem(mc, work_dir() / "mnist");
  }

  bool ok = true;
  std::string detail;
  for (const char* run : {"parabola", "bias_audit", "manifolds", "mnist"}) {
    const auto check = experiments::replay_manifest(work_dir() / run, work_dir() / (std::string(run) + "_replay"));
    ok = ok && check.ok() && !check.matched.empty();
    detail += std::string(detail.empty() ? "" : ", ") + run + " " + std::to_string(check.matched.size()) + "/" +
              std::to_string(check.matched.size() + check.mismatched.size() + check.missing.size()) + " CSV";
  }
  return verdict(ok, detail + " identical (digits on " + mnist_source + ")");
}

// ---------------------------------------------------------------------------
// 11. IDX parsing.

void put_u32(std::string& s, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) s.push_back(static_cast<char>((v >> shift) & 0xFF));
}

template <class Fn>
bool throws_kind(Fn fn, FormatError::Kind kind) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.kind() == kind;
  } catch (...) {
    return false;
  }
  return false;
}

Outcome idx_parsing() {
  const fs::path dir = work_dir() / "idx";
  fs::create_directories(dir);

  data::IdxImages img{3, 4, 5, {}};
  for (std::size_t i = 0; i < 60; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 17 % 256));
  const std::vector<std::uint8_t> labels{4, 0, 9};
  data::write_idx_images(dir / "img", img);
  data::write_idx_labels(dir / "lbl", labels);
  const auto back = data::read_idx_images(dir / "img");
  const bool roundtrip = back.count == 3 && back.rows == 4 && back.cols == 5 && back.pixels == img.pixels &&
                         data::read_idx_labels(dir / "lbl") == labels;

  std::string bytes;
  put_u32(bytes, data::kIdxImageMagic);
  put_u32(bytes, 1);
  put_u32(bytes, 2);
  put_u32(bytes, 2);
  for (int b : {0, 255, 128, 64}) bytes.push_back(static_cast<char>(b));
  io::write_text(dir / "hand_img", bytes);
  std::string lbytes;
  put_u32(lbytes, data::kIdxLabelMagic);
  put_u32(lbytes, 1);
  lbytes.push_back(static_cast<char>(7));
  io::write_text(dir / "hand_lbl", lbytes);
  const auto ds = data::load_idx(dir / "hand_img", dir / "hand_lbl");
  const auto v = ds.features.values();
  const bool hand = ds.size() == 1 && ds.labels[0] == 7 && v.size() == 4 && v[0] == 0.0 && v[1] == 1.0 &&
                    v[2] == 128.0 / 255.0 && v[3] == 64.0 / 255.0;

  io::write_text(dir / "truncated", bytes.substr(0, bytes.size() - 1));
  const bool magic = throws_kind([&] { data::read_idx_images(dir / "lbl"); }, FormatError::Kind::bad_magic);
  const bool trunc = throws_kind([&] { data::read_idx_images(dir / "truncated"); }, FormatError::Kind::truncated);
  const bool count = throws_kind([&] { data::load_idx(dir / "img", dir / "hand_lbl"); }, FormatError::Kind::count_mismatch);
  return verdict(roundtrip && hand && magic && trunc && count,
                 std::string("roundtrip ") + (roundtrip ? "ok" : "differs") + ", hand-built 2x2 " +
                     (hand ? "exact" : "wrong") + ", bad magic " + (magic ? "typed" : "untyped") + ", truncation " +
                     (trunc ? "typed" : "untyped") + ", count mismatch " + (count ? "typed" : "untyped"));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "gradient correctness", gradients},
      {2, "parabola xGEM vs PGD", parabola},
      {3, "traversal vs latent grid minimizer", alg1_grid},
      {4, "equalized-odds recalibration", equalized_odds},
      {5, "bias detection contrast", bias_contrast},
      {6, "logistic fit vs grid", logistic_fits},
      {7, "shift alignment", alignment},
      {8, "reliability diagram sanity", reliability},
      {9, "MNIST transitions", mnist},
      {10, "determinism from manifests", determinism},
      {11, "IDX parsing", idx_parsing},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::State::fail, std::string("threw: ") + e.what()};
    }
    const char* tag = o.state == Outcome::State::pass ? "PASS" : o.state == Outcome::State::skip ? "SKIP" : "FAIL";
    if (o.state == Outcome::State::fail) ++failed;
    std::cout << tag << " criterion " << c.id << ": " << c.name << " | " << o.detail << " [" << fmt(seconds_since(t0), 3)
              << " s]" << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : std::string("acceptance: ok"))
            << std::endl;
  return failed ? 1 : 0;
}
