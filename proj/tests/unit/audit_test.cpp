#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "xgem/audit/confounding.hpp"
#include "xgem/audit/oracle.hpp"
#include "xgem/error.hpp"

namespace audit = xgem::audit;
namespace ex = xgem::exemplar;
namespace nn = xgem::nn;
using xgem::data::Dataset;
using xgem::nd::Tensor;

namespace {

// P(a = 1 | x) = sigmoid(x), so a feature of logit(s) scores exactly s.
nn::Classifier score_model() {
  nn::MlpSpec spec{{1, 2}, {}, nn::OutputHead::softmax};
  return nn::Classifier(nn::Mlp(spec, {Tensor::matrix({{0.0, 1.0}}), Tensor::matrix({{0.0, 0.0}})}));
}

double logit(double s) { return std::log(s / (1.0 - s)); }

struct Rec {
  double score;
  int y, a;
};

Dataset make_set(const std::vector<Rec>& recs) {
  Dataset d;
  std::vector<double> f;
  for (const auto& r : recs) {
    f.push_back(logit(r.score));
    d.labels.push_back(r.y);
    d.attributes.push_back(r.a);
  }
  d.features = Tensor({recs.size(), 1}, std::move(f));
  return d;
}

// Per-group scores drawn around a centre for each attribute value.
std::vector<Rec> synthetic(std::uint64_t seed, double sep0, double sep1, double sd, std::size_t per_cell) {
  std::mt19937_64 rng(seed);
  std::vector<Rec> out;
  for (int y = 0; y < 2; ++y) {
    const double sep = y == 0 ? sep0 : sep1;
    for (int a = 0; a < 2; ++a) {
      std::normal_distribution<double> nd(a == 1 ? 0.5 + sep : 0.5 - sep, sd);
      for (std::size_t i = 0; i < per_cell; ++i) out.push_back({std::clamp(nd(rng), 0.001, 0.999), y, a});
    }
  }
  return out;
}

// Brute force: thresholds on a coarse grid, flip probabilities in steps of
// 1/8, rates counted record by record.
struct BruteBest {
  double accuracy = -1.0;
};

BruteBest brute_force(const std::vector<Rec>& recs, double tol) {
  std::array<std::array<double, 2>, 2> counts{};  // [y][a]
  for (const auto& r : recs) counts[r.y][r.a] += 1.0;
  const double n = static_cast<double>(recs.size());
  std::vector<double> ts;
  for (int k = 0; k <= 20; ++k) ts.push_back(k * 0.05);
  // above[y][a][t] = fraction of the cell with score >= t
  std::array<std::array<std::vector<double>, 2>, 2> above;
  for (int y = 0; y < 2; ++y)
    for (int a = 0; a < 2; ++a) {
      for (double t : ts) {
        double c = 0.0;
        for (const auto& r : recs) c += (r.y == y && r.a == a && r.score >= t) ? 1.0 : 0.0;
        above[y][a].push_back(c / counts[y][a]);
      }
    }
  BruteBest best;
  for (std::size_t t0 = 0; t0 < ts.size(); ++t0)
    for (std::size_t t1 = 0; t1 < ts.size(); ++t1)
      for (int i0 = 0; i0 <= 8; ++i0)
        for (int j0 = 0; j0 <= 8; ++j0)
          for (int i1 = 0; i1 <= 8; ++i1)
            for (int j1 = 0; j1 <= 8; ++j1) {
              const double u[2] = {1.0 - i0 / 8.0, 1.0 - i1 / 8.0};
              const double q[2] = {j0 / 8.0, j1 / 8.0};
              const std::size_t t[2] = {t0, t1};
              double fpr[2], tpr[2], err = 0.0;
              for (int y = 0; y < 2; ++y) {
                const double f = above[y][0][t[y]], tp = above[y][1][t[y]];
                fpr[y] = f * u[y] + (1.0 - f) * q[y];
                tpr[y] = tp * u[y] + (1.0 - tp) * q[y];
                err += counts[y][0] * fpr[y] + counts[y][1] * (1.0 - tpr[y]);
              }
              if (std::abs(fpr[0] - fpr[1]) > tol || std::abs(tpr[0] - tpr[1]) > tol) continue;
              best.accuracy = std::max(best.accuracy, 1.0 - err / n);
            }
  return best;
}

ex::BatchItem item(std::size_t i, Tensor exemplar, int target, ex::TerminalStatus status) {
  ex::XGemResult r;
  r.exemplar = std::move(exemplar);
  r.exemplar_latent = Tensor::vector({0.0});
  r.trajectory.target_label = target;
  r.trajectory.status = status;
  return {i, std::move(r), {}};
}

}  // namespace

TEST(Oracle, RuleProbabilities) {
  const audit::GroupRule r{0.4, 0.25, 0.1};
  EXPECT_DOUBLE_EQ(r.positive_probability(0.4), 0.75);
  EXPECT_DOUBLE_EQ(r.positive_probability(0.39), 0.1);
  EXPECT_TRUE(audit::GroupRule{}.is_identity());
  EXPECT_THROW(audit::ProxyOracle(score_model(), {audit::GroupRule{1.5, 0, 0}, audit::GroupRule{}}, 0),
               xgem::ConfigError);
}

TEST(Oracle, PredictionsAreKeyedOnTheSample) {
  const audit::ProxyOracle o(score_model(), {audit::GroupRule{0.5, 0.3, 0.3}, audit::GroupRule{0.5, 0.3, 0.3}}, 11);
  std::vector<int> first, second;
  for (int i = 0; i < 200; ++i) first.push_back(o.predict(Tensor::vector({0.01 * i}), 0));
  for (int i = 199; i >= 0; --i) second.push_back(o.predict(Tensor::vector({0.01 * i}), 0));
  std::reverse(second.begin(), second.end());
  EXPECT_EQ(first, second);
  // Scores >= 0.5 give 1 with probability 0.7.
  const double ones = std::accumulate(first.begin(), first.end(), 0.0) / 200.0;
  EXPECT_NEAR(ones, 0.7, 3.0 * std::sqrt(0.21 / 200.0));
}

TEST(Recalibration, AlreadyEqualizedBaseIsIdentity) {
  // Same score layout in both groups, no errors.
  std::vector<Rec> recs;
  for (int y = 0; y < 2; ++y)
    for (int k = 0; k < 50; ++k) {
      recs.push_back({0.9, y, 1});
      recs.push_back({0.1, y, 0});
    }
  const auto r = audit::recalibrate_equalized_odds(score_model(), make_set(recs), {});
  EXPECT_TRUE(r.identity);
  EXPECT_TRUE(r.oracle.rules()[0].is_identity());
  EXPECT_TRUE(r.oracle.rules()[1].is_identity());
  EXPECT_EQ(r.after.accuracy, r.before.accuracy);
  EXPECT_EQ(r.after.groups[0].fpr, r.before.groups[0].fpr);
}

TEST(Recalibration, EqualizesAndMatchesBruteForce) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto recs = synthetic(seed, 0.25, 0.4, 0.12, 150);
    const Dataset val = make_set(recs);
    audit::RecalibrationConfig cfg;
    cfg.tau = 0.8;
    const auto r = audit::recalibrate_equalized_odds(score_model(), val, cfg);
    EXPECT_LE(r.after.fpr_gap(), cfg.tolerance) << seed;
    EXPECT_LE(r.after.fnr_gap(), cfg.tolerance) << seed;
    EXPECT_GT(r.after.accuracy, cfg.tau);
    // Rates recomputed through the oracle agree with the reported ones.
    const auto again = audit::oracle_rates(r.oracle, val);
    EXPECT_NEAR(again.accuracy, r.after.accuracy, 1e-12);
    EXPECT_NEAR(again.fpr_gap(), r.after.fpr_gap(), 1e-12);
    // The brute-force rule family is a subset of what recalibration searches.
    const auto brute = brute_force(recs, cfg.tolerance);
    ASSERT_GE(brute.accuracy, 0.0);
    EXPECT_GE(r.after.accuracy, brute.accuracy - 1e-9) << seed;
  }
}

TEST(Recalibration, RejectsGroupsMissingAnAttributeValue) {
  std::vector<Rec> recs;
  for (int k = 0; k < 20; ++k) {
    recs.push_back({0.9, 0, 1});
    recs.push_back({0.1, 0, 0});
    recs.push_back({0.8, 1, 1});
    recs.push_back({0.6, 1, 1});
  }
  EXPECT_THROW(audit::recalibrate_equalized_odds(score_model(), make_set(recs), {}), xgem::InfeasibleError);
}

TEST(Recalibration, RejectsAccuracyNotAboveTau) {
  const auto recs = synthetic(4, 0.1, 0.3, 0.15, 100);
  audit::RecalibrationConfig cfg;
  cfg.tau = 0.99;
  EXPECT_THROW(audit::recalibrate_equalized_odds(score_model(), make_set(recs), cfg), xgem::InfeasibleError);
}

TEST(Recalibration, RatesCsvHasFourRows) {
  const auto recs = synthetic(5, 0.25, 0.4, 0.12, 50);
  audit::RecalibrationConfig cfg;
  cfg.tau = 0.7;
  const auto csv = audit::rates_csv(audit::recalibrate_equalized_odds(score_model(), make_set(recs), cfg));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

namespace {

// Oracle with identity rules on score_model: predicts 1 iff x >= 0.
audit::ProxyOracle sign_oracle() { return audit::ProxyOracle::identity(score_model(), 3); }

Dataset labelled(const std::vector<std::pair<int, int>>& ya) {
  Dataset d;
  std::vector<double> f;
  for (const auto& [y, a] : ya) {
    f.push_back(a == 1 ? 2.0 : -2.0);
    d.labels.push_back(y);
    d.attributes.push_back(a);
  }
  d.features = Tensor({ya.size(), 1}, std::move(f));
  return d;
}

}  // namespace

TEST(Confounding, UnchangedAttributesGiveZero) {
  const Dataset d = labelled({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  std::vector<ex::BatchItem> items;
  for (std::size_t i = 0; i < d.size(); ++i) {
    items.push_back(item(i, d.sample(i), 1 - d.labels[i], ex::TerminalStatus::switched_only));
  }
  const auto r = audit::confounding_metric(items, sign_oracle(), d, 0.01);
  EXPECT_EQ(*r.overall.fraction(), 0.0);
  EXPECT_FALSE(r.flagged);
}

TEST(Confounding, StrataExclusionsAndOrder) {
  std::vector<std::pair<int, int>> ya;
  std::vector<double> exemplar_x;
  std::vector<ex::TerminalStatus> status;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 60; ++i) {
    ya.push_back({i % 2, (i / 2) % 2});
    exemplar_x.push_back(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    status.push_back(i % 7 == 0   ? ex::TerminalStatus::no_switch
                     : i % 11 == 0 ? ex::TerminalStatus::max_iters_reached
                                   : ex::TerminalStatus::switched_and_converged);
  }
  const Dataset d = labelled(ya);
  std::vector<ex::BatchItem> items;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i == 5) {
      items.push_back({i, std::nullopt, "boom"});
      continue;
    }
    items.push_back(item(i, Tensor::vector({exemplar_x[i]}), 1 - d.labels[i], status[i]));
  }
  const auto r = audit::confounding_metric(items, sign_oracle(), d, 0.25);
  EXPECT_EQ(r.excluded_failed, 1u);
  EXPECT_EQ(r.excluded_no_switch, 9u);
  EXPECT_EQ(r.excluded_max_iters, 5u);  // 11, 22, 33, 44, 55
  EXPECT_EQ(r.overall.count + r.excluded(), d.size());

  std::size_t cells = 0, changed = 0;
  for (int y = 0; y < 2; ++y)
    for (int a = 0; a < 2; ++a) {
      cells += r.by_label_attribute[y][a].count;
      changed += r.by_label_attribute[y][a].changed;
    }
  EXPECT_EQ(cells, r.overall.count);
  EXPECT_EQ(changed, r.overall.changed);
  EXPECT_EQ(r.by_label[0].count + r.by_label[1].count, r.overall.count);
  EXPECT_EQ(r.by_attribute[0].changed + r.by_attribute[1].changed, r.overall.changed);
  EXPECT_EQ(r.flagged, *r.overall.fraction() > 0.25);

  // Reversing the records leaves every count alone.
  std::vector<std::size_t> rev(d.size());
  std::iota(rev.rbegin(), rev.rend(), 0);
  std::vector<ex::BatchItem> items_rev;
  for (auto i : rev) items_rev.push_back(items[i]);
  const auto r2 = audit::confounding_metric(items_rev, sign_oracle(), d.subset(rev), 0.25);
  EXPECT_EQ(r2.overall.changed, r.overall.changed);
  for (int y = 0; y < 2; ++y)
    for (int a = 0; a < 2; ++a) EXPECT_EQ(r2.by_label_attribute[y][a].changed, r.by_label_attribute[y][a].changed);

  const auto csv = audit::confounding_csv({{"f1", r}, {"f2", r2}});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Confounding, Errors) {
  const Dataset d = labelled({{0, 0}, {1, 1}});
  std::vector<ex::BatchItem> one{item(0, d.sample(0), 1, ex::TerminalStatus::switched_only)};
  EXPECT_THROW(audit::confounding_metric(one, sign_oracle(), d, 0.2), xgem::ShapeError);
  std::vector<ex::BatchItem> none{item(0, d.sample(0), 1, ex::TerminalStatus::no_switch),
                                  item(1, d.sample(1), 0, ex::TerminalStatus::no_switch)};
  EXPECT_THROW(audit::confounding_metric(none, sign_oracle(), d, 0.2), xgem::Error);
}
