#include "xgem/audit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "xgem/error.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/random.hpp"

namespace xgem::audit {

using nlohmann::json;

double GroupRule::positive_probability(double score) const {
  return score >= threshold ? 1.0 - p_flip_pos : p_flip_neg;
}

void to_json(json& j, const GroupRule& r) {
  j = {{"threshold", r.threshold}, {"p_flip_pos", r.p_flip_pos}, {"p_flip_neg", r.p_flip_neg}};
}

void from_json(const json& j, GroupRule& r) {
  r.threshold = j.at("threshold").get<double>();
  r.p_flip_pos = j.at("p_flip_pos").get<double>();
  r.p_flip_neg = j.at("p_flip_neg").get<double>();
}

void to_json(json& j, const GroupRates& r) {
  j = {{"negatives", r.negatives}, {"positives", r.positives}, {"fpr", r.fpr}, {"fnr", r.fnr},
       {"accuracy", r.accuracy}};
}

double OracleRates::fpr_gap() const { return std::abs(groups[0].fpr - groups[1].fpr); }
double OracleRates::fnr_gap() const { return std::abs(groups[0].fnr - groups[1].fnr); }

void to_json(json& j, const OracleRates& r) {
  j = {{"groups", {json(r.groups[0]), json(r.groups[1])}},
       {"accuracy", r.accuracy},
       {"fpr_gap", r.fpr_gap()},
       {"fnr_gap", r.fnr_gap()}};
}

namespace {

void check_rule(const GroupRule& r) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(r.threshold) || !unit(r.p_flip_pos) || !unit(r.p_flip_neg)) {
    throw ConfigError("oracle rule values must lie in [0, 1]");
  }
}

}  // namespace

ProxyOracle::ProxyOracle(nn::Classifier base, std::array<GroupRule, 2> rules, std::uint64_t seed)
    : base_(std::move(base)), rules_(rules), seed_(seed) {
  if (base_.class_count() != 2) throw ConfigError("proxy oracle needs a binary attribute classifier");
  for (const auto& r : rules_) check_rule(r);
}

ProxyOracle ProxyOracle::identity(nn::Classifier base, std::uint64_t seed) {
  return ProxyOracle(std::move(base), {GroupRule{}, GroupRule{}}, seed);
}

double ProxyOracle::score(const nd::Tensor& x) const { return base_.predict_proba(x)[1]; }

double ProxyOracle::positive_probability(const nd::Tensor& x, int group) const {
  if (group != 0 && group != 1) throw ConfigError("oracle group must be 0 or 1");
  return rules_[static_cast<std::size_t>(group)].positive_probability(score(x));
}

int ProxyOracle::predict(const nd::Tensor& x, int group) const {
  const double p = positive_probability(x, group);
  if (p >= 1.0) return 1;
  if (p <= 0.0) return 0;
  std::vector<double> key(x.values().begin(), x.values().end());
  key.push_back(static_cast<double>(group));
  return keyed_uniform(seed_, key) < p ? 1 : 0;
}

namespace {

struct Scored {
  std::vector<double> score;
  std::vector<int> y, a;
};

Scored score_set(const nn::Classifier& base, const data::Dataset& val) {
  val.validate();
  if (!val.has_attributes()) throw ConfigError("validation set has no attributes");
  if (val.size() == 0) throw ConfigError("validation set is empty");
  for (std::size_t i = 0; i < val.size(); ++i) {
    if ((val.labels[i] != 0 && val.labels[i] != 1) || (val.attributes[i] != 0 && val.attributes[i] != 1)) {
      throw ConfigError("equalized odds needs binary labels and attributes");
    }
  }
  const nd::Tensor proba = base.predict_proba(val.features);
  Scored s;
  s.score.resize(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) s.score[i] = proba[2 * i + 1];
  s.y = val.labels;
  s.a = val.attributes;
  return s;
}

OracleRates rates_from_scores(const Scored& s, const std::array<GroupRule, 2>& rules) {
  OracleRates out;
  std::array<double, 2> fp{}, fn{};
  for (std::size_t i = 0; i < s.score.size(); ++i) {
    const auto g = static_cast<std::size_t>(s.y[i]);
    const double p1 = rules[g].positive_probability(s.score[i]);
    if (s.a[i] == 1) {
      ++out.groups[g].positives;
      fn[g] += 1.0 - p1;
    } else {
      ++out.groups[g].negatives;
      fp[g] += p1;
    }
  }
  double errors = 0.0;
  for (std::size_t g = 0; g < 2; ++g) {
    auto& r = out.groups[g];
    r.fpr = r.negatives ? fp[g] / static_cast<double>(r.negatives) : 0.0;
    r.fnr = r.positives ? fn[g] / static_cast<double>(r.positives) : 0.0;
    const auto n = r.negatives + r.positives;
    r.accuracy = n ? 1.0 - (fp[g] + fn[g]) / static_cast<double>(n) : 0.0;
    errors += fp[g] + fn[g];
  }
  out.accuracy = 1.0 - errors / static_cast<double>(s.score.size());
  return out;
}

// One distinct operating point of a group's thresholded scores.
struct RocPoint {
  double fpr, tpr, threshold;
};

std::vector<RocPoint> roc_points(const Scored& s, int group, double step) {
  std::vector<double> neg, pos;
  for (std::size_t i = 0; i < s.score.size(); ++i) {
    if (s.y[i] != group) continue;
    (s.a[i] == 1 ? pos : neg).push_back(s.score[i]);
  }
  if (neg.empty() || pos.empty()) {
    throw InfeasibleError("target-label group " + std::to_string(group) +
                          " lacks one attribute value; equalized odds is undefined");
  }
  std::sort(neg.begin(), neg.end());
  std::sort(pos.begin(), pos.end());
  auto above = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t)) / static_cast<double>(v.size());
  };
  const auto cells = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<RocPoint> pts;
  for (std::size_t k = 0; k <= cells; ++k) {
    const double t = std::min(1.0, static_cast<double>(k) * step);
    const RocPoint p{above(neg, t), above(pos, t), t};
    auto same = std::find_if(pts.begin(), pts.end(),
                             [&](const RocPoint& q) { return q.fpr == p.fpr && q.tpr == p.tpr; });
    if (same == pts.end()) {
      pts.push_back(p);
    } else if (std::abs(t - 0.5) < std::abs(same->threshold - 0.5)) {
      same->threshold = t;
    }
  }
  return pts;
}

// Exact minimizer of a 4-variable LP over the unit box plus gap constraints,
// by enumerating vertices. Variables: (u0, q0, u1, q1) where u = 1 - p_flip_pos
// and q = p_flip_neg.
struct LpSolution {
  std::array<double, 4> v{};
  double errors = 0.0;
  double flips = 0.0;
};

bool solve4(std::array<std::array<double, 5>, 4> m, std::array<double, 4>& out) {
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < 4; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) < 1e-12) return false;
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < 4; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < 5; ++k) m[r][k] -= f * m[c][k];
    }
  }
  for (std::size_t c = 0; c < 4; ++c) out[c] = m[c][4] / m[c][c];
  return true;
}

LpSolution solve_flips(const RocPoint& p0, const RocPoint& p1, const std::array<double, 4>& counts, double tol) {
  // counts = {neg0, pos0, neg1, pos1}
  // FPR_g = F_g u_g + (1 - F_g) q_g, TPR_g likewise with T_g.
  const std::array<double, 4> fpr0{p0.fpr, 1.0 - p0.fpr, 0.0, 0.0};
  const std::array<double, 4> fpr1{0.0, 0.0, p1.fpr, 1.0 - p1.fpr};
  const std::array<double, 4> tpr0{p0.tpr, 1.0 - p0.tpr, 0.0, 0.0};
  const std::array<double, 4> tpr1{0.0, 0.0, p1.tpr, 1.0 - p1.tpr};

  // Rows a . v <= b.
  struct Row {
    std::array<double, 4> a;
    double b;
  };
  std::array<Row, 12> rows{};
  for (std::size_t k = 0; k < 4; ++k) {
    rows[2 * k].a[k] = 1.0;
    rows[2 * k].b = 1.0;
    rows[2 * k + 1].a[k] = -1.0;
  }
  auto diff = [](const std::array<double, 4>& x, const std::array<double, 4>& y, double sign) {
    std::array<double, 4> r{};
    for (std::size_t k = 0; k < 4; ++k) r[k] = sign * (x[k] - y[k]);
    return r;
  };
  rows[8] = {diff(fpr0, fpr1, 1.0), tol};
  rows[9] = {diff(fpr0, fpr1, -1.0), tol};
  rows[10] = {diff(tpr0, tpr1, 1.0), tol};
  rows[11] = {diff(tpr0, tpr1, -1.0), tol};

  // errors = sum neg_g FPR_g + pos_g (1 - TPR_g)
  std::array<double, 4> cost{};
  for (std::size_t k = 0; k < 4; ++k) {
    cost[k] = counts[0] * fpr0[k] - counts[1] * tpr0[k] + counts[2] * fpr1[k] - counts[3] * tpr1[k];
  }
  const double cost0 = counts[1] + counts[3];

  LpSolution best;
  bool found = false;
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          // Both bounds of one variable can never be active together.
          if ((i / 2 == j / 2 && i < 8) || (j / 2 == k / 2 && j < 8) || (k / 2 == l / 2 && k < 8)) continue;
          std::array<std::array<double, 5>, 4> m;
          const std::size_t idx[] = {i, j, k, l};
          for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) m[r][c] = rows[idx[r]].a[c];
            m[r][4] = rows[idx[r]].b;
          }
          std::array<double, 4> v;
          if (!solve4(m, v)) continue;
          bool feasible = true;
          for (const auto& row : rows) {
            double s = 0.0;
            for (std::size_t c = 0; c < 4; ++c) s += row.a[c] * v[c];
            if (s > row.b + 1e-12) {
              feasible = false;
              break;
            }
          }
          if (!feasible) continue;
          for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
          double errors = cost0;
          for (std::size_t c = 0; c < 4; ++c) errors += cost[c] * v[c];
          const double flips = (1.0 - v[0]) + v[1] + (1.0 - v[2]) + v[3];
          if (!found || errors < best.errors - 1e-9 || (errors <= best.errors + 1e-9 && flips < best.flips - 1e-12)) {
            best = {v, errors, flips};
            found = true;
          }
        }
  // u = q = 1/2 everywhere is always feasible, so some vertex exists.
  return best;
}

}  // namespace

OracleRates oracle_rates(const ProxyOracle& oracle, const data::Dataset& val) {
  return rates_from_scores(score_set(oracle.base(), val), oracle.rules());
}

void RecalibrationConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("recalibration tau must lie in (0, 1)");
  if (!(tolerance >= 0.0 && tolerance < 1.0)) throw ConfigError("recalibration tolerance must lie in [0, 1)");
  if (!(grid_step > 0.0 && grid_step <= 0.5)) throw ConfigError("recalibration grid_step must lie in (0, 0.5]");
}

void to_json(json& j, const RecalibrationConfig& c) {
  j = {{"tau", c.tau}, {"tolerance", c.tolerance}, {"grid_step", c.grid_step}, {"seed", c.seed}};
}

void from_json(const json& j, RecalibrationConfig& c) {
  const RecalibrationConfig d;
  c.tau = j.value("tau", d.tau);
  c.tolerance = j.value("tolerance", d.tolerance);
  c.grid_step = j.value("grid_step", d.grid_step);
  c.seed = j.value("seed", d.seed);
}

json to_json(const Recalibration& r) {
  return {{"identity", r.identity},
          {"rules", {json(r.oracle.rules()[0]), json(r.oracle.rules()[1])}},
          {"seed", r.oracle.seed()},
          {"before", json(r.before)},
          {"after", json(r.after)}};
}

Recalibration recalibrate_equalized_odds(const nn::Classifier& base, const data::Dataset& val,
                                         const RecalibrationConfig& cfg) {
  cfg.validate();
  if (base.class_count() != 2) throw ConfigError("proxy oracle needs a binary attribute classifier");
  const Scored s = score_set(base, val);

  const auto pts0 = roc_points(s, 0, cfg.grid_step);
  const auto pts1 = roc_points(s, 1, cfg.grid_step);

  const std::array<GroupRule, 2> plain{GroupRule{}, GroupRule{}};
  const OracleRates before = rates_from_scores(s, plain);
  if (before.fpr_gap() <= cfg.tolerance && before.fnr_gap() <= cfg.tolerance && before.accuracy > cfg.tau) {
    return {ProxyOracle(base, plain, cfg.seed), before, before, true};
  }

  const OracleRates& c = before;
  const std::array<double, 4> counts{static_cast<double>(c.groups[0].negatives),
                                     static_cast<double>(c.groups[0].positives),
                                     static_cast<double>(c.groups[1].negatives),
                                     static_cast<double>(c.groups[1].positives)};
  // Keep rounding from pushing a gap just past the tolerance.
  const double lp_tol = std::max(0.0, cfg.tolerance - 1e-12);

  std::array<GroupRule, 2> best_rules = plain;
  double best_err = 0.0, best_flips = 0.0, best_dist = 0.0;
  bool found = false;
  // Errors of one group alone at the best corner of its parallelogram; the sum
  // over both groups bounds any equalized rule from below.
  auto group_floor = [](const RocPoint& p, double neg, double pos) {
    const double corners[4][2] = {{0.0, 0.0}, {1.0, 1.0}, {p.fpr, p.tpr}, {1.0 - p.fpr, 1.0 - p.tpr}};
    double lo = neg + pos;
    for (const auto& c : corners) lo = std::min(lo, neg * c[0] + pos * (1.0 - c[1]));
    return lo;
  };
  for (const auto& p0 : pts0) {
    const double floor0 = group_floor(p0, counts[0], counts[1]);
    for (const auto& p1 : pts1) {
      if (found && floor0 + group_floor(p1, counts[2], counts[3]) > best_err + 1e-9) continue;
      const LpSolution sol = solve_flips(p0, p1, counts, lp_tol);
      const double dist = std::abs(p0.threshold - 0.5) + std::abs(p1.threshold - 0.5);
      bool better = !found || sol.errors < best_err - 1e-9;
      if (!better && sol.errors <= best_err + 1e-9) {
        better = sol.flips < best_flips - 1e-12 || (sol.flips <= best_flips + 1e-12 && dist < best_dist);
      }
      if (!better) continue;
      found = true;
      best_err = sol.errors;
      best_flips = sol.flips;
      best_dist = dist;
      // + 0.0 turns a -0 from the vertex solve into +0.
      best_rules[0] = {p0.threshold, 1.0 - sol.v[0] + 0.0, sol.v[1] + 0.0};
      best_rules[1] = {p1.threshold, 1.0 - sol.v[2] + 0.0, sol.v[3] + 0.0};
    }
  }

  const OracleRates after = rates_from_scores(s, best_rules);
  if (!(after.accuracy > cfg.tau)) {
    throw InfeasibleError("equalized odds rule reaches accuracy " + std::to_string(after.accuracy) +
                          ", not above tau = " + std::to_string(cfg.tau));
  }
  return {ProxyOracle(base, best_rules, cfg.seed), before, after, false};
}

std::string rates_csv(const Recalibration& r) {
  std::ostringstream os;
  os << "stage,group,negatives,positives,fpr,fnr,accuracy\n";
  auto emit = [&](const char* stage, const OracleRates& rates) {
    for (std::size_t g = 0; g < 2; ++g) {
      const auto& x = rates.groups[g];
      os << stage << ',' << g << ',' << x.negatives << ',' << x.positives << ',' << io::format_double(x.fpr) << ','
         << io::format_double(x.fnr) << ',' << io::format_double(x.accuracy) << '\n';
    }
  };
  emit("original", r.before);
  emit("recalibrated", r.after);
  return os.str();
}

}  // namespace xgem::audit
