#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "xgem/data/dataset.hpp"
#include "xgem/nn/classifier.hpp"

namespace xgem::audit {

/// Randomized threshold rule for one target-label group.
///
/// hard = score >= threshold. The output is then 1 with probability
/// 1 - p_flip_pos when hard is 1, and with probability p_flip_neg when hard is 0.
struct GroupRule {
  double threshold = 0.5;
  double p_flip_pos = 0.0;
  double p_flip_neg = 0.0;

  /// Probability that the rule outputs 1 for a given score.
  double positive_probability(double score) const;
  bool is_identity() const { return threshold == 0.5 && p_flip_pos == 0.0 && p_flip_neg == 0.0; }
};

void to_json(nlohmann::json& j, const GroupRule& r);
void from_json(const nlohmann::json& j, GroupRule& r);

/// Error rates of an attribute predictor inside one target-label group.
/// Attribute value 1 is the positive class. Rates are expectations over the
/// oracle's randomization.
struct GroupRates {
  std::size_t negatives = 0;  // a == 0
  std::size_t positives = 0;  // a == 1
  double fpr = 0.0;
  double fnr = 0.0;
  double accuracy = 0.0;
};

void to_json(nlohmann::json& j, const GroupRates& r);

struct OracleRates {
  std::array<GroupRates, 2> groups;  // indexed by target label
  double accuracy = 0.0;             // over the whole set
  double fpr_gap() const;
  double fnr_gap() const;
};

void to_json(nlohmann::json& j, const OracleRates& r);

/// Attribute oracle: a binary classifier over the attribute followed by a
/// per-target-label randomized rule.
///
/// Randomness is keyed on the seed and on the bits of the queried sample, so a
/// given (x, group) always gets the same answer regardless of query order.
class ProxyOracle {
 public:
  ProxyOracle(nn::Classifier base, std::array<GroupRule, 2> rules, std::uint64_t seed);

  /// Identity rules: plain argmax of the base classifier.
  static ProxyOracle identity(nn::Classifier base, std::uint64_t seed);

  const nn::Classifier& base() const noexcept { return base_; }
  const std::array<GroupRule, 2>& rules() const noexcept { return rules_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// P(a = 1) under the base classifier.
  double score(const nd::Tensor& x) const;
  /// Probability that predict(x, group) is 1.
  double positive_probability(const nd::Tensor& x, int group) const;
  int predict(const nd::Tensor& x, int group) const;

 private:
  nn::Classifier base_;
  std::array<GroupRule, 2> rules_;
  std::uint64_t seed_;
};

/// Expected rates of `oracle` on a labelled, attributed set. The group of a
/// record is its label.
OracleRates oracle_rates(const ProxyOracle& oracle, const data::Dataset& val);

struct RecalibrationConfig {
  double tau = 0.95;         // accuracy the oracle must exceed
  double tolerance = 0.005;  // allowed FPR and FNR gap between groups
  double grid_step = 0.001;  // threshold grid
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const RecalibrationConfig& c);
void from_json(const nlohmann::json& j, RecalibrationConfig& c);

struct Recalibration {
  ProxyOracle oracle;
  OracleRates before;  // identity rules
  OracleRates after;
  bool identity = false;  // base already met the constraints
};

nlohmann::json to_json(const Recalibration& r);

/// Chooses per-group randomized rules that equalize false positive and false
/// negative rates across target labels at the least expected accuracy cost.
///
/// When the plain base classifier already meets the tolerance and exceeds tau,
/// it is returned unchanged. Otherwise every pair of grid thresholds is tried;
/// for each pair the flip probabilities solve a small linear program exactly.
/// Ties go to fewer flips, then to thresholds nearer 0.5.
///
/// Throws InfeasibleError when a group lacks one attribute value or the best
/// rule does not exceed tau, ConfigError for non-binary labels or attributes.
Recalibration recalibrate_equalized_odds(const nn::Classifier& base, const data::Dataset& val,
                                         const RecalibrationConfig& cfg);

/// Table of before/after rates per group, one row per (stage, group).
std::string rates_csv(const Recalibration& r);

}  // namespace xgem::audit
