#include "xgem/analytics/reliability.hpp"

#include <algorithm>
#include <cmath>

#include "xgem/error.hpp"

namespace xgem::analytics {

std::size_t ReliabilityDiagram::total() const {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

ReliabilityDiagram reliability_from_predictions(std::span<const double> confidence, const std::vector<bool>& correct,
                                                std::size_t bins) {
  if (bins < 2) throw ConfigError("reliability diagram needs at least 2 bins");
  if (confidence.size() != correct.size()) throw ShapeError("reliability: confidence and correctness lengths differ");
  if (confidence.empty()) throw ConfigError("reliability diagram of an empty set");
  const double b = static_cast<double>(bins);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<std::size_t> right(bins, 0);
  ReliabilityDiagram d;
  d.bins.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    d.bins[i].lo = static_cast<double>(i) / b;
    d.bins[i].hi = static_cast<double>(i + 1) / b;
  }
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    const double c = confidence[i];
    if (!(c >= 0.0 && c <= 1.0)) throw NumericError("reliability: confidence outside [0, 1]");
    const auto k = std::min(static_cast<std::size_t>(std::floor(c * b)), bins - 1);
    ++d.bins[k].count;
    conf_sum[k] += c;
    if (correct[i]) ++right[k];
  }
  for (std::size_t k = 0; k < bins; ++k) {
    auto& bin = d.bins[k];
    if (bin.count == 0) continue;
    const double n = static_cast<double>(bin.count);
    bin.mean_confidence = conf_sum[k] / n;
    bin.accuracy = static_cast<double>(right[k]) / n;
  }
  return d;
}

ReliabilityReport reliability_diagram(const nn::Classifier& clf, const data::Dataset& data, std::size_t bins,
                                      bool stratify_by_attribute) {
  if (data.size() == 0) throw ConfigError("reliability diagram of an empty set");
  if (stratify_by_attribute && !data.has_attributes()) {
    throw ConfigError("reliability: stratification requested but the data has no attributes");
  }
  const nd::Tensor proba = clf.predict_proba(data.features);
  const std::size_t c = clf.class_count();
  std::vector<double> conf(data.size());
  std::vector<bool> hit(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (proba[i * c + k] > proba[i * c + best]) best = k;
    }
    conf[i] = proba[i * c + best];
    hit[i] = static_cast<int>(best) == data.labels[i];
  }
  auto diagram = [&](auto keep) {
    std::vector<double> cs;
    std::vector<bool> hs;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!keep(i)) continue;
      cs.push_back(conf[i]);
      hs.push_back(hit[i]);
    }
    return reliability_from_predictions(cs, hs, bins);
  };
  ReliabilityReport r;
  r.overall = diagram([](std::size_t) { return true; });
  if (stratify_by_attribute) {
    std::vector<int> values(data.attributes);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (int a : values) r.by_attribute[a] = diagram([&](std::size_t i) { return data.attributes[i] == a; });
  }
  return r;
}

nlohmann::json to_json(const ReliabilityDiagram& d) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : d.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"mean_confidence", b.mean_confidence ? nlohmann::json(*b.mean_confidence) : nlohmann::json()},
                    {"accuracy", b.accuracy ? nlohmann::json(*b.accuracy) : nlohmann::json()}});
  }
  return {{"bins", bins}, {"total", d.total()}};
}

nlohmann::json to_json(const ReliabilityReport& r) {
  nlohmann::json j = {{"overall", to_json(r.overall)}};
  if (!r.by_attribute.empty()) {
    nlohmann::json strata = nlohmann::json::object();
    for (const auto& [a, d] : r.by_attribute) strata["a=" + std::to_string(a)] = to_json(d);
    j["by_attribute"] = strata;
  }
  return j;
}

}  // namespace xgem::analytics
