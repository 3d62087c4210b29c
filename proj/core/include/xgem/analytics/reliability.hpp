#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/data/dataset.hpp"
#include "xgem/nn/classifier.hpp"

namespace xgem::analytics {

struct ReliabilityBin {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  std::optional<double> mean_confidence;  // empty when count == 0
  std::optional<double> accuracy;
};

struct ReliabilityDiagram {
  std::vector<ReliabilityBin> bins;
  std::size_t total() const;
};

/// Equal-width bins over [0, 1]; confidence c goes to bin min(floor(c B), B - 1).
ReliabilityDiagram reliability_from_predictions(std::span<const double> confidence, const std::vector<bool>& correct,
                                                std::size_t bins = 10);

struct ReliabilityReport {
  ReliabilityDiagram overall;
  std::map<int, ReliabilityDiagram> by_attribute;  // filled when stratified
};

/// Max-class confidence against argmax correctness. Throws ConfigError for
/// empty data, bins < 2, or stratification without attributes.
ReliabilityReport reliability_diagram(const nn::Classifier& clf, const data::Dataset& data, std::size_t bins = 10,
                                      bool stratify_by_attribute = false);

nlohmann::json to_json(const ReliabilityDiagram& d);
nlohmann::json to_json(const ReliabilityReport& r);

}  // namespace xgem::analytics
