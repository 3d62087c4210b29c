#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/audit/oracle.hpp"
#include "xgem/data/dataset.hpp"
#include "xgem/exemplar/xgem.hpp"

namespace xgem::audit {

/// Records in one cell and how many of their exemplars changed attribute.
struct Cell {
  std::size_t count = 0;
  std::size_t changed = 0;

  /// Empty cells have no fraction.
  std::optional<double> fraction() const;
};

struct ConfoundingReport {
  Cell overall;
  std::array<Cell, 2> by_label;                    // source label y
  std::array<Cell, 2> by_attribute;                // attribute a
  std::array<std::array<Cell, 2>, 2> by_label_attribute;  // [y][a]
  double delta = 0.25;
  bool flagged = false;  // overall fraction > delta

  // Records left out of every fraction.
  std::size_t excluded_no_switch = 0;
  std::size_t excluded_max_iters = 0;
  std::size_t excluded_failed = 0;

  std::size_t excluded() const { return excluded_no_switch + excluded_max_iters + excluded_failed; }
};

nlohmann::json to_json(const ConfoundingReport& r);

/// Fraction of exemplars whose oracle attribute differs from the source
/// record's attribute. Item i belongs to record i of `data`.
///
/// Only switched traversals take part; the rest are counted by reason. The
/// oracle is queried with the traversal's target label as its group.
///
/// Throws ShapeError on a length mismatch, ConfigError when `data` has no
/// attributes or delta is outside [0, 1], and Error when nothing is left to
/// measure.
ConfoundingReport confounding_metric(std::span<const exemplar::BatchItem> items, const ProxyOracle& oracle,
                                     const data::Dataset& data, double delta);

/// Rows: one block per classifier (all, a=0, a=1); columns: source label 0,
/// source label 1, both.
std::string confounding_csv(const std::vector<std::pair<std::string, ConfoundingReport>>& reports);

}  // namespace xgem::audit
