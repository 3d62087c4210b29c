#include "xgem/audit/confounding.hpp"

#include <sstream>

#include "xgem/error.hpp"
#include "xgem/io/binary.hpp"

namespace xgem::audit {

using nlohmann::json;

std::optional<double> Cell::fraction() const {
  if (count == 0) return std::nullopt;
  return static_cast<double>(changed) / static_cast<double>(count);
}

namespace {

json cell_json(const Cell& c) {
  json j = {{"count", c.count}, {"changed", c.changed}};
  const auto f = c.fraction();
  j["fraction"] = f ? json(*f) : json(nullptr);
  return j;
}

void add(Cell& c, bool changed) {
  ++c.count;
  if (changed) ++c.changed;
}

}  // namespace

json to_json(const ConfoundingReport& r) {
  json strata = json::array();
  for (int y = 0; y < 2; ++y) {
    for (int a = 0; a < 2; ++a) {
      json c = cell_json(r.by_label_attribute[y][a]);
      c["y"] = y;
      c["a"] = a;
      strata.push_back(c);
    }
  }
  return {{"overall", cell_json(r.overall)},
          {"by_label", {cell_json(r.by_label[0]), cell_json(r.by_label[1])}},
          {"by_attribute", {cell_json(r.by_attribute[0]), cell_json(r.by_attribute[1])}},
          {"by_label_attribute", strata},
          {"delta", r.delta},
          {"flagged", r.flagged},
          {"excluded", {{"no_switch", r.excluded_no_switch},
                        {"max_iters_reached", r.excluded_max_iters},
                        {"failed", r.excluded_failed}}},
          {"assumptions", {"the attribute oracle is taken to be unconfounded by the target label"}}};
}

ConfoundingReport confounding_metric(std::span<const exemplar::BatchItem> items, const ProxyOracle& oracle,
                                     const data::Dataset& data, double delta) {
  if (items.size() != data.size()) {
    throw ShapeError("confounding_metric: " + std::to_string(items.size()) + " results for " +
                     std::to_string(data.size()) + " records");
  }
  if (!data.has_attributes()) throw ConfigError("confounding_metric: dataset has no attributes");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("confounding_metric: delta must lie in [0, 1]");

  ConfoundingReport r;
  r.delta = delta;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (!item.result) {
      ++r.excluded_failed;
      continue;
    }
    const auto status = item.result->trajectory.status;
    if (status == exemplar::TerminalStatus::no_switch) {
      ++r.excluded_no_switch;
      continue;
    }
    if (status == exemplar::TerminalStatus::max_iters_reached) {
      ++r.excluded_max_iters;
      continue;
    }
    const int y = data.labels[i], a = data.attributes[i];
    if ((y != 0 && y != 1) || (a != 0 && a != 1)) {
      throw ConfigError("confounding_metric needs binary labels and attributes");
    }
    const bool changed = oracle.predict(item.result->exemplar, item.result->trajectory.target_label) != a;
    add(r.overall, changed);
    add(r.by_label[y], changed);
    add(r.by_attribute[a], changed);
    add(r.by_label_attribute[y][a], changed);
  }
  if (r.overall.count == 0) {
    throw Error("confounding_metric: no switched exemplars to measure (" + std::to_string(r.excluded()) +
                " excluded)");
  }
  r.flagged = *r.overall.fraction() > delta;
  return r;
}

std::string confounding_csv(const std::vector<std::pair<std::string, ConfoundingReport>>& reports) {
  std::ostringstream os;
  os << "classifier,stratum,y=0,y=1,all\n";
  auto frac = [](const Cell& c) {
    const auto f = c.fraction();
    return f ? io::format_double(*f) : std::string();
  };
  for (const auto& [name, r] : reports) {
    os << name << ",all," << frac(r.by_label[0]) << ',' << frac(r.by_label[1]) << ',' << frac(r.overall) << '\n';
    for (int a = 0; a < 2; ++a) {
      os << name << ",a=" << a << ',' << frac(r.by_label_attribute[0][a]) << ','
         << frac(r.by_label_attribute[1][a]) << ',' << frac(r.by_attribute[a]) << '\n';
    }
  }
  return os.str();
}

}  // namespace xgem::audit
