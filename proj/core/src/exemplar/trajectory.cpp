#include "xgem/exemplar/trajectory.hpp"

#include "xgem/io/binary.hpp"

namespace xgem::exemplar {

namespace {

void header(std::string& out, const char* prefix, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out += std::string(",") + prefix + std::to_string(i);
}

void cells(std::string& out, const nd::Tensor& t) {
  for (double v : t.values()) {
    out += ',';
    out += io::format_double(v);
  }
}

}  // namespace

std::string trajectory_csv(std::span<const TrajectoryStep> steps) {
  std::string out = "iter";
  if (!steps.empty()) {
    header(out, "z_", steps.front().z.size());
    header(out, "x_", steps.front().x.size());
    out += ",objective";
    header(out, "proba_", steps.front().proba.size());
  } else {
    out += ",objective";
  }
  out += ",distance_from_origin\n";
  for (const auto& s : steps) {
    out += std::to_string(s.iter);
    cells(out, s.z);
    cells(out, s.x);
    out += ',' + io::format_double(s.objective);
    cells(out, s.proba);
    out += ',' + io::format_double(s.distance_from_origin) + '\n';
  }
  return out;
}

}  // namespace xgem::exemplar
