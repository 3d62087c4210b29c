#include "xgem/data/dataset.hpp"

#include "xgem/error.hpp"
#include "xgem/io/binary.hpp"

namespace xgem::data {

namespace {
constexpr const char* kFormat = "xgem-dataset";
constexpr int kFormatVersion = 1;
}  // namespace

void Dataset::validate() const {
  if (features.rank() != 2) throw ShapeError("dataset features must be [n x d], got " + nd::to_string(features.shape()));
  if (features.rows() != labels.size()) {
    throw ShapeError("dataset has " + std::to_string(features.rows()) + " rows but " + std::to_string(labels.size()) +
                     " labels");
  }
  if (!attributes.empty() && attributes.size() != labels.size()) {
    throw ShapeError("dataset attribute column has " + std::to_string(attributes.size()) + " entries, expected " +
                     std::to_string(labels.size()));
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = features.gather_rows(indices);
  out.provenance = provenance;
  for (auto i : indices) {
    out.labels.push_back(labels.at(i));
    if (has_attributes()) out.attributes.push_back(attributes.at(i));
  }
  return out;
}

int from_signed_label(int v) {
  if (v == 1) return 1;
  if (v == -1) return 0;
  throw ConfigError("expected a label in {-1, 1}, got " + std::to_string(v));
}

void export_dataset(const std::filesystem::path& dir, const Dataset& ds, const nlohmann::json& config) {
  ds.validate();
  std::filesystem::create_directories(dir);
  io::ByteWriter w;
  for (double v : ds.features.values()) w.f64_le(v);
  for (int y : ds.labels) w.i32_le(y);
  for (int a : ds.attributes) w.i32_le(a);
  io::write_file(dir / "data.bin", w.buffer());

  const nlohmann::json manifest = {{"format", kFormat},
                                   {"version", kFormatVersion},
                                   {"provenance", ds.provenance},
                                   {"config", config},
                                   {"count", ds.size()},
                                   {"dim", ds.dim()},
                                   {"has_attributes", ds.has_attributes()},
                                   {"data_file", "data.bin"}};
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

ImportedDataset import_dataset(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent, (dir / "manifest.json").string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kFormatVersion) {
    throw FormatError(FormatError::Kind::version_mismatch, dir.string() + ": not a version 1 xgem dataset export");
  }
  const auto n = manifest.at("count").get<std::size_t>();
  const auto d = manifest.at("dim").get<std::size_t>();
  const bool has_attr = manifest.at("has_attributes").get<bool>();

  const auto bytes = io::read_file(dir / manifest.at("data_file").get<std::string>());
  const std::size_t expected = n * d * 8 + n * 4 * (has_attr ? 2 : 1);
  if (bytes.size() < expected) throw FormatError(FormatError::Kind::truncated, dir.string() + ": data file is short");
  if (bytes.size() > expected) {
    throw FormatError(FormatError::Kind::count_mismatch, dir.string() + ": data file is longer than the manifest says");
  }
  io::ByteReader r(bytes);
  std::vector<double> feats(n * d);
  for (auto& v : feats) v = r.f64_le();
  ImportedDataset out;
  out.data.features = nd::Tensor({n, d}, std::move(feats));
  out.data.labels.resize(n);
  for (auto& y : out.data.labels) y = r.i32_le();
  if (has_attr) {
    out.data.attributes.resize(n);
    for (auto& a : out.data.attributes) a = r.i32_le();
  }
  out.data.provenance = manifest.value("provenance", "");
  out.config = manifest.value("config", nlohmann::json::object());
  return out;
}

}  // namespace xgem::data
