#include "xgem/data/idx.hpp"

#include "xgem/error.hpp"
#include "xgem/io/binary.hpp"

namespace xgem::data {

namespace {

using Kind = FormatError::Kind;

void expect_magic(io::ByteReader& r, std::uint32_t want, const std::filesystem::path& path) {
  if (r.remaining() < 4) throw FormatError(Kind::truncated, path.string() + ": missing IDX header");
  const auto magic = r.u32_be();
  if (magic != want) {
    throw FormatError(Kind::bad_magic,
                      path.string() + ": IDX magic " + std::to_string(magic) + ", expected " + std::to_string(want));
  }
}

// Rewraps a truncation from the reader with the file name.
template <typename F>
auto parse(const std::filesystem::path& path, F&& body) {
  try {
    return body();
  } catch (const FormatError& e) {
    if (e.kind() != Kind::truncated) throw;
    throw FormatError(Kind::truncated, path.string() + ": " + e.what());
  }
}

void expect_end(const io::ByteReader& r, const std::filesystem::path& path) {
  if (r.remaining() != 0) {
    throw FormatError(Kind::inconsistent,
                      path.string() + ": " + std::to_string(r.remaining()) + " bytes beyond the declared extents");
  }
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse(path, [&] {
    io::ByteReader r(bytes);
    expect_magic(r, kIdxImageMagic, path);
    IdxImages out;
    out.count = r.u32_be();
    out.rows = r.u32_be();
    out.cols = r.u32_be();
    const std::size_t total = out.count * out.rows * out.cols;
    if (total > r.remaining()) {
      throw FormatError(Kind::truncated, "declares " + std::to_string(total) + " pixel bytes, " +
                                             std::to_string(r.remaining()) + " present");
    }
    const auto px = r.bytes(total);
    out.pixels.assign(px.begin(), px.end());
    expect_end(r, path);
    return out;
  });
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse(path, [&] {
    io::ByteReader r(bytes);
    expect_magic(r, kIdxLabelMagic, path);
    const std::size_t count = r.u32_be();
    if (count > r.remaining()) {
      throw FormatError(Kind::truncated, "declares " + std::to_string(count) + " labels, " +
                                             std::to_string(r.remaining()) + " present");
    }
    const auto b = r.bytes(count);
    expect_end(r, path);
    return std::vector<std::uint8_t>(b.begin(), b.end());
  });
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw ShapeError("IDX image payload does not match count x rows x cols");
  }
  io::ByteWriter w;
  w.u32_be(kIdxImageMagic);
  w.u32_be(static_cast<std::uint32_t>(images.count));
  w.u32_be(static_cast<std::uint32_t>(images.rows));
  w.u32_be(static_cast<std::uint32_t>(images.cols));
  w.bytes(images.pixels);
  io::write_file(path, w.buffer());
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  io::ByteWriter w;
  w.u32_be(kIdxLabelMagic);
  w.u32_be(static_cast<std::uint32_t>(labels.size()));
  w.bytes(labels);
  io::write_file(path, w.buffer());
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const IdxImages img = read_idx_images(images);
  const auto lab = read_idx_labels(labels);
  if (lab.size() != img.count) {
    throw FormatError(Kind::count_mismatch, images.string() + " holds " + std::to_string(img.count) + " images but " +
                                                labels.string() + " holds " + std::to_string(lab.size()) + " labels");
  }
  const std::size_t d = img.rows * img.cols;
  std::vector<double> px(img.pixels.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(img.pixels[i]) / 255.0;
  Dataset ds;
  ds.features = nd::Tensor({img.count, d}, std::move(px));
  ds.labels.assign(lab.begin(), lab.end());
  ds.provenance = "idx:" + images.filename().string();
  return ds;
}

}  // namespace xgem::data
