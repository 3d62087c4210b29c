#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xgem::io {

/// Append-only byte buffer with explicit endianness.
class ByteWriter {
 public:
  void bytes(std::span<const unsigned char> data);
  void text(std::string_view s);
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32_le(std::uint32_t v);
  void u64_le(std::uint64_t v);
  void f64_le(double v);
  void i32_le(std::int32_t v) { u32_le(static_cast<std::uint32_t>(v)); }
  void u32_be(std::uint32_t v);

  const std::vector<unsigned char>& buffer() const noexcept { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

/// Bounds-checked cursor over a byte buffer. Every read past the end throws
/// FormatError(truncated) and leaves nothing half-read behind.
class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> data) : data_(data) {}

  std::span<const unsigned char> bytes(std::size_t n);
  std::string text(std::size_t n);
  std::uint8_t u8();
  std::uint32_t u32_le();
  std::uint64_t u64_le();
  double f64_le();
  std::int32_t i32_le() { return static_cast<std::int32_t>(u32_le()); }
  std::uint32_t u32_be();

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const unsigned char> data);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace xgem::io
