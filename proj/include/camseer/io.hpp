#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace camseer::io {

using json = nlohmann::ordered_json;

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, std::string_view contents);
void write_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents);

json read_json(const std::filesystem::path& path);
// Stable two-space-indented dump with a trailing newline.
std::string dump(const json& j);
void write_json(const std::filesystem::path& path, const json& j);

// "%.17g"
std::string format_g17(double v);

// Worker count: CAMSEER_THREADS when set and positive, else hardware concurrency.
unsigned worker_count();

// Little-endian binary encoding helpers.
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> v);
  void raw(std::string_view bytes);
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  std::string raw(std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace camseer::io
