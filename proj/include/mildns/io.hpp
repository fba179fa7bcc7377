#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mildns/lattice.hpp"

namespace mildns::io {

/// 17 significant digits.
std::string format_double(double v);

/// Flat snapshot: five little-endian 8-byte header words
/// (int64 d, int64 n, float64 box_len, int64 components, int64 representation),
/// then the row-major payload (doubles, or real/imag pairs when spectral).
void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

void write_csv(const std::filesystem::path& path, const Table& table);
std::string to_csv(const Table& table);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

}  // namespace mildns::io
