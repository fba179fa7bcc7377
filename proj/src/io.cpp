#include "mildns/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mildns/error.hpp"

namespace mildns::io {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes little endian");

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, std::ios::in | mode);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated snapshot header");
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field& f) {
  auto out = open_out(path, std::ios::binary);
  const Lattice& lat = f.lattice();
  put<std::int64_t>(out, lat.dim());
  put<std::int64_t>(out, lat.n());
  put<double>(out, lat.box_len());
  put<std::int64_t>(out, f.components());
  put<std::int64_t>(out, f.is_physical() ? 0 : 1);
  if (f.is_physical()) {
    const auto v = f.all_values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    const auto c = f.all_coeffs();
    out.write(reinterpret_cast<const char*>(c.data()),
              static_cast<std::streamsize>(c.size() * sizeof(complex)));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Field read_field(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  const auto d = get<std::int64_t>(in);
  const auto n = get<std::int64_t>(in);
  const auto box = get<double>(in);
  const auto comps = get<std::int64_t>(in);
  const auto rep = get<std::int64_t>(in);
  if (d < 2 || d > 3 || n < 4 || n > (1 << 16)) throw IoError("bad snapshot header in '" + path.string() + "'");
  const Lattice lat(static_cast<int>(d), static_cast<int>(n), box);
  FieldKind kind;
  if (comps == 1) kind = FieldKind::scalar;
  else if (comps == d) kind = FieldKind::vector;
  else if (comps == d * d) kind = FieldKind::tensor;
  else throw IoError("bad component count in '" + path.string() + "'");
  Field f(lat, kind, rep == 0 ? Representation::physical : Representation::spectral);
  if (f.is_physical()) {
    auto v = f.all_values();
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    auto c = f.all_coeffs();
    in.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(complex)));
  }
  if (!in) throw IoError("truncated snapshot payload in '" + path.string() + "'");
  return f;
}

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw DataError("table row width does not match the schema");
  rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
  std::string s;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) s += ',';
    s += table.columns[i];
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += format_double(row[i]);
    }
    s += '\n';
  }
  return s;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  auto out = open_out(path);
  out << to_csv(table);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

}  // namespace mildns::io
