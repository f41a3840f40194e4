#include "bornsob/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bornsob {

namespace {

constexpr char kMagic[8] = {'B', 'O', 'R', 'N', 'S', 'O', 'B', '1'};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
void put_le(std::string& buf, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T get_le(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw DomainError("binary: truncated file");
  char raw[sizeof(T)];
  std::memcpy(raw, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, raw, sizeof(T));
  return v;
}

void write_binary(const std::filesystem::path& path, const nlohmann::json& header, const std::vector<double>& data) {
  const std::string h = header.dump();
  std::string buf(kMagic, 8);
  put_le<std::uint64_t>(buf, h.size());
  buf += h;
  for (double v : data) put_le<double>(buf, v);
  write_text(path, buf);
}

std::vector<double> read_binary(const std::filesystem::path& path, nlohmann::json& header) {
  const std::string buf = read_text(path);
  if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 8) != 0) throw DomainError("binary: bad magic in " + path.string());
  std::size_t pos = 8;
  const auto len = get_le<std::uint64_t>(buf, pos);
  if (pos + len > buf.size()) throw DomainError("binary: truncated header");
  header = nlohmann::json::parse(buf.substr(pos, len));
  pos += len;
  if ((buf.size() - pos) % 8 != 0) throw DomainError("binary: payload is not a whole number of doubles");
  std::vector<double> data((buf.size() - pos) / 8);
  for (auto& v : data) v = get_le<double>(buf, pos);
  return data;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

double parse_number(const std::string& s) {
  const std::string t = trim(s);
  if (t == "nan") return std::nan("");
  if (t == "inf") return HUGE_VAL;
  if (t == "-inf") return -HUGE_VAL;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw DomainError("not a number: '" + s + "'");
  return v;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw DomainError("csv: row width differs from the header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw DomainError("csv: no column " + name);
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(parse_number(r[c]));
  return out;
}

std::string CsvTable::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  throw DomainError("csv: no metadata key " + key);
}

std::string to_csv(const CsvTable& t) {
  std::string out;
  for (const auto& [k, v] : t.meta) out += "# " + k + "=" + v + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      t.meta.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      continue;
    }
    if (!header) {
      t.columns = split(line);
      header = true;
    } else {
      t.add_row(split(line));
    }
  }
  if (!header) throw DomainError("csv: missing header row");
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_text(path, to_csv(t)); }

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

CsvTable data_table(const Eigen::MatrixXcd& phi) {
  CsvTable t;
  t.columns = {"source", "receiver", "re", "im"};
  for (Eigen::Index s = 0; s < phi.cols(); ++s)
    for (Eigen::Index r = 0; r < phi.rows(); ++r)
      t.add_row({std::to_string(s), std::to_string(r), format_number(phi(r, s).real()), format_number(phi(r, s).imag())});
  return t;
}

Eigen::MatrixXcd table_data(const CsvTable& t) {
  const auto src = t.numbers("source"), rec = t.numbers("receiver"), re = t.numbers("re"), im = t.numbers("im");
  Eigen::Index nr = 0, ns = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    ns = std::max(ns, Eigen::Index(src[i]) + 1);
    nr = std::max(nr, Eigen::Index(rec[i]) + 1);
  }
  if (std::size_t(nr * ns) != src.size()) throw DomainError("csv: data table is not a full receiver x source grid");
  Eigen::MatrixXcd m(nr, ns);
  for (std::size_t i = 0; i < src.size(); ++i) m(Eigen::Index(rec[i]), Eigen::Index(src[i])) = {re[i], im[i]};
  return m;
}

void write_field(const std::filesystem::path& path, const GridField& f, const nlohmann::json& meta) {
  f.validate();
  nlohmann::json h;
  h["kind"] = "grid_field";
  h["shape"] = f.shape;
  h["spacing"] = f.spacing;
  h["offset"] = f.offset;
  h["complex"] = f.complex_valued;
  h["meta"] = meta.is_null() ? nlohmann::json::object() : meta;
  std::vector<double> data;
  data.reserve(f.size() * (f.complex_valued ? 2 : 1));
  for (const auto& v : f.values) {
    data.push_back(v.real());
    if (f.complex_valued) data.push_back(v.imag());
  }
  write_binary(path, h, data);
}

GridField read_field(const std::filesystem::path& path, nlohmann::json* meta) {
  nlohmann::json h;
  const auto data = read_binary(path, h);
  if (h.value("kind", "") != "grid_field") throw DomainError("binary: not a grid field");
  GridField f = GridField::zeros(h["shape"].get<std::vector<std::size_t>>(), h["spacing"].get<std::vector<double>>(),
                                 h["offset"].get<std::vector<double>>(), h["complex"].get<bool>());
  const std::size_t stride = f.complex_valued ? 2 : 1;
  if (data.size() != f.size() * stride) throw DomainError("binary: payload size does not match the shape");
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = f.complex_valued ? cplx(data[2 * i], data[2 * i + 1]) : cplx(data[i], 0.0);
  if (meta) *meta = h["meta"];
  return f;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m, const nlohmann::json& meta) {
  nlohmann::json h;
  h["kind"] = "complex_matrix";
  h["rows"] = m.rows();
  h["cols"] = m.cols();
  h["order"] = "column_major";
  h["meta"] = meta.is_null() ? nlohmann::json::object() : meta;
  std::vector<double> data;
  data.reserve(std::size_t(2 * m.size()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  write_binary(path, h, data);
}

Eigen::MatrixXcd read_matrix(const std::filesystem::path& path, nlohmann::json* meta) {
  nlohmann::json h;
  const auto data = read_binary(path, h);
  if (h.value("kind", "") != "complex_matrix") throw DomainError("binary: not a complex matrix");
  const auto rows = h["rows"].get<Eigen::Index>(), cols = h["cols"].get<Eigen::Index>();
  if (data.size() != std::size_t(2 * rows * cols)) throw DomainError("binary: payload size does not match the shape");
  Eigen::MatrixXcd m(rows, cols);
  std::size_t p = 0;
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i, p += 2) m(i, j) = {data[p], data[p + 1]};
  if (meta) *meta = h["meta"];
  return m;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  return parse_key_values(read_text(path));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw DomainError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bornsob
