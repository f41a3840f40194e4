#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bornsob/sobolev.hpp"
#include "json.hpp"

namespace bornsob {

/// 17 significant digits in scientific notation; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);
double parse_number(const std::string& s);

/// Leading "# key=value" lines, one header row, then comma-separated rows.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;
  /// Column `name` parsed as numbers.
  std::vector<double> numbers(const std::string& name) const;
  std::string meta_value(const std::string& key) const;
};

std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& t);
CsvTable read_csv(const std::filesystem::path& path);

/// Receiver data as rows (source, receiver, re, im).
CsvTable data_table(const Eigen::MatrixXcd& phi);
Eigen::MatrixXcd table_data(const CsvTable& t);

/// "BORNSOB1", uint64 LE header length, JSON header, then float64 LE values
/// (interleaved re/im when the header says complex).
void write_field(const std::filesystem::path& path, const GridField& f, const nlohmann::json& meta = {});
GridField read_field(const std::filesystem::path& path, nlohmann::json* meta = nullptr);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m, const nlohmann::json& meta = {});
Eigen::MatrixXcd read_matrix(const std::filesystem::path& path, nlohmann::json* meta = nullptr);

/// "key = value" lines; '#' starts a comment. Throws DomainError on a malformed line.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace bornsob
