#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dyson {

// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values
std::string format_number(double v);

// Header row plus rows of numbers, integers or bare strings.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// writes atomically enough for a single writer: temp file then rename
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dyson
