#include "dyson/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dyson {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw IoError("csv row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const auto& cells, auto&& cell) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cell(cells[k]);
    }
    out += '\n';
  };
  line(header_, [](const std::string& s) { return s; });
  for (const auto& r : rows_)
    line(r, [](const Cell& c) {
      if (auto d = std::get_if<double>(&c)) return format_number(*d);
      if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
      return std::get<std::string>(c);
    });
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace dyson
