#include "table.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace ddtwa {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_table(const ObservableSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);

  out << "time";
  for (const auto& col : series.columns) {
    out << ',' << col.name << ',' << stderr_column_name(col.name);
  }
  out << '\n';
  for (std::size_t t = 0; t < series.time.size(); ++t) {
    out << format_double(series.time[t]);
    for (const auto& col : series.columns) {
      out << ',' << format_double(col.value[t]) << ',' << format_double(col.stderr_[t]);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing output file: " + path);
}

ObservableSeries read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty table: " + path);

  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.empty() || header[0] != "time" || header.size() % 2 == 0) {
    throw IoError("table header must be: time, then estimate/stderr column pairs: " + path);
  }

  ObservableSeries series;
  const std::size_t n_cols = (header.size() - 1) / 2;
  series.columns.resize(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    const std::string& name = header[1 + 2 * c];
    const std::string& err_name = header[2 + 2 * c];
    if (err_name != stderr_column_name(name)) {
      throw IoError("table: column '" + name + "' is not followed by its stderr column");
    }
    series.columns[c].name = name;
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str()) {
        throw IoError("table: bad number at line " + std::to_string(line_no) + ": " + field);
      }
      row.push_back(v);
    }
    if (row.size() != header.size()) {
      throw IoError("table: wrong field count at line " + std::to_string(line_no));
    }
    series.time.push_back(row[0]);
    for (std::size_t c = 0; c < n_cols; ++c) {
      series.columns[c].value.push_back(row[1 + 2 * c]);
      series.columns[c].stderr_.push_back(row[2 + 2 * c]);
    }
  }
  return series;
}

std::string metadata_path_for(const std::string& table_path) {
  const auto dot = table_path.rfind('.');
  const auto slash = table_path.rfind('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return table_path.substr(0, dot) + ".meta.json";
  }
  return table_path + ".meta.json";
}

void write_metadata_file(const nlohmann::json& metadata, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open metadata file: " + path);
  out << metadata.dump(2) << '\n';
  if (!out) throw IoError("failed writing metadata file: " + path);
}

void write_metadata(const nlohmann::json& metadata, const std::string& table_path) {
  write_metadata_file(metadata, metadata_path_for(table_path));
}

}  // namespace ddtwa
