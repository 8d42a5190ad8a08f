#ifndef DDTWA_TABLE_HPP
#define DDTWA_TABLE_HPP

#include <string>

#include "observables.hpp"
#include "vendor_json.hpp"

namespace ddtwa {

// Delimited text with a header row: time, then (estimate, stderr) column
// pairs per observable. Values are printed with %.17g so rereading is exact
// and equal runs produce byte-identical files.
void write_table(const ObservableSeries& series, const std::string& path);
ObservableSeries read_table(const std::string& path);

std::string format_double(double v);

// Sidecar metadata document ("<table>.meta.json" next to "<table>.csv").
void write_metadata(const nlohmann::json& metadata, const std::string& table_path);
std::string metadata_path_for(const std::string& table_path);

// Writes the metadata document to an explicit path.
void write_metadata_file(const nlohmann::json& metadata, const std::string& path);

}  // namespace ddtwa

#endif
