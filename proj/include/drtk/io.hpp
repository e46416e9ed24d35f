#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "drtk/data.hpp"
#include "drtk/optimize.hpp"

namespace drtk {

struct CsvMatrix {
  DataMatrix data;
  std::optional<LabelPartition> labels;  // from a trailing `label` column
  bool had_header = false;
};

// Comma separated, '.' decimal. The first row is a header when any of its
// cells is non-numeric; a header whose last cell is `label` marks that column
// as integer class ids.
CsvMatrix parse_matrix_csv(std::string_view text);
CsvMatrix read_matrix_csv(const std::string& path);

// One integer per line, optional header.
LabelPartition parse_labels_csv(std::string_view text);
LabelPartition read_labels_csv(const std::string& path);

std::string format_matrix_csv(const DataMatrix& M, const LabelPartition* labels = nullptr);

std::string read_file(const std::string& path);
// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);

std::string model_set_to_json(const AdaptiveModelSet& set);
AdaptiveModelSet model_set_from_json(std::string_view text);

}  // namespace drtk
