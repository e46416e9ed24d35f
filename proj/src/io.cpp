#include "drtk/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "drtk/error.hpp"

namespace drtk {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> to_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++number;
    if (!trim(line).empty()) lines.push_back({number, line});
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return lines;
}

std::size_t column_of(std::string_view line, std::size_t cell) {
  std::size_t col = 1;
  for (std::size_t i = 0, seen = 0; i < line.size() && seen < cell; ++i)
    if (line[i] == ',') {
      ++seen;
      col = i + 2;
    }
  return col;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw ParseError("invalid number '" + s + "' in model set");
}

}  // namespace

CsvMatrix parse_matrix_csv(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw ParseError("matrix file is empty");

  std::size_t first = 0;
  bool label_column = false;
  bool header = false;
  {
    const auto cells = split_cells(lines[0].text);
    for (auto c : cells)
      if (!to_double(c)) header = true;
    if (header) {
      first = 1;
      label_column = cells.back() == "label";
    }
  }
  if (first == lines.size()) throw ParseError("matrix file has a header but no rows", lines[0].number, 1);

  const std::size_t width = split_cells(lines[first].text).size();
  const std::size_t cols = label_column ? width - 1 : width;
  if (cols == 0) throw ParseError("matrix has no data columns", lines[first].number, 1);
  if (header && split_cells(lines[0].text).size() != width)
    throw ParseError("header has " + std::to_string(split_cells(lines[0].text).size()) + " cells, rows have " +
                         std::to_string(width),
                     lines[0].number, 1);

  std::vector<double> values;
  std::vector<long long> ids;
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto& line = lines[r];
    const auto cells = split_cells(line.text);
    if (cells.size() != width)
      throw ParseError("expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()),
                       line.number, 1);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = to_double(cells[c]);
      if (!v) throw ParseError("invalid number '" + std::string(cells[c]) + "'", line.number, column_of(line.text, c));
      if (!std::isfinite(*v))
        throw ParseError("non-finite value '" + std::string(cells[c]) + "'", line.number, column_of(line.text, c));
      values.push_back(*v);
    }
    if (label_column) {
      const auto id = to_integer(cells[cols]);
      if (!id)
        throw ParseError("invalid label '" + std::string(cells[cols]) + "'", line.number, column_of(line.text, cols));
      ids.push_back(*id);
    }
  }
  const std::size_t rows = lines.size() - first;
  CsvMatrix out{DataMatrix(rows, cols, std::move(values)), std::nullopt, header};
  if (label_column) out.labels = LabelPartition::from_ids(ids);
  return out;
}

CsvMatrix read_matrix_csv(const std::string& path) { return parse_matrix_csv(read_file(path)); }

LabelPartition parse_labels_csv(std::string_view text) {
  const auto lines = content_lines(text);
  std::vector<long long> ids;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = split_cells(lines[r].text);
    if (cells.size() != 1) throw ParseError("label file must have one column", lines[r].number, 1);
    const auto id = to_integer(cells[0]);
    if (!id) {
      if (r == 0) continue;
      throw ParseError("invalid label '" + std::string(cells[0]) + "'", lines[r].number, 1);
    }
    ids.push_back(*id);
  }
  if (ids.empty()) throw ParseError("label file has no labels");
  return LabelPartition::from_ids(ids);
}

LabelPartition read_labels_csv(const std::string& path) { return parse_labels_csv(read_file(path)); }

std::string format_matrix_csv(const DataMatrix& M, const LabelPartition* labels) {
  if (labels && labels->size() != M.rows()) throw ValidationError("label count does not match row count");
  std::string out;
  for (std::size_t c = 0; c < M.cols(); ++c) out += (c ? ",x" : "x") + std::to_string(c);
  if (labels) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < M.rows(); ++i) {
    for (std::size_t c = 0; c < M.cols(); ++c) {
      if (c) out += ',';
      out += format_double(M(i, c));
    }
    if (labels) out += ',' + std::to_string(labels->assignments()[i]);
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename onto '" + path + "'");
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string model_set_to_json(const AdaptiveModelSet& set) {
  json j;
  j["format"] = "drtk-models-1";
  j["metric"] = {{"kind", to_string(set.spec.kind)},
                 {"k_list", set.spec.k_list},
                 {"cvm", to_string(set.spec.cvm.kind)},
                 {"growth_rate", set.spec.cvm.growth_rate}};
  j["ks"] = set.ks;
  j["budget"] = set.budget;
  j["seed"] = set.seed;
  j["features"] = set.features;
  j["models"] = json::array();
  for (const auto& tm : set.models) {
    json r2 = json::array();
    for (double v : tm.r2) r2.push_back(number_json(v));
    j["models"].push_back({{"technique", to_string(tm.technique.id)},
                           {"target_dim", tm.technique.target_dim},
                           {"regressor", to_string(tm.chosen)},
                           {"r2", r2},
                           {"r2_undefined", tm.r2_undefined},
                           {"constant_fallback", tm.constant_fallback},
                           {"targets", tm.targets},
                           {"feature_dim", tm.model.feature_dim()},
                           {"bounded_unit", tm.model.bounded_unit()},
                           {"constant", tm.model.constant()},
                           {"coefficients", tm.model.coefficients()},
                           {"neighbors", tm.model.neighbors()},
                           {"train_features", tm.model.train_features()},
                           {"train_targets", tm.model.train_targets()}});
  }
  return j.dump(2) + "\n";
}

AdaptiveModelSet model_set_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    if (j.at("format") != "drtk-models-1") throw ParseError("unsupported model-set format");
    AdaptiveModelSet set;
    const auto& m = j.at("metric");
    set.spec.kind = metric_kind_from_string(m.at("kind").get<std::string>());
    set.spec.k_list = m.at("k_list").get<std::vector<std::size_t>>();
    set.spec.cvm.kind = cvm_kind_from_string(m.at("cvm").get<std::string>());
    set.spec.cvm.growth_rate = m.at("growth_rate").get<double>();
    set.ks = j.at("ks").get<std::vector<std::size_t>>();
    set.budget = j.at("budget").get<std::size_t>();
    set.seed = j.at("seed").get<std::uint64_t>();
    set.features = j.at("features").get<FeatureRows>();
    for (const auto& tj : j.at("models")) {
      const auto kind = regressor_from_string(tj.at("regressor").get<std::string>());
      std::array<double, 3> r2{};
      if (tj.at("r2").size() != r2.size()) throw ParseError("model set: r2 must have 3 entries");
      for (std::size_t i = 0; i < r2.size(); ++i) r2[i] = number_from_json(tj.at("r2")[i]);
      auto model = RegressionModel::restore(kind, tj.at("feature_dim").get<std::size_t>(),
                                            tj.at("bounded_unit").get<bool>(), tj.at("constant").get<bool>(),
                                            tj.at("coefficients").get<std::vector<double>>(),
                                            tj.at("train_features").get<FeatureRows>(),
                                            tj.at("train_targets").get<std::vector<double>>(),
                                            tj.value("neighbors", kDefaultKnnNeighbors));
      set.models.push_back(TechniqueModel{
          Technique{technique_from_string(tj.at("technique").get<std::string>()), tj.at("target_dim").get<std::size_t>()},
          std::move(model), kind, r2, tj.at("r2_undefined").get<bool>(), tj.at("constant_fallback").get<bool>(),
          tj.at("targets").get<std::vector<double>>()});
    }
    return set;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model set: ") + e.what());
  }
}

}  // namespace drtk
