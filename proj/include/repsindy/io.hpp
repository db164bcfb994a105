#ifndef REPSINDY_IO_HPP_
#define REPSINDY_IO_HPP_

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include <nlohmann/json.hpp>
#include "repsindy/errors.hpp"
#include "repsindy/sindy.hpp"
#include "repsindy/sparse_model.hpp"
#include "repsindy/trajectory.hpp"

namespace repsindy {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Trajectory CSV: header t,x1,...,xn[,dx1,...,dxn]; shortest round-trip
// decimal for every value.

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string trajectory_to_csv(const Trajectory& traj) {
  const Eigen::Index n = traj.dimension();
  std::string out = "t";
  for (Eigen::Index j = 1; j <= n; ++j) out += ",x" + std::to_string(j);
  if (traj.derivatives)
    for (Eigen::Index j = 1; j <= n; ++j) out += ",dx" + std::to_string(j);
  out += '\n';
  for (Eigen::Index i = 0; i < traj.samples(); ++i) {
    out += format_double(traj.times(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      out += ',';
      out += format_double(traj.states(i, j));
    }
    if (traj.derivatives)
      for (Eigen::Index j = 0; j < n; ++j) {
        out += ',';
        out += format_double((*traj.derivatives)(i, j));
      }
    out += '\n';
  }
  return out;
}

inline Trajectory trajectory_from_csv(const std::string& text, const std::string& source) {
  auto fail = [&](std::size_t line, const std::string& what) -> ParseError {
    return ParseError(source + ":" + std::to_string(line) + ": " + what);
  };
  auto split = [](std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos
                                             ? std::string_view::npos
                                             : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };

  std::vector<std::string_view> lines;
  {
    std::string_view all(text);
    std::size_t start = 0;
    while (start < all.size()) {
      std::size_t end = all.find('\n', start);
      if (end == std::string_view::npos) end = all.size();
      std::string_view l = all.substr(start, end - start);
      if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
      lines.push_back(l);
      start = end + 1;
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw fail(1, "empty file");

  const auto header = split(lines[0]);
  if (header.size() < 2 || header[0] != "t") throw fail(1, "header must start with 't,x1'");
  std::size_t n = 0;
  while (n + 1 < header.size() && header[n + 1] == "x" + std::to_string(n + 1)) ++n;
  if (n == 0) throw fail(1, "header has no state columns");
  const bool has_deriv = header.size() == 1 + 2 * n;
  if (!has_deriv && header.size() != 1 + n) throw fail(1, "unexpected header columns");
  if (has_deriv)
    for (std::size_t j = 0; j < n; ++j)
      if (header[1 + n + j] != "dx" + std::to_string(j + 1))
        throw fail(1, "expected derivative column dx" + std::to_string(j + 1));

  const Eigen::Index m = static_cast<Eigen::Index>(lines.size() - 1);
  if (m == 0) throw fail(2, "no data rows");
  Trajectory traj;
  traj.times.resize(m);
  traj.states.resize(m, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd deriv(has_deriv ? m : 0, has_deriv ? static_cast<Eigen::Index>(n) : 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    const auto cells = split(lines[static_cast<std::size_t>(i) + 1]);
    if (cells.size() != header.size())
      throw fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                              std::to_string(cells.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const char* first = cells[c].data();
      const char* last = first + cells[c].size();
      const auto res = std::from_chars(first, last, values[c]);
      if (res.ec != std::errc() || res.ptr != last)
        throw fail(line_no, "malformed number '" + std::string(cells[c]) + "'");
    }
    traj.times(i) = values[0];
    if (i > 0 && !(traj.times(i) > traj.times(i - 1)))
      throw fail(line_no, "times must be strictly increasing");
    for (std::size_t j = 0; j < n; ++j) {
      traj.states(i, static_cast<Eigen::Index>(j)) = values[1 + j];
      if (has_deriv) deriv(i, static_cast<Eigen::Index>(j)) = values[1 + n + j];
    }
  }
  if (has_deriv) traj.derivatives = std::move(deriv);
  if (m >= 2) traj.meta.h = (traj.times(m - 1) - traj.times(0)) / static_cast<double>(m - 1);
  return traj;
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  write_text_file(path, trajectory_to_csv(traj));
}

inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  return trajectory_from_csv(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Matrices as nested JSON arrays (row-major).

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 && j[0].is_array() ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(what + " rows must all have the same length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ParseError(what + " entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Model document:
//   {library: {n, degree, trig}, threshold, coefficients: [[...]],
//    reconstructed_columns: [...], constraint_blocks: [[...]],
//    ensemble?: {inclusion_probability: [[...]], ...}}

inline Json model_to_json(const SparseModel& model,
                          const EnsembleModel* ensemble = nullptr) {
  Json doc;
  doc["library"] = {{"n", model.library.n_states()},
                    {"degree", model.library.degree()},
                    {"trig", model.library.include_trig()}};
  doc["threshold"] = model.threshold;
  doc["coefficients"] = matrix_to_json(model.coefficients);
  doc["reconstructed_columns"] = model.reconstructed_columns;
  doc["constraint_blocks"] = model.constraint_blocks;
  if (ensemble) {
    doc["ensemble"] = {{"n_models", ensemble->member_count},
                       {"subsample_fraction", ensemble->subsample_fraction},
                       {"inclusion_threshold", ensemble->inclusion_threshold},
                       {"inclusion_probability", matrix_to_json(ensemble->inclusion_probability)},
                       {"coefficient_median", matrix_to_json(ensemble->coefficient_median)}};
  }
  return doc;
}

inline SparseModel model_from_json(const Json& doc) {
  try {
    const Json& lib = doc.at("library");
    SparseModel model;
    model.library = FeatureLibrary(lib.at("n").get<int>(), lib.at("degree").get<int>(),
                                   lib.at("trig").get<bool>());
    model.threshold = doc.at("threshold").get<double>();
    model.coefficients = matrix_from_json(doc.at("coefficients"), "coefficients");
    if (model.coefficients.rows() != model.library.size() ||
        model.coefficients.cols() != model.library.n_states())
      throw ParseError("coefficient matrix shape does not match library");
    model.reconstructed_columns = doc.at("reconstructed_columns").get<std::vector<int>>();
    if (doc.contains("constraint_blocks"))
      model.constraint_blocks = doc.at("constraint_blocks").get<ConstraintBlocks>();
    CheckBlocks(model.constraint_blocks, model.n_states());
    return model;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid model document: ") + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Identification report.

struct IdentificationReport {
  double support_precision = 0.0;
  double support_recall = 0.0;
  double support_f1 = 0.0;
  double coeff_max_abs_error = 0.0;
  double coeff_rms_error = 0.0;
  double forecast_rmse = 0.0;
  std::optional<double> forecast_diverged_at;
  std::vector<std::string> equations;
  Json config = Json::object();

  bool operator==(const IdentificationReport&) const = default;
};

inline Json report_to_json(const IdentificationReport& r) {
  Json doc;
  doc["support_precision"] = r.support_precision;
  doc["support_recall"] = r.support_recall;
  doc["support_f1"] = r.support_f1;
  doc["coeff_max_abs_error"] = r.coeff_max_abs_error;
  doc["coeff_rms_error"] = r.coeff_rms_error;
  doc["forecast_rmse"] = r.forecast_rmse;
  doc["forecast_diverged_at"] =
      r.forecast_diverged_at ? Json(*r.forecast_diverged_at) : Json(nullptr);
  doc["equations"] = r.equations;
  doc["config"] = r.config;
  return doc;
}

inline IdentificationReport report_from_json(const Json& doc) {
  try {
    IdentificationReport r;
    r.support_precision = doc.at("support_precision").get<double>();
    r.support_recall = doc.at("support_recall").get<double>();
    r.support_f1 = doc.at("support_f1").get<double>();
    r.coeff_max_abs_error = doc.at("coeff_max_abs_error").get<double>();
    r.coeff_rms_error = doc.at("coeff_rms_error").get<double>();
    r.forecast_rmse = doc.at("forecast_rmse").get<double>();
    if (!doc.at("forecast_diverged_at").is_null())
      r.forecast_diverged_at = doc.at("forecast_diverged_at").get<double>();
    r.equations = doc.at("equations").get<std::vector<std::string>>();
    r.config = doc.at("config");
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid report document: ") + e.what());
  }
}

}  // namespace repsindy

#endif  // REPSINDY_IO_HPP_
