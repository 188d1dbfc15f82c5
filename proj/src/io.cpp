#include "mixstdf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixstdf {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(std::string s, double& v) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && ok; ++i) ok = parse_number(cells[i], row[i]);
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw std::invalid_argument(path + ":" + std::to_string(lineNo) + ": non-numeric value");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument(path + ":" + std::to_string(lineNo) + ": wrong number of columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");
  Eigen::MatrixXd M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return M;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& M, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_double(M(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path);
}

std::string signature_label(const Signature& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
  return out + "}";
}

namespace {

Json matrix_rows(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const Json& j, Index rows, Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) throw std::invalid_argument(what + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw std::invalid_argument(what + ": row " + std::to_string(i) + " has wrong length");
    for (Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw std::invalid_argument(what + ": non-numeric entry");
      M(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return M;
}

Json signatures_json(const std::vector<Signature>& sigs) {
  Json out = Json::array();
  for (const auto& s : sigs) {
    Json one = Json::array();
    for (int j : s) one.push_back(j + 1);
    out.push_back(std::move(one));
  }
  return out;
}

}  // namespace

Json params_to_json(const MixtureParams& theta) {
  Json j;
  j["family"] = to_string(theta.family);
  j["d"] = theta.dim();
  j["r"] = theta.columns();
  Json flat = Json::array();
  for (Index i = 0; i < theta.dim(); ++i)
    for (Index s = 0; s < theta.columns(); ++s) flat.push_back(theta.A(i, s));
  j["A"] = std::move(flat);
  if (theta.family == Family::Logistic) {
    if (theta.alpha.size() == 1) {
      j["alpha"] = theta.alpha(0);
    } else {
      Json a = Json::array();
      for (Index i = 0; i < theta.alpha.size(); ++i) a.push_back(theta.alpha(i));
      j["alpha"] = std::move(a);
    }
  } else if (theta.gamma.size() == 1) {
    j["Gamma"] = matrix_rows(theta.gamma.front());
  } else {
    Json g = Json::array();
    for (const auto& G : theta.gamma) g.push_back(matrix_rows(G));
    j["Gamma"] = std::move(g);
  }
  return j;
}

MixtureParams params_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("model: expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "family" && key != "d" && key != "r" && key != "A" && key != "alpha" && key != "Gamma")
      throw std::invalid_argument("model: unknown key '" + key + "'");
  if (!j.contains("family") || !j.contains("d") || !j.contains("r") || !j.contains("A"))
    throw std::invalid_argument("model: family, d, r and A are required");
  MixtureParams theta;
  theta.family = family_from_string(j.at("family").get<std::string>());
  const auto d = j.at("d").get<Index>(), r = j.at("r").get<Index>();
  if (d < 1 || r < 1) throw std::invalid_argument("model: d and r must be >= 1");
  const Json& flat = j.at("A");
  if (!flat.is_array() || static_cast<Index>(flat.size()) != d * r) throw std::invalid_argument("model: A must hold d*r numbers (row-major)");
  theta.A.resize(d, r);
  for (Index i = 0; i < d; ++i)
    for (Index s = 0; s < r; ++s) theta.A(i, s) = flat[static_cast<std::size_t>(i * r + s)].get<double>();
  if (theta.family == Family::Logistic) {
    if (!j.contains("alpha") || j.contains("Gamma")) throw std::invalid_argument("model: logistic family needs alpha (and no Gamma)");
    const Json& a = j.at("alpha");
    if (a.is_number()) {
      theta.alpha = Eigen::VectorXd::Constant(1, a.get<double>());
    } else if (a.is_array() && static_cast<Index>(a.size()) == r) {
      theta.alpha.resize(r);
      for (Index s = 0; s < r; ++s) theta.alpha(s) = a[static_cast<std::size_t>(s)].get<double>();
    } else {
      throw std::invalid_argument("model: alpha must be a number or a list of r numbers");
    }
  } else {
    if (!j.contains("Gamma") || j.contains("alpha")) throw std::invalid_argument("model: husler_reiss family needs Gamma (and no alpha)");
    const Json& g = j.at("Gamma");
    const bool perColumn = g.is_array() && !g.empty() && g[0].is_array() && !g[0].empty() && g[0][0].is_array();
    if (perColumn) {
      if (static_cast<Index>(g.size()) != r) throw std::invalid_argument("model: Gamma list must have r matrices");
      for (const auto& one : g) theta.gamma.push_back(matrix_from_rows(one, d, d, "model.Gamma"));
    } else {
      theta.gamma.push_back(matrix_from_rows(g, d, d, "model.Gamma"));
    }
  }
  validate(theta);
  return theta;
}

Json fit_report_to_json(const FitReport& rep) {
  Json j;
  j["theta"] = params_to_json(rep.theta);
  j["signatures"] = signatures_json(rep.signatures);
  j["lambda"] = rep.lambda;
  j["start_index"] = rep.startIndex;
  j["start_losses"] = rep.startLosses;
  j["merges"] = rep.merges;
  j["loss"] = {{"data", rep.finalLoss.data}, {"penalty", rep.finalLoss.penalty}, {"total", rep.finalLoss.total}};
  j["loss_trace"] = rep.lossTrace;
  j["alternations"] = rep.alternations;
  j["stop_criterion_met"] = rep.stopCriterionMet;
  Json stages = Json::array();
  for (const auto& s : rep.stages)
    stages.push_back({{"stage", s.name}, {"status", to_string(s.status)}, {"evals", s.evals}, {"loss", s.loss}});
  j["stages"] = std::move(stages);
  Json repaired = Json::array();
  for (Index i : rep.repairedRows) repaired.push_back(i + 1);
  j["repaired_rows"] = std::move(repaired);
  return j;
}

Json direction_report_to_json(const DirectionReport& rep) {
  Json j;
  std::vector<Signature> dirs(rep.directions.begin(), rep.directions.end());
  j["directions"] = signatures_json(dirs);
  j["t_final"] = rep.tFinal;
  j["cap_reached"] = rep.capReached;
  j["collapsed_duplicates"] = rep.collapsedDuplicates;
  if (rep.capReached) j["warning"] = "tMax reached without an empty column";
  if (rep.weightsAvailable) {
    Json w = Json::array();
    for (const auto& [J, v] : rep.weights) w.push_back({{"direction", signature_label(J)}, {"weight", v}});
    j["weights"] = std::move(w);
  } else {
    j["weights"] = nullptr;
    j["weights_note"] = "direction weights are defined for the logistic family only";
  }
  j["lambdas"] = rep.lambdas;
  Json fits = Json::array();
  for (const auto& f : rep.fits) fits.push_back(fit_report_to_json(f));
  j["fits"] = std::move(fits);
  return j;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("error writing " + path);
}

}  // namespace mixstdf
