#include "wsdep/io.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "wsdep/error.h"

namespace wsdep {

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

long ParseLong(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw IoError(where + ": '" + s + "' is not an integer");
  }
  return v;
}

double ParseDouble(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw IoError(where + ": '" + s + "' is not a number");
  }
  return v;
}

std::ofstream OpenForWrite(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.precision(17);
  return out;
}

std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

template <typename F>
auto Guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

double Finite(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

void WriteLabelsCsv(const std::string& path, const LabelMatrix& labels,
                    bool zero_one) {
  auto out = OpenForWrite(path);
  out << labels.m() << ',' << labels.n() << '\n';
  for (int j = 0; j < labels.n(); ++j) {
    for (int i = 0; i < labels.m(); ++i) {
      const int v = labels(i, j);
      if (i) out << ',';
      out << (zero_one ? (v > 0 ? 1 : 0) : v);
    }
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

LabelMatrix ReadLabelsCsv(const std::string& path, bool zero_one) {
  auto in = OpenForRead(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  const auto header = SplitCsvLine(line);
  if (header.size() != 2) {
    throw IoError("'" + path + "': first line must be 'm,n'");
  }
  const long m = ParseLong(header[0], path + " header");
  const long n = ParseLong(header[1], path + " header");
  if (m < 1 || n < 0) throw IoError("'" + path + "': bad dimensions");
  std::vector<Spin> values;
  values.reserve(static_cast<std::size_t>(m * n));
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + " line " + std::to_string(rows + 2);
    const auto fields = SplitCsvLine(line);
    if (static_cast<long>(fields.size()) != m) {
      throw IoError(where + ": expected " + std::to_string(m) + " entries");
    }
    for (const auto& f : fields) {
      const long v = ParseLong(f, where);
      if (zero_one) {
        if (v != 0 && v != 1) {
          throw InvalidLabelError(where + ": label " + f + " is not in {0,1}");
        }
        values.push_back(v == 1 ? 1 : -1);
      } else {
        if (v != -1 && v != 1) {
          throw InvalidLabelError(where + ": label " + f + " is not in {-1,1}");
        }
        values.push_back(static_cast<Spin>(v));
      }
    }
    ++rows;
  }
  if (rows != n) {
    throw IoError("'" + path + "': header promises " + std::to_string(n) +
                  " rows, found " + std::to_string(rows));
  }
  return LabelMatrix(static_cast<int>(m), static_cast<int>(n), std::move(values));
}

Json GraphToJson(const SourceGraph& graph) {
  Json edges = Json::array();
  for (const auto& [i, j] : graph.edges()) edges.push_back({i, j});
  return {{"m", graph.m()}, {"edges", edges}};
}

SourceGraph GraphFromJson(const Json& j) {
  return Guarded("graph JSON", [&] {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (e.size() != 2) throw IoError("graph JSON: edges must be [i, j] pairs");
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return SourceGraph(j.at("m").get<int>(), edges);
  });
}

Json ParamsToJson(const IsingParams& params) {
  Json edges = Json::array();
  for (const auto& [e, v] : params.theta_edge) {
    edges.push_back({e.first, e.second, v});
  }
  return {{"theta_node", std::vector<double>(params.theta_node.begin(),
                                             params.theta_node.end())},
          {"theta_edge", edges},
          {"theta_y", params.theta_y},
          {"theta_y_node", std::vector<double>(params.theta_y_node.begin(),
                                               params.theta_y_node.end())}};
}

IsingParams ParamsFromJson(const Json& j) {
  return Guarded("params JSON", [&] {
    IsingParams p;
    const auto node = j.at("theta_node").get<std::vector<double>>();
    p.theta_node = Eigen::Map<const Eigen::VectorXd>(node.data(),
                                                     static_cast<int>(node.size()));
    for (const auto& e : j.at("theta_edge")) {
      if (e.size() != 3) {
        throw IoError("params JSON: theta_edge entries must be [i, j, value]");
      }
      int a = e.at(0).get<int>(), b = e.at(1).get<int>();
      if (a > b) std::swap(a, b);
      p.theta_edge[{a, b}] = e.at(2).get<double>();
    }
    p.theta_y = j.at("theta_y").get<double>();
    const auto yn = j.at("theta_y_node").get<std::vector<double>>();
    p.theta_y_node = Eigen::Map<const Eigen::VectorXd>(yn.data(),
                                                       static_cast<int>(yn.size()));
    return p;
  });
}

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const Json& j) {
  return Guarded("matrix JSON", [&] {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    const int r = static_cast<int>(rows.size());
    const int c = r ? static_cast<int>(rows[0].size()) : 0;
    Eigen::MatrixXd out(r, c);
    for (int i = 0; i < r; ++i) {
      if (static_cast<int>(rows[i].size()) != c) {
        throw IoError("matrix JSON: ragged rows");
      }
      for (int k = 0; k < c; ++k) out(i, k) = rows[i][k];
    }
    return out;
  });
}

void WriteCovarianceCsv(const std::string& path, const Eigen::MatrixXd& sigma) {
  auto out = OpenForWrite(path);
  for (int i = 0; i < sigma.rows(); ++i) {
    for (int j = 0; j < sigma.cols(); ++j) {
      if (j) out << ',';
      out << sigma(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

void WriteCovarianceJson(const std::string& path, const Eigen::MatrixXd& sigma) {
  WriteJsonFile(path, {{"m", sigma.rows()}, {"values", MatrixToJson(sigma)}});
}

CovarianceMatrix ReadCovariance(const std::string& path) {
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  if (json) {
    const Json j = ReadJsonFile(path);
    const Eigen::MatrixXd values = MatrixFromJson(
        Guarded(path, [&] { return j.at("values"); }));
    const int m = Guarded(path, [&] { return j.at("m").get<int>(); });
    if (values.rows() != m || values.cols() != m) {
      throw DimensionMismatchError("'" + path + "': values are not m x m");
    }
    return CovarianceMatrix(values);
  }
  auto in = OpenForRead(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    for (const auto& f : SplitCsvLine(line)) {
      row.push_back(ParseDouble(f, path + " row " + std::to_string(rows.size() + 1)));
    }
    rows.push_back(std::move(row));
  }
  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd values(m, m);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(rows[i].size()) != m) {
      throw DimensionMismatchError("'" + path + "' is not a square matrix");
    }
    for (int j = 0; j < m; ++j) values(i, j) = rows[i][j];
  }
  return CovarianceMatrix(values);
}

Json DecompositionToJson(const DecompositionResult& r) {
  return {{"s_hat", MatrixToJson(r.s_hat)},
          {"l_hat", MatrixToJson(r.l_hat)},
          {"objective_trace", r.objective_trace},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"final_kkt_residual", r.final_kkt_residual}};
}

Json StructureToJson(const RecoveredStructure& s) {
  Json edges = Json::array();
  Json scores = Json::object();
  for (const auto& e : s.edges) {
    edges.push_back({e.first, e.second});
    const auto it = s.scores.find(e);
    scores[std::to_string(e.first) + "," + std::to_string(e.second)] =
        it == s.scores.end() ? 0.0 : it->second;
  }
  return {{"m", s.m},
          {"edges", edges},
          {"scores", scores},
          {"threshold_used", s.threshold_used}};
}

Json MetricsToJson(const StructureMetrics& m) {
  return {{"true_positives", m.true_positives},
          {"false_positives", m.false_positives},
          {"false_negatives", m.false_negatives},
          {"edge_precision", m.edge_precision},
          {"edge_recall", m.edge_recall},
          {"exact_match", m.exact_match}};
}

Json ToJson(const IdentifiabilityReport& r) {
  return {{"d", r.d},
          {"m", r.m},
          {"a_min", r.a_min},
          {"a_max", r.a_max},
          {"c_min", r.c_min},
          {"c_max", r.c_max},
          {"mu_bound", r.mu_bound},
          {"xi_bound", r.xi_bound},
          {"product_bound", r.product_bound},
          {"identifiable", r.identifiable},
          {"m_min", r.m_min}};
}

Json ToJson(const MuEstimateResult& r) {
  return {{"upper", r.upper}, {"monte_carlo_lower", r.monte_carlo_lower}};
}

Json ToJson(const TransversalityEstimate& r) {
  return {{"alpha_omega", r.alpha_omega}, {"alpha_t", r.alpha_t},
          {"delta_omega", r.delta_omega}, {"delta_t", r.delta_t},
          {"beta_omega", r.beta_omega},   {"beta_t", r.beta_t},
          {"alpha", r.alpha},             {"beta", r.beta},
          {"delta", r.delta},             {"trials", r.trials},
          {"note", "Monte Carlo estimates"}};
}

Json ToJson(const ConditionConstants& c) {
  return {{"alpha", c.alpha}, {"beta", c.beta},   {"delta", c.delta},
          {"nu", c.nu},       {"gamma", c.gamma}, {"psi_1", c.psi_1},
          {"psi_m", c.psi_m}, {"sigma", c.sigma}, {"k_o_min", c.k_o_min},
          {"c1", c.c1},       {"c2", c.c2},       {"c4", c.c4},
          {"d", c.d}};
}

Json ToJson(const RateEstimate& r) {
  return {{"condition", ToString(r.condition)},
          {"tau", r.tau},
          {"rho", Finite(r.rho)},
          {"n_required", Finite(r.n_required)},
          {"lambda_n", Finite(r.lambda_n)},
          {"success_probability", r.success_probability},
          {"note", "up to unspecified universal constants c1, c2, c4"}};
}

Json ToJson(const LowerBoundReport& r) {
  Json j = {{"m", r.m},
            {"theta", r.theta},
            {"delta", r.delta},
            {"n_max_unsupervised", r.n_max_unsupervised},
            {"n_supervised", r.n_supervised},
            {"n_delta", r.n_delta},
            {"relative_cost", r.relative_cost}};
  if (r.degenerate) {
    j["warning"] = "m = 2 leaves a single candidate graph; bounds are zero";
  }
  return j;
}

Json ReadJsonFile(const std::string& path) {
  auto in = OpenForRead(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

void WriteTextFile(const std::string& path, const std::string& text) {
  auto out = OpenForWrite(path);
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace wsdep
