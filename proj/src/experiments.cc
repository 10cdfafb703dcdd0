#include "wsdep/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wsdep/covariance.h"
#include "wsdep/error.h"

namespace wsdep {

namespace {

using nlohmann::json;

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Instance BuildCliques(const EnsembleSpec& ensemble, bool sbd) {
  ensemble.Validate();
  std::vector<Edge> edges;
  std::map<Edge, double> weights;
  int start = 0;
  for (std::size_t c = 0; c < ensemble.clique_sizes.size(); ++c) {
    const int size = ensemble.clique_sizes[c];
    for (int i = start; i < start + size; ++i) {
      for (int j = i + 1; j < start + size; ++j) {
        double w;
        if (sbd) {
          w = (i == start && j == start + 1) ? ensemble.strong_param
                                             : ensemble.weak_param;
        } else {
          w = c == 0 ? ensemble.strong_param : ensemble.weak_param;
        }
        edges.emplace_back(i, j);
        weights[{i, j}] = w;
      }
    }
    start += size;
  }
  Instance out{SourceGraph(ensemble.m, edges), {}};
  out.params = IsingParams::Zero(out.graph);
  out.params.theta_edge = std::move(weights);
  out.params.theta_y_node.setConstant(ensemble.m, ensemble.accuracy_param);
  out.params.Validate(out.graph);
  return out;
}

struct CellOutcome {
  bool success = false;
  bool failed = false;
  double precision = 0.0;
  double recall = 0.0;
  std::string reason;
};

CellOutcome RunCell(const Instance& instance, const SweepConfig& config,
                    const Eigen::MatrixXd* exact_sigma_o,
                    const std::string& method, int n, int trial) {
  CellOutcome out;
  try {
    RecoveredStructure estimate;
    if (method == "rpca") {
      CovarianceMatrix sigma;
      if (exact_sigma_o != nullptr) {
        sigma = CovarianceMatrix(*exact_sigma_o);
      } else {
        const LabelMatrix labels =
            GibbsSample(instance.graph, instance.params, n, config.burn_in,
                        config.thin, DeriveSeed(config.master_seed, method, n, trial));
        sigma = ComputeEmpiricalCovariance(labels).covariance;
      }
      SolverConfig solver = config.solver;
      solver.lambda_n = LambdaFor(config, instance.graph.m(), n);
      const DecompositionResult fit = Solve(sigma, solver);
      estimate = ThresholdEdges(fit.s_hat, SelectThreshold(fit.s_hat, config.threshold));
    } else {
      const LabelMatrix labels =
          GibbsSample(instance.graph, instance.params, n, config.burn_in,
                      config.thin, DeriveSeed(config.master_seed, method, n, trial));
      estimate = BaselinePseudolikelihood(labels, config.baseline).structure;
    }
    const StructureMetrics metrics = CompareStructures(instance.graph, estimate);
    out.success = metrics.exact_match;
    out.precision = metrics.edge_precision;
    out.recall = metrics.edge_recall;
  } catch (const Error& e) {
    out.failed = true;
    out.reason = e.what();
  }
  return out;
}

json ConfigToJson(const SweepConfig& c) {
  json j;
  j["n_grid"] = c.n_grid;
  j["trials"] = c.trials;
  j["methods"] = c.methods;
  j["master_seed"] = c.master_seed;
  j["exact_cov"] = c.exact_cov;
  j["burn_in"] = c.burn_in;
  j["thin"] = c.thin;
  j["threads"] = c.threads;
  j["lambda_rule"] = c.lambda_rule == LambdaRule::kFixed ? "fixed" : "scaled";
  j["lambda_value"] = c.lambda_value;
  j["gamma"] = c.solver.gamma;
  j["max_iters"] = c.solver.max_iters;
  j["tol"] = c.solver.tol;
  j["pd_floor"] = c.solver.pd_floor;
  j["step"] = {{"kind", c.solver.step.kind == StepPolicy::Kind::kFixed
                            ? "fixed"
                            : "backtracking"},
               {"eta", c.solver.step.eta},
               {"shrink", c.solver.step.shrink}};
  switch (c.threshold.kind) {
    case ThresholdStrategy::Kind::kFixed:
      j["threshold"] = {{"kind", "fixed"}, {"value", c.threshold.value}};
      break;
    case ThresholdStrategy::Kind::kLargestGap:
      j["threshold"] = {{"kind", "largest_gap"}};
      break;
    case ThresholdStrategy::Kind::kExpectedEdges:
      j["threshold"] = {{"kind", "expected_edges"}, {"k", c.threshold.k}};
      break;
  }
  j["baseline"] = {{"l1_weight", c.baseline.l1_weight},
                   {"threshold", c.baseline.threshold},
                   {"max_sweeps", c.baseline.max_sweeps},
                   {"tol", c.baseline.tol}};
  return j;
}

SweepConfig ConfigFromJson(const json& j) {
  SweepConfig c;
  c.n_grid = j.at("n_grid").get<std::vector<int>>();
  c.trials = j.at("trials").get<int>();
  c.methods = j.at("methods").get<std::vector<std::string>>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.exact_cov = j.at("exact_cov").get<bool>();
  c.burn_in = j.at("burn_in").get<int>();
  c.thin = j.at("thin").get<int>();
  c.threads = j.at("threads").get<int>();
  c.lambda_rule = j.at("lambda_rule").get<std::string>() == "fixed"
                      ? LambdaRule::kFixed
                      : LambdaRule::kScaled;
  c.lambda_value = j.at("lambda_value").get<double>();
  c.solver.gamma = j.at("gamma").get<double>();
  c.solver.max_iters = j.at("max_iters").get<int>();
  c.solver.tol = j.at("tol").get<double>();
  c.solver.pd_floor = j.at("pd_floor").get<double>();
  const json& step = j.at("step");
  c.solver.step.kind = step.at("kind").get<std::string>() == "fixed"
                           ? StepPolicy::Kind::kFixed
                           : StepPolicy::Kind::kBacktracking;
  c.solver.step.eta = step.at("eta").get<double>();
  c.solver.step.shrink = step.at("shrink").get<double>();
  const json& t = j.at("threshold");
  const std::string kind = t.at("kind").get<std::string>();
  if (kind == "fixed") {
    c.threshold = ThresholdStrategy::Fixed(t.at("value").get<double>());
  } else if (kind == "expected_edges") {
    c.threshold = ThresholdStrategy::ExpectedEdges(t.at("k").get<int>());
  } else {
    c.threshold = ThresholdStrategy::LargestGap();
  }
  const json& b = j.at("baseline");
  c.baseline.l1_weight = b.at("l1_weight").get<double>();
  c.baseline.threshold = b.at("threshold").get<double>();
  c.baseline.max_sweeps = b.at("max_sweeps").get<int>();
  c.baseline.tol = b.at("tol").get<double>();
  return c;
}

json EnsembleToJson(const EnsembleSpec& e) {
  return {{"kind", e.kind == EnsembleKind::kSsb ? "ssb" : "sbd"},
          {"m", e.m},
          {"clique_sizes", e.clique_sizes},
          {"strong_param", e.strong_param},
          {"weak_param", e.weak_param},
          {"accuracy_param", e.accuracy_param},
          {"seed", e.seed}};
}

EnsembleSpec EnsembleFromJson(const json& j) {
  EnsembleSpec e;
  e.kind = j.at("kind").get<std::string>() == "sbd" ? EnsembleKind::kSbd
                                                    : EnsembleKind::kSsb;
  e.m = j.at("m").get<int>();
  e.clique_sizes = j.at("clique_sizes").get<std::vector<int>>();
  e.strong_param = j.at("strong_param").get<double>();
  e.weak_param = j.at("weak_param").get<double>();
  e.accuracy_param = j.at("accuracy_param").get<double>();
  e.seed = j.at("seed").get<std::uint64_t>();
  return e;
}

}  // namespace

std::string ToString(EnsembleKind kind) {
  return kind == EnsembleKind::kSsb ? "ssb" : "sbd";
}

EnsembleKind ParseEnsembleKind(const std::string& s) {
  if (s == "ssb" || s == "SSB") return EnsembleKind::kSsb;
  if (s == "sbd" || s == "SBD") return EnsembleKind::kSbd;
  throw ValidationError("unknown ensemble kind '" + s + "' (want ssb or sbd)");
}

void EnsembleSpec::Validate() const {
  if (m < 1) throw ValidationError("m must be at least 1");
  int total = 0;
  for (int size : clique_sizes) {
    if (size < 2) throw ValidationError("clique sizes must be at least 2");
    total += size;
  }
  if (total > m) {
    throw ValidationError("clique sizes sum to " + std::to_string(total) +
                          " > m = " + std::to_string(m));
  }
  if (!(weak_param > 0.0)) throw ValidationError("weak_param must be positive");
  if (!(strong_param > weak_param)) {
    throw ValidationError("strong_param must exceed weak_param");
  }
  if (!std::isfinite(strong_param) || !std::isfinite(accuracy_param)) {
    throw ValidationError("ensemble parameters must be finite");
  }
}

Instance GenerateSsbInstance(const EnsembleSpec& ensemble) {
  if (ensemble.kind != EnsembleKind::kSsb) {
    throw ValidationError("ensemble kind must be ssb");
  }
  if (ensemble.clique_sizes.empty()) {
    throw ValidationError("an ssb ensemble needs a dominant clique");
  }
  return BuildCliques(ensemble, false);
}

Instance GenerateSbdInstance(const EnsembleSpec& ensemble) {
  if (ensemble.kind != EnsembleKind::kSbd) {
    throw ValidationError("ensemble kind must be sbd");
  }
  if (ensemble.clique_sizes.size() < 2) {
    throw ValidationError("an sbd ensemble needs at least 2 cliques");
  }
  return BuildCliques(ensemble, true);
}

Instance GenerateInstance(const EnsembleSpec& ensemble) {
  return ensemble.kind == EnsembleKind::kSsb ? GenerateSsbInstance(ensemble)
                                         : GenerateSbdInstance(ensemble);
}

BaselineResult BaselinePseudolikelihood(const LabelMatrix& labels,
                                        const BaselineConfig& config) {
  const int m = labels.m();
  const int n = labels.n();
  if (n < 2) throw InsufficientSamplesError("baseline needs n >= 2");
  if (!(config.l1_weight >= 0.0) || !(config.threshold >= 0.0)) {
    throw ValidationError("baseline weight and threshold must be non-negative");
  }
  if (config.max_sweeps < 1) throw ValidationError("max_sweeps must be >= 1");

  const Eigen::MatrixXd x = labels.ToDense();  // m x n
  BaselineResult result;
  result.weights = Eigen::MatrixXd::Zero(m, m);
  // Curvature floor; the logistic Hessian can vanish on separable data.
  constexpr double kMinCurvature = 1e-3;

  for (int i = 0; i < m; ++i) {
    const Eigen::ArrayXd y = x.row(i).transpose().array();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);  // w(i) stays 0
    double b = 0.0;
    Eigen::ArrayXd margin = Eigen::ArrayXd::Zero(n);
    bool done = false;
    int sweep = 0;
    while (!done && sweep < config.max_sweeps) {
      ++sweep;
      double max_change = 0.0;
      for (int j = -1; j < m; ++j) {
        if (j == i) continue;
        // p = P(label disagrees with the model's sign); gradient -mean(y x p),
        // curvature mean(p (1 - p)) since every feature squares to 1.
        const Eigen::ArrayXd p = 1.0 / (1.0 + (y * margin).exp());
        const Eigen::ArrayXd feature =
            j < 0 ? Eigen::ArrayXd::Ones(n) : Eigen::ArrayXd(x.row(j).transpose());
        const double grad = -(y * feature * p).mean();
        const double curvature = std::max(kMinCurvature, (p * (1.0 - p)).mean());
        const double old = j < 0 ? b : w(j);
        const double raw = old - grad / curvature;
        double updated = raw;
        if (j >= 0) {
          const double mag = std::abs(raw) - config.l1_weight / curvature;
          updated = mag > 0.0 ? std::copysign(mag, raw) : 0.0;
        }
        const double change = updated - old;
        if (change != 0.0) {
          margin += change * feature;
          if (j < 0) {
            b = updated;
          } else {
            w(j) = updated;
          }
        }
        max_change = std::max(max_change, std::abs(change));
      }
      done = max_change < config.tol;
    }
    if (!done) result.converged = false;
    result.sweeps = std::max(result.sweeps, sweep);
    result.weights.row(i) = w.transpose();
  }

  result.structure.m = m;
  result.structure.threshold_used = config.threshold;
  for (int j = 1; j < m; ++j) {
    for (int i = 0; i < j; ++i) {
      const double score =
          std::max(std::abs(result.weights(i, j)), std::abs(result.weights(j, i)));
      if (score > config.threshold) {
        result.structure.edges.insert({i, j});
        result.structure.scores[{i, j}] = score;
      }
    }
  }
  return result;
}

void SweepConfig::Validate() const {
  if (n_grid.empty()) throw ValidationError("n_grid must not be empty");
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    if (n_grid[k] < 2) throw ValidationError("every n must be at least 2");
    if (k > 0 && n_grid[k] <= n_grid[k - 1]) {
      throw ValidationError("n_grid must be strictly ascending");
    }
  }
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (methods.empty()) throw ValidationError("no methods requested");
  for (const auto& method : methods) {
    if (method != "rpca" && method != "baseline") {
      throw ValidationError("unknown method '" + method + "'");
    }
    if (exact_cov && method == "baseline") {
      throw ValidationError("the baseline needs samples; drop it with exact_cov");
    }
  }
  if (burn_in < 0 || thin < 1) {
    throw ValidationError("burn_in must be >= 0 and thin >= 1");
  }
  if (threads < 1) throw ValidationError("threads must be at least 1");
  if (!(lambda_value > 0.0)) throw ValidationError("lambda must be positive");
  SolverConfig probe = solver;
  probe.lambda_n = lambda_value;
  probe.Validate();
}

std::uint64_t DeriveSeed(std::uint64_t master_seed, const std::string& method,
                         int n, int trial) {
  std::uint64_t h = SplitMix(master_seed);
  h = SplitMix(h ^ Fnv1a(method));
  h = SplitMix(h ^ static_cast<std::uint64_t>(n));
  return SplitMix(h ^ static_cast<std::uint64_t>(trial));
}

double LambdaFor(const SweepConfig& config, int m, int n) {
  if (config.lambda_rule == LambdaRule::kFixed) return config.lambda_value;
  return config.lambda_value * std::sqrt(std::log(std::max(m, 2)) / n);
}

SweepResult RunRecoverySweep(const Instance& instance,
                             const SweepConfig& config) {
  config.Validate();
  instance.params.Validate(instance.graph);
  Eigen::MatrixXd exact_sigma_o;
  if (config.exact_cov) {
    const int m = instance.graph.m();
    exact_sigma_o = ExactCovariance(instance.graph, instance.params)
                        .topLeftCorner(m, m);
  }

  struct Cell {
    std::size_t method, n_index;
    int trial;
  };
  std::vector<Cell> cells;
  for (std::size_t a = 0; a < config.methods.size(); ++a) {
    for (std::size_t b = 0; b < config.n_grid.size(); ++b) {
      for (int t = 0; t < config.trials; ++t) cells.push_back({a, b, t});
    }
  }
  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const Cell& c = cells[k];
      outcomes[k] = RunCell(instance, config,
                            config.exact_cov ? &exact_sigma_o : nullptr,
                            config.methods[c.method], config.n_grid[c.n_index],
                            c.trial);
    }
  };
  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  result.n_grid = config.n_grid;
  result.trials = config.trials;
  result.config = config;
  for (std::size_t a = 0; a < config.methods.size(); ++a) {
    for (std::size_t b = 0; b < config.n_grid.size(); ++b) {
      SweepRow row;
      row.method = config.methods[a];
      row.n = config.n_grid[b];
      row.trials = config.trials;
      int successes = 0;
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k].method != a || cells[k].n_index != b) continue;
        const CellOutcome& o = outcomes[k];
        successes += o.success;
        row.mean_precision += o.precision;
        row.mean_recall += o.recall;
        if (o.failed) {
          ++row.failures;
          result.failure_log.push_back(row.method + " n=" +
                                       std::to_string(row.n) + " trial=" +
                                       std::to_string(cells[k].trial) + ": " +
                                       o.reason);
        }
      }
      row.success_fraction = static_cast<double>(successes) / config.trials;
      row.mean_precision /= config.trials;
      row.mean_recall /= config.trials;
      result.rows.push_back(row);
    }
  }
  return result;
}

void ExportResults(const SweepResult& result, const std::string& path,
                   ExportFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.precision(17);
  if (format == ExportFormat::kCsv) {
    out << "method,n,trials,success_fraction\n";
    for (const auto& row : result.rows) {
      out << row.method << ',' << row.n << ',' << row.trials << ','
          << row.success_fraction << '\n';
    }
  } else {
    json j;
    j["n_grid"] = result.n_grid;
    j["trials"] = result.trials;
    j["rows"] = json::array();
    for (const auto& row : result.rows) {
      j["rows"].push_back({{"method", row.method},
                           {"n", row.n},
                           {"trials", row.trials},
                           {"success_fraction", row.success_fraction},
                           {"failures", row.failures},
                           {"mean_precision", row.mean_precision},
                           {"mean_recall", row.mean_recall}});
    }
    j["failure_log"] = result.failure_log;
    j["config"] = ConfigToJson(result.config);
    if (result.ensemble) j["ensemble"] = EnsembleToJson(*result.ensemble);
    out << j.dump(2) << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

SweepResult ReadResults(const std::string& path, ExportFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  SweepResult result;
  if (format == ExportFormat::kCsv) {
    std::string line;
    if (!std::getline(in, line) || line != "method,n,trials,success_fraction") {
      throw IoError("'" + path + "' lacks the sweep CSV header");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      SweepRow row;
      std::string n, trials, fraction;
      if (!std::getline(ss, row.method, ',') || !std::getline(ss, n, ',') ||
          !std::getline(ss, trials, ',') || !std::getline(ss, fraction)) {
        throw IoError("malformed sweep CSV row: " + line);
      }
      try {
        row.n = std::stoi(n);
        row.trials = std::stoi(trials);
        row.success_fraction = std::stod(fraction);
      } catch (const std::exception&) {
        throw IoError("malformed sweep CSV row: " + line);
      }
      if (std::find(result.n_grid.begin(), result.n_grid.end(), row.n) ==
          result.n_grid.end()) {
        result.n_grid.push_back(row.n);
      }
      result.trials = row.trials;
      result.rows.push_back(row);
    }
    std::sort(result.n_grid.begin(), result.n_grid.end());
    return result;
  }
  try {
    const json j = json::parse(in);
    result.n_grid = j.at("n_grid").get<std::vector<int>>();
    result.trials = j.at("trials").get<int>();
    for (const auto& r : j.at("rows")) {
      SweepRow row;
      row.method = r.at("method").get<std::string>();
      row.n = r.at("n").get<int>();
      row.trials = r.at("trials").get<int>();
      row.success_fraction = r.at("success_fraction").get<double>();
      row.failures = r.at("failures").get<int>();
      row.mean_precision = r.at("mean_precision").get<double>();
      row.mean_recall = r.at("mean_recall").get<double>();
      result.rows.push_back(row);
    }
    result.failure_log = j.at("failure_log").get<std::vector<std::string>>();
    result.config = ConfigFromJson(j.at("config"));
    if (j.contains("ensemble")) {
      result.ensemble = EnsembleFromJson(j.at("ensemble"));
    }
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
  return result;
}

}  // namespace wsdep
