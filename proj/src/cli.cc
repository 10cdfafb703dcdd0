#include "wsdep/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "wsdep/analysis.h"
#include "wsdep/covariance.h"
#include "wsdep/error.h"
#include "wsdep/experiments.h"
#include "wsdep/io.h"
#include "wsdep/mrf.h"
#include "wsdep/rpca.h"
#include "wsdep/structure.h"

namespace wsdep {

namespace {

struct ThresholdOptions {
  std::string kind = "largest_gap";
  double value = 0.0;
  int k = 0;

  ThresholdStrategy ToStrategy() const {
    if (kind == "fixed") return ThresholdStrategy::Fixed(value);
    if (kind == "expected_edges") return ThresholdStrategy::ExpectedEdges(k);
    return ThresholdStrategy::LargestGap();
  }
};

void AddThresholdOptions(CLI::App* app, ThresholdOptions& t) {
  app->add_option("--threshold", t.kind, "Threshold strategy")
      ->check(CLI::IsMember({"largest_gap", "expected_edges", "fixed"}))
      ->capture_default_str();
  app->add_option("--threshold-value,--threshold_value", t.value,
                  "Threshold for the fixed strategy")
      ->capture_default_str();
  app->add_option("--k", t.k, "Edge count for the expected_edges strategy")
      ->capture_default_str();
}

void AddSolverOptions(CLI::App* app, SolverConfig& s, std::string& step_kind) {
  app->add_option("--lambda", s.lambda_n, "Regularization weight lambda_n")
      ->capture_default_str();
  app->add_option("--gamma", s.gamma, "Sparse / low-rank trade-off")
      ->capture_default_str();
  app->add_option("--max-iters,--max_iters", s.max_iters, "Iteration cap")
      ->capture_default_str();
  app->add_option("--tol", s.tol, "KKT residual stopping threshold")
      ->capture_default_str();
  app->add_option("--pd-floor,--pd_floor", s.pd_floor,
                  "Minimum eigenvalue enforced on S - L")
      ->capture_default_str();
  app->add_option("--step", step_kind, "Step policy")
      ->check(CLI::IsMember({"backtracking", "fixed"}))
      ->capture_default_str();
  app->add_option("--eta", s.step.eta,
                  "Fixed step, or initial backtracking step (0: 1/||Sigma||)")
      ->capture_default_str();
}

Json Snapshot(const std::string& command, const std::vector<std::string>& args,
              const CLI::App* app) {
  Json options = Json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    const auto results = opt->results();
    std::string key = opt->get_lnames().empty() ? opt->get_name()
                                                : opt->get_lnames().front();
    if (!results.empty()) {
      options[key] = results.size() == 1 ? Json(results.front()) : Json(results);
    } else if (!opt->get_default_str().empty()) {
      options[key] = opt->get_default_str();
    }
  }
  return {{"command", command}, {"args", args}, {"options", options}};
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  EnsembleSpec ensemble;
  std::string kind = "ssb";
  int n = 1000;
  int burn_in = 200;
  int thin = 2;
  std::string out_dir = ".";
  std::string labels_path, graph_path, params_path;
  bool zero_one = false;
};

int RunSimulate(const SimulateOptions& o, std::ostream& out) {
  if (o.n < 1) throw ValidationError("--n must be at least 1");
  EnsembleSpec ensemble = o.ensemble;
  ensemble.kind = ParseEnsembleKind(o.kind);
  const Instance instance = GenerateInstance(ensemble);
  const LabelMatrix labels = GibbsSample(instance.graph, instance.params, o.n,
                                         o.burn_in, o.thin, ensemble.seed);
  if (o.labels_path.empty() || o.graph_path.empty() || o.params_path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    if (ec) throw IoError("cannot create '" + o.out_dir + "': " + ec.message());
  }
  const auto path = [&](const std::string& given, const std::string& name) {
    return given.empty() ? o.out_dir + "/" + name : given;
  };
  WriteLabelsCsv(path(o.labels_path, "labels.csv"), labels, o.zero_one);
  WriteJsonFile(path(o.graph_path, "graph.json"), GraphToJson(instance.graph));
  WriteJsonFile(path(o.params_path, "params.json"), ParamsToJson(instance.params));
  out << "m=" << ensemble.m << " n=" << o.n << " s=" << instance.graph.NumClusters()
      << " d=" << instance.graph.MaxDegree() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------- learn

struct LearnOptions {
  std::string labels_path, cov_path, graph_path, params_path, truth_path;
  bool exact_cov = false;
  bool zero_one = false;
  bool sdd_shift = false;
  SolverConfig solver;
  std::string step_kind = "backtracking";
  ThresholdOptions threshold;
  std::string out_path = "structure.json";
  std::string decomposition_path = "decomposition.json";
};

int RunLearn(const LearnOptions& o, const Json& snapshot, std::ostream& out,
             std::ostream& err) {
  const int inputs = !o.labels_path.empty() + !o.cov_path.empty() + o.exact_cov;
  if (inputs != 1) {
    throw ValidationError(
        "give exactly one of --labels, --from-cov or --exact-cov");
  }
  CovarianceMatrix sigma;
  std::optional<SourceGraph> truth;
  if (!o.labels_path.empty()) {
    sigma = ComputeEmpiricalCovariance(ReadLabelsCsv(o.labels_path, o.zero_one))
                .covariance;
  } else if (!o.cov_path.empty()) {
    sigma = ReadCovariance(o.cov_path);
  } else {
    if (o.graph_path.empty() || o.params_path.empty()) {
      throw ValidationError("--exact-cov needs --graph and --params");
    }
    const SourceGraph graph = GraphFromJson(ReadJsonFile(o.graph_path));
    const IsingParams params = ParamsFromJson(ReadJsonFile(o.params_path));
    params.Validate(graph);
    const int m = graph.m();
    sigma = CovarianceMatrix(ExactCovariance(graph, params).topLeftCorner(m, m));
    truth = graph;
  }
  if (!o.truth_path.empty()) truth = GraphFromJson(ReadJsonFile(o.truth_path));

  Json shift = nullptr;
  if (o.sdd_shift) {
    SddShiftResult shifted = SddShift(sigma);
    shift = shifted.nu;
    sigma = shifted.shifted;
  }

  SolverConfig solver = o.solver;
  solver.step.kind = o.step_kind == "fixed" ? StepPolicy::Kind::kFixed
                                            : StepPolicy::Kind::kBacktracking;
  DecompositionResult fit;
  try {
    fit = Solve(sigma, solver);
  } catch (const NumericalError& e) {
    WriteJsonFile(o.decomposition_path,
                  {{"error", e.what()}, {"config", snapshot}});
    throw;
  }
  const double t = SelectThreshold(fit.s_hat, o.threshold.ToStrategy());
  const RecoveredStructure structure = ThresholdEdges(fit.s_hat, t);

  Json decomposition = DecompositionToJson(fit);
  decomposition["sdd_shift_nu"] = shift;
  decomposition["config"] = snapshot;
  WriteJsonFile(o.decomposition_path, decomposition);

  Json result = StructureToJson(structure);
  if (truth) {
    const StructureMetrics metrics = CompareStructures(*truth, structure);
    result["metrics"] = MetricsToJson(metrics);
    out << "exact_match=" << (metrics.exact_match ? "true" : "false")
        << " precision=" << metrics.edge_precision
        << " recall=" << metrics.edge_recall << '\n';
  }
  result["config"] = snapshot;
  WriteJsonFile(o.out_path, result);
  if (!fit.converged) {
    err << "warning: solver stopped after " << fit.iterations
        << " iterations with KKT residual " << fit.final_kkt_residual << '\n';
  }
  out << "edges=" << structure.edges.size() << " threshold=" << t
      << " iterations=" << fit.iterations
      << " converged=" << (fit.converged ? "true" : "false") << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseOptions {
  std::string graph_path, params_path, json_path;
  std::optional<int> d, m, s;
  std::optional<double> a_min, a_max, c_min, c_max, r_e;
  std::optional<double> alpha, beta, psi_1, psi_m, sigma, k_o_min;
  double trans_delta = 0.0;
  double nu = 0.25, tau = 1.0, c1 = 1.0, c2 = 1.0, c4 = 1.0, c_ssb = 3.0;
  double theta = 0.5, delta = 0.5;
  int trials = 200;
  std::uint64_t seed = 0;
};

void PrintRows(std::ostream& out, const std::string& title, const Json& j) {
  out << title << '\n';
  for (const auto& [key, value] : j.items()) {
    out << "  " << std::left << std::setw(22) << key << ' '
        << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
}

int RunDiagnose(const DiagnoseOptions& o, const Json& snapshot,
                std::ostream& out, std::ostream& err) {
  Json report;
  int d = 0, m = 0, s = 0;
  double r_e = 0;
  ConditionConstants constants;

  if (!o.graph_path.empty() || !o.params_path.empty()) {
    if (o.graph_path.empty() || o.params_path.empty()) {
      throw ValidationError("enumeration-backed diagnostics need --graph and --params");
    }
    const SourceGraph graph = GraphFromJson(ReadJsonFile(o.graph_path));
    const IsingParams params = ParamsFromJson(ReadJsonFile(o.params_path));
    params.Validate(graph);
    Eigen::MatrixXd full;
    try {
      full = ExactCovariance(graph, params);
    } catch (const EnumerationTooLargeError& e) {
      throw EnumerationTooLargeError(
          std::string(e.what()) +
          "; pass scalar inputs instead (--m --d --s --a-min --a-max --c-min "
          "--c-max --r-e --alpha --beta --psi1 --psim --sigma --kmin)");
    }
    m = graph.m();
    d = std::max(1, graph.MaxDegree());
    s = graph.NumClusters();
    const Eigen::MatrixXd sigma_o = full.topLeftCorner(m, m);
    r_e = EffectiveRank(CovarianceMatrix(sigma_o));
    const BlockDecomposition block = GroundTruthDecomposition(full);
    const CovarianceExtremes ex = ExtractExtremes(full);
    report["identifiability"] =
        ToJson(IdentifiabilityBound(d, m, ex.a_min, ex.a_max, ex.c_min, ex.c_max));
    report["identifiability"]["extremes"] =
        "magnitudes of Sigma_OS (a) and off-diagonal Sigma_O (c)";
    report["xi_estimate"] = XiEstimate(block.z);
    report["mu_estimate"] = ToJson(MuEstimate(graph, o.trials, o.seed));
    report["mu_xi_certificate"] = d * XiEstimate(block.z);
    report["transversality"] = ToJson(
        EstimateTransversality(sigma_o, graph, block.z, o.trials, o.seed));
    constants = ConditionConstantsFor(full, graph, o.nu, o.trials, o.seed);
    constants = MakeConditionConstants(
        constants.alpha, constants.beta, constants.delta, o.nu, d,
        constants.psi_1, constants.psi_m, constants.sigma, constants.k_o_min,
        o.c1, o.c2, o.c4);
  } else {
    std::vector<std::string> missing;
    const auto need = [&](const auto& v, const char* flag) {
      if (!v) missing.push_back(flag);
    };
    need(o.m, "--m");
    need(o.d, "--d");
    need(o.s, "--s");
    need(o.a_min, "--a-min");
    need(o.a_max, "--a-max");
    need(o.c_min, "--c-min");
    need(o.c_max, "--c-max");
    need(o.r_e, "--r-e");
    need(o.alpha, "--alpha");
    need(o.beta, "--beta");
    need(o.psi_1, "--psi1");
    need(o.psi_m, "--psim");
    need(o.sigma, "--sigma");
    need(o.k_o_min, "--kmin");
    if (!missing.empty()) {
      std::string list;
      for (const auto& f : missing) list += " " + f;
      throw ValidationError(
          "without --graph/--params, diagnose needs scalar inputs; missing:" +
          list);
    }
    m = *o.m;
    d = *o.d;
    s = *o.s;
    r_e = *o.r_e;
    report["identifiability"] =
        ToJson(IdentifiabilityBound(d, m, *o.a_min, *o.a_max, *o.c_min, *o.c_max));
    constants = MakeConditionConstants(*o.alpha, *o.beta, o.trans_delta, o.nu,
                                       d, *o.psi_1, *o.psi_m, *o.sigma,
                                       *o.k_o_min, o.c1, o.c2, o.c4);
  }

  report["constants"] = ToJson(constants);
  const SbdLimits limits = SbdThresholds(m, o.tau);
  report["effective_rank"] = r_e;
  report["sbd"] = {{"satisfied", CheckSbd(r_e, s, m, o.tau)},
                   {"clusters", s},
                   {"effective_rank_limit", limits.effective_rank_limit},
                   {"cluster_limit", limits.cluster_limit}};
  report["ssb"] = {{"satisfied", CheckSsb(r_e, d, o.c_ssb)},
                   {"c", o.c_ssb},
                   {"limit", o.c_ssb * d}};
  report["rates"] = {
      ToJson(SampleComplexity(RateCondition::kSbd, constants, d, m, o.tau)),
      ToJson(SampleComplexity(RateCondition::kSsb, constants, d, m, o.tau))};
  const LowerBoundReport lower = LowerBound(m, o.theta, o.delta);
  if (lower.degenerate) {
    err << "warning: m = 2 leaves a single candidate graph; lower bound is 0\n";
  }
  report["lower_bound"] = ToJson(lower);
  report["logarithms"] = "natural";
  report["config"] = snapshot;

  for (const char* section : {"identifiability", "constants", "sbd", "ssb",
                              "lower_bound"}) {
    PrintRows(out, section, report[section]);
  }
  for (const auto& rate : report["rates"]) {
    PrintRows(out, "rate " + rate["condition"].get<std::string>(), rate);
  }
  if (!o.json_path.empty()) WriteJsonFile(o.json_path, report);
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepOptions {
  EnsembleSpec ensemble;
  std::string kind = "ssb";
  SweepConfig config;
  std::string lambda_rule = "scaled";
  std::string step_kind = "backtracking";
  ThresholdOptions threshold{"fixed", 0.8, 0};
  std::string out_path = "sweep.csv";
  std::string format;
};

int RunSweep(SweepOptions o, std::ostream& out, std::ostream& err) {
  o.ensemble.kind = ParseEnsembleKind(o.kind);
  SweepConfig config = o.config;
  config.lambda_rule =
      o.lambda_rule == "fixed" ? LambdaRule::kFixed : LambdaRule::kScaled;
  config.solver.step.kind = o.step_kind == "fixed"
                                ? StepPolicy::Kind::kFixed
                                : StepPolicy::Kind::kBacktracking;
  config.threshold = o.threshold.ToStrategy();
  const Instance instance = GenerateInstance(o.ensemble);
  SweepResult result = RunRecoverySweep(instance, config);
  result.ensemble = o.ensemble;

  std::string format = o.format;
  if (format.empty()) {
    const bool json = o.out_path.size() >= 5 &&
                      o.out_path.substr(o.out_path.size() - 5) == ".json";
    format = json ? "json" : "csv";
  }
  ExportResults(result, o.out_path,
                format == "json" ? ExportFormat::kJson : ExportFormat::kCsv);
  out << "method,n,trials,success_fraction\n";
  for (const auto& row : result.rows) {
    out << row.method << ',' << row.n << ',' << row.trials << ','
        << row.success_fraction << '\n';
  }
  if (!result.failure_log.empty()) {
    err << result.failure_log.size() << " cell(s) failed:\n";
    for (const auto& line : result.failure_log) err << "  " << line << '\n';
  }
  return kExitOk;
}

// Feeds `key = value` lines into options the command line left unset.
void ApplyConfigFile(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::set<std::string> seen;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(number);
    if (eq == std::string::npos) {
      throw ValidationError(where + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    CLI::Option* opt = key.empty() || key == "config"
                           ? nullptr
                           : app->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw ValidationError(where + ": unknown config key '" + key + "'");
    }
    if (!seen.insert(opt->get_name()).second) {
      throw ValidationError(where + ": duplicate config key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_items_expected_max() > 1) {
      std::istringstream tokens(value);
      for (std::string token; tokens >> token;) opt->add_result(token);
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

// ------------------------------------------------------------------ oracle

struct OracleOptions {
  std::string graph_path, params_path, what = "covariance", out_path, format;
};

int RunOracle(const OracleOptions& o, std::ostream& out) {
  const SourceGraph graph = GraphFromJson(ReadJsonFile(o.graph_path));
  const IsingParams params = ParamsFromJson(ReadJsonFile(o.params_path));
  params.Validate(graph);
  if (graph.m() > kMaxEnumerationSources) {
    throw EnumerationTooLargeError(
        "oracle enumerates at most " + std::to_string(kMaxEnumerationSources) +
        " sources; got m = " + std::to_string(graph.m()));
  }
  const int m = graph.m();
  std::string format = o.format;
  if (format.empty()) {
    const bool json = o.out_path.size() >= 5 &&
                      o.out_path.substr(o.out_path.size() - 5) == ".json";
    format = json ? "json" : "csv";
  }
  if (o.what == "covariance" || o.what == "full-covariance") {
    const Eigen::MatrixXd full = ExactCovariance(graph, params);
    const Eigen::MatrixXd sigma =
        o.what == "covariance" ? Eigen::MatrixXd(full.topLeftCorner(m, m)) : full;
    if (format == "json") {
      WriteCovarianceJson(o.out_path, sigma);
    } else {
      WriteCovarianceCsv(o.out_path, sigma);
    }
  } else if (o.what == "joint") {
    const JointDistribution joint = ExactJoint(graph, params);
    WriteJsonFile(o.out_path, {{"m", joint.m},
                               {"state_bits", "bit k = variable k, bit m = Y"},
                               {"probabilities", joint.probabilities}});
  } else {
    const BlockDecomposition block =
        GroundTruthDecomposition(ExactCovariance(graph, params));
    WriteJsonFile(o.out_path,
                  {{"k", MatrixToJson(block.k)},
                   {"k_o", MatrixToJson(block.k_o)},
                   {"z", std::vector<double>(block.z.begin(), block.z.end())},
                   {"c", block.c}});
  }
  out << "wrote " << o.what << " for m=" << m << " to " << o.out_path << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Dependency structure learning for weak supervision sources"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Sample a synthetic ensemble");
  simulate->add_option("--kind", sim.kind, "ssb or sbd")
      ->check(CLI::IsMember({"ssb", "sbd"}))
      ->capture_default_str();
  simulate->add_option("--m", sim.ensemble.m, "Number of sources")->capture_default_str();
  simulate->add_option("--cliques", sim.ensemble.clique_sizes,
                       "Clique sizes, dominant first")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--strong", sim.ensemble.strong_param, "Strong edge parameter")
      ->capture_default_str();
  simulate->add_option("--weak", sim.ensemble.weak_param, "Weak edge parameter")
      ->capture_default_str();
  simulate->add_option("--accuracy", sim.ensemble.accuracy_param,
                       "Source/label coupling theta_Yi")
      ->capture_default_str();
  simulate->add_option("--n", sim.n, "Number of samples")->capture_default_str();
  simulate->add_option("--burn-in", sim.burn_in, "Gibbs burn-in sweeps")
      ->capture_default_str();
  simulate->add_option("--thin", sim.thin, "Gibbs sweeps between samples")
      ->capture_default_str();
  simulate->add_option("--seed", sim.ensemble.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")
      ->capture_default_str();
  simulate->add_option("--out-labels", sim.labels_path, "Labels CSV path");
  simulate->add_option("--out-graph", sim.graph_path, "Graph JSON path");
  simulate->add_option("--out-params", sim.params_path, "Params JSON path");
  simulate->add_flag("--zero-one", sim.zero_one, "Write labels as {0,1}");

  LearnOptions learn_opts;
  CLI::App* learn = app.add_subcommand("learn", "Recover the dependency graph");
  learn->add_option("--labels", learn_opts.labels_path, "Labels CSV");
  learn->add_option("--from-cov", learn_opts.cov_path,
                    "Covariance file (CSV, or JSON by extension)");
  learn->add_flag("--exact-cov", learn_opts.exact_cov,
                  "Use the exact covariance of --graph/--params");
  learn->add_option("--graph", learn_opts.graph_path, "Graph JSON");
  learn->add_option("--params", learn_opts.params_path, "Params JSON");
  learn->add_option("--truth", learn_opts.truth_path,
                    "Ground-truth graph JSON for metrics");
  learn->add_flag("--zero-one", learn_opts.zero_one, "Labels are {0,1}");
  learn->add_flag("--sdd-shift", learn_opts.sdd_shift,
                  "Make the covariance diagonally dominant before solving");
  AddSolverOptions(learn, learn_opts.solver, learn_opts.step_kind);
  AddThresholdOptions(learn, learn_opts.threshold);
  learn->add_option("--out", learn_opts.out_path, "Recovered structure JSON")
      ->capture_default_str();
  learn->add_option("--out-decomposition", learn_opts.decomposition_path,
                    "Decomposition JSON")
      ->capture_default_str();

  DiagnoseOptions diag;
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "Identifiability, rate and lower-bound report");
  diagnose->add_option("--graph", diag.graph_path, "Graph JSON");
  diagnose->add_option("--params", diag.params_path, "Params JSON");
  diagnose->add_option("--json", diag.json_path, "Write the report as JSON");
  diagnose->add_option("--m", diag.m, "Number of sources (scalar mode)");
  diagnose->add_option("--d", diag.d, "Maximum degree (scalar mode)");
  diagnose->add_option("--s", diag.s, "Number of clusters (scalar mode)");
  diagnose->add_option("--a-min", diag.a_min, "Smallest |Sigma_OS| entry");
  diagnose->add_option("--a-max", diag.a_max, "Largest |Sigma_OS| entry");
  diagnose->add_option("--c-min", diag.c_min, "Smallest off-diagonal |Sigma_O|");
  diagnose->add_option("--c-max", diag.c_max, "Largest off-diagonal |Sigma_O|");
  diagnose->add_option("--r-e", diag.r_e, "Effective rank of Sigma_O");
  diagnose->add_option("--alpha", diag.alpha, "Transversality alpha");
  diagnose->add_option("--beta", diag.beta, "Transversality beta");
  diagnose->add_option("--trans-delta", diag.trans_delta, "Transversality delta")
      ->capture_default_str();
  diagnose->add_option("--psi1", diag.psi_1, "Largest eigenvalue of Sigma_O");
  diagnose->add_option("--psim", diag.psi_m, "Smallest eigenvalue of Sigma_O");
  diagnose->add_option("--sigma", diag.sigma, "||z||^2");
  diagnose->add_option("--kmin", diag.k_o_min, "Smallest nonzero |K_O| entry");
  diagnose->add_option("--nu", diag.nu, "nu in (0, 1/2)")->capture_default_str();
  diagnose->add_option("--tau", diag.tau, "tau in (0, 1]")->capture_default_str();
  diagnose->add_option("--c1", diag.c1, "Universal constant c1")->capture_default_str();
  diagnose->add_option("--c2", diag.c2, "Universal constant c2")->capture_default_str();
  diagnose->add_option("--c4", diag.c4, "Universal constant c4")->capture_default_str();
  diagnose->add_option("--c-ssb", diag.c_ssb, "Constant c of the SSB check")
      ->capture_default_str();
  diagnose->add_option("--theta", diag.theta, "Edge strength for the lower bound")
      ->capture_default_str();
  diagnose->add_option("--delta", diag.delta, "Error probability for the lower bound")
      ->capture_default_str();
  diagnose->add_option("--trials", diag.trials, "Monte Carlo trials")
      ->capture_default_str();
  diagnose->add_option("--seed", diag.seed, "Monte Carlo seed")->capture_default_str();

  SweepOptions sw;
  CLI::App* sweep = app.add_subcommand("sweep", "Recovery probability versus n");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config,
                    "Flat 'key = value' file; keys are option names without "
                    "dashes, command-line flags win");
  sweep->add_option("--kind", sw.kind, "ssb or sbd")
      ->check(CLI::IsMember({"ssb", "sbd"}))
      ->capture_default_str();
  sweep->add_option("--m", sw.ensemble.m, "Number of sources")->capture_default_str();
  sweep->add_option("--cliques", sw.ensemble.clique_sizes, "Clique sizes")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--strong", sw.ensemble.strong_param, "Strong edge parameter")
      ->capture_default_str();
  sweep->add_option("--weak", sw.ensemble.weak_param, "Weak edge parameter")
      ->capture_default_str();
  sweep->add_option("--accuracy", sw.ensemble.accuracy_param, "Accuracy parameter")
      ->capture_default_str();
  sweep->add_option("--n-grid,--n_grid", sw.config.n_grid, "Sample sizes")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--trials", sw.config.trials, "Trials per cell")
      ->capture_default_str();
  sweep->add_option("--methods", sw.config.methods, "rpca and/or baseline")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--seed", sw.config.master_seed, "Master seed")
      ->capture_default_str();
  sweep->add_flag("--exact-cov,--exact_cov", sw.config.exact_cov,
                  "Replace sampling with the exact covariance (rpca only)");
  sweep->add_option("--burn-in,--burn_in", sw.config.burn_in, "Gibbs burn-in")
      ->capture_default_str();
  sweep->add_option("--thin", sw.config.thin, "Gibbs thinning")->capture_default_str();
  sweep->add_option("--threads", sw.config.threads, "Worker threads")
      ->capture_default_str();
  sweep->add_option("--lambda-rule,--lambda_rule", sw.lambda_rule,
                    "fixed, or scaled: lambda * sqrt(log m / n)")
      ->check(CLI::IsMember({"fixed", "scaled"}))
      ->capture_default_str();
  sweep->add_option("--lambda", sw.config.lambda_value, "Lambda value or scale")
      ->capture_default_str();
  sweep->add_option("--gamma", sw.config.solver.gamma, "Sparse / low-rank trade-off")
      ->capture_default_str();
  sweep->add_option("--max-iters,--max_iters", sw.config.solver.max_iters,
                    "Solver iteration cap")
      ->capture_default_str();
  sweep->add_option("--tol", sw.config.solver.tol, "Solver tolerance")
      ->capture_default_str();
  sweep->add_option("--pd-floor,--pd_floor", sw.config.solver.pd_floor,
                    "Solver PD floor")
      ->capture_default_str();
  AddThresholdOptions(sweep, sw.threshold);
  sweep->add_option("--baseline-l1,--baseline_l1", sw.config.baseline.l1_weight,
                    "Baseline l1 weight")
      ->capture_default_str();
  sweep->add_option("--baseline-threshold,--baseline_threshold",
                    sw.config.baseline.threshold, "Baseline edge threshold")
      ->capture_default_str();
  sweep->add_option("--baseline-max-sweeps,--baseline_max_sweeps",
                    sw.config.baseline.max_sweeps, "Baseline sweep cap")
      ->capture_default_str();
  sweep->add_option("--baseline-tol,--baseline_tol", sw.config.baseline.tol,
                    "Baseline tolerance")
      ->capture_default_str();
  sweep->add_option("--out", sw.out_path, "Result path")->capture_default_str();
  sweep->add_option("--format", sw.format, "csv or json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json"}));

  OracleOptions orc;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact enumeration outputs");
  oracle->add_option("--graph", orc.graph_path, "Graph JSON")->required();
  oracle->add_option("--params", orc.params_path, "Params JSON")->required();
  oracle->add_option("--what", orc.what, "What to compute")
      ->check(CLI::IsMember({"covariance", "full-covariance", "joint", "decomposition"}))
      ->capture_default_str();
  oracle->add_option("--out", orc.out_path, "Output path")->required();
  oracle->add_option("--format", orc.format, "csv or json (covariance only)")
      ->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (simulate->parsed()) return RunSimulate(sim, out);
    if (learn->parsed()) {
      return RunLearn(learn_opts, Snapshot("learn", args, learn), out, err);
    }
    if (diagnose->parsed()) {
      return RunDiagnose(diag, Snapshot("diagnose", args, diagnose), out, err);
    }
    if (sweep->parsed()) {
      if (!sweep_config.empty()) ApplyConfigFile(sweep, sweep_config);
      return RunSweep(sw, out, err);
    }
    if (oracle->parsed()) return RunOracle(orc, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Json::exception& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace wsdep
