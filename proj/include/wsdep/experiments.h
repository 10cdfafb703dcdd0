#ifndef WSDEP_EXPERIMENTS_H_
#define WSDEP_EXPERIMENTS_H_

// Synthetic ensembles, recovery-probability sweeps over the sample size, and
// a node-wise pseudo-likelihood baseline that ignores the latent label.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wsdep/mrf.h"
#include "wsdep/rpca.h"
#include "wsdep/structure.h"

namespace wsdep {

enum class EnsembleKind { kSsb, kSbd };
std::string ToString(EnsembleKind kind);
EnsembleKind ParseEnsembleKind(const std::string& s);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::kSsb;
  int m = 20;
  std::vector<int> clique_sizes{4};  // placed consecutively from source 0
  double strong_param = 0.5;
  double weak_param = 0.1;
  double accuracy_param = 0.5;
  std::uint64_t seed = 0;  // reserved for downstream sampling

  void Validate() const;
};

struct Instance {
  SourceGraph graph;
  IsingParams params;
};

// Dominant clique first at strong_param, other cliques at weak_param.
Instance GenerateSsbInstance(const EnsembleSpec& ensemble);

// Each clique's lowest-indexed pair at strong_param, the rest at weak_param.
Instance GenerateSbdInstance(const EnsembleSpec& ensemble);

Instance GenerateInstance(const EnsembleSpec& ensemble);

struct BaselineConfig {
  double l1_weight = 0.02;
  double threshold = 0.8;
  int max_sweeps = 500;
  double tol = 1e-6;
};

struct BaselineResult {
  RecoveredStructure structure;
  Eigen::MatrixXd weights;  // row i: coefficients of node i's regression
  bool converged = true;
  int sweeps = 0;  // largest sweep count over the m regressions
};

// For each source, an l1-penalized logistic regression on the other sources
// with an unpenalized intercept, fit by cyclic coordinate descent with a
// one-dimensional Newton step per coordinate. Edge (i, j) iff |w_ij| or
// |w_ji| exceeds the threshold.
BaselineResult BaselinePseudolikelihood(const LabelMatrix& labels,
                                        const BaselineConfig& config);

enum class LambdaRule { kFixed, kScaled };  // scaled: value * sqrt(log m / n)

struct SweepConfig {
  std::vector<int> n_grid{10, 30, 100, 300, 1000};
  int trials = 20;
  std::vector<std::string> methods{"rpca", "baseline"};
  std::uint64_t master_seed = 0;
  bool exact_cov = false;  // rpca only; replaces sampling by the exact Sigma_O
  int burn_in = 200;       // Gibbs sweeps
  int thin = 2;
  int threads = 1;

  // lambda_n is replaced by the rule below.
  SolverConfig solver = [] {
    SolverConfig c;
    c.gamma = 0.3;
    return c;
  }();
  LambdaRule lambda_rule = LambdaRule::kScaled;
  double lambda_value = 0.5;
  ThresholdStrategy threshold = ThresholdStrategy::Fixed(0.8);
  BaselineConfig baseline;

  void Validate() const;
};

struct SweepRow {
  std::string method;
  int n = 0;
  int trials = 0;
  double success_fraction = 0.0;
  int failures = 0;  // cells that raised an error
  double mean_precision = 0.0;
  double mean_recall = 0.0;
};

struct SweepResult {
  std::vector<int> n_grid;
  int trials = 0;
  std::vector<SweepRow> rows;  // method-major, n ascending
  std::vector<std::string> failure_log;  // "method n=.. trial=..: reason"
  SweepConfig config;
  std::optional<EnsembleSpec> ensemble;  // set by callers that generated the instance
};

// Pure function of its arguments; identifies one sweep cell.
std::uint64_t DeriveSeed(std::uint64_t master_seed, const std::string& method,
                         int n, int trial);

double LambdaFor(const SweepConfig& config, int m, int n);

SweepResult RunRecoverySweep(const Instance& instance,
                             const SweepConfig& config);

enum class ExportFormat { kCsv, kJson };

void ExportResults(const SweepResult& result, const std::string& path,
                   ExportFormat format);

// Reads either format back. CSV carries only the four result columns.
SweepResult ReadResults(const std::string& path, ExportFormat format);

}  // namespace wsdep

#endif  // WSDEP_EXPERIMENTS_H_
