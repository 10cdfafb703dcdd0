#include "wsdep/mrf.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "wsdep/error.h"

namespace wsdep {

namespace {

// log(DBL_MAX): exp() of anything larger overflows.
const double kMaxExponent = std::log(std::numeric_limits<double>::max());

double LogSumExp(const std::vector<double>& values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

// Moments of one source cluster conditioned on a fixed value of Y.
struct ClusterMoments {
  double log_partition = 0.0;
  Eigen::VectorXd mean;    // E[l_i | y], cluster-local indexing
  Eigen::MatrixXd second;  // E[l_i l_j | y]
};

ClusterMoments EnumerateCluster(const std::vector<int>& members,
                                const IsingParams& params, int y) {
  const int k = static_cast<int>(members.size());
  if (k > kMaxEnumerationSources) {
    throw EnumerationTooLargeError(
        "cluster of " + std::to_string(k) +
        " sources exceeds the enumeration budget of " +
        std::to_string(kMaxEnumerationSources));
  }
  Eigen::VectorXd field(k);
  for (int a = 0; a < k; ++a) {
    field(a) = params.theta_node(members[a]) +
               params.theta_y_node(members[a]) * y;
  }
  std::vector<std::pair<std::pair<int, int>, double>> couplings;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const double w = params.EdgeWeight(members[a], members[b]);
      if (w != 0.0) couplings.push_back({{a, b}, w});
    }
  }

  const std::size_t states = std::size_t{1} << k;
  std::vector<double> energy(states);
  std::vector<int> spin(k);
  for (std::size_t s = 0; s < states; ++s) {
    double e = 0.0;
    for (int a = 0; a < k; ++a) {
      spin[a] = JointDistribution::SpinOf(s, a);
      e += field(a) * spin[a];
    }
    for (const auto& [ab, w] : couplings) e += w * spin[ab.first] * spin[ab.second];
    energy[s] = e;
  }
  ClusterMoments out;
  out.log_partition = LogSumExp(energy);
  out.mean = Eigen::VectorXd::Zero(k);
  out.second = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t s = 0; s < states; ++s) {
    const double p = std::exp(energy[s] - out.log_partition);
    for (int a = 0; a < k; ++a) {
      const int sa = JointDistribution::SpinOf(s, a);
      out.mean(a) += p * sa;
      for (int b = a + 1; b < k; ++b) {
        out.second(a, b) += p * sa * JointDistribution::SpinOf(s, b);
      }
    }
  }
  for (int a = 0; a < k; ++a) {
    out.second(a, a) = 1.0;
    for (int b = a + 1; b < k; ++b) out.second(b, a) = out.second(a, b);
  }
  return out;
}

// First and second moments of (l_1..l_m, Y) by conditioning on Y.
void FactoredMoments(const SourceGraph& graph, const IsingParams& params,
                     Eigen::VectorXd* mean, Eigen::MatrixXd* second) {
  params.Validate(graph);
  const int m = graph.m();
  const auto clusters = graph.Clusters();
  const int ys[2] = {-1, 1};

  std::vector<ClusterMoments> given_y[2];
  double log_weight[2];
  for (int t = 0; t < 2; ++t) {
    log_weight[t] = params.theta_y * ys[t];
    for (const auto& c : clusters) {
      given_y[t].push_back(EnumerateCluster(c, params, ys[t]));
      log_weight[t] += given_y[t].back().log_partition;
    }
  }
  const double norm = LogSumExp({log_weight[0], log_weight[1]});
  const double p_y[2] = {std::exp(log_weight[0] - norm),
                         std::exp(log_weight[1] - norm)};

  *mean = Eigen::VectorXd::Zero(m + 1);
  *second = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int t = 0; t < 2; ++t) {
    // Conditional mean and second moment of the sources given this y.
    Eigen::VectorXd cond_mean(m);
    Eigen::MatrixXd cond_second(m, m);
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
      const auto& c = clusters[ci];
      for (std::size_t a = 0; a < c.size(); ++a) {
        cond_mean(c[a]) = given_y[t][ci].mean(a);
      }
    }
    cond_second = cond_mean * cond_mean.transpose();
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
      const auto& c = clusters[ci];
      for (std::size_t a = 0; a < c.size(); ++a) {
        for (std::size_t b = 0; b < c.size(); ++b) {
          cond_second(c[a], c[b]) = given_y[t][ci].second(a, b);
        }
      }
    }
    const double y = ys[t];
    mean->head(m) += p_y[t] * cond_mean;
    (*mean)(m) += p_y[t] * y;
    second->topLeftCorner(m, m) += p_y[t] * cond_second;
    second->col(m).head(m) += p_y[t] * y * cond_mean;
  }
  second->row(m).head(m) = second->col(m).head(m).transpose();
  (*second)(m, m) = 1.0;
}

}  // namespace

SourceGraph::SourceGraph(int m, const std::vector<Edge>& edges)
    : m_(m), adjacency_(m < 0 ? 0 : m) {
  if (m < 0) throw ValidationError("source count must be non-negative");
  for (auto [i, j] : edges) {
    if (i == j) {
      throw ValidationError("self-loop on source " + std::to_string(i));
    }
    if (i < 0 || j < 0 || i >= m || j >= m) {
      throw ValidationError("edge (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") out of range for m = " +
                            std::to_string(m));
    }
    if (i > j) std::swap(i, j);
    if (edges_.insert({i, j}).second) {
      adjacency_[i].push_back(j);
      adjacency_[j].push_back(i);
    }
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

bool SourceGraph::HasEdge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return edges_.count({i, j}) > 0;
}

int SourceGraph::MaxDegree() const {
  int d = 0;
  for (const auto& nbrs : adjacency_) d = std::max(d, static_cast<int>(nbrs.size()));
  return d;
}

std::vector<std::vector<int>> SourceGraph::Clusters() const {
  std::vector<int> label(m_, -1);
  std::vector<std::vector<int>> out;
  for (int start = 0; start < m_; ++start) {
    if (label[start] >= 0) continue;
    std::vector<int> component{start};
    label[start] = static_cast<int>(out.size());
    for (std::size_t head = 0; head < component.size(); ++head) {
      for (int nb : adjacency_[component[head]]) {
        if (label[nb] < 0) {
          label[nb] = label[start];
          component.push_back(nb);
        }
      }
    }
    std::sort(component.begin(), component.end());
    out.push_back(std::move(component));
  }
  return out;
}

bool SourceGraph::IsDisjointCliques() const {
  for (const auto& c : Clusters()) {
    for (int v : c) {
      if (Degree(v) != static_cast<int>(c.size()) - 1) return false;
    }
  }
  return true;
}

IsingParams IsingParams::Zero(const SourceGraph& graph) {
  IsingParams p;
  p.theta_node = Eigen::VectorXd::Zero(graph.m());
  p.theta_y_node = Eigen::VectorXd::Zero(graph.m());
  for (const auto& e : graph.edges()) p.theta_edge[e] = 0.0;
  return p;
}

void IsingParams::Validate(const SourceGraph& graph) const {
  if (theta_node.size() != graph.m() || theta_y_node.size() != graph.m()) {
    throw ValidationError("parameter vectors must have length m = " +
                          std::to_string(graph.m()));
  }
  if (theta_edge.size() != graph.num_edges()) {
    throw ValidationError("edge parameters do not match the graph's edges");
  }
  for (const auto& [e, w] : theta_edge) {
    if (!graph.edges().count(e)) {
      throw ValidationError("edge parameter for non-edge (" +
                            std::to_string(e.first) + ", " +
                            std::to_string(e.second) + ")");
    }
    if (!std::isfinite(w)) throw ValidationError("non-finite edge parameter");
  }
  if (!theta_node.allFinite() || !theta_y_node.allFinite() ||
      !std::isfinite(theta_y)) {
    throw ValidationError("non-finite parameter");
  }
}

double IsingParams::EdgeWeight(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = theta_edge.find({i, j});
  return it == theta_edge.end() ? 0.0 : it->second;
}

LabelMatrix::LabelMatrix(int m, int n)
    : m_(m), n_(n), values_(static_cast<std::size_t>(m) * n, Spin{1}) {
  if (m < 0 || n < 0) throw ValidationError("negative label matrix shape");
}

LabelMatrix::LabelMatrix(int m, int n, std::vector<Spin> values)
    : m_(m), n_(n), values_(std::move(values)) {
  if (m < 0 || n < 0) throw ValidationError("negative label matrix shape");
  if (values_.size() != static_cast<std::size_t>(m) * n) {
    throw DimensionMismatchError("label buffer does not hold m * n entries");
  }
  for (Spin v : values_) {
    if (v != 1 && v != -1) {
      throw InvalidLabelError("label entry " + std::to_string(v) +
                              " is not a spin in {-1, +1}");
    }
  }
}

void LabelMatrix::Set(int i, int j, Spin value) {
  if (value != 1 && value != -1) {
    throw InvalidLabelError("label entry must be -1 or +1");
  }
  values_[Index(i, j)] = value;
}

Eigen::MatrixXd LabelMatrix::ToDense() const {
  Eigen::MatrixXd out(m_, n_);
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < m_; ++i) out(i, j) = (*this)(i, j);
  }
  return out;
}

double JointDistribution::Mean(int a) const {
  double s = 0.0;
  for (std::size_t st = 0; st < probabilities.size(); ++st) {
    s += probabilities[st] * SpinOf(st, a);
  }
  return s;
}

double JointDistribution::Moment(int a, int b) const {
  double s = 0.0;
  for (std::size_t st = 0; st < probabilities.size(); ++st) {
    s += probabilities[st] * SpinOf(st, a) * SpinOf(st, b);
  }
  return s;
}

double Energy(const SourceGraph& graph, const IsingParams& params,
              std::span<const int> assignment) {
  const int m = graph.m();
  if (static_cast<int>(assignment.size()) != m + 1) {
    throw InvalidAssignmentError("assignment must have length m + 1 = " +
                                 std::to_string(m + 1));
  }
  for (int v : assignment) {
    if (v != 1 && v != -1) {
      throw InvalidAssignmentError("assignment entry " + std::to_string(v) +
                                   " is not a spin");
    }
  }
  const int y = assignment[m];
  double e = params.theta_y * y;
  for (int i = 0; i < m; ++i) {
    e += (params.theta_node(i) + params.theta_y_node(i) * y) * assignment[i];
  }
  for (const auto& [edge, w] : params.theta_edge) {
    e += w * assignment[edge.first] * assignment[edge.second];
  }
  return e;
}

double UnnormalizedDensity(const SourceGraph& graph, const IsingParams& params,
                           std::span<const int> assignment) {
  const double e = Energy(graph, params, assignment);
  if (!(e <= kMaxExponent)) {
    std::ostringstream msg;
    msg << "density exponent " << e << " overflows double precision";
    throw SaturationError(msg.str(), e);
  }
  return std::exp(e);
}

JointDistribution ExactJoint(const SourceGraph& graph,
                             const IsingParams& params) {
  const int m = graph.m();
  if (m > kMaxEnumerationSources) {
    throw EnumerationTooLargeError(
        "exact joint over " + std::to_string(m) +
        " sources exceeds the enumeration budget of " +
        std::to_string(kMaxEnumerationSources));
  }
  params.Validate(graph);
  const std::size_t states = std::size_t{1} << (m + 1);
  std::vector<double> energy(states);
  std::vector<int> assignment(m + 1);
  for (std::size_t s = 0; s < states; ++s) {
    for (int k = 0; k <= m; ++k) assignment[k] = JointDistribution::SpinOf(s, k);
    energy[s] = Energy(graph, params, assignment);
  }
  const double log_z = LogSumExp(energy);
  JointDistribution joint;
  joint.m = m;
  joint.probabilities.resize(states);
  double total = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    joint.probabilities[s] = std::exp(energy[s] - log_z);
    total += joint.probabilities[s];
  }
  for (double& p : joint.probabilities) p /= total;
  return joint;
}

Eigen::MatrixXd ExactCovariance(const SourceGraph& graph,
                                const IsingParams& params) {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;
  FactoredMoments(graph, params, &mean, &second);
  Eigen::MatrixXd cov = second - mean * mean.transpose();
  return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd ExactMean(const SourceGraph& graph, const IsingParams& params) {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;
  FactoredMoments(graph, params, &mean, &second);
  return mean;
}

BlockDecomposition GroundTruthDecomposition(const Eigen::MatrixXd& sigma) {
  const int full = static_cast<int>(sigma.rows());
  if (full < 2 || sigma.cols() != full) {
    throw DimensionMismatchError("full covariance must be square with size >= 2");
  }
  const int m = full - 1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const double smallest = eig.eigenvalues()(0);
  if (!(smallest > 1e-10)) {
    throw SingularMatrixError("full covariance is singular (smallest eigenvalue " +
                                  std::to_string(smallest) + ")",
                              smallest);
  }
  BlockDecomposition out;
  out.k = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
          eig.eigenvectors().transpose();
  out.k = 0.5 * (out.k + out.k.transpose());
  out.k_o = out.k.topLeftCorner(m, m);

  const Eigen::MatrixXd sigma_o = sigma.topLeftCorner(m, m);
  const Eigen::VectorXd sigma_os = sigma.col(m).head(m);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma_o);
  const Eigen::VectorXd w = ldlt.solve(sigma_os);  // Sigma_O^{-1} Sigma_OS
  const double schur = sigma(m, m) - sigma_os.dot(w);
  if (!(schur > 0.0)) {
    throw NonPsdSchurError("Schur complement of Sigma_O is not positive");
  }
  out.c = 1.0 / schur;
  out.z = std::sqrt(out.c) * w;
  return out;
}

LabelMatrix GibbsSample(const SourceGraph& graph, const IsingParams& params,
                        int n, int burn_in, int thin, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample count n must be at least 1");
  if (thin < 1) throw ValidationError("thin must be at least 1");
  if (burn_in < 0) throw ValidationError("burn_in must be non-negative");
  params.Validate(graph);
  const int m = graph.m();

  // Neighbor lists carrying their coupling so a site update is O(degree).
  std::vector<std::vector<std::pair<int, double>>> coupled(m);
  for (const auto& [e, w] : params.theta_edge) {
    coupled[e.first].push_back({e.second, w});
    coupled[e.second].push_back({e.first, w});
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> state(m + 1);
  for (int& s : state) s = unit(rng) < 0.5 ? -1 : 1;

  auto flip_probability = [](double field) {
    return 1.0 / (1.0 + std::exp(-2.0 * field));  // P(spin = +1)
  };
  auto sweep = [&] {
    for (int i = 0; i < m; ++i) {
      double field = params.theta_node(i) + params.theta_y_node(i) * state[m];
      for (const auto& [j, w] : coupled[i]) field += w * state[j];
      state[i] = unit(rng) < flip_probability(field) ? 1 : -1;
    }
    double field = params.theta_y;
    for (int i = 0; i < m; ++i) field += params.theta_y_node(i) * state[i];
    state[m] = unit(rng) < flip_probability(field) ? 1 : -1;
  };

  for (int it = 0; it < burn_in; ++it) sweep();
  std::vector<Spin> values(static_cast<std::size_t>(m) * n);
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < thin; ++t) sweep();
    for (int i = 0; i < m; ++i) {
      values[static_cast<std::size_t>(j) * m + i] = static_cast<Spin>(state[i]);
    }
  }
  return LabelMatrix(m, n, std::move(values));
}

}  // namespace wsdep
