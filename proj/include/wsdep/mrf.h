#ifndef WSDEP_MRF_H_
#define WSDEP_MRF_H_

// Pairwise binary Markov random field over m weak supervision sources and a
// latent label Y that is adjacent to every source. Spins take values in
// {-1, +1}; the latent label is always the last coordinate of an assignment.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wsdep {

using Edge = std::pair<int, int>;
using Spin = std::int8_t;

// Full enumeration of the joint over (sources, Y) is capped at this many
// sources, i.e. 2^21 states.
inline constexpr int kMaxEnumerationSources = 20;

// Dependency graph among the sources. Y is implicit and never stored.
class SourceGraph {
 public:
  SourceGraph() = default;
  // Edges may be given in either orientation; duplicates collapse.
  SourceGraph(int m, const std::vector<Edge>& edges);

  int m() const { return m_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }

  bool HasEdge(int i, int j) const;
  const std::vector<int>& Neighbors(int i) const { return adjacency_[i]; }
  int Degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
  int MaxDegree() const;

  // Connected components of the source-only graph, singletons included.
  // Each component is sorted and components are ordered by smallest member.
  std::vector<std::vector<int>> Clusters() const;
  int NumClusters() const { return static_cast<int>(Clusters().size()); }

  // True when every connected component is a complete subgraph.
  bool IsDisjointCliques() const;

  friend bool operator==(const SourceGraph& a, const SourceGraph& b) {
    return a.m_ == b.m_ && a.edges_ == b.edges_;
  }

 private:
  int m_ = 0;
  std::set<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

// Canonical parameters of the density
//   f(l, y) ~ exp(sum_i t_i l_i + sum_E t_ij l_i l_j + t_Y y + sum_i t_Yi y l_i).
struct IsingParams {
  Eigen::VectorXd theta_node;
  std::map<Edge, double> theta_edge;
  double theta_y = 0.0;
  Eigen::VectorXd theta_y_node;

  // All-zero parameters with one zero-valued entry per edge of `graph`.
  static IsingParams Zero(const SourceGraph& graph);

  // Throws ValidationError if the keys of theta_edge differ from the graph's
  // edges, a vector has the wrong length, or any value is non-finite.
  void Validate(const SourceGraph& graph) const;

  double EdgeWeight(int i, int j) const;  // 0 for non-edges
};

// m x n matrix of votes; column j is the joint vote vector of data point j.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(int m, int n);  // all +1
  // `values` is column-major; every entry must be -1 or +1.
  LabelMatrix(int m, int n, std::vector<Spin> values);

  int m() const { return m_; }
  int n() const { return n_; }
  Spin operator()(int i, int j) const { return values_[Index(i, j)]; }
  void Set(int i, int j, Spin value);
  std::span<const Spin> Column(int j) const {
    return {values_.data() + static_cast<std::size_t>(j) * m_,
            static_cast<std::size_t>(m_)};
  }
  const std::vector<Spin>& values() const { return values_; }

  Eigen::MatrixXd ToDense() const;

  friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
    return a.m_ == b.m_ && a.n_ == b.n_ && a.values_ == b.values_;
  }

 private:
  std::size_t Index(int i, int j) const {
    return static_cast<std::size_t>(j) * m_ + i;
  }

  int m_ = 0;
  int n_ = 0;
  std::vector<Spin> values_;
};

// Probability table over all 2^(m+1) assignments. Bit k of a state index
// encodes variable k (k < m: source k, k == m: Y), set bit meaning +1.
struct JointDistribution {
  int m = 0;
  std::vector<double> probabilities;

  static int SpinOf(std::size_t state, int variable) {
    return ((state >> variable) & 1U) ? 1 : -1;
  }
  // E[x_a] and E[x_a x_b] where index m denotes Y.
  double Mean(int a) const;
  double Moment(int a, int b) const;
};

double UnnormalizedDensity(const SourceGraph& graph, const IsingParams& params,
                           std::span<const int> assignment);

// Exponent of the unnormalized density; no saturation check.
double Energy(const SourceGraph& graph, const IsingParams& params,
              std::span<const int> assignment);

JointDistribution ExactJoint(const SourceGraph& graph,
                             const IsingParams& params);

// Covariance of (l_1..l_m, Y), (m+1) x (m+1). Conditioned on Y the source
// clusters are independent, so only each cluster is enumerated; the budget
// applies to the largest cluster rather than to m.
Eigen::MatrixXd ExactCovariance(const SourceGraph& graph,
                                const IsingParams& params);

// Mean vector of (l_1..l_m, Y) computed by the same cluster factorization.
Eigen::VectorXd ExactMean(const SourceGraph& graph, const IsingParams& params);

struct BlockDecomposition {
  Eigen::MatrixXd k;    // full inverse covariance
  Eigen::MatrixXd k_o;  // observed block
  Eigen::VectorXd z;    // Sigma_O^{-1} = K_O - z z^T
  double c = 0.0;       // inverse Schur complement of Sigma_O
};

// Splits the inverse of a full (sources + Y) covariance into the graph
// structured observed block and the rank-one latent correction.
BlockDecomposition GroundTruthDecomposition(const Eigen::MatrixXd& sigma);

// Sequential single-site Gibbs sweeps over (l_1..l_m, Y). `burn_in` and
// `thin` count full sweeps. Y is dropped from the output.
LabelMatrix GibbsSample(const SourceGraph& graph, const IsingParams& params,
                        int n, int burn_in, int thin, std::uint64_t seed);

}  // namespace wsdep

#endif  // WSDEP_MRF_H_
