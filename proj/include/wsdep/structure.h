#ifndef WSDEP_STRUCTURE_H_
#define WSDEP_STRUCTURE_H_

#include <map>
#include <set>

#include <Eigen/Dense>

#include "wsdep/mrf.h"

namespace wsdep {

struct RecoveredStructure {
  int m = 0;
  std::set<Edge> edges;
  std::map<Edge, double> scores;  // |S_ij| for each listed edge
  double threshold_used = 0.0;

  SourceGraph ToGraph() const { return SourceGraph(m, {edges.begin(), edges.end()}); }
};

struct StructureMetrics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  double edge_precision = 1.0;
  double edge_recall = 1.0;
  bool exact_match = true;
};

struct ThresholdStrategy {
  enum class Kind { kFixed, kLargestGap, kExpectedEdges };
  Kind kind = Kind::kLargestGap;
  double value = 0.0;  // kFixed
  int k = 0;           // kExpectedEdges

  static ThresholdStrategy Fixed(double t) { return {Kind::kFixed, t, 0}; }
  static ThresholdStrategy LargestGap() { return {Kind::kLargestGap, 0.0, 0}; }
  static ThresholdStrategy ExpectedEdges(int k) {
    return {Kind::kExpectedEdges, 0.0, k};
  }
};

// Pairs i < j with |S_ij| > t.
RecoveredStructure ThresholdEdges(const Eigen::MatrixXd& s_hat, double t);

// fixed: t. largest_gap: midpoint of the widest gap between consecutive
// distinct off-diagonal magnitudes (all equal: that magnitude minus a few
// ulps, so every pair survives). expected_edges(k): midpoint of the k-th and
// (k+1)-th largest magnitudes.
double SelectThreshold(const Eigen::MatrixXd& s_hat,
                       const ThresholdStrategy& strategy);

// Precision and recall use 0/0 = 1.
StructureMetrics CompareStructures(const SourceGraph& truth,
                                   const RecoveredStructure& estimate);

}  // namespace wsdep

#endif  // WSDEP_STRUCTURE_H_
