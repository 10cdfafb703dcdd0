#include "wsdep/structure.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wsdep/error.h"

namespace wsdep {

namespace {

void CheckSquare(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) {
    throw DimensionMismatchError("sparse estimate must be square");
  }
}

std::vector<double> OffDiagonalMagnitudes(const Eigen::MatrixXd& s) {
  std::vector<double> out;
  for (int j = 1; j < s.cols(); ++j) {
    for (int i = 0; i < j; ++i) out.push_back(std::abs(s(i, j)));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

RecoveredStructure ThresholdEdges(const Eigen::MatrixXd& s_hat, double t) {
  CheckSquare(s_hat);
  if (!(t >= 0.0)) throw ValidationError("threshold must be non-negative");
  RecoveredStructure out;
  out.m = static_cast<int>(s_hat.rows());
  out.threshold_used = t;
  for (int j = 1; j < out.m; ++j) {
    for (int i = 0; i < j; ++i) {
      const double score = std::abs(s_hat(i, j));
      if (score > t) {
        out.edges.insert({i, j});
        out.scores[{i, j}] = score;
      }
    }
  }
  return out;
}

double SelectThreshold(const Eigen::MatrixXd& s_hat,
                       const ThresholdStrategy& strategy) {
  CheckSquare(s_hat);
  const int m = static_cast<int>(s_hat.rows());
  if (m < 2) throw ValidationError("threshold selection needs m >= 2");
  const auto mags = OffDiagonalMagnitudes(s_hat);  // descending

  switch (strategy.kind) {
    case ThresholdStrategy::Kind::kFixed:
      if (!(strategy.value >= 0.0)) {
        throw ValidationError("fixed threshold must be non-negative");
      }
      return strategy.value;

    case ThresholdStrategy::Kind::kExpectedEdges: {
      const int pairs = m * (m - 1) / 2;
      if (strategy.k < 0 || strategy.k >= pairs) {
        throw ValidationError("expected edge count k = " +
                              std::to_string(strategy.k) + " must lie in [0, " +
                              std::to_string(pairs) + ")");
      }
      if (strategy.k == 0) return mags[0];
      return 0.5 * (mags[strategy.k - 1] + mags[strategy.k]);
    }

    case ThresholdStrategy::Kind::kLargestGap: {
      double best_gap = 0.0;
      double threshold = 0.0;
      for (std::size_t i = 0; i + 1 < mags.size(); ++i) {
        const double gap = mags[i] - mags[i + 1];
        if (gap > best_gap) {
          best_gap = gap;
          threshold = 0.5 * (mags[i] + mags[i + 1]);
        }
      }
      if (best_gap > 0.0) return threshold;
      // Every magnitude ties: keep all pairs.
      const double v = mags.front();
      return std::max(0.0, v - 4.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(1.0, v));
    }
  }
  return 0.0;
}

StructureMetrics CompareStructures(const SourceGraph& truth,
                                   const RecoveredStructure& estimate) {
  if (truth.m() != estimate.m) {
    throw DimensionMismatchError("structures have different source counts (" +
                                 std::to_string(truth.m()) + " vs " +
                                 std::to_string(estimate.m) + ")");
  }
  StructureMetrics out;
  for (const auto& e : estimate.edges) {
    if (truth.edges().count(e)) {
      ++out.true_positives;
    } else {
      ++out.false_positives;
    }
  }
  out.false_negatives =
      static_cast<int>(truth.num_edges()) - out.true_positives;
  const int claimed = out.true_positives + out.false_positives;
  const int actual = out.true_positives + out.false_negatives;
  out.edge_precision =
      claimed == 0 ? 1.0 : static_cast<double>(out.true_positives) / claimed;
  out.edge_recall =
      actual == 0 ? 1.0 : static_cast<double>(out.true_positives) / actual;
  out.exact_match = out.false_positives == 0 && out.false_negatives == 0;
  return out;
}

}  // namespace wsdep
