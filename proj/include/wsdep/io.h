#ifndef WSDEP_IO_H_
#define WSDEP_IO_H_

// File formats:
//   labels      CSV, first line "m,n", then n lines of m entries in {-1,1}
//               (or {0,1} when zero_one is set).
//   graph       JSON {"m": int, "edges": [[i, j], ...]} with i < j.
//   params      JSON {"theta_node": [...], "theta_edge": [[i, j, v], ...],
//               "theta_y": v, "theta_y_node": [...]}.
//   covariance  CSV (m lines of m entries) or JSON {"m": int, "values": [[...]]}.

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "wsdep/analysis.h"
#include "wsdep/covariance.h"
#include "wsdep/mrf.h"
#include "wsdep/rpca.h"
#include "wsdep/structure.h"

namespace wsdep {

using Json = nlohmann::ordered_json;

void WriteLabelsCsv(const std::string& path, const LabelMatrix& labels,
                    bool zero_one = false);
LabelMatrix ReadLabelsCsv(const std::string& path, bool zero_one = false);

Json GraphToJson(const SourceGraph& graph);
SourceGraph GraphFromJson(const Json& j);

Json ParamsToJson(const IsingParams& params);
IsingParams ParamsFromJson(const Json& j);

Json MatrixToJson(const Eigen::MatrixXd& m);
Eigen::MatrixXd MatrixFromJson(const Json& j);

void WriteCovarianceCsv(const std::string& path, const Eigen::MatrixXd& sigma);
void WriteCovarianceJson(const std::string& path, const Eigen::MatrixXd& sigma);
// Chooses the format from the extension: ".json" or anything else as CSV.
CovarianceMatrix ReadCovariance(const std::string& path);

Json DecompositionToJson(const DecompositionResult& result);
Json StructureToJson(const RecoveredStructure& structure);
Json MetricsToJson(const StructureMetrics& metrics);

Json ToJson(const IdentifiabilityReport& r);
Json ToJson(const MuEstimateResult& r);
Json ToJson(const TransversalityEstimate& r);
Json ToJson(const ConditionConstants& c);
Json ToJson(const RateEstimate& r);
Json ToJson(const LowerBoundReport& r);

Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace wsdep

#endif  // WSDEP_IO_H_
