#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraudkit/claims.hpp"
#include "fraudkit/metrics.hpp"
#include "fraudkit/stats.hpp"

namespace fraudkit {

// Reports are nlohmann ordered JSON with every real value rounded to 6
// significant digits, so report files are byte-stable across runs.
using Report = nlohmann::ordered_json;

const char* tool_version();

/// Machine form of the month-wise analysis: descriptive statistics of both
/// rate columns, Pearson correlation, linear and logarithmic fits, and
/// per-month predictions/residuals for both models over [from, to]. Months
/// with covid_rate <= 0 are excluded from the logarithmic fit and listed.
/// Throws DataError when the window has fewer than 2 rows.
Report analyze_report(const std::vector<MonthlyPoint>& series, YearMonth from, YearMonth to);

/// Classifier evaluation report: AUC, F1 at threshold 0.5, the best F1 over
/// all thresholds, and the ROC point list.
Report metrics_report(std::span<const double> scores, std::span<const int> labels);

/// Run manifest: command, input content digests, parameters, outputs.
Report run_manifest(const std::string& command,
                    const std::map<std::string, std::string>& input_digests,
                    const Report& parameters, const std::vector<std::string>& outputs);

/// FNV-1a digest of a file's bytes (see textutil.hpp).
std::string file_digest(const std::string& path);

}  // namespace fraudkit
