#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fraudkit {

/// ROC curve over descending score thresholds. Tied scores collapse into a
/// single step; the first point is always (0,0) (threshold +inf) and the
/// last (1,1).
struct RocCurve {
    struct Point {
        double fpr = 0;
        double tpr = 0;
    };
    std::vector<Point> points;
    std::vector<double> thresholds;  // same length as points
};

/// Throws DataError unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
};

/// Predicted positive iff score >= threshold.
ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold);

/// F1 = 2tp / (2tp + fp + fn); 0 by convention when the denominator is 0.
double f1_score(const ConfusionCounts& counts);

struct F1Best {
    double f1 = 0;
    double threshold = 0;
};

/// Scans the unique scores (descending) and returns the best F1; ties keep
/// the highest threshold.
F1Best f1_max(std::span<const double> scores, std::span<const int> labels);

}  // namespace fraudkit
