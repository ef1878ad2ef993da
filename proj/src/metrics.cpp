#include "fraudkit/metrics.hpp"

#include <algorithm>
#include <limits>

#include "fraudkit/errors.hpp"

namespace fraudkit {

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw UsageError("scores and labels lengths differ");
    std::int64_t pos = 0, neg = 0;
    for (int l : labels) (l ? pos : neg)++;
    if (pos == 0 || neg == 0)
        throw DataError("ROC requires both classes; labels are degenerate");

    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    std::int64_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        double t = scores[order[i]];
        while (i < order.size() && scores[order[i]] == t) {
            (labels[order[i]] ? tp : fp)++;
            ++i;
        }
        curve.points.push_back({double(fp) / double(neg), double(tp) / double(pos)});
        curve.thresholds.push_back(t);
    }
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0;
    for (size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
    if (scores.size() != labels.size()) throw UsageError("scores and labels lengths differ");
    ConfusionCounts c;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] >= threshold;
        if (labels[i])
            (predicted ? c.tp : c.fn)++;
        else
            (predicted ? c.fp : c.tn)++;
    }
    return c;
}

double f1_score(const ConfusionCounts& c) {
    double denom = double(2 * c.tp + c.fp + c.fn);
    if (denom == 0) return 0.0;
    return 2.0 * double(c.tp) / denom;
}

F1Best f1_max(std::span<const double> scores, std::span<const int> labels) {
    std::vector<double> unique(scores.begin(), scores.end());
    std::sort(unique.begin(), unique.end(), std::greater<>());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    F1Best best{0.0, std::numeric_limits<double>::infinity()};
    for (double t : unique) {
        double f1 = f1_score(confusion(scores, labels, t));
        if (f1 > best.f1) best = {f1, t};
    }
    return best;
}

}  // namespace fraudkit
