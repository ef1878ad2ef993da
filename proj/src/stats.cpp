#include "fraudkit/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fraudkit/errors.hpp"

namespace fraudkit {

std::string_view to_string(FitKind k) {
    return k == FitKind::linear ? "linear" : "logarithmic";
}

DescriptiveStats descriptive_stats(std::span<const double> series) {
    if (series.empty()) throw DataError("descriptive statistics of an empty series");
    DescriptiveStats s;
    s.count = std::int64_t(series.size());
    double sum = 0;
    for (double v : series) sum += v;
    s.mean = sum / double(s.count);

    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    s.minimum = sorted.front();
    s.maximum = sorted.back();
    s.range = s.maximum - s.minimum;
    size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;

    if (s.count >= 2) {
        double ss = 0;
        for (double v : series) ss += (v - s.mean) * (v - s.mean);
        s.sample_variance = ss / double(s.count - 1);
        s.standard_deviation = std::sqrt(s.sample_variance);
        s.standard_error = s.standard_deviation / std::sqrt(double(s.count));
    }
    return s;
}

namespace {

struct CenteredSums {
    double mean_x = 0, mean_y = 0;
    double sxx = 0, syy = 0, sxy = 0;
};

CenteredSums centered_sums(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("series lengths differ");
    if (x.size() < 2) throw UsageError("need at least 2 points");
    CenteredSums s;
    double n = double(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        s.mean_x += x[i];
        s.mean_y += y[i];
    }
    s.mean_x /= n;
    s.mean_y /= n;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - s.mean_x;
        double dy = y[i] - s.mean_y;
        s.sxx += dx * dx;
        s.syy += dy * dy;
        s.sxy += dx * dy;
    }
    return s;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    auto s = centered_sums(x, y);
    if (s.sxx == 0 || s.syy == 0) throw DataError("pearson undefined for a constant series");
    return s.sxy / std::sqrt(s.sxx * s.syy);
}

double RegressionFit::predict(double x) const {
    if (kind == FitKind::logarithmic) {
        if (x <= 0)
            throw DataError("logarithmic prediction requires x > 0, got " + std::to_string(x));
        return slope * std::log(x) + intercept;
    }
    return slope * x + intercept;
}

namespace {

RegressionFit fit_ols(std::span<const double> x, std::span<const double> y, FitKind kind) {
    auto s = centered_sums(x, y);
    if (s.sxx == 0) throw DataError("regression design is singular: predictor is constant");
    RegressionFit fit;
    fit.kind = kind;
    fit.n = std::int64_t(x.size());
    fit.slope = s.sxy / s.sxx;
    fit.intercept = s.mean_y - fit.slope * s.mean_x;
    if (s.syy == 0) {
        fit.r_squared = 1.0;  // constant response fitted exactly by the intercept
    } else {
        // For OLS with intercept, 1 - SS_res/SS_tot reduces to the squared
        // correlation; computing it that way keeps r_squared == pearson^2
        // to the bit.
        double r = s.sxy / std::sqrt(s.sxx * s.syy);
        fit.r_squared = r * r;
    }
    fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    fit.multiple_r = std::sqrt(fit.r_squared);
    return fit;
}

}  // namespace

RegressionFit fit_linear(std::span<const double> x, std::span<const double> y) {
    return fit_ols(x, y, FitKind::linear);
}

RegressionFit fit_logarithmic(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0)
            throw DataError("logarithmic fit requires x > 0; index " + std::to_string(i) +
                            " is " + std::to_string(x[i]));
        lx[i] = std::log(x[i]);
    }
    return fit_ols(lx, y, FitKind::logarithmic);
}

std::vector<double> residuals(const RegressionFit& fit, std::span<const double> x,
                              std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("series lengths differ");
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = y[i] - fit.predict(x[i]);
    return out;
}

}  // namespace fraudkit
