#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fraudkit {

struct DescriptiveStats {
    double mean = 0;
    double standard_error = 0;
    double median = 0;
    double standard_deviation = 0;
    double sample_variance = 0;
    double range = 0;
    double minimum = 0;
    double maximum = 0;
    std::int64_t count = 0;
};

/// Sample (n-1) variance; standard_error and variance are 0 for count 1.
/// Throws DataError on an empty series.
DescriptiveStats descriptive_stats(std::span<const double> series);

/// Pearson correlation coefficient. Throws DataError when either series has
/// zero variance, UsageError on length mismatch or fewer than 2 points.
double pearson(std::span<const double> x, std::span<const double> y);

enum class FitKind { linear, logarithmic };

std::string_view to_string(FitKind);

struct RegressionFit {
    FitKind kind = FitKind::linear;
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
    double multiple_r = 0;
    std::int64_t n = 0;

    /// linear: slope*x + intercept; logarithmic: slope*ln(x) + intercept.
    /// Throws DataError for x <= 0 on a logarithmic fit.
    double predict(double x) const;
};

/// Ordinary least squares with intercept. Throws DataError when x is
/// constant (singular design).
RegressionFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Least squares on (ln x, y); natural logarithm. Throws DataError naming
/// the first offending index when any x <= 0.
RegressionFit fit_logarithmic(std::span<const double> x, std::span<const double> y);

/// residual[i] = y[i] - predict(fit, x[i]), input order preserved.
std::vector<double> residuals(const RegressionFit& fit, std::span<const double> x,
                              std::span<const double> y);

}  // namespace fraudkit
