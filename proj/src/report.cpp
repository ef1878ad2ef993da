#include "fraudkit/report.hpp"

#include <cmath>

#include "fraudkit/errors.hpp"
#include "fraudkit/textutil.hpp"

namespace fraudkit {

const char* tool_version() { return "0.1.0"; }

namespace {

double r6(double x) { return round_sig(x, 6); }

Report descriptive_json(const DescriptiveStats& s) {
    return Report{{"mean", r6(s.mean)},
                  {"standard_error", r6(s.standard_error)},
                  {"median", r6(s.median)},
                  {"standard_deviation", r6(s.standard_deviation)},
                  {"sample_variance", r6(s.sample_variance)},
                  {"range", r6(s.range)},
                  {"minimum", r6(s.minimum)},
                  {"maximum", r6(s.maximum)},
                  {"count", s.count}};
}

Report fit_json(const RegressionFit& f) {
    return Report{{"kind", std::string(to_string(f.kind))},
                  {"slope", r6(f.slope)},
                  {"intercept", r6(f.intercept)},
                  {"r_squared", r6(f.r_squared)},
                  {"multiple_r", r6(f.multiple_r)},
                  {"n", f.n}};
}

}  // namespace

Report analyze_report(const std::vector<MonthlyPoint>& series, YearMonth from, YearMonth to) {
    if (from > to) throw UsageError("analysis window start is after end");
    std::vector<MonthlyPoint> window;
    for (const auto& p : series)
        if (p.month >= from && p.month <= to) window.push_back(p);
    if (window.size() < 2)
        throw DataError("analysis window has " + std::to_string(window.size()) +
                        " usable rows; need at least 2");

    std::vector<double> fraud, covid;
    for (const auto& p : window) {
        fraud.push_back(p.fraud_rate);
        covid.push_back(p.covid_rate);
    }

    Report rep;
    rep["format"] = "fraudkit.analyze/1";
    rep["window"] = {{"from", from.str()}, {"to", to.str()}};
    rep["months_used"] = window.size();

    rep["descriptive"] = {{"covid_rate", descriptive_json(descriptive_stats(covid))},
                          {"fraud_rate", descriptive_json(descriptive_stats(fraud))}};

    try {
        rep["pearson"] = r6(pearson(covid, fraud));
    } catch (const DataError& e) {
        rep["pearson"] = nullptr;
        rep["pearson_note"] = e.what();
    }

    RegressionFit linear{};
    bool have_linear = false;
    try {
        linear = fit_linear(covid, fraud);
        have_linear = true;
        rep["fits"]["linear"] = fit_json(linear);
    } catch (const DataError& e) {
        rep["fits"]["linear"] = nullptr;
        rep["fits"]["linear_note"] = e.what();
    }

    std::vector<double> log_x, log_y;
    std::vector<std::string> excluded;
    for (const auto& p : window) {
        if (p.covid_rate > 0) {
            log_x.push_back(p.covid_rate);
            log_y.push_back(p.fraud_rate);
        } else {
            excluded.push_back(p.month.str());
        }
    }
    rep["log_excluded_months"] = excluded;
    RegressionFit logfit{};
    bool have_log = false;
    if (log_x.size() >= 2) {
        try {
            logfit = fit_logarithmic(log_x, log_y);
            have_log = true;
            rep["fits"]["logarithmic"] = fit_json(logfit);
        } catch (const DataError& e) {
            rep["fits"]["logarithmic"] = nullptr;
            rep["fits"]["logarithmic_note"] = e.what();
        }
    } else {
        rep["fits"]["logarithmic"] = nullptr;
        rep["fits"]["logarithmic_note"] = "fewer than 2 months with positive covid_rate";
    }

    Report monthly = Report::array();
    for (const auto& p : window) {
        Report row;
        row["month"] = p.month.str();
        row["fraud_rate"] = r6(p.fraud_rate);
        row["covid_rate"] = r6(p.covid_rate);
        if (have_linear) {
            double pred = linear.predict(p.covid_rate);
            row["linear"] = {{"prediction", r6(pred)}, {"residual", r6(p.fraud_rate - pred)}};
        } else {
            row["linear"] = nullptr;
        }
        if (have_log && p.covid_rate > 0) {
            double pred = logfit.predict(p.covid_rate);
            row["logarithmic"] = {{"prediction", r6(pred)},
                                  {"residual", r6(p.fraud_rate - pred)}};
        } else {
            row["logarithmic"] = nullptr;
        }
        monthly.push_back(std::move(row));
    }
    rep["monthly"] = std::move(monthly);
    return rep;
}

Report metrics_report(std::span<const double> scores, std::span<const int> labels) {
    auto curve = roc_curve(scores, labels);
    auto best = f1_max(scores, labels);
    std::int64_t positives = 0;
    for (int l : labels) positives += l;

    Report rep;
    rep["format"] = "fraudkit.metrics/1";
    rep["samples"] = labels.size();
    rep["positives"] = positives;
    rep["auc"] = r6(auc(curve));
    rep["f1_at_half"] = r6(f1_score(confusion(scores, labels, 0.5)));
    rep["f1_max"] = r6(best.f1);
    rep["threshold_at_f1_max"] = std::isfinite(best.threshold)
                                     ? Report(r6(best.threshold))
                                     : Report(nullptr);
    Report roc = Report::array();
    for (size_t i = 0; i < curve.points.size(); ++i) {
        roc.push_back({{"fpr", r6(curve.points[i].fpr)},
                       {"tpr", r6(curve.points[i].tpr)},
                       {"threshold", std::isfinite(curve.thresholds[i])
                                         ? Report(r6(curve.thresholds[i]))
                                         : Report(nullptr)}});
    }
    rep["roc"] = std::move(roc);
    return rep;
}

Report run_manifest(const std::string& command,
                    const std::map<std::string, std::string>& input_digests,
                    const Report& parameters, const std::vector<std::string>& outputs) {
    Report rep;
    rep["format"] = "fraudkit.manifest/1";
    rep["tool_version"] = tool_version();
    rep["command"] = command;
    Report inputs = Report::object();
    for (const auto& [path, digest] : input_digests) inputs[path] = digest;
    rep["inputs"] = std::move(inputs);
    rep["parameters"] = parameters;
    rep["outputs"] = outputs;
    return rep;
}

std::string file_digest(const std::string& path) {
    return fnv1a_hex(read_file(path));
}

}  // namespace fraudkit
