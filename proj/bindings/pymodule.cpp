#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "fraudkit/claims.hpp"
#include "fraudkit/errors.hpp"
#include "fraudkit/gbm.hpp"
#include "fraudkit/metrics.hpp"
#include "fraudkit/report.hpp"
#include "fraudkit/stats.hpp"
#include "fraudkit/synth.hpp"
#include "fraudkit/triggers.hpp"

namespace py = pybind11;
namespace fk = fraudkit;

namespace {

fk::YearMonth month_arg(const std::string& s, const char* what) {
    auto ym = fk::YearMonth::parse(s);
    if (!ym) throw fk::UsageError(std::string(what) + ": invalid month '" + s + "'");
    return *ym;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fk::UsageError("cannot read file: " + path);
    return in;
}

py::dict point_to_dict(const fk::MonthlyPoint& p) {
    py::dict d;
    d["month"] = p.month.str();
    d["reported_claims"] = p.reported_claims;
    d["fraud_claims"] = p.fraud_claims;
    d["fraud_rate"] = p.fraud_rate;
    d["covid_cases"] = p.covid_cases;
    d["covid_rate"] = p.covid_rate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "fraudkit core: claims ingestion, trigger rules, boosted trees, metrics, "
              "and correlation/regression analytics";

    py::register_exception<fk::UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<fk::DataError>(m, "DataError", PyExc_RuntimeError);

    // --- claims / rates ---
    py::class_<fk::ClaimRecord>(m, "ClaimRecord")
        .def_readonly("claim_id", &fk::ClaimRecord::claim_id)
        .def_readonly("insured_id", &fk::ClaimRecord::insured_id)
        .def_readonly("claim_status", &fk::ClaimRecord::claim_status)
        .def_property_readonly("claim_reported_date",
                               [](const fk::ClaimRecord& c) { return c.claim_reported_date.str(); })
        .def_property_readonly("fraud_status",
                               [](const fk::ClaimRecord& c) {
                                   return std::string(fk::to_string(c.fraud_status));
                               })
        .def("__repr__", [](const fk::ClaimRecord& c) {
            return "<ClaimRecord " + c.claim_id + ">";
        });

    m.def(
        "load_claims",
        [](const std::string& path) {
            auto in = open_or_throw(path);
            auto result = fk::parse_claims_csv(in);
            py::list issues;
            for (const auto& i : result.issues)
                issues.append(py::make_tuple(
                    i.row, i.field, i.severity == fk::Severity::error ? "error" : "warning",
                    i.message));
            return py::make_tuple(result.records, issues);
        },
        py::arg("path"), "Load a claims CSV; returns (records, issues).");

    m.def(
        "monthly_series",
        [](const std::string& claims_path, const std::string& covid_path,
           const std::string& region, std::int64_t population, const std::string& from,
           const std::string& to) {
            auto cin = open_or_throw(claims_path);
            auto claims = fk::parse_claims_csv(cin).records;
            auto vin = open_or_throw(covid_path);
            auto covid = fk::parse_covid_csv(vin, region).records;
            auto series = fk::build_joint_series(claims, covid, population,
                                                 month_arg(from, "from"), month_arg(to, "to"));
            py::list out;
            for (const auto& p : series) out.append(point_to_dict(p));
            return out;
        },
        py::arg("claims_path"), py::arg("covid_path"), py::arg("region"),
        py::arg("population"), py::arg("from_month"), py::arg("to_month"),
        "Month-wise fraud/COVID rate series over [from_month, to_month].");

    // --- statistics ---
    py::class_<fk::DescriptiveStats>(m, "DescriptiveStats")
        .def_readonly("mean", &fk::DescriptiveStats::mean)
        .def_readonly("standard_error", &fk::DescriptiveStats::standard_error)
        .def_readonly("median", &fk::DescriptiveStats::median)
        .def_readonly("standard_deviation", &fk::DescriptiveStats::standard_deviation)
        .def_readonly("sample_variance", &fk::DescriptiveStats::sample_variance)
        .def_readonly("range", &fk::DescriptiveStats::range)
        .def_readonly("minimum", &fk::DescriptiveStats::minimum)
        .def_readonly("maximum", &fk::DescriptiveStats::maximum)
        .def_readonly("count", &fk::DescriptiveStats::count);

    py::class_<fk::RegressionFit>(m, "RegressionFit")
        .def_property_readonly("kind",
                               [](const fk::RegressionFit& f) {
                                   return std::string(fk::to_string(f.kind));
                               })
        .def_readonly("slope", &fk::RegressionFit::slope)
        .def_readonly("intercept", &fk::RegressionFit::intercept)
        .def_readonly("r_squared", &fk::RegressionFit::r_squared)
        .def_readonly("multiple_r", &fk::RegressionFit::multiple_r)
        .def_readonly("n", &fk::RegressionFit::n)
        .def("predict", &fk::RegressionFit::predict, py::arg("x"))
        .def("__repr__", [](const fk::RegressionFit& f) {
            std::ostringstream ss;
            ss << "<RegressionFit " << fk::to_string(f.kind) << " slope=" << f.slope
               << " intercept=" << f.intercept << " r2=" << f.r_squared << ">";
            return ss.str();
        });

    m.def("descriptive_stats",
          [](const std::vector<double>& xs) { return fk::descriptive_stats(xs); },
          py::arg("series"));
    m.def("pearson",
          [](const std::vector<double>& x, const std::vector<double>& y) {
              return fk::pearson(x, y);
          },
          py::arg("x"), py::arg("y"));
    m.def("fit_linear",
          [](const std::vector<double>& x, const std::vector<double>& y) {
              return fk::fit_linear(x, y);
          },
          py::arg("x"), py::arg("y"));
    m.def("fit_logarithmic",
          [](const std::vector<double>& x, const std::vector<double>& y) {
              return fk::fit_logarithmic(x, y);
          },
          py::arg("x"), py::arg("y"));
    m.def("residuals",
          [](const fk::RegressionFit& fit, const std::vector<double>& x,
             const std::vector<double>& y) { return fk::residuals(fit, x, y); },
          py::arg("fit"), py::arg("x"), py::arg("y"));

    // --- metrics ---
    m.def(
        "roc_curve",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            auto curve = fk::roc_curve(scores, labels);
            py::list points, thresholds;
            for (size_t i = 0; i < curve.points.size(); ++i) {
                points.append(py::make_tuple(curve.points[i].fpr, curve.points[i].tpr));
                thresholds.append(curve.thresholds[i]);
            }
            return py::make_tuple(points, thresholds);
        },
        py::arg("scores"), py::arg("labels"));
    m.def("auc",
          [](const std::vector<double>& scores, const std::vector<int>& labels) {
              return fk::auc(fk::roc_curve(scores, labels));
          },
          py::arg("scores"), py::arg("labels"));
    m.def("f1_score",
          [](std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn) {
              return fk::f1_score({tp, fp, tn, fn});
          },
          py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
    m.def(
        "confusion",
        [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
            auto c = fk::confusion(scores, labels, threshold);
            py::dict d;
            d["tp"] = c.tp;
            d["fp"] = c.fp;
            d["tn"] = c.tn;
            d["fn"] = c.fn;
            return d;
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold"));

    // --- gbm ---
    py::class_<fk::GbmParams>(m, "GbmParams")
        .def(py::init<>())
        .def_readwrite("n_trees", &fk::GbmParams::n_trees)
        .def_readwrite("max_depth", &fk::GbmParams::max_depth)
        .def_readwrite("learning_rate", &fk::GbmParams::learning_rate)
        .def_readwrite("min_leaf", &fk::GbmParams::min_leaf);

    py::class_<fk::BoostedModel>(m, "BoostedModel")
        .def_readonly("initial_score", &fk::BoostedModel::initial_score)
        .def_readonly("stage_losses", &fk::BoostedModel::stage_losses)
        .def_property_readonly("n_trees",
                               [](const fk::BoostedModel& m_) { return m_.trees.size(); })
        .def("predict_proba",
             [](const fk::BoostedModel& model, const std::vector<double>& x) {
                 return model.predict_proba(std::span<const double>(x));
             },
             py::arg("features"))
        .def("save",
             [](const fk::BoostedModel& model, const std::string& path) {
                 std::ofstream out(path, std::ios::binary);
                 if (!out) throw fk::UsageError("cannot write file: " + path);
                 model.save(out);
             },
             py::arg("path"))
        .def_static("load", [](const std::string& path) {
            auto in = open_or_throw(path);
            return fk::BoostedModel::load(in);
        });

    m.def(
        "fit_gbm",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           const fk::GbmParams& params) {
            if (rows.size() != labels.size())
                throw fk::UsageError("rows and labels lengths differ");
            fk::LabeledDataset ds;
            ds.cols = rows.empty() ? 0 : rows.front().size();
            for (const auto& r : rows) {
                if (r.size() != ds.cols) throw fk::UsageError("ragged feature rows");
                ds.values.insert(ds.values.end(), r.begin(), r.end());
            }
            ds.labels = labels;
            return fk::fit_gbm(ds, params);
        },
        py::arg("rows"), py::arg("labels"), py::arg("params") = fk::GbmParams{});

    m.def(
        "train_test_split",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           double train_fraction, std::uint64_t seed) {
            fk::LabeledDataset ds;
            ds.cols = rows.empty() ? 0 : rows.front().size();
            for (const auto& r : rows) ds.values.insert(ds.values.end(), r.begin(), r.end());
            ds.labels = labels;
            auto [train, test] = fk::train_test_split(ds, train_fraction, seed);
            auto unpack = [](const fk::LabeledDataset& part) {
                py::list rows_out;
                for (std::size_t i = 0; i < part.rows(); ++i) {
                    auto row = part.row(i);
                    rows_out.append(std::vector<double>(row.begin(), row.end()));
                }
                return py::make_tuple(rows_out, part.labels);
            };
            return py::make_tuple(unpack(train), unpack(test));
        },
        py::arg("rows"), py::arg("labels"), py::arg("train_fraction"), py::arg("seed"));

    // --- triggers ---
    m.def("builtin_rules", []() {
        py::list out;
        for (const auto& r : fk::builtin_rules()) {
            py::dict d;
            d["id"] = r.id;
            d["category"] = std::string(fk::to_string(r.category));
            d["description"] = r.description;
            d["needs_external_data"] = r.needs_external_data();
            d["source"] = fk::render_rule(r);
            out.append(d);
        }
        return out;
    });

    m.def(
        "evaluate_triggers",
        [](const std::string& claims_path, const std::string& rules_text,
           const std::string& eval_date, const std::string& baseline_from,
           const std::string& baseline_to, double utilization_k) {
            auto in = open_or_throw(claims_path);
            auto claims = fk::parse_claims_csv(in).records;
            auto rules = rules_text.empty() ? fk::builtin_rules() : fk::parse_rules(rules_text);
            fk::Date when{};
            if (!eval_date.empty()) {
                auto d = fk::Date::parse(eval_date);
                if (!d) throw fk::UsageError("invalid eval_date '" + eval_date + "'");
                when = *d;
            } else {
                for (const auto& c : claims)
                    if (c.claim_reported_date > when) when = c.claim_reported_date;
            }
            auto ctx = fk::build_context(claims, when, month_arg(baseline_from, "baseline_from"),
                                         month_arg(baseline_to, "baseline_to"), utilization_k);
            auto hits = fk::evaluate_rules(rules, claims, ctx);
            py::list out;
            for (const auto& h : hits)
                out.append(py::make_tuple(h.claim_id, h.rule_id, h.detail));
            return out;
        },
        py::arg("claims_path"), py::arg("rules_text") = "", py::arg("eval_date") = "",
        py::arg("baseline_from") = "2019-08", py::arg("baseline_to") = "2020-02",
        py::arg("utilization_k") = 2.0,
        "Evaluate trigger rules (builtin catalog when rules_text is empty); returns "
        "(claim_id, rule_id, detail) tuples.");

    m.def(
        "analyze",
        [](const std::string& series_path, const std::string& from, const std::string& to) {
            auto in = open_or_throw(series_path);
            auto series = fk::parse_monthly_series_csv(in);
            auto report = fk::analyze_report(series, month_arg(from, "from"), month_arg(to, "to"));
            return py::module_::import("json").attr("loads")(report.dump());
        },
        py::arg("series_path"), py::arg("from_month"), py::arg("to_month"),
        "Correlation/regression report (as a dict) for a monthly series CSV.");

    m.def(
        "generate_synthetic",
        [](const std::string& config_path, const std::string& out_dir) {
            auto in = open_or_throw(config_path);
            auto cfg = fk::SynthConfig::parse(in);
            auto epidemic = fk::generate_epidemic(cfg);
            auto [claims, gt] = fk::generate_claims(cfg, epidemic);
            namespace fsys = std::filesystem;
            fsys::create_directories(out_dir);
            auto write = [&](const char* name, auto&& writer) {
                std::ofstream out(fsys::path(out_dir) / name, std::ios::binary);
                writer(out);
            };
            write("claims.csv", [&](std::ostream& o) { fk::write_claims_csv(o, claims); });
            write("covid.csv", [&](std::ostream& o) { fk::write_covid_csv(o, epidemic); });
            write("ground_truth.csv",
                  [&](std::ostream& o) { fk::write_ground_truth_csv(o, gt); });
            write("ground_truth_rates.csv",
                  [&](std::ostream& o) { fk::write_ground_truth_rates_csv(o, gt); });
            return claims.size();
        },
        py::arg("config_path"), py::arg("out_dir"),
        "Generate a synthetic corpus; returns the number of claims written.");

    m.attr("__version__") = fk::tool_version();
}
