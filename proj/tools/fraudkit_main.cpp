#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fraudkit/claims.hpp"
#include "fraudkit/csv.hpp"
#include "fraudkit/errors.hpp"
#include "fraudkit/gbm.hpp"
#include "fraudkit/report.hpp"
#include "fraudkit/synth.hpp"
#include "fraudkit/textutil.hpp"
#include "fraudkit/triggers.hpp"

namespace fk = fraudkit;
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fk::UsageError("cannot read file: " + path);
    return in;
}

fk::YearMonth parse_month_flag(const std::string& value, const char* flag) {
    auto ym = fk::YearMonth::parse(value);
    if (!ym) throw fk::UsageError(std::string(flag) + ": invalid month '" + value + "'");
    return *ym;
}

fk::ClaimsParseResult load_claims(const std::string& path, const std::string& schema_map_path) {
    std::optional<fk::SchemaMap> map;
    if (!schema_map_path.empty()) {
        auto in = open_input(schema_map_path);
        map = fk::parse_schema_map(in);
    }
    auto in = open_input(path);
    return fk::parse_claims_csv(in, map ? &*map : nullptr);
}

// Distinct regions, in file order; used when --region is omitted.
std::vector<std::string> regions_in_covid_file(const std::string& path) {
    auto in = open_input(path);
    fk::CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) return {};
    int region_col = -1;
    for (size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == "region") region_col = int(i);
    if (region_col < 0) return {};
    std::vector<std::string> regions;
    while (reader.next(fields)) {
        if (int(fields.size()) <= region_col) continue;
        const auto& r = fields[size_t(region_col)];
        if (std::find(regions.begin(), regions.end(), r) == regions.end()) regions.push_back(r);
    }
    return regions;
}

std::vector<fk::CovidDailyRecord> load_covid(const std::string& path, std::string region) {
    if (region.empty()) {
        auto regions = regions_in_covid_file(path);
        if (regions.size() != 1)
            throw fk::UsageError("--region is required: covid file has " +
                                 std::to_string(regions.size()) + " distinct regions");
        region = regions.front();
    }
    auto in = open_input(path);
    return fk::parse_covid_csv(in, region).records;
}

int cmd_validate(const std::string& claims_path, const std::string& schema_map_path) {
    auto result = load_claims(claims_path, schema_map_path);
    fk::write_issues_csv(std::cout, result.issues);
    bool has_error = false;
    for (const auto& i : result.issues)
        if (i.severity == fk::Severity::error) has_error = true;
    std::cerr << result.records.size() << " records loaded, " << result.issues.size()
              << " issues\n";
    return has_error ? 1 : 0;
}

struct TriggerArgs {
    std::string claims_path;
    std::string rules_path;
    bool use_builtin = false;
    bool list_only = false;
    std::string schema_map_path;
    std::string eval_date;
    std::string baseline_from = "2019-08";
    std::string baseline_to = "2020-02";
    double utilization_k = 2.0;
    std::string out_path;
};

int cmd_triggers(const TriggerArgs& args) {
    std::vector<fk::TriggerRule> rules;
    if (args.use_builtin) {
        rules = fk::builtin_rules();
    } else if (!args.rules_path.empty()) {
        auto text = fk::read_file(args.rules_path);
        rules = fk::parse_rules(text);
    } else if (!args.list_only) {
        throw fk::UsageError("provide a rules file or --builtin");
    }

    if (args.list_only) {
        if (rules.empty()) rules = fk::builtin_rules();
        std::cout << "rule_id,category,needs_external_data,description\n";
        for (const auto& r : rules)
            std::cout << fk::csv_join({r.id, std::string(fk::to_string(r.category)),
                                       r.needs_external_data() ? "yes" : "no", r.description})
                      << "\n";
        return 0;
    }

    auto claims = load_claims(args.claims_path, args.schema_map_path).records;
    fk::Date eval_date{};
    if (!args.eval_date.empty()) {
        auto d = fk::Date::parse(args.eval_date);
        if (!d) throw fk::UsageError("--eval-date: invalid date '" + args.eval_date + "'");
        eval_date = *d;
    } else {
        // latest reported date keeps evaluation reproducible without a flag
        for (const auto& c : claims)
            if (c.claim_reported_date > eval_date) eval_date = c.claim_reported_date;
    }
    auto ctx = fk::build_context(claims, eval_date,
                                 parse_month_flag(args.baseline_from, "--baseline-from"),
                                 parse_month_flag(args.baseline_to, "--baseline-to"),
                                 args.utilization_k);
    auto hits = fk::evaluate_rules(rules, claims, ctx);

    std::ostringstream out;
    fk::write_hits_csv(out, hits, rules);
    if (args.out_path.empty())
        std::cout << out.str();
    else
        fk::write_file(args.out_path, out.str());
    std::cerr << hits.size() << " hits across " << claims.size() << " claims\n";
    return 0;
}

int cmd_rates(const std::string& claims_path, const std::string& covid_path,
              const std::string& region, std::int64_t population, const std::string& from,
              const std::string& to, const std::string& out_path,
              const std::string& schema_map_path) {
    auto claims = load_claims(claims_path, schema_map_path).records;
    auto covid = load_covid(covid_path, region);
    auto series = fk::build_joint_series(claims, covid, population,
                                         parse_month_flag(from, "--from"),
                                         parse_month_flag(to, "--to"));
    std::ostringstream out;
    fk::write_monthly_series_csv(out, series);
    if (out_path.empty())
        std::cout << out.str();
    else
        fk::write_file(out_path, out.str());
    return 0;
}

int cmd_analyze(const std::string& series_path, std::string from, std::string to,
                const std::string& out_path) {
    auto in = open_input(series_path);
    auto series = fk::parse_monthly_series_csv(in);
    if (series.empty()) throw fk::DataError("series file has no rows");
    if (from.empty()) from = series.front().month.str();
    if (to.empty()) to = series.back().month.str();
    auto report = fk::analyze_report(series, parse_month_flag(from, "--from"),
                                     parse_month_flag(to, "--to"));
    std::string text = report.dump(1) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        fk::write_file(out_path, text);
    return 0;
}

struct TrainArgs {
    std::string claims_path;
    std::string schema_map_path;
    double split = 0.7;
    std::uint64_t seed = 42;
    fk::GbmParams params;
    bool with_trigger_features = false;
    std::string model_out = "model.json";
    std::string metrics_out;
};

// Optional trigger-derived feature: per-claim count of distinct builtin
// rules that fired. Train and evaluate both recompute it from the claims.
void append_trigger_feature(fk::FeatureSchema& schema, fk::LabeledDataset& ds,
                            const std::vector<fk::ClaimRecord>& claims) {
    auto rules = fk::builtin_rules();
    fk::Date eval_date{};
    for (const auto& c : claims)
        if (c.claim_reported_date > eval_date) eval_date = c.claim_reported_date;
    auto ctx = fk::build_context(claims, eval_date, fk::YearMonth{2019, 8},
                                 fk::YearMonth{2020, 2});
    auto hits = fk::evaluate_rules(rules, claims, ctx);
    std::map<std::string, double> counts;
    for (const auto& h : hits) counts[h.claim_id] += 1.0;

    schema.features.push_back({fk::FeatureKind::numeric, "trigger_hits", "", ""});
    std::vector<double> values;
    values.reserve(ds.rows() * (ds.cols + 1));
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        auto row = ds.row(i);
        values.insert(values.end(), row.begin(), row.end());
        auto it = counts.find(ds.ids[i]);
        values.push_back(it == counts.end() ? 0.0 : it->second);
    }
    ds.values = std::move(values);
    ds.cols += 1;
}

int cmd_train(const TrainArgs& args) {
    auto claims = load_claims(args.claims_path, args.schema_map_path).records;
    std::vector<fk::ClaimRecord> labeled;
    for (const auto& c : claims)
        if (c.fraud_status != fk::FraudStatus::unknown) labeled.push_back(c);
    if (labeled.empty()) throw fk::DataError("no labeled claims (fraud_status all unknown)");

    auto schema = fk::build_schema(labeled);
    auto ds = fk::encode_dataset(schema, labeled);
    if (args.with_trigger_features) append_trigger_feature(schema, ds, labeled);

    std::int64_t positives = 0;
    for (int l : ds.labels) positives += l;
    if (positives == 0 || positives == std::int64_t(ds.rows()))
        throw fk::DataError("degenerate labels: training needs both classes");

    auto [train, test] = fk::train_test_split(ds, args.split, args.seed);
    auto model = fk::fit_gbm(train, args.params, schema);

    std::ostringstream model_text;
    model.save(model_text);
    fk::write_file(args.model_out, model_text.str());

    std::vector<double> scores;
    for (std::size_t i = 0; i < test.rows(); ++i)
        scores.push_back(model.predict_proba(test.row(i)));
    auto report = fk::metrics_report(scores, test.labels);
    report["split"] = {{"train_rows", train.rows()}, {"test_rows", test.rows()},
                       {"train_fraction", args.split}, {"seed", args.seed}};
    std::string text = report.dump(1) + "\n";
    if (args.metrics_out.empty())
        std::cout << text;
    else
        fk::write_file(args.metrics_out, text);
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& claims_path,
                 const std::string& schema_map_path, const std::string& out_path) {
    auto model_in = open_input(model_path);
    auto model = fk::BoostedModel::load(model_in);
    auto claims = load_claims(claims_path, schema_map_path).records;

    std::vector<fk::ClaimRecord> labeled;
    for (const auto& c : claims)
        if (c.fraud_status != fk::FraudStatus::unknown) labeled.push_back(c);
    if (labeled.empty()) throw fk::DataError("no labeled claims to evaluate against");

    bool wants_triggers = false;
    fk::FeatureSchema base = model.schema;
    if (!base.features.empty() && base.features.back().source == "trigger_hits") {
        wants_triggers = true;
        base.features.pop_back();
    }
    auto ds = fk::encode_dataset(base, labeled);
    if (wants_triggers) {
        fk::FeatureSchema augmented = base;
        append_trigger_feature(augmented, ds, labeled);
    }

    std::vector<double> scores;
    for (std::size_t i = 0; i < ds.rows(); ++i)
        scores.push_back(model.predict_proba(ds.row(i)));
    auto report = fk::metrics_report(scores, ds.labels);
    std::string text = report.dump(1) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        fk::write_file(out_path, text);
    return 0;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    auto in = open_input(config_path);
    auto cfg = fk::SynthConfig::parse(in);
    auto epidemic = fk::generate_epidemic(cfg);
    auto [claims, gt] = fk::generate_claims(cfg, epidemic);

    fs::create_directories(out_dir);
    auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    std::ostringstream claims_csv, covid_csv, gt_csv, rates_csv;
    fk::write_claims_csv(claims_csv, claims);
    fk::write_covid_csv(covid_csv, epidemic);
    fk::write_ground_truth_csv(gt_csv, gt);
    fk::write_ground_truth_rates_csv(rates_csv, gt);
    fk::write_file(path("claims.csv"), claims_csv.str());
    fk::write_file(path("covid.csv"), covid_csv.str());
    fk::write_file(path("ground_truth.csv"), gt_csv.str());
    fk::write_file(path("ground_truth_rates.csv"), rates_csv.str());

    fk::Report params;
    params["seed"] = cfg.seed;
    params["region"] = cfg.region;
    params["population"] = cfg.population;
    params["from"] = cfg.from.str();
    params["to"] = cfg.to.str();
    params["baseline_months"] = cfg.baseline_months;
    params["evaluation_date"] = cfg.effective_eval_date().str();
    auto manifest = fk::run_manifest(
        "synth", {{config_path, fk::file_digest(config_path)}}, params,
        {path("claims.csv"), path("covid.csv"), path("ground_truth.csv"),
         path("ground_truth_rates.csv")});
    fk::write_file(path("manifest.json"), manifest.dump(1) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) try {
    CLI::App app{"fraudkit: claims fraud analytics (triggers, boosted-tree classifier, "
                 "month-wise correlation and regression)"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string schema_map_path;
    app.add_option("--schema-map", schema_map_path,
                   "schema map file (canonical = source_column lines)");

    // validate
    auto* validate = app.add_subcommand("validate", "Validate a claims CSV; print issues");
    std::string v_claims;
    validate->add_option("claims", v_claims, "claims CSV path")->required();

    // triggers
    auto* triggers = app.add_subcommand("triggers", "Evaluate trigger rules over claims");
    TriggerArgs t_args;
    triggers->add_option("claims", t_args.claims_path, "claims CSV path");
    triggers->add_option("--rules", t_args.rules_path, "rule file");
    triggers->add_flag("--builtin", t_args.use_builtin, "use the builtin catalog");
    triggers->add_flag("--list", t_args.list_only, "list the rules and exit");
    triggers->add_option("--eval-date", t_args.eval_date,
                         "evaluation date (default: latest reported date)");
    triggers->add_option("--baseline-from", t_args.baseline_from,
                         "utilization baseline window start (default 2019-08)");
    triggers->add_option("--baseline-to", t_args.baseline_to,
                         "utilization baseline window end (default 2020-02)");
    triggers->add_option("--utilization-k", t_args.utilization_k,
                         "sd multiplier for utilization_excess (default 2)");

    // rates
    auto* rates = app.add_subcommand("rates", "Month-wise fraud and COVID rate series");
    std::string r_claims, r_covid, r_region, r_from, r_to;
    rates->add_option("claims", r_claims, "claims CSV path")->required();
    rates->add_option("covid", r_covid, "covid CSV path")->required();
    rates->add_option("--region", r_region, "covid region (default: the file's only region)");
    rates->add_option("--from", r_from, "first month YYYY-MM")->required();
    rates->add_option("--to", r_to, "last month YYYY-MM")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Correlation/regression report from a series");
    std::string a_series, a_from, a_to;
    analyze->add_option("series", a_series, "monthly series CSV path")->required();
    analyze->add_option("--from", a_from, "window start (default: first row)");
    analyze->add_option("--to", a_to, "window end (default: last row)");

    // train
    auto* train = app.add_subcommand("train", "Train the boosted-tree fraud classifier");
    TrainArgs tr_args;
    train->add_option("claims", tr_args.claims_path, "claims CSV path")->required();
    train->add_option("--split", tr_args.split, "train fraction (default 0.7)");
    train->add_option("--trees", tr_args.params.n_trees, "boosting stages (default 100)");
    train->add_option("--depth", tr_args.params.max_depth, "max tree depth (default 3)");
    train->add_option("--learning-rate", tr_args.params.learning_rate,
                      "shrinkage (default 0.1)");
    train->add_option("--min-leaf", tr_args.params.min_leaf, "min rows per leaf (default 20)");
    train->add_flag("--with-trigger-features", tr_args.with_trigger_features,
                    "add builtin trigger hit counts as a model feature");
    train->add_option("--model-out", tr_args.model_out, "model file (default model.json)");
    train->add_option("--metrics-out", tr_args.metrics_out,
                      "held-out metrics report (default stdout)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a model against labeled claims");
    std::string e_model, e_claims;
    evaluate->add_option("model", e_model, "model file")->required();
    evaluate->add_option("claims", e_claims, "claims CSV path")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus from a config");
    std::string s_config, s_out_dir = "synth_out";
    synth->add_option("config", s_config, "config file (key = value lines)")->required();
    synth->add_option("--out-dir", s_out_dir, "output directory (default synth_out)");

    std::uint64_t seed = 42;
    std::int64_t population = 3'000'000;
    std::string out_path;
    app.add_option("--seed", seed, "random seed (default 42)");
    app.add_option("--population", population, "regional population (default 3,000,000)");
    app.add_option("--out", out_path, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(v_claims, schema_map_path);
        if (triggers->parsed()) {
            t_args.schema_map_path = schema_map_path;
            t_args.out_path = out_path;
            if (!t_args.list_only && t_args.claims_path.empty())
                throw fk::UsageError("claims path is required");
            return cmd_triggers(t_args);
        }
        if (rates->parsed())
            return cmd_rates(r_claims, r_covid, r_region, population, r_from, r_to, out_path,
                             schema_map_path);
        if (analyze->parsed()) return cmd_analyze(a_series, a_from, a_to, out_path);
        if (train->parsed()) {
            tr_args.schema_map_path = schema_map_path;
            tr_args.seed = seed;
            if (!(tr_args.split > 0.0 && tr_args.split < 1.0))
                throw fk::UsageError("--split must be in (0, 1)");
            return cmd_train(tr_args);
        }
        if (evaluate->parsed()) return cmd_evaluate(e_model, e_claims, schema_map_path, out_path);
        if (synth->parsed()) return cmd_synth(s_config, s_out_dir);
        throw fk::UsageError("no subcommand given");
    } catch (const fk::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fk::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
} catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
} catch (...) {
    std::cerr << "error: unknown failure\n";
    return 1;
}
