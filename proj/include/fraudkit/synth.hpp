#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraudkit/claims.hpp"

namespace fraudkit {

enum class EpidemicKind { exponential, logistic };
enum class LinkKind { linear, logarithmic };

struct EpidemicConfig {
    EpidemicKind kind = EpidemicKind::exponential;
    double initial = 10;
    double rate = 1.0;  // monthly growth rate; exponential factor is 1 + rate
    double capacity = 1e6;
};

struct ClaimsGenConfig {
    std::int64_t per_month = 1000;
    double base_fraud = 0.05;
    LinkKind link = LinkKind::linear;
    double link_slope = 0.0;
    std::optional<double> link_intercept;  // defaults to base_fraud
    bool sample_labels = false;            // exact counts unless set
    double natural_anomaly_rate = 0.0;
};

/// Generator configuration, loadable from a plain-text key = value file.
struct SynthConfig {
    std::uint64_t seed = 42;
    std::string region = "synth";
    std::int64_t population = 3'000'000;
    YearMonth from, to;
    int baseline_months = 0;  // leading months kept free of planted violations
    std::optional<Date> eval_date;
    EpidemicConfig epidemic;
    ClaimsGenConfig claims;
    std::map<std::string, std::int64_t> plants;  // rule id -> planted per post-baseline month

    static SynthConfig parse(std::istream& in);

    /// Trigger evaluation date for this corpus; defaults to 120 days past
    /// the range end so stale-status durations are well defined.
    Date effective_eval_date() const;

    YearMonth baseline_to() const { return YearMonth::from_index(from.index() + baseline_months - 1); }
};

struct GroundTruth {
    std::map<std::string, std::vector<std::string>> fraud_ids_by_month;  // "2020-03" -> ids
    std::map<std::string, std::vector<std::string>> planted_by_rule;
    std::vector<MonthlyPoint> realized;
};

/// Daily cumulative series over the configured month range; non-decreasing
/// and fully determined by the config.
std::vector<CovidDailyRecord> generate_epidemic(const SynthConfig& cfg);

/// Emits claims-per-month records for each month. The monthly fraud count is
/// the configured link applied to the realized COVID rate (exact rounded
/// counts unless sample_labels is set); planted trigger violations are
/// constructed to fire exactly their target rule and are recorded, with the
/// fraud ids and realized rates, in the returned GroundTruth.
std::pair<std::vector<ClaimRecord>, GroundTruth> generate_claims(
    const SynthConfig& cfg, const std::vector<CovidDailyRecord>& epidemic);

void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt);
void write_ground_truth_rates_csv(std::ostream& out, const GroundTruth& gt);

/// Rule ids the generator knows how to plant (the data-expressible builtins).
const std::vector<std::string>& plantable_rules();

}  // namespace fraudkit
