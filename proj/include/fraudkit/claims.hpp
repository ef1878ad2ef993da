#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fraudkit/dates.hpp"

namespace fraudkit {

/// Monetary amount in exact minor units (1/100 of a currency unit), so
/// parsed files re-serialize without floating-point drift.
struct Money {
    std::int64_t minor = 0;

    static std::optional<Money> parse(std::string_view text);
    double value() const { return double(minor) / 100.0; }
    std::string str() const;
    friend auto operator<=>(const Money&, const Money&) = default;
};

enum class BenefitType { medical, surgical };
enum class FraudStatus { fraud, not_fraud, unknown };

std::string_view to_string(BenefitType);
std::string_view to_string(FraudStatus);

/// One health-insurance claim. Field roster follows the canonical claims
/// CSV schema; optional fields may be absent in real exports.
struct ClaimRecord {
    std::string policy_number;
    std::string insured_id;
    std::string claim_id;
    BenefitType benefit_type = BenefitType::medical;
    std::string claim_status;
    std::optional<Date> treatment_start;
    std::optional<Date> treatment_end;
    std::optional<Date> claim_settlement_date;
    Date claim_reported_date;
    Money billed_amount;
    std::optional<Money> approved_amount;
    std::optional<Money> paid_amount;
    std::string provider_id;
    std::string provider_name;
    std::int64_t days_stayed = 0;
    std::string diagnosis_code;
    std::string diagnosis_name;
    std::string procedure_code;
    std::string procedure_name;
    std::optional<Money> net_amount;
    std::optional<Date> claim_paid_date;
    std::optional<Date> surgery_date;
    std::optional<Date> discharge_date;
    std::optional<Date> claim_raised_date;
    std::string hospital_district;
    FraudStatus fraud_status = FraudStatus::unknown;

    friend bool operator==(const ClaimRecord&, const ClaimRecord&) = default;
};

struct CovidDailyRecord {
    Date date;
    std::string region;
    std::int64_t cumulative_infected = 0;

    friend bool operator==(const CovidDailyRecord&, const CovidDailyRecord&) = default;
};

struct MonthlyPoint {
    YearMonth month;
    std::int64_t reported_claims = 0;
    std::int64_t fraud_claims = 0;
    double fraud_rate = 0.0;
    std::int64_t covid_cases = 0;
    double covid_rate = 0.0;
};

enum class Severity { error, warning };

struct ValidationIssue {
    int row = 0;  // 1-based data row (header excluded)
    std::string field;
    Severity severity = Severity::error;
    std::string message;
};

/// Maps canonical column names to source column names, for loading exports
/// whose headers use display names. Lines look like
///   claim_id = Claim Identification Number
using SchemaMap = std::map<std::string, std::string>;

SchemaMap parse_schema_map(std::istream& in);

struct ClaimsParseResult {
    std::vector<ClaimRecord> records;
    std::vector<ValidationIssue> issues;
};

/// Parses a claims CSV. Well-formed rows become records in input order;
/// malformed rows are skipped with an error issue. Missing mandatory
/// columns (claim_id, claim_reported_date, fraud_status) throw DataError.
ClaimsParseResult parse_claims_csv(std::istream& in, const SchemaMap* schema_map = nullptr);

struct CovidParseResult {
    std::vector<CovidDailyRecord> records;
    std::vector<ValidationIssue> issues;
};

/// Parses a COVID CSV (columns date, region, cumulative_infected), keeping
/// only `region` rows sorted by date. Decreases in the cumulative count are
/// clamped to the prior value with a warning. Throws DataError when no row
/// matches the region.
CovidParseResult parse_covid_csv(std::istream& in, const std::string& region);

struct MonthlyFraud {
    std::int64_t reported_claims = 0;
    std::int64_t fraud_claims = 0;
    double fraud_rate = 0.0;
};

struct MonthlyCovid {
    std::int64_t covid_cases = 0;
    double covid_rate = 0.0;
};

/// Claims are bucketed into months by claim_reported_date.
MonthlyFraud monthly_fraud_rate(const std::vector<ClaimRecord>& claims, YearMonth month);

/// New cases in `month` = cumulative at month end minus cumulative at prior
/// month end (0 baseline before the first record). Requires records sorted
/// by date (as produced by parse_covid_csv).
MonthlyCovid monthly_covid_rate(const std::vector<CovidDailyRecord>& records, YearMonth month,
                                std::int64_t population);

/// One MonthlyPoint per month in [from, to]; months without COVID data get
/// zero cases.
std::vector<MonthlyPoint> build_joint_series(const std::vector<ClaimRecord>& claims,
                                             const std::vector<CovidDailyRecord>& covid,
                                             std::int64_t population, YearMonth from,
                                             YearMonth to);

/// Canonical claims CSV with the full column roster; parses back to an
/// identical record list.
void write_claims_csv(std::ostream& out, const std::vector<ClaimRecord>& claims);

void write_covid_csv(std::ostream& out, const std::vector<CovidDailyRecord>& records);

/// Columns month, reported_claims, fraud_claims, fraud_rate, covid_cases,
/// covid_rate; rates as decimal fractions at 6 significant digits.
void write_monthly_series_csv(std::ostream& out, const std::vector<MonthlyPoint>& series);

/// Reads back a monthly series CSV (as written by write_monthly_series_csv).
std::vector<MonthlyPoint> parse_monthly_series_csv(std::istream& in);

void write_issues_csv(std::ostream& out, const std::vector<ValidationIssue>& issues);

/// Canonical claims column names, in roster order.
const std::vector<std::string>& claims_columns();

}  // namespace fraudkit
