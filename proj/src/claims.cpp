#include "fraudkit/claims.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "fraudkit/csv.hpp"
#include "fraudkit/errors.hpp"
#include "fraudkit/textutil.hpp"

namespace fraudkit {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::optional<Money> Money::parse(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    bool neg = false;
    if (text.front() == '+' || text.front() == '-') {
        neg = text.front() == '-';
        text.remove_prefix(1);
    }
    auto dot = text.find('.');
    std::string_view whole = dot == std::string_view::npos ? text : text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? "" : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if (frac.size() > 2) return std::nullopt;
    std::int64_t units = 0;
    if (!whole.empty()) {
        auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), units);
        if (ec != std::errc{} || p != whole.data() + whole.size()) return std::nullopt;
    }
    std::int64_t cents = 0;
    if (!frac.empty()) {
        auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), cents);
        if (ec != std::errc{} || p != frac.data() + frac.size()) return std::nullopt;
        if (frac.size() == 1) cents *= 10;
    }
    std::int64_t minor = units * 100 + cents;
    return Money{neg ? -minor : minor};
}

std::string Money::str() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%02lld", static_cast<long long>(minor / 100),
                  static_cast<long long>(minor % 100 < 0 ? -(minor % 100) : minor % 100));
    return buf;
}

std::string_view to_string(BenefitType b) {
    return b == BenefitType::medical ? "medical" : "surgical";
}

std::string_view to_string(FraudStatus s) {
    switch (s) {
        case FraudStatus::fraud: return "fraud";
        case FraudStatus::not_fraud: return "not_fraud";
        default: return "unknown";
    }
}

const std::vector<std::string>& claims_columns() {
    static const std::vector<std::string> cols = {
        "policy_number", "insured_id", "claim_id", "benefit_type", "claim_status",
        "treatment_start", "treatment_end", "claim_settlement_date", "claim_reported_date",
        "billed_amount", "approved_amount", "paid_amount", "provider_id", "provider_name",
        "days_stayed", "diagnosis_code", "diagnosis_name", "procedure_code", "procedure_name",
        "net_amount", "claim_paid_date", "surgery_date", "discharge_date", "claim_raised_date",
        "hospital_district", "fraud_status"};
    return cols;
}

SchemaMap parse_schema_map(std::istream& in) {
    SchemaMap map;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("schema map line " + std::to_string(lineno) +
                             ": expected 'canonical = source_column'");
        std::string canonical{trim(sv.substr(0, eq))};
        std::string source{trim(sv.substr(eq + 1))};
        const auto& cols = claims_columns();
        if (std::find(cols.begin(), cols.end(), canonical) == cols.end())
            throw UsageError("schema map line " + std::to_string(lineno) +
                             ": unknown canonical column '" + canonical + "'");
        map[canonical] = source;
    }
    return map;
}

namespace {

// Per-row accessor over a header-indexed CSV record.
class Row {
public:
    Row(const std::unordered_map<std::string, size_t>& index,
        const std::vector<std::string>& fields)
        : index_(index), fields_(fields) {}

    // nullopt when the column is absent from the file entirely.
    std::optional<std::string_view> get(const std::string& col) const {
        auto it = index_.find(col);
        if (it == index_.end() || it->second >= fields_.size()) return std::nullopt;
        return std::string_view(fields_[it->second]);
    }

private:
    const std::unordered_map<std::string, size_t>& index_;
    const std::vector<std::string>& fields_;
};

struct RowParser {
    std::vector<ValidationIssue>& issues;
    int row;
    bool failed = false;

    void error(const std::string& field, const std::string& msg) {
        issues.push_back({row, field, Severity::error, msg});
        failed = true;
    }
    void warn(const std::string& field, const std::string& msg) {
        issues.push_back({row, field, Severity::warning, msg});
    }

    std::string text(const Row& r, const std::string& col) {
        auto v = r.get(col);
        return v ? std::string(trim(*v)) : std::string();
    }

    std::optional<Date> opt_date(const Row& r, const std::string& col) {
        auto v = r.get(col);
        if (!v) return std::nullopt;
        auto t = trim(*v);
        if (t.empty()) return std::nullopt;
        auto d = Date::parse(t);
        if (!d) error(col, "invalid date '" + std::string(t) + "'");
        return d;
    }

    std::optional<Money> opt_money(const Row& r, const std::string& col) {
        auto v = r.get(col);
        if (!v) return std::nullopt;
        auto t = trim(*v);
        if (t.empty()) return std::nullopt;
        auto m = Money::parse(t);
        if (!m) {
            error(col, "invalid amount '" + std::string(t) + "'");
            return std::nullopt;
        }
        if (m->minor < 0) {
            error(col, "negative amount '" + std::string(t) + "'");
            return std::nullopt;
        }
        return m;
    }
};

}  // namespace

ClaimsParseResult parse_claims_csv(std::istream& in, const SchemaMap* schema_map) {
    if (!in) throw UsageError("claims stream is not readable");
    ClaimsParseResult result;
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) return result;  // empty input: no records, no issues

    std::unordered_map<std::string, size_t> source_index;
    for (size_t i = 0; i < fields.size(); ++i) source_index[std::string(trim(fields[i]))] = i;

    // canonical name -> field position, applying the schema map when given
    std::unordered_map<std::string, size_t> index;
    for (const auto& col : claims_columns()) {
        std::string source = col;
        if (schema_map) {
            auto it = schema_map->find(col);
            if (it != schema_map->end()) source = it->second;
        }
        auto it = source_index.find(source);
        if (it != source_index.end()) index[col] = it->second;
    }
    for (const char* mandatory : {"claim_id", "claim_reported_date", "fraud_status"})
        if (!index.count(mandatory))
            throw DataError(std::string("missing mandatory column: ") + mandatory);

    std::unordered_set<std::string> seen_ids;
    int data_row = 0;
    const size_t header_count = fields.size();
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
        ++data_row;
        if (fields.size() != header_count) {
            result.issues.push_back({data_row, "", Severity::error,
                                     "expected " + std::to_string(header_count) + " fields, got " +
                                         std::to_string(fields.size())});
            continue;
        }
        Row row(index, fields);
        RowParser p{result.issues, data_row};
        ClaimRecord rec;

        rec.claim_id = p.text(row, "claim_id");
        if (rec.claim_id.empty()) p.error("claim_id", "empty claim_id");

        auto reported_raw = row.get("claim_reported_date");
        auto reported = Date::parse(trim(reported_raw ? *reported_raw : ""));
        if (!reported)
            p.error("claim_reported_date",
                    "invalid date '" + std::string(trim(reported_raw ? *reported_raw : "")) + "'");
        else
            rec.claim_reported_date = *reported;

        std::string fs = lower(p.text(row, "fraud_status"));
        if (fs == "fraud")
            rec.fraud_status = FraudStatus::fraud;
        else if (fs == "not_fraud" || fs == "not fraud" || fs == "non-fraud")
            rec.fraud_status = FraudStatus::not_fraud;
        else if (fs == "unknown" || fs.empty())
            rec.fraud_status = FraudStatus::unknown;
        else
            p.error("fraud_status", "unrecognized fraud_status '" + fs + "'");

        std::string bt = lower(p.text(row, "benefit_type"));
        if (bt == "surgical")
            rec.benefit_type = BenefitType::surgical;
        else if (bt == "medical" || bt.empty())
            rec.benefit_type = BenefitType::medical;
        else
            p.error("benefit_type", "unrecognized benefit_type '" + bt + "'");

        rec.policy_number = p.text(row, "policy_number");
        rec.insured_id = p.text(row, "insured_id");
        rec.claim_status = p.text(row, "claim_status");
        rec.provider_id = p.text(row, "provider_id");
        rec.provider_name = p.text(row, "provider_name");
        rec.diagnosis_code = p.text(row, "diagnosis_code");
        rec.diagnosis_name = p.text(row, "diagnosis_name");
        rec.procedure_code = p.text(row, "procedure_code");
        rec.procedure_name = p.text(row, "procedure_name");
        rec.hospital_district = p.text(row, "hospital_district");

        rec.treatment_start = p.opt_date(row, "treatment_start");
        rec.treatment_end = p.opt_date(row, "treatment_end");
        rec.claim_settlement_date = p.opt_date(row, "claim_settlement_date");
        rec.claim_paid_date = p.opt_date(row, "claim_paid_date");
        rec.surgery_date = p.opt_date(row, "surgery_date");
        rec.discharge_date = p.opt_date(row, "discharge_date");
        rec.claim_raised_date = p.opt_date(row, "claim_raised_date");

        if (auto m = p.opt_money(row, "billed_amount")) rec.billed_amount = *m;
        rec.approved_amount = p.opt_money(row, "approved_amount");
        rec.paid_amount = p.opt_money(row, "paid_amount");
        rec.net_amount = p.opt_money(row, "net_amount");

        std::string ds = p.text(row, "days_stayed");
        if (!ds.empty()) {
            std::int64_t n = 0;
            if (!parse_i64(ds, n) || n < 0)
                p.error("days_stayed", "invalid days_stayed '" + ds + "'");
            else
                rec.days_stayed = n;
        }

        if (rec.treatment_start && rec.treatment_end && *rec.treatment_end < *rec.treatment_start)
            p.error("treatment_end", "treatment_end precedes treatment_start");

        if (!p.failed && !seen_ids.insert(rec.claim_id).second)
            p.error("claim_id", "duplicate claim_id '" + rec.claim_id + "'");

        if (p.failed) continue;

        if (rec.paid_amount && rec.approved_amount && rec.paid_amount->minor > rec.approved_amount->minor)
            p.warn("paid_amount", "paid_amount exceeds approved_amount");
        if (rec.approved_amount && rec.approved_amount->minor > rec.billed_amount.minor)
            p.warn("approved_amount", "approved_amount exceeds billed_amount");

        result.records.push_back(std::move(rec));
    }
    return result;
}

CovidParseResult parse_covid_csv(std::istream& in, const std::string& region) {
    if (!in) throw UsageError("covid stream is not readable");
    CovidParseResult result;
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("covid file is empty");

    std::unordered_map<std::string, size_t> index;
    for (size_t i = 0; i < fields.size(); ++i) index[std::string(trim(fields[i]))] = i;
    for (const char* col : {"date", "region", "cumulative_infected"})
        if (!index.count(col)) throw DataError(std::string("missing mandatory column: ") + col);

    struct Parsed {
        CovidDailyRecord rec;
        int row;
    };
    std::vector<Parsed> rows;
    int data_row = 0;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        ++data_row;
        auto field = [&](const char* col) -> std::string_view {
            size_t i = index[col];
            return i < fields.size() ? trim(fields[i]) : std::string_view();
        };
        if (std::string(field("region")) != region) continue;
        auto d = Date::parse(field("date"));
        if (!d) {
            result.issues.push_back({data_row, "date", Severity::error,
                                     "invalid date '" + std::string(field("date")) + "'"});
            continue;
        }
        std::int64_t cum = 0;
        if (!parse_i64(field("cumulative_infected"), cum) || cum < 0) {
            result.issues.push_back({data_row, "cumulative_infected", Severity::error,
                                     "invalid cumulative count '" +
                                         std::string(field("cumulative_infected")) + "'"});
            continue;
        }
        rows.push_back({CovidDailyRecord{*d, region, cum}, data_row});
    }
    if (rows.empty()) throw DataError("no rows for region '" + region + "'");

    std::stable_sort(rows.begin(), rows.end(), [](const Parsed& a, const Parsed& b) {
        return a.rec.date < b.rec.date;
    });
    std::int64_t prev = 0;
    for (auto& r : rows) {
        if (r.rec.cumulative_infected < prev) {
            result.issues.push_back({r.row, "cumulative_infected", Severity::warning,
                                     "cumulative count decreased (" +
                                         std::to_string(r.rec.cumulative_infected) +
                                         " < " + std::to_string(prev) + "); clamped"});
            r.rec.cumulative_infected = prev;
        }
        prev = r.rec.cumulative_infected;
        result.records.push_back(std::move(r.rec));
    }
    return result;
}

MonthlyFraud monthly_fraud_rate(const std::vector<ClaimRecord>& claims, YearMonth month) {
    MonthlyFraud out;
    for (const auto& c : claims) {
        if (YearMonth::of(c.claim_reported_date) != month) continue;
        ++out.reported_claims;
        if (c.fraud_status == FraudStatus::fraud) ++out.fraud_claims;
    }
    out.fraud_rate =
        out.reported_claims == 0 ? 0.0 : double(out.fraud_claims) / double(out.reported_claims);
    return out;
}

namespace {

std::int64_t cumulative_at_or_before(const std::vector<CovidDailyRecord>& records, Date d) {
    std::int64_t serial = d.serial();
    auto it = std::upper_bound(records.begin(), records.end(), serial,
                               [](std::int64_t s, const CovidDailyRecord& r) {
                                   return s < r.date.serial();
                               });
    if (it == records.begin()) return 0;
    return std::prev(it)->cumulative_infected;
}

}  // namespace

MonthlyCovid monthly_covid_rate(const std::vector<CovidDailyRecord>& records, YearMonth month,
                                std::int64_t population) {
    if (population <= 0) throw UsageError("population must be positive");
    Date month_end = month.last_day();
    Date prior_end = YearMonth::from_index(month.index() - 1).last_day();
    std::int64_t cases =
        cumulative_at_or_before(records, month_end) - cumulative_at_or_before(records, prior_end);
    if (cases < 0) cases = 0;
    return {cases, double(cases) / double(population)};
}

std::vector<MonthlyPoint> build_joint_series(const std::vector<ClaimRecord>& claims,
                                             const std::vector<CovidDailyRecord>& covid,
                                             std::int64_t population, YearMonth from,
                                             YearMonth to) {
    if (from > to) throw UsageError("month range start " + from.str() + " is after end " + to.str());
    std::vector<MonthlyPoint> series;
    for (int idx = from.index(); idx <= to.index(); ++idx) {
        YearMonth ym = YearMonth::from_index(idx);
        MonthlyPoint p;
        p.month = ym;
        auto fraud = monthly_fraud_rate(claims, ym);
        p.reported_claims = fraud.reported_claims;
        p.fraud_claims = fraud.fraud_claims;
        p.fraud_rate = fraud.fraud_rate;
        auto cov = monthly_covid_rate(covid, ym, population);
        p.covid_cases = cov.covid_cases;
        p.covid_rate = cov.covid_rate;
        series.push_back(p);
    }
    return series;
}

void write_claims_csv(std::ostream& out, const std::vector<ClaimRecord>& claims) {
    out << csv_join(claims_columns()) << "\n";
    auto date_str = [](const std::optional<Date>& d) { return d ? d->str() : std::string(); };
    auto money_str = [](const std::optional<Money>& m) { return m ? m->str() : std::string(); };
    for (const auto& c : claims) {
        std::vector<std::string> f = {
            c.policy_number,
            c.insured_id,
            c.claim_id,
            std::string(to_string(c.benefit_type)),
            c.claim_status,
            date_str(c.treatment_start),
            date_str(c.treatment_end),
            date_str(c.claim_settlement_date),
            c.claim_reported_date.str(),
            c.billed_amount.str(),
            money_str(c.approved_amount),
            money_str(c.paid_amount),
            c.provider_id,
            c.provider_name,
            std::to_string(c.days_stayed),
            c.diagnosis_code,
            c.diagnosis_name,
            c.procedure_code,
            c.procedure_name,
            money_str(c.net_amount),
            date_str(c.claim_paid_date),
            date_str(c.surgery_date),
            date_str(c.discharge_date),
            date_str(c.claim_raised_date),
            c.hospital_district,
            std::string(to_string(c.fraud_status)),
        };
        out << csv_join(f) << "\n";
    }
}

void write_covid_csv(std::ostream& out, const std::vector<CovidDailyRecord>& records) {
    out << "date,region,cumulative_infected\n";
    for (const auto& r : records)
        out << csv_join({r.date.str(), r.region, std::to_string(r.cumulative_infected)}) << "\n";
}

void write_monthly_series_csv(std::ostream& out, const std::vector<MonthlyPoint>& series) {
    out << "month,reported_claims,fraud_claims,fraud_rate,covid_cases,covid_rate\n";
    for (const auto& p : series) {
        out << csv_join({p.month.str(), std::to_string(p.reported_claims),
                         std::to_string(p.fraud_claims), format_sig6(p.fraud_rate),
                         std::to_string(p.covid_cases), format_sig6(p.covid_rate)})
            << "\n";
    }
}

std::vector<MonthlyPoint> parse_monthly_series_csv(std::istream& in) {
    if (!in) throw UsageError("series stream is not readable");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("series file is empty");
    std::unordered_map<std::string, size_t> index;
    for (size_t i = 0; i < fields.size(); ++i) index[std::string(trim(fields[i]))] = i;
    for (const char* col :
         {"month", "reported_claims", "fraud_claims", "fraud_rate", "covid_cases", "covid_rate"})
        if (!index.count(col)) throw DataError(std::string("missing mandatory column: ") + col);

    std::vector<MonthlyPoint> series;
    int data_row = 0;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        ++data_row;
        auto field = [&](const char* col) -> std::string {
            size_t i = index[col];
            return i < fields.size() ? std::string(trim(fields[i])) : std::string();
        };
        MonthlyPoint p;
        auto ym = YearMonth::parse(field("month"));
        if (!ym)
            throw DataError("series row " + std::to_string(data_row) + ": invalid month '" +
                            field("month") + "'");
        p.month = *ym;
        std::int64_t v = 0;
        if (!parse_i64(field("reported_claims"), v) || v < 0)
            throw DataError("series row " + std::to_string(data_row) + ": invalid reported_claims");
        p.reported_claims = v;
        if (!parse_i64(field("fraud_claims"), v) || v < 0)
            throw DataError("series row " + std::to_string(data_row) + ": invalid fraud_claims");
        p.fraud_claims = v;
        if (!parse_i64(field("covid_cases"), v) || v < 0)
            throw DataError("series row " + std::to_string(data_row) + ": invalid covid_cases");
        p.covid_cases = v;
        try {
            p.fraud_rate = std::stod(field("fraud_rate"));
            p.covid_rate = std::stod(field("covid_rate"));
        } catch (const std::exception&) {
            throw DataError("series row " + std::to_string(data_row) + ": invalid rate value");
        }
        series.push_back(p);
    }
    return series;
}

void write_issues_csv(std::ostream& out, const std::vector<ValidationIssue>& issues) {
    out << "row,field,severity,message\n";
    for (const auto& i : issues)
        out << csv_join({std::to_string(i.row), i.field,
                         i.severity == Severity::error ? "error" : "warning", i.message})
            << "\n";
}

}  // namespace fraudkit
