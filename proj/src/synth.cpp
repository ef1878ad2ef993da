#include "fraudkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "fraudkit/csv.hpp"
#include "fraudkit/errors.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double to_double(const std::string& key, std::string_view value) {
    try {
        size_t pos = 0;
        std::string s(value);
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': invalid number '" + std::string(value) + "'");
    }
}

std::int64_t to_int(const std::string& key, std::string_view value) {
    double d = to_double(key, value);
    if (d != std::floor(d)) throw UsageError("config key '" + key + "': expected an integer");
    return std::int64_t(d);
}

bool to_bool(const std::string& key, std::string_view value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw UsageError("config key '" + key + "': expected true or false");
}

YearMonth to_month(const std::string& key, std::string_view value) {
    auto ym = YearMonth::parse(value);
    if (!ym) throw UsageError("config key '" + key + "': invalid month '" + std::string(value) + "'");
    return *ym;
}

}  // namespace

const std::vector<std::string>& plantable_rules() {
    static const std::vector<std::string> rules = {
        "long_stay",        "multiple_providers", "high_value_bill", "coverage_extension",
        "exgratia_threshold", "duplicate_package", "stale_reject",   "utilization_spike",
        "late_submission",  "late_documents"};
    return rules;
}

SynthConfig SynthConfig::parse(std::istream& in) {
    SynthConfig cfg;
    bool have_from = false, have_to = false;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line is not 'key = value': " + std::string(sv));
        std::string key{trim(sv.substr(0, eq))};
        std::string value{trim(sv.substr(eq + 1))};

        if (key == "seed") cfg.seed = std::uint64_t(to_int(key, value));
        else if (key == "region") cfg.region = value;
        else if (key == "population") cfg.population = to_int(key, value);
        else if (key == "from") { cfg.from = to_month(key, value); have_from = true; }
        else if (key == "to") { cfg.to = to_month(key, value); have_to = true; }
        else if (key == "baseline_months") cfg.baseline_months = int(to_int(key, value));
        else if (key == "eval_date") {
            auto d = Date::parse(value);
            if (!d) throw UsageError("config key 'eval_date': invalid date '" + value + "'");
            cfg.eval_date = d;
        } else if (key == "epidemic.kind") {
            if (value == "exponential") cfg.epidemic.kind = EpidemicKind::exponential;
            else if (value == "logistic") cfg.epidemic.kind = EpidemicKind::logistic;
            else throw UsageError("config key 'epidemic.kind': unknown kind '" + value + "'");
        } else if (key == "epidemic.initial") cfg.epidemic.initial = to_double(key, value);
        else if (key == "epidemic.rate") cfg.epidemic.rate = to_double(key, value);
        else if (key == "epidemic.capacity") cfg.epidemic.capacity = to_double(key, value);
        else if (key == "claims.per_month") cfg.claims.per_month = to_int(key, value);
        else if (key == "claims.base_fraud") cfg.claims.base_fraud = to_double(key, value);
        else if (key == "claims.link") {
            if (value == "linear") cfg.claims.link = LinkKind::linear;
            else if (value == "logarithmic") cfg.claims.link = LinkKind::logarithmic;
            else throw UsageError("config key 'claims.link': unknown link '" + value + "'");
        } else if (key == "claims.link_slope") cfg.claims.link_slope = to_double(key, value);
        else if (key == "claims.link_intercept") cfg.claims.link_intercept = to_double(key, value);
        else if (key == "claims.sample_labels") cfg.claims.sample_labels = to_bool(key, value);
        else if (key == "claims.natural_anomaly_rate")
            cfg.claims.natural_anomaly_rate = to_double(key, value);
        else if (key.rfind("plant.", 0) == 0) {
            std::string rule = key.substr(6);
            const auto& known = plantable_rules();
            if (std::find(known.begin(), known.end(), rule) == known.end())
                throw UsageError("config key '" + key + "': rule is not plantable");
            cfg.plants[rule] = to_int(key, value);
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
    if (!have_from || !have_to) throw UsageError("config must set 'from' and 'to' months");
    if (cfg.from > cfg.to) throw UsageError("config 'from' month is after 'to'");
    if (cfg.population <= 0) throw UsageError("config key 'population': must be positive");
    if (cfg.claims.per_month < 0) throw UsageError("config key 'claims.per_month': must be >= 0");
    if (cfg.baseline_months < 0)
        throw UsageError("config key 'baseline_months': must be >= 0");
    if (cfg.epidemic.initial < 0)
        throw UsageError("config key 'epidemic.initial': must be >= 0");
    if (cfg.epidemic.kind == EpidemicKind::logistic && cfg.epidemic.capacity <= 0)
        throw UsageError("config key 'epidemic.capacity': must be positive");

    std::int64_t planted_total = 0;
    for (const auto& [rule, count] : cfg.plants) {
        if (count < 0) throw UsageError("config key 'plant." + rule + "': must be >= 0");
        planted_total += count;
        if (rule == "duplicate_package" && count == 1)
            throw UsageError("config key 'plant.duplicate_package': needs at least 2 per month");
        if (rule == "multiple_providers" && count > 0 && count < 3)
            throw UsageError("config key 'plant.multiple_providers': needs at least 3 per month");
        if (rule == "utilization_spike" && count > 0 && count < 3)
            throw UsageError("config key 'plant.utilization_spike': needs at least 3 per month");
    }
    if (cfg.plants.count("utilization_spike") && cfg.plants.at("utilization_spike") > 0 &&
        cfg.baseline_months < 1)
        throw UsageError("plant.utilization_spike requires baseline_months >= 1");
    if (planted_total > cfg.claims.per_month)
        throw UsageError("planted violations per month exceed claims.per_month");
    return cfg;
}

Date SynthConfig::effective_eval_date() const {
    return eval_date ? *eval_date : to.last_day().plus_days(120);
}

std::vector<CovidDailyRecord> generate_epidemic(const SynthConfig& cfg) {
    if (cfg.from > cfg.to) throw UsageError("month range start is after end");
    const auto& ep = cfg.epidemic;
    double a_logistic = 0;
    if (ep.kind == EpidemicKind::logistic) {
        double c0 = std::max(ep.initial, 1.0);
        a_logistic = (ep.capacity - c0) / c0;
    }

    std::vector<CovidDailyRecord> out;
    std::int64_t prev = 0;
    for (int m = cfg.from.index(); m <= cfg.to.index(); ++m) {
        YearMonth ym = YearMonth::from_index(m);
        int n_days = ym.days_in_month();
        for (int day = 1; day <= n_days; ++day) {
            double t = double(m - cfg.from.index()) + double(day) / double(n_days);
            double value = 0;
            if (ep.kind == EpidemicKind::exponential) {
                value = ep.initial * std::pow(1.0 + ep.rate, t);
            } else {
                value = ep.capacity / (1.0 + a_logistic * std::exp(-ep.rate * t));
            }
            std::int64_t cum = std::max<std::int64_t>(std::llround(value), prev);
            out.push_back({Date{ym.year, ym.month, day}, cfg.region, cum});
            prev = cum;
        }
    }
    return out;
}

namespace {

struct MonthFactory {
    YearMonth ym;
    Rng& rng;
    std::string month_tag;  // e.g. "202003"
    int serial = 0;

    ClaimRecord base_natural(std::int64_t index) {
        ClaimRecord c;
        c.claim_id = "C" + month_tag + "-N" + std::to_string(index + 1);
        c.policy_number = "P" + month_tag + "-" + std::to_string(index + 1);
        c.insured_id = "I" + month_tag + "-" + std::to_string(index + 1);
        fill_common(c, index);

        int reported_day = int(rng.uniform_int(1, ym.days_in_month()));
        c.claim_reported_date = Date{ym.year, ym.month, reported_day};
        std::int64_t raise_gap = rng.uniform_int(0, 3);      // reported - raised
        std::int64_t discharge_gap = rng.uniform_int(0, 12); // raised - discharge
        c.claim_raised_date = c.claim_reported_date.plus_days(-raise_gap);
        c.discharge_date = c.claim_raised_date->plus_days(-discharge_gap);
        std::int64_t span = rng.uniform_int(1, 20);
        c.treatment_end = c.discharge_date;
        c.treatment_start = c.treatment_end->plus_days(-span);
        c.days_stayed = span;
        c.claim_settlement_date = c.claim_reported_date.plus_days(rng.uniform_int(5, 20));
        c.claim_paid_date = c.claim_settlement_date;
        if (index % 4 == 0) {
            c.benefit_type = BenefitType::surgical;
            c.surgery_date = c.treatment_start;
        }
        return c;
    }

    ClaimRecord base_planted(const std::string& rule, std::int64_t index) {
        ClaimRecord c;
        c.claim_id = "C" + month_tag + "-P-" + rule + "-" + std::to_string(index + 1);
        c.policy_number = "P" + month_tag + "-X-" + rule + "-" + std::to_string(index + 1);
        c.insured_id = "I" + month_tag + "-X-" + rule + "-" + std::to_string(index + 1);
        fill_common(c, index);
        // dedicated code with no baseline history, so plants for other rules
        // cannot skew a pool procedure into a utilization spike
        c.procedure_code = "PROCX-" + rule;
        c.procedure_name = "planted " + rule;

        int reported_day = int(rng.uniform_int(10, 20));
        c.claim_reported_date = Date{ym.year, ym.month, reported_day};
        c.claim_raised_date = c.claim_reported_date.plus_days(-2);
        c.discharge_date = c.claim_raised_date->plus_days(-5);
        c.treatment_end = c.discharge_date;
        c.treatment_start = c.treatment_end->plus_days(-10);
        c.days_stayed = 10;
        c.claim_settlement_date = c.claim_reported_date.plus_days(10);
        c.claim_paid_date = c.claim_settlement_date;
        return c;
    }

    void fill_common(ClaimRecord& c, std::int64_t index) {
        c.claim_status = std::array{"settled", "paid", "approved"}[size_t(index % 3)];
        int proc = int(index % 10) + 1;
        c.procedure_code = "PROC" + std::to_string(proc);
        c.procedure_name = "procedure " + std::to_string(proc);
        int diag = int(index % 25) + 1;
        c.diagnosis_code = "DIAG" + std::to_string(diag);
        c.diagnosis_name = "diagnosis " + std::to_string(diag);
        int provider = int(index % 15) + 1;
        c.provider_id = "H" + std::to_string(provider);
        c.provider_name = "hospital " + std::to_string(provider);
        c.hospital_district = "district " + std::to_string(index % 40 + 1);
        c.billed_amount = Money{rng.uniform_int(500'000, 40'000'000)};  // 5k..400k units
        c.approved_amount = Money{std::int64_t(double(c.billed_amount.minor) *
                                               rng.uniform_real(0.6, 1.0))};
        c.paid_amount = Money{std::int64_t(double(c.approved_amount->minor) *
                                           rng.uniform_real(0.9, 1.0))};
        c.net_amount = c.paid_amount;
        c.fraud_status = FraudStatus::not_fraud;
    }
};

double link_fraction(const ClaimsGenConfig& claims, double covid_rate) {
    double intercept = claims.link_intercept.value_or(claims.base_fraud);
    double value;
    if (claims.link == LinkKind::logarithmic) {
        // log link is undefined at zero incidence; fall back to the base rate
        value = covid_rate > 0 ? claims.link_slope * std::log(covid_rate) + intercept
                               : claims.base_fraud;
    } else {
        value = claims.link_slope * covid_rate + intercept;
    }
    if (std::isnan(value)) throw UsageError("fraud link produced NaN");
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace

std::pair<std::vector<ClaimRecord>, GroundTruth> generate_claims(
    const SynthConfig& cfg, const std::vector<CovidDailyRecord>& epidemic) {
    if (epidemic.empty()) throw UsageError("epidemic series is empty");

    std::vector<ClaimRecord> all;
    GroundTruth gt;
    bool plant_utilization =
        cfg.plants.count("utilization_spike") && cfg.plants.at("utilization_spike") > 0;

    for (int m = cfg.from.index(); m <= cfg.to.index(); ++m) {
        YearMonth ym = YearMonth::from_index(m);
        bool in_baseline = m - cfg.from.index() < cfg.baseline_months;
        char tag[16];
        std::snprintf(tag, sizeof(tag), "%04d%02d", ym.year, ym.month);

        Rng rng(Rng::derive_seed(cfg.seed, std::uint64_t(m)));
        MonthFactory factory{ym, rng, tag};

        std::int64_t planted_total = 0;
        if (!in_baseline)
            for (const auto& [rule, count] : cfg.plants) planted_total += count;
        std::int64_t natural = cfg.claims.per_month - planted_total;

        std::vector<ClaimRecord> month_claims;
        for (std::int64_t i = 0; i < natural; ++i) {
            ClaimRecord c = factory.base_natural(i);
            // fixed low-volume filler keeps the spike baseline well defined
            if (plant_utilization && in_baseline && i < 2) {
                c.procedure_code = "PROCUTIL";
                c.procedure_name = "utilization probe package";
            }
            if (cfg.claims.natural_anomaly_rate > 0 &&
                rng.uniform01() < cfg.claims.natural_anomaly_rate) {
                // mild genuine violation: a late raise
                c.claim_raised_date = c.discharge_date->plus_days(rng.uniform_int(16, 40));
            }
            month_claims.push_back(std::move(c));
        }

        if (!in_baseline) {
            for (const auto& [rule, count] : cfg.plants) {
                for (std::int64_t i = 0; i < count; ++i) {
                    ClaimRecord c = factory.base_planted(rule, i);
                    if (rule == "late_submission") {
                        c.discharge_date = c.claim_reported_date.plus_days(-10);
                        c.claim_raised_date = c.discharge_date->plus_days(19);
                        c.treatment_end = c.discharge_date;
                        c.treatment_start = c.treatment_end->plus_days(-10);
                    } else if (rule == "late_documents") {
                        c.discharge_date = c.claim_reported_date.plus_days(-20);
                        c.claim_raised_date = c.discharge_date->plus_days(10);
                        c.treatment_end = c.discharge_date;
                        c.treatment_start = c.treatment_end->plus_days(-10);
                    } else if (rule == "stale_reject") {
                        c.claim_status = "rejected";
                    } else if (rule == "duplicate_package") {
                        c.insured_id = "I" + std::string(tag) + "-DUP";
                        c.procedure_code = "PROCDUP";
                        c.procedure_name = "duplicated package";
                        c.diagnosis_code = "DIAGDUP" + std::to_string(i + 1);
                    } else if (rule == "multiple_providers") {
                        c.insured_id = "I" + std::string(tag) + "-MP";
                        c.diagnosis_code = "DIAGMP";
                        c.diagnosis_name = "shared diagnosis";
                        c.procedure_code = "PROCMP" + std::to_string(i + 1);
                        c.provider_id = "H-MP-" + std::to_string(i + 1);
                    } else if (rule == "utilization_spike") {
                        c.procedure_code = "PROCUTIL";
                        c.procedure_name = "utilization probe package";
                    } else if (rule == "long_stay") {
                        c.days_stayed = 31 + i;
                    } else if (rule == "high_value_bill") {
                        c.billed_amount = Money{60'000'000 + i * 100'000};  // 600k+ units
                        c.approved_amount = Money{40'000'000};
                        c.paid_amount = Money{40'000'000};
                        c.net_amount = c.paid_amount;
                    } else if (rule == "coverage_extension") {
                        c.treatment_start = c.treatment_end->plus_days(-45);
                        c.days_stayed = 20;
                    } else if (rule == "exgratia_threshold") {
                        c.billed_amount = Money{30'000'000};
                        c.approved_amount = Money{30'000'000};
                        c.paid_amount = Money{30'000'000};
                        c.net_amount = Money{120'000'001};  // > 10 lakhs
                    }
                    gt.planted_by_rule[rule].push_back(c.claim_id);
                    month_claims.push_back(std::move(c));
                }
            }
        }

        // fraud labels: exact monthly count implied by the link
        auto covid = monthly_covid_rate(epidemic, ym, cfg.population);
        double fraction = link_fraction(cfg.claims, covid.covid_rate);
        std::vector<std::size_t> order(month_claims.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);

        std::int64_t fraud_count = 0;
        if (cfg.claims.sample_labels) {
            for (auto idx : order)
                if (rng.uniform01() < fraction) {
                    month_claims[idx].fraud_status = FraudStatus::fraud;
                    ++fraud_count;
                }
        } else {
            fraud_count = std::clamp<std::int64_t>(
                std::llround(fraction * double(month_claims.size())), 0,
                std::int64_t(month_claims.size()));
            for (std::int64_t i = 0; i < fraud_count; ++i)
                month_claims[order[std::size_t(i)]].fraud_status = FraudStatus::fraud;
        }
        auto& fraud_ids = gt.fraud_ids_by_month[ym.str()];
        for (const auto& c : month_claims)
            if (c.fraud_status == FraudStatus::fraud) fraud_ids.push_back(c.claim_id);

        MonthlyPoint realized;
        realized.month = ym;
        realized.reported_claims = std::int64_t(month_claims.size());
        realized.fraud_claims = fraud_count;
        realized.fraud_rate = month_claims.empty()
                                  ? 0.0
                                  : double(fraud_count) / double(month_claims.size());
        realized.covid_cases = covid.covid_cases;
        realized.covid_rate = covid.covid_rate;
        gt.realized.push_back(realized);

        for (auto& c : month_claims) all.push_back(std::move(c));
    }
    return {std::move(all), std::move(gt)};
}

void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt) {
    out << "kind,month,rule_id,claim_id\n";
    for (const auto& [month, ids] : gt.fraud_ids_by_month)
        for (const auto& id : ids) out << csv_join({"fraud_label", month, "", id}) << "\n";
    for (const auto& [rule, ids] : gt.planted_by_rule)
        for (const auto& id : ids) out << csv_join({"trigger", "", rule, id}) << "\n";
}

void write_ground_truth_rates_csv(std::ostream& out, const GroundTruth& gt) {
    write_monthly_series_csv(out, gt.realized);
}

}  // namespace fraudkit
