#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fraudkit/errors.hpp"
#include "fraudkit/stats.hpp"
#include "fraudkit/synth.hpp"
#include "fraudkit/triggers.hpp"

using namespace fraudkit;

namespace {

SynthConfig config_from(const std::string& text) {
    std::istringstream in(text);
    return SynthConfig::parse(in);
}

std::int64_t cumulative_at(const std::vector<CovidDailyRecord>& records, Date d) {
    std::int64_t last = 0;
    for (const auto& r : records)
        if (!(d < r.date)) last = r.cumulative_infected;
    return last;
}

const std::string kBaseConfig =
    "seed = 42\n"
    "region = synthland\n"
    "population = 3000000\n"
    "from = 2020-03\n"
    "to = 2020-08\n"
    "epidemic.kind = exponential\n"
    "epidemic.initial = 12\n"
    "epidemic.rate = 2.5\n"
    "claims.per_month = 400\n"
    "claims.base_fraud = 0.08\n";

}  // namespace

TEST_CASE("config parser rejects unknown keys and bad values") {
    CHECK_THROWS_AS(config_from("bogus_key = 1\nfrom = 2020-01\nto = 2020-02\n"), UsageError);
    CHECK_THROWS_AS(config_from("from = 2020-01\nto = 2020-02\nclaims.per_month = -5\n"),
                    UsageError);
    CHECK_THROWS_AS(config_from("from = 2020-01\nto = 2020-02\nplant.not_a_rule = 3\n"),
                    UsageError);
    CHECK_THROWS_AS(config_from("from = 2020-03\nto = 2020-01\n"), UsageError);
    CHECK_THROWS_AS(config_from("to = 2020-01\n"), UsageError);

    try {
        config_from("from = 2020-01\nto = 2020-02\nepidemic.rate = abc\n");
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("epidemic.rate") != std::string::npos);
    }
}

TEST_CASE("exponential epidemic hits the monthly growth targets") {
    auto cfg = config_from(
        "from = 2020-01\nto = 2020-06\n"
        "epidemic.kind = exponential\nepidemic.initial = 10\nepidemic.rate = 2\n");
    auto series = generate_epidemic(cfg);
    REQUIRE(!series.empty());
    for (int k = 1; k <= 6; ++k) {
        Date month_end = YearMonth::from_index(YearMonth{2020, 1}.index() + k - 1).last_day();
        double expected = 10.0 * std::pow(3.0, k);
        double got = double(cumulative_at(series, month_end));
        CHECK(std::fabs(got - expected) <= std::max(1.0, 0.01 * expected));
    }
}

TEST_CASE("zero growth keeps the cumulative constant") {
    auto cfg = config_from(
        "from = 2020-01\nto = 2020-04\n"
        "epidemic.kind = exponential\nepidemic.initial = 25\nepidemic.rate = 0\n");
    auto series = generate_epidemic(cfg);
    for (const auto& r : series) CHECK(r.cumulative_infected == 25);
}

TEST_CASE("logistic epidemic saturates at capacity") {
    auto cfg = config_from(
        "from = 2020-01\nto = 2021-06\n"
        "epidemic.kind = logistic\nepidemic.initial = 10\nepidemic.rate = 1.5\n"
        "epidemic.capacity = 50000\n");
    auto series = generate_epidemic(cfg);
    std::int64_t prev = 0;
    for (const auto& r : series) {
        CHECK(r.cumulative_infected <= 50000);
        CHECK(r.cumulative_infected >= prev);
        prev = r.cumulative_infected;
    }
    CHECK(series.back().cumulative_infected > 45000);  // actually saturates
}

TEST_CASE("generation is deterministic per config") {
    auto cfg = config_from(kBaseConfig + "plant.late_submission = 3\nbaseline_months = 1\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims_a, gt_a] = generate_claims(cfg, epidemic);
    auto [claims_b, gt_b] = generate_claims(cfg, epidemic);

    std::ostringstream a, b;
    write_claims_csv(a, claims_a);
    write_claims_csv(b, claims_b);
    CHECK(a.str() == b.str());

    std::ostringstream gta, gtb;
    write_ground_truth_csv(gta, gt_a);
    write_ground_truth_csv(gtb, gt_b);
    CHECK(gta.str() == gtb.str());
}

TEST_CASE("realized fraud counts equal the assigned ground truth exactly") {
    auto cfg = config_from(kBaseConfig +
                           "claims.link = linear\nclaims.link_slope = 4\n"
                           "claims.link_intercept = 0.05\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);

    for (const auto& p : gt.realized) {
        auto fraud = monthly_fraud_rate(claims, p.month);
        CHECK(fraud.fraud_claims == p.fraud_claims);
        CHECK(fraud.reported_claims == p.reported_claims);
        CHECK(std::int64_t(gt.fraud_ids_by_month.at(p.month.str()).size()) == p.fraud_claims);
        // exact count: round(link * n)
        double expected_fraction = 4.0 * p.covid_rate + 0.05;
        CHECK(p.fraud_claims ==
              std::llround(std::clamp(expected_fraction, 0.0, 1.0) * double(p.reported_claims)));
    }
}

TEST_CASE("zero-slope linear link realizes the base fraud fraction") {
    auto cfg = config_from(kBaseConfig + "claims.link = linear\nclaims.link_slope = 0\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);
    for (const auto& p : gt.realized) {
        CHECK(p.fraud_claims == std::llround(0.08 * 400));
        CHECK(p.fraud_rate == doctest::Approx(0.08).epsilon(0.01));
    }
}

TEST_CASE("sampled labels stay near the link value") {
    auto cfg = config_from(kBaseConfig +
                           "claims.link = linear\nclaims.link_slope = 0\n"
                           "claims.sample_labels = true\nclaims.per_month = 2000\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);
    for (const auto& p : gt.realized) {
        CHECK(p.fraud_rate > 0.05);
        CHECK(p.fraud_rate < 0.11);  // binomial noise around 0.08
    }
}

TEST_CASE("planted late submissions appear exactly as recorded") {
    auto cfg = config_from(kBaseConfig + "baseline_months = 1\nplant.late_submission = 3\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);

    // count claims whose discharge-to-raised gap exceeds 15 days in May
    std::set<std::string> violating;
    for (const auto& c : claims) {
        if (YearMonth::of(c.claim_reported_date) != YearMonth{2020, 5}) continue;
        if (c.discharge_date && c.claim_raised_date &&
            days_between(*c.discharge_date, *c.claim_raised_date) > 15)
            violating.insert(c.claim_id);
    }
    std::set<std::string> expected;
    for (const auto& id : gt.planted_by_rule.at("late_submission"))
        if (id.find("C202005") == 0) expected.insert(id);
    CHECK(expected.size() == 3);
    CHECK(violating == expected);
}

TEST_CASE("trigger engine flags exactly the planted set when anomalies are zeroed") {
    std::string cfg_text =
        "seed = 7\nregion = r\npopulation = 3000000\n"
        "from = 2019-08\nto = 2020-08\nbaseline_months = 7\n"
        "epidemic.kind = exponential\nepidemic.initial = 10\nepidemic.rate = 2\n"
        "claims.per_month = 150\nclaims.base_fraud = 0.08\n";
    for (const auto& rule : plantable_rules()) cfg_text += "plant." + rule + " = 5\n";
    auto cfg = config_from(cfg_text);
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);

    auto rules = builtin_rules();
    auto ctx = build_context(claims, cfg.effective_eval_date(), cfg.from, cfg.baseline_to());
    auto hits = evaluate_rules(rules, claims, ctx);

    std::set<std::string> expected;
    for (const auto& [rule, ids] : gt.planted_by_rule)
        for (const auto& id : ids) expected.insert(id);
    std::set<std::string> flagged;
    for (const auto& h : hits) flagged.insert(h.claim_id);
    CHECK(flagged == expected);

    // per-rule: hits for each rule cover exactly the claims planted for it
    std::map<std::string, std::set<std::string>> by_rule;
    for (const auto& h : hits) by_rule[h.rule_id].insert(h.claim_id);
    for (const auto& [rule, ids] : gt.planted_by_rule) {
        std::set<std::string> want(ids.begin(), ids.end());
        CHECK(by_rule[rule] == want);
    }
}

TEST_CASE("natural anomalies make the flagged set a superset of the planted set") {
    std::string cfg_text =
        "seed = 9\nregion = r\npopulation = 3000000\n"
        "from = 2019-08\nto = 2020-04\nbaseline_months = 7\n"
        "epidemic.kind = exponential\nepidemic.initial = 10\nepidemic.rate = 2\n"
        "claims.per_month = 200\nclaims.base_fraud = 0.08\n"
        "claims.natural_anomaly_rate = 0.05\n"
        "plant.late_submission = 4\nplant.long_stay = 4\n";
    auto cfg = config_from(cfg_text);
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);

    auto rules = builtin_rules();
    auto ctx = build_context(claims, cfg.effective_eval_date(), cfg.from, cfg.baseline_to());
    auto hits = evaluate_rules(rules, claims, ctx);
    std::set<std::string> flagged;
    for (const auto& h : hits) flagged.insert(h.claim_id);

    std::set<std::string> planted;
    for (const auto& [rule, ids] : gt.planted_by_rule)
        for (const auto& id : ids) planted.insert(id);
    for (const auto& id : planted) CHECK(flagged.count(id) == 1);
    CHECK(flagged.size() > planted.size());  // anomalies add genuine extra hits
}

TEST_CASE("logarithmic link parameters are recovered by refitting") {
    auto cfg = config_from(
        "seed = 21\nregion = r\npopulation = 3000000\n"
        "from = 2020-03\nto = 2020-08\n"
        "epidemic.kind = exponential\nepidemic.initial = 12\nepidemic.rate = 2.5\n"
        "claims.per_month = 5000\nclaims.base_fraud = 0.08\n"
        "claims.link = logarithmic\nclaims.link_slope = 0.0118\n"
        "claims.link_intercept = 0.1832\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);

    std::vector<double> x, y;
    for (const auto& p : gt.realized) {
        x.push_back(p.covid_rate);
        y.push_back(p.fraud_rate);
    }
    auto fit = fit_logarithmic(x, y);
    CHECK(std::fabs(fit.slope - 0.0118) <= 0.15 * 0.0118);
    CHECK(pearson(x, y) > 0.0);
}

TEST_CASE("positive linear link yields positive correlation") {
    auto cfg = config_from(kBaseConfig + "claims.link = linear\nclaims.link_slope = 10\n");
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);
    std::vector<double> x, y;
    for (const auto& p : gt.realized) {
        x.push_back(p.covid_rate);
        y.push_back(p.fraud_rate);
    }
    CHECK(pearson(x, y) > 0.0);
}

TEST_CASE("generated corpus parses back through the claims loader") {
    auto cfg = config_from(kBaseConfig);
    auto epidemic = generate_epidemic(cfg);
    auto [claims, gt] = generate_claims(cfg, epidemic);

    std::ostringstream out;
    write_claims_csv(out, claims);
    std::istringstream in(out.str());
    auto result = parse_claims_csv(in);
    CHECK(result.records.size() == claims.size());
    for (const auto& i : result.issues) CHECK(i.severity != Severity::error);

    std::ostringstream cov;
    write_covid_csv(cov, epidemic);
    std::istringstream cov_in(cov.str());
    auto covid = parse_covid_csv(cov_in, "synthland");
    CHECK(covid.records.size() == epidemic.size());
    CHECK(covid.issues.empty());
}
