#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fraudkit/claims.hpp"
#include "fraudkit/errors.hpp"

namespace fraudkit {

enum class RuleCategory { fraud_abuse, process, eligibility, general };

std::string_view to_string(RuleCategory);
std::optional<RuleCategory> parse_category(std::string_view);

enum class ValueKind { boolean, number, string, date, duration };

enum class ExprType {
    logical_and,
    logical_or,
    logical_not,
    compare,
    field,
    number_lit,
    string_lit,
    date_lit,
    duration_lit,
    call,
};

enum class CmpOp { lt, le, gt, ge, eq, ne };

/// One node of a parsed, type-checked rule expression.
struct RuleExpr {
    ExprType type;
    CmpOp cmp = CmpOp::eq;
    std::string text;  // field name, function name, or string payload
    double number = 0;
    Date date;
    std::int64_t duration_days = 0;
    std::vector<std::unique_ptr<RuleExpr>> children;
    int line = 0, col = 0;
    ValueKind kind = ValueKind::boolean;

    std::unique_ptr<RuleExpr> clone() const;
};

/// Structural equality, ignoring source positions.
bool ast_equal(const RuleExpr& a, const RuleExpr& b);

struct TriggerRule {
    std::string id;
    RuleCategory category = RuleCategory::general;
    std::string description;
    std::unique_ptr<RuleExpr> expr;

    /// True for catalog placeholders that only reference data outside the
    /// claims schema (they parse and type-check but always evaluate false).
    bool needs_external_data() const;

    TriggerRule clone() const;
};

/// Syntax or type error with source position.
class RuleParseError : public DataError {
public:
    RuleParseError(int line, int col, const std::string& msg);
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_, col_;
};

/// Parses exactly one rule statement:
///   rule <id> category <category>: <expr>
TriggerRule parse_rule(std::string_view text);

/// Parses a rule file (multiple statements, '#' line comments); rejects
/// duplicate rule ids.
std::vector<TriggerRule> parse_rules(std::string_view text);

/// Canonical text for a rule; parse_rule(render_rule(r)) is AST-equal to r.
std::string render_rule(const TriggerRule& rule);

/// Threshold knobs for the builtin catalog, with the published defaults.
struct BuiltinThresholds {
    int late_submission_days = 15;
    int late_documents_days = 15;
    int rejected_months = 3;
    int coverage_extension_days = 30;
    std::int64_t exgratia_amount = 1'000'000;
    std::int64_t high_value_amount = 500'000;
    int long_stay_days = 30;
    int provider_opinion_count = 2;  // count_same must exceed this
};

std::vector<TriggerRule> builtin_rules(const BuiltinThresholds& t = {});

struct TriggerHit {
    std::string claim_id;
    std::string rule_id;
    std::string detail;

    friend bool operator==(const TriggerHit&, const TriggerHit&) = default;
};

struct ProcBaseline {
    double mean = 0;
    double sd = 0;
};

/// Immutable evaluation context: cross-claim indexes plus the per-procedure
/// monthly-count baseline. Group indexes for additional field combinations
/// are added by evaluate_rules in a single-writer prepare pass.
struct RuleContext {
    Date evaluation_date;
    double utilization_k = 2.0;
    bool baseline_valid = false;
    YearMonth baseline_from, baseline_to;

    // joined-field-names -> group-key -> claim indices
    std::map<std::string, std::unordered_map<std::string, std::vector<int>>> groups;
    // procedure_code -> baseline stats over the window's monthly counts
    std::unordered_map<std::string, ProcBaseline> utilization_baseline;
    // procedure_code|month -> count over the whole claim set
    std::unordered_map<std::string, std::int64_t> monthly_procedure_counts;
};

/// Builds indexes and the utilization baseline (per-procedure mean and
/// standard deviation of monthly claim counts over [baseline_from,
/// baseline_to]). An empty window (from > to) leaves the baseline invalid;
/// rules using utilization_excess then fail at evaluation, others are
/// unaffected.
RuleContext build_context(const std::vector<ClaimRecord>& claims, Date evaluation_date,
                          YearMonth baseline_from, YearMonth baseline_to,
                          double utilization_k = 2.0);

/// Evaluates every rule against every claim; one hit per (claim, rule) whose
/// expression is true. Missing-field comparisons are unknown and collapse to
/// false at the rule root. Hits are sorted by (claim_id, rule_id).
/// `claims` must be the list the context was built from.
std::vector<TriggerHit> evaluate_rules(const std::vector<TriggerRule>& rules,
                                       const std::vector<ClaimRecord>& claims,
                                       RuleContext& ctx);

/// claim_id -> contributing rule ids (empty = unflagged); covers every
/// claim. Throws DataError if a hit references an unknown claim_id.
std::map<std::string, std::vector<std::string>> flag_claims(
    const std::vector<TriggerHit>& hits, const std::vector<ClaimRecord>& claims);

/// Hits CSV: claim_id, rule_id, category, detail.
void write_hits_csv(std::ostream& out, const std::vector<TriggerHit>& hits,
                    const std::vector<TriggerRule>& rules);

}  // namespace fraudkit
