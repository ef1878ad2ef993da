#include "fraudkit/triggers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "fraudkit/csv.hpp"
#include "fraudkit/textutil.hpp"

namespace fraudkit {

std::string_view to_string(RuleCategory c) {
    switch (c) {
        case RuleCategory::fraud_abuse: return "fraud_abuse";
        case RuleCategory::process: return "process";
        case RuleCategory::eligibility: return "eligibility";
        default: return "general";
    }
}

std::optional<RuleCategory> parse_category(std::string_view s) {
    if (s == "fraud_abuse") return RuleCategory::fraud_abuse;
    if (s == "process") return RuleCategory::process;
    if (s == "eligibility") return RuleCategory::eligibility;
    if (s == "general") return RuleCategory::general;
    return std::nullopt;
}

RuleParseError::RuleParseError(int line, int col, const std::string& msg)
    : DataError("line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + msg),
      line_(line),
      col_(col) {}

std::unique_ptr<RuleExpr> RuleExpr::clone() const {
    auto out = std::make_unique<RuleExpr>();
    out->type = type;
    out->cmp = cmp;
    out->text = text;
    out->number = number;
    out->date = date;
    out->duration_days = duration_days;
    out->line = line;
    out->col = col;
    out->kind = kind;
    for (const auto& c : children) out->children.push_back(c->clone());
    return out;
}

bool ast_equal(const RuleExpr& a, const RuleExpr& b) {
    if (a.type != b.type || a.kind != b.kind) return false;
    if (a.type == ExprType::compare && a.cmp != b.cmp) return false;
    if (a.text != b.text || a.number != b.number || a.duration_days != b.duration_days)
        return false;
    if (a.type == ExprType::date_lit && a.date != b.date) return false;
    if (a.children.size() != b.children.size()) return false;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (!ast_equal(*a.children[i], *b.children[i])) return false;
    return true;
}

TriggerRule TriggerRule::clone() const {
    TriggerRule out;
    out.id = id;
    out.category = category;
    out.description = description;
    out.expr = expr ? expr->clone() : nullptr;
    return out;
}

namespace {

bool contains_call(const RuleExpr& e, std::string_view fn) {
    if (e.type == ExprType::call && e.text == fn) return true;
    for (const auto& c : e.children)
        if (contains_call(*c, fn)) return true;
    return false;
}

}  // namespace

bool TriggerRule::needs_external_data() const {
    return expr && contains_call(*expr, "external_data");
}

// ---------------------------------------------------------------------------
// Field and function tables
// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, ValueKind, std::less<>>& field_kinds() {
    static const std::map<std::string, ValueKind, std::less<>> kinds = {
        {"policy_number", ValueKind::string},
        {"insured_id", ValueKind::string},
        {"claim_id", ValueKind::string},
        {"benefit_type", ValueKind::string},
        {"claim_status", ValueKind::string},
        {"treatment_start", ValueKind::date},
        {"treatment_end", ValueKind::date},
        {"claim_settlement_date", ValueKind::date},
        {"claim_reported_date", ValueKind::date},
        {"billed_amount", ValueKind::number},
        {"approved_amount", ValueKind::number},
        {"paid_amount", ValueKind::number},
        {"provider_id", ValueKind::string},
        {"provider_name", ValueKind::string},
        {"days_stayed", ValueKind::number},
        {"diagnosis_code", ValueKind::string},
        {"diagnosis_name", ValueKind::string},
        {"procedure_code", ValueKind::string},
        {"procedure_name", ValueKind::string},
        {"net_amount", ValueKind::number},
        {"claim_paid_date", ValueKind::date},
        {"surgery_date", ValueKind::date},
        {"discharge_date", ValueKind::date},
        {"claim_raised_date", ValueKind::date},
        {"hospital_district", ValueKind::string},
        {"fraud_status", ValueKind::string},
    };
    return kinds;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class TokType { ident, number, duration, date, string, lparen, rparen, comma, colon, cmp, end };

struct Token {
    TokType type = TokType::end;
    std::string text;
    double number = 0;
    std::int64_t duration_days = 0;
    Date date;
    CmpOp cmp = CmpOp::eq;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            Token t;
            t.line = line_;
            t.col = col_;
            if (at_end()) {
                t.type = TokType::end;
                out.push_back(t);
                return out;
            }
            char c = peek();
            if (c == '(') { t.type = TokType::lparen; advance(); }
            else if (c == ')') { t.type = TokType::rparen; advance(); }
            else if (c == ',') { t.type = TokType::comma; advance(); }
            else if (c == ':') { t.type = TokType::colon; advance(); }
            else if (c == '"') { t = read_string(t); }
            else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
                t = read_number_like(t);
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.type = TokType::ident;
                while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                    t.text.push_back(take());
            } else if (c == '<' || c == '>' || c == '=' || c == '!') {
                t = read_cmp(t);
            } else {
                throw RuleParseError(line_, col_, std::string("unexpected character '") + c + "'");
            }
            out.push_back(std::move(t));
        }
    }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    bool at_end() const { return pos_ >= src_.size(); }
    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    char take() {
        char c = src_[pos_++];
        if (c == '\n') { ++line_; col_ = 1; } else { ++col_; }
        return c;
    }
    void advance() { take(); }

    void skip_space_and_comments() {
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) { advance(); continue; }
            if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
                continue;
            }
            break;
        }
    }

    Token read_string(Token t) {
        advance();  // opening quote
        t.type = TokType::string;
        while (true) {
            if (at_end()) throw RuleParseError(t.line, t.col, "unterminated string literal");
            char c = take();
            if (c == '"') break;
            t.text.push_back(c);
        }
        return t;
    }

    Token read_cmp(Token t) {
        t.type = TokType::cmp;
        char c = take();
        bool eq = peek() == '=';
        if (c == '<') t.cmp = eq ? CmpOp::le : CmpOp::lt;
        else if (c == '>') t.cmp = eq ? CmpOp::ge : CmpOp::gt;
        else if (c == '=' && eq) t.cmp = CmpOp::eq;
        else if (c == '!' && eq) t.cmp = CmpOp::ne;
        else throw RuleParseError(t.line, t.col, std::string("unexpected character '") + c + "'");
        if (eq) advance();
        return t;
    }

    // number, duration (15d / 3mo), or ISO date (2020-05-01)
    Token read_number_like(Token t) {
        std::string digits;
        bool neg = false;
        if (peek() == '-' || peek() == '+') {
            neg = peek() == '-';
            digits.push_back(take());
        }
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
            digits.push_back(take());
        // date literal: yyyy-mm-dd
        if (!neg && digits.size() == 4 && peek() == '-' &&
            std::isdigit(static_cast<unsigned char>(peek(1)))) {
            std::string text = digits;
            for (int i = 0; i < 6 && !at_end(); ++i) text.push_back(take());
            auto d = Date::parse(text);
            if (!d) throw RuleParseError(t.line, t.col, "invalid date literal '" + text + "'");
            t.type = TokType::date;
            t.date = *d;
            return t;
        }
        if (peek() == '.') {
            digits.push_back(take());
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
                digits.push_back(take());
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') &&
              std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            digits.push_back(take());
            if (peek() == '+' || peek() == '-') digits.push_back(take());
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
                digits.push_back(take());
        }
        if (digits.empty() || digits == "-" || digits == "+")
            throw RuleParseError(t.line, t.col, "malformed number");
        double value = 0;
        try {
            size_t used = 0;
            value = std::stod(digits, &used);
            if (used != digits.size()) throw std::invalid_argument(digits);
        } catch (const std::exception&) {
            throw RuleParseError(t.line, t.col, "malformed number '" + digits + "'");
        }
        // duration suffix
        if (peek() == 'd' || peek() == 'm') {
            if (peek() == 'd' && !std::isalnum(static_cast<unsigned char>(peek(1)))) {
                advance();
                t.type = TokType::duration;
                t.duration_days = std::int64_t(std::llround(value));
                return t;
            }
            if (peek() == 'm' && peek(1) == 'o' &&
                !std::isalnum(static_cast<unsigned char>(peek(2)))) {
                advance();
                advance();
                t.type = TokType::duration;
                t.duration_days = std::int64_t(std::llround(value * 30));  // 1mo = 30d
                return t;
            }
        }
        if (std::isalpha(static_cast<unsigned char>(peek())))
            throw RuleParseError(t.line, t.col, "unknown unit after number");
        t.type = TokType::number;
        t.number = value;
        return t;
    }
};

// ---------------------------------------------------------------------------
// Parser + type checker
// ---------------------------------------------------------------------------

using ExprPtr = std::unique_ptr<RuleExpr>;

struct FnSignature {
    // argument checking is custom per function; result kind fixed
    ValueKind result;
    int min_args;
    int max_args;  // -1 = unbounded
};

const std::map<std::string, FnSignature, std::less<>>& fn_signatures() {
    static const std::map<std::string, FnSignature, std::less<>> fns = {
        {"days_between", {ValueKind::duration, 2, 2}},
        {"duration_in_status", {ValueKind::duration, 1, 1}},
        {"duplicate_exists", {ValueKind::boolean, 1, -1}},
        {"count_same", {ValueKind::number, 1, -1}},
        {"utilization_excess", {ValueKind::boolean, 1, 1}},
        {"is_missing", {ValueKind::boolean, 1, 1}},
        {"external_data", {ValueKind::boolean, 1, 1}},
    };
    return fns;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    std::vector<TriggerRule> parse_all() {
        std::vector<TriggerRule> rules;
        while (cur().type != TokType::end) rules.push_back(parse_one());
        return rules;
    }

private:
    std::vector<Token> toks_;
    size_t i_ = 0;

    const Token& cur() const { return toks_[i_]; }
    const Token& next() { return toks_[i_++]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) {
        if (t.type == TokType::end && toks_.size() > 1) {
            const Token& last = toks_[toks_.size() - 2];
            throw RuleParseError(last.line, last.col, "unexpected end of input: " + msg);
        }
        throw RuleParseError(t.line, t.col, msg);
    }

    void expect_ident(std::string_view word) {
        const Token& t = next();
        if (t.type != TokType::ident || t.text != word)
            fail(t, "expected '" + std::string(word) + "'");
    }

    TriggerRule parse_one() {
        expect_ident("rule");
        const Token& id_tok = next();
        if (id_tok.type != TokType::ident) fail(id_tok, "expected rule id");
        expect_ident("category");
        const Token& cat_tok = next();
        if (cat_tok.type != TokType::ident) fail(cat_tok, "expected category name");
        auto cat = parse_category(cat_tok.text);
        if (!cat)
            fail(cat_tok, "unknown category '" + cat_tok.text +
                              "' (expected fraud_abuse, process, eligibility, or general)");
        if (cur().type != TokType::colon) fail(cur(), "expected ':'");
        next();

        TriggerRule rule;
        rule.id = id_tok.text;
        rule.category = *cat;
        rule.expr = parse_or();
        if (rule.expr->kind != ValueKind::boolean)
            fail(*exprTok(rule.expr.get()), "rule expression must be boolean");
        return rule;
    }

    const Token* exprTok(const RuleExpr* e) {
        static Token t;
        t.line = e->line;
        t.col = e->col;
        return &t;
    }

    ExprPtr make(ExprType type, const Token& t) {
        auto e = std::make_unique<RuleExpr>();
        e->type = type;
        e->line = t.line;
        e->col = t.col;
        return e;
    }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (cur().type == TokType::ident && cur().text == "or") {
            const Token& op = next();
            auto rhs = parse_and();
            require_bool(*lhs, op);
            require_bool(*rhs, op);
            auto e = make(ExprType::logical_or, op);
            e->kind = ValueKind::boolean;
            e->children.push_back(std::move(lhs));
            e->children.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_unary();
        while (cur().type == TokType::ident && cur().text == "and") {
            const Token& op = next();
            auto rhs = parse_unary();
            require_bool(*lhs, op);
            require_bool(*rhs, op);
            auto e = make(ExprType::logical_and, op);
            e->kind = ValueKind::boolean;
            e->children.push_back(std::move(lhs));
            e->children.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (cur().type == TokType::ident && cur().text == "not") {
            const Token& op = next();
            auto inner = parse_unary();
            require_bool(*inner, op);
            auto e = make(ExprType::logical_not, op);
            e->kind = ValueKind::boolean;
            e->children.push_back(std::move(inner));
            return e;
        }
        return parse_comparison();
    }

    void require_bool(const RuleExpr& e, const Token& at) {
        if (e.kind != ValueKind::boolean)
            throw RuleParseError(at.line, at.col, "operand of and/or/not must be boolean");
    }

    ExprPtr parse_comparison() {
        auto lhs = parse_primary();
        if (cur().type != TokType::cmp) return lhs;
        const Token& op = next();
        auto rhs = parse_primary();
        if (lhs->kind == ValueKind::boolean || rhs->kind == ValueKind::boolean)
            fail(op, "cannot compare boolean expressions");
        if (lhs->kind != rhs->kind)
            fail(op, std::string("type mismatch: cannot compare ") + kind_name(lhs->kind) +
                         " to " + kind_name(rhs->kind));
        if (lhs->kind == ValueKind::string && op.cmp != CmpOp::eq && op.cmp != CmpOp::ne)
            fail(op, "strings support only == and !=");
        auto e = make(ExprType::compare, op);
        e->cmp = op.cmp;
        e->kind = ValueKind::boolean;
        e->children.push_back(std::move(lhs));
        e->children.push_back(std::move(rhs));
        return e;
    }

    static const char* kind_name(ValueKind k) {
        switch (k) {
            case ValueKind::boolean: return "boolean";
            case ValueKind::number: return "number";
            case ValueKind::string: return "string";
            case ValueKind::date: return "date";
            case ValueKind::duration: return "duration";
        }
        return "?";
    }

    ExprPtr parse_primary() {
        const Token& t = cur();
        switch (t.type) {
            case TokType::lparen: {
                next();
                auto e = parse_or();
                if (cur().type != TokType::rparen) fail(cur(), "expected ')'");
                next();
                return e;
            }
            case TokType::number: {
                next();
                auto e = make(ExprType::number_lit, t);
                e->number = t.number;
                e->kind = ValueKind::number;
                return e;
            }
            case TokType::duration: {
                next();
                auto e = make(ExprType::duration_lit, t);
                e->duration_days = t.duration_days;
                e->kind = ValueKind::duration;
                return e;
            }
            case TokType::date: {
                next();
                auto e = make(ExprType::date_lit, t);
                e->date = t.date;
                e->kind = ValueKind::date;
                return e;
            }
            case TokType::string: {
                next();
                auto e = make(ExprType::string_lit, t);
                e->text = t.text;
                e->kind = ValueKind::string;
                return e;
            }
            case TokType::ident:
                if (toks_[i_ + 1].type == TokType::lparen) return parse_call();
                return parse_field();
            default:
                fail(t, "expected an expression");
        }
    }

    ExprPtr parse_field() {
        const Token& t = next();
        auto it = field_kinds().find(t.text);
        if (it == field_kinds().end()) fail(t, "unknown field '" + t.text + "'");
        auto e = make(ExprType::field, t);
        e->text = t.text;
        e->kind = it->second;
        return e;
    }

    ExprPtr parse_call() {
        const Token& name = next();
        auto sig = fn_signatures().find(name.text);
        if (sig == fn_signatures().end()) fail(name, "unknown function '" + name.text + "'");
        next();  // lparen
        auto e = make(ExprType::call, name);
        e->text = name.text;
        e->kind = sig->second.result;
        if (cur().type != TokType::rparen) {
            while (true) {
                e->children.push_back(parse_primary());
                if (cur().type == TokType::comma) {
                    next();
                    continue;
                }
                break;
            }
        }
        if (cur().type != TokType::rparen) fail(cur(), "expected ')' after arguments");
        next();
        check_call(*e, name, sig->second);
        return e;
    }

    void check_call(const RuleExpr& e, const Token& at, const FnSignature& sig) {
        int n = int(e.children.size());
        if (n < sig.min_args || (sig.max_args >= 0 && n > sig.max_args)) {
            std::string arity = sig.max_args < 0
                                    ? "at least " + std::to_string(sig.min_args)
                                    : sig.min_args == sig.max_args
                                          ? std::to_string(sig.min_args)
                                          : std::to_string(sig.min_args) + ".." +
                                                std::to_string(sig.max_args);
            fail(at, e.text + " expects " + arity + " argument(s), got " + std::to_string(n));
        }
        auto arg_is = [&](int i, ExprType t) { return e.children[i]->type == t; };
        if (e.text == "days_between") {
            for (int i = 0; i < 2; ++i)
                if (e.children[i]->kind != ValueKind::date)
                    fail(at, "days_between arguments must be dates");
        } else if (e.text == "duration_in_status" || e.text == "external_data") {
            if (!arg_is(0, ExprType::string_lit))
                fail(at, e.text + " expects a quoted string argument");
        } else if (e.text == "duplicate_exists" || e.text == "count_same") {
            for (const auto& c : e.children)
                if (c->type != ExprType::field)
                    fail(at, e.text + " arguments must be field names");
        } else if (e.text == "utilization_excess") {
            if (!arg_is(0, ExprType::field) || e.children[0]->kind != ValueKind::string)
                fail(at, "utilization_excess expects a string field name");
        } else if (e.text == "is_missing") {
            if (!arg_is(0, ExprType::field)) fail(at, "is_missing expects a field name");
        }
    }
};

}  // namespace

TriggerRule parse_rule(std::string_view text) {
    Parser parser(Lexer(text).run());
    auto rules = parser.parse_all();
    if (rules.size() != 1)
        throw RuleParseError(1, 1, "expected exactly one rule, got " +
                                        std::to_string(rules.size()));
    return std::move(rules.front());
}

std::vector<TriggerRule> parse_rules(std::string_view text) {
    Parser parser(Lexer(text).run());
    auto rules = parser.parse_all();
    std::set<std::string> ids;
    for (const auto& r : rules)
        if (!ids.insert(r.id).second)
            throw RuleParseError(r.expr->line, r.expr->col, "duplicate rule id '" + r.id + "'");
    return rules;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string render_number(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    // shortest fixed form that round-trips (the grammar has no exponents)
    for (int prec = 1; prec <= 40; ++prec) {
        char attempt[64];
        std::snprintf(attempt, sizeof(attempt), "%.*f", prec, v);
        if (std::stod(attempt) == v) return attempt;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.40f", v);
    return buf;
}

void render_expr(const RuleExpr& e, std::string& out) {
    switch (e.type) {
        case ExprType::logical_and:
        case ExprType::logical_or:
            out.push_back('(');
            render_expr(*e.children[0], out);
            out += e.type == ExprType::logical_and ? " and " : " or ";
            render_expr(*e.children[1], out);
            out.push_back(')');
            break;
        case ExprType::logical_not:
            out += "not (";
            render_expr(*e.children[0], out);
            out.push_back(')');
            break;
        case ExprType::compare: {
            static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
            render_expr(*e.children[0], out);
            out.push_back(' ');
            out += ops[int(e.cmp)];
            out.push_back(' ');
            render_expr(*e.children[1], out);
            break;
        }
        case ExprType::field:
            out += e.text;
            break;
        case ExprType::number_lit:
            out += render_number(e.number);
            break;
        case ExprType::string_lit:
            out.push_back('"');
            out += e.text;
            out.push_back('"');
            break;
        case ExprType::date_lit:
            out += e.date.str();
            break;
        case ExprType::duration_lit:
            out += std::to_string(e.duration_days) + "d";
            break;
        case ExprType::call:
            out += e.text;
            out.push_back('(');
            for (size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += ", ";
                render_expr(*e.children[i], out);
            }
            out.push_back(')');
            break;
    }
}

}  // namespace

std::string render_rule(const TriggerRule& rule) {
    std::string out = "rule " + rule.id + " category " + std::string(to_string(rule.category)) + ": ";
    render_expr(*rule.expr, out);
    return out;
}

// ---------------------------------------------------------------------------
// Builtin catalog
// ---------------------------------------------------------------------------

std::vector<TriggerRule> builtin_rules(const BuiltinThresholds& t) {
    struct CatalogEntry {
        const char* id;
        const char* category;
        std::string expr;
        const char* description;
    };
    auto days = [](int n) { return std::to_string(n) + "d"; };
    const std::vector<CatalogEntry> catalog = {
        // Established (pre-pandemic) catalog
        {"long_stay", "general", "days_stayed > " + std::to_string(t.long_stay_days),
         "Abnormally long hospital stay for a single claim."},
        {"multiple_providers", "general",
         "count_same(insured_id, diagnosis_code) > " + std::to_string(t.provider_opinion_count),
         "Multiple provider opinions: several claims by one insured for the same diagnosis."},
        {"unsigned_application", "general", "external_data(\"application signature and date\")",
         "Applicant fails to sign and date the application; requires external data (manual review)."},
        {"fake_test_reports", "general", "external_data(\"test report verification\")",
         "Submitted test reports look fake; requires external data (manual review)."},
        {"tampered_document", "general", "external_data(\"document image review\")",
         "Visible tampering of documents; requires external data (manual review)."},
        {"handwritten_bills", "general", "external_data(\"bill format review\")",
         "Hand-written bills; requires external data (manual review)."},
        {"high_value_bill", "general", "billed_amount > " + std::to_string(t.high_value_amount),
         "High value bill (very high fee). Threshold is a configurable default."},
        // Pandemic-era additions
        {"coverage_extension", "general",
         "days_between(treatment_start, treatment_end) > " + days(t.coverage_extension_days),
         "Coverage/treatment period extended beyond the threshold (default 30 days)."},
        {"auto_renewal_request", "general", "external_data(\"renewal request records\")",
         "Automatic renewal requested; requires external data (manual review)."},
        {"exgratia_threshold", "general", "net_amount > " + std::to_string(t.exgratia_amount),
         "One-off/ex-gratia payment above 10 lakhs (1,000,000 currency units)."},
        {"premium_reduction", "general", "external_data(\"premium history\")",
         "Minimum/deposit premium reduced by more than 5% year over year; requires external data."},
        {"policy_count_decline", "general", "external_data(\"policy count history\")",
         "Policy count declined by more than 10% in the recent 3 months; requires external data."},
        {"portfolio_isolation", "general", "external_data(\"line-of-business portfolio split\")",
         "No separation of pandemic-affected lines in the portfolio; requires external data."},
        // Fraud & abuse related
        {"duplicate_package", "fraud_abuse", "duplicate_exists(insured_id, procedure_code)",
         "Package already taken by the same insured under a different claim ID."},
        {"stale_reject", "fraud_abuse",
         "duration_in_status(\"rejected\") > " + days(t.rejected_months * 30),
         "Claim stayed in rejected status for more than 3 months."},
        {"suspicious_package", "fraud_abuse", "external_data(\"package suspicion list\")",
         "Suspicious-looking packages in the pandemic environment; requires external data."},
        {"utilization_spike", "fraud_abuse", "utilization_excess(procedure_code)",
         "Highly utilized package used even more than its baseline; the excess is treated as fraud."},
        // Process related
        {"late_submission", "process",
         "days_between(discharge_date, claim_raised_date) > " + days(t.late_submission_days),
         "Claim submitted more than 15 days after discharge."},
        {"late_documents", "process",
         "days_between(discharge_date, claim_reported_date) > " + days(t.late_documents_days),
         "Discharge documents submitted more than 15 days after discharge."},
        {"procedure_not_performed", "process", "external_data(\"clinical adjudication\")",
         "Billed procedure was not performed; requires external data (manual review)."},
        // Eligibility related
        {"wrong_package_blocked", "eligibility", "external_data(\"package blocking adjudication\")",
         "Wrong package blocked; requires external data (manual review)."},
        {"oral_medication", "eligibility", "external_data(\"payability adjudication\")",
         "Oral medication not payable; requires external data (manual review)."},
        {"missing_referral_stamp", "eligibility", "external_data(\"referral slip image\")",
         "District hospital sign/stamp missing from the referral slip; requires external data."},
    };

    std::vector<TriggerRule> rules;
    for (const auto& s : catalog) {
        TriggerRule r = parse_rule("rule " + std::string(s.id) + " category " + s.category +
                                   ": " + s.expr);
        r.description = s.description;
        rules.push_back(std::move(r));
    }
    return rules;
}

// ---------------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------------

namespace {

std::string field_list_key(const std::vector<std::string>& fields) {
    std::string key;
    for (const auto& f : fields) {
        key += f;
        key.push_back('|');
    }
    return key;
}

std::string field_as_string(const ClaimRecord& c, const std::string& field) {
    auto it = field_kinds().find(field);
    if (it == field_kinds().end()) return {};
    switch (it->second) {
        case ValueKind::string: {
            if (field == "claim_id") return c.claim_id;
            if (field == "fraud_status") return std::string(to_string(c.fraud_status));
            if (field == "policy_number") return c.policy_number;
            if (field == "insured_id") return c.insured_id;
            if (field == "benefit_type") return std::string(to_string(c.benefit_type));
            if (field == "claim_status") return c.claim_status;
            if (field == "provider_id") return c.provider_id;
            if (field == "provider_name") return c.provider_name;
            if (field == "diagnosis_code") return c.diagnosis_code;
            if (field == "diagnosis_name") return c.diagnosis_name;
            if (field == "procedure_code") return c.procedure_code;
            if (field == "procedure_name") return c.procedure_name;
            if (field == "hospital_district") return c.hospital_district;
            return {};
        }
        case ValueKind::number: {
            if (field == "billed_amount") return c.billed_amount.str();
            if (field == "approved_amount") return c.approved_amount ? c.approved_amount->str() : "";
            if (field == "paid_amount") return c.paid_amount ? c.paid_amount->str() : "";
            if (field == "net_amount") return c.net_amount ? c.net_amount->str() : "";
            if (field == "days_stayed") return std::to_string(c.days_stayed);
            return {};
        }
        case ValueKind::date: {
            if (field == "claim_reported_date") return c.claim_reported_date.str();
            const std::optional<Date>* d = nullptr;
            if (field == "treatment_start") d = &c.treatment_start;
            else if (field == "treatment_end") d = &c.treatment_end;
            else if (field == "claim_settlement_date") d = &c.claim_settlement_date;
            else if (field == "claim_paid_date") d = &c.claim_paid_date;
            else if (field == "surgery_date") d = &c.surgery_date;
            else if (field == "discharge_date") d = &c.discharge_date;
            else if (field == "claim_raised_date") d = &c.claim_raised_date;
            return d && *d ? (**d).str() : "";
        }
        default:
            return {};
    }
}

std::string group_key_for(const ClaimRecord& c, const std::vector<std::string>& fields) {
    std::string key;
    for (const auto& f : fields) {
        key += field_as_string(c, f);
        key.push_back('\x1f');
    }
    return key;
}

void build_group(RuleContext& ctx, const std::vector<ClaimRecord>& claims,
                 const std::vector<std::string>& fields) {
    std::string list_key = field_list_key(fields);
    if (ctx.groups.count(list_key)) return;
    auto& group = ctx.groups[list_key];
    for (int i = 0; i < int(claims.size()); ++i)
        group[group_key_for(claims[i], fields)].push_back(i);
}

std::string proc_month_key(const std::string& code, YearMonth ym) {
    return code + "|" + ym.str();
}

}  // namespace

RuleContext build_context(const std::vector<ClaimRecord>& claims, Date evaluation_date,
                          YearMonth baseline_from, YearMonth baseline_to, double utilization_k) {
    RuleContext ctx;
    ctx.evaluation_date = evaluation_date;
    ctx.utilization_k = utilization_k;
    ctx.baseline_from = baseline_from;
    ctx.baseline_to = baseline_to;

    build_group(ctx, claims, {"insured_id"});
    build_group(ctx, claims, {"procedure_code"});
    build_group(ctx, claims, {"insured_id", "procedure_code"});

    for (const auto& c : claims)
        if (!c.procedure_code.empty())
            ctx.monthly_procedure_counts[proc_month_key(
                c.procedure_code, YearMonth::of(c.claim_reported_date))]++;

    if (baseline_from <= baseline_to) {
        ctx.baseline_valid = true;
        int n_months = baseline_to.index() - baseline_from.index() + 1;
        std::set<std::string> procedures;
        for (const auto& c : claims)
            if (!c.procedure_code.empty() &&
                YearMonth::of(c.claim_reported_date) >= baseline_from &&
                YearMonth::of(c.claim_reported_date) <= baseline_to)
                procedures.insert(c.procedure_code);
        for (const auto& code : procedures) {
            double sum = 0, sum_sq = 0;
            for (int m = baseline_from.index(); m <= baseline_to.index(); ++m) {
                auto it = ctx.monthly_procedure_counts.find(
                    proc_month_key(code, YearMonth::from_index(m)));
                double cnt = it == ctx.monthly_procedure_counts.end() ? 0.0 : double(it->second);
                sum += cnt;
                sum_sq += cnt * cnt;
            }
            double mean = sum / n_months;
            double var = sum_sq / n_months - mean * mean;
            ctx.utilization_baseline[code] = {mean, std::sqrt(std::max(var, 0.0))};
        }
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

enum class Tri { no, yes, unknown };

Tri tri_and(Tri a, Tri b) {
    if (a == Tri::no || b == Tri::no) return Tri::no;
    if (a == Tri::yes && b == Tri::yes) return Tri::yes;
    return Tri::unknown;
}

Tri tri_or(Tri a, Tri b) {
    if (a == Tri::yes || b == Tri::yes) return Tri::yes;
    if (a == Tri::no && b == Tri::no) return Tri::no;
    return Tri::unknown;
}

Tri tri_not(Tri a) {
    if (a == Tri::unknown) return Tri::unknown;
    return a == Tri::yes ? Tri::no : Tri::yes;
}

struct Value {
    ValueKind kind = ValueKind::boolean;
    bool missing = false;
    Tri tri = Tri::no;
    double num = 0;
    std::int64_t days = 0;
    std::int64_t serial = 0;
    std::string str;
};

struct Evaluator {
    const std::vector<ClaimRecord>& claims;
    RuleContext& ctx;
    int claim_index = 0;
    std::vector<std::string>* evidence = nullptr;

    const ClaimRecord& claim() const { return claims[size_t(claim_index)]; }

    void note(std::string text) {
        if (evidence) evidence->push_back(std::move(text));
    }

    Value field_value(const RuleExpr& e) {
        const ClaimRecord& c = claim();
        Value v;
        v.kind = e.kind;
        switch (e.kind) {
            case ValueKind::string: {
                v.str = field_as_string(c, e.text);
                v.missing = v.str.empty();
                break;
            }
            case ValueKind::number: {
                if (e.text == "billed_amount") v.num = c.billed_amount.value();
                else if (e.text == "days_stayed") v.num = double(c.days_stayed);
                else {
                    const std::optional<Money>* m = nullptr;
                    if (e.text == "approved_amount") m = &c.approved_amount;
                    else if (e.text == "paid_amount") m = &c.paid_amount;
                    else if (e.text == "net_amount") m = &c.net_amount;
                    if (m && *m) v.num = (**m).value();
                    else v.missing = true;
                }
                break;
            }
            case ValueKind::date: {
                std::string s = field_as_string(c, e.text);
                if (s.empty()) {
                    v.missing = true;
                } else {
                    v.serial = Date::parse(s)->serial();
                }
                break;
            }
            default:
                v.missing = true;
        }
        return v;
    }

    Value eval(const RuleExpr& e) {
        switch (e.type) {
            case ExprType::logical_and: {
                Value a = eval(*e.children[0]);
                Value b = eval(*e.children[1]);
                Value v;
                v.tri = tri_and(a.tri, b.tri);
                return v;
            }
            case ExprType::logical_or: {
                Value a = eval(*e.children[0]);
                Value b = eval(*e.children[1]);
                Value v;
                v.tri = tri_or(a.tri, b.tri);
                return v;
            }
            case ExprType::logical_not: {
                // evidence inside a negation would be inverted; suppress it
                auto* saved = evidence;
                evidence = nullptr;
                Value a = eval(*e.children[0]);
                evidence = saved;
                Value v;
                v.tri = tri_not(a.tri);
                return v;
            }
            case ExprType::compare:
                return eval_compare(e);
            case ExprType::field:
                return field_value(e);
            case ExprType::number_lit: {
                Value v;
                v.kind = ValueKind::number;
                v.num = e.number;
                return v;
            }
            case ExprType::string_lit: {
                Value v;
                v.kind = ValueKind::string;
                v.str = e.text;
                return v;
            }
            case ExprType::date_lit: {
                Value v;
                v.kind = ValueKind::date;
                v.serial = e.date.serial();
                return v;
            }
            case ExprType::duration_lit: {
                Value v;
                v.kind = ValueKind::duration;
                v.days = e.duration_days;
                return v;
            }
            case ExprType::call:
                return eval_call(e);
        }
        return {};
    }

    Value eval_compare(const RuleExpr& e) {
        Value lhs = eval(*e.children[0]);
        Value rhs = eval(*e.children[1]);
        Value v;
        if (lhs.missing || rhs.missing) {
            v.tri = Tri::unknown;
            return v;
        }
        int c = 0;
        switch (lhs.kind) {
            case ValueKind::number: c = lhs.num < rhs.num ? -1 : lhs.num > rhs.num ? 1 : 0; break;
            case ValueKind::duration:
                c = lhs.days < rhs.days ? -1 : lhs.days > rhs.days ? 1 : 0;
                break;
            case ValueKind::date:
                c = lhs.serial < rhs.serial ? -1 : lhs.serial > rhs.serial ? 1 : 0;
                break;
            case ValueKind::string: c = lhs.str.compare(rhs.str); break;
            default: break;
        }
        bool result = false;
        switch (e.cmp) {
            case CmpOp::lt: result = c < 0; break;
            case CmpOp::le: result = c <= 0; break;
            case CmpOp::gt: result = c > 0; break;
            case CmpOp::ge: result = c >= 0; break;
            case CmpOp::eq: result = c == 0; break;
            case CmpOp::ne: result = c != 0; break;
        }
        v.tri = result ? Tri::yes : Tri::no;
        if (result) note(compare_evidence(e, lhs, rhs));
        return v;
    }

    std::string compare_evidence(const RuleExpr& e, const Value& lhs, const Value& rhs) {
        if (lhs.kind == ValueKind::duration) {
            const Value& carrier = e.children[0]->type == ExprType::call ? lhs : rhs;
            return std::to_string(carrier.days) + " days";
        }
        if (e.children[0]->type == ExprType::call &&
            e.children[0]->text == "count_same")
            return std::to_string(std::int64_t(lhs.num)) + " matching claims";
        const RuleExpr* field_side = e.children[0]->type == ExprType::field ? e.children[0].get()
                                     : e.children[1]->type == ExprType::field
                                         ? e.children[1].get()
                                         : nullptr;
        if (field_side) {
            const Value& val = field_side == e.children[0].get() ? lhs : rhs;
            std::string shown;
            switch (val.kind) {
                case ValueKind::number: shown = format_sig6(val.num); break;
                case ValueKind::string: shown = val.str; break;
                case ValueKind::date: shown = Date::from_serial(val.serial).str(); break;
                default: shown = std::to_string(val.days) + "d"; break;
            }
            return field_side->text + "=" + shown;
        }
        return "condition met";
    }

    Value eval_call(const RuleExpr& e) {
        const ClaimRecord& c = claim();
        Value v;
        v.kind = e.kind;
        if (e.text == "days_between") {
            Value a = eval(*e.children[0]);
            Value b = eval(*e.children[1]);
            if (a.missing || b.missing) {
                v.missing = true;
                return v;
            }
            v.days = b.serial - a.serial;
            return v;
        }
        if (e.text == "duration_in_status") {
            if (c.claim_status != e.children[0]->text) {
                v.missing = true;  // not in that status: no defined duration
                return v;
            }
            v.days = ctx.evaluation_date.serial() - c.claim_reported_date.serial();
            return v;
        }
        if (e.text == "duplicate_exists") {
            auto fields = call_fields(e);
            if (any_field_missing(fields)) {
                v.tri = Tri::unknown;
                return v;
            }
            const auto& rows = group_rows(fields);
            for (int idx : rows) {
                if (claims[size_t(idx)].claim_id != c.claim_id) {
                    v.tri = Tri::yes;
                    note("duplicate of claim " + claims[size_t(idx)].claim_id);
                    return v;
                }
            }
            v.tri = Tri::no;
            return v;
        }
        if (e.text == "count_same") {
            auto fields = call_fields(e);
            if (any_field_missing(fields)) {
                v.missing = true;
                return v;
            }
            v.num = double(group_rows(fields).size());
            return v;
        }
        if (e.text == "utilization_excess") {
            if (!ctx.baseline_valid)
                throw DataError("utilization_excess requires a non-empty baseline window");
            std::string code = field_as_string(c, e.children[0]->text);
            v.tri = Tri::no;
            if (code.empty()) return v;
            auto base = ctx.utilization_baseline.find(code);
            if (base == ctx.utilization_baseline.end()) return v;  // no baseline, no evidence
            YearMonth ym = YearMonth::of(c.claim_reported_date);
            auto cnt = ctx.monthly_procedure_counts.find(proc_month_key(code, ym));
            double count = cnt == ctx.monthly_procedure_counts.end() ? 0 : double(cnt->second);
            if (count > base->second.mean + ctx.utilization_k * base->second.sd) {
                v.tri = Tri::yes;
                note(code + ": " + format_sig6(count) + " in " + ym.str() +
                     " vs baseline mean " + format_sig6(base->second.mean) + ", sd " +
                     format_sig6(base->second.sd));
            }
            return v;
        }
        if (e.text == "is_missing") {
            Value f = field_value(*e.children[0]);
            v.tri = f.missing ? Tri::yes : Tri::no;
            if (f.missing) note(e.children[0]->text + " missing");
            return v;
        }
        if (e.text == "external_data") {
            v.tri = Tri::no;  // placeholder: data not available in this schema
            return v;
        }
        throw DataError("unknown function at evaluation: " + e.text);
    }

    std::vector<std::string> call_fields(const RuleExpr& e) {
        std::vector<std::string> fields;
        for (const auto& c : e.children) fields.push_back(c->text);
        return fields;
    }

    // an empty rendering means the field is absent on this claim; grouping
    // on it would spuriously match other incomplete claims
    bool any_field_missing(const std::vector<std::string>& fields) {
        for (const auto& f : fields)
            if (field_as_string(claim(), f).empty()) return true;
        return false;
    }

    const std::vector<int>& group_rows(const std::vector<std::string>& fields) {
        static const std::vector<int> empty;
        auto it = ctx.groups.find(field_list_key(fields));
        if (it == ctx.groups.end()) throw DataError("group index missing; context not prepared");
        auto rows = it->second.find(group_key_for(claim(), fields));
        return rows == it->second.end() ? empty : rows->second;
    }
};

void collect_group_lists(const RuleExpr& e, std::vector<std::vector<std::string>>& out) {
    if (e.type == ExprType::call && (e.text == "duplicate_exists" || e.text == "count_same")) {
        std::vector<std::string> fields;
        for (const auto& c : e.children) fields.push_back(c->text);
        out.push_back(std::move(fields));
    }
    for (const auto& c : e.children) collect_group_lists(*c, out);
}

}  // namespace

std::vector<TriggerHit> evaluate_rules(const std::vector<TriggerRule>& rules,
                                       const std::vector<ClaimRecord>& claims, RuleContext& ctx) {
    // prepare pass: make sure every group index the rules need exists
    std::vector<std::vector<std::string>> lists;
    for (const auto& r : rules) collect_group_lists(*r.expr, lists);
    for (const auto& fields : lists) build_group(ctx, claims, fields);

    std::vector<TriggerHit> hits;
    Evaluator ev{claims, ctx};
    for (int i = 0; i < int(claims.size()); ++i) {
        ev.claim_index = i;
        for (const auto& rule : rules) {
            std::vector<std::string> evidence;
            ev.evidence = &evidence;
            Value v = ev.eval(*rule.expr);
            ev.evidence = nullptr;
            if (v.tri != Tri::yes) continue;  // unknown collapses to false at the root
            std::string detail;
            for (size_t k = 0; k < evidence.size(); ++k) {
                if (k) detail += "; ";
                detail += evidence[k];
            }
            hits.push_back({claims[size_t(i)].claim_id, rule.id, std::move(detail)});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const TriggerHit& a, const TriggerHit& b) {
        return std::tie(a.claim_id, a.rule_id) < std::tie(b.claim_id, b.rule_id);
    });
    return hits;
}

std::map<std::string, std::vector<std::string>> flag_claims(
    const std::vector<TriggerHit>& hits, const std::vector<ClaimRecord>& claims) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& c : claims) out[c.claim_id];
    for (const auto& h : hits) {
        auto it = out.find(h.claim_id);
        if (it == out.end())
            throw DataError("hit references unknown claim_id '" + h.claim_id + "'");
        it->second.push_back(h.rule_id);
    }
    return out;
}

void write_hits_csv(std::ostream& out, const std::vector<TriggerHit>& hits,
                    const std::vector<TriggerRule>& rules) {
    std::map<std::string, RuleCategory> categories;
    for (const auto& r : rules) categories[r.id] = r.category;
    out << "claim_id,rule_id,category,detail\n";
    for (const auto& h : hits) {
        auto it = categories.find(h.rule_id);
        std::string cat = it == categories.end() ? "" : std::string(to_string(it->second));
        out << csv_join({h.claim_id, h.rule_id, cat, h.detail}) << "\n";
    }
}

}  // namespace fraudkit
