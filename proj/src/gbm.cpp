#include "fraudkit/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "fraudkit/errors.hpp"
#include "fraudkit/rng.hpp"

namespace fraudkit {

namespace {

constexpr double kBaseRateClamp = 1e-6;
constexpr double kHessianFloor = 1e-12;
constexpr double kProbClamp = 1e-15;
constexpr int kOneHotLimit = 32;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

double sigmoid(double z) {
    if (z >= 0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

double log_loss(std::span<const double> scores, std::span<const int> labels) {
    double total = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        double p = std::clamp(sigmoid(scores[i]), kProbClamp, 1.0 - kProbClamp);
        total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / double(scores.size());
}

}  // namespace

std::string FeatureDescriptor::name() const {
    switch (kind) {
        case FeatureKind::numeric: return source;
        case FeatureKind::duration_days: return "duration(" + source + "," + source2 + ")";
        case FeatureKind::one_hot: return source + "=" + category;
        case FeatureKind::frequency: return "freq(" + source + ")";
    }
    return source;
}

namespace {

// Field accessors used by both schema construction and encoding.
const std::optional<Date>* opt_date_field(const ClaimRecord& r, const std::string& field) {
    if (field == "treatment_start") return &r.treatment_start;
    if (field == "treatment_end") return &r.treatment_end;
    if (field == "claim_settlement_date") return &r.claim_settlement_date;
    if (field == "claim_paid_date") return &r.claim_paid_date;
    if (field == "surgery_date") return &r.surgery_date;
    if (field == "discharge_date") return &r.discharge_date;
    if (field == "claim_raised_date") return &r.claim_raised_date;
    return nullptr;
}

bool date_field(const ClaimRecord& r, const std::string& field, Date& out) {
    if (field == "claim_reported_date") {
        out = r.claim_reported_date;
        return true;
    }
    if (const auto* opt = opt_date_field(r, field)) {
        if (!*opt) return false;
        out = **opt;
        return true;
    }
    return false;
}

double numeric_field(const ClaimRecord& r, const std::string& field) {
    if (field == "billed_amount") return r.billed_amount.value();
    if (field == "days_stayed") return double(r.days_stayed);
    const std::optional<Money>* m = nullptr;
    if (field == "approved_amount") m = &r.approved_amount;
    else if (field == "paid_amount") m = &r.paid_amount;
    else if (field == "net_amount") m = &r.net_amount;
    if (m) return *m ? (*m)->value() : nan_value();
    return nan_value();  // trigger_hits and other injected columns
}

std::string categorical_field(const ClaimRecord& r, const std::string& field) {
    if (field == "policy_number") return r.policy_number;
    if (field == "insured_id") return r.insured_id;
    if (field == "benefit_type") return std::string(to_string(r.benefit_type));
    if (field == "claim_status") return r.claim_status;
    if (field == "provider_id") return r.provider_id;
    if (field == "provider_name") return r.provider_name;
    if (field == "diagnosis_code") return r.diagnosis_code;
    if (field == "diagnosis_name") return r.diagnosis_name;
    if (field == "procedure_code") return r.procedure_code;
    if (field == "procedure_name") return r.procedure_name;
    if (field == "hospital_district") return r.hospital_district;
    return {};
}

const std::vector<std::string>& numeric_fields() {
    static const std::vector<std::string> fields = {
        "billed_amount", "approved_amount", "paid_amount", "net_amount", "days_stayed"};
    return fields;
}

const std::vector<std::pair<std::string, std::string>>& duration_pairs() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"treatment_start", "treatment_end"},
        {"treatment_end", "claim_reported_date"},
        {"claim_reported_date", "claim_settlement_date"},
        {"discharge_date", "claim_raised_date"},
    };
    return pairs;
}

const std::vector<std::string>& categorical_fields() {
    static const std::vector<std::string> fields = {
        "policy_number", "insured_id",     "benefit_type",   "claim_status",
        "provider_id",   "provider_name",  "diagnosis_code", "diagnosis_name",
        "procedure_code", "procedure_name", "hospital_district"};
    return fields;
}

}  // namespace

FeatureSchema build_schema(const std::vector<ClaimRecord>& claims) {
    if (claims.empty()) throw DataError("cannot build a feature schema from zero claims");
    FeatureSchema schema;
    for (const auto& f : numeric_fields())
        schema.features.push_back({FeatureKind::numeric, f, "", ""});
    for (const auto& [from, to] : duration_pairs())
        schema.features.push_back({FeatureKind::duration_days, from, to, ""});
    for (const auto& f : categorical_fields()) {
        std::set<std::string> distinct;
        for (const auto& c : claims) distinct.insert(categorical_field(c, f));
        if (int(distinct.size()) <= kOneHotLimit) {
            for (const auto& v : distinct)
                schema.features.push_back({FeatureKind::one_hot, f, "", v});
        } else {
            schema.features.push_back({FeatureKind::frequency, f, "", ""});
            auto& table = schema.frequency_tables[f];
            for (const auto& c : claims) table[categorical_field(c, f)] += 1.0;
        }
    }
    return schema;
}

std::vector<double> FeatureSchema::encode(const ClaimRecord& rec) const {
    std::vector<double> out(features.size(), 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        switch (f.kind) {
            case FeatureKind::numeric:
                out[i] = numeric_field(rec, f.source);
                break;
            case FeatureKind::duration_days: {
                Date a, b;
                out[i] = (date_field(rec, f.source, a) && date_field(rec, f.source2, b))
                             ? double(days_between(a, b))
                             : nan_value();
                break;
            }
            case FeatureKind::one_hot:
                out[i] = categorical_field(rec, f.source) == f.category ? 1.0 : 0.0;
                break;
            case FeatureKind::frequency: {
                auto ti = frequency_tables.find(f.source);
                if (ti == frequency_tables.end()) {
                    out[i] = 0.0;
                } else {
                    auto vi = ti->second.find(categorical_field(rec, f.source));
                    out[i] = vi == ti->second.end() ? 0.0 : vi->second;
                }
                break;
            }
        }
    }
    return out;
}

LabeledDataset encode_dataset(const FeatureSchema& schema,
                              const std::vector<ClaimRecord>& claims) {
    LabeledDataset ds;
    ds.cols = schema.arity();
    for (const auto& c : claims) {
        if (c.fraud_status == FraudStatus::unknown) continue;
        auto v = schema.encode(c);
        ds.values.insert(ds.values.end(), v.begin(), v.end());
        ds.labels.push_back(c.fraud_status == FraudStatus::fraud ? 1 : 0);
        ds.ids.push_back(c.claim_id);
    }
    return ds;
}

namespace {

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.cols = ds.cols;
    out.values.reserve(rows.size() * ds.cols);
    for (auto r : rows) {
        auto row = ds.row(r);
        out.values.insert(out.values.end(), row.begin(), row.end());
        out.labels.push_back(ds.labels[r]);
        out.ids.push_back(ds.ids.empty() ? std::string() : ds.ids[r]);
    }
    if (ds.ids.empty()) out.ids.clear();
    return out;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw UsageError("train fraction must be in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.rows(); ++i) by_class[ds.labels[i] ? 1 : 0].push_back(i);

    Rng rng(seed);
    std::vector<std::size_t> train_rows, test_rows;
    for (auto& cls : by_class) {
        rng.shuffle(cls);
        auto n_train = std::size_t(std::llround(train_fraction * double(cls.size())));
        n_train = std::min(n_train, cls.size());
        train_rows.insert(train_rows.end(), cls.begin(), cls.begin() + n_train);
        test_rows.insert(test_rows.end(), cls.begin() + n_train, cls.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

double RegressionTree::predict(std::span<const double> x) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
        double v = x[std::size_t(nodes[i].feature)];
        // NaN (missing) routes left
        i = (std::isnan(v) || v < nodes[i].threshold) ? nodes[i].left : nodes[i].right;
    }
    return nodes[i].value;
}

namespace {

struct TreeBuilder {
    const LabeledDataset& ds;
    const std::vector<double>& residual;
    const std::vector<double>& hessian;
    const GbmParams& hp;
    RegressionTree tree;

    int build(std::vector<std::size_t>& rows, int depth) {
        double sum_r = 0, sum_r2 = 0;
        for (auto r : rows) {
            sum_r += residual[r];
            sum_r2 += residual[r] * residual[r];
        }
        double parent_sse = sum_r2 - sum_r * sum_r / double(rows.size());

        int best_feature = -1;
        double best_threshold = 0, best_gain = 0;
        if (depth < hp.max_depth && rows.size() >= 2 * std::size_t(hp.min_leaf)) {
            std::vector<std::pair<double, std::size_t>> present;
            present.reserve(rows.size());
            for (std::size_t j = 0; j < ds.cols; ++j) {
                present.clear();
                std::size_t n_missing = 0;
                double missing_sum = 0;
                for (auto r : rows) {
                    double v = ds.row(r)[j];
                    if (std::isnan(v)) {
                        ++n_missing;
                        missing_sum += residual[r];
                    } else {
                        present.emplace_back(v, r);
                    }
                }
                if (present.empty()) continue;
                std::sort(present.begin(), present.end());

                // Left block starts as the missing rows; thresholds sweep the
                // distinct present values in ascending order.
                double left_sum = missing_sum, left_sq = 0;
                for (auto r : rows)
                    if (std::isnan(ds.row(r)[j])) left_sq += residual[r] * residual[r];
                std::size_t left_n = n_missing;

                std::size_t k = 0;
                while (k < present.size()) {
                    double threshold =
                        k == 0 ? present[0].first
                               : (present[k - 1].first + present[k].first) / 2.0;
                    std::size_t right_n = rows.size() - left_n;
                    if (left_n >= std::size_t(hp.min_leaf) && right_n >= std::size_t(hp.min_leaf)) {
                        double right_sum = sum_r - left_sum;
                        double right_sq = sum_r2 - left_sq;
                        double sse = (left_sq - left_sum * left_sum / double(left_n)) +
                                     (right_sq - right_sum * right_sum / double(right_n));
                        double gain = parent_sse - sse;
                        if (gain > best_gain) {
                            best_gain = gain;
                            best_feature = int(j);
                            best_threshold = threshold;
                        }
                    }
                    // absorb the tied block at this value into the left side
                    double v = present[k].first;
                    while (k < present.size() && present[k].first == v) {
                        double r = residual[present[k].second];
                        left_sum += r;
                        left_sq += r * r;
                        ++left_n;
                        ++k;
                    }
                }
            }
        }

        int index = int(tree.nodes.size());
        tree.nodes.emplace_back();
        if (best_feature < 0) {
            double sum_h = 0;
            for (auto r : rows) sum_h += hessian[r];
            tree.nodes[index].value = sum_r / std::max(sum_h, kHessianFloor);
            return index;
        }

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            double v = ds.row(r)[std::size_t(best_feature)];
            (std::isnan(v) || v < best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree.nodes[index].feature = best_feature;
        tree.nodes[index].threshold = best_threshold;
        tree.nodes[index].left = build(left, depth + 1);
        tree.nodes[index].right = build(right, depth + 1);
        return index;
    }
};

}  // namespace

BoostedModel fit_gbm(const LabeledDataset& train, const GbmParams& hp, FeatureSchema schema) {
    if (train.rows() == 0) throw DataError("cannot fit on an empty training set");
    for (std::size_t i = 0; i < train.rows(); ++i) {
        auto row = train.row(i);
        for (std::size_t j = 0; j < row.size(); ++j)
            if (std::isinf(row[j]))
                throw DataError("non-finite feature value at row " + std::to_string(i) +
                                ", column " + std::to_string(j));
    }

    BoostedModel model;
    model.params = hp;
    model.schema = std::move(schema);

    std::size_t n = train.rows();
    std::int64_t positives = 0;
    for (int l : train.labels) positives += l;
    double base = std::clamp(double(positives) / double(n), kBaseRateClamp, 1.0 - kBaseRateClamp);
    model.initial_score = std::log(base / (1.0 - base));

    std::vector<double> scores(n, model.initial_score);
    model.stage_losses.push_back(log_loss(scores, train.labels));

    bool single_class = positives == 0 || positives == std::int64_t(n);
    if (single_class) return model;  // zero gradient: the prior is the model

    std::vector<double> residual(n), hessian(n);
    for (int t = 0; t < hp.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(scores[i]);
            residual[i] = double(train.labels[i]) - p;
            hessian[i] = p * (1.0 - p);
        }
        TreeBuilder builder{train, residual, hessian, hp, {}};
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        builder.build(all, 0);
        model.trees.push_back(std::move(builder.tree));

        const auto& tree = model.trees.back();
        for (std::size_t i = 0; i < n; ++i)
            scores[i] += hp.learning_rate * tree.predict(train.row(i));
        model.stage_losses.push_back(log_loss(scores, train.labels));
    }
    return model;
}

double BoostedModel::score(std::span<const double> x) const {
    double total = 0;
    for (const auto& t : trees) total += t.predict(x);
    return initial_score + params.learning_rate * total;
}

double BoostedModel::predict_proba(std::span<const double> x) const {
    return std::clamp(sigmoid(score(x)), kProbClamp, 1.0 - kProbClamp);
}

double BoostedModel::predict_proba(const ClaimRecord& rec) const {
    if (schema.arity() == 0)
        throw DataError("model has no feature schema; encode the record explicitly");
    auto v = schema.encode(rec);
    return predict_proba(v);
}

namespace {

using nlohmann::json;

json schema_to_json(const FeatureSchema& s) {
    json features = json::array();
    for (const auto& f : s.features) {
        features.push_back({{"kind", int(f.kind)},
                            {"source", f.source},
                            {"source2", f.source2},
                            {"category", f.category}});
    }
    json tables = json::object();
    for (const auto& [field, table] : s.frequency_tables) {
        json t = json::object();
        for (const auto& [value, count] : table) t[value] = count;
        tables[field] = std::move(t);
    }
    return {{"features", std::move(features)}, {"frequency_tables", std::move(tables)}};
}

FeatureSchema schema_from_json(const json& j) {
    FeatureSchema s;
    for (const auto& f : j.at("features")) {
        s.features.push_back({FeatureKind(f.at("kind").get<int>()), f.at("source"),
                              f.at("source2"), f.at("category")});
    }
    for (const auto& [field, table] : j.at("frequency_tables").items())
        for (const auto& [value, count] : table.items())
            s.frequency_tables[field][value] = count.get<double>();
    return s;
}

}  // namespace

void BoostedModel::save(std::ostream& out) const {
    json j;
    j["format"] = "fraudkit.model/1";
    j["initial_score"] = initial_score;
    j["params"] = {{"n_trees", params.n_trees},
                   {"max_depth", params.max_depth},
                   {"learning_rate", params.learning_rate},
                   {"min_leaf", params.min_leaf}};
    j["schema"] = schema_to_json(schema);
    j["stage_losses"] = stage_losses;
    json jtrees = json::array();
    for (const auto& t : trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({{"f", n.feature},
                             {"t", n.threshold},
                             {"l", n.left},
                             {"r", n.right},
                             {"v", n.value}});
        jtrees.push_back({{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(jtrees);
    out << j.dump(1) << "\n";
}

BoostedModel BoostedModel::load(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(std::string("cannot parse model file: ") + e.what());
    }
    if (j.value("format", "") != "fraudkit.model/1")
        throw DataError("unsupported model format tag: " + j.value("format", "(missing)"));
    BoostedModel m;
    m.initial_score = j.at("initial_score").get<double>();
    const auto& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<int>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.min_leaf = p.at("min_leaf").get<int>();
    m.schema = schema_from_json(j.at("schema"));
    m.stage_losses = j.at("stage_losses").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
        RegressionTree t;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode n;
            n.feature = jn.at("f").get<int>();
            n.threshold = jn.at("t").get<double>();
            n.left = jn.at("l").get<int>();
            n.right = jn.at("r").get<int>();
            n.value = jn.at("v").get<double>();
            t.nodes.push_back(n);
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

}  // namespace fraudkit
