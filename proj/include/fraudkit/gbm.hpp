#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fraudkit/claims.hpp"

namespace fraudkit {

enum class FeatureKind { numeric, duration_days, one_hot, frequency };

struct FeatureDescriptor {
    FeatureKind kind = FeatureKind::numeric;
    std::string source;    // field name; "from" field for duration_days
    std::string source2;   // "to" field for duration_days
    std::string category;  // matched value for one_hot

    std::string name() const;
    friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

/// Ordered feature layout plus the vocabularies frozen at fit time.
/// Missing optional inputs encode as NaN; tree splits route NaN left.
struct FeatureSchema {
    std::vector<FeatureDescriptor> features;
    // field -> value -> occurrence count in the fit corpus
    std::map<std::string, std::map<std::string, double>> frequency_tables;

    std::size_t arity() const { return features.size(); }
    std::vector<double> encode(const ClaimRecord& rec) const;
};

/// Numeric fields pass through; date pairs become day-count durations;
/// categorical fields one-hot encode at <= 32 distinct values, otherwise
/// frequency encode. fraud_status and claim_id are excluded. Throws
/// DataError on empty input.
FeatureSchema build_schema(const std::vector<ClaimRecord>& claims);

struct LabeledDataset {
    std::vector<double> values;  // row-major, rows() x cols
    std::size_t cols = 0;
    std::vector<int> labels;  // 0/1
    std::vector<std::string> ids;

    std::size_t rows() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * cols, cols};
    }
};

/// Encodes claims with a known fraud label (fraud -> 1, not_fraud -> 0);
/// claims with unknown status are skipped.
LabeledDataset encode_dataset(const FeatureSchema& schema,
                              const std::vector<ClaimRecord>& claims);

/// Stratified by label: class proportions are preserved within one row per
/// class, the partition is disjoint and exhaustive, and the result is
/// deterministic for a fixed seed. train_fraction outside (0,1) throws
/// UsageError.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed);

struct GbmParams {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 20;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;  // leaf output

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
};

/// Additive logistic-loss ensemble: sigmoid(initial_score +
/// learning_rate * sum of tree outputs).
struct BoostedModel {
    double initial_score = 0;
    GbmParams params;
    FeatureSchema schema;
    std::vector<RegressionTree> trees;
    std::vector<double> stage_losses;  // training log-loss after init and each stage

    double score(std::span<const double> x) const;
    double predict_proba(std::span<const double> x) const;
    double predict_proba(const ClaimRecord& rec) const;

    void save(std::ostream& out) const;
    static BoostedModel load(std::istream& in);
};

/// Fits the ensemble: initial score is the clamped-base-rate log-odds, each
/// stage fits a regression tree to the logistic-loss residuals with one
/// Newton step per leaf. A single-class training set degenerates to the
/// constant prior. Infinite feature values throw DataError naming the
/// row and column.
BoostedModel fit_gbm(const LabeledDataset& train, const GbmParams& hp,
                     FeatureSchema schema = {});

}  // namespace fraudkit
