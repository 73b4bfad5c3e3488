#pragma once

// Supersparse linear integer models: exact minimization of weighted 0-1 loss
// plus sparsity and understandability penalties over bounded integer
// coefficients, and conversion to and from point-based scoring sheets.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcdt/features.hpp"

namespace dcdt {

struct BinaryDataset {
    std::vector<std::string> names;          // J feature names
    std::vector<std::vector<std::uint8_t>> X;  // N rows of J entries in {0,1}
    std::vector<int> y;                      // +1 impaired, -1 healthy

    std::size_t n() const { return y.size(); }
    std::size_t j() const { return names.size(); }
    void validate() const;
};

/// Stacks binarized vectors (all with the same names) into a dataset.
BinaryDataset make_dataset(const std::vector<FeatureVector>& binarized, std::span<const int> labels);

/// Restriction of `d` to the given rows, in the given order.
BinaryDataset subset(const BinaryDataset& d, std::span<const std::size_t> rows);

struct SlimConfig {
    double C_plus = 1.0;
    double C_minus = 1.0;
    double C0 = 1e-3;
    double C1 = 0.0;
    int coeff_bound = 10;
    int intercept_bound = 100;
    int max_features = 10;
    std::vector<double> u;  // one per feature; empty means all 1
    std::optional<double> time_budget_ms;
    std::uint64_t node_budget = 200000;  // branch-and-bound expansions; 0 = unlimited

    /// Throws ConfigError; `j` is the dataset width that `u` must match.
    void validate(std::size_t j) const;
};

enum class Optimality { ProvenOptimal, BudgetBest };
std::string_view to_string(Optimality o);

struct SlimModel {
    std::vector<std::string> names;
    std::vector<int> coefficients;
    int intercept = 0;
    SlimConfig config;
    double objective = 0.0;
    Optimality optimality = Optimality::ProvenOptimal;
    std::string target;  // screened condition, shown on the sheet

    int nonzero_count() const;
};

/// lambda0 + sum lambda_j x_j over the model's features, looked up by name.
/// Throws Error when the vector lacks a model feature or is not binarized.
int score(const SlimModel& m, const FeatureVector& x);
int score(const SlimModel& m, std::span<const std::uint8_t> row);  // row aligned with m.names
/// +1 iff score > 0.
int predict(const SlimModel& m, const FeatureVector& x);
int predict(const SlimModel& m, std::span<const std::uint8_t> row);

/// Points a subject collects on the rendered sheet: -sum lambda_j x_j.
/// The sheet predicts impairment iff this is below the intercept.
int sheet_score(const SlimModel& m, const FeatureVector& x);

/// Weighted misclassification rate plus penalties; the intercept is free of
/// penalty. A positive counts as an error when its score is <= 0, a negative
/// when its score is > 0.
double objective(std::span<const int> lambda, int lambda0, const BinaryDataset& d, const SlimConfig& cfg);

/// Branch and bound over integer coefficients. Feature order is by
/// decreasing |single-feature AUC - 1/2|. Each node is bounded by its
/// committed penalty plus the loss that remains unavoidable when examples
/// sharing a pattern on the unfixed features must share one score offset.
/// Returns ProvenOptimal when the tree is exhausted within budget. Among
/// optimal models the one with fewer nonzeros, then smaller sum |lambda|,
/// then lexicographically smaller lambda is returned, matching
/// brute_force_train.
SlimModel train(const BinaryDataset& d, const SlimConfig& cfg);

/// Counts every model returned by train or brute_force_train in this process
/// and the largest number of nonzero coefficients among them.
struct TrainingAudit {
    std::uint64_t trainings = 0;
    int max_nonzeros = 0;
};
TrainingAudit training_audit();

/// Exhaustive enumeration; requires (2L+1)^J (2 L0 + 1) <= 1e7.
SlimModel brute_force_train(const BinaryDataset& d, const SlimConfig& cfg);

/// Scoring sheet: "PREDICT <target> IF SCORE < T", then numbered predicates
/// grouped by clock with their points. Zero coefficients are omitted.
std::string render(const SlimModel& m, const FeatureCatalog& catalog);

/// Inverse of render. Descriptions are resolved within their clock group.
SlimModel parse_sheet(std::string_view text, const FeatureCatalog& catalog);

/// `slim-model v1` file with one `name<TAB>coefficient` row per feature and a
/// final `__intercept__<TAB>value` row. `#` lines are comments; a
/// `# target: ...` comment carries the screened condition.
std::string serialize_model(const SlimModel& m);
SlimModel parse_model(std::string_view text);

}  // namespace dcdt
