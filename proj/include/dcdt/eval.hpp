#pragma once

// AUC, stratified fold plans, nested cross-validation with grid search and
// report tables.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcdt/stroke_model.hpp"

namespace dcdt {

/// Mann-Whitney concordance: P(score_pos > score_neg) + 1/2 P(tie). Labels
/// are +1 (impaired, expected to score higher) or -1. O(n log n).
double auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// ROC curve with one vertex per distinct score threshold, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under roc_curve. Agrees with auc() because tied scores
/// form a single diagonal step.
double auc_trapezoid(std::span<const double> scores, std::span<const int> labels);

struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> fold;  // per subject

    std::vector<std::size_t> test_indices(int f) const;
    std::vector<std::size_t> train_indices(int f) const;
};

/// Shuffles each class with a seeded portable RNG and deals it round-robin
/// so per-fold class counts differ by at most one. Throws Error if k < 2 or
/// a class has fewer than k members.
FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

enum class Task { MIDvsHC, VCDvsHC, PDvsHC, All3vsHC };
inline constexpr Task kAllTasks[] = {Task::MIDvsHC, Task::VCDvsHC, Task::PDvsHC, Task::All3vsHC};

std::string_view to_string(Task task);
std::optional<Task> task_from_string(std::string_view token);  // mid, vcd, pd, all3 or the enum names
/// Column heading for report tables, e.g. "MID vs. HC".
std::string_view task_heading(Task task);
/// Screening target used on scoring sheets, e.g. "MEMORY IMPAIRMENT DISORDER".
std::string_view task_target(Task task);

/// +1 for the task's clinical groups, -1 for HC, nullopt if not part of it.
std::optional<int> task_label(Task task, Group group);

/// Produces scores for the given subjects; higher means more impaired.
using Scorer = std::function<std::vector<double>(std::span<const std::size_t> subjects)>;

struct Learner {
    std::vector<std::string> grid;  // one label per configuration, in declared order
    std::function<Scorer(std::span<const std::size_t> train, std::size_t config)> fit;
};

struct CvOptions {
    int outer_folds = 5;
    int inner_folds = 5;
    std::uint64_t seed = 7;
};

struct EvalReport {
    std::string task;
    std::string method;
    std::vector<double> fold_auc;
    std::vector<std::string> chosen;  // grid label picked in each outer fold
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over folds
};

/// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

/// Outer stratified folds; on each outer-training set an inner stratified CV
/// scores every grid configuration by mean inner AUC (first configuration
/// wins ties), the winner is refit on the full outer-training set and scored
/// on the held-out fold. A single-configuration grid skips the inner loop.
EvalReport nested_cv(std::span<const int> labels, const Learner& learner, const CvOptions& options);

/// Mean with the standard deviation in parentheses, e.g. "0.73 (0.08)".
std::string format_cell(double mean, double std);

std::string report_text(const EvalReport& report);

/// Long-form `task,method,fold,auc` rows plus `mean` and `std` summary rows.
std::string reports_csv(const std::vector<EvalReport>& reports);

/// Methods as rows, tasks as columns, cells formatted by format_cell. Every
/// (method, task) pair in `methods` x `tasks` must be present in `reports`.
std::string benchmark_table(const std::vector<EvalReport>& reports, const std::vector<std::string>& methods,
                            const std::vector<Task>& tasks);

}  // namespace dcdt
