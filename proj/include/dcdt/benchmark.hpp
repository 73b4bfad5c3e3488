#pragma once

// Glue between the modules: a cohort of extracted tests, per-task label
// vectors, learners for nested CV and the three-row comparison table.

#include <string>
#include <vector>

#include "dcdt/eval.hpp"
#include "dcdt/features.hpp"
#include "dcdt/rouleau.hpp"
#include "dcdt/slim.hpp"

namespace dcdt {

inline constexpr std::string_view kMethodRouleau = "Operationalized Rouleau";
inline constexpr std::string_view kMethodSlimSimplest = "SLIM with simplest features";
inline constexpr std::string_view kMethodSlimAll = "SLIM with all features";

struct Cohort {
    std::vector<ClockTest> tests;
    std::vector<FeatureVector> raw;     // every catalog feature, unbinarized
    std::vector<FeatureVector> binary;  // same names, binarized
};

/// Extracts and binarizes every test. Tests must carry a group.
Cohort build_cohort(std::vector<ClockTest> tests, const FeatureCatalog& catalog);

struct TaskData {
    std::vector<std::size_t> members;  // cohort indices
    std::vector<int> labels;           // aligned with members
};

/// Subjects belonging to the task, in cohort order. Throws Error when either
/// class is missing.
TaskData task_data(const Cohort& cohort, Task task);

struct SlimGrid {
    std::vector<double> C_plus{1.0};
    std::vector<double> C_minus{0.5, 1.0, 2.0};
    std::vector<double> C0{1e-4, 1e-3, 1e-2};
    std::vector<double> C1{0.0, 1e-4, 1e-3};

    /// Cartesian product over (C_plus, C_minus, C0, C1) on top of `base`.
    std::vector<SlimConfig> expand(const SlimConfig& base) const;
};

std::string describe(const SlimConfig& cfg);

struct BenchmarkOptions {
    CvOptions cv;
    SlimConfig slim_base;
    SlimGrid slim_grid;
    RouleauGrid rouleau_grid;
    ClockKind rouleau_clock = ClockKind::Command;
    std::vector<Task> tasks{std::begin(kAllTasks), std::end(kAllTasks)};
};

/// The base config used by the CLI and the benchmark: default bounds and a
/// node budget small enough for nested CV at cohort scale.
SlimConfig default_benchmark_slim_config();

/// Binary dataset of the task restricted to one feature set, with
/// understandability weights from the catalog.
BinaryDataset task_dataset(const Cohort& cohort, const TaskData& td, const FeatureCatalog& catalog, FeatureSet set);
std::vector<double> understandability(const BinaryDataset& d, const FeatureCatalog& catalog);

EvalReport evaluate_slim(const Cohort& cohort, Task task, FeatureSet set, const FeatureCatalog& catalog,
                         const BenchmarkOptions& options);
EvalReport evaluate_rouleau(const Cohort& cohort, Task task, const BenchmarkOptions& options);

/// Trains on all task subjects with the grid configuration chosen most often
/// across the report's outer folds (earliest in grid order on ties).
SlimModel fit_final_slim(const Cohort& cohort, Task task, FeatureSet set, const FeatureCatalog& catalog,
                         const BenchmarkOptions& options, const EvalReport& report);

struct BenchmarkResult {
    std::vector<EvalReport> reports;
    std::vector<std::pair<std::string, SlimModel>> models;  // file stem, model
    std::string table;
};

BenchmarkResult run_benchmark(const Cohort& cohort, const FeatureCatalog& catalog, const BenchmarkOptions& options);

}  // namespace dcdt
