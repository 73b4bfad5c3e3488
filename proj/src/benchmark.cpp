#include "dcdt/benchmark.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <map>

namespace dcdt {

Cohort build_cohort(std::vector<ClockTest> tests, const FeatureCatalog& catalog) {
    Cohort c;
    c.raw.reserve(tests.size());
    c.binary.reserve(tests.size());
    for (const auto& t : tests) {
        if (!t.group) throw Error(fmt::format("cohort: subject {} has no group label", t.subject_id));
        c.raw.push_back(extract(t, catalog, FeatureSet::All));
        c.binary.push_back(binarize(c.raw.back(), catalog));
    }
    c.tests = std::move(tests);
    return c;
}

TaskData task_data(const Cohort& cohort, Task task) {
    TaskData td;
    for (std::size_t i = 0; i < cohort.tests.size(); ++i) {
        const auto label = task_label(task, *cohort.tests[i].group);
        if (!label) continue;
        td.members.push_back(i);
        td.labels.push_back(*label);
    }
    const bool pos = std::find(td.labels.begin(), td.labels.end(), 1) != td.labels.end();
    const bool neg = std::find(td.labels.begin(), td.labels.end(), -1) != td.labels.end();
    if (!pos || !neg) throw Error(fmt::format("task {}: cohort lacks one of its groups", to_string(task)));
    return td;
}

std::vector<SlimConfig> SlimGrid::expand(const SlimConfig& base) const {
    std::vector<SlimConfig> out;
    for (double cp : C_plus) {
        for (double cm : C_minus) {
            for (double c0 : C0) {
                for (double c1 : C1) {
                    SlimConfig cfg = base;
                    cfg.C_plus = cp;
                    cfg.C_minus = cm;
                    cfg.C0 = c0;
                    cfg.C1 = c1;
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

std::string describe(const SlimConfig& cfg) {
    return fmt::format("C+={:g} C-={:g} C0={:g} C1={:g}", cfg.C_plus, cfg.C_minus, cfg.C0, cfg.C1);
}

SlimConfig default_benchmark_slim_config() {
    SlimConfig cfg;
    cfg.node_budget = 400;
    return cfg;
}

std::vector<double> understandability(const BinaryDataset& d, const FeatureCatalog& catalog) {
    std::vector<double> u;
    u.reserve(d.j());
    for (const auto& name : d.names) u.push_back(catalog.at(name).u);
    return u;
}

BinaryDataset task_dataset(const Cohort& cohort, const TaskData& td, const FeatureCatalog& catalog, FeatureSet set) {
    const auto wanted = catalog.names(set);
    if (cohort.binary.empty()) throw Error("task_dataset: empty cohort");
    const auto& all = cohort.binary.front().names;
    std::vector<std::size_t> columns;
    for (const auto& name : wanted) {
        const auto it = std::find(all.begin(), all.end(), name);
        if (it == all.end()) throw Error(fmt::format("task_dataset: cohort lacks feature '{}'", name));
        columns.push_back(static_cast<std::size_t>(it - all.begin()));
    }
    BinaryDataset d;
    d.names = wanted;
    for (std::size_t k = 0; k < td.members.size(); ++k) {
        const auto& v = cohort.binary[td.members[k]];
        std::vector<std::uint8_t> row;
        row.reserve(columns.size());
        for (auto c : columns) row.push_back(v.values[c] != 0.0 ? 1 : 0);
        d.X.push_back(std::move(row));
        d.y.push_back(td.labels[k]);
    }
    d.validate();
    return d;
}

namespace {

Learner slim_learner(const BinaryDataset& d, const std::vector<SlimConfig>& configs) {
    Learner learner;
    for (const auto& cfg : configs) learner.grid.push_back(describe(cfg));
    learner.fit = [&d, &configs](std::span<const std::size_t> train_rows, std::size_t config) -> Scorer {
        const SlimModel m = train(subset(d, train_rows), configs[config]);
        if (m.nonzero_count() > configs[config].max_features) {
            throw std::logic_error("slim: trained model exceeds the cardinality cap");
        }
        return [&d, m](std::span<const std::size_t> rows) {
            std::vector<double> s;
            s.reserve(rows.size());
            for (auto r : rows) s.push_back(score(m, d.X[r]));
            return s;
        };
    };
    return learner;
}

std::string_view method_name(FeatureSet set) { return set == FeatureSet::All ? kMethodSlimAll : kMethodSlimSimplest; }

}  // namespace

EvalReport evaluate_slim(const Cohort& cohort, Task task, FeatureSet set, const FeatureCatalog& catalog,
                         const BenchmarkOptions& options) {
    const TaskData td = task_data(cohort, task);
    const BinaryDataset d = task_dataset(cohort, td, catalog, set);
    SlimConfig base = options.slim_base;
    base.u = understandability(d, catalog);
    const auto configs = options.slim_grid.expand(base);
    EvalReport r = nested_cv(d.y, slim_learner(d, configs), options.cv);
    r.task = std::string(to_string(task));
    r.method = std::string(method_name(set));
    return r;
}

EvalReport evaluate_rouleau(const Cohort& cohort, Task task, const BenchmarkOptions& options) {
    const TaskData td = task_data(cohort, task);
    std::vector<RouleauInputs> inputs;
    for (auto i : td.members) inputs.push_back(rouleau_inputs(cohort.raw[i], options.rouleau_clock));

    Learner learner;
    learner.grid = {"grid-fit"};
    learner.fit = [&](std::span<const std::size_t> train_rows, std::size_t) -> Scorer {
        std::vector<RouleauInputs> x;
        std::vector<bool> y;
        for (auto r : train_rows) {
            x.push_back(inputs[r]);
            y.push_back(td.labels[r] == 1);
        }
        const RouleauParams p = fit_params(x, y, options.rouleau_grid).params;
        return [&inputs, p](std::span<const std::size_t> rows) {
            std::vector<double> s;
            for (auto r : rows) s.push_back(-static_cast<double>(rouleau_total(inputs[r], p).total));
            return s;
        };
    };
    EvalReport r = nested_cv(td.labels, learner, options.cv);
    r.task = std::string(to_string(task));
    r.method = std::string(kMethodRouleau);
    return r;
}

SlimModel fit_final_slim(const Cohort& cohort, Task task, FeatureSet set, const FeatureCatalog& catalog,
                         const BenchmarkOptions& options, const EvalReport& report) {
    const TaskData td = task_data(cohort, task);
    const BinaryDataset d = task_dataset(cohort, td, catalog, set);
    SlimConfig base = options.slim_base;
    base.u = understandability(d, catalog);
    const auto configs = options.slim_grid.expand(base);

    std::size_t chosen = 0;
    int best_votes = -1;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const int votes =
            static_cast<int>(std::count(report.chosen.begin(), report.chosen.end(), describe(configs[c])));
        if (votes > best_votes) {
            best_votes = votes;
            chosen = c;
        }
    }
    SlimModel m = train(d, configs[chosen]);
    m.target = std::string(task_target(task));
    return m;
}

BenchmarkResult run_benchmark(const Cohort& cohort, const FeatureCatalog& catalog, const BenchmarkOptions& options) {
    BenchmarkResult out;
    for (Task task : options.tasks) {
        out.reports.push_back(evaluate_rouleau(cohort, task, options));
        for (FeatureSet set : {FeatureSet::Simplest, FeatureSet::All}) {
            out.reports.push_back(evaluate_slim(cohort, task, set, catalog, options));
            const auto stem = fmt::format("{}_{}", to_string(task), set == FeatureSet::All ? "all" : "simplest");
            out.models.emplace_back(stem, fit_final_slim(cohort, task, set, catalog, options, out.reports.back()));
        }
    }
    out.table = benchmark_table(out.reports,
                                {std::string(kMethodRouleau), std::string(kMethodSlimSimplest),
                                 std::string(kMethodSlimAll)},
                                options.tasks);
    return out;
}

}  // namespace dcdt
