#include "dcdt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <stdexcept>

#include "dcdt/random.hpp"

namespace dcdt {

namespace {

struct ClassCounts {
    std::int64_t pos = 0;
    std::int64_t neg = 0;
};

ClassCounts count_classes(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error("auc: scores and labels differ in length");
    ClassCounts c;
    for (int y : labels) {
        if (y == 1) ++c.pos;
        else if (y == -1) ++c.neg;
        else throw Error(fmt::format("auc: label {} is not +1/-1", y));
    }
    if (c.pos == 0 || c.neg == 0) throw Error("auc: both classes must be present");
    return c;
}

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts c = count_classes(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Walk tie groups from lowest score up; integer pair counts stay exact.
    std::int64_t neg_below = 0, concordant2 = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::int64_t pos = 0, neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos : neg) += 1;
            ++j;
        }
        concordant2 += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    return static_cast<double>(concordant2) / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts c = count_classes(scores, labels);
    const auto order = order_by_score_desc(scores);
    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? tp : fp) += 1;
            ++j;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(c.neg),
                         static_cast<double>(tp) / static_cast<double>(c.pos)});
        i = j;
    }
    return curve;
}

double auc_trapezoid(std::span<const double> scores, std::span<const int> labels) {
    const auto curve = roc_curve(scores, labels);
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    }
    return area;
}

std::vector<std::size_t> FoldPlan::test_indices(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i) {
        if (fold[i] == f) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i) {
        if (fold[i] != f) out.push_back(i);
    }
    return out;
}

FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw Error(fmt::format("stratified_kfold: k must be >= 2, got {}", k));
    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < labels.size(); ++i) classes[labels[i]].push_back(i);
    for (const auto& [label, members] : classes) {
        if (static_cast<int>(members.size()) < k) {
            throw Error(fmt::format("stratified_kfold: class {} has {} members, fewer than k={}", label,
                                    members.size(), k));
        }
    }
    FoldPlan plan{k, seed, std::vector<int>(labels.size(), -1)};
    std::size_t next = 0;
    std::uint64_t class_index = 0;
    for (auto& [label, members] : classes) {
        Rng rng(derive_seed(seed, ++class_index));
        for (std::size_t i = members.size(); i > 1; --i) {
            std::swap(members[i - 1], members[rng.below(i)]);
        }
        for (std::size_t idx : members) plan.fold[idx] = static_cast<int>(next++ % static_cast<std::size_t>(k));
    }
    return plan;
}

std::string_view to_string(Task task) {
    switch (task) {
        case Task::MIDvsHC: return "MIDvsHC";
        case Task::VCDvsHC: return "VCDvsHC";
        case Task::PDvsHC: return "PDvsHC";
        case Task::All3vsHC: return "All3vsHC";
    }
    return "MIDvsHC";
}

std::optional<Task> task_from_string(std::string_view token) {
    if (token == "mid" || token == "MIDvsHC") return Task::MIDvsHC;
    if (token == "vcd" || token == "VCDvsHC") return Task::VCDvsHC;
    if (token == "pd" || token == "PDvsHC") return Task::PDvsHC;
    if (token == "all3" || token == "All3vsHC") return Task::All3vsHC;
    return std::nullopt;
}

std::string_view task_heading(Task task) {
    switch (task) {
        case Task::MIDvsHC: return "MID vs. HC";
        case Task::VCDvsHC: return "VCD vs. HC";
        case Task::PDvsHC: return "PD vs. HC";
        case Task::All3vsHC: return "All three vs. HC";
    }
    return "";
}

std::string_view task_target(Task task) {
    switch (task) {
        case Task::MIDvsHC: return "MEMORY IMPAIRMENT DISORDER";
        case Task::VCDvsHC: return "VASCULAR COGNITIVE DISORDER";
        case Task::PDvsHC: return "PARKINSON'S DISEASE";
        case Task::All3vsHC: return "COGNITIVE IMPAIRMENT";
    }
    return "";
}

std::optional<int> task_label(Task task, Group group) {
    if (group == Group::HC) return -1;
    switch (task) {
        case Task::MIDvsHC: return group == Group::MID ? std::optional<int>(1) : std::nullopt;
        case Task::VCDvsHC: return group == Group::VCD ? std::optional<int>(1) : std::nullopt;
        case Task::PDvsHC: return group == Group::PD ? std::optional<int>(1) : std::nullopt;
        case Task::All3vsHC: return 1;
    }
    return std::nullopt;
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

EvalReport nested_cv(std::span<const int> labels, const Learner& learner, const CvOptions& options) {
    if (learner.grid.empty()) throw Error("nested_cv: empty grid");
    const FoldPlan outer = stratified_kfold(labels, options.outer_folds, options.seed);

    EvalReport report;
    for (int f = 0; f < outer.k; ++f) {
        const auto train = outer.train_indices(f);
        const auto test = outer.test_indices(f);

        std::size_t best = 0;
        if (learner.grid.size() > 1) {
            std::vector<int> train_labels;
            for (auto i : train) train_labels.push_back(labels[i]);
            const FoldPlan inner =
                stratified_kfold(train_labels, options.inner_folds, derive_seed(options.seed, 1000 + f));

            std::vector<bool> in_outer_test(labels.size(), false);
            for (auto i : test) in_outer_test[i] = true;

            double best_auc = -1.0;
            for (std::size_t c = 0; c < learner.grid.size(); ++c) {
                double sum = 0.0;
                for (int g = 0; g < inner.k; ++g) {
                    std::vector<std::size_t> inner_train, inner_test;
                    std::vector<int> inner_labels;
                    for (std::size_t j = 0; j < train.size(); ++j) {
                        if (inner.fold[j] == g) {
                            inner_test.push_back(train[j]);
                            inner_labels.push_back(labels[train[j]]);
                        } else {
                            inner_train.push_back(train[j]);
                        }
                    }
                    for (auto i : inner_train) {
                        if (in_outer_test[i]) throw std::logic_error("nested_cv: outer test subject in inner training");
                    }
                    const auto scores = learner.fit(inner_train, c)(inner_test);
                    sum += auc(scores, inner_labels);
                }
                const double mean_auc = sum / inner.k;
                if (mean_auc > best_auc) {
                    best_auc = mean_auc;
                    best = c;
                }
            }
        }

        std::vector<int> test_labels;
        for (auto i : test) test_labels.push_back(labels[i]);
        const auto scores = learner.fit(train, best)(test);
        report.fold_auc.push_back(auc(scores, test_labels));
        report.chosen.push_back(learner.grid[best]);
    }
    std::tie(report.mean, report.std) = mean_std(report.fold_auc);
    return report;
}

std::string format_cell(double mean, double std) { return fmt::format("{:.2f} ({:.2f})", mean, std); }

std::string report_text(const EvalReport& report) {
    std::string out = fmt::format("task: {}\nmethod: {}\n", report.task, report.method);
    out += fmt::format("{:<6} {:>8}  {}\n", "fold", "auc", "chosen");
    for (std::size_t f = 0; f < report.fold_auc.size(); ++f) {
        out += fmt::format("{:<6} {:>8.4f}  {}\n", f, report.fold_auc[f], report.chosen[f]);
    }
    out += fmt::format("{:<6} {:>8.4f}\n{:<6} {:>8.4f}\n", "mean", report.mean, "std", report.std);
    return out;
}

std::string reports_csv(const std::vector<EvalReport>& reports) {
    std::string out = "task,method,fold,auc\n";
    for (const auto& r : reports) {
        for (std::size_t f = 0; f < r.fold_auc.size(); ++f) {
            out += fmt::format("{},{},{},{:.6f}\n", r.task, r.method, f, r.fold_auc[f]);
        }
        out += fmt::format("{},{},mean,{:.6f}\n", r.task, r.method, r.mean);
        out += fmt::format("{},{},std,{:.6f}\n", r.task, r.method, r.std);
    }
    return out;
}

std::string benchmark_table(const std::vector<EvalReport>& reports, const std::vector<std::string>& methods,
                            const std::vector<Task>& tasks) {
    const auto find = [&](const std::string& method, Task task) -> const EvalReport& {
        for (const auto& r : reports) {
            if (r.method == method && r.task == to_string(task)) return r;
        }
        throw Error(fmt::format("benchmark: no report for {} on {}", method, to_string(task)));
    };
    std::size_t width = std::string_view("Algorithm").size();
    for (const auto& m : methods) width = std::max(width, m.size());
    std::vector<std::size_t> col;
    for (Task t : tasks) col.push_back(std::max<std::size_t>(task_heading(t).size(), 11));

    std::string out = fmt::format("{:<{}}", "Algorithm", width);
    for (std::size_t i = 0; i < tasks.size(); ++i) out += fmt::format("  {:>{}}", task_heading(tasks[i]), col[i]);
    out += '\n';
    for (const auto& m : methods) {
        out += fmt::format("{:<{}}", m, width);
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto& r = find(m, tasks[i]);
            out += fmt::format("  {:>{}}", format_cell(r.mean, r.std), col[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace dcdt
