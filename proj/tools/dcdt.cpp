// dcdt: command-line driver for generation, feature extraction, Rouleau
// scoring, SLIM training, nested-CV evaluation and sheet rendering.

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dcdt/benchmark.hpp"
#include "dcdt/synthgen.hpp"

namespace fs = std::filesystem;
using namespace dcdt;

namespace {

// Data problems exit with 1; usage problems with 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("{}: cannot open", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("{}: cannot write", path.string()));
    out << text;
}

void emit(const std::string& out_path, std::string_view text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
}

// Runs a parser and prefixes any error with the file name.
template <class F>
auto parse_file(const std::string& path, F&& parse) {
    const std::string text = read_file(path);
    try {
        return parse(text);
    } catch (const Error& e) {
        throw DataError(fmt::format("{}: {}", path, e.what()));
    }
}

struct Inputs {
    std::string strokes;
    std::string labels;
    std::string catalog;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool need_labels) {
    cmd->add_option("--strokes", in.strokes, "Stroke file (dcdt-strokes v1)")->required()->check(CLI::ExistingFile);
    auto* labels = cmd->add_option("--labels", in.labels, "Labels file (subject_id,group)")->check(CLI::ExistingFile);
    if (need_labels) labels->required();
    cmd->add_option("--catalog", in.catalog, "Feature catalog file (default: built-in)")->check(CLI::ExistingFile);
}

FeatureCatalog load_catalog(const Inputs& in) {
    if (in.catalog.empty()) return default_catalog();
    return parse_file(in.catalog, [](const std::string& t) { return parse_catalog(t); });
}

std::vector<ClockTest> load_tests(const Inputs& in) {
    auto tests = parse_file(in.strokes, [](const std::string& t) { return parse_strokes(t); });
    if (!in.labels.empty()) {
        const auto labels = parse_file(in.labels, [](const std::string& t) { return parse_labels(t); });
        try {
            attach_labels(tests, labels);
        } catch (const Error& e) {
            throw DataError(fmt::format("{}: {}", in.labels, e.what()));
        }
    }
    return tests;
}

Task parse_task(const std::string& token) {
    const auto t = task_from_string(token);
    if (!t) throw CLI::ValidationError("--task", "expected mid, vcd, pd or all3");
    return *t;
}

FeatureSet parse_set(const std::string& token) { return token == "simplest" ? FeatureSet::Simplest : FeatureSet::All; }

std::map<Group, int> parse_counts(const std::string& text) {
    std::map<Group, int> counts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        const auto g = eq == std::string::npos ? std::nullopt : group_from_string(item.substr(0, eq));
        if (!g) throw CLI::ValidationError("--counts", fmt::format("bad entry '{}'", item));
        const std::string value = item.substr(eq + 1);
        int n = -1;
        const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
        if (ec != std::errc() || end != value.data() + value.size() || n < 0) {
            throw CLI::ValidationError("--counts", fmt::format("bad count '{}'", value));
        }
        counts[*g] = n;
    }
    return counts;
}

const std::vector<std::string> kTaskTokens{"mid", "vcd", "pd", "all3"};

struct SlimFlags {
    double C_plus = 1.0;
    double C_minus = 1.0;
    double C0 = 1e-3;
    double C1 = 0.0;
    int coeff_bound = 10;
    int intercept_bound = 100;
    int max_features = 10;
    std::uint64_t node_budget = default_benchmark_slim_config().node_budget;
    double time_budget_ms = 0.0;

    void add_to(CLI::App* cmd, bool penalties) {
        if (penalties) {
            cmd->add_option("--C-plus", C_plus, "Weight of errors on impaired subjects")->capture_default_str();
            cmd->add_option("--C-minus", C_minus, "Weight of errors on healthy subjects")->capture_default_str();
            cmd->add_option("--C0", C0, "Sparsity penalty per nonzero coefficient")->capture_default_str();
            cmd->add_option("--C1", C1, "Understandability penalty per unit height")->capture_default_str();
        }
        cmd->add_option("--coeff-bound", coeff_bound, "Coefficients lie in [-L, L]")->capture_default_str();
        cmd->add_option("--intercept-bound", intercept_bound, "Intercept lies in [-L0, L0]")->capture_default_str();
        cmd->add_option("--max-features", max_features, "Cardinality cap (at most 10)")
            ->check(CLI::Range(0, 10))
            ->capture_default_str();
        cmd->add_option("--node-budget", node_budget, "Branch-and-bound expansions per training (0 = unlimited)")
            ->capture_default_str();
        cmd->add_option("--time-budget-ms", time_budget_ms, "Wall-clock budget per training (0 = none)");
    }

    SlimConfig config() const {
        SlimConfig cfg;
        cfg.C_plus = C_plus;
        cfg.C_minus = C_minus;
        cfg.C0 = C0;
        cfg.C1 = C1;
        cfg.coeff_bound = coeff_bound;
        cfg.intercept_bound = intercept_bound;
        cfg.max_features = max_features;
        cfg.node_budget = node_budget;
        if (time_budget_ms > 0.0) cfg.time_budget_ms = time_budget_ms;
        return cfg;
    }
};

std::string scores_csv(const std::vector<ClockTest>& tests, const std::vector<RouleauScore>& scores,
                       const RouleauParams& p) {
    std::string out = "subject_id,face,numbers,hands,total,decision\n";
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const auto& s = scores[i];
        out += fmt::format("{},{},{},{},{},{}\n", tests[i].subject_id, s.face_pts, s.numbers_pts, s.hands_pts, s.total,
                           classify(s, p) == Decision::Impaired ? "impaired" : "healthy");
    }
    return out;
}

void write_reports(const fs::path& dir, const std::vector<EvalReport>& reports) {
    for (const auto& r : reports) {
        std::string stem = r.method;
        for (auto& ch : stem) ch = ch == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        write_file(dir / fmt::format("{}__{}.txt", r.task, stem), report_text(r));
    }
    write_file(dir / "reports.csv", reports_csv(reports));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital clock drawing test pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read flags from a key=value file");

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a synthetic cohort");
    std::string gen_preset = "default", gen_counts = "HC=406,MID=151,VCD=151,PD=151", gen_out, gen_overrides;
    std::uint64_t gen_seed = 7;
    gen->add_option("--preset", gen_preset, "Phenotype presets: default or ideal")
        ->check(CLI::IsMember({"default", "ideal"}))
        ->capture_default_str();
    gen->add_option("--seed", gen_seed, "Cohort seed")->capture_default_str();
    gen->add_option("--counts", gen_counts, "Subjects per group, e.g. HC=406,MID=151")->capture_default_str();
    gen->add_option("--phenotypes", gen_overrides, "key=value phenotype overrides, e.g. mid.draw_speed_cm_per_s=3")
        ->check(CLI::ExistingFile);
    gen->add_option("--out", gen_out, "Output directory for strokes.csv and labels.csv")->required();

    // extract
    auto* ext = app.add_subcommand("extract", "Compute the feature table");
    Inputs ext_in;
    std::string ext_set = "all", ext_out;
    bool ext_binary = false;
    add_inputs(ext, ext_in, false);
    ext->add_option("--features", ext_set, "Feature set")->check(CLI::IsMember({"all", "simplest"}))->capture_default_str();
    ext->add_flag("--binarize", ext_binary, "Apply catalog cutpoints");
    ext->add_option("--out", ext_out, "Output CSV (default: stdout)");

    // rouleau
    auto* rou = app.add_subcommand("rouleau", "Operationalized Rouleau scoring");
    rou->require_subcommand(1);
    auto* rou_score = rou->add_subcommand("score", "Score every test");
    auto* rou_fit = rou->add_subcommand("fit", "Fit thresholds by training AUC");
    Inputs rou_in;
    std::string rou_params, rou_out, rou_clock = "command", rou_task = "all3";
    add_inputs(rou_score, rou_in, false);
    rou_score->add_option("--params", rou_params, "Params file (default thresholds if omitted)")
        ->check(CLI::ExistingFile);
    rou_score->add_option("--clock", rou_clock, "Clock to score")->check(CLI::IsMember({"command", "copy"}))
        ->capture_default_str();
    rou_score->add_option("--out", rou_out, "Output CSV (default: stdout)");
    add_inputs(rou_fit, rou_in, true);
    rou_fit->add_option("--task", rou_task, "Screening task")->check(CLI::IsMember(kTaskTokens))->capture_default_str();
    rou_fit->add_option("--clock", rou_clock, "Clock to score")->check(CLI::IsMember({"command", "copy"}))
        ->capture_default_str();
    rou_fit->add_option("--out", rou_out, "Output params file (default: stdout)");

    // slim
    auto* slim = app.add_subcommand("slim", "Train or apply SLIM scoring systems");
    slim->require_subcommand(1);
    auto* slim_train = slim->add_subcommand("train", "Train one model on all subjects of a task");
    auto* slim_pred = slim->add_subcommand("predict", "Apply a model file");
    Inputs slim_in;
    SlimFlags slim_flags;
    std::string slim_task = "mid", slim_set = "all", slim_out, slim_model;
    add_inputs(slim_train, slim_in, true);
    slim_train->add_option("--task", slim_task, "Screening task")->check(CLI::IsMember(kTaskTokens))
        ->capture_default_str();
    slim_train->add_option("--features", slim_set, "Feature set")->check(CLI::IsMember({"all", "simplest"}))
        ->capture_default_str();
    slim_flags.add_to(slim_train, true);
    slim_train->add_option("--out", slim_out, "Model file (default: stdout)");
    add_inputs(slim_pred, slim_in, false);
    slim_pred->add_option("--model", slim_model, "Model file")->required()->check(CLI::ExistingFile);
    slim_pred->add_option("--out", slim_out, "Output CSV (default: stdout)");

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "Nested cross-validation of one method");
    Inputs eva_in;
    SlimFlags eva_flags;
    std::string eva_task = "mid", eva_method = "slim", eva_set = "all", eva_out;
    int eva_folds = 5, eva_inner = 5;
    std::uint64_t eva_seed = 7;
    add_inputs(eva, eva_in, true);
    eva->add_option("--task", eva_task, "Screening task")->check(CLI::IsMember(kTaskTokens))->capture_default_str();
    eva->add_option("--method", eva_method, "Method")->check(CLI::IsMember({"slim", "rouleau"}))->capture_default_str();
    eva->add_option("--features", eva_set, "SLIM feature set")->check(CLI::IsMember({"all", "simplest"}))
        ->capture_default_str();
    eva->add_option("--folds", eva_folds, "Outer folds")->check(CLI::Range(2, 100))->capture_default_str();
    eva->add_option("--inner-folds", eva_inner, "Inner folds")->check(CLI::Range(2, 100))->capture_default_str();
    eva->add_option("--seed", eva_seed, "Fold seed")->capture_default_str();
    eva_flags.add_to(eva, false);
    eva->add_option("--out", eva_out, "Output directory for the report files")->required();

    // render
    auto* ren = app.add_subcommand("render", "Render a model as a scoring sheet");
    std::string ren_model, ren_catalog, ren_out;
    ren->add_option("--model", ren_model, "Model file")->required()->check(CLI::ExistingFile);
    ren->add_option("--catalog", ren_catalog, "Feature catalog file (default: built-in)")->check(CLI::ExistingFile);
    ren->add_option("--out", ren_out, "Output file (default: stdout)");

    // repro
    auto* rep = app.add_subcommand("repro", "Generate, extract, evaluate and tabulate the synthetic benchmark");
    std::uint64_t rep_seed = 7;
    std::string rep_counts = "HC=406,MID=151,VCD=151,PD=151", rep_out = "repro";
    std::uint64_t rep_budget = default_benchmark_slim_config().node_budget;
    rep->add_option("--seed", rep_seed, "Cohort and fold seed")->capture_default_str();
    rep->add_option("--counts", rep_counts, "Subjects per group")->capture_default_str();
    rep->add_option("--node-budget", rep_budget, "Branch-and-bound expansions per training")->capture_default_str();
    rep->add_option("--out", rep_out, "Output directory")->capture_default_str();
    std::string rep_overrides;
    rep->add_option("--phenotypes", rep_overrides, "key=value phenotype overrides")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*gen) {
            GeneratorConfig cfg;
            cfg.seed = gen_seed;
            cfg.counts = parse_counts(gen_counts);
            auto presets = default_presets();
            if (gen_preset == "ideal") {
                for (auto& [g, p] : presets) p = PhenotypeParams::ideal(g);
            }
            if (!gen_overrides.empty()) {
                const std::string text = read_file(gen_overrides);
                try {
                    apply_generator_config(text, cfg, presets);
                } catch (const Error& e) {
                    throw DataError(fmt::format("{}: {}", gen_overrides, e.what()));
                }
            }
            const auto tests = generate_dataset(cfg, presets);
            write_file(fs::path(gen_out) / "strokes.csv", serialize_strokes(tests));
            write_file(fs::path(gen_out) / "labels.csv", serialize_labels(tests));
        } else if (*ext) {
            const auto catalog = load_catalog(ext_in);
            const auto tests = load_tests(ext_in);
            std::vector<FeatureVector> vectors;
            for (const auto& t : tests) {
                auto v = extract(t, catalog, parse_set(ext_set));
                vectors.push_back(ext_binary ? binarize(v, catalog) : std::move(v));
            }
            emit(ext_out, features_csv(tests, vectors));
        } else if (*rou_score) {
            const auto catalog = load_catalog(rou_in);
            const auto tests = load_tests(rou_in);
            const RouleauParams p = rou_params.empty() ? RouleauParams{}
                                                       : parse_file(rou_params, [](const std::string& t) {
                                                             return parse_params(t);
                                                         });
            const ClockKind clock = rou_clock == "copy" ? ClockKind::Copy : ClockKind::Command;
            std::vector<RouleauScore> scores;
            for (const auto& t : tests) scores.push_back(rouleau_total(extract(t, catalog, FeatureSet::All), p, clock));
            emit(rou_out, scores_csv(tests, scores, p));
        } else if (*rou_fit) {
            const auto catalog = load_catalog(rou_in);
            const Cohort cohort = build_cohort(load_tests(rou_in), catalog);
            const TaskData td = task_data(cohort, parse_task(rou_task));
            const ClockKind clock = rou_clock == "copy" ? ClockKind::Copy : ClockKind::Command;
            std::vector<RouleauInputs> x;
            std::vector<bool> y;
            for (std::size_t k = 0; k < td.members.size(); ++k) {
                x.push_back(rouleau_inputs(cohort.raw[td.members[k]], clock));
                y.push_back(td.labels[k] == 1);
            }
            const RouleauFit fit = fit_params(x, y);
            emit(rou_out, fmt::format("# training_auc={:.6f}\n{}", fit.training_auc, serialize_params(fit.params)));
        } else if (*slim_train) {
            const auto catalog = load_catalog(slim_in);
            const Cohort cohort = build_cohort(load_tests(slim_in), catalog);
            const Task task = parse_task(slim_task);
            const TaskData td = task_data(cohort, task);
            const BinaryDataset d = task_dataset(cohort, td, catalog, parse_set(slim_set));
            SlimConfig cfg = slim_flags.config();
            cfg.u = understandability(d, catalog);
            SlimModel m = train(d, cfg);
            m.target = std::string(task_target(task));
            emit(slim_out, serialize_model(m));
        } else if (*slim_pred) {
            const auto catalog = load_catalog(slim_in);
            const auto tests = load_tests(slim_in);
            const SlimModel m = parse_file(slim_model, [](const std::string& t) { return parse_model(t); });
            std::string out = "subject_id,score,prediction\n";
            for (const auto& t : tests) {
                const auto v = binarize(extract(t, catalog, FeatureSet::All), catalog);
                out += fmt::format("{},{},{}\n", t.subject_id, score(m, v), predict(m, v));
            }
            emit(slim_out, out);
        } else if (*eva) {
            const auto catalog = load_catalog(eva_in);
            const Cohort cohort = build_cohort(load_tests(eva_in), catalog);
            BenchmarkOptions opt;
            opt.cv = {eva_folds, eva_inner, eva_seed};
            opt.slim_base = eva_flags.config();
            const Task task = parse_task(eva_task);
            const EvalReport r = eva_method == "rouleau"
                                     ? evaluate_rouleau(cohort, task, opt)
                                     : evaluate_slim(cohort, task, parse_set(eva_set), catalog, opt);
            write_reports(eva_out, {r});
            std::cout << report_text(r);
        } else if (*ren) {
            const FeatureCatalog catalog =
                ren_catalog.empty() ? default_catalog()
                                    : parse_file(ren_catalog, [](const std::string& t) { return parse_catalog(t); });
            const SlimModel m = parse_file(ren_model, [](const std::string& t) { return parse_model(t); });
            emit(ren_out, render(m, catalog));
        } else if (*rep) {
            const fs::path root(rep_out);
            GeneratorConfig cfg;
            cfg.seed = rep_seed;
            cfg.counts = parse_counts(rep_counts);
            auto presets = default_presets();
            if (!rep_overrides.empty()) {
                const std::string text = read_file(rep_overrides);
                try {
                    apply_generator_config(text, cfg, presets);
                } catch (const Error& e) {
                    throw DataError(fmt::format("{}: {}", rep_overrides, e.what()));
                }
            }
            const auto generated = generate_dataset(cfg, presets);
            const std::string strokes_text = serialize_strokes(generated);
            const std::string labels_text = serialize_labels(generated);
            write_file(root / "data" / "strokes.csv", strokes_text);
            write_file(root / "data" / "labels.csv", labels_text);
            // Work from the written precision so the staged commands reproduce these numbers.
            auto tests = parse_strokes(strokes_text);
            attach_labels(tests, parse_labels(labels_text));

            const FeatureCatalog& catalog = default_catalog();
            const Cohort cohort = build_cohort(std::move(tests), catalog);
            write_file(root / "data" / "features.csv", features_csv(cohort.tests, cohort.raw));

            BenchmarkOptions opt;
            opt.cv.seed = rep_seed;
            opt.slim_base.node_budget = rep_budget;
            const BenchmarkResult result = run_benchmark(cohort, catalog, opt);
            write_reports(root / "reports", result.reports);
            for (const auto& [stem, model] : result.models) {
                write_file(root / "models" / (stem + ".slim"), serialize_model(model));
                write_file(root / "models" / (stem + ".sheet.txt"), render(model, catalog));
            }
            write_file(root / "benchmark.txt", result.table);
            std::cout << result.table;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
