#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "dcdt/slim.hpp"
#include "fixtures.hpp"

using namespace dcdt;

namespace {

std::string slurp(const std::string& rel) {
    std::ifstream in(std::string(DCDT_SOURCE_DIR) + "/" + rel, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SlimModel table3() { return parse_model(slurp("ref/table3.slim")); }

// Published points of the reference sheet, read with the strict "SCORE < 10" rule.
const int kSheetPoints[9] = {5, 5, 1, -3, -1, -1, -6, 4, -3};

FeatureVector sheet_vector(const SlimModel& m, unsigned mask) {
    FeatureVector v;
    v.binarized = true;
    v.names = m.names;
    for (std::size_t k = 0; k < m.names.size(); ++k) v.values.push_back((mask >> k) & 1u);
    return v;
}

unsigned mask_of(std::initializer_list<int> items) {
    unsigned m = 0;
    for (int i : items) m |= 1u << (i - 1);
    return m;
}

// Naive per-example recomputation of the objective.
double naive_objective(const std::vector<int>& lambda, int lambda0, const BinaryDataset& d, const SlimConfig& cfg) {
    double loss = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        long s = lambda0;
        for (std::size_t j = 0; j < d.j(); ++j) s += static_cast<long>(lambda[j]) * d.X[i][j];
        const bool wrong = d.y[i] == 1 ? !(s > 0) : (s > 0);
        if (wrong) loss += (d.y[i] == 1 ? cfg.C_plus : cfg.C_minus) / static_cast<double>(d.n());
    }
    double pen = 0.0;
    for (std::size_t j = 0; j < d.j(); ++j) {
        if (lambda[j] != 0) pen += cfg.C0 + cfg.C1 * (cfg.u.empty() ? 1.0 : cfg.u[j]);
    }
    return loss + pen;
}

std::vector<int> random_lambda(Rng& rng, std::size_t j, int bound) {
    std::vector<int> l(j);
    for (auto& v : l) v = static_cast<int>(rng.below(2 * bound + 1)) - bound;
    return l;
}

double usum(const SlimModel& m, const SlimConfig& cfg) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
        if (m.coefficients[j] != 0) s += cfg.u[j];
    }
    return s;
}

}  // namespace

TEST_CASE("reference model decisions") {
    const SlimModel m = table3();
    REQUIRE(m.names.size() == 9);
    CHECK(m.target == "MEMORY IMPAIRMENT DISORDER");
    for (std::size_t k = 0; k < 9; ++k) CHECK(-m.coefficients[k] == kSheetPoints[k]);

    const FeatureVector healthy = sheet_vector(m, mask_of({1, 2, 3, 8}));
    CHECK(sheet_score(m, healthy) == 15);
    CHECK(predict(m, healthy) == -1);

    const FeatureVector hands = sheet_vector(m, mask_of({1, 2, 7}));
    CHECK(sheet_score(m, hands) == 4);
    CHECK(predict(m, hands) == 1);

    const FeatureVector tie = sheet_vector(m, mask_of({1, 2}));
    CHECK(sheet_score(m, tie) == 10);
    CHECK(score(m, tie) == 0);
    CHECK(predict(m, tie) == -1);

    for (unsigned mask = 0; mask < 512; ++mask) {
        int pts = 0;
        for (int k = 0; k < 9; ++k) pts += (mask >> k) & 1u ? kSheetPoints[k] : 0;
        const FeatureVector v = sheet_vector(m, mask);
        CHECK(sheet_score(m, v) == pts);
        CHECK(predict(m, v) == (pts < 10 ? 1 : -1));
    }
}

TEST_CASE("reference model renders the golden sheet") {
    const std::string sheet = render(table3(), default_catalog());
    CHECK(sheet == slurp("ref/table3_sheet.txt"));
    CHECK(sheet.rfind("PREDICT MEMORY IMPAIRMENT DISORDER IF SCORE < 10\n", 0) == 0);
    const SlimModel back = parse_sheet(sheet, default_catalog());
    CHECK(back.coefficients == table3().coefficients);
    CHECK(back.intercept == 10);
}

TEST_CASE("render a one-feature model") {
    SlimModel m;
    m.names = {"cmd_hour_hand_present"};
    m.coefficients = {1};
    m.intercept = 0;
    m.target = "X";
    const std::string sheet = render(m, default_catalog());
    CHECK(sheet.rfind("PREDICT X IF SCORE < 0\n", 0) == 0);
    CHECK(std::count(sheet.begin(), sheet.end(), '&') == 1);
    CHECK(sheet.find("& -1") != std::string::npos);
}

TEST_CASE("sheet round trip preserves predictions") {
    const FeatureCatalog& cat = default_catalog();
    Rng rng(31);
    for (int k = 0; k < 1000; ++k) {
        SlimModel m;
        m.target = "SOME CONDITION";
        for (const auto& f : cat.features) {
            if (rng.bernoulli(0.15) && m.names.size() < 10) {
                m.names.push_back(f.name);
                m.coefficients.push_back(static_cast<int>(rng.below(10)) + 1);
                if (rng.bernoulli(0.5)) m.coefficients.back() = -m.coefficients.back();
            }
        }
        m.intercept = static_cast<int>(rng.below(41)) - 20;
        const SlimModel back = parse_sheet(render(m, cat), cat);

        FeatureVector x;
        x.binarized = true;
        for (const auto& f : cat.features) {
            x.names.push_back(f.name);
            x.values.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
        }
        CHECK(predict(back, x) == predict(m, x));
        CHECK(score(back, x) == score(m, x));
    }
}

TEST_CASE("model file round trip and errors") {
    const SlimModel m = table3();
    const SlimModel back = parse_model(serialize_model(m));
    CHECK(back.names == m.names);
    CHECK(back.coefficients == m.coefficients);
    CHECK(back.intercept == m.intercept);
    CHECK(back.target == m.target);
    CHECK_THROWS_AS(parse_model("slim-model v2\n__intercept__\t1\n"), ParseError);
    CHECK_THROWS_AS(parse_model("slim-model v1\na\t1\n"), ParseError);
    CHECK_THROWS_AS(parse_model("slim-model v1\na\t1\na\t2\n__intercept__\t0\n"), ParseError);
    CHECK_THROWS_AS(parse_model("slim-model v1\na 1\n__intercept__\t0\n"), ParseError);

    FeatureVector raw = sheet_vector(m, 0);
    raw.binarized = false;
    CHECK_THROWS_AS(score(m, raw), Error);
    FeatureVector partial = sheet_vector(m, 0);
    partial.names.pop_back();
    partial.values.pop_back();
    CHECK_THROWS_AS(score(m, partial), Error);
    CHECK_THROWS_AS(parse_sheet("PREDICT X IF SCORE < 1\nCommand clock:\n1. Not a real predicate & +1\n",
                                default_catalog()),
                    ParseError);
}

TEST_CASE("objective examples") {
    BinaryDataset d;
    d.names = {"a"};
    d.X = {{1}, {1}, {0}, {0}};
    d.y = {1, 1, -1, -1};
    SlimConfig cfg;
    cfg.C0 = 0.0;
    CHECK(objective(std::vector<int>{0}, 0, d, cfg) == 0.5);

    cfg.C0 = 0.01;
    cfg.C1 = 0.001;
    cfg.u = {1.0};
    CHECK(objective(std::vector<int>{1}, 0, d, cfg) == doctest::Approx(0.011).epsilon(1e-12));

    Rng rng(2);
    for (int k = 0; k < 500; ++k) {
        const BinaryDataset r = fixtures::random_instance(rng, 30, 6);
        SlimConfig c;
        c.C_plus = rng.uniform(0.1, 3);
        c.C_minus = rng.uniform(0.1, 3);
        c.C0 = rng.uniform(0, 0.1);
        c.C1 = rng.uniform(0, 0.1);
        for (std::size_t j = 0; j < r.j(); ++j) c.u.push_back(1.0 + static_cast<double>(rng.below(4)));
        const auto l = random_lambda(rng, r.j(), 5);
        const int l0 = static_cast<int>(rng.below(11)) - 5;
        CHECK(objective(l, l0, r, c) == doctest::Approx(naive_objective(l, l0, r, c)).epsilon(1e-12));
    }
}

TEST_CASE("label symmetry") {
    Rng rng(5);
    for (int k = 0; k < 500; ++k) {
        const BinaryDataset d = fixtures::random_instance(rng, 30, 5);
        BinaryDataset flipped = d;
        for (auto& y : flipped.y) y = -y;
        SlimConfig c;
        c.C_plus = rng.uniform(0.1, 3);
        c.C_minus = rng.uniform(0.1, 3);
        c.C0 = rng.uniform(0, 0.1);
        SlimConfig swapped = c;
        std::swap(swapped.C_plus, swapped.C_minus);

        const auto l = random_lambda(rng, d.j(), 4);
        const int l0 = static_cast<int>(rng.below(9)) - 4;
        std::vector<int> neg(l.size());
        std::transform(l.begin(), l.end(), neg.begin(), [](int v) { return -v; });
        // sign(0) belongs to the healthy class, so the exact mirror moves the intercept by one
        CHECK(objective(neg, -l0 + 1, flipped, swapped) == doctest::Approx(objective(l, l0, d, c)).epsilon(1e-12));

        bool zero_score = false;
        for (std::size_t i = 0; i < d.n(); ++i) {
            long s = l0;
            for (std::size_t j = 0; j < d.j(); ++j) s += l[j] * d.X[i][j];
            zero_score |= s == 0;
        }
        if (!zero_score) {
            CHECK(objective(neg, -l0, flipped, swapped) == doctest::Approx(objective(l, l0, d, c)).epsilon(1e-12));
        }
    }
}

TEST_CASE("train matches exhaustive enumeration") {
    Rng rng(77);
    int proven = 0;
    for (int k = 0; k < 150; ++k) {
        const BinaryDataset d = fixtures::random_instance(rng, 30, 4);
        SlimConfig c;
        c.coeff_bound = 3;
        c.C_minus = rng.bernoulli(0.5) ? 1.0 : 2.0;
        c.C0 = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0, 0.05);
        c.C1 = rng.bernoulli(0.5) ? 0.0 : 0.005;
        for (std::size_t j = 0; j < d.j(); ++j) c.u.push_back(1.0 + static_cast<double>(rng.below(3)));
        c.node_budget = 0;
        const SlimModel t = train(d, c);
        const SlimModel b = brute_force_train(d, c);
        REQUIRE(t.optimality == Optimality::ProvenOptimal);
        ++proven;
        CHECK(t.objective == b.objective);
        CHECK(t.coefficients == b.coefficients);
        CHECK(t.objective == doctest::Approx(objective(t.coefficients, t.intercept, d, c)).epsilon(1e-12));
        CHECK(t.nonzero_count() <= c.max_features);
    }
    CHECK(proven == 150);
}

TEST_CASE("trivial instances") {
    BinaryDataset d;
    d.names = {"sep", "noise"};
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        const bool pos = i % 2 == 0;
        d.X.push_back({static_cast<std::uint8_t>(pos), static_cast<std::uint8_t>(rng.below(2))});
        d.y.push_back(pos ? 1 : -1);
    }
    SlimConfig c;
    c.C0 = 0.01;
    const SlimModel m = train(d, c);
    CHECK(m.nonzero_count() == 1);
    CHECK(m.coefficients[0] != 0);
    for (std::size_t i = 0; i < d.n(); ++i) CHECK(predict(m, d.X[i]) == d.y[i]);

    BinaryDataset one = d;
    for (auto& r : one.X) r.pop_back();
    one.names.pop_back();
    SlimConfig small;
    small.coeff_bound = 1;
    CHECK(train(one, small).objective == brute_force_train(one, small).objective);

    // with no penalties the optimum is at least as good as every stump
    SlimConfig free;
    free.C0 = 0.0;
    free.coeff_bound = 3;
    for (int k = 0; k < 50; ++k) {
        const BinaryDataset r = fixtures::random_instance(rng, 30, 4);
        const double best = brute_force_train(r, free).objective;
        for (std::size_t j = 0; j < r.j(); ++j) {
            for (int v = -3; v <= 3; ++v) {
                std::vector<int> l(r.j(), 0);
                l[j] = v;
                for (int l0 = -4; l0 <= 4; ++l0) CHECK(best <= objective(l, l0, r, free) + 1e-12);
            }
        }
    }
}

TEST_CASE("penalties shrink the optimum monotonically") {
    Rng rng(19);
    for (int k = 0; k < 20; ++k) {
        const BinaryDataset d = fixtures::random_instance(rng, 30, 4);
        SlimConfig c;
        c.coeff_bound = 3;
        for (std::size_t j = 0; j < d.j(); ++j) c.u.push_back(1.0 + static_cast<double>(rng.below(4)));
        int last_nnz = 100;
        for (double c0 : {0.0, 0.005, 0.02, 0.06, 0.2}) {
            c.C0 = c0;
            const int nnz = brute_force_train(d, c).nonzero_count();
            CHECK(nnz <= last_nnz);
            last_nnz = nnz;
        }
        c.C0 = 0.001;
        double last_u = 1e9;
        for (double c1 : {0.0, 0.002, 0.01, 0.04, 0.15}) {
            c.C1 = c1;
            const SlimModel b = brute_force_train(d, c);
            CHECK(usum(b, c) <= last_u);
            last_u = usum(b, c);
        }
    }
}

TEST_CASE("duplicating every example keeps the optimum") {
    Rng rng(23);
    for (int k = 0; k < 30; ++k) {
        const BinaryDataset d = fixtures::random_instance(rng, 15, 4);
        BinaryDataset twice = d;
        twice.X.insert(twice.X.end(), d.X.begin(), d.X.end());
        twice.y.insert(twice.y.end(), d.y.begin(), d.y.end());
        SlimConfig c;
        c.coeff_bound = 3;
        const auto l = random_lambda(rng, d.j(), 3);
        CHECK(objective(l, 1, twice, c) == doctest::Approx(objective(l, 1, d, c)).epsilon(1e-12));
        const SlimModel a = train(d, c), b = train(twice, c);
        CHECK(a.coefficients == b.coefficients);
        CHECK(a.intercept == b.intercept);
    }
}

TEST_CASE("cardinality cap") {
    Rng rng(29);
    for (int k = 0; k < 40; ++k) {
        const BinaryDataset d = fixtures::random_instance(rng, 30, 4);
        SlimConfig c;
        c.coeff_bound = 3;
        c.C0 = 0.0;
        c.max_features = 1 + static_cast<int>(rng.below(2));
        c.node_budget = 0;
        const SlimModel t = train(d, c);
        CHECK(t.nonzero_count() <= c.max_features);
        CHECK(t.objective == brute_force_train(d, c).objective);
    }

    BinaryDataset wide;
    for (int j = 0; j < 14; ++j) wide.names.push_back("w" + std::to_string(j));
    for (int i = 0; i < 60; ++i) {
        std::vector<std::uint8_t> row(14);
        int ones = 0;
        for (auto& v : row) ones += v = static_cast<std::uint8_t>(rng.below(2));
        wide.X.push_back(row);
        wide.y.push_back(ones > 7 ? 1 : -1);
    }
    wide.y[0] = 1;
    wide.y[1] = -1;
    SlimConfig c;
    c.C0 = 0.0;
    c.node_budget = 2000;
    CHECK(train(wide, c).nonzero_count() <= 10);
    c.max_features = 3;
    CHECK(train(wide, c).nonzero_count() <= 3);
}

TEST_CASE("budgets and errors") {
    Rng rng(3);
    BinaryDataset d;
    for (int j = 0; j < 12; ++j) d.names.push_back("b" + std::to_string(j));
    for (int i = 0; i < 80; ++i) {
        std::vector<std::uint8_t> row(12);
        for (auto& v : row) v = static_cast<std::uint8_t>(rng.below(2));
        d.X.push_back(row);
        d.y.push_back(rng.bernoulli(0.5) ? 1 : -1);
    }
    SlimConfig c;
    c.node_budget = 5;
    const SlimModel m = train(d, c);
    CHECK(m.optimality == Optimality::BudgetBest);
    CHECK(m.objective == doctest::Approx(objective(m.coefficients, m.intercept, d, c)).epsilon(1e-12));

    CHECK_THROWS_AS(brute_force_train(d, c), Error);
    BinaryDataset single = d;
    std::fill(single.y.begin(), single.y.end(), 1);
    CHECK_THROWS_AS(train(single, c), Error);
    BinaryDataset empty = d;
    empty.names.clear();
    for (auto& r : empty.X) r.clear();
    CHECK_THROWS_AS(train(empty, c), Error);

    SlimConfig bad;
    bad.max_features = 11;
    CHECK_THROWS_AS(bad.validate(3), ConfigError);
    bad = SlimConfig{};
    bad.C_plus = 0.0;
    CHECK_THROWS_AS(bad.validate(3), ConfigError);
    bad = SlimConfig{};
    bad.u = {1.0};
    CHECK_THROWS_AS(bad.validate(3), ConfigError);
    CHECK_THROWS_AS(train(d, bad), ConfigError);

    BinaryDataset nonbinary = d;
    nonbinary.X[3][2] = 2;
    CHECK_THROWS_AS(nonbinary.validate(), Error);
}
