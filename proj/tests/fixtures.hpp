#pragma once

// Hand-built drawings that reach each point level of the Rouleau items.
// Shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <string>
#include <vector>

#include "dcdt/features.hpp"
#include "dcdt/random.hpp"
#include "dcdt/rouleau.hpp"
#include "dcdt/slim.hpp"
#include "dcdt/synthgen.hpp"

namespace dcdt::fixtures {

enum class Item { Face, Numbers, Hands };

struct RouleauFixture {
    std::string name;
    Item item;
    int expected;
    DrawingPlan plan;  // command clock; the copy clock is ideal
};

inline DigitGlyph& glyph(DrawingPlan& plan, int value) {
    return *std::find_if(plan.digits.begin(), plan.digits.end(), [&](const DigitGlyph& g) { return g.value == value; });
}

inline void drop_digit(DrawingPlan& plan, int value) {
    plan.digits.erase(std::remove_if(plan.digits.begin(), plan.digits.end(),
                                     [&](const DigitGlyph& g) { return g.value == value; }),
                      plan.digits.end());
}

inline std::vector<RouleauFixture> rouleau_fixtures() {
    std::vector<RouleauFixture> out;
    const auto add = [&](std::string name, Item item, int expected, auto edit) {
        DrawingPlan plan = ideal_plan();
        edit(plan);
        out.push_back({std::move(name), item, expected, std::move(plan)});
    };

    add("face intact", Item::Face, 2, [](DrawingPlan&) {});
    add("face with a 120 degree gap", Item::Face, 1, [](DrawingPlan& p) { p.gap_deg = 120.0; });
    add("face strongly elliptical", Item::Face, 1, [](DrawingPlan& p) { p.eccentricity = 0.8; });
    add("face absent", Item::Face, 0, [](DrawingPlan& p) { p.clockface = false; });
    add("face distorted and mostly open", Item::Face, 0, [](DrawingPlan& p) {
        p.eccentricity = 0.8;
        p.gap_deg = 200.0;
    });

    add("numbers all present in order", Item::Numbers, 4, [](DrawingPlan&) {});
    add("numbers shifted by 40 degrees", Item::Numbers, 3, [](DrawingPlan& p) {
        for (auto& g : p.digits) g.angle_deg = wrap_degrees(g.angle_deg + 40.0);
    });
    add("number 7 missing", Item::Numbers, 2, [](DrawingPlan& p) { drop_digit(p, 7); });
    add("numbers counterclockwise", Item::Numbers, 2, [](DrawingPlan& p) {
        for (auto& g : p.digits) g.angle_deg = wrap_degrees(360.0 - g.angle_deg);
    });
    add("number 7 missing and 1 far off", Item::Numbers, 1, [](DrawingPlan& p) {
        drop_digit(p, 7);
        glyph(p, 1).angle_deg = 100.0;
    });
    add("two numbers only", Item::Numbers, 0, [](DrawingPlan& p) {
        p.digits.erase(std::remove_if(p.digits.begin(), p.digits.end(),
                                      [](const DigitGlyph& g) { return g.value != 12 && g.value != 6; }),
                       p.digits.end());
    });

    add("hands at 11:10", Item::Hands, 4, [](DrawingPlan&) {});
    add("minute hand 30 degrees off", Item::Hands, 3, [](DrawingPlan& p) { p.minute->angle_deg = 90.0; });
    add("hands of equal length", Item::Hands, 3, [](DrawingPlan& p) { p.hour->length_frac = p.minute->length_frac; });
    add("minute hand on the 10", Item::Hands, 2, [](DrawingPlan& p) { p.minute->angle_deg = kDigitTenDeg; });
    add("only the minute hand", Item::Hands, 1, [](DrawingPlan& p) { p.hour.reset(); });
    add("no hands", Item::Hands, 0, [](DrawingPlan& p) {
        p.hour.reset();
        p.minute.reset();
    });
    add("perseverating hands", Item::Hands, 0, [](DrawingPlan& p) {
        p.extra_hands = {HandSpec{150.0, 0.6, false}, HandSpec{240.0, 0.5, false}};
    });
    return out;
}

inline ClockTest fixture_test(const RouleauFixture& f) { return build_test("fixture", f.plan, ideal_plan()); }

inline int fixture_points(const RouleauFixture& f, const RouleauParams& p = {}) {
    const FeatureVector fv = extract(fixture_test(f), default_catalog(), FeatureSet::All);
    const RouleauScore s = rouleau_total(fv, p);
    switch (f.item) {
        case Item::Face: return s.face_pts;
        case Item::Numbers: return s.numbers_pts;
        case Item::Hands: return s.hands_pts;
    }
    return -1;
}

// Small random SLIM instance with both classes present. Rows follow a noisy
// planted rule so that optimal models are neither empty nor trivial.
inline BinaryDataset random_instance(Rng& rng, std::size_t max_n, std::size_t max_j) {
    BinaryDataset d;
    const std::size_t n = 4 + rng.below(max_n - 3);
    const std::size_t j = 1 + rng.below(max_j);
    for (std::size_t k = 0; k < j; ++k) d.names.push_back("f" + std::to_string(k));
    std::vector<int> w(j);
    for (auto& v : w) v = static_cast<int>(rng.below(5)) - 2;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint8_t> row(j);
        int s = 0;
        for (std::size_t k = 0; k < j; ++k) {
            row[k] = rng.bernoulli(0.5) ? 1 : 0;
            s += row[k] * w[k];
        }
        d.X.push_back(row);
        const bool pos = rng.bernoulli(0.2) ? rng.bernoulli(0.5) : s > 0;
        d.y.push_back(pos ? 1 : -1);
    }
    d.y[0] = 1;
    d.y[1] = -1;
    return d;
}

}  // namespace dcdt::fixtures
