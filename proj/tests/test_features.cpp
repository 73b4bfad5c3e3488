#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <cstring>

#include "dcdt/features.hpp"
#include "dcdt/synthgen.hpp"

using namespace dcdt;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

ClockTest ideal_test() { return build_test("ideal", ideal_plan(), ideal_plan()); }

DigitGlyph& glyph(DrawingPlan& plan, int value) {
    return *std::find_if(plan.digits.begin(), plan.digits.end(), [&](const DigitGlyph& g) { return g.value == value; });
}

Stroke line_stroke(int id, SymbolKind kind, PenPoint from, PenPoint to, int steps) {
    Stroke s;
    s.id = id;
    s.label = SymbolLabel::of(kind);
    for (int i = 0; i <= steps; ++i) {
        const double f = static_cast<double>(i) / steps;
        s.points.push_back({from.x + f * (to.x - from.x), from.y + f * (to.y - from.y),
                            from.t + static_cast<std::int64_t>(std::llround(f * static_cast<double>(to.t - from.t)))});
    }
    return s;
}

void transform(ClockTest& t, double rot_deg, double dx, double dy) {
    const double r = -rot_deg * std::numbers::pi / 180.0;  // clockwise on the page
    for (ClockDrawing* d : {&t.command, &t.copy}) {
        for (auto& s : d->strokes) {
            for (auto& p : s.points) {
                const double x = p.x, y = p.y;
                p.x = std::cos(r) * x - std::sin(r) * y + dx;
                p.y = std::sin(r) * x + std::cos(r) * y + dy;
            }
        }
    }
}

FeatureVector vector_of(const FeatureCatalog& catalog, std::map<std::string, double> overrides) {
    FeatureVector v;
    v.names = catalog.names(FeatureSet::All);
    for (const auto& n : v.names) v.values.push_back(overrides.count(n) ? overrides[n] : 0.0);
    return v;
}

}  // namespace

TEST_CASE("digit census of the ideal clock") {
    const ClockTest t = ideal_test();
    const DigitCensus c = digit_census(t.command);
    for (int v = 1; v <= 12; ++v) {
        CHECK(c[v].present);
        CHECK(c[v].count == 1);
        CHECK(c[v].angle_deg >= 0.0);
        CHECK(c[v].angle_deg < 360.0);
    }
    CHECK(c.crossed_out == 0);
    CHECK(digit_order_correct(c));
    CHECK(digits_in_sequence(c));
    CHECK_FALSE(digits_counterclockwise(c));
    for (const auto& [digit, ok] : digit_eighth_correct(c)) CHECK_MESSAGE(ok, digit);
}

TEST_CASE("missing and repeated digits") {
    DrawingPlan plan = ideal_plan();
    plan.digits.erase(std::remove_if(plan.digits.begin(), plan.digits.end(),
                                     [](const DigitGlyph& g) { return g.value == 7; }),
                      plan.digits.end());
    DigitCensus c = digit_census(build_test("m", plan, plan).command);
    CHECK_FALSE(c[7].present);
    CHECK(c[7].count == 0);
    CHECK(c.distinct_present() == 11);
    CHECK_FALSE(digit_order_correct(c));
    CHECK_FALSE(digit_eighth_correct(c).at(7));

    PhenotypeParams p = PhenotypeParams::ideal();
    p.digit_repetition_prob = 1.0;
    const ClockTest rep = generate_test(p, "r", 3);
    c = digit_census(rep.command);
    for (int v = 1; v <= 12; ++v) CHECK(c[v].count >= 2);
    CHECK(c.any_repeated());
}

TEST_CASE("correct eighth") {
    DrawingPlan plan = ideal_plan();
    glyph(plan, 1).angle_deg = 30.0;
    glyph(plan, 2).angle_deg = 40.0;
    const auto eighths = digit_eighth_correct(digit_census(build_test("e", plan, plan).command));
    CHECK(eighths.at(1));
    CHECK_FALSE(eighths.at(2));
    CHECK(eighths.size() == kNonAnchorDigits.size());
}

TEST_CASE("digit order") {
    DrawingPlan ccw = ideal_plan();
    for (auto& g : ccw.digits) g.angle_deg = wrap_degrees(360.0 - g.angle_deg);
    const DigitCensus c1 = digit_census(build_test("c", ccw, ccw).command);
    CHECK_FALSE(digit_order_correct(c1));
    CHECK(digits_counterclockwise(c1));

    DrawingPlan swapped = ideal_plan();
    std::swap(glyph(swapped, 2).angle_deg, glyph(swapped, 3).angle_deg);
    const DigitCensus c2 = digit_census(build_test("s", swapped, swapped).command);
    CHECK_FALSE(digit_order_correct(c2));
    CHECK_FALSE(digits_counterclockwise(c2));
}

TEST_CASE("hand metrics") {
    DrawingPlan plan = ideal_plan();
    const ClockTest ideal = build_test("h", plan, plan);
    const ClockfaceGeometry face = clockface_geometry(ideal.command);
    HandMetrics h = hand_metrics(ideal.command, face.center);
    CHECK(h.minute.present);
    CHECK(h.minute.angle_error_deg == doctest::Approx(0.0).epsilon(1e-3).scale(1.0));
    CHECK(h.hour.angle_error_deg < 0.05);
    CHECK_FALSE(h.minute_points_to_10);
    CHECK(h.hour_arrowhead);
    CHECK(h.minute_arrowhead);
    CHECK(h.arrowheads_outward);
    CHECK_FALSE(h.perseveration);

    plan.minute->angle_deg = kDigitTenDeg;
    plan.hour->length_frac = 0.5;
    plan.minute->length_frac = 1.0;
    const ClockTest wrong = build_test("w", plan, plan);
    h = hand_metrics(wrong.command, clockface_geometry(wrong.command).center);
    CHECK(h.minute.angle_error_deg == doctest::Approx(120.0).epsilon(1e-3));
    CHECK(h.minute_points_to_10);
    REQUIRE(h.size_ratio);
    CHECK(*h.size_ratio == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(h.hour.length_cm == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(h.minute.length_cm == doctest::Approx(4.0).epsilon(1e-3));

    plan.hour.reset();
    const ClockTest one = build_test("o", plan, plan);
    h = hand_metrics(one.command, clockface_geometry(one.command).center);
    CHECK_FALSE(h.hour.present);
    CHECK(std::isnan(h.hour.angle_error_deg));
    CHECK_FALSE(h.size_ratio);
}

TEST_CASE("timing primitives") {
    ClockDrawing d;
    d.strokes.push_back(line_stroke(0, SymbolKind::Clockface, {0, 0, 0}, {5, 0, 1000}, 50));
    ClockTiming t = clock_timing(d);
    CHECK(t[Component::Clockface].speed_cm_s == doctest::Approx(5.0));
    CHECK(t.total_time_ms == doctest::Approx(1000.0));
    CHECK(t.stroke_count == 1);
    CHECK(std::isnan(t.mean_latency_ms));

    d.strokes.push_back(line_stroke(1, SymbolKind::HourHand, {0, 0, 1600}, {1, 1, 1900}, 10));
    t = clock_timing(d);
    CHECK(t.mean_latency_ms == doctest::Approx(600.0));
    CHECK(t.mean_pen_up_ms == doctest::Approx(600.0));
    CHECK(t.total_time_ms == doctest::Approx(1900.0));
    CHECK(t.ink_length_cm == doctest::Approx(5.0 + std::sqrt(2.0)));

    // same component: a pen-up pause but no latency between components
    ClockDrawing e;
    e.strokes.push_back(line_stroke(0, SymbolKind::Clockface, {0, 0, 0}, {5, 0, 1000}, 50));
    e.strokes.push_back(line_stroke(1, SymbolKind::Clockface, {5, 0, 1300}, {5, 5, 2300}, 50));
    t = clock_timing(e);
    CHECK(t.mean_pen_up_ms == doctest::Approx(300.0));
    CHECK(t[Component::Clockface].ink_time_ms == doctest::Approx(2000.0));
}

TEST_CASE("slow drawing fires the 60 second predicate") {
    DrawingPlan slow = ideal_plan();
    slow.default_latency_ms = 4000.0;
    const ClockTest t = build_test("slow", slow, ideal_plan());
    const FeatureVector raw = extract(t, default_catalog(), FeatureSet::All);
    CHECK(raw.at("cmd_total_time_ms") > 60000.0);
    const FeatureVector bin = binarize(raw, default_catalog());
    CHECK(bin.at("cmd_total_time_ms") == 1.0);
    CHECK(bin.at("copy_total_time_ms") == 0.0);
}

TEST_CASE("clockface gap follows the generator parameter") {
    for (double g : {10.0, 30.0, 60.0, 90.0}) {
        DrawingPlan plan = ideal_plan();
        plan.gap_deg = g;
        plan.face_start_deg = 200.0;
        const ClockTest t = build_test("g", plan, plan);
        const ClockfaceGeometry face = clockface_geometry(t.command);
        CHECK(face.closure_deg == doctest::Approx(g).epsilon(0.02));
        CHECK(face.largest_gap_deg >= g - 1.0);
    }
    const ClockfaceGeometry closed = clockface_geometry(ideal_test().command);
    CHECK(closed.closure_cm < 0.05);
    REQUIRE(closed.fit);
    CHECK(closed.fit->eccentricity < 0.05);
}

TEST_CASE("binarize") {
    const FeatureCatalog& cat = default_catalog();
    CHECK(binarize(vector_of(cat, {{"cmd_total_time_ms", 75000.0}}), cat).at("cmd_total_time_ms") == 1.0);
    CHECK(binarize(vector_of(cat, {{"cmd_total_time_ms", 60000.0}}), cat).at("cmd_total_time_ms") == 0.0);

    FeatureVector missing;
    missing.names = cat.names(FeatureSet::All);
    missing.values.assign(missing.names.size(), kNaN);
    const FeatureVector b = binarize(missing, cat);
    REQUIRE(b.names == missing.names);
    CHECK(b.binarized);
    for (std::size_t i = 0; i < b.names.size(); ++i) {
        const FeatureDef& def = cat.at(b.names[i]);
        const double abnormal = def.kind == FeatureKind::Binary ? def.abnormal : 1.0;
        CHECK_MESSAGE(b.values[i] == abnormal, b.names[i]);
    }

    const FeatureVector again = binarize(b, cat);
    CHECK(again.values == b.values);

    const FeatureVector real = binarize(extract(ideal_test(), cat, FeatureSet::Simplest), cat);
    const FeatureVector twice = binarize(real, cat);
    CHECK(twice.values == real.values);
    CHECK(twice.names == real.names);
}

TEST_CASE("ideal clocks sit at the healthy pole of the shipped sheet predicates") {
    const FeatureCatalog& cat = default_catalog();
    const FeatureVector raw = extract(ideal_test(), cat, FeatureSet::All);
    CHECK(raw.at("cmd_digits_complete_ordered") == 1.0);
    CHECK(raw.at("cmd_hour_hand_present") == 1.0);
    CHECK(raw.at("cmd_minute_hand_present") == 1.0);
    CHECK(raw.at("cmd_crossed_out_digits") == 0.0);
    const FeatureVector bin = binarize(raw, cat);
    for (const char* name :
         {"cmd_digits_complete_ordered", "cmd_hour_hand_present", "cmd_nonanchor_digits_correct_eighth",
          "cmd_crossed_out_digits", "cmd_two_hands_missing", "cmd_total_time_ms", "cmd_minute_points_to_10",
          "copy_nonanchor_digits_correct_eighth", "copy_digits_repeated"}) {
        const FeatureDef& def = cat.at(name);
        const double abnormal = def.kind == FeatureKind::Binary ? def.abnormal : 1.0;
        CHECK_MESSAGE(bin.at(name) != abnormal, name);
    }
}

TEST_CASE("extraction sets and determinism") {
    const FeatureCatalog& cat = default_catalog();
    PhenotypeParams p = PhenotypeParams::preset(Group::VCD);
    const ClockTest t = generate_test(p, "v", 99);
    const FeatureVector all = extract(t, cat, FeatureSet::All);
    const FeatureVector simple = extract(t, cat, FeatureSet::Simplest);
    CHECK(all.names == cat.names(FeatureSet::All));
    CHECK(simple.names == cat.names(FeatureSet::Simplest));
    const std::set<std::string> all_set(all.names.begin(), all.names.end());
    for (const auto& n : simple.names) CHECK(all_set.count(n) == 1);
    CHECK(simple.names.size() < all.names.size());
    for (const auto& n : simple.names) CHECK(cat.at(n).simplest);

    for (int k = 0; k < 10; ++k) {
        const FeatureVector again = extract(t, cat, FeatureSet::All);
        REQUIRE(again.values.size() == all.values.size());
        for (std::size_t i = 0; i < all.values.size(); ++i) {
            const bool same = (std::isnan(all.values[i]) && std::isnan(again.values[i])) ||
                              std::memcmp(&all.values[i], &again.values[i], sizeof(double)) == 0;
            CHECK(same);
        }
    }
}

TEST_CASE("translation invariance and rotation equivariance") {
    const ClockTest base = generate_test(PhenotypeParams::preset(Group::MID), "t", 5);
    const auto before = raw_features(base);

    ClockTest moved = base;
    transform(moved, 0.0, 3.25, -7.5);
    const auto after = raw_features(moved);
    for (const auto& [name, v] : before) {
        const double w = after.at(name);
        if (std::isnan(v)) {
            CHECK_MESSAGE(std::isnan(w), name);
        } else {
            CHECK_MESSAGE(std::abs(v - w) <= 1e-6 * std::max(1.0, std::abs(v)), name);
        }
    }

    ClockTest turned = base;
    transform(turned, 25.0, 0.0, 0.0);
    const HandMetrics h0 = hand_metrics(base.command, clockface_geometry(base.command).center);
    const HandMetrics h1 = hand_metrics(turned.command, clockface_geometry(turned.command).center);
    if (h0.minute.present) {
        CHECK(angular_difference(h1.minute.angle_deg, h0.minute.angle_deg + 25.0) < 1e-6);
    }
    if (h0.hour.present) CHECK(angular_difference(h1.hour.angle_deg, h0.hour.angle_deg + 25.0) < 1e-6);
    const DigitCensus c0 = digit_census(base.command), c1 = digit_census(turned.command);
    for (int v = 1; v <= 12; ++v) {
        if (c0[v].present) CHECK(angular_difference(c1[v].angle_deg, c0[v].angle_deg + 25.0) < 1e-6);
    }
}

TEST_CASE("understandability heights") {
    const FeatureCatalog& cat = default_catalog();
    CHECK(cat.at("cmd_total_time_ms").u == 1);
    CHECK(cat.at("both_total_time_ms").u == 2);
    CHECK(cat.at("cmd_hand_size_ratio").u == 3);
    for (const auto& f : cat.features) {
        CHECK(f.u >= 1);
        for (const auto& dep : f.dependencies) CHECK_MESSAGE(f.u > cat.at(dep).u, f.name);
    }
    CHECK_FALSE(cat.names(FeatureSet::Simplest).empty());

    FeatureCatalog chain;
    const auto def = [](std::string name, std::vector<std::string> deps) {
        FeatureDef d;
        d.name = std::move(name);
        d.dependencies = std::move(deps);
        return d;
    };
    chain.features = {def("d3", {"d2", "a"}), def("d2", {"d1"}), def("d1", {"a"}), def("a", {})};
    const FeatureCatalog h = assign_heights(chain);
    CHECK(h.at("a").u == 1);
    CHECK(h.at("d1").u == 2);
    CHECK(h.at("d2").u == 3);
    CHECK(h.at("d3").u == 4);

    FeatureCatalog cyc;
    cyc.features = {def("x", {"y"}), def("y", {"z"}), def("z", {"x"})};
    CHECK_THROWS_AS(assign_heights(cyc), ConfigError);
    FeatureCatalog dangling;
    dangling.features = {def("x", {"nope"})};
    CHECK_THROWS_AS(assign_heights(dangling), ConfigError);
}

TEST_CASE("catalog text round trip") {
    const FeatureCatalog& cat = default_catalog();
    const FeatureCatalog again = parse_catalog(serialize_catalog(cat));
    REQUIRE(again.features.size() == cat.features.size());
    for (std::size_t i = 0; i < cat.features.size(); ++i) {
        CHECK(again.features[i].name == cat.features[i].name);
        CHECK(again.features[i].u == cat.features[i].u);
        CHECK(again.features[i].description == cat.features[i].description);
    }
    CHECK_THROWS_AS(parse_catalog("cmd_total_time_ms|command|numeric||1|>60000|x\n"
                                  "cmd_total_time_ms|command|numeric||1|>60000|x\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_catalog("no_such_feature|command|binary||1|abnormal=1|x\n"), ParseError);
}
