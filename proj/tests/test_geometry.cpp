#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dcdt/features.hpp"
#include "dcdt/geometry.hpp"
#include "dcdt/random.hpp"

using namespace dcdt;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Point2> ellipse_points(double a, double b, double cx, double cy, double rot_deg, int n,
                                   double from_deg = 0.0, double to_deg = 360.0) {
    const double r = rot_deg * kPi / 180.0;
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = (from_deg + (to_deg - from_deg) * i / n) * kPi / 180.0;
        const double x = a * std::cos(t), y = b * std::sin(t);
        pts.push_back({cx + std::cos(r) * x - std::sin(r) * y, cy + std::sin(r) * x + std::cos(r) * y});
    }
    return pts;
}

// O(n^2): for each angle, the clockwise distance to its nearest successor.
double naive_largest_gap(const std::vector<double>& angles) {
    if (angles.size() == 1) return 360.0;
    double best = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        double next = 360.0;
        for (std::size_t j = 0; j < angles.size(); ++j) {
            if (j == i) continue;
            double d = std::fmod(angles[j] - angles[i] + 720.0, 360.0);
            next = std::min(next, d);
        }
        best = std::max(best, next);
    }
    return best;
}

Stroke arc_stroke(double r, double from_deg, double to_deg, int n, SymbolKind kind = SymbolKind::Clockface) {
    // clock angles: clockwise from 12, so x = r sin(theta), y = r cos(theta)
    Stroke s;
    s.label = SymbolLabel::of(kind);
    for (int i = 0; i <= n; ++i) {
        const double th = (from_deg + (to_deg - from_deg) * i / n) * kPi / 180.0;
        s.points.push_back({r * std::sin(th), r * std::cos(th), 13 * i});
    }
    return s;
}

}  // namespace

TEST_CASE("ellipse fit on an exact circle") {
    const auto pts = ellipse_points(4, 4, 0, 0, 0, 360);
    const EllipseFit f = fit_ellipse(pts);
    CHECK(std::abs(f.semi_major - 4.0) < 1e-6);
    CHECK(std::abs(f.semi_minor - 4.0) < 1e-6);
    CHECK(f.eccentricity < 1e-6);
    CHECK(std::abs(f.center.x) < 1e-9);
    CHECK(std::abs(f.center.y) < 1e-9);
    CHECK(f.residual_rms < 1e-9);
}

TEST_CASE("ellipse fit on a=2, b=1") {
    const EllipseFit f = fit_ellipse(ellipse_points(2, 1, 0, 0, 0, 100));
    CHECK(std::abs(f.eccentricity - std::sqrt(3.0) / 2.0) < 1e-4);
    CHECK(f.semi_major == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(f.semi_minor == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ellipse fit recovers pose") {
    const EllipseFit f = fit_ellipse(ellipse_points(3, 1.5, 2.5, -1.0, 30, 200));
    CHECK(f.center.x == doctest::Approx(2.5));
    CHECK(f.center.y == doctest::Approx(-1.0));
    CHECK(f.orientation_deg == doctest::Approx(30.0));
    CHECK(f.semi_major >= f.semi_minor);
    CHECK(f.eccentricity == doctest::Approx(std::sqrt(1 - 0.25)));

    // an arc covering 3/4 of the ellipse is enough
    const EllipseFit g = fit_ellipse(ellipse_points(3, 2, 0, 0, 120, 90, 0, 270));
    CHECK(g.semi_major == doctest::Approx(3.0));
    CHECK(g.semi_minor == doctest::Approx(2.0));
    CHECK(g.orientation_deg == doctest::Approx(120.0));
}

TEST_CASE("noisy ellipse recovery over 100 seeds") {
    int within = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const double a = rng.uniform(2.5, 5.0);
        const double b = a * rng.uniform(0.6, 1.0);
        auto pts = ellipse_points(a, b, rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 180), 360);
        for (auto& p : pts) {
            p.x += rng.normal(0, 0.01);
            p.y += rng.normal(0, 0.01);
        }
        const EllipseFit f = fit_ellipse(pts);
        if (std::abs(f.semi_major - a) / a < 0.01 && std::abs(f.semi_minor - b) / b < 0.01) ++within;
        CHECK(f.residual_rms < 0.05);
    }
    CHECK(within == 100);
}

TEST_CASE("degenerate ellipse input") {
    std::vector<Point2> line;
    for (int i = 0; i < 20; ++i) line.push_back({0.5 * i, 0.25 * i + 1});
    CHECK_THROWS_AS(fit_ellipse(line), DegenerateFitError);
    const auto five = ellipse_points(2, 1, 0, 0, 0, 5);
    CHECK_THROWS_AS(fit_ellipse(five), DegenerateFitError);
}

TEST_CASE("clock angles") {
    CHECK(clock_angle_deg({0, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(clock_angle_deg({0, 0}, {1, 0}) == doctest::Approx(90.0));
    CHECK(clock_angle_deg({0, 0}, {0, -1}) == doctest::Approx(180.0));
    CHECK(clock_angle_deg({0, 0}, {-1, 0}) == doctest::Approx(270.0));
    CHECK(clock_angle_deg({1, 1}, {2, 2}) == doctest::Approx(45.0));

    CHECK(angular_difference(60, 300) == doctest::Approx(120.0));
    CHECK(angular_difference(350, 10) == doctest::Approx(20.0));
    CHECK(angular_difference(0, 180) == doctest::Approx(180.0));
    CHECK(wrap_degrees(-30) == doctest::Approx(330.0));
    CHECK(wrap_degrees(720) == doctest::Approx(0.0));
}

TEST_CASE("largest angular gap examples") {
    std::vector<double> every_degree;
    for (int d = 0; d < 360; ++d) every_degree.push_back(d);
    CHECK(largest_angular_gap(every_degree) <= 1.0 + 1e-9);

    std::vector<double> three_quarters;
    for (int d = 0; d <= 270; ++d) three_quarters.push_back(d);
    CHECK(largest_angular_gap(three_quarters) == doctest::Approx(90.0));

    CHECK(largest_angular_gap(std::vector<double>{42.0}) == doctest::Approx(360.0));

    Stroke arc = arc_stroke(4, 0, 270, 270);
    CHECK(largest_angular_gap(std::span<const Stroke>(&arc, 1), Point2{0, 0}) == doctest::Approx(90.0));
}

TEST_CASE("largest angular gap against the naive oracle") {
    Rng rng(2024);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> angles;
        const int arcs = 1 + static_cast<int>(rng.below(5));
        for (int a = 0; a < arcs; ++a) {
            const double start = rng.uniform(0, 360), span = rng.uniform(0, 120);
            const int n = 1 + static_cast<int>(rng.below(20));
            for (int i = 0; i < n; ++i) angles.push_back(wrap_degrees(start + span * i / n));
        }
        const double fast = largest_angular_gap(angles);
        CHECK(std::abs(fast - naive_largest_gap(angles)) < 1e-9);

        const auto gaps = angular_gaps(angles);
        double sum = 0.0;
        for (double g : gaps) sum += g;
        CHECK(std::abs(sum - 360.0) < 1e-6);
        CHECK(fast == doctest::Approx(*std::max_element(gaps.begin(), gaps.end())));
    }
}

TEST_CASE("clockface closure") {
    const Stroke full = arc_stroke(4, 0, 360, 360);
    const Closure c0 = clockface_closure({full}, {0, 0});
    CHECK(c0.gap_cm == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c0.gap_deg == doctest::Approx(0.0).epsilon(1e-9));

    // from (4,0) clockwise round to (0,4): a quarter of the circle is left open
    const Stroke arc = arc_stroke(4, 90, 360, 270);
    const Closure c1 = clockface_closure({arc}, {0, 0});
    CHECK(c1.gap_deg == doctest::Approx(90.0));
    CHECK(c1.gap_cm == doctest::Approx(4.0 * std::sqrt(2.0)));

    // two strokes: closure is measured from the first stroke start to the last stroke end
    Stroke first = arc_stroke(4, 0, 180, 180);
    Stroke second = arc_stroke(4, 180, 300, 120);
    for (auto& p : second.points) p.t += 5000;
    const Closure c2 = clockface_closure({second, first}, {0, 0});
    CHECK(c2.gap_deg == doctest::Approx(60.0));
}
