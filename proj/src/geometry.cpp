#include "dcdt/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dcdt {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Conic a x^2 + b xy + c y^2 + d x + e y + f = 0.
using Conic = Eigen::Matrix<double, 6, 1>;

Conic fit_conic(const std::vector<Point2>& pts) {
    using namespace Eigen;
    const auto n = static_cast<Index>(pts.size());
    MatrixXd quad(n, 3), lin(n, 3);
    for (Index i = 0; i < n; ++i) {
        const double x = pts[i].x, y = pts[i].y;
        quad.row(i) << x * x, x * y, y * y;
        lin.row(i) << x, y, 1.0;
    }
    const Matrix3d s1 = quad.transpose() * quad;
    const Matrix3d s2 = quad.transpose() * lin;
    const Matrix3d s3 = lin.transpose() * lin;

    FullPivLU<Matrix3d> s3_lu(s3);
    if (!s3_lu.isInvertible()) throw DegenerateFitError("degenerate point set: singular linear scatter");
    const Matrix3d t = -s3_lu.solve(s2.transpose());
    const Matrix3d reduced = s1 + s2 * t;

    // Inverse of the constraint block [[0,0,2],[0,-1,0],[2,0,0]].
    Matrix3d c1_inv;
    c1_inv << 0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0;
    const Matrix3d m = c1_inv * reduced;

    EigenSolver<Matrix3d> solver(m);
    if (solver.info() != Success) throw DegenerateFitError("degenerate point set: eigen decomposition failed");
    const Matrix3d vecs = solver.eigenvectors().real();
    const Vector3d vals = solver.eigenvalues().real();

    int best = -1;
    for (int k = 0; k < 3; ++k) {
        const double cond = 4.0 * vecs(0, k) * vecs(2, k) - vecs(1, k) * vecs(1, k);
        if (cond <= 0.0 || !std::isfinite(cond)) continue;
        if (best < 0 || std::abs(vals(k)) < std::abs(vals(best))) best = k;
    }
    if (best < 0) throw DegenerateFitError("degenerate point set: no ellipse solution");

    const Vector3d a1 = vecs.col(best);
    const Vector3d a2 = t * a1;
    Conic conic;
    conic << a1, a2;
    return conic;
}

double sampson_distance(const Conic& q, double x, double y) {
    const double value = q(0) * x * x + q(1) * x * y + q(2) * y * y + q(3) * x + q(4) * y + q(5);
    const double gx = 2.0 * q(0) * x + q(1) * y + q(3);
    const double gy = q(1) * x + 2.0 * q(2) * y + q(4);
    const double grad = std::hypot(gx, gy);
    return grad > 0.0 ? std::abs(value) / grad : std::abs(value);
}

}  // namespace

EllipseFit fit_ellipse(std::span<const Point2> points) {
    if (points.size() < 6) throw DegenerateFitError("ellipse fit needs at least 6 points");

    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
        syy += (p.y - my) * (p.y - my);
    }
    const double trace = sxx + syy;
    const double det = sxx * syy - sxy * sxy;
    // Smallest/largest covariance eigenvalue ratio ~ 0 means collinear.
    if (trace <= 0.0 || det <= 1e-12 * trace * trace) {
        throw DegenerateFitError("degenerate point set: points are collinear");
    }
    const double scale = std::sqrt(trace / static_cast<double>(points.size()));

    std::vector<Point2> normalized;
    normalized.reserve(points.size());
    for (const auto& p : points) normalized.push_back({(p.x - mx) / scale, (p.y - my) / scale});

    Conic q = fit_conic(normalized);
    if (q(0) + q(2) < 0.0) q = -q;
    const double a = q(0), b = q(1), c = q(2), d = q(3), e = q(4), f = q(5);

    const double disc = 4.0 * a * c - b * b;
    if (disc <= 0.0) throw DegenerateFitError("degenerate point set: conic is not an ellipse");
    const double x0 = (b * e - 2.0 * c * d) / disc;
    const double y0 = (b * d - 2.0 * a * e) / disc;
    const double f0 = f + 0.5 * (d * x0 + e * y0);

    Eigen::Matrix2d shape;
    shape << a, 0.5 * b, 0.5 * b, c;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape);
    const double mu_small = eig.eigenvalues()(0);
    const double mu_large = eig.eigenvalues()(1);
    if (mu_small <= 0.0 || f0 >= 0.0) throw DegenerateFitError("degenerate point set: imaginary ellipse");

    EllipseFit fit;
    fit.semi_major = std::sqrt(-f0 / mu_small) * scale;
    fit.semi_minor = std::sqrt(-f0 / mu_large) * scale;
    fit.center = {x0 * scale + mx, y0 * scale + my};
    const Eigen::Vector2d major_dir = eig.eigenvectors().col(0);
    double orientation = std::atan2(major_dir(1), major_dir(0)) * kRadToDeg;
    orientation = std::fmod(orientation + 360.0, 180.0);
    fit.orientation_deg = orientation;
    const double ratio = fit.semi_minor / fit.semi_major;
    fit.eccentricity = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    if (!std::isfinite(fit.semi_major) || !std::isfinite(fit.semi_minor) || fit.semi_minor <= 0.0) {
        throw DegenerateFitError("degenerate point set: non-finite ellipse");
    }

    double sum_sq = 0.0;
    for (const auto& p : normalized) {
        const double dist = sampson_distance(q, p.x, p.y) * scale;
        sum_sq += dist * dist;
    }
    fit.residual_rms = std::sqrt(sum_sq / static_cast<double>(normalized.size()));
    return fit;
}

double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w -= 360.0;
    return w;
}

double clock_angle_deg(Point2 center, Point2 p) {
    return wrap_degrees(std::atan2(p.x - center.x, p.y - center.y) * kRadToDeg);
}

double angular_difference(double a_deg, double b_deg) {
    const double d = wrap_degrees(a_deg - b_deg);
    return std::min(d, 360.0 - d);
}

std::vector<double> angular_gaps(std::vector<double> angles_deg) {
    if (angles_deg.empty()) return {};
    for (auto& a : angles_deg) a = wrap_degrees(a);
    std::sort(angles_deg.begin(), angles_deg.end());
    std::vector<double> gaps;
    gaps.reserve(angles_deg.size());
    for (std::size_t i = 1; i < angles_deg.size(); ++i) gaps.push_back(angles_deg[i] - angles_deg[i - 1]);
    gaps.push_back(360.0 - angles_deg.back() + angles_deg.front());
    return gaps;
}

double largest_angular_gap(std::vector<double> angles_deg) {
    if (angles_deg.empty()) throw Error("largest_angular_gap needs at least one angle");
    const auto gaps = angular_gaps(std::move(angles_deg));
    return *std::max_element(gaps.begin(), gaps.end());
}

double largest_angular_gap(std::span<const Stroke> strokes, Point2 center) {
    std::vector<double> angles;
    for (const auto& stroke : strokes) {
        for (const auto& p : stroke.points) angles.push_back(clock_angle_deg(center, {p.x, p.y}));
    }
    return largest_angular_gap(std::move(angles));
}

}  // namespace dcdt
