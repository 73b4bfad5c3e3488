#pragma once

#include <span>
#include <vector>

#include "dcdt/stroke_model.hpp"

namespace dcdt {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

struct EllipseFit {
    Point2 center;
    double semi_major = 0.0;     // a, cm
    double semi_minor = 0.0;     // b, cm, 0 < b <= a
    double orientation_deg = 0;  // major axis direction from +x, counterclockwise, in [0, 180)
    double eccentricity = 0.0;   // sqrt(1 - b^2/a^2)
    double residual_rms = 0.0;   // RMS Sampson distance of the input points, cm
};

/// Direct least-squares conic fit constrained to an ellipse (4ac - b^2 = 1),
/// in the numerically stable block form. Points are centered and scaled
/// before fitting. Throws DegenerateFitError on fewer than 6 points,
/// collinear input, or when no ellipse solution exists.
EllipseFit fit_ellipse(std::span<const Point2> points);

/// Angle of `p` about `center`, clockwise from 12 o'clock, in [0, 360).
double clock_angle_deg(Point2 center, Point2 p);

/// Smallest absolute difference between two angles, in [0, 180].
double angular_difference(double a_deg, double b_deg);

/// Wraps an angle into [0, 360).
double wrap_degrees(double deg);

/// Empty arcs between consecutive angles going clockwise, including the
/// wrap-around arc. The gaps sum to 360. A single angle yields {360}.
std::vector<double> angular_gaps(std::vector<double> angles_deg);

/// Largest empty arc in degrees, in [0, 360]. Requires at least one angle.
double largest_angular_gap(std::vector<double> angles_deg);

/// Largest empty arc of all points of `strokes` as seen from `center`.
double largest_angular_gap(std::span<const Stroke> strokes, Point2 center);

}  // namespace dcdt
