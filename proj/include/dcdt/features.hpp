#pragma once

// Stroke-level feature battery, the feature catalog (dependency tree,
// understandability weights, Simplest subset, cutpoints) and binarization.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcdt/geometry.hpp"
#include "dcdt/stroke_model.hpp"

namespace dcdt {

// ---------------------------------------------------------------------------
// Geometric and temporal primitives

struct ClockfaceGeometry {
    bool present = false;
    std::optional<EllipseFit> fit;  // empty when the fit is degenerate
    Point2 center;                  // fit center, else face centroid, else centroid of all ink
    double largest_gap_deg = 360.0;
    double closure_cm = 0.0;
    double closure_deg = 0.0;
};

/// Reference center used by every angular feature of a drawing.
ClockfaceGeometry clockface_geometry(const ClockDrawing& drawing);

struct Closure {
    double gap_cm = 0.0;
    double gap_deg = 0.0;
};

/// Distance and angular difference (about `center`) between the first point
/// of the earliest clockface stroke and the last point of the latest one.
/// Requires at least one clockface stroke.
Closure clockface_closure(const std::vector<Stroke>& clockface, Point2 center);

struct DigitRecord {
    int value = 0;
    bool present = false;
    int count = 0;            // non-crossed-out instances
    double angle_deg = 0.0;   // first instance, clockwise from 12; NaN when absent
    double width_cm = 0.0;    // first instance bounding box; NaN when absent
    double height_cm = 0.0;
};

struct DigitCensus {
    std::array<DigitRecord, 12> digits;  // index = value - 1
    int crossed_out = 0;

    const DigitRecord& operator[](int value) const { return digits[static_cast<std::size_t>(value - 1)]; }
    int distinct_present() const;
    bool any_repeated() const;
};

/// Groups digit strokes into glyph instances (same value, touching boxes).
/// An instance counts as crossed out when a later noise stroke's bounding box
/// covers at least half of the instance box and its path enters the box.
DigitCensus digit_census(const ClockDrawing& drawing, Point2 center);
DigitCensus digit_census(const ClockDrawing& drawing);

inline constexpr std::array<int, 8> kNonAnchorDigits = {1, 2, 4, 5, 7, 8, 10, 11};

/// Per non-anchor digit: the centroid angle lies strictly inside the 45°
/// sector containing its nominal position. Missing digits are false.
std::map<int, bool> digit_eighth_correct(const DigitCensus& census);

/// All 12 digits present exactly once, in clockwise order 12, 1, ..., 11.
bool digit_order_correct(const DigitCensus& census);

/// The present digits (at least two) appear in clockwise cyclic order.
bool digits_in_sequence(const DigitCensus& census);

/// At least three digits present, each once, arranged counterclockwise.
bool digits_counterclockwise(const DigitCensus& census);

struct HandRecord {
    bool present = false;
    int strokes = 0;
    double angle_deg = 0.0;        // NaN when absent
    double length_cm = 0.0;        // NaN when absent
    double angle_error_deg = 0.0;  // NaN when absent
};

struct HandMetrics {
    HandRecord hour;
    HandRecord minute;
    std::optional<double> size_ratio;  // hour length / minute length
    bool hour_arrowhead = false;
    bool minute_arrowhead = false;
    bool arrowheads_outward = false;   // every arrowhead sits at the outer half of its hand
    int hand_strokes = 0;
    int distinct_directions = 0;
    bool perseveration = false;        // > 2 hand strokes in > 2 directions
    bool minute_points_to_10 = false;  // within 15° of digit 10's nominal position
};

/// Hand geometry uses the first stroke of each hand: its point nearest the
/// center to its farthest point. Errors are measured against 11:10.
HandMetrics hand_metrics(const ClockDrawing& drawing, Point2 center);

enum class Component { Clockface, Digits, Hands, Noise };
inline constexpr std::array<Component, 4> kComponents = {Component::Clockface, Component::Digits, Component::Hands,
                                                         Component::Noise};

Component component_of(SymbolKind kind);

struct ComponentTiming {
    int strokes = 0;
    double ink_cm = 0.0;
    double ink_time_ms = 0.0;
    double speed_cm_s = 0.0;  // ink_cm / ink_time; NaN when no ink time
};

struct ClockTiming {
    double total_time_ms = 0.0;  // last sample minus first sample
    int stroke_count = 0;
    double ink_length_cm = 0.0;
    std::array<ComponentTiming, 4> components;  // indexed by Component
    double mean_latency_ms = 0.0;  // between consecutive component episodes; NaN with < 2 episodes
    double mean_pen_up_ms = 0.0;   // between consecutive strokes; NaN with < 2 strokes

    const ComponentTiming& operator[](Component c) const { return components[static_cast<std::size_t>(c)]; }
};

ClockTiming clock_timing(const ClockDrawing& drawing);

struct TimingFeatures {
    ClockTiming command;
    ClockTiming copy;
    double total_time_ms = 0.0;       // command + copy
    double between_clocks_ms = 0.0;   // copy start - command end; NaN if either is empty
    double ink_length_cm = 0.0;
};

TimingFeatures timing_features(const ClockTest& test);

// ---------------------------------------------------------------------------
// Catalog

enum class FeatureClock { Command, Copy, Both };
enum class FeatureKind { Numeric, Binary };

/// Numeric features binarize to 1 when `value <op> threshold` holds; the
/// firing side is the abnormal pole. Binary features declare their abnormal
/// value explicitly.
struct Cutpoint {
    enum class Op { Greater, GreaterEqual, Less, LessEqual };
    Op op = Op::Greater;
    double threshold = 0.0;

    bool fires(double value) const;
    std::string to_string() const;
};

struct FeatureDef {
    std::string name;
    FeatureClock clock = FeatureClock::Command;
    FeatureKind kind = FeatureKind::Binary;
    std::vector<std::string> dependencies;
    bool simplest = false;
    Cutpoint cutpoint;     // numeric only
    int abnormal = 1;      // binary only: value of the abnormal pole
    std::string description;
    int u = 1;             // understandability weight, set by assign_heights
};

enum class FeatureSet { All, Simplest };

class ConfigError : public Error {
public:
    using Error::Error;
};

struct FeatureCatalog {
    std::vector<FeatureDef> features;

    const FeatureDef* find(std::string_view name) const;
    const FeatureDef& at(std::string_view name) const;
    std::vector<std::string> names(FeatureSet set) const;
};

/// u = 1 for features without dependencies, otherwise 1 + max over
/// dependencies. Throws ConfigError on a cycle or unresolved dependency.
FeatureCatalog assign_heights(FeatureCatalog catalog);

/// Parses `name|clock|kind|deps|simplest|cutpoint|description` records,
/// validates them against the extractor and assigns heights.
FeatureCatalog parse_catalog(std::string_view text);
std::string serialize_catalog(const FeatureCatalog& catalog);

/// The shipped catalog (data/catalog.txt, embedded at build time).
const FeatureCatalog& default_catalog();
std::string_view default_catalog_text();

// ---------------------------------------------------------------------------
// Extraction and binarization

/// Values aligned with `names`. NaN marks a missing value.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
    bool binarized = false;

    std::optional<double> get(std::string_view name) const;
    double at(std::string_view name) const;  // throws on unknown name
};

/// Every feature the extractor can compute, keyed by name.
std::map<std::string, double> raw_features(const ClockTest& test);

/// Names produced by raw_features.
const std::vector<std::string>& known_feature_names();

FeatureVector extract(const ClockTest& test, const FeatureCatalog& catalog, FeatureSet set);

/// Thresholds numeric features at their cutpoints and passes binary ones
/// through; missing values map to the abnormal pole. Already-binarized
/// vectors are returned unchanged.
FeatureVector binarize(const FeatureVector& v, const FeatureCatalog& catalog);

/// CSV with header `subject_id,group,<names...>`; missing values are empty.
std::string features_csv(const std::vector<ClockTest>& tests, const std::vector<FeatureVector>& vectors);

}  // namespace dcdt
