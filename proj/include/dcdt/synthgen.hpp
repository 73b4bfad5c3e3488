#pragma once

// Seeded generator of synthetic clock tests. The phenotype presets are
// invented calibration that exercises the pipeline; they carry no clinical
// meaning.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcdt/random.hpp"
#include "dcdt/stroke_model.hpp"

namespace dcdt {

// Target hand angles for 11:10, clockwise from 12 o'clock. The hour hand
// includes the 10-minute advance past 11.
inline constexpr double kHourTargetDeg = 335.0;
inline constexpr double kMinuteTargetDeg = 60.0;
inline constexpr double kDigitTenDeg = 300.0;

struct PhenotypeParams {
    Group group = Group::HC;
    double digit_omission_prob = 0.0;    // per digit
    double digit_repetition_prob = 0.0;  // per digit
    double digit_angle_jitter_deg = 0.0;
    double hand_angle_error_deg = 0.0;
    double minute_to_10_error_prob = 0.0;
    double hand_omission_prob = 0.0;      // per hand
    double crossed_out_digit_prob = 0.0;  // per drawing: one digit gets a crossed-out attempt
    double draw_speed_cm_per_s = 5.0;
    double clockface_eccentricity = 0.0;
    double clockface_gap_deg = 0.0;
    double noise_stroke_rate = 0.0;
    double inter_symbol_latency_ms = 600.0;
    double arrowhead_prob = 1.0;  // per present hand
    double size_scale = 1.0;      // multiplies canvas radius
    // Log-scale spread of per-subject multipliers on speed, latency, size and
    // error probabilities, shared by both clocks of a test.
    double subject_variability = 0.0;

    /// Noiseless drawing: every error probability and jitter at zero.
    static PhenotypeParams ideal(Group group = Group::HC);
    static PhenotypeParams preset(Group group);

    /// Throws Error naming the offending field.
    void validate() const;
};

struct GeneratorConfig {
    std::map<Group, int> counts;
    std::uint64_t seed = 7;
    double canvas_radius_cm = 4.0;
    std::int64_t sample_period_ms = 13;
};

// Explicit geometry of one drawing. The generator samples a plan from a
// phenotype; test fixtures write plans by hand.
struct DigitGlyph {
    int value = 12;
    double angle_deg = 0.0;     // clock angle of the glyph box center
    double radius_frac = 0.8;   // distance from center / radius
    bool crossed_out = false;   // followed by a noise slash across the box
};

struct HandSpec {
    double angle_deg = 0.0;
    double length_frac = 0.7;
    bool arrowhead = true;
};

struct NoiseMark {
    double angle_deg = 0.0;
    double radius_frac = 1.25;
    double length_cm = 0.3;
};

struct DrawingPlan {
    bool clockface = true;
    double eccentricity = 0.0;
    double gap_deg = 0.0;
    double face_start_deg = 0.0;  // arc runs clockwise from here
    std::vector<DigitGlyph> digits;  // in drawing order
    std::optional<HandSpec> hour;
    std::optional<HandSpec> minute;
    std::vector<HandSpec> extra_hands;  // additional hand strokes, alternately hour/minute labeled
    std::vector<NoiseMark> noise;
    double scale = 1.0;  // multiplies the canvas radius
    double speed_cm_per_s = 5.0;
    std::vector<double> latencies_ms;  // pause before stroke i (i >= 1); falls back to default_latency_ms
    double default_latency_ms = 600.0;
};

/// The noiseless 11:10 plan: closed circular face, 12 digits at 0.8 radius,
/// hour hand 0.35 and minute hand 0.7 radius with arrowheads.
DrawingPlan ideal_plan();

/// Samples a plan for one drawing.
DrawingPlan sample_plan(const PhenotypeParams& p, Rng& rng);

/// Renders a plan into strokes. Points are sampled every `sample_period_ms`
/// along each path at the plan's pen speed; timestamps start at `t0_ms`.
/// Stroke ids continue from the drawing's current stroke count. Returns the
/// time of the last sample (t0_ms - 1 when nothing is drawn).
std::int64_t render_plan(const DrawingPlan& plan, double radius_cm, double center_x, double center_y,
                         std::int64_t t0_ms, std::int64_t sample_period_ms, ClockDrawing& out);

/// Builds a two-drawing test from explicit plans with the standard page
/// layout and timeline (copy clock follows the command clock on one axis).
ClockTest build_test(const std::string& subject_id, const DrawingPlan& command, const DrawingPlan& copy,
                     const GeneratorConfig& cfg = {}, std::optional<Group> group = std::nullopt,
                     std::int64_t between_clocks_ms = 5000);

/// Draws the subject-level multipliers described by `subject_variability`.
PhenotypeParams individualize(const PhenotypeParams& p, Rng& rng);

ClockTest generate_test(const PhenotypeParams& p, const std::string& subject_id, std::uint64_t seed,
                        const GeneratorConfig& cfg = {});

/// Tests are ordered HC, MID, VCD, PD, then by subject index; subject i of
/// group g always receives the same seed for a given cfg.seed.
std::vector<ClockTest> generate_dataset(const GeneratorConfig& cfg, const std::map<Group, PhenotypeParams>& phenotypes);

std::map<Group, PhenotypeParams> default_presets();

/// Applies `key=value` lines to a configuration. Recognized keys: `seed`,
/// `canvas_radius_cm`, `sample_period_ms`, `count.<group>` and
/// `<group>.<phenotype field>` (group in hc, mid, vcd, pd). `#` starts a comment.
void apply_generator_config(std::string_view text, GeneratorConfig& cfg, std::map<Group, PhenotypeParams>& presets);

}  // namespace dcdt
