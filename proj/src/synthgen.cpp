#include "dcdt/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "text_util.hpp"

namespace dcdt {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

constexpr double kDigitRadius = 0.8;
constexpr double kRepeatRadius = 0.55;
constexpr double kCrossedRadius = 0.3;
constexpr double kGlyphHeight = 0.15;  // fractions of the radius
constexpr double kGlyphWidth = 0.09;
constexpr double kArrowheadSize = 0.08;
constexpr double kHourLength = 0.35;
constexpr double kMinuteLength = 0.7;

constexpr double kCommandCenter[2] = {10.0, 10.0};
constexpr double kCopyCenter[2] = {10.0, 24.0};

struct Vec {
    double x, y;
};

Vec polar(double cx, double cy, double radius, double clock_deg) {
    return {cx + radius * std::sin(clock_deg * kDegToRad), cy + radius * std::cos(clock_deg * kDegToRad)};
}

// Appends strokes while tracking time and stroke ids.
class StrokeWriter {
public:
    StrokeWriter(const DrawingPlan& plan, std::int64_t t0, std::int64_t period, ClockDrawing& out)
        : plan_(plan), t_(t0), period_(period), out_(out), next_id_(static_cast<int>(out.strokes.size()) + 1) {}

    // Vertices are kept as samples; each segment is subdivided by pen speed.
    void polyline(SymbolLabel label, const std::vector<Vec>& vertices) {
        const double step = plan_.speed_cm_per_s * static_cast<double>(period_) / 1000.0;
        std::vector<Vec> pts{vertices.front()};
        for (std::size_t i = 1; i < vertices.size(); ++i) {
            const Vec a = vertices[i - 1], b = vertices[i];
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
            for (int k = 1; k <= n; ++k) {
                const double s = static_cast<double>(k) / n;
                pts.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
            }
        }
        emit(label, pts);
    }

    void emit(SymbolLabel label, const std::vector<Vec>& pts) {
        if (strokes_ > 0) {
            const std::size_t gap_index = strokes_ - 1;
            const double pause =
                gap_index < plan_.latencies_ms.size() ? plan_.latencies_ms[gap_index] : plan_.default_latency_ms;
            t_ += std::max<std::int64_t>(1, std::llround(pause));
        }
        Stroke stroke{next_id_++, label, {}};
        stroke.points.reserve(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (k > 0) t_ += period_;
            stroke.points.push_back(PenPoint{pts[k].x, pts[k].y, t_});
        }
        last_t_ = t_;
        out_.strokes.push_back(std::move(stroke));
        ++strokes_;
    }

    std::int64_t last_time() const { return last_t_; }

private:
    const DrawingPlan& plan_;
    std::int64_t t_;
    std::int64_t period_;
    ClockDrawing& out_;
    int next_id_;
    std::size_t strokes_ = 0;
    std::int64_t last_t_ = -1;
};

void draw_hand(StrokeWriter& w, SymbolKind kind, SymbolKind arrow_kind, const HandSpec& hand, double radius,
               double cx, double cy) {
    const double length = hand.length_frac * radius;
    const Vec tip = polar(cx, cy, length, hand.angle_deg);
    w.polyline(SymbolLabel::of(kind), {{cx, cy}, tip});
    if (!hand.arrowhead) return;
    const double s = kArrowheadSize * radius;
    const Vec back = polar(tip.x, tip.y, -s, hand.angle_deg);
    const Vec left = polar(back.x, back.y, 0.6 * s, hand.angle_deg - 90.0);
    const Vec right = polar(back.x, back.y, 0.6 * s, hand.angle_deg + 90.0);
    w.polyline(SymbolLabel::of(arrow_kind), {left, tip, right});
}

std::size_t plan_stroke_count(const DrawingPlan& plan) {
    std::size_t n = plan.clockface ? 1 : 0;
    for (const auto& g : plan.digits) n += g.crossed_out ? 3 : 2;
    for (const auto* hand : {&plan.hour, &plan.minute}) {
        if (*hand) n += (*hand)->arrowhead ? 2 : 1;
    }
    for (const auto& h : plan.extra_hands) n += h.arrowhead ? 2 : 1;
    return n + plan.noise.size();
}

}  // namespace

PhenotypeParams PhenotypeParams::ideal(Group group) {
    PhenotypeParams p;
    p.group = group;
    return p;
}

PhenotypeParams PhenotypeParams::preset(Group group) {
    PhenotypeParams p;
    p.group = group;
    switch (group) {
        case Group::HC:
            p.digit_omission_prob = 0.003;
            p.digit_repetition_prob = 0.003;
            p.digit_angle_jitter_deg = 5.0;
            p.hand_angle_error_deg = 6.0;
            p.minute_to_10_error_prob = 0.02;
            p.hand_omission_prob = 0.01;
            p.crossed_out_digit_prob = 0.05;
            p.draw_speed_cm_per_s = 5.0;
            p.clockface_eccentricity = 0.12;
            p.clockface_gap_deg = 4.0;
            p.noise_stroke_rate = 0.2;
            p.inter_symbol_latency_ms = 700.0;
            p.arrowhead_prob = 0.9;
            p.size_scale = 1.0;
            p.subject_variability = 0.4;
            break;
        case Group::MID:
            p.digit_omission_prob = 0.02;
            p.digit_repetition_prob = 0.025;
            p.digit_angle_jitter_deg = 7.0;
            p.hand_angle_error_deg = 9.0;
            p.minute_to_10_error_prob = 0.12;
            p.hand_omission_prob = 0.04;
            p.crossed_out_digit_prob = 0.15;
            p.draw_speed_cm_per_s = 4.2;
            p.clockface_eccentricity = 0.18;
            p.clockface_gap_deg = 8.0;
            p.noise_stroke_rate = 0.6;
            p.inter_symbol_latency_ms = 1050.0;
            p.arrowhead_prob = 0.6;
            p.size_scale = 1.0;
            p.subject_variability = 0.4;
            break;
        case Group::VCD:
            p.digit_omission_prob = 0.02;
            p.digit_repetition_prob = 0.03;
            p.digit_angle_jitter_deg = 7.0;
            p.hand_angle_error_deg = 9.0;
            p.minute_to_10_error_prob = 0.08;
            p.hand_omission_prob = 0.04;
            p.crossed_out_digit_prob = 0.12;
            p.draw_speed_cm_per_s = 3.9;
            p.clockface_eccentricity = 0.3;
            p.clockface_gap_deg = 7.0;
            p.noise_stroke_rate = 0.8;
            p.inter_symbol_latency_ms = 950.0;
            p.arrowhead_prob = 0.7;
            p.size_scale = 0.95;
            p.subject_variability = 0.4;
            break;
        case Group::PD:
            p.digit_omission_prob = 0.01;
            p.digit_repetition_prob = 0.02;
            p.digit_angle_jitter_deg = 6.0;
            p.hand_angle_error_deg = 8.0;
            p.minute_to_10_error_prob = 0.05;
            p.hand_omission_prob = 0.03;
            p.crossed_out_digit_prob = 0.12;
            p.draw_speed_cm_per_s = 3.8;
            p.clockface_eccentricity = 0.2;
            p.clockface_gap_deg = 6.0;
            p.noise_stroke_rate = 0.4;
            p.inter_symbol_latency_ms = 850.0;
            p.arrowhead_prob = 0.75;
            p.size_scale = 0.85;
            p.subject_variability = 0.4;
            break;
    }
    return p;
}

void PhenotypeParams::validate() const {
    const auto check_prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error(fmt::format("phenotype {} must be in [0,1], got {}", name, v));
    };
    const auto check_nonneg = [](double v, const char* name) {
        if (!(v >= 0.0)) throw Error(fmt::format("phenotype {} must be >= 0, got {}", name, v));
    };
    check_prob(digit_omission_prob, "digit_omission_prob");
    check_prob(digit_repetition_prob, "digit_repetition_prob");
    check_prob(minute_to_10_error_prob, "minute_to_10_error_prob");
    check_prob(hand_omission_prob, "hand_omission_prob");
    check_prob(crossed_out_digit_prob, "crossed_out_digit_prob");
    check_prob(arrowhead_prob, "arrowhead_prob");
    check_nonneg(digit_angle_jitter_deg, "digit_angle_jitter_deg");
    check_nonneg(hand_angle_error_deg, "hand_angle_error_deg");
    check_nonneg(clockface_gap_deg, "clockface_gap_deg");
    check_nonneg(noise_stroke_rate, "noise_stroke_rate");
    check_nonneg(inter_symbol_latency_ms, "inter_symbol_latency_ms");
    check_nonneg(subject_variability, "subject_variability");
    if (!(draw_speed_cm_per_s > 0.0)) throw Error("phenotype draw_speed_cm_per_s must be > 0");
    if (!(size_scale > 0.0)) throw Error("phenotype size_scale must be > 0");
    if (!(clockface_eccentricity >= 0.0 && clockface_eccentricity < 1.0)) {
        throw Error("phenotype clockface_eccentricity must be in [0,1)");
    }
}

DrawingPlan ideal_plan() {
    DrawingPlan plan;
    for (int k = 0; k < 12; ++k) {
        const int value = k == 0 ? 12 : k;
        plan.digits.push_back(DigitGlyph{value, 30.0 * (value % 12), kDigitRadius, false});
    }
    plan.hour = HandSpec{kHourTargetDeg, kHourLength, true};
    plan.minute = HandSpec{kMinuteTargetDeg, kMinuteLength, true};
    return plan;
}

DrawingPlan sample_plan(const PhenotypeParams& p, Rng& rng) {
    DrawingPlan plan;
    plan.scale = p.size_scale;

    const double gap = rng.normal(p.clockface_gap_deg, 0.25 * p.clockface_gap_deg);
    plan.gap_deg = std::clamp(std::abs(gap), 0.0, 300.0);
    const double ecc = rng.normal(p.clockface_eccentricity, 0.25 * p.clockface_eccentricity);
    plan.eccentricity = std::clamp(std::abs(ecc), 0.0, 0.95);

    const bool crossed = rng.bernoulli(p.crossed_out_digit_prob);
    const int crossed_value = 1 + static_cast<int>(rng.below(12));
    for (int k = 0; k < 12; ++k) {
        const int value = k == 0 ? 12 : k;
        const double target = 30.0 * (value % 12);
        const bool omit = rng.bernoulli(p.digit_omission_prob);
        const double jitter = rng.normal(0.0, p.digit_angle_jitter_deg);
        const bool repeat = rng.bernoulli(p.digit_repetition_prob);
        const double repeat_jitter = rng.normal(0.0, p.digit_angle_jitter_deg);
        if (crossed && crossed_value == value) {
            plan.digits.push_back(DigitGlyph{value, target + jitter, kCrossedRadius, true});
        }
        if (!omit) plan.digits.push_back(DigitGlyph{value, target + jitter, kDigitRadius, false});
        if (repeat) plan.digits.push_back(DigitGlyph{value, target + repeat_jitter, kRepeatRadius, false});
    }

    const bool hour_omit = rng.bernoulli(p.hand_omission_prob);
    const double hour_err = rng.normal(0.0, p.hand_angle_error_deg);
    const bool hour_arrow = rng.bernoulli(p.arrowhead_prob);
    const bool minute_omit = rng.bernoulli(p.hand_omission_prob);
    const bool to_ten = rng.bernoulli(p.minute_to_10_error_prob);
    const double minute_err = rng.normal(0.0, p.hand_angle_error_deg);
    const bool minute_arrow = rng.bernoulli(p.arrowhead_prob);
    if (!hour_omit) plan.hour = HandSpec{kHourTargetDeg + hour_err, kHourLength, hour_arrow};
    if (!minute_omit) {
        plan.minute = HandSpec{(to_ten ? kDigitTenDeg : kMinuteTargetDeg) + minute_err, kMinuteLength, minute_arrow};
    }

    const int noise = rng.poisson(p.noise_stroke_rate);
    for (int i = 0; i < noise; ++i) {
        NoiseMark mark;
        mark.angle_deg = rng.uniform(0.0, 360.0);
        mark.radius_frac = rng.uniform(1.15, 1.35);
        mark.length_cm = rng.uniform(0.2, 0.5);
        plan.noise.push_back(mark);
    }

    plan.speed_cm_per_s = p.draw_speed_cm_per_s * rng.uniform(0.9, 1.1);
    plan.default_latency_ms = p.inter_symbol_latency_ms;
    const std::size_t strokes = plan_stroke_count(plan);
    for (std::size_t i = 1; i < strokes; ++i) {
        plan.latencies_ms.push_back(p.inter_symbol_latency_ms * rng.uniform(0.5, 1.5));
    }
    return plan;
}

std::int64_t render_plan(const DrawingPlan& plan, double radius_cm, double cx, double cy, std::int64_t t0_ms,
                         std::int64_t sample_period_ms, ClockDrawing& out) {
    if (sample_period_ms <= 0) throw Error("sample_period_ms must be > 0");
    const double radius = radius_cm * plan.scale;
    StrokeWriter w(plan, t0_ms, sample_period_ms, out);

    if (plan.clockface) {
        const double gap = std::clamp(plan.gap_deg, 0.0, 350.0);
        const double span = 360.0 - gap;
        const double ax = radius;
        const double by = radius * std::sqrt(1.0 - plan.eccentricity * plan.eccentricity);
        const auto at = [&](double clock_deg) {
            return Vec{cx + ax * std::sin(clock_deg * kDegToRad), cy + by * std::cos(clock_deg * kDegToRad)};
        };
        double length = 0.0;
        constexpr int kFine = 720;
        for (int k = 1; k <= kFine; ++k) {
            const Vec a = at(plan.face_start_deg + span * (k - 1) / kFine);
            const Vec b = at(plan.face_start_deg + span * k / kFine);
            length += std::hypot(b.x - a.x, b.y - a.y);
        }
        const double step = plan.speed_cm_per_s * static_cast<double>(sample_period_ms) / 1000.0;
        const int n = std::max(6, static_cast<int>(std::ceil(length / step)));
        std::vector<Vec> pts;
        pts.reserve(n + 1);
        for (int k = 0; k <= n; ++k) pts.push_back(at(plan.face_start_deg + span * k / n));
        w.emit(SymbolLabel::of(SymbolKind::Clockface), pts);
    }

    for (const auto& glyph : plan.digits) {
        const Vec c = polar(cx, cy, glyph.radius_frac * radius, glyph.angle_deg);
        const double hh = 0.5 * kGlyphHeight * radius, hw = 0.5 * kGlyphWidth * radius;
        const Vec tl{c.x - hw, c.y + hh}, bl{c.x - hw, c.y - hh}, br{c.x + hw, c.y - hh}, tr{c.x + hw, c.y + hh};
        const auto label = SymbolLabel::digit(glyph.value);
        w.polyline(label, {tl, bl, br});
        w.polyline(label, {br, tr, tl});
        if (glyph.crossed_out) {
            const double ex = 0.1 * hw, ey = 0.1 * hh;
            w.polyline(SymbolLabel::of(SymbolKind::Noise), {{bl.x - ex, bl.y - ey}, {tr.x + ex, tr.y + ey}});
        }
    }

    if (plan.hour) draw_hand(w, SymbolKind::HourHand, SymbolKind::ArrowheadHour, *plan.hour, radius, cx, cy);
    if (plan.minute) draw_hand(w, SymbolKind::MinuteHand, SymbolKind::ArrowheadMinute, *plan.minute, radius, cx, cy);
    for (std::size_t i = 0; i < plan.extra_hands.size(); ++i) {
        const bool as_hour = i % 2 == 0;
        draw_hand(w, as_hour ? SymbolKind::HourHand : SymbolKind::MinuteHand,
                  as_hour ? SymbolKind::ArrowheadHour : SymbolKind::ArrowheadMinute, plan.extra_hands[i], radius, cx,
                  cy);
    }

    for (const auto& mark : plan.noise) {
        const Vec a = polar(cx, cy, mark.radius_frac * radius, mark.angle_deg);
        const Vec b = polar(a.x, a.y, mark.length_cm, mark.angle_deg + 45.0);
        w.polyline(SymbolLabel::of(SymbolKind::Noise), {a, b});
    }
    return plan_stroke_count(plan) == 0 ? t0_ms - 1 : w.last_time();
}

ClockTest build_test(const std::string& subject_id, const DrawingPlan& command, const DrawingPlan& copy,
                     const GeneratorConfig& cfg, std::optional<Group> group, std::int64_t between_clocks_ms) {
    ClockTest test;
    test.subject_id = subject_id;
    test.group = group;
    const std::int64_t end = render_plan(command, cfg.canvas_radius_cm, kCommandCenter[0], kCommandCenter[1], 0,
                                         cfg.sample_period_ms, test.command);
    render_plan(copy, cfg.canvas_radius_cm, kCopyCenter[0], kCopyCenter[1], std::max<std::int64_t>(0, end) +
                                                                                 between_clocks_ms,
                cfg.sample_period_ms, test.copy);
    return test;
}

PhenotypeParams individualize(const PhenotypeParams& p, Rng& rng) {
    const double sigma = p.subject_variability;
    const double speed = std::exp(rng.normal(0.0, sigma));
    const double latency = std::exp(rng.normal(0.0, sigma));
    const double size = std::exp(rng.normal(0.0, sigma / 4.0));
    const double severity = std::exp(rng.normal(0.0, sigma));
    PhenotypeParams s = p;
    s.draw_speed_cm_per_s *= speed;
    s.inter_symbol_latency_ms *= latency;
    s.size_scale *= size;
    // Scaling the odds leaves certain and impossible events alone.
    const auto scale_odds = [](double prob, double m) { return prob * m / (1.0 - prob + prob * m); };
    for (double* prob : {&s.digit_omission_prob, &s.digit_repetition_prob, &s.minute_to_10_error_prob,
                         &s.hand_omission_prob, &s.crossed_out_digit_prob}) {
        *prob = scale_odds(*prob, severity);
    }
    s.digit_angle_jitter_deg *= severity;
    s.hand_angle_error_deg *= severity;
    s.noise_stroke_rate *= severity;
    s.arrowhead_prob = 1.0 - scale_odds(1.0 - s.arrowhead_prob, severity);
    return s;
}

ClockTest generate_test(const PhenotypeParams& p, const std::string& subject_id, std::uint64_t seed,
                        const GeneratorConfig& cfg) {
    p.validate();
    Rng rng(seed);
    const PhenotypeParams subject = individualize(p, rng);
    const DrawingPlan command = sample_plan(subject, rng);
    const DrawingPlan copy = sample_plan(subject, rng);
    const auto between = std::llround(4000.0 + subject.inter_symbol_latency_ms * rng.uniform(1.0, 3.0));
    return build_test(subject_id, command, copy, cfg, p.group, between);
}

std::vector<ClockTest> generate_dataset(const GeneratorConfig& cfg,
                                        const std::map<Group, PhenotypeParams>& phenotypes) {
    std::vector<ClockTest> tests;
    std::uint64_t group_index = 0;
    for (Group g : {Group::HC, Group::MID, Group::VCD, Group::PD}) {
        ++group_index;
        const auto count_it = cfg.counts.find(g);
        const int count = count_it == cfg.counts.end() ? 0 : count_it->second;
        if (count < 0) throw Error(fmt::format("negative count for group {}", to_string(g)));
        if (count == 0) continue;
        const auto params_it = phenotypes.find(g);
        if (params_it == phenotypes.end()) throw Error(fmt::format("no phenotype for group {}", to_string(g)));
        PhenotypeParams params = params_it->second;
        params.group = g;
        for (int i = 0; i < count; ++i) {
            const auto id = fmt::format("{}-{:04d}", to_string(g), i);
            tests.push_back(generate_test(params, id, derive_seed(cfg.seed, group_index, static_cast<std::uint64_t>(i)),
                                          cfg));
        }
    }
    return tests;
}

std::map<Group, PhenotypeParams> default_presets() {
    std::map<Group, PhenotypeParams> presets;
    for (Group g : {Group::HC, Group::MID, Group::VCD, Group::PD}) presets[g] = PhenotypeParams::preset(g);
    return presets;
}

void apply_generator_config(std::string_view text, GeneratorConfig& cfg,
                            std::map<Group, PhenotypeParams>& presets) {
    const std::pair<const char*, double PhenotypeParams::*> fields[] = {
        {"digit_omission_prob", &PhenotypeParams::digit_omission_prob},
        {"digit_repetition_prob", &PhenotypeParams::digit_repetition_prob},
        {"digit_angle_jitter_deg", &PhenotypeParams::digit_angle_jitter_deg},
        {"hand_angle_error_deg", &PhenotypeParams::hand_angle_error_deg},
        {"minute_to_10_error_prob", &PhenotypeParams::minute_to_10_error_prob},
        {"hand_omission_prob", &PhenotypeParams::hand_omission_prob},
        {"crossed_out_digit_prob", &PhenotypeParams::crossed_out_digit_prob},
        {"draw_speed_cm_per_s", &PhenotypeParams::draw_speed_cm_per_s},
        {"clockface_eccentricity", &PhenotypeParams::clockface_eccentricity},
        {"clockface_gap_deg", &PhenotypeParams::clockface_gap_deg},
        {"noise_stroke_rate", &PhenotypeParams::noise_stroke_rate},
        {"inter_symbol_latency_ms", &PhenotypeParams::inter_symbol_latency_ms},
        {"arrowhead_prob", &PhenotypeParams::arrowhead_prob},
        {"size_scale", &PhenotypeParams::size_scale},
        {"subject_variability", &PhenotypeParams::subject_variability},
    };
    const auto group_of = [](std::string_view token) -> std::optional<Group> {
        std::string upper(token);
        for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        return group_from_string(upper);
    };

    const auto lines = detail::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        auto line = lines[li];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(li + 1, "expected key=value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value_text = detail::trim(line.substr(eq + 1));
        const auto value = detail::parse_double(value_text);
        if (!value) throw ParseError(li + 1, fmt::format("bad numeric value '{}'", value_text));

        if (key == "seed") {
            const auto seed = detail::parse_int(value_text);
            if (!seed || *seed < 0) throw ParseError(li + 1, "seed must be a non-negative integer");
            cfg.seed = static_cast<std::uint64_t>(*seed);
            continue;
        }
        if (key == "canvas_radius_cm") {
            if (*value <= 0.0) throw ParseError(li + 1, "canvas_radius_cm must be > 0");
            cfg.canvas_radius_cm = *value;
            continue;
        }
        if (key == "sample_period_ms") {
            const auto period = detail::parse_int(value_text);
            if (!period || *period <= 0) throw ParseError(li + 1, "sample_period_ms must be a positive integer");
            cfg.sample_period_ms = *period;
            continue;
        }
        const auto dot = key.find('.');
        if (dot == std::string_view::npos) throw ParseError(li + 1, fmt::format("unknown key '{}'", key));
        const auto head = key.substr(0, dot), tail = key.substr(dot + 1);
        if (head == "count") {
            const auto g = group_of(tail);
            const auto count = detail::parse_int(value_text);
            if (!g) throw ParseError(li + 1, fmt::format("unknown group '{}'", tail));
            if (!count || *count < 0) throw ParseError(li + 1, "count must be a non-negative integer");
            cfg.counts[*g] = static_cast<int>(*count);
            continue;
        }
        const auto g = group_of(head);
        if (!g) throw ParseError(li + 1, fmt::format("unknown group '{}'", head));
        auto field = std::find_if(std::begin(fields), std::end(fields), [&](const auto& f) { return tail == f.first; });
        if (field == std::end(fields)) throw ParseError(li + 1, fmt::format("unknown phenotype field '{}'", tail));
        auto& params = presets[*g];
        params.group = *g;
        params.*(field->second) = *value;
    }
    for (const auto& [g, params] : presets) params.validate();
}

}  // namespace dcdt
