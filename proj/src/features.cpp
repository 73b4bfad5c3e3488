#include "dcdt/features.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>
#include <set>

#include "dcdt/synthgen.hpp"
#include "text_util.hpp"

namespace dcdt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGlyphTouchMargin = 0.05;  // cm
constexpr double kDirectionTolerance = 15.0;
constexpr double kPointsAtTolerance = 15.0;

struct Box {
    double x0 = std::numeric_limits<double>::infinity();
    double y0 = std::numeric_limits<double>::infinity();
    double x1 = -std::numeric_limits<double>::infinity();
    double y1 = -std::numeric_limits<double>::infinity();

    void add(double x, double y) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }
    void add(const Box& b) {
        add(b.x0, b.y0);
        add(b.x1, b.y1);
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
    Point2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    bool touches(const Box& b, double margin) const {
        return x0 - margin <= b.x1 && b.x0 <= x1 + margin && y0 - margin <= b.y1 && b.y0 <= y1 + margin;
    }
    double overlap_area(const Box& b) const {
        const double w = std::min(x1, b.x1) - std::max(x0, b.x0);
        const double h = std::min(y1, b.y1) - std::max(y0, b.y0);
        return w > 0.0 && h > 0.0 ? w * h : 0.0;
    }
};

Box bounds(const Stroke& s) {
    Box b;
    for (const auto& p : s.points) b.add(p.x, p.y);
    return b;
}

// Liang-Barsky clip test of segment a-b against the box.
bool segment_enters(const Box& box, const PenPoint& a, const PenPoint& b) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - box.x0, box.x1 - a.x, a.y - box.y0, box.y1 - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
        } else {
            const double r = q[i] / p[i];
            if (p[i] < 0.0) t0 = std::max(t0, r);
            else t1 = std::min(t1, r);
            if (t0 > t1) return false;
        }
    }
    return true;
}

bool path_enters(const Box& box, const Stroke& s) {
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        if (segment_enters(box, s.points[i - 1], s.points[i])) return true;
    }
    return false;
}

std::vector<const Stroke*> time_ordered(const ClockDrawing& drawing) {
    std::vector<const Stroke*> order;
    for (const auto& s : drawing.strokes) {
        if (!s.points.empty()) order.push_back(&s);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const Stroke* a, const Stroke* b) { return a->points.front().t < b->points.front().t; });
    return order;
}

Point2 centroid(const std::vector<Point2>& pts) {
    Point2 c;
    if (pts.empty()) return c;
    for (const auto& p : pts) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= static_cast<double>(pts.size());
    c.y /= static_cast<double>(pts.size());
    return c;
}

double nominal_angle(int digit) { return 30.0 * (digit % 12); }

// Digit values sorted by clockwise angle; 12 maps to position 0.
std::vector<int> clockwise_positions(const DigitCensus& census) {
    std::vector<std::pair<double, int>> placed;
    for (const auto& d : census.digits) {
        if (d.present) placed.emplace_back(d.angle_deg, d.value % 12);
    }
    std::sort(placed.begin(), placed.end());
    std::vector<int> order;
    for (const auto& [angle, pos] : placed) order.push_back(pos);
    return order;
}

int cyclic_descents(const std::vector<int>& order) {
    int descents = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[(i + 1) % order.size()] < order[i]) ++descents;
    }
    return descents;
}

}  // namespace

// ---------------------------------------------------------------------------
// Clockface

ClockfaceGeometry clockface_geometry(const ClockDrawing& drawing) {
    ClockfaceGeometry g;
    std::vector<Point2> face, all;
    std::vector<Stroke> face_strokes;
    for (const auto& s : drawing.strokes) {
        for (const auto& p : s.points) all.push_back({p.x, p.y});
        if (s.label.kind == SymbolKind::Clockface) {
            face_strokes.push_back(s);
            for (const auto& p : s.points) face.push_back({p.x, p.y});
        }
    }
    if (face.empty()) {
        g.center = centroid(all);
        return g;
    }
    g.present = true;
    try {
        g.fit = fit_ellipse(face);
        g.center = g.fit->center;
    } catch (const DegenerateFitError&) {
        g.center = centroid(face);
    }
    g.largest_gap_deg = largest_angular_gap(face_strokes, g.center);
    const Closure closure = clockface_closure(face_strokes, g.center);
    g.closure_cm = closure.gap_cm;
    g.closure_deg = closure.gap_deg;
    return g;
}

Closure clockface_closure(const std::vector<Stroke>& clockface, Point2 center) {
    const Stroke* first = nullptr;
    const Stroke* last = nullptr;
    for (const auto& s : clockface) {
        if (s.points.empty()) continue;
        if (!first || s.points.front().t < first->points.front().t) first = &s;
        if (!last || s.points.back().t > last->points.back().t) last = &s;
    }
    if (!first) throw Error("clockface_closure needs a clockface stroke");
    const PenPoint& a = first->points.front();
    const PenPoint& b = last->points.back();
    Closure c;
    c.gap_cm = std::hypot(b.x - a.x, b.y - a.y);
    if (c.gap_cm > 0.0) {
        c.gap_deg = angular_difference(clock_angle_deg(center, {a.x, a.y}), clock_angle_deg(center, {b.x, b.y}));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Digits

int DigitCensus::distinct_present() const {
    return static_cast<int>(std::count_if(digits.begin(), digits.end(), [](const auto& d) { return d.present; }));
}

bool DigitCensus::any_repeated() const {
    return std::any_of(digits.begin(), digits.end(), [](const auto& d) { return d.count >= 2; });
}

DigitCensus digit_census(const ClockDrawing& drawing) {
    return digit_census(drawing, clockface_geometry(drawing).center);
}

DigitCensus digit_census(const ClockDrawing& drawing, Point2 center) {
    struct Instance {
        int value;
        Box box;
        std::int64_t start;
        bool crossed = false;
    };
    const auto order = time_ordered(drawing);
    std::vector<Instance> instances;
    for (const Stroke* s : order) {
        if (s->label.kind != SymbolKind::Digit) continue;
        const Box b = bounds(*s);
        const int value = *s->label.digit_value;
        auto it = std::find_if(instances.begin(), instances.end(), [&](const Instance& inst) {
            return inst.value == value && inst.box.touches(b, kGlyphTouchMargin);
        });
        if (it == instances.end()) {
            instances.push_back(Instance{value, b, s->points.front().t});
        } else {
            it->box.add(b);
        }
    }
    for (auto& inst : instances) {
        const double area = std::max(inst.box.area(), 1e-12);
        for (const Stroke* s : order) {
            if (s->label.kind != SymbolKind::Noise || s->points.front().t <= inst.start) continue;
            const Box b = bounds(*s);
            if (b.overlap_area(inst.box) >= 0.5 * area && path_enters(inst.box, *s)) {
                inst.crossed = true;
                break;
            }
        }
    }

    DigitCensus census;
    for (int v = 1; v <= 12; ++v) {
        auto& rec = census.digits[static_cast<std::size_t>(v - 1)];
        rec.value = v;
        rec.angle_deg = rec.width_cm = rec.height_cm = kNaN;
    }
    for (const auto& inst : instances) {
        if (inst.crossed) {
            ++census.crossed_out;
            continue;
        }
        auto& rec = census.digits[static_cast<std::size_t>(inst.value - 1)];
        if (rec.count == 0) {
            rec.present = true;
            rec.angle_deg = clock_angle_deg(center, inst.box.center());
            rec.width_cm = inst.box.width();
            rec.height_cm = inst.box.height();
        }
        ++rec.count;
    }
    return census;
}

std::map<int, bool> digit_eighth_correct(const DigitCensus& census) {
    std::map<int, bool> result;
    for (int d : kNonAnchorDigits) {
        const auto& rec = census[d];
        if (!rec.present) {
            result[d] = false;
            continue;
        }
        const double lo = 45.0 * std::floor(nominal_angle(d) / 45.0);
        result[d] = rec.angle_deg > lo && rec.angle_deg < lo + 45.0;
    }
    return result;
}

bool digit_order_correct(const DigitCensus& census) {
    for (const auto& d : census.digits) {
        if (d.count != 1) return false;
    }
    return digits_in_sequence(census);
}

bool digits_in_sequence(const DigitCensus& census) {
    const auto order = clockwise_positions(census);
    return order.size() >= 2 && cyclic_descents(order) == 1;
}

bool digits_counterclockwise(const DigitCensus& census) {
    if (census.any_repeated()) return false;
    const auto order = clockwise_positions(census);
    if (order.size() < 3) return false;
    return cyclic_descents(order) == static_cast<int>(order.size()) - 1;
}

// ---------------------------------------------------------------------------
// Hands

HandMetrics hand_metrics(const ClockDrawing& drawing, Point2 center) {
    HandMetrics m;
    const auto order = time_ordered(drawing);
    std::vector<double> directions;
    std::vector<std::pair<Point2, bool>> arrowheads;  // centroid, is_hour

    const auto measure = [&](const Stroke& s, HandRecord& rec, double target) {
        const auto dist = [&](const PenPoint& p) { return std::hypot(p.x - center.x, p.y - center.y); };
        const auto [near, far] = std::minmax_element(s.points.begin(), s.points.end(),
                                                     [&](const auto& a, const auto& b) { return dist(a) < dist(b); });
        rec.angle_deg = clock_angle_deg({near->x, near->y}, {far->x, far->y});
        rec.length_cm = std::hypot(far->x - near->x, far->y - near->y);
        rec.angle_error_deg = angular_difference(rec.angle_deg, target);
    };

    m.hour.angle_deg = m.hour.length_cm = m.hour.angle_error_deg = kNaN;
    m.minute.angle_deg = m.minute.length_cm = m.minute.angle_error_deg = kNaN;
    for (const Stroke* s : order) {
        switch (s->label.kind) {
            case SymbolKind::HourHand:
            case SymbolKind::MinuteHand: {
                const bool hour = s->label.kind == SymbolKind::HourHand;
                HandRecord& rec = hour ? m.hour : m.minute;
                if (!rec.present) measure(*s, rec, hour ? kHourTargetDeg : kMinuteTargetDeg);
                rec.present = true;
                ++rec.strokes;
                ++m.hand_strokes;
                const auto& a = s->points.front();
                const auto& b = s->points.back();
                const double da = std::hypot(a.x - center.x, a.y - center.y);
                const double db = std::hypot(b.x - center.x, b.y - center.y);
                directions.push_back(da <= db ? clock_angle_deg({a.x, a.y}, {b.x, b.y})
                                              : clock_angle_deg({b.x, b.y}, {a.x, a.y}));
                break;
            }
            case SymbolKind::ArrowheadHour:
            case SymbolKind::ArrowheadMinute: {
                std::vector<Point2> pts;
                for (const auto& p : s->points) pts.push_back({p.x, p.y});
                arrowheads.emplace_back(centroid(pts), s->label.kind == SymbolKind::ArrowheadHour);
                (s->label.kind == SymbolKind::ArrowheadHour ? m.hour_arrowhead : m.minute_arrowhead) = true;
                break;
            }
            default:
                break;
        }
    }

    if (m.hour.present && m.minute.present && m.minute.length_cm > 0.0) {
        m.size_ratio = m.hour.length_cm / m.minute.length_cm;
    }
    m.minute_points_to_10 =
        m.minute.present && angular_difference(m.minute.angle_deg, kDigitTenDeg) <= kPointsAtTolerance;

    if (!arrowheads.empty()) {
        m.arrowheads_outward = std::all_of(arrowheads.begin(), arrowheads.end(), [&](const auto& entry) {
            const HandRecord& hand = entry.second ? m.hour : m.minute;
            if (!hand.present) return false;
            const double r = std::hypot(entry.first.x - center.x, entry.first.y - center.y);
            return r > 0.5 * hand.length_cm;
        });
    }

    std::vector<double> clusters;
    for (double dir : directions) {
        const bool known = std::any_of(clusters.begin(), clusters.end(),
                                       [&](double c) { return angular_difference(c, dir) <= kDirectionTolerance; });
        if (!known) clusters.push_back(dir);
    }
    m.distinct_directions = static_cast<int>(clusters.size());
    m.perseveration = m.hand_strokes > 2 && m.distinct_directions > 2;
    return m;
}

// ---------------------------------------------------------------------------
// Timing

Component component_of(SymbolKind kind) {
    switch (kind) {
        case SymbolKind::Clockface: return Component::Clockface;
        case SymbolKind::Digit: return Component::Digits;
        case SymbolKind::HourHand:
        case SymbolKind::MinuteHand:
        case SymbolKind::ArrowheadHour:
        case SymbolKind::ArrowheadMinute: return Component::Hands;
        case SymbolKind::Noise: return Component::Noise;
    }
    return Component::Noise;
}

ClockTiming clock_timing(const ClockDrawing& drawing) {
    ClockTiming timing;
    const auto order = time_ordered(drawing);
    timing.stroke_count = static_cast<int>(order.size());
    if (order.empty()) {
        timing.mean_latency_ms = timing.mean_pen_up_ms = kNaN;
        for (auto& c : timing.components) c.speed_cm_s = kNaN;
        return timing;
    }
    std::int64_t first = order.front()->points.front().t, last = order.front()->points.back().t;
    for (const Stroke* s : order) {
        first = std::min(first, s->points.front().t);
        last = std::max(last, s->points.back().t);
        const double len = stroke_length(*s);
        timing.ink_length_cm += len;
        auto& c = timing.components[static_cast<std::size_t>(component_of(s->label.kind))];
        ++c.strokes;
        c.ink_cm += len;
        c.ink_time_ms += static_cast<double>(stroke_duration(*s));
    }
    timing.total_time_ms = static_cast<double>(last - first);
    for (auto& c : timing.components) c.speed_cm_s = c.ink_time_ms > 0.0 ? c.ink_cm / (c.ink_time_ms / 1000.0) : kNaN;

    double pen_up = 0.0, latency = 0.0;
    int episodes_gaps = 0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const double gap = static_cast<double>(order[i]->points.front().t - order[i - 1]->points.back().t);
        pen_up += gap;
        if (component_of(order[i]->label.kind) != component_of(order[i - 1]->label.kind)) {
            latency += gap;
            ++episodes_gaps;
        }
    }
    timing.mean_pen_up_ms = order.size() >= 2 ? pen_up / static_cast<double>(order.size() - 1) : kNaN;
    timing.mean_latency_ms = episodes_gaps > 0 ? latency / episodes_gaps : kNaN;
    return timing;
}

TimingFeatures timing_features(const ClockTest& test) {
    TimingFeatures f;
    f.command = clock_timing(test.command);
    f.copy = clock_timing(test.copy);
    f.total_time_ms = f.command.total_time_ms + f.copy.total_time_ms;
    f.ink_length_cm = f.command.ink_length_cm + f.copy.ink_length_cm;
    const auto cmd = time_ordered(test.command);
    const auto copy = time_ordered(test.copy);
    if (cmd.empty() || copy.empty()) {
        f.between_clocks_ms = kNaN;
    } else {
        std::int64_t cmd_end = 0;
        for (const Stroke* s : cmd) cmd_end = std::max(cmd_end, s->points.back().t);
        f.between_clocks_ms = static_cast<double>(copy.front()->points.front().t - cmd_end);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Raw feature table

namespace {

void add_clock_features(const ClockDrawing& drawing, const ClockTiming& timing, const std::string& prefix,
                        std::map<std::string, double>& out) {
    const auto put = [&](const char* name, double value) { out[prefix + name] = value; };
    const auto flag = [](bool b) { return b ? 1.0 : 0.0; };

    const ClockfaceGeometry face = clockface_geometry(drawing);
    put("clockface_present", flag(face.present));
    put("face_eccentricity", face.fit ? face.fit->eccentricity : kNaN);
    put("face_major_cm", face.fit ? face.fit->semi_major : kNaN);
    put("face_minor_cm", face.fit ? face.fit->semi_minor : kNaN);
    put("face_fit_residual_cm", face.fit ? face.fit->residual_rms : kNaN);
    put("face_largest_gap_deg", face.present ? face.largest_gap_deg : kNaN);
    put("face_closure_cm", face.present ? face.closure_cm : kNaN);
    put("face_closure_deg", face.present ? face.closure_deg : kNaN);

    const DigitCensus census = digit_census(drawing, face.center);
    const auto eighths = digit_eighth_correct(census);
    const int present = census.distinct_present();
    const bool all_present = present == 12;
    const bool repeated = census.any_repeated();
    const bool in_sequence = digits_in_sequence(census);
    put("digit_count", present);
    put("all_digits_present", flag(all_present));
    put("digits_repeated", flag(repeated));
    put("digits_in_sequence", flag(in_sequence));
    put("digits_complete_ordered", flag(digit_order_correct(census)));
    put("digits_counterclockwise", flag(digits_counterclockwise(census)));
    put("nonanchor_digits_correct_eighth",
        flag(std::all_of(eighths.begin(), eighths.end(), [](const auto& e) { return e.second; })));
    put("crossed_out_digits", flag(census.crossed_out > 0));

    double max_err = kNaN, sum_err = 0.0, sum_h = 0.0, sum_w = 0.0;
    for (const auto& d : census.digits) {
        if (!d.present) continue;
        const double err = angular_difference(d.angle_deg, nominal_angle(d.value));
        max_err = std::isnan(max_err) ? err : std::max(max_err, err);
        sum_err += err;
        sum_h += d.height_cm;
        sum_w += d.width_cm;
    }
    put("max_digit_angle_error_deg", max_err);
    put("mean_digit_angle_error_deg", present > 0 ? sum_err / present : kNaN);
    put("digit_height_cm", present > 0 ? sum_h / present : kNaN);
    put("digit_width_cm", present > 0 ? sum_w / present : kNaN);

    const HandMetrics hands = hand_metrics(drawing, face.center);
    put("hour_hand_present", flag(hands.hour.present));
    put("minute_hand_present", flag(hands.minute.present));
    put("two_hands_missing", flag(!(hands.hour.present && hands.minute.present)));
    put("hour_angle_error_deg", hands.hour.angle_error_deg);
    put("minute_angle_error_deg", hands.minute.angle_error_deg);
    put("hour_length_cm", hands.hour.length_cm);
    put("minute_length_cm", hands.minute.length_cm);
    put("hand_size_ratio", hands.size_ratio.value_or(kNaN));
    put("minute_points_to_10", flag(hands.minute_points_to_10));
    put("hour_arrowhead", flag(hands.hour_arrowhead));
    put("minute_arrowhead", flag(hands.minute_arrowhead));
    put("arrowheads_outward", (hands.hour_arrowhead || hands.minute_arrowhead) ? flag(hands.arrowheads_outward)
                                                                                 : kNaN);
    put("hand_stroke_count", hands.hand_strokes);
    put("hands_perseveration", flag(hands.perseveration));

    put("total_time_ms", timing.total_time_ms);
    put("stroke_count", timing.stroke_count);
    put("ink_length_cm", timing.ink_length_cm);
    put("mean_latency_ms", timing.mean_latency_ms);
    put("mean_pen_up_ms", timing.mean_pen_up_ms);
    const std::pair<Component, const char*> comps[] = {
        {Component::Clockface, "face"}, {Component::Digits, "digits"}, {Component::Hands, "hands"}};
    for (const auto& [c, name] : comps) {
        const auto& ct = timing[c];
        out[fmt::format("{}{}_time_ms", prefix, name)] = ct.ink_time_ms;
        out[fmt::format("{}{}_ink_cm", prefix, name)] = ct.ink_cm;
        out[fmt::format("{}{}_speed_cm_s", prefix, name)] = ct.speed_cm_s;
    }
    put("noise_count", timing[Component::Noise].strokes);
    put("noise_present", flag(timing[Component::Noise].strokes > 0));
}

}  // namespace

std::map<std::string, double> raw_features(const ClockTest& test) {
    std::map<std::string, double> out;
    const TimingFeatures timing = timing_features(test);
    add_clock_features(test.command, timing.command, "cmd_", out);
    add_clock_features(test.copy, timing.copy, "copy_", out);
    out["both_total_time_ms"] = timing.total_time_ms;
    out["both_between_clocks_ms"] = timing.between_clocks_ms;
    out["both_ink_length_cm"] = timing.ink_length_cm;
    return out;
}

const std::vector<std::string>& known_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, value] : raw_features(ClockTest{})) n.push_back(name);
        return n;
    }();
    return names;
}

// ---------------------------------------------------------------------------
// Catalog

bool Cutpoint::fires(double value) const {
    switch (op) {
        case Op::Greater: return value > threshold;
        case Op::GreaterEqual: return value >= threshold;
        case Op::Less: return value < threshold;
        case Op::LessEqual: return value <= threshold;
    }
    return false;
}

std::string Cutpoint::to_string() const {
    const char* sym = op == Op::Greater ? ">" : op == Op::GreaterEqual ? ">=" : op == Op::Less ? "<" : "<=";
    return fmt::format("{}{}", sym, threshold);
}

const FeatureDef* FeatureCatalog::find(std::string_view name) const {
    for (const auto& f : features) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

const FeatureDef& FeatureCatalog::at(std::string_view name) const {
    if (const auto* f = find(name)) return *f;
    throw ConfigError(fmt::format("feature '{}' not in catalog", name));
}

std::vector<std::string> FeatureCatalog::names(FeatureSet set) const {
    std::vector<std::string> out;
    for (const auto& f : features) {
        if (set == FeatureSet::All || f.simplest) out.push_back(f.name);
    }
    return out;
}

FeatureCatalog assign_heights(FeatureCatalog catalog) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < catalog.features.size(); ++i) {
        if (!index.emplace(catalog.features[i].name, i).second) {
            throw ConfigError(fmt::format("duplicate feature '{}'", catalog.features[i].name));
        }
    }
    enum class Mark { None, Active, Done };
    std::vector<Mark> mark(catalog.features.size(), Mark::None);
    std::function<int(std::size_t)> height = [&](std::size_t i) -> int {
        auto& f = catalog.features[i];
        if (mark[i] == Mark::Done) return f.u;
        if (mark[i] == Mark::Active) throw ConfigError(fmt::format("dependency cycle through '{}'", f.name));
        mark[i] = Mark::Active;
        int u = 1;
        for (const auto& dep : f.dependencies) {
            const auto it = index.find(dep);
            if (it == index.end()) {
                throw ConfigError(fmt::format("feature '{}' depends on unknown '{}'", f.name, dep));
            }
            u = std::max(u, 1 + height(it->second));
        }
        f.u = u;
        mark[i] = Mark::Done;
        return u;
    };
    for (std::size_t i = 0; i < catalog.features.size(); ++i) height(i);
    return catalog;
}

FeatureCatalog parse_catalog(std::string_view text) {
    FeatureCatalog catalog;
    const auto& known = known_feature_names();
    const auto lines = detail::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const auto line = detail::trim(lines[li]);
        if (line.empty() || line.front() == '#') continue;
        const auto f = detail::split(line, '|');
        if (f.size() != 7) throw ParseError(li + 1, fmt::format("expected 7 '|'-separated fields, found {}", f.size()));
        FeatureDef def;
        def.name = std::string(detail::trim(f[0]));
        if (std::find(known.begin(), known.end(), def.name) == known.end()) {
            throw ParseError(li + 1, fmt::format("unknown feature '{}'", def.name));
        }
        const auto clock = detail::trim(f[1]);
        if (clock == "command") def.clock = FeatureClock::Command;
        else if (clock == "copy") def.clock = FeatureClock::Copy;
        else if (clock == "both") def.clock = FeatureClock::Both;
        else throw ParseError(li + 1, fmt::format("unknown clock '{}'", clock));

        const auto kind = detail::trim(f[2]);
        if (kind == "numeric") def.kind = FeatureKind::Numeric;
        else if (kind == "binary") def.kind = FeatureKind::Binary;
        else throw ParseError(li + 1, fmt::format("unknown kind '{}'", kind));

        for (auto dep : detail::split(detail::trim(f[3]), ',')) {
            dep = detail::trim(dep);
            if (!dep.empty()) def.dependencies.emplace_back(dep);
        }
        const auto simplest = detail::trim(f[4]);
        if (simplest != "0" && simplest != "1") throw ParseError(li + 1, "simplest must be 0 or 1");
        def.simplest = simplest == "1";

        const auto cut = detail::trim(f[5]);
        if (def.kind == FeatureKind::Binary) {
            if (cut == "abnormal=1") def.abnormal = 1;
            else if (cut == "abnormal=0") def.abnormal = 0;
            else throw ParseError(li + 1, "binary features need cutpoint abnormal=0 or abnormal=1");
        } else {
            std::string_view rest = cut;
            if (rest.starts_with(">=")) def.cutpoint.op = Cutpoint::Op::GreaterEqual, rest.remove_prefix(2);
            else if (rest.starts_with("<=")) def.cutpoint.op = Cutpoint::Op::LessEqual, rest.remove_prefix(2);
            else if (rest.starts_with(">")) def.cutpoint.op = Cutpoint::Op::Greater, rest.remove_prefix(1);
            else if (rest.starts_with("<")) def.cutpoint.op = Cutpoint::Op::Less, rest.remove_prefix(1);
            else throw ParseError(li + 1, fmt::format("bad cutpoint '{}'", cut));
            const auto threshold = detail::parse_double(rest);
            if (!threshold) throw ParseError(li + 1, fmt::format("bad cutpoint threshold '{}'", rest));
            def.cutpoint.threshold = *threshold;
        }
        def.description = std::string(detail::trim(f[6]));
        if (def.description.empty()) throw ParseError(li + 1, "empty description");
        catalog.features.push_back(std::move(def));
    }
    catalog = assign_heights(std::move(catalog));
    if (catalog.names(FeatureSet::Simplest).empty()) throw ConfigError("catalog has no Simplest features");
    return catalog;
}

std::string serialize_catalog(const FeatureCatalog& catalog) {
    std::string out;
    for (const auto& f : catalog.features) {
        std::string deps;
        for (const auto& d : f.dependencies) {
            if (!deps.empty()) deps += ',';
            deps += d;
        }
        const char* clock = f.clock == FeatureClock::Command ? "command" : f.clock == FeatureClock::Copy ? "copy" : "both";
        const std::string cut =
            f.kind == FeatureKind::Binary ? fmt::format("abnormal={}", f.abnormal) : f.cutpoint.to_string();
        fmt::format_to(std::back_inserter(out), "{}|{}|{}|{}|{}|{}|{}\n", f.name, clock,
                       f.kind == FeatureKind::Binary ? "binary" : "numeric", deps, f.simplest ? 1 : 0, cut,
                       f.description);
    }
    return out;
}

const FeatureCatalog& default_catalog() {
    static const FeatureCatalog catalog = parse_catalog(default_catalog_text());
    return catalog;
}

// ---------------------------------------------------------------------------
// Vectors

std::optional<double> FeatureVector::get(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[i];
    }
    return std::nullopt;
}

double FeatureVector::at(std::string_view name) const {
    if (auto v = get(name)) return *v;
    throw Error(fmt::format("feature '{}' not in vector", name));
}

FeatureVector extract(const ClockTest& test, const FeatureCatalog& catalog, FeatureSet set) {
    const auto raw = raw_features(test);
    FeatureVector v;
    v.names = catalog.names(set);
    v.values.reserve(v.names.size());
    for (const auto& name : v.names) {
        const auto it = raw.find(name);
        if (it == raw.end()) throw ConfigError(fmt::format("extractor has no feature '{}'", name));
        v.values.push_back(it->second);
    }
    return v;
}

FeatureVector binarize(const FeatureVector& v, const FeatureCatalog& catalog) {
    if (v.binarized) return v;
    FeatureVector out;
    out.names = v.names;
    out.binarized = true;
    out.values.reserve(v.values.size());
    for (std::size_t i = 0; i < v.names.size(); ++i) {
        const FeatureDef& def = catalog.at(v.names[i]);
        const double x = v.values[i];
        double b;
        if (def.kind == FeatureKind::Binary) {
            b = std::isnan(x) ? def.abnormal : (x != 0.0 ? 1.0 : 0.0);
        } else {
            b = std::isnan(x) || def.cutpoint.fires(x) ? 1.0 : 0.0;
        }
        out.values.push_back(b);
    }
    return out;
}

std::string features_csv(const std::vector<ClockTest>& tests, const std::vector<FeatureVector>& vectors) {
    if (tests.size() != vectors.size()) throw Error("features_csv: tests and vectors differ in length");
    std::string out = "subject_id,group";
    if (!vectors.empty()) {
        for (const auto& n : vectors.front().names) out += "," + n;
    }
    out += '\n';
    for (std::size_t i = 0; i < tests.size(); ++i) {
        out += tests[i].subject_id;
        out += ',';
        if (tests[i].group) out += to_string(*tests[i].group);
        for (double x : vectors[i].values) {
            out += ',';
            if (!std::isnan(x)) out += fmt::format("{:.6g}", x);
        }
        out += '\n';
    }
    return out;
}

}  // namespace dcdt
