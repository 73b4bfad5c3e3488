#include "dcdt/stroke_model.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <unordered_map>

#include "text_util.hpp"

namespace dcdt {

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(line > 0 ? fmt::format("line {}: {}", line, what) : what), line_(line) {}

SymbolLabel SymbolLabel::digit(int value) { return SymbolLabel{SymbolKind::Digit, value}; }

SymbolLabel SymbolLabel::of(SymbolKind kind) { return SymbolLabel{kind, std::nullopt}; }

namespace {

constexpr std::string_view kStrokeHeader = "dcdt-strokes v1";
constexpr std::string_view kLabelsHeader = "subject_id,group";

struct SymbolName {
    SymbolKind kind;
    std::string_view name;
};

constexpr SymbolName kSymbolNames[] = {
    {SymbolKind::Clockface, "clockface"},
    {SymbolKind::Digit, "digit"},
    {SymbolKind::HourHand, "hourhand"},
    {SymbolKind::MinuteHand, "minutehand"},
    {SymbolKind::ArrowheadHour, "arrowhead_hour"},
    {SymbolKind::ArrowheadMinute, "arrowhead_minute"},
    {SymbolKind::Noise, "noise"},
};

std::string describe_stroke(const std::string& subject, ClockKind clock, int id) {
    return fmt::format("stroke {} of subject '{}' ({} clock)", id, subject, to_string(clock));
}

}  // namespace

std::string_view to_string(SymbolKind kind) {
    for (const auto& entry : kSymbolNames) {
        if (entry.kind == kind) return entry.name;
    }
    return "noise";
}

std::string_view to_string(ClockKind kind) { return kind == ClockKind::Command ? "command" : "copy"; }

std::string_view to_string(Group group) {
    switch (group) {
        case Group::HC: return "HC";
        case Group::MID: return "MID";
        case Group::VCD: return "VCD";
        case Group::PD: return "PD";
    }
    return "HC";
}

std::optional<SymbolKind> symbol_from_string(std::string_view token) {
    for (const auto& entry : kSymbolNames) {
        if (entry.name == token) return entry.kind;
    }
    return std::nullopt;
}

std::optional<ClockKind> clock_from_string(std::string_view token) {
    if (token == "command") return ClockKind::Command;
    if (token == "copy") return ClockKind::Copy;
    return std::nullopt;
}

std::optional<Group> group_from_string(std::string_view token) {
    for (Group g : {Group::HC, Group::MID, Group::VCD, Group::PD}) {
        if (to_string(g) == token) return g;
    }
    return std::nullopt;
}

void validate(const Stroke& stroke) {
    const auto& label = stroke.label;
    if (label.kind == SymbolKind::Digit) {
        if (!label.digit_value || *label.digit_value < 1 || *label.digit_value > 12) {
            throw Error(fmt::format("stroke {}: digit value must be in 1..12", stroke.id));
        }
    } else if (label.digit_value) {
        throw Error(fmt::format("stroke {}: digit value given for non-digit symbol", stroke.id));
    }
    if (stroke.points.size() < 2) {
        throw Error(fmt::format("stroke {}: needs at least 2 points, has {}", stroke.id, stroke.points.size()));
    }
    for (std::size_t i = 0; i < stroke.points.size(); ++i) {
        if (stroke.points[i].t < 0) throw Error(fmt::format("stroke {}: negative timestamp", stroke.id));
        if (i > 0 && stroke.points[i].t <= stroke.points[i - 1].t) {
            throw Error(fmt::format("stroke {}: timestamps not strictly increasing", stroke.id));
        }
    }
}

void validate(const ClockDrawing& drawing) {
    std::vector<int> ids;
    for (const auto& stroke : drawing.strokes) {
        validate(stroke);
        for (int id : ids) {
            if (id == stroke.id) throw Error(fmt::format("duplicate stroke id {}", stroke.id));
        }
        ids.push_back(stroke.id);
    }
}

void validate(const ClockTest& test) {
    if (test.command.kind != ClockKind::Command || test.copy.kind != ClockKind::Copy) {
        throw Error(fmt::format("subject '{}': command/copy drawings mislabeled", test.subject_id));
    }
    validate(test.command);
    validate(test.copy);
}

std::vector<ClockTest> parse_strokes(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || detail::trim(lines[0]) != kStrokeHeader) {
        throw ParseError(1, fmt::format("expected header '{}'", kStrokeHeader));
    }

    struct StrokeSlot {
        std::size_t test = 0;
        ClockKind clock = ClockKind::Command;
        std::size_t index = 0;
        std::size_t first_line = 0;
    };
    std::vector<ClockTest> tests;
    std::unordered_map<std::string, std::size_t> test_index;
    std::map<std::tuple<std::string, int, int>, StrokeSlot> slots;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const auto line = detail::trim(lines[li]);
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 9) {
            throw ParseError(line_no, fmt::format("expected 9 fields, found {}", f.size()));
        }
        const std::string subject(f[0]);
        if (subject.empty()) throw ParseError(line_no, "empty subject_id");
        const auto clock = clock_from_string(f[1]);
        if (!clock) throw ParseError(line_no, fmt::format("unknown clock '{}'", f[1]));
        const auto stroke_id = detail::parse_int(f[2]);
        if (!stroke_id) throw ParseError(line_no, fmt::format("bad stroke_id '{}'", f[2]));
        const auto kind = symbol_from_string(f[3]);
        if (!kind) throw ParseError(line_no, fmt::format("unknown symbol '{}'", f[3]));

        SymbolLabel label = SymbolLabel::of(*kind);
        if (*kind == SymbolKind::Digit) {
            const auto value = detail::parse_int(f[4]);
            if (!value) throw ParseError(line_no, fmt::format("bad digit_value '{}'", f[4]));
            if (*value < 1 || *value > 12) {
                throw ParseError(line_no, fmt::format("digit_value {} outside 1..12", *value));
            }
            label.digit_value = static_cast<int>(*value);
        } else if (!f[4].empty()) {
            throw ParseError(line_no, fmt::format("digit_value given for symbol '{}'", f[3]));
        }

        const auto point_idx = detail::parse_int(f[5]);
        const auto x = detail::parse_double(f[6]);
        const auto y = detail::parse_double(f[7]);
        const auto t = detail::parse_int(f[8]);
        if (!point_idx) throw ParseError(line_no, fmt::format("bad point_idx '{}'", f[5]));
        if (!x || !y) throw ParseError(line_no, "bad coordinate");
        if (!t) throw ParseError(line_no, fmt::format("bad t_ms '{}'", f[8]));
        if (*t < 0) throw ParseError(line_no, "negative t_ms");

        auto [it, inserted] = test_index.try_emplace(subject, tests.size());
        if (inserted) {
            ClockTest fresh;
            fresh.subject_id = subject;
            tests.push_back(std::move(fresh));
        }
        ClockTest& test = tests[it->second];
        ClockDrawing& drawing = *clock == ClockKind::Command ? test.command : test.copy;

        const auto key = std::make_tuple(subject, static_cast<int>(*clock), static_cast<int>(*stroke_id));
        auto slot_it = slots.find(key);
        if (slot_it == slots.end()) {
            drawing.strokes.push_back(Stroke{static_cast<int>(*stroke_id), label, {}});
            slot_it = slots.emplace(key, StrokeSlot{it->second, *clock, drawing.strokes.size() - 1, line_no}).first;
        }
        Stroke& stroke = drawing.strokes[slot_it->second.index];
        const auto where = describe_stroke(subject, *clock, stroke.id);
        if (!(stroke.label == label)) {
            throw ParseError(line_no, fmt::format("{}: symbol changes within stroke", where));
        }
        if (*point_idx != static_cast<std::int64_t>(stroke.points.size())) {
            throw ParseError(line_no, fmt::format("{}: expected point_idx {}, found {}", where, stroke.points.size(),
                                                  *point_idx));
        }
        if (!stroke.points.empty() && *t <= stroke.points.back().t) {
            throw ParseError(line_no, fmt::format("{}: timestamps not strictly increasing ({} after {})", where, *t,
                                                  stroke.points.back().t));
        }
        stroke.points.push_back(PenPoint{*x, *y, *t});
    }

    for (const auto& [key, slot] : slots) {
        const ClockTest& test = tests[slot.test];
        const Stroke& stroke = test.drawing(slot.clock).strokes[slot.index];
        if (stroke.points.size() < 2) {
            throw ParseError(slot.first_line,
                             fmt::format("{}: needs at least 2 points", describe_stroke(test.subject_id, slot.clock,
                                                                                         stroke.id)));
        }
    }
    return tests;
}

std::string serialize_strokes(const std::vector<ClockTest>& tests) {
    std::string out(kStrokeHeader);
    out += '\n';
    auto emit = [&](const std::string& subject, const ClockDrawing& drawing) {
        for (const auto& stroke : drawing.strokes) {
            const std::string digit =
                stroke.label.digit_value ? std::to_string(*stroke.label.digit_value) : std::string();
            for (std::size_t i = 0; i < stroke.points.size(); ++i) {
                const auto& p = stroke.points[i];
                fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{:.4f},{:.4f},{}\n", subject,
                               to_string(drawing.kind), stroke.id, to_string(stroke.label.kind), digit, i, p.x, p.y,
                               p.t);
            }
        }
    };
    for (const auto& test : tests) {
        emit(test.subject_id, test.command);
        emit(test.subject_id, test.copy);
    }
    return out;
}

std::map<std::string, Group> parse_labels(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || detail::trim(lines[0]) != kLabelsHeader) {
        throw ParseError(1, fmt::format("expected header '{}'", kLabelsHeader));
    }
    std::map<std::string, Group> labels;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto line = detail::trim(lines[li]);
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 2 || f[0].empty()) throw ParseError(li + 1, "expected 'subject_id,group'");
        const auto group = group_from_string(f[1]);
        if (!group) throw ParseError(li + 1, fmt::format("unknown group '{}'", f[1]));
        if (!labels.emplace(std::string(f[0]), *group).second) {
            throw ParseError(li + 1, fmt::format("duplicate subject '{}'", f[0]));
        }
    }
    return labels;
}

std::string serialize_labels(const std::vector<ClockTest>& tests) {
    std::string out(kLabelsHeader);
    out += '\n';
    for (const auto& test : tests) {
        if (test.group) fmt::format_to(std::back_inserter(out), "{},{}\n", test.subject_id, to_string(*test.group));
    }
    return out;
}

void attach_labels(std::vector<ClockTest>& tests, const std::map<std::string, Group>& labels) {
    for (auto& test : tests) {
        if (auto it = labels.find(test.subject_id); it != labels.end()) test.group = it->second;
    }
}

double quantize_cm(double value) { return std::round(value * 1e4) / 1e4; }

double stroke_length(const Stroke& stroke) {
    double total = 0.0;
    for (std::size_t i = 1; i < stroke.points.size(); ++i) {
        total += std::hypot(stroke.points[i].x - stroke.points[i - 1].x, stroke.points[i].y - stroke.points[i - 1].y);
    }
    return total;
}

std::int64_t stroke_duration(const Stroke& stroke) {
    if (stroke.points.empty()) return 0;
    return stroke.points.back().t - stroke.points.front().t;
}

}  // namespace dcdt
