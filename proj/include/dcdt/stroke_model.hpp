#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dcdt {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text did not conform to a file format. `line()` is 1-based, 0 when
/// the problem is not attributable to a single line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Page coordinates in centimeters, y axis pointing up. Time in integer
// milliseconds since the first sample of the command clock.
struct PenPoint {
    double x = 0.0;
    double y = 0.0;
    std::int64_t t = 0;

    friend bool operator==(const PenPoint&, const PenPoint&) = default;
};

enum class SymbolKind {
    Clockface,
    Digit,
    HourHand,
    MinuteHand,
    ArrowheadHour,
    ArrowheadMinute,
    Noise,
};

struct SymbolLabel {
    SymbolKind kind = SymbolKind::Noise;
    std::optional<int> digit_value;  // present iff kind == Digit, 1..12

    static SymbolLabel digit(int value);
    static SymbolLabel of(SymbolKind kind);

    friend bool operator==(const SymbolLabel&, const SymbolLabel&) = default;
};

struct Stroke {
    int id = 0;
    SymbolLabel label;
    std::vector<PenPoint> points;

    friend bool operator==(const Stroke&, const Stroke&) = default;
};

enum class ClockKind { Command, Copy };

struct ClockDrawing {
    ClockKind kind = ClockKind::Command;
    std::vector<Stroke> strokes;

    friend bool operator==(const ClockDrawing&, const ClockDrawing&) = default;
};

enum class Group { HC, MID, VCD, PD };

struct ClockTest {
    std::string subject_id;
    ClockDrawing command{ClockKind::Command, {}};
    ClockDrawing copy{ClockKind::Copy, {}};
    std::optional<Group> group;

    const ClockDrawing& drawing(ClockKind kind) const { return kind == ClockKind::Command ? command : copy; }

    friend bool operator==(const ClockTest&, const ClockTest&) = default;
};

std::string_view to_string(SymbolKind kind);
std::string_view to_string(ClockKind kind);
std::string_view to_string(Group group);
std::optional<SymbolKind> symbol_from_string(std::string_view token);
std::optional<ClockKind> clock_from_string(std::string_view token);
std::optional<Group> group_from_string(std::string_view token);

/// Throws Error when a stroke, drawing or test invariant is violated.
void validate(const Stroke& stroke);
void validate(const ClockDrawing& drawing);
void validate(const ClockTest& test);

/// Parses a `dcdt-strokes v1` file. Tests appear in order of first
/// occurrence of their subject id; strokes in order of first occurrence
/// within their drawing. Groups are left unset (see parse_labels).
std::vector<ClockTest> parse_strokes(std::string_view text);

std::string serialize_strokes(const std::vector<ClockTest>& tests);

/// Parses a `subject_id,group` labels file.
std::map<std::string, Group> parse_labels(std::string_view text);

/// Emits the labels file for every test that has a group.
std::string serialize_labels(const std::vector<ClockTest>& tests);

/// Sets each test's group from `labels`; tests without a label keep theirs.
void attach_labels(std::vector<ClockTest>& tests, const std::map<std::string, Group>& labels);

/// Rounds a coordinate to the file format's 4-decimal precision so that a
/// serialize/parse round trip is bit-exact.
double quantize_cm(double value);

/// Sum of Euclidean distances between consecutive points, in cm.
double stroke_length(const Stroke& stroke);

/// Last timestamp minus first timestamp, in ms.
std::int64_t stroke_duration(const Stroke& stroke);

}  // namespace dcdt
