#pragma once

// Operationalized Rouleau scoring: face integrity (0-2), numbers (0-4) and
// hands (0-4), each vague rubric phrase tied to one named threshold.

#include <string>
#include <string_view>
#include <vector>

#include "dcdt/features.hpp"

namespace dcdt {

struct RouleauParams {
    double eps1_deg = 15.0;               // slight hand pointing error starts above this
    double eps2_deg = 45.0;               // major hand pointing error starts above this
    double digit_minimal_err_deg = 22.5;  // "at most minimal error in spatial arrangement"
    double digit_gross_err_deg = 45.0;    // "gross distortion" of the number layout
    double face_distortion_ecc = 0.6;
    double face_gap_deg = 45.0;
    double size_ratio_max = 0.9;  // hour/minute length ratio still counted as a size difference
    int cut_score = 8;            // impaired iff total < cut_score

    void validate() const;
    friend bool operator==(const RouleauParams&, const RouleauParams&) = default;
};

/// The raw features Rouleau consumes, pulled from one clock of a vector.
struct RouleauInputs {
    bool face_present = false;
    double face_eccentricity = 0.0;  // NaN when the ellipse fit failed
    double face_gap_deg = 0.0;
    int digit_count = 0;
    bool digits_repeated = false;
    bool digits_in_sequence = false;
    bool digits_counterclockwise = false;
    double max_digit_error_deg = 0.0;  // NaN when no digits
    bool hour_present = false;
    bool minute_present = false;
    double hour_error_deg = 0.0;
    double minute_error_deg = 0.0;
    double size_ratio = 0.0;  // NaN unless both hands present
    bool perseveration = false;
};

/// Reads `<prefix>_*` raw features (prefix "cmd" or "copy") from an
/// unbinarized vector. Throws Error when a required feature is absent.
RouleauInputs rouleau_inputs(const FeatureVector& fv, ClockKind clock = ClockKind::Command);

struct RouleauScore {
    int face_pts = 0;
    int numbers_pts = 0;
    int hands_pts = 0;
    int total = 0;
    std::string face_why;
    std::string numbers_why;
    std::string hands_why;
};

int score_face(const RouleauInputs& in, const RouleauParams& p, std::string* why = nullptr);
int score_numbers(const RouleauInputs& in, const RouleauParams& p, std::string* why = nullptr);
int score_hands(const RouleauInputs& in, const RouleauParams& p, std::string* why = nullptr);

RouleauScore rouleau_total(const RouleauInputs& in, const RouleauParams& p);
RouleauScore rouleau_total(const FeatureVector& fv, const RouleauParams& p, ClockKind clock = ClockKind::Command);

enum class Decision { Healthy, Impaired };
Decision classify(const RouleauScore& score, const RouleauParams& p);

/// Candidate values per threshold. Every combination with eps1 < eps2 and
/// minimal < gross is tried.
struct RouleauGrid {
    std::vector<double> eps1_deg{10.0, 15.0, 20.0};
    std::vector<double> eps2_deg{30.0, 45.0, 60.0};
    std::vector<double> digit_minimal_err_deg{15.0, 22.5, 30.0};
    std::vector<double> digit_gross_err_deg{45.0, 60.0};
    std::vector<double> face_distortion_ecc{0.4, 0.6};
    std::vector<double> face_gap_deg{30.0, 45.0, 60.0};
    std::vector<double> size_ratio_max{0.9};
    std::vector<int> cut_score{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    static RouleauGrid single(const RouleauParams& p);
};

struct RouleauFit {
    RouleauParams params;
    double training_auc = 0.0;
};

/// Maximizes training AUC of -total (lower score = more impaired). Ties go to
/// the smallest (eps1, eps2), then the earliest combination. The cut score is
/// then picked from the grid by training balanced accuracy (ties: smallest).
/// `impaired[i]` is the label of `inputs[i]`; both classes must occur.
RouleauFit fit_params(const std::vector<RouleauInputs>& inputs, const std::vector<bool>& impaired,
                      const RouleauGrid& grid = {});

/// `key=value` params file.
std::string serialize_params(const RouleauParams& p);
RouleauParams parse_params(std::string_view text);

}  // namespace dcdt
