#include "dcdt/rouleau.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "dcdt/eval.hpp"
#include "text_util.hpp"

namespace dcdt {

void RouleauParams::validate() const {
    if (!(eps1_deg > 0.0 && eps1_deg < eps2_deg && eps2_deg <= 180.0)) {
        throw Error(fmt::format("rouleau params: need 0 < eps1 < eps2 <= 180 (got {}, {})", eps1_deg, eps2_deg));
    }
    if (cut_score < 0 || cut_score > 10) throw Error("rouleau params: cut_score must be in [0,10]");
    if (!(digit_minimal_err_deg <= digit_gross_err_deg)) {
        throw Error("rouleau params: digit_minimal_err_deg must not exceed digit_gross_err_deg");
    }
}

RouleauInputs rouleau_inputs(const FeatureVector& fv, ClockKind clock) {
    const std::string prefix = clock == ClockKind::Command ? "cmd_" : "copy_";
    const auto num = [&](const char* name) { return fv.at(prefix + name); };
    const auto flag = [&](const char* name) {
        const double v = num(name);
        return !std::isnan(v) && v != 0.0;
    };
    RouleauInputs in;
    in.face_present = flag("clockface_present");
    in.face_eccentricity = num("face_eccentricity");
    in.face_gap_deg = num("face_largest_gap_deg");
    const double count = num("digit_count");
    in.digit_count = std::isnan(count) ? 0 : static_cast<int>(count);
    in.digits_repeated = flag("digits_repeated");
    in.digits_in_sequence = flag("digits_in_sequence");
    in.digits_counterclockwise = flag("digits_counterclockwise");
    in.max_digit_error_deg = num("max_digit_angle_error_deg");
    in.hour_present = flag("hour_hand_present");
    in.minute_present = flag("minute_hand_present");
    in.hour_error_deg = num("hour_angle_error_deg");
    in.minute_error_deg = num("minute_angle_error_deg");
    in.size_ratio = num("hand_size_ratio");
    in.perseveration = flag("hands_perseveration");
    return in;
}

int score_face(const RouleauInputs& in, const RouleauParams& p, std::string* why) {
    const auto say = [&](int pts, std::string text) {
        if (why) *why = std::move(text);
        return pts;
    };
    if (!in.face_present) return say(0, "clockface absent");
    const bool distorted = std::isnan(in.face_eccentricity) || in.face_eccentricity > p.face_distortion_ecc;
    const bool incomplete = std::isnan(in.face_gap_deg) || in.face_gap_deg > p.face_gap_deg;
    if (!distorted && !incomplete) return say(2, "present without gross distortion");
    if (distorted && incomplete && !(in.face_gap_deg <= 180.0)) return say(0, "totally inappropriate clockface");
    if (distorted && incomplete) return say(1, "incomplete and distorted");
    return say(1, distorted ? "some distortion" : "incomplete");
}

int score_numbers(const RouleauInputs& in, const RouleauParams& p, std::string* why) {
    const auto say = [&](int pts, std::string text) {
        if (why) *why = std::move(text);
        return pts;
    };
    if (in.digit_count < 3) return say(0, "absence or poor representation of numbers");
    if (in.digits_counterclockwise) return say(2, "numbers placed counterclockwise");
    const double dev = std::isnan(in.max_digit_error_deg) ? 180.0 : in.max_digit_error_deg;
    const bool all_once = in.digit_count == 12 && !in.digits_repeated;
    if (all_once) {
        if (in.digits_in_sequence && dev <= p.digit_minimal_err_deg) {
            return say(4, "all present in the right order, minimal spatial error");
        }
        if (in.digits_in_sequence && dev <= p.digit_gross_err_deg) {
            return say(3, "all present, errors in spatial arrangement");
        }
        return say(2, "all present, gross distortion in spatial layout");
    }
    if (dev <= p.digit_gross_err_deg) return say(2, "numbers missing or added, no gross distortion");
    return say(1, "numbers missing or added with gross distortion");
}

int score_hands(const RouleauInputs& in, const RouleauParams& p, std::string* why) {
    const auto say = [&](int pts, std::string text) {
        if (why) *why = std::move(text);
        return pts;
    };
    if (in.perseveration) return say(0, "perseveration on hands");
    if (!in.hour_present && !in.minute_present) return say(0, "no hands");
    if (in.hour_present != in.minute_present) return say(1, "only one hand");

    const double errors[2] = {in.hour_error_deg, in.minute_error_deg};
    int slight = 0;
    for (double e : errors) {
        if (std::isnan(e) || e > p.eps2_deg) return say(2, "major errors in the placement of the hands");
        if (e > p.eps1_deg) ++slight;
    }
    const bool size_ok = !std::isnan(in.size_ratio) && in.size_ratio <= p.size_ratio_max;
    if (slight == 0 && size_ok) return say(4, "hands in correct position, size difference respected");
    if (slight <= 1) {
        return say(3, slight == 0 ? "no size difference between the hands" : "slight error in the placement of a hand");
    }
    return say(2, "both hands misplaced");
}

RouleauScore rouleau_total(const RouleauInputs& in, const RouleauParams& p) {
    RouleauScore s;
    s.face_pts = score_face(in, p, &s.face_why);
    s.numbers_pts = score_numbers(in, p, &s.numbers_why);
    s.hands_pts = score_hands(in, p, &s.hands_why);
    s.total = s.face_pts + s.numbers_pts + s.hands_pts;
    return s;
}

RouleauScore rouleau_total(const FeatureVector& fv, const RouleauParams& p, ClockKind clock) {
    return rouleau_total(rouleau_inputs(fv, clock), p);
}

Decision classify(const RouleauScore& score, const RouleauParams& p) {
    return score.total < p.cut_score ? Decision::Impaired : Decision::Healthy;
}

RouleauGrid RouleauGrid::single(const RouleauParams& p) {
    RouleauGrid g;
    g.eps1_deg = {p.eps1_deg};
    g.eps2_deg = {p.eps2_deg};
    g.digit_minimal_err_deg = {p.digit_minimal_err_deg};
    g.digit_gross_err_deg = {p.digit_gross_err_deg};
    g.face_distortion_ecc = {p.face_distortion_ecc};
    g.face_gap_deg = {p.face_gap_deg};
    g.size_ratio_max = {p.size_ratio_max};
    g.cut_score = {p.cut_score};
    return g;
}

RouleauFit fit_params(const std::vector<RouleauInputs>& inputs, const std::vector<bool>& impaired,
                      const RouleauGrid& grid_in) {
    if (inputs.size() != impaired.size()) throw Error("fit_params: inputs and labels differ in length");
    const auto positives = std::count(impaired.begin(), impaired.end(), true);
    if (positives == 0 || positives == static_cast<long>(impaired.size())) {
        throw Error("fit_params: training set must contain both classes");
    }
    RouleauGrid grid = grid_in;
    for (auto* axis : {&grid.eps1_deg, &grid.eps2_deg, &grid.digit_minimal_err_deg, &grid.digit_gross_err_deg,
                       &grid.face_distortion_ecc, &grid.face_gap_deg, &grid.size_ratio_max}) {
        std::sort(axis->begin(), axis->end());
        if (axis->empty()) throw Error("fit_params: empty grid axis");
    }
    if (grid.cut_score.empty()) throw Error("fit_params: empty cut_score axis");

    std::vector<int> labels;
    for (bool b : impaired) labels.push_back(b ? 1 : -1);

    // Item scores depend on disjoint parameter subsets; cache them per subset.
    const std::size_t n = inputs.size();
    std::vector<double> scores(n);
    std::vector<int> face(n), numbers(n), hands(n);
    RouleauFit best;
    best.training_auc = -1.0;
    RouleauParams p;
    for (double e1 : grid.eps1_deg) {
        for (double e2 : grid.eps2_deg) {
            if (!(e1 < e2)) continue;
            for (double ratio : grid.size_ratio_max) {
                p.eps1_deg = e1;
                p.eps2_deg = e2;
                p.size_ratio_max = ratio;
                for (std::size_t i = 0; i < n; ++i) hands[i] = score_hands(inputs[i], p);
                for (double minimal : grid.digit_minimal_err_deg) {
                    for (double gross : grid.digit_gross_err_deg) {
                        if (minimal > gross) continue;
                        p.digit_minimal_err_deg = minimal;
                        p.digit_gross_err_deg = gross;
                        for (std::size_t i = 0; i < n; ++i) numbers[i] = score_numbers(inputs[i], p);
                        for (double ecc : grid.face_distortion_ecc) {
                            for (double gap : grid.face_gap_deg) {
                                p.face_distortion_ecc = ecc;
                                p.face_gap_deg = gap;
                                for (std::size_t i = 0; i < n; ++i) {
                                    face[i] = score_face(inputs[i], p);
                                    scores[i] = -static_cast<double>(face[i] + numbers[i] + hands[i]);
                                }
                                const double a = auc(scores, labels);
                                if (a > best.training_auc) {
                                    best.training_auc = a;
                                    best.params = p;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if (best.training_auc < 0.0) throw Error("fit_params: grid has no valid combination");

    // Cut score by balanced accuracy at the chosen thresholds.
    std::vector<int> totals(n);
    for (std::size_t i = 0; i < n; ++i) totals[i] = rouleau_total(inputs[i], best.params).total;
    auto cuts = grid.cut_score;
    std::sort(cuts.begin(), cuts.end());
    double best_bacc = -1.0;
    for (int cut : cuts) {
        double tp = 0, tn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool predicted = totals[i] < cut;
            if (impaired[i] && predicted) ++tp;
            if (!impaired[i] && !predicted) ++tn;
        }
        const double bacc = 0.5 * (tp / positives + tn / static_cast<double>(n - positives));
        if (bacc > best_bacc) {
            best_bacc = bacc;
            best.params.cut_score = cut;
        }
    }
    return best;
}

std::string serialize_params(const RouleauParams& p) {
    return fmt::format(
        "eps1_deg={}\neps2_deg={}\ndigit_minimal_err_deg={}\ndigit_gross_err_deg={}\nface_distortion_ecc={}\n"
        "face_gap_deg={}\nsize_ratio_max={}\ncut_score={}\n",
        p.eps1_deg, p.eps2_deg, p.digit_minimal_err_deg, p.digit_gross_err_deg, p.face_distortion_ecc, p.face_gap_deg,
        p.size_ratio_max, p.cut_score);
}

RouleauParams parse_params(std::string_view text) {
    RouleauParams p;
    const std::pair<const char*, double RouleauParams::*> fields[] = {
        {"eps1_deg", &RouleauParams::eps1_deg},
        {"eps2_deg", &RouleauParams::eps2_deg},
        {"digit_minimal_err_deg", &RouleauParams::digit_minimal_err_deg},
        {"digit_gross_err_deg", &RouleauParams::digit_gross_err_deg},
        {"face_distortion_ecc", &RouleauParams::face_distortion_ecc},
        {"face_gap_deg", &RouleauParams::face_gap_deg},
        {"size_ratio_max", &RouleauParams::size_ratio_max},
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
        const auto value = detail::trim(line.substr(eq + 1));
        if (key == "cut_score") {
            const auto v = detail::parse_int(value);
            if (!v) throw ParseError(li + 1, fmt::format("bad cut_score '{}'", value));
            p.cut_score = static_cast<int>(*v);
            continue;
        }
        const auto field =
            std::find_if(std::begin(fields), std::end(fields), [&](const auto& f) { return key == f.first; });
        if (field == std::end(fields)) throw ParseError(li + 1, fmt::format("unknown key '{}'", key));
        const auto v = detail::parse_double(value);
        if (!v) throw ParseError(li + 1, fmt::format("bad value '{}'", value));
        p.*(field->second) = *v;
    }
    p.validate();
    return p;
}

}  // namespace dcdt
