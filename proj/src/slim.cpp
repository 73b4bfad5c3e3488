#include "dcdt/slim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>

#include "dcdt/eval.hpp"
#include "text_util.hpp"

namespace dcdt {

namespace {

constexpr double kTol = 1e-12;

std::atomic<std::uint64_t> g_trainings{0};
std::atomic<int> g_max_nonzeros{0};

double objective_from_counts(const SlimConfig& cfg, double n, long pos_err, long neg_err, int nnz, double usum) {
    return cfg.C_plus * static_cast<double>(pos_err) / n + cfg.C_minus * static_cast<double>(neg_err) / n +
           cfg.C0 * nnz + cfg.C1 * usum;
}

double u_of(const SlimConfig& cfg, std::size_t j) { return cfg.u.empty() ? 1.0 : cfg.u[j]; }

// Tie-break key shared by train and brute_force_train.
struct Key {
    int nnz = 0;
    long sum_abs = 0;
};

bool key_less(const Key& a, std::span<const int> la, const Key& b, std::span<const int> lb) {
    if (a.nnz != b.nnz) return a.nnz < b.nnz;
    if (a.sum_abs != b.sum_abs) return a.sum_abs < b.sum_abs;
    return std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end());
}

Key key_of(std::span<const int> lambda) {
    Key k;
    for (int v : lambda) {
        if (v != 0) ++k.nnz;
        k.sum_abs += std::abs(v);
    }
    return k;
}

double penalty_of(const SlimConfig& cfg, std::span<const int> lambda) {
    int nnz = 0;
    double usum = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (lambda[j] != 0) {
            ++nnz;
            usum += u_of(cfg, j);
        }
    }
    return cfg.C0 * nnz + cfg.C1 * usum;
}

// Intercepts in the order 0, -1, 1, -2, 2, ...; the first minimizer wins.
int intercept_at(int k) { return (k % 2 == 0) ? k / 2 : -(k + 1) / 2; }

struct Candidate {
    double obj = 0.0;
    std::vector<int> lambda;
    int intercept = 0;
    Key key;
};

bool better(double obj, const Key& key, std::span<const int> lambda, const Candidate& inc) {
    if (obj < inc.obj - kTol) return true;
    if (obj > inc.obj + kTol) return false;
    return key_less(key, lambda, inc.key, inc.lambda);
}

// Distinct observation patterns with their class counts.
struct Compressed {
    std::size_t J = 0;
    std::vector<std::vector<std::uint8_t>> rows;
    std::vector<int> pos, neg;
    int total_pos = 0, total_neg = 0;
    double n = 0.0;
};

Compressed compress(const BinaryDataset& d) {
    Compressed c;
    c.J = d.j();
    c.n = static_cast<double>(d.n());
    std::map<std::vector<std::uint8_t>, std::size_t> index;
    for (std::size_t i = 0; i < d.n(); ++i) {
        auto [it, inserted] = index.try_emplace(d.X[i], c.rows.size());
        if (inserted) {
            c.rows.push_back(d.X[i]);
            c.pos.push_back(0);
            c.neg.push_back(0);
        }
        (d.y[i] == 1 ? c.pos : c.neg)[it->second] += 1;
        (d.y[i] == 1 ? c.total_pos : c.total_neg) += 1;
    }
    return c;
}

struct InterceptResult {
    int intercept = 0;
    long pos_err = 0;
    long neg_err = 0;
    double loss = 0.0;
};

// Exact intercept search for fixed partial scores. Rows are bucketed by
// score and split in two by an optional column; the flagged half can then be
// shifted by any coefficient without rebuilding the buckets.
class ScoreHistogram {
public:
    ScoreHistogram(const Compressed& c, const SlimConfig& cfg) : c_(c), cfg_(cfg) {}

    void build(std::span<const int> base, const std::uint8_t* column = nullptr) {
        for (int h = 0; h < 2; ++h) {
            part_[h].lo = std::numeric_limits<int>::max();
            part_[h].hi = std::numeric_limits<int>::min();
        }
        for (std::size_t r = 0; r < base.size(); ++r) {
            Part& p = part_[column ? column[r] : 0];
            p.lo = std::min(p.lo, base[r]);
            p.hi = std::max(p.hi, base[r]);
        }
        for (int h = 0; h < 2; ++h) {
            Part& p = part_[h];
            p.cp.clear();
            p.cn.clear();
            if (p.lo > p.hi) continue;
            p.cp.assign(static_cast<std::size_t>(p.hi - p.lo + 1), 0);
            p.cn.assign(p.cp.size(), 0);
        }
        for (std::size_t r = 0; r < base.size(); ++r) {
            Part& p = part_[column ? column[r] : 0];
            const auto b = static_cast<std::size_t>(base[r] - p.lo);
            p.cp[b] += c_.pos[r];
            p.cn[b] += c_.neg[r];
        }
        for (Part& p : part_) {
            std::partial_sum(p.cp.begin(), p.cp.end(), p.cp.begin());
            std::partial_sum(p.cn.begin(), p.cn.end(), p.cn.begin());
        }
    }

    // Best intercept when the flagged half is shifted by `shift`. Among equal
    // losses the intercept closest to zero wins, negative before positive.
    InterceptResult best(int shift) const {
        const Part& a = part_[0];
        const Part& b = part_[1];
        int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
        if (!a.cp.empty()) {
            lo = a.lo;
            hi = a.hi;
        }
        if (!b.cp.empty()) {
            lo = std::min(lo, b.lo + shift);
            hi = std::max(hi, b.hi + shift);
        }
        InterceptResult out;
        bool have = false;
        const auto consider = [&](int l0) {
            if (std::abs(l0) > cfg_.intercept_bound) return;
            // A positive errs iff s <= -lambda0; a negative iff s > -lambda0.
            const int t = -l0;
            const long pe = a.pos_le(t) + b.pos_le(t - shift);
            const long ne = c_.total_neg - a.neg_le(t) - b.neg_le(t - shift);
            const double loss =
                cfg_.C_plus * static_cast<double>(pe) / c_.n + cfg_.C_minus * static_cast<double>(ne) / c_.n;
            if (!have || loss < out.loss - kTol ||
                (loss <= out.loss + kTol && rank(l0) < rank(out.intercept))) {
                out = {l0, pe, ne, loss};
                have = true;
            }
        };
        consider(0);
        for (int t = lo - 1; t <= hi; ++t) consider(-t);
        return out;
    }

private:
    struct Part {
        int lo = 0, hi = -1;
        std::vector<long> cp, cn;
        long pos_le(int t) const { return at(cp, t); }
        long neg_le(int t) const { return at(cn, t); }
        long at(const std::vector<long>& c, int t) const {
            if (c.empty() || t < lo) return 0;
            if (t >= hi) return c.back();
            return c[static_cast<std::size_t>(t - lo)];
        }
    };

    static int rank(int l0) { return l0 < 0 ? -2 * l0 - 1 : 2 * l0; }

    const Compressed& c_;
    const SlimConfig& cfg_;
    Part part_[2];
};

class BranchAndBound {
public:
    BranchAndBound(const Compressed& c, const SlimConfig& cfg, std::vector<std::size_t> order)
        : c_(c), cfg_(cfg), order_(std::move(order)), J_(c.J), R_(c.rows.size()),
          K_(std::min<int>(cfg.max_features, static_cast<int>(c.J))),
          hist_(c, cfg) {
        build_groups();
        cols_.assign(J_, std::vector<std::uint8_t>(R_));
        for (std::size_t r = 0; r < R_; ++r) {
            for (std::size_t f = 0; f < J_; ++f) cols_[f][r] = c_.rows[r][f];
        }
        s_stack_.assign(J_ + 1, std::vector<int>(R_, 0));
        lambda_.assign(J_, 0);
        inc_.obj = std::numeric_limits<double>::infinity();
        inc_.lambda.assign(J_, 0);
        if (cfg.time_budget_ms) {
            deadline_ = std::chrono::steady_clock::now() +
                        std::chrono::microseconds(static_cast<long long>(*cfg.time_budget_ms * 1000.0));
        }
    }

    // Local search from the empty model: integer coordinate descent, and
    // when that stalls, the best exchange of one used feature for an unused one.
    void warm_start() {
        Local st;
        st.lambda.assign(J_, 0);
        st.s.assign(R_, 0);
        trial_.resize(R_);
        hist_.build(st.s);
        st.cur = hist_.best(0).loss;
        for (int round = 0; round < 200; ++round) {
            for (int sweep = 0; sweep < 50 && coordinate_pass(st); ++sweep) {
            }
            if (!swap_pass(st)) break;
        }
        evaluate_leaf(st.lambda, st.s);
    }

    // Returns true when the tree was exhausted.
    bool run() {
        dfs(0, 0, 0, 0.0);
        return !aborted_;
    }

    const Candidate& incumbent() const { return inc_; }

private:
    struct Child {
        int v;
        double bound;
    };

    struct Local {
        std::vector<int> lambda;
        std::vector<int> s;
        int nnz = 0;
        double pen = 0.0;
        double cur = 0.0;
    };

    double feature_penalty(std::size_t f) const { return cfg_.C0 + cfg_.C1 * u_of(cfg_, f); }

    void apply(Local& st, std::size_t f, int v) {
        const int old = st.lambda[f];
        for (std::size_t r = 0; r < R_; ++r) st.s[r] += (v - old) * c_.rows[r][f];
        const int step = (v != 0) - (old != 0);
        st.nnz += step;
        st.pen += step * feature_penalty(f);
        st.lambda[f] = v;
    }

    bool coordinate_pass(Local& st) {
        bool improved = false;
        for (std::size_t f : order_) {
            const int old = st.lambda[f];
            if (old == 0 && st.nnz >= K_) continue;
            int best_v = old;
            double best_obj = st.cur;
            const auto& col = cols_[f];
            for (std::size_t r = 0; r < R_; ++r) trial_[r] = st.s[r] - old * col[r];
            hist_.build(trial_, col.data());
            for (int v = -cfg_.coeff_bound; v <= cfg_.coeff_bound; ++v) {
                if (v == old) continue;
                const double p = st.pen + ((v != 0) - (old != 0)) * feature_penalty(f);
                const double obj = hist_.best(v).loss + p;
                if (obj < best_obj - kTol) {
                    best_obj = obj;
                    best_v = v;
                }
            }
            if (best_v != old) {
                apply(st, f, best_v);
                st.cur = best_obj;
                improved = true;
            }
        }
        return improved;
    }

    bool swap_pass(Local& st) {
        double best_obj = st.cur;
        std::size_t best_out = 0, best_in = 0;
        int best_v = 0;
        std::vector<int> base(R_);
        for (std::size_t a : order_) {
            if (st.lambda[a] == 0) continue;
            for (std::size_t r = 0; r < R_; ++r) base[r] = st.s[r] - st.lambda[a] * cols_[a][r];
            const double pen_a = st.pen - feature_penalty(a);
            for (std::size_t b : order_) {
                if (st.lambda[b] != 0) continue;
                const double p = pen_a + feature_penalty(b);
                hist_.build(base, cols_[b].data());
                for (int v = -cfg_.coeff_bound; v <= cfg_.coeff_bound; ++v) {
                    if (v == 0) continue;
                    const double obj = hist_.best(v).loss + p;
                    if (obj < best_obj - kTol) {
                        best_obj = obj;
                        best_out = a;
                        best_in = b;
                        best_v = v;
                    }
                }
            }
        }
        if (best_v == 0) return false;
        apply(st, best_out, 0);
        apply(st, best_in, best_v);
        st.cur = best_obj;
        return true;
    }

    void build_groups() {
        gid_.assign(J_ + 1, std::vector<int>(R_, 0));
        for (std::size_t d = J_; d-- > 0;) {
            std::map<std::pair<int, int>, int> ids;
            for (std::size_t r = 0; r < R_; ++r) {
                const auto key = std::pair<int, int>(gid_[d + 1][r], c_.rows[r][order_[d]]);
                auto [it, inserted] = ids.try_emplace(key, static_cast<int>(ids.size()));
                gid_[d][r] = it->second;
            }
        }
    }

    void evaluate_leaf(std::span<const int> lambda, std::span<const int> s) {
        const Key key = key_of(lambda);
        hist_.build(s);
        const InterceptResult ir = hist_.best(0);
        double usum = 0.0;
        for (std::size_t j = 0; j < J_; ++j) {
            if (lambda[j] != 0) usum += u_of(cfg_, j);
        }
        const double obj = objective_from_counts(cfg_, c_.n, ir.pos_err, ir.neg_err, key.nnz, usum);
        if (better(obj, key, lambda, inc_)) {
            inc_.obj = obj;
            inc_.lambda.assign(lambda.begin(), lambda.end());
            inc_.intercept = ir.intercept;
            inc_.key = key;
        }
    }

    // For the node at depth d, bound each candidate value of order_[d]:
    // rows that agree on the remaining features share one free offset.
    void child_bounds(std::size_t d, const std::vector<int>& s, double pen, std::vector<Child>& out) {
        const std::size_t f = order_[d];
        const auto& g = gid_[d + 1];
        keys_.clear();
        for (std::size_t r = 0; r < R_; ++r) {
            keys_.push_back((static_cast<std::uint64_t>(g[r]) << 43) |
                            (static_cast<std::uint64_t>(c_.rows[r][f]) << 42) |
                            (static_cast<std::uint64_t>(s[r] + (1 << 20)) << 21) | r);
        }
        std::sort(keys_.begin(), keys_.end());

        out.clear();
        const double wp = cfg_.C_plus / c_.n, wn = cfg_.C_minus / c_.n;
        const double fpen = cfg_.C0 + cfg_.C1 * u_of(cfg_, f);
        for (int v = -cfg_.coeff_bound; v <= cfg_.coeff_bound; ++v) {
            double total = 0.0;
            std::size_t i = 0;
            while (i < keys_.size()) {
                const std::uint64_t group = keys_[i] >> 43;
                std::size_t mid = i;
                while (mid < keys_.size() && (keys_[mid] >> 43) == group && ((keys_[mid] >> 42) & 1) == 0) ++mid;
                std::size_t end = mid;
                double neg_sum = 0.0;
                while (end < keys_.size() && (keys_[end] >> 43) == group) ++end;
                for (std::size_t k = i; k < end; ++k) neg_sum += wn * c_.neg[keys_[k] & 0x1FFFFF];
                // Merge [i, mid) at s and [mid, end) at s + v, sweeping distinct values.
                double cur = neg_sum, best = neg_sum;
                std::size_t a = i, b = mid;
                const auto val_a = [&](std::size_t k) { return s[keys_[k] & 0x1FFFFF]; };
                const auto val_b = [&](std::size_t k) { return s[keys_[k] & 0x1FFFFF] + v; };
                while (a < mid || b < end) {
                    int val;
                    if (a < mid && (b >= end || val_a(a) <= val_b(b))) val = val_a(a);
                    else val = val_b(b);
                    while (a < mid && val_a(a) == val) {
                        const auto r = keys_[a] & 0x1FFFFF;
                        cur += wp * c_.pos[r] - wn * c_.neg[r];
                        ++a;
                    }
                    while (b < end && val_b(b) == val) {
                        const auto r = keys_[b] & 0x1FFFFF;
                        cur += wp * c_.pos[r] - wn * c_.neg[r];
                        ++b;
                    }
                    best = std::min(best, cur);
                }
                total += best;
                i = end;
            }
            out.push_back({v, pen + (v != 0 ? fpen : 0.0) + total});
        }
        std::stable_sort(out.begin(), out.end(), [](const Child& x, const Child& y) {
            if (x.bound != y.bound) return x.bound < y.bound;
            if (std::abs(x.v) != std::abs(y.v)) return std::abs(x.v) < std::abs(y.v);
            return x.v < y.v;
        });
    }

    bool out_of_budget() {
        ++nodes_;
        if (cfg_.node_budget != 0 && nodes_ > cfg_.node_budget) return true;
        if (deadline_ && (nodes_ & 63) == 0 && std::chrono::steady_clock::now() > *deadline_) return true;
        return false;
    }

    void dfs(std::size_t d, int nnz, long sum_abs, double pen) {
        if (aborted_) return;
        if (out_of_budget()) {
            aborted_ = true;
            return;
        }
        const auto& s = s_stack_[d];
        evaluate_leaf(lambda_, s);
        if (d == J_ || nnz == K_) return;

        std::vector<Child> children;
        child_bounds(d, s, pen, children);
        const std::size_t f = order_[d];
        const double fpen = cfg_.C0 + cfg_.C1 * u_of(cfg_, f);
        for (const Child& ch : children) {
            if (aborted_) return;
            if (ch.bound > inc_.obj + kTol) break;
            const int child_nnz = nnz + (ch.v != 0);
            const long child_abs = sum_abs + std::abs(ch.v);
            if (ch.bound >= inc_.obj - kTol &&
                std::pair(child_nnz, child_abs) > std::pair(inc_.key.nnz, inc_.key.sum_abs)) {
                continue;
            }
            auto& next = s_stack_[d + 1];
            for (std::size_t r = 0; r < R_; ++r) next[r] = s[r] + ch.v * cols_[f][r];
            lambda_[f] = ch.v;
            dfs(d + 1, child_nnz, child_abs, pen + (ch.v != 0 ? fpen : 0.0));
            lambda_[f] = 0;
        }
    }

    const Compressed& c_;
    const SlimConfig& cfg_;
    std::vector<std::size_t> order_;
    std::size_t J_, R_;
    int K_;
    ScoreHistogram hist_;
    std::vector<std::vector<std::uint8_t>> cols_;
    std::vector<std::vector<int>> gid_;
    std::vector<std::vector<int>> s_stack_;
    std::vector<int> lambda_;
    std::vector<std::uint64_t> keys_;
    std::vector<int> trial_;
    Candidate inc_;
    std::uint64_t nodes_ = 0;
    bool aborted_ = false;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
};

void require_trainable(const BinaryDataset& d, const SlimConfig& cfg) {
    d.validate();
    cfg.validate(d.j());
    if (d.j() == 0) throw Error("slim: dataset has no features");
    const bool has_pos = std::find(d.y.begin(), d.y.end(), 1) != d.y.end();
    const bool has_neg = std::find(d.y.begin(), d.y.end(), -1) != d.y.end();
    if (!has_pos || !has_neg) throw Error("slim: training data must contain both classes");
}

SlimModel make_model(const BinaryDataset& d, const SlimConfig& cfg, const Candidate& c, Optimality opt) {
    SlimModel m;
    m.names = d.names;
    m.coefficients = c.lambda;
    m.intercept = c.intercept;
    m.config = cfg;
    m.objective = objective(c.lambda, c.intercept, d, cfg);
    m.optimality = opt;

    const int nnz = m.nonzero_count();
    if (nnz > cfg.max_features) throw std::logic_error("slim: model exceeds the cardinality cap");
    ++g_trainings;
    int seen = g_max_nonzeros.load();
    while (nnz > seen && !g_max_nonzeros.compare_exchange_weak(seen, nnz)) {
    }
    return m;
}

std::string_view clock_heading(FeatureClock clock) {
    switch (clock) {
        case FeatureClock::Command: return "Command clock:";
        case FeatureClock::Copy: return "Copy clock:";
        case FeatureClock::Both: return "Both clocks:";
    }
    return "";
}

}  // namespace

void BinaryDataset::validate() const {
    if (y.empty()) throw Error("dataset: no examples");
    if (X.size() != y.size()) throw Error(fmt::format("dataset: {} rows but {} labels", X.size(), y.size()));
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != names.size()) {
            throw Error(fmt::format("dataset: row {} has {} entries, expected {}", i, X[i].size(), names.size()));
        }
        for (auto v : X[i]) {
            if (v > 1) throw Error(fmt::format("dataset: row {} has a non-binary entry", i));
        }
        if (y[i] != 1 && y[i] != -1) throw Error(fmt::format("dataset: label {} of row {} is not +1/-1", y[i], i));
    }
}

BinaryDataset make_dataset(const std::vector<FeatureVector>& binarized, std::span<const int> labels) {
    if (binarized.size() != labels.size()) throw Error("make_dataset: vectors and labels differ in length");
    BinaryDataset d;
    if (binarized.empty()) return d;
    d.names = binarized.front().names;
    for (std::size_t i = 0; i < binarized.size(); ++i) {
        const auto& v = binarized[i];
        if (!v.binarized) throw Error(fmt::format("make_dataset: vector {} is not binarized", i));
        if (v.names != d.names) throw Error(fmt::format("make_dataset: vector {} has different features", i));
        std::vector<std::uint8_t> row;
        row.reserve(v.values.size());
        for (double x : v.values) row.push_back(x != 0.0 ? 1 : 0);
        d.X.push_back(std::move(row));
        d.y.push_back(labels[i]);
    }
    d.validate();
    return d;
}

BinaryDataset subset(const BinaryDataset& d, std::span<const std::size_t> rows) {
    BinaryDataset out;
    out.names = d.names;
    for (auto r : rows) {
        out.X.push_back(d.X.at(r));
        out.y.push_back(d.y.at(r));
    }
    return out;
}

void SlimConfig::validate(std::size_t j) const {
    if (!(C_plus > 0.0) || !(C_minus > 0.0)) throw ConfigError("slim config: C_plus and C_minus must be positive");
    if (!(C0 >= 0.0) || !(C1 >= 0.0)) throw ConfigError("slim config: C0 and C1 must be nonnegative");
    if (coeff_bound < 1 || coeff_bound > 1000) throw ConfigError("slim config: coeff_bound must be in [1, 1000]");
    if (intercept_bound < 1 || intercept_bound > 100000) {
        throw ConfigError("slim config: intercept_bound must be in [1, 100000]");
    }
    if (max_features < 0 || max_features > 10) throw ConfigError("slim config: max_features must be in [0, 10]");
    if (!u.empty()) {
        if (u.size() != j) throw ConfigError(fmt::format("slim config: {} weights for {} features", u.size(), j));
        for (double w : u) {
            if (!(w > 0.0)) throw ConfigError("slim config: understandability weights must be positive");
        }
    }
    if (time_budget_ms && !(*time_budget_ms > 0.0)) throw ConfigError("slim config: time budget must be positive");
}

std::string_view to_string(Optimality o) { return o == Optimality::ProvenOptimal ? "proven-optimal" : "budget-best"; }

int SlimModel::nonzero_count() const {
    return static_cast<int>(std::count_if(coefficients.begin(), coefficients.end(), [](int v) { return v != 0; }));
}

int score(const SlimModel& m, const FeatureVector& x) {
    if (!x.binarized) throw Error("score: feature vector is not binarized");
    int total = m.intercept;
    for (std::size_t j = 0; j < m.names.size(); ++j) {
        const auto v = x.get(m.names[j]);
        if (!v) throw Error(fmt::format("score: feature '{}' missing from the vector", m.names[j]));
        if (*v != 0.0) total += m.coefficients[j];
    }
    return total;
}

int score(const SlimModel& m, std::span<const std::uint8_t> row) {
    if (row.size() != m.coefficients.size()) {
        throw Error(fmt::format("score: row has {} entries, model has {} features", row.size(), m.coefficients.size()));
    }
    int total = m.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) total += row[j] ? m.coefficients[j] : 0;
    return total;
}

int predict(const SlimModel& m, const FeatureVector& x) { return score(m, x) > 0 ? 1 : -1; }
int predict(const SlimModel& m, std::span<const std::uint8_t> row) { return score(m, row) > 0 ? 1 : -1; }

int sheet_score(const SlimModel& m, const FeatureVector& x) { return m.intercept - score(m, x); }

double objective(std::span<const int> lambda, int lambda0, const BinaryDataset& d, const SlimConfig& cfg) {
    if (lambda.size() != d.j()) throw Error("objective: coefficient count does not match the dataset");
    long pos_err = 0, neg_err = 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        long s = lambda0;
        for (std::size_t j = 0; j < lambda.size(); ++j) s += d.X[i][j] ? lambda[j] : 0;
        if (d.y[i] == 1 && s <= 0) ++pos_err;
        if (d.y[i] == -1 && s > 0) ++neg_err;
    }
    int nnz = 0;
    double usum = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (lambda[j] != 0) {
            ++nnz;
            usum += u_of(cfg, j);
        }
    }
    return objective_from_counts(cfg, static_cast<double>(d.n()), pos_err, neg_err, nnz, usum);
}

TrainingAudit training_audit() { return {g_trainings.load(), g_max_nonzeros.load()}; }

SlimModel train(const BinaryDataset& d, const SlimConfig& cfg) {
    require_trainable(d, cfg);
    const Compressed c = compress(d);

    std::vector<std::pair<double, std::size_t>> strength;
    std::vector<double> column(d.n());
    for (std::size_t j = 0; j < d.j(); ++j) {
        for (std::size_t i = 0; i < d.n(); ++i) column[i] = d.X[i][j];
        strength.emplace_back(std::abs(auc(column, d.y) - 0.5), j);
    }
    std::stable_sort(strength.begin(), strength.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> order;
    for (const auto& [_, j] : strength) order.push_back(j);

    BranchAndBound bb(c, cfg, std::move(order));
    bb.warm_start();
    const bool exhausted = bb.run();
    return make_model(d, cfg, bb.incumbent(), exhausted ? Optimality::ProvenOptimal : Optimality::BudgetBest);
}

SlimModel brute_force_train(const BinaryDataset& d, const SlimConfig& cfg) {
    require_trainable(d, cfg);
    const double width = 2.0 * cfg.coeff_bound + 1.0;
    const double size = std::pow(width, static_cast<double>(d.j())) * (2.0 * cfg.intercept_bound + 1.0);
    if (size > 1e7) throw Error(fmt::format("brute_force_train: {:.3g} assignments exceed the 1e7 limit", size));

    const std::size_t J = d.j();
    std::vector<int> lambda(J, -cfg.coeff_bound);
    std::vector<long> partial(d.n());
    Candidate best;
    best.obj = std::numeric_limits<double>::infinity();
    while (true) {
        const Key key = key_of(lambda);
        if (key.nnz <= cfg.max_features) {
            for (std::size_t i = 0; i < d.n(); ++i) {
                long s = 0;
                for (std::size_t j = 0; j < J; ++j) s += d.X[i][j] ? lambda[j] : 0;
                partial[i] = s;
            }
            const double pen = penalty_of(cfg, lambda);
            double best_here = std::numeric_limits<double>::infinity();
            int best_l0 = 0;
            for (int k = 0; k < 2 * cfg.intercept_bound + 1; ++k) {
                const int l0 = intercept_at(k);
                long pe = 0, ne = 0;
                for (std::size_t i = 0; i < d.n(); ++i) {
                    const long s = partial[i] + l0;
                    if (d.y[i] == 1 && s <= 0) ++pe;
                    if (d.y[i] == -1 && s > 0) ++ne;
                }
                const double loss = cfg.C_plus * static_cast<double>(pe) / static_cast<double>(d.n()) +
                                    cfg.C_minus * static_cast<double>(ne) / static_cast<double>(d.n());
                if (loss < best_here - kTol) {
                    best_here = loss;
                    best_l0 = l0;
                }
            }
            const double obj = best_here + pen;
            if (better(obj, key, lambda, best)) {
                best.obj = obj;
                best.lambda = lambda;
                best.intercept = best_l0;
                best.key = key;
            }
        }
        // Next assignment in lexicographic order.
        std::size_t j = J;
        while (j > 0 && lambda[j - 1] == cfg.coeff_bound) {
            lambda[j - 1] = -cfg.coeff_bound;
            --j;
        }
        if (j == 0) break;
        ++lambda[j - 1];
    }
    return make_model(d, cfg, best, Optimality::ProvenOptimal);
}

std::string render(const SlimModel& m, const FeatureCatalog& catalog) {
    for (const auto& name : m.names) {
        if (!catalog.find(name)) throw Error(fmt::format("render: feature '{}' is not in the catalog", name));
    }
    const std::string target = m.target.empty() ? "IMPAIRMENT" : m.target;
    std::string out = fmt::format("PREDICT {} IF SCORE < {}\n", target, m.intercept);
    int item = 0;
    for (FeatureClock clock : {FeatureClock::Command, FeatureClock::Copy, FeatureClock::Both}) {
        bool header = false;
        for (const auto& def : catalog.features) {
            if (def.clock != clock) continue;
            const auto it = std::find(m.names.begin(), m.names.end(), def.name);
            if (it == m.names.end()) continue;
            const int lambda = m.coefficients[static_cast<std::size_t>(it - m.names.begin())];
            if (lambda == 0) continue;
            if (!header) {
                out += clock_heading(clock);
                out += '\n';
                header = true;
            }
            out += fmt::format("{}. {} & {:+d}\n", ++item, def.description, -lambda);
        }
    }
    return out;
}

SlimModel parse_sheet(std::string_view text, const FeatureCatalog& catalog) {
    const auto lines = detail::split_lines(text);
    SlimModel m;
    bool have_rule = false;
    std::optional<FeatureClock> clock;
    int expected_item = 1;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        const std::size_t lineno = li + 1;
        if (line.empty()) continue;
        if (!have_rule) {
            constexpr std::string_view kPrefix = "PREDICT ";
            constexpr std::string_view kRule = " IF SCORE < ";
            const auto rule = line.rfind(kRule);
            if (!line.starts_with(kPrefix) || rule == std::string_view::npos || rule < kPrefix.size()) {
                throw ParseError(lineno, "expected 'PREDICT <target> IF SCORE < <threshold>'");
            }
            m.target = std::string(line.substr(kPrefix.size(), rule - kPrefix.size()));
            const auto t = detail::parse_int(line.substr(rule + kRule.size()));
            if (!t) throw ParseError(lineno, "threshold is not an integer");
            m.intercept = static_cast<int>(*t);
            have_rule = true;
            continue;
        }
        bool is_heading = false;
        for (FeatureClock c : {FeatureClock::Command, FeatureClock::Copy, FeatureClock::Both}) {
            if (line == clock_heading(c)) {
                clock = c;
                is_heading = true;
            }
        }
        if (is_heading) continue;
        if (!clock) throw ParseError(lineno, "item before any clock heading");
        const auto dot = line.find(". ");
        const auto amp = line.rfind(" & ");
        if (dot == std::string_view::npos || amp == std::string_view::npos || amp < dot) {
            throw ParseError(lineno, "expected '<n>. <description> & <points>'");
        }
        const auto number = detail::parse_int(line.substr(0, dot));
        if (!number || *number != expected_item) {
            throw ParseError(lineno, fmt::format("expected item number {}", expected_item));
        }
        ++expected_item;
        const auto description = line.substr(dot + 2, amp - dot - 2);
        auto points_text = detail::trim(line.substr(amp + 3));
        if (points_text.starts_with('+')) points_text.remove_prefix(1);
        const auto points = detail::parse_int(points_text);
        if (!points) throw ParseError(lineno, fmt::format("bad points '{}'", line.substr(amp + 3)));

        const FeatureDef* match = nullptr;
        for (const auto& def : catalog.features) {
            if (def.clock == *clock && def.description == description) {
                if (match) throw ParseError(lineno, fmt::format("ambiguous description '{}'", description));
                match = &def;
            }
        }
        if (!match) throw ParseError(lineno, fmt::format("no catalog feature described as '{}'", description));
        m.names.push_back(match->name);
        m.coefficients.push_back(-static_cast<int>(*points));
    }
    if (!have_rule) throw ParseError(lines.size(), "missing PREDICT line");
    return m;
}

std::string serialize_model(const SlimModel& m) {
    std::string out = "slim-model v1\n";
    if (!m.target.empty()) out += fmt::format("# target: {}\n", m.target);
    out += fmt::format("# optimality: {}\n# objective: {:.17g}\n", to_string(m.optimality), m.objective);
    for (std::size_t j = 0; j < m.names.size(); ++j) out += fmt::format("{}\t{}\n", m.names[j], m.coefficients[j]);
    out += fmt::format("__intercept__\t{}\n", m.intercept);
    return out;
}

SlimModel parse_model(std::string_view text) {
    const auto lines = detail::split_lines(text);
    if (lines.empty() || detail::trim(lines[0]) != "slim-model v1") throw ParseError(1, "expected 'slim-model v1'");
    SlimModel m;
    bool have_intercept = false;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        const std::size_t lineno = li + 1;
        if (line.empty()) continue;
        if (line.starts_with('#')) {
            const auto body = detail::trim(line.substr(1));
            const auto colon = body.find(':');
            if (colon == std::string_view::npos) continue;
            const auto key = detail::trim(body.substr(0, colon));
            const auto value = detail::trim(body.substr(colon + 1));
            if (key == "target") m.target = std::string(value);
            if (key == "optimality") {
                m.optimality = value == "budget-best" ? Optimality::BudgetBest : Optimality::ProvenOptimal;
            }
            if (key == "objective") {
                if (const auto v = detail::parse_double(value)) m.objective = *v;
            }
            continue;
        }
        if (have_intercept) throw ParseError(lineno, "rows after __intercept__");
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw ParseError(lineno, "expected '<name><TAB><coefficient>'");
        const auto name = detail::trim(line.substr(0, tab));
        const auto value = detail::parse_int(detail::trim(line.substr(tab + 1)));
        if (name.empty() || !value) throw ParseError(lineno, "expected '<name><TAB><integer>'");
        if (name == "__intercept__") {
            m.intercept = static_cast<int>(*value);
            have_intercept = true;
            continue;
        }
        if (std::find(m.names.begin(), m.names.end(), name) != m.names.end()) {
            throw ParseError(lineno, fmt::format("duplicate feature '{}'", name));
        }
        m.names.emplace_back(name);
        m.coefficients.push_back(static_cast<int>(*value));
    }
    if (!have_intercept) throw ParseError(lines.size(), "missing __intercept__ row");
    return m;
}

}  // namespace dcdt
