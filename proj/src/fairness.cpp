#include "cfeval/fairness.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "cfeval/rng.hpp"

namespace cfeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Joint counts over (a, y0, y1, t, yhat). Every probability in the balance
// and independence displays is a ratio of sums of these 32 cells.
struct JointTable {
    std::array<double, 32> counts{};
    double total = 0;

    static std::size_t index(int a, int y0, int y1, int t, int yh) {
        return static_cast<std::size_t>(a << 4 | y0 << 3 | y1 << 2 | t << 1 | yh);
    }

    void add(const OracleDataset& d, const std::vector<std::uint8_t>* yhat, std::size_t row) {
        int yh = yhat ? (*yhat)[row] : 0;
        counts[index(d.a[row], d.y0[row], d.y1[row], d.t[row], yh)] += 1.0;
        total += 1.0;
    }
};

JointTable full_table(const OracleDataset& d, const std::vector<std::uint8_t>* yhat) {
    JointTable tbl;
    for (std::size_t i = 0; i < d.size(); ++i) tbl.add(d, yhat, i);
    return tbl;
}

JointTable resample_table(const OracleDataset& d, const std::vector<std::uint8_t>* yhat,
                          Rng& rng) {
    JointTable tbl;
    std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) tbl.add(d, yhat, rng.uniform_below(n));
    return tbl;
}

// Optional constraints on (a, y0, y1, t, yhat, y) where y is the observed
// outcome t*y1 + (1-t)*y0.
struct Filter {
    std::array<std::optional<int>, 6> v;

    Filter with(int slot, int value) const {
        Filter f = *this;
        f.v[slot] = value;
        return f;
    }
};

constexpr int A = 0, Y0 = 1, Y1 = 2, T = 3, YH = 4, YOBS = 5;

bool matches(const Filter& f, int a, int y0, int y1, int t, int yh) {
    int y = t ? y1 : y0;
    const std::array<int, 6> vals = {a, y0, y1, t, yh, y};
    for (int slot = 0; slot < 6; ++slot)
        if (f.v[slot] && *f.v[slot] != vals[slot]) return false;
    return true;
}

double count(const JointTable& tbl, const Filter& f1, const Filter& f2 = Filter{}) {
    double c = 0;
    for (int a = 0; a < 2; ++a)
        for (int y0 = 0; y0 < 2; ++y0)
            for (int y1 = 0; y1 < 2; ++y1)
                for (int t = 0; t < 2; ++t)
                    for (int yh = 0; yh < 2; ++yh)
                        if (matches(f1, a, y0, y1, t, yh) && matches(f2, a, y0, y1, t, yh))
                            c += tbl.counts[JointTable::index(a, y0, y1, t, yh)];
    return c;
}

// P(event | given); missing when the conditioning event has zero count.
std::optional<double> prob(const JointTable& tbl, const Filter& event, const Filter& given) {
    double den = count(tbl, given);
    if (den == 0) return std::nullopt;
    return count(tbl, event, given) / den;
}

std::string describe(const Filter& f) {
    static const char* names[6] = {"a", "y0", "y1", "t", "yhat", "y"};
    std::string out;
    for (int slot = 0; slot < 6; ++slot) {
        if (!f.v[slot]) continue;
        if (!out.empty()) out += ",";
        out += names[slot];
        out += "=";
        out += std::to_string(*f.v[slot]);
    }
    return out.empty() ? "(all)" : out;
}

struct BalanceTerms {
    std::optional<double> lhs;
    std::optional<double> rhs;
    std::string missing; // first empty conditioning event, when any
};

std::optional<double> term(BalanceTerms& bt, const JointTable& tbl, const Filter& event,
                           const Filter& given) {
    auto p = prob(tbl, event, given);
    if (!p && bt.missing.empty()) bt.missing = "empty conditioning event " + describe(given);
    return p;
}

// P(Y1=y)P(T=1|Y1=y) - P(Y1=y|a)P(T=1|Y1=y,a)
//   = P(Y0=y)(P(T=1|Y0=y) - P(T=1|Y0=y,a)),
// optionally conditioned throughout on yhat.
BalanceTerms bp_terms(const JointTable& tbl, int group, int y, std::optional<int> yhat) {
    Filter base;
    if (yhat) base = base.with(YH, *yhat);
    BalanceTerms bt;
    auto p_y1 = term(bt, tbl, Filter{}.with(Y1, y), base);
    auto p_t_y1 = term(bt, tbl, Filter{}.with(T, 1), base.with(Y1, y));
    auto p_y1_a = term(bt, tbl, Filter{}.with(Y1, y), base.with(A, group));
    auto p_t_y1_a = term(bt, tbl, Filter{}.with(T, 1), base.with(Y1, y).with(A, group));
    auto p_y0 = term(bt, tbl, Filter{}.with(Y0, y), base);
    auto p_t_y0 = term(bt, tbl, Filter{}.with(T, 1), base.with(Y0, y));
    auto p_t_y0_a = term(bt, tbl, Filter{}.with(T, 1), base.with(Y0, y).with(A, group));
    if (p_y1 && p_t_y1 && p_y1_a && p_t_y1_a)
        bt.lhs = *p_y1 * *p_t_y1 - *p_y1_a * *p_t_y1_a;
    if (p_y0 && p_t_y0 && p_t_y0_a) bt.rhs = *p_y0 * (*p_t_y0 - *p_t_y0_a);
    return bt;
}

// P(Yh=1|Y1=y) P(T=1|Yh=1,Y1=y) P(Y1=y)/P(Y=y)
//   - P(Yh=1|Y1=y,a) P(T=1|Yh=1,Y1=y,a) P(Y1=y|a)/P(Y=y|a)
//   = P(Yh=1|Y0=y) ( P(T=0|Yh=1,Y0=y,a) P(Y0=y|a)/P(Y=y|a)
//                    - P(T=0|Yh=1,Y0=y) P(Y0=y)/P(Y=y) )
BalanceTerms eo_terms(const JointTable& tbl, int group, int y) {
    BalanceTerms bt;
    Filter none;
    Filter in_a = Filter{}.with(A, group);
    auto p_yobs = term(bt, tbl, Filter{}.with(YOBS, y), none);
    auto p_yobs_a = term(bt, tbl, Filter{}.with(YOBS, y), in_a);
    if (p_yobs && *p_yobs == 0) {
        bt.missing = "P(Y=" + std::to_string(y) + ") = 0";
        return bt;
    }
    if (p_yobs_a && *p_yobs_a == 0) {
        bt.missing = "P(Y=" + std::to_string(y) + " | a=" + std::to_string(group) + ") = 0";
        return bt;
    }
    auto p_yh_y1 = term(bt, tbl, Filter{}.with(YH, 1), Filter{}.with(Y1, y));
    auto p_t1_yh_y1 = term(bt, tbl, Filter{}.with(T, 1), Filter{}.with(YH, 1).with(Y1, y));
    auto p_y1 = term(bt, tbl, Filter{}.with(Y1, y), none);
    auto p_yh_y1_a = term(bt, tbl, Filter{}.with(YH, 1), in_a.with(Y1, y));
    auto p_t1_yh_y1_a = term(bt, tbl, Filter{}.with(T, 1), in_a.with(YH, 1).with(Y1, y));
    auto p_y1_a = term(bt, tbl, Filter{}.with(Y1, y), in_a);
    auto p_yh_y0 = term(bt, tbl, Filter{}.with(YH, 1), Filter{}.with(Y0, y));
    auto p_t0_yh_y0_a = term(bt, tbl, Filter{}.with(T, 0), in_a.with(YH, 1).with(Y0, y));
    auto p_y0_a = term(bt, tbl, Filter{}.with(Y0, y), in_a);
    auto p_t0_yh_y0 = term(bt, tbl, Filter{}.with(T, 0), Filter{}.with(YH, 1).with(Y0, y));
    auto p_y0 = term(bt, tbl, Filter{}.with(Y0, y), none);
    if (p_yh_y1 && p_t1_yh_y1 && p_y1 && p_yobs && p_yh_y1_a && p_t1_yh_y1_a && p_y1_a &&
        p_yobs_a)
        bt.lhs = *p_yh_y1 * *p_t1_yh_y1 * *p_y1 / *p_yobs -
                 *p_yh_y1_a * *p_t1_yh_y1_a * *p_y1_a / *p_yobs_a;
    if (p_yh_y0 && p_t0_yh_y0_a && p_y0_a && p_yobs_a && p_t0_yh_y0 && p_y0 && p_yobs)
        bt.rhs = *p_yh_y0 * (*p_t0_yh_y0_a * *p_y0_a / *p_yobs_a -
                             *p_t0_yh_y0 * *p_y0 / *p_yobs);
    return bt;
}

void require_binary(int value, const std::string& name) {
    if (value != 0 && value != 1) throw ParameterError(name + " must be 0 or 1");
}

void require_oracle_columns(const OracleDataset& d) {
    if (d.y0.size() != d.size() || d.y1.size() != d.size())
        throw DataError("balance and independence conditions need the oracle columns y0, y1");
}

template <typename TermsFn>
BalanceResidual bootstrap_residual(const OracleDataset& d,
                                   const std::vector<std::uint8_t>* yhat, int bootstrap,
                                   std::uint64_t seed, BalanceResidual base, TermsFn terms_of) {
    require_oracle_columns(d);
    if (d.size() == 0) throw DataError("balance condition on an empty dataset");
    if (bootstrap < 0) throw ParameterError("bootstrap count must be nonnegative");
    JointTable tbl = full_table(d, yhat);
    BalanceTerms bt = terms_of(tbl);
    if (!bt.lhs || !bt.rhs) {
        base.lhs = base.rhs = base.residual = kNaN;
        base.std_error = 0;
        base.estimable = false;
        base.note = bt.missing;
        return base;
    }
    base.lhs = *bt.lhs;
    base.rhs = *bt.rhs;
    base.residual = *bt.lhs - *bt.rhs;
    base.estimable = true;
    Rng root(seed);
    double sum = 0, sumsq = 0;
    int valid = 0;
    for (int b = 0; b < bootstrap; ++b) {
        Rng rng = root.substream(static_cast<std::uint64_t>(b));
        JointTable rt = resample_table(d, yhat, rng);
        BalanceTerms rbt = terms_of(rt);
        if (!rbt.lhs || !rbt.rhs) continue;
        double r = *rbt.lhs - *rbt.rhs;
        sum += r;
        sumsq += r * r;
        ++valid;
    }
    if (valid > 1) {
        double mean = sum / valid;
        double var = (sumsq - valid * mean * mean) / (valid - 1);
        base.std_error = var > 0 ? std::sqrt(var) : 0.0;
    } else {
        base.std_error = 0;
    }
    if (valid < bootstrap)
        base.note = std::to_string(bootstrap - valid) + " of " + std::to_string(bootstrap) +
                    " resamples inestimable";
    return base;
}

} // namespace

std::string to_string(BalanceCondition condition) {
    switch (condition) {
        case BalanceCondition::balBP: return "balBP";
        case BalanceCondition::balPP: return "balPP";
        case BalanceCondition::balEO: return "balEO";
    }
    return "unknown";
}

BalanceResidual balance_bp(const OracleDataset& dataset, int group, int y, int bootstrap,
                           std::uint64_t seed) {
    require_binary(group, "group");
    require_binary(y, "y");
    BalanceResidual base;
    base.condition = BalanceCondition::balBP;
    base.group = group;
    base.y = y;
    return bootstrap_residual(dataset, nullptr, bootstrap, seed, base,
                              [&](const JointTable& t) {
                                  return bp_terms(t, group, y, std::nullopt);
                              });
}

BalanceResidual balance_pp(const OracleDataset& dataset,
                           const std::vector<std::uint8_t>& predicted_labels, int group, int y,
                           int yhat, int bootstrap, std::uint64_t seed) {
    require_binary(group, "group");
    require_binary(y, "y");
    require_binary(yhat, "yhat");
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    BalanceResidual base;
    base.condition = BalanceCondition::balPP;
    base.group = group;
    base.y = y;
    base.yhat = yhat;
    return bootstrap_residual(dataset, &predicted_labels, bootstrap, seed, base,
                              [&](const JointTable& t) { return bp_terms(t, group, y, yhat); });
}

BalanceResidual balance_eo(const OracleDataset& dataset,
                           const std::vector<std::uint8_t>& predicted_labels, int group, int y,
                           int bootstrap, std::uint64_t seed) {
    require_binary(group, "group");
    require_binary(y, "y");
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    BalanceResidual base;
    base.condition = BalanceCondition::balEO;
    base.group = group;
    base.y = y;
    return bootstrap_residual(dataset, &predicted_labels, bootstrap, seed, base,
                              [&](const JointTable& t) { return eo_terms(t, group, y); });
}

namespace {

struct DevCell {
    std::string stratum;
    std::string cell;
    std::optional<double> dev;
};

// deviation = P(event | stratum, A=a) - P(event | stratum)
DevCell deviation(const JointTable& tbl, const Filter& event, const Filter& stratum, int a) {
    DevCell cell;
    cell.stratum = stratum.v == Filter{}.v ? "" : describe(stratum);
    cell.cell = describe(event) + ",a=" + std::to_string(a);
    auto with_a = prob(tbl, event, stratum.with(A, a));
    auto marginal = prob(tbl, event, stratum);
    if (with_a && marginal) cell.dev = *with_a - *marginal;
    return cell;
}

struct ConditionSpec {
    std::string name;
    std::string family;
    std::vector<DevCell> (*eval)(const JointTable&);
};

std::vector<DevCell> eval_t_indep_a_given_y0(const JointTable& t) {
    std::vector<DevCell> out;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a = 0; a < 2; ++a)
            out.push_back(deviation(t, Filter{}.with(T, 1), Filter{}.with(Y0, y0), a));
    return out;
}

std::vector<DevCell> eval_y1t_indep_a(const JointTable& t) {
    std::vector<DevCell> out;
    for (int y1 = 0; y1 < 2; ++y1)
        for (int tt = 0; tt < 2; ++tt)
            for (int a = 0; a < 2; ++a)
                out.push_back(deviation(t, Filter{}.with(Y1, y1).with(T, tt), Filter{}, a));
    return out;
}

std::vector<DevCell> eval_t_indep_a_given_y0_yh(const JointTable& t) {
    std::vector<DevCell> out;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int yh = 0; yh < 2; ++yh)
            for (int a = 0; a < 2; ++a)
                out.push_back(
                    deviation(t, Filter{}.with(T, 1), Filter{}.with(Y0, y0).with(YH, yh), a));
    return out;
}

std::vector<DevCell> eval_y1t_indep_a_given_yh(const JointTable& t) {
    std::vector<DevCell> out;
    for (int yh = 0; yh < 2; ++yh)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int tt = 0; tt < 2; ++tt)
                for (int a = 0; a < 2; ++a)
                    out.push_back(deviation(t, Filter{}.with(Y1, y1).with(T, tt),
                                            Filter{}.with(YH, yh), a));
    return out;
}

std::vector<DevCell> eval_y_indep_a(const JointTable& t) {
    std::vector<DevCell> out;
    for (int a = 0; a < 2; ++a)
        out.push_back(deviation(t, Filter{}.with(YOBS, 1), Filter{}, a));
    return out;
}

std::vector<DevCell> eval_y0_indep_a(const JointTable& t) {
    std::vector<DevCell> out;
    for (int a = 0; a < 2; ++a)
        out.push_back(deviation(t, Filter{}.with(Y0, 1), Filter{}, a));
    return out;
}

std::vector<DevCell> eval_t_indep_a_given_yh_y0(const JointTable& t) {
    std::vector<DevCell> out;
    for (int yh = 0; yh < 2; ++yh)
        for (int y0 = 0; y0 < 2; ++y0)
            for (int a = 0; a < 2; ++a)
                out.push_back(
                    deviation(t, Filter{}.with(T, 1), Filter{}.with(YH, yh).with(Y0, y0), a));
    return out;
}

std::vector<DevCell> eval_y1_yh_t_indep_a(const JointTable& t) {
    std::vector<DevCell> out;
    for (int y1 = 0; y1 < 2; ++y1)
        for (int yh = 0; yh < 2; ++yh)
            for (int tt = 0; tt < 2; ++tt)
                for (int a = 0; a < 2; ++a)
                    out.push_back(deviation(t, Filter{}.with(Y1, y1).with(YH, yh).with(T, tt),
                                            Filter{}, a));
    return out;
}

const std::vector<ConditionSpec>& condition_specs() {
    static const std::vector<ConditionSpec> specs = {
        {"T _||_ A | Y0", "indBP", eval_t_indep_a_given_y0},
        {"(Y1,T) _||_ A", "indBP", eval_y1t_indep_a},
        {"T _||_ A | Y0,Yhat", "indPP", eval_t_indep_a_given_y0_yh},
        {"(Y1,T) _||_ A | Yhat", "indPP", eval_y1t_indep_a_given_yh},
        {"Y _||_ A", "indEO", eval_y_indep_a},
        {"Y0 _||_ A", "indEO", eval_y0_indep_a},
        {"T _||_ A | Yhat,Y0", "indEO", eval_t_indep_a_given_yh_y0},
        {"(Y1,Yhat,T) _||_ A", "indEO", eval_y1_yh_t_indep_a},
    };
    return specs;
}

} // namespace

IndependenceReport independence_report(const OracleDataset& dataset,
                                       const std::vector<std::uint8_t>& predicted_labels,
                                       int bootstrap, std::uint64_t seed) {
    require_oracle_columns(dataset);
    if (dataset.size() == 0) throw DataError("independence report on an empty dataset");
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    if (bootstrap < 0) throw ParameterError("bootstrap count must be nonnegative");

    const auto& specs = condition_specs();
    JointTable tbl = full_table(dataset, &predicted_labels);

    std::vector<std::vector<DevCell>> point(specs.size());
    for (std::size_t c = 0; c < specs.size(); ++c) point[c] = specs[c].eval(tbl);

    // Per-cell bootstrap moments.
    std::vector<std::vector<double>> sum(specs.size()), sumsq(specs.size());
    std::vector<std::vector<int>> valid(specs.size());
    for (std::size_t c = 0; c < specs.size(); ++c) {
        sum[c].assign(point[c].size(), 0.0);
        sumsq[c].assign(point[c].size(), 0.0);
        valid[c].assign(point[c].size(), 0);
    }
    Rng root(seed);
    for (int b = 0; b < bootstrap; ++b) {
        Rng rng = root.substream(static_cast<std::uint64_t>(b));
        JointTable rt = resample_table(dataset, &predicted_labels, rng);
        for (std::size_t c = 0; c < specs.size(); ++c) {
            std::vector<DevCell> devs = specs[c].eval(rt);
            for (std::size_t j = 0; j < devs.size(); ++j) {
                if (!devs[j].dev) continue;
                sum[c][j] += *devs[j].dev;
                sumsq[c][j] += *devs[j].dev * *devs[j].dev;
                valid[c][j] += 1;
            }
        }
    }

    IndependenceReport report;
    for (std::size_t c = 0; c < specs.size(); ++c) {
        IndependenceCondition cond;
        cond.name = specs[c].name;
        cond.family = specs[c].family;
        cond.pass = true;
        double max_dev = -1;
        for (std::size_t j = 0; j < point[c].size(); ++j) {
            IndependenceCell cell;
            cell.stratum = point[c][j].stratum;
            cell.cell = point[c][j].cell;
            cell.estimable = point[c][j].dev.has_value();
            if (cell.estimable) {
                cell.deviation = *point[c][j].dev;
                if (valid[c][j] > 1) {
                    double mean = sum[c][j] / valid[c][j];
                    double var = (sumsq[c][j] - valid[c][j] * mean * mean) / (valid[c][j] - 1);
                    cell.std_error = var > 0 ? std::sqrt(var) : 0.0;
                }
                cell.flagged = std::abs(cell.deviation) > 3.0 * cell.std_error;
                if (cell.flagged) cond.pass = false;
                if (std::abs(cell.deviation) > max_dev) {
                    max_dev = std::abs(cell.deviation);
                    cond.max_abs_deviation = std::abs(cell.deviation);
                    cond.max_dev_std_error = cell.std_error;
                }
            } else {
                cell.deviation = kNaN;
                cell.std_error = 0;
                cell.flagged = false;
            }
            cond.cells.push_back(cell);
        }
        report.conditions.push_back(std::move(cond));
    }
    return report;
}

namespace {

template <typename Fn>
std::optional<Estimate> try_estimate(Fn&& fn) {
    try {
        return fn();
    } catch (const DataError&) {
        return std::nullopt;
    } catch (const UndefinedMetricError&) {
        return std::nullopt;
    }
}

} // namespace

std::vector<GroupMetrics> group_metrics(const OracleDataset& dataset,
                                        const NuisanceSet& nuisances,
                                        const std::vector<double>& scores,
                                        const std::vector<std::uint8_t>& predicted_labels,
                                        bool with_oracle, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size() || predicted_labels.size() != dataset.size())
        throw AlignmentError("scores or labels are not aligned with the dataset");
    std::vector<GroupMetrics> out;
    for (int g = 0; g < 2; ++g) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset.a[i] == g) rows.push_back(i);
        if (rows.empty()) throw DataError("group a=" + std::to_string(g) + " is empty");
        OracleDataset sub = subset(dataset, rows);
        NuisanceSet subn = subset(nuisances, rows);
        std::vector<double> s;
        std::vector<std::uint8_t> labels;
        s.reserve(rows.size());
        labels.reserve(rows.size());
        for (std::size_t r : rows) {
            s.push_back(scores[r]);
            labels.push_back(predicted_labels[r]);
        }

        GroupMetrics gm;
        gm.group = g;
        gm.n_rows = rows.size();
        gm.base_rate_obs = mode_base_rate(EvalMode::observational, sub, nullptr, clip, policy);
        gm.base_rate_cf = mode_base_rate(EvalMode::dr, sub, &subn, clip, policy);

        std::vector<EvalMode> modes = {EvalMode::observational, EvalMode::control, EvalMode::dr};
        if (with_oracle) modes.push_back(EvalMode::oracle);
        for (EvalMode mode : modes) {
            auto slot = [&](ModeEstimates& me) -> std::optional<Estimate>& {
                switch (mode) {
                    case EvalMode::observational: return me.observational;
                    case EvalMode::control: return me.control;
                    case EvalMode::dr: return me.dr;
                    case EvalMode::oracle: return me.oracle;
                }
                return me.dr;
            };
            slot(gm.tpr) = try_estimate(
                [&] { return mode_tpr(mode, sub, &subn, labels, clip, policy); });
            slot(gm.fpr) = try_estimate(
                [&] { return mode_fpr(mode, sub, &subn, labels, clip, policy); });
            slot(gm.precision) = try_estimate([&]() -> Estimate {
                auto e = mode_precision(mode, sub, &subn, labels, clip, policy);
                if (!e) throw UndefinedMetricError("no predicted positives");
                return *e;
            });
        }

        gm.gfnr_obs = mode_gfnr(EvalMode::observational, sub, nullptr, s, clip, policy);
        gm.gfpr_obs = mode_gfpr(EvalMode::observational, sub, nullptr, s, clip, policy);
        gm.gfnr_cf = mode_gfnr(EvalMode::dr, sub, &subn, s, clip, policy);
        gm.gfpr_cf = mode_gfpr(EvalMode::dr, sub, &subn, s, clip, policy);
        out.push_back(std::move(gm));
    }
    return out;
}

std::optional<double> disparity(const std::vector<GroupMetrics>& metrics,
                                const std::string& metric_name) {
    if (metrics.size() != 2) throw ParameterError("disparity needs exactly two groups");
    const GroupMetrics* g0 = nullptr;
    const GroupMetrics* g1 = nullptr;
    for (const GroupMetrics& gm : metrics) {
        if (gm.group == 0) g0 = &gm;
        if (gm.group == 1) g1 = &gm;
    }
    if (!g0 || !g1) throw ParameterError("disparity needs groups 0 and 1");

    auto plain = [&](Estimate GroupMetrics::* field) -> std::optional<double> {
        return (*g1.*field).value - (*g0.*field).value;
    };
    auto moded = [&](ModeEstimates GroupMetrics::* field,
                     const std::string& mode) -> std::optional<double> {
        auto pick = [&](const GroupMetrics& gm) -> const std::optional<Estimate>& {
            const ModeEstimates& me = gm.*field;
            if (mode == "observational") return me.observational;
            if (mode == "control") return me.control;
            if (mode == "dr") return me.dr;
            if (mode == "oracle") return me.oracle;
            throw ParameterError("unknown mode in metric name: " + mode);
        };
        const auto& e1 = pick(*g1);
        const auto& e0 = pick(*g0);
        if (!e1 || !e0) return std::nullopt;
        return e1->value - e0->value;
    };

    if (metric_name == "base_rate_obs") return plain(&GroupMetrics::base_rate_obs);
    if (metric_name == "base_rate_cf") return plain(&GroupMetrics::base_rate_cf);
    if (metric_name == "gfnr_obs") return plain(&GroupMetrics::gfnr_obs);
    if (metric_name == "gfpr_obs") return plain(&GroupMetrics::gfpr_obs);
    if (metric_name == "gfnr_cf") return plain(&GroupMetrics::gfnr_cf);
    if (metric_name == "gfpr_cf") return plain(&GroupMetrics::gfpr_cf);
    auto underscore = metric_name.rfind('_');
    if (underscore != std::string::npos) {
        std::string head = metric_name.substr(0, underscore);
        std::string mode = metric_name.substr(underscore + 1);
        if (mode == "observational" || mode == "control" || mode == "dr" || mode == "oracle") {
            if (head == "tpr") return moded(&GroupMetrics::tpr, mode);
            if (head == "fpr") return moded(&GroupMetrics::fpr, mode);
            if (head == "precision") return moded(&GroupMetrics::precision, mode);
        }
    }
    throw ParameterError("unknown metric name: " + metric_name);
}

} // namespace cfeval
