#include "cfeval/pipelines.hpp"

#include <algorithm>
#include <cmath>

#include "cfeval/nuisance.hpp"

namespace cfeval {

namespace {

// Substream tags for the per-pipeline derived seeds. Generation itself uses
// the configured seed directly so `generate --seed S` and the pipelines see
// the same dataset.
constexpr std::uint64_t kSplitTag = 1;
constexpr std::uint64_t kBalanceTag = 2;
constexpr std::uint64_t kIndependenceTag = 3;
constexpr std::uint64_t kMixTag = 4;

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t tag) {
    return Rng(seed).substream(tag).seed();
}

const std::vector<EvalMode> kAllModes = {EvalMode::observational, EvalMode::control,
                                         EvalMode::dr, EvalMode::oracle};

} // namespace

SplitIndices split_half(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ParameterError("split needs at least two rows");
    Rng rng(seed);
    std::vector<std::size_t> idx = shuffled_indices(n, rng);
    SplitIndices split;
    split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n / 2));
    split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n / 2), idx.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Experiment run_experiment(const PipelineConfig& config, bool obs_include_treatment) {
    GeneratorParams params{config.n, config.c, config.k, config.offset, config.seed};
    OracleDataset data = generate(params);
    SplitIndices split = split_half(data.size(), derived_seed(config.seed, kSplitTag));
    Experiment exp;
    exp.train = subset(data, split.train);
    exp.test = subset(data, split.test);
    exp.models = fit_nuisance_models(exp.train, FitConfig{}, true, obs_include_treatment, false);
    exp.nuisances = attach_scores(exp.test, exp.models);
    enforce_positivity(exp.nuisances.propensity, config.clip, config.policy);
    exp.cf_scores = exp.nuisances.cf_scores;
    exp.obs_scores = *exp.nuisances.obs_scores;
    return exp;
}

Fig2Output run_fig2(const PipelineConfig& config) {
    Experiment exp = run_experiment(config);
    std::vector<double> grid = threshold_grid(101);
    Fig2Output out;
    const std::pair<std::string, const std::vector<double>*> models[] = {
        {"counterfactual", &exp.cf_scores}, {"observational", &exp.obs_scores}};
    for (const auto& [name, scores] : models) {
        std::vector<Curve> calibrations;
        std::size_t first_summary = out.summaries.size();
        for (EvalMode mode : kAllModes) {
            Curve pr = pr_curve(mode, exp.test, &exp.nuisances, *scores, grid, name,
                                config.clip, config.policy);
            Curve roc = roc_curve(mode, exp.test, &exp.nuisances, *scores, grid, name,
                                  config.clip, config.policy);
            Curve cal = calibration_curve(mode, exp.test, &exp.nuisances, *scores,
                                          config.n_bins, name, config.clip, config.policy);
            ModelModeSummary summary;
            summary.model = name;
            summary.mode = mode;
            summary.aupr = area_under_pr(pr);
            summary.auroc = area_under_roc(roc);
            out.curves.push_back(std::move(pr));
            out.curves.push_back(std::move(roc));
            out.curves.push_back(cal);
            calibrations.push_back(std::move(cal));
            out.summaries.push_back(std::move(summary));
        }
        const Curve& oracle_cal = calibrations.back(); // modes end with oracle
        for (std::size_t m = 0; m < kAllModes.size(); ++m)
            out.summaries[first_summary + m].max_calibration_gap_vs_oracle =
                max_pointwise_gap(calibrations[m], oracle_cal);
    }
    return out;
}

namespace {

std::vector<TableRow> table_rows(const Experiment& exp, const std::vector<double>& scores,
                                 const PipelineConfig& config, const std::string& method) {
    std::vector<std::uint8_t> labels = threshold_labels(scores, config.threshold);
    std::vector<GroupMetrics> gms = group_metrics(exp.test, exp.nuisances, scores, labels, true,
                                                  config.clip, config.policy);
    std::vector<TableRow> rows;
    for (int g : {1, 0}) {
        for (const GroupMetrics& gm : gms) {
            if (gm.group != g) continue;
            TableRow row;
            row.group = g;
            row.method = method;
            row.cgfnr = gm.gfnr_cf;
            row.cgfpr = gm.gfpr_cf;
            row.ogfnr = gm.gfnr_obs;
            row.ogfpr = gm.gfpr_obs;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

struct TableBuild {
    Table2Output table;
    std::vector<double> adjusted;
};

// Original rows from the counterfactual model, post-processed rows from the
// mixed scores. The mixing policy is fit on the training half (observed
// labels) and applied, randomized, to the test half.
TableBuild build_table(const Experiment& exp, const PipelineConfig& config) {
    TableBuild tb;
    tb.table.rows = table_rows(exp, exp.cf_scores, config, "original");
    std::vector<double> train_scores = attach_scores(exp.train, exp.models).cf_scores;
    tb.table.policy = search_mixing_policy(train_scores, exp.train.y, exp.train.a, 0.01);
    Rng mix(derived_seed(config.seed, kMixTag));
    tb.adjusted = apply_mixing(exp.cf_scores, exp.test.a, tb.table.policy, mix);
    std::vector<TableRow> post = table_rows(exp, tb.adjusted, config, "postproc");
    tb.table.rows.insert(tb.table.rows.end(), post.begin(), post.end());
    return tb;
}

struct GroupRocs {
    std::vector<Curve> curves; // index = group
    double auroc[2] = {0, 0};
};

// Per-group counterfactual (dr-mode) ROC curves of the given scores.
GroupRocs group_rocs(const Experiment& exp, const std::vector<double>& scores,
                     const PipelineConfig& config, const std::string& prefix) {
    GroupRocs out;
    std::vector<double> grid = threshold_grid(101);
    for (int g = 0; g < 2; ++g) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < exp.test.size(); ++i)
            if (exp.test.a[i] == g) rows.push_back(i);
        if (rows.empty()) throw DataError("group a=" + std::to_string(g) + " is empty");
        OracleDataset sub = subset(exp.test, rows);
        NuisanceSet subn = subset(exp.nuisances, rows);
        std::vector<double> s;
        s.reserve(rows.size());
        for (std::size_t r : rows) s.push_back(scores[r]);
        Curve roc = roc_curve(EvalMode::dr, sub, &subn, s, grid,
                              prefix + "_a" + std::to_string(g), config.clip, config.policy);
        out.auroc[g] = area_under_roc(roc);
        out.curves.push_back(std::move(roc));
    }
    return out;
}

} // namespace

Table2Output run_table2(const PipelineConfig& config) {
    Experiment exp = run_experiment(config);
    return build_table(exp, config).table;
}

std::vector<ReweighPoint> run_fig5(const PipelineConfig& config,
                                   const std::vector<double>& k_grid) {
    return reweigh_experiment(k_grid, config.c, config.n, config.seed, config.bootstrap);
}

Fig6Output run_fig6(const PipelineConfig& config) {
    Experiment exp = run_experiment(config);
    TableBuild tb = build_table(exp, config);
    Fig6Output out;
    out.table = std::move(tb.table);
    GroupRocs before = group_rocs(exp, exp.cf_scores, config, "original");
    GroupRocs after = group_rocs(exp, tb.adjusted, config, "postproc");
    out.roc_before = std::move(before.curves);
    out.roc_after = std::move(after.curves);
    for (int g = 0; g < 2; ++g) {
        out.auroc_before[g] = before.auroc[g];
        out.auroc_after[g] = after.auroc[g];
    }
    return out;
}

TheoremCheckOutput run_theorem_checks(const PipelineConfig& config) {
    Experiment exp = run_experiment(config);
    std::vector<std::uint8_t> labels = threshold_labels(exp.cf_scores, config.threshold);
    std::uint64_t bal_seed = derived_seed(config.seed, kBalanceTag);
    std::uint64_t ind_seed = derived_seed(config.seed, kIndependenceTag);
    TheoremCheckOutput out;
    for (int y : {1, 0})
        for (int g : {1, 0})
            out.residuals.push_back(balance_bp(exp.test, g, y, config.bootstrap, bal_seed));
    for (int y : {1, 0})
        for (int g : {1, 0})
            for (int yh : {1, 0})
                out.residuals.push_back(
                    balance_pp(exp.test, labels, g, y, yh, config.bootstrap, bal_seed));
    for (int y : {1, 0})
        for (int g : {1, 0})
            out.residuals.push_back(
                balance_eo(exp.test, labels, g, y, config.bootstrap, bal_seed));
    out.independence = independence_report(exp.test, labels, config.bootstrap, ind_seed);
    return out;
}

std::vector<AppDCell> run_appD(const PipelineConfig& config, const std::vector<double>& c_grid,
                               const std::vector<double>& k_grid) {
    if (c_grid.empty() || k_grid.empty()) throw ParameterError("parameter grids must be non-empty");
    std::vector<AppDCell> cells;
    std::uint64_t cell_index = 0;
    for (double c : c_grid) {
        for (double k : k_grid) {
            PipelineConfig cfg = config;
            cfg.c = c;
            cfg.k = k;
            cfg.seed = derived_seed(config.seed, 100 + cell_index++);
            Fig2Output fig = run_fig2(cfg);
            AppDCell cell;
            cell.c = c;
            cell.k = k;
            cell.summaries = fig.summaries;
            cell.curves = std::move(fig.curves);
            auto find = [&](const std::string& model, EvalMode mode) -> const ModelModeSummary& {
                for (const ModelModeSummary& s : fig.summaries)
                    if (s.model == model && s.mode == mode) return s;
                throw DataError("missing summary for " + model);
            };
            const auto& cf_dr = find("counterfactual", EvalMode::dr);
            const auto& cf_obs = find("counterfactual", EvalMode::observational);
            const auto& cf_oracle = find("counterfactual", EvalMode::oracle);
            const auto& ob_dr = find("observational", EvalMode::dr);
            const auto& ob_obs = find("observational", EvalMode::observational);
            const auto& ob_oracle = find("observational", EvalMode::oracle);
            cell.dr_closest_for_both_models =
                cf_dr.max_calibration_gap_vs_oracle < cf_obs.max_calibration_gap_vs_oracle &&
                ob_dr.max_calibration_gap_vs_oracle < ob_obs.max_calibration_gap_vs_oracle;
            cell.aupr_ranking_flips =
                ob_obs.aupr > cf_obs.aupr && cf_oracle.aupr > ob_oracle.aupr;
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

AppD1Output run_appD1(const PipelineConfig& config) {
    Experiment exp = run_experiment(config, /*obs_include_treatment=*/true);
    std::vector<double> grid = threshold_grid(101);
    AppD1Output out;
    for (EvalMode mode : kAllModes) {
        Curve pr = pr_curve(mode, exp.test, &exp.nuisances, exp.obs_scores, grid,
                            "observational_t", config.clip, config.policy);
        Curve roc = roc_curve(mode, exp.test, &exp.nuisances, exp.obs_scores, grid,
                              "observational_t", config.clip, config.policy);
        Curve cal = calibration_curve(mode, exp.test, &exp.nuisances, exp.obs_scores,
                                      config.n_bins, "observational_t", config.clip,
                                      config.policy);
        if (mode == EvalMode::control) {
            out.aupr_control = area_under_pr(pr);
            out.auroc_control = area_under_roc(roc);
        }
        if (mode == EvalMode::oracle) {
            out.aupr_oracle = area_under_pr(pr);
            out.auroc_oracle = area_under_roc(roc);
        }
        out.curves.push_back(std::move(pr));
        out.curves.push_back(std::move(roc));
        out.curves.push_back(std::move(cal));
    }
    return out;
}

std::vector<AppECell> run_appE(const PipelineConfig& config, const std::vector<double>& c_grid,
                               const std::vector<double>& k_grid) {
    if (c_grid.empty() || k_grid.empty()) throw ParameterError("parameter grids must be non-empty");
    std::vector<AppECell> cells;
    std::uint64_t cell_index = 0;
    for (double c : c_grid) {
        for (double k : k_grid) {
            PipelineConfig cfg = config;
            cfg.c = c;
            cfg.k = k;
            cfg.seed = derived_seed(config.seed, 200 + cell_index++);
            Experiment exp = run_experiment(cfg);
            TableBuild tb = build_table(exp, cfg);
            GroupRocs before = group_rocs(exp, exp.cf_scores, cfg, "original");
            GroupRocs after = group_rocs(exp, tb.adjusted, cfg, "postproc");
            AppECell cell;
            cell.c = c;
            cell.k = k;
            cell.table = std::move(tb.table);
            for (int g = 0; g < 2; ++g) {
                cell.auroc_before[g] = before.auroc[g];
                cell.auroc_after[g] = after.auroc[g];
            }
            cell.before_roc_group_gap = std::abs(before.auroc[1] - before.auroc[0]);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

} // namespace cfeval
