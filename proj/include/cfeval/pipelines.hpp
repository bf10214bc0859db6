#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfeval/corrections.hpp"
#include "cfeval/curves.hpp"
#include "cfeval/fairness.hpp"

namespace cfeval {

struct PipelineConfig {
    std::size_t n = 100000;
    double c = 0.1;
    double k = 1.6;
    double offset = -0.5;
    std::uint64_t seed = 7;
    double clip = 0.01;
    // Reproduction pipelines winsorize: at the default parameters a handful of
    // rows have fitted propensity above 1 - clip.
    PositivityPolicy policy = PositivityPolicy::winsorize;
    double threshold = 0.5;
    int n_bins = 10;
    int bootstrap = 200;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded 50/50 shuffle split.
SplitIndices split_half(std::size_t n, std::uint64_t seed);

// One fitted experiment context shared by the figure pipelines: generate,
// split, fit the observational/counterfactual/propensity models on train,
// score the test half.
struct Experiment {
    OracleDataset test;
    NuisanceSet nuisances;            // positivity already applied per config
    std::vector<double> cf_scores;    // counterfactual model on test rows
    std::vector<double> obs_scores;   // observational model on test rows
    NuisanceModels models;
    OracleDataset train;
};

Experiment run_experiment(const PipelineConfig& config, bool obs_include_treatment = false);

struct ModelModeSummary {
    std::string model; // "counterfactual" | "observational"
    EvalMode mode = EvalMode::dr;
    double aupr = 0;
    double auroc = 0;
    double max_calibration_gap_vs_oracle = 0;
};

struct Fig2Output {
    std::vector<Curve> curves; // 2 models x 4 modes x {pr, roc, calibration}
    std::vector<ModelModeSummary> summaries;
};

Fig2Output run_fig2(const PipelineConfig& config);

struct TableRow {
    int group = 0;
    std::string method; // "original" | "postproc"
    Estimate cgfnr, cgfpr, ogfnr, ogfpr;
};

struct Table2Output {
    std::vector<TableRow> rows; // original rows then postproc rows, group 1 first
    MixingPolicy policy;
};

Table2Output run_table2(const PipelineConfig& config);

std::vector<ReweighPoint> run_fig5(const PipelineConfig& config,
                                   const std::vector<double>& k_grid);

struct Fig6Output {
    std::vector<Curve> roc_before; // per-group counterfactual ROC, original scores
    std::vector<Curve> roc_after;  // per-group counterfactual ROC, post-processed
    double auroc_before[2] = {0, 0}; // index = group
    double auroc_after[2] = {0, 0};
    Table2Output table;
};

Fig6Output run_fig6(const PipelineConfig& config);

struct TheoremCheckOutput {
    std::vector<BalanceResidual> residuals; // balBP/balPP/balEO over y, group, yhat
    IndependenceReport independence;
};

TheoremCheckOutput run_theorem_checks(const PipelineConfig& config);

struct AppDCell {
    double c = 0;
    double k = 0;
    std::vector<ModelModeSummary> summaries;
    std::vector<Curve> curves;
    bool dr_closest_for_both_models = false; // dr calibration gap beats observational
    bool aupr_ranking_flips = false;
};

std::vector<AppDCell> run_appD(const PipelineConfig& config, const std::vector<double>& c_grid,
                               const std::vector<double>& k_grid);

struct AppD1Output {
    std::vector<Curve> curves; // treatment-as-feature observational model, 4 modes
    double auroc_control = 0;
    double auroc_oracle = 0;  // drop = control - oracle
    double aupr_control = 0;
    double aupr_oracle = 0;
};

AppD1Output run_appD1(const PipelineConfig& config);

struct AppECell {
    double c = 0;
    double k = 0;
    Table2Output table;
    double auroc_before[2] = {0, 0};
    double auroc_after[2] = {0, 0};
    double before_roc_group_gap = 0; // |auroc a=1 - auroc a=0| before
};

std::vector<AppECell> run_appE(const PipelineConfig& config, const std::vector<double>& c_grid,
                               const std::vector<double>& k_grid);

} // namespace cfeval
