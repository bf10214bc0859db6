#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfeval/io.hpp"
#include "cfeval/nuisance.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace cfeval;

PositivityPolicy policy_from_string(const std::string& name) {
    if (name == "reject") return PositivityPolicy::reject;
    if (name == "winsorize") return PositivityPolicy::winsorize;
    throw ParameterError("unknown positivity policy: " + name);
}

MeanMethod method_from_string(const std::string& name) {
    if (name == "plugin") return MeanMethod::plugin;
    if (name == "ipw") return MeanMethod::ipw;
    if (name == "dr") return MeanMethod::dr;
    throw ParameterError("unknown method: " + name);
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            grid.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw ParameterError("bad grid value '" + field + "'");
        }
    }
    if (grid.empty()) throw ParameterError("grid is empty");
    return grid;
}

const std::vector<double>& pick_scores(const LoadedDataset& loaded, const std::string& model) {
    if (!loaded.nuisances)
        throw DataError("this command needs a scored dataset; run `cfeval fit` first");
    if (model == "counterfactual") return loaded.nuisances->cf_scores;
    if (model == "observational") {
        if (!loaded.nuisances->obs_scores)
            throw DataError("input has no obs_hat column; refit with the observational model");
        return *loaded.nuisances->obs_scores;
    }
    throw ParameterError("unknown model: " + model);
}

void emit(const std::string& text, const std::string& out_path, const std::string& command,
          const json& config) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        write_text_file(out_path, text + "\n");
        write_manifest(out_path + ".manifest.json", command, config.dump());
    }
}

json estimate_or_missing(const std::optional<Estimate>& estimate, const std::string& reason) {
    if (estimate) return json::parse(estimate_to_json(*estimate));
    return json{{"missing", true}, {"reason", reason}};
}

json summary_json(const ModelModeSummary& s) {
    return json{{"model", s.model},
                {"mode", to_string(s.mode)},
                {"aupr", s.aupr},
                {"auroc", s.auroc},
                {"max_calibration_gap_vs_oracle", s.max_calibration_gap_vs_oracle}};
}

json table_json(const Table2Output& table) {
    json rows = json::array();
    for (const TableRow& row : table.rows) {
        rows.push_back(json{{"group", row.group},
                            {"method", row.method},
                            {"cGFNR", row.cgfnr.value},
                            {"cGFPR", row.cgfpr.value},
                            {"oGFNR", row.ogfnr.value},
                            {"oGFPR", row.ogfpr.value},
                            {"cGFNR_std_error", row.cgfnr.std_error},
                            {"cGFPR_std_error", row.cgfpr.std_error},
                            {"oGFNR_std_error", row.ogfnr.std_error},
                            {"oGFPR_std_error", row.ogfpr.std_error}});
    }
    return json{{"rows", rows}, {"policy", json::parse(mixing_policy_to_json(table.policy))}};
}

// Reference values for the reproduction checks, by (group, method):
// cGFNR, cGFPR, oGFNR, oGFPR.
struct ReferenceRow {
    int group;
    const char* method;
    double cells[4];
};
constexpr ReferenceRow kReferenceTable[] = {
    {1, "original", {0.50, 0.33, 0.58, 0.39}},
    {0, "original", {0.50, 0.33, 0.56, 0.39}},
    {1, "postproc", {0.58, 0.30, 0.63, 0.35}},
    {0, "postproc", {0.64, 0.34, 0.63, 0.35}},
};

json table_reference_checks(const Table2Output& table) {
    json checks = json::array();
    int within = 0;
    double max_delta = 0;
    for (const ReferenceRow& ref : kReferenceTable) {
        for (const TableRow& row : table.rows) {
            if (row.group != ref.group || row.method != ref.method) continue;
            double got[4] = {row.cgfnr.value, row.cgfpr.value, row.ogfnr.value, row.ogfpr.value};
            const char* names[4] = {"cGFNR", "cGFPR", "oGFNR", "oGFPR"};
            for (int i = 0; i < 4; ++i) {
                double delta = got[i] - ref.cells[i];
                bool ok = std::abs(delta) <= 0.03;
                within += ok ? 1 : 0;
                max_delta = std::max(max_delta, std::abs(delta));
                checks.push_back(json{{"group", ref.group},
                                      {"method", ref.method},
                                      {"cell", names[i]},
                                      {"reference", ref.cells[i]},
                                      {"value", got[i]},
                                      {"delta", delta},
                                      {"within_0.03", ok}});
            }
        }
    }
    return json{{"cells", checks}, {"cells_within_0.03", within}, {"max_abs_delta", max_delta}};
}

double table_cell(const Table2Output& table, int group, const std::string& method,
                  const Estimate TableRow::* field) {
    for (const TableRow& row : table.rows)
        if (row.group == group && row.method == method) return (row.*field).value;
    throw DataError("missing table row");
}

json pipeline_config_json(const PipelineConfig& config) {
    return json{{"n", config.n},
                {"c", config.c},
                {"k", config.k},
                {"offset", config.offset},
                {"seed", config.seed},
                {"clip", config.clip},
                {"policy", config.policy == PositivityPolicy::reject ? "reject" : "winsorize"},
                {"threshold", config.threshold},
                {"n_bins", config.n_bins},
                {"bootstrap", config.bootstrap}};
}

std::vector<BalanceResidual> full_balance_set(const OracleDataset& data,
                                              const std::vector<std::uint8_t>& labels,
                                              int bootstrap, std::uint64_t seed) {
    std::vector<BalanceResidual> residuals;
    for (int y : {1, 0})
        for (int g : {1, 0})
            residuals.push_back(balance_bp(data, g, y, bootstrap, seed));
    for (int y : {1, 0})
        for (int g : {1, 0})
            for (int yh : {1, 0})
                residuals.push_back(balance_pp(data, labels, g, y, yh, bootstrap, seed));
    for (int y : {1, 0})
        for (int g : {1, 0})
            residuals.push_back(balance_eo(data, labels, g, y, bootstrap, seed));
    return residuals;
}

void reproduce_fig2(const PipelineConfig& config, const fs::path& dir) {
    Fig2Output fig = run_fig2(config);
    write_curves_csv((dir / "fig2_curves.csv").string(), fig.curves);
    json summaries = json::array();
    for (const ModelModeSummary& s : fig.summaries) summaries.push_back(summary_json(s));
    auto find = [&](const std::string& model, EvalMode mode) -> const ModelModeSummary& {
        for (const ModelModeSummary& s : fig.summaries)
            if (s.model == model && s.mode == mode) return s;
        throw DataError("missing summary");
    };
    json checks{
        {"dr_calibration_closer_than_observational",
         {{"counterfactual",
           find("counterfactual", EvalMode::dr).max_calibration_gap_vs_oracle <
               find("counterfactual", EvalMode::observational).max_calibration_gap_vs_oracle},
          {"observational",
           find("observational", EvalMode::dr).max_calibration_gap_vs_oracle <
               find("observational", EvalMode::observational).max_calibration_gap_vs_oracle}}},
        {"observational_mode_prefers_observational_model_by_aupr",
         find("observational", EvalMode::observational).aupr >
             find("counterfactual", EvalMode::observational).aupr},
        {"oracle_mode_prefers_counterfactual_model_by_aupr",
         find("counterfactual", EvalMode::oracle).aupr >
             find("observational", EvalMode::oracle).aupr}};
    write_text_file((dir / "fig2_summary.json").string(),
                    json{{"summaries", summaries}, {"checks", checks}}.dump(2) + "\n");
}

void reproduce_table2(const PipelineConfig& config, const fs::path& dir) {
    Table2Output table = run_table2(config);
    write_table_csv((dir / "table2.csv").string(), table);
    json summary = table_json(table);
    summary["reference_checks"] = table_reference_checks(table);
    summary["post_disparities"] = json{
        {"oGFNR", table_cell(table, 1, "postproc", &TableRow::ogfnr) -
                      table_cell(table, 0, "postproc", &TableRow::ogfnr)},
        {"oGFPR", table_cell(table, 1, "postproc", &TableRow::ogfpr) -
                      table_cell(table, 0, "postproc", &TableRow::ogfpr)}};
    write_text_file((dir / "table2_summary.json").string(), summary.dump(2) + "\n");
}

void reproduce_fig5(const PipelineConfig& config, const fs::path& dir) {
    std::vector<double> k_grid = {0, 0.4, 0.8, 1.2, 1.6, 2};
    std::vector<ReweighPoint> points = run_fig5(config, k_grid);
    write_reweigh_csv((dir / "fig5.csv").string(), points);
    double max_obs_after = 0;
    bool monotone = true;
    json significant = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        max_obs_after = std::max(max_obs_after, std::abs(points[i].obs_disparity_after));
        if (i > 0 && points[i].cf_disparity_after <= points[i - 1].cf_disparity_after)
            monotone = false;
        significant.push_back(json{
            {"k", points[i].k},
            {"cf_after_over_3_std_error",
             std::abs(points[i].cf_disparity_after) > 3 * points[i].cf_after_std_error}});
    }
    write_text_file((dir / "fig5_summary.json").string(),
                    json{{"max_abs_obs_disparity_after", max_obs_after},
                         {"cf_disparity_after_monotone", monotone},
                         {"significance", significant}}
                            .dump(2) +
                        "\n");
}

void reproduce_fig6(const PipelineConfig& config, const fs::path& dir) {
    Fig6Output fig = run_fig6(config);
    std::vector<Curve> curves = fig.roc_before;
    curves.insert(curves.end(), fig.roc_after.begin(), fig.roc_after.end());
    write_curves_csv((dir / "fig6_roc.csv").string(), curves);
    write_table_csv((dir / "fig6_table.csv").string(), fig.table);
    write_text_file(
        (dir / "fig6_summary.json").string(),
        json{{"auroc_before", {fig.auroc_before[0], fig.auroc_before[1]}},
             {"auroc_after", {fig.auroc_after[0], fig.auroc_after[1]}},
             {"before_group_gap", std::abs(fig.auroc_before[1] - fig.auroc_before[0])},
             {"after_group_gap", std::abs(fig.auroc_after[1] - fig.auroc_after[0])},
             {"table", table_json(fig.table)}}
                .dump(2) +
            "\n");
}

std::string grid_tag(double v) {
    std::ostringstream out;
    out << v;
    std::string s = out.str();
    for (char& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

void reproduce_appD(const PipelineConfig& config, const fs::path& dir) {
    std::vector<AppDCell> cells =
        run_appD(config, {0.1, 0.3, 0.5}, {0.8, 1.0, 1.6, 2.0});
    json cell_summaries = json::array();
    bool all_dr_closest = true;
    for (const AppDCell& cell : cells) {
        std::string name = "appD_c" + grid_tag(cell.c) + "_k" + grid_tag(cell.k) + "_curves.csv";
        write_curves_csv((dir / name).string(), cell.curves);
        json summaries = json::array();
        for (const ModelModeSummary& s : cell.summaries) summaries.push_back(summary_json(s));
        cell_summaries.push_back(json{{"c", cell.c},
                                      {"k", cell.k},
                                      {"dr_closest_for_both_models",
                                       cell.dr_closest_for_both_models},
                                      {"aupr_ranking_flips", cell.aupr_ranking_flips},
                                      {"summaries", summaries},
                                      {"curves_file", name}});
        all_dr_closest = all_dr_closest && cell.dr_closest_for_both_models;
    }
    write_text_file((dir / "appD_summary.json").string(),
                    json{{"cells", cell_summaries}, {"all_dr_closest", all_dr_closest}}.dump(2) +
                        "\n");
}

void reproduce_appD1(const PipelineConfig& config, const fs::path& dir) {
    AppD1Output out = run_appD1(config);
    write_curves_csv((dir / "appD1_curves.csv").string(), out.curves);
    write_text_file((dir / "appD1_summary.json").string(),
                    json{{"auroc_control", out.auroc_control},
                         {"auroc_oracle", out.auroc_oracle},
                         {"auroc_drop", out.auroc_control - out.auroc_oracle},
                         {"aupr_control", out.aupr_control},
                         {"aupr_oracle", out.aupr_oracle},
                         {"aupr_drop", out.aupr_control - out.aupr_oracle}}
                            .dump(2) +
                        "\n");
}

void reproduce_appE(const PipelineConfig& config, const fs::path& dir) {
    std::vector<AppECell> cells = run_appE(config, {0.1, 0.3}, {0.8, 1.6});
    json cell_summaries = json::array();
    for (const AppECell& cell : cells) {
        std::string tag = "c" + grid_tag(cell.c) + "_k" + grid_tag(cell.k);
        write_table_csv((dir / ("appE_table_" + tag + ".csv")).string(), cell.table);
        cell_summaries.push_back(
            json{{"c", cell.c},
                 {"k", cell.k},
                 {"auroc_before", {cell.auroc_before[0], cell.auroc_before[1]}},
                 {"auroc_after", {cell.auroc_after[0], cell.auroc_after[1]}},
                 {"before_roc_group_gap", cell.before_roc_group_gap},
                 {"table", table_json(cell.table)}});
    }
    write_text_file((dir / "appE_summary.json").string(),
                    json{{"cells", cell_summaries}}.dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterfactual model evaluation and fairness auditing"};
    app.require_subcommand(1);

    try {
        // generate
        auto* gen = app.add_subcommand("generate", "draw a synthetic oracle dataset");
        GeneratorParams gen_params;
        std::string gen_out;
        gen->add_option("--n", gen_params.n, "rows");
        gen->add_option("--c", gen_params.c, "treatment-effect multiplier");
        gen->add_option("--k", gen_params.k, "treatment-assignment bias");
        gen->add_option("--offset", gen_params.offset, "logit offset");
        gen->add_option("--seed", gen_params.seed, "rng seed");
        gen->add_option("--out", gen_out, "output CSV path")->required();
        gen->callback([&] {
            OracleDataset data = generate(gen_params);
            write_dataset_csv(gen_out, data);
            write_dataset_meta(gen_out + ".meta.json", data);
            json config{{"n", gen_params.n},
                        {"c", gen_params.c},
                        {"k", gen_params.k},
                        {"offset", gen_params.offset},
                        {"seed", gen_params.seed},
                        {"out", gen_out}};
            write_manifest(gen_out + ".manifest.json", "generate", config.dump());
            MomentSummary moments = summarize(data);
            json out{{"mean_y", moments.mean_y},
                     {"mean_y0", moments.mean_y0},
                     {"mean_y1", moments.mean_y1},
                     {"mean_t", moments.mean_t}};
            if (moments.mean_t_given_a0) out["mean_t_given_a0"] = *moments.mean_t_given_a0;
            if (moments.mean_t_given_a1) out["mean_t_given_a1"] = *moments.mean_t_given_a1;
            std::cout << out.dump(2) << "\n";
        });

        // fit
        auto* fit = app.add_subcommand("fit", "fit nuisance models and score a dataset");
        std::string fit_data, fit_train, fit_out, fit_models_out;
        bool fit_obs_t = false, fit_shift = false;
        FitConfig fit_config;
        double fit_clip = 0.01;
        fit->add_option("--data", fit_data, "dataset to score")->required();
        fit->add_option("--train", fit_train, "fit on this dataset instead of --data");
        fit->add_option("--out", fit_out, "scored CSV path")->required();
        fit->add_option("--models-out", fit_models_out, "write fitted models as JSON");
        fit->add_flag("--obs-include-treatment", fit_obs_t,
                      "include t as an observational-model feature");
        fit->add_flag("--shift-correction", fit_shift,
                      "weight control rows by 1/(1 - propensity)");
        fit->add_option("--penalty", fit_config.l2_penalty, "l2 penalty");
        fit->add_option("--max-iterations", fit_config.max_iterations, "iteration cap");
        fit->add_option("--tolerance", fit_config.gradient_tolerance, "gradient tolerance");
        fit->add_option("--clip", fit_clip, "positivity clip for --shift-correction");
        fit->callback([&] {
            LoadedDataset loaded = read_dataset_csv(fit_data);
            OracleDataset train =
                fit_train.empty() ? loaded.dataset : read_dataset_csv(fit_train).dataset;
            NuisanceModels models =
                fit_nuisance_models(train, fit_config, true, fit_obs_t, fit_shift);
            NuisanceSet nuisances = attach_scores(loaded.dataset, models);
            write_dataset_csv(fit_out, loaded.dataset, &nuisances);
            if (!fit_models_out.empty()) {
                json models_json{{"propensity", json::parse(models.propensity.to_json())},
                                 {"counterfactual",
                                  json::parse(models.counterfactual.to_json())}};
                if (models.observational)
                    models_json["observational"] = json::parse(models.observational->to_json());
                write_text_file(fit_models_out, models_json.dump(2) + "\n");
            }
            json config{{"data", fit_data},
                        {"train", fit_train},
                        {"out", fit_out},
                        {"obs_include_treatment", fit_obs_t},
                        {"shift_correction", fit_shift},
                        {"penalty", fit_config.l2_penalty}};
            write_manifest(fit_out + ".manifest.json", "fit", config.dump());
        });

        // evaluate
        auto* eval = app.add_subcommand("evaluate", "point estimate of one metric");
        std::string ev_data, ev_metric, ev_method = "dr", ev_mode = "dr";
        std::string ev_model = "counterfactual", ev_policy = "reject", ev_out;
        double ev_threshold = 0.5, ev_r1 = 0, ev_r2 = 0, ev_clip = 0.01;
        eval->add_option("--data", ev_data, "scored dataset CSV")->required();
        eval->add_option("--metric", ev_metric,
                         "mean_y0|base_rate|tpr|fpr|precision|calibration_bin|gfnr|gfpr")
            ->required();
        eval->add_option("--method", ev_method, "plugin|ipw|dr (mean_y0 only)");
        eval->add_option("--mode", ev_mode, "observational|control|dr|oracle");
        eval->add_option("--model", ev_model, "counterfactual|observational scores");
        eval->add_option("--threshold", ev_threshold, "label threshold");
        eval->add_option("--r1", ev_r1, "calibration bin lower edge");
        eval->add_option("--r2", ev_r2, "calibration bin upper edge");
        eval->add_option("--clip", ev_clip, "positivity clip");
        eval->add_option("--positivity", ev_policy, "reject|winsorize");
        eval->add_option("--out", ev_out, "write the JSON estimate here");
        eval->callback([&] {
            LoadedDataset loaded = read_dataset_csv(ev_data);
            if (!loaded.nuisances)
                throw DataError("evaluate needs a scored dataset; run `cfeval fit` first");
            const OracleDataset& data = loaded.dataset;
            const NuisanceSet& nuisances = *loaded.nuisances;
            PositivityPolicy policy = policy_from_string(ev_policy);
            EvalMode mode = eval_mode_from_string(ev_mode);
            const std::vector<double>& scores = pick_scores(loaded, ev_model);
            std::vector<std::uint8_t> labels = threshold_labels(scores, ev_threshold);
            json result;
            if (ev_metric == "mean_y0") {
                result = json::parse(estimate_to_json(estimate_mean_y0(
                    data, nuisances, method_from_string(ev_method), ev_clip, policy)));
            } else if (ev_metric == "base_rate") {
                result = json::parse(estimate_to_json(
                    mode_base_rate(mode, data, &nuisances, ev_clip, policy)));
            } else if (ev_metric == "tpr") {
                result = json::parse(estimate_to_json(
                    mode_tpr(mode, data, &nuisances, labels, ev_clip, policy)));
            } else if (ev_metric == "fpr") {
                result = json::parse(estimate_to_json(
                    mode_fpr(mode, data, &nuisances, labels, ev_clip, policy)));
            } else if (ev_metric == "precision") {
                result = estimate_or_missing(
                    mode_precision(mode, data, &nuisances, labels, ev_clip, policy),
                    "no predicted positives");
            } else if (ev_metric == "calibration_bin") {
                result = estimate_or_missing(
                    mode_calibration_bin(mode, data, &nuisances, scores, ev_r1, ev_r2, ev_clip,
                                         policy),
                    "no scores inside the bin");
            } else if (ev_metric == "gfnr") {
                result = json::parse(estimate_to_json(
                    mode_gfnr(mode, data, &nuisances, scores, ev_clip, policy)));
            } else if (ev_metric == "gfpr") {
                result = json::parse(estimate_to_json(
                    mode_gfpr(mode, data, &nuisances, scores, ev_clip, policy)));
            } else {
                throw ParameterError("unknown metric: " + ev_metric);
            }
            json config{{"data", ev_data},     {"metric", ev_metric},
                        {"method", ev_method}, {"mode", ev_mode},
                        {"model", ev_model},   {"threshold", ev_threshold},
                        {"clip", ev_clip},     {"positivity", ev_policy}};
            emit(result.dump(2), ev_out, "evaluate", config);
        });

        // curves
        auto* curves_cmd = app.add_subcommand("curves", "PR/ROC/calibration curves");
        std::string cv_data, cv_mode = "all", cv_curve = "all";
        std::string cv_model = "counterfactual", cv_policy = "reject", cv_out;
        int cv_bins = 10;
        double cv_clip = 0.01;
        curves_cmd->add_option("--data", cv_data, "scored dataset CSV")->required();
        curves_cmd->add_option("--mode", cv_mode, "observational|control|dr|oracle|all");
        curves_cmd->add_option("--curve", cv_curve, "pr|roc|calibration|all");
        curves_cmd->add_option("--model", cv_model, "counterfactual|observational scores");
        curves_cmd->add_option("--bins", cv_bins, "calibration bins");
        curves_cmd->add_option("--clip", cv_clip, "positivity clip");
        curves_cmd->add_option("--positivity", cv_policy, "reject|winsorize");
        curves_cmd->add_option("--out", cv_out, "output CSV path")->required();
        curves_cmd->callback([&] {
            LoadedDataset loaded = read_dataset_csv(cv_data);
            if (!loaded.nuisances)
                throw DataError("curves need a scored dataset; run `cfeval fit` first");
            PositivityPolicy policy = policy_from_string(cv_policy);
            const std::vector<double>& scores = pick_scores(loaded, cv_model);
            std::vector<EvalMode> modes;
            if (cv_mode == "all")
                modes = {EvalMode::observational, EvalMode::control, EvalMode::dr,
                         EvalMode::oracle};
            else
                modes = {eval_mode_from_string(cv_mode)};
            std::vector<double> grid = threshold_grid(101);
            std::vector<Curve> out;
            for (EvalMode mode : modes) {
                if (cv_curve == "pr" || cv_curve == "all")
                    out.push_back(pr_curve(mode, loaded.dataset, &*loaded.nuisances, scores,
                                           grid, cv_model, cv_clip, policy));
                if (cv_curve == "roc" || cv_curve == "all")
                    out.push_back(roc_curve(mode, loaded.dataset, &*loaded.nuisances, scores,
                                            grid, cv_model, cv_clip, policy));
                if (cv_curve == "calibration" || cv_curve == "all")
                    out.push_back(calibration_curve(mode, loaded.dataset, &*loaded.nuisances,
                                                    scores, cv_bins, cv_model, cv_clip, policy));
            }
            if (out.empty()) throw ParameterError("unknown curve kind: " + cv_curve);
            write_curves_csv(cv_out, out);
            json config{{"data", cv_data},   {"mode", cv_mode}, {"curve", cv_curve},
                        {"model", cv_model}, {"bins", cv_bins}, {"clip", cv_clip},
                        {"positivity", cv_policy}};
            write_manifest(cv_out + ".manifest.json", "curves", config.dump());
        });

        // audit
        auto* audit = app.add_subcommand("audit", "group metrics, balance, independence");
        std::string au_data, au_model = "counterfactual", au_policy = "winsorize", au_out;
        bool au_groups = false, au_balance = false, au_independence = false;
        double au_threshold = 0.5, au_clip = 0.01;
        int au_bootstrap = 200;
        std::uint64_t au_seed = 1;
        audit->add_option("--data", au_data, "scored dataset CSV")->required();
        audit->add_flag("--groups", au_groups, "per-group metric table");
        audit->add_flag("--balance", au_balance, "balance-condition residuals");
        audit->add_flag("--independence", au_independence, "independence report");
        audit->add_option("--model", au_model, "counterfactual|observational scores");
        audit->add_option("--threshold", au_threshold, "label threshold");
        audit->add_option("--bootstrap", au_bootstrap, "bootstrap resamples");
        audit->add_option("--seed", au_seed, "bootstrap seed");
        audit->add_option("--clip", au_clip, "positivity clip");
        audit->add_option("--positivity", au_policy, "reject|winsorize");
        audit->add_option("--out", au_out, "write the JSON report here");
        audit->callback([&] {
            LoadedDataset loaded = read_dataset_csv(au_data);
            if (!loaded.nuisances)
                throw DataError("audit needs a scored dataset; run `cfeval fit` first");
            if (!au_groups && !au_balance && !au_independence)
                au_groups = au_balance = au_independence = true;
            PositivityPolicy policy = policy_from_string(au_policy);
            const std::vector<double>& scores = pick_scores(loaded, au_model);
            std::vector<std::uint8_t> labels = threshold_labels(scores, au_threshold);
            json report;
            if (au_groups) {
                std::vector<GroupMetrics> gms =
                    group_metrics(loaded.dataset, *loaded.nuisances, scores, labels, true,
                                  au_clip, policy);
                report["groups"] = json::parse(group_metrics_to_json(gms));
                json disparities;
                for (const char* name : {"gfnr_obs", "gfpr_obs", "gfnr_cf", "gfpr_cf",
                                         "base_rate_obs", "base_rate_cf"}) {
                    auto d = disparity(gms, name);
                    disparities[name] = d ? json(*d) : json(nullptr);
                }
                report["disparities"] = disparities;
            }
            if (au_balance)
                report["balance"] = json::parse(balance_residuals_to_json(
                    full_balance_set(loaded.dataset, labels, au_bootstrap, au_seed)));
            if (au_independence)
                report["independence"] = json::parse(independence_report_to_json(
                    independence_report(loaded.dataset, labels, au_bootstrap, au_seed)));
            json config{{"data", au_data},         {"model", au_model},
                        {"threshold", au_threshold}, {"bootstrap", au_bootstrap},
                        {"seed", au_seed},          {"clip", au_clip},
                        {"positivity", au_policy}};
            emit(report.dump(2), au_out, "audit", config);
        });

        // reweigh
        auto* rew = app.add_subcommand("reweigh", "base-rate parity reweighing sweep");
        std::string rw_grid = "0,0.4,0.8,1.2,1.6,2", rw_out;
        double rw_c = 0.1;
        std::size_t rw_n = 100000;
        std::uint64_t rw_seed = 7;
        int rw_bootstrap = 200;
        rew->add_option("--k-grid", rw_grid, "comma-separated k values");
        rew->add_option("--c", rw_c, "treatment-effect multiplier");
        rew->add_option("--n", rw_n, "rows per grid point");
        rew->add_option("--seed", rw_seed, "rng seed");
        rew->add_option("--bootstrap", rw_bootstrap, "bootstrap resamples");
        rew->add_option("--out", rw_out, "output CSV path")->required();
        rew->callback([&] {
            std::vector<ReweighPoint> points =
                reweigh_experiment(parse_grid(rw_grid), rw_c, rw_n, rw_seed, rw_bootstrap);
            write_reweigh_csv(rw_out, points);
            json config{{"k_grid", rw_grid}, {"c", rw_c}, {"n", rw_n},
                        {"seed", rw_seed},   {"bootstrap", rw_bootstrap}};
            write_manifest(rw_out + ".manifest.json", "reweigh", config.dump());
        });

        // postprocess
        auto* post = app.add_subcommand("postprocess", "trivial-predictor mixing");
        std::string pp_data, pp_out, pp_policy_out;
        std::uint64_t pp_seed = 7;
        post->add_option("--data", pp_data, "scored dataset CSV")->required();
        post->add_option("--seed", pp_seed, "mixing seed");
        post->add_option("--out", pp_out, "adjusted scores CSV")->required();
        post->add_option("--policy-out", pp_policy_out, "write the mixing policy JSON here");
        post->callback([&] {
            LoadedDataset loaded = read_dataset_csv(pp_data);
            if (!loaded.nuisances)
                throw DataError("postprocess needs a scored dataset; run `cfeval fit` first");
            PostprocessResult result = postprocess_equalized_odds(
                loaded.dataset, loaded.nuisances->cf_scores, pp_seed);
            std::ofstream out(pp_out);
            if (!out) throw DataError("cannot open " + pp_out + " for writing");
            out.precision(17);
            out << "row,a,score,adjusted,mixed\n";
            for (std::size_t i = 0; i < result.adjusted_scores.size(); ++i)
                out << i << ',' << int(loaded.dataset.a[i]) << ','
                    << loaded.nuisances->cf_scores[i] << ',' << result.adjusted_scores[i] << ','
                    << int(result.mixed[i]) << "\n";
            std::string policy_json = mixing_policy_to_json(result.policy);
            if (!pp_policy_out.empty())
                write_text_file(pp_policy_out, policy_json + "\n");
            else
                std::cout << policy_json << "\n";
            json config{{"data", pp_data}, {"seed", pp_seed}, {"out", pp_out}};
            write_manifest(pp_out + ".manifest.json", "postprocess", config.dump());
        });

        // reproduce
        auto* rep = app.add_subcommand("reproduce", "one-shot experiment pipelines");
        std::string rp_what, rp_outdir;
        PipelineConfig rp_config;
        rep->add_option("what", rp_what, "fig2|fig5|table2|fig6|appD|appD1|appE")->required();
        rep->add_option("--outdir", rp_outdir, "output directory")->required();
        rep->add_option("--n", rp_config.n, "rows");
        rep->add_option("--c", rp_config.c, "treatment-effect multiplier");
        rep->add_option("--k", rp_config.k, "treatment-assignment bias");
        rep->add_option("--seed", rp_config.seed, "rng seed");
        rep->add_option("--threshold", rp_config.threshold, "label threshold");
        rep->add_option("--bins", rp_config.n_bins, "calibration bins");
        rep->add_option("--bootstrap", rp_config.bootstrap, "bootstrap resamples");
        rep->add_option("--clip", rp_config.clip, "positivity clip");
        rep->callback([&] {
            fs::path dir(rp_outdir);
            fs::create_directories(dir);
            if (rp_what == "fig2")
                reproduce_fig2(rp_config, dir);
            else if (rp_what == "fig5")
                reproduce_fig5(rp_config, dir);
            else if (rp_what == "table2")
                reproduce_table2(rp_config, dir);
            else if (rp_what == "fig6")
                reproduce_fig6(rp_config, dir);
            else if (rp_what == "appD")
                reproduce_appD(rp_config, dir);
            else if (rp_what == "appD1")
                reproduce_appD1(rp_config, dir);
            else if (rp_what == "appE")
                reproduce_appE(rp_config, dir);
            else
                throw ParameterError("unknown reproduction id: " + rp_what);
            json config = pipeline_config_json(rp_config);
            config["what"] = rp_what;
            write_manifest((dir / "manifest.json").string(), "reproduce", config.dump());
        });

        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        std::cerr << json{{"error", "usage_error"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << json{{"error", "parameter_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const AlignmentError& e) {
        std::cerr << json{{"error", "alignment_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const PositivityError& e) {
        std::cerr << json{{"error", "positivity_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const SeparationError& e) {
        std::cerr << json{{"error", "separation_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const FitError& e) {
        std::cerr << json{{"error", "fit_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const UndefinedMetricError& e) {
        std::cerr << json{{"error", "undefined_metric"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << json{{"error", "data_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << json{{"error", "error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal_error"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
