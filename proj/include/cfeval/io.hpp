#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfeval/corrections.hpp"
#include "cfeval/curves.hpp"
#include "cfeval/fairness.hpp"
#include "cfeval/pipelines.hpp"

namespace cfeval {

inline constexpr const char* kVersion = "0.1.0";

// Dataset CSV: header `z,a,y0,y1,t,y`, with `pi_hat,s0_hat[,obs_hat]` appended
// when nuisances are given. Sidecar JSON carries params, seed, tool version.
void write_dataset_csv(const std::string& path, const OracleDataset& dataset,
                       const NuisanceSet* nuisances = nullptr);
void write_dataset_meta(const std::string& path, const OracleDataset& dataset);

struct LoadedDataset {
    OracleDataset dataset;
    std::optional<NuisanceSet> nuisances;
};

LoadedDataset read_dataset_csv(const std::string& path);

// Curve CSV: `model,mode,curve,param,x,y,ci_low,ci_high` (empty CI fields when absent).
void write_curves_csv(const std::string& path, const std::vector<Curve>& curves);

// Table CSV: `group,method,cGFNR,cGFPR,oGFNR,oGFPR`.
void write_table_csv(const std::string& path, const Table2Output& table);

void write_reweigh_csv(const std::string& path, const std::vector<ReweighPoint>& points);

std::string estimate_to_json(const Estimate& estimate);
std::string group_metrics_to_json(const std::vector<GroupMetrics>& metrics);
std::string balance_residuals_to_json(const std::vector<BalanceResidual>& residuals);
std::string independence_report_to_json(const IndependenceReport& report);
std::string mixing_policy_to_json(const MixingPolicy& policy);

// Every CLI run writes one of these next to its outputs.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json);

void write_text_file(const std::string& path, const std::string& content);

} // namespace cfeval
