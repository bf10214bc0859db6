#include "cfeval/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cfeval {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.precision(17);
    return out;
}

json nullable(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

json estimate_json(const Estimate& e) {
    return json{{"value", nullable(e.value)},
                {"std_error", nullable(e.std_error)},
                {"ci_low", nullable(e.ci_low)},
                {"ci_high", nullable(e.ci_high)},
                {"n_effective", e.n_effective},
                {"kind", to_string(e.kind)},
                {"metric", to_string(e.metric)}};
}

json optional_estimate_json(const std::optional<Estimate>& e) {
    if (!e) return nullptr;
    return estimate_json(*e);
}

json mode_estimates_json(const ModeEstimates& me) {
    return json{{"observational", optional_estimate_json(me.observational)},
                {"control", optional_estimate_json(me.control)},
                {"dr", optional_estimate_json(me.dr)},
                {"oracle", optional_estimate_json(me.oracle)}};
}

} // namespace

void write_dataset_csv(const std::string& path, const OracleDataset& dataset,
                       const NuisanceSet* nuisances) {
    std::ofstream out = open_out(path);
    out << "z,a,y0,y1,t,y";
    bool with_obs = false;
    if (nuisances) {
        if (nuisances->propensity.size() != dataset.size() ||
            nuisances->cf_scores.size() != dataset.size())
            throw AlignmentError("nuisance vectors are not aligned with the dataset");
        with_obs = nuisances->obs_scores.has_value();
        out << ",pi_hat,s0_hat";
        if (with_obs) out << ",obs_hat";
    }
    out << "\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.z[i] << ',' << int(dataset.a[i]) << ',' << int(dataset.y0[i]) << ','
            << int(dataset.y1[i]) << ',' << int(dataset.t[i]) << ',' << int(dataset.y[i]);
        if (nuisances) {
            out << ',' << nuisances->propensity[i] << ',' << nuisances->cf_scores[i];
            if (with_obs) out << ',' << (*nuisances->obs_scores)[i];
        }
        out << "\n";
    }
    if (!out) throw DataError("failed while writing " + path);
}

void write_dataset_meta(const std::string& path, const OracleDataset& dataset) {
    json meta{{"version", kVersion},
              {"params",
               {{"n", dataset.params.n},
                {"c", dataset.params.c},
                {"k", dataset.params.k},
                {"offset", dataset.params.offset},
                {"seed", dataset.params.seed}}}};
    write_text_file(path, meta.dump(2) + "\n");
}

LoadedDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + " is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
    }
    const std::vector<std::string> base = {"z", "a", "y0", "y1", "t", "y"};
    if (header.size() < base.size())
        throw DataError(path + ": expected header starting z,a,y0,y1,t,y");
    for (std::size_t i = 0; i < base.size(); ++i)
        if (header[i] != base[i])
            throw DataError(path + ": column " + std::to_string(i + 1) + " is '" + header[i] +
                            "', expected '" + base[i] + "'");
    bool with_nuisance = header.size() >= 8 && header[6] == "pi_hat" && header[7] == "s0_hat";
    bool with_obs = with_nuisance && header.size() >= 9 && header[8] == "obs_hat";
    std::size_t expected = base.size() + (with_nuisance ? 2 : 0) + (with_obs ? 1 : 0);
    if (header.size() != expected) throw DataError(path + ": unrecognized column layout");

    LoadedDataset loaded;
    if (with_nuisance) {
        loaded.nuisances = NuisanceSet{};
        if (with_obs) loaded.nuisances->obs_scores = std::vector<double>{};
        loaded.nuisances->provenance = "loaded from " + path;
    }
    std::size_t line_no = 1;
    auto parse_bit = [&](const std::string& field, const std::string& name) -> std::uint8_t {
        if (field == "0") return 0;
        if (field == "1") return 1;
        throw DataError(path + ":" + std::to_string(line_no) + ": " + name +
                        " must be 0 or 1, got '" + field + "'");
    };
    auto parse_real = [&](const std::string& field, const std::string& name) -> double {
        try {
            std::size_t used = 0;
            double v = std::stod(field, &used);
            if (used != field.size()) throw std::invalid_argument(field);
            return v;
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad " + name + " value '" +
                            field + "'");
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != expected)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(expected) + " fields, got " +
                            std::to_string(fields.size()));
        OracleDataset& d = loaded.dataset;
        d.z.push_back(parse_real(fields[0], "z"));
        d.a.push_back(parse_bit(fields[1], "a"));
        d.y0.push_back(parse_bit(fields[2], "y0"));
        d.y1.push_back(parse_bit(fields[3], "y1"));
        d.t.push_back(parse_bit(fields[4], "t"));
        d.y.push_back(parse_bit(fields[5], "y"));
        if (d.y.back() != (d.t.back() ? d.y1.back() : d.y0.back()))
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": y is inconsistent with t, y0, y1");
        if (with_nuisance) {
            loaded.nuisances->propensity.push_back(parse_real(fields[6], "pi_hat"));
            loaded.nuisances->cf_scores.push_back(parse_real(fields[7], "s0_hat"));
            if (with_obs) loaded.nuisances->obs_scores->push_back(parse_real(fields[8], "obs_hat"));
        }
    }
    if (loaded.dataset.size() == 0) throw DataError(path + " has no data rows");
    loaded.dataset.params.n = loaded.dataset.size();
    return loaded;
}

void write_curves_csv(const std::string& path, const std::vector<Curve>& curves) {
    std::ofstream out = open_out(path);
    out << "model,mode,curve,param,x,y,ci_low,ci_high\n";
    for (const Curve& curve : curves) {
        for (const CurvePoint& p : curve.points) {
            out << curve.model << ',' << to_string(curve.mode) << ',' << curve.kind << ','
                << p.param << ',' << p.x << ',' << p.y << ',';
            if (p.ci_low) out << *p.ci_low;
            out << ',';
            if (p.ci_high) out << *p.ci_high;
            out << "\n";
        }
    }
    if (!out) throw DataError("failed while writing " + path);
}

void write_table_csv(const std::string& path, const Table2Output& table) {
    std::ofstream out = open_out(path);
    out << "group,method,cGFNR,cGFPR,oGFNR,oGFPR\n";
    for (const TableRow& row : table.rows) {
        out << row.group << ',' << row.method << ',' << row.cgfnr.value << ','
            << row.cgfpr.value << ',' << row.ogfnr.value << ',' << row.ogfpr.value << "\n";
    }
    if (!out) throw DataError("failed while writing " + path);
}

void write_reweigh_csv(const std::string& path, const std::vector<ReweighPoint>& points) {
    std::ofstream out = open_out(path);
    out << "k,obs_before,obs_after,cf_before,cf_after,obs_after_std_error,cf_after_std_error\n";
    for (const ReweighPoint& p : points) {
        out << p.k << ',' << p.obs_disparity_before << ',' << p.obs_disparity_after << ','
            << p.cf_disparity_before << ',' << p.cf_disparity_after << ','
            << p.obs_after_std_error << ',' << p.cf_after_std_error << "\n";
    }
    if (!out) throw DataError("failed while writing " + path);
}

std::string estimate_to_json(const Estimate& estimate) {
    return estimate_json(estimate).dump(2);
}

std::string group_metrics_to_json(const std::vector<GroupMetrics>& metrics) {
    json arr = json::array();
    for (const GroupMetrics& gm : metrics) {
        arr.push_back(json{{"group", gm.group},
                           {"n_rows", gm.n_rows},
                           {"base_rate_obs", estimate_json(gm.base_rate_obs)},
                           {"base_rate_cf", estimate_json(gm.base_rate_cf)},
                           {"tpr", mode_estimates_json(gm.tpr)},
                           {"fpr", mode_estimates_json(gm.fpr)},
                           {"precision", mode_estimates_json(gm.precision)},
                           {"gfnr_obs", estimate_json(gm.gfnr_obs)},
                           {"gfpr_obs", estimate_json(gm.gfpr_obs)},
                           {"gfnr_cf", estimate_json(gm.gfnr_cf)},
                           {"gfpr_cf", estimate_json(gm.gfpr_cf)}});
    }
    return arr.dump(2);
}

std::string balance_residuals_to_json(const std::vector<BalanceResidual>& residuals) {
    json arr = json::array();
    for (const BalanceResidual& r : residuals) {
        json item{{"condition", to_string(r.condition)},
                  {"y", r.y},
                  {"group", r.group},
                  {"lhs", nullable(r.lhs)},
                  {"rhs", nullable(r.rhs)},
                  {"residual", nullable(r.residual)},
                  {"std_error", r.std_error},
                  {"estimable", r.estimable},
                  {"note", r.note}};
        if (r.yhat) item["yhat"] = *r.yhat;
        arr.push_back(item);
    }
    return arr.dump(2);
}

std::string independence_report_to_json(const IndependenceReport& report) {
    json arr = json::array();
    for (const IndependenceCondition& cond : report.conditions) {
        json cells = json::array();
        for (const IndependenceCell& cell : cond.cells) {
            cells.push_back(json{{"stratum", cell.stratum},
                                 {"cell", cell.cell},
                                 {"deviation", nullable(cell.deviation)},
                                 {"std_error", cell.std_error},
                                 {"estimable", cell.estimable},
                                 {"flagged", cell.flagged}});
        }
        arr.push_back(json{{"name", cond.name},
                           {"family", cond.family},
                           {"max_abs_deviation", cond.max_abs_deviation},
                           {"max_dev_std_error", cond.max_dev_std_error},
                           {"pass", cond.pass},
                           {"cells", cells}});
    }
    return arr.dump(2);
}

std::string mixing_policy_to_json(const MixingPolicy& policy) {
    return json{{"lambda", {policy.lambda[0], policy.lambda[1]}},
                {"mu", {policy.mu[0], policy.mu[1]}},
                {"objective", policy.objective},
                {"grid_evaluations", policy.grid_evaluations}}
        .dump(2);
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json) {
    json manifest{{"tool", "cfeval"},
                  {"version", kVersion},
                  {"command", command},
                  {"config", json::parse(config_json)}};
    write_text_file(path, manifest.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
    if (!out) throw DataError("failed while writing " + path);
}

} // namespace cfeval
