#include "cfeval/nuisance.hpp"

#include <sstream>

namespace cfeval {

ScoreModel fit_observational(const OracleDataset& train, bool include_treatment,
                             const FitConfig& config) {
    if (train.size() == 0) throw DataError("fit_observational requires a non-empty dataset");
    Eigen::MatrixXd X = design_matrix(train, true, include_treatment);
    return fit_logistic(X, train.y, {}, config, design_spec(true, include_treatment));
}

ScoreModel fit_propensity(const OracleDataset& train, const FitConfig& config) {
    if (train.size() == 0) throw DataError("fit_propensity requires a non-empty dataset");
    Eigen::MatrixXd X = design_matrix(train, true, false);
    return fit_logistic(X, train.t, {}, config, design_spec(true, false));
}

ScoreModel fit_counterfactual(const OracleDataset& train, bool shift_correction,
                              const FitConfig& config, double clip) {
    std::vector<std::size_t> controls;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train.t[i] == 0) controls.push_back(i);
    if (controls.empty())
        throw DataError("fit_counterfactual requires a non-empty control (t=0) subset");

    OracleDataset control_rows = subset(train, controls);
    std::vector<double> weights;
    if (shift_correction) {
        ScoreModel propensity = fit_propensity(train, config);
        Eigen::MatrixXd Xc = design_matrix(control_rows, true, false);
        std::vector<double> pi = propensity.score_rows(Xc);
        std::vector<std::size_t> offenders;
        for (std::size_t i = 0; i < pi.size(); ++i)
            if (pi[i] > 1.0 - clip) offenders.push_back(controls[i]);
        if (!offenders.empty()) {
            std::ostringstream msg;
            msg << "shift correction requires propensity <= " << (1.0 - clip) << "; "
                << offenders.size() << " control row(s) violate it (first: row "
                << offenders.front() << ")";
            throw PositivityError(msg.str(), offenders);
        }
        weights.reserve(pi.size());
        for (double p : pi) weights.push_back(1.0 / (1.0 - p));
    }

    Eigen::MatrixXd X = design_matrix(control_rows, true, false);
    return fit_logistic(X, control_rows.y, weights, config, design_spec(true, false));
}

NuisanceModels fit_nuisance_models(const OracleDataset& train, const FitConfig& config,
                                   bool with_observational, bool obs_include_treatment,
                                   bool shift_correction) {
    NuisanceModels models;
    models.propensity = fit_propensity(train, config);
    models.counterfactual = fit_counterfactual(train, shift_correction, config);
    if (with_observational)
        models.observational = fit_observational(train, obs_include_treatment, config);
    return models;
}

namespace {

std::vector<double> score_dataset(const OracleDataset& dataset, const ScoreModel& model) {
    bool include_a = false, include_t = false;
    for (const std::string& name : model.feature_spec) {
        if (name == "z") continue;
        if (name == "a") include_a = true;
        else if (name == "t") include_t = true;
        else throw AlignmentError("model feature '" + name + "' not present in dataset");
    }
    Eigen::MatrixXd X = design_matrix(dataset, include_a, include_t);
    if (design_spec(include_a, include_t) != model.feature_spec)
        throw AlignmentError("model feature_spec does not match dataset column order (z[,a][,t])");
    return model.score_rows(X);
}

} // namespace

NuisanceSet attach_scores(const OracleDataset& dataset, const NuisanceModels& models) {
    NuisanceSet out;
    out.propensity = score_dataset(dataset, models.propensity);
    out.cf_scores = score_dataset(dataset, models.counterfactual);
    if (models.observational) out.obs_scores = score_dataset(dataset, *models.observational);
    std::ostringstream prov;
    prov << "propensity=logistic,counterfactual=logistic(control rows)";
    if (models.observational) prov << ",observational=logistic";
    out.provenance = prov.str();
    return out;
}

NuisanceSet oracle_nuisances(const OracleDataset& dataset) {
    NuisanceSet out;
    out.propensity.resize(dataset.size());
    out.cf_scores.resize(dataset.size());
    std::vector<double> obs(dataset.size());
    const GeneratorParams& params = dataset.params;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        double pi = true_propensity(dataset.z[i], dataset.a[i], params);
        double s0 = true_s0(dataset.z[i], params);
        double s1 = true_s1(dataset.z[i], params);
        out.propensity[i] = pi;
        out.cf_scores[i] = s0;
        obs[i] = pi * s1 + (1.0 - pi) * s0; // analytic E[Y | z, a]
    }
    out.obs_scores = std::move(obs);
    out.provenance = "oracle";
    return out;
}

void enforce_positivity(std::vector<double>& propensity, double clip, PositivityPolicy policy) {
    if (!(clip > 0.0 && clip < 1.0)) throw ParameterError("clip must lie in (0, 1)");
    double bound = 1.0 - clip;
    if (policy == PositivityPolicy::winsorize) {
        for (double& p : propensity)
            if (p > bound) p = bound;
        return;
    }
    std::vector<std::size_t> offenders;
    for (std::size_t i = 0; i < propensity.size(); ++i)
        if (propensity[i] > bound) offenders.push_back(i);
    if (!offenders.empty()) {
        std::ostringstream msg;
        msg << "positivity violated: " << offenders.size() << " row(s) with propensity > "
            << bound << " (rows";
        for (std::size_t i = 0; i < offenders.size() && i < 10; ++i) msg << ' ' << offenders[i];
        if (offenders.size() > 10) msg << " ...";
        msg << "); winsorize or filter near-certain cases";
        throw PositivityError(msg.str(), offenders);
    }
}

NuisanceSet subset(const NuisanceSet& nuisances, const std::vector<std::size_t>& rows) {
    NuisanceSet out;
    out.propensity = take(nuisances.propensity, rows);
    out.cf_scores = take(nuisances.cf_scores, rows);
    if (nuisances.obs_scores) out.obs_scores = take(*nuisances.obs_scores, rows);
    out.provenance = nuisances.provenance;
    return out;
}

} // namespace cfeval
