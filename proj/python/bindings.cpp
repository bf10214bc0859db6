#include <algorithm>
#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfeval/io.hpp"
#include "cfeval/nuisance.hpp"

namespace py = pybind11;

namespace {

using namespace cfeval;

template <typename T>
py::array_t<T> to_array(const std::vector<T>& values) {
    py::array_t<T> out(static_cast<py::ssize_t>(values.size()));
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

template <typename T>
std::vector<T> to_vector(const py::array_t<T, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 1) throw py::value_error("expected a 1-d array");
    return std::vector<T>(arr.data(), arr.data() + arr.shape(0));
}

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BitArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

PositivityPolicy policy_arg(const std::string& name) {
    if (name == "reject") return PositivityPolicy::reject;
    if (name == "winsorize") return PositivityPolicy::winsorize;
    throw ParameterError("unknown positivity policy: " + name);
}

MeanMethod method_arg(const std::string& name) {
    if (name == "plugin") return MeanMethod::plugin;
    if (name == "ipw") return MeanMethod::ipw;
    if (name == "dr") return MeanMethod::dr;
    throw ParameterError("unknown method: " + name);
}

std::string estimate_repr(const Estimate& e) {
    std::ostringstream out;
    out << "Estimate(" << to_string(e.metric) << ", " << to_string(e.kind)
        << ", value=" << e.value << ", std_error=" << e.std_error << ")";
    return out.str();
}

py::object optional_estimate(const std::optional<Estimate>& e) {
    if (!e) return py::none();
    return py::cast(*e);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "counterfactual evaluation and fairness auditing for risk assessment models";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "CfevalError");

    py::class_<GeneratorParams>(m, "GeneratorParams")
        .def(py::init([](std::size_t n, double c, double k, double offset, std::uint64_t seed) {
                 return GeneratorParams{n, c, k, offset, seed};
             }),
             py::arg("n") = 100000, py::arg("c") = 0.1, py::arg("k") = 1.6,
             py::arg("offset") = -0.5, py::arg("seed") = 1)
        .def_readwrite("n", &GeneratorParams::n)
        .def_readwrite("c", &GeneratorParams::c)
        .def_readwrite("k", &GeneratorParams::k)
        .def_readwrite("offset", &GeneratorParams::offset)
        .def_readwrite("seed", &GeneratorParams::seed);

    py::class_<OracleDataset>(m, "Dataset")
        .def_property_readonly("z", [](const OracleDataset& d) { return to_array(d.z); })
        .def_property_readonly("a", [](const OracleDataset& d) { return to_array(d.a); })
        .def_property_readonly("y0", [](const OracleDataset& d) { return to_array(d.y0); })
        .def_property_readonly("y1", [](const OracleDataset& d) { return to_array(d.y1); })
        .def_property_readonly("t", [](const OracleDataset& d) { return to_array(d.t); })
        .def_property_readonly("y", [](const OracleDataset& d) { return to_array(d.y); })
        .def_readonly("params", &OracleDataset::params)
        .def("__len__", &OracleDataset::size);

    m.def(
        "generate",
        [](std::size_t n, double c, double k, double offset, std::uint64_t seed) {
            return generate(GeneratorParams{n, c, k, offset, seed});
        },
        py::arg("n") = 100000, py::arg("c") = 0.1, py::arg("k") = 1.6, py::arg("offset") = -0.5,
        py::arg("seed") = 1);

    m.def("summarize", [](const OracleDataset& d) {
        MomentSummary s = summarize(d);
        py::dict out;
        out["mean_y"] = s.mean_y;
        out["mean_y0"] = s.mean_y0;
        out["mean_y1"] = s.mean_y1;
        out["mean_t"] = s.mean_t;
        out["mean_t_given_a0"] = s.mean_t_given_a0 ? py::cast(*s.mean_t_given_a0) : py::none();
        out["mean_t_given_a1"] = s.mean_t_given_a1 ? py::cast(*s.mean_t_given_a1) : py::none();
        return out;
    });

    m.def(
        "subset",
        [](const OracleDataset& d, const std::vector<std::size_t>& rows) {
            return subset(d, rows);
        },
        py::arg("dataset"), py::arg("rows"));

    py::class_<NuisanceModels>(m, "NuisanceModels")
        .def_property_readonly("propensity_json",
                               [](const NuisanceModels& n) { return n.propensity.to_json(); })
        .def_property_readonly("counterfactual_json",
                               [](const NuisanceModels& n) { return n.counterfactual.to_json(); })
        .def_property_readonly("observational_json", [](const NuisanceModels& n) -> py::object {
            if (!n.observational) return py::none();
            return py::cast(n.observational->to_json());
        });

    py::class_<NuisanceSet>(m, "NuisanceSet")
        .def_property_readonly("propensity",
                               [](const NuisanceSet& n) { return to_array(n.propensity); })
        .def_property_readonly("cf_scores",
                               [](const NuisanceSet& n) { return to_array(n.cf_scores); })
        .def_property_readonly("obs_scores",
                               [](const NuisanceSet& n) -> py::object {
                                   if (!n.obs_scores) return py::none();
                                   return to_array(*n.obs_scores);
                               })
        .def_readonly("provenance", &NuisanceSet::provenance);

    m.def(
        "fit_nuisance_models",
        [](const OracleDataset& train, bool with_observational, bool obs_include_treatment,
           bool shift_correction) {
            return fit_nuisance_models(train, FitConfig{}, with_observational,
                                       obs_include_treatment, shift_correction);
        },
        py::arg("train"), py::arg("with_observational") = true,
        py::arg("obs_include_treatment") = false, py::arg("shift_correction") = false);

    m.def("attach_scores", &attach_scores, py::arg("dataset"), py::arg("models"));
    m.def("oracle_nuisances", &oracle_nuisances, py::arg("dataset"));

    m.def(
        "threshold_labels",
        [](const DoubleArray& scores, double threshold) {
            return to_array(threshold_labels(to_vector(scores), threshold));
        },
        py::arg("scores"), py::arg("threshold"));

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("std_error", &Estimate::std_error)
        .def_readonly("ci_low", &Estimate::ci_low)
        .def_readonly("ci_high", &Estimate::ci_high)
        .def_readonly("n_effective", &Estimate::n_effective)
        .def_property_readonly("kind", [](const Estimate& e) { return to_string(e.kind); })
        .def_property_readonly("metric", [](const Estimate& e) { return to_string(e.metric); })
        .def("clipped", &Estimate::clipped)
        .def("__repr__", &estimate_repr);

    m.def(
        "pseudo_outcomes",
        [](const OracleDataset& d, const NuisanceSet& n, double clip, const std::string& policy) {
            return to_array(pseudo_outcomes(d, n, clip, policy_arg(policy)));
        },
        py::arg("dataset"), py::arg("nuisances"), py::arg("clip") = 0.01,
        py::arg("policy") = "reject");

    m.def(
        "estimate_mean_y0",
        [](const OracleDataset& d, const NuisanceSet& n, const std::string& method, double clip,
           const std::string& policy) {
            return estimate_mean_y0(d, n, method_arg(method), clip, policy_arg(policy));
        },
        py::arg("dataset"), py::arg("nuisances"), py::arg("method") = "dr",
        py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "base_rate",
        [](const OracleDataset& d, const NuisanceSet* n, const std::string& mode, double clip,
           const std::string& policy) {
            return mode_base_rate(eval_mode_from_string(mode), d, n, clip, policy_arg(policy));
        },
        py::arg("dataset"), py::arg("nuisances") = nullptr, py::arg("mode") = "dr",
        py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "tpr",
        [](const OracleDataset& d, const BitArray& labels, const NuisanceSet* n,
           const std::string& mode, double clip, const std::string& policy) {
            return mode_tpr(eval_mode_from_string(mode), d, n, to_vector(labels), clip,
                            policy_arg(policy));
        },
        py::arg("dataset"), py::arg("labels"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "fpr",
        [](const OracleDataset& d, const BitArray& labels, const NuisanceSet* n,
           const std::string& mode, double clip, const std::string& policy) {
            return mode_fpr(eval_mode_from_string(mode), d, n, to_vector(labels), clip,
                            policy_arg(policy));
        },
        py::arg("dataset"), py::arg("labels"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "precision",
        [](const OracleDataset& d, const BitArray& labels, const NuisanceSet* n,
           const std::string& mode, double clip, const std::string& policy) {
            return optional_estimate(mode_precision(eval_mode_from_string(mode), d, n,
                                                    to_vector(labels), clip,
                                                    policy_arg(policy)));
        },
        py::arg("dataset"), py::arg("labels"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "calibration_bin",
        [](const OracleDataset& d, const DoubleArray& scores, double r1, double r2,
           const NuisanceSet* n, const std::string& mode, double clip,
           const std::string& policy) {
            return optional_estimate(mode_calibration_bin(eval_mode_from_string(mode), d, n,
                                                          to_vector(scores), r1, r2, clip,
                                                          policy_arg(policy)));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("r1"), py::arg("r2"),
        py::arg("nuisances") = nullptr, py::arg("mode") = "dr", py::arg("clip") = 0.01,
        py::arg("policy") = "reject");

    m.def(
        "gfnr",
        [](const OracleDataset& d, const DoubleArray& scores, const NuisanceSet* n,
           const std::string& mode, double clip, const std::string& policy) {
            return mode_gfnr(eval_mode_from_string(mode), d, n, to_vector(scores), clip,
                             policy_arg(policy));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "gfpr",
        [](const OracleDataset& d, const DoubleArray& scores, const NuisanceSet* n,
           const std::string& mode, double clip, const std::string& policy) {
            return mode_gfpr(eval_mode_from_string(mode), d, n, to_vector(scores), clip,
                             policy_arg(policy));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("clip") = 0.01, py::arg("policy") = "reject");

    py::class_<CurvePoint>(m, "CurvePoint")
        .def_readonly("param", &CurvePoint::param)
        .def_readonly("x", &CurvePoint::x)
        .def_readonly("y", &CurvePoint::y)
        .def_readonly("ci_low", &CurvePoint::ci_low)
        .def_readonly("ci_high", &CurvePoint::ci_high);

    py::class_<Curve>(m, "Curve")
        .def_readonly("model", &Curve::model)
        .def_property_readonly("mode", [](const Curve& c) { return to_string(c.mode); })
        .def_readonly("kind", &Curve::kind)
        .def_readonly("points", &Curve::points)
        .def_readonly("omitted", &Curve::omitted)
        .def_property_readonly("x",
                               [](const Curve& c) {
                                   std::vector<double> xs;
                                   for (const CurvePoint& p : c.points) xs.push_back(p.x);
                                   return to_array(xs);
                               })
        .def_property_readonly("y", [](const Curve& c) {
            std::vector<double> ys;
            for (const CurvePoint& p : c.points) ys.push_back(p.y);
            return to_array(ys);
        });

    m.def(
        "pr_curve",
        [](const OracleDataset& d, const DoubleArray& scores, const NuisanceSet* n,
           const std::string& mode, std::size_t thresholds, const std::string& model,
           double clip, const std::string& policy) {
            return pr_curve(eval_mode_from_string(mode), d, n, to_vector(scores),
                            threshold_grid(thresholds), model, clip, policy_arg(policy));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("thresholds") = 101, py::arg("model") = "model",
        py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "roc_curve",
        [](const OracleDataset& d, const DoubleArray& scores, const NuisanceSet* n,
           const std::string& mode, std::size_t thresholds, const std::string& model,
           double clip, const std::string& policy) {
            return roc_curve(eval_mode_from_string(mode), d, n, to_vector(scores),
                             threshold_grid(thresholds), model, clip, policy_arg(policy));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("thresholds") = 101, py::arg("model") = "model",
        py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def(
        "calibration_curve",
        [](const OracleDataset& d, const DoubleArray& scores, const NuisanceSet* n,
           const std::string& mode, int bins, const std::string& model, double clip,
           const std::string& policy) {
            return calibration_curve(eval_mode_from_string(mode), d, n, to_vector(scores), bins,
                                     model, clip, policy_arg(policy));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("nuisances") = nullptr,
        py::arg("mode") = "dr", py::arg("bins") = 10, py::arg("model") = "model",
        py::arg("clip") = 0.01, py::arg("policy") = "reject");

    m.def("area_under_pr", &area_under_pr, py::arg("curve"));
    m.def("area_under_roc", &area_under_roc, py::arg("curve"));
    m.def("max_pointwise_gap", &max_pointwise_gap, py::arg("a"), py::arg("b"));

    m.def(
        "group_metrics_json",
        [](const OracleDataset& d, const NuisanceSet& n, const DoubleArray& scores,
           const BitArray& labels, bool with_oracle, double clip, const std::string& policy) {
            return group_metrics_to_json(group_metrics(d, n, to_vector(scores),
                                                       to_vector(labels), with_oracle, clip,
                                                       policy_arg(policy)));
        },
        py::arg("dataset"), py::arg("nuisances"), py::arg("scores"), py::arg("labels"),
        py::arg("with_oracle") = true, py::arg("clip") = 0.01, py::arg("policy") = "winsorize");

    py::class_<BalanceResidual>(m, "BalanceResidual")
        .def_property_readonly("condition",
                               [](const BalanceResidual& r) { return to_string(r.condition); })
        .def_readonly("y", &BalanceResidual::y)
        .def_readonly("group", &BalanceResidual::group)
        .def_readonly("yhat", &BalanceResidual::yhat)
        .def_readonly("lhs", &BalanceResidual::lhs)
        .def_readonly("rhs", &BalanceResidual::rhs)
        .def_readonly("residual", &BalanceResidual::residual)
        .def_readonly("std_error", &BalanceResidual::std_error)
        .def_readonly("estimable", &BalanceResidual::estimable)
        .def_readonly("note", &BalanceResidual::note);

    m.def(
        "balance_bp",
        [](const OracleDataset& d, int group, int y, int bootstrap, std::uint64_t seed) {
            return balance_bp(d, group, y, bootstrap, seed);
        },
        py::arg("dataset"), py::arg("group"), py::arg("y"), py::arg("bootstrap") = 200,
        py::arg("seed") = 1);
    m.def(
        "balance_pp",
        [](const OracleDataset& d, const BitArray& labels, int group, int y, int yhat,
           int bootstrap, std::uint64_t seed) {
            return balance_pp(d, to_vector(labels), group, y, yhat, bootstrap, seed);
        },
        py::arg("dataset"), py::arg("labels"), py::arg("group"), py::arg("y"), py::arg("yhat"),
        py::arg("bootstrap") = 200, py::arg("seed") = 1);
    m.def(
        "balance_eo",
        [](const OracleDataset& d, const BitArray& labels, int group, int y, int bootstrap,
           std::uint64_t seed) {
            return balance_eo(d, to_vector(labels), group, y, bootstrap, seed);
        },
        py::arg("dataset"), py::arg("labels"), py::arg("group"), py::arg("y"),
        py::arg("bootstrap") = 200, py::arg("seed") = 1);

    py::class_<IndependenceCell>(m, "IndependenceCell")
        .def_readonly("stratum", &IndependenceCell::stratum)
        .def_readonly("cell", &IndependenceCell::cell)
        .def_readonly("deviation", &IndependenceCell::deviation)
        .def_readonly("std_error", &IndependenceCell::std_error)
        .def_readonly("estimable", &IndependenceCell::estimable)
        .def_readonly("flagged", &IndependenceCell::flagged);

    py::class_<IndependenceCondition>(m, "IndependenceCondition")
        .def_readonly("name", &IndependenceCondition::name)
        .def_readonly("family", &IndependenceCondition::family)
        .def_readonly("max_abs_deviation", &IndependenceCondition::max_abs_deviation)
        .def_readonly("max_dev_std_error", &IndependenceCondition::max_dev_std_error)
        .def_property_readonly("passed",
                               [](const IndependenceCondition& c) { return c.pass; })
        .def_readonly("cells", &IndependenceCondition::cells);

    py::class_<IndependenceReport>(m, "IndependenceReport")
        .def_readonly("conditions", &IndependenceReport::conditions);

    m.def(
        "independence_report",
        [](const OracleDataset& d, const BitArray& labels, int bootstrap, std::uint64_t seed) {
            return independence_report(d, to_vector(labels), bootstrap, seed);
        },
        py::arg("dataset"), py::arg("labels"), py::arg("bootstrap") = 200, py::arg("seed") = 1);

    py::class_<ReweighPlan>(m, "ReweighPlan")
        .def("weight", &ReweighPlan::weight, py::arg("a"), py::arg("y"))
        .def("row_weights", [](const ReweighPlan& p, const OracleDataset& d) {
            return to_array(p.row_weights(d));
        });

    m.def("kamiran_weights", &kamiran_weights, py::arg("dataset"));

    py::class_<MixingPolicy>(m, "MixingPolicy")
        .def_property_readonly("lambdas",
                               [](const MixingPolicy& p) {
                                   return py::make_tuple(p.lambda[0], p.lambda[1]);
                               })
        .def_property_readonly("mu",
                               [](const MixingPolicy& p) {
                                   return py::make_tuple(p.mu[0], p.mu[1]);
                               })
        .def_readonly("objective", &MixingPolicy::objective)
        .def_readonly("grid_evaluations", &MixingPolicy::grid_evaluations);

    m.def(
        "search_mixing_policy",
        [](const DoubleArray& scores, const BitArray& y, const BitArray& a, double step) {
            return search_mixing_policy(to_vector(scores), to_vector(y), to_vector(a), step);
        },
        py::arg("scores"), py::arg("y"), py::arg("a"), py::arg("step") = 0.01);

    m.def(
        "apply_mixing",
        [](const DoubleArray& scores, const BitArray& a, const MixingPolicy& policy,
           std::uint64_t seed) {
            Rng rng(seed);
            return to_array(apply_mixing(to_vector(scores), to_vector(a), policy, rng));
        },
        py::arg("scores"), py::arg("a"), py::arg("policy"), py::arg("seed"));

    py::class_<PostprocessResult>(m, "PostprocessResult")
        .def_property_readonly("adjusted_scores",
                               [](const PostprocessResult& r) {
                                   return to_array(r.adjusted_scores);
                               })
        .def_property_readonly("mixed",
                               [](const PostprocessResult& r) { return to_array(r.mixed); })
        .def_readonly("policy", &PostprocessResult::policy);

    m.def(
        "postprocess_equalized_odds",
        [](const OracleDataset& d, const DoubleArray& scores, std::uint64_t seed) {
            return postprocess_equalized_odds(d, to_vector(scores), seed);
        },
        py::arg("calibration"), py::arg("scores"), py::arg("seed") = 7);

    py::class_<ReweighPoint>(m, "ReweighPoint")
        .def_readonly("k", &ReweighPoint::k)
        .def_readonly("obs_disparity_before", &ReweighPoint::obs_disparity_before)
        .def_readonly("obs_disparity_after", &ReweighPoint::obs_disparity_after)
        .def_readonly("cf_disparity_before", &ReweighPoint::cf_disparity_before)
        .def_readonly("cf_disparity_after", &ReweighPoint::cf_disparity_after)
        .def_readonly("obs_after_std_error", &ReweighPoint::obs_after_std_error)
        .def_readonly("cf_after_std_error", &ReweighPoint::cf_after_std_error);

    m.def(
        "reweigh_experiment",
        [](const std::vector<double>& k_grid, double c, std::size_t n, std::uint64_t seed,
           int bootstrap) { return reweigh_experiment(k_grid, c, n, seed, bootstrap); },
        py::arg("k_grid"), py::arg("c") = 0.1, py::arg("n") = 100000, py::arg("seed") = 7,
        py::arg("bootstrap") = 200);
}
