#include "cfeval/datagen.hpp"

#include <cmath>

#include "cfeval/rng.hpp"

namespace cfeval {

namespace {
constexpr std::size_t kBlockRows = 8192;
}

void validate(const GeneratorParams& params) {
    if (params.n == 0) throw ParameterError("n must be at least 1");
    if (!(params.c >= 0.0 && params.c <= 1.0)) throw ParameterError("c must lie in [0, 1]");
    if (!(params.k >= 0.0)) throw ParameterError("k must be nonnegative");
    if (!std::isfinite(params.offset)) throw ParameterError("offset must be finite");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double true_s0(double z, const GeneratorParams& params) { return sigmoid(z + params.offset); }

double true_s1(double z, const GeneratorParams& params) {
    return params.c * sigmoid(z + params.offset);
}

double true_propensity(double z, double a, const GeneratorParams& params) {
    return sigmoid(z + params.offset + params.k * a);
}

OracleDataset generate(const GeneratorParams& params) {
    validate(params);
    OracleDataset data;
    data.params = params;
    data.z.resize(params.n);
    data.a.resize(params.n);
    data.y0.resize(params.n);
    data.y1.resize(params.n);
    data.t.resize(params.n);
    data.y.resize(params.n);

    Rng root(params.seed);
    std::size_t n_blocks = (params.n + kBlockRows - 1) / kBlockRows;
    for (std::size_t block = 0; block < n_blocks; ++block) {
        Rng rng = root.substream(block);
        std::size_t begin = block * kBlockRows;
        std::size_t end = std::min(params.n, begin + kBlockRows);
        for (std::size_t i = begin; i < end; ++i) {
            double z = rng.normal();
            std::uint8_t a = rng.bernoulli(0.5) ? 1 : 0;
            double p0 = sigmoid(z + params.offset);
            std::uint8_t y0 = rng.bernoulli(p0) ? 1 : 0;
            std::uint8_t y1 = rng.bernoulli(params.c * p0) ? 1 : 0;
            std::uint8_t t = rng.bernoulli(sigmoid(z + params.offset + params.k * a)) ? 1 : 0;
            data.z[i] = z;
            data.a[i] = a;
            data.y0[i] = y0;
            data.y1[i] = y1;
            data.t[i] = t;
            data.y[i] = t ? y1 : y0;
        }
    }
    return data;
}

MomentSummary summarize(const OracleDataset& dataset) {
    if (dataset.size() == 0) throw DataError("summarize requires a non-empty dataset");
    MomentSummary m;
    double sum_y = 0, sum_y0 = 0, sum_y1 = 0, sum_t = 0;
    double sum_t_a0 = 0, sum_t_a1 = 0;
    std::size_t n_a0 = 0, n_a1 = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        sum_y += dataset.y[i];
        sum_y0 += dataset.y0[i];
        sum_y1 += dataset.y1[i];
        sum_t += dataset.t[i];
        if (dataset.a[i]) {
            ++n_a1;
            sum_t_a1 += dataset.t[i];
        } else {
            ++n_a0;
            sum_t_a0 += dataset.t[i];
        }
    }
    double n = static_cast<double>(dataset.size());
    m.mean_y = sum_y / n;
    m.mean_y0 = sum_y0 / n;
    m.mean_y1 = sum_y1 / n;
    m.mean_t = sum_t / n;
    if (n_a0 > 0) m.mean_t_given_a0 = sum_t_a0 / static_cast<double>(n_a0);
    if (n_a1 > 0) m.mean_t_given_a1 = sum_t_a1 / static_cast<double>(n_a1);
    return m;
}

OracleDataset subset(const OracleDataset& dataset, const std::vector<std::size_t>& rows) {
    OracleDataset out;
    out.params = dataset.params;
    out.z = take(dataset.z, rows);
    out.a = take(dataset.a, rows);
    out.y0 = take(dataset.y0, rows);
    out.y1 = take(dataset.y1, rows);
    out.t = take(dataset.t, rows);
    out.y = take(dataset.y, rows);
    return out;
}

} // namespace cfeval
