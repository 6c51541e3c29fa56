#include "dscope/stats.hpp"

#include <algorithm>
#include <cmath>

#include "dscope/rng.hpp"

namespace dscope {

namespace {

/// Sample standard deviation scale factor cancels in Pearson, so plain
/// population moments are used throughout.
struct Moments {
    double mean;
    double stddev;
};

Moments moments(const Eigen::VectorXd& x) {
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size());
    return {mean, std::sqrt(var)};
}

}  // namespace

void MetricSeries::validate() const {
    if (static_cast<Eigen::Index>(ids.size()) != values.size())
        throw InvalidInputError("series ids and values have different lengths");
    if (values.size() < 3)
        throw InvalidInputError("series needs at least 3 values, got " +
                                std::to_string(values.size()));
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size())
        throw InvalidInputError("series lengths differ: " + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()));
    if (x.size() < 3)
        throw InvalidInputError("correlation needs at least 3 points");
    const Moments mx = moments(x);
    const Moments my = moments(y);
    if (mx.stddev == 0.0)
        throw DegenerateSeriesError("first series is constant");
    if (my.stddev == 0.0)
        throw DegenerateSeriesError("second series is constant");
    const double cov =
        ((x.array() - mx.mean) * (y.array() - my.mean)).sum() / static_cast<double>(x.size());
    return cov / (mx.stddev * my.stddev);
}

double pearson(const MetricSeries& x, const MetricSeries& y) {
    x.validate();
    y.validate();
    if (x.ids != y.ids)
        throw InvalidInputError("series are not aligned by example id");
    return pearson(x.values, y.values);
}

double BootstrapCdf::cdf_at(double v) const {
    const auto it = std::lower_bound(samples.begin(), samples.end(), v);
    return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
}

double BootstrapCdf::mean() const {
    double sum = 0.0;
    for (double s : samples) sum += s;
    return sum / static_cast<double>(samples.size());
}

BootstrapCdf bootstrap_correlation_cdf(const Eigen::VectorXd& x, double r, int n_shuffles,
                                       std::uint64_t seed, MixingForm form) {
    if (!(std::abs(r) < 1.0))
        throw InvalidInputError("target correlation must satisfy |r| < 1");
    if (n_shuffles < 1000) throw InvalidInputError("n_shuffles must be >= 1000");
    if (x.size() < 3) throw InvalidInputError("series needs at least 3 values");
    const Moments mx = moments(x);
    if (mx.stddev == 0.0) throw DegenerateSeriesError("series is constant");

    const Eigen::VectorXd z = (x.array() - mx.mean) / mx.stddev;
    const double c = r / std::sqrt(1.0 - r * r);
    const auto n = static_cast<std::size_t>(z.size());

    BootstrapCdf out;
    out.samples.resize(static_cast<std::size_t>(n_shuffles));
    std::vector<std::size_t> perm(n);
    Eigen::VectorXd mixed(z.size());
    for (int it = 0; it < n_shuffles; ++it) {
        Rng rng(derive_seed(seed, "shuffle:" + std::to_string(it)));
        perm = random_permutation(n, rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double shuffled = z[static_cast<Eigen::Index>(perm[i])];
            const double base = z[static_cast<Eigen::Index>(i)];
            mixed[static_cast<Eigen::Index>(i)] =
                form == MixingForm::scaled_base ? c * base + shuffled : c * shuffled + base;
        }
        out.samples[static_cast<std::size_t>(it)] = pearson(z, mixed);
    }
    std::sort(out.samples.begin(), out.samples.end());
    return out;
}

SignificanceVerdict significance_test(const Eigen::VectorXd& x, double r1, double r2,
                                      int n_shuffles, std::uint64_t seed, MixingForm form) {
    const BootstrapCdf cdf = bootstrap_correlation_cdf(x, r1, n_shuffles, seed, form);
    SignificanceVerdict verdict;
    verdict.r1 = r1;
    verdict.r2 = r2;
    verdict.cdf_at_r2 = cdf.cdf_at(r2);
    verdict.significant = verdict.cdf_at_r2 < 0.05 || verdict.cdf_at_r2 > 0.95;
    verdict.shuffles = n_shuffles;
    verdict.seed = seed;
    return verdict;
}

}  // namespace dscope
