#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dscope/errors.hpp"

namespace dscope {

/// A per-example value series (human scores or model scores) aligned by id.
struct MetricSeries {
    std::vector<std::string> ids;
    Eigen::VectorXd values;

    /// Throws on length mismatch, length < 3.
    void validate() const;
};

/// Standard product-moment correlation. Throws DegenerateSeriesError on a
/// constant series; InvalidInputError on misaligned input.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double pearson(const MetricSeries& x, const MetricSeries& y);

/// How the shuffled series is mixed with the base series when building the
/// bootstrap distribution. `scaled_base` mixes c*x + shuffle(x) with
/// c = r/sqrt(1-r^2), for which corr(x, mix) converges to r as the text
/// asserts; `scaled_shuffle` is the literal printed form c*shuffle(x) + x,
/// kept for audit (its correlation converges to sqrt(1-r^2) instead).
enum class MixingForm { scaled_base, scaled_shuffle };

/// Empirical distribution of corr(x, mix) over random shuffles.
struct BootstrapCdf {
    std::vector<double> samples;  // sorted ascending

    /// Fraction of samples strictly below v: the empirical P(rho < v).
    double cdf_at(double v) const;
    double mean() const;
};

/// Builds P(rho | r, x) from n_shuffles random permutations of x. x is
/// standardized before mixing (Pearson is affine-invariant, the mixing
/// identity needs comparable scales). Each shuffle's RNG is derived from
/// (seed, shuffle index), so iterations are independent and order-free.
BootstrapCdf bootstrap_correlation_cdf(const Eigen::VectorXd& x, double r, int n_shuffles,
                                       std::uint64_t seed,
                                       MixingForm form = MixingForm::scaled_base);

struct SignificanceVerdict {
    double r1 = 0.0;
    double r2 = 0.0;
    double cdf_at_r2 = 0.0;
    bool significant = false;  // cdf < 0.05 or cdf > 0.95
    int shuffles = 0;
    std::uint64_t seed = 0;
};

/// Two one-sided 5% tests: the difference between r1 and r2 is significant
/// when r2 is an unlikely draw from P(rho | r1, x).
SignificanceVerdict significance_test(const Eigen::VectorXd& x, double r1, double r2,
                                      int n_shuffles, std::uint64_t seed,
                                      MixingForm form = MixingForm::scaled_base);

}  // namespace dscope
