#include <doctest.h>

#include <cmath>
#include <random>

#include "dscope/rng.hpp"
#include "dscope/stats.hpp"

using namespace dscope;

namespace {

Eigen::VectorXd standard_normal_vector(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = standard_normal(rng);
    return x;
}

/// Naive two-pass Pearson, the reference the production kernel must agree
/// with to 1e-12.
double naive_pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// Independent bootstrap reimplementation with a different RNG (std::minstd_rand
/// + std::shuffle) and the naive correlation. Returns the mean of the
/// empirical distribution.
double oracle_bootstrap_mean(const Eigen::VectorXd& x, double r, int shuffles,
                             unsigned seed) {
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / double(x.size()));
    Eigen::VectorXd z = (x.array() - mean) / sd;
    const double c = r / std::sqrt(1.0 - r * r);

    std::minstd_rand rng(seed);
    std::vector<double> pool(z.data(), z.data() + z.size());
    double total = 0.0;
    for (int it = 0; it < shuffles; ++it) {
        std::shuffle(pool.begin(), pool.end(), rng);
        Eigen::VectorXd mixed(z.size());
        for (int i = 0; i < z.size(); ++i) mixed[i] = c * z[i] + pool[size_t(i)];
        total += naive_pearson(z, mixed);
    }
    return total / shuffles;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("pearson: exact endpoints and the hand-checkable value") {
    Eigen::VectorXd x(3), y(3);
    x << 1, 2, 3;

    y << 1, 2, 3;
    CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));

    y << -1, -2, -3;
    CHECK(pearson(x, y) == doctest::Approx(-1.0).epsilon(1e-12));

    y << 1, 2, 4;
    // closed form: cov = 3/1, sxx = 2, syy = 14/3 (population sums)
    CHECK(pearson(x, y) == doctest::Approx(3.0 / std::sqrt(2.0 * 14.0 / 3.0)).epsilon(1e-12));
    CHECK(pearson(x, y) == doctest::Approx(0.9819805060619659).epsilon(1e-9));
}

TEST_CASE("pearson: degenerate and misaligned input") {
    Eigen::VectorXd x(3), flat(3), y4(4);
    x << 1, 2, 3;
    flat << 2, 2, 2;
    CHECK_THROWS_AS(pearson(x, flat), DegenerateSeriesError);
    CHECK_THROWS_AS(pearson(flat, x), DegenerateSeriesError);
    CHECK_THROWS_AS(pearson(x, y4), InvalidInputError);
    Eigen::VectorXd two(2);
    two << 1, 2;
    CHECK_THROWS_AS(pearson(two, two), InvalidInputError);
}

TEST_CASE("pearson: MetricSeries overload enforces id alignment") {
    MetricSeries a{{"e1", "e2", "e3"}, Eigen::VectorXd(3)};
    MetricSeries b{{"e1", "e2", "e3"}, Eigen::VectorXd(3)};
    a.values << 1, 2, 3;
    b.values << 2, 4, 9;
    CHECK(pearson(a, b) == doctest::Approx(naive_pearson(a.values, b.values)));

    MetricSeries misaligned{{"e1", "eX", "e3"}, b.values};
    CHECK_THROWS_AS(pearson(a, misaligned), InvalidInputError);
}

TEST_CASE("pearson agrees with the naive reference on random input") {
    Rng rng(31337);
    for (int it = 0; it < 100; ++it) {
        const int n = 3 + static_cast<int>(uniform_below(rng, 200));
        Eigen::VectorXd x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = uniform(rng, -5, 5);
            y[i] = uniform(rng, -5, 5);
        }
        CHECK(pearson(x, y) == doctest::Approx(naive_pearson(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("bootstrap: r=0 mixes to a pure shuffle centred on zero") {
    const auto x = standard_normal_vector(400, 11);
    const BootstrapCdf cdf = bootstrap_correlation_cdf(x, 0.0, 2000, 5);
    CHECK(std::abs(cdf.mean()) < 0.05);
    CHECK(cdf.cdf_at(0.0) == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("bootstrap: empirical CDF is monotone from 0 to 1") {
    const auto x = standard_normal_vector(100, 12);
    const BootstrapCdf cdf = bootstrap_correlation_cdf(x, 0.4, 1000, 7);
    CHECK(cdf.cdf_at(-1.01) == 0.0);
    CHECK(cdf.cdf_at(1.01) == 1.0);
    double prev = -1.0;
    for (double v = -1.0; v <= 1.0; v += 0.05) {
        const double now = cdf.cdf_at(v);
        CHECK(now >= prev);
        prev = now;
    }
}

TEST_CASE("bootstrap: identical seeds give identical distributions") {
    const auto x = standard_normal_vector(200, 13);
    const BootstrapCdf a = bootstrap_correlation_cdf(x, 0.3, 1000, 99);
    const BootstrapCdf b = bootstrap_correlation_cdf(x, 0.3, 1000, 99);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
}

TEST_CASE("bootstrap: input validation") {
    const auto x = standard_normal_vector(50, 14);
    CHECK_THROWS_AS(bootstrap_correlation_cdf(x, 1.0, 1000, 0), InvalidInputError);
    CHECK_THROWS_AS(bootstrap_correlation_cdf(x, -1.0, 1000, 0), InvalidInputError);
    CHECK_THROWS_AS(bootstrap_correlation_cdf(x, 0.5, 999, 0), InvalidInputError);
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(50, 3.0);
    CHECK_THROWS_AS(bootstrap_correlation_cdf(flat, 0.5, 1000, 0), DegenerateSeriesError);
}

TEST_CASE("bootstrap converges to the target r (independent-RNG oracle agrees)") {
    // n = 1600 like the full SummEval runs; corrected mixing must converge to
    // r itself.
    const auto x = standard_normal_vector(1600, 20);
    const double r = 0.5;
    const BootstrapCdf cdf = bootstrap_correlation_cdf(x, r, 10000, 21);
    CHECK(std::abs(cdf.mean() - r) < 0.03);

    const double oracle_mean = oracle_bootstrap_mean(x, r, 2000, 12345u);
    CHECK(std::abs(oracle_mean - r) < 0.03);
    CHECK(std::abs(oracle_mean - cdf.mean()) < 0.02);
}

TEST_CASE("literal mixing form converges to sqrt(1 - r^2), not r") {
    const auto x = standard_normal_vector(1600, 22);
    const double r = 0.5;
    const BootstrapCdf cdf =
        bootstrap_correlation_cdf(x, r, 3000, 23, MixingForm::scaled_shuffle);
    const double expected = std::sqrt(1.0 - r * r);  // ~0.866
    CHECK(std::abs(cdf.mean() - expected) < 0.03);
    CHECK(std::abs(cdf.mean() - r) > 0.2);
}

TEST_CASE("significance: r1 == r2 is never significant") {
    const auto x = standard_normal_vector(300, 30);
    for (double r : {-0.9, -0.5, 0.0, 0.4, 0.9}) {
        const SignificanceVerdict v = significance_test(x, r, r, 1000, 31);
        CHECK_FALSE(v.significant);
        CHECK(v.cdf_at_r2 == doctest::Approx(0.5).epsilon(0.3));
    }
}

TEST_CASE("significance: a wide gap on n=1600 is significant") {
    const auto x = standard_normal_vector(1600, 32);
    const SignificanceVerdict v = significance_test(x, 0.3, 0.6, 2000, 33);
    CHECK(v.significant);
    CHECK(v.cdf_at_r2 > 0.95);

    // and in the other direction
    const SignificanceVerdict down = significance_test(x, 0.6, 0.3, 2000, 34);
    CHECK(down.significant);
    CHECK(down.cdf_at_r2 < 0.05);
}

TEST_CASE("significance: the SOLAR-scale 3.3% gap sits under the n=1600 threshold") {
    // At n = 1600 the two one-sided 5% tests put the decision boundary near a
    // 3-4% correlation difference; a 0.298 -> 0.331 gap must stay below it
    // while a 5-point gap clears it.
    const auto x = standard_normal_vector(1600, 40);
    const SignificanceVerdict close = significance_test(x, 0.298, 0.331, 5000, 41);
    CHECK_FALSE(close.significant);
    CHECK(close.cdf_at_r2 > 0.5);  // above the centre, just not extreme

    const SignificanceVerdict wide = significance_test(x, 0.298, 0.298 + 0.05, 5000, 41);
    CHECK(wide.significant);
}

TEST_CASE("significance: verdict bookkeeping fields") {
    const auto x = standard_normal_vector(100, 35);
    const SignificanceVerdict v = significance_test(x, 0.2, 0.25, 1000, 36);
    CHECK(v.r1 == 0.2);
    CHECK(v.r2 == 0.25);
    CHECK(v.shuffles == 1000);
    CHECK(v.seed == 36);
    CHECK(v.significant == (v.cdf_at_r2 < 0.05 || v.cdf_at_r2 > 0.95));
}

TEST_CASE("MetricSeries validation") {
    MetricSeries s{{"a", "b"}, Eigen::VectorXd(3)};
    CHECK_THROWS_AS(s.validate(), InvalidInputError);
    MetricSeries short_series{{"a", "b"}, Eigen::VectorXd(2)};
    CHECK_THROWS_AS(short_series.validate(), InvalidInputError);
}

}  // TEST_SUITE
