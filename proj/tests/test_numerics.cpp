#include <doctest.h>

#include <persim/numerics.hpp>

#include "oracles.hpp"

using namespace persim;

TEST_CASE("incomplete beta basics") {
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x
    for (double x : {0.1, 0.25, 0.5, 0.9})
        CHECK(incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-14));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(incomplete_beta(2.5, 4.0, 0.3) ==
          doctest::Approx(1.0 - incomplete_beta(4.0, 2.5, 0.7)).epsilon(1e-13));
}

TEST_CASE("t CDF matches quadrature oracle over the full grid") {
    // Full grid: t in [-50, 50], df 1..30, 1e-6 agreement.
    for (int df = 1; df <= 30; ++df) {
        for (double t = -50.0; t <= 50.0; t += 2.5) {
            const double expected = oracles::t_two_sided_p_quadrature(t, df);
            const double actual = student_t_two_sided_p(t, df);
            CHECK(std::fabs(actual - expected) < 1e-6);
        }
    }
}

TEST_CASE("t CDF one-sided orientation") {
    CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5));
    CHECK(student_t_cdf(2.0, 5.0) > 0.9);
    CHECK(student_t_cdf(-2.0, 5.0) < 0.1);
    CHECK(student_t_cdf(2.0, 5.0) + student_t_cdf(-2.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("F quantile inverts the F CDF") {
    for (double d1 : {1.0, 4.0, 29.0}) {
        for (double d2 : {2.0, 10.0, 59.0}) {
            for (double p : {0.05, 0.5, 0.95, 0.975}) {
                const double q = f_quantile(p, d1, d2);
                CHECK(f_cdf(q, d1, d2) == doctest::Approx(p).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("sample variance uses n-1") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    CHECK(sample_variance(xs) == doctest::Approx(5.0 / 3.0));
    CHECK_THROWS_AS((void)sample_variance(std::vector<double>{1.0}), InvalidArgument);
}
