#include <doctest.h>

#include <cmath>
#include <random>

#include "stcorr/core_model.hpp"

using namespace stcorr;

TEST_CASE("path loss at reference distances")
{
    NetworkParams p{1.0, 4.0, 1.0, {}};
    CHECK(path_loss(0.0, p) == doctest::Approx(1.0));
    CHECK(path_loss(2.0, p) == doctest::Approx(1.0 / 17.0).epsilon(1e-15));
    p.epsilon = 0.0;
    CHECK(path_loss(1.0, p) == 1.0);
    CHECK_THROWS_AS(path_loss(0.0, p), std::domain_error);
    CHECK_THROWS_AS(path_loss(-1.0, p), std::invalid_argument);
}

TEST_CASE("path loss is monotone and scales for eps = 0")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(0.01, 20.0), c(0.1, 10.0), a(2.1, 6.0);
    for (int i = 0; i < 2000; ++i) {
        const NetworkParams bounded{1.0, a(rng), 0.7, {}};
        const double x = d(rng), y = d(rng);
        const double lo = std::min(x, y), hi = std::max(x, y);
        if (lo < hi) CHECK(path_loss(lo, bounded) > path_loss(hi, bounded));

        const NetworkParams singular{1.0, bounded.alpha, 0.0, {}};
        const double k = c(rng);
        CHECK(path_loss(k * x, singular) ==
              doctest::Approx(std::pow(k, -singular.alpha) * path_loss(x, singular)).epsilon(1e-12));
    }
}

TEST_CASE("parameter validation")
{
    CHECK_NOTHROW(NetworkParams{}.validate());
    CHECK_THROWS_AS((NetworkParams{0.0, 4.0, 0.0, {}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NetworkParams{1.0, 2.0, 0.0, {}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NetworkParams{1.0, 4.0, -0.1, {}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((NetworkParams{1.0, 4.0, 0.0, {}}.require_bounded_path_loss()), std::domain_error);
    CHECK_NOTHROW((NetworkParams{1.0, 4.0, 0.5, {}}.require_bounded_path_loss()));

    FadingModel bad;
    bad.second_moment = 0.5;
    CHECK_THROWS_AS((NetworkParams{1.0, 4.0, 0.0, bad}.validate()), std::invalid_argument);
}

TEST_CASE("threshold conversion")
{
    CHECK(SirThreshold::from_db(0.0).linear() == 1.0);
    CHECK(SirThreshold::from_db(10.0).linear() == doctest::Approx(10.0));
    CHECK(SirThreshold::from_db(-5.0).linear() == doctest::Approx(0.31622776601683794));
    CHECK(SirThreshold::from_linear(100.0).db() == doctest::Approx(20.0));
    CHECK_THROWS(SirThreshold::from_linear(0.0));
}

TEST_CASE("laplace factor is finite at the receiver")
{
    CHECK(laplace_factor_sq(1.0, 0.0, 4.0, 0.0) == 0.0);
    CHECK(laplace_factor_sq(1.0, 0.0, 4.0, 1.0) == doctest::Approx(0.5));
    CHECK(laplace_factor_sq(2.0, 4.0, 4.0, 0.0) == doctest::Approx(16.0 / 18.0));
    CHECK(pow_alpha_from_sq(9.0, 3.0) == doctest::Approx(27.0));
}

TEST_CASE("fading sampler moments")
{
    std::mt19937_64 rng(12345);
    const long n = 1'000'000;
    double s1 = 0.0, s2 = 0.0;
    bool positive = true;
    for (long i = 0; i < n; ++i) {
        const double h = fading_power_sample(rng);
        positive = positive && h > 0.0;
        s1 += h;
        s2 += h * h;
    }
    const FadingModel f = FadingModel::rayleigh();
    // sd of h is 1, sd of h^2 is sqrt(24 - 4) = sqrt(20)
    CHECK(std::abs(s1 / n - f.first_moment) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(s2 / n - f.second_moment) < 5.0 * std::sqrt(20.0 / n));
    CHECK(std::abs(s1 / n - 1.0) < 0.01);
    CHECK(std::abs(s2 / n - 2.0) < 0.03);
    CHECK(positive);
}

TEST_CASE("unit uniform uses 53 bits and stays below one")
{
    struct MaxEngine {
        using result_type = unsigned long long;
        static constexpr result_type min() { return 0; }
        static constexpr result_type max() { return ~0ULL; }
        result_type operator()() { return ~0ULL; }
    } top;
    CHECK(unit_uniform(top) < 1.0);
    CHECK(unit_uniform(top) == 1.0 - 0x1.0p-53);
}
