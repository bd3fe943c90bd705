#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mgems/forecast.hpp"

using namespace mgems;

namespace {

Eigen::VectorXd bell_day(int steps, double amplitude, double width = 2.8) {
    Eigen::VectorXd d(steps);
    const double hps = 24.0 / steps;
    for (int s = 0; s < steps; ++s) {
        const double h = s * hps;
        double v = amplitude * std::exp(-(h - 12.0) * (h - 12.0) / (2.0 * width * width));
        d[s] = v < 1e-4 ? 0.0 : v;
    }
    return d;
}

}  // namespace

TEST_CASE("single-sample exact interpolation at lambda = 0") {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.1;
    Eigen::VectorXd y(1);
    y << 1.0;
    auto m = fit_krr(X, y, 1.0, 0.0, 1);
    const double window[] = {0.3};
    CHECK(m.predict_increment(window, 0.1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-sample ridge shrinkage: (1 + lambda) w = 1") {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.1;
    Eigen::VectorXd y(1);
    y << 1.0;
    auto m = fit_krr(X, y, 1.0, 0.5, 1);
    const double window[] = {0.3};
    CHECK(m.predict_increment(window, 0.1) == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
}

TEST_CASE("near-interpolation of a linear map") {
    // Labels 2x at three points; large bandwidth, tiny ridge.
    Eigen::MatrixXd X(3, 2);
    X << 0.0, 0.0, 0.5, 0.0, 1.0, 0.0;
    Eigen::VectorXd y(3);
    y << 0.0, 1.0, 2.0;
    auto m = fit_krr(X, y, 10.0, 1e-8, 1);
    for (int i = 0; i < 3; ++i) {
        const double window[] = {X(i, 0)};
        CHECK(std::abs(m.predict_increment(window, 0.0) - y[i]) < 1e-3);
    }
}

TEST_CASE("interpolation property over random distinct points") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd X(6, 3);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) {
        X(i, 0) = unif(rng);
        X(i, 1) = unif(rng);
        X(i, 2) = i / 6.0;
        y[i] = unif(rng) - 0.5;
    }
    auto m = fit_krr(X, y, 0.7, 0.0, 2);
    for (int i = 0; i < 6; ++i) {
        const double window[] = {X(i, 0), X(i, 1)};
        const double pred = m.predict_increment(window, X(i, 2));
        CHECK(std::abs(pred - y[i]) <= 1e-8 * std::max(1.0, std::abs(y[i])));
    }
}

TEST_CASE("gram matrix is symmetric PSD on random inputs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = 20;
    Eigen::MatrixXd X(n, 4);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 4; ++j) X(i, j) = unif(rng);
    KrrModel probe;
    probe.bandwidth = 0.9;
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            K(i, j) = probe.kernel(X.row(i).transpose(), X.row(j).transpose());
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("duplicate inputs with lambda = 0 are singular") {
    Eigen::MatrixXd X(2, 2);
    X << 0.3, 0.1, 0.3, 0.1;
    Eigen::VectorXd y(2);
    y << 1.0, -1.0;
    CHECK_THROWS_AS(fit_krr(X, y, 1.0, 0.0, 1), ForecastError);
}

TEST_CASE("prediction vanishes far from all samples") {
    Eigen::MatrixXd X(2, 2);
    X << 0.1, 0.0, 0.2, 0.5;
    Eigen::VectorXd y(2);
    y << 1.0, -2.0;
    auto m = fit_krr(X, y, 0.5, 1e-6, 1);
    const double window[] = {50.0};
    CHECK(std::abs(m.predict_increment(window, 0.9)) < 1e-12);
}

TEST_CASE("symmetric labels cancel at the midpoint") {
    Eigen::MatrixXd X(2, 2);
    X << -1.0, 0.0, 1.0, 0.0;
    Eigen::VectorXd y(2);
    y << 0.7, -0.7;
    auto m = fit_krr(X, y, 0.8, 1e-9, 1);
    const double window[] = {0.0};
    CHECK(std::abs(m.predict_increment(window, 0.0)) < 1e-12);
}

TEST_CASE("wrong window length throws") {
    Eigen::MatrixXd X(1, 3);
    X << 0.1, 0.2, 0.0;
    Eigen::VectorXd y(1);
    y << 0.5;
    auto m = fit_krr(X, y, 1.0, 0.0, 2);
    const double window[] = {0.1};
    CHECK_THROWS_AS(m.predict_increment(window, 0.0), ForecastError);
}

TEST_CASE("bell dictionary shape") {
    auto dict = bell_dictionary(24, 8);
    CHECK(dict.size() == 8);
    CHECK(dict.steps() == 24);
    CHECK(dict.profiles.minCoeff() >= 0.0);
    CHECK(dict.profiles.maxCoeff() <= 1.0);
    CHECK(dict.profiles(7, 12) == doctest::Approx(1.0));   // full-scale bell peaks at noon
    CHECK(dict.profiles(0, 12) == doctest::Approx(0.125));
    CHECK(dict.profiles(3, 0) == 0.0);  // night region exactly zero
}

TEST_CASE("solar anchor averaging") {
    // Dictionary with known next-step value 0.6 closest to previous 0.58.
    ProfileDictionary dict;
    dict.profiles.resize(2, 4);
    dict.profiles << 0.1, 0.58, 0.6, 0.2, 0.9, 0.9, 0.9, 0.9;
    CHECK(solar_forecast_step(0.5, dict, 0.58, 1) == doctest::Approx(0.55));

    // Zero region: krr 0 and all profiles 0 gives 0.
    ProfileDictionary night;
    night.profiles = Eigen::MatrixXd::Zero(3, 4);
    CHECK(solar_forecast_step(0.0, night, 0.0, 2) == 0.0);

    // Equidistant profiles anchor to the lower index.
    ProfileDictionary tie;
    tie.profiles.resize(2, 3);
    tie.profiles << 0.4, 0.4, 0.9, 0.6, 0.6, 0.1;
    // previous 0.5 is equidistant from 0.4 and 0.6 at step 0; profile 0 wins,
    // so the anchor is 0.4 (profile 1 would give 0.3).
    CHECK(solar_forecast_step(0.0, tie, 0.5, 0) == doctest::Approx(0.2));
}

TEST_CASE("anchored forecast lies between krr value and anchor") {
    auto dict = bell_dictionary(24, 8);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double krr = unif(rng);
        const double prev = unif(rng);
        const int step = static_cast<int>(rng() % 24);
        const int n = step % 24;
        const int i_star = dict.nearest(prev, n);
        const double anchor = dict.profiles(i_star, (n + 1) % 24);
        const double out = solar_forecast_step(krr, dict, prev, step);
        CHECK(out >= std::min(krr, anchor) - 1e-15);
        CHECK(out <= std::max(krr, anchor) + 1e-15);
    }
}

TEST_CASE("constant profile rolls out flat") {
    std::vector<Eigen::VectorXd> days{Eigen::VectorXd::Constant(24, 0.4),
                                      Eigen::VectorXd::Constant(24, 0.4)};
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    krr_samples_from_days(days, 3, X, y);
    auto m = fit_krr(X, y, 1.0, 1e-8, 3);
    const double window[] = {0.4, 0.4, 0.4};
    auto traj = base_load_rollout(m, window, 5, 10, 24);
    for (double v : traj) CHECK(v == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("rollout of one step equals one prediction") {
    std::vector<Eigen::VectorXd> days{bell_day(24, 1.0), bell_day(24, 0.5)};
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    krr_samples_from_days(days, 3, X, y);
    auto m = fit_krr(X, y, 0.5, 1e-6, 3);
    const double window[] = {0.1, 0.2, 0.3};
    auto traj = base_load_rollout(m, window, 8, 1, 24);
    const double inc = m.predict_increment(window, 8.0 / 24.0);
    CHECK(traj[0] == doctest::Approx(0.3 + inc));
}

TEST_CASE("rollout on a training day stays close to it") {
    // One smooth day, tiny ridge: repeated prediction follows the day.
    Eigen::VectorXd day(24);
    for (int s = 0; s < 24; ++s) day[s] = 0.5 + 0.3 * std::sin(2 * M_PI * s / 24.0);
    std::vector<Eigen::VectorXd> days{day, day};
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    krr_samples_from_days(days, 3, X, y);
    auto m = fit_krr(X, y, 0.4, 1e-10, 3);
    const int pos = 5;
    std::vector<double> window(day.data() + pos - 2, day.data() + pos + 1);
    auto traj = base_load_rollout(m, window, pos, 8, 24);
    // Oracle: direct repeated prediction with the same model.
    std::vector<double> buf = window;
    double value = buf.back();
    for (int k = 0; k < 8; ++k) {
        const double t = static_cast<double>((pos + k) % 24) / 24.0;
        value += m.predict_increment(buf, t);
        buf.erase(buf.begin());
        buf.push_back(value);
        CHECK(traj[k] == doctest::Approx(value).epsilon(1e-12));
        CHECK(std::abs(traj[k] - day[pos + 1 + k]) < 1e-3);
    }
}

TEST_CASE("price sensitivity arithmetic") {
    // -0.35 elasticity, 20 kW consumption (injection -0.02 pu at 1 MVA), 0.35 tariff.
    const double alpha = price_sensitivity(-0.35, -0.02, 0.35);
    CHECK(alpha == doctest::Approx(0.02));  // 20 kW per ($/kWh), in pu
    CHECK(price_sensitivity(0.0, -0.02, 0.35) == 0.0);
    CHECK(price_sensitivity(-0.35, -0.04, 0.35) == doctest::Approx(2 * alpha));
    CHECK_THROWS_AS(price_sensitivity(-0.35, -0.02, 0.0), ForecastError);
}

TEST_CASE("msms single candidate returns its own score") {
    std::vector<Eigen::VectorXd> days{bell_day(24, 1.0), bell_day(24, 0.8), bell_day(24, 0.6)};
    const double sig[] = {0.5};
    const double lam[] = {1e-6};
    MsmsConfig cfg;
    auto r = msms_tune(days, sig, lam, cfg, 3);
    CHECK(r.sigma == 0.5);
    CHECK(r.lambda == 1e-6);
    CHECK(r.score == doctest::Approx(msms_score(days, 0.5, 1e-6, cfg, 3)));
}

TEST_CASE("msms prefers near-interpolating pair on noiseless data") {
    std::vector<Eigen::VectorXd> days;
    for (double a : {1.0, 0.95, 0.9, 1.05}) days.push_back(bell_day(24, a));
    MsmsConfig cfg;
    const double good_s = 0.4, good_l = 1e-8;
    const double bad_s = 50.0, bad_l = 10.0;  // heavily over-smoothed
    const double score_good = msms_score(days, good_s, good_l, cfg, 3);
    const double score_bad = msms_score(days, bad_s, bad_l, cfg, 3);
    CHECK(score_good < score_bad);
    const double sig[] = {good_s, bad_s};
    const double lam[] = {good_l, bad_l};
    auto r = msms_tune(days, sig, lam, cfg, 3);
    CHECK(r.sigma == good_s);
    CHECK(r.lambda == good_l);
}

TEST_CASE("msms horizon of one step is one-step relative MSE") {
    std::vector<Eigen::VectorXd> days{bell_day(24, 1.0), bell_day(24, 0.7)};
    MsmsConfig one;
    one.steps = 1;
    const double s1 = msms_score(days, 0.6, 1e-6, one, 3);
    CHECK(s1 >= 0.0);
    CHECK(std::isfinite(s1));
}

TEST_CASE("msms determinism") {
    std::vector<Eigen::VectorXd> days{bell_day(24, 1.0), bell_day(24, 0.8), bell_day(24, 0.5)};
    const double sig[] = {0.3, 1.0, 3.0};
    const double lam[] = {1e-8, 1e-4};
    MsmsConfig cfg;
    auto a = msms_tune(days, sig, lam, cfg, 3);
    auto b = msms_tune(days, sig, lam, cfg, 3);
    CHECK(a.sigma == b.sigma);
    CHECK(a.lambda == b.lambda);
    CHECK(a.score == b.score);
}

TEST_CASE("msms empty grid throws") {
    std::vector<Eigen::VectorXd> days{bell_day(24, 1.0), bell_day(24, 0.8)};
    CHECK_THROWS_AS(msms_tune(days, {}, {}, MsmsConfig{}, 3), ForecastError);
}
