#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "qrv/errors.hpp"
#include "qrv/realized.hpp"
#include "qrv/rng.hpp"
#include "qrv/stats.hpp"

using namespace qrv;
using namespace qrv::rm;

namespace {

std::vector<double> brownian_day(Rng& rng, int m, double sigma2_daily = 1.0) {
    std::vector<double> r(static_cast<std::size_t>(m));
    const double sd = std::sqrt(sigma2_daily / m);
    for (auto& v : r) v = sd * rng.normal();
    return r;
}

}  // namespace

TEST_CASE("realized variance") {
    CHECK(realized_variance(std::vector<double>{0.01, -0.02, 0.005}) ==
          doctest::Approx(0.000525).epsilon(1e-12));
    CHECK(realized_variance(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(realized_variance(std::vector<double>{0.7}) == doctest::Approx(0.49));
    CHECK_THROWS_AS(realized_variance(std::vector<double>{}), EmptyDay);
}

TEST_CASE("semivariances split by sign and sum to rv") {
    const auto [neg, pos] = realized_semivariances(std::vector<double>{0.01, -0.02});
    CHECK(neg == doctest::Approx(0.0004));
    CHECK(pos == doctest::Approx(0.0001));

    const auto [n2, p2] = realized_semivariances(std::vector<double>{0.1, 0.2, 0.3});
    CHECK(n2 == 0.0);
    CHECK(p2 == doctest::Approx(0.14));

    const auto [n3, p3] = realized_semivariances(std::vector<double>{0.0, 0.0});
    CHECK(n3 == 0.0);
    CHECK(p3 == 0.0);

    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const auto day = brownian_day(rng, 390);
        const auto [nn, pp] = realized_semivariances(day);
        const double rv = realized_variance(day);
        CHECK(std::fabs(nn + pp - rv) <= 1e-12 * rv);
    }
}

TEST_CASE("med_rv hand value and spike robustness") {
    // M=4, all returns 0.01: scale pi/(6-4*sqrt(3)+pi) = 1.4192614,
    // times M/(M-2) = 2, times sum of two squared medians 2e-4
    const double expected = (M_PI / (6.0 - 4.0 * std::sqrt(3.0) + M_PI)) * 2.0 * 2e-4;
    CHECK(med_rv(std::vector<double>{0.01, 0.01, 0.01, 0.01}) ==
          doctest::Approx(expected).epsilon(1e-10));
    CHECK(expected == doctest::Approx(5.677045e-4).epsilon(1e-5));

    CHECK(med_rv(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(med_rv(std::vector<double>{0.01, 0.01}), TooFewObservations);

    // a single huge return among small ones barely moves MedRV but dominates RV
    Rng rng(5);
    std::vector<double> day = brownian_day(rng, 390);
    day[200] += 20.0 * std::sqrt(1.0 / 390) * 10.0;
    const double rv = realized_variance(day);
    const double med = med_rv(day);
    CHECK(med < 0.25 * rv);
}

TEST_CASE("scale equivariance of the daily measures") {
    Rng rng(17);
    const auto day = brownian_day(rng, 200);
    std::vector<double> scaled = day;
    const double c = 3.7;
    for (auto& v : scaled) v *= c;
    CHECK(realized_variance(scaled) == doctest::Approx(c * c * realized_variance(day)).epsilon(1e-12));
    CHECK(med_rv(scaled) == doctest::Approx(c * c * med_rv(day)).epsilon(1e-12));
    const auto [n1, p1] = realized_semivariances(day);
    const auto [n2, p2] = realized_semivariances(scaled);
    CHECK(n2 == doctest::Approx(c * c * n1).epsilon(1e-12));
    CHECK(p2 == doctest::Approx(c * c * p1).epsilon(1e-12));
    // med_rq is homogeneous of degree 4
    CHECK(med_rq(scaled) == doctest::Approx(c * c * c * c * med_rq(day)).epsilon(1e-12));
}

TEST_CASE("med_rq estimates integrated quarticity on simulated days") {
    // sigma = 1/sqrt(M) per bar => integrated quarticity 1
    Rng rng(23);
    const int m = 390;
    const int days = 10000;
    double acc = 0.0;
    for (int d = 0; d < days; ++d) acc += med_rq(brownian_day(rng, m));
    const double mean = acc / days;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
    CHECK(med_rq(std::vector<double>{0.0, 0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("med_rv is nearly unbiased for integrated variance") {
    Rng rng(29);
    const int days = 4000;
    double acc = 0.0;
    for (int d = 0; d < days; ++d) acc += med_rv(brownian_day(rng, 390));
    CHECK(acc / days == doctest::Approx(1.0).epsilon(0.012));
}

TEST_CASE("jump statistic basics") {
    CHECK(jump_test_z(1.0, 1.0, 1.0, 390) == 0.0);  // medrv == rv
    CHECK_THROWS_AS(jump_test_z(0.0, 1.0, 1.0, 390), DegenerateDay);

    // a jump of 10 daily standard deviations inside one bar clears the 0.1%
    // critical value
    Rng rng(31);
    const double crit = stats::norm_quantile(0.999);
    std::vector<double> day = brownian_day(rng, 390);
    day[100] += 10.0;
    const double z = jump_test_z(realized_variance(day), med_rv(day), med_rq(day), 390);
    CHECK(z > crit);
}

TEST_CASE("shrinkage decomposition") {
    DailyMeasures m;
    m.rv = 2.0;
    m.medrv = 1.5;
    m.medrq = 1.0;
    m.m = 390;

    m.z_jump = 1.0;  // below the 0.1% critical value
    Decomposition d = decompose_iv_jv(m, 0.001);
    CHECK(!d.jump_flag);
    CHECK(d.iv == 2.0);
    CHECK(d.jv == 0.0);

    m.z_jump = 5.0;  // above
    d = decompose_iv_jv(m, 0.001);
    CHECK(d.jump_flag);
    CHECK(d.iv == doctest::Approx(1.5));
    CHECK(d.jv == doctest::Approx(0.5));
    CHECK(d.iv + d.jv == doctest::Approx(m.rv));

    // flagged but medrv > rv: clamp with a warning flag
    m.medrv = 2.5;
    d = decompose_iv_jv(m, 0.001);
    CHECK(d.jump_flag);
    CHECK(d.clamped);
    CHECK(d.iv == doctest::Approx(2.0));
    CHECK(d.jv == 0.0);
}

TEST_CASE("panel construction excludes degenerate days and round-trips csv") {
    Rng rng(37);
    std::vector<ingest::IntradayGrid> grids;
    const Date base = days_from_civil(2001, 1, 3);
    for (int i = 0; i < 5; ++i) {
        ingest::IntradayGrid g;
        g.day = base + i;
        g.log_returns = brownian_day(rng, 80);
        g.log_prices.assign(81, 0.0);
        for (int j = 0; j < 80; ++j) g.log_prices[j + 1] = g.log_prices[j] + g.log_returns[j];
        grids.push_back(g);
    }
    // one all-zero day
    ingest::IntradayGrid dead;
    dead.day = base + 5;
    dead.log_returns.assign(80, 0.0);
    dead.log_prices.assign(81, 0.0);
    grids.push_back(dead);

    std::vector<std::string> warnings;
    const MeasurePanel panel = compute_panel(grids, 0.001, &warnings);
    CHECK(panel.rows.size() == 5);
    CHECK(!warnings.empty());
    for (const auto& row : panel.rows) {
        CHECK(row.iv + row.jv == doctest::Approx(row.rv).epsilon(1e-12));
        CHECK(std::fabs(row.rs_minus + row.rs_plus - row.rv) <= 1e-12 * row.rv);
    }

    const std::string path =
        (std::filesystem::temp_directory_path() / "qrv_panel_test.csv").string();
    write_panel_csv(path, panel);
    const MeasurePanel back = read_panel_csv(path);
    REQUIRE(back.rows.size() == panel.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
        CHECK(back.rows[i].day == panel.rows[i].day);
        CHECK(back.rows[i].rv == doctest::Approx(panel.rows[i].rv).epsilon(1e-14));
        CHECK(back.rows[i].jump_flag == panel.rows[i].jump_flag);
    }
    std::filesystem::remove(path);
}

TEST_CASE("implied vol attaches by date") {
    MeasurePanel p;
    const Date base = days_from_civil(2001, 1, 3);
    for (int i = 0; i < 3; ++i) {
        DailyMeasures m;
        m.day = base + i;
        m.rv = 1.0;
        p.rows.push_back(m);
    }
    p.attach_implied_vol({{base, 1.1}, {base + 1, 1.2}, {base + 2, 1.3}, {base + 9, 9.0}});
    REQUIRE(p.implied_vol.has_value());
    CHECK((*p.implied_vol)[2] == 1.3);
    MeasurePanel q = p;
    q.rows.push_back(DailyMeasures{base + 7, 1, 1, 0.5, 0.5, 1, 0, false, 1, 0, 80});
    CHECK_THROWS_AS(q.attach_implied_vol({{base, 1.1}}), DataError);
}
