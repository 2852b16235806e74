#include <doctest.h>

#include <cmath>

#include "magwell/numverify.hpp"

using namespace magwell;

namespace {

std::vector<EigRow> synthetic(const std::vector<double>& hbars, double (*l1)(double), double (*l2)(double)) {
    std::vector<EigRow> rows;
    for (double h : hbars) {
        EigRow a;
        a.hbar = h;
        a.level = 1;
        a.eigenvalue = l1(h);
        rows.push_back(a);
        if (l2) {
            EigRow b = a;
            b.level = 2;
            b.eigenvalue = l2(h);
            rows.push_back(b);
        }
    }
    return rows;
}

const std::vector<double> kH{0.05, 0.07, 0.1, 0.14, 0.2};

}  // namespace

TEST_CASE("least squares line") {
    LinearFit f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
    CHECK(f.slope_se < 1e-12);
}

TEST_CASE("three halves law with a kernel direction") {
    auto rows = synthetic(kH, [](double h) { return h + std::pow(h, 1.5); }, nullptr);
    FitReport r = fit_powers(rows, 1.0, nullptr, 1);
    CHECK(r.sufficient_span);
    CHECK(r.subleading_detected);
    CHECK(r.sub_slope == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(r.sub_coef == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.nu_extrapolated == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("second order law and level spacing without kernel") {
    auto rows = synthetic(kH, [](double h) { return h + 2 * h * h; }, [](double h) { return h + 6 * h * h; });
    FitReport r = fit_powers(rows, 1.0, nullptr, 0);
    CHECK(r.sub_slope == doctest::Approx(2).epsilon(1e-9));
    CHECK(r.has_spacing);
    CHECK(r.spacing_slope == doctest::Approx(2).epsilon(1e-9));
    CHECK(r.spacing_coef == doctest::Approx(4).epsilon(1e-9));
    CHECK(r.spacing_coef_fixed == doctest::Approx(4).epsilon(1e-9));
    CHECK(r.c0_fitted + 0.0 == doctest::Approx(r.c0_fitted));
}

TEST_CASE("pure Landau data has no sub-leading law") {
    auto rows = synthetic(kH, [](double h) { return h; }, nullptr);
    FitReport r = fit_powers(rows, 1.0, nullptr, 0);
    CHECK(!r.subleading_detected);
    bool flagged = false;
    for (const auto& f : r.flags) flagged |= f.find("no sub-leading") != std::string::npos;
    CHECK(flagged);
}

TEST_CASE("narrow hbar ranges are refused") {
    auto rows = synthetic({0.1, 0.12, 0.14, 0.16}, [](double h) { return h; }, nullptr);
    CHECK_THROWS_AS(fit_powers(rows, 1.0, nullptr, 0), std::invalid_argument);
}
