#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "magwell/numverify.hpp"

namespace magwell {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear fit needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear fit needs distinct abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    if (n > 2) {
        double s2 = sse / (n - 2);
        f.slope_se = std::sqrt(s2 / sxx);
        f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return f;
}

FitReport fit_powers(const std::vector<EigRow>& rows, double b0, const SpectralPrediction* prediction, int k) {
    bool any_refined = std::any_of(rows.begin(), rows.end(), [](const EigRow& r) { return r.kind == "refined"; });
    const std::string kind = any_refined ? "refined" : "grid";
    std::map<double, std::map<int, double>> table;
    for (const auto& r : rows)
        if (r.kind == kind) table[r.hbar][r.level] = r.eigenvalue;

    FitReport f;
    f.k = k;
    std::vector<double> h, l1, gap;
    for (const auto& [hb, lv] : table) {
        if (!lv.count(1)) continue;
        h.push_back(hb);
        l1.push_back(lv.at(1));
        if (lv.count(2)) gap.push_back(lv.at(2) - lv.at(1));
    }
    if (h.size() < 4 || h.back() < 4.0 * h.front() * (1 - 1e-12))
        throw std::invalid_argument("insufficient data span: at least 4 hbar values spanning a factor 4 are needed");
    f.sufficient_span = true;
    f.has_spacing = gap.size() == h.size();

    std::vector<double> lx, ly, rel;
    bool positive = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
        double y = l1[i] - b0 * h[i];
        if (y <= 0) positive = false;
        rel.push_back(std::abs(y) / (b0 * h[i]));
        lx.push_back(std::log(h[i]));
        ly.push_back(std::log(std::abs(y)));
    }
    f.sub_expected = k > 0 ? 1.5 : 2.0;
    if (*std::max_element(rel.begin(), rel.end()) > 1e-3 && positive) {
        LinearFit lf = linear_fit(lx, ly);
        f.sub_slope = lf.slope;
        f.sub_coef = std::exp(lf.intercept);
        f.subleading_detected = lf.r2 > 0.99;
    }
    if (!f.subleading_detected) f.flags.push_back("no sub-leading law detected");

    const double E1 = prediction && !prediction->E.empty() ? prediction->E[0] : 0.0;
    if (prediction && !prediction->levels.empty()) f.nu_predicted = prediction->levels[0].a1;
    if (k > 0) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < h.size(); ++i) {
            x.push_back(std::sqrt(h[i]));
            y.push_back((l1[i] - b0 * h[i]) / std::pow(h[i], 1.5));
        }
        LinearFit lf = linear_fit(x, y);
        f.nu_extrapolated = lf.intercept;
        f.c0_fitted = lf.slope - E1;
    } else {
        std::vector<double> y;
        for (std::size_t i = 0; i < h.size(); ++i) y.push_back((l1[i] / h[i] - b0) / h[i]);
        LinearFit lf = linear_fit(h, y);
        f.c0_fitted = lf.intercept - E1;
    }

    if (f.has_spacing) {
        std::vector<double> gy;
        bool ok = true;
        for (double g : gap) {
            if (g <= 0) ok = false;
            gy.push_back(std::log(std::max(g, 1e-300)));
        }
        if (ok) {
            LinearFit lf = linear_fit(lx, gy);
            f.spacing_slope = lf.slope;
            f.spacing_coef = std::exp(lf.intercept);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) {
                num += gap[i] * h[i] * h[i];
                den += std::pow(h[i], 4);
            }
            f.spacing_coef_fixed = num / den;
        } else {
            f.flags.push_back("non-positive level spacing");
        }
        if (prediction && !prediction->spacing.empty()) f.spacing_predicted = prediction->spacing[0];
    }
    return f;
}

}  // namespace magwell
