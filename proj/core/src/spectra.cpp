#include "magwell/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace magwell {

std::vector<double> landau_levels(const std::vector<double>& betas, double hbar, int count) {
    auto e = e_ladder(betas, count);
    for (double& v : e) v *= hbar;
    return e;
}

namespace {

// sqrt(n (n-1) ... (n-q+1))
double sqrt_falling(int n, int q) {
    double r = 1.0;
    for (int i = 0; i < q; ++i) r *= std::sqrt(static_cast<double>(n - i));
    return r;
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

Eigen::MatrixXcd hermite_matrix(const SeriesF& symbol, double hbar, int basis_size) {
    const Layout& L = symbol.layout();
    if (L.tag != AlgebraTag::E1 || L.s != 1 || L.k != 0) throw std::invalid_argument("one-oscillator symbol expected");
    SeriesF zs = L.complex_basis ? symbol : change_basis(symbol);
    const int n = basis_size;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& [m, c] : zs.terms()) {
        if (m[L.y(0)] || m[L.eta(0)]) throw std::invalid_argument("symbol depends on base variables");
        const int pa = m[L.osc_a(0)], pb = m[L.osc_b(0)];
        const cplx pref = c * std::pow(hbar, m.back()) * std::pow(2.0 * hbar, 0.5 * (pa + pb));
        // Weyl-symmetrised a^pa (a^+)^pb = sum_k k! C(pa,k) C(pb,k) 2^-k (a^+)^(pb-k) a^(pa-k)
        double kfact = 1.0;
        for (int kk = 0; kk <= std::min(pa, pb); ++kk) {
            if (kk > 0) kfact *= kk;
            const double w = kfact * binom(pa, kk) * binom(pb, kk) * std::pow(0.5, kk);
            const int p = pb - kk, q = pa - kk;
            // <i| (a^+)^p a^q |j> with i - p = j - q
            for (int j = q; j < n; ++j) {
                int i = j - q + p;
                if (i >= n) break;
                H(i, j) += pref * w * sqrt_falling(j, q) * sqrt_falling(i, p);
            }
        }
    }
    return 0.5 * (H + H.adjoint());
}

HermiteResult hermite_quantize_1d(const SeriesF& symbol, double hbar, int basis_size, int levels, double tail_tol) {
    HermiteResult res;
    res.basis_size = basis_size;
    auto lowest = [&](const Eigen::MatrixXcd& H) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + levels);
        return ev;
    };
    if (levels > basis_size / 2) throw std::invalid_argument("too many levels for the basis size");
    res.matrix = hermite_matrix(symbol, hbar, basis_size);
    res.eigenvalues = lowest(res.matrix);
    auto wide = lowest(hermite_matrix(symbol, hbar, 2 * basis_size));
    for (int j = 0; j < levels; ++j) res.tail_change = std::max(res.tail_change, std::abs(wide[j] - res.eigenvalues[j]));
    if (res.tail_change > tail_tol)
        throw ConvergenceError("Hermite truncation not converged: doubling the basis moves eigenvalues by " +
                               std::to_string(res.tail_change));
    return res;
}

double evaluate_parameter_series(const SeriesF& s, double param) {
    double v = 0.0;
    for (const auto& [m, c] : s.terms()) {
        for (int i = 0; i < s.layout().nvars(); ++i)
            if (m[i]) throw std::invalid_argument("series still depends on " + s.layout().names[i]);
        v += c.real() * std::pow(param, m.back());
    }
    return v;
}

double SpectralPrediction::eigenvalue(int j, double hbar) const {
    const auto& c = levels.at(j);
    return hbar * (c.a0 + std::sqrt(hbar) * c.a1 + hbar * c.a2);
}

SpectralPrediction assemble_prediction(const WellReport& well, const QuadData& quad, int levels,
                                       const std::optional<ConstantTerm>& c0) {
    SpectralPrediction p;
    ExpansionPrediction ex = predict_expansion(well, quad, levels);
    p.E = ex.E;
    p.spacing = ex.spacing;
    if (c0 && c0->available) {
        p.c0_known = true;
        p.c0 = c0->c0;
        p.c0_note = "computed from the normal form tables";
    } else {
        p.c0_note = c0 ? "not available: " + c0->note : "to be fitted from grid eigenvalues";
    }
    for (int j = 0; j < levels; ++j) p.levels.push_back({ex.b0, ex.nu0, ex.E[j] + (p.c0_known ? p.c0 : 0.0)});
    double hm = std::numeric_limits<double>::infinity();
    if (ex.nu0 > 0) hm = std::min(hm, std::pow(ex.b0 / ex.nu0, 2));
    if (!ex.E.empty() && ex.E.back() > 0) hm = std::min(hm, ex.b0 / ex.E.back());
    p.hbar_max = hm;
    return p;
}

}  // namespace magwell
