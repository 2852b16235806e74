#include "magwell/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace magwell {

namespace {

using json = nlohmann::ordered_json;

json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round_sig(x);
}

json vec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
    return a;
}

json mat(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
        a.push_back(row);
    }
    return a;
}

// columns as vectors
json columns(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(vec(Eigen::VectorXd(m.col(j))));
    return a;
}

json coeff(const Quad& q) { return to_string(q); }

json coeff(const cplx& z) {
    if (z.imag() == 0.0) return num(z.real());
    return json::array({num(z.real()), num(z.imag())});
}

template <class S>
json series(const Series<S>& s) {
    json a = json::array();
    std::vector<const std::pair<const Mono, S>*> order;
    for (const auto& kv : s.terms()) order.push_back(&kv);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto* x, auto* y) { return s.fiber_degree(x->first) < s.fiber_degree(y->first); });
    for (auto* kv : order) a.push_back({{"monomial", s.mono_text(kv->first)}, {"coeff", coeff(kv->second)}});
    return a;
}

template <class S>
json table(const NormalFormTable<S>& t) {
    json j;
    j["r"] = t.r;
    json betas = json::array();
    for (const auto& b : t.betas) betas.push_back(coeff(b.coeff(b.unit())));
    j["betas_at_well"] = betas;
    json beta_polys = json::array();
    for (const auto& b : t.betas) beta_polys.push_back(series(b));
    j["betas"] = beta_polys;
    json entries = json::array();
    for (const auto& e : t.entries)
        entries.push_back({{"alpha", e.alpha}, {"alpha_tau", e.alpha_tau}, {"hbar_power", e.ell},
                           {"coeff_poly", series(e.coeff)}});
    j["entries"] = entries;
    const int v = valuation(t.residual);
    j["residual_valuation"] = v == std::numeric_limits<int>::max() ? json(nullptr) : json(v);
    j["residual_terms"] = t.residual.terms().size();
    j["kappa"] = series(t.kappa);
    j["generator"] = series(t.generator);
    return j;
}

json well(const WellAnalysis& wa) {
    const WellReport& w = wa.well;
    json j;
    j["q0"] = vec(w.q0);
    j["b0"] = num(w.b0);
    j["grad_norm"] = num(w.grad_norm);
    j["hess_b"] = mat(w.hess_b);
    j["iterations"] = w.iterations;
    j["r1"] = w.r1;
    j["r2"] = w.r2;
    j["assumptions"] = {{"a1", w.flags.a1},
                        {"a1_sampled", w.flags.a1_sampled},
                        {"a2", w.flags.a2},
                        {"a3", w.flags.a3},
                        {"a4", w.flags.a4},
                        {"notes", w.flags.notes}};
    j["spectrum"] = {{"s", w.spectrum.s},
                     {"k", w.spectrum.k},
                     {"betas", vec(w.spectrum.betas)},
                     {"u", columns(w.spectrum.U)},
                     {"v", columns(w.spectrum.V)},
                     {"w", columns(w.spectrum.W)}};
    const QuadData& q = wa.quad;
    j["quadratic"] = {{"M0", mat(q.M0)},
                      {"Kt", mat(q.Kt)},
                      {"Hw", mat(q.Hw)},
                      {"nus", vec(q.nus)},
                      {"mus", vec(q.mus)},
                      {"block_residual", num(q.block_residual)}};
    return j;
}

json prediction(const SpectralPrediction& p) {
    json levels = json::array();
    for (const auto& l : p.levels) levels.push_back({{"a0", num(l.a0)}, {"a1", num(l.a1)}, {"a2", num(l.a2)}});
    return {{"E", vec(p.E)},           {"spacing", vec(p.spacing)}, {"c0_known", p.c0_known},
            {"c0", p.c0_known ? num(p.c0) : json(nullptr)}, {"c0_note", p.c0_note}, {"hbar_max", num(p.hbar_max)},
            {"levels", levels}};
}

json rows(const std::vector<EigRow>& rs) {
    json a = json::array();
    for (const auto& r : rs) {
        json j = {{"hbar", num(r.hbar)}, {"level", r.level}, {"eigenvalue", num(r.eigenvalue)},
                  {"residual", num(r.residual)}, {"n", r.n}, {"box", num(r.box)}, {"kind", r.kind}};
        if (!r.note.empty()) j["note"] = r.note;
        a.push_back(j);
    }
    return a;
}

json fit(const FitReport& f) {
    return {{"sufficient_span", f.sufficient_span},
            {"k", f.k},
            {"subleading", {{"slope", num(f.sub_slope)}, {"coefficient", num(f.sub_coef)},
                            {"expected_slope", num(f.sub_expected)}, {"detected", f.subleading_detected}}},
            {"nu_extrapolated", num(f.nu_extrapolated)},
            {"nu_predicted", num(f.nu_predicted)},
            {"c0_fitted", num(f.c0_fitted)},
            {"spacing", {{"available", f.has_spacing}, {"slope", num(f.spacing_slope)},
                         {"coefficient", num(f.spacing_coef)}, {"coefficient_at_exponent_2", num(f.spacing_coef_fixed)},
                         {"predicted", num(f.spacing_predicted)}}},
            {"flags", f.flags}};
}

}  // namespace

double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
    return std::strtod(buf, nullptr);
}

std::string well_analysis_json(const WellAnalysis& wa) { return well(wa).dump(); }
std::string prediction_json(const SpectralPrediction& p) { return prediction(p).dump(); }
std::string series_json(const Series<Quad>& s) { return series(s).dump(); }
std::string series_json(const Series<cplx>& s) { return series(s).dump(); }
std::string normal_form_json(const NormalFormTable<Quad>& t) { return table(t).dump(); }
std::string normal_form_json(const NormalFormTable<cplx>& t) { return table(t).dump(); }

std::string reduction_json(const OscillatorReduction& r) {
    json j;
    j["s0"] = vec(r.s0);
    j["nu0"] = vec(r.nu0);
    j["M0"] = mat(r.M0);
    j["Kt0"] = mat(r.Kt0);
    j["P0"] = mat(r.P0);
    j["dropped"] = num(r.dropped);
    j["series"] = series(r.series);
    return j.dump();
}

std::string constant_term_json(const ConstantTerm& c) {
    json j = {{"available", c.available}, {"c0", c.available ? num(c.c0) : json(nullptr)}, {"b0", num(c.b0)},
              {"nu0", num(c.nu0)}, {"schur", mat(c.schur)}, {"note", c.note}};
    return j.dump();
}

std::string eig_rows_json(const std::vector<EigRow>& r) { return rows(r).dump(); }
std::string fit_json(const FitReport& f) { return fit(f).dump(); }

std::string verification_json(const VerifyResult& v) {
    json j;
    j["b0"] = num(v.b0);
    if (v.analysis) j["well"] = well(*v.analysis);
    if (v.prediction) j["prediction"] = prediction(*v.prediction);
    j["rows"] = rows(v.rows);
    j["fit"] = fit(v.fit);
    j["notes"] = v.notes;
    return j.dump();
}

}  // namespace magwell
