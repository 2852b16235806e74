#pragma once

#include <vector>

#include <Eigen/Dense>

#include "magwell/bnf.hpp"
#include "magwell/wellframe.hpp"

namespace magwell {

using SeriesF = Series<cplx>;

struct OscillatorReduction {
    SeriesF series;               // E2 real layout: N0 + N2 + gamma2, already divided by h^2
    SeriesF n0;                   // b(w, s(w)) as a base jet
    std::vector<SeriesF> s_jet;   // s_i(w)
    std::vector<SeriesF> nus;     // nu_j(w)
    Eigen::MatrixXd M0, Kt0, P0;  // at w = 0
    Eigen::VectorXd s0;           // s(0)
    std::vector<double> nu0;
    double dropped = 0.0;         // largest spurious low-degree coefficient removed
};

// N1 lives in the real E1 layout (s, k) and uses only y, eta, t, tau and hbar.
// Its hbar^1 tau^0 part is read as hbar * b(w,t) and its hbar^0 tau^2 part as <M tau, tau>.
OscillatorReduction reduce_to_oscillator(const SeriesF& n1, int nmax, int tmax);

// Degree <= 2 model of N^[1] from the geometric data: <M0 tau,tau> + hbar (b0 + quadratic Taylor part).
SeriesF quadratic_model(const WellReport& well, const QuadData& quad, int s, int k, int nmax, int tmax);

// Normal form over E2: series in the real E2 layout, converted to (v, vbar) internally.
template <class S>
NormalFormTable<S> second_birkhoff(const Series<S>& e2_real, int r2, double res_tol = 1e-9) {
    if (e2_real.layout().tag != AlgebraTag::E2) throw AlgebraError("second_birkhoff expects an E2 series");
    Series<S> c = e2_real.layout().complex_basis ? e2_real : change_basis(e2_real);
    return birkhoff(c, r2, res_tol);
}

// J_j -> (2 n_j - 1) h; the result is a polynomial in w and h.
template <class S>
Series<S> effective_m_symbol(const NormalFormTable<S>& table, const std::vector<int>& n) {
    return effective_symbol(table, n);
}

// Coefficients of h^0, h^1, ... of a base-and-h series at w = 0.
std::vector<double> coefficients_at_origin(const SeriesF& m);

// h^2 coefficient of the eigenvalues of Op(M^[1]) minus the harmonic ladder: c2(0) - 1/2 grad nu^T S^-1 grad nu.
struct ConstantTerm {
    bool available = false;
    double c0 = 0.0;
    double b0 = 0.0;
    double nu0 = 0.0;
    Eigen::MatrixXd schur;  // Hessian of b(w, s(w)) at 0
    std::string note;
};
ConstantTerm constant_term(const SeriesF& m1);

}  // namespace magwell
