#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magwell/expr.hpp"

namespace magwell {

struct AnalysisOptions {
    double rank_tol = 1e-8;       // relative to the operator norm of the field endomorphism
    int resonance_cap = 10;
    double beta_gap_tol = 1e-6;   // relative gap required between distinct frequencies
    double resonance_tol = 1e-9;  // relative tolerance for integer relations
    int max_iter = 100;
};

struct FieldSpec {
    int dim = 0;
    std::vector<Poly> potential;              // A_1..A_d in q1..qd
    std::vector<std::vector<Poly>> metric;    // g_ij, symmetric
    bool flat = true;                         // metric omitted or literally the identity
    std::vector<double> box;                  // half widths L_i
    std::vector<double> well_guess;
    AnalysisOptions options;
};

FieldSpec parse_field(const std::string& config_text);
// Programmatic construction from expression strings; an empty metric means identity.
FieldSpec make_field(int dim, const std::vector<std::string>& potential,
                     const std::vector<std::vector<std::string>>& metric = {},
                     std::vector<double> box = {}, std::vector<double> guess = {});
// Same field with A replaced by A + grad(chi).
FieldSpec gauge_shift(const FieldSpec& spec, const Poly& chi);

struct TwoFormB {
    int dim = 0;
    std::vector<std::vector<Poly>> B;  // B_ij = d_i A_j - d_j A_i
};

TwoFormB two_form(const FieldSpec& spec);
bool is_closed(const TwoFormB& b);

Eigen::MatrixXd metric_at(const FieldSpec& spec, const Eigen::VectorXd& q);
Eigen::MatrixXd bform_at(const TwoFormB& b, const Eigen::VectorXd& q);
Eigen::MatrixXd potential_jacobian(const FieldSpec& spec, const Eigen::VectorXd& q);  // (k,j) = d_j A_k
Eigen::VectorXd potential_at(const FieldSpec& spec, const Eigen::VectorXd& q);

// The g-skew endomorphism with B(X,Y) = g(X, BY), i.e. G^{-1} * [B_ij].
Eigen::MatrixXd bmatrix_at(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q);

struct SkewSpectrum {
    Eigen::VectorXd q;
    std::vector<double> betas;  // descending
    int s = 0;
    int k = 0;
    Eigen::MatrixXd U, V, W;    // columns u_j, v_j, w_i (g-orthonormal)
};

SkewSpectrum skew_eigen(const Eigen::MatrixXd& bmat, const Eigen::MatrixXd& g, double rank_tol_rel = 1e-8);
SkewSpectrum spectrum_at(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q);

// b(q) = sum of beta_j; evaluated from the singular values, no frame sorting involved.
double intensity(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q);
double intensity(const FieldSpec& spec, const Eigen::VectorXd& q);

struct AssumptionFlags {
    bool a1 = false;          // non-degenerate minimum at q0
    bool a1_sampled = false;  // global part, checked only on box samples
    bool a2 = false;          // constant rank (sampled)
    bool a3 = false;          // distinct betas at q0
    bool a4 = false;          // distinct nus at q0, filled by wellframe
    std::vector<std::string> notes;
};

struct WellReport {
    Eigen::VectorXd q0;
    double b0 = 0.0;
    double grad_norm = 0.0;
    Eigen::MatrixXd hess_b;
    AssumptionFlags flags;
    SkewSpectrum spectrum;
    int iterations = 0;
    int r1 = 0;
    int r2 = 0;
};

void fd_gradient_hessian(const FieldSpec& spec, const TwoFormB& b, const Eigen::VectorXd& q,
                         double& value, Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

WellReport find_well(const FieldSpec& spec, const Eigen::VectorXd& guess);
WellReport find_well(const FieldSpec& spec);

int resonance_order(const std::vector<double>& values, int cap, double tol = 1e-9);

}  // namespace magwell
