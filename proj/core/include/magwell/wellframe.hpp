#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magwell/maggeom.hpp"

namespace magwell {

// Phase space vectors are (Q, P) stacked in R^{2d}.
double omega(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
// Half Hessian of H(q,p) = |p - A(q)|^2_g on the characteristic set at q.
double half_hessian_H(const Eigen::MatrixXd& ginv, const Eigen::MatrixXd& jacA,
                      const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct FrameData {
    int d = 0, s = 0, k = 0;
    Eigen::MatrixXd F, Fp;   // columns f_j, f'_j (2d x s)
    Eigen::MatrixXd G;       // columns g_j (2d x k)
    Eigen::MatrixXd dphi;    // 2d x (2s+k), variables ordered (y_1..y_s, eta_1..eta_s, t_1..t_k)
    Eigen::MatrixXd base;    // d x (2s+k), the q-part of dphi
    Eigen::MatrixXd jacA;    // (k,j) = d_j A_k at q0
    Eigen::MatrixXd ginv;
};

struct QuadData {
    Eigen::MatrixXd M0, Kt, cross, Hw, s_jet, Schur;
    std::vector<double> nus;
    std::vector<double> mus;
    Eigen::MatrixXd P;  // co-reduction matrix
    double block_residual = 0.0;
};

FrameData build_frames(const WellReport& well, const FieldSpec& spec);
QuadData hessian_data(const FrameData& frames, const WellReport& well, const FieldSpec& spec);

struct CoReduction {
    Eigen::MatrixXd P;
    Eigen::VectorXd nus;  // descending
};
// tP M^{-1} P = I and tP K P = diag(nu^2).
CoReduction co_reduce(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K);

// Positive symplectic eigenvalues of a symmetric 2s x 2s matrix in (y, eta) ordering.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& S);

std::vector<double> e_ladder(const std::vector<double>& mus, int count);

struct ExpansionPrediction {
    double b0 = 0.0;
    double nu0 = 0.0;                // sum of nu_j(0)
    std::vector<double> E;           // ladder E_1..E_m
    std::vector<double> spacing;     // E_{j+1} - E_j, coefficient of hbar^2
    bool c0_known = false;
    double c0 = 0.0;
    std::string c0_note = "unknown unless provided by the normal form pipeline";
};

ExpansionPrediction predict_expansion(const WellReport& well, const QuadData& quad, int levels);

// Runs find_well, frames and Hessian data, completing the fourth assumption flag and r2.
struct WellAnalysis {
    WellReport well;
    FrameData frames;
    QuadData quad;
};
WellAnalysis analyze_well(const FieldSpec& spec);

}  // namespace magwell
