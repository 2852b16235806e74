#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magwell/secondform.hpp"
#include "magwell/wellframe.hpp"

namespace magwell {

// First `count` values of sum_j beta_j (2 n_j - 1) hbar with multiplicity.
std::vector<double> landau_levels(const std::vector<double>& betas, double hbar, int count);

struct HermiteResult {
    Eigen::MatrixXcd matrix;        // truncated Weyl quantization in the number basis
    std::vector<double> eigenvalues;  // lowest `levels`
    int basis_size = 0;
    double tail_change = 0.0;         // change of the reported eigenvalues when the basis is doubled
};

// Weyl quantization of a one-oscillator symbol (E1 layout with s = 1, k = 0, either basis),
// using z -> sqrt(2 hbar) a and zbar -> sqrt(2 hbar) a^+.
Eigen::MatrixXcd hermite_matrix(const SeriesF& symbol, double hbar, int basis_size);
HermiteResult hermite_quantize_1d(const SeriesF& symbol, double hbar, int basis_size, int levels,
                                  double tail_tol = 1e-10);

// Evaluates a series without base dependence at numeric hbar (terms with base factors are rejected).
double evaluate_parameter_series(const SeriesF& s, double param);

struct LevelCoefficients {
    double a0 = 0.0;  // b0
    double a1 = 0.0;  // sum nu_j(0)
    double a2 = 0.0;  // E_j + c0 when c0 is known, else E_j
};

struct SpectralPrediction {
    std::vector<LevelCoefficients> levels;
    std::vector<double> E;
    std::vector<double> spacing;
    bool c0_known = false;
    double c0 = 0.0;
    std::string c0_note;
    double hbar_max = 0.0;  // where the first correction reaches the size of the leading term

    double eigenvalue(int j, double hbar) const;  // truncated expansion, j from 0
};

SpectralPrediction assemble_prediction(const WellReport& well, const QuadData& quad, int levels,
                                       const std::optional<ConstantTerm>& c0 = std::nullopt);

}  // namespace magwell
