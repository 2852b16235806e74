#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "magwell/exact.hpp"

namespace magwell {

struct LanczosOptions {
    int nev = 1;              // wanted smallest eigenvalues
    int ncv = 0;              // subspace size, 0 = automatic
    double tol = 1e-9;        // residual norm target (absolute)
    int max_matvecs = 20000;
    std::uint64_t seed = 1;
};

struct LanczosResult {
    std::vector<double> values;       // ascending
    std::vector<double> residuals;    // ||H x - lambda x|| for unit x
    Eigen::MatrixXcd vectors;
    int matvecs = 0;
    int restarts = 0;
    bool converged = false;
};

using LinearOp = std::function<void(const cplx* in, cplx* out)>;

// Thick-restart Lanczos with full reorthogonalisation for the lowest eigenpairs of a Hermitian operator.
LanczosResult lowest_eigenpairs(const LinearOp& op, Eigen::Index n, const LanczosOptions& opt);

}  // namespace magwell
