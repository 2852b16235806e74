#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "magwell/spectra.hpp"

namespace magwell {

struct GridSetup {
    std::vector<int> n;              // interior points per axis
    std::vector<double> center;      // box centre (defaults to the origin)
    std::vector<double> half_width;  // box half widths
    double hbar = 0.1;
};

struct GridOperator {
    int dim = 0;
    std::vector<int> n;
    std::vector<double> lo, delta;
    double hbar = 0.0;
    bool flat = true;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> H;

    Eigen::Index size() const { return H.rows(); }
    void apply(const cplx* x, cplx* y) const;
    double hermitian_defect() const;   // max |H_ij - conj(H_ji)|
    std::string triplets() const;      // "i j re im" lines, 0-based
};

// Bytes needed for the matrix plus a Lanczos basis of `basis_vectors` columns.
std::size_t grid_memory_estimate(const std::vector<int>& n, int basis_vectors);

GridOperator build_grid_operator(const FieldSpec& spec, const GridSetup& setup,
                                 std::size_t memory_limit = std::size_t(3) << 30);

struct EigRow {
    double hbar = 0.0;
    int level = 0;  // from 1
    double eigenvalue = 0.0;
    double residual = 0.0;
    std::vector<int> n;
    double box = 0.0;  // largest half width
    std::string kind = "grid";  // "grid", "coarse", "refined" or "box-half"
    std::string note;           // "cluster" when a near-degenerate group kept the residual above tol
};

enum class EigMode { Auto, Plain, ShiftInvert };

struct EigOptions {
    double tol = 1e-9;            // residual norm target for unit vectors
    std::uint64_t seed = 1;
    int max_matvecs = 6000;
    double cluster_rel = 1e-2;    // unconverged pairs with residual below cluster_rel * lambda are kept and flagged
    EigMode mode = EigMode::Auto; // Auto: shift-invert (sparse LDL^H) up to two dimensions, plain Lanczos above
    int ncv = 24;
};

std::vector<EigRow> lowest_eigs(const GridOperator& op, int m, const EigOptions& opt = {});

struct LinearFit {
    double slope = 0.0, intercept = 0.0;
    double slope_se = 0.0, intercept_se = 0.0;
    double r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct FitReport {
    bool sufficient_span = false;
    int k = 0;
    // log-log law of lambda_1 - b0 hbar
    double sub_slope = 0.0, sub_coef = 0.0, sub_expected = 0.0;
    bool subleading_detected = false;
    // k > 0: (lambda_1 - b0 hbar)/hbar^{3/2} against hbar^{1/2}; intercept estimates sum nu_j(0)
    double nu_extrapolated = 0.0, nu_predicted = 0.0;
    // (lambda_1/hbar - b0 - sqrt(hbar) nu)/hbar against hbar (or sqrt(hbar)); intercept estimates E_1 + c0
    double c0_fitted = 0.0;
    // spacing lambda_2 - lambda_1
    bool has_spacing = false;
    double spacing_slope = 0.0, spacing_coef = 0.0, spacing_coef_fixed = 0.0, spacing_predicted = 0.0;
    std::vector<std::string> flags;
};

// Uses rows of kind "refined" when present, otherwise "grid".
FitReport fit_powers(const std::vector<EigRow>& rows, double b0, const SpectralPrediction* prediction, int k);

struct VerifyOptions {
    std::vector<double> hbars{0.05, 0.07, 0.1, 0.14, 0.2};
    int levels = 2;
    std::vector<int> n;            // per axis; empty = 256 (2D) or 64 (3D+)
    double box_factor = 7.0;       // half width in units of the localisation length per axis
    std::vector<double> half_width;  // fixed box, overrides box_factor
    bool refine = true;            // second coarser grid and Richardson extrapolation in the spacing
    bool box_check = true;         // rerun the largest hbar on an enlarged box with the same spacing
    EigOptions eig;
    int threads = 1;
    std::size_t memory_limit = std::size_t(3) << 30;
};

struct VerifyResult {
    std::optional<WellAnalysis> analysis;
    std::optional<SpectralPrediction> prediction;
    double b0 = 0.0;
    std::vector<EigRow> rows;
    FitReport fit;
    std::vector<std::string> notes;
};

// Localisation length per axis at the well: magnetic length across the field, (hbar M/Kt)^{1/4} along it.
std::vector<double> localisation_lengths(const WellAnalysis& wa, double hbar);

VerifyResult run_verification(const FieldSpec& spec, const VerifyOptions& opt);

std::string eig_table_csv(const std::vector<EigRow>& rows);

}  // namespace magwell
