#pragma once

#include <string>

#include "magwell/numverify.hpp"
#include "magwell/secondform.hpp"

namespace magwell {

// JSON fragments (single objects, compact). Floating values are rounded to 12 significant digits
// so that identical runs serialise identically.
std::string well_analysis_json(const WellAnalysis& wa);
std::string prediction_json(const SpectralPrediction& p);
std::string series_json(const Series<Quad>& s);
std::string series_json(const Series<cplx>& s);
std::string normal_form_json(const NormalFormTable<Quad>& t);
std::string normal_form_json(const NormalFormTable<cplx>& t);
std::string reduction_json(const OscillatorReduction& r);
std::string constant_term_json(const ConstantTerm& c);
std::string eig_rows_json(const std::vector<EigRow>& rows);
std::string fit_json(const FitReport& f);
std::string verification_json(const VerifyResult& v);

double round_sig(double x, int digits = 12);

}  // namespace magwell
