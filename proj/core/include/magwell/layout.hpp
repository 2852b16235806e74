#pragma once

#include <memory>
#include <string>
#include <vector>

#include "magwell/exact.hpp"

namespace magwell {

enum class AlgebraTag { E1, E2 };
enum class VarKind { Base, Fiber };

// One conjugate pair of the bidifferential operator: coeff * (d_P (x) d_Q - d_Q (x) d_P),
// each contraction carrying eps^eps_power.
struct ConjugatePair {
    int q = 0;
    int p = 0;
    CQ coeff{1};
    int eps_power = 1;
};

struct Layout {
    AlgebraTag tag = AlgebraTag::E1;
    bool complex_basis = false;
    int s = 0;  // number of (y, eta) pairs and of oscillators
    int k = 0;  // number of (t, tau) pairs
    std::vector<std::string> names;
    std::vector<VarKind> kinds;
    std::vector<ConjugatePair> pairs;
    std::string param = "hbar";

    int nvars() const { return static_cast<int>(names.size()); }
    int index(const std::string& name) const;
    bool same_shape(const Layout& o) const;

    // Index helpers (valid for every layout built below).
    int y(int j) const { return j; }
    int eta(int j) const { return s + j; }
    int t(int i) const { return 2 * s + i; }
    int tau(int i) const { return 2 * s + k + i; }
    // oscillator pair j: x/xi (real) or z/zbar (complex) in E1; absent in E2
    int osc_a(int j) const { return 2 * s + 2 * k + j; }
    int osc_b(int j) const { return 2 * s + 2 * k + s + j; }
};

using LayoutPtr = std::shared_ptr<const Layout>;

// E1 variables: y, eta, t (base); x, xi, tau (fiber) or z, zbar, tau; parameter hbar.
LayoutPtr e1_layout(int s, int k, bool complex_basis);
// E2 variables: y, eta (base, hbar = h^2 contractions); t, tt (fiber) or v, vbar; parameter h.
// Here osc pairs are (t_i, tt_i) themselves, so osc_a/osc_b are not used; see e2 helpers.
LayoutPtr e2_layout(int s, int k, bool complex_basis);

// Counterpart layout in the other basis.
LayoutPtr toggle_basis(const Layout& l);

// Oscillator pairs of a layout: for E1 the (x, xi)/(z, zbar) pairs, for E2 the (t, tt)/(v, vbar).
struct OscPair {
    int a;  // x or z (P side in the complex basis)
    int b;  // xi or zbar
};
std::vector<OscPair> oscillators(const Layout& l);

}  // namespace magwell
