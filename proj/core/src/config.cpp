#include "magwell/config.hpp"

#include <set>
#include <sstream>

#include <toml.hpp>

#include "magwell/errors.hpp"

namespace magwell {

namespace {

[[noreturn]] void fail(const toml::node& node, const std::string& msg) {
    const auto& b = node.source().begin;
    throw ParseError(msg, static_cast<int>(b.line), static_cast<int>(b.column));
}

void check_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [k, v] : t)
        if (!allowed.count(std::string(k.str()))) fail(v, "unknown key '" + std::string(k.str()) + "' in " + where);
}

double as_number(const toml::node& n, const std::string& what) {
    if (auto v = n.value<double>()) return *v;
    fail(n, what + " must be a number");
}

int as_int(const toml::node& n, const std::string& what) {
    if (!n.is_integer()) fail(n, what + " must be an integer");
    return static_cast<int>(*n.value<int64_t>());
}

bool as_bool(const toml::node& n, const std::string& what) {
    if (!n.is_boolean()) fail(n, what + " must be true or false");
    return *n.value<bool>();
}

const toml::array& as_array(const toml::node& n, const std::string& what) {
    if (!n.is_array()) fail(n, what + " must be an array");
    return *n.as_array();
}

std::vector<double> numbers(const toml::node& n, const std::string& what) {
    std::vector<double> out;
    for (const auto& e : as_array(n, what)) out.push_back(as_number(e, what));
    return out;
}

Poly expression(const toml::node& n, const std::vector<std::string>& names, const std::string& what) {
    if (!n.is_string()) fail(n, what + " must be a string");
    const auto& b = n.source().begin;
    // the value starts after the opening quote
    return parse_poly(*n.value<std::string>(), names, {}, static_cast<int>(b.line), static_cast<int>(b.column) + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ParseError(std::string(e.description()), static_cast<int>(e.source().begin.line),
                         static_cast<int>(e.source().begin.column));
    }
    check_keys(root, {"dimension", "potential", "metric", "box", "well_guess", "options", "verify", "normal_form"},
               "the top level");

    RunConfig cfg;
    FieldSpec& f = cfg.field;
    const toml::node* dn = root.get("dimension");
    if (!dn) throw ParseError("missing key 'dimension'", 1, 1);
    f.dim = as_int(*dn, "dimension");
    if (f.dim < 2) fail(*dn, "dimension must be at least 2");
    const int d = f.dim;
    const auto names = coordinate_names(d);

    const toml::node* pn = root.get("potential");
    if (!pn) throw ParseError("missing key 'potential'", 1, 1);
    const auto& pa = as_array(*pn, "potential");
    if (static_cast<int>(pa.size()) != d) fail(*pn, "potential needs one expression per coordinate");
    for (const auto& e : pa) f.potential.push_back(expression(e, names, "potential entry"));

    f.metric.assign(d, std::vector<Poly>(d, Poly(d)));
    for (int i = 0; i < d; ++i) f.metric[i][i] = Poly::constant(d, 1);
    f.flat = true;
    if (const toml::node* mn = root.get("metric")) {
        const auto& rows = as_array(*mn, "metric");
        if (static_cast<int>(rows.size()) != d) fail(*mn, "metric must have d rows");
        for (int i = 0; i < d; ++i) {
            const auto& row = as_array(rows[i], "metric row");
            if (static_cast<int>(row.size()) != d) fail(rows[i], "metric rows must have d entries");
            for (int j = 0; j < d; ++j) f.metric[i][j] = expression(row[j], names, "metric entry");
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < i; ++j)
                if (!(f.metric[i][j] == f.metric[j][i]))
                    fail(*as_array(rows[i], "").get(j), "metric is not symmetric");
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (!(f.metric[i][j] == (i == j ? Poly::constant(d, 1) : Poly(d)))) f.flat = false;
    }

    f.box.assign(d, 1.0);
    if (const toml::node* bn = root.get("box")) {
        f.box = numbers(*bn, "box");
        if (static_cast<int>(f.box.size()) != d) fail(*bn, "box needs d half widths");
        for (double v : f.box)
            if (!(v > 0)) fail(*bn, "box half widths must be positive");
    }
    f.well_guess.assign(d, 0.0);
    if (const toml::node* gn = root.get("well_guess")) {
        f.well_guess = numbers(*gn, "well_guess");
        if (static_cast<int>(f.well_guess.size()) != d) fail(*gn, "well_guess needs d entries");
    }

    if (const toml::node* on = root.get("options")) {
        if (!on->is_table()) fail(*on, "options must be a table");
        const auto& t = *on->as_table();
        check_keys(t, {"rank_tol", "resonance_cap", "beta_gap_tol", "resonance_tol", "max_iter"}, "options");
        auto& o = f.options;
        if (auto* n = t.get("rank_tol")) o.rank_tol = as_number(*n, "rank_tol");
        if (auto* n = t.get("resonance_cap")) o.resonance_cap = as_int(*n, "resonance_cap");
        if (auto* n = t.get("beta_gap_tol")) o.beta_gap_tol = as_number(*n, "beta_gap_tol");
        if (auto* n = t.get("resonance_tol")) o.resonance_tol = as_number(*n, "resonance_tol");
        if (auto* n = t.get("max_iter")) o.max_iter = as_int(*n, "max_iter");
    }

    if (const toml::node* vn = root.get("verify")) {
        if (!vn->is_table()) fail(*vn, "verify must be a table");
        const auto& t = *vn->as_table();
        check_keys(t, {"hbar", "points", "half_width", "box_factor", "levels", "refine", "box_check"}, "verify");
        auto& v = cfg.verify;
        if (auto* n = t.get("hbar")) v.hbar = numbers(*n, "hbar");
        if (auto* n = t.get("points")) {
            std::vector<int> pts;
            if (n->is_integer())
                pts.assign(d, as_int(*n, "points"));
            else
                for (const auto& e : as_array(*n, "points")) pts.push_back(as_int(e, "points"));
            if (static_cast<int>(pts.size()) != d) fail(*n, "points needs d entries");
            v.points = pts;
        }
        if (auto* n = t.get("half_width")) v.half_width = numbers(*n, "half_width");
        if (auto* n = t.get("box_factor")) v.box_factor = as_number(*n, "box_factor");
        if (auto* n = t.get("levels")) v.levels = as_int(*n, "levels");
        if (auto* n = t.get("refine")) v.refine = as_bool(*n, "refine");
        if (auto* n = t.get("box_check")) v.box_check = as_bool(*n, "box_check");
    }
    if (const toml::node* nn = root.get("normal_form")) {
        if (!nn->is_table()) fail(*nn, "normal_form must be a table");
        const auto& t = *nn->as_table();
        check_keys(t, {"r1", "r2"}, "normal_form");
        if (auto* n = t.get("r1")) cfg.normal_form.r1 = as_int(*n, "r1");
        if (auto* n = t.get("r2")) cfg.normal_form.r2 = as_int(*n, "r2");
    }
    return cfg;
}

FieldSpec parse_field(const std::string& config_text) { return parse_config(config_text).field; }

}  // namespace magwell
