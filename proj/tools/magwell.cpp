#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "magwell/config.hpp"
#include "magwell/errors.hpp"
#include "magwell/report.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace magwell;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitAssumption = 2;
constexpr int kExitConvergence = 3;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

// UTC, ISO 8601. SOURCE_DATE_EPOCH pins the clock for reproducible output.
std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Globals {
    std::string output_dir = "magwell-out";
    std::uint64_t seed = 1;
    int threads = 1;
    bool rational = false;
};

struct Run {
    explicit Run(std::string sub) : subcommand(std::move(sub)) {}
    std::string subcommand;
    std::string config_path;
    std::string config_text;
    json parameters = json::object();
    std::string started = timestamp();
};

json manifest(const Run& run, const Globals& g) {
    json m;
    m["tool"] = "magwell";
    m["version"] = MAGWELL_VERSION;
    m["subcommand"] = run.subcommand;
    if (run.config_path.empty())
        m["config"] = nullptr;
    else
        m["config"] = {{"path", run.config_path}, {"sha256", sha256_hex(run.config_text)}};
    m["parameters"] = run.parameters;
    m["seed"] = g.seed;
    m["threads"] = g.threads;
    m["started"] = run.started;
    m["finished"] = timestamp();
    return m;
}

fs::path write_doc(const Globals& g, const std::string& name, const Run& run, const json& result) {
    fs::create_directories(g.output_dir);
    fs::path p = fs::path(g.output_dir) / name;
    std::ofstream out(p);
    out << json{{"manifest", manifest(run, g)}, {"result", result}}.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return p;
}

void write_text(const Globals& g, const std::string& name, const std::string& text) {
    fs::create_directories(g.output_dir);
    std::ofstream out(fs::path(g.output_dir) / name);
    out << text;
}

RunConfig load(Run& run, const std::string& path) {
    run.config_path = path;
    run.config_text = read_file(path);
    return parse_config(run.config_text);
}

std::vector<double> positive_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size() || !(v > 0)) throw CLI::ValidationError(flag, "expected positive numbers");
        out.push_back(v);
    }
    return out;
}

// Sum beta_j(q0) |z_j|^2 + <M0 tau, tau> in the real E1 layout.
template <class S>
Series<S> harmonic_symbol(const WellAnalysis& wa, int nmax, int tmax) {
    using F = Field<S>;
    const int s = wa.frames.s, k = wa.frames.k;
    LayoutPtr L = e1_layout(s, k, false);
    Series<S> h(L, nmax, tmax);
    for (int j = 0; j < s; ++j) {
        S b = F::from_double(wa.well.spectrum.betas[j]);
        h += mul_pointwise(Series<S>::variable(L, nmax, tmax, L->osc_a(j), 2), Series<S>::constant(L, nmax, tmax, b));
        h += mul_pointwise(Series<S>::variable(L, nmax, tmax, L->osc_b(j), 2), Series<S>::constant(L, nmax, tmax, b));
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            S m = F::from_double(wa.quad.M0(i, j));
            h += mul_pointwise(mul_pointwise(Series<S>::variable(L, nmax, tmax, L->tau(i)),
                                             Series<S>::variable(L, nmax, tmax, L->tau(j))),
                               Series<S>::constant(L, nmax, tmax, m));
        }
    return h;
}


template <class S>
json bnf_result(const Series<S>& symbol, int r1, int levels, const std::vector<double>& hbars) {
    auto table = birkhoff(symbol, r1);
    json res = json::parse(normal_form_json(table));
    const int s = symbol.layout().s;
    json eff = json::array();
    json pred = json::array();
    for (int n = 1; n <= levels; ++n) {
        std::vector<int> idx(s, 1);
        if (s > 0) idx[0] = n;
        auto sym = effective_symbol(table, idx);
        eff.push_back({{"n", idx}, {"symbol", json::parse(series_json(sym))}});
        if (symbol.layout().k == 0) {
            Series<cplx> f = to_float(sym);
            bool base_free = true;
            for (const auto& [m, c] : f.terms())
                for (int i = 0; i < f.layout().nvars(); ++i)
                    if (m[i]) base_free = false;
            if (base_free)
                for (double hb : hbars)
                    pred.push_back({{"n", idx}, {"hbar", hb}, {"eigenvalue", round_sig(evaluate_parameter_series(f, hb))}});
        }
    }
    res["effective_symbols"] = eff;
    res["predicted_levels"] = pred;
    return res;
}

int cmd_analyze(const Globals& g, const std::string& config, int levels) {
    Run run{"analyze"};
    RunConfig cfg = load(run, config);
    run.parameters = {{"levels", levels}};
    WellAnalysis wa = analyze_well(cfg.field);
    SpectralPrediction p = assemble_prediction(wa.well, wa.quad, levels);
    json res = {{"well", json::parse(well_analysis_json(wa))}, {"prediction", json::parse(prediction_json(p))}};
    std::cout << write_doc(g, "analyze.json", run, res).string() << "\n";
    std::cout << "b0 = " << wa.well.b0 << ", s = " << wa.frames.s << ", k = " << wa.frames.k << "\n";
    return 0;
}

struct NormalFormArgs {
    std::string config, symbol;
    int s = 1, k = 0, r = 0, nmax = 0, tmax = -1, levels = 3;
    std::string hbar = "0.02,0.04,0.08";
};

int cmd_bnf(const Globals& g, const NormalFormArgs& a) {
    Run run{"bnf"};
    if (a.config.empty() && a.symbol.empty()) throw CLI::ValidationError("bnf", "give a config or --symbol");
    std::optional<RunConfig> cfg;
    if (!a.config.empty()) cfg = load(run, a.config);
    int r1 = a.r ? a.r : (cfg && cfg->normal_form.r1 ? *cfg->normal_form.r1 : 6);
    std::vector<double> hbars = positive_list(a.hbar, "--hbar");
    json res;
    if (cfg) {
        WellAnalysis wa = analyze_well(cfg->field);
        const int s = wa.frames.s, k = wa.frames.k;
        const int nmax = a.nmax ? a.nmax : r1 - 1, tmax = a.tmax >= 0 ? a.tmax : 2;
        const bool exact = g.rational;
        run.parameters = {{"r1", r1}, {"nmax", nmax}, {"tmax", tmax}, {"exact", exact}, {"symbol", a.symbol}};
        Series<Quad> extra(e1_layout(s, k, false), nmax, tmax);
        if (!a.symbol.empty()) extra = parse_symbol(a.symbol, e1_layout(s, k, false), nmax, tmax);
        if (exact) {
            res = bnf_result(change_basis(harmonic_symbol<Quad>(wa, nmax, tmax) + extra), r1, a.levels, hbars);
        } else {
            res = bnf_result(change_basis(harmonic_symbol<cplx>(wa, nmax, tmax) + to_float(extra)), r1, a.levels, hbars);
        }
        res["source"] = "harmonic part from the well data" + std::string(a.symbol.empty() ? "" : " plus --symbol");
    } else {
        const int nmax = a.nmax ? a.nmax : r1 - 1, tmax = a.tmax >= 0 ? a.tmax : (a.k > 0 ? 2 : 0);
        run.parameters = {{"symbol", a.symbol}, {"s", a.s}, {"k", a.k}, {"r1", r1}, {"nmax", nmax}, {"tmax", tmax},
                          {"exact", true}};
        Series<Quad> sym = parse_symbol(a.symbol, e1_layout(a.s, a.k, false), nmax, tmax);
        res = bnf_result(change_basis(sym), r1, a.levels, hbars);
        res["source"] = "explicit symbol";
    }
    std::cout << write_doc(g, "bnf.json", run, res).string() << "\n";
    return 0;
}

int cmd_second(const Globals& g, const NormalFormArgs& a) {
    Run run{"second"};
    if (a.config.empty() && a.symbol.empty()) throw CLI::ValidationError("second", "give a config or --symbol");
    std::optional<RunConfig> cfg;
    if (!a.config.empty()) cfg = load(run, a.config);
    const int r2 = a.r ? a.r : (cfg && cfg->normal_form.r2 ? *cfg->normal_form.r2 : 5);
    const int nmax = a.nmax ? a.nmax : r2, tmax = a.tmax >= 0 ? a.tmax : 3;
    SeriesF n1;
    json res;
    if (cfg) {
        WellAnalysis wa = analyze_well(cfg->field);
        if (wa.frames.k == 0) throw CLI::ValidationError("second", "the field has no kernel directions at the well (k = 0)");
        n1 = quadratic_model(wa.well, wa.quad, wa.frames.s, wa.frames.k, nmax, tmax);
        if (!a.symbol.empty()) n1 += to_float(parse_symbol(a.symbol, e1_layout(wa.frames.s, wa.frames.k, false), nmax, tmax));
        res["source"] = "quadratic model of the first-level symbol" + std::string(a.symbol.empty() ? "" : " plus --symbol");
    } else {
        if (a.k < 1) throw CLI::ValidationError("--k", "the second normal form needs k >= 1");
        n1 = to_float(parse_symbol(a.symbol, e1_layout(a.s, a.k, false), nmax, tmax));
        res["source"] = "explicit first-level symbol";
    }
    run.parameters = {{"r2", r2}, {"nmax", nmax}, {"tmax", tmax}, {"symbol", a.symbol}};
    OscillatorReduction red = reduce_to_oscillator(n1, nmax, tmax);
    auto table = second_birkhoff(red.series, r2);
    std::vector<int> ones(red.nu0.size(), 1);
    SeriesF m1 = effective_m_symbol(table, ones);
    ConstantTerm ct = constant_term(m1);
    res["reduction"] = json::parse(reduction_json(red));
    res["table"] = json::parse(normal_form_json(table));
    res["m1"] = json::parse(series_json(m1));
    res["m1_at_origin"] = coefficients_at_origin(m1);
    res["constant_term"] = json::parse(constant_term_json(ct));
    std::cout << write_doc(g, "second.json", run, res).string() << "\n";
    return 0;
}

struct VerifyArgs {
    std::string config, hbar, points, half_width, dump_matrix;
    double box_factor = 0.0, tol = 0.0;
    int levels = 0;
    bool no_refine = false, no_box_check = false;
};

std::vector<int> int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

int cmd_verify(const Globals& g, const VerifyArgs& a) {
    Run run{"verify"};
    RunConfig cfg = load(run, a.config);
    VerifyOptions opt;
    const auto& vc = cfg.verify;
    if (vc.hbar) opt.hbars = *vc.hbar;
    if (vc.points) opt.n = *vc.points;
    if (vc.half_width) opt.half_width = *vc.half_width;
    if (vc.box_factor) opt.box_factor = *vc.box_factor;
    if (vc.levels) opt.levels = *vc.levels;
    if (vc.refine) opt.refine = *vc.refine;
    if (vc.box_check) opt.box_check = *vc.box_check;
    if (!a.hbar.empty()) opt.hbars = positive_list(a.hbar, "--hbar");
    if (!a.points.empty()) opt.n = int_list(a.points);
    if (!a.half_width.empty()) opt.half_width = positive_list(a.half_width, "--half-width");
    if (a.box_factor > 0) opt.box_factor = a.box_factor;
    if (a.levels > 0) opt.levels = a.levels;
    if (a.no_refine) opt.refine = false;
    if (a.no_box_check) opt.box_check = false;
    if (a.tol > 0) opt.eig.tol = a.tol;
    opt.eig.seed = g.seed;
    opt.threads = g.threads;
    run.parameters = {{"hbar", opt.hbars}, {"points", opt.n}, {"half_width", opt.half_width},
                      {"box_factor", opt.box_factor}, {"levels", opt.levels}, {"refine", opt.refine},
                      {"box_check", opt.box_check}, {"tol", opt.eig.tol}};
    VerifyResult vr = run_verification(cfg.field, opt);
    json res = json::parse(verification_json(vr));
    std::cout << write_doc(g, "verify.json", run, res).string() << "\n";
    write_text(g, "verify.csv", eig_table_csv(vr.rows));
    if (!a.dump_matrix.empty()) {
        GridSetup gs;
        gs.hbar = opt.hbars.front();
        gs.n = opt.n.empty() ? std::vector<int>(cfg.field.dim, 32) : opt.n;
        if (gs.n.size() == 1) gs.n.assign(cfg.field.dim, gs.n[0]);
        gs.half_width = opt.half_width.empty() ? cfg.field.box : opt.half_width;
        gs.center = cfg.field.well_guess;
        std::ofstream(a.dump_matrix) << build_grid_operator(cfg.field, gs).triplets();
    }
    for (const auto& n : vr.notes) std::cout << "note: " << n << "\n";
    for (const auto& f : vr.fit.flags) std::cout << "flag: " << f << "\n";
    if (vr.fit.sufficient_span)
        std::cout << "slope of lambda_1 - b0 hbar: " << vr.fit.sub_slope << ", spacing slope: " << vr.fit.spacing_slope
                  << "\n";
    return 0;
}

int cmd_report(const Globals& g, std::vector<std::string> inputs) {
    Run run{"report"};
    if (inputs.empty() && fs::is_directory(g.output_dir))
        for (const auto& e : fs::directory_iterator(g.output_dir))
            if (e.path().extension() == ".json" && e.path().filename() != "report.json") inputs.push_back(e.path().string());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw CLI::ValidationError("report", "no JSON documents found");
    json docs = json::object();
    std::ostringstream csv;
    csv << "source,hbar,level,eigenvalue,residual,nx,ny,nz,box,kind,note\n";
    for (const auto& path : inputs) {
        json d = json::parse(read_file(path));
        std::string key = d.at("manifest").at("subcommand").get<std::string>();
        docs[fs::path(path).stem().string() == key ? key : fs::path(path).stem().string()] = d;
        if (key == "verify")
            for (const auto& r : d["result"]["rows"]) {
                csv << key << "," << r["hbar"] << "," << r["level"] << "," << r["eigenvalue"] << "," << r["residual"];
                for (int a = 0; a < 3; ++a) {
                    csv << ",";
                    if (r["kind"] != "refined" && a < static_cast<int>(r["n"].size())) csv << r["n"][a];
                }
                csv << "," << r["box"] << "," << r["kind"].get<std::string>() << ","
                    << r.value("note", std::string()) << "\n";
            }
    }
    run.parameters = {{"inputs", inputs}};
    std::cout << write_doc(g, "report.json", run, docs).string() << "\n";
    write_text(g, "report.csv", csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magnetic well analysis: geometry, normal forms and grid verification"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--output-dir", g.output_dir, "Directory for JSON and CSV artifacts");
    app.add_option("--seed", g.seed, "Seed for the eigen solver start vectors");
    app.add_option("--threads", g.threads, "Concurrent hbar runs in verify")->check(CLI::PositiveNumber);
    app.add_flag("--rational", g.rational, "Exact arithmetic where the input allows it");

    std::string config;
    int levels = 3;
    auto* analyze = app.add_subcommand("analyze", "Well, frames and spectral predictions");
    analyze->add_option("config", config, "TOML configuration")->required()->check(CLI::ExistingFile);
    analyze->add_option("--levels", levels, "Number of predicted levels");

    NormalFormArgs nf;
    auto* bnf = app.add_subcommand("bnf", "First normal form of an explicit symbol or of the well's harmonic part");
    bnf->add_option("config", nf.config, "TOML configuration")->check(CLI::ExistingFile);
    bnf->add_option("--symbol", nf.symbol, "Polynomial in x1.., xi1.., t1.., tau1.. and hbar (aliases I1.., z2, z4)");
    bnf->add_option("--s", nf.s, "Number of oscillators for --symbol");
    bnf->add_option("--k", nf.k, "Number of (t, tau) pairs for --symbol");
    bnf->add_option("--r1", nf.r, "Truncation order");
    bnf->add_option("--nmax", nf.nmax, "Fiber degree cap");
    bnf->add_option("--tmax", nf.tmax, "Extra base degree");
    bnf->add_option("--levels", nf.levels, "Effective symbols for n = 1..levels");
    bnf->add_option("--hbar", nf.hbar, "Comma separated hbar values for level predictions");

    NormalFormArgs sf;
    sf.s = 0;
    auto* second = app.add_subcommand("second", "Second normal form along the field lines");
    second->add_option("config", sf.config, "TOML configuration")->check(CLI::ExistingFile);
    second->add_option("--symbol", sf.symbol, "First-level symbol such as \"tau1^2 + hbar*(1 + t1^2)\"");
    second->add_option("--s", sf.s, "Number of oscillators left in --symbol (normally 0)");
    second->add_option("--k", sf.k, "Number of (t, tau) pairs for --symbol");
    second->add_option("--r2", sf.r, "Truncation order");
    second->add_option("--nmax", sf.nmax, "Fiber degree cap");
    second->add_option("--tmax", sf.tmax, "Extra base degree");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Grid eigenvalues and power-law fits");
    verify->add_option("config", va.config, "TOML configuration")->required()->check(CLI::ExistingFile);
    verify->add_option("--hbar", va.hbar, "Comma separated hbar values");
    verify->add_option("--points", va.points, "Interior points per axis (one value or one per axis)");
    verify->add_option("--half-width", va.half_width, "Fixed box half widths");
    verify->add_option("--box-factor", va.box_factor, "Box half width in localisation lengths");
    verify->add_option("--levels", va.levels, "Levels per hbar");
    verify->add_option("--tol", va.tol, "Residual tolerance");
    verify->add_flag("--no-refine", va.no_refine, "Skip the coarse grid and extrapolation");
    verify->add_flag("--no-box-check", va.no_box_check, "Skip the half-box control run");
    verify->add_option("--dump-matrix", va.dump_matrix, "Write the operator at the first hbar as triplets");

    std::vector<std::string> inputs;
    auto* report = app.add_subcommand("report", "Merge JSON artifacts into one document and a CSV");
    report->add_option("inputs", inputs, "JSON files (default: all in --output-dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    try {
        if (*analyze) return cmd_analyze(g, config, levels);
        if (*bnf) return cmd_bnf(g, nf);
        if (*second) return cmd_second(g, sf);
        if (*verify) return cmd_verify(g, va);
        if (*report) return cmd_report(g, inputs);
    } catch (const AssumptionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAssumption;
    } catch (const ResonanceError& e) {
        std::cerr << "error: non-resonance condition fails: " << e.what() << "\n";
        return kExitAssumption;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
