// lagspaces: batch front end for the Laguerre-type kernel and function-space
// numerics. Subcommands: eval, norm, molecules, verify, sweep. All floats
// print with 17 significant digits; reports are JSON, sweeps are CSV.
//
// Exit codes: 0 success, 2 usage or config-schema violation, 3 I/O failure
// (missing output directory, unreadable field file), 4 tolerance breach.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "lagspaces/corpus.hpp"
#include "lagspaces/verify.hpp"

namespace fs = std::filesystem;
using namespace lagspaces;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitTolerance = 4;

double parse_exponent(const std::string& s) {
    if (s == "inf" || s == "infinity") return spaces::infinity;
    return std::stod(s);
}

spectral::CoeffField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot read field file: " + path);
    nlohmann::json j;
    in >> j;
    return spectral::CoeffField::from_json(j);
}

void ensure_out_dir(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw std::ios_base::failure("output directory does not exist: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << text;
}

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

corpus::Config load_config(const GlobalOptions& g) {
    corpus::Config cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw std::ios_base::failure("cannot read config: " + g.config_path);
        nlohmann::json j;
        try {
            in >> j;
            cfg = corpus::Config::from_json(j);
        } catch (const std::exception& e) {
            throw std::invalid_argument(std::string("config schema violation: ") + e.what());
        }
    }
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.seed_set) cfg.corpus_seed = g.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laguerre-type kernels, function-space norms and molecular decompositions"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--threads", g.threads, "worker threads (default: hardware)");
    app.add_option("--out", g.out_dir, "output directory for reports");
    auto* seed_opt = app.add_option("--seed", g.seed, "corpus seed override");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "evaluate a single quantity");
    eval->require_subcommand(1);
    struct {
        std::vector<int> k;
        std::vector<double> alpha{0.5};
        std::vector<double> x, y;
        double a = 0.0, z = 0.0, nu = 0.0, t = 1.0;
        int m = 0, K = 200;
        std::string route = "closed";
    } e;
    auto* ev_phi = eval->add_subcommand("phi", "Laguerre function of Hermite type");
    ev_phi->add_option("--k", e.k)->required();
    ev_phi->add_option("--alpha", e.alpha)->required();
    ev_phi->add_option("--x", e.x)->required();
    auto* ev_ell = eval->add_subcommand("ell", "Laguerre function of convolution type");
    ev_ell->add_option("--k", e.k)->required();
    ev_ell->add_option("--alpha", e.alpha)->required();
    ev_ell->add_option("--x", e.x)->required();
    auto* ev_lag = eval->add_subcommand("laguerre", "Laguerre polynomial L_k^a(x)");
    ev_lag->add_option("--k", e.k)->required();
    ev_lag->add_option("--a", e.a)->required();
    ev_lag->add_option("--x", e.x)->required();
    auto* ev_bes = eval->add_subcommand("bessel", "scaled modified Bessel e^{-z} I_nu(z)");
    ev_bes->add_option("--nu", e.nu)->required();
    ev_bes->add_option("--z", e.z)->required();
    auto* ev_ker = eval->add_subcommand("kernel", "heat or Poisson-type kernel value");
    ev_ker->add_option("--t", e.t)->required();
    ev_ker->add_option("--m", e.m);
    ev_ker->add_option("--alpha", e.alpha)->required();
    ev_ker->add_option("--x", e.x)->required();
    ev_ker->add_option("--y", e.y)->required();
    ev_ker->add_option("--route", e.route)
        ->check(CLI::IsMember({"closed", "series", "subordination", "integral"}));
    ev_ker->add_option("--K", e.K);

    // ---- norm ----
    auto* norm = app.add_subcommand("norm", "function-space norm of a stored field");
    norm->require_subcommand(1);
    struct {
        std::string field, p = "2", q = "2";
        double sigma = 0.0;
        int m = 0;
        bool override_regime = false;
    } n;
    for (const char* name : {"besov", "tl"}) {
        auto* sub = norm->add_subcommand(name);
        sub->add_option("--field", n.field, "field JSON file")->required();
        sub->add_option("--sigma", n.sigma);
        sub->add_option("--p", n.p);
        sub->add_option("--q", n.q);
        sub->add_option("--m", n.m)->required();
        sub->add_flag("--override", n.override_regime, "skip the admissibility checks");
    }

    // ---- molecules ----
    auto* mol = app.add_subcommand("molecules", "molecular decomposition of a stored field");
    mol->require_subcommand(1);
    struct {
        std::string field;
        double sigma = 0.0;
        std::string p = "2", q = "2";
        int m = 3, M = 4, N = 1;
        int nu_lo = -4, nu_hi = 4;
        double B = 8.0;
    } md;
    for (const char* name : {"decompose", "verify"}) {
        auto* sub = mol->add_subcommand(name);
        sub->add_option("--field", md.field)->required();
        sub->add_option("--sigma", md.sigma);
        sub->add_option("--p", md.p);
        sub->add_option("--q", md.q);
        sub->add_option("--m", md.m);
        sub->add_option("--M", md.M);
        sub->add_option("--N", md.N);
        sub->add_option("--nu-lo", md.nu_lo);
        sub->add_option("--nu-hi", md.nu_hi);
        sub->add_option("--B", md.B);
    }

    // ---- verify ----
    auto* ver = app.add_subcommand("verify", "run verification suites");
    std::vector<std::string> suites;
    ver->add_option("--suite", suites, "suite names")
        ->required()
        ->check(CLI::IsMember(verify::known_suites()));

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "kernel bound-certification sweep (CSV)");

    // let --config/--threads/--out/--seed appear after the subcommand
    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
        for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (const char* env = std::getenv("LAGSPACES_THREADS"))
            runtime::set_thread_count(std::max(1, std::atoi(env)));
        else if (g.threads > 0)
            runtime::set_thread_count(g.threads);
        g.seed_set = seed_opt->count() > 0;
        corpus::Config cfg = load_config(g);

        if (eval->parsed()) {
            double value = 0.0;
            if (ev_phi->parsed())
                value = specfun::phi_eval(MultiIndex{e.k}, AlphaIndex(e.alpha), e.x);
            else if (ev_ell->parsed())
                value = specfun::ell_eval(MultiIndex{e.k}, AlphaIndex(e.alpha), e.x);
            else if (ev_lag->parsed())
                value = specfun::laguerre_polynomial(e.k.at(0), e.a, e.x.at(0));
            else if (ev_bes->parsed())
                value = specfun::bessel_i_scaled(e.nu, e.z);
            else if (ev_ker->parsed()) {
                kernels::KernelQuery q{e.t, e.m, Point(e.x), Point(e.y), AlphaIndex(e.alpha)};
                if (e.route == "closed")
                    value = kernels::heat_kernel_closed(q);
                else if (e.route == "series")
                    value = kernels::patm_series(q, e.K).value;
                else if (e.route == "subordination")
                    value = kernels::poisson_kernel_subordination(q);
                else
                    value = kernels::patm_integral(q);
            }
            std::cout << sig17(value) << "\n";
            return 0;
        }

        if (norm->parsed()) {
            spectral::CoeffField f = load_field(n.field);
            spectral::SpaceParams P;
            P.sigma = n.sigma;
            P.p = parse_exponent(n.p);
            P.q = parse_exponent(n.q);
            P.m = n.m;
            P.d = f.dim();
            numerics::TGrid tg(cfg.grids.nu_min, cfg.grids.nu_max, cfg.grids.nodes_per_octave);
            auto xg = numerics::QuadGrid::make(f.dim(), cfg.grids.x_max,
                                               cfg.grids.nodes_per_panel);
            spaces::NormOptions opt;
            opt.override_regime = n.override_regime;
            bool besov = norm->get_subcommands().front()->get_name() == "besov";
            double value = besov ? spaces::besov_norm(f, P, tg, xg, opt)
                                 : spaces::tl_norm(f, P, tg, xg, opt);
            std::cout << sig17(value) << "\n";
            return 0;
        }

        if (mol->parsed()) {
            spectral::CoeffField f = load_field(md.field);
            spectral::SpaceParams P;
            P.sigma = md.sigma;
            P.p = parse_exponent(md.p);
            P.q = parse_exponent(md.q);
            P.m = md.m;
            P.M = md.M;
            P.N = md.N;
            P.d = f.dim();
            auto xg = numerics::QuadGrid::make_aligned(
                f.dim(), md.B, std::ldexp(1.0, std::min(md.nu_lo, 0)), 6);
            auto dec = molecular::decompose(f, P, dyadic::CubeSet{md.nu_lo, md.nu_hi, md.B}, xg);
            nlohmann::json j = dec.to_json();
            if (mol->get_subcommands().front()->get_name() == "verify") {
                nlohmann::json shapes = nlohmann::json::array();
                for (const auto& rec : dec.records) {
                    auto repv = molecular::molecule_verify(rec, md.B, 128);
                    shapes.push_back(
                        {{"nu", rec.Q.nu}, {"m", rec.Q.m}, {"sup_ratio", repv.sup_ratio}});
                }
                j["shape_ratios"] = shapes;
            }
            ensure_out_dir(cfg.out_dir);
            std::string path = cfg.out_dir + "/molecules.json";
            write_text(path, j.dump(2) + "\n");
            std::cout << "residual " << sig17(dec.residual) << "\n"
                      << "seq_norm_besov " << sig17(dec.seq_norm_besov) << "\n"
                      << "report " << path << "\n";
            return 0;
        }

        if (ver->parsed()) {
            ensure_out_dir(cfg.out_dir);
            bool all_pass = true;
            for (const auto& name : suites) {
                std::map<int, std::vector<std::vector<double>>> rows;
                auto rep = verify::run_suite(name, cfg, &rows);
                for (const auto& [d, data] : rows)
                    verify::write_csv(cfg.out_dir + "/sweep_" + name + "_d" +
                                          std::to_string(d) + ".csv",
                                      verify::sweep_header(d), data);
                write_text(cfg.out_dir + "/report_" + name + ".json",
                           rep.to_json().dump(2) + "\n");
                for (const auto& c : rep.checks)
                    std::cout << name << "/" << c.name << ": " << (c.pass ? "PASS" : "FAIL")
                              << " (value " << sig17(c.value) << ", threshold "
                              << sig17(c.threshold) << ")\n";
                all_pass = all_pass && rep.pass();
            }
            return all_pass ? 0 : kExitTolerance;
        }

        if (sweep->parsed()) {
            ensure_out_dir(cfg.out_dir);
            auto rep = verify::run_kernel_bounds_suite(cfg);
            write_text(cfg.out_dir + "/report_kernel_bounds.json", rep.to_json().dump(2) + "\n");
            for (const auto& c : rep.checks)
                std::cout << "kernel_bounds/" << c.name << ": " << (c.pass ? "PASS" : "FAIL")
                          << " (value " << sig17(c.value) << ")\n";
            return rep.pass() ? 0 : kExitTolerance;
        }
    } catch (const std::ios_base::failure& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
