// glvortex command line driver: batch access to the spectrum, Abrikosov-ratio,
// bifurcation-branch, energy-curve, gauge-fixing and verification pipelines.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "glv/abrikosov.hpp"
#include "glv/gauge.hpp"
#include "glv/io.hpp"
#include "glv/operators.hpp"
#include "glv/solver.hpp"
#include "glv/theta.hpp"
#include "glv/verify.hpp"

using namespace glv;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitConvergence = 4;

cd parse_tau(double re, double im) {
    if (im == 0.0) throw std::invalid_argument("tau must have Im tau != 0");
    return cd(re, im);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else
            cur += c;
    }
    if (!cur.empty()) out.push_back(std::stod(cur));
    return out;
}

void emit(const json& j, const std::string& path) {
    if (path.empty() || path == "-")
        std::cout << j.dump(2) << "\n";
    else {
        std::ofstream os(path);
        os << j.dump(2) << "\n";
    }
}

int cmd_spectrum(int n, cd tau, int N, int k, int order, const std::string& out_path) {
    LatticeShape shape = normalize_shape(tau);
    GridSpec g(shape, n, N, N);
    MagneticLaplacian L(g, order);
    auto eigs = L.eigs_lowest(k);

    // degeneracy count within the lowest cluster (values within 1e-3*n)
    std::vector<std::vector<double>> rows;
    printf("# n=%d tau=(%s,%s) N=%d order=%d\n", n, format_double(shape.tau.real()).c_str(),
           format_double(shape.tau.imag()).c_str(), N, order);
    printf("index,computed,exact,abs_err,degeneracy\n");
    for (int i = 0; i < k; ++i) {
        int level = i / n;  // exact spectrum (2k+1) n with multiplicity n
        double exact = double((2 * level + 1) * n);
        int degeneracy = 0;
        for (int j = 0; j < k; ++j)
            if (std::abs(eigs[j].value - eigs[i].value) < 1e-3 * n) ++degeneracy;
        rows.push_back({double(i), eigs[i].value, exact, std::abs(eigs[i].value - exact),
                        double(degeneracy)});
        printf("%d,%s,%s,%s,%d\n", i, format_double(eigs[i].value).c_str(),
               format_double(exact).c_str(), format_double(std::abs(eigs[i].value - exact)).c_str(),
               degeneracy);
    }
    if (!out_path.empty())
        write_csv(out_path, {"index", "computed", "exact", "abs_err", "degeneracy"}, rows);
    return 0;
}

int cmd_beta_scan(double re0, double re1, int nre, double im0, double im1, int nim, int N, int K,
                  const std::string& out_path) {
    BetaScan scan = beta_scan(re0, re1, nre, im0, im1, nim, {N, K});
    std::vector<std::vector<double>> rows;
    printf("re_tau,im_tau,beta,N2,N4\n");
    for (const auto& r : scan.rows) {
        rows.push_back({r.re, r.im, r.beta, r.N2, r.N4});
        printf("%s,%s,%s,%s,%s\n", format_double(r.re).c_str(), format_double(r.im).c_str(),
               format_double(r.beta).c_str(), format_double(r.N2).c_str(),
               format_double(r.N4).c_str());
    }
    if (!out_path.empty()) write_csv(out_path, {"re_tau", "im_tau", "beta", "N2", "N4"}, rows);
    return 0;
}

int cmd_minimize_beta(cd start, double tol, int N, int K) {
    MinimizeResult r = minimize_beta(start, tol, {N, K});
    printf("tau_star,%s,%s\n", format_double(r.tau_star.real()).c_str(),
           format_double(r.tau_star.imag()).c_str());
    printf("beta_star,%s\n", format_double(r.beta_star).c_str());
    printf("grad_norm,%s\n", format_double(r.grad_norm).c_str());
    printf("evaluations,%d\n", r.iterations);
    return 0;
}

int cmd_branch(double kappa, cd tau, int N, const std::vector<double>& ts, double lambda_request,
               const std::string& out_path, const std::string& state_prefix) {
    json j;
    j["kappa"] = kappa;
    LatticeShape shape = normalize_shape(tau);
    j["tau"] = {shape.tau.real(), shape.tau.imag()};
    j["grid"] = N;
    j["residual_tolerance"] = 1e-10;
    if (lambda_request > 0.0 && lambda_request <= 1.0) {
        j["status"] = "no lattice solution: requested lambda <= 1 (b >= kappa^2); "
                      "the normal state is the only solution near the normal branch";
        j["samples"] = json::array();
        emit(j, out_path);
        return 0;
    }
    GlSolver S(shape, kappa, N);
    json samples = json::array();
    std::string error;
    int failed_at = -1;
    std::optional<BranchSample> warm;
    for (size_t i = 0; i < ts.size(); ++i) {
        try {
            BranchSample s;
            if (ts[i] == 0.0) {
                s.t = 0.0;
                s.lambda = 1.0;
                s.psi = CField(S.grid());
                s.h = RField(S.grid());
                GaugePerturbation ga{s.h, VField(S.grid())};
                s.energy = S.energy(s.psi, ga, 1.0);
            } else {
                s = S.branch_point(ts[i], warm);
                warm = s;
            }
            samples.push_back({{"t", s.t},
                               {"lambda", s.lambda},
                               {"mu", s.mu},
                               {"energy", s.energy},
                               {"residual", s.residual},
                               {"newton_iters", s.newton_iters}});
            if (!state_prefix.empty()) {
                StateFile sf = StateFile::from_fields(S.grid(), kappa, s.lambda, s.psi, s.h);
                sf.provenance.push_back("branch sample t=" + format_double(s.t) +
                                        " residual=" + format_double(s.residual));
                std::string path = state_prefix + "_" + std::to_string(i) + ".state";
                sf.write(path);
                samples.back()["state_file"] = path;
            }
        } catch (const ConvergenceError& e) {
            error = e.what();
            failed_at = int(i);
            break;
        }
    }
    j["samples"] = samples;
    j["status"] = error.empty() ? "ok" : error;
    if (failed_at >= 0) j["failed_at_index"] = failed_at;
    emit(j, out_path);
    return error.empty() ? 0 : kExitConvergence;
}

int cmd_energy_curve(double kappa, cd tau, int N, const std::vector<double>& mus,
                     const std::string& out_path) {
    LatticeShape shape = normalize_shape(tau);
    GlSolver S(shape, kappa, N);
    EnergyCurve ec = S.energy_curve(mus);
    json j;
    j["kappa"] = kappa;
    j["tau"] = {shape.tau.real(), shape.tau.imag()};
    j["mu"] = ec.mu;
    j["energy"] = ec.energy;
    j["e0_fit"] = ec.e0_fit;
    j["e1_fit"] = ec.e1_fit;
    j["e2_fit"] = ec.e2_fit;
    j["fit_residual"] = ec.fit_residual;
    j["e2_published"] = ec.e2_published;
    j["e2_exact"] = ec.e2_exact;
    j["e0_expected"] = kappa * kappa / 2 + std::pow(kappa, 4);
    j["e1_expected"] = -2 * kappa * kappa;
    emit(j, out_path);
    return 0;
}

int cmd_gauge_fix(const std::string& in_path, const std::string& out_path) {
    StateFile in = StateFile::read(in_path);
    RawLatticeState raw = in.to_raw();
    GaugeFixResult res = fix_gauge(raw);

    StateFile out = StateFile::from_fields(raw.grid, in.kappa, in.lambda, res.phi, res.gauge.h);
    out.provenance.push_back("gauge-fix of " + in_path);
    out.provenance.push_back("translation " + format_double(res.report.translation.x) + " " +
                             format_double(res.report.translation.y));
    out.provenance.push_back("quasi_residual " + format_double(res.report.quasi_residual));
    if (!out_path.empty()) out.write(out_path);

    printf("flux,%s\n", format_double(res.report.flux).c_str());
    printf("n,%d\n", res.report.n);
    printf("translation,%s,%s\n", format_double(res.report.translation.x).c_str(),
           format_double(res.report.translation.y).c_str());
    printf("mean_a,%s\n", format_double(res.report.mean_a).c_str());
    printf("div_a,%s\n", format_double(res.report.div_a).c_str());
    printf("stream_residual,%s\n", format_double(res.report.stream_residual).c_str());
    printf("quasi_residual,%s\n", format_double(res.report.quasi_residual).c_str());
    return 0;
}

int cmd_make_state(const std::string& kind, double kappa, cd tau, int N, double t,
                   unsigned seed, const std::string& out_path) {
    LatticeShape shape = normalize_shape(tau);
    GlSolver S(shape, kappa, N);
    BranchSample bs = S.branch_point(t);
    const GridSpec& g = S.grid();
    StateFile sf = StateFile::from_fields(g, kappa, bs.lambda, bs.psi, bs.h);
    if (kind == "normal-form") {
        sf.provenance.push_back("converged branch sample t=" + format_double(t));
        sf.write(out_path);
        return 0;
    }
    if (kind != "scrambled") throw std::invalid_argument("kind must be normal-form or scrambled");

    // apply a random smooth periodic gauge plus a random cell translation
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    SpectralOps sp(g);
    CovariantStencil st(g);
    Vec2 l0 = g.shape.t1 * uni(rng) + g.shape.t2 * uni(rng);
    double amp1 = 0.5 * uni(rng), amp2 = 0.5 * uni(rng), ph = kTwoPi * uni(rng);
    Vec2 b1 = Vec2{g.shape.t2.y, -g.shape.t2.x} * (kTwoPi / g.shape.cell_area);
    Vec2 b2 = Vec2{-g.shape.t1.y, g.shape.t1.x} * (kTwoPi / g.shape.cell_area);
    auto eta = [&](Vec2 x) {
        return amp1 * std::cos(b1.x * x.x + b1.y * x.y) + amp2 * std::sin(b2.x * x.x + b2.y * x.y + ph);
    };
    auto grad_eta = [&](Vec2 x) {
        double s1 = -amp1 * std::sin(b1.x * x.x + b1.y * x.y);
        double c2 = amp2 * std::cos(b2.x * x.x + b2.y * x.y + ph);
        return Vec2{s1 * b1.x + c2 * b2.x, s1 * b1.y + c2 * b2.y};
    };

    CField psi_tr = st.translate(bs.psi, l0);
    VField a_nf = sp.curl_star(bs.h);
    VField A0 = background_potential(g, 1);
    VField A(g);
    A.x = A0.x + sp.translate(RField(g, a_nf.x), l0).v;
    A.y = A0.y + sp.translate(RField(g, a_nf.y), l0).v;
    CField psi(g);
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) {
            Vec2 x = g.point(p, q);
            int i = g.idx(p, q);
            psi.v[i] = std::polar(1.0, eta(x)) * psi_tr.v[i];
            Vec2 ge = grad_eta(x);
            A.x[i] += ge.x + 0.5 * g.n * (-l0.y);
            A.y[i] += ge.y + 0.5 * g.n * (l0.x);
        }
    sf.psi_re = psi.v.real();
    sf.psi_im = psi.v.imag();
    sf.h.reset();
    sf.A1 = A.x;
    sf.A2 = A.y;
    sf.c1 = 0.5 * g.n * wedge(g.shape.t1, l0);
    sf.c2 = 0.5 * g.n * wedge(g.shape.t2, l0);
    sf.provenance.push_back("scrambled branch sample t=" + format_double(t) + " seed=" +
                            std::to_string(seed));
    sf.write(out_path);
    return 0;
}

int cmd_verify_run(const std::string& level) {
    auto results = run_verify(level);
    int failures = 0;
    for (const auto& r : results) {
        printf("%s %s value=%s tol=%s%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
               format_double(r.value).c_str(), format_double(r.bound).c_str(),
               r.note.empty() ? "" : " # ", r.note.c_str());
        if (!r.pass) ++failures;
    }
    printf("summary,%zu,%d\n", results.size(), failures);
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abrikosov vortex-lattice solutions of the Ginzburg-Landau equations"};
    app.require_subcommand(1);

    double tau_re = 0.0, tau_im = 1.0, kappa = std::sqrt(2.0);
    int N = 64, K = 0, n = 1, k = 4, order = 8;
    std::string out_path, list_str, level = "quick", in_path, kind = "normal-form";
    double re0 = 0.0, re1 = 0.5, im0 = 0.8, im1 = 1.2, tol = 1e-5, t_amp = 0.1;
    double lambda_request = -1.0;
    int nre = 11, nim = 11;
    unsigned seed = 1;

    auto add_tau = [&](CLI::App* c) {
        c->add_option("--tau-re", tau_re, "Re tau");
        c->add_option("--tau-im", tau_im, "Im tau");
    };

    auto* sp = app.add_subcommand("spectrum", "lowest eigenvalues of the magnetic Laplacian");
    sp->add_option("--n", n, "flux quanta per cell");
    add_tau(sp);
    sp->add_option("--N", N, "grid resolution");
    sp->add_option("--k", k, "number of eigenvalues");
    sp->add_option("--order", order, "stencil order (2,4,6,8)");
    sp->add_option("--out", out_path, "CSV output path");

    auto* bs = app.add_subcommand("beta-scan", "Abrikosov ratio over a tau rectangle");
    bs->add_option("--re0", re0);
    bs->add_option("--re1", re1);
    bs->add_option("--nre", nre);
    bs->add_option("--im0", im0);
    bs->add_option("--im1", im1);
    bs->add_option("--nim", nim);
    bs->add_option("--N", N);
    bs->add_option("--K", K);
    bs->add_option("--out", out_path, "CSV output path");

    auto* mb = app.add_subcommand("minimize-beta", "descend to the minimizing lattice shape");
    add_tau(mb);
    mb->add_option("--tol", tol, "gradient-norm tolerance");
    mb->add_option("--N", N);
    mb->add_option("--K", K);

    auto* br = app.add_subcommand("branch", "bifurcation branch samples");
    br->add_option("--kappa", kappa);
    add_tau(br);
    br->add_option("--N", N);
    br->add_option("--t-list", list_str, "comma-separated amplitudes");
    br->add_option("--lambda", lambda_request, "request a fixed lambda (<=1 reports none)");
    br->add_option("--out", out_path, "JSON output path");
    std::string state_prefix;
    br->add_option("--save-state-prefix", state_prefix,
                   "write each sample as <prefix>_<i>.state");

    auto* ecv = app.add_subcommand("energy-curve", "energy vs mu with quadratic fit");
    ecv->add_option("--kappa", kappa);
    add_tau(ecv);
    ecv->add_option("--N", N);
    ecv->add_option("--mu-list", list_str, "comma-separated mu values");
    ecv->add_option("--out", out_path, "JSON output path");

    auto* gf = app.add_subcommand("gauge-fix", "normal form of a lattice state file");
    gf->add_option("--in", in_path, "input state file")->required();
    gf->add_option("--out", out_path, "output state file");

    auto* ms = app.add_subcommand("make-state", "write a sample state file");
    ms->add_option("--kind", kind, "normal-form | scrambled");
    ms->add_option("--kappa", kappa);
    add_tau(ms);
    ms->add_option("--N", N);
    ms->add_option("--t", t_amp, "branch amplitude");
    ms->add_option("--seed", seed);
    ms->add_option("--out", out_path, "output state file")->required();

    auto* vf = app.add_subcommand("verify", "run the invariant suites");
    vf->add_option("--level", level, "quick | full");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sp->parsed()) return cmd_spectrum(n, parse_tau(tau_re, tau_im), N, k, order, out_path);
        if (bs->parsed()) return cmd_beta_scan(re0, re1, nre, im0, im1, nim, N, K, out_path);
        if (mb->parsed()) return cmd_minimize_beta(parse_tau(tau_re, tau_im), tol, N, K);
        if (br->parsed())
            return cmd_branch(kappa, parse_tau(tau_re, tau_im), N, parse_list(list_str),
                              lambda_request, out_path, state_prefix);
        if (ecv->parsed())
            return cmd_energy_curve(kappa, parse_tau(tau_re, tau_im), N, parse_list(list_str),
                                    out_path);
        if (gf->parsed()) return cmd_gauge_fix(in_path, out_path);
        if (ms->parsed())
            return cmd_make_state(kind, kappa, parse_tau(tau_re, tau_im), N, t_amp, seed,
                                  out_path);
        if (vf->parsed()) return cmd_verify_run(level);
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "convergence failure: %s (residual %g after %d iterations)\n",
                     e.what(), e.residual, e.iterations);
        return kExitConvergence;
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        if (msg.find("flux") != std::string::npos) return kExitPrecondition;
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitUsage;
}
