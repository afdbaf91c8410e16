// Command-line surface for the daepencil library: ingest pencil JSON, run
// analyses and solves, emit JSON reports and CSV trajectories, and drive the
// randomized verification suite.
//
// Exit codes: 0 success, 1 usage or parse error, 2 numerical refusal,
// 3 verification failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "daepencil/asymptotics.hpp"
#include "daepencil/consistent_iv.hpp"
#include "daepencil/core.hpp"
#include "daepencil/io.hpp"
#include "daepencil/laplace.hpp"
#include "daepencil/pencil.hpp"
#include "daepencil/solvers.hpp"
#include "daepencil/verification.hpp"

namespace {

using namespace daepencil;

// Usage-shaped failures: malformed inputs, bad flag values, impossible
// requests. Everything else raised by the library is a numerical refusal.
int exit_code_for(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e) != nullptr) return 1;
    if (dynamic_cast<const InvalidArgumentError*>(&e) != nullptr) return 1;
    if (dynamic_cast<const BadRankError*>(&e) != nullptr) return 1;
    if (dynamic_cast<const DimensionMismatchError*>(&e) != nullptr) return 1;
    if (dynamic_cast<const NonSquareError*>(&e) != nullptr) return 1;
    if (dynamic_cast<const DegenerateToleranceError*>(&e) != nullptr) return 1;
    return 2;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgumentError("cannot open output file: " + path);
    out << content;
    if (!out) throw InvalidArgumentError("failed while writing output file: " + path);
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string fmt_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_complex(Complex z) {
    return "(" + fmt_real(z.real()) + ", " + fmt_real(z.imag()) + ")";
}

Vector resolve_u0(const std::string& request, const IvSpace& iv, Index n, std::uint64_t seed) {
    if (request == "random") {
        std::mt19937_64 rng(seed);
        return detail::gaussian_matrix(n, 1, rng).col(0);
    }
    const std::string preset = "iv-basis-";
    if (request.rfind(preset, 0) == 0) {
        std::size_t pos = 0;
        long k = -1;
        try {
            k = std::stol(request.substr(preset.size()), &pos);
        } catch (const std::exception&) {
            throw ParseError("u0: malformed preset \"" + request + "\"");
        }
        if (pos != request.size() - preset.size() || k < 0 || k >= iv.dim()) {
            throw InvalidArgumentError("u0: preset index in \"" + request +
                                       "\" is outside [0, " + std::to_string(iv.dim() - 1) +
                                       "]");
        }
        return iv.basis.basis.col(k);
    }
    return parse_vector(request, n);
}

struct CommonArgs {
    std::string input;
    std::string out;
    std::string format = "json";
    double tol_rank = -1.0;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_format) {
    cmd->add_option("--input", args.input, "pencil JSON file")->required();
    cmd->add_option("--out", args.out, "output path (default: stdout)");
    args.format = default_format;
    cmd->add_option("--format", args.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    cmd->add_option("--tol-rank", args.tol_rank,
                    "rank tolerance (negative keeps the dimension-scaled default)");
}

int cmd_analyze(const CommonArgs& args) {
    const Pencil p = parse_pencil_file(args.input);
    const Json doc = analyze_report(p, args.tol_rank);
    if (args.format == "text") {
        std::string text;
        text += "regular: " + std::string(doc["regular"].get<bool>() ? "yes" : "no") + "\n";
        text += "n: " + std::to_string(doc["n"].get<Index>()) + "\n";
        text += "rank m0: " + std::to_string(doc["rank_m0"].get<Index>()) + "\n";
        if (doc["regular"].get<bool>()) {
            text += "dim IV: " + std::to_string(doc["dim_iv"].get<Index>()) + "\n";
            text += "spectrum:";
            for (const auto& z : doc["spectrum"]) {
                text += " " + fmt_complex(Complex(z[0].get<double>(), z[1].get<double>()));
            }
            text += "\n";
        } else {
            text += "sigma_min(B): " + fmt_real(doc["sigma_min_b"].get<double>()) + "\n";
            text += "criterion: " + doc["criterion"].get<std::string>() + "\n";
        }
        write_output(args.out, text);
    } else {
        write_output(args.out, dump(doc));
    }
    return 0;
}

int cmd_spectrum(const CommonArgs& args) {
    const Pencil p = parse_pencil_file(args.input);
    const auto f = block_factorize(p, args.tol_rank);
    const auto srep = spectrum(f);
    Json doc;
    doc["n"] = p.n;
    doc["rank_m0"] = f.rank;
    doc["spectrum"] = spectrum_to_json(srep.eigenvalues);
    doc["spectral_abscissa"] = json_real(srep.spectral_abscissa);
    doc["s0"] = json_real(srep.s0);
    doc["empty"] = srep.eigenvalues.empty();
    if (args.format == "text") {
        std::string text = "spectrum:";
        for (Complex z : srep.eigenvalues) text += " " + fmt_complex(z);
        text += srep.eigenvalues.empty() ? " (empty)\n" : "\n";
        text += "s0: " + fmt_real(srep.s0) + "\n";
        write_output(args.out, text);
    } else {
        write_output(args.out, dump(doc));
    }
    return 0;
}

struct SolveArgs : CommonArgs {
    std::string u0 = "iv-basis-0";
    std::string mode = "mild";
    double t_max = 5.0;
    int grid = 101;
    std::uint64_t seed = 0;
};

int cmd_solve(const SolveArgs& args) {
    if (!(args.t_max > 0.0)) throw InvalidArgumentError("--t-max must be positive");
    if (args.grid < 2) throw InvalidArgumentError("--grid must be at least 2");

    const Pencil p = parse_pencil_file(args.input);
    const auto f = block_factorize(p, args.tol_rank);
    const auto iv = compute_iv(f);
    const Vector u0 = resolve_u0(args.u0, iv, p.n, args.seed);

    std::vector<double> times(static_cast<std::size_t>(args.grid));
    for (int i = 0; i < args.grid; ++i) times[i] = args.t_max * i / (args.grid - 1);
    times.front() = 0.0;
    times.back() = args.t_max;

    Trajectory traj;
    Json summary;
    summary["mode"] = args.mode;
    summary["t_max"] = args.t_max;
    summary["grid_points"] = args.grid;
    if (args.mode == "strong") {
        const double tol = 1e-9;
        if (!iv_membership(iv, u0, tol)) {
            const Vector proj = iv.basis.project(u0);
            throw InconsistentInitialValueError(
                "solve: u0 is not a consistent initial value; nearest consistent datum is " +
                vector_to_json(proj).dump() + " (or run with --mode mild, which jumps onto IV)");
        }
        traj = solve_strong(iv, u0, times, tol);
        summary["iv_membership_tol"] = tol;
    } else {
        traj = solve_mild(f, iv, u0, times);
        const auto& jump = *traj.jump;
        summary["jump"] = {{"u0", vector_to_json(jump.first)},
                           {"u0_plus", vector_to_json(jump.second)},
                           {"jump_norm", json_real((jump.second - jump.first).norm())}};
        summary["attainment_residual"] =
            json_real((f.m0 * (jump.second - jump.first)).norm());
        double identity = 0.0;
        const double mid = 0.5 * args.t_max;
        MildSolution sol(f, iv, u0);
        for (double t : {mid, args.t_max}) {
            identity = std::max(identity, integrated_identity_residual(f, sol, u0, t));
        }
        summary["integrated_identity_residual"] = json_real(identity);
        summary["constraint_residual"] =
            json_real(mild_constraint_residual(f, jump.second));
    }

    if (args.format == "json") {
        Json doc;
        doc["summary"] = summary;
        Json ts = Json::array();
        for (double t : traj.times) ts.push_back(t);
        Json states = Json::array();
        for (const auto& u : traj.states) states.push_back(vector_to_json(u));
        doc["times"] = std::move(ts);
        doc["states"] = std::move(states);
        write_output(args.out, dump(doc));
    } else {
        write_output(args.out, trajectory_to_csv(traj));
    }
    return 0;
}

struct StabilityArgs : CommonArgs {
    double tol_margin = -1.0;
};

int cmd_stability(const StabilityArgs& args) {
    const Pencil p = parse_pencil_file(args.input);
    const auto rep = classify(p, args.tol_margin);
    Json doc = stability_report_json(rep);
    if (args.format == "text") {
        std::string text = std::string("verdict: ") + to_string(rep.verdict) + "\n";
        text += "margin: " + fmt_real(rep.margin) + "\n";
        text += "dim S: " + std::to_string(rep.dim_s()) + "\n";
        text += "dim T: " + std::to_string(rep.dim_t()) + "\n";
        write_output(args.out, text);
    } else {
        write_output(args.out, dump(doc));
    }
    return 0;
}

struct VerifyArgs {
    std::string out;
    std::string only;
    std::uint64_t seed = 20260815;
    bool inject_fault = false;
    double rho = -1.0;
    int instances = 100;
    Index max_n = 10;
};

int cmd_verify(const VerifyArgs& args) {
    VerifyOptions opt;
    opt.seed = args.seed;
    opt.only = args.only;
    opt.inject_fault = args.inject_fault;
    opt.rho = args.rho;
    opt.duality_instances = args.instances;
    opt.max_n = args.max_n;
    const VerifyReport rep = run_verification(opt);
    write_output(args.out, dump(verify_report_to_json(rep)));
    return rep.all_pass() ? 0 : 3;
}

struct GenerateArgs {
    std::string out;
    std::string spectrum_hint;
    Index n = 0;
    Index rank = 0;
    std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& args) {
    std::vector<Complex> hint;
    if (!args.spectrum_hint.empty()) {
        const Vector v = parse_vector(args.spectrum_hint, args.rank);
        for (Index i = 0; i < v.size(); ++i) hint.push_back(v(i));
    }
    const Pencil p = generate_regular(args.n, args.rank, args.seed, hint);
    write_output(args.out, dump(pencil_to_json(p)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analysis and solution of regular index-zero pencils z M0 + M1"};
    app.require_subcommand(1);

    CommonArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "regularity, IV space, blocks, spectra");
    add_common(analyze, analyze_args, "json");

    CommonArgs spectrum_args;
    auto* spect = app.add_subcommand("spectrum", "pencil spectrum and abscissa");
    add_common(spect, spectrum_args, "json");

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "strong or mild trajectory on a time grid");
    add_common(solve, solve_args, "csv");
    solve->add_option("--u0", solve_args.u0,
                      "initial datum: JSON array, iv-basis-<k>, or random");
    solve->add_option("--mode", solve_args.mode, "solution concept")
        ->check(CLI::IsMember({"strong", "mild"}));
    solve->add_option("--t-max", solve_args.t_max, "time horizon");
    solve->add_option("--grid", solve_args.grid, "number of grid points");
    solve->add_option("--seed", solve_args.seed, "seed for --u0 random");

    StabilityArgs stability_args;
    auto* stability = app.add_subcommand("stability", "dichotomy classification report");
    add_common(stability, stability_args, "json");
    stability->add_option("--tol-margin", stability_args.tol_margin,
                          "protective strip half-width (negative keeps the default)");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "randomized property suites");
    verify->add_option("--seed", verify_args.seed, "master seed");
    verify->add_option("--only", verify_args.only, "run a single suite")
        ->check(CLI::IsMember({"duality", "laplace", "dichotomy"}));
    verify->add_option("--rho", verify_args.rho, "transform weight override");
    verify->add_option("--instances", verify_args.instances, "duality instance count");
    verify->add_option("--max-n", verify_args.max_n, "largest pencil dimension");
    verify->add_option("--out", verify_args.out, "output path (default: stdout)");
    verify->add_flag("--inject-fault", verify_args.inject_fault,
                     "corrupt one suite to confirm failures surface (self-test)");

    GenerateArgs generate_args;
    auto* generate = app.add_subcommand("generate", "emit a seeded regular pencil");
    generate->add_option("--n", generate_args.n, "dimension")->required();
    generate->add_option("--rank", generate_args.rank, "rank of m0")->required();
    generate->add_option("--seed", generate_args.seed, "seed");
    generate->add_option("--spectrum", generate_args.spectrum_hint,
                         "JSON list of planted eigenvalues (length = rank)");
    generate->add_option("--out", generate_args.out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
        if (analyze->parsed()) return cmd_analyze(analyze_args);
        if (spect->parsed()) return cmd_spectrum(spectrum_args);
        if (solve->parsed()) return cmd_solve(solve_args);
        if (stability->parsed()) return cmd_stability(stability_args);
        if (verify->parsed()) return cmd_verify(verify_args);
        if (generate->parsed()) return cmd_generate(generate_args);
        std::cerr << "no subcommand given\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
