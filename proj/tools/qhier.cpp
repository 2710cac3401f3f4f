// qhier: parse k-local models, run the verification suites, build the
// eclectic reconstruction, walk the quantization hierarchy demos, and export
// trajectories. Exit codes: 0 all checks pass, 1 check failure, 2 usage or
// parse error, 3 resource cap.

#include <CLI11.hpp>

#include <qhier/eclectic.hpp>
#include <qhier/hierarchy.hpp>
#include <qhier/open.hpp>
#include <qhier/suites.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace qhier;
using json = nlohmann::ordered_json;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 7;
    std::vector<std::string> tol_overrides;
    std::int64_t cap = 0; // 0: default or QHIER_CAP
    std::string out;
    std::string format; // per-command default: reports json, evolve csv, demos text
};

report::ToleranceMap make_tolerances(const GlobalOptions& g)
{
    report::ToleranceMap tol;
    for (const auto& kv : g.tol_overrides) {
        auto pos = kv.find('=');
        if (pos == std::string::npos)
            throw argument_error("--tol expects name=value, got `" + kv + "`");
        tol.set(kv.substr(0, pos), std::stod(kv.substr(pos + 1)));
    }
    return tol;
}

void apply_cap(const GlobalOptions& g)
{
    if (g.cap > 0) {
        set_dimension_cap(g.cap);
        return;
    }
    if (const char* env = std::getenv("QHIER_CAP")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0' || v < 4)
            throw argument_error("QHIER_CAP must be an integer >= 4");
        set_dimension_cap(v);
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw argument_error("cannot open `" + path + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const GlobalOptions& g, const std::string& text)
{
    if (g.out.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(g.out, std::ios::binary);
    if (!out)
        throw argument_error("cannot write `" + g.out + "`");
    out << text;
}

hspec::KLocalHamiltonian load_model(const std::string& path, bool quiet = false)
{
    auto result = hspec::parse_spec(read_file(path));
    if (!result.ok()) {
        if (!quiet)
            for (const auto& d : result.diagnostics)
                std::fprintf(stderr, "%s:%s\n", path.c_str(), d.str().c_str());
        throw validation_error("model `" + path + "` failed to parse");
    }
    return *result.model;
}

std::string format_number(double v)
{
    if (std::abs(v - std::llround(v)) < 1e-9) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", std::llround(v));
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

StateVector make_state(const std::string& spec, const hspec::KLocalHamiltonian& h,
                       std::uint64_t seed)
{
    std::int64_t dim = h.full_dim();
    if (spec.rfind("random", 0) == 0) {
        std::uint64_t s = seed;
        auto pos = spec.find(':');
        if (pos != std::string::npos)
            s = std::stoull(spec.substr(pos + 1));
        Rng rng = Rng(s).stream("state");
        return random_state(dim, rng);
    }
    if (spec == "groundstate") {
        Operator full = hspec::assemble_full(h);
        Eigen::SelfAdjointEigenSolver<Matrix> es(full.mat());
        return StateVector(es.eigenvectors().col(0));
    }
    if (spec.rfind("file:", 0) == 0) {
        std::string path = spec.substr(5);
        std::istringstream in(read_file(path));
        std::vector<cxd> amps;
        std::string token;
        while (in >> token) {
            cxd v;
            if (!hspec::detail::parse_complex(token, v))
                throw argument_error("state file: cannot parse `" + token + "`");
            amps.push_back(v);
        }
        if (static_cast<std::int64_t>(amps.size()) != dim)
            throw argument_error("state file has " + std::to_string(amps.size()) +
                                 " amplitudes, model needs " + std::to_string(dim));
        Vector v(dim);
        for (std::int64_t i = 0; i < dim; ++i)
            v(i) = amps[static_cast<std::size_t>(i)];
        return StateVector(std::move(v)).normalized_copy();
    }
    if (spec.rfind("basis:", 0) == 0)
        return StateVector::basis(dim, std::stoll(spec.substr(6)));
    throw argument_error("unknown state spec `" + spec +
                         "` (random[:seed] | groundstate | file:path | basis:i)");
}

// ---------------------------------------------------------------------------

int cmd_parse(const std::string& path)
{
    auto result = hspec::parse_spec(read_file(path));
    if (!result.ok()) {
        for (const auto& d : result.diagnostics)
            std::fprintf(stderr, "%s:%s\n", path.c_str(), d.str().c_str());
        return 1;
    }
    const auto& h = *result.model;
    auto issues = hspec::validate(h);
    if (!issues.empty()) {
        for (const auto& i : issues)
            std::fprintf(stderr, "term %d: %s: %s\n", i.term_index,
                         i.invariant.c_str(), i.message.c_str());
        return 1;
    }
    std::printf("model: n=%d d=%d k=%d m=%zu\n", h.n, h.d, h.k, h.term_count());
    std::printf("full dimension: %lld\n",
                static_cast<long long>(h.full_dim()));
    std::printf("locality classes:\n");
    for (const auto& [kp, count] : h.locality_counts())
        std::printf("  k'=%d: %zu terms\n", kp, count);
    return 0;
}

int cmd_verify(const GlobalOptions& g, const std::string& suite,
               const std::string& model_path)
{
    report::ToleranceMap tol = make_tolerances(g);
    std::optional<hspec::KLocalHamiltonian> model;
    if (!model_path.empty())
        model = load_model(model_path);

    report::SuiteReport rep = suite == "all"
                                  ? suites::run_all(g.seed, tol, model)
                                  : suites::run_suite(suite, g.seed, tol, model);
    emit(g, report::to_json(rep).dump(2) + "\n");
    if (!rep.pass()) {
        for (const auto& name : rep.failing())
            std::fprintf(stderr, "FAIL %s\n", name.c_str());
        return 1;
    }
    return 0;
}

int cmd_eclectic(const GlobalOptions& g, const std::string& model_path, int builtin_n,
                 bool ring, const std::string& layout_name, const std::string& state_spec,
                 int sweep_lo, int sweep_hi)
{
    hspec::KLocalHamiltonian h =
        model_path.empty()
            ? hspec::heisenberg_model(builtin_n, 2, hspec::chain_edges(builtin_n, ring))
            : load_model(model_path);

    eclectic::EclecticLayout layout = layout_name == "directsum"
                                          ? eclectic::EclecticLayout::per_term_direct_sum
                                          : eclectic::EclecticLayout::padded_tensor;
    if (layout_name != "padded" && layout_name != "directsum")
        throw argument_error("--layout must be padded or directsum");

    json doc;
    doc["schema"] = "qhier/1";
    doc["command"] = "eclectic";
    auto row = eclectic::dimension_report(h);
    doc["model"] = {{"n", h.n}, {"d", h.d}, {"k", h.k}, {"m", h.term_count()}};
    doc["layout"] = eclectic::to_string(layout);
    doc["nbar"] = row.nbar;
    doc["dims"] = {{"full", row.full_dim},
                   {"padded", row.padded_dim},
                   {"direct_sum", row.direct_sum_dim}};
    if (row.eclectic_not_smaller) {
        doc["crossover_warning"] = true;
        std::fprintf(stderr,
                     "note: eclectic dimension %lld is not smaller than the full "
                     "dimension %lld at n=%d\n",
                     static_cast<long long>(row.padded_dim),
                     static_cast<long long>(row.full_dim), h.n);
    }

    if (sweep_lo > 0 && model_path.empty()) {
        json table = json::array();
        for (int n = sweep_lo; n <= sweep_hi; ++n) {
            auto hn = hspec::heisenberg_model(n, 2, hspec::chain_edges(n, ring));
            auto rn = eclectic::dimension_report(hn);
            table.push_back({{"n", n},
                             {"full", rn.full_dim},
                             {"padded", rn.padded_dim},
                             {"direct_sum", rn.direct_sum_dim},
                             {"eclectic_not_smaller", rn.eclectic_not_smaller}});
        }
        doc["dimension_table"] = std::move(table);
    }

    bool pass = true;
    if (h.full_dim() <= dimension_cap()) {
        StateVector psi = make_state(state_spec, h, g.seed);
        auto sys = eclectic::build_eclectic(h, layout);
        auto rep = eclectic::verify_energy_identity(psi, sys, h);
        json per_term = json::array();
        for (const auto& r : rep.per_term)
            per_term.push_back({{"l", r.term},
                                {"sites", r.sites},
                                {"energy_full", r.energy_full},
                                {"energy_block", r.energy_block},
                                {"delta", r.delta}});
        doc["per_term"] = std::move(per_term);
        doc["total"] = {{"E_full", rep.e_full},
                        {"E_eclectic", rep.e_eclectic},
                        {"E_eclectic_normalized_convention",
                         rep.e_eclectic_normalized_convention},
                        {"delta", rep.delta},
                        {"tolerance", rep.tolerance},
                        {"pass", rep.pass}};
        pass = rep.pass;
    } else {
        doc["energy_identity"] = "skipped (full dimension above cap)";
    }

    emit(g, doc.dump(2) + "\n");
    return pass ? 0 : 1;
}

json demo_to_json(const hier::DemoReport& rep)
{
    json levels = json::array();
    for (const auto& l : rep.levels) {
        json spec = json::array();
        for (double e : l.spectrum_head)
            spec.push_back(e);
        levels.push_back({{"name", l.name},
                          {"kind", hier::to_string(l.kind)},
                          {"dim", l.dim},
                          {"spectrum", std::move(spec)}});
    }
    json lifts = json::array();
    for (const auto& l : rep.lifts)
        lifts.push_back({{"from", hier::to_string(l.from)},
                         {"to", hier::to_string(l.to)},
                         {"from_dim", l.from_dim},
                         {"to_dim", l.to_dim}});
    json residuals = json::array();
    for (const auto& r : rep.residuals)
        residuals.push_back({{"check", r.check},
                             {"residual", r.residual},
                             {"tolerance", r.tolerance},
                             {"pass", r.pass}});
    return json{{"schema", "qhier/1"}, {"demo", rep.demo},
                {"levels", std::move(levels)}, {"lifts", std::move(lifts)},
                {"residuals", std::move(residuals)}, {"notes", rep.notes},
                {"pass", rep.pass()}};
}

int cmd_hierarchy(const GlobalOptions& g, const std::string& example, double omega,
                  int cutoff1, int cutoff2, const std::string& potential)
{
    hier::DemoReport rep;
    if (example == "oscillator") {
        rep = hier::oscillator_demo(omega, cutoff1 > 0 ? cutoff1 : 5, cutoff2);
    } else if (example == "potential") {
        std::vector<double> coeffs;
        std::stringstream ss(potential);
        std::string piece;
        while (std::getline(ss, piece, ','))
            coeffs.push_back(std::stod(piece));
        rep = hier::potential_demo(coeffs);
    } else if (example == "qubit") {
        // a qubit's H_1 has 6 states at cutoff 2; higher first cutoffs make
        // the second lift exceed the mode cap
        rep = hier::qubit_demo(pauli_z(), cutoff1 > 0 ? cutoff1 : 2, cutoff2);
    } else {
        throw argument_error("--example must be oscillator, potential, or qubit");
    }

    if (g.format == "json") {
        emit(g, demo_to_json(rep).dump(2) + "\n");
    } else { // text by default: the spectrum line is the headline
        std::string text;
        text += "demo: " + rep.demo + "\n";
        for (const auto& l : rep.levels) {
            text += l.name + " (" + hier::to_string(l.kind) +
                    ", dim " + std::to_string(l.dim) + ")";
            if (l.kind == hier::LevelKind::hilbert) {
                text += " spectrum:";
                for (double e : l.spectrum_head)
                    text += " " + format_number(e);
            }
            text += "\n";
        }
        for (const auto& r : rep.residuals) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%-40s %.3e (tol %.1e) %s\n",
                          r.check.c_str(), r.residual, r.tolerance,
                          r.pass ? "pass" : "FAIL");
            text += buf;
        }
        emit(g, text);
    }
    return rep.pass() ? 0 : 1;
}

std::string rho_csv(const std::vector<double>& times, const std::vector<Matrix>& rhos)
{
    std::string out = "t";
    const std::int64_t d = rhos.empty() ? 0 : rhos.front().rows();
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) {
            out += ",re_rho_" + std::to_string(i) + "_" + std::to_string(j);
            out += ",im_rho_" + std::to_string(i) + "_" + std::to_string(j);
        }
    out += ",trace\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += buf;
    };
    for (std::size_t s = 0; s < times.size(); ++s) {
        put(times[s]);
        for (std::int64_t i = 0; i < d; ++i)
            for (std::int64_t j = 0; j < d; ++j) {
                out += ",";
                put(rhos[s](i, j).real());
                out += ",";
                put(rhos[s](i, j).imag());
            }
        out += ",";
        put(rhos[s].trace().real());
        out += "\n";
    }
    return out;
}

int cmd_evolve(const GlobalOptions& g, const std::string& model_path,
               const std::string& builtin, int builtin_n, const std::string& engine,
               double t, double dt, const std::string& state_spec,
               const std::string& method, double gamma, int n_traj)
{
    hspec::KLocalHamiltonian h;
    if (!model_path.empty()) {
        h = load_model(model_path);
    } else if (builtin == "qubit") {
        h = hspec::heisenberg_model(1, 2, {}, {.field_scale = 1.0});
    } else if (builtin == "heisenberg") {
        h = hspec::heisenberg_model(builtin_n, 2, hspec::chain_edges(builtin_n),
                                    {.coupling_scale = 1.0, .field_scale = 0.5});
    } else {
        throw argument_error("--builtin must be qubit or heisenberg (or give a file)");
    }
    if (dt <= 0.0)
        throw argument_error("--dt must be positive");
    const int steps = t <= 0.0 ? 0 : static_cast<int>(std::llround(t / dt));

    Operator full = hspec::assemble_full(h);
    StateVector psi0 = make_state(state_spec, h, g.seed);

    if (engine == "symplectic") {
        phase::ClassicalSystem sys = phase::hamiltonize(full);
        auto traj = phase::integrate_symplectic(sys, phase::PhaseSpacePoint(psi0), dt,
                                                steps, phase::method_from_string(method));
        emit(g, phase::trajectory_csv(traj));
        return 0;
    }
    if (engine == "exact") {
        phase::Trajectory traj;
        phase::ClassicalSystem sys = phase::hamiltonize(full);
        for (int s = 0; s <= steps; ++s) {
            double at = s * dt;
            StateVector psi = evolve_exact(full, psi0, at);
            traj.times.push_back(at);
            traj.states.push_back(psi.vec());
            traj.energies.push_back(sys.energy(phase::PhaseSpacePoint(psi)));
            traj.norms.push_back(psi.norm());
        }
        emit(g, phase::trajectory_csv(traj));
        return 0;
    }

    // dissipative engines: damping channel |0><1|-style on the assembled model
    Matrix lower = Matrix::Zero(full.dim(), full.dim());
    for (std::int64_t i = 0; i + 1 < full.dim(); i += 2)
        lower(i, i + 1) = 1.0; // pairs local levels on the last site
    opendyn::LindbladModel m(full, {{Operator(std::move(lower)), gamma}});

    if (engine == "lindblad") {
        Operator rho0(Matrix(psi0.vec() * psi0.vec().adjoint()));
        std::vector<double> times;
        std::vector<Matrix> rhos;
        Matrix rho = rho0.mat();
        times.push_back(0.0);
        rhos.push_back(rho);
        for (int s = 1; s <= steps; ++s) {
            Matrix k1 = opendyn::lindblad_derivative(m, rho);
            Matrix k2 = opendyn::lindblad_derivative(m, Matrix(rho + 0.5 * dt * k1));
            Matrix k3 = opendyn::lindblad_derivative(m, Matrix(rho + 0.5 * dt * k2));
            Matrix k4 = opendyn::lindblad_derivative(m, Matrix(rho + dt * k3));
            rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            times.push_back(s * dt);
            rhos.push_back(rho);
        }
        emit(g, rho_csv(times, rhos));
        return 0;
    }
    if (engine == "sse") {
        std::vector<double> checkpoints;
        if (steps == 0) {
            checkpoints.push_back(0.0);
            Operator rho0(Matrix(psi0.vec() * psi0.vec().adjoint()));
            emit(g, rho_csv(checkpoints, {rho0.mat()}));
            return 0;
        }
        int stride = std::max(1, steps / 50);
        for (int s = stride; s <= steps; s += stride)
            checkpoints.push_back(s * dt);
        auto ens = opendyn::sse_ensemble(m, psi0, checkpoints, dt, n_traj, g.seed);
        if (g.format == "json") {
            auto cmp = opendyn::compare_to_master(ens, m, psi0);
            emit(g, opendyn::ensemble_report_json(ens, cmp, m).dump(2) + "\n");
            return cmp.pass() ? 0 : 1;
        }
        emit(g, rho_csv(ens.times, ens.mean_rho));
        return 0;
    }
    throw argument_error("--engine must be exact, symplectic, lindblad, or sse");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qhier: hamiltonization, second quantization, quantization "
                 "hierarchy, and the eclectic k-local reconstruction"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "seed for every random sub-stream");
    app.add_option("--tol", g.tol_overrides, "override a named tolerance, name=value");
    app.add_option("--cap", g.cap, "dimension cap (default 16384, or QHIER_CAP)");
    app.add_option("--out", g.out, "write the report to this path");
    app.add_option("--format", g.format, "output format: json|csv|text");

    auto* parse_cmd = app.add_subcommand("parse", "parse and validate an HSPEC model");
    std::string parse_file;
    parse_cmd->add_option("file", parse_file, "HSPEC model file")->required();

    auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
    std::string suite = "all";
    std::string verify_model;
    verify_cmd->add_option("--suite", suite, "phase|fock|hierarchy|eclectic|open|all");
    verify_cmd->add_option("model", verify_model,
                           "optional HSPEC model for the eclectic battery");

    auto* ecl_cmd = app.add_subcommand("eclectic", "energy identity and dimensions");
    std::string ecl_file;
    int ecl_n = 10;
    bool ecl_ring = false;
    std::string layout = "padded";
    std::string state_spec = "random";
    int sweep_lo = 0, sweep_hi = 0;
    std::string sweep_expr;
    ecl_cmd->add_option("file", ecl_file, "HSPEC model (default: Heisenberg chain)");
    ecl_cmd->add_option("--n", ecl_n, "builtin chain length");
    ecl_cmd->add_flag("--ring", ecl_ring, "close the builtin chain");
    ecl_cmd->add_option("--layout", layout, "padded|directsum");
    ecl_cmd->add_option("--state", state_spec,
                        "random[:seed] | groundstate | file:path | basis:i");
    ecl_cmd->add_option("--sweep", sweep_expr, "dimension sweep, e.g. 2..14");

    auto* hier_cmd = app.add_subcommand("hierarchy", "run a quantization hierarchy demo");
    std::string example = "oscillator";
    double omega = 1.0;
    int cutoff1 = 0, cutoff2 = 2; // 0: per-example default
    std::string potential = "0,0,1";
    hier_cmd->add_option("--example", example, "oscillator|potential|qubit");
    hier_cmd->add_option("--omega", omega, "oscillator frequency");
    hier_cmd->add_option("--cutoff1", cutoff1, "first quantization cutoff");
    hier_cmd->add_option("--cutoff2", cutoff2, "second quantization cutoff");
    hier_cmd->add_option("--potential", potential, "V(x) coefficients v0,v1,...");

    auto* evolve_cmd = app.add_subcommand("evolve", "integrate and export CSV");
    std::string evolve_file, builtin = "qubit", engine = "exact";
    std::string evolve_state = "basis:0";
    std::string method = "implicit_midpoint";
    int builtin_n = 2, n_traj = 1000;
    double t_final = 10.0, dt = 1e-3, gamma = 1.0;
    evolve_cmd->add_option("file", evolve_file, "HSPEC model file");
    evolve_cmd->add_option("--builtin", builtin, "qubit|heisenberg");
    evolve_cmd->add_option("--n", builtin_n, "builtin chain length");
    evolve_cmd->add_option("--engine", engine, "exact|symplectic|lindblad|sse");
    evolve_cmd->add_option("--t", t_final, "final time");
    evolve_cmd->add_option("--dt", dt, "time step");
    evolve_cmd->add_option("--state", evolve_state,
                           "random[:seed] | groundstate | file:path | basis:i");
    evolve_cmd->add_option("--method", method, "implicit_midpoint|leapfrog_reim");
    evolve_cmd->add_option("--gamma", gamma, "damping rate for lindblad/sse");
    evolve_cmd->add_option("--traj", n_traj, "trajectory count for sse");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }

    try {
        apply_cap(g);
        if (!sweep_expr.empty()) {
            auto pos = sweep_expr.find("..");
            if (pos == std::string::npos)
                throw argument_error("--sweep expects lo..hi");
            sweep_lo = std::stoi(sweep_expr.substr(0, pos));
            sweep_hi = std::stoi(sweep_expr.substr(pos + 2));
        }
        if (parse_cmd->parsed())
            return cmd_parse(parse_file);
        if (verify_cmd->parsed())
            return cmd_verify(g, suite, verify_model);
        if (ecl_cmd->parsed())
            return cmd_eclectic(g, ecl_file, ecl_n, ecl_ring, layout, state_spec,
                                sweep_lo, sweep_hi);
        if (hier_cmd->parsed())
            return cmd_hierarchy(g, example, omega, cutoff1, cutoff2, potential);
        if (evolve_cmd->parsed())
            return cmd_evolve(g, evolve_file, builtin, builtin_n, engine, t_final, dt,
                              evolve_state, method, gamma, n_traj);
        std::fprintf(stderr, "no subcommand given\n");
        return 2;
    } catch (const resource_error& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return 3;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 1;
    } catch (const argument_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
