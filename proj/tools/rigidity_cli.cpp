// Command-line front end: matrix analysis, sub-resonance enumeration,
// conjugacy solving, splitting frames, rigidity predicates, scenario runs.
// Exit codes: 0 pass, 1 internal error, 2 expected-outcome mismatch or
// precondition failure.

#include "rigidity/contraction_ratio_util.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/leaves.hpp"
#include "rigidity/scenario.hpp"
#include "rigidity/subres.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace rigidity;
using nlohmann::json;

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

int cmd_analyze_matrix(const std::string& matrix_json) {
    IntMatrix m = matrix_from_json(json::parse(matrix_json));
    ToralAutomorphism L(m);
    json out;
    out["char_poly"] = L.char_poly().str();
    try {
        out["hyperbolic"] = is_hyperbolic(L);
    } catch (const IndeterminateError& e) {
        out["hyperbolic"] = nullptr;
        out["hyperbolic_note"] = e.what();
    }
    out["irreducible"] = is_irreducible(L);
    try {
        out["weakly_irreducible"] = is_weakly_irreducible(L);
        LyapunovData ld = lyapunov_data(L);
        json moduli = json::array(), mult = json::array();
        for (const auto& c : ld.clusters) {
            moduli.push_back(c.modulus);
            mult.push_back(c.multiplicity);
        }
        out["moduli"] = moduli;
        out["multiplicities"] = mult;
        json rss = json::object();
        int ns = ld.stable_count();
        for (int k = 1; k < ns; ++k) {
            std::vector<double> ss;
            for (const auto& c : ld.clusters)
                if (c.modulus < 1.0 && static_cast<int>(ss.size()) < k) ss.push_back(c.modulus);
            rss["ss_count_" + std::to_string(k)] = contraction_ratio_from_moduli(ss);
        }
        out["r_ss"] = rss;
    } catch (const AmbiguousModuliError& e) {
        out["weakly_irreducible"] = nullptr;
        out["moduli_note"] = e.what();
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_subres_enumerate(const std::string& chi_csv, const std::string& dims_csv, int block,
                         double eps, bool exact) {
    std::vector<double> chi = parse_doubles(chi_csv);
    std::vector<int> dims = dims_csv.empty() ? std::vector<int>(chi.size(), 1) : parse_ints(dims_csv);
    ChiSpectrum spec(chi, dims, eps, exact);
    json out;
    out["chi"] = chi;
    out["dims"] = dims;
    out["eps"] = eps;
    out["degree_bound"] = spec.degree_bound();
    out["eps0"] = spec.eps0();
    json types = json::array();
    for (const auto& t : enumerate_types(spec, block - 1))  // CLI blocks are 1-based
        types.push_back(t.s);
    out["block"] = block;
    out["types"] = types;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_solve_conjugacy(const std::string& name, double amplitude, int samples, double tol,
                        std::uint64_t seed) {
    const Scenario& s = find_scenario(name);
    double amp = amplitude >= 0 ? amplitude : s.default_amplitude;
    Perturbation f = make_perturbation(s, amp);
    ConjugacyField field(f, s.splitting, tol);
    auto pts = quasi_random_points(samples, f.dim(), seed);
    std::cout << "# scenario=" << s.name << " amplitude=" << amp << " tol=" << tol
              << " depth=" << field.depth() << "\n";
    std::cout << "x,delta,residual\n";
    for (const auto& x : pts) {
        DeltaSplit d = field.delta(x);
        std::ostringstream xs, ds;
        for (int i = 0; i < f.dim(); ++i) {
            xs << (i ? ";" : "") << x(i);
            ds << (i ? ";" : "") << d.total(i);
        }
        std::cout << xs.str() << "," << ds.str() << "," << field.residual_at(x) << "\n";
    }
    return 0;
}

int cmd_splitting(const std::string& name, const std::string& points_file, const std::string& role_name_str,
                  double amplitude) {
    const Scenario& s = find_scenario(name);
    double amp = amplitude >= 0 ? amplitude : s.default_amplitude;
    Perturbation f = make_perturbation(s, amp);
    JacobianCocycle c(f, s.splitting);
    Role role = Role::WS;
    if (role_name_str == "u") role = Role::U;
    else if (role_name_str == "ss") role = Role::SS;
    else if (role_name_str == "ws") role = Role::WS;
    else if (role_name_str == "ss-weak-sub") role = Role::SS_WEAK_SUB;
    else throw Error("unknown role: " + role_name_str);

    std::vector<Eigen::VectorXd> pts;
    if (points_file.empty()) {
        pts = quasi_random_points(8, f.dim(), 1);
    } else {
        std::ifstream in(points_file);
        if (!in) throw Error("cannot open points file: " + points_file);
        json j = json::parse(in);
        for (const auto& row : j) {
            Eigen::VectorXd x(f.dim());
            for (int i = 0; i < f.dim(); ++i) x(i) = row[static_cast<size_t>(i)].get<double>();
            pts.push_back(x);
        }
    }
    json out;
    out["scenario"] = s.name;
    out["role"] = role_name_str;
    json frames = json::array();
    for (const auto& x : pts) {
        SubspaceResult res = invariant_subspace(c, x, role);
        json fr;
        json xv = json::array(), basis = json::array();
        for (int i = 0; i < f.dim(); ++i) xv.push_back(x(i));
        for (int cc = 0; cc < res.basis.cols(); ++cc) {
            json col = json::array();
            for (int i = 0; i < f.dim(); ++i) col.push_back(res.basis(i, cc));
            basis.push_back(col);
        }
        fr["point"] = xv;
        fr["basis"] = basis;
        fr["depth"] = res.depth;
        fr["last_delta"] = res.last_delta;
        fr["invariance_defect"] = frame_invariance_defect(c, x, role);
        frames.push_back(fr);
    }
    out["frames"] = frames;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_rigidity_test(const std::string& name, const std::string& predicate, const std::string& out_path,
                      double amplitude, std::uint64_t seed) {
    const Scenario& s = find_scenario(name);
    RunOverrides o;
    if (amplitude >= 0) o.amplitude = amplitude;
    std::vector<std::string> only;
    if (predicate == "strong-preservation") only = {"strong-preservation"};
    else if (predicate == "joint-integrability") only = {"joint-integrability"};
    else if (predicate == "holonomy-sr") only = {"holonomy-affinity", "holonomy-ablation-ratio", "holonomy-equivariance"};
    else if (predicate == "holder") only = {"holder-ws-deviation"};
    else throw Error("unknown predicate group: " + predicate);
    o.only = only;
    json report = run_scenario(s, o, seed);
    if (!out_path.empty()) write_report_atomic(report, out_path);
    std::cout << report.dump(2) << "\n";
    bool declared = false;
    for (const auto& p : only)
        if (report["predicates"].contains(p)) declared = true;
    if (!declared) throw Error("scenario declares no expectation for " + predicate);
    return report_all_pass(report) ? 0 : 2;
}

int cmd_run_scenario(const std::string& name, double amplitude, int samples, std::uint64_t seed,
                     const std::string& out_path) {
    const Scenario& s = find_scenario(name);
    RunOverrides o;
    if (amplitude >= 0) o.amplitude = amplitude;
    if (samples > 0) o.samples = samples;
    json report = run_scenario(s, o, seed);
    if (!out_path.empty()) write_report_atomic(report, out_path);
    std::cout << report.dump(2) << "\n";
    return report_all_pass(report) ? 0 : 2;
}

int cmd_list_scenarios() {
    for (const auto& s : builtin_scenarios()) {
        std::cout << s.name << "  (d=" << s.matrix.rows() << ", amplitude " << s.default_amplitude
                  << ")\n    " << s.description << "\n    predicates:";
        for (const auto& e : s.expectations) std::cout << " " << e.name;
        std::cout << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rigidity: numerical experiments on conjugacies and invariant foliations of perturbed hyperbolic toral automorphisms"};
    app.require_subcommand(1);

    std::string matrix_json;
    auto* analyze = app.add_subcommand("analyze-matrix",
                                       "hyperbolicity, irreducibility, moduli and r_ss of an integer matrix");
    analyze->add_option("--matrix", matrix_json, "JSON array of integer rows, e.g. [[2,1],[1,1]]")->required();

    std::string chi_csv, dims_csv;
    int block = 1;
    double eps = 0.0;
    bool exact = false;
    auto* subres = app.add_subcommand("subresonance", "sub-resonance type enumeration");
    auto* enumerate_cmd = subres->add_subcommand("enumerate", "list sub-resonance types into a block");
    enumerate_cmd->add_option("--chi", chi_csv, "comma-separated exponents, ascending negatives")->required();
    enumerate_cmd->add_option("--dims", dims_csv, "comma-separated block dimensions (default all 1)");
    enumerate_cmd->add_option("--block", block, "target block, 1-based")->required();
    enumerate_cmd->add_option("--eps", eps, "spectrum band half-width");
    enumerate_cmd->add_flag("--exact", exact, "exact mode: zero classification tolerance");

    std::string scen, out_path, points_file, role_str = "ws", predicate;
    double amplitude = -1;
    int samples = 0;
    std::uint64_t seed = 1;
    auto* solve = app.add_subcommand("solve-conjugacy", "emit CSV of x, Delta(x), residual");
    solve->add_option("--scenario", scen, "scenario name")->required();
    solve->add_option("--amplitude", amplitude, "perturbation amplitude override");
    int solve_samples = 50;
    double tolv = 1e-12;
    solve->add_option("--samples", solve_samples, "sample count");
    solve->add_option("--tol", tolv, "series tolerance");
    solve->add_option("--seed", seed, "sampling seed");

    auto* split_cmd = app.add_subcommand("splitting", "emit JSON frames of a perturbed bundle");
    split_cmd->add_option("--scenario", scen, "scenario name")->required();
    split_cmd->add_option("--points", points_file, "JSON file with an array of points");
    split_cmd->add_option("--role", role_str, "u | ss | ws | ss-weak-sub");
    split_cmd->add_option("--amplitude", amplitude, "perturbation amplitude override");

    auto* rig = app.add_subcommand("rigidity-test", "run one rigidity predicate group on a scenario");
    rig->add_option("--scenario", scen, "scenario name")->required();
    rig->add_option("--predicate", predicate,
                    "strong-preservation | joint-integrability | holonomy-sr | holder")->required();
    rig->add_option("--out", out_path, "report path (written atomically)");
    rig->add_option("--amplitude", amplitude, "perturbation amplitude override");
    rig->add_option("--seed", seed, "sampling seed");

    auto* run = app.add_subcommand("run-scenario", "run every declared predicate of a scenario");
    run->add_option("--scenario", scen, "scenario name")->required();
    run->add_option("--amplitude", amplitude, "perturbation amplitude override");
    run->add_option("--samples", samples, "quasi-random sample count");
    run->add_option("--seed", seed, "sampling seed");
    run->add_option("--out", out_path, "report path (written atomically)");

    app.add_subcommand("list-scenarios", "list built-in scenarios and their declared predicates");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("analyze-matrix")) return cmd_analyze_matrix(matrix_json);
        if (app.got_subcommand("subresonance")) return cmd_subres_enumerate(chi_csv, dims_csv, block, eps, exact);
        if (app.got_subcommand("solve-conjugacy"))
            return cmd_solve_conjugacy(scen, amplitude, solve_samples, tolv, seed);
        if (app.got_subcommand("splitting")) return cmd_splitting(scen, points_file, role_str, amplitude);
        if (app.got_subcommand("rigidity-test"))
            return cmd_rigidity_test(scen, predicate, out_path, amplitude, seed);
        if (app.got_subcommand("run-scenario"))
            return cmd_run_scenario(scen, amplitude, samples, seed, out_path);
        if (app.got_subcommand("list-scenarios")) return cmd_list_scenarios();
    } catch (const PerturbationTooLargeError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 2;
    } catch (const InvalidPartitionError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
