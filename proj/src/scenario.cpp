#include "rigidity/scenario.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/leaves.hpp"
#include "rigidity/sha1.hpp"
#include "rigidity/subres.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace rigidity {

using Eigen::VectorXd;
using nlohmann::json;

namespace {

IntMatrix companion_matrix(const IntPoly& p) { return ToralAutomorphism::companion(p).matrix(); }

IntMatrix cat2(const IntMatrix& a, const IntMatrix& b) {
    IntMatrix m = IntMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    m.topLeftCorner(a.rows(), a.cols()) = a;
    m.bottomRightCorner(b.rows(), b.cols()) = b;
    return m;
}

const IntPoly kCubic = IntPoly::of({-1, 5, -6, 1});  // roots ~ .31, .65, 5.04

IntMatrix golden2() {
    IntMatrix m(2, 2);
    m << 2, 1, 1, 1;
    return m;
}

// d=4 companion with three real stable moduli whose weak pair carries
// nonlinear sub-resonance types (degree bound >= 2 on the ws block)
IntMatrix find_two_weak_quartic() {
    auto found = search_companion(4, ModulusPattern{3, 1, 3, {}, true}, 8);
    for (const auto& T : found) {
        LyapunovData ld = lyapunov_data(T);
        if (ld.clusters.size() != 4) continue;
        double m2 = ld.clusters[1].modulus, m3 = ld.clusters[2].modulus;
        double ratio = std::log(m2) / std::log(m3);
        if (ratio >= 2.0 && ratio < 3.5) return T.matrix();
    }
    throw ScenarioError("no two-weak-exponent quartic found in the search range");
}

std::vector<PredicateSpec> common_d3(double residual_cap) {
    return {
        {"residual-max", "lt", residual_cap, "calibrated"},
        {"delta-ws-max", "lt", 1e-11, "theorem"},
        {"strong-preservation", "lt", 1e-8, "theorem"},
        {"joint-integrability", "lt", 1e-5, "theorem"},
    };
}

} // namespace

std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> out;

    {
        Scenario s;
        s.name = "linear-null";
        s.description = "unperturbed hyperbolic automorphism of T^3; every defect vanishes";
        s.matrix = companion_matrix(kCubic);
        s.splitting = {1, {}};
        s.default_amplitude = 0.0;
        s.leaf_predicates = true;
        s.expectations = {
            {"residual-max", "lt", 1e-12, "theorem"},
            {"delta-ws-max", "lt", 1e-12, "theorem"},
            {"strong-preservation", "lt", 1e-9, "calibrated"},
            {"joint-integrability", "lt", 1e-8, "calibrated"},
            {"splitting-invariance", "lt", 1e-9, "calibrated"},
        };
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "example-i";
        s.description = "T^3 family forced along e_u and e_ss; strong leaves map to linear ones";
        s.matrix = companion_matrix(kCubic);
        s.splitting = {1, {}};
        s.terms = {{{1, 0, 0}, "u"}, {{1, 0, 1}, "ss"}};
        s.default_amplitude = 1e-3;
        s.leaf_predicates = true;
        s.expectations = common_d3(1e-10);
        s.expectations.push_back({"holonomy-affinity", "lt", 1e-6, "theorem"});
        s.expectations.push_back({"holonomy-ablation-ratio", "gt", 10.0, "calibrated"});
        s.expectations.push_back({"holonomy-equivariance", "lt", 1e-7, "theorem"});
        s.expectations.push_back({"rate-classification", "gt", 0.999, "calibrated"});
        s.expectations.push_back({"splitting-invariance", "lt", 1e-9, "calibrated"});
        s.expectations.push_back({"domination-margin", "gt", 0.0, "theorem"});
        s.expectations.push_back({"bunching-product", "lt", 1.0, "theorem"});
        s.expectations.push_back({"holder-ws-deviation", "lt", 0.05, "theorem"});
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "example-ii";
        s.description = "product on T^5 = T^3 x T^2, weak-direction forcing from the second factor; strong leaves are not preserved";
        s.matrix = cat2(companion_matrix(kCubic), golden2());
        s.splitting = {2, {}};
        s.terms = {{{0, 0, 0, 1, 0}, "ws"}};
        s.default_amplitude = 1e-2;
        s.strong_role = Role::SS_WEAK_SUB;
        s.expectations = {
            {"residual-max", "lt", 1e-10, "calibrated"},
            {"delta-u-ss-max", "lt", 1e-12, "theorem"},
            {"strong-preservation", "gt", 1e-4, "theorem"},
            {"splitting-invariance", "lt", 1e-9, "calibrated"},
        };
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "example-iii-weak-hol";
        s.description = "T^3 family forced along e_u and e_ss (weak-holonomy setting)";
        s.matrix = companion_matrix(kCubic);
        s.splitting = {1, {}};
        s.terms = {{{1, 0, 0}, "u"}, {{0, 1, 1}, "ss"}};
        s.default_amplitude = 1e-3;
        s.leaf_predicates = true;
        s.expectations = common_d3(1e-10);
        s.expectations.push_back({"holonomy-affinity", "lt", 1e-6, "theorem"});
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "example-iii-weak-fol";
        s.description = "T^3 family forced along e_ss only (weak-foliation setting)";
        s.matrix = companion_matrix(kCubic);
        s.splitting = {1, {}};
        s.terms = {{{1, 1, 0}, "ss"}};
        s.default_amplitude = 1e-3;
        s.leaf_predicates = true;
        s.expectations = common_d3(1e-10);
        s.expectations.push_back({"holder-ws-deviation", "lt", 0.05, "theorem"});
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "example-iii-strong-weak";
        s.description = "T^3 family forced along e_u only (strong+weak setting)";
        s.matrix = companion_matrix(kCubic);
        s.splitting = {1, {}};
        s.terms = {{{1, 0, 0}, "u"}};
        s.default_amplitude = 1e-3;
        s.leaf_predicates = true;
        s.expectations = common_d3(1e-10);
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "weak-direction";
        s.description = "T^3 family forced along e_ws; joint integrability of u and ss breaks";
        s.matrix = companion_matrix(kCubic);
        s.splitting = {1, {}};
        s.terms = {{{1, 0, 0}, "ws"}};
        s.default_amplitude = 1e-2;
        s.leaf_predicates = true;
        s.expectations = {
            {"residual-max", "lt", 1e-10, "calibrated"},
            {"joint-integrability", "gt", 1e-3, "calibrated"},
            {"splitting-invariance", "lt", 1e-9, "calibrated"},
        };
        out.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "two-weak-exponents";
        s.description = "T^4 companion with two weak stable exponents; the ws block carries nonlinear sub-resonance types";
        s.matrix = find_two_weak_quartic();
        s.splitting = {1, {}};
        s.terms = {{{1, 0, 0, 0}, "ws"}};
        s.default_amplitude = 1e-3;
        s.expectations = {
            {"ws-degree-bound", "gt", 1.5, "theorem"},
            {"residual-max", "lt", 1e-10, "calibrated"},
            {"splitting-invariance", "lt", 1e-9, "calibrated"},
            {"domination-margin", "gt", 0.0, "calibrated"},
            {"bunching-product", "lt", 1.0, "calibrated"},
        };
        out.push_back(std::move(s));
    }
    return out;
}

const Scenario& find_scenario(const std::string& name) {
    static const std::vector<Scenario> all = builtin_scenarios();
    for (const auto& s : all)
        if (s.name == name) return s;
    throw ScenarioError("unknown scenario: " + name);
}

Perturbation make_perturbation(const Scenario& s, double amplitude) {
    ToralAutomorphism L(s.matrix);
    if (!is_hyperbolic(L)) throw ScenarioError("scenario matrix is not hyperbolic");
    StableSplitting split = stable_splitting(L, s.splitting);
    int d = L.dim();
    TrigPolyMap v(d);
    for (const auto& term : s.terms) {
        Eigen::VectorXi k(d);
        for (int i = 0; i < d; ++i) k(i) = term.k[static_cast<size_t>(i)];
        VectorXd dir;
        if (term.direction == "u") dir = split.u.col(0);
        else if (term.direction == "ss") dir = split.ss.col(0);
        else if (term.direction == "ws") dir = split.ws.col(0);
        else throw ScenarioError("unknown template direction: " + term.direction);
        v.add_term(k, VectorXd::Zero(d), amplitude * dir);
    }
    return Perturbation(std::move(L), std::move(v), 1.0);
}

std::vector<VectorXd> quasi_random_points(int n, int d, std::uint64_t seed) {
    // Kronecker sequence on sqrt-prime alphas with a seeded offset
    static const double alphas[] = {0.6180339887498949, 0.4142135623730951, 0.7320508075688772,
                                    0.2360679774997896, 0.6457513110645906, 0.8284271247461903,
                                    0.3166247903553998, 0.6055512754639891};
    std::vector<VectorXd> out;
    out.reserve(static_cast<size_t>(n));
    double offset = 0.5 + 1e-4 * static_cast<double>(seed % 9973);
    for (int i = 1; i <= n; ++i) {
        VectorXd x(d);
        for (int j = 0; j < d; ++j)
            x(j) = std::fmod(offset + i * alphas[j % 8] + 0.01 * j, 1.0);
        out.push_back(x);
    }
    return out;
}

namespace {

struct RunContext {
    RunContext(const Scenario& s, double amp, int n, double tolerance, std::uint64_t sd, Perturbation pert)
        : scenario(s), amplitude(amp), samples(n), tol(tolerance), seed(sd), f(std::move(pert)) {}

    const Scenario& scenario;
    double amplitude;
    int samples;
    double tol;
    std::uint64_t seed;
    Perturbation f;
    std::vector<VectorXd> points;

    JacobianCocycle& cocycle() {
        if (!coc) coc.emplace(f, scenario.splitting);
        return *coc;
    }
    ConjugacyField& field() {
        if (!fld) fld.emplace(f, scenario.splitting, tol);
        return *fld;
    }

private:
    std::optional<JacobianCocycle> coc;
    std::optional<ConjugacyField> fld;
};

double run_predicate(RunContext& ctx, const std::string& name) {
    const auto& pts = ctx.points;
    if (name == "residual-max") {
        return ctx.field().residual(pts).first;
    }
    if (name == "delta-ws-max") {
        double worst = 0;
        for (const auto& x : pts) worst = std::max(worst, ctx.field().delta(x).ws.norm());
        return worst;
    }
    if (name == "delta-u-ss-max") {
        double worst = 0;
        for (const auto& x : pts) {
            DeltaSplit d = ctx.field().delta(x);
            worst = std::max(worst, d.u.norm() + d.ss.norm());
        }
        return worst;
    }
    if (name == "strong-preservation") {
        Role role = ctx.scenario.strong_role;
        std::vector<double> params = role == Role::SS_WEAK_SUB
            ? std::vector<double>{0.05, 0.08, -0.05}
            : std::vector<double>{-5e-3, -2e-3, 2e-3, 5e-3};
        double worst = 0;
        for (int i = 0; i < 2 && i < static_cast<int>(pts.size()); ++i)
            worst = std::max(worst, test_strong_preservation(ctx.field(), ctx.cocycle(),
                                                             pts[static_cast<size_t>(i)], role, params));
        return worst;
    }
    if (name == "joint-integrability") {
        double worst = 0;
        for (int i = 0; i < 2 && i < static_cast<int>(pts.size()); ++i)
            worst = std::max(worst, joint_integrability_defect(ctx.cocycle(), pts[static_cast<size_t>(i)], 0.02));
        return worst;
    }
    if (name == "holonomy-affinity" || name == "holonomy-ablation-ratio") {
        JacobianCocycle& c = ctx.cocycle();
        VectorXd x = pts.at(0);
        VectorXd y = dynamical_leaf_point(c, x, Role::SS, 0.02);
        HolonomyFit nf = lifted_holonomy_test(c, x, y, 0.03, 8, false);
        if (name == "holonomy-affinity") return nf.affinity_defect;
        HolonomyFit raw = lifted_holonomy_test(c, x, y, 0.03, 8, true);
        return raw.affinity_defect / std::max(nf.affinity_defect, 1e-300);
    }
    if (name == "holonomy-equivariance") {
        JacobianCocycle& c = ctx.cocycle();
        VectorXd x = pts.at(0);
        VectorXd y = dynamical_leaf_point(c, x, Role::SS, 0.02);
        VectorXd p = x + wrap_sym(leaf_point_at(c, wrap01(x), Role::WS, 0.025) - wrap01(x));
        VectorXd q = holonomy_point(c, x, y, p);
        auto push3 = [&](VectorXd v) {
            for (int i = 0; i < 3; ++i) v = ctx.f.apply(v);
            return v;
        };
        VectorXd q2 = holonomy_point(c, push3(x), push3(y), push3(p));
        return torus_dist(push3(q), q2);
    }
    if (name == "rate-classification") {
        JacobianCocycle& c = ctx.cocycle();
        LyapunovData ld = lyapunov_data(ToralAutomorphism(ctx.scenario.matrix));
        double log_ss = std::log(ld.clusters[0].modulus);
        double log_ws = std::log(ld.clusters[1].modulus);
        int total = 0, correct = 0;
        for (int i = 0; i < 10 && i < static_cast<int>(pts.size()); ++i) {
            for (Role role : {Role::SS, Role::WS}) {
                ++total;
                try {
                    VectorXd y = dynamical_leaf_point(c, pts[static_cast<size_t>(i)], role, 1e-3);
                    RateEstimate est = contraction_rate(c, pts[static_cast<size_t>(i)], y, 80);
                    double expect = role == Role::SS ? log_ss : log_ws;
                    if (est.classification == role && std::abs(est.slope - expect) < 0.05) ++correct;
                } catch (const Error&) {
                }
            }
        }
        return total == 0 ? 0.0 : static_cast<double>(correct) / total;
    }
    if (name == "splitting-invariance") {
        double worst = 0;
        std::vector<Role> roles = {Role::U, Role::SS, Role::WS};
        for (int i = 0; i < 3 && i < static_cast<int>(pts.size()); ++i)
            for (Role r : roles)
                worst = std::max(worst, frame_invariance_defect(ctx.cocycle(), pts[static_cast<size_t>(i)], r));
        return worst;
    }
    if (name == "domination-margin") {
        std::vector<VectorXd> sub(pts.begin(), pts.begin() + std::min<size_t>(3, pts.size()));
        return check_absolute_domination(ctx.cocycle(), sub).margin;
    }
    if (name == "bunching-product") {
        std::vector<VectorXd> sub(pts.begin(), pts.begin() + std::min<size_t>(2, pts.size()));
        return check_bunching(ctx.cocycle(), sub).worst_product;
    }
    if (name == "holder-ws-deviation") {
        // increments of Delta along the linear e_ws at dyadic scales
        const StableSplitting& split = ctx.cocycle().linear_split();
        VectorXd e_ws = split.ws.col(0);
        VectorXd x = pts.at(0);
        std::vector<std::pair<double, double>> data;
        for (int k = 4; k <= 14; ++k) {
            double t = std::pow(2.0, -k);
            double inc = (ctx.field().delta_point(x + t * e_ws) - ctx.field().delta_point(x)).norm();
            data.emplace_back(t, inc);
        }
        HolderFit fit = holder_exponent(data);
        if (fit.r_squared < 0.9)
            throw Error("holder-ws-deviation: regression r^2 below 0.9, no claim");
        return std::abs(fit.alpha - 1.0);
    }
    if (name == "ws-degree-bound") {
        LyapunovData ld = lyapunov_data(ToralAutomorphism(ctx.scenario.matrix));
        std::vector<double> chi;
        for (const auto& cl : ld.clusters)
            if (cl.modulus < 1.0) chi.push_back(std::log(cl.modulus));
        // ws block: everything past the spec's ss prefix
        std::vector<double> ws_chi(chi.begin() + ctx.scenario.splitting.ss_count, chi.end());
        std::vector<int> dims(ws_chi.size(), 1);
        return static_cast<double>(ChiSpectrum(ws_chi, dims).degree_bound());
    }
    throw ScenarioError("unknown predicate: " + name);
}

} // namespace

json matrix_to_json(const IntMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

IntMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw Error("matrix_from_json: expected an array of rows");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    IntMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[static_cast<size_t>(i)].size()) != cols)
            throw Error("matrix_from_json: ragged rows");
        for (int c = 0; c < cols; ++c)
            m(i, c) = j[static_cast<size_t>(i)][static_cast<size_t>(c)].get<std::int64_t>();
    }
    return m;
}

json perturbation_to_json(const Perturbation& p) {
    json terms = json::array();
    for (const auto& t : p.v().terms()) {
        json k = json::array(), a = json::array(), b = json::array();
        for (int i = 0; i < p.dim(); ++i) {
            k.push_back(t.k(i));
            a.push_back(t.a(i));
            b.push_back(t.b(i));
        }
        terms.push_back({{"k", k}, {"a", a}, {"b", b}});
    }
    return {{"matrix", matrix_to_json(p.automorphism().matrix())}, {"terms", terms}};
}

json poly_map_to_json(const GradedPolyMap& g) {
    const ChiSpectrum& spec = g.spectrum();
    json terms = json::array();
    for (int coord = 0; coord < g.dim(); ++coord) {
        int block = spec.block_of_coord(coord);
        for (const auto& [e, c] : g.component(coord)) {
            json entry;
            entry["block"] = block;
            entry["coord"] = coord;
            entry["type"] = type_of_monomial(spec, e);
            entry["indices"] = e;
            entry["coeff"] = c;
            terms.push_back(entry);
        }
    }
    return {{"chi", spec.chi}, {"eps", spec.eps}, {"dims", spec.dims}, {"exact", spec.exact},
            {"terms", terms}};
}

GradedPolyMap poly_map_from_json(const json& j) {
    ChiSpectrum spec(j.at("chi").get<std::vector<double>>(), j.at("dims").get<std::vector<int>>(),
                     j.at("eps").get<double>(), j.value("exact", false));
    GradedPolyMap g(spec);
    for (const auto& t : j.at("terms"))
        g.add_coeff(t.at("coord").get<int>(), t.at("indices").get<Exponents>(),
                    t.at("coeff").get<double>());
    return g;
}

json run_scenario(const Scenario& s, const RunOverrides& o, std::uint64_t seed) {
    double amplitude = o.amplitude.value_or(s.default_amplitude);
    int samples = o.samples.value_or(200);
    double tol = o.tolerance.value_or(1e-12);

    json config = {{"scenario", s.name},
                   {"matrix", matrix_to_json(s.matrix)},
                   {"amplitude", amplitude},
                   {"samples", samples},
                   {"tolerance", tol},
                   {"seed", seed}};
    json report;
    report["scenario"] = s.name;
    report["description"] = s.description;
    report["config"] = config;
    report["config_hash"] = sha1_hex(config.dump());
    report["seed"] = seed;
    report["tool_versions"] = {{"rigidity", "0.1.0"},
                               {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                             std::to_string(EIGEN_MINOR_VERSION)}};
    auto now = std::chrono::system_clock::now().time_since_epoch();
    report["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();

    json preds = json::object();
    json runtimes = json::object();

    std::optional<RunContext> ctx;
    std::string setup_error;
    try {
        Perturbation f = make_perturbation(s, amplitude);
        ctx.emplace(s, amplitude, samples, tol, seed, std::move(f));
        ctx->points = quasi_random_points(samples, ctx->f.dim(), seed);
    } catch (const Error& e) {
        setup_error = e.what();
    }

    bool all_pass = true;
    for (const auto& spec : s.expectations) {
        if (o.only && std::find(o.only->begin(), o.only->end(), spec.name) == o.only->end())
            continue;
        json entry = {{"threshold", spec.threshold},
                      {"comparison", spec.comparison},
                      {"provenance", spec.provenance}};
        auto t0 = std::chrono::steady_clock::now();
        if (!setup_error.empty()) {
            entry["error"] = "scenario setup failed: " + setup_error;
            entry["pass"] = false;
            all_pass = false;
        } else {
            try {
                double value = run_predicate(*ctx, spec.name);
                bool pass = spec.comparison == "lt" ? value < spec.threshold : value > spec.threshold;
                entry["value"] = value;
                entry["pass"] = pass;
                all_pass = all_pass && pass;
            } catch (const Error& e) {
                entry["error"] = e.what();
                entry["pass"] = false;
                all_pass = false;
            }
        }
        auto t1 = std::chrono::steady_clock::now();
        runtimes[spec.name] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        preds[spec.name] = entry;
    }
    report["predicates"] = preds;
    report["runtime_ms"] = runtimes;
    report["all_pass"] = all_pass;
    return report;
}

bool report_all_pass(const json& report) {
    return report.contains("all_pass") && report["all_pass"].get<bool>();
}

std::vector<std::string> validate_report(const json& report) {
    std::vector<std::string> problems;
    for (const char* key : {"scenario", "config", "config_hash", "seed", "predicates",
                            "runtime_ms", "all_pass", "tool_versions", "timestamp_ms"})
        if (!report.contains(key)) problems.push_back(std::string("missing key: ") + key);
    if (report.contains("predicates")) {
        for (const auto& [name, entry] : report["predicates"].items()) {
            for (const char* key : {"threshold", "comparison", "pass", "provenance"})
                if (!entry.contains(key))
                    problems.push_back("predicate " + name + " missing " + key);
            if (!entry.contains("value") && !entry.contains("error"))
                problems.push_back("predicate " + name + " has neither value nor error");
        }
    }
    return problems;
}

void write_report_atomic(const json& report, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("write_report_atomic: cannot open " + tmp);
        out << report.dump(2) << "\n";
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("write_report_atomic: rename failed for " + path);
}

} // namespace rigidity
