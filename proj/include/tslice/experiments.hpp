#pragma once

#include "core.hpp"
#include "flow.hpp"
#include "kernel.hpp"
#include "metaplectic.hpp"
#include "numerics.hpp"
#include "potential.hpp"
#include "slicing.hpp"
#include "transforms.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

namespace tslice::exp {

using json = nlohmann::json;

// ---------------------------------------------------------------- config

struct Config {
    std::string hamiltonian = "harmonic";   // preset name or "custom"
    QuadraticForm Q = QuadraticForm::harmonic();
    std::string potential = "cosine";
    PotentialParams pparams{};
    int N = 256;
    double box = 16.0;
    double s = 0.0, t = 1.0;
    std::vector<int> Ls = {2, 4, 8, 16, 32};
    std::vector<std::vector<double>> explicit_times;
    bool randomized = false;                 // add a seeded non-uniform family with the same L values
    std::uint64_t seed = 0;
    int probe = 10;                          // probe subspace dimension for operator norms
    SliceOptions quad{};
    int threads = 1;

    Grid1d grid() const { return Grid1d(N, box); }
    PotentialSpec spec() const { return make_potential(potential, pparams); }
};

inline const std::map<std::string, QuadraticForm>& hamiltonian_presets()
{
    static const std::map<std::string, QuadraticForm> p = {
        {"zero", QuadraticForm::zero()},
        {"free", QuadraticForm::free_particle()},
        {"harmonic", QuadraticForm::harmonic()},
        {"mixed", QuadraticForm::scalar(1.0, 0.3, 0.5)},
    };
    return p;
}

namespace detail {

[[noreturn]] inline void bad(const std::string& field, const std::string& msg)
{
    throw Error("config", "field '" + field + "': " + msg);
}

inline void known_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto k : keys) ok = ok || it.key() == k;
        if (!ok) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
}

inline double num(const json& j, const std::string& field)
{
    if (!j.is_number()) bad(field, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) bad(field, "must be finite");
    return v;
}

inline long long integer(const json& j, const std::string& field)
{
    if (!j.is_number_integer() && !j.is_number_unsigned()) bad(field, "expected an integer");
    return j.get<long long>();
}

inline RMat block(const json& j, const std::string& field)
{
    if (j.is_number()) {
        RMat m(1, 1);
        m(0, 0) = num(j, field);
        return m;
    }
    if (!j.is_array() || j.empty()) bad(field, "expected a number or a square matrix (array of rows)");
    int d = static_cast<int>(j.size());
    RMat m(d, d);
    for (int r = 0; r < d; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != d) bad(field, "matrix must be square");
        for (int c = 0; c < d; ++c) m(r, c) = num(row[c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

inline json block_json(const RMat& m)
{
    if (m.rows() == 1) return m(0, 0);
    json a = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        a.push_back(row);
    }
    return a;
}

} // namespace detail

inline Config parse_config(const json& j)
{
    using namespace detail;
    if (!j.is_object()) throw Error("config", "top level must be a JSON object");
    known_keys(j, "", {"hamiltonian", "potential", "grid", "interval", "subdivisions", "randomized", "seed", "probe",
                       "quadrature", "threads"});
    Config c;
    if (j.contains("hamiltonian")) {
        const json& h = j["hamiltonian"];
        if (h.is_string()) {
            auto& p = hamiltonian_presets();
            auto it = p.find(h.get<std::string>());
            if (it == p.end()) bad("hamiltonian", "unknown preset '" + h.get<std::string>() + "' (zero, free, harmonic, mixed)");
            c.hamiltonian = it->first;
            c.Q = it->second;
        } else if (h.is_object()) {
            known_keys(h, "hamiltonian", {"A", "B", "C", "d"});
            for (auto k : {"A", "B", "C"})
                if (!h.contains(k)) bad(std::string("hamiltonian.") + k, "missing");
            RMat A = block(h["A"], "hamiltonian.A"), B = block(h["B"], "hamiltonian.B"), C = block(h["C"], "hamiltonian.C");
            if (h.contains("d") && integer(h["d"], "hamiltonian.d") != A.rows()) bad("hamiltonian.d", "does not match the block size");
            if (B.rows() != A.rows() || C.rows() != A.rows()) bad("hamiltonian", "A, B, C must have the same size");
            c.hamiltonian = "custom";
            c.Q = QuadraticForm(A, B, C);
        } else {
            bad("hamiltonian", "expected a preset name or an object {A, B, C}");
        }
    }
    if (j.contains("potential")) {
        const json& p = j["potential"];
        if (p.is_string()) {
            c.potential = p.get<std::string>();
        } else if (p.is_object()) {
            known_keys(p, "potential", {"id", "v0", "omega", "mod_freq", "base"});
            if (!p.contains("id") || !p["id"].is_string()) bad("potential.id", "missing or not a string");
            c.potential = p["id"].get<std::string>();
            if (p.contains("v0")) c.pparams.v0 = num(p["v0"], "potential.v0");
            if (p.contains("omega")) c.pparams.omega = num(p["omega"], "potential.omega");
            if (p.contains("mod_freq")) c.pparams.mod_freq = num(p["mod_freq"], "potential.mod_freq");
            if (p.contains("base")) {
                if (!p["base"].is_string()) bad("potential.base", "expected a string");
                c.pparams.base = p["base"].get<std::string>();
            }
        } else {
            bad("potential", "expected a catalog id or an object {id, v0, ...}");
        }
        try {
            (void)make_potential(c.potential, c.pparams);
        } catch (const Error& e) {
            bad("potential", e.what());
        }
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) bad("grid", "expected an object {N, L}");
        known_keys(g, "grid", {"N", "L"});
        if (g.contains("N")) c.N = static_cast<int>(integer(g["N"], "grid.N"));
        if (g.contains("L")) c.box = num(g["L"], "grid.L");
        if (c.N < 8 || (c.N & (c.N - 1))) bad("grid.N", "must be a power of two >= 8");
        if (!(c.box > 0)) bad("grid.L", "must be positive");
    }
    if (j.contains("interval")) {
        const json& iv = j["interval"];
        if (!iv.is_object()) bad("interval", "expected an object {s, t}");
        known_keys(iv, "interval", {"s", "t"});
        if (iv.contains("s")) c.s = num(iv["s"], "interval.s");
        if (iv.contains("t")) c.t = num(iv["t"], "interval.t");
        if (!(c.t > c.s)) bad("interval", "need t > s");
    }
    if (j.contains("subdivisions")) {
        const json& sd = j["subdivisions"];
        if (!sd.is_array() || sd.empty()) bad("subdivisions", "expected a non-empty list of L values or time lists");
        c.Ls.clear();
        for (std::size_t k = 0; k < sd.size(); ++k) {
            std::string f = "subdivisions[" + std::to_string(k) + "]";
            if (sd[k].is_array()) {
                std::vector<double> ts;
                for (std::size_t q = 0; q < sd[k].size(); ++q) ts.push_back(num(sd[k][q], f + "[" + std::to_string(q) + "]"));
                try {
                    Subdivision chk(ts);
                } catch (const Error& e) {
                    bad(f, e.what());
                }
                if (std::abs(ts.front() - c.s) > 1e-12 || std::abs(ts.back() - c.t) > 1e-12) bad(f, "must start at s and end at t");
                c.explicit_times.push_back(ts);
            } else {
                long long L = integer(sd[k], f);
                if (L < 1) bad(f, "L must be >= 1");
                c.Ls.push_back(static_cast<int>(L));
            }
        }
    }
    if (j.contains("randomized")) {
        if (!j["randomized"].is_boolean()) bad("randomized", "expected true or false");
        c.randomized = j["randomized"].get<bool>();
    }
    if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(integer(j["seed"], "seed"));
    if (j.contains("probe")) {
        c.probe = static_cast<int>(integer(j["probe"], "probe"));
        if (c.probe < 1 || c.probe > c.N) bad("probe", "must lie in [1, N]");
    }
    if (j.contains("threads")) {
        c.threads = static_cast<int>(integer(j["threads"], "threads"));
        if (c.threads < 1) bad("threads", "must be >= 1");
    }
    if (j.contains("quadrature")) {
        const json& q = j["quadrature"];
        if (!q.is_object()) bad("quadrature", "expected an object");
        known_keys(q, "quadrature", {"gl_order", "max_panel", "ode_dt_max", "ode_tol", "dyson_panel", "dyson_order", "taper",
                                     "taper_start", "lagrange"});
        auto& o = c.quad;
        if (q.contains("gl_order")) o.gl_order = static_cast<int>(integer(q["gl_order"], "quadrature.gl_order"));
        if (q.contains("max_panel")) o.max_panel = num(q["max_panel"], "quadrature.max_panel");
        if (q.contains("ode_dt_max")) o.ode_dt_max = num(q["ode_dt_max"], "quadrature.ode_dt_max");
        if (q.contains("ode_tol")) o.ode_tol = num(q["ode_tol"], "quadrature.ode_tol");
        if (q.contains("dyson_panel")) o.dyson_panel = num(q["dyson_panel"], "quadrature.dyson_panel");
        if (q.contains("dyson_order")) o.dyson_order = static_cast<int>(integer(q["dyson_order"], "quadrature.dyson_order"));
        if (q.contains("taper")) {
            if (!q["taper"].is_boolean()) bad("quadrature.taper", "expected true or false");
            o.weyl.taper = q["taper"].get<bool>();
        }
        if (q.contains("taper_start")) o.weyl.taper_start = num(q["taper_start"], "quadrature.taper_start");
        if (q.contains("lagrange")) o.weyl.lagrange = static_cast<int>(integer(q["lagrange"], "quadrature.lagrange"));
        if (o.gl_order < 1 || o.gl_order > 64) bad("quadrature.gl_order", "must lie in [1, 64]");
        if (!(o.max_panel > 0) || !(o.ode_dt_max > 0) || !(o.dyson_panel > 0)) bad("quadrature", "step sizes must be positive");
        if (o.dyson_order < 1 || o.dyson_order > 64) bad("quadrature.dyson_order", "must lie in [1, 64]");
        if (!(o.weyl.taper_start > 0 && o.weyl.taper_start < 1)) bad("quadrature.taper_start", "must lie in (0, 1)");
        if (o.weyl.lagrange < 4 || o.weyl.lagrange % 2) bad("quadrature.lagrange", "must be an even number >= 4");
    }
    return c;
}

// reads a config file; JSON syntax errors are reported with line and column
inline Config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error("config", path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const Error& e) {
        throw Error("config", path + ": " + e.what());
    }
}

inline json resolved(const Config& c)
{
    json j;
    if (c.hamiltonian == "custom") {
        j["hamiltonian"] = {{"A", detail::block_json(c.Q.A)}, {"B", detail::block_json(c.Q.B)}, {"C", detail::block_json(c.Q.C)}, {"d", c.Q.d}};
    } else {
        j["hamiltonian"] = c.hamiltonian;
    }
    j["potential"] = {{"id", c.potential}, {"v0", c.pparams.v0}, {"omega", c.pparams.omega}, {"mod_freq", c.pparams.mod_freq},
                      {"base", c.pparams.base}};
    j["grid"] = {{"N", c.N}, {"L", c.box}};
    j["interval"] = {{"s", c.s}, {"t", c.t}};
    json sd = json::array();
    for (int L : c.Ls) sd.push_back(L);
    for (auto& ts : c.explicit_times) sd.push_back(ts);
    j["subdivisions"] = sd;
    j["randomized"] = c.randomized;
    j["seed"] = c.seed;
    j["probe"] = c.probe;
    j["threads"] = c.threads;
    const auto& o = c.quad;
    j["quadrature"] = {{"gl_order", o.gl_order}, {"max_panel", o.max_panel}, {"ode_dt_max", o.ode_dt_max}, {"ode_tol", o.ode_tol},
                       {"dyson_panel", o.dyson_panel}, {"dyson_order", o.dyson_order}, {"taper", o.weyl.taper},
                       {"taper_start", o.weyl.taper_start}, {"lagrange", o.weyl.lagrange}};
    return j;
}

// norm provenance carried in every report
inline json window_identities(const Grid1d& g)
{
    SjostrandOptions full;
    SjostrandOptions tr = trusted_options(g);
    LocalWindow lw;
    return {{"sjostrand_window", full.window.name},
            {"sjostrand_window_half_extent", full.window.half_extent},
            {"sjostrand_lattice_nodes", full.nodes},
            {"sjostrand_trusted_region", tr.region_x},
            {"local_window", "(1-(r/R)^2)^4"},
            {"local_window_R", lw.radius(g)},
            {"amplitude_interior_half", interior_half(g)},
            {"operator_norm", "top singular value on the low-energy probe subspace (harmonic oscillator states)"}};
}

// ---------------------------------------------------------------- tables

using Cell = std::variant<long long, double, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    std::string csv() const
    {
        std::string out;
        for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
        out += "\n";
        char buf[64];
        for (auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) {
                if (k) out += ",";
                if (auto p = std::get_if<long long>(&r[k])) {
                    out += std::to_string(*p);
                } else if (auto d = std::get_if<double>(&r[k])) {
                    if (std::isnan(*d)) out += "nan";
                    else {
                        std::snprintf(buf, sizeof buf, "%.17g", *d);
                        out += buf;
                    }
                } else {
                    out += std::get<std::string>(r[k]);
                }
            }
            out += "\n";
        }
        return out;
    }
};

inline json slope_json(const SlopeFit& f)
{
    if (!f.ok()) return {{"slope", nullptr}, {"constant", nullptr}, {"rows_used", f.used}, {"skipped", true}};
    return {{"slope", f.slope}, {"constant", f.constant}, {"rows_used", f.used}, {"skipped", false}};
}

inline bool monotone_nonincreasing(const std::vector<double>& v, double floor = 0.0)
{
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[k - 1] && v[k] > 10 * floor) return false;
    return true;
}

// errors at or below this are treated as exact and left out of slope fits
inline constexpr double numerical_floor = 1e-11;

// ---------------------------------------------------------------- worker pool

// f(k) for k < n on up to `threads` workers; results land by index, so the
// output order never depends on scheduling
template <class F>
inline void parallel_for(int n, int threads, F&& f)
{
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int k = 0; k < n; ++k) f(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int k; (k = next++) < n;) {
                try {
                    f(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(m);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------- subdivisions

struct Family {
    std::string name;
    Subdivision W;
};

inline std::vector<Family> families(const Config& c, bool with_random = true)
{
    std::vector<Family> out;
    for (int L : c.Ls) out.push_back({"uniform", Subdivision::uniform(c.s, c.t, L)});
    if (c.randomized && with_random)
        for (int L : c.Ls) out.push_back({"random", Subdivision::random(c.s, c.t, L, c.seed + static_cast<std::uint64_t>(L))});
    for (auto& ts : c.explicit_times) out.push_back({"explicit", Subdivision(ts)});
    return out;
}

// ---------------------------------------------------------------- reports

struct Report {
    std::string command;
    Table table;
    json summary;
    std::vector<std::string> failures;   // threshold violations, filled in --check mode
};

// shared reference objects for one config
struct Reference {
    Grid1d g;
    PotentialSpec spec;
    MetaplecticOracle U0;
    Mat P;
    OperatorMatrix A;      // a(t, s)^w
    SymbolGrid a;
    OperatorMatrix U;      // U0(t - s) a^w

    explicit Reference(const Config& c)
        : g(c.grid()), spec(c.spec()), U0(c.Q, g), P(probe_basis(g, c.probe)),
          A(a_operator_ode(spec, c.Q, c.t, c.s, g, c.quad)), a(kernel_to_symbol(A, c.quad.weyl)),
          U(U_reference(A, c.t, c.s, U0))
    {
    }
};

inline void fit_family(json& out, const std::string& key, const std::vector<double>& w, const std::vector<double>& e)
{
    out[key] = slope_json(fit_slope(w, e, numerical_floor));
}

inline Report run_converge(const Config& c, bool check = false)
{
    Reference ref(c);
    auto fams = families(c);
    const bool trotter_ok = ref.spec.separable && ref.spec.x_only;
    struct Row { double sym, op, opf, tr; };
    std::vector<Row> rows(fams.size());
    SjostrandOptions so = trusted_options(ref.g);
    parallel_for(static_cast<int>(fams.size()), c.threads, [&](int k) {
        const Subdivision& W = fams[k].W;
        OperatorMatrix Pw = e_omega_operator(ref.spec, c.Q, W, ref.g, c.quad);
        OperatorMatrix E = E_omega(ref.spec, c.Q, W, ref.U0, c.quad);
        Row r;
        r.sym = sjostrand_norm(kernel_to_symbol(Pw, c.quad.weyl) - ref.a, so);
        r.op = restricted_error(E, ref.U, ref.P);
        r.opf = operator_error(E, ref.U);
        r.tr = trotter_ok ? restricted_error(trotter(ref.spec, c.Q, c.t, c.s, W.L(), ref.U0, c.quad), ref.U, ref.P) : std::nan("");
        rows[k] = r;
    });

    Report rep;
    rep.command = "converge";
    rep.table.header = {"family", "L", "omega", "err_symbol", "err_op", "err_trotter", "err_op_full"};
    json fits;
    std::map<std::string, std::vector<std::size_t>> by;
    for (std::size_t k = 0; k < fams.size(); ++k) {
        rep.table.rows.push_back({fams[k].name, static_cast<long long>(fams[k].W.L()), fams[k].W.mesh(), rows[k].sym, rows[k].op,
                                  rows[k].tr, rows[k].opf});
        by[fams[k].name].push_back(k);
    }
    double worst = 0;
    for (auto& r : rows) worst = std::max({worst, r.sym, r.op});
    for (auto& [name, idx] : by) {
        std::vector<double> w, es, eo, et;
        for (auto k : idx) {
            w.push_back(fams[k].W.mesh());
            es.push_back(rows[k].sym);
            eo.push_back(rows[k].op);
            et.push_back(rows[k].tr);
        }
        json f;
        fit_family(f, "symbol", w, es);
        fit_family(f, "op", w, eo);
        if (trotter_ok) fit_family(f, "trotter", w, et);
        if (name != "explicit") {
            f["monotone_symbol"] = monotone_nonincreasing(es, numerical_floor);
            f["monotone_op"] = monotone_nonincreasing(eo, numerical_floor);
        }
        fits[name] = f;
    }
    rep.summary["fits"] = fits;
    rep.summary["max_error"] = worst;
    rep.summary["trotter"] = trotter_ok ? "computed" : "skipped: potential is not a multiplication";
    if (check) {
        if (ref.spec.is_zero()) {
            if (worst > 1e-10) rep.failures.push_back("zero potential: error above 1e-10");
        } else if (fits.contains("uniform")) {
            for (auto key : {"symbol", "op"}) {
                const json& f = fits["uniform"][key];
                if (!f["skipped"].get<bool>() && f["slope"].get<double>() < 0.9)
                    rep.failures.push_back(std::string("uniform ") + key + " slope below 0.9");
            }
        }
    }
    return rep;
}

inline void refuse_exceptional(const QuadraticForm& Q, double tau)
{
    if (Q.d != 1) throw Error("domain", "kernel analysis is one-dimensional");
    ExceptionalTimeSet ex = exceptional_times(Q, tau - 1e-3, tau + 1e-3);
    if (ex.degenerate || !ex.roots.empty() || std::abs(det_B(Q, tau)) <= 1e-3)
        throw Error("exceptional-time", "tau = " + std::to_string(tau) + " lies within 1e-3 of an exceptional time");
}

inline Report run_kernel(const Config& c, bool check = false)
{
    const double tau = c.t - c.s;
    refuse_exceptional(c.Q, tau);
    Reference ref(c);
    U0Kernel k0 = u0_kernel(c.Q, tau, ref.U0);
    SymbolGrid u = kernel_values(kernel_route(k0, ref.A));
    SymbolGrid a_maps = amplitude_via_maps(ref.a, c.Q, tau);
    double consistency = interior_amplitude_diff(extract_amplitude(kernel_route(k0, ref.A), k0), a_maps);
    auto fams = families(c);
    struct Row { double fl1, sup, amp; };
    std::vector<Row> rows(fams.size());
    parallel_for(static_cast<int>(fams.size()), c.threads, [&](int k) {
        OperatorMatrix Pw = e_omega_operator(ref.spec, c.Q, fams[k].W, ref.g, c.quad);
        SymbolGrid kv = kernel_values(kernel_route(k0, Pw));
        SymbolGrid e_maps = amplitude_via_maps(kernel_to_symbol(Pw, c.quad.weyl), c.Q, tau);
        rows[k] = {local_fl1_error(kv, u), local_sup_error(kv, u, LocalWindow{}), interior_amplitude_diff(e_maps, a_maps)};
    });
    Report rep;
    rep.command = "kernel";
    rep.table.header = {"family", "L", "omega", "fl1_err", "sup_err", "amp_err"};
    std::map<std::string, std::vector<std::size_t>> by;
    bool sup_ok = true;
    for (std::size_t k = 0; k < fams.size(); ++k) {
        rep.table.rows.push_back({fams[k].name, static_cast<long long>(fams[k].W.L()), fams[k].W.mesh(), rows[k].fl1, rows[k].sup,
                                  rows[k].amp});
        by[fams[k].name].push_back(k);
        sup_ok = sup_ok && rows[k].sup <= rows[k].fl1;
    }
    json fits;
    for (auto& [name, idx] : by) {
        std::vector<double> w, f1, su, am;
        for (auto k : idx) {
            w.push_back(fams[k].W.mesh());
            f1.push_back(rows[k].fl1);
            su.push_back(rows[k].sup);
            am.push_back(rows[k].amp);
        }
        json f;
        fit_family(f, "fl1", w, f1);
        fit_family(f, "sup", w, su);
        fit_family(f, "amplitude", w, am);
        fits[name] = f;
    }
    rep.summary["tau"] = tau;
    rep.summary["fits"] = fits;
    rep.summary["sup_le_fl1_all_rows"] = sup_ok;
    rep.summary["amplitude_consistency"] = consistency;
    rep.summary["phase_constant"] = {{"re", k0.c.real()}, {"im", k0.c.imag()}};
    if (check) {
        if (!sup_ok) rep.failures.push_back("sup error exceeds FL1 error on some row");
        if (consistency > 1e-4) rep.failures.push_back("amplitude constructions disagree above 1e-4");
        if (!ref.spec.is_zero() && fits.contains("uniform"))
            for (auto key : {"fl1", "amplitude"}) {
                const json& f = fits["uniform"][key];
                if (!f["skipped"].get<bool>() && f["slope"].get<double>() < 0.9)
                    rep.failures.push_back(std::string("uniform ") + key + " slope below 0.9");
            }
    }
    return rep;
}

inline Report run_compare_trotter(const Config& c, bool check = false)
{
    Reference ref(c);
    if (!ref.spec.separable || !ref.spec.x_only)
        throw Error("non-multiplicative-potential", "compare-trotter needs an x-only potential");
    std::vector<int> Ls = c.Ls;
    std::vector<std::array<double, 2>> rows(Ls.size());
    parallel_for(static_cast<int>(Ls.size()), c.threads, [&](int k) {
        Subdivision W = Subdivision::uniform(c.s, c.t, Ls[k]);
        rows[k] = {restricted_error(E_omega(ref.spec, c.Q, W, ref.U0, c.quad), ref.U, ref.P),
                   restricted_error(trotter(ref.spec, c.Q, c.t, c.s, Ls[k], ref.U0, c.quad), ref.U, ref.P)};
    });
    Report rep;
    rep.command = "compare-trotter";
    rep.table.header = {"L", "omega", "err_slice", "err_trotter", "ratio"};
    bool le16 = true, has16 = false;
    for (std::size_t k = 0; k < Ls.size(); ++k) {
        double ratio = rows[k][1] > 0 ? rows[k][0] / rows[k][1] : std::nan("");
        rep.table.rows.push_back({static_cast<long long>(Ls[k]), (c.t - c.s) / Ls[k], rows[k][0], rows[k][1], ratio});
        if (Ls[k] == 16) {
            has16 = true;
            le16 = rows[k][0] <= rows[k][1];
        }
    }
    rep.summary["slice_le_trotter_at_L16"] = has16 ? json(le16) : json(nullptr);
    if (check && has16 && !le16) rep.failures.push_back("slicing error exceeds Trotter error at L = 16");
    return rep;
}

inline Report run_flow(const Config& c, int samples = 101)
{
    Report rep;
    rep.command = "flow";
    int d = c.Q.d;
    rep.table.header = {"tau", "det_B", "symplectic_defect"};
    if (d == 1)
        for (auto k : {"a", "b", "c", "d"}) rep.table.header.push_back(k);
    for (int k = 0; k < samples; ++k) {
        double tau = c.s + (c.t - c.s) * k / (samples - 1);
        SymplecticMatrix S = flow_at(c.Q, tau);
        std::vector<Cell> row = {tau, S.B().determinant(), S.symplectic_defect()};
        if (d == 1)
            for (double v : {S.a(), S.b(), S.c(), S.dd()}) row.push_back(v);
        rep.table.rows.push_back(row);
    }
    ExceptionalTimeSet ex = exceptional_times(c.Q, c.s, c.t);
    rep.summary["exceptional_times"] = ex.roots;
    rep.summary["degenerate"] = ex.degenerate;
    rep.summary["warnings"] = ex.warnings;
    return rep;
}

inline Report run_norms(const Config& c)
{
    Grid1d g = c.grid();
    PotentialSpec spec = c.spec();
    SjostrandOptions so;
    Report rep;
    rep.command = "norms";
    rep.table.header = {"object", "L", "sjostrand", "sjostrand_trusted", "sup"};
    auto add = [&](const std::string& name, long long L, const SymbolGrid& s) {
        rep.table.rows.push_back({name, L, sjostrand_norm(s, so), sjostrand_norm(s, trusted_options(g)), max_abs(s.values)});
    };
    add("one", 0, SymbolGrid::constant(g, 1.0));
    add("b(s,s)", 0, b_symbol(spec, c.Q, c.s, c.s, g));
    add("b(t,s)", 0, b_symbol(spec, c.Q, c.t, c.s, g));
    add("e(t,s)", 0, e_symbol(spec, c.Q, c.t, c.s, g, c.quad));
    add("a(t,s)", 0, a_symbol_ode(spec, c.Q, c.t, c.s, g, c.quad));
    for (int L : c.Ls) add("e(Omega)", L, e_omega(spec, c.Q, Subdivision::uniform(c.s, c.t, L), g, c.quad));
    return rep;
}

// ---------------------------------------------------------------- persistence

inline std::string utc_stamp()
{
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

// runs/<timestamp>/{config.json, results.csv, summary.json, manifest.json}
inline std::filesystem::path write_run(const std::filesystem::path& root, const Config& c, const Report& rep,
                                       const std::string& argv_line = "")
{
    namespace fs = std::filesystem;
    std::string stamp = utc_stamp();
    fs::path dir = root / stamp;
    for (int k = 1; fs::exists(dir); ++k) dir = root / (stamp + "-" + std::to_string(k));
    fs::create_directories(dir);
    json cfg = resolved(c);
    json summary = rep.summary;
    summary["command"] = rep.command;
    summary["config"] = cfg;
    summary["windows"] = window_identities(c.grid());
    summary["check_failures"] = rep.failures;
    json manifest = {{"tool", "tslice"},
                     {"command", rep.command},
                     {"created_utc", stamp},
                     {"argv", argv_line},
                     {"seed", c.seed},
                     {"files", {"config.json", "results.csv", "summary.json", "manifest.json"}},
                     {"rows", rep.table.rows.size()},
                     {"columns", rep.table.header},
                     {"windows", window_identities(c.grid())}};
    auto put = [&](const char* name, const std::string& text) {
        std::ofstream o(dir / name);
        if (!o) throw Error("io", "cannot write " + (dir / name).string());
        o << text;
    };
    put("config.json", cfg.dump(2) + "\n");
    put("results.csv", rep.table.csv());
    put("summary.json", summary.dump(2) + "\n");
    put("manifest.json", manifest.dump(2) + "\n");
    return dir;
}

} // namespace tslice::exp
