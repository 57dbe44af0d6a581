#include "tslice/tslice.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace tslice;

namespace {

struct Common {
    std::string config;
    std::string out = "runs";
    bool check = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

exp::Config load(const Common& c)
{
    exp::Config cfg = c.config.empty() ? exp::Config{} : exp::load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.threads) {
        if (*c.threads < 1) throw Error("config", "field 'threads': must be >= 1");
        cfg.threads = *c.threads;
    }
    return cfg;
}

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config, "JSON config file");
    sub->add_option("--out", c.out, "output root; each run goes to <out>/<timestamp>/");
    sub->add_flag("--check", c.check, "enforce acceptance thresholds (exit 2 on failure)");
    sub->add_option("--seed", c.seed, "seed for randomized subdivisions");
    sub->add_option("--threads", c.threads, "worker threads for sweep points");
}

int finish(const exp::Config& cfg, const exp::Report& rep, const Common& c, const std::string& argv_line)
{
    auto dir = exp::write_run(c.out, cfg, rep, argv_line);
    std::cout << rep.table.csv();
    std::cout << "# wrote " << dir.string() << "\n";
    if (c.check) {
        for (auto& f : rep.failures) std::cerr << "check failed: " << f << "\n";
        if (!rep.failures.empty()) return 2;
        std::cerr << "all checks passed\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"time slicing of quadratic-plus-potential Schrodinger propagators"};
    app.require_subcommand(1);
    std::string argv_line;
    for (int k = 0; k < argc; ++k) argv_line += (k ? " " : "") + std::string(argv[k]);

    Common c;
    int samples = 101;
    auto* flow = app.add_subcommand("flow", "symplectic flow samples and exceptional times over the interval");
    add_common(flow, c);
    flow->add_option("--samples", samples, "number of tau samples")->check(CLI::Range(2, 100000));
    auto* norms = app.add_subcommand("norms", "Sjostrand and sup norms of b, e, a and e(Omega)");
    add_common(norms, c);
    auto* converge = app.add_subcommand("converge", "convergence sweep over subdivisions");
    add_common(converge, c);
    auto* kernel = app.add_subcommand("kernel", "kernel and amplitude errors at tau = t - s");
    add_common(kernel, c);
    auto* trot = app.add_subcommand("compare-trotter", "slicing vs split-step at equal slice counts");
    add_common(trot, c);

    criteria::Options so;
    bool fault = false;
    std::vector<int> only;
    auto* self = app.add_subcommand("selftest", "run the invariant and rate suite");
    self->add_option("--N", so.N, "grid size (reduced sizes label failures as resolution)")->check(CLI::Range(8, 4096));
    self->add_flag("--inject-unsymmetrized-flow", fault, "fault injection: build a 2-D quadratic form without symmetrizing A");
    self->add_option("--only", only, "run only these criterion ids");
    self->add_flag("!--no-info", so.informative, "skip the informative phase-space contrast");
    self->add_option("--threads", so.threads, "worker threads")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*self) {
            so.unsymmetrized_flow = fault;
            auto rs = criteria::run_all(so, &std::cout, only);
            bool ok = criteria::all_pass(rs);
            std::cout << (ok ? "selftest: all pass" : "selftest: failures") << "\n";
            return ok ? 0 : 1;
        }
        exp::Config cfg = load(c);
        if (*flow) return finish(cfg, exp::run_flow(cfg, samples), c, argv_line);
        if (*norms) return finish(cfg, exp::run_norms(cfg), c, argv_line);
        if (*converge) return finish(cfg, exp::run_converge(cfg, c.check), c, argv_line);
        if (*kernel) return finish(cfg, exp::run_kernel(cfg, c.check), c, argv_line);
        if (*trot) return finish(cfg, exp::run_compare_trotter(cfg, c.check), c, argv_line);
    } catch (const Error& e) {
        std::cerr << "error [" << e.kind << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
