// Command-line front end: solve, gen, bench, dyadic, convert-game.

#include "rpi/rpi.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitMaxIter = 2;
constexpr std::size_t kRationalMaxStates = 8;

struct CommonFlags {
    std::string mode = "float";
    double eps = 1e-9;
    std::size_t max_iter = rpi::kDefaultMaxIter;
    std::string format = "json";
    std::uint64_t seed = 0;
    std::string out;
};

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw rpi::InputError(path + ": cannot open for writing");
    file << text;
}

/// Parses "lo:hi".
std::pair<double, double> parse_range(const std::string& text, const char* name) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw rpi::ParameterError(std::string(name) + " range must be lo:hi");
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw rpi::ParameterError(std::string(name) + " range must be lo:hi, got '" + text + "'");
    }
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void report_validation(const rpi::ValidationReport& report) {
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!report.ok()) {
        std::string msg = "invalid instance:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw rpi::InputError(msg);
    }
}

// ---------------------------------------------------------------- solve

struct SolveFlags {
    std::string file;
    std::optional<double> gamma;
    std::string algo = "pi";
    std::string trace;
};

template <class Real> std::string result_csv(const std::vector<Real>& value, const rpi::AgentPolicy* policy) {
    std::string out = policy ? "state,value,action\n" : "state,value\n";
    for (std::size_t s = 0; s < value.size(); ++s) {
        out += std::to_string(s) + "," + rpi::to_string(value[s]);
        if (policy) out += "," + std::to_string((*policy)[s]);
        out += "\n";
    }
    return out;
}

template <class Real> int solve_with(const CommonFlags& common, const SolveFlags& flags, const std::string& mode) {
    auto file = rpi::load_instance<Real>(flags.file);
    Real gamma;
    if (flags.gamma)
        gamma = rpi::from_double<Real>(*flags.gamma);
    else if (file.gamma)
        gamma = *file.gamma;
    else
        throw rpi::InputError(flags.file + ": no \"gamma\" field and no --gamma given");
    if (!(gamma > Real(0) && gamma < Real(1))) throw rpi::InputError("discount factor must lie in (0,1)");

    bool single_action = file.kind == rpi::InstanceKind::rmc;
    if (file.kind == rpi::InstanceKind::game) {
        report_validation(rpi::validate_game(file.game));
        file.rmdp = rpi::game_to_rmdp(file.game);
    }
    report_validation(rpi::validate_rmdp(file.rmdp));

    rpi::Tolerances<Real> tol;
    if constexpr (!rpi::ScalarTraits<Real>::exact) tol.fix = common.eps;

    rpi::Json doc = rpi::Json::object();
    doc["kind"] = rpi::kind_name(file.kind);
    doc["algo"] = flags.algo;
    doc["mode"] = mode;
    doc["gamma"] = rpi::detail::scalar_json(gamma);
    bool converged = false;
    std::string csv;

    if (flags.algo == "vi") {
        if (!flags.trace.empty()) std::cerr << "warning: --trace records policy iteration only\n";
        const Real vi_tol = rpi::from_double<Real>(common.eps);
        rpi::ValueIterationResult<Real> vi;
        if (single_action)
            vi = rpi::robust_value_iteration(file.rmc(), gamma, vi_tol, common.max_iter);
        else
            vi = rpi::robust_value_iteration(file.rmdp, gamma, vi_tol, common.max_iter);
        converged = vi.converged;
        doc["converged"] = converged;
        doc["iterations"] = vi.iterations;
        doc["value"] = rpi::detail::scalars_json(vi.value);
        if (!single_action) doc["policy"] = vi.policy.actions;
        csv = result_csv(vi.value, single_action ? nullptr : &vi.policy);
    } else if (single_action) {
        const auto rmc = file.rmc();
        const auto trace = rpi::rmc_policy_iteration(rmc, gamma, std::nullopt, common.max_iter, tol);
        converged = trace.converged;
        doc["converged"] = converged;
        doc["iterations"] = trace.iteration_count();
        doc["value"] = rpi::detail::scalars_json(trace.value);
        doc["env_policy"] = rpi::to_json(trace.policy);
        csv = result_csv<Real>(trace.value, nullptr);
        if (!flags.trace.empty()) write_output(flags.trace, rpi::dump(rpi::trace_json(trace)));
    } else {
        const auto trace = rpi::rmdp_policy_iteration(file.rmdp, gamma, std::nullopt, common.max_iter, tol);
        converged = trace.converged;
        doc["converged"] = converged;
        doc["iterations"] = trace.outer_iterations();
        doc["inner_iterations"] = trace.inner_iterations();
        doc["value"] = rpi::detail::scalars_json(trace.value);
        doc["policy"] = trace.policy.actions;
        doc["env_policy"] = rpi::to_json(trace.env_policy);
        csv = result_csv(trace.value, &trace.policy);
        if (!flags.trace.empty()) write_output(flags.trace, rpi::dump(rpi::trace_json(trace)));
    }
    write_output(common.out, common.format == "csv" ? csv : rpi::dump(doc));
    if (!converged) std::cerr << "warning: iteration limit reached before convergence\n";
    return converged ? kExitOk : kExitMaxIter;
}

int cmd_solve(const CommonFlags& common, const SolveFlags& flags) {
    if (common.mode == "rational") {
        if (flags.algo == "vi") {
            std::cerr << "warning: value iteration runs in float mode\n";
            return solve_with<double>(common, flags, "float");
        }
        const auto probe = rpi::load_instance<double>(flags.file);
        const std::size_t n = probe.kind == rpi::InstanceKind::game ? probe.game.n : probe.rmdp.n;
        if (n <= kRationalMaxStates) return solve_with<rpi::Rational>(common, flags, "rational");
        std::cerr << "warning: rational mode limited to " << kRationalMaxStates << " states; solving in float\n";
    }
    return solve_with<double>(common, flags, "float");
}

// ---------------------------------------------------------------- gen

struct GenFlags {
    std::string kind = "rmdp";
    std::size_t n = 5;
    std::size_t m = 1;
    double density = 3.0;
    std::string delta = "0:0.2";
    std::string cost = "0:1";
    double gamma = 0.9;
};

rpi::GeneratorSpec make_spec(const CommonFlags& common, std::size_t n, std::size_t m, double density,
                             const std::string& delta, const std::string& cost, double gamma) {
    rpi::GeneratorSpec spec;
    spec.seed = common.seed;
    spec.n = n;
    spec.m = m;
    spec.density = density;
    std::tie(spec.delta_lo, spec.delta_hi) = parse_range(delta, "--delta");
    std::tie(spec.cost_lo, spec.cost_hi) = parse_range(cost, "--cost");
    spec.gamma = gamma;
    spec.check();
    return spec;
}

int cmd_gen(const CommonFlags& common, const GenFlags& flags) {
    auto spec = make_spec(common, flags.n, flags.m, flags.density, flags.delta, flags.cost, flags.gamma);
    rpi::Json doc;
    if (flags.kind == "game") {
        doc = rpi::to_json(rpi::generate_game(spec.seed, spec.n, spec.cost_lo, spec.cost_hi),
                           std::optional<double>(spec.gamma));
    } else if (common.mode == "rational") {
        if (flags.kind == "rmc") spec.m = 1;
        const auto inst = rpi::generate_rmdp_exact(spec);
        const auto gamma = std::optional<rpi::Rational>(rpi::rational_from_double(spec.gamma));
        doc = flags.kind == "rmc" ? rpi::to_json(rpi::induce_rmc(inst, rpi::AgentPolicy{std::vector<std::size_t>(spec.n, 0)}), gamma)
                                  : rpi::to_json(inst, gamma);
    } else if (flags.kind == "rmc") {
        doc = rpi::to_json(rpi::generate_rmc(spec), std::optional<double>(spec.gamma));
    } else {
        doc = rpi::to_json(rpi::generate_rmdp(spec), std::optional<double>(spec.gamma));
    }
    write_output(common.out, rpi::dump(doc));
    return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
    std::size_t count = 10;
    std::size_t n = 5;
    std::size_t m = 2;
    std::string gammas = "0.9";
    double density = 3.0;
    std::string delta = "0:0.2";
    std::string cost = "0:1";
};

/// max_s f(s, sigma^0(s)): the potential of the starting policy.
double initial_potential(const rpi::RobustMdpInstance<double>& rmdp, const rpi::RmdpSolveTrace<double>& trace,
                         double gamma) {
    if (trace.iterations.empty()) return 0.0;
    const auto& sigma0 = trace.iterations.front().policy;
    double best = 0.0;
    for (std::size_t s = 0; s < rmdp.n; ++s) {
        const double f = rpi::potential_rmdp(rmdp, gamma, std::span<const double>(trace.value), trace.policy, s, sigma0[s]);
        if (s == 0 || f > best) best = f;
    }
    return best;
}

int cmd_bench(const CommonFlags& common, const BenchFlags& flags) {
    std::vector<double> gammas;
    for (const auto& g : split(flags.gammas, ',')) {
        try {
            gammas.push_back(std::stod(g));
        } catch (const std::exception&) {
            throw rpi::ParameterError("--gamma: not a number '" + g + "'");
        }
    }
    if (gammas.empty()) throw rpi::ParameterError("--gamma needs at least one value");

    std::string csv = "n,m,gamma,pi_outer_iters,pi_inner_iters_total,vi_iters,max_potential,theorem_ceiling,"
                      "lemma9_violations\n";
    for (std::size_t i = 0; i < flags.count; ++i) {
        for (double gamma : gammas) {
            CommonFlags per = common;
            per.seed = common.seed + i;
            const auto spec = make_spec(per, flags.n, flags.m, flags.density, flags.delta, flags.cost, gamma);
            const auto rmdp = rpi::generate_rmdp(spec);
            rpi::Tolerances<double> tol;
            tol.fix = common.eps;
            const auto trace = rpi::rmdp_policy_iteration(rmdp, gamma, std::nullopt, common.max_iter, tol);
            const auto vi = rpi::robust_value_iteration(rmdp, gamma, common.eps, common.max_iter);
            const auto dyn = rpi::check_trace_dynamics(rmdp, trace, gamma);
            csv += std::to_string(spec.n) + "," + std::to_string(spec.m) + "," + rpi::to_string(gamma) + "," +
                   std::to_string(trace.outer_iterations()) + "," + std::to_string(trace.inner_iterations()) + "," +
                   std::to_string(vi.iterations) + "," + rpi::to_string(initial_potential(rmdp, trace, gamma)) + "," +
                   rpi::to_string(dyn.iteration_ceiling) + "," + std::to_string(dyn.violations.size()) + "\n";
        }
    }
    write_output(common.out, csv);
    return kExitOk;
}

// ---------------------------------------------------------------- dyadic

struct DyadicFlags {
    std::string set;
    std::vector<std::size_t> random;
    std::string instance;
    long long coeff = 1;
};

std::string set_text(const std::vector<rpi::Rational>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + rpi::to_string(xs[i]);
    return out;
}

std::vector<rpi::Rational> canonical(std::vector<rpi::Rational> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

int cmd_dyadic(const CommonFlags& common, const DyadicFlags& flags) {
    struct Row {
        std::optional<std::size_t> state;
        std::optional<std::size_t> action;
        std::vector<rpi::Rational> x;
    };
    std::vector<Row> rows;
    const int sources = !flags.set.empty() + !flags.random.empty() + !flags.instance.empty();
    if (sources != 1) throw rpi::ParameterError("give exactly one of --set, --random, --instance");

    if (!flags.set.empty()) {
        std::vector<rpi::Rational> xs;
        for (const auto& item : split(flags.set, ',')) xs.push_back(rpi::parse_rational(item));
        rows.push_back({std::nullopt, std::nullopt, canonical(xs)});
    } else if (!flags.random.empty()) {
        if (flags.random.size() != 3) throw rpi::ParameterError("--random takes: count size max-denom");
        rpi::Rng rng(common.seed);
        for (std::size_t i = 0; i < flags.random[0]; ++i)
            rows.push_back({std::nullopt, std::nullopt,
                            canonical(rpi::random_rational_set(rng, flags.random[1],
                                                               static_cast<long long>(flags.random[2])))});
    } else {
        const auto file = rpi::load_instance<rpi::Rational>(flags.instance);
        if (file.kind == rpi::InstanceKind::game) throw rpi::InputError("--instance needs an rmc or rmdp file");
        for (std::size_t s = 0; s < file.rmdp.n; ++s)
            for (std::size_t a = 0; a < file.rmdp.actions[s].size(); ++a)
                rows.push_back({s, a, rpi::discrepancy_set(file.rmdp.actions[s][a])});
    }

    rpi::Json table = rpi::Json::array();
    std::string csv = flags.instance.empty() ? "X,C,degree,theorem4_bound,holds\n"
                                             : "state,action,X,C,degree,theorem4_bound,holds\n";
    for (const auto& row : rows) {
        const auto check = rpi::check_dyadic_bound(std::span<const rpi::Rational>(row.x), flags.coeff);
        rpi::Json j = rpi::Json::object();
        if (row.state) {
            j["state"] = *row.state;
            j["action"] = *row.action;
            csv += std::to_string(*row.state) + "," + std::to_string(*row.action) + ",";
        }
        j["X"] = rpi::detail::scalars_json(row.x);
        j["C"] = flags.coeff;
        j["degree"] = check.degree;
        j["theorem4_bound"] = check.bound;
        j["holds"] = check.holds;
        table.push_back(std::move(j));
        csv += "\"" + set_text(row.x) + "\"," + std::to_string(flags.coeff) + "," + std::to_string(check.degree) +
               "," + std::to_string(check.bound) + "," + (check.holds ? "true" : "false") + "\n";
    }
    write_output(common.out, common.format == "csv" ? csv : rpi::dump(table));
    return kExitOk;
}

// ---------------------------------------------------------------- convert-game

template <class Real> int convert_with(const CommonFlags& common, const std::string& path) {
    const auto file = rpi::load_instance<Real>(path);
    if (file.kind != rpi::InstanceKind::game) throw rpi::InputError(path + ": expected kind \"game\"");
    report_validation(rpi::validate_game(file.game));
    write_output(common.out, rpi::dump(rpi::to_json(rpi::game_to_rmdp(file.game), file.gamma)));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust policy iteration for L-infinity robust MDPs"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonFlags common;
    app.add_option("--mode", common.mode, "Scalar mode")->check(CLI::IsMember({"float", "rational"}));
    app.add_option("--eps", common.eps, "Convergence tolerance");
    app.add_option("--max-iter", common.max_iter, "Iteration limit");
    app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", common.seed, "Random seed");
    app.add_option("--out", common.out, "Output file (default stdout)");

    SolveFlags solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve an rmc, rmdp or game instance");
    solve_cmd->add_option("file", solve.file, "Instance JSON")->required();
    solve_cmd->add_option("--gamma", solve.gamma, "Discount factor (overrides the file)");
    solve_cmd->add_option("--algo", solve.algo, "pi or vi")->check(CLI::IsMember({"pi", "vi"}));
    solve_cmd->add_option("--trace", solve.trace, "Write the full iteration trace here");

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance");
    gen_cmd->add_option("--kind", gen.kind, "rmdp, rmc or game")->check(CLI::IsMember({"rmdp", "rmc", "game"}));
    gen_cmd->add_option("--n", gen.n, "States");
    gen_cmd->add_option("--m", gen.m, "Actions per state");
    gen_cmd->add_option("--density", gen.density, "Mean support size");
    gen_cmd->add_option("--delta", gen.delta, "Radius range lo:hi");
    gen_cmd->add_option("--cost", gen.cost, "Cost range lo:hi");
    gen_cmd->add_option("--gamma", gen.gamma, "Discount factor");

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "Solve random RMDPs and tabulate iteration counts");
    bench_cmd->add_option("--count", bench.count, "Instances per discount factor");
    bench_cmd->add_option("--n", bench.n, "States");
    bench_cmd->add_option("--m", bench.m, "Actions per state");
    bench_cmd->add_option("--gamma", bench.gammas, "Comma-separated discount factors");
    bench_cmd->add_option("--density", bench.density, "Mean support size");
    bench_cmd->add_option("--delta", bench.delta, "Radius range lo:hi");
    bench_cmd->add_option("--cost", bench.cost, "Cost range lo:hi");

    DyadicFlags dyadic;
    auto* dyadic_cmd = app.add_subcommand("dyadic", "Check dyadic degrees of signed subset sums");
    dyadic_cmd->add_option("--set", dyadic.set, "Comma-separated rationals");
    dyadic_cmd->add_option("--random", dyadic.random, "count size max-denom")->expected(3);
    dyadic_cmd->add_option("--instance", dyadic.instance, "Per-state discrepancy sets of an exact instance");
    dyadic_cmd->add_option("--coeff", dyadic.coeff, "Coefficient bound C");

    std::string game_file;
    auto* convert_cmd = app.add_subcommand("convert-game", "Reduce a turn-based stochastic game to an RMDP");
    convert_cmd->add_option("file", game_file, "Game JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*solve_cmd) return cmd_solve(common, solve);
        if (*gen_cmd) return cmd_gen(common, gen);
        if (*bench_cmd) return cmd_bench(common, bench);
        if (*dyadic_cmd) return cmd_dyadic(common, dyadic);
        if (*convert_cmd) {
            if (common.mode == "rational") return convert_with<rpi::Rational>(common, game_file);
            return convert_with<double>(common, game_file);
        }
    } catch (const rpi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
