// Command-line front end: inference, certification, strength reports, experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lbpcert/lbpcert.hpp"

using namespace lbpcert;

namespace {

constexpr int kExitError = 2;

const std::vector<std::string> kCertifyBounds{"linfty", "l1",    "spectral", "improved",
                                              "dobrushin", "simon", "heskes", "empirical"};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void check_bounds(const std::vector<std::string>& bounds, const std::vector<std::string>& allowed) {
    if (bounds.empty()) throw std::invalid_argument("no bounds requested");
    for (const auto& b : bounds)
        if (std::find(allowed.begin(), allowed.end(), b) == allowed.end())
            throw std::invalid_argument("unknown bound '" + b + "'");
}

/// Writes to a sibling temp file, then renames it over the target.
void write_atomic(const std::string& path, const std::string& text) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << text;
        out.close();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target);
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text << std::flush;
    else
        write_atomic(path, text);
}

std::string experiment_header(std::uint64_t seed) {
    return "# master_seed=" + std::to_string(seed) + ",version=" + kVersion + "\n";
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("grid needs at least one step");
    std::vector<double> out;
    for (std::size_t k = 0; k < steps; ++k)
        out.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
    return out;
}

struct CertifyArgs {
    std::string model;
    std::string bounds = "l1,spectral";
    int m = 1;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::string out;
};

Certificate certify_one(const std::string& name, const FactorGraph& fg, const std::optional<BinaryPairwiseModel>& bin,
                        const CertifyArgs& a) {
    auto need_binary = [&]() -> const BinaryPairwiseModel& {
        if (!bin) throw ModelError(name + " needs a binary pairwise model with positive tables");
        return *bin;
    };
    if (name == "linfty") return linfty_condition(need_binary());
    if (name == "l1") return l1_condition_general(fg);
    if (name == "spectral") return certify_spectral_general(fg, a.tol);
    if (name == "improved") return certify_improved(need_binary(), a.m, a.tol);
    if (name == "dobrushin") return dobrushin_condition(fg);
    if (name == "simon") return simon_condition(fg);
    if (name == "heskes") return heskes_condition(fg);
    EmpiricalOptions eo;
    eo.seed = a.seed;
    const auto v = empirical_convergence(fg, eo);
    Certificate c;
    c.name = "empirical";
    c.holds = v.converged;
    c.value = static_cast<double>(v.runs_converged);
    return c;
}

Certificate skipped(const std::string& name) {
    Certificate c;
    c.name = name;
    c.value = std::numeric_limits<double>::quiet_NaN();
    return c;
}

int cmd_certify(const CertifyArgs& a) {
    const auto bounds = split_list(a.bounds);
    check_bounds(bounds, kCertifyBounds);
    const FactorGraph fg = load_model(a.model);
    std::optional<BinaryPairwiseModel> bin;
    try {
        bin = to_binary_pairwise(fg);
    } catch (const std::exception&) {
    }
    std::vector<Certificate> certs;
    bool any = false;
    for (const auto& b : bounds) {
        Certificate c;
        try {
            c = certify_one(b, fg, bin, a);
        } catch (const HypothesisError& e) {
            std::cerr << "warning: " << b << " does not apply: " << e.what() << "\n";
            c = skipped(b);
        } catch (const ModelError& e) {
            std::cerr << "warning: " << b << " does not apply: " << e.what() << "\n";
            c = skipped(b);
        } catch (const EnumerationCapError& e) {
            std::cerr << "warning: " << b << " skipped: " << e.what() << "\n";
            c = skipped(b);
        }
        if (b == "improved") c.m = a.m;
        for (const auto& d : c.detail) std::cerr << "note: " << b << ": " << d << "\n";
        any = any || c.holds;
        certs.push_back(std::move(c));
    }
    std::ostringstream out;
    write_certificates_csv(out, certs);
    emit(a.out, out.str());
    return any ? 0 : 1;
}

struct InferArgs {
    std::string model;
    std::size_t max_iters = 10000;
    double tol = 1e-9;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_infer(const InferArgs& a) {
    const FactorGraph fg = load_model(a.model);
    RunOptions ro;
    ro.max_iters = a.max_iters;
    ro.tol = a.tol;
    if (a.seed) ro.init = Init::random(*a.seed);
    const auto res = run(fg, ro);
    emit(a.out, to_json(res).dump(2) + "\n");
    return res.converged ? 0 : 1;
}

int cmd_strength(const std::string& model, const std::string& path) {
    const FactorGraph fg = load_model(model);
    std::ostringstream out;
    out << "factor_id,i,j,N,D,simon,sigma\n";
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        const double sigma = heskes_sigma(fg, f).sigma;
        // D and Simon's measure are defined for pair tables only
        std::string d, s;
        if (fac.arity() == 2) {
            const double simon = simon_strength(fac.table);
            s = format_double(simon);
            d = format_double(std::tanh(simon));
        }
        for (VarId i : fac.scope)
            for (VarId j : fac.scope) {
                if (i == j) continue;
                out << f << "," << i << "," << j << "," << format_double(potential_strength(fg, f, i, j)) << "," << d
                    << "," << s << "," << format_double(sigma) << "\n";
            }
    }
    emit(path, out.str());
    return 0;
}

int cmd_absorb(const std::string& model, const std::string& path) {
    emit(path, format_uai(absorb_zero_singletons(load_model(model))));
    return 0;
}

struct ExperimentArgs {
    std::string bounds;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    int m = 1;
    double tol = 1e-9;
    std::string out;
};

BoundSettings settings_of(const ExperimentArgs& e) {
    BoundSettings s;
    s.m = e.m;
    s.tol = e.tol;
    s.empirical.seed = e.seed;
    return s;
}

struct PlaneArgs {
    std::size_t n = 4;
    double J_min = 0.0, J_max = 1.0, theta_min = 0.0, theta_max = 2.0;
    std::size_t J_steps = 21, theta_steps = 21;
};

int cmd_plane(const ExperimentArgs& e, const PlaneArgs& p) {
    const auto bounds = split_list(e.bounds);
    check_bounds(bounds, known_bounds());
    const auto rows = sweep_plane(p.n, linspace(p.J_min, p.J_max, p.J_steps),
                                  linspace(p.theta_min, p.theta_max, p.theta_steps), bounds, settings_of(e), e.threads);
    std::ostringstream out;
    out << experiment_header(e.seed) << "J,theta,bound,holds,value\n";
    for (const auto& r : rows)
        out << format_double(r.J) << "," << format_double(r.theta) << "," << r.bound << ","
            << (r.holds ? "true" : "false") << "," << format_double(r.value) << "\n";
    emit(e.out, out.str());
    return 0;
}

int cmd_polar(const ExperimentArgs& e, PolarOptions o) {
    const auto bounds = split_list(e.bounds);
    check_bounds(bounds, known_bounds());
    o.seed = e.seed;
    o.threads = e.threads;
    o.settings = settings_of(e);
    const auto rows = polar_experiment(bounds, o);
    std::ostringstream out;
    out << experiment_header(e.seed) << "phi,bound,r_mean,r_std\n";
    for (const auto& r : rows) {
        if (r.saturated > 0)
            std::cerr << "warning: " << r.bound << " still holds at r_max for " << r.saturated
                      << " instances at phi=" << format_double(r.phi) << "\n";
        out << format_double(r.phi) << "," << r.bound << "," << format_double(r.r_mean) << ","
            << format_double(r.r_std) << "\n";
    }
    emit(e.out, out.str());
    return 0;
}

int cmd_wins(const ExperimentArgs& e, std::size_t trials, std::size_t n) {
    const auto bounds = split_list(e.bounds);
    check_bounds(bounds, known_bounds());
    const auto t = win_table(trials, n, e.seed, bounds, settings_of(e), e.threads);
    std::ostringstream out;
    out << experiment_header(e.seed) << "bound_a,bound_b,count\n";
    for (std::size_t a = 0; a < bounds.size(); ++a)
        for (std::size_t b = 0; b < bounds.size(); ++b)
            out << bounds[a] << "," << bounds[b] << "," << t.counts[a][b] << "\n";
    emit(e.out, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loopy belief propagation with convergence certificates"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CertifyArgs ca;
    auto* certify = app.add_subcommand("certify", "Evaluate convergence conditions (exit 0 if any holds, 1 if none)");
    certify->add_option("--model", ca.model, "UAI model file")->required();
    certify->add_option("--bounds", ca.bounds, "Comma list of " + CLI::detail::join(kCertifyBounds, ","))
        ->capture_default_str();
    certify->add_option("--m", ca.m, "Interval recursion depth for the improved bound")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    certify->add_option("--tol", ca.tol, "Spectral radius tolerance")->capture_default_str();
    certify->add_option("--seed", ca.seed, "Seed for empirical starts")->capture_default_str();
    certify->add_option("--out", ca.out, "Output CSV path (stdout if omitted)");

    InferArgs ia;
    auto* infer = app.add_subcommand("infer", "Run LBP and print the result as JSON (exit 0 if converged)");
    infer->add_option("--model", ia.model, "UAI model file")->required();
    infer->add_option("--max-iters", ia.max_iters, "Iteration cap")->capture_default_str();
    infer->add_option("--tol", ia.tol, "Residual tolerance")->capture_default_str();
    infer->add_option("--seed", ia.seed, "Random initial messages from this seed (uniform if omitted)");
    infer->add_option("--out", ia.out, "Output JSON path (stdout if omitted)");

    std::string strength_model, strength_out;
    auto* strength = app.add_subcommand("strength", "Per-factor strengths as CSV");
    strength->add_option("--model", strength_model, "UAI model file")->required();
    strength->add_option("--out", strength_out, "Output CSV path (stdout if omitted)");

    std::string absorb_model, absorb_out;
    auto* absorb = app.add_subcommand("absorb", "Drop states ruled out by zero single-variable entries");
    absorb->add_option("--model", absorb_model, "UAI model file")->required();
    absorb->add_option("--out", absorb_out, "Output UAI path (stdout if omitted)");

    auto* experiment = app.add_subcommand("experiment", "Run an experiment and write CSV");
    experiment->require_subcommand(1);
    ExperimentArgs plane_e, polar_e, wins_e;
    plane_e.bounds = "l1,spectral,improved";
    polar_e.bounds = "l1,spectral,empirical";
    wins_e.bounds = "dobrushin,spectral,heskes,improved";
    auto add_common = [](CLI::App* sub, ExperimentArgs& e) {
        sub->add_option("--bounds", e.bounds, "Comma list of " + CLI::detail::join(known_bounds(), ","))
            ->capture_default_str();
        sub->add_option("--seed", e.seed, "Master seed")->capture_default_str();
        sub->add_option("--threads", e.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--m", e.m, "Interval recursion depth for the improved bound")->capture_default_str();
        sub->add_option("--tol", e.tol, "Spectral radius tolerance")->capture_default_str();
        sub->add_option("--out", e.out, "Output CSV path")->required();
    };

    PlaneArgs pa;
    auto* plane = experiment->add_subcommand("plane", "Uniform fully connected model over a (J, theta) grid");
    add_common(plane, plane_e);
    plane->add_option("--n", pa.n, "Number of variables")->capture_default_str();
    plane->add_option("--J-min", pa.J_min)->capture_default_str();
    plane->add_option("--J-max", pa.J_max)->capture_default_str();
    plane->add_option("--J-steps", pa.J_steps)->capture_default_str();
    plane->add_option("--theta-min", pa.theta_min)->capture_default_str();
    plane->add_option("--theta-max", pa.theta_max)->capture_default_str();
    plane->add_option("--theta-steps", pa.theta_steps)->capture_default_str();

    PolarOptions po;
    auto* polar = experiment->add_subcommand("polar", "Critical radii along angles on a random torus");
    add_common(polar, polar_e);
    polar->add_option("--width", po.width)->capture_default_str();
    polar->add_option("--height", po.height)->capture_default_str();
    polar->add_option("--instances", po.instances)->capture_default_str();
    polar->add_option("--angles", po.angles)->capture_default_str();
    polar->add_option("--r-max", po.r_max, "Largest radius searched")->capture_default_str();
    polar->add_option("--radius-tol", po.tol, "Bisection width for critical radii")->capture_default_str();

    std::size_t trials = 50000, wins_n = 4;
    auto* wins = experiment->add_subcommand("wins", "Pairwise win counts over random fully connected models");
    add_common(wins, wins_e);
    wins->add_option("--trials", trials)->capture_default_str();
    wins->add_option("--n", wins_n, "Number of variables")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*certify) return cmd_certify(ca);
        if (*infer) return cmd_infer(ia);
        if (*strength) return cmd_strength(strength_model, strength_out);
        if (*absorb) return cmd_absorb(absorb_model, absorb_out);
        if (*plane) return cmd_plane(plane_e, pa);
        if (*polar) return cmd_polar(polar_e, po);
        if (*wins) return cmd_wins(wins_e, trials, wins_n);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
