#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lbpcert/bp.hpp"
#include "lbpcert/certificate.hpp"
#include "lbpcert/certify_binary.hpp"
#include "lbpcert/certify_general.hpp"
#include "lbpcert/factor_graph.hpp"
#include "lbpcert/rival_bounds.hpp"

namespace lbpcert {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` derived from `master`; each stream is reproducible on its own.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Rethrows the first exception.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, count); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Model ensembles
// ---------------------------------------------------------------------------

inline BinaryPairwiseModel gen_uniform_model(std::size_t n, double J, double theta) {
    std::vector<Coupling> cs;
    for (VarId i = 0; i < n; ++i)
        for (VarId j = i + 1; j < n; ++j) cs.push_back({i, j, J});
    return BinaryPairwiseModel(n, std::move(cs), std::vector<double>(n, theta));
}

/// Nearest-neighbour pairs of a w x h torus, site (x, y) = y * w + x. Each
/// distinct pair appears once, so 2-wide tori do not get doubled couplings.
inline std::vector<std::pair<VarId, VarId>> torus_pairs(std::size_t w, std::size_t h) {
    if (w < 2 || h < 2) throw std::invalid_argument("torus dimensions must be at least 2");
    std::vector<std::pair<VarId, VarId>> pairs;
    auto add = [&](VarId a, VarId b) {
        auto p = std::minmax(a, b);
        if (std::find(pairs.begin(), pairs.end(), std::pair<VarId, VarId>(p.first, p.second)) == pairs.end())
            pairs.emplace_back(p.first, p.second);
    };
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const VarId s = y * w + x;
            add(s, y * w + (x + 1) % w);
            add(s, ((y + 1) % h) * w + x);
        }
    return pairs;
}

inline BinaryPairwiseModel gen_toroidal_grid(std::size_t w, std::size_t h, double J0, double sigma_J,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Coupling> cs;
    for (auto [a, b] : torus_pairs(w, h)) cs.push_back({a, b, J0 + std::abs(sigma_J) * z(rng)});
    return BinaryPairwiseModel(w * h, std::move(cs), {});
}

struct RandomModelParams {
    double J0 = 0.0, sigma_J = 0.0, theta0 = 0.0, sigma_theta = 0.0;
};

struct RandomModel {
    RandomModelParams params;
    BinaryPairwiseModel model;
};

/// Two-level draw: hyperparameters from N(0,1), then fields and couplings
/// (fully connected) with the absolute values of the drawn spreads.
inline RandomModel gen_fully_random_detailed(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    RandomModelParams p;
    p.J0 = z(rng);
    p.sigma_J = z(rng);
    p.theta0 = z(rng);
    p.sigma_theta = z(rng);
    std::vector<double> theta(n);
    for (double& t : theta) t = p.theta0 + std::abs(p.sigma_theta) * z(rng);
    std::vector<Coupling> cs;
    for (VarId i = 0; i < n; ++i)
        for (VarId j = i + 1; j < n; ++j) cs.push_back({i, j, p.J0 + std::abs(p.sigma_J) * z(rng)});
    return {p, BinaryPairwiseModel(n, std::move(cs), std::move(theta))};
}

inline BinaryPairwiseModel gen_fully_random(std::size_t n, std::uint64_t seed) {
    return gen_fully_random_detailed(n, seed).model;
}

// ---------------------------------------------------------------------------
// Empirical convergence and bound dispatch
// ---------------------------------------------------------------------------

struct EmpiricalOptions {
    std::size_t inits = 10;
    std::uint64_t seed = 0;
    RunOptions run;
    /// Beliefs from different starts must agree within this.
    double agreement = 1e-6;
};

struct EmpiricalVerdict {
    bool converged = false;
    std::size_t runs_converged = 0;
    double max_disagreement = 0.0;
};

/// Runs binary LBP from `inits` random starts; stops at the first start that fails.
inline EmpiricalVerdict empirical_convergence(const BinaryPairwiseModel& model, const EmpiricalOptions& opts = {}) {
    EmpiricalVerdict v;
    std::vector<double> first;
    for (std::size_t k = 0; k < opts.inits; ++k) {
        const auto start = init_binary_messages(model, Init::random(derive_seed(opts.seed, k)));
        const auto res = run_binary(model, start, opts.run);
        if (!res.converged) return v;
        ++v.runs_converged;
        if (k == 0) {
            first = res.beliefs;
            continue;
        }
        for (std::size_t i = 0; i < first.size(); ++i)
            v.max_disagreement = std::max(v.max_disagreement, std::abs(first[i] - res.beliefs[i]));
        if (v.max_disagreement > opts.agreement) return v;
    }
    v.converged = true;
    return v;
}

/// General-graph variant; compares single-variable beliefs.
inline EmpiricalVerdict empirical_convergence(const FactorGraph& fg, const EmpiricalOptions& opts = {}) {
    EmpiricalVerdict v;
    std::vector<std::vector<double>> first;
    for (std::size_t k = 0; k < opts.inits; ++k) {
        RunOptions ro = opts.run;
        ro.init = Init::random(derive_seed(opts.seed, k));
        const auto res = run(fg, ro);
        if (!res.converged) return v;
        ++v.runs_converged;
        if (k == 0) {
            first = res.single_beliefs;
            continue;
        }
        for (std::size_t i = 0; i < first.size(); ++i)
            for (std::size_t a = 0; a < first[i].size(); ++a)
                v.max_disagreement = std::max(v.max_disagreement, std::abs(first[i][a] - res.single_beliefs[i][a]));
        if (v.max_disagreement > opts.agreement) return v;
    }
    v.converged = true;
    return v;
}

inline const std::vector<std::string>& known_bounds() {
    static const std::vector<std::string> names{"linfty", "l1",     "spectral", "improved",
                                                "dobrushin", "simon", "heskes",  "empirical"};
    return names;
}

struct BoundSettings {
    int m = 1;
    double tol = 1e-9;
    EmpiricalOptions empirical;
};

inline Certificate evaluate_bound(const std::string& name, const BinaryPairwiseModel& model,
                                  const BoundSettings& s = {}) {
    if (name == "linfty") return linfty_condition(model);
    if (name == "l1") return l1_condition_binary(model);
    if (name == "spectral") return certify_spectral_binary(model, s.tol);
    if (name == "improved") return certify_improved(model, s.m, s.tol);
    if (name == "dobrushin") return dobrushin_condition(model);
    if (name == "simon") return simon_condition(model);
    if (name == "heskes") return heskes_condition(model);
    if (name == "empirical") {
        const auto v = empirical_convergence(model, s.empirical);
        Certificate c;
        c.name = "empirical";
        c.holds = v.converged;
        c.value = static_cast<double>(v.runs_converged);
        c.rate = std::numeric_limits<double>::quiet_NaN();
        return c;
    }
    throw std::invalid_argument("unknown bound '" + name + "'");
}

// ---------------------------------------------------------------------------
// Critical radius along a ray
// ---------------------------------------------------------------------------

class NonMonotoneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CriticalRadius {
    double r = 0.0;
    /// True when the bound still held at r_max.
    bool saturated = false;
};

/// Largest r in [0, r_max] at which holds_at(r) is true, assuming a holds-then-fails
/// pattern. A 32-point scan checks that pattern first; bisection then narrows the
/// crossing to width tol and returns the bracket midpoint.
inline CriticalRadius critical_radius(const std::function<bool(double)>& holds_at, double r_max, double tol,
                                      std::size_t scan_points = 32) {
    if (!(r_max > 0.0) || !(tol > 0.0)) throw std::invalid_argument("critical_radius: r_max and tol must be positive");
    double lo = 0.0, hi = r_max;
    bool seen_fail = false, found = false;
    for (std::size_t k = 1; k <= scan_points; ++k) {
        const double r = r_max * static_cast<double>(k) / static_cast<double>(scan_points);
        const bool h = holds_at(r);
        if (h && seen_fail)
            throw NonMonotoneError("critical_radius: verdict holds again at r=" + std::to_string(r) +
                                   " after failing at r=" + std::to_string(hi));
        if (!h && !seen_fail) {
            seen_fail = true;
            hi = r;
            found = true;
        }
        if (h) lo = r;
    }
    if (!found) return {r_max, true};
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (holds_at(mid) ? lo : hi) = mid;
    }
    return {0.5 * (lo + hi), false};
}

// ---------------------------------------------------------------------------
// Plane sweep
// ---------------------------------------------------------------------------

struct PlaneRow {
    double J = 0.0, theta = 0.0;
    std::string bound;
    bool holds = false;
    double value = 0.0;
};

inline std::vector<PlaneRow> sweep_plane(std::size_t n, const std::vector<double>& J_grid,
                                         const std::vector<double>& theta_grid, const std::vector<std::string>& bounds,
                                         const BoundSettings& s = {}, unsigned threads = 1) {
    const std::size_t cells = J_grid.size() * theta_grid.size();
    std::vector<std::vector<PlaneRow>> out(cells);
    parallel_for(cells, threads, [&](std::size_t c) {
        const double J = J_grid[c / theta_grid.size()], theta = theta_grid[c % theta_grid.size()];
        const auto model = gen_uniform_model(n, J, theta);
        for (const auto& b : bounds) {
            const auto cert = evaluate_bound(b, model, s);
            out[c].push_back({J, theta, b, cert.holds, cert.value});
        }
    });
    std::vector<PlaneRow> rows;
    for (auto& cell : out) rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

// ---------------------------------------------------------------------------
// Win table
// ---------------------------------------------------------------------------

struct TrialRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    RandomModelParams params;
    std::vector<bool> holds;        // per requested bound
    std::vector<double> values;     // per requested bound
    std::vector<double> seconds;    // per requested bound
};

struct WinTable {
    std::vector<std::string> bounds;
    /// counts[a][b]: trials where a holds and b fails; diagonal counts trials where a holds.
    std::vector<std::vector<std::size_t>> counts;
    std::vector<TrialRecord> trials;
};

inline WinTable win_table(std::size_t trials, std::size_t n, std::uint64_t master_seed,
                          const std::vector<std::string>& bounds, const BoundSettings& s = {}, unsigned threads = 1) {
    WinTable t;
    t.bounds = bounds;
    t.trials.resize(trials);
    parallel_for(trials, threads, [&](std::size_t k) {
        TrialRecord& rec = t.trials[k];
        rec.index = k;
        rec.seed = derive_seed(master_seed, k);
        auto drawn = gen_fully_random_detailed(n, rec.seed);
        rec.params = drawn.params;
        BoundSettings local = s;
        local.empirical.seed = derive_seed(rec.seed, 0xE11);
        for (const auto& b : bounds) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto cert = evaluate_bound(b, drawn.model, local);
            rec.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            rec.holds.push_back(cert.holds);
            rec.values.push_back(cert.value);
        }
    });
    t.counts.assign(bounds.size(), std::vector<std::size_t>(bounds.size(), 0));
    for (const auto& rec : t.trials)
        for (std::size_t a = 0; a < bounds.size(); ++a) {
            if (!rec.holds[a]) continue;
            for (std::size_t b = 0; b < bounds.size(); ++b)
                if (a == b || !rec.holds[b]) ++t.counts[a][b];
        }
    return t;
}

// ---------------------------------------------------------------------------
// Polar critical radii on the torus
// ---------------------------------------------------------------------------

/// Standard-normal coupling offsets for one torus instance; couplings along
/// angle phi at radius r are r (cos phi + sin phi z_e).
struct TorusInstance {
    std::size_t w = 0, h = 0;
    std::vector<std::pair<VarId, VarId>> pairs;
    std::vector<double> z;

    BinaryPairwiseModel at(double r, double phi) const {
        std::vector<Coupling> cs;
        for (std::size_t e = 0; e < pairs.size(); ++e)
            cs.push_back({pairs[e].first, pairs[e].second, r * (std::cos(phi) + std::sin(phi) * z[e])});
        return BinaryPairwiseModel(w * h, std::move(cs), {});
    }
};

inline TorusInstance make_torus_instance(std::size_t w, std::size_t h, std::uint64_t seed) {
    TorusInstance t{w, h, torus_pairs(w, h), {}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t e = 0; e < t.pairs.size(); ++e) t.z.push_back(z(rng));
    return t;
}

inline CriticalRadius critical_radius(const std::string& bound, double phi, double tol, const TorusInstance& inst,
                                      double r_max, const BoundSettings& s = {}) {
    return critical_radius([&](double r) { return evaluate_bound(bound, inst.at(r, phi), s).holds; }, r_max, tol);
}

struct PolarOptions {
    std::size_t width = 6, height = 6;
    std::size_t instances = 10;
    std::size_t angles = 8;
    double r_max = 1.2;
    double tol = 1e-4;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    BoundSettings settings;
};

struct PolarRow {
    double phi = 0.0;
    std::string bound;
    double r_mean = 0.0, r_std = 0.0;
    std::vector<double> radii;
    std::size_t saturated = 0;
};

/// Angles sit at the midpoints (k + 1/2) pi / angles of [0, pi].
inline std::vector<PolarRow> polar_experiment(const std::vector<std::string>& bounds, const PolarOptions& o) {
    std::vector<TorusInstance> inst;
    for (std::size_t k = 0; k < o.instances; ++k) inst.push_back(make_torus_instance(o.width, o.height, derive_seed(o.seed, k)));
    const std::size_t jobs = o.angles * bounds.size() * o.instances;
    std::vector<CriticalRadius> radius(jobs);
    parallel_for(jobs, o.threads, [&](std::size_t job) {
        const std::size_t k = job % o.instances, b = (job / o.instances) % bounds.size(), a = job / (o.instances * bounds.size());
        const double phi = (static_cast<double>(a) + 0.5) * std::numbers::pi / static_cast<double>(o.angles);
        BoundSettings s = o.settings;
        s.empirical.seed = derive_seed(o.seed ^ 0x5EED, k);
        radius[job] = critical_radius(bounds[b], phi, o.tol, inst[k], o.r_max, s);
    });
    std::vector<PolarRow> rows;
    for (std::size_t a = 0; a < o.angles; ++a)
        for (std::size_t b = 0; b < bounds.size(); ++b) {
            PolarRow row;
            row.phi = (static_cast<double>(a) + 0.5) * std::numbers::pi / static_cast<double>(o.angles);
            row.bound = bounds[b];
            for (std::size_t k = 0; k < o.instances; ++k) {
                const auto& cr = radius[(a * bounds.size() + b) * o.instances + k];
                row.radii.push_back(cr.r);
                row.saturated += cr.saturated ? 1 : 0;
                row.r_mean += cr.r;
            }
            row.r_mean /= static_cast<double>(o.instances);
            double var = 0.0;
            for (double r : row.radii) var += (r - row.r_mean) * (r - row.r_mean);
            row.r_std = o.instances > 1 ? std::sqrt(var / static_cast<double>(o.instances - 1)) : 0.0;
            rows.push_back(std::move(row));
        }
    return rows;
}

}  // namespace lbpcert
