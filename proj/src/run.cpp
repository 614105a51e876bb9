#include "lke/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <new>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lke/ed.hpp"
#include "lke/kinetics.hpp"
#include "lke/observables.hpp"
#include "lke/series.hpp"
#include "lke/states.hpp"

namespace lke {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "mode",       "N",           "h",          "Jx",
        "Jz",         "alpha",       "truncation", "state",
        "particle_hole", "t_max",    "dt",         "sample_every",
        "halving_check", "quadratic_only", "observables", "czz_m",
        "beta_grid",  "benchmark_truncations", "output", "metadata",
        "workers"};
    return keys;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& item : j.items())
        if (!known_keys().count(item.key()))
            throw std::invalid_argument("config: unknown key '" + item.key() + "'");
    RunConfig c;
    try {
        c.mode = j.value("mode", c.mode);
        c.model.N = j.value("N", c.model.N);
        c.model.h = j.value("h", c.model.h);
        c.model.Jx = j.value("Jx", c.model.Jx);
        c.model.Jz = j.value("Jz", c.model.Jz);
        c.model.alpha = j.value("alpha", c.model.alpha);
        c.truncation = j.value("truncation", c.truncation);
        c.state = j.value("state", c.state);
        c.particle_hole = j.value("particle_hole", c.particle_hole);
        c.traj.t_max = j.value("t_max", c.traj.t_max);
        c.traj.dt = j.value("dt", c.traj.dt);
        c.traj.sample_every = j.value("sample_every", c.traj.sample_every);
        c.traj.halving_check = j.value("halving_check", c.traj.halving_check);
        c.quadratic_only = j.value("quadratic_only", c.quadratic_only);
        c.observables = j.value("observables", c.observables);
        c.czz_m = j.value("czz_m", c.czz_m);
        c.beta_grid = j.value("beta_grid", c.beta_grid);
        c.benchmark_truncations = j.value("benchmark_truncations", c.benchmark_truncations);
        c.output = j.value("output", c.output);
        c.metadata = j.value("metadata", c.metadata);
        c.workers = j.value("workers", c.workers);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["mode"] = c.mode;
    j["N"] = c.model.N;
    j["h"] = c.model.h;
    j["Jx"] = c.model.Jx;
    j["Jz"] = c.model.Jz;
    j["alpha"] = c.model.alpha;
    j["truncation"] = c.truncation;
    j["state"] = c.state;
    j["particle_hole"] = c.particle_hole;
    j["t_max"] = c.traj.t_max;
    j["dt"] = c.traj.dt;
    j["sample_every"] = c.traj.sample_every;
    j["halving_check"] = c.traj.halving_check;
    j["quadratic_only"] = c.quadratic_only;
    j["observables"] = c.observables;
    j["czz_m"] = c.czz_m;
    j["beta_grid"] = c.beta_grid;
    j["benchmark_truncations"] = c.benchmark_truncations;
    j["output"] = c.output;
    j["metadata"] = c.metadata;
    j["workers"] = c.workers;
    return j.dump(2);
}

namespace {

// ---------------------------------------------------------------------------
// State descriptors

struct StateSpec {
    enum class Kind { Polarized, Vacuum, Superposition };
    Kind kind = Kind::Polarized;
    Flavor flavor = Flavor::Down;
    int n = 1;
    cd y1{1.0, 0.0};
    cd y2{0.0, 0.0};
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

int parse_int(const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("state: bad integer '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("state: bad integer '" + s + "'");
    return v;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("state: bad number '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("state: bad number '" + s + "'");
    return v;
}

StateSpec parse_state(const std::string& s) {
    StateSpec sp;
    if (s == "vacuum") {
        sp.kind = StateSpec::Kind::Vacuum;
        sp.n = 0;
        return sp;
    }
    auto parts = split(s, ':');
    if (parts[0] == "psi" || parts[0] == "chi") {
        if (parts.size() != 2)
            throw std::invalid_argument("state: expected psi:<n> or chi:<n>, got '" + s + "'");
        sp.kind = StateSpec::Kind::Polarized;
        sp.flavor = parts[0] == "psi" ? Flavor::Down : Flavor::Up;
        sp.n = parse_int(parts[1]);
        return sp;
    }
    if (parts[0] == "superposition") {
        if (parts.size() != 3)
            throw std::invalid_argument(
                "state: expected superposition:<re1>,<im1>,<re2>,<im2>:<n>, got '" + s + "'");
        auto nums = split(parts[1], ',');
        if (nums.size() != 4)
            throw std::invalid_argument("state: superposition needs four amplitude components");
        sp.kind = StateSpec::Kind::Superposition;
        sp.y1 = cd(parse_double(nums[0]), parse_double(nums[1]));
        sp.y2 = cd(parse_double(nums[2]), parse_double(nums[3]));
        sp.n = parse_int(parts[2]);
        return sp;
    }
    throw std::invalid_argument("state: unknown descriptor '" + s + "'");
}

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_csv(const std::string& path, const TimeSeries& ts,
               const std::string& index_name = "t") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << index_name;
    for (const auto& n : ts.names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < ts.t.size(); ++i) {
        out << fmt(ts.t[i]);
        for (const auto& col : ts.cols) out << ',' << fmt(col[i]);
        out << '\n';
    }
    out.flush();
    if (!out.good()) throw std::runtime_error("failed writing '" + path + "'");
}

// Collects diagnostics along the way and writes the sidecar once at the end.
struct Sidecar {
    json j = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void finish(const RunConfig& cfg, int exit_code) {
        j["config"] = json::parse(serialize_config(cfg));
        j["exit_code"] = exit_code;
        j["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string path = cfg.metadata.empty() ? cfg.output + ".meta.json" : cfg.metadata;
        std::ofstream out(path);
        if (out) out << j.dump(2) << '\n';
        if (!out.good()) std::fprintf(stderr, "warning: failed writing metadata '%s'\n", path.c_str());
    }
};

// ---------------------------------------------------------------------------
// Feasibility

// Upper bound on the operator count of a scheme: the number of pair-factor
// monomials of degree d is at most C(2N, d/2) (creation-pair, annihilation-pair
// and number slots together give 2N choices).  Returns 0 when the scheme string
// does not parse; the truncation builder then reports the config error.
double truncation_bound(const std::string& scheme, int N) {
    if (scheme.size() < 2 || scheme[0] != 'T') return 0.0;
    std::string rest = scheme.substr(1);
    int deg = -1;
    try {
        auto ppos = rest.find('p');
        if (ppos == std::string::npos)
            deg = parse_int(rest);
        else if (ppos == 0)
            deg = 2 * parse_int(rest.substr(1));
        else
            deg = parse_int(rest.substr(0, ppos));
    } catch (const std::exception&) {
        return 0.0;
    }
    if (deg < 0) return 0.0;
    double bound = 0.0;
    double c = 1.0;  // C(2N, m)
    for (int m = 0; 2 * m <= deg; ++m) {
        bound += c;
        c = c * (2.0 * N - m) / (m + 1);
        if (bound > 1e15) return bound;
    }
    return bound;
}

constexpr double kMaxBasisBound = 5e6;
constexpr int kMaxEdSites = 12;

// ---------------------------------------------------------------------------
// Observable selection

struct ObsPlan {
    bool sz = false;
    bool cx1 = false;
    bool czz = false;
    bool energy = false;
    std::vector<int> m_list;
};

ObsPlan make_plan(const RunConfig& cfg) {
    ObsPlan pl;
    if (cfg.observables.empty()) throw std::invalid_argument("observables: empty list");
    for (const auto& o : cfg.observables) {
        if (o == "sz")
            pl.sz = true;
        else if (o == "cx1")
            pl.cx1 = true;
        else if (o == "czz")
            pl.czz = true;
        else if (o == "energy")
            pl.energy = true;
        else
            throw std::invalid_argument("observables: unknown entry '" + o + "'");
    }
    if (cfg.mode == "correlate") pl.czz = true;
    if (pl.czz) {
        pl.m_list = cfg.czz_m;
        if (pl.m_list.empty())
            for (int m = 0; m <= cfg.model.N / 2; ++m) pl.m_list.push_back(m);
        for (int m : pl.m_list)
            if (m < -cfg.model.N / 2 || m > cfg.model.N / 2)
                throw std::invalid_argument("czz_m: separation out of range");
    }
    return pl;
}

// ---------------------------------------------------------------------------
// Kinetic trajectory core

// Observable signs of the reporting frame.  Evolving a particle-hole
// transformed state in the transformed model leaves pair expectations
// unchanged but flips the sign of S^z and of the nearest-neighbour xx
// correlator when mapped back to the original chain.
struct Frame {
    double sz_sign = 1.0;
    double cx1_sign = 1.0;
};

struct TrajectoryResult {
    TimeSeries series;
    EvolveStats stats;
    std::size_t basis_size = 0;
    long long dropped_terms = 0;
    bool degree_skip_active = false;
    long long projection_dropped = 0;
    double max_imag_residue = 0.0;
    double min_density_margin = 1.0;
    double max_pair_residual = 0.0;
};

TrajectoryResult run_kinetic(const ModelParams& par, const std::string& scheme, int n,
                             Flavor flavor, const TrajectoryConfig& traj, bool quadratic_only,
                             const ObsPlan& pl, const Frame& frame) {
    Model model = build_model(par);
    Truncation trunc = build_truncation(scheme, par.N);
    if (pl.czz && trunc.max_degree < 4)
        throw std::invalid_argument("czz requires a degree-4 truncation, got '" + scheme + "'");

    TrajectoryResult res;
    res.basis_size = trunc.size();
    KineticSystem sys = build_generator(
        model, trunc, quadratic_only ? HamiltonianMode::QuadraticOnly : HamiltonianMode::Full);
    res.dropped_terms = sys.dropped_terms;
    res.degree_skip_active = sys.degree_skip_active;

    PolarizedState st = make_polarized_state(model, n, flavor);
    Eigen::VectorXcd X0 = initial_vector(st, trunc, model);
    QuadraticIndices qi = quadratic_indices(trunc);
    Eigen::VectorXcd hw;
    if (pl.energy)
        hw = hamiltonian_projection(model, trunc, quadratic_only, &res.projection_dropped);

    TimeSeries& ts = res.series;
    if (pl.sz) ts.names.push_back("Sz");
    if (pl.cx1) ts.names.push_back("Cx1");
    for (int m : pl.m_list) ts.names.push_back("Czm_" + std::to_string(m));
    if (pl.energy) ts.names.push_back("energy");
    ts.names.push_back("density_margin");
    ts.names.push_back("pair_residual");
    ts.cols.assign(ts.names.size(), {});

    const int N = par.N;
    auto on_sample = [&](double t, const Eigen::VectorXcd& X) {
        ts.t.push_back(t);
        std::size_t c = 0;
        double resid = 0.0;
        if (pl.sz) {
            ts.cols[c++].push_back(frame.sz_sign * spin_z(X, trunc, model, &resid));
            res.max_imag_residue = std::max(res.max_imag_residue, resid);
        }
        if (pl.cx1) {
            ts.cols[c++].push_back(frame.cx1_sign * corr_xx_nn(X, trunc, model, &resid));
            res.max_imag_residue = std::max(res.max_imag_residue, resid);
        }
        for (int m : pl.m_list) ts.cols[c++].push_back(corr_zz(X, trunc, model, m));
        if (pl.energy) {
            cd e = hw.cwiseProduct(X).sum();
            ts.cols[c++].push_back(e.real() / N);  // per-site, like the exact reference
        }
        double dens = 0.0;
        for (int q = 0; q < N; ++q) dens += X[qi.number[static_cast<std::size_t>(q)]].real();
        dens /= N;
        double margin = std::min(dens, 1.0 - dens);
        res.min_density_margin = std::min(res.min_density_margin, margin);
        ts.cols[c++].push_back(margin);
        double pr = paired_momentum_residual(trunc, X);
        res.max_pair_residual = std::max(res.max_pair_residual, pr);
        ts.cols[c++].push_back(pr);
    };
    res.stats = evolve(sys, X0, traj, on_sample);
    return res;
}

void record_trajectory(json& j, const TrajectoryResult& res) {
    j["basis_size"] = res.basis_size;
    j["dropped_terms"] = res.dropped_terms;
    j["degree_skip_active"] = res.degree_skip_active;
    j["projection_dropped"] = res.projection_dropped;
    j["max_imag_residue"] = res.max_imag_residue;
    j["min_density_margin"] = res.min_density_margin;
    j["max_pair_residual"] = res.max_pair_residual;
    j["halving_residual"] = res.stats.halving_residual;
    j["halving_warning"] = res.stats.halving_warning;
    j["final_time"] = res.stats.final_time;
    j["aborted"] = res.stats.aborted;
    if (res.stats.aborted) j["abort_message"] = res.stats.message;
}

// ---------------------------------------------------------------------------
// Mode handlers.  Each returns a process exit code and finishes the sidecar.

// Resolves the model/flavor/frame actually evolved.  With particle_hole set,
// the run uses the transformed couplings (-h, -Jx) and the opposite flavor;
// the state it propagates then has low fermion density even when the physical
// one is nearly full.
struct EvolutionSetup {
    ModelParams par;
    Flavor flavor = Flavor::Down;
    Frame frame;
};

EvolutionSetup resolve_frame(const RunConfig& cfg, const StateSpec& sp) {
    EvolutionSetup setup;
    setup.par = cfg.model;
    setup.flavor = sp.flavor;
    if (cfg.particle_hole) {
        setup.par = particle_hole(cfg.model);
        setup.flavor = sp.flavor == Flavor::Down ? Flavor::Up : Flavor::Down;
        setup.frame.sz_sign = -1.0;
        setup.frame.cx1_sign = -1.0;
    }
    return setup;
}

int finish_evolution(const RunConfig& cfg, Sidecar& meta, const TrajectoryResult& res,
                     TimeSeries ts) {
    if (res.stats.aborted) {
        std::fprintf(stderr, "numerical failure: %s\n", res.stats.message.c_str());
        meta.finish(cfg, kExitNumerical);
        return kExitNumerical;
    }
    write_csv(cfg.output, ts);
    meta.finish(cfg, kExitOk);
    return kExitOk;
}

int run_evolve(const RunConfig& cfg, const StateSpec& sp, const ObsPlan& pl, Sidecar& meta) {
    EvolutionSetup setup = resolve_frame(cfg, sp);
    TrajectoryResult res = run_kinetic(setup.par, cfg.truncation, sp.n, setup.flavor, cfg.traj,
                                       cfg.quadratic_only, pl, setup.frame);
    meta.j["frame"] = cfg.particle_hole ? "particle_hole" : "direct";
    record_trajectory(meta.j, res);

    if (cfg.mode == "correlate") {
        // Append log-magnitude columns, clipped below at 1e-5, for light-cone
        // plots where the raw correlator spans many decades.
        TimeSeries& ts = res.series;
        std::size_t base = ts.names.size();
        for (std::size_t c0 = 0; c0 < base; ++c0) {
            if (ts.names[c0].rfind("Czm_", 0) != 0) continue;
            std::vector<double> logs;
            logs.reserve(ts.cols[c0].size());
            for (double v : ts.cols[c0])
                logs.push_back(std::max(std::log10(std::abs(v)), -5.0));
            ts.names.push_back("log10" + ts.names[c0]);
            ts.cols.push_back(std::move(logs));
        }
    }
    return finish_evolution(cfg, meta, res, res.series);
}

int run_superposition(const RunConfig& cfg, const StateSpec& sp, const ObsPlan& pl,
                      Sidecar& meta) {
    if (cfg.particle_hole)
        throw std::invalid_argument(
            "superposition states already combine both frames; particle_hole must be false");
    if (pl.cx1 || pl.czz || pl.energy || !pl.sz)
        throw std::invalid_argument(
            "superposition evolution supports only the sz observable");
    if (cfg.model.N <= 4 * sp.n + 2)
        throw std::invalid_argument(
            "superposition: cross terms vanish only for N > 4n + 2");

    SuperpositionSpec spec{sp.y1, sp.y2, sp.n};
    TrajectoryResult down = run_kinetic(cfg.model, cfg.truncation, sp.n, Flavor::Down, cfg.traj,
                                        cfg.quadratic_only, pl, Frame{});
    // The mirror branch evolves chi^n of the original chain as psi^n of the
    // transformed one; its S^z enters the combination with its own sign, which
    // decoupled_superposition() handles, so the raw column is kept unflipped.
    TrajectoryResult mirror = run_kinetic(particle_hole(cfg.model), cfg.truncation, sp.n,
                                          Flavor::Down, cfg.traj, cfg.quadratic_only, pl, Frame{});
    meta.j["frame"] = "superposition";
    record_trajectory(meta.j["branch_down"], down);
    record_trajectory(meta.j["branch_mirror"], mirror);
    if (down.stats.aborted || mirror.stats.aborted) {
        const auto& bad = down.stats.aborted ? down.stats : mirror.stats;
        std::fprintf(stderr, "numerical failure: %s\n", bad.message.c_str());
        meta.finish(cfg, kExitNumerical);
        return kExitNumerical;
    }

    double w1 = std::norm(sp.y1);
    double w2 = std::norm(sp.y2);
    double initial = w1 * down.series.column("Sz").front() -
                     w2 * mirror.series.column("Sz").front();
    TimeSeries combo = decoupled_superposition(spec, down.series, mirror.series, initial);
    write_csv(cfg.output, combo);
    meta.finish(cfg, kExitOk);
    return kExitOk;
}

int run_ed(const RunConfig& cfg, const StateSpec& sp, const ObsPlan& pl, Sidecar& meta) {
    if (cfg.model.N > kMaxEdSites) {
        std::fprintf(stderr, "feasibility: exact diagonalization limited to N <= %d\n",
                     kMaxEdSites);
        return kExitFeasibility;
    }
    Model model = build_model(cfg.model);
    Eigen::VectorXcd init;
    switch (sp.kind) {
        case StateSpec::Kind::Vacuum:
            init = ed::bogoliubov_vacuum(model);
            break;
        case StateSpec::Kind::Polarized:
            init = sp.flavor == Flavor::Down ? ed::psi_state_fock(model, sp.n)
                                             : ed::chi_state_fock(model, sp.n);
            break;
        case StateSpec::Kind::Superposition: {
            double norm2 = std::norm(sp.y1) + std::norm(sp.y2);
            if (std::abs(norm2 - 1.0) > 1e-12)
                throw std::invalid_argument("superposition amplitudes must satisfy |y1|^2 + |y2|^2 = 1");
            init = sp.y1 * ed::psi_state_fock(model, sp.n) +
                   sp.y2 * ed::chi_state_fock(model, sp.n);
            break;
        }
    }
    ed::EdObservables obs;
    obs.spin_z = pl.sz;
    obs.czm = pl.m_list;
    obs.cx1 = pl.cx1;
    obs.energy = pl.energy;
    std::vector<double> times = sample_times(cfg.traj);
    TimeSeries ts = ed::ed_evolve(model, init, times, obs);
    // Exact evolution is frame independent, so particle_hole changes nothing.
    meta.j["frame"] = "direct";
    if (cfg.particle_hole) meta.j["note"] = "particle_hole has no effect on the exact reference";
    meta.j["hilbert_dimension"] = std::size_t(1) << cfg.model.N;
    write_csv(cfg.output, ts);
    meta.finish(cfg, kExitOk);
    return kExitOk;
}

int run_benchmark(const RunConfig& cfg, const StateSpec& sp, Sidecar& meta) {
    if (sp.kind == StateSpec::Kind::Superposition)
        throw std::invalid_argument("benchmark mode supports polarized and vacuum states only");
    if (cfg.model.N > kMaxEdSites) {
        std::fprintf(stderr, "feasibility: benchmark needs the exact reference, N <= %d\n",
                     kMaxEdSites);
        return kExitFeasibility;
    }
    std::vector<std::string> schemes = cfg.benchmark_truncations;
    if (schemes.empty()) schemes = {"T2", "Tp2", "T4", "T6p3", "T6p4", "Tp4"};
    for (const auto& s : schemes) {
        if (truncation_bound(s, cfg.model.N) > kMaxBasisBound) {
            std::fprintf(stderr, "feasibility: truncation '%s' too large at N = %d\n", s.c_str(),
                         cfg.model.N);
            return kExitFeasibility;
        }
    }

    // The reference always evolves the physical state in the physical model;
    // particle_hole only routes the kinetic solver through the transformed
    // frame, whose output is mapped back to physical observables.
    Model model = build_model(cfg.model);
    Eigen::VectorXcd init = sp.kind == StateSpec::Kind::Vacuum
                                ? ed::bogoliubov_vacuum(model)
                                : (sp.flavor == Flavor::Down ? ed::psi_state_fock(model, sp.n)
                                                             : ed::chi_state_fock(model, sp.n));
    std::vector<double> times = sample_times(cfg.traj);
    ed::EdObservables obs;
    obs.spin_z = true;
    TimeSeries ed_ts = ed::ed_evolve(model, init, times, obs);
    const std::vector<double>& ed_sz = ed_ts.column("Sz");

    TimeSeries out;
    out.t = times;
    out.names.push_back("Sz_ed");
    out.cols.push_back(ed_sz);

    ObsPlan pl;
    pl.sz = true;
    EvolutionSetup setup = resolve_frame(cfg, sp);
    meta.j["frame"] = cfg.particle_hole ? "particle_hole" : "direct";
    meta.j["schemes"] = json::object();
    for (const auto& s : schemes) {
        TrajectoryResult res = run_kinetic(setup.par, s, sp.n, setup.flavor, cfg.traj,
                                           cfg.quadratic_only, pl, setup.frame);
        record_trajectory(meta.j["schemes"][s], res);
        if (res.stats.aborted) {
            std::fprintf(stderr, "numerical failure in '%s': %s\n", s.c_str(),
                         res.stats.message.c_str());
            meta.finish(cfg, kExitNumerical);
            return kExitNumerical;
        }
        if (res.series.t.size() != times.size())
            throw std::runtime_error("benchmark: sample grids disagree");
        const std::vector<double>& sz = res.series.column("Sz");
        std::vector<double> delta = ed::accuracy_metric(times, sz, ed_sz);
        out.names.push_back("Sz_" + s);
        out.cols.push_back(sz);
        out.names.push_back("Delta_" + s);
        out.cols.push_back(delta);
    }
    write_csv(cfg.output, out);
    meta.finish(cfg, kExitOk);
    return kExitOk;
}

int run_thermal(const RunConfig& cfg, Sidecar& meta) {
    Model model = build_model(cfg.model);
    ThermalExpansion th = thermal_expansion(model);
    std::vector<double> grid = cfg.beta_grid;
    if (grid.empty())
        for (int i = -40; i <= 40; ++i) grid.push_back(0.05 * i);

    bool with_energy_ed = cfg.model.N <= kMaxEdSites;
    bool with_sz_ed = cfg.model.N <= 10;
    ed::ThermalEd ted;
    if (with_energy_ed) ted = ed::thermal_build(model, with_sz_ed);

    TimeSeries out;
    out.t = grid;
    out.names = {"energy_expansion", "sz_expansion"};
    out.cols.assign(2, {});
    if (with_energy_ed) {
        out.names.push_back("energy_ed");
        out.cols.emplace_back();
    }
    if (with_sz_ed) {
        out.names.push_back("sz_ed");
        out.cols.emplace_back();
    }
    for (double beta : grid) {
        std::size_t c = 0;
        out.cols[c++].push_back(th.energy_density(beta));
        out.cols[c++].push_back(th.spin_z(beta));
        if (with_energy_ed) out.cols[c++].push_back(ed::thermal_energy_density(ted, beta));
        if (with_sz_ed) out.cols[c++].push_back(ed::thermal_spin_z(ted, beta));
    }
    meta.j["K1"] = th.K1;
    meta.j["K2"] = th.K2;
    Timescales sc = timescales(model);
    meta.j["tau"] = sc.tau;
    meta.j["tau_trav"] = sc.tau_trav;
    write_csv(cfg.output, out, "beta");
    meta.finish(cfg, kExitOk);
    return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg) {
    Sidecar meta;
    try {
        if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
        std::string mode = cfg.mode == "lke" ? "evolve" : cfg.mode;
        if (mode != "evolve" && mode != "ed" && mode != "benchmark" && mode != "thermal" &&
            mode != "correlate")
            throw std::invalid_argument("unknown mode '" + cfg.mode + "'");

        if (mode == "thermal") return run_thermal(cfg, meta);

        StateSpec sp = parse_state(cfg.state);
        ObsPlan pl = make_plan(cfg);

        if (mode == "benchmark") return run_benchmark(cfg, sp, meta);
        if (mode == "ed") return run_ed(cfg, sp, pl, meta);

        // evolve / correlate share the kinetic path.
        double bound = truncation_bound(cfg.truncation, cfg.model.N);
        if (bound > kMaxBasisBound) {
            std::fprintf(stderr,
                         "feasibility: truncation '%s' at N = %d bounds %.3g operators "
                         "(limit %.3g)\n",
                         cfg.truncation.c_str(), cfg.model.N, bound, kMaxBasisBound);
            return kExitFeasibility;
        }
        if (sp.kind == StateSpec::Kind::Superposition)
            return run_superposition(cfg, sp, pl, meta);
        return run_evolve(cfg, sp, pl, meta);
    } catch (const std::length_error& e) {
        std::fprintf(stderr, "feasibility: %s\n", e.what());
        return kExitFeasibility;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "feasibility: out of memory\n");
        return kExitFeasibility;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
}

}  // namespace lke
