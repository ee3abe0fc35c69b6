#include "ifpp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ifpp {

namespace {

std::string fmt(double v) {
    if (v == kNegInf) return "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_value(const std::string& tok, const std::string& context) {
    if (tok == "-inf" || tok == "-Inf" || tok == "-INF") return kNegInf;
    double v;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw std::invalid_argument(context + ": cannot parse number '" + tok + "'");
    }
    return v;
}

std::vector<std::pair<double, double>> read_two_columns(const std::filesystem::path& path,
                                                        const std::string& header) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) {
        throw std::invalid_argument(path.string() + ": expected header '" + header + "', got '" +
                                    line + "'");
    }
    std::vector<std::pair<double, double>> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                        ": expected two comma-separated columns");
        }
        std::string ctx = path.string() + ":" + std::to_string(lineno);
        rows.emplace_back(parse_value(line.substr(0, comma), ctx),
                          parse_value(line.substr(comma + 1), ctx));
    }
    if (rows.empty()) throw std::invalid_argument(path.string() + ": no data rows");
    return rows;
}

std::map<std::string, DiffusionSpec>& registry() {
    static std::map<std::string, DiffusionSpec> reg;
    return reg;
}

}  // namespace

Boundary read_boundary_csv(const std::filesystem::path& path, BoundaryInterp interp,
                           std::optional<double> horizon) {
    auto rows = read_two_columns(path, "t,b");
    std::vector<double> t, v;
    for (auto [a, b] : rows) {
        t.push_back(a);
        v.push_back(b);
    }
    double T = horizon.value_or(t.back());
    if (interp == BoundaryInterp::piecewise_constant) {
        return Boundary::piecewise_constant(std::move(t), std::move(v), T);
    }
    return Boundary::piecewise_linear(std::move(t), std::move(v), T);
}

void write_boundary_csv(const std::filesystem::path& path, const std::vector<double>& t,
                        const std::vector<double>& b) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t,b\n";
    for (size_t i = 0; i < t.size(); ++i) out << fmt(t[i]) << "," << fmt(b[i]) << "\n";
}

void write_boundary_csv(const std::filesystem::path& path, const Boundary& b, int samples) {
    std::vector<double> t, v;
    if (!b.knot_times().empty()) {
        t = b.knot_times();
        v = b.knot_values();
    } else {
        for (int j = 1; j <= samples; ++j) {
            double s = b.horizon() * j / samples;
            t.push_back(s);
            v.push_back(b.value(s));
        }
    }
    write_boundary_csv(path, t, v);
}

SurvivalCurve read_survival_csv(const std::filesystem::path& path, std::optional<double> horizon) {
    auto rows = read_two_columns(path, "t,p");
    std::vector<double> t, p;
    for (auto [a, b] : rows) {
        t.push_back(a);
        p.push_back(b);
    }
    // tolerance-scale monotonicity slips are repaired, larger ones rejected
    for (size_t j = 1; j < p.size(); ++j) {
        if (p[j] > p[j - 1]) {
            if (p[j] - p[j - 1] < 1e-9) {
                p[j] = p[j - 1];
            } else {
                throw std::invalid_argument(path.string() + ": survival increases by " +
                                            std::to_string(p[j] - p[j - 1]) + " at t=" +
                                            std::to_string(t[j]));
            }
        }
    }
    auto curve = SurvivalCurve::from_samples(std::move(t), std::move(p));
    if (horizon) curve = curve.truncated(*horizon);
    return curve;
}

void write_survival_csv(const std::filesystem::path& path, const SurvivalCurve& p) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t,p\n";
    for (size_t i = 0; i < p.size(); ++i) {
        out << fmt(p.times()[i]) << "," << fmt(p.values()[i]) << "\n";
    }
}

void write_field_csv(const std::filesystem::path& path, const GridField& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t\\x";
    for (int k = 0; k < f.nx(); ++k) out << "," << fmt(f.lattice().x(k));
    out << "\n";
    for (size_t j = 0; j < f.rows(); ++j) {
        out << fmt(f.row_time(j));
        for (int k = 0; k < f.nx(); ++k) out << "," << fmt(f.at(j, k));
        out << "\n";
    }
}

void write_estimate_csv(const std::filesystem::path& path, const CrossingEstimate& est) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t,p_hat,ci99_half_width,p_strict,p_nonstrict\n";
    for (size_t i = 0; i < est.times.size(); ++i) {
        out << fmt(est.times[i]) << "," << fmt(est.p_hat[i]) << "," << fmt(est.ci_half_width[i])
            << "," << fmt(est.p_strict[i]) << "," << fmt(est.p_nonstrict[i]) << "\n";
    }
}

void write_landmarks_csv(const std::filesystem::path& path, const LandmarkSet& lm) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "n,i,t,bstar\n";
    for (const auto& pt : lm.points) {
        out << lm.level << "," << pt.cell << "," << fmt(pt.time) << "," << fmt(pt.envelope)
            << "\n";
    }
}

void register_diffusion(const std::string& name, DiffusionSpec spec) {
    registry()[name] = std::move(spec);
}

bool diffusion_registered(const std::string& name) { return registry().count(name) > 0; }

DiffusionSpec spec_from_json(const nlohmann::json& j) {
    std::string kind = j.value("kind", "bm");
    if (kind == "bm") return DiffusionSpec::brownian();
    if (kind == "bm-drift") return DiffusionSpec::brownian_with_drift(j.value("mu", 0.0));
    if (kind == "custom") {
        std::string name = j.value("name", "");
        auto it = registry().find(name);
        if (it == registry().end()) {
            throw std::invalid_argument("spec: custom diffusion '" + name + "' is not registered");
        }
        return it->second;
    }
    throw std::invalid_argument("spec: unknown kind '" + kind + "'");
}

InitialDistribution init_from_json(const nlohmann::json& j) {
    if (j.contains("init")) {
        const auto& ji = j.at("init");
        std::string kind = ji.value("kind", "point");
        if (kind == "point") return InitialDistribution::point_mass(ji.value("x0", 0.0));
        if (kind == "gaussian") {
            return InitialDistribution::gaussian(ji.value("mean", 0.0), ji.value("sd", 1.0));
        }
        throw std::invalid_argument("init: unknown kind '" + kind + "'");
    }
    if (j.contains("x0")) return InitialDistribution::point_mass(j.at("x0").get<double>());
    throw std::invalid_argument("spec: needs either \"x0\" or an \"init\" object");
}

nlohmann::json config_to_json(const SolverConfig& c) {
    return nlohmann::json{{"dx", c.dx},
                          {"dt", c.dt},
                          {"theta", c.theta},
                          {"rannacher_half_steps", c.rannacher_half_steps},
                          {"level", c.level},
                          {"refine_from", c.refine_from},
                          {"extrapolate", c.extrapolate},
                          {"warm_start_time", c.warm_start_time},
                          {"pad_sd", c.pad_sd},
                          {"quantile_eps", c.quantile_eps},
                          {"psor_omega", c.psor_omega},
                          {"psor_tol", c.psor_tol},
                          {"psor_max_sweeps", c.psor_max_sweeps},
                          {"eps_w_rel", c.eps_w_rel},
                          {"activity_tol", c.activity_tol},
                          {"t_min_rows", c.t_min_rows},
                          {"mc_paths", c.mc_paths},
                          {"mc_dt", c.mc_dt},
                          {"seed", c.seed},
                          {"bridge", c.bridge}};
}

SolverConfig config_from_json(const nlohmann::json& j) {
    SolverConfig c;
    c.dx = j.value("dx", c.dx);
    c.dt = j.value("dt", c.dt);
    c.theta = j.value("theta", c.theta);
    c.rannacher_half_steps = j.value("rannacher_half_steps", c.rannacher_half_steps);
    c.level = j.value("level", c.level);
    c.refine_from = j.value("refine_from", c.refine_from);
    c.extrapolate = j.value("extrapolate", c.extrapolate);
    c.warm_start_time = j.value("warm_start_time", c.warm_start_time);
    c.pad_sd = j.value("pad_sd", c.pad_sd);
    c.quantile_eps = j.value("quantile_eps", c.quantile_eps);
    c.psor_omega = j.value("psor_omega", c.psor_omega);
    c.psor_tol = j.value("psor_tol", c.psor_tol);
    c.psor_max_sweeps = j.value("psor_max_sweeps", c.psor_max_sweeps);
    c.eps_w_rel = j.value("eps_w_rel", c.eps_w_rel);
    c.activity_tol = j.value("activity_tol", c.activity_tol);
    c.t_min_rows = j.value("t_min_rows", c.t_min_rows);
    c.mc_paths = j.value("mc_paths", c.mc_paths);
    c.mc_dt = j.value("mc_dt", c.mc_dt);
    c.seed = j.value("seed", c.seed);
    c.bridge = j.value("bridge", c.bridge);
    return c;
}

std::string config_hash(const SolverConfig& c) {
    std::ostringstream os;
    os << std::hex << fnv1a64(config_to_json(c).dump());
    return os.str();
}

}  // namespace ifpp
