#include "fracpm/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fracpm {

using nlohmann::json;

namespace {

void requireKeys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

InitialBump parseBump(const json& j) {
    requireKeys(j, {"kind", "center", "sigma", "amplitude"}, "initial[]");
    InitialBump b;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian")
        b.kind = InitialBump::Kind::Gaussian;
    else if (kind == "blob")
        b.kind = InitialBump::Kind::Blob;
    else
        throw std::runtime_error("config: initial kind must be gaussian or blob");
    const auto c = j.at("center");
    b.center = {c.at(0).get<double>(), c.at(1).get<double>()};
    b.sigma = j.at("sigma").get<double>();
    b.amplitude = j.value("amplitude", 1.0);
    if (!(b.sigma > 0.0)) throw std::runtime_error("config: bump sigma must be positive");
    return b;
}

CoeffConfig parseCoeff(const json& j) {
    requireKeys(j, {"A", "Q"}, "coefficients");
    CoeffConfig c;
    const json& a = j.at("A");
    const std::string ak = a.at("kind").get<std::string>();
    if (ak == "identity") {
        requireKeys(a, {"kind"}, "coefficients.A");
        c.a_kind = CoeffConfig::AKind::Identity;
    } else if (ak == "diag") {
        requireKeys(a, {"kind", "a11", "a22"}, "coefficients.A");
        c.a_kind = CoeffConfig::AKind::Diag;
        c.a11 = a.at("a11").get<double>();
        c.a22 = a.at("a22").get<double>();
        if (!(c.a11 > 0.0 && c.a22 > 0.0))
            throw std::runtime_error("config: diagonal A entries must be positive");
    } else {
        throw std::runtime_error("config: A kind must be identity or diag");
    }
    const json& q = j.at("Q");
    const std::string qk = q.at("kind").get<std::string>();
    if (qk == "zero") {
        requireKeys(q, {"kind"}, "coefficients.Q");
        c.q_kind = CoeffConfig::QKind::Zero;
    } else if (qk == "quadratic") {
        requireKeys(q, {"kind", "coef"}, "coefficients.Q");
        c.q_kind = CoeffConfig::QKind::Quadratic;
        c.q_coef = q.at("coef").get<double>();
        if (!(c.q_coef > 0.0))
            throw std::runtime_error("config: quadratic Q coef must be positive");
    } else if (qk == "step") {
        requireKeys(q, {"kind", "hi", "lo"}, "coefficients.Q");
        c.q_kind = CoeffConfig::QKind::Step;
        c.q_hi = q.at("hi").get<double>();
        c.q_lo = q.at("lo").get<double>();
        if (!(c.q_hi >= 0.0 && c.q_lo >= 0.0))
            throw std::runtime_error("config: step Q levels must be nonnegative");
    } else {
        throw std::runtime_error("config: Q kind must be zero, quadratic or step");
    }
    return c;
}

SimConfig fromJson(const json& j) {
    requireKeys(j,
                {"domain", "nx", "ny", "s", "mu", "dt", "t_final", "delta", "L_cutoff",
                 "coefficients", "initial", "normalize_mass", "force_s",
                 "snapshot_times", "out_dir", "tolerances"},
                "top level");
    SimConfig c;
    const auto d = j.at("domain");
    c.domain = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>(),
                d.at(3).get<double>()};
    c.nx = j.at("nx").get<int>();
    c.ny = j.at("ny").get<int>();
    c.s = j.at("s").get<double>();
    c.mu = j.at("mu").get<double>();
    c.dt = j.at("dt").get<double>();
    c.t_final = j.at("t_final").get<double>();

    if (j.contains("delta")) {
        const json& v = j.at("delta");
        if (v.is_string() && v.get<std::string>() == "auto")
            c.delta = std::nullopt;
        else
            c.delta = v.get<double>();
    }
    if (j.contains("L_cutoff")) {
        const json& v = j.at("L_cutoff");
        if (v.is_string() && v.get<std::string>() == "auto")
            c.l_cutoff = std::nullopt;
        else
            c.l_cutoff = v.get<double>();
    }
    c.coefficients = parseCoeff(j.at("coefficients"));
    for (const auto& b : j.at("initial")) c.initial.push_back(parseBump(b));
    c.normalize_mass = j.value("normalize_mass", false);
    c.force_s = j.value("force_s", false);
    if (j.contains("snapshot_times"))
        c.snapshot_times = j.at("snapshot_times").get<std::vector<double>>();
    c.out_dir = j.value("out_dir", std::string("out"));
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        requireKeys(t, {"rational", "cg", "fp"}, "tolerances");
        c.rational_tol = t.value("rational", 1e-9);
        c.cg_tol = t.value("cg", 1e-11);
        c.fp_tol = t.value("fp", 1e-10);
    }

    if (!(c.domain[1] > c.domain[0] && c.domain[3] > c.domain[2]))
        throw std::runtime_error("config: degenerate domain");
    if (c.nx <= 0 || c.ny <= 0) throw std::runtime_error("config: nx, ny must be positive");
    if (!c.force_s && !(c.s > 0.5 && c.s < 1.0))
        throw std::runtime_error("config: s must lie in (1/2, 1); set force_s to override");
    if (!(c.dt > 0.0 && c.t_final > 0.0))
        throw std::runtime_error("config: dt and t_final must be positive");
    if (!(c.mu >= 0.0)) throw std::runtime_error("config: mu must be nonnegative");
    if (c.delta && !(*c.delta > 0.0 && *c.delta < 1.0))
        throw std::runtime_error("config: delta must lie in (0, 1)");
    if (c.l_cutoff && !(*c.l_cutoff > 1.0))
        throw std::runtime_error("config: L_cutoff must exceed 1");
    if (c.initial.empty()) throw std::runtime_error("config: initial data list is empty");
    return c;
}

json toJson(const SimConfig& c) {
    json j;
    j["domain"] = c.domain;
    j["nx"] = c.nx;
    j["ny"] = c.ny;
    j["s"] = c.s;
    j["mu"] = c.mu;
    j["dt"] = c.dt;
    j["t_final"] = c.t_final;
    j["delta"] = c.delta ? json(*c.delta) : json("auto");
    j["L_cutoff"] = c.l_cutoff ? json(*c.l_cutoff) : json("auto");

    json a;
    if (c.coefficients.a_kind == CoeffConfig::AKind::Identity) {
        a = {{"kind", "identity"}};
    } else {
        a = {{"kind", "diag"}, {"a11", c.coefficients.a11}, {"a22", c.coefficients.a22}};
    }
    json q;
    switch (c.coefficients.q_kind) {
        case CoeffConfig::QKind::Zero:
            q = {{"kind", "zero"}};
            break;
        case CoeffConfig::QKind::Quadratic:
            q = {{"kind", "quadratic"}, {"coef", c.coefficients.q_coef}};
            break;
        case CoeffConfig::QKind::Step:
            q = {{"kind", "step"}, {"hi", c.coefficients.q_hi}, {"lo", c.coefficients.q_lo}};
            break;
    }
    j["coefficients"] = {{"A", a}, {"Q", q}};

    j["initial"] = json::array();
    for (const auto& b : c.initial) {
        j["initial"].push_back(
            {{"kind", b.kind == InitialBump::Kind::Gaussian ? "gaussian" : "blob"},
             {"center", b.center},
             {"sigma", b.sigma},
             {"amplitude", b.amplitude}});
    }
    j["normalize_mass"] = c.normalize_mass;
    j["force_s"] = c.force_s;
    j["snapshot_times"] = c.snapshot_times;
    j["out_dir"] = c.out_dir;
    j["tolerances"] = {{"rational", c.rational_tol}, {"cg", c.cg_tol}, {"fp", c.fp_tol}};
    return j;
}

}  // namespace

SimConfig parseConfigString(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: parse error: ") + e.what());
    }
    return fromJson(j);
}

SimConfig parseConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseConfigString(buf.str());
}

std::string configToJson(const SimConfig& config) { return toJson(config).dump(2) + "\n"; }

void writeConfig(const SimConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << configToJson(config);
}

Mesh SimConfig::buildMesh() const {
    return Mesh::buildRect(domain[0], domain[1], domain[2], domain[3], nx, ny);
}

CoefficientSet SimConfig::buildCoefficients() const {
    const CoeffConfig& cc = coefficients;
    ScalarCoefficient q;
    bool q_zero = false;
    switch (cc.q_kind) {
        case CoeffConfig::QKind::Zero:
            q = [](double, double) { return 0.0; };
            q_zero = true;
            break;
        case CoeffConfig::QKind::Quadratic: {
            const double coef = cc.q_coef;
            q = [coef](double x, double y) { return coef * (x * x + y * y); };
            break;
        }
        case CoeffConfig::QKind::Step: {
            const double hi = cc.q_hi, lo = cc.q_lo;
            q = [hi, lo](double, double y) { return y > 0.0 ? hi : lo; };
            break;
        }
    }
    if (cc.a_kind == CoeffConfig::AKind::Identity) {
        CoefficientSet out = CoefficientSet::isotropicLaplacian();
        out.q = std::move(q);
        out.q_is_zero = q_zero;
        return out;
    }
    return CoefficientSet::diagonal(cc.a11, cc.a22, std::move(q), q_zero);
}

ScalarCoefficient SimConfig::initialDatum() const {
    const std::vector<InitialBump> bumps = initial;
    return [bumps](double x, double y) {
        double v = 0.0;
        for (const auto& b : bumps) {
            const double r2 =
                (x - b.center[0]) * (x - b.center[0]) + (y - b.center[1]) * (y - b.center[1]);
            if (b.kind == InitialBump::Kind::Gaussian) {
                v += b.amplitude * std::exp(-r2 / b.sigma);
            } else if (r2 < b.sigma) {
                // Smooth compactly supported bump, value = amplitude at center.
                v += b.amplitude * std::exp(1.0 - 1.0 / (1.0 - r2 / b.sigma));
            }
        }
        return v;
    };
}

double SimConfig::resolveDelta(const Mesh& mesh) const {
    return delta ? *delta : std::min(1e-3, mesh.maxDiameter());
}

double SimConfig::resolveL(const NodalField& rho0) const {
    if (l_cutoff) return *l_cutoff;
    const double max_rho = *std::max_element(rho0.begin(), rho0.end());
    return std::max(2.0 * max_rho, 2.0);
}

}  // namespace fracpm
