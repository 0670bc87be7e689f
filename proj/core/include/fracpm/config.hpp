#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracpm/fem.hpp"
#include "fracpm/mesh.hpp"

namespace fracpm {

struct InitialBump {
    enum class Kind { Gaussian, Blob };
    Kind kind = Kind::Gaussian;
    std::array<double, 2> center{0.0, 0.0};
    double sigma = 0.1;      // denominator of the squared-distance exponent
    double amplitude = 1.0;

    bool operator==(const InitialBump&) const = default;
};

struct CoeffConfig {
    enum class AKind { Identity, Diag };
    enum class QKind { Zero, Quadratic, Step };
    AKind a_kind = AKind::Identity;
    double a11 = 1.0, a22 = 1.0;
    QKind q_kind = QKind::Zero;
    double q_coef = 0.0;             // quadratic: Q = q_coef |x|^2
    double q_hi = 0.0, q_lo = 0.0;   // step in x2: hi above 0, lo below

    bool operator==(const CoeffConfig&) const = default;
};

/// Full run description; serializes to/from JSON with strict key checking.
struct SimConfig {
    std::array<double, 4> domain{-2.0, 2.0, -2.0, 2.0};  // x0, x1, y0, y1
    int nx = 64, ny = 64;
    double s = 0.75;
    double mu = 1.0;
    double dt = 0.05;
    double t_final = 1.0;
    std::optional<double> delta;     // nullopt = auto: min(1e-3, h)
    std::optional<double> l_cutoff;  // nullopt = auto: max(2 max rho0_h, 2)
    CoeffConfig coefficients;
    std::vector<InitialBump> initial;
    bool normalize_mass = false;
    bool force_s = false;
    std::vector<double> snapshot_times;
    std::string out_dir = "out";
    double rational_tol = 1e-9;
    double cg_tol = 1e-11;
    double fp_tol = 1e-10;

    bool operator==(const SimConfig&) const = default;

    Mesh buildMesh() const;
    CoefficientSet buildCoefficients() const;
    ScalarCoefficient initialDatum() const;

    /// delta/L defaults resolved against a mesh and a smoothed initial field.
    double resolveDelta(const Mesh& mesh) const;
    double resolveL(const NodalField& rho0) const;
};

/// Parses and validates; throws std::runtime_error with location info on
/// malformed input, unknown keys, or constraint violations.
SimConfig parseConfig(const std::string& path);
SimConfig parseConfigString(const std::string& text);

std::string configToJson(const SimConfig& config);
void writeConfig(const SimConfig& config, const std::string& path);

}  // namespace fracpm
